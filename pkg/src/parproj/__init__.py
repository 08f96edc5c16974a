"""Unification, projectivity and relativised admissibility for CPC and IPC."""
