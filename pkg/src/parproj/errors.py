"""Exception types. Negative verdicts are exceptions only where the API
returns a witness on success."""


class ParprojError(Exception):
    pass


class NotUnifiable(ParprojError):
    def __init__(self, formula, detail=""):
        super().__init__(f"not unifiable: {formula}" + (f" ({detail})" if detail else ""))
        self.formula = formula


class NotProjective(ParprojError):
    def __init__(self, formula, target=None):
        msg = f"not projective: {formula}"
        if target is not None:
            msg += f" (target {target})"
        super().__init__(msg)
        self.formula = formula
        self.target = target


class TauNotUnifier(ParprojError):
    def __init__(self, formula, tau):
        super().__init__(f"{tau} does not unify {formula}")
        self.formula = formula
        self.tau = tau


class LimitExceeded(ParprojError):
    def __init__(self, what, count, limit):
        super().__init__(f"{what}: {count} exceeds limit {limit}")
        self.what = what
        self.count = count
        self.limit = limit


class ModelError(ParprojError, ValueError):
    pass


class NotRooted(ModelError):
    pass


class PersistenceViolation(ModelError):
    def __init__(self, lower, upper, atom):
        super().__init__(f"persistence violated: {atom} holds at {lower} but not at {upper}")
        self.lower, self.upper, self.atom = lower, upper, atom


class ClusterError(ModelError):
    pass


class XDisagreement(ModelError):
    pass


class InternalInvariantBroken(ParprojError, AssertionError):
    pass


class SignatureExhausted(ParprojError):
    pass
