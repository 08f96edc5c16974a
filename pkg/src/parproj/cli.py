"""Command line interface: ``parproj <subcommand> ...``.

Exit codes: 0 positive verdict, 1 negative verdict, 2 usage or input
error, 3 a configured resource limit was exceeded.
"""
from __future__ import annotations

import functools
import json
import os
import sys
from dataclasses import replace

import click

from . import admissibility as adm
from . import classical as cl
from . import kripke
from . import projectivity as pj
from .bisim import DEFAULT_LIMITS, build_bank, check_characteristic
from .errors import (
    LimitExceeded, ModelError, NotProjective, NotUnifiable, ParprojError, SignatureExhausted,
)
from .formula import TOP, ParseError, Signature, Substitution, complexity, imp, parse, to_text
from .prover import DEFAULT_PROVER

EXIT_YES, EXIT_NO, EXIT_USAGE, EXIT_LIMIT = 0, 1, 2, 3
DEFINABLES_LIMIT = 100000


class Ctx:
    def __init__(self, logic, variables, parameters, bound, max_reps, as_json):
        self.logic = logic
        self.sig = Signature(_names(variables), _names(parameters))
        self.bound = bound
        self.limits = replace(DEFAULT_LIMITS, max_reps=max_reps) if max_reps else DEFAULT_LIMITS
        self.json = as_json
        self._names = (_names(variables), _names(parameters))

    def update(self, logic, variables, parameters, bound, max_reps, as_json):
        if logic:
            self.logic = logic
        if variables or parameters:
            vs = self._names[0] + _names(variables)
            ps = self._names[1] + _names(parameters)
            self.sig = Signature(vs, ps)
        if bound is not None:
            self.bound = bound
        if max_reps:
            self.limits = replace(DEFAULT_LIMITS, max_reps=max_reps)
        self.json = self.json or as_json

    def parse(self, text: str):
        try:
            return parse(text, self.sig)
        except (ParseError, ValueError) as exc:
            raise click.UsageError(f"cannot parse {text!r}: {exc}") from None

    def gamma(self, text: str):
        return [self.parse(part) for part in text.split(";") if part.strip()]


def _names(text: str | None) -> list[str]:
    return [s.strip() for s in (text or "").split(",") if s.strip()]


def _classical() -> bool:
    ctx = click.get_current_context(silent=True)
    obj = ctx.find_object(Ctx) if ctx else None
    return bool(obj and obj.logic == "cpc")


def subst_lines(theta: Substitution) -> list[str]:
    theta = pj.compact_substitution(theta, classical=_classical())
    return [f"{x.name} := {to_text(f)}" for x, f in theta.items()]


def subst_json(theta: Substitution) -> dict:
    theta = pj.compact_substitution(theta, classical=_classical())
    return {x.name: to_text(f) for x, f in theta.items()}


def common_options(fn):
    """Global options also accepted after the subcommand name; these win."""
    opts = [
        click.option("--logic", type=click.Choice(["cpc", "ipc"]), default=None),
        click.option("--vars", "variables", default=None),
        click.option("--pars", "parameters", default=None),
        click.option("--bound", type=int, default=None),
        click.option("--max-reps", type=int, default=None),
        click.option("--json", "as_json", is_flag=True, default=False),
    ]

    @functools.wraps(fn)
    def wrapper(*args, logic, variables, parameters, bound, max_reps, as_json, **kw):
        ctx = click.get_current_context().find_object(Ctx)
        try:
            ctx.update(logic, variables, parameters, bound, max_reps, as_json)
        except ValueError as exc:
            raise click.UsageError(str(exc)) from None
        return fn(ctx, *args, **kw)

    for opt in reversed(opts):
        wrapper = opt(wrapper)
    return wrapper


def report(ctx: Ctx, verdict: bool | None, lines=(), data=None) -> None:
    if ctx.json:
        out = {"verdict": None if verdict is None else ("YES" if verdict else "NO")}
        out.update(data or {})
        click.echo(json.dumps(out, indent=1, sort_keys=True))
    else:
        if verdict is not None:
            click.echo("YES" if verdict else "NO")
        for line in lines:
            click.echo(line)
    if verdict is False:
        sys.exit(EXIT_NO)


@click.group()
@click.option("--logic", type=click.Choice(["cpc", "ipc"]), default="ipc", show_default=True)
@click.option("--vars", "variables", help="Comma-separated identifiers to treat as variables.")
@click.option("--pars", "parameters", help="Comma-separated identifiers to treat as parameters.")
@click.option("--bound", type=int, default=None, help="Depth bound for interpolants.")
@click.option("--max-reps", type=int, default=None, help="Cap on bank representatives.")
@click.option("--json", "as_json", is_flag=True, help="Structured output.")
@click.pass_context
def main(click_ctx, logic, variables, parameters, bound, max_reps, as_json):
    """Unification, projectivity and admissibility with parameters."""
    try:
        click_ctx.obj = Ctx(logic, variables, parameters, bound, max_reps, as_json)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None


@main.command()
@click.argument("formula")
@common_options
def prove(ctx: Ctx, formula):
    """Decide validity; a refuted formula comes with a countermodel."""
    f = ctx.parse(formula)
    if ctx.logic == "cpc":
        report(ctx, cl.taut_c(f))
        return
    model = DEFAULT_PROVER.countermodel([], f)
    if model is None:
        report(ctx, True)
    else:
        report(ctx, False, ["countermodel:", json.dumps(model.to_dict(), sort_keys=True)],
               {"countermodel": model.to_dict()})


@main.command()
@click.argument("formula")
@common_options
def uap(ctx: Ctx, formula):
    """Strongest parameter-only consequence."""
    f = ctx.parse(formula)
    if ctx.logic == "cpc":
        e = cl.uap_c(f)
        report(ctx, None, [to_text(e)], {"uap": to_text(e)})
        return
    bound = ctx.bound if ctx.bound is not None else complexity(f) + 1
    e = pj.uap_i(f, bound, limits=ctx.limits)
    report(ctx, None, [to_text(e), f"bound: {bound}"], {"uap": to_text(e), "bound": bound})


@main.command()
@click.argument("formula")
@common_options
def unify(ctx: Ctx, formula):
    """A unifier (classical) or a complete set of unifiers (intuitionistic)."""
    f = ctx.parse(formula)
    if ctx.logic == "cpc":
        theta = cl.unifier_c(f)
        report(ctx, True, subst_lines(theta), {"unifier": subst_json(theta)})
        return
    thetas = pj.complete_unifiers_ext(f, TOP, limits=ctx.limits)
    _print_unifier_set(ctx, thetas)


@main.command()
@click.argument("formula")
@click.option("--ext", "ext", default="true", help="Parameter-only axiom of the extension.")
@common_options
def mgu(ctx: Ctx, formula, ext):
    """Most general unifier in the extension by a parameter-only axiom.

    For ipc a projective unifier of ``ext -> formula`` is reported; when that
    implication is not projective the answer is NO.
    """
    f, e = ctx.parse(formula), ctx.parse(ext)
    if ctx.logic == "cpc":
        theta = cl.mgu_ext_c(f, e)
    else:
        theta = pj.decide_E_projective(imp(e, f), TOP)
    report(ctx, True, subst_lines(theta), {"mgu": subst_json(theta)})


@main.command()
@click.argument("formula")
@click.option("--target", default=None, help="Parameter-only projection to test.")
@common_options
def project(ctx: Ctx, formula, target):
    """Projectivity onto a target, or onto the interpolant when none is given."""
    f = ctx.parse(formula)
    if ctx.logic == "cpc":
        res = cl.par_projective_c(f)
        theta, e = res.theta, res.projection
        if target is not None and not cl.equivalent_c(ctx.parse(target), e):
            report(ctx, False, [f"projection is {to_text(e)}"], {"projection": to_text(e)})
            return
    elif target is None:
        theta, e = pj.par_projective_i(f, ctx.bound)
    else:
        e = ctx.parse(target)
        theta = pj.decide_E_projective(f, e)
    report(ctx, True, [f"projection: {to_text(e)}"] + subst_lines(theta),
           {"projection": to_text(e), "theta": subst_json(theta)})


@main.command()
@click.argument("formula")
@click.option("--gamma", required=True, help="Semicolon-separated formulas.")
@common_options
def approx(ctx: Ctx, formula, gamma):
    """Projective approximation relative to a finite set of formulas."""
    _ipc_only(ctx)
    res = pj.projective_approx(ctx.parse(formula), ctx.gamma(gamma), limits=ctx.limits)
    lines = [f"n = {res.config.n}"]
    entries = []
    for k, entry in enumerate(res, 1):
        lines.append(f"[{k}] {to_text(entry.formula)}")
        lines.append(f"    projection: {to_text(entry.projection)}")
        lines += ["    " + s for s in subst_lines(entry.theta)]
        entries.append({"formula": to_text(entry.formula),
                        "projection": to_text(entry.projection),
                        "theta": subst_json(entry.theta)})
    report(ctx, None, lines, {"n": res.config.n, "pi": entries})


@main.command()
@click.argument("premise")
@click.argument("conclusions", nargs=-1, required=True)
@click.option("--gamma", default="true", show_default=True,
              help="Semicolon-separated contexts.")
@common_options
def admissible(ctx: Ctx, premise, conclusions, gamma):
    """Admissibility of PREMISE / CONCLUSIONS relative to the contexts.

    Each conclusion is a separate argument, since ``|`` is disjunction.
    """
    _ipc_only(ctx)
    rule = adm.Rule(ctx.parse(premise), [ctx.parse(c) for c in conclusions])
    cert = adm.admissible_gamma(rule, ctx.gamma(gamma), limits=ctx.limits)
    lines, data = [], {"covered": []}
    for entry, d in cert.covered:
        lines.append(f"{to_text(entry.formula)}  implies  {to_text(d)}")
        data["covered"].append({"formula": to_text(entry.formula), "conclusion": to_text(d)})
    if cert.refutation is not None:
        r = cert.refutation
        lines = [f"refuted in context {to_text(r.projection)} by", *subst_lines(r.theta)]
        data = {"context": to_text(r.projection), "theta": subst_json(r.theta)}
    report(ctx, cert.admissible, lines, data)


@main.command()
@click.argument("formula")
@click.option("--ext", "ext", default="true", show_default=True)
@common_options
def unifiers(ctx: Ctx, formula, ext):
    """Complete set of unifiers in the extension by a parameter-only axiom."""
    f, e = ctx.parse(formula), ctx.parse(ext)
    if ctx.logic == "cpc":
        theta = cl.mgu_ext_c(f, e)
        _print_unifier_set(ctx, [theta])
        return
    _print_unifier_set(ctx, pj.complete_unifiers_ext(f, e, limits=ctx.limits))


def _print_unifier_set(ctx: Ctx, thetas) -> None:
    lines = []
    for k, theta in enumerate(thetas, 1):
        lines.append(f"[{k}]")
        lines += subst_lines(theta)
    report(ctx, True, lines, {"unifiers": [subst_json(t) for t in thetas]})


@main.group()
def model():
    """Kripke model utilities."""


@model.command("eval")
@click.argument("formula")
@click.option("--model", "path", required=True, type=click.Path(exists=True, dir_okay=False))
@common_options
def model_eval(ctx: Ctx, formula, path):
    """Forcing of FORMULA at every node of a model file."""
    f = ctx.parse(formula)
    try:
        k = kripke.load(path, ctx.sig)
    except (ModelError, ValueError, KeyError) as exc:
        raise click.UsageError(f"bad model file: {exc}") from None
    mask = k.truth_set(f)
    nodes = {k.names[i]: bool(mask >> i & 1) for i in range(len(k.names))}
    lines = [f"{name}: {'forced' if v else 'not forced'}" for name, v in nodes.items()]
    report(ctx, k.forces_root(f), lines, {"nodes": nodes})


@main.command()
@click.option("--atoms", required=True, help="Comma-separated atoms.")
@click.option("--depth", type=int, required=True)
@click.option("--stats", is_flag=True,
              help="Count definable class sets and check every characteristic formula.")
@click.option("--dump", type=click.Path(file_okay=False),
              help="Directory receiving one model file per representative.")
@common_options
def bank(ctx: Ctx, atoms, depth, stats, dump):
    """Representatives of bounded-bisimulation classes."""
    atom_list = [ctx.sig.atom(a) for a in _names(atoms)]
    b = build_bank(atom_list, depth, ctx.limits)
    lines = [f"atoms: {','.join(a.name for a in b.atoms)}", f"depth: {depth}",
             f"representatives: {len(b)}", f"build seconds: {b.build_seconds:.2f}"]
    data = {"representatives": len(b), "depth": depth}
    if stats:
        try:
            count = str(len(b.downsets(DEFINABLES_LIMIT)))
        except LimitExceeded:
            count = f"more than {DEFINABLES_LIMIT}"
        check_characteristic(b)
        lines += [f"definable sets: {count}", "characteristic formulas: verified"]
        data.update({"definable_sets": count, "characteristic": "verified"})
    if dump:
        os.makedirs(dump, exist_ok=True)
        width = len(str(len(b)))
        for i in range(len(b)):
            kripke.dump(b.model(i), os.path.join(dump, f"rep{i:0{width}d}.json"))
        lines.append(f"wrote {len(b)} model files to {dump}")
    report(ctx, None, lines, data)


def _ipc_only(ctx: Ctx) -> None:
    if ctx.logic != "ipc":
        raise click.UsageError("this subcommand is only available for --logic ipc")


def run(argv=None) -> int:
    """Entry point mapping library verdicts and errors to exit codes."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        main.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except (click.exceptions.Abort, EOFError):
        return EXIT_USAGE
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (NotProjective, NotUnifiable) as exc:
        if "--json" in argv:
            click.echo(json.dumps({"verdict": "NO", "reason": str(exc)}, indent=1, sort_keys=True))
        else:
            click.echo("NO")
            click.echo(str(exc))
        return EXIT_NO
    except LimitExceeded as exc:
        click.echo(f"limit exceeded: {exc}", err=True)
        return EXIT_LIMIT
    except (SignatureExhausted, ModelError, ParseError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    except ParprojError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    return EXIT_YES


def entry() -> None:
    sys.exit(run())


if __name__ == "__main__":
    entry()
