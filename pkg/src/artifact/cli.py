"""Batch command line front end.

Exit status: 0 when nothing failed, 1 on a verification failure
(counterexample, violation, rejected proof, formula outside the family),
2 on a usage error.  Every report starts with the seed it was run with.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .axioms import AxiomError, emit_schema_instances
from .formula import ParseError, free_vars, parse_with_names, to_sexpr, to_text
from .hierarchy import CLASSIFIERS, NOT_IN, describe
from .normalize import ShapeError, d_normalize, j_d_normalize, normalize_prenex
from .semantics import (
    Evaluator,
    build_universe,
    check_equivalence,
    layer_raising_j,
    pairing_domains,
    sampled_j_tables,
    tower,
)
from .sequent import check_derivation, derivation_from_json, soundness_sweep
from .weakmodel import weak_model_check

LAYERS = (3, 4, 5)


class Report:
    """Collects output lines and writes them once, to stdout or --out."""

    def __init__(self, ctx: click.Context):
        self.fmt = ctx.obj["format"]
        self.out = ctx.obj["out"]
        self.lines = [f"seed: {ctx.obj['seed']}"]
        self.failed = False

    def formula(self, f) -> str:
        if self.fmt == "sexpr":
            return to_sexpr(f)
        return to_text(f)

    def add(self, line: str = "") -> None:
        self.lines.append(line)

    def finish(self) -> None:
        text = "\n".join(self.lines) + "\n"
        if self.out:
            Path(self.out).write_text(text)
        else:
            click.echo(text, nl=False)
        sys.exit(1 if self.failed else 0)


def _read_formulas(files, inline) -> list:
    """Formulas from files (one per line; blank lines and // comments skipped)
    and from -f options, sharing one variable-name table."""
    texts = []
    for path in files:
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if line and not line.startswith("//"):
                texts.append(line)
    texts += list(inline)
    if not texts:
        raise click.UsageError("no formulas given")
    names: dict = {}
    out = []
    for t in texts:
        try:
            f, names = parse_with_names(t, names)
        except ParseError as e:
            raise click.UsageError(f"{t!r}: {e}") from None
        out.append(f)
    return out


def _universe(n: int, seed: int, layered: bool = False):
    if layered:
        return build_universe(5, levels=LAYERS, j=layer_raising_j(LAYERS, seed))
    if n > 5:
        return build_universe(n)
    j = sampled_j_tables(n, 1, seed)[0] if n >= 1 else None
    return build_universe(n, j=j)


@click.group()
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="write the report here")
@click.option("--seed", type=int, default=0, show_default=True, help="seed for sampled j")
@click.option("--format", "fmt", type=click.Choice(["text", "sexpr", "json"]), default="text")
@click.pass_context
def main(ctx: click.Context, out, seed, fmt) -> None:
    """Formula classifier, normaliser, axiom emitter and finite-model checker."""
    ctx.ensure_object(dict)
    ctx.obj.update(out=out, seed=seed, format=fmt)


formula_opt = click.option("-f", "--formula", "inline", multiple=True, help="formula text")
files_arg = click.argument("files", nargs=-1, type=click.Path(exists=True, dir_okay=False))


@main.command()
@files_arg
@formula_opt
@click.option("--family", type=click.Choice(sorted(CLASSIFIERS)), default="levy", show_default=True)
@click.pass_context
def classify(ctx, files, inline, family):
    """Classify formulas; fails if one lies outside the family."""
    rep = Report(ctx)
    rows = []
    for f in _read_formulas(files, inline):
        c = CLASSIFIERS[family](f)
        rows.append({"formula": to_text(f), "class": str(c), "certificate": list(c.certificate)})
        if rep.fmt == "sexpr":
            rep.add(f"{c} {to_sexpr(f)}")
        elif rep.fmt == "text":
            rep.add(describe(f, c))
        if c.shape == NOT_IN:
            rep.failed = True
    if rep.fmt == "json":
        rep.add(json.dumps(rows, indent=1))
    rep.finish()


@main.command()
@files_arg
@formula_opt
@click.option("--mode", type=click.Choice(["forall", "exists", "and", "or", "prenex"]), required=True)
@click.option("--family", type=click.Choice(["levy", "j"]), default="levy", show_default=True)
@click.option("--check/--no-check", default=False, help="verify the result over V_universe")
@click.option("--universe", type=int, default=4, show_default=True)
@click.pass_context
def normalize(ctx, files, inline, mode, family, check, universe):
    """Apply the D-operator (or the prenex pass) and print the trace."""
    rep = Report(ctx)
    u = _universe(universe, ctx.obj["seed"]) if check else None
    base = range(tower(max(universe - 1, 0)))
    for f in _read_formulas(files, inline):
        trace: list = []
        try:
            if mode == "prenex":
                g = normalize_prenex(f, trace, unbind=True)
            else:
                g = (d_normalize if family == "levy" else j_d_normalize)(f, mode, trace)
        except ShapeError as e:
            rep.add(f"error: {to_text(f)}: {e}")
            rep.failed = True
            continue
        rep.add(rep.formula(g))
        for rec in trace:
            rep.add(f"  pair v{rec.var} = <v{rec.left}, v{rec.right}>")
        if check:
            r = check_equivalence(f, g, u, default_domain=base,
                                  domains_g=pairing_domains(trace, base))
            rep.add("  equivalent" if r else f"  counterexample {tuple(r.counterexample)}")
            rep.failed |= not r
    rep.finish()


@main.command()
@click.option("--theory", default="wa0", show_default=True, help="btee, wa0, reduced, sep or wan:N")
@click.option("--bound", type=int, default=3, show_default=True, help="formula size bound")
@click.pass_context
def axioms(ctx, theory, bound):
    """Emit schema instances with their classification."""
    rep = Report(ctx)
    try:
        inst = emit_schema_instances(theory, bound)
    except AxiomError as e:
        raise click.UsageError(str(e)) from None
    if rep.fmt == "json":
        rep.add(json.dumps([{"schema": a.schema, "class": a.classification.label,
                             "sentence": to_text(a.sentence)} for a in inst], indent=1))
    else:
        for a in inst:
            rep.add(f"{a.schema}\t{a.classification.label}\t{rep.formula(a.sentence)}")
    rep.finish()


def _parse_assign(text: str, names: dict) -> dict:
    env = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        name, _, val = part.partition("=")
        name = name.strip()
        if name not in names:
            raise click.UsageError(f"unknown variable {name!r}")
        env[names[name]] = int(val.strip().lstrip("#"))
    return env


@main.command("eval")
@click.argument("formula")
@click.option("--assign", default="", help="e.g. 'x=3,y=#5' (Ackermann codes)")
@click.option("--universe", type=int, default=3, show_default=True)
@click.pass_context
def eval_cmd(ctx, formula, assign, universe):
    """Evaluate a formula in V_universe under a seeded j."""
    rep = Report(ctx)
    try:
        f, names = parse_with_names(formula)
    except ParseError as e:
        raise click.UsageError(str(e)) from None
    env = _parse_assign(assign, names)
    u = _universe(universe, ctx.obj["seed"])
    rep.add("true" if Evaluator(u).compile(f)(dict(env)) else "false")
    rep.finish()


@main.command()
@click.argument("left")
@click.argument("right")
@click.option("--universe", type=int, default=4, show_default=True)
@click.option("--mode", type=click.Choice(["forall", "exists", "and", "or"]), default=None,
              help="read pairing variables of RIGHT from normalising LEFT in this mode")
@click.option("--family", type=click.Choice(["levy", "j"]), default="levy")
@click.pass_context
def equiv(ctx, left, right, universe, mode, family):
    """Compare truth tables; free variables over V_universe, quantifiers one level down."""
    rep = Report(ctx)
    try:
        f, names = parse_with_names(left)
        g, names = parse_with_names(right, names)
    except ParseError as e:
        raise click.UsageError(str(e)) from None
    u = _universe(universe, ctx.obj["seed"])
    base = range(tower(max(universe - 1, 0)))
    doms = None
    if mode:
        trace: list = []
        try:
            (d_normalize if family == "levy" else j_d_normalize)(f, mode, trace)
        except ShapeError as e:
            raise click.UsageError(str(e)) from None
        doms = pairing_domains(trace, base)
    r = check_equivalence(f, g, u, default_domain=base, domains_g=doms)
    if r:
        rep.add("equal")
    else:
        inv = {i: n for n, i in names.items()}
        fv = sorted(free_vars(f) | free_vars(g))
        rep.add("counterexample: " + ", ".join(
            f"{inv.get(i, f'v{i}')}=#{r.counterexample[i]}" for i in fv))
        rep.failed = True
    rep.finish()


@main.command()
@click.option("--theory", default="sep", show_default=True)
@click.option("--bound", type=int, default=3, show_default=True)
@click.option("--level", type=int, default=0, show_default=True)
@click.option("--universe", type=int, default=4, show_default=True,
              help="free variables range over V_universe (at most 5)")
@click.pass_context
def weakmodel(ctx, theory, bound, level, universe):
    """Check the truth-definition clauses of the toy weak model on layered V_5."""
    rep = Report(ctx)
    if universe > 5:
        raise click.UsageError("--universe must be at most 5")
    try:
        inst = emit_schema_instances(theory, bound)
    except AxiomError as e:
        raise click.UsageError(str(e)) from None
    reds = [a.extra for a in inst if a.schema == "reduction"]
    u = _universe(5, ctx.obj["seed"], layered=True)
    r = weak_model_check(inst, u, level, domain=range(tower(universe)), reds=reds)
    rep.add(r.summary())
    for v in r.violations:
        rep.add(f"  {v}")
    rep.failed = not r.ok
    rep.finish()


def _load_proof(path):
    try:
        return derivation_from_json(Path(path).read_text())
    except (ValueError, KeyError, ParseError) as e:
        raise click.UsageError(f"{path}: {e}") from None


@main.command("check-proof")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--cut-free", is_flag=True, help="reject cuts and check the subformula property")
@click.pass_context
def check_proof(ctx, file, cut_free):
    """Check a derivation given as a JSON tree {conclusion, rule, premises}."""
    rep = Report(ctx)
    r = check_derivation(_load_proof(file), cut_free)
    rep.add(r.summary())
    rep.failed = not r.ok
    rep.finish()


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--universe", type=int, default=3, show_default=True,
              help="free variables range over V_universe (3 or 4)")
@click.option("--level", type=int, default=0, show_default=True)
@click.pass_context
def sweep(ctx, file, universe, level):
    """Truth sweep of every instantiated sequent of a derivation."""
    rep = Report(ctx)
    if universe > 5:
        raise click.UsageError("--universe must be at most 5")
    u = _universe(5, ctx.obj["seed"], layered=True)
    try:
        r = soundness_sweep(_load_proof(file), u, level, domain=range(tower(universe)))
    except ValueError as e:
        raise click.UsageError(str(e)) from None
    rep.add(r.summary())
    rep.failed = not r.ok
    rep.finish()


@main.command()
@click.option("--tests", type=click.Path(exists=True, file_okay=False), default=None,
              help="directory holding test_acceptance.py (default: next to the sources)")
@click.pass_context
def selftest(ctx, tests):
    """Run the acceptance suite."""
    import pytest

    root = Path(tests) if tests else Path(__file__).resolve().parents[2] / "tests"
    target = root / "test_acceptance.py"
    if not target.exists():
        raise click.UsageError(f"acceptance suite not found at {target}")
    code = pytest.main(["-q", "-s", str(target)])
    sys.exit(0 if code == 0 else 1)


if __name__ == "__main__":
    main()
