"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 file parse error, 3 graph or SCM
validation error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import itertools
import math
import re
import sys
from dataclasses import fields

from . import scm as _scm
from . import study
from .errors import (
    EmptyGrid,
    GraphError,
    GridSyntax,
    InvalidParams,
    NumericError,
    ParseError,
    ScmError,
)
from .graph import SelectionDag, read_dag
from .recoverability import Query, observe, recoverability_report

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3, 4

GRID_NAMES = ("alpha_x", "beta_x", "gamma_v", "beta_v", "gamma_f", "nu", "offset_sign")
GRID_DEFAULTS = {"beta_v": 1.0, "gamma_f": 4.0, "nu": 13.0, "offset_sign": -1}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _frange(lo: float, step: float, hi: float) -> list[float]:
    n = math.floor((hi - lo) / step + 1e-9) + 1
    return [round(lo + i * step, 12) for i in range(max(n, 0))]


def parse_grid(spec: str) -> list[study.StudyParams]:
    """Parse ``name=lo:step:hi`` or ``name=value`` clauses joined by ``;``.

    The Cartesian product follows clause order (first clause varies
    slowest). Unmentioned parameters keep their defaults: beta_v=1,
    gamma_f=4, nu=13, offset_sign=-1 and 0 for alpha_x, beta_x, gamma_v.
    """
    clauses = [c.strip() for c in spec.split(";") if c.strip()]
    if not clauses:
        raise GridSyntax("empty grid specification", "--grid", None, spec)
    axes = []
    seen = set()
    for clause in clauses:
        name, eq, rhs = clause.partition("=")
        name = name.strip()
        if not eq:
            raise GridSyntax("expected name=value or name=lo:step:hi", "--grid", None, clause)
        if name not in GRID_NAMES:
            raise GridSyntax("unknown grid parameter", "--grid", None, name)
        if name in seen:
            raise GridSyntax("parameter given twice", "--grid", None, name)
        seen.add(name)
        parts = rhs.split(":")
        try:
            nums = [float(x) for x in parts]
        except ValueError:
            raise GridSyntax("not a number", "--grid", None, rhs) from None
        if len(nums) == 1:
            values = nums
        elif len(nums) == 3:
            lo, step, hi = nums
            if step <= 0:
                raise GridSyntax("step must be positive", "--grid", None, rhs)
            if hi < lo:
                raise EmptyGrid(f"range {rhs} for {name} is empty")
            values = _frange(lo, step, hi)
        else:
            raise GridSyntax("expected value or lo:step:hi", "--grid", None, rhs)
        if name == "offset_sign":
            values = [int(v) for v in values]
        axes.append((name, values))
    out = []
    for combo in itertools.product(*(vals for _, vals in axes)):
        kw = {**GRID_DEFAULTS, **dict(zip((n for n, _ in axes), combo))}
        out.append(study.StudyParams(**kw))
    if not out:
        raise EmptyGrid("grid has no points")
    return out


_ASSIGN = re.compile(r"^\s*([A-Za-z0-9_@]+)\s*=\s*([01])\s*$")


def _assignments(text: str, what: str) -> dict[str, int]:
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        m = _ASSIGN.match(item)
        if not m:
            raise UsageError(f"bad {what} assignment {item!r} (expected name=0 or name=1)")
        out[m.group(1)] = int(m.group(2))
    return out


def parse_query(text: str) -> tuple[dict, dict, dict]:
    """Split ``"Y=1 | do(X=1), W=0"`` into targets, interventions, evidence."""
    lhs, _, rhs = text.partition("|")
    targets = _assignments(lhs, "target")
    if not targets:
        raise UsageError(f"query {text!r} has no target")
    do = {}
    for grp in re.findall(r"do\(([^)]*)\)", rhs):
        do.update(_assignments(grp, "do"))
    given = _assignments(re.sub(r"do\([^)]*\)", "", rhs), "evidence")
    return targets, do, given


def _fmt_assign(d: dict) -> str:
    return ", ".join(f"{k}={v}" for k, v in d.items())


def _split_names(values) -> list[str]:
    out = []
    for v in values or []:
        out.extend(s for s in v.split(",") if s)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="selbias", description=(
        "Recoverability of causal effects under selection bias, and an exact "
        "binary SCM engine for the responsibility-analysis bias study."))
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    c = sub.add_parser("check", help="recoverability report for a DAG file")
    c.add_argument("dag_file")
    c.add_argument("--exposure", required=True)
    c.add_argument("--outcome", required=True)
    c.add_argument("--adjust", action="append", default=[],
                   help="covariate(s), comma-separated or repeated")
    c.add_argument("--selection", help="selection node (default: the file's snode)")
    c.add_argument("--scm", help="SCM file for a numerical check of each independence")

    e = sub.add_parser("eval", help="exact (and optionally Monte Carlo) probabilities")
    e.add_argument("scm_file")
    e.add_argument("--query", action="append", required=True,
                   help='e.g. "F=1 | X=1, A_sev=1" or "R_sev=1 | do(X=0)"')
    e.add_argument("--mc", type=int, metavar="N", help="also estimate from N samples")
    e.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("sweep", help="parameter sweep of the bias study to CSV")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--grid", help="e.g. 'alpha_x=0:1:3;beta_x=1;gamma_v=0:1:3'")
    g.add_argument("--paper-default", action="store_true",
                   help="alpha_x, beta_x, gamma_v in {0,1,2,3}")
    s.add_argument("--out", required=True, help="CSV output path")
    s.add_argument("--mc", type=int, metavar="N",
                   help="also print a Monte Carlo selected odds ratio per row")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--engine", action="store_true",
                   help="use exact enumeration instead of the closed forms")

    a = sub.add_parser("paf", help="population attributable fraction")
    a.add_argument("scm_file")
    a.add_argument("--exposure", required=True)
    a.add_argument("--outcome", required=True)
    a.add_argument("--adjust", action="append", default=[])

    d = sub.add_parser("demo", help="run a built-in demonstration")
    d.add_argument("which", choices=["appendix-d", "appendix-e"])
    d.add_argument("--alpha-x", type=float, default=2.0)
    d.add_argument("--beta-x", type=float, default=1.0)
    d.add_argument("--gamma-v", type=float, default=2.0)
    d.add_argument("--x-coef", type=float, default=2.0,
                   help="appendix-d: coefficient of X on A_sev")
    return p


def _load_selection_dag(path: str, selection: str | None) -> SelectionDag:
    g = read_dag(path)
    if isinstance(g, SelectionDag):
        if selection is not None and selection != g.selection:
            raise GraphError(f"--selection {selection} differs from the file's snode {g.selection}")
        return g
    if selection is None:
        raise UsageError(f"{path} declares no snode; pass --selection")
    return SelectionDag(g, selection)


def _cmd_check(args, out) -> int:
    gs = _load_selection_dag(args.dag_file, args.selection)
    q = Query(args.exposure, args.outcome, frozenset(_split_names(args.adjust)))
    rep = recoverability_report(gs, q)
    if args.scm:
        rep = observe(rep, _scm.read_scm(args.scm))
    out.write(rep.render())
    return EXIT_OK


def _cmd_eval(args, out) -> int:
    m = _scm.read_scm(args.scm_file)
    for text in args.query:
        targets, do, given = parse_query(text)
        mm = _scm.intervene(m, do) if do else m
        for v in {**targets, **given}:
            if v not in mm.graph.nodes:
                raise GraphError(f"query {text!r} names unknown variable {v!r}")
        value = _scm.joint(mm).prob(targets, given)
        cond = ", ".join(filter(None, [f"do({_fmt_assign(do)})" if do else "", _fmt_assign(given)]))
        label = f"P({_fmt_assign(targets)}" + (f" | {cond})" if cond else ")")
        out.write(f"{label} = {value:.12g}\n")
        if args.mc:
            ds = _scm.sample(mm, args.mc, args.seed)
            est = ds.prob(targets, given)
            se = math.sqrt(max(value * (1 - value), 0.0) / max(ds.count(given), 1))
            out.write(f"  monte carlo (n={args.mc}, seed={args.seed}, {_scm.RNG_ALGORITHM}): "
                      f"{est:.12g}, exact-based SE {se:.3g}\n")
    return EXIT_OK


def _cmd_sweep(args, out) -> int:
    grid = study.default_grid() if args.paper_default else parse_grid(args.grid)
    rows = study.sweep(grid, engine=args.engine)
    text = study.sweep_csv(rows)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    failed = sum(not r.ok for r in rows)
    out.write(f"wrote {len(rows)} rows to {args.out} ({failed} flagged)\n")
    if args.mc:
        from numpy.random import SeedSequence

        for i, row in enumerate(rows):
            seed = int(SeedSequence([args.seed, i]).generate_state(1, "uint64")[0])
            try:
                est, se = study.mc_selected_or(row.params, args.mc, seed)
                out.write(f"row {i}: or_xf_sel exact {row.measures.or_xf_selected:.12g} "
                          f"mc {est:.12g} log-se {se:.3g}\n")
            except (NumericError, AttributeError) as exc:
                out.write(f"row {i}: monte carlo unavailable ({exc})\n")
    return EXIT_OK


def _cmd_paf(args, out) -> int:
    m = _scm.read_scm(args.scm_file)
    w = _split_names(args.adjust)
    res = study.paf(m, args.exposure, args.outcome, w)
    out.write(f"paf_exact  {res.paf_exact:.12g}\n")
    for i, f in enumerate(res.forms, start=1):
        out.write(f"form_{i}     {f:.12g}\n")
    out.write(f"paf_approx {res.paf_approx:.12g}\n")
    for wb, orv in res.odds_ratios.items():
        label = _fmt_assign(dict(zip(sorted(w), wb))) or "all"
        out.write(f"stratum {label}: p_1w {res.p_share[(1, wb)]:.12g} "
                  f"RR {res.rr[(1, wb)]:.12g} OR {orv:.12g}\n")
    return EXIT_OK


def _cmd_demo(args, out) -> int:
    if args.which == "appendix-d":
        r = study.appendix_d_demo(args.x_coef)
        out.write(f"P(R_sev_0=1) = {r.p_r_do[0]:.12g}\n")
        out.write(f"P(R_sev_1=1) = {r.p_r_do[1]:.12g}\n")
        out.write(f"sum_s P(R_sev=1|S=s)P(S=s) = {r.p_r_mixture:.12g}\n")
        out.write(f"difference x=0: {r.difference[0]:.12g}\n")
        out.write(f"difference x=1: {r.difference[1]:.12g}\n")
        out.write(f"ACE = {r.ace:.12g} (back-door: {r.ace_adjusted:.12g})\n")
        out.write(f"max gap R_sev_x vs X given S = {r.cf_gap:.12g}\n")
    else:
        p = study.StudyParams(alpha_x=args.alpha_x, beta_x=args.beta_x, gamma_v=args.gamma_v)
        r = study.cf_independence_check(p)
        out.write(" ".join(f"{f.name}={getattr(p, f.name)}" for f in fields(p)) + "\n")
        out.write(f"R_sev_x vs X given (W, A_sev_x): max gap {r.cf_gap:.3g}\n")
        out.write(f"P(R_sev=1|X=x,W,A_sev=1) vs P(R_sev_x=1|W,A_sev_x=1): max gap {r.selected_gap:.3g}\n")
        out.write(f"R_sev_x vs X given (W, A_sev): max gap {r.naive_gap:.3g}\n")
    return EXIT_OK


COMMANDS = {"check": _cmd_check, "eval": _cmd_eval, "sweep": _cmd_sweep,
            "paf": _cmd_paf, "demo": _cmd_demo}


def run(argv, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(stdout):  # --help text
            args = parser.parse_args(list(argv))
        return COMMANDS[args.command](args, stdout)
    except UsageError as exc:
        stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    except (ParseError, EmptyGrid) as exc:
        stderr.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except OSError as exc:
        stderr.write(f"parse error: {exc.filename}: {exc.strerror}\n")
        return EXIT_PARSE
    except (GraphError, ScmError, InvalidParams) as exc:
        src = getattr(exc, "source", None)
        stderr.write(f"invalid: {src + ': ' if src else ''}{exc}\n")
        return EXIT_INVALID
    except (NumericError, ArithmeticError) as exc:
        stderr.write(f"numeric failure: {exc}\n")
        return EXIT_NUMERIC


def main(argv=None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
