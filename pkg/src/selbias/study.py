"""Alcohol, speed, driving fault and (severe) accidents: the bias study.

The generative model, with ``h`` the logistic sigmoid and ``X ~ B(0.5)``::

    V     = 1[eps_V <= h(a0 + aX*X)]
    F     = 1[eps_F <= h(b0 + bX*X + bV*V)]
    A_sev = 1[eps_A <= h(g0 + gF*F + gV*V)]
    R_sev = F * A_sev

with ``a0 = -aX/2`` and ``b0``, ``g0`` centred the same way plus a rarity
shift of ``offset_sign * nu / 2``. Setting ``gamma_v = 0`` removes the speed
effect on accident occurrence, so ``A_sev`` behaves like the all-accidents
indicator.

Everything here is computed twice where possible: from closed forms and from
the exact SCM engine in :mod:`selbias.scm`.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Sequence

import numpy as np
from scipy.special import expit

from . import scm as _scm
from .errors import InvalidParams, NumericalOverflow, SelbiasError
from .scm import DiscreteScm, Mechanism

X, V, F, A, R, W = "X", "V", "F", "A_sev", "R_sev", "W"


@dataclass(frozen=True)
class StudyParams:
    alpha_x: float = 0.0
    beta_x: float = 0.0
    beta_v: float = 1.0
    gamma_f: float = 4.0
    gamma_v: float = 0.0
    nu: float = 13.0
    offset_sign: int = -1

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise InvalidParams(f"{f.name} must be a finite number, got {v!r}")
        if self.nu < 0:
            raise InvalidParams(f"nu must be >= 0, got {self.nu}")
        if self.offset_sign not in (1, -1):
            raise InvalidParams(f"offset_sign must be +1 or -1, got {self.offset_sign}")

    @property
    def effective_offset(self) -> float:
        """Shift that ``nu`` adds to the fault and accident intercepts."""
        return self.offset_sign * self.nu / 2

    @property
    def alpha_0(self) -> float:
        return -self.alpha_x / 2

    @property
    def beta_0(self) -> float:
        # offset_sign = +1 is the literal -(bX + bV - nu)/2
        return -(self.beta_x + self.beta_v + self.offset_sign * (-self.nu)) / 2

    @property
    def gamma_0(self) -> float:
        return -(self.gamma_f + self.gamma_v + self.offset_sign * (-self.nu)) / 2

    def with_offset(self, offset: float) -> "StudyParams":
        """Copy whose ``effective_offset`` equals ``offset``."""
        sign = 1 if offset > 0 else -1
        return StudyParams(**{**asdict(self), "nu": abs(offset) * 2, "offset_sign": sign})


@dataclass(frozen=True)
class MeasureSet:
    """Causal and associational measures for one parameter point.

    ``p_f_do[x]`` is ``P(F_x = 1)``, ``p_r_do[x]`` is ``P(R_x = 1)`` and
    ``p_f_sel[x]`` is ``P(F = 1 | X = x, A_sev = 1)``.
    """

    cor_xf: float
    cor_xr: float
    crr_xf: float
    crr_xr: float
    or_xf_selected: float
    prev_f: float
    prev_r: float
    prev_a: float
    p_f_do: tuple
    p_r_do: tuple
    p_f_sel: tuple

    @property
    def bias_ratio(self) -> float:
        return self.or_xf_selected / self.cor_xf


def _ratio_of_odds(p1, q1, p0, q0) -> float:
    # (p1/q1) / (p0/q0) with p, q probabilities of complementary events,
    # evaluated in log space so tiny probabilities do not underflow.
    vals = (p1, q1, p0, q0)
    if any(not (v > 0.0) or not math.isfinite(v) for v in vals):
        raise NumericalOverflow(f"degenerate probability among {vals}")
    return math.exp(math.log(p1) - math.log(q1) - math.log(p0) + math.log(q0))


def _h(z: float) -> float:
    return float(expit(z))


def closed_form(p: StudyParams) -> MeasureSet:
    """Evaluate the analytical expressions for every measure.

    Complement probabilities are summed from their own terms rather than
    taken as ``1 - p``, so rare events keep full relative precision.
    """
    pf, qf, pr, qr, ps, qs, pa = {}, {}, {}, {}, {}, {}, {}
    for x in (0, 1):
        a = p.alpha_0 + p.alpha_x * x
        b = p.beta_0 + p.beta_x * x
        g = p.gamma_0
        hv, hnv = _h(a), _h(-a)  # P(V=1 | x), P(V=0 | x)
        f1v1, f1v0 = _h(b + p.beta_v), _h(b)
        f0v1, f0v0 = _h(-(b + p.beta_v)), _h(-b)
        a11, a10 = _h(g + p.gamma_f + p.gamma_v), _h(g + p.gamma_f)  # A=1 | F=1, V=v
        a01, a00 = _h(g + p.gamma_v), _h(g)                           # A=1 | F=0, V=v
        na11, na10 = _h(-(g + p.gamma_f + p.gamma_v)), _h(-(g + p.gamma_f))

        pf[x] = f1v1 * hv + f1v0 * hnv
        qf[x] = f0v1 * hv + f0v0 * hnv
        pr[x] = a11 * f1v1 * hv + a10 * f1v0 * hnv
        qr[x] = qf[x] + na11 * f1v1 * hv + na10 * f1v0 * hnv
        sel_f0 = a01 * f0v1 * hv + a00 * f0v0 * hnv
        if not pr[x] + sel_f0 > 0.0:
            raise NumericalOverflow(f"P(A_sev=1 | X={x}) underflows to zero")
        ps[x] = pr[x] / (pr[x] + sel_f0)
        qs[x] = sel_f0 / (pr[x] + sel_f0)
        pa[x] = pr[x] + sel_f0
    for d in (pf, pr, ps, qs):
        for v in d.values():
            if not (0.0 < v < 1.0):
                raise NumericalOverflow(f"probability {v} left (0, 1)")
    return MeasureSet(
        cor_xf=_ratio_of_odds(pf[1], qf[1], pf[0], qf[0]),
        cor_xr=_ratio_of_odds(pr[1], qr[1], pr[0], qr[0]),
        crr_xf=pf[1] / pf[0],
        crr_xr=pr[1] / pr[0],
        or_xf_selected=_ratio_of_odds(ps[1], qs[1], ps[0], qs[0]),
        prev_f=0.5 * (pf[0] + pf[1]),
        prev_r=0.5 * (pr[0] + pr[1]),
        prev_a=0.5 * (pa[0] + pa[1]),
        p_f_do=(pf[0], pf[1]),
        p_r_do=(pr[0], pr[1]),
        p_f_sel=(ps[0], ps[1]),
    )


def build_paper_scm(p: StudyParams, with_confounder: bool = False) -> DiscreteScm:
    """The study model as a :class:`DiscreteScm`.

    With ``with_confounder`` a ``W ~ B(0.5)`` is added as a parent of ``X``,
    ``V``, ``F`` and ``A_sev`` with coefficient 1 (``X`` becomes
    ``h(W - 1/2)``). The variant exists for the counterfactual checks.
    """
    if not isinstance(p, StudyParams):
        raise InvalidParams("expected StudyParams")
    for v in (p.alpha_0, p.beta_0, p.gamma_0):
        if not math.isfinite(v):
            raise InvalidParams("derived offsets must be finite")
    w = [W] if with_confounder else []
    c = [1.0] if with_confounder else []
    spec = []
    if with_confounder:
        spec.append((W, [], Mechanism.bernoulli(0.5)))
        spec.append((X, [W], Mechanism.logistic(-0.5, [1.0])))
    else:
        spec.append((X, [], Mechanism.bernoulli(0.5)))
    spec += [
        (V, [X, *w], Mechanism.logistic(p.alpha_0, [p.alpha_x, *c])),
        (F, [X, V, *w], Mechanism.logistic(p.beta_0, [p.beta_x, p.beta_v, *c])),
        (A, [F, V, *w], Mechanism.logistic(p.gamma_0, [p.gamma_f, p.gamma_v, *c])),
        (R, [F, A], Mechanism.and_gate()),
    ]
    return DiscreteScm.from_spec(spec)


def engine_measures(p: StudyParams) -> MeasureSet:
    """Same quantities as :func:`closed_form`, via enumeration and surgery."""
    m = build_paper_scm(p)
    t = _scm.joint(m)
    pf, pr, ps = {}, {}, {}
    for x in (0, 1):
        td = _scm.joint(_scm.intervene(m, {X: x}))
        pf[x] = td.prob({F: 1})
        pr[x] = td.prob({R: 1})
        ps[x] = t.prob({F: 1}, {X: x, A: 1})
    for d in (pf, pr, ps):
        for v in d.values():
            if not (0.0 < v < 1.0):
                raise NumericalOverflow(f"probability {v} left (0, 1)")
    return MeasureSet(
        cor_xf=_scm.odds_ratio(pf[1], pf[0]),
        cor_xr=_scm.odds_ratio(pr[1], pr[0]),
        crr_xf=pf[1] / pf[0],
        crr_xr=pr[1] / pr[0],
        or_xf_selected=_scm.odds_ratio(ps[1], ps[0]),
        prev_f=t.prob({F: 1}),
        prev_r=t.prob({R: 1}),
        prev_a=t.prob({A: 1}),
        p_f_do=(pf[0], pf[1]),
        p_r_do=(pr[0], pr[1]),
        p_f_sel=(ps[0], ps[1]),
    )


def approx_error(p: StudyParams) -> float:
    """Relative gap between the causal odds ratios on ``R_sev`` and on ``F``."""
    ms = closed_form(p)
    return abs(ms.cor_xr / ms.cor_xf - 1.0)


# sweep ---------------------------------------------------------------------

DEFAULT_LEVELS = (0.0, 1.0, 2.0, 3.0)

CSV_HEADER = ("alpha_x", "beta_x", "beta_v", "gamma_f", "gamma_v", "nu", "offset_sign",
              "cor_xf", "cor_xr", "or_xf_sel", "bias_ratio", "prev_f", "prev_r")


@dataclass(frozen=True)
class SweepRow:
    params: StudyParams
    measures: MeasureSet | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.measures is not None

    @property
    def bias_ratio(self) -> float:
        return self.measures.bias_ratio if self.ok else float("nan")


def default_grid(levels: Sequence[float] = DEFAULT_LEVELS, **fixed) -> list[StudyParams]:
    """``alpha_x`` x ``beta_x`` x ``gamma_v`` over ``levels`` (first factor slowest)."""
    return [StudyParams(alpha_x=a, beta_x=b, gamma_v=g, **fixed)
            for a, b, g in itertools.product(levels, levels, levels)]


def sweep(grid: Iterable[StudyParams], engine: bool = False) -> list[SweepRow]:
    """Evaluate every grid point; failures become flagged rows."""
    grid = list(grid)
    if not grid:
        raise ValueError("empty grid")
    compute = engine_measures if engine else closed_form
    rows = []
    for p in grid:
        try:
            rows.append(SweepRow(p, compute(p)))
        except (SelbiasError, ArithmeticError) as exc:
            rows.append(SweepRow(p, None, f"{type(exc).__name__}: {exc}"))
    return rows


def _g12(v) -> str:
    if isinstance(v, int):
        return str(v)
    return format(float(v), ".12g")


def sweep_csv(rows: Iterable[SweepRow]) -> str:
    """CSV text (LF endings, 12 significant digits); failed rows hold ``nan``."""
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_HEADER)
    for row in rows:
        p = row.params
        ms = row.measures
        vals = [p.alpha_x, p.beta_x, p.beta_v, p.gamma_f, p.gamma_v, p.nu, int(p.offset_sign)]
        if ms is None:
            vals += [float("nan")] * 6
        else:
            vals += [ms.cor_xf, ms.cor_xr, ms.or_xf_selected, ms.bias_ratio, ms.prev_f, ms.prev_r]
        wr.writerow([_g12(v) for v in vals])
    return buf.getvalue()


def write_sweep_csv(rows: Iterable[SweepRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(sweep_csv(rows))


def mc_selected_or(p: StudyParams, n: int, seed: int) -> tuple[float, float]:
    """Monte Carlo ``OR(X, F | A_sev = 1)`` and its log-scale standard error.

    Woolf's standard error ``sqrt(1/a + 1/b + 1/c + 1/d)`` over the 2x2
    table of the selected rows.
    """
    ds = _scm.sample(build_paper_scm(p), n, seed)
    sel = ds.column(A) == 1
    x = ds.column(X)[sel]
    f = ds.column(F)[sel]
    a = int(np.sum((x == 1) & (f == 1)))
    b = int(np.sum((x == 1) & (f == 0)))
    c = int(np.sum((x == 0) & (f == 1)))
    d = int(np.sum((x == 0) & (f == 0)))
    if min(a, b, c, d) == 0:
        raise NumericalOverflow(f"empty cell in selected 2x2 table {(a, b, c, d)}")
    return a * d / (b * c), math.sqrt(1 / a + 1 / b + 1 / c + 1 / d)


# population attributable fraction ------------------------------------------

@dataclass(frozen=True)
class PafResult:
    """Attributable fraction of ``r`` due to ``x``.

    ``forms`` holds the three equivalent expressions: standardised risk,
    ``1 - sum_iw p_iw / RR_iw`` and ``P(X=1|R=1) - sum_w p_1w / RR_1w``.
    ``p_share[(i, w)]`` is ``P(X=i, W=w | R=1)`` and ``rr[(i, w)]`` the
    stratum risk ratio against ``X = 0``; ``w`` is the bit tuple of the
    sorted adjustment set.
    """

    paf_exact: float
    paf_approx: float
    forms: tuple
    p_share: dict = field(default_factory=dict)
    rr: dict = field(default_factory=dict)
    odds_ratios: dict = field(default_factory=dict)


def paf(m: DiscreteScm, x: str, r: str, w: Iterable[str] = ()) -> PafResult:
    w = tuple(sorted(w))
    t = _scm.joint(m)
    _scm._check_positivity(t, x, w)
    p_r = t.prob({r: 1})
    p_r0 = _scm.joint(_scm.intervene(m, {x: 0})).prob({r: 1})
    exact = (p_r - p_r0) / p_r

    p_share, rr, ors = {}, {}, {}
    standardised = 0.0
    for wbits in itertools.product((0, 1), repeat=len(w)):
        ev = dict(zip(w, wbits))
        pw = t.event_mass(ev)
        if pw <= 0.0:
            continue
        risk = {i: t.prob({r: 1}, {**ev, x: i}) for i in (0, 1)}
        if risk[0] <= 0.0:
            raise _scm.PositivityViolation(f"P({r}=1 | {x}=0, {ev}) is zero")
        standardised += risk[0] * pw
        for i in (0, 1):
            p_share[(i, wbits)] = t.prob({x: i, **ev}, {r: 1})
            rr[(i, wbits)] = risk[i] / risk[0]
        ors[wbits] = _scm.odds_ratio(risk[1], risk[0])
    form1 = (p_r - standardised) / p_r
    form2 = 1.0 - sum(p_share[k] / rr[k] for k in p_share)
    p_x1_r1 = t.prob({x: 1}, {r: 1})
    form3 = p_x1_r1 - sum(p_share[(1, wb)] / rr[(1, wb)] for wb in ors)
    approx = p_x1_r1 - sum(p_share[(1, wb)] / ors[wb] for wb in ors)
    return PafResult(exact, approx, (form1, form2, form3), p_share, rr, ors)


# counterfactual demonstrations ------------------------------------------------

@dataclass(frozen=True)
class DemoReport:
    """Reduction-to-absurdity check on the severe-accident chain.

    If ``R_x`` were independent of ``X`` given the selection indicator, then
    ``P(R_x = 1)`` would equal ``sum_s P(R = 1 | S = s) P(S = s)`` for both
    ``x``, forcing a null average causal effect.
    """

    p_r_do: tuple
    p_r_mixture: float
    difference: tuple
    ace: float
    ace_adjusted: float
    cf_gap: float


def severe_chain_scm(x_coef: float = 2.0) -> DiscreteScm:
    """``X -> A_sev -> R_sev`` with ``S`` an exact copy of ``A_sev``."""
    return DiscreteScm.from_spec([
        (X, [], Mechanism.bernoulli(0.5)),
        (A, [X], Mechanism.logistic(-1.0, [x_coef])),
        (R, [A], Mechanism.table([0.1, 0.6])),
        ("S", [A], Mechanism.and_gate()),
    ])


def appendix_d_demo(x_coef: float = 2.0) -> DemoReport:
    m = severe_chain_scm(x_coef)
    t = _scm.joint(m)
    mix = sum(t.prob({R: 1}, {"S": s}) * t.prob({"S": s}) for s in (0, 1))
    p_do = tuple(_scm.joint(_scm.intervene(m, {X: x})).prob({R: 1}) for x in (0, 1))
    cf = _scm.counterfactual_joint(m, X, keep=[X, R, "S"])
    gap = max(_scm.independence_gap(cf, [f"{R}@{x}"], [X], ["S"]) for x in (0, 1))
    return DemoReport(
        p_r_do=p_do,
        p_r_mixture=mix,
        difference=tuple(pd - mix for pd in p_do),
        ace=p_do[1] - p_do[0],
        ace_adjusted=_scm.adjusted_effect(m, X, R, (), "risk_difference"),
        cf_gap=gap,
    )


@dataclass(frozen=True)
class CfReport:
    """Counterfactual independencies on the confounded study model.

    ``cf_gap``: ``R_x`` vs ``X`` given ``(W, A_x)``; ``naive_gap``: ``R_x``
    vs ``X`` given ``(W, A)``; ``selected_gap``: largest difference between
    ``P(R = 1 | X = x, W = w, A = 1)`` and ``P(R_x = 1 | W = w, A_x = 1)``.
    Each is a maximum over ``x`` and all configurations.
    """

    params: StudyParams
    cf_gap: float
    selected_gap: float
    naive_gap: float

    def holds(self, tol: float = 1e-10) -> bool:
        return self.cf_gap <= tol and self.selected_gap <= tol


def cf_independence_check(p: StudyParams) -> CfReport:
    m = build_paper_scm(p, with_confounder=True)
    cf = _scm.counterfactual_joint(m, X, keep=[W, X, A, R])
    t = cf.table
    cf_gap = naive = sel = 0.0
    for x in (0, 1):
        rx, ax = f"{R}@{x}", f"{A}@{x}"
        cf_gap = max(cf_gap, _scm.independence_gap(cf, [rx], [X], [W, ax]))
        naive = max(naive, _scm.independence_gap(cf, [rx], [X], [W, A]))
        for w in (0, 1):
            lhs = t.prob({R: 1}, {X: x, W: w, A: 1})
            rhs = t.prob({rx: 1}, {W: w, ax: 1})
            sel = max(sel, abs(lhs - rhs))
    return CfReport(p, cf_gap, sel, naive)
