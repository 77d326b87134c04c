"""Exact inference for binary structural causal models.

Every variable ``v`` is generated as ``v = 1[eps_v <= p_v(parents)]`` with
independent uniform disturbances ``eps_v``. That form makes three things
exact and cheap for small models:

* the observational joint, by enumerating all ``2**n`` assignments;
* interventions, by replacing a mechanism with a constant (graph surgery);
* cross-world counterfactual joints, by splitting each ``[0, 1]`` disturbance
  interval at the thresholds the variable takes in the actual and the
  intervened worlds.

A seeded ancestral sampler (PCG64) is provided as an independent Monte Carlo
check on the exact results.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import expit

from .errors import (
    InvalidMechanism,
    ParseError,
    PositivityViolation,
    ScmError,
    TooLarge,
    UnknownNode,
    ZeroConditioningEvent,
)
from .graph import Dag, valid_name

MAX_VARIABLES = 20
RNG_ALGORITHM = "PCG64"

KINDS = ("bernoulli", "logistic", "table", "and", "or")


@dataclass(frozen=True)
class Mechanism:
    """Probability that a variable equals 1 given its parents.

    ``params`` depends on ``kind``: ``(p,)`` for bernoulli,
    ``(intercept, coef_1, ..., coef_k)`` for logistic, the ``2**k`` row
    probabilities for table (parent bits read big-endian in declared order),
    and ``()`` for the deterministic ``and``/``or`` gates.
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))
        if self.kind not in KINDS:
            raise InvalidMechanism(f"unknown mechanism kind {self.kind!r}")
        if not all(math.isfinite(v) for v in self.params):
            raise InvalidMechanism(f"non-finite parameter in {self}")
        if self.kind in ("bernoulli", "table"):
            if self.kind == "bernoulli" and len(self.params) != 1:
                raise InvalidMechanism("bernoulli takes exactly one probability")
            if any(v < 0 or v > 1 for v in self.params):
                raise InvalidMechanism(f"probabilities must lie in [0, 1]: {self.params}")
        if self.kind == "table":
            k = len(self.params).bit_length() - 1
            if len(self.params) != 1 << k:
                raise InvalidMechanism("table needs 2**k rows")
        if self.kind == "logistic" and not self.params:
            raise InvalidMechanism("logistic needs an intercept")
        if self.kind in ("and", "or") and self.params:
            raise InvalidMechanism(f"{self.kind} gate takes no parameters")

    @classmethod
    def bernoulli(cls, p: float) -> "Mechanism":
        return cls("bernoulli", (p,))

    @classmethod
    def constant(cls, bit: int) -> "Mechanism":
        return cls("bernoulli", (float(bool(bit)),))

    @classmethod
    def logistic(cls, intercept: float, coefs: Sequence[float] = ()) -> "Mechanism":
        return cls("logistic", (intercept, *coefs))

    @classmethod
    def table(cls, probs: Sequence[float]) -> "Mechanism":
        return cls("table", tuple(probs))

    @classmethod
    def and_gate(cls) -> "Mechanism":
        return cls("and")

    @classmethod
    def or_gate(cls) -> "Mechanism":
        return cls("or")

    def arity(self) -> int | None:
        """Number of parents this mechanism needs (None: any, at least one)."""
        if self.kind == "bernoulli":
            return 0
        if self.kind == "logistic":
            return len(self.params) - 1
        if self.kind == "table":
            return len(self.params).bit_length() - 1
        return None

    def prob_one(self, parents: Sequence) -> np.ndarray | float:
        """P(v = 1) for the given parent values (ints or broadcastable arrays)."""
        if self.kind == "bernoulli":
            return self.params[0]
        if self.kind == "logistic":
            z = self.params[0]
            for c, pv in zip(self.params[1:], parents):
                z = z + c * np.asarray(pv, dtype=float)
            return expit(z)
        if self.kind == "table":
            idx = 0
            for pv in parents:
                idx = idx * 2 + np.asarray(pv, dtype=np.int64)
            return np.asarray(self.params)[idx]
        bits = [np.asarray(pv, dtype=bool) for pv in parents]
        out = np.logical_and.reduce(bits) if self.kind == "and" else np.logical_or.reduce(bits)
        return out.astype(float)

    def __str__(self):
        if self.kind in ("and", "or"):
            return self.kind
        return " ".join([self.kind] + [repr(v) for v in self.params])


class DiscreteScm:
    """A binary SCM: a DAG, an ordered parent list and a mechanism per node."""

    def __init__(self, graph: Dag, mechanisms: Mapping[str, Mechanism],
                 parent_order: Mapping[str, Sequence[str]] | None = None):
        if set(mechanisms) != set(graph.nodes):
            missing = sorted(set(graph.nodes) ^ set(mechanisms))
            raise ScmError(f"mechanisms and graph nodes differ on {missing}")
        order = {}
        for v in graph.order:
            ps = tuple(parent_order[v]) if parent_order and v in parent_order else graph.parents(v)
            if sorted(ps) != sorted(graph.parents(v)) or len(set(ps)) != len(ps):
                raise ScmError(f"parent order for {v!r} is not a permutation of its parents")
            mech = mechanisms[v]
            need = mech.arity()
            if need is None:
                if not ps:
                    raise InvalidMechanism(f"{mech.kind} gate for {v!r} needs at least one parent")
            elif need != len(ps):
                raise InvalidMechanism(
                    f"mechanism for {v!r} expects {need} parents, graph has {len(ps)}")
            order[v] = ps
        self.graph = graph
        self.mechanisms = dict(mechanisms)
        self.parent_order = order

    @classmethod
    def from_spec(cls, spec: Iterable[tuple[str, Sequence[str], Mechanism]]) -> "DiscreteScm":
        """Build from ``(name, parents, mechanism)`` triples."""
        from .graph import build_dag

        spec = list(spec)
        g = build_dag([n for n, _, _ in spec], [(p, n) for n, ps, _ in spec for p in ps])
        return cls(g, {n: m for n, _, m in spec}, {n: tuple(ps) for n, ps, _ in spec})

    @property
    def variables(self) -> tuple[str, ...]:
        return self.graph.order

    def threshold(self, v: str, values: Mapping[str, object]):
        return self.mechanisms[v].prob_one([values[p] for p in self.parent_order[v]])

    def __repr__(self):
        return f"DiscreteScm({', '.join(self.variables)})"


@dataclass(frozen=True)
class ProbTable:
    """Exact distribution over binary variables.

    ``array`` has one axis of length 2 per variable, in ``variables`` order.
    """

    variables: tuple
    array: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        if self.array.shape != (2,) * len(self.variables):
            raise ScmError("table shape does not match its variables")
        if len(set(self.variables)) != len(self.variables):
            raise ScmError("duplicate variable in table")

    @property
    def mass(self) -> dict:
        """Mapping from assignment tuples to probabilities."""
        return {bits: float(self.array[bits])
                for bits in itertools.product((0, 1), repeat=len(self.variables))}

    def total(self) -> float:
        return float(self.array.sum())

    def axis(self, v: str) -> int:
        try:
            return self.variables.index(v)
        except ValueError:
            raise UnknownNode(f"variable {v!r} not in table {self.variables}") from None

    def marginal(self, keep: Sequence[str]) -> "ProbTable":
        keep = tuple(keep)
        axes = [self.axis(v) for v in keep]
        drop = tuple(i for i in range(len(self.variables)) if i not in axes)
        arr = self.array.sum(axis=drop) if drop else self.array
        # remaining axes are in original order; permute to requested order
        remaining = [i for i in range(len(self.variables)) if i in axes]
        arr = np.transpose(arr, [remaining.index(i) for i in axes])
        return ProbTable(keep, arr)

    def event_mass(self, event: Mapping[str, int]) -> float:
        idx = [slice(None)] * len(self.variables)
        for v, bit in event.items():
            i = self.axis(v)
            if idx[i] != slice(None) and idx[i] != int(bit):
                return 0.0
            idx[i] = int(bit)
        return float(self.array[tuple(idx)].sum())

    def prob(self, targets: Mapping[str, int], given: Mapping[str, int] | None = None) -> float:
        return prob(self, targets, given)


def prob(t: ProbTable, targets: Mapping[str, int], given: Mapping[str, int] | None = None) -> float:
    """Exact ``P(targets | given)`` from a table."""
    given = dict(given or {})
    for v, bit in targets.items():
        if v in given and given[v] != bit:
            return 0.0
    den = t.event_mass(given)
    if den <= 0.0:
        raise ZeroConditioningEvent(f"conditioning event {given} has zero probability")
    return t.event_mass({**given, **targets}) / den


def joint(m: DiscreteScm, cap: int = MAX_VARIABLES) -> ProbTable:
    """Observational joint over all variables, in topological order."""
    vs = m.variables
    n = len(vs)
    if n > cap:
        raise TooLarge(f"{n} variables exceeds the enumeration cap of {cap}")
    if n == 0:
        return ProbTable((), np.array(1.0))
    grid = np.indices((2,) * n, dtype=np.uint8).reshape(n, -1)
    cols = {v: grid[i] for i, v in enumerate(vs)}
    mass = np.ones(grid.shape[1])
    for v in vs:
        p1 = m.threshold(v, cols)
        mass *= np.where(cols[v] == 1, p1, 1.0 - p1)
    return ProbTable(vs, mass.reshape((2,) * n))


def intervene(m: DiscreteScm, assignments: Mapping[str, int]) -> DiscreteScm:
    """Graph surgery: fix each assigned node and drop its incoming edges."""
    for v in assignments:
        if v not in m.graph.nodes:
            raise UnknownNode(f"cannot intervene on unknown node {v!r}")
    g = Dag(m.graph.nodes,
            [(u, v) for u, v in m.graph.edges if v not in assignments],
            _counterfactual=True)
    mechs = dict(m.mechanisms)
    order = dict(m.parent_order)
    for v, bit in assignments.items():
        mechs[v] = Mechanism.constant(bit)
        order[v] = ()
    return DiscreteScm(g, mechs, order)


def _configs(k: int):
    return itertools.product((0, 1), repeat=k)


def _check_positivity(t: ProbTable, x: str, w: Sequence[str]) -> None:
    for wbits in _configs(len(w)):
        ev = dict(zip(w, wbits))
        pw = t.event_mass(ev)
        if pw <= 0.0:
            continue
        px = t.event_mass({**ev, x: 1}) / pw
        if not 0.0 < px < 1.0:
            raise PositivityViolation(
                f"P({x}=1 | {ev}) = {px} is not strictly between 0 and 1")


def adjusted_effect(m: DiscreteScm, x: str, y: str, w: Iterable[str] = (),
                    scale: str = "risk_difference"):
    """Back-door adjusted effect of ``x`` on ``y = 1`` standardised over ``w``.

    ``risk_difference`` and ``risk_ratio`` are marginal over ``w``. For
    ``odds_ratio`` a float is returned when ``w`` is empty, otherwise a dict
    keyed by the bits of ``sorted(w)`` for every stratum with positive mass.
    """
    w = tuple(sorted(w))
    if x in w or y in w:
        raise ScmError("adjustment set must not contain exposure or outcome")
    if scale not in ("risk_difference", "risk_ratio", "odds_ratio"):
        raise ValueError(f"unknown scale {scale!r}")
    t = joint(m)
    _check_positivity(t, x, w)
    r1 = r0 = 0.0
    per_stratum = {}
    for wbits in _configs(len(w)):
        ev = dict(zip(w, wbits))
        pw = t.event_mass(ev)
        if pw <= 0.0:
            continue
        p1 = prob(t, {y: 1}, {**ev, x: 1})
        p0 = prob(t, {y: 1}, {**ev, x: 0})
        r1 += p1 * pw
        r0 += p0 * pw
        per_stratum[wbits] = odds_ratio(p1, p0)
    if scale == "risk_difference":
        return r1 - r0
    if scale == "risk_ratio":
        return r1 / r0
    return per_stratum[()] if not w else per_stratum


def odds(p: float) -> float:
    return p / (1.0 - p)


def odds_ratio(p1: float, p0: float) -> float:
    """Odds ratio of two probabilities; degenerate inputs give inf or nan."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return float(np.float64(p1) * (1.0 - p0) / ((1.0 - p1) * np.float64(p0)))


def _as_table(m) -> ProbTable:
    if isinstance(m, ProbTable):
        return m
    if isinstance(m, CfJoint):
        return m.table
    return joint(m)


def independence_gap(m, a: Iterable[str], b: Iterable[str], z: Iterable[str] = ()) -> float:
    """Largest ``|P(a, b | z) - P(a | z) P(b | z)|`` over all configurations.

    ``m`` may be an SCM, a :class:`ProbTable` or a :class:`CfJoint`.
    Zero-mass strata of ``z`` are skipped.
    """
    a, b, z = list(a), list(b), list(z)
    if set(a) & set(b) or set(a) & set(z) or set(b) & set(z):
        raise ScmError("a, b and z must be disjoint")
    t = _as_table(m).marginal(a + b + z)
    arr = t.array.reshape(1 << len(a), 1 << len(b), 1 << len(z))
    pz = arr.sum(axis=(0, 1))
    keep = pz > 0
    if not keep.any():
        return 0.0
    cond = arr[:, :, keep] / pz[keep]
    pa = cond.sum(axis=1)
    pb = cond.sum(axis=0)
    return float(np.max(np.abs(cond - pa[:, None, :] * pb[None, :, :])))


def cond_independent(m, a: Iterable[str], b: Iterable[str], z: Iterable[str] = (),
                     tol: float = 1e-10) -> bool:
    return independence_gap(m, a, b, z) <= tol


@dataclass(frozen=True)
class CfJoint:
    """Joint law of actual variables and their counterfactual copies.

    ``blocks[x_value]`` lists the copies ``v@<x_value>`` of the kept variables
    (the intervened node itself excluded).
    """

    actual: tuple
    blocks: Mapping[int, tuple]
    table: ProbTable

    def marginal(self, keep: Sequence[str]) -> ProbTable:
        return self.table.marginal(keep)


def counterfactual_joint(m: DiscreteScm, x: str, values: Sequence[int] = (0, 1),
                         keep: Iterable[str] | None = None,
                         max_states: int = 1 << 22) -> CfJoint:
    """Exact joint of the actual world and the worlds ``do(x = value)``.

    All worlds share the same uniform disturbance per variable; the interval
    ``[0, 1]`` is cut at every threshold the variable attains across worlds,
    and each piece contributes its length to the resulting bit pattern.
    """
    if x not in m.graph.nodes:
        raise UnknownNode(f"unknown node {x!r}")
    keep = tuple(v for v in m.variables if keep is None or v in set(keep))
    if len(m.variables) > MAX_VARIABLES:
        raise TooLarge(f"{len(m.variables)} variables exceeds the cap of {MAX_VARIABLES}")
    values = tuple(int(v) for v in values)
    nworld = 1 + len(values)

    # state: tuple over variables (topological order) of per-world bit tuples
    pos = {u: i for i, u in enumerate(m.variables)}
    states = {(): 1.0}
    for v in m.variables:
        nxt = {}
        for state, mass in states.items():
            thr = []
            for wi in range(nworld):
                if v == x and wi > 0:
                    thr.append(float(values[wi - 1]))
                else:
                    vals = {p: state[pos[p]][wi] for p in m.parent_order[v]}
                    thr.append(float(m.threshold(v, vals)))
            cuts = sorted({0.0, 1.0, *thr})
            for lo, hi in zip(cuts, cuts[1:]):
                # eps in (lo, hi]: v = 1 in world w iff thr_w >= hi
                bits = tuple(int(t >= hi) for t in thr)
                key = state + (bits,)
                nxt[key] = nxt.get(key, 0.0) + mass * (hi - lo)
        states = nxt
        if len(states) > max_states:
            raise TooLarge(f"counterfactual enumeration exceeds {max_states} states")

    idx = {v: i for i, v in enumerate(m.variables)}
    copies = [v for v in keep if v != x]
    names = list(keep)
    slots = [(idx[v], 0) for v in keep]
    blocks = {}
    for wi, val in enumerate(values, start=1):
        block = tuple(f"{v}@{val}" for v in copies)
        blocks[val] = block
        names.extend(block)
        slots.extend((idx[v], wi) for v in copies)
    arr = np.zeros((2,) * len(names))
    for state, mass in states.items():
        arr[tuple(state[i][wi] for i, wi in slots)] += mass
    return CfJoint(keep, blocks, ProbTable(tuple(names), arr))


@dataclass(frozen=True)
class Dataset:
    """``n`` sampled rows, one uint8 column per variable."""

    variables: tuple
    data: np.ndarray
    seed: int
    algorithm: str = RNG_ALGORITHM

    def __len__(self):
        return self.data.shape[0]

    def column(self, v: str) -> np.ndarray:
        return self.data[:, self.variables.index(v)]

    def count(self, event: Mapping[str, int]) -> int:
        mask = np.ones(len(self), dtype=bool)
        for v, bit in event.items():
            mask &= self.column(v) == bit
        return int(mask.sum())

    def prob(self, targets: Mapping[str, int], given: Mapping[str, int] | None = None) -> float:
        given = dict(given or {})
        den = self.count(given)
        if den == 0:
            raise ZeroConditioningEvent(f"no sampled row satisfies {given}")
        return self.count({**given, **targets}) / den

    def tobytes(self) -> bytes:
        return self.data.tobytes()


def sample(m: DiscreteScm, n: int, seed: int) -> Dataset:
    """Ancestral sampling with a PCG64 generator seeded by ``seed``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    cols = {}
    for v in m.variables:
        eps = rng.random(n)  # in [0, 1), so a strict comparison keeps P(v=1) = p
        cols[v] = (eps < m.threshold(v, cols)).astype(np.uint8)
    data = np.column_stack([cols[v] for v in m.variables]) if cols else np.zeros((n, 0), np.uint8)
    return Dataset(m.variables, data, seed)


# text format ---------------------------------------------------------------

def parse_scm(text: str, source: str = "<string>") -> DiscreteScm:
    """Parse ``var <name> parents <p1> ... : <mechanism>`` lines.

    Mechanisms: ``bernoulli <p>``, ``logistic <intercept> <coef>...``,
    ``and``, ``or``, ``table <v0> <v1> ...`` (rows big-endian in declared
    parent order). ``#`` starts a comment.
    """
    from .errors import GraphError

    spec = []
    names = set()
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, sep, body = line.partition(":")
        toks = head.split()
        if not toks or toks[0] != "var":
            raise ParseError("expected 'var'", source, lineno, toks[0] if toks else line)
        if not sep:
            raise ParseError("missing ':' before the mechanism", source, lineno, line)
        if len(toks) < 2:
            raise ParseError("missing variable name", source, lineno, "var")
        name = toks[1]
        if not valid_name(name):
            raise ParseError("invalid variable name", source, lineno, name)
        if name in names:
            raise ParseError("variable declared twice", source, lineno, name)
        rest = toks[2:]
        if rest and rest[0] != "parents":
            raise ParseError("expected 'parents'", source, lineno, rest[0])
        parents = rest[1:]
        for p in parents:
            if not valid_name(p):
                raise ParseError("invalid parent name", source, lineno, p)
        mt = body.split()
        if not mt:
            raise ParseError("missing mechanism", source, lineno, name)
        kind = mt[0]
        if kind not in KINDS:
            raise ParseError("unknown mechanism", source, lineno, kind)
        vals = []
        for tok in mt[1:]:
            try:
                vals.append(float(tok))
            except ValueError:
                raise ParseError("not a number", source, lineno, tok) from None
        try:
            mech = Mechanism(kind, tuple(vals))
        except InvalidMechanism as exc:
            raise ParseError(str(exc), source, lineno, kind) from None
        names.add(name)
        spec.append((name, parents, mech))
    for name, parents, _ in spec:
        for p in parents:
            if p not in names:
                raise ParseError(f"parent of {name!r} is not declared", source, None, p)
    try:
        return DiscreteScm.from_spec(spec)
    except (GraphError, ScmError) as exc:
        exc.source = source
        raise


def read_scm(path) -> DiscreteScm:
    with open(path, encoding="utf-8") as fh:
        return parse_scm(fh.read(), source=str(path))


def format_scm(m: DiscreteScm) -> str:
    lines = []
    for v in m.variables:
        ps = m.parent_order[v]
        head = f"var {v} parents {' '.join(ps)}" if ps else f"var {v}"
        lines.append(f"{head} : {m.mechanisms[v]}")
    return "\n".join(lines) + "\n"
