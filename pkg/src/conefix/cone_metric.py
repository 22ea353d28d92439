"""Cone metric spaces over the real line, axiom checks, sequence diagnostics.

Two builtin metrics, both of the form ``d(x, y) = |x - y| * v0`` for a fixed
strictly positive vector ``v0``:

* ``product``: ``d(x, y) = (|x - y|, alpha * |x - y|)`` into an orthant cone
  in R^2;
* ``exp``: ``d(x, y) = |x - y| * (e^{t_1}, ..., e^{t_m})`` on a uniform grid
  ``t_j`` over [0, 1], into a nonnegative-grid cone.

Convergence and Cauchy verdicts go through norms of distance vectors, which
is what normality of the cone licenses; the normal constant in use is kept
on the space. Fault-injected variants of the metrics (used to prove the
axiom checker can catch violations) are constructed, never parsed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable

import numpy as np

from .errors import DomainEscapeError, ValidationError
from .ordered_space import (
    EUCLIDEAN,
    SUP,
    AxiomCheck,
    OrderCone,
    SpaceElement,
    _norms,
    in_cone,
    nonneg_grid,
    orthant,
    snap_zero,
)

PRODUCT = "product"
EXP = "exp"

FAULT_SHIFT = "shift"
FAULT_ASYMMETRIC = "asymmetric"

CONVERGING = "converging"
CAUCHY = "cauchy"
DIVERGING = "diverging"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ConeMetricSpace:
    """A point domain (closed interval of R) with a vector-valued metric."""

    metric: str
    cone: OrderCone
    domain: tuple[float, float] = (-math.inf, math.inf)
    alpha: float = 1.0
    grid_m: int = 33
    normal_constant: float = 1.0
    fault: str | None = None

    def __post_init__(self):
        if self.metric not in (PRODUCT, EXP):
            raise ValueError(f"unknown metric kind {self.metric!r}")
        lo, hi = self.domain
        if not lo < hi:
            raise ValueError("domain must be a nondegenerate interval")
        if self.metric == PRODUCT and self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.metric == EXP and self.grid_m < 2:
            raise ValueError("grid_m must be >= 2")
        if self.fault not in (None, FAULT_SHIFT, FAULT_ASYMMETRIC):
            raise ValueError(f"unknown fault {self.fault!r}")
        if self.normal_constant < 1.0:
            raise ValueError("normal constant in use must be >= 1")

    def with_fault(self, fault: str | None) -> "ConeMetricSpace":
        return replace(self, fault=fault)

    def with_normal_constant(self, k: float) -> "ConeMetricSpace":
        return replace(self, normal_constant=float(k))


def product_space(
    alpha: float = 1.0,
    norm: str = EUCLIDEAN,
    skew_eps: float = 0.0,
    domain: tuple[float, float] = (-math.inf, math.inf),
    normal_constant: float = 1.0,
) -> ConeMetricSpace:
    cone = orthant(2, norm, skew_eps)
    return ConeMetricSpace(PRODUCT, cone, domain, alpha=alpha, normal_constant=normal_constant)


def exp_space(
    grid_m: int = 33,
    norm: str = SUP,
    domain: tuple[float, float] = (-math.inf, math.inf),
    normal_constant: float = 1.0,
) -> ConeMetricSpace:
    cone = nonneg_grid(grid_m, norm)
    return ConeMetricSpace(EXP, cone, domain, grid_m=grid_m, normal_constant=normal_constant)


def metric_vector(space: ConeMetricSpace) -> np.ndarray:
    """The fixed positive vector v0 with d(x, y) = |x - y| * v0 (fault-free)."""
    if space.metric == PRODUCT:
        return np.array([1.0, space.alpha])
    return np.exp(np.linspace(0.0, 1.0, space.grid_m))


def _require_in_domain(space: ConeMetricSpace, point: float) -> None:
    lo, hi = space.domain
    if not (lo <= point <= hi):
        raise DomainEscapeError(
            f"point {point!r} outside domain [{lo}, {hi}]", point=point
        )


def distance_rows(space: ConeMetricSpace, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorized distances: row i is d(xs[i], ys[i]). Internal fast path."""
    base = np.abs(xs - ys)[:, None] * metric_vector(space)[None, :]
    if space.fault == FAULT_SHIFT:
        base = base - 0.1
    elif space.fault == FAULT_ASYMMETRIC:
        base = np.zeros_like(base)
        base[:, 0] = np.clip(xs - ys, 0.0, None)
    return base


def distance(space: ConeMetricSpace, x: float, y: float) -> SpaceElement:
    """The metric value d(x, y), an element of the ordered space."""
    _require_in_domain(space, x)
    _require_in_domain(space, y)
    row = distance_rows(space, np.array([float(x)]), np.array([float(y)]))[0]
    return SpaceElement(tuple(row), space.cone.layout)


def scalar_distance(space: ConeMetricSpace, x: float, y: float) -> float:
    """Norm of d(x, y) under the space's cone norm."""
    _require_in_domain(space, x)
    _require_in_domain(space, y)
    row = distance_rows(space, np.array([float(x)]), np.array([float(y)]))
    return float(_norms(row, space.cone)[0])


@dataclass(frozen=True)
class MetricAxiomReport:
    d1: AxiomCheck
    d2: AxiomCheck
    d3: AxiomCheck

    @property
    def all_passed(self) -> bool:
        return self.d1.passed and self.d2.passed and self.d3.passed

    def as_dict(self) -> dict:
        return {
            "all_passed": self.all_passed,
            "d1": self.d1.as_dict(),
            "d2": self.d2.as_dict(),
            "d3": self.d3.as_dict(),
        }


def _sampling_box(space: ConeMetricSpace, box: tuple[float, float] | None) -> tuple[float, float]:
    if box is not None:
        return box
    lo, hi = space.domain
    return (max(lo, -10.0), min(hi, 10.0))


def check_metric_axioms(
    space: ConeMetricSpace,
    n_triples: int = 10_000,
    seed: int = 0,
    box: tuple[float, float] | None = None,
) -> MetricAxiomReport:
    """Sampled check of the metric axioms, each with a witness on failure.

    d1: d(x, x) = 0; for x != y, d(x, y) is a nonzero cone member.
    d2: d(x, y) = d(y, x) exactly.
    d3: d(x, y) <= d(x, z) + d(y, z) in the cone order (slack snapped at
        1e-12 before the exact membership test).
    """
    if n_triples < 1:
        raise ValueError("n_triples must be >= 1")
    rng = np.random.default_rng(seed)
    lo, hi = _sampling_box(space, box)
    pts = rng.uniform(lo, hi, (n_triples, 3))
    cone = space.cone

    d1_passed, d1_witness, d1_count = True, None, 0
    d2_passed, d2_witness, d2_count = True, None, 0
    d3_passed, d3_witness, d3_count = True, None, 0

    for x, y, z in pts:
        x, y, z = float(x), float(y), float(z)
        dxy = distance(space, x, y)
        dyx = distance(space, y, x)
        dxx = distance(space, x, x)

        if d1_passed:
            d1_count += 1
            ok = dxx.is_zero() and in_cone(dxy, cone) and (x == y or not dxy.is_zero())
            if not ok:
                d1_passed = False
                d1_witness = {"x": x, "y": y, "d_xx": dxx.coords, "d_xy": dxy.coords}

        if d2_passed:
            d2_count += 1
            if dxy.coords != dyx.coords:
                d2_passed = False
                d2_witness = {"x": x, "y": y, "d_xy": dxy.coords, "d_yx": dyx.coords}

        if d3_passed:
            d3_count += 1
            slack = distance(space, x, z) + distance(space, y, z) - dxy
            if not in_cone(snap_zero(slack), cone):
                d3_passed = False
                d3_witness = {"x": x, "y": y, "z": z, "slack": slack.coords}

        if not (d1_passed or d2_passed or d3_passed):
            break

    return MetricAxiomReport(
        AxiomCheck("d1", d1_passed, d1_witness, d1_count),
        AxiomCheck("d2", d2_passed, d2_witness, d2_count),
        AxiomCheck("d3", d3_passed, d3_witness, d3_count),
    )


class DriftTracker:
    """Incremental escape detector over the drift series r_n = ||d(x_n, x_0)||.

    At checkpoints spaced ``w`` apart it compares the trailing-window minimum
    against the trailing-window minimum at half the elapsed history and fires
    when the ratio strictly exceeds 2; divergence is declared only when two
    consecutive checkpoints fire. Affine escape (x_n = x_0 + n) sustains the
    doubling; bounded and converging sequences cannot.
    """

    def __init__(self, w: int):
        if w < 2:
            raise ValueError("window must be >= 2")
        self.w = w
        self._drift: list[float] = []
        self._fires: list[bool] = []
        self._next_checkpoint = 2 * w - 1

    def add(self, r: float) -> None:
        self._drift.append(float(r))
        j = len(self._drift) - 1
        if j == self._next_checkpoint:
            w = self.w
            half = j // 2
            m_now = min(self._drift[j - w + 1 : j + 1])
            m_half = min(self._drift[half - w + 1 : half + 1])
            self._fires.append(m_now > 2.0 * m_half)
            self._next_checkpoint += w

    @property
    def diverging(self) -> bool:
        return any(a and b for a, b in zip(self._fires, self._fires[1:]))


def drift_escape(drift: Iterable[float], w: int) -> bool:
    tracker = DriftTracker(w)
    for r in drift:
        tracker.add(r)
    return tracker.diverging


@dataclass(frozen=True)
class SequenceDiagnostics:
    """Verdict on a sampled sequence plus the norm series the verdict used."""

    verdict: str
    tail_norms: tuple[float, ...]
    w: int
    epsilon: float
    converging: bool
    cauchy: bool
    diverging: bool
    drift: tuple[float, ...]


def diagnose_sequence(
    space: ConeMetricSpace,
    seq: Callable[[int], float] | Iterable[float],
    limit: float | None = None,
    w: int = 10,
    epsilon: float = 1e-10,
    max_n: int = 200,
) -> SequenceDiagnostics:
    """Classify a sequence as converging, cauchy, diverging, or inconclusive.

    ``converging`` requires a candidate limit and the last ``w`` values of
    ||d(x_n, limit)|| below ``epsilon``; ``cauchy`` requires all pairwise
    distances over the last ``w`` terms below ``epsilon``; ``diverging`` is
    the drift-escape heuristic of :class:`DriftTracker`. Verdicts are
    evidence from finitely many terms, not proofs.
    """
    if w < 2:
        raise ValidationError("w", "window must be >= 2")
    if not epsilon > 0:
        raise ValidationError("epsilon", "must be > 0")
    if max_n < w:
        raise ValidationError("max_n", f"must be >= w={w}")

    if callable(seq):
        terms = [float(seq(n)) for n in range(max_n)]
    else:
        terms = [float(v) for _, v in zip(range(max_n), seq)]
        if len(terms) < w:
            raise ValidationError("seq", f"sequence shorter than window {w}")

    to_limit: list[float] | None = None
    converging = False
    if limit is not None:
        to_limit = [scalar_distance(space, t, limit) for t in terms]
        converging = all(v < epsilon for v in to_limit[-w:])

    tail = terms[-w:]
    pairwise_max = max(
        scalar_distance(space, tail[i], tail[j])
        for i in range(len(tail))
        for j in range(i + 1, len(tail))
    )
    cauchy = pairwise_max < epsilon

    drift = [scalar_distance(space, t, terms[0]) for t in terms]
    diverging = drift_escape(drift, w)

    if converging:
        verdict = CONVERGING
    elif cauchy:
        verdict = CAUCHY
    elif diverging:
        verdict = DIVERGING
    else:
        verdict = INCONCLUSIVE

    if to_limit is not None:
        tail_norms = tuple(to_limit)
    else:
        tail_norms = tuple(
            scalar_distance(space, terms[i], terms[i + 1]) for i in range(len(terms) - 1)
        )

    return SequenceDiagnostics(
        verdict=verdict,
        tail_norms=tail_norms,
        w=w,
        epsilon=epsilon,
        converging=converging,
        cauchy=cauchy,
        diverging=diverging,
        drift=tuple(drift),
    )
