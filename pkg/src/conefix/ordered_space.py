"""Ordered vector spaces: cones, the partial order they induce, norms, normality.

Elements live either in R^n (``finite-dim`` layout) or on a uniform grid over
[0, 1] (``grid-function`` layout, a sampled stand-in for a continuous
function). A cone induces the order ``x <= y`` iff ``y - x`` is a member;
the normal constant measures how badly the norm can disorder that order:
it is the least K with ``0 <= x <= y`` implying ``norm(x) <= K * norm(y)``.

Membership tests are exact (coordinate >= 0, no tolerance). Callers holding
numerically derived vectors should pass them through :func:`snap_zero` first,
which zeroes coordinates below 1e-12 in magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import LayoutMismatchError

FINITE_DIM = "finite-dim"
GRID_FUNCTION = "grid-function"

ORTHANT = "orthant"
NONNEG_GRID = "nonneg-grid"

EUCLIDEAN = "euclidean"
SUP = "sup"
SKEW = "skew"

_NORM_ALIASES = {"euclidean": EUCLIDEAN, "sup": SUP, "supremum": SUP, "skew": SKEW}

SNAP_TOL = 1e-12


@dataclass(frozen=True)
class Layout:
    """Shape tag for space elements: coordinate vectors or grid-sampled functions."""

    kind: str
    size: int

    def __post_init__(self):
        if self.kind not in (FINITE_DIM, GRID_FUNCTION):
            raise ValueError(f"unknown layout kind {self.kind!r}")
        if self.size < 1:
            raise ValueError("layout size must be >= 1")


@dataclass(frozen=True)
class SpaceElement:
    """An element of the ordered space: a finite tuple of finite coordinates."""

    coords: tuple[float, ...]
    layout: Layout

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        if len(coords) != self.layout.size:
            raise LayoutMismatchError(
                f"{len(coords)} coordinates for layout of size {self.layout.size}"
            )
        if not all(math.isfinite(c) for c in coords):
            raise ValueError("space elements must have finite coordinates")
        object.__setattr__(self, "coords", coords)

    @staticmethod
    def finite(values) -> "SpaceElement":
        values = tuple(float(v) for v in values)
        return SpaceElement(values, Layout(FINITE_DIM, len(values)))

    @staticmethod
    def grid(values) -> "SpaceElement":
        values = tuple(float(v) for v in values)
        return SpaceElement(values, Layout(GRID_FUNCTION, len(values)))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)

    def _check_compatible(self, other: "SpaceElement") -> None:
        if self.layout != other.layout:
            raise LayoutMismatchError(
                f"cannot combine layouts {self.layout} and {other.layout}"
            )

    def __add__(self, other: "SpaceElement") -> "SpaceElement":
        self._check_compatible(other)
        return SpaceElement(
            tuple(a + b for a, b in zip(self.coords, other.coords)), self.layout
        )

    def __sub__(self, other: "SpaceElement") -> "SpaceElement":
        self._check_compatible(other)
        return SpaceElement(
            tuple(a - b for a, b in zip(self.coords, other.coords)), self.layout
        )

    def __mul__(self, scalar: float) -> "SpaceElement":
        return SpaceElement(tuple(float(scalar) * c for c in self.coords), self.layout)

    __rmul__ = __mul__

    def __neg__(self) -> "SpaceElement":
        return self * -1.0

    def is_zero(self) -> bool:
        return all(c == 0.0 for c in self.coords)


def zeros_like(layout: Layout) -> SpaceElement:
    return SpaceElement((0.0,) * layout.size, layout)


def snap_zero(v: SpaceElement, tol: float = SNAP_TOL) -> SpaceElement:
    """Zero out coordinates below ``tol`` in magnitude.

    Membership tests are exact, so numerically derived vectors go through
    this before :func:`in_cone`.
    """
    return SpaceElement(
        tuple(0.0 if abs(c) < tol else c for c in v.coords), v.layout
    )


@dataclass(frozen=True)
class OrderCone:
    """A closed cone of componentwise-nonnegative vectors, plus the norm in use.

    ``kind`` selects the layout the cone orders: ``orthant`` for coordinate
    vectors, ``nonneg-grid`` for grid-sampled functions. ``norm_tag`` is
    ``euclidean``, ``sup``, or ``skew`` (the 2-d norm
    ``N(u, v) = |u - v| + eps * |u + v|``, included as a genuine example of a
    large normal constant). ``k_measured`` caches an empirical lower bound on
    the normal constant once measured.
    """

    kind: str
    dim: int
    norm_tag: str = EUCLIDEAN
    skew_eps: float = 0.0
    k_measured: float | None = None

    def __post_init__(self):
        if self.kind not in (ORTHANT, NONNEG_GRID):
            raise ValueError(f"unknown cone kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("cone dimension must be >= 1")
        tag = _NORM_ALIASES.get(self.norm_tag)
        if tag is None:
            raise ValueError(f"unknown norm tag {self.norm_tag!r}")
        object.__setattr__(self, "norm_tag", tag)
        if tag == SKEW:
            if self.dim != 2:
                raise ValueError("the skew norm is defined only for dimension 2")
            if not self.skew_eps > 0:
                raise ValueError("skew norm needs eps > 0")

    @property
    def layout(self) -> Layout:
        return Layout(FINITE_DIM if self.kind == ORTHANT else GRID_FUNCTION, self.dim)

    def with_measured_constant(self, k: float) -> "OrderCone":
        return replace(self, k_measured=float(k))


def orthant(dim: int, norm: str = EUCLIDEAN, skew_eps: float = 0.0) -> OrderCone:
    return OrderCone(ORTHANT, dim, norm, skew_eps)


def nonneg_grid(m: int, norm: str = SUP) -> OrderCone:
    return OrderCone(NONNEG_GRID, m, norm)


def _check_layout(v: SpaceElement, cone: OrderCone) -> None:
    if v.layout != cone.layout:
        raise LayoutMismatchError(
            f"element layout {v.layout} does not match cone {cone.kind}({cone.dim})"
        )


def in_cone(v: SpaceElement, cone: OrderCone) -> bool:
    """Exact membership: every coordinate >= 0. No tolerance by design."""
    _check_layout(v, cone)
    return all(c >= 0.0 for c in v.coords)


def leq(x: SpaceElement, y: SpaceElement, cone: OrderCone) -> bool:
    """The induced partial order: x <= y iff y - x is a cone member."""
    return in_cone(y - x, cone)


def strictly_less(x: SpaceElement, y: SpaceElement, cone: OrderCone) -> bool:
    """Interior order: x << y iff every coordinate of y - x is > 0."""
    d = y - x
    _check_layout(d, cone)
    return all(c > 0.0 for c in d.coords)


def norm(v: SpaceElement, cone: OrderCone) -> float:
    """Norm of an element under the cone's norm tag."""
    _check_layout(v, cone)
    a = v.array
    return float(_norms(a[None, :], cone)[0])


def _norms(matrix: np.ndarray, cone: OrderCone) -> np.ndarray:
    """Row-wise norms; internal vectorized workhorse."""
    if cone.norm_tag == EUCLIDEAN:
        return np.sqrt((matrix * matrix).sum(axis=1))
    if cone.norm_tag == SUP:
        return np.abs(matrix).max(axis=1)
    return np.abs(matrix[:, 0] - matrix[:, 1]) + cone.skew_eps * np.abs(
        matrix[:, 0] + matrix[:, 1]
    )


def estimate_normal_constant(
    cone: OrderCone,
    n_pairs: int = 1_000_000,
    seed: int = 0,
    chunk: int = 131_072,
) -> float:
    """Empirical lower bound on the normal constant of the cone.

    Maximizes norm(x)/norm(y) over ordered pairs 0 <= x <= y with y != 0.
    The pair stream is a deterministic set of extreme-ray probes
    (x = e_i, y = e_i + e_j, which pins the exact supremum for the skew
    norm) followed by ``n_pairs`` seeded random pairs, so the result is
    reproducible and never decreases when ``n_pairs`` grows.
    """
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    d = cone.dim
    eye = np.eye(d)
    xs = np.repeat(eye, d, axis=0)
    ys = xs + np.tile(eye, (d, 1))
    xs = np.vstack([xs, np.ones((1, d))])
    ys = np.vstack([ys, np.ones((1, d))])
    best = _max_ratio(xs, ys, cone)

    rng = np.random.default_rng(seed)
    remaining = n_pairs
    while remaining > 0:
        m = min(chunk, remaining)
        x = rng.random((m, d))
        y = x + rng.random((m, d))
        best = max(best, _max_ratio(x, y, cone))
        remaining -= m
    return float(best)


def _max_ratio(xs: np.ndarray, ys: np.ndarray, cone: OrderCone) -> float:
    nx = _norms(xs, cone)
    ny = _norms(ys, cone)
    mask = ny > 0.0
    if not mask.any():
        return 0.0
    return float((nx[mask] / ny[mask]).max())


@dataclass(frozen=True)
class CandidateSet:
    """A membership predicate posing as a cone, for axiom falsification tests."""

    dim: int
    contains: Callable[[np.ndarray], bool]
    label: str = "candidate"
    sample_halfwidth: float = 2.0


@dataclass(frozen=True)
class AxiomCheck:
    name: str
    passed: bool
    witness: dict | None = None
    checked: int = 0

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "witness": self.witness,
            "checked": self.checked,
        }


@dataclass(frozen=True)
class ConeAxiomReport:
    label: str
    p1: AxiomCheck
    p2: AxiomCheck
    p3: AxiomCheck

    @property
    def all_passed(self) -> bool:
        return self.p1.passed and self.p2.passed and self.p3.passed

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "all_passed": self.all_passed,
            "p1": self.p1.as_dict(),
            "p2": self.p2.as_dict(),
            "p3": self.p3.as_dict(),
        }


def _membership_fn(cone_like) -> Callable[[np.ndarray], bool]:
    if isinstance(cone_like, OrderCone):
        return lambda v: bool((v >= 0.0).all())
    return cone_like.contains


def _sample_members(cone_like, rng: np.random.Generator, count: int) -> list[np.ndarray]:
    """Members of the set, found directly for cones and by rejection otherwise."""
    d = cone_like.dim
    members: list[np.ndarray] = [np.zeros(d), np.ones(d)]
    members.extend(np.eye(d))
    if isinstance(cone_like, OrderCone):
        members = [m for m in members]
        members.extend(2.0 * rng.random((count, d)))
        return members
    contains = cone_like.contains
    members = [m for m in members if contains(m)]
    b = cone_like.sample_halfwidth
    tries = 0
    while len(members) < count and tries < 50 * count:
        batch = rng.uniform(-b, b, (256, d))
        for row in batch:
            if contains(row):
                members.append(row)
                if len(members) >= count:
                    break
        tries += 256
    return members


def verify_cone_axioms(cone_like, n_samples: int = 10_000, seed: int = 0) -> ConeAxiomReport:
    """Sampled check of the three cone axioms, with a witness on failure.

    P1: the zero element is a member and some strictly positive element is a
    member (nonempty set with nonempty interior, != {0}).
    P2: nonnegative combinations ``a*x + b*y`` of sampled members stay inside.
    P3: no sampled nonzero member has its negation inside as well.

    ``cone_like`` is an :class:`OrderCone` or a :class:`CandidateSet`; the
    latter exists to exhibit violations on purpose-built non-cones.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    d = cone_like.dim
    contains = _membership_fn(cone_like)
    label = cone_like.label if isinstance(cone_like, CandidateSet) else (
        f"{cone_like.kind}({cone_like.dim})"
    )
    members = _sample_members(cone_like, rng, min(n_samples, 2000))

    # P1
    p1_witness = None
    zero_ok = contains(np.zeros(d))
    positive_ok = any(m.min() > 0.0 for m in members)
    if not zero_ok:
        p1_witness = {"failure": "zero element is not a member"}
    elif not positive_ok:
        p1_witness = {"failure": "no strictly positive member found"}
    p1 = AxiomCheck("P1", zero_ok and positive_ok, p1_witness, len(members))

    # P2: deterministic scalar grid first, then random combinations.
    p2_passed, p2_witness, p2_checked = True, None, 0
    scalar_grid = [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (1.0, 1.0), (0.5, 0.5), (2.0, 0.0), (2.0, 2.0)]
    pairs = [(members[i % len(members)], members[(i + 1) % len(members)]) for i in range(8)]
    combos = [(a, b, x, y) for (a, b) in scalar_grid for (x, y) in pairs]
    while len(combos) < n_samples:
        i, j = rng.integers(0, len(members), 2)
        a, b = rng.uniform(0.0, 2.0, 2)
        combos.append((float(a), float(b), members[i], members[j]))
    for a, b, x, y in combos[:n_samples]:
        p2_checked += 1
        v = a * x + b * y
        if not contains(v):
            p2_passed = False
            p2_witness = {
                "a": float(a),
                "b": float(b),
                "x": tuple(float(c) for c in x),
                "y": tuple(float(c) for c in y),
                "combination": tuple(float(c) for c in v),
            }
            break
    p2 = AxiomCheck("P2", p2_passed, p2_witness, p2_checked)

    # P3
    p3_passed, p3_witness, p3_checked = True, None, 0
    for m in members[: n_samples]:
        p3_checked += 1
        if np.any(m != 0.0) and contains(-m):
            p3_passed = False
            p3_witness = {"x": tuple(float(c) for c in m), "minus_x": tuple(float(-c) for c in m)}
            break
    p3 = AxiomCheck("P3", p3_passed, p3_witness, p3_checked)

    return ConeAxiomReport(label, p1, p2, p3)
