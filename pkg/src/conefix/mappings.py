"""Real self-maps and the sampled certificates the solver consumes.

A :class:`RealMap` wraps a parsed expression (or a registry builtin) with a
declared interval domain. :func:`estimate_tr_modulus` measures the smallest
``a`` with ``a * d(Tx, Ry) - d(TSx, RSy)`` in the cone for every sampled
pair, treating the inequality componentwise rather than through norms (a
norm-ratio supremum is reported as a diagnostic only). Injectivity and
subsequential-convergence probes are heuristics: "no witness found" is
evidence, never proof, and all outputs say so.

Pair sampling interleaves a low-discrepancy stream with seeded uniform
points, so estimates are deterministic per seed and the measured modulus
never decreases when the pair count grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .cone_metric import ConeMetricSpace, diagnose_sequence, distance_rows
from .errors import DomainEscapeError, ValidationError
from .expressions import Node, eval_array, eval_node, parse_expression, unparse
from .ordered_space import _norms

BUILTIN_MAPS = {
    "identity": "x",
    "successor": "x+1",
    "halver": "x/2",
    "cuber": "x^3",
    "exp-decay": "exp(-x)",
    "double-exp-decay": "2*exp(-x)",
}

ALPHA_CONTRACTION = "alpha-contraction"
NONEXPANSIVE = "nonexpansive"
CONTRACTIVE = "contractive"
OUTSIDE_FAMILY = "outside-family"
IN_FAMILY = (ALPHA_CONTRACTION, NONEXPANSIVE, CONTRACTIVE)

SUSPECT_NON_SUBSEQUENTIAL = "suspect-non-subsequential"
NO_EVIDENCE = "no-evidence"


@dataclass(frozen=True)
class RealMap:
    """A real-valued self-map given by an expression AST on an interval."""

    ast: Node
    source: str
    domain: tuple[float, float] = (-math.inf, math.inf)
    name: str | None = None

    def _check_domain(self, x: float) -> None:
        lo, hi = self.domain
        if not (lo <= x <= hi):
            raise DomainEscapeError(
                f"{self.label}: point {x!r} outside domain [{lo}, {hi}]", point=x
            )

    @property
    def label(self) -> str:
        return self.name or self.source

    def __call__(self, x: float) -> float:
        x = float(x)
        self._check_domain(x)
        return eval_node(self.ast, x)

    def eval(self, x: float) -> float:
        return self(x)

    def eval_array(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        lo, hi = self.domain
        outside = (xs < lo) | (xs > hi)
        if outside.any():
            bad = float(xs[np.argmax(outside)])
            raise DomainEscapeError(
                f"{self.label}: point {bad!r} outside domain [{lo}, {hi}]", point=bad
            )
        return eval_array(self.ast, xs)

    def unparse(self) -> str:
        return unparse(self.ast)


def parse_map(
    text: str,
    domain: tuple[float, float] = (-math.inf, math.inf),
    name: str | None = None,
) -> RealMap:
    """Parse expression text into a RealMap; syntax errors carry a position."""
    return RealMap(parse_expression(text), text, domain, name)


def builtin_map(map_id: str, domain: tuple[float, float] = (-math.inf, math.inf)) -> RealMap:
    try:
        source = BUILTIN_MAPS[map_id]
    except KeyError:
        raise ValueError(f"unknown builtin map id {map_id!r}") from None
    return parse_map(source, domain, name=map_id)


@dataclass(frozen=True)
class IteratedMap:
    """The k-fold composition of a base map, usable wherever a RealMap is."""

    base: RealMap
    power: int

    def __post_init__(self):
        if self.power < 1:
            raise ValueError("power must be >= 1")

    @property
    def domain(self) -> tuple[float, float]:
        return self.base.domain

    @property
    def label(self) -> str:
        return f"{self.base.label}^{self.power}"

    @property
    def source(self) -> str:
        return f"({self.base.source})^{self.power} (composition)"

    def __call__(self, x: float) -> float:
        out = float(x)
        for k in range(self.power):
            try:
                out = self.base(out)
            except DomainEscapeError as err:
                err.step = k
                raise
        return out

    def eval(self, x: float) -> float:
        return self(x)

    def eval_array(self, xs: np.ndarray) -> np.ndarray:
        out = np.asarray(xs, dtype=float)
        for _ in range(self.power):
            out = self.base.eval_array(out)
        return out


# --- pair sampling ---------------------------------------------------------

def _radical_inverse(indices: np.ndarray, base: int) -> np.ndarray:
    out = np.zeros(len(indices))
    f = 1.0 / base
    i = indices.copy()
    while i.any():
        out += f * (i % base)
        i //= base
        f /= base
    return out


def sample_pairs(box: tuple[float, float], n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic (x, y) pairs in box x box.

    Even positions come from a Halton stream (bases 2 and 3), odd positions
    from a seeded uniform generator; both streams are prefix-stable, so the
    first k pairs are the same for every n >= k.
    """
    if n < 1:
        raise ValueError("need at least one pair")
    lo, hi = box
    if not lo < hi:
        raise ValueError("box must be a nondegenerate interval")
    n_ld = (n + 1) // 2
    n_rand = n // 2
    xs = np.empty(n)
    ys = np.empty(n)
    idx = np.arange(1, n_ld + 1)
    xs[0::2] = lo + (hi - lo) * _radical_inverse(idx, 2)
    ys[0::2] = lo + (hi - lo) * _radical_inverse(idx, 3)
    if n_rand:
        r = np.random.default_rng(seed).random((n_rand, 2))
        xs[1::2] = lo + (hi - lo) * r[:, 0]
        ys[1::2] = lo + (hi - lo) * r[:, 1]
    return xs, ys


# --- injectivity -----------------------------------------------------------

@dataclass(frozen=True)
class ProbeResult:
    """Outcome of a heuristic probe: a witness, or the absence of one."""

    found_witness: bool
    witness: tuple[float, float] | None
    detail: str

    @property
    def no_witness(self) -> bool:
        return not self.found_witness


def probe_injectivity(
    f: RealMap | IteratedMap,
    box: tuple[float, float],
    n_samples: int = 2000,
    seed: int = 0,
    delta: float = 1e-9,
) -> ProbeResult:
    """Search for a collision pair (x != y with f(x) ~ f(y)) by sampling.

    Candidates come from sorting sampled values; each candidate is refined by
    bisection toward an exact collision. A returned witness satisfies
    ``|f(x) - f(y)| < delta`` and ``|f(x) - f(y)| < delta * |x - y|``.
    "No witness found" is not a proof of injectivity.
    """
    if not delta > 0:
        raise ValidationError("delta", "must be > 0")
    lo = max(box[0], f.domain[0])
    hi = min(box[1], f.domain[1])
    if not lo < hi:
        raise ValidationError("box", "box does not intersect the map domain")
    rng = np.random.default_rng(seed)
    xs = np.concatenate([np.linspace(lo, hi, n_samples // 2), rng.uniform(lo, hi, n_samples - n_samples // 2)])
    xs = np.sort(xs)
    try:
        vals = f.eval_array(xs)
    except Exception as err:  # evaluation fault inside the box: report, no witness
        return ProbeResult(False, None, f"probe aborted: {err}")

    separation = (hi - lo) * 1e-3
    order = np.argsort(vals, kind="stable")
    sorted_vals = vals[order]
    sorted_xs = xs[order]
    gaps = np.diff(sorted_vals)
    scale = max(1.0, float(np.abs(vals).max()))
    candidates = np.nonzero(
        (np.abs(np.diff(sorted_xs)) > separation) & (np.abs(gaps) < 1e-3 * scale)
    )[0]

    for k in candidates[:64]:
        xa, xb = float(sorted_xs[k]), float(sorted_xs[k + 1])
        target = float(vals[order[k]])
        witness = _refine_collision(f, xa, xb, target, lo, hi)
        if witness is not None:
            y = witness
            diff = abs(f(xa) - f(y))
            if abs(xa - y) > 0 and diff < delta and diff < delta * abs(xa - y):
                return ProbeResult(
                    True, (xa, y), f"|f({xa}) - f({y})| = {diff:.3e}"
                )
    return ProbeResult(False, None, f"no collision among {n_samples} samples (heuristic)")


def _refine_collision(f, xa: float, xb: float, target: float, lo: float, hi: float) -> float | None:
    """Bisect g(t) = f(t) - target near xb; None when no sign change brackets it."""
    eta = max(abs(xb) * 1e-3, (hi - lo) * 1e-3)
    u, v = max(lo, xb - eta), min(hi, xb + eta)
    try:
        gu, gv = f(u) - target, f(v) - target
    except Exception:
        return None
    if gu == 0.0:
        return u
    if gv == 0.0:
        return v
    if gu * gv > 0:
        return None
    for _ in range(200):
        mid = 0.5 * (u + v)
        gm = f(mid) - target
        if gm == 0.0:
            return mid
        if gu * gm < 0:
            v, gv = mid, gm
        else:
            u, gu = mid, gm
    return 0.5 * (u + v)


# --- TR-contraction modulus --------------------------------------------------

@dataclass(frozen=True)
class ModulusEstimate:
    """Sampled contraction modulus, always reported with its sampling box."""

    a_hat: float
    witness_pair: tuple[float, float] | None
    n_pairs: int
    box: tuple[float, float]
    seed: int
    norm_ratio_sup: float  # diagnostic only; the certificate is componentwise

    @property
    def certified_contraction(self) -> bool:
        return self.a_hat < 1.0


def _gap_rows(triple: "MapTriple", space: ConeMetricSpace, xs, ys):
    """Distance rows d(TSx, RSy) and d(Tx, Ry) for the given pairs."""
    S, T, R = triple.S, triple.T, triple.R
    sx = S.eval_array(xs)
    sy = S.eval_array(ys)
    num = distance_rows(space, T.eval_array(sx), R.eval_array(sy))
    den = distance_rows(space, T.eval_array(xs), R.eval_array(ys))
    return num, den


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """num/den with the vacuous-pair conventions: 0/0 -> 0, nonzero/0 -> inf."""
    zero_den = den == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = num / den
    ratio[zero_den & (num == 0.0)] = 0.0
    ratio[zero_den & (num != 0.0)] = np.inf
    return ratio


def pairwise_modulus(
    triple: "MapTriple", space: ConeMetricSpace, xs, ys
) -> np.ndarray:
    """Minimal per-pair modulus: componentwise max of d(TSx,RSy)_i / d(Tx,Ry)_i.

    A zero denominator component contributes 0 when the numerator component
    is also zero (the pair is vacuous) and +inf otherwise (no finite modulus
    fits that pair).
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    num, den = _gap_rows(triple, space, xs, ys)
    return _safe_ratio(num, den).max(axis=1)


def estimate_tr_modulus(
    triple: "MapTriple",
    space: ConeMetricSpace,
    box: tuple[float, float],
    n_pairs: int = 100_000,
    seed: int = 42,
    chunk: int = 32_768,
) -> ModulusEstimate:
    """Smallest sampled ``a`` with ``d(TSx, RSy) <= a * d(Tx, Ry)`` in cone order.

    The per-pair values come from :func:`pairwise_modulus`; the estimate is
    their maximum, so it is monotone in ``n_pairs`` for a fixed seed. The
    norm-based ratio supremum rides along as a diagnostic; the certificate
    itself is the componentwise order inequality.
    """
    if n_pairs < 1:
        raise ValidationError("n_pairs", "must be >= 1")
    for m in (triple.S, triple.T, triple.R):
        if box[0] < m.domain[0] or box[1] > m.domain[1]:
            raise ValidationError("box", f"box {box} escapes the domain of {m.label}")

    xs, ys = sample_pairs(box, n_pairs, seed)
    a_hat = 0.0
    witness = None
    norm_sup = 0.0
    cone = space.cone
    for start in range(0, n_pairs, chunk):
        cx = xs[start : start + chunk]
        cy = ys[start : start + chunk]
        num, den = _gap_rows(triple, space, cx, cy)
        per_pair = _safe_ratio(num, den).max(axis=1)
        k = int(per_pair.argmax())
        if witness is None or per_pair[k] > a_hat:
            a_hat = float(per_pair[k])
            witness = (float(cx[k]), float(cy[k]))
        norm_sup = max(
            norm_sup, float(_safe_ratio(_norms(num, cone), _norms(den, cone)).max())
        )

    return ModulusEstimate(a_hat, witness, n_pairs, box, seed, norm_sup)


def modulus_certificate_holds(
    a: float,
    triple: "MapTriple",
    space: ConeMetricSpace,
    xs: np.ndarray,
    ys: np.ndarray,
    tol: float = 1e-12,
) -> bool:
    """Check ``a * d(Tx, Ry) - d(TSx, RSy)`` lands in the cone for every pair,
    after snapping coordinates below ``tol``."""
    S, T, R = triple.S, triple.T, triple.R
    sx = S.eval_array(xs)
    sy = S.eval_array(ys)
    num = distance_rows(space, T.eval_array(sx), R.eval_array(sy))
    den = distance_rows(space, T.eval_array(xs), R.eval_array(ys))
    slack = a * den - num
    slack[np.abs(slack) < tol] = 0.0
    return bool((slack >= 0.0).all())


# --- family classification ---------------------------------------------------

@dataclass(frozen=True)
class FamilyClassification:
    """Sampled placement of a map in the contractive/nonexpansive family."""

    category: str
    ratio_sup: float
    alpha: float | None
    factor: float  # the per-map constant used by image-gap bounds, min(ratio_sup, 1)
    witness_pair: tuple[float, float] | None

    @property
    def in_family(self) -> bool:
        return self.category in IN_FAMILY


def classify_family(
    f: RealMap | IteratedMap,
    space: ConeMetricSpace,
    box: tuple[float, float],
    n_pairs: int = 20_000,
    seed: int = 0,
    alpha: float | None = None,
) -> FamilyClassification:
    """Measure sup of ||d(f(x), f(y))|| / ||d(x, y)|| over sampled pairs.

    Classified as an alpha-contraction when the measured supremum stays
    clearly below 1 (or below a caller-supplied alpha < 1), contractive when
    every sampled ratio is < 1 but the supremum is indistinguishable from 1,
    nonexpansive when the supremum is 1 up to rounding, and outside the
    family otherwise. Both builtin metrics scale a fixed vector by |x - y|,
    so the ratio reduces to |f(x) - f(y)| / |x - y|.
    """
    if alpha is not None and not (0.0 < alpha < 1.0):
        raise ValidationError("alpha", "must lie in (0, 1)")
    xs, ys = sample_pairs(box, n_pairs, seed)
    # Finite-difference ratios over separations below 0.1% of the box measure
    # float noise, not map structure; drop those pairs.
    keep = np.abs(xs - ys) >= (box[1] - box[0]) * 1e-3
    xs, ys = xs[keep], ys[keep]
    fx = f.eval_array(xs)
    fy = f.eval_array(ys)
    ratios = np.abs(fx - fy) / np.abs(xs - ys)
    k = int(ratios.argmax())
    ratio_sup = float(ratios[k])
    witness = (float(xs[k]), float(ys[k]))

    if alpha is not None and ratio_sup <= alpha + 1e-12:
        category, out_alpha = ALPHA_CONTRACTION, alpha
    elif ratio_sup < 1.0 - 1e-6:
        category, out_alpha = ALPHA_CONTRACTION, ratio_sup
    elif ratio_sup < 1.0 and bool((ratios < 1.0).all()):
        category, out_alpha = CONTRACTIVE, None
    elif ratio_sup <= 1.0 + 1e-12:
        category, out_alpha = NONEXPANSIVE, None
    else:
        category, out_alpha = OUTSIDE_FAMILY, None

    return FamilyClassification(category, ratio_sup, out_alpha, min(ratio_sup, 1.0), witness)


# --- subsequential convergence probe ----------------------------------------

@dataclass(frozen=True)
class SubsequentialProbe:
    verdict: str
    sequence_name: str | None
    detail: str


def probe_subsequential_convergence(
    f: RealMap | IteratedMap,
    space: ConeMetricSpace,
    S: RealMap | IteratedMap | None = None,
    x0: float = 0.0,
    bound: float = 100.0,
    n_max: int = 200,
    w: int = 10,
    epsilon: float = 1e-8,
    sequences: Sequence[tuple[str, Sequence[float]]] | None = None,
) -> SubsequentialProbe:
    """Heuristic hunt for image-converges-while-inputs-escape behavior.

    Feeds trial sequences through ``f`` (defaults: the naturals, plus the
    orbit of ``S`` from ``x0`` when given; override with ``sequences``);
    flags ``suspect-non-subsequential`` when an image sequence passes the
    converging diagnostic while its inputs escape past ``bound``
    monotonically. Never a proof.
    """
    if not bound > 0:
        raise ValidationError("bound", "must be > 0")
    if n_max < 10:
        raise ValidationError("n_max", "must be >= 10")

    if sequences is not None:
        trials = [(label, [float(v) for v in seq][:n_max]) for label, seq in sequences]
    else:
        trials = [("naturals", [float(n) for n in range(n_max)])]
        if S is not None:
            orbit = [float(x0)]
            try:
                for _ in range(n_max - 1):
                    orbit.append(S(orbit[-1]))
                trials.append(("orbit", orbit))
            except DomainEscapeError:
                pass

    for label, ys in trials:
        try:
            images = [f(y) for y in ys]
        except Exception:
            continue
        diag = diagnose_sequence(space, images, limit=images[-1], w=w, epsilon=epsilon, max_n=n_max)
        tail = np.abs(ys[-w:])
        escapes = bool((tail > bound).all() and (np.diff(tail) > 0).all())
        if diag.converging and escapes:
            return SubsequentialProbe(
                SUSPECT_NON_SUBSEQUENTIAL,
                label,
                f"images settle near {images[-1]:.6g} while |inputs| exceed {bound}",
            )
    return SubsequentialProbe(NO_EVIDENCE, None, "no escaping sequence with converging images found")


# --- the solver's triple ------------------------------------------------------

@dataclass(frozen=True)
class MapTriple:
    """Maps S, T, R with their probe records; the solver requires the probes."""

    S: RealMap | IteratedMap
    T: RealMap | IteratedMap
    R: RealMap | IteratedMap
    injectivity_T: ProbeResult | None = None
    injectivity_R: ProbeResult | None = None
    family_T: FamilyClassification | None = None
    family_R: FamilyClassification | None = None

    @property
    def solver_eligible(self) -> bool:
        return (
            self.injectivity_T is not None
            and self.injectivity_R is not None
            and self.injectivity_T.no_witness
            and self.injectivity_R.no_witness
        )

    def with_s(self, s: RealMap | IteratedMap) -> "MapTriple":
        return replace(self, S=s)


def probe_triple(
    S: RealMap | IteratedMap,
    T: RealMap | IteratedMap,
    R: RealMap | IteratedMap,
    space: ConeMetricSpace,
    box: tuple[float, float],
    n_samples: int = 2000,
    seed: int = 0,
    delta: float = 1e-9,
    classify: bool = True,
) -> MapTriple:
    """Build a MapTriple with injectivity probes (and family classes) recorded."""
    inj_t = probe_injectivity(T, box, n_samples, seed, delta)
    inj_r = probe_injectivity(R, box, n_samples, seed + 1, delta)
    fam_t = fam_r = None
    if classify:
        fam_t = classify_family(T, space, box, seed=seed)
        fam_r = classify_family(R, space, box, seed=seed + 1)
    return MapTriple(S, T, R, inj_t, inj_r, fam_t, fam_r)
