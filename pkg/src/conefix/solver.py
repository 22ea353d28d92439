"""Picard iteration with image-space error envelopes and divergence handling.

The iteration tracks two interleaved image-gap chains,
``||d(T x_n, R x_{n+1})||`` and ``||d(R x_n, T x_{n+1})||``; for a genuine
contraction of modulus ``a`` each is bounded by a geometric envelope
``a^n * K * D0`` seeded by its own first gap, where K is the normal constant
in use. An envelope violation falsifies the declared modulus from the trace
itself (NotAContraction). A fixed point is declared only when both the image
gap and the iterate step fall below epsilon, and the returned point is always
re-checked through its residual ``||d(S v0, v0)||`` - sound even when the
sequential-convergence probes were wrong. When the image gaps stay below
epsilon for a full window while the iterates themselves escape, the run ends
as ImageConvergedIteratesDiverged and reports the image limits instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .cone_metric import ConeMetricSpace, DriftTracker, distance, scalar_distance
from .errors import (
    BallInvariantError,
    DomainEscapeError,
    PreconditionError,
    ValidationError,
)
from .mappings import IteratedMap, MapTriple, ModulusEstimate, RealMap, estimate_tr_modulus
from .ordered_space import SpaceElement, in_cone, snap_zero, strictly_less, zeros_like

ENVELOPE_SLACK = 1e-6  # relative slack before a row falsifies the declared modulus


class SolveStatus(Enum):
    FIXED_POINT_FOUND = "FixedPointFound"
    IMAGE_CONVERGED_ITERATES_DIVERGED = "ImageConvergedIteratesDiverged"
    MAX_ITER_EXCEEDED = "MaxIterExceeded"
    NOT_A_CONTRACTION = "NotAContraction"


@dataclass(frozen=True)
class SolveConfig:
    """Stopping thresholds, the modulus in use, and the normal constant."""

    x0: float
    a: float
    epsilon: float = 1e-10
    epsilon_res: float = 1e-8
    max_iter: int = 10_000
    w: int = 10
    normal_constant: float | None = None  # falls back to the space's constant
    a_certified: bool = False  # True when a came from a sampled certificate

    def __post_init__(self):
        if not (math.isfinite(self.a) and 0.0 <= self.a < 1.0):
            raise ValidationError("a", "modulus must satisfy 0 <= a < 1")
        if not self.epsilon > 0:
            raise ValidationError("epsilon", "must be > 0")
        if not self.epsilon_res > 0:
            raise ValidationError("epsilon_res", "must be > 0")
        if self.max_iter < 1:
            raise ValidationError("max_iter", "must be >= 1")
        if self.w < 2:
            raise ValidationError("w", "must be >= 2")
        if self.normal_constant is not None and self.normal_constant < 1.0:
            raise ValidationError("normal_constant", "must be >= 1")


@dataclass(frozen=True)
class IterationTrace:
    """Per-row iteration record; the CSV export mirrors these columns."""

    x: tuple[float, ...]  # x_n per row
    image_gap: tuple[float, ...]  # ||d(T x_n, R x_{n+1})||
    step: tuple[float, ...]  # ||d(x_n, x_{n+1})||
    envelope: tuple[float, ...]  # a^n * K * D0
    image_gap_alt: tuple[float, ...]  # ||d(R x_n, T x_{n+1})||, NaN at row 0
    envelope_alt: tuple[float, ...]  # a^(n-1) * K * D0_alt, NaN at row 0
    d0: float
    d0_alt: float
    a: float
    k: float

    def __len__(self) -> int:
        return len(self.image_gap)

    def to_csv(self, path) -> None:
        lines = ["n,x_n,image_gap,step,envelope"]
        for n in range(len(self)):
            lines.append(
                f"{n},{self.x[n]:.17g},{self.image_gap[n]:.17g},"
                f"{self.step[n]:.17g},{self.envelope[n]:.17g}"
            )
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


@dataclass(frozen=True)
class SolveResult:
    status: SolveStatus
    v0: float | None
    y0: float | None
    z0: float | None
    residual: float | None
    iterations: int
    final_envelope: float
    violating_row: int | None = None
    notes: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "status": self.status.value,
            "v0": self.v0,
            "y0": self.y0,
            "z0": self.z0,
            "residual": self.residual,
            "iterations": self.iterations,
            "final_envelope": self.final_envelope,
            "violating_row": self.violating_row,
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class BallCheck:
    n: int
    margin_min: float
    inside: bool


def error_bound(n: int, a: float, k: float, d0: float) -> float:
    """Image-space envelope a^(n-1) * K * D0 for the n-th gap (n >= 1)."""
    if n < 1:
        raise ValidationError("n", "must be >= 1")
    if not 0.0 <= a < 1.0:
        raise ValidationError("a", "must satisfy 0 <= a < 1")
    if not k >= 1.0:
        raise ValidationError("k", "normal constant must be >= 1")
    if not d0 >= 0.0:
        raise ValidationError("d0", "must be >= 0")
    return a ** (n - 1) * k * d0


def picard(S: RealMap | IteratedMap, x0: float, n: int) -> float:
    """n-fold application of S; picard(S, x0, 0) == x0.

    A domain escape at step k raises DomainEscapeError carrying k.
    """
    if n < 0:
        raise ValidationError("n", "must be >= 0")
    x = float(x0)
    for k in range(n):
        try:
            x = S(x)
        except DomainEscapeError as err:
            err.step = k
            raise
    return x


def _space_point(space: ConeMetricSpace, x: float, step: int) -> float:
    lo, hi = space.domain
    if not (lo <= x <= hi):
        raise DomainEscapeError(
            f"iterate {x!r} left the space domain [{lo}, {hi}] at step {step}",
            point=x,
            step=step,
        )
    return x


def _apply(f, x: float, step: int) -> float:
    try:
        return f(x)
    except DomainEscapeError as err:
        err.step = step
        raise


def _run(
    triple: MapTriple,
    space: ConeMetricSpace,
    cfg: SolveConfig,
    ball: tuple[float, SpaceElement] | None = None,
) -> tuple[SolveResult, IterationTrace, tuple[BallCheck, ...]]:
    if not triple.solver_eligible:
        raise PreconditionError(
            "triple is not solver-eligible: injectivity probes are missing or found a witness"
        )
    S, T, R = triple.S, triple.T, triple.R
    a = cfg.a
    k = cfg.normal_constant if cfg.normal_constant is not None else space.normal_constant
    eps = cfg.epsilon

    x = _space_point(space, float(cfg.x0), 0)
    xs: list[float] = []
    gaps: list[float] = []
    steps: list[float] = []
    envs: list[float] = []
    gaps_alt: list[float] = []
    envs_alt: list[float] = []
    ball_log: list[BallCheck] = []

    d0 = 0.0
    d0_alt = 0.0
    env = 0.0
    env_alt = math.nan
    drift = DriftTracker(cfg.w)
    drift.add(0.0)
    persist = 0

    status: SolveStatus | None = None
    v0 = y0 = z0 = residual = None
    violating_row = None
    notes: list[str] = []
    iterations = 0

    for n in range(cfg.max_iter):
        x_next = _space_point(space, _apply(S, x, n + 1), n + 1)
        gap = scalar_distance(space, _apply(T, x, n), _apply(R, x_next, n + 1))
        step = scalar_distance(space, x, x_next)
        if n == 0:
            d0 = gap
            env = k * d0
            gap_alt = math.nan
        else:
            env *= a
            gap_alt = scalar_distance(space, _apply(R, x, n), _apply(T, x_next, n + 1))
            if n == 1:
                d0_alt = gap_alt
                env_alt = k * d0_alt
            else:
                env_alt *= a

        xs.append(x)
        gaps.append(gap)
        steps.append(step)
        envs.append(env)
        gaps_alt.append(gap_alt)
        envs_alt.append(env_alt if n >= 1 else math.nan)

        if ball is not None:
            center, c = ball
            margin = snap_zero(c - distance(space, center, _apply(R, x_next, n + 1)))
            inside = in_cone(margin, space.cone)
            ball_log.append(BallCheck(n, min(margin.coords), inside))
            if not inside:
                raise BallInvariantError(
                    f"image left the ball at row {n}; the declared modulus or the "
                    f"hypothesis check is wrong",
                    step=n,
                    margin=margin.coords,
                )

        if gap > env * (1.0 + ENVELOPE_SLACK):
            status = SolveStatus.NOT_A_CONTRACTION
            violating_row = n
            notes.append(
                f"row {n}: image gap {gap:.6g} exceeds envelope {env:.6g}; declared a={a} is wrong"
            )
            iterations = n + 1
            break
        if n >= 1 and not math.isnan(env_alt) and gap_alt > env_alt * (1.0 + ENVELOPE_SLACK):
            status = SolveStatus.NOT_A_CONTRACTION
            violating_row = n
            notes.append(
                f"row {n}: alternate image gap {gap_alt:.6g} exceeds envelope "
                f"{env_alt:.6g}; declared a={a} is wrong"
            )
            iterations = n + 1
            break

        if gap <= eps and step <= eps:
            candidate = x_next
            res = scalar_distance(space, _apply(S, candidate, n + 2), candidate)
            if res <= cfg.epsilon_res:
                status = SolveStatus.FIXED_POINT_FOUND
                v0 = candidate
                residual = res
                y0 = _apply(T, candidate, n + 1)
                z0 = _apply(R, candidate, n + 1)
                iterations = n + 1
                break

        persist = persist + 1 if gap <= eps else 0
        drift.add(scalar_distance(space, x_next, xs[0]))
        if persist >= cfg.w and drift.diverging:
            status = SolveStatus.IMAGE_CONVERGED_ITERATES_DIVERGED
            y0 = _apply(T, x_next, n + 1)
            z0 = _apply(R, x_next, n + 1)
            iterations = n + 1
            break

        x = x_next
    else:
        status = SolveStatus.MAX_ITER_EXCEEDED
        iterations = cfg.max_iter
        if (
            cfg.a_certified
            and triple.family_T is not None
            and triple.family_R is not None
            and triple.family_T.in_family
            and triple.family_R.in_family
        ):
            notes.append(
                "T and R classified inside the contractive/nonexpansive family and the "
                "modulus was certified on samples; non-termination suggests a "
                "classification error, not a normal outcome"
            )

    trace = IterationTrace(
        x=tuple(xs),
        image_gap=tuple(gaps),
        step=tuple(steps),
        envelope=tuple(envs),
        image_gap_alt=tuple(gaps_alt),
        envelope_alt=tuple(envs_alt),
        d0=d0,
        d0_alt=d0_alt,
        a=a,
        k=k,
    )
    result = SolveResult(
        status=status,
        v0=v0,
        y0=y0,
        z0=z0,
        residual=residual,
        iterations=iterations,
        final_envelope=envs[-1] if envs else k * d0,
        violating_row=violating_row,
        notes=tuple(notes),
    )
    return result, trace, tuple(ball_log)


def solve(
    triple: MapTriple, space: ConeMetricSpace, cfg: SolveConfig
) -> tuple[SolveResult, IterationTrace]:
    """Iterate x_{n+1} = S(x_n) until a fixed point, a divergence verdict,
    an envelope violation, or the iteration budget runs out."""
    result, trace, _ = _run(triple, space, cfg)
    return result, trace


def solve_localized(
    triple: MapTriple,
    space: ConeMetricSpace,
    x0: float,
    c: SpaceElement,
    cfg: SolveConfig,
) -> tuple[SolveResult, IterationTrace, tuple[BallCheck, ...]]:
    """Solve inside the ball of radius c around T(x0).

    The entry hypothesis ``d(T S x0, T x0) <= (1 - a) * c`` is checked
    exactly (no rounding) and failure raises PreconditionError carrying the
    order-gap vector. Every step then asserts the image stays in the ball;
    an exit raises BallInvariantError, which signals a wrong modulus or a bug
    rather than a normal outcome.
    """
    cfg = replace(cfg, x0=float(x0))
    if c.layout != space.cone.layout:
        raise ValidationError("c", "ball radius layout does not match the space's cone")
    if not strictly_less(zeros_like(c.layout), c, space.cone):
        raise PreconditionError(
            "ball radius c must be strictly positive in every coordinate", gap=c.coords
        )
    tx0 = triple.T(float(x0))
    tsx0 = triple.T(triple.S(float(x0)))
    gap = (1.0 - cfg.a) * c - distance(space, tsx0, tx0)
    if not in_cone(gap, space.cone):
        raise PreconditionError(
            "hypothesis d(TSx0, Tx0) <= (1-a)c fails; the order gap has a negative "
            "coordinate",
            gap=gap.coords,
        )
    return _run(triple, space, cfg, ball=(tx0, c))


def solve_power(
    triple: MapTriple,
    space: ConeMetricSpace,
    power: int,
    cfg: SolveConfig,
    box: tuple[float, float] | None = None,
    n_pairs: int = 100_000,
    seed: int = 42,
    estimate: bool = True,
) -> tuple[SolveResult, IterationTrace, ModulusEstimate | None]:
    """Solve with the composed map S^power and hand back its fixed point.

    When ``estimate`` is set, the modulus of S^power is certified on samples
    first; a sampled modulus >= 1 ends the run as NotAContraction without
    iterating. The returned point is re-verified against the base map:
    ``||d(S v0, v0)|| <= epsilon_res`` must hold, because any fixed point of
    S^power that the base map moves would contradict the composed
    contraction.
    """
    if power < 1:
        raise ValidationError("power", "must be >= 1")
    s_pow = IteratedMap(triple.S, power) if power > 1 else triple.S
    powered = triple.with_s(s_pow)
    est = None
    if estimate:
        if box is None:
            raise ValidationError("box", "a sampling box is required to estimate the modulus")
        est = estimate_tr_modulus(powered, space, box, n_pairs, seed)
        if not est.certified_contraction:
            result = SolveResult(
                status=SolveStatus.NOT_A_CONTRACTION,
                v0=None,
                y0=None,
                z0=None,
                residual=None,
                iterations=0,
                final_envelope=math.nan,
                notes=(
                    f"sampled modulus of the {power}-fold composition is "
                    f"{est.a_hat:.6g} >= 1 on {est.box}",
                ),
            )
            empty = IterationTrace((), (), (), (), (), (), 0.0, 0.0, est.a_hat, 1.0)
            return result, empty, est
        cfg = replace(cfg, a=est.a_hat, a_certified=True)

    result, trace, _ = _run(powered, space, cfg)
    if result.status is SolveStatus.FIXED_POINT_FOUND:
        base_res = scalar_distance(space, triple.S(result.v0), result.v0)
        if base_res > cfg.epsilon_res:
            result = replace(
                result,
                status=SolveStatus.NOT_A_CONTRACTION,
                v0=None,
                residual=None,
                notes=result.notes
                + (
                    f"S^{power} fixed point moved by the base map "
                    f"(residual {base_res:.6g}); the composed modulus certificate "
                    f"was insufficient",
                ),
            )
        else:
            result = replace(
                result,
                residual=base_res,
                notes=result.notes + (f"base-map residual {base_res:.6g} verified",),
            )
    return result, trace, est


@dataclass(frozen=True)
class UniquenessRun:
    start: float
    status: SolveStatus
    v0: float | None


@dataclass(frozen=True)
class UniquenessReport:
    runs: tuple[UniquenessRun, ...]
    passed: bool
    inconclusive: bool
    max_spread: float | None
    tolerance: float

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "inconclusive": self.inconclusive,
            "max_spread": self.max_spread,
            "tolerance": self.tolerance,
            "runs": [
                {"start": r.start, "status": r.status.value, "v0": r.v0} for r in self.runs
            ],
        }


def verify_uniqueness(
    triple: MapTriple,
    space: ConeMetricSpace,
    cfg: SolveConfig,
    starts,
) -> UniquenessReport:
    """Solve from several starts and check the fixed points coincide.

    Passes iff every run finds a fixed point and all of them agree within
    ``10 * epsilon_res``. Any non-converging run makes the report
    inconclusive rather than failed: absence of a fixed point from one start
    says nothing about uniqueness.
    """
    starts = [float(s) for s in starts]
    if len(starts) < 2:
        raise ValidationError("starts", "need at least two starting points")
    runs: list[UniquenessRun] = []
    for s in starts:
        result, _ = solve(triple, space, replace(cfg, x0=s))
        runs.append(UniquenessRun(s, result.status, result.v0))
    found = [r.v0 for r in runs if r.status is SolveStatus.FIXED_POINT_FOUND]
    inconclusive = len(found) != len(runs)
    tol = 10.0 * cfg.epsilon_res
    spread = max(abs(u - v) for u in found for v in found) if found else None
    passed = not inconclusive and spread is not None and spread <= tol
    return UniquenessReport(tuple(runs), passed, inconclusive, spread, tol)
