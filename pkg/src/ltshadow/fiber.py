"""Sampling the global states behind one local shadow.

Local agents agreeing on a shadow s cannot distinguish the states in its
fiber: the affine slice s + span(kernel) intersected with the positive cone.
Pushing the whole fiber through a global process and projecting back to
shadows measures how non-deterministic that process looks locally;
locally positive maps collapse the pushed set to a point, anything else
spreads it.

The sampler is hit-and-run inside the fiber: random kernel directions, exact
feasible-segment endpoints by concave root bracketing of the minimum
eigenvalue along the line, uniform draw on the segment.  Coverage, not a
certified uniform law, is the goal; the spread summaries (trace-norm
diameter and mean pairwise distance) are pragmatic choices, not canonical
ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cones import FeasibilityParams, in_boxtimes_cone, MEMBER
from .errors import InfeasibleShadow
from .linalg import max_norm, min_eigenvalue, rng_from_seed, trace_norm
from .processes import LinearProcess
from .shadow import ShadowState, fiber_basis, local_shadow_matrix

DET_TOL = 1e-7
REP_PSD_TOL = 1e-9
REP_TRACE_TOL = 1e-9
REP_SHADOW_TOL = 1e-8

_STREAM_HIT_AND_RUN = 31


@dataclass
class FiberSample:
    """Representatives of one shadow's fiber, plus bookkeeping."""

    shadow: ShadowState
    representatives: list[np.ndarray]
    seed: int
    n_requested: int
    n_accepted: int
    kernel_dim: int = 0
    rejected: int = 0


@dataclass
class SpreadReport:
    """Trace-norm spread of the shadows of pushed fiber representatives."""

    n: int
    diameter: float
    mean_pairwise: float
    deterministic: bool
    excluded: int = 0

    def __post_init__(self):
        if self.diameter + 1e-15 < self.mean_pairwise:
            raise ValueError("diameter cannot be smaller than the mean pairwise distance")


def _feasible_start(shadow: ShadowState, params: FeasibilityParams) -> np.ndarray:
    """A positive point on the affine slice, from the shadow's certificate or
    from the membership oracle (run at representative tolerance)."""
    cert = shadow.certified.get("boxtimes")
    if cert is not None:
        candidate = shadow.op + np.asarray(cert, dtype=float)
        if min_eigenvalue(candidate) >= -REP_PSD_TOL:
            return candidate
    tight = FeasibilityParams(seed=params.seed, tol=min(params.tol, 1e-10),
                              max_iter=max(params.max_iter, 20000),
                              restarts=params.restarts)
    result = in_boxtimes_cone(shadow.op, shadow.dims, tight, method="projection")
    if result.verdict != MEMBER:
        raise InfeasibleShadow(
            f"no positive state projects to this shadow (oracle verdict: {result.verdict})"
        )
    return shadow.op + result.certificate["kernel_offset"]


def _segment_endpoint(x: np.ndarray, direction: np.ndarray, sign: float,
                      scale: float) -> float:
    """Largest alpha >= 0 with lambda_min(x + sign*alpha*direction) >= 0.

    The minimum eigenvalue is concave along the line, so the feasible set is
    an interval; expand exponentially to bracket the boundary, then bisect.
    """
    def lam(alpha: float) -> float:
        return min_eigenvalue(x + sign * alpha * direction)

    if lam(0.0) < -REP_PSD_TOL:
        return 0.0
    hi = 0.25 * scale
    for _ in range(60):
        if lam(hi) < 0.0:
            break
        hi *= 2.0
    else:  # pragma: no cover - the trace-1 slice of the PSD cone is bounded
        return hi
    lo = 0.0
    for _ in range(80):
        mid = (lo + hi) / 2
        if lam(mid) >= 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * scale:
            break
    return lo


def sample_fiber(shadow: ShadowState, n: int, seed: int,
                 params: FeasibilityParams | None = None,
                 burn_in: int = 100) -> FiberSample:
    """Hit-and-run sample of the fiber of a shadow.

    Requires the shadow to admit a positive completion (boxtimes member);
    raises InfeasibleShadow otherwise.  With an empty kernel the fiber is a
    single point.  Every returned representative is validated: positive
    within 1e-9, unit trace within 1e-9, and shadow equal to the input
    within 1e-8.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if params is None:
        params = FeasibilityParams(seed=seed)
    kernel = fiber_basis(shadow.dims)
    k = len(kernel)
    if k == 0:
        start = shadow.op.copy()
        if min_eigenvalue(start) < -REP_PSD_TOL:
            raise InfeasibleShadow("shadow with empty kernel is not positive")
        reps = [start]
        return FiberSample(shadow=shadow, representatives=reps, seed=seed,
                           n_requested=n, n_accepted=1, kernel_dim=0)

    start = _feasible_start(shadow, params)
    rng = rng_from_seed(seed, _STREAM_HIT_AND_RUN)
    scale = 1.0 + max_norm(start)
    x = start
    reps: list[np.ndarray] = []
    rejected = 0
    total_steps = burn_in + n
    for step in range(total_steps):
        direction = rng.standard_normal(k)
        direction /= np.linalg.norm(direction)
        d_mat = sum(float(c) * kb for c, kb in zip(direction, kernel))
        a_plus = _segment_endpoint(x, d_mat, +1.0, scale)
        a_minus = _segment_endpoint(x, d_mat, -1.0, scale)
        alpha = rng.uniform(-a_minus, a_plus)
        x = x + alpha * d_mat
        if step < burn_in:
            continue
        if _valid_representative(x, shadow):
            reps.append(x.copy())
        else:
            rejected += 1
    if not reps:
        # The certified start point always validates; fall back to it.
        reps = [start]
    return FiberSample(shadow=shadow, representatives=reps, seed=seed,
                       n_requested=n, n_accepted=len(reps), kernel_dim=k,
                       rejected=rejected)


def _valid_representative(x: np.ndarray, shadow: ShadowState) -> bool:
    if min_eigenvalue(x) < -REP_PSD_TOL:
        return False
    if abs(float(np.trace(x)) - shadow.trace) > REP_TRACE_TOL:
        return False
    return max_norm(local_shadow_matrix(x, shadow.dims) - shadow.op) <= REP_SHADOW_TOL


def push_and_spread(sample: FiberSample, proc: LinearProcess,
                    out_dims=None, det_tol: float = DET_TOL,
                    psd_tol: float = REP_PSD_TOL) -> SpreadReport:
    """Push every representative through the process and measure shadow spread.

    Representatives whose image fails positivity are excluded and counted.
    ``deterministic`` is True when the trace-norm diameter of the output
    shadows is at most det_tol — the locally positive case.
    """
    out_dims = tuple(out_dims) if out_dims is not None else proc.out_dims
    shadows: list[np.ndarray] = []
    excluded = 0
    for rep in sample.representatives:
        image = proc.apply(rep)
        if min_eigenvalue(image) < -psd_tol:
            excluded += 1
            continue
        shadows.append(local_shadow_matrix(image, out_dims))
    n = len(shadows)
    if n == 0:
        return SpreadReport(n=0, diameter=0.0, mean_pairwise=0.0,
                            deterministic=True, excluded=excluded)
    diameter = 0.0
    total = 0.0
    pairs = 0
    for i in range(n):
        for j in range(i):
            d = trace_norm(shadows[i] - shadows[j])
            diameter = max(diameter, d)
            total += d
            pairs += 1
    mean = total / pairs if pairs else 0.0
    return SpreadReport(n=n, diameter=diameter, mean_pairwise=mean,
                        deterministic=diameter <= det_tol, excluded=excluded)
