"""The shadow projection on states.

A local agent pair only ever sees the pairing of a global state with product
effects, so the observable content of a state W is its shadow: the component
of W in the product of the one-factor symmetric operator spaces.  For real
matrices this projection is the factor-wise symmetrizer (partial-transpose
averaging applied to every factor); its kernel on symmetric bipartite
operators is the aa block, and states differing by a kernel element are
locally indistinguishable.

Shadows are kept in ambient coordinates (D x D matrices supported on the ss
block) rather than as abstract tensors, so positivity tests and cone oracles
reuse the same matrix type.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .blocks import build_block_basis, project_block, symmetric_basis
from .errors import DimensionMismatch, SupportViolation
from .linalg import kron, max_norm

INDISTINGUISHABILITY_TOL = 1e-9
SHADOW_SUPPORT_TOL = 1e-9


def _check_dims(w: np.ndarray, dims) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise DimensionMismatch(f"factor dimensions must be >= 1, got {dims}")
    w = np.asarray(w)
    total = math.prod(dims)
    if w.shape != (total, total):
        raise DimensionMismatch(
            f"operator shape {w.shape} does not match factor dimensions {dims} "
            f"(product {total})"
        )
    return dims


def partial_transpose(w: np.ndarray, dims, factor: int) -> np.ndarray:
    """Transpose of one tensor factor of an operator on a product space."""
    dims = _check_dims(w, dims)
    n = len(dims)
    t = np.asarray(w, dtype=float).reshape(dims + dims)
    t = np.swapaxes(t, factor, n + factor)
    total = math.prod(dims)
    return t.reshape(total, total)


def local_shadow_matrix(w: np.ndarray, dims) -> np.ndarray:
    """Factor-wise symmetrization of W: average W with each partial transpose.

    This is the orthogonal projection onto the product of the one-factor
    symmetric subspaces, computed without materializing any block basis.
    """
    dims = _check_dims(w, dims)
    out = np.asarray(w, dtype=float)
    for k in range(len(dims)):
        out = (out + partial_transpose(out, dims, k)) / 2
    return out


def shadow_support_defect(m: np.ndarray, dims) -> float:
    """Max-norm of the component of M outside the shadow (all-symmetric) subspace."""
    return max_norm(np.asarray(m, dtype=float) - local_shadow_matrix(m, dims))


def kernel_component_norm(w: np.ndarray, dims) -> float:
    """Frobenius norm of the part of W invisible to local agents."""
    diff = np.asarray(w, dtype=float) - local_shadow_matrix(w, dims)
    return float(np.linalg.norm(diff))


@dataclass(frozen=True)
class ShadowState:
    """A state as local agents see it: an ss-supported matrix plus metadata.

    ``certified`` records cone-membership facts established for this shadow,
    keyed by cone name; the value is the certificate payload (for the
    boxtimes cone, a kernel offset K with op + K positive semidefinite).
    """

    op: np.ndarray
    dims: tuple[int, ...]
    certified: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        dims = _check_dims(self.op, self.dims)
        object.__setattr__(self, "dims", dims)
        op = np.asarray(self.op, dtype=float)
        defect = shadow_support_defect(op, dims)
        if defect > SHADOW_SUPPORT_TOL * (1 + max_norm(op)):
            raise SupportViolation(
                f"matrix is not supported on the shadow subspace (defect {defect:.3e})"
            )
        op.flags.writeable = False
        object.__setattr__(self, "op", op)

    @property
    def trace(self) -> float:
        return float(np.trace(self.op))


def lt_state(w: np.ndarray, dims) -> ShadowState:
    """Shadow of a bipartite state: the ss-block projection of W.

    For symmetric W the discarded component lies entirely in the aa block, so
    the returned ShadowState carries the definitional boxtimes certificate
    K = W - shadow (op + K = W is positive whenever W is).
    """
    dims = _check_dims(w, dims)
    if len(dims) != 2:
        raise DimensionMismatch(f"lt_state expects two factors, got {dims}")
    return lt_multipartite(w, dims)


def lt_multipartite(w: np.ndarray, dims) -> ShadowState:
    """Factor-wise shadow for any number of factors (identity for one factor)."""
    dims = _check_dims(w, dims)
    w = np.asarray(w, dtype=float)
    shadow = local_shadow_matrix(w, dims)
    certified = {}
    if (
        len(dims) == 2
        and max_norm(w - w.T) <= 1e-12 * (1 + max_norm(w))
        and float(np.linalg.eigvalsh(w)[0]) >= -1e-9
    ):
        # W itself is a positive completion of its shadow
        certified["boxtimes"] = w - shadow
    return ShadowState(op=shadow, dims=dims, certified=certified)


def lt_state_oracle(w: np.ndarray, dims) -> ShadowState:
    """Independent shadow computation from the defining linear system.

    Solves for the matrix M in the span of product symmetric basis elements
    whose pairings with every product effect match those of W:
    trace_inner(M, a_1 x ... x a_n) = trace_inner(W, a_1 x ... x a_n).
    Deliberately ignorant of the symmetrizer implementation; used as the
    anti-bug cross-check for the closed form.
    """
    dims = _check_dims(w, dims)
    w = np.asarray(w, dtype=float)
    factor_bases = [symmetric_basis(d) for d in dims]
    products = np.stack([
        kron_all(combo).ravel() for combo in itertools.product(*factor_bases)
    ])
    gram = products @ products.T
    rhs = products @ w.ravel()
    try:
        coeff = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - orthonormal bases
        raise RuntimeError("singular Gram system for product symmetric basis") from exc
    m = (coeff @ products).reshape(w.shape)
    return ShadowState(op=m, dims=dims)


def kron_all(factors) -> np.ndarray:
    out = np.asarray(factors[0], dtype=float)
    for f in factors[1:]:
        out = kron(out, f)
    return out


def locally_indistinguishable(w1: np.ndarray, w2: np.ndarray, dims,
                              tol: float = INDISTINGUISHABILITY_TOL) -> bool:
    """True iff the two states have the same shadow within tol (max-norm)."""
    s1 = local_shadow_matrix(w1, dims)
    s2 = local_shadow_matrix(w2, dims)
    return max_norm(s1 - s2) <= tol


def fiber_basis(dims) -> list[np.ndarray]:
    """Orthonormal basis of the shadow kernel for a bipartite system (the aa block).

    The fiber of a shadow s is {s + sum_i t_i K_i} intersected with the
    positive cone.  Empty when either factor has dimension 1.
    """
    dims = tuple(int(d) for d in dims)
    if len(dims) != 2:
        raise DimensionMismatch(f"fiber_basis is defined for two factors, got {dims}")
    basis = build_block_basis(dims[0], dims[1])
    return [k.copy() for k in basis.basis_aa]


def aa_projection(w: np.ndarray, dims) -> np.ndarray:
    """Component of a bipartite operator in the shadow kernel (aa block)."""
    dims = _check_dims(w, dims)
    if len(dims) != 2:
        raise DimensionMismatch("aa_projection is defined for two factors")
    basis = build_block_basis(dims[0], dims[1])
    return project_block(np.asarray(w, dtype=float), basis, "aa")
