"""Orthonormal block bases for bipartite operator space.

The operator space of a bipartite system splits, under the trace inner
product, into four orthogonal blocks built from symmetric (s) and
antisymmetric (a) one-factor operators:

    ss = sym(A) x sym(B),   sa = sym(A) x anti(B),
    as = anti(A) x sym(B),  aa = anti(A) x anti(B).

The ss and aa blocks together span the symmetric matrices on the composite;
sa and as span the antisymmetric ones.  Basis ordering is fixed and
documented (see :func:`symmetric_basis` / :func:`antisymmetric_basis` and the
lexicographic factor ordering below) so coordinates are reproducible across
runs and platforms.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch
from .linalg import kron, trace_inner

BLOCK_NAMES = ("ss", "sa", "as", "aa")

_SQRT_HALF = 1.0 / np.sqrt(2.0)


def symmetric_basis(dim: int) -> list[np.ndarray]:
    """Trace-orthonormal basis of symmetric dim x dim matrices.

    Ordering: E_ii for i = 0..dim-1, then (E_ij + E_ji)/sqrt(2) for i < j in
    lexicographic (i, j) order.
    """
    out = []
    for i in range(dim):
        e = np.zeros((dim, dim))
        e[i, i] = 1.0
        out.append(e)
    for i in range(dim):
        for j in range(i + 1, dim):
            e = np.zeros((dim, dim))
            e[i, j] = e[j, i] = _SQRT_HALF
            out.append(e)
    return out


def antisymmetric_basis(dim: int) -> list[np.ndarray]:
    """Trace-orthonormal basis (E_ij - E_ji)/sqrt(2), i < j lexicographic."""
    out = []
    for i in range(dim):
        for j in range(i + 1, dim):
            e = np.zeros((dim, dim))
            e[i, j] = _SQRT_HALF
            e[j, i] = -_SQRT_HALF
            out.append(e)
    return out


def _frozen(arrays: list[np.ndarray]) -> tuple[np.ndarray, ...]:
    for a in arrays:
        a.flags.writeable = False
    return tuple(arrays)


def _stack(arrays: tuple[np.ndarray, ...], dim: int) -> np.ndarray:
    if not arrays:
        return np.zeros((0, dim * dim))
    return np.stack([a.ravel() for a in arrays])


@dataclass(frozen=True)
class BlockBasis:
    """The four orthonormal block bases of a bipartite operator space.

    Each basis element is a Kronecker product of one-factor basis elements,
    ordered lexicographically by (factor-A index, factor-B index).  The
    stacked coefficient matrices (one row per element) are precomputed for
    fast decomposition.
    """

    dim_a: int
    dim_b: int
    basis_ss: tuple[np.ndarray, ...]
    basis_sa: tuple[np.ndarray, ...]
    basis_as: tuple[np.ndarray, ...]
    basis_aa: tuple[np.ndarray, ...]
    _stacks: dict = field(repr=False, compare=False, default_factory=dict)

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_b

    @property
    def sizes(self) -> dict[str, int]:
        return {name: len(self.block(name)) for name in BLOCK_NAMES}

    def block(self, name: str) -> tuple[np.ndarray, ...]:
        if name not in BLOCK_NAMES:
            raise ValueError(f"unknown block {name!r}; expected one of {BLOCK_NAMES}")
        return getattr(self, f"basis_{name}")

    def stacked(self, name: str) -> np.ndarray:
        """(n_elements, dim^2) matrix of vectorized basis elements."""
        if name not in self._stacks:
            self._stacks[name] = _stack(self.block(name), self.dim)
        return self._stacks[name]

    def all_elements(self) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for name in BLOCK_NAMES:
            out.extend(self.block(name))
        return out


@functools.lru_cache(maxsize=None)
def build_block_basis(dim_a: int, dim_b: int) -> BlockBasis:
    """Construct (and cache) the block basis for factor dimensions (dim_a, dim_b)."""
    if dim_a < 1 or dim_b < 1:
        raise DimensionMismatch("factor dimensions must be >= 1")
    sym_a = symmetric_basis(dim_a)
    sym_b = symmetric_basis(dim_b)
    ant_a = antisymmetric_basis(dim_a)
    ant_b = antisymmetric_basis(dim_b)
    return BlockBasis(
        dim_a=dim_a,
        dim_b=dim_b,
        basis_ss=_frozen([kron(x, y) for x in sym_a for y in sym_b]),
        basis_sa=_frozen([kron(x, y) for x in sym_a for y in ant_b]),
        basis_as=_frozen([kron(x, y) for x in ant_a for y in sym_b]),
        basis_aa=_frozen([kron(x, y) for x in ant_a for y in ant_b]),
    )


@dataclass(frozen=True)
class BlockCoordinates:
    """Coefficient vectors of an operator over the four block bases."""

    coeffs_ss: np.ndarray
    coeffs_sa: np.ndarray
    coeffs_as: np.ndarray
    coeffs_aa: np.ndarray

    def coeffs(self, name: str) -> np.ndarray:
        if name not in BLOCK_NAMES:
            raise ValueError(f"unknown block {name!r}")
        return getattr(self, f"coeffs_{name}")

    def norms(self) -> dict[str, float]:
        return {name: float(np.linalg.norm(self.coeffs(name))) for name in BLOCK_NAMES}

    def total_norm_squared(self) -> float:
        return float(sum(np.dot(self.coeffs(n), self.coeffs(n)) for n in BLOCK_NAMES))


def _check_dim(w: np.ndarray, basis: BlockBasis) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (basis.dim, basis.dim):
        raise DimensionMismatch(
            f"operator shape {w.shape} does not match basis dimension "
            f"{basis.dim}x{basis.dim} for factors ({basis.dim_a}, {basis.dim_b})"
        )
    return w


def decompose(w: np.ndarray, basis: BlockBasis) -> BlockCoordinates:
    """Coefficients trace_inner(W, element) over all four blocks.

    Parseval: the squared coefficients sum to trace_inner(W, W) when W lies
    in the spanned space (all of L(H x K)).
    """
    w = _check_dim(w, basis)
    vec = w.ravel()
    return BlockCoordinates(
        coeffs_ss=basis.stacked("ss") @ vec,
        coeffs_sa=basis.stacked("sa") @ vec,
        coeffs_as=basis.stacked("as") @ vec,
        coeffs_aa=basis.stacked("aa") @ vec,
    )


def recompose(coords: BlockCoordinates, basis: BlockBasis) -> np.ndarray:
    """Linear combination of basis elements; inverse of :func:`decompose`."""
    d = basis.dim
    vec = np.zeros(d * d)
    for name in BLOCK_NAMES:
        c = np.asarray(coords.coeffs(name), dtype=float)
        stacked = basis.stacked(name)
        if c.shape != (stacked.shape[0],):
            raise DimensionMismatch(
                f"coefficient vector for block {name} has length {c.shape}, "
                f"expected {stacked.shape[0]}"
            )
        if c.size:
            vec += c @ stacked
    return vec.reshape(d, d)


def project_block(w: np.ndarray, basis: BlockBasis, block: str) -> np.ndarray:
    """Orthogonal projection of W onto the named block."""
    w = _check_dim(w, basis)
    stacked = basis.stacked(block)
    if stacked.shape[0] == 0:
        return np.zeros_like(w)
    vec = stacked.T @ (stacked @ w.ravel())
    return vec.reshape(w.shape)


def block_support_defect(w: np.ndarray, basis: BlockBasis, block: str) -> float:
    """Max-norm of the component of W outside the named block."""
    return float(np.max(np.abs(w - project_block(w, basis, block)))) if np.size(w) else 0.0


def expected_sizes(dim_a: int, dim_b: int) -> dict[str, int]:
    """Closed-form block dimensions."""
    ts_a, ta_a = dim_a * (dim_a + 1) // 2, dim_a * (dim_a - 1) // 2
    ts_b, ta_b = dim_b * (dim_b + 1) // 2, dim_b * (dim_b - 1) // 2
    return {
        "ss": ts_a * ts_b,
        "sa": ts_a * ta_b,
        "as": ta_a * ts_b,
        "aa": ta_a * ta_b,
    }


def random_ss_matrix(dim_a: int, dim_b: int, rng: np.random.Generator) -> np.ndarray:
    """Random symmetric matrix supported on the ss block (iid normal coefficients)."""
    basis = build_block_basis(dim_a, dim_b)
    c = rng.standard_normal(len(basis.basis_ss))
    d = basis.dim
    return (c @ basis.stacked("ss")).reshape(d, d)


def gram_matrix(basis: BlockBasis) -> np.ndarray:
    """Gram matrix of the concatenated basis (identity iff orthonormal)."""
    elements = basis.all_elements()
    n = len(elements)
    g = np.empty((n, n))
    for i, x in enumerate(elements):
        for j, y in enumerate(elements):
            g[i, j] = trace_inner(x, y)
    return g
