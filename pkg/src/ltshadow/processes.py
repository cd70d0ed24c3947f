"""Linear processes on operator space and their shadows.

A process is stored as a real matrix over the grading coordinates of its
input and output operator spaces.  The grading basis of a factor list
(d_1, ..., d_n) concatenates, in binary pattern order (s < a per factor),
the Kronecker products of one-factor symmetric/antisymmetric basis elements;
for two factors this is the familiar ss, sa, as, aa ordering and the
coordinates are orthonormal, so matrix transpose is the trace-inner-product
adjoint.

A positive map preserves the symmetric and antisymmetric subspaces of the
global space, so restricted to symmetric operators it has a 2 x 2 operator
matrix over (shadow block) + (kernel blocks).  The map descends to shadow
space iff the kernel-to-shadow block vanishes; the induced shadow map is
then the shadow-to-shadow block.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .blocks import (
    antisymmetric_basis,
    build_block_basis,
    project_block,
    random_ss_matrix,
    symmetric_basis,
)
from .cones import FeasibilityParams
from .errors import DimensionMismatch, NotLocallyPositive
from .linalg import (
    kron,
    max_norm,
    min_eigenvalue,
    random_orthogonal,
    random_symmetric,
    rng_from_seed,
    sym_part,
)
from .shadow import local_shadow_matrix

_STREAM_POSITIVITY = 11
_STREAM_CENSUS = 12
_STREAM_GENERATOR = 13


def grading_patterns(n_factors: int) -> tuple[str, ...]:
    """Pattern strings over {s, a} in binary order, e.g. (ss, sa, as, aa)."""
    return tuple(
        "".join(bits) for bits in itertools.product("sa", repeat=n_factors)
    )


@dataclass(frozen=True)
class GradingBasis:
    dims: tuple[int, ...]
    patterns: tuple[str, ...]
    slices: dict
    stacked: np.ndarray  # (n_elements, D^2) vectorized orthonormal basis

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    @property
    def size(self) -> int:
        return self.stacked.shape[0]

    def pattern_slice(self, pattern: str) -> slice:
        return self.slices[pattern]

    @property
    def shadow_pattern(self) -> str:
        return "s" * len(self.dims)

    @property
    def kernel_patterns(self) -> tuple[str, ...]:
        """Even-antisymmetric patterns other than all-s: the shadow kernel."""
        return tuple(
            p for p in self.patterns
            if p.count("a") >= 2 and p.count("a") % 2 == 0
        )

    @property
    def odd_patterns(self) -> tuple[str, ...]:
        """Patterns spanning the antisymmetric part of the global space."""
        return tuple(p for p in self.patterns if p.count("a") % 2 == 1)

    def indices(self, patterns) -> np.ndarray:
        idx: list[int] = []
        for p in patterns:
            s = self.slices[p]
            idx.extend(range(s.start, s.stop))
        return np.asarray(idx, dtype=int)


@functools.lru_cache(maxsize=None)
def grading_basis(dims: tuple[int, ...]) -> GradingBasis:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise DimensionMismatch(f"factor dimensions must be >= 1, got {dims}")
    patterns = grading_patterns(len(dims))
    elements: list[np.ndarray] = []
    slices: dict[str, slice] = {}
    for pattern in patterns:
        start = len(elements)
        factor_bases = [
            symmetric_basis(d) if c == "s" else antisymmetric_basis(d)
            for d, c in zip(dims, pattern)
        ]
        for combo in itertools.product(*factor_bases):
            acc = combo[0]
            for f in combo[1:]:
                acc = kron(acc, f)
            elements.append(acc)
        slices[pattern] = slice(start, len(elements))
    d = math.prod(dims)
    stacked = (
        np.stack([e.ravel() for e in elements]) if elements else np.zeros((0, d * d))
    )
    stacked.flags.writeable = False
    return GradingBasis(dims=dims, patterns=patterns, slices=slices, stacked=stacked)


def to_coords(x: np.ndarray, dims) -> np.ndarray:
    g = grading_basis(tuple(int(d) for d in dims))
    x = np.asarray(x, dtype=float)
    if x.shape != (g.dim, g.dim):
        raise DimensionMismatch(f"operator shape {x.shape} does not match dims {g.dims}")
    return g.stacked @ x.ravel()


def from_coords(c: np.ndarray, dims) -> np.ndarray:
    g = grading_basis(tuple(int(d) for d in dims))
    c = np.asarray(c, dtype=float)
    if c.shape != (g.size,):
        raise DimensionMismatch(f"coordinate length {c.shape} does not match dims {g.dims}")
    return (c @ g.stacked).reshape(g.dim, g.dim)


@dataclass(frozen=True)
class LinearProcess:
    """A linear map between operator spaces, in grading coordinates."""

    in_dims: tuple[int, ...]
    out_dims: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        in_dims = tuple(int(d) for d in self.in_dims)
        out_dims = tuple(int(d) for d in self.out_dims)
        n_in = grading_basis(in_dims).size
        n_out = grading_basis(out_dims).size
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (n_out, n_in):
            raise DimensionMismatch(
                f"process matrix shape {m.shape} does not match coordinate sizes "
                f"({n_out}, {n_in}) for dims {out_dims} <- {in_dims}"
            )
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "in_dims", in_dims)
        object.__setattr__(self, "out_dims", out_dims)
        object.__setattr__(self, "matrix", m)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return from_coords(self.matrix @ to_coords(x, self.in_dims), self.out_dims)

    def apply_adjoint(self, y: np.ndarray) -> np.ndarray:
        return from_coords(self.matrix.T @ to_coords(y, self.out_dims), self.in_dims)

    def compose(self, inner: "LinearProcess") -> "LinearProcess":
        """self after inner."""
        if inner.out_dims != self.in_dims:
            raise DimensionMismatch(
                f"cannot compose: inner output dims {inner.out_dims} != "
                f"outer input dims {self.in_dims}"
            )
        return LinearProcess(inner.in_dims, self.out_dims, self.matrix @ inner.matrix)

    def norm(self) -> float:
        return max_norm(self.matrix)


def process_from_function(fn, in_dims, out_dims) -> LinearProcess:
    """Materialize a matrix from the action of fn on every input basis element."""
    gin = grading_basis(tuple(int(d) for d in in_dims))
    gout = grading_basis(tuple(int(d) for d in out_dims))
    cols = np.empty((gout.size, gin.size))
    din = gin.dim
    for k in range(gin.size):
        e = gin.stacked[k].reshape(din, din)
        cols[:, k] = to_coords(fn(e), gout.dims)
    return LinearProcess(gin.dims, gout.dims, cols)


def identity_process(dims) -> LinearProcess:
    g = grading_basis(tuple(int(d) for d in dims))
    return LinearProcess(g.dims, g.dims, np.eye(g.size))


def conjugation_process(q: np.ndarray, in_dims, out_dims=None) -> LinearProcess:
    """X -> Q X Q^T.  Positive for any real Q; preserves the grading iff Q is local."""
    q = np.asarray(q, dtype=float)
    out_dims = tuple(out_dims) if out_dims is not None else tuple(in_dims)
    return process_from_function(lambda x: q @ x @ q.T, in_dims, out_dims)


def swap_process(dims) -> LinearProcess:
    """Conjugation by the tensor-swap permutation; output factors reversed."""
    da, db = (int(d) for d in dims)
    sigma = np.zeros((da * db, da * db))
    for i in range(da):
        for j in range(db):
            sigma[j * da + i, i * db + j] = 1.0
    return conjugation_process(sigma, (da, db), (db, da))


def preparation_process(state: np.ndarray, dims) -> LinearProcess:
    """The map t -> t * state from the trivial system; always locally positive."""
    dims = tuple(int(d) for d in dims)
    col = to_coords(state, dims)
    return LinearProcess((1,), dims, col.reshape(-1, 1))


def effect_functional(f: np.ndarray, dims) -> LinearProcess:
    """The functional X -> trace_inner(f, X) as a process to the trivial system."""
    dims = tuple(int(d) for d in dims)
    row = to_coords(f, dims)
    return LinearProcess(dims, (1,), row.reshape(1, -1))


def epsilon_functional(dims=(2, 2)) -> LinearProcess:
    """The pairing functional defined on pure tensors by a o b -> Tr(a b^T).

    Its kernel matrix is sum_ij E_ij o E_ij; on the product of the two
    antisymmetric generators of a pair of qubits it evaluates to 2, so it
    does not vanish on the shadow kernel and is not locally positive.
    """
    da, db = (int(d) for d in dims)
    if da != db:
        raise DimensionMismatch("the pairing functional needs equal factor dimensions")
    f = np.zeros((da * db, da * db))
    for i in range(da):
        for j in range(da):
            e = np.zeros((da, da))
            e[i, j] = 1.0
            f += np.kron(e, e)
    return effect_functional(f, (da, db))


def trace_unit_process(dims) -> LinearProcess:
    """X -> Tr(X) I / D: the depolarizing sink used to boost maps to positivity."""
    dims = tuple(int(d) for d in dims)
    d = math.prod(dims)
    eye = np.eye(d)
    c = to_coords(eye, dims)
    return LinearProcess(dims, dims, np.outer(c / d, c))


# ---------------------------------------------------------------------------
# Operator block matrix and local positivity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProcessBlockMatrix:
    """Blocks of a symmetric-subspace-preserving map.

    phi_ss: shadow -> shadow,  phi_sa: kernel -> shadow,
    phi_as: shadow -> kernel,  phi_aa: kernel -> kernel.
    """

    phi_ss: np.ndarray
    phi_sa: np.ndarray
    phi_as: np.ndarray
    phi_aa: np.ndarray


def block_matrix(proc: LinearProcess, grading_tol: float = 1e-10) -> ProcessBlockMatrix:
    """Extract the operator blocks of the restriction to symmetric operators.

    Raises ValueError when the map does not preserve the symmetric subspace
    (checked on the shadow + kernel basis columns).
    """
    gin = grading_basis(proc.in_dims)
    gout = grading_basis(proc.out_dims)
    in_shadow = gin.indices([gin.shadow_pattern])
    in_kernel = gin.indices(gin.kernel_patterns)
    out_shadow = gout.indices([gout.shadow_pattern])
    out_kernel = gout.indices(gout.kernel_patterns)
    out_odd = gout.indices(gout.odd_patterns)

    scale = 1 + max_norm(proc.matrix)
    sym_cols = np.concatenate([in_shadow, in_kernel])
    if out_odd.size and sym_cols.size:
        leak = max_norm(proc.matrix[np.ix_(out_odd, sym_cols)])
        if leak > grading_tol * scale:
            raise ValueError(
                "process does not preserve the symmetric subspace "
                f"(antisymmetric leakage {leak:.3e})"
            )

    m = proc.matrix
    return ProcessBlockMatrix(
        phi_ss=m[np.ix_(out_shadow, in_shadow)],
        phi_sa=m[np.ix_(out_shadow, in_kernel)],
        phi_as=m[np.ix_(out_kernel, in_shadow)],
        phi_aa=m[np.ix_(out_kernel, in_kernel)],
    )


@dataclass(frozen=True)
class LocalPositivityCheck:
    locally_positive: bool
    defect: float
    tol: float
    witness_kernel_element: np.ndarray | None = None
    witness_shadow_image: np.ndarray | None = None

    def __bool__(self) -> bool:  # convenience: if is_locally_positive(
        return self.locally_positive


def is_locally_positive(proc: LinearProcess, tol: float | None = None) -> LocalPositivityCheck:
    """A map descends to shadow spaces iff its kernel-to-shadow block vanishes.

    On failure the returned witness is a kernel element K (locally invisible
    input direction) whose image has a nonzero shadow, i.e. a pair of
    locally indistinguishable inputs with locally distinguishable outputs.
    """
    blocks = block_matrix(proc)
    if tol is None:
        tol = 1e-9 * (1 + max_norm(proc.matrix))
    defect = max_norm(blocks.phi_sa)
    if defect <= tol:
        return LocalPositivityCheck(True, defect, tol)
    gin = grading_basis(proc.in_dims)
    kernel_idx = gin.indices(gin.kernel_patterns)
    col = int(np.argmax(np.max(np.abs(blocks.phi_sa), axis=0)))
    din = gin.dim
    witness = gin.stacked[kernel_idx[col]].reshape(din, din)
    image = local_shadow_matrix(proc.apply(witness), proc.out_dims)
    return LocalPositivityCheck(False, defect, tol, witness, image)


def shadow_block_process(proc: LinearProcess) -> LinearProcess:
    """The shadow-to-shadow block embedded back into grading coordinates.

    This is the unique candidate for a shadow of the map; it genuinely is
    one only when the map is locally positive (see :func:`shadow_of_map`).
    """
    blocks = block_matrix(proc)
    gin = grading_basis(proc.in_dims)
    gout = grading_basis(proc.out_dims)
    m = np.zeros((gout.size, gin.size))
    m[np.ix_(gout.indices([gout.shadow_pattern]), gin.indices([gin.shadow_pattern]))] = blocks.phi_ss
    return LinearProcess(proc.in_dims, proc.out_dims, m)


def shadow_of_map(proc: LinearProcess) -> LinearProcess:
    """Shadow of a locally positive map: the induced map on shadow states.

    Refuses non-locally-positive input, for which no shadow exists (the
    commuting square has no solution).
    """
    check = is_locally_positive(proc)
    if not check.locally_positive:
        raise NotLocallyPositive(
            f"map has kernel-to-shadow defect {check.defect:.3e} (tol {check.tol:.3e}); "
            "its action is not determined by local data"
        )
    return shadow_block_process(proc)


# ---------------------------------------------------------------------------
# Positivity of maps (heuristic) and effect census
# ---------------------------------------------------------------------------

POSITIVE = "positive"
NOT_POSITIVE = "not_positive"
UNDECIDED = "undecided"


@dataclass(frozen=True)
class PositiveMapVerdict:
    verdict: str
    value: float
    witness: np.ndarray | None = None
    heuristic: bool = True


def is_positive_map_heuristic(proc: LinearProcess,
                              params: FeasibilityParams) -> PositiveMapVerdict:
    """Search for a unit vector x with Phi(x x^T) not positive.

    Minimizes v^T Phi(x x^T) v by alternating exact eigenvector updates in x
    and v, with multi-restart.  A value below -tol is a certified
    non-positivity witness; within the band [-tol, -tol/2] the verdict is
    undecided; otherwise positive (heuristic: no witness found).
    """
    din = grading_basis(proc.in_dims).dim
    tol = params.tol

    def one_restart(k: int):
        rng = rng_from_seed(params.seed, _STREAM_POSITIVITY, k)
        x = rng.standard_normal(din)
        x /= np.linalg.norm(x)
        prev = None
        for _ in range(80):
            y = sym_part(proc.apply(np.outer(x, x)))
            w, u = np.linalg.eigh(y)
            v = u[:, 0]
            g = sym_part(proc.apply_adjoint(np.outer(v, v)))
            wx, ux = np.linalg.eigh(g)
            x = ux[:, 0]
            val = float(wx[0])
            if prev is not None and abs(val - prev) <= 1e-14 * (1 + abs(val)):
                break
            prev = val
        return float(min_eigenvalue(proc.apply(np.outer(x, x)))), x

    results = [one_restart(k) for k in range(params.restarts)]
    best_k = min(range(len(results)), key=lambda k: (results[k][0], k))
    best_val, best_x = results[best_k]
    if best_val < -tol:
        return PositiveMapVerdict(NOT_POSITIVE, best_val, best_x, heuristic=False)
    if best_val < -tol / 2:
        return PositiveMapVerdict(UNDECIDED, best_val, best_x)
    return PositiveMapVerdict(POSITIVE, best_val)


def effect_local_positivity_census(dims, n_samples: int, seed: int,
                                   shadow_only: bool = False) -> float:
    """Fraction of random effects (PSD, <= identity) that are locally positive.

    Random spectra are continuous, so effects with an exactly vanishing
    kernel component form a measure-zero set: the fraction is 0.0 unless
    sampling is restricted to shadow-supported effects, where it is 1.0 by
    construction.
    """
    dims = tuple(int(d) for d in dims)
    da, db = dims
    d = da * db
    basis = build_block_basis(da, db)
    rng = rng_from_seed(seed, _STREAM_CENSUS)
    hits = 0
    for _ in range(n_samples):
        m = random_ss_matrix(da, db, rng) if shadow_only else random_symmetric(d, rng)
        w = np.linalg.eigvalsh(m)
        span = float(w[-1] - w[0])
        if span < 1e-12:
            f = np.eye(d) / 2
        else:
            f = (m - w[0] * np.eye(d)) / span
        if effect_is_locally_positive(f, basis):
            hits += 1
    return hits / n_samples


def effect_is_locally_positive(f: np.ndarray, basis) -> bool:
    defect = max_norm(project_block(np.asarray(f, dtype=float), basis, "aa"))
    return defect <= 1e-12 * (1 + max_norm(f))


# ---------------------------------------------------------------------------
# Seeded generators of test processes
# ---------------------------------------------------------------------------


def random_locally_positive_process(dims, seed: int, params=None) -> LinearProcess:
    """Random positive map with vanishing kernel-to-shadow block.

    Draws random shadow->shadow, kernel->kernel, and shadow->kernel blocks,
    zeroes the kernel->shadow block, then mixes in just enough of the
    depolarizing sink for the positivity heuristic to pass.  A generator,
    not a characterization of the locally positive maps.
    """
    dims = tuple(int(d) for d in dims)
    g = grading_basis(dims)
    rng = rng_from_seed(seed, _STREAM_GENERATOR)
    shadow = g.indices([g.shadow_pattern])
    kernel = g.indices(g.kernel_patterns)
    m = np.zeros((g.size, g.size))
    m[np.ix_(shadow, shadow)] = rng.standard_normal((shadow.size, shadow.size))
    if kernel.size:
        m[np.ix_(kernel, kernel)] = rng.standard_normal((kernel.size, kernel.size))
        m[np.ix_(kernel, shadow)] = rng.standard_normal((kernel.size, shadow.size))
    base = LinearProcess(dims, dims, m)
    sink = trace_unit_process(dims)
    if params is None:
        params = FeasibilityParams(seed=seed, tol=1e-9, restarts=8)
    lam = float(np.linalg.norm(m, 2))
    for _ in range(40):
        candidate = LinearProcess(dims, dims, base.matrix + lam * sink.matrix)
        if is_positive_map_heuristic(candidate, params).verdict == POSITIVE:
            return candidate
        lam *= 2.0
    raise RuntimeError("failed to boost generated map to positivity")  # pragma: no cover


def random_kernel_leaking_process(dims, seed: int, min_defect: float = 1e-4) -> LinearProcess:
    """Random positive map whose kernel-to-shadow block does not vanish.

    Conjugation by a Haar-random (non-local) orthogonal: positive — even
    completely positive — but generically mixes the grading.
    """
    dims = tuple(int(d) for d in dims)
    d = math.prod(dims)
    for attempt in range(32):
        rng = rng_from_seed(seed, _STREAM_GENERATOR, attempt)
        q = random_orthogonal(d, rng)
        proc = conjugation_process(q, dims)
        if not is_locally_positive(proc) and block_matrix(proc).phi_sa.size:
            if max_norm(block_matrix(proc).phi_sa) >= min_defect:
                return proc
    raise RuntimeError("could not generate a kernel-leaking orthogonal conjugation")
