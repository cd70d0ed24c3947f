"""Shadow projection: closed form, defining-system oracle, kernel, fibers."""

import numpy as np
import pytest

from ltshadow.blocks import build_block_basis, decompose
from ltshadow.errors import DimensionMismatch, SupportViolation
from ltshadow.linalg import kron, max_norm, random_density, rng_from_seed, sym_part
from ltshadow.shadow import (
    ShadowState,
    fiber_basis,
    local_shadow_matrix,
    locally_indistinguishable,
    lt_multipartite,
    lt_state,
    lt_state_oracle,
    partial_transpose,
)

J = np.array([[0.0, -1.0], [1.0, 0.0]])


def epr_projector():
    z = np.array([0.0, 1.0, 1.0, 0.0]) / np.sqrt(2)
    return np.outer(z, z)


def epr_shadow_closed_form():
    s = sym_part(np.outer([1.0, 0.0], [0.0, 1.0]))
    px, py = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    return 0.5 * (kron(px, py) + kron(py, px)) + kron(s, s)


def test_partial_transpose_roundtrip():
    rng = rng_from_seed(20)
    m = rng.standard_normal((6, 6))
    for k in (0, 1):
        again = partial_transpose(partial_transpose(m, (2, 3), k), (2, 3), k)
        np.testing.assert_array_equal(again, m)
    both = partial_transpose(partial_transpose(m, (2, 3), 0), (2, 3), 1)
    np.testing.assert_array_equal(both, m.T)


def test_lt_state_epr():
    state = lt_state(epr_projector(), (2, 2))
    np.testing.assert_allclose(state.op, epr_shadow_closed_form(), atol=1e-14)


def test_lt_state_fixes_product_states():
    rng = rng_from_seed(21)
    u = rng.standard_normal(2); u /= np.linalg.norm(u)
    v = rng.standard_normal(3); v /= np.linalg.norm(v)
    m = kron(np.outer(u, u), np.outer(v, v))
    np.testing.assert_allclose(lt_state(m, (2, 3)).op, m, atol=1e-14)


def test_lt_state_kernel_invariance():
    """Adding any kernel element leaves the shadow unchanged."""
    rng = rng_from_seed(22)
    w = random_density(4, rng)
    k = kron(J, J) / 2
    t = 0.4 * float(np.linalg.eigvalsh(w)[0])
    shifted = w + t * k
    assert np.linalg.eigvalsh(shifted)[0] >= -1e-12  # still a state
    assert max_norm(lt_state(shifted, (2, 2)).op - lt_state(w, (2, 2)).op) <= 1e-14


def test_lt_state_idempotent_and_trace_preserving():
    rng = rng_from_seed(23)
    for dims in ((2, 2), (2, 3), (3, 3)):
        w = random_density(dims[0] * dims[1], rng)
        s = lt_state(w, dims)
        again = lt_state(s.op, dims)
        assert max_norm(again.op - s.op) <= 1e-10
        assert abs(s.trace - np.trace(w)) <= 1e-12


def test_lt_state_requires_bipartite():
    with pytest.raises(DimensionMismatch):
        lt_state(np.eye(8), (2, 2, 2))
    with pytest.raises(DimensionMismatch):
        lt_state(np.eye(4), (2, 3))


def test_shadow_state_rejects_off_support():
    with pytest.raises(SupportViolation):
        ShadowState(op=epr_projector(), dims=(2, 2))  # has an aa component


@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 3)])
def test_oracle_agrees_on_random_densities(dims):
    d = dims[0] * dims[1]
    for k in range(30):
        rng = rng_from_seed(24, d, k)
        w = random_density(d, rng)
        direct = lt_state(w, dims).op
        oracle = lt_state_oracle(w, dims).op
        assert max_norm(direct - oracle) <= 1e-9


def test_oracle_epr_and_maximally_mixed():
    np.testing.assert_allclose(
        lt_state_oracle(epr_projector(), (2, 2)).op, epr_shadow_closed_form(), atol=1e-12
    )
    eye = np.eye(6) / 6
    np.testing.assert_allclose(lt_state_oracle(eye, (2, 3)).op, eye, atol=1e-14)


def test_multipartite_single_factor_is_identity():
    rng = rng_from_seed(25)
    w = random_density(3, rng)
    np.testing.assert_array_equal(lt_multipartite(w, (3,)).op, w)


def test_multipartite_product_unchanged():
    rng = rng_from_seed(26)
    ps = [np.outer(v, v) / (v @ v) for v in rng.standard_normal((3, 2))]
    m = kron(kron(ps[0], ps[1]), ps[2])
    np.testing.assert_allclose(lt_multipartite(m, (2, 2, 2)).op, m, atol=1e-14)


def test_multipartite_matches_oracle_three_factors():
    for k in range(5):
        rng = rng_from_seed(27, k)
        w = random_density(8, rng)
        direct = lt_multipartite(w, (2, 2, 2)).op
        oracle = lt_state_oracle(w, (2, 2, 2)).op
        assert max_norm(direct - oracle) <= 1e-9


def test_locally_indistinguishable():
    rng = rng_from_seed(28)
    w = random_density(4, rng)
    assert locally_indistinguishable(w, w, (2, 2))
    k = kron(J, J) / 2
    t = 0.3 * float(np.linalg.eigvalsh(w)[0])
    assert locally_indistinguishable(w, w + t * k, (2, 2))
    px, py = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    assert not locally_indistinguishable(kron(px, py), kron(py, px), (2, 2))


def test_fiber_basis_dimensions():
    (el,) = fiber_basis((2, 2))
    target = kron(J, J) / 2
    assert min(max_norm(el - target), max_norm(el + target)) <= 1e-15
    assert len(fiber_basis((2, 3))) == 3
    assert fiber_basis((1, 5)) == []


def test_fiber_basis_spans_kernel():
    basis = build_block_basis(2, 3)
    for k in fiber_basis((2, 3)):
        assert max_norm(local_shadow_matrix(k, (2, 3))) <= 1e-15
        coords = decompose(k, basis)
        assert np.linalg.norm(coords.coeffs_aa) == pytest.approx(1.0, abs=1e-12)


def test_shadow_carries_definitional_certificate():
    w = random_density(4, rng_from_seed(29))
    s = lt_state(w, (2, 2))
    k = s.certified["boxtimes"]
    np.testing.assert_allclose(s.op + k, w, atol=1e-14)


def test_state_shadows_are_definitionally_boxtimes_members():
    """The kernel component of the state itself replays as a certificate."""
    from ltshadow.cones import replay_boxtimes_member
    from ltshadow.shadow import aa_projection

    for dims in ((2, 2), (2, 3), (3, 3)):
        d = dims[0] * dims[1]
        for k in range(5):
            w = random_density(d, rng_from_seed(30, d, k))
            shadow = lt_state(w, dims).op
            assert replay_boxtimes_member(shadow, dims, aa_projection(w, dims))
