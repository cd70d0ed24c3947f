"""Cone oracles: verdicts, certificates, replay, and the inclusion chain."""

import numpy as np
import pytest

from ltshadow.blocks import random_ss_matrix
from ltshadow.cones import (
    MEMBER,
    NON_MEMBER,
    UNDECIDED,
    FeasibilityParams,
    effect_in_shadow_cone,
    in_boxtimes_cone,
    in_max_cone,
    in_min_cone,
    in_positive_ss_cone,
    product_quadratic_value,
    replay_boxtimes_member,
    replay_separating_functional,
    separable_certificate_error,
)
from ltshadow.errors import SupportViolation
from ltshadow.linalg import antisym_part, kron, max_norm, min_eigenvalue, rng_from_seed
from ltshadow.shadow import local_shadow_matrix
from ltshadow.upb import upb_state

PARAMS = FeasibilityParams(seed=101)
J = np.array([[0.0, -1.0], [1.0, 0.0]])


def epr_projector():
    z = np.array([0.0, 1.0, 1.0, 0.0]) / np.sqrt(2)
    return np.outer(z, z)


def epr_shadow():
    return local_shadow_matrix(epr_projector(), (2, 2))


def random_product_projector(dims, seed):
    rng = rng_from_seed(seed)
    u = rng.standard_normal(dims[0]); u /= np.linalg.norm(u)
    v = rng.standard_normal(dims[1]); v /= np.linalg.norm(v)
    return kron(np.outer(u, u), np.outer(v, v)), u, v


# ---------------------------------------------------------------------------
# positive-in-ss cone
# ---------------------------------------------------------------------------


def test_positive_ss_rejects_epr_shadow_with_witness():
    res = in_positive_ss_cone(epr_shadow(), (2, 2))
    assert res.verdict == NON_MEMBER
    assert res.certificate["eigenvalue"] == pytest.approx(-0.25, abs=1e-12)
    v = res.certificate["witness_vector"]
    target = np.array([1.0, 0.0, 0.0, -1.0]) / np.sqrt(2)
    assert abs(abs(v @ target) - 1.0) <= 1e-10


def test_positive_ss_accepts_product():
    m, _, _ = random_product_projector((2, 2), 31)
    res = in_positive_ss_cone(m, (2, 2))
    assert res.verdict == MEMBER
    w = res.certificate["eigenvalues"]
    v = res.certificate["eigenvectors"]
    assert max_norm((v * w) @ v.T - m) <= 1e-12


def test_positive_ss_accepts_upb_state():
    res = in_positive_ss_cone(upb_state(), (3, 3))
    assert res.verdict == MEMBER


def test_positive_ss_support_check():
    with pytest.raises(SupportViolation):
        in_positive_ss_cone(epr_projector(), (2, 2))  # aa component present


# ---------------------------------------------------------------------------
# boxtimes cone
# ---------------------------------------------------------------------------


def test_boxtimes_epr_shadow_member_certificate_replays():
    w = epr_shadow()
    res = in_boxtimes_cone(w, (2, 2), PARAMS)
    assert res.verdict == MEMBER
    k = res.certificate["kernel_offset"]
    assert replay_boxtimes_member(w, (2, 2), k)
    # the completion is the EPR projector itself: K = -T x T
    t = antisym_part(np.outer([1.0, 0.0], [0.0, 1.0]))
    np.testing.assert_allclose(k, -kron(t, t), atol=1e-9)
    np.testing.assert_allclose(w + k, epr_projector(), atol=1e-9)


def test_boxtimes_product_member_zero_offset():
    m, _, _ = random_product_projector((2, 2), 32)
    res = in_boxtimes_cone(m, (2, 2), PARAMS)
    assert res.verdict == MEMBER
    assert max_norm(res.certificate["kernel_offset"]) <= 1e-8


def test_boxtimes_negative_trace_non_member():
    res = in_boxtimes_cone(-epr_shadow(), (2, 2), PARAMS)
    assert res.verdict == NON_MEMBER
    f = res.certificate["separating_functional"]
    ok, _, pairing = replay_separating_functional(-epr_shadow(), (2, 2), f)
    assert ok and pairing < 0


def test_boxtimes_methods_agree_on_random_ss():
    """Projection verdicts match the exact 1-D search at (2, 2)."""
    n_checked = 0
    for k in range(60):
        rng = rng_from_seed(33, k)
        m = random_ss_matrix(2, 2, rng)
        if rng.random() < 0.5:
            m = m + float(np.abs(rng.standard_normal())) * 1.5 * np.eye(4)
        exact = in_boxtimes_cone(m, (2, 2), PARAMS, method="line")
        proj = in_boxtimes_cone(m, (2, 2), PARAMS, method="projection")
        if proj.verdict == UNDECIDED:
            # only allowed in the tolerance band around the boundary
            assert exact.residual <= 2 * PARAMS.tol
            continue
        assert proj.verdict == exact.verdict
        if proj.verdict == MEMBER:
            assert replay_boxtimes_member(m, (2, 2), proj.certificate["kernel_offset"])
        else:
            ok, _, _ = replay_separating_functional(
                m, (2, 2), proj.certificate["separating_functional"]
            )
            assert ok
        n_checked += 1
    assert n_checked >= 55


def test_boxtimes_projection_at_2_3():
    rng = rng_from_seed(34)
    # shadow of a random state is always a member, with the definitional offset
    from ltshadow.linalg import random_density

    w = random_density(6, rng)
    shadow = local_shadow_matrix(w, (2, 3))
    res = in_boxtimes_cone(shadow, (2, 3), PARAMS)
    assert res.verdict == MEMBER
    assert replay_boxtimes_member(shadow, (2, 3), res.certificate["kernel_offset"])
    # a squashed direction: negative-definite ss matrix cannot be completed
    res2 = in_boxtimes_cone(-shadow, (2, 3), PARAMS)
    assert res2.verdict == NON_MEMBER


def test_boxtimes_kernel_free_dims():
    m, _, _ = random_product_projector((1, 3), 35)
    res = in_boxtimes_cone(m, (1, 3), PARAMS)
    assert res.verdict == MEMBER
    assert max_norm(res.certificate["kernel_offset"]) == 0.0


# ---------------------------------------------------------------------------
# max cone
# ---------------------------------------------------------------------------


def test_max_cone_accepts_epr_shadow():
    res = in_max_cone(epr_shadow(), (2, 2), PARAMS)
    assert res.verdict == MEMBER
    assert res.certificate["heuristic"] is True
    assert res.certificate["min_quadratic"] >= -PARAMS.tol


def test_max_cone_rejects_negative_product():
    m, u, v = random_product_projector((2, 2), 36)
    res = in_max_cone(-m, (2, 2), PARAMS)
    assert res.verdict == NON_MEMBER
    x, y = res.certificate["witness_x"], res.certificate["witness_y"]
    q = product_quadratic_value(-m, (2, 2), x, y)
    assert q < -PARAMS.tol
    assert abs(abs(x @ u) - 1.0) <= 1e-6 and abs(abs(y @ v) - 1.0) <= 1e-6


def test_max_cone_heuristic_matches_grid():
    """Dense product-grid minimum vs alternating search at (2, 2)."""
    thetas = np.linspace(0.0, np.pi, 181)
    cs = np.stack([np.cos(thetas), np.sin(thetas)], axis=1)
    for k in range(5):
        rng = rng_from_seed(37, k)
        m = random_ss_matrix(2, 2, rng)
        m4 = m.reshape(2, 2, 2, 2)
        t1 = np.einsum("ijkl,ai,ak->ajl", m4, cs, cs)
        grid = np.einsum("ajl,bj,bl->ab", t1, cs, cs)
        grid_min = float(grid.min())
        res = in_max_cone(m, (2, 2), PARAMS)
        found = (res.certificate.get("min_quadratic")
                 if res.verdict == MEMBER else -res.residual)
        assert found <= grid_min + 1e-3
        assert abs(found - grid_min) <= 1e-3


# ---------------------------------------------------------------------------
# min cone
# ---------------------------------------------------------------------------


def test_min_cone_product_one_term():
    m, u, v = random_product_projector((2, 2), 38)
    res = in_min_cone(m, (2, 2), PARAMS)
    assert res.verdict == MEMBER
    cert = res.certificate
    assert len(cert["weights"]) >= 1
    err = separable_certificate_error(m, (2, 2), cert["weights"],
                                      cert["vectors_a"], cert["vectors_b"])
    assert err <= PARAMS.tol
    assert all(w >= 0 for w in cert["weights"])


def test_min_cone_two_term_mixture():
    px, py = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    m = 0.5 * (kron(px, py) + kron(py, px))
    res = in_min_cone(m, (2, 2), PARAMS)
    assert res.verdict == MEMBER
    cert = res.certificate
    err = separable_certificate_error(m, (2, 2), cert["weights"],
                                      cert["vectors_a"], cert["vectors_b"])
    assert err <= PARAMS.tol


def test_min_cone_rejects_non_psd():
    res = in_min_cone(epr_shadow(), (2, 2), PARAMS)
    assert res.verdict == NON_MEMBER
    assert res.certificate["criterion"] == "not_psd"


def test_min_cone_upb_state_range_criterion():
    res = in_min_cone(upb_state(), (3, 3), PARAMS)
    assert res.verdict == NON_MEMBER
    cert = res.certificate
    assert cert["criterion"] == "range"
    assert cert["max_product_overlap"] < 0.99


def test_min_cone_entangled_pure_state():
    res = in_min_cone(local_shadow_matrix(epr_projector(), (2, 2)), (2, 2), PARAMS)
    assert res.verdict == NON_MEMBER  # not PSD


def test_min_cone_maximally_mixed_is_separable():
    res = in_min_cone(np.eye(4) / 4, (2, 2), PARAMS)
    assert res.verdict == MEMBER


# ---------------------------------------------------------------------------
# effect cone
# ---------------------------------------------------------------------------


def test_effect_cone_unit_effect():
    assert effect_in_shadow_cone(np.eye(4), (2, 2)).verdict == MEMBER


def test_effect_cone_upb_state_is_entangled_effect():
    res = effect_in_shadow_cone(upb_state(), (3, 3))
    assert res.verdict == MEMBER


def test_effect_cone_rejects_epr_shadow():
    res = effect_in_shadow_cone(epr_shadow(), (2, 2))
    assert res.verdict == NON_MEMBER
    v = res.certificate["witness_vector"]
    assert v @ epr_shadow() @ v < 0


# ---------------------------------------------------------------------------
# chain audit
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("dims", [(2, 2), (3, 3)])
def test_inclusion_chain(dims):
    """min members are positive_ss members are boxtimes members are max members."""
    d = dims[0] * dims[1]
    for k in range(8):
        rng = rng_from_seed(39, d, k)
        # separable mixture: inside every cone
        m = np.zeros((d, d))
        for _ in range(3):
            u = rng.standard_normal(dims[0]); u /= np.linalg.norm(u)
            v = rng.standard_normal(dims[1]); v /= np.linalg.norm(v)
            m += rng.uniform(0.2, 1.0) * kron(np.outer(u, u), np.outer(v, v))
        m /= np.trace(m)
        assert in_positive_ss_cone(m, dims).verdict == MEMBER
        box = in_boxtimes_cone(m, dims, PARAMS)
        assert box.verdict == MEMBER
        assert in_max_cone(m, dims, PARAMS).verdict == MEMBER


def test_psd_members_are_boxtimes_members_with_zero_offset():
    for k in range(10):
        rng = rng_from_seed(40, k)
        m = random_ss_matrix(2, 2, rng)
        m = m + (abs(min_eigenvalue(m)) + 0.1) * np.eye(4)  # force PSD
        res = in_boxtimes_cone(m, (2, 2), PARAMS)
        assert res.verdict == MEMBER
        assert max_norm(res.certificate["kernel_offset"]) <= 1e-7


def test_boxtimes_members_pass_max_heuristic():
    for k in range(10):
        rng = rng_from_seed(41, k)
        m = random_ss_matrix(2, 2, rng) + 0.5 * np.eye(4)
        box = in_boxtimes_cone(m, (2, 2), PARAMS)
        if box.verdict == MEMBER:
            assert in_max_cone(m, (2, 2), PARAMS).verdict == MEMBER
