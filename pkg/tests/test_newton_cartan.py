import numpy as np
import pytest
from hypothesis import given

from degspin import newton_cartan as nc
from degspin.errors import (
    DegenerateComplementError,
    IllConditionedError,
    InconsistentInputsError,
    InsufficientSamplesError,
    InvalidInputError,
    NotSo103ValuedError,
)

from conftest import seeds

FLAT = nc.NCPointData.flat()


def test_flat_tensors_exact():
    gb = nc.gbar(FLAT.g, FLAT.tau)
    np.testing.assert_array_equal(gb, np.eye(4))
    hb = nc.hbar(gb)
    np.testing.assert_array_equal(hb, np.eye(4))
    np.testing.assert_array_equal(nc.hfield(FLAT.V, hb, FLAT.g, FLAT.tau), np.diag([0.0, 1, 1, 1]))
    frame = nc.adapted_frame(FLAT)
    np.testing.assert_array_equal(frame.X, np.eye(4))


@given(seeds)
def test_random_point_identities(seed):
    d = nc.random_point_data(np.random.default_rng(seed))
    assert nc.validate(d).ok
    gb = nc.gbar(d.g, d.tau)
    hb = nc.hbar(gb)
    np.testing.assert_allclose(hb @ gb, np.eye(4), atol=1e-10)
    h = nc.hfield(d.V, hb, d.g, d.tau)
    assert nc.hfield_identity_residual(h, d.g, d.V, d.tau) <= 1e-10
    # h annihilates tau and is symmetric positive semidefinite of rank 3
    np.testing.assert_allclose(h @ d.tau, 0, atol=1e-10)
    assert np.linalg.matrix_rank(h, tol=1e-8) == 3


@given(seeds)
def test_adapted_frame_against_cholesky_oracle(seed):
    d = nc.random_point_data(np.random.default_rng(seed))
    frame = nc.adapted_frame(d)
    assert max(frame.residuals(d).values()) <= 1e-10
    # Gram-Schmidt of the seeds equals U L^-T with L L^T the Gram matrix of U
    U = np.column_stack([np.eye(4)[:, mu] - d.tau[mu] * d.V for mu in frame.seed])
    L = np.linalg.cholesky(U.T @ d.g @ U)
    np.testing.assert_allclose(frame.X[:, 1:], U @ np.linalg.inv(L).T, atol=1e-10)
    np.testing.assert_allclose(frame.e @ frame.X, np.eye(4), atol=1e-10)


def test_seed_selection_prefers_large_diagonal():
    g = np.diag([0.0, 1.0, 4.0, 9.0])
    d = nc.NCPointData(g, [1.0, 0, 0, 0], [1.0, 0, 0, 0])
    assert nc.select_seed(d) == (1, 2, 3)


def test_degenerate_seed_raises():
    with pytest.raises(DegenerateComplementError):
        nc.adapted_frame(FLAT, seed=(0, 1, 2))


def test_validation_flags_each_violation():
    bad_sym = FLAT.g.copy()
    bad_sym[1, 2] = 0.1
    cases = {
        "g_symmetric": nc.NCPointData(bad_sym, FLAT.tau, FLAT.V),
        "corank_one": nc.NCPointData(np.diag([0.0, 0, 1, 1]), FLAT.tau, FLAT.V),
        "g_V_zero": nc.NCPointData(FLAT.g, FLAT.tau, [1.0, 0.1, 0, 0]),
        "clock_normalized": nc.NCPointData(FLAT.g, FLAT.tau, [2.0, 0, 0, 0]),
        "g_semidefinite": nc.NCPointData(np.diag([0.0, 1, 1, -1]), FLAT.tau, FLAT.V),
    }
    for name, data in cases.items():
        assert name in nc.validate(data).failed(), name
    assert nc.validate(FLAT).ok


def test_torsion_is_reported():
    G = np.zeros((4, 4, 4))
    G[1, 0, 2] = 1.0
    assert nc.validate(nc.NCPointData(FLAT.g, FLAT.tau, FLAT.V, G)).torsion == 1.0


def test_error_paths():
    with pytest.raises(InvalidInputError):
        nc.gbar(np.diag([0.0, 0, 1, 1]), [0.0, 1, 0, 0])
    with pytest.raises(IllConditionedError):
        nc.hbar(np.diag([1.0, 1, 1, 1e-14]))
    with pytest.raises(InvalidInputError):
        nc.hfield(np.zeros(4), np.eye(4))
    with pytest.raises(InconsistentInputsError):
        nc.hfield([1.0, 0.5, 0, 0], np.eye(4), FLAT.g, FLAT.tau)
    with pytest.raises(InvalidInputError):
        nc.NCPointData(np.eye(3), FLAT.tau, FLAT.V)


# -- polynomials and presets ---------------------------------------------------


def test_polynomial_calculus():
    p = nc.Polynomial([(3.0, (2, 1, 0, 0)), (1.0, (0, 0, 0, 0))])  # 3 t^2 x + 1
    pt = np.array([2.0, 5.0, 0, 0])
    assert p(pt) == 61.0
    assert p.diff(0)(pt) == 60.0
    assert p.diff(1)(pt) == 12.0
    assert p.diff(2).is_zero()
    assert p.integrate_time()(pt) == pytest.approx(40.0 + 2.0)


def test_flat_compatibility_exact():
    assert nc.compatibility_check(nc.FlatField()).max == 0.0


def test_newtonian_compatibility_second_order():
    field = nc.NewtonianField()
    r1 = nc.compatibility_check(field, 1e-3).max
    r2 = nc.compatibility_check(field, 5e-4).max
    assert r1 <= 1e-8
    assert 3.5 <= r1 / r2 <= 4.5


def test_static_newtonian_metric_is_incompatible():
    # g = diag(0,1,1,1) is constant, so nabla_0 g_{0x} = -Gamma^x_00 g_xx = -0.5 for Phi = 0.5 x
    field = nc.NewtonianField([(0.5, (0, 1, 0, 0))], metric="static")
    assert nc.compatibility_check(field).grad_g == pytest.approx(0.5)


def test_tidal_potential_leaves_residual_in_comoving_metric():
    field = nc.NewtonianField([(0.1, (0, 2, 0, 0))])  # d_x Phi = 0.2 x
    assert nc.compatibility_check(field).max > 1e-2


def test_newtonian_coordinate_frame_christoffels():
    field = nc.NewtonianField([(0.5, (0, 1, 0, 0)), (0.03, (0, 0, 2, 0))], metric="static")
    p = np.array([0.0, 0.0, 0.3, 0.0])
    G = nc.frame_christoffels(field, p, frame=nc.AdaptedFrame.coordinate())
    np.testing.assert_allclose(G[:, 0, 0], [0.0, 0.5, 0.018, 0.0], atol=1e-15)
    G[:, 0, 0] = 0
    assert not np.any(G)


def test_static_newtonian_connection_leaves_so103():
    field = nc.NewtonianField([(0.5, (0, 1, 0, 0))], metric="static")
    G = nc.frame_christoffels(field, np.zeros(4), frame=nc.AdaptedFrame.coordinate())
    with pytest.raises(NotSo103ValuedError):
        nc.connection_form(G)


def test_comoving_newtonian_frame_is_parallel():
    field = nc.NewtonianField()
    G = nc.frame_christoffels(field, np.array([0.5, 0.5, 0.5, 0.5]))
    assert np.max(np.abs(G)) < 1e-8
    form = nc.connection_form(G, tol=1e-6)
    assert np.max(np.abs(form.boost)) < 1e-8


# -- sampled fields --------------------------------------------------------------


def rotating(omega=0.3, shape=(3, 3, 3, 3)):
    return nc.sample_field(nc.rotating_point_data(omega), shape, [0.5] * 4, (-0.5, 0.5, 0.0, -0.5))


def test_rotating_frame_compatible_and_connection():
    field = rotating()
    assert nc.compatibility_check(field).max <= 1e-12
    G = nc.frame_christoffels(field, np.array([0.0, 1.0, 0.5, 0.0]))
    form = nc.connection_form(G)
    np.testing.assert_allclose(form.rotation[0], [-0.3, 0, 0], atol=1e-12)
    form.rotation[0] = 0
    assert np.max(np.abs(form.boost)) < 1e-12 and np.max(np.abs(form.rotation)) < 1e-12


def test_sampled_lookup_and_stencils():
    field = rotating(shape=(3, 4, 3, 3))
    p = field.node((1, 2, 1, 1))
    assert field.index_of(p) == (1, 2, 1, 1)
    with pytest.raises(InvalidInputError):
        field.index_of(p + 0.1)
    with pytest.raises(InvalidInputError):
        field.index_of(field.node((5, 0, 0, 0)))
    with pytest.raises(InsufficientSamplesError):
        field.stencil(field.node((0, 1, 1, 1)), 0)
    with pytest.raises(InvalidInputError):
        field.stencil(p, 1, 0.3)
    lo, hi, h = field.stencil(p, 1)
    assert h == 0.5
    assert len(field.interior_indices()) == 2


def test_sampled_needs_three_nodes():
    field = rotating(shape=(2, 3, 3, 3))
    with pytest.raises(InsufficientSamplesError):
        nc.compatibility_check(field)


def test_connection_form_directions():
    G = np.zeros((4, 4, 4))
    G[0, 2, 1] = 0.7  # boost along X_2 with coefficient on E_01
    G[1, 3, 2], G[2, 3, 1] = 0.4, -0.4
    form = nc.connection_form(G)
    np.testing.assert_array_equal(form.boost[2], [0.7, 0, 0])
    np.testing.assert_array_equal(form.rotation[3], [0.4, 0, 0])
    np.testing.assert_array_equal(form.matrix(2), G[:, 2, :])


@given(seeds)
def test_gbar_is_identity_in_adapted_frame(seed):
    d = nc.random_point_data(np.random.default_rng(seed))
    X = nc.adapted_frame(d).X
    np.testing.assert_allclose(X.T @ nc.gbar(d.g, d.tau) @ X, np.eye(4), atol=1e-12)


def test_hbar_of_diagonal():
    np.testing.assert_array_equal(nc.hbar(np.diag([4.0, 1, 1, 1])), np.diag([0.25, 1, 1, 1]))


def test_incompatible_christoffel_detected():
    class Twisted(nc.NCField):
        def at(self, point):
            G = np.zeros((4, 4, 4))
            G[1, 1, 1] = 1.0
            return nc.NCPointData(FLAT.g, FLAT.tau, FLAT.V, G)

    assert nc.compatibility_check(Twisted()).grad_g == 2.0


def test_adapted_frame_carries_boost():
    w = np.array([0.3, -0.2, 0.1])
    V = np.concatenate(([1.0], w))
    # g must annihilate V: g = sum_i (dx^i - w^i dt)^2
    e = np.zeros((3, 4))
    e[:, 0] = -w
    e[:, 1:] = np.eye(3)
    d = nc.NCPointData(e.T @ e, [1.0, 0, 0, 0], V)
    frame = nc.adapted_frame(d)
    np.testing.assert_array_equal(frame.X[:, 0], V)
    assert max(frame.residuals(d).values()) < 1e-12
