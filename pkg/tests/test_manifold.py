import numpy as np
import pytest

from grid_concentrator import bounds as bnd
from grid_concentrator import graph_core as gc
from grid_concentrator import manifold as mf
from grid_concentrator.admittance import LineAdmittance, assemble_admittance
from grid_concentrator.spectra import operator_norm


def _single_line_y():
    t = gc.build_topology(2, [(0, 1)])
    return assemble_admittance(t, [LineAdmittance(1.0, 0.0)])


def _random_instance(rng, n=5):
    t = gc.sample_er_topology(n, 0.6, rng)
    w = [LineAdmittance(rng.uniform(-1, 1), rng.uniform(-1, 1))
         for _ in range(t.n_edges)]
    y = assemble_admittance(t, w)
    u = rng.uniform(0.9, 1.1, n) * np.exp(1j * rng.uniform(-0.2, 0.2, n))
    h = 0.2 * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return y, u, h


def test_power_flow_map_flat_start_is_zero():
    rng = np.random.default_rng(70)
    for _ in range(10):
        t = gc.sample_er_topology(6, 0.5, rng)
        w = [LineAdmittance(rng.uniform(-1, 1), rng.uniform(-1, 1))
             for _ in range(t.n_edges)]
        y = assemble_admittance(t, w)
        s = mf.power_flow_map(y, np.ones(6, dtype=complex))
        np.testing.assert_allclose(s, 0.0, atol=1e-12)


def test_power_flow_map_single_line():
    s = mf.power_flow_map(_single_line_y(), [1.0, 0.9])
    np.testing.assert_allclose(s, [0.1, -0.09], atol=1e-14)


def test_power_flow_map_zero_voltage():
    np.testing.assert_allclose(mf.power_flow_map(_single_line_y(), [0.0, 0.0]), 0.0)


def test_power_flow_map_dimension_mismatch():
    with pytest.raises(ValueError):
        mf.power_flow_map(_single_line_y(), [1.0, 1.0, 1.0])


def test_manifold_point_satisfies_map():
    y = _single_line_y()
    point = mf.manifold_point(y, [1.0, 0.9])
    np.testing.assert_allclose(point.power, mf.power_flow_map(y, point.voltage),
                               atol=1e-14)


def test_tangent_residual_zero_step():
    y = _single_line_y()
    step = mf.tangent_step(y, np.ones(2, dtype=complex), np.zeros(2, dtype=complex))
    np.testing.assert_allclose(mf.tangent_residual(y, step), 0.0, atol=1e-15)


def test_tangent_residual_single_line():
    y = _single_line_y()
    step = mf.tangent_step(y, np.ones(2, dtype=complex), [0.1, 0.0])
    residual = mf.tangent_residual(y, step)
    np.testing.assert_allclose(residual, [0.01, 0.0], atol=1e-14)
    assert np.linalg.norm(residual) == pytest.approx(0.01, abs=1e-14)


def test_tangent_residual_quadratic_scaling():
    y = _single_line_y()
    base = mf.tangent_step(y, np.ones(2, dtype=complex), [0.1, -0.05 + 0.02j])
    r1 = mf.tangent_residual(y, base)
    for alpha in (2.0, 0.5):
        scaled = mf.tangent_step(y, np.ones(2, dtype=complex),
                                 alpha * np.asarray(base.step))
        r2 = mf.tangent_residual(y, scaled)
        np.testing.assert_allclose(r2, alpha ** 2 * r1, rtol=1e-10)


def test_tangent_residual_matches_taylor_subtraction():
    rng = np.random.default_rng(71)
    for _ in range(100):
        y, u, h = _random_instance(rng)
        step = mf.tangent_step(y, u, h)
        closed = mf.tangent_residual(y, step)  # cross-checks internally to 1e-12
        direct = (mf.power_flow_map(y, u + h) - step.base.power
                  - mf.power_flow_derivative(y, u, h))
        np.testing.assert_allclose(closed, direct, atol=1e-12)


def test_residual_norm_chain():
    rng = np.random.default_rng(72)
    for _ in range(50):
        y, u, h = _random_instance(rng)
        step = mf.tangent_step(y, u, h)
        res = np.linalg.norm(mf.tangent_residual(y, step))
        y_norm = operator_norm(y.matrix)
        hinf = np.max(np.abs(h))
        h2 = np.linalg.norm(h)
        assert res <= hinf * y_norm * h2 + 1e-10


def test_derivative_matches_finite_differences():
    # central finite differences as an independent oracle for the derivative
    rng = np.random.default_rng(73)
    y, u, h = _random_instance(rng, n=4)
    eps = 1e-6
    numeric = (mf.power_flow_map(y, u + eps * h) - mf.power_flow_map(y, u - eps * h)) \
        / (2 * eps)
    np.testing.assert_allclose(mf.power_flow_derivative(y, u, h), numeric,
                               atol=1e-7)


def test_projection_distance_equals_residual_norm():
    rng = np.random.default_rng(74)
    y, u, h = _random_instance(rng)
    step = mf.tangent_step(y, u, h)
    assert mf.projection_distance(y, step) == pytest.approx(
        float(np.linalg.norm(mf.tangent_residual(y, step))), rel=1e-12)
    # the certificate 3||F|| dominates the same-voltage projection proxy
    assert 3.0 * np.linalg.norm(mf.tangent_residual(y, step)) >= \
        mf.projection_distance(y, step)


def test_distance_bound_modes():
    h = np.array([0.1, 0.0], dtype=complex)
    assert mf.distance_bound(h, 2.0, "holder") == pytest.approx(0.06, abs=1e-14)
    assert mf.distance_bound(h, 2.0, "crude") == pytest.approx(0.06, abs=1e-14)
    assert mf.distance_bound(np.zeros(3), 5.0) == 0.0
    # residual certificate from the worked single-line example
    y = _single_line_y()
    step = mf.tangent_step(y, np.ones(2, dtype=complex), h)
    assert 3.0 * np.linalg.norm(mf.tangent_residual(y, step)) == pytest.approx(0.03)
    assert mf.distance_bound(h, operator_norm(y.matrix)) >= 0.03


def test_distance_bound_holder_never_exceeds_crude():
    rng = np.random.default_rng(75)
    for _ in range(50):
        h = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        y_norm = rng.uniform(0, 5)
        assert mf.distance_bound(h, y_norm, "holder") <= \
            mf.distance_bound(h, y_norm, "crude") + 1e-12
    with pytest.raises(ValueError):
        mf.distance_bound(np.ones(2), 1.0, mode="nope")
    with pytest.raises(ValueError):
        mf.distance_bound(np.ones(2), -1.0)


def test_expected_distance_bound_composition():
    h = np.array([0.1, 0.0], dtype=complex)
    source = bnd.thm1_expectation_bound(9, 4)
    report = mf.expected_distance_bound(h, source)
    assert report.kind == "manifold_distance"
    assert report.value == pytest.approx(3 * 0.1 * 0.1 * source.value, rel=1e-12)
    assert report.value == pytest.approx(0.29883259550810365)
    zero = mf.expected_distance_bound(np.zeros(4), source)
    assert zero.value == 0.0


def test_expected_distance_bound_accepts_thm2_source():
    t = gc.complete_topology(3)
    model = bnd.ContingencyModel(t, np.full(3, 0.5), np.ones(3, dtype=complex))
    source = bnd.thm2_expectation_bound(bnd.contingency_factors(model))
    report = mf.expected_distance_bound(np.array([0.1, 0.0, 0.0]), source)
    assert report.value == pytest.approx(0.03 * source.value)


def test_expected_distance_bound_rejects_tail_source():
    tail = bnd.bernstein_tail(1.0, 4, 1.0, 1.0)
    with pytest.raises(ValueError, match="incompatible"):
        mf.expected_distance_bound(np.ones(2), tail)


def test_lossless_specialization_dominated_on_dense_networks():
    # Lossless Bernoulli switching (G = 0, Y = jB) on complete graphs: the
    # general expected-distance bound stays above the contingency-based
    # specialization (C = 1 form). This density regime matters: sparse
    # high-D_bar topologies can invert the comparison.
    h = np.array([0.1, 0.0, 0.0], dtype=complex)
    for n in range(3, 13):
        t = gc.complete_topology(n)
        model = bnd.ContingencyModel(t, np.full(t.n_edges, 0.5),
                                     -1j * np.ones(t.n_edges))
        hn = np.zeros(n, dtype=complex)
        hn[0] = 0.1
        general = mf.expected_distance_bound(
            hn, bnd.thm1_expectation_bound(n, gc.max_degree(t)))
        lossless = mf.expected_distance_bound(
            hn, bnd.thm2_expectation_bound(bnd.contingency_factors(model),
                                           constant=1.0))
        assert general.value >= lossless.value


def test_expected_distance_dominates_monte_carlo_proxy():
    # 200 disk-law samples on fixed K3 connectivity
    from grid_concentrator.experiment_harness import sample_rng

    t = gc.complete_topology(3)
    h = np.array([0.1, 0.0, 0.0], dtype=complex)
    source = bnd.thm1_expectation_bound(3, gc.max_degree(t))
    analytic = mf.expected_distance_bound(h, source)
    certs = []
    for s in range(200):
        rng = sample_rng(11, 0, s)
        r = np.sqrt(rng.random(3))
        phi = 2 * np.pi * rng.random(3)
        w = [LineAdmittance(abs(r[l] * np.cos(phi[l])), -abs(r[l] * np.sin(phi[l])))
             for l in range(3)]
        y = assemble_admittance(t, w)
        certs.append(3 * np.max(np.abs(h)) * np.linalg.norm(h)
                     * operator_norm(y.matrix))
    assert np.mean(certs) <= analytic.value
