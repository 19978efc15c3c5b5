import math

import numpy as np
import pytest

from grid_concentrator import bounds as bnd
from grid_concentrator import graph_core as gc
from grid_concentrator.admittance import LineAdmittance, assemble_admittance
from grid_concentrator.experiment_harness import sample_rng
from grid_concentrator.spectra import intrinsic_dimension, kron, operator_norm


def _k3_model(p=0.5):
    t = gc.complete_topology(3)
    return bnd.ContingencyModel(t, np.full(3, p), np.ones(3, dtype=complex))


def _random_connected_model(rng, n_max=8):
    n = int(rng.integers(3, n_max + 1))
    t = gc.sample_random_tree(n, rng)
    extra = [(int(i), int(j)) for i in range(n) for j in range(i + 1, n)
             if (i, j) not in t.edges and rng.random() < 0.3]
    t = gc.build_topology(n, t.edges + tuple(extra))
    probs = rng.uniform(0.1, 0.9, t.n_edges)
    mags = rng.uniform(0.2, 1.0, t.n_edges)
    phases = rng.uniform(0, 2 * np.pi, t.n_edges)
    return bnd.ContingencyModel(t, probs, mags * np.exp(1j * phases))


def test_contingency_model_validation():
    t = gc.complete_topology(3)
    with pytest.raises(ValueError, match=r"\[0, 1\]"):
        bnd.ContingencyModel(t, np.array([0.5, 0.5, 1.5]), np.ones(3))
    with pytest.raises(ValueError, match="per-unit"):
        bnd.ContingencyModel(t, np.full(3, 0.5), np.full(3, 1.5 + 0j))
    with pytest.raises(ValueError, match="need 3"):
        bnd.ContingencyModel(t, np.full(2, 0.5), np.ones(2))


def test_thm1_values():
    # arithmetic evaluations of sqrt(4 d log 4n) + (2/3) log 4n
    assert bnd.thm1_expectation_bound(1, 0).value == pytest.approx(
        (2.0 / 3.0) * math.log(4.0), rel=1e-12)
    assert bnd.thm1_expectation_bound(1, 0).value == pytest.approx(0.9241962407465937)
    assert bnd.thm1_expectation_bound(9, 4).value == pytest.approx(9.961086516936788)


def test_thm1_monotone_in_n_and_delta():
    for n in (2, 5, 20):
        for d in (0, 1, 4):
            base = bnd.thm1_expectation_bound(n, d).value
            assert bnd.thm1_expectation_bound(n + 1, d).value > base
            assert bnd.thm1_expectation_bound(n, d + 1).value > base


def test_thm1_dominates_k3_monte_carlo_mean():
    # 200 samples of a |w| <= 1 law on fixed K3 connectivity
    t = gc.complete_topology(3)
    bound = bnd.thm1_expectation_bound(3, gc.max_degree(t)).value
    det_bound = bnd.deterministic_norm_bound(gc.max_degree(t))
    norms = []
    for s in range(200):
        rng = sample_rng(7, 0, s)
        r = np.sqrt(rng.random(3))
        phi = 2 * np.pi * rng.random(3)
        w = [LineAdmittance(abs(r[l] * np.cos(phi[l])), -abs(r[l] * np.sin(phi[l])))
             for l in range(3)]
        norms.append(operator_norm(assemble_admittance(t, w).matrix))
    assert np.mean(norms) <= bound
    assert max(norms) <= det_bound + 1e-12


def test_contingency_factors_single_line():
    t = gc.build_topology(2, [(0, 1)])
    prof = bnd.contingency_factors(bnd.ContingencyModel(t, np.array([0.5]),
                                                        np.array([1.0 + 0j])))
    assert prof.factors[0] == pytest.approx(0.5)
    for p in (0.0, 1.0):
        prof = bnd.contingency_factors(bnd.ContingencyModel(t, np.array([p]),
                                                            np.array([1.0 + 0j])))
        assert prof.factors[0] == 0.0
        assert prof.degenerate
        assert math.isnan(prof.total_degree)


def test_contingency_factors_k3():
    prof = bnd.contingency_factors(_k3_model())
    np.testing.assert_allclose(prof.factors, 0.5)
    np.testing.assert_allclose(prof.node_degrees, 1.0)
    assert prof.max_criticality == pytest.approx(1.0)
    assert prof.total_degree == pytest.approx(3.0)
    assert not prof.degenerate


def test_thm2_tail_k3_at_3():
    prof = bnd.contingency_factors(_k3_model())
    report = bnd.thm2_tail_bound(3.0, prof)
    assert report.value == pytest.approx(24.0 * math.exp(-9.0 / 8.0), rel=1e-12)
    assert report.value == pytest.approx(7.791659216600394)
    assert report.valid  # threshold sqrt(2) + 2/3 ~ 2.0809


def test_thm2_tail_validity_window():
    prof = bnd.contingency_factors(_k3_model())
    threshold = math.sqrt(2.0) + 2.0 / 3.0
    below = bnd.thm2_tail_bound(threshold - 1e-6, prof)
    assert not below.valid
    assert below.value > 0.0  # still computed
    assert bnd.thm2_tail_bound(threshold + 1e-6, prof).valid
    with pytest.raises(ValueError):
        bnd.thm2_tail_bound(-1.0, prof)


def test_thm2_tail_monotone_nonincreasing():
    prof = bnd.contingency_factors(_k3_model(0.3))
    values = [bnd.thm2_tail_bound(t, prof).value for t in np.linspace(0, 10, 50)]
    assert all(b <= a + 1e-15 for a, b in zip(values, values[1:]))
    assert all(v >= 0 for v in values)


def test_thm2_expectation_k3():
    prof = bnd.contingency_factors(_k3_model())
    explicit = bnd.thm2_expectation_bound(prof)
    assert explicit.value == pytest.approx(16.374652116591715)
    with_c1 = bnd.thm2_expectation_bound(prof, constant=1.0)
    assert with_c1.value == pytest.approx(5.864590000359378)
    with pytest.raises(ValueError):
        bnd.thm2_expectation_bound(prof, constant=0.0)


def test_thm2_degenerate_evaluators():
    prof = bnd.contingency_factors(_k3_model(1.0))
    assert bnd.thm2_tail_bound(0.5, prof).value == 0.0
    assert bnd.thm2_tail_bound(0.0, prof).value == 1.0
    assert bnd.thm2_expectation_bound(prof).value == 0.0
    assert "degenerate" in bnd.thm2_tail_bound(0.5, prof).notes


def test_bernstein_tail():
    assert bnd.bernstein_tail(0.0, 4, 1.0, 1.0).value == pytest.approx(8.0)
    assert bnd.bernstein_tail(1.0, 4, 1.0, 1.0).value == pytest.approx(
        8.0 * math.exp(-1.0 / 6.0), rel=1e-12)
    assert bnd.bernstein_tail(1.0, 4, 1.0, 1.0).value == pytest.approx(6.771853799124913)
    values = [bnd.bernstein_tail(t, 4, 1.0, 1.0).value for t in np.linspace(0, 8, 40)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_variance_laplacian_matches_profile():
    rng = np.random.default_rng(50)
    for _ in range(20):
        model = _random_connected_model(rng)
        v = bnd.variance_laplacian(model)
        prof = bnd.contingency_factors(model)
        np.testing.assert_allclose(np.diag(v), prof.node_degrees, atol=1e-12)
        np.testing.assert_allclose(v.sum(axis=1), 0.0, atol=1e-12)
        assert np.trace(v) == pytest.approx(prof.node_degrees.sum(), rel=1e-12)


def test_variance_monte_carlo_identity_small():
    # E[(Y-EY)(Y-EY)*] converges entrywise to A^T diag(c) A
    rng = np.random.default_rng(51)
    model = _random_connected_model(rng, n_max=5)
    t = model.topology
    basis = np.stack([np.zeros((t.n_nodes, t.n_nodes))] * t.n_edges) \
        if t.n_edges == 0 else np.stack(
        [np.outer(row, row) for row in gc.incidence_matrix(t)])
    n_samples = 20_000
    xi = (rng.random((n_samples, t.n_edges)) < model.probs).astype(float)
    coeff = (xi - model.probs) * model.admittances
    ytilde = np.einsum("sl,lij->sij", coeff, basis)
    prods = ytilde @ np.conj(ytilde)
    mean = prods.mean(axis=0)
    second = (prods * prods.conj()).real.mean(axis=0)
    stderr = np.sqrt(np.clip(second - np.abs(mean) ** 2, 0.0, None) / n_samples)
    exact = bnd.variance_laplacian(model)
    assert np.all(np.abs(mean - exact) <= 5 * stderr + 1e-12)


def test_variance_norm_sandwich_random_models():
    rng = np.random.default_rng(52)
    for _ in range(25):
        model = _random_connected_model(rng)
        prof = bnd.contingency_factors(model)
        v = bnd.variance_laplacian(model)
        norm = operator_norm(v)
        assert prof.max_criticality <= norm + 1e-10
        assert norm <= 2.0 * prof.max_criticality + 1e-10
        idim = intrinsic_dimension(v, psd=True)
        assert prof.node_degrees.sum() / (2 * prof.max_criticality) <= idim + 1e-10
        assert idim <= model.topology.n_nodes - 1 + 1e-10


def test_lcpf_variance_envelope_sphere_p3():
    t = gc.path_topology(3)
    envelope, nu = bnd.lcpf_variance_envelope(t, mode="sphere")
    assert nu == pytest.approx(2.0, abs=1e-10)
    np.testing.assert_allclose(
        envelope, (2.0 / 3.0) * kron(np.eye(2), gc.unweighted_laplacian(t)),
        atol=1e-12)


def test_lcpf_variance_envelope_bounded():
    t = gc.path_topology(3)
    envelope, nu = bnd.lcpf_variance_envelope(t, mode="bounded", delta=0.0)
    np.testing.assert_allclose(envelope, 0.0)
    assert nu == 0.0
    envelope, nu = bnd.lcpf_variance_envelope(t, mode="bounded", delta=0.5)
    np.testing.assert_allclose(envelope, kron(np.eye(2), gc.unweighted_laplacian(t)),
                               atol=1e-12)
    assert nu <= 4 * 0.25 * t.n_nodes + 1e-12
    with pytest.raises(ValueError):
        bnd.lcpf_variance_envelope(t, mode="bounded")


def test_lcpf_tail_values():
    assert bnd.lcpf_tail_bound(0.5, 4, 0.0).value == 0.0
    assert bnd.lcpf_tail_bound(0.0, 4, 0.0).value == 4.0
    t, n, d = 1.0, 4, 0.1
    expected = n * math.exp(-t * t / (4 * (d * d * n + d * t / 3)))
    assert bnd.lcpf_tail_bound(t, n, d).value == pytest.approx(expected, rel=1e-12)
    assert "prefactor" in bnd.lcpf_tail_bound(t, n, d).notes


def test_lcpf_tail_monotone_nonincreasing():
    values = [bnd.lcpf_tail_bound(t, 5, 0.2).value for t in np.linspace(0, 6, 40)]
    assert all(b <= a + 1e-15 for a, b in zip(values, values[1:]))
    assert all(v >= 0 for v in values)


def test_lcpf_expectation_values():
    assert bnd.lcpf_expectation_bound(4, 0.1).value == pytest.approx(1.2033301896039925)
    assert bnd.lcpf_expectation_bound(4, 0.0).value == 0.0


def test_bound_report_contract():
    report = bnd.thm1_expectation_bound(9, 4)
    assert report.clamped == 1.0
    payload = report.to_json()
    assert payload["kind"] == "thm1_expectation"
    assert payload["value"] == report.value
    with pytest.raises(ValueError):
        bnd.BoundReport(kind="nope", inputs={}, value=1.0)
    with pytest.raises(ValueError):
        bnd.BoundReport(kind="thm2_tail", inputs={}, value=-1.0)
    small = bnd.thm2_tail_bound(20.0, bnd.contingency_factors(_k3_model()))
    assert small.clamped == small.value < 1.0
