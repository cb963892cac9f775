import json

import numpy as np
import pytest

import spectralgauss.martingales as mg
import spectralgauss.processes as pr
import spectralgauss.series as se
import spectralgauss.verify as vf


def test_nystrom_recovers_classical_eigenvalues():
    want_bm = 1.0 / ((np.arange(3) + 0.5) * np.pi) ** 2
    want_br = 1.0 / (np.arange(1, 4) * np.pi) ** 2
    rel = {}
    for n in (600, 1200):
        rep = vf.nystrom_eig(se.kl_kernel(se.BM(), 1.0), 1.0, n, 3, kernel_tag="bm")
        rel[n] = np.max(np.abs(rep.eigenvalues - want_bm) / want_bm)
        repb = vf.nystrom_eig(se.kl_kernel(se.BMBridge(), 1.0), 1.0, n, 3)
        assert np.max(np.abs(repb.eigenvalues - want_br) / want_br) < 5e-5
    assert rel[600] < 5e-5
    # midpoint-rule eigenvalue error is O(1/n^2)
    assert rel[600] / rel[1200] == pytest.approx(4.0, rel=0.3)


def test_nystrom_validation():
    with pytest.raises(ValueError):
        vf.nystrom_eig(se.kl_kernel(se.BM(), 1.0), 1.0, 8, 2)
    with pytest.raises(ValueError):
        vf.nystrom_eig(lambda s, t: s - t, 1.0, 64, 2)  # asymmetric
    with pytest.raises(ValueError):
        vf.nystrom_eig(lambda s, t: -np.minimum(s, t), 1.0, 64, 2)  # negative


def test_eig_report_serialization():
    rep = vf.nystrom_eig(se.kl_kernel(se.BM(), 1.0), 1.0, 64, 2, kernel_tag="bm")
    doc = json.loads(rep.to_json())
    assert doc["kernel"] == "bm" and doc["n"] == 64 and len(doc["eigenvalues"]) == 2
    plain = rep.table_csv()
    assert plain.splitlines()[0] == "n,nystrom"
    closed = rep.table_csv(closed_form=[0.4, 0.04])
    assert closed.splitlines()[0] == "n,closed_form,nystrom,rel_err"
    assert len(closed.splitlines()) == 3
    with pytest.raises(ValueError):
        vf.EigReport(np.asarray([1.0, 2.0]), None, None, 4, "x")  # ascending


def test_cholesky_sample_determinism():
    grid = np.linspace(0.1, 1.0, 12)
    cov = pr.covariance_matrix(pr.FBM(0.4), grid)
    a = vf.cholesky_sample(cov, np.random.default_rng(7))
    b = vf.cholesky_sample(cov, np.random.default_rng(7))
    assert isinstance(a, mg.SamplePath)
    assert np.array_equal(a.values, b.values)
    block = vf.cholesky_sample(cov, np.random.default_rng(7), paths=5)
    assert block.shape == (5, 12)
    zero = pr.CovarianceMatrix(grid, np.zeros((12, 12)))
    out = vf.cholesky_sample(zero, np.random.default_rng(0), paths=3)
    assert np.all(out == 0.0)


def test_mc_covariance_moments_and_errors():
    grid = np.asarray([0.5, 1.0])
    block = np.asarray([[1.0, 0.0], [1.0, 0.0]])
    mean, stderr = vf.mc_covariance(lambda: block, grid, 100)
    assert np.allclose(mean, [[1.0, 0.0], [0.0, 0.0]])
    assert np.allclose(stderr, 0.0)
    with pytest.raises(ValueError):
        vf.mc_covariance(lambda: block, grid, 50)
    bad = mg.SamplePath(np.asarray([0.0, 2.0]), np.zeros(2))
    with pytest.raises(ValueError):
        vf.mc_covariance(lambda: bad, grid, 100)


def test_band_pass_fraction_rules():
    emp = np.asarray([1.0, 2.0, 3.0])
    target = np.asarray([1.05, 2.0, 10.0])
    stderr = np.asarray([0.02, 0.0, 1.0])
    assert vf.band_pass_fraction(emp, target, stderr) == pytest.approx(2.0 / 3.0)
    assert vf.band_pass_fraction(emp, emp, np.zeros(3)) == 1.0


def test_fbm_variance_quad_h_half():
    assert vf.fbm_variance_quad(0.5, 0.7, "chain") == pytest.approx(2.0 * np.pi * 0.7, rel=1e-10)
    assert vf.fbm_variance_quad(0.5, 0.7, "standard") == pytest.approx(0.7, rel=1e-10)
    assert vf.fbm_variance_quad(0.3, 0.0) == 0.0


def test_truncation_rate_light():
    Ns = [50, 100, 200, 400]
    rep = vf.truncation_rate(0.5, 1.0, Ns, pool=1600)
    assert np.all(np.diff(rep.sup_mean_square) < 0.0)
    assert -1.25 < rep.slope < -0.95
    assert 0.0 <= rep.pool_defect < 1e-3
    rep75 = vf.truncation_rate(0.75, 1.0, Ns, pool=1600)
    assert -1.85 < rep75.slope < -1.45
    assert rep75.pool_defect < 1e-5
    with pytest.raises(ValueError):
        vf.truncation_rate(0.5, 1.0, [50, 100, 200, 500], pool=1600)


def test_truncation_rate_mc_sup():
    rep = vf.truncation_rate(0.6, 1.0, [32, 64, 128, 256], pool=1024, sup_paths=16,
                             rng=np.random.default_rng(3))
    assert rep.sup_abs is not None and rep.sup_abs.shape == (4,)
    assert np.all(np.diff(rep.sup_abs) < 0.0)
    doc = json.loads(rep.to_json())
    assert {"hurst", "r", "Ns", "sup_mean_square", "slope", "slope_ci",
            "pool", "pool_defect", "sup_abs"} <= set(doc)


def test_rate_report_needs_four_points():
    with pytest.raises(ValueError):
        vf.RateReport(0.5, 1.0, np.asarray([1, 2, 3]), np.ones(3), None, -1.0, 0.1, 64, 0.0)


def test_mercer_truncation_monotone():
    grid = np.linspace(0.0, 1.0, 101)
    basis = se.kl_basis(se.BM(), 1.0, 400)
    kern = se.kl_kernel(se.BM(), 1.0)
    coarse = vf.mercer_check(basis, kern, grid, N=50)
    fine = vf.mercer_check(basis, kern, grid, N=400)
    assert fine < coarse
    assert fine < 6e-4


def test_chain_lagrange_residual_light():
    res = vf.chain_lagrange_residual(0.3, 1.0, [1.0, 3.0], [2.0, 5.0],
                                     n_panels=64, n_gl=12)
    assert res < 1e-8


def test_criterion_result_normalizes_numpy_scalars():
    res = vf.CriterionResult(1, "x", np.bool_(True), "d", np.float64(0.5))
    assert isinstance(res.passed, bool) and isinstance(res.seconds, float)
    json.dumps({"passed": res.passed, "seconds": res.seconds})


def test_run_acceptance_single_quick_criterion():
    out = vf.run_acceptance(quick=True, indices=[1])
    assert len(out) == 1
    res = out[0]
    assert res.index == 1 and res.passed is True
    assert "J table" in res.detail
