import numpy as np
import pytest

import spectralgauss.chain as ch
import spectralgauss.processes as pr
import spectralgauss.verify as vf


def test_even_plus_odd_recovers_full_covariance():
    s = np.linspace(0.1, 1.9, 7)[:, None]
    t = np.linspace(0.05, 1.7, 5)[None, :]
    for H in (0.3, 0.5, 0.7):
        for norm in ("standard", "chain"):
            full = pr.covariance(pr.FBM(H, norm), s, t)
            even = pr.covariance(pr.FBMEven(H, norm), s, t)
            odd = pr.covariance(pr.FBMOdd(H, norm), s, t)
            assert np.allclose(even + odd, full, rtol=0.0, atol=1e-12)


def test_fbm_covariance_matches_spectral_quadrature():
    for H in (0.3, 0.7):
        for norm in ("standard", "chain"):
            for s, t in ((0.4, 0.4), (0.3, 1.1), (1.5, 0.2)):
                closed = pr.covariance(pr.FBM(H, norm), s, t)
                quad = vf.fbm_covariance_quad(H, s, t, norm)
                assert closed == pytest.approx(quad, rel=1e-8, abs=1e-10)


def test_normalization_constants():
    assert pr.chain_mu1(0.5) == pytest.approx(1.0, rel=1e-14)
    assert pr.standard_c(0.5) == pytest.approx(1.0 / (2.0 * np.pi), rel=1e-14)
    assert pr.chain_scale(0.5) == pytest.approx(2.0 * np.pi, rel=1e-14)
    # standard normalization means unit variance at t = 1
    assert pr.covariance(pr.FBM(0.3), 1.0, 1.0) == pytest.approx(1.0)
    k = pr.chain_scale(0.7)
    assert pr.covariance(pr.FBM(0.7, "chain"), 1.0, 1.0) == pytest.approx(k)


def test_ou_matches_ar_order_one():
    theta, sigma2 = 1.3, 0.8
    ou = pr.OU(theta, sigma2)
    ar = pr.AR((theta,), sigma2)
    taus = np.asarray([0.0, 0.25, 1.0, 2.5])
    a = pr.covariance(ou, 0.0, taus)
    b = pr.covariance(ar, 0.0, taus)
    assert np.allclose(a, b, rtol=1e-8, atol=1e-10)
    assert a[0] == pytest.approx(sigma2 / (2.0 * theta), rel=1e-14)


def test_ar_two_distinct_roots_closed_form():
    # partial fractions of 1/((l^2+a^2)(l^2+b^2)) give
    # cov(tau) = sigma2 (e^{-a tau}/a - e^{-b tau}/b) / (2 (b^2 - a^2))
    a, b, sigma2 = 1.0, 2.0, 1.0
    spec = pr.AR((a, b), sigma2)
    for tau in (0.0, 0.4, 1.5):
        want = sigma2 * (np.exp(-a * tau) / a - np.exp(-b * tau) / b) / (2.0 * (b * b - a * a))
        assert pr.covariance(spec, 0.0, tau) == pytest.approx(want, rel=1e-7)


def test_ar_repeated_root_closed_form():
    # int_0^inf cos(l tau)/(l^2+a^2)^2 dl = pi (1 + a tau) e^{-a tau} / (4 a^3)
    a, sigma2 = 1.0, 1.0
    spec = pr.AR((a, a), sigma2)
    for tau in (0.0, 1.0, 3.0):
        want = sigma2 * (1.0 + a * tau) * np.exp(-a * tau) / (4.0 * a**3)
        assert pr.covariance(spec, 0.0, tau) == pytest.approx(want, rel=1e-7)


def test_martingale_kind_covariances():
    st = ch.fbm_structure(0.3)
    s = np.asarray([0.2, 0.9, 1.4])
    t = np.asarray([0.5, 0.6, 2.0])
    m = np.minimum(s, t)
    assert np.allclose(pr.covariance(pr.EvenMartingale(0.3), s, t), np.pi * st.alpha(m))
    assert np.allclose(pr.covariance(pr.OddMartingale(0.3), s, t), np.pi * st.gamma(m))
    assert np.allclose(pr.covariance(pr.SingleSidedMartingale(0.3), s, t), np.pi * st.alpha(m))
    off = pr.covariance(pr.EvenMartingale(0.3, pi_scaled=False), s, t)
    assert np.allclose(off, st.alpha(m))
    # H = 1/2 collapses to pi * Brownian covariance
    bm = pr.covariance(pr.BrownianMotion(), s, t)
    assert np.allclose(pr.covariance(pr.EvenMartingale(0.5), s, t), np.pi * bm)


def test_bridge_kind_covariances_and_window():
    H, r = 0.7, 1.5
    st = ch.fbm_structure(H)
    s = np.asarray([0.0, 0.4, 1.1, r])
    eb = pr.covariance(pr.EvenBridge(H, r), s, s)
    want = np.pi * (st.alpha(s) - st.alpha(s) ** 2 / st.alpha(r))
    assert np.allclose(eb, want)
    assert eb[0] == pytest.approx(0.0, abs=1e-14)
    assert eb[-1] == pytest.approx(0.0, abs=1e-14)
    ob = pr.covariance(pr.OddBridge(H, r), 0.4, 1.1)
    assert ob == pytest.approx(np.pi * (st.gamma(0.4) - st.gamma(0.4) * st.gamma(1.1) / st.gamma(r)))
    with pytest.raises(ValueError):
        pr.covariance(pr.EvenBridge(H, r), 0.2, 1.8)
    with pytest.raises(ValueError):
        pr.covariance(pr.BrownianBridge(r), -0.1, 0.5)


def test_alpha_wiener_bridge_is_time_reversed_even_bridge():
    H, r = 0.3, 1.2
    s = np.linspace(0.0, r, 9)[:, None]
    t = np.linspace(0.0, r, 8)[None, :]
    awb = pr.covariance(pr.AlphaWienerBridge(H, r), s, t)
    rev = pr.covariance(pr.EvenBridge(H, r), r - s, r - t)
    assert np.allclose(awb, rev, atol=1e-12)
    assert np.all(np.isfinite(awb))


def test_brownian_kinds():
    s = np.asarray([0.2, 0.5, 0.9])
    t = np.asarray([0.8, 0.1, 0.9])
    assert np.allclose(pr.covariance(pr.BrownianMotion(), s, t), np.minimum(s, t))
    r = 1.0
    want = np.minimum(s, t) - s * t / r
    assert np.allclose(pr.covariance(pr.BrownianBridge(r), s, t), want)


def test_spectral_densities():
    lam = np.asarray([0.5, 1.0, 4.0])
    for H in (0.3, 0.7):
        std = pr.spectral_density(pr.FBM(H), lam)
        assert np.allclose(std, pr.standard_c(H) * lam ** (1.0 - 2.0 * H))
        chn = pr.spectral_density(pr.FBM(H, "chain"), lam)
        assert np.allclose(chn, pr.chain_mu1(H) * lam ** (1.0 - 2.0 * H))
    ou = pr.OU(2.0, 3.0)
    assert np.allclose(pr.spectral_density(ou, lam), 3.0 / (2.0 * np.pi * (lam**2 + 4.0)))
    ar1 = pr.AR((2.0,), 3.0)
    assert np.allclose(pr.spectral_density(ar1, lam), pr.spectral_density(ou, lam))
    assert pr.spectral_density(pr.BrownianMotion(), 1.0) == pytest.approx(1.0 / (2.0 * np.pi))
    with pytest.raises(ValueError):
        pr.spectral_density(pr.FBM(0.3), 0.0)
    with pytest.raises(TypeError):
        pr.spectral_density(pr.BrownianBridge(1.0), 1.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        pr.FBM(0.0)
    with pytest.raises(ValueError):
        pr.FBM(0.5, "weird")
    with pytest.raises(ValueError):
        pr.OU(-1.0, 1.0)
    with pytest.raises(ValueError):
        pr.OU(1.0, 0.0)
    with pytest.raises(ValueError):
        pr.AR((), 1.0)
    with pytest.raises(ValueError):
        pr.EvenBridge(0.5, -1.0)
    with pytest.raises(ValueError):
        pr.AlphaWienerBridge(0.5, 0.0)
    with pytest.raises(TypeError):
        pr.covariance(object(), 0.0, 1.0)


def test_covariance_matrix_psd_and_csv_roundtrip():
    grid = np.linspace(0.05, 1.5, 24)
    cov = pr.covariance_matrix(pr.FBM(0.3), grid)
    w = np.linalg.eigvalsh(cov.values)
    assert w[0] > -1e-10 * np.trace(cov.values)
    back = pr.CovarianceMatrix.from_csv(cov.to_csv())
    assert np.array_equal(back.grid, cov.grid)
    assert np.array_equal(back.values, cov.values)
    with pytest.raises(ValueError):
        pr.covariance_matrix(pr.FBM(0.3), grid[::-1])
    with pytest.raises(ValueError):
        pr.CovarianceMatrix(grid, np.eye(3))


def test_covariance_scalar_return():
    out = pr.covariance(pr.FBM(0.5), 0.3, 0.8)
    assert isinstance(out, float)
    assert out == pytest.approx(0.3)
