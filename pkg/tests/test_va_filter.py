import numpy as np
import pytest
import acva.va_filter as VA

######################
# Test of va_filter
######################
# LPA-ICI window selection, local auto-covariance, suboptimal Wiener shrinkage
# and the denoising of whole clusters.

def J(alpha, g, beta):
    return (1.-g)**2./(1.-alpha*g)**2. - beta*alpha**2.


#------------------------------
# Local polynomial approximation
#------------------------------
def test_lpa_estimate():
    const = VA.dimension_signal(np.full(20, 3.75), 1.)
    for n, h in [(0, 0), (5, 3), (19, 55)]:
        assert VA.lpa_estimate(const, n, h)[0] == 3.75
    ramp = VA.dimension_signal([1., 2., 3., 4., 5.], 2.)
    mean, std = VA.lpa_estimate(ramp, 0, 2)
    assert mean == 2. and np.isclose(std, 2./np.sqrt(3.))
    assert np.isclose(VA.lpa_estimate(ramp, 2, 2)[1], 2./np.sqrt(5.))


#------------------------------
# Intersection of confidence intervals
#------------------------------
def test_ici_constant_signal():
    signal = VA.dimension_signal(np.full(200, 5.), 1.)
    cfg    = VA.ici_config()
    assert all(VA.ici_select_window(signal, n, cfg) == 55 for n in (0, 57, 199))


def test_ici_singleton():
    signal = VA.dimension_signal(np.random.default_rng(0).normal(size = 50), 1.)
    assert VA.ici_select_window(signal, 10, VA.ici_config(window_sizes = (3,))) == 3


def test_ici_short_sequences():
    cfg = VA.ici_config()
    assert VA.ici_select_window(VA.dimension_signal([1., 2., 3.], 1.), 1, cfg) == 1
    assert VA.ici_select_window(VA.dimension_signal([1., 2.], 1.), 0, cfg) is None
    assert VA.ici_select_window(VA.dimension_signal(np.zeros(30), 1.), 4, VA.ici_config(fixed_h = 6)) == 6


def test_ici_detects_steps():
    rng  = np.random.default_rng(1)
    cfg  = VA.ici_config(gamma = 2.)
    hits = 0
    for _ in range(100):
        y      = np.concatenate([np.zeros(100), np.full(100, 100.)]) + rng.standard_normal(200)
        signal = VA.dimension_signal(y, 1.)
        hits  += all(VA.ici_select_window(signal, n, cfg) < 55 for n in (99, 100))
    assert hits >= 95


def test_ici_returns_candidate():
    signal = VA.dimension_signal(np.random.default_rng(2).normal(0., 3., 300), 1.)
    cfg    = VA.ici_config()
    hs     = [VA.ici_select_window(signal, n, cfg) for n in range(300)]
    assert set(hs) <= set(cfg.window_sizes)
    assert hs == [VA.ici_select_window(signal, n, cfg) for n in range(300)]


def test_ici_zero_width_intervals():
    # noise-free constant: every interval is a single point, so the smallest window is kept
    signal = VA.dimension_signal(np.full(200, 5.), 0.)
    assert VA.ici_select_window(signal, 100, VA.ici_config()) == 1


#------------------------------
# Local auto-covariance
#------------------------------
def test_local_autocov():
    assert VA.local_autocov(VA.dimension_signal(np.zeros(8), 1.), 3, 2) == 0.
    assert np.isclose(VA.local_autocov(VA.dimension_signal(np.full(8, -3.), 1.), 0, 5), 9.)
    assert np.isclose(VA.local_autocov(VA.dimension_signal([1., 2., 3.], 1.), 1, 1), 14./3.)


#------------------------------
# Shrinkage
#------------------------------
def test_optimal_alpha_limits():
    cfg = VA.wiener_config(beta = 0.7)
    assert VA.optimal_alpha(0., cfg) == 0.
    g = np.array([0.1, 0.5, 0.9])
    assert np.all(VA.optimal_alpha(g, VA.wiener_config(beta = 0.)) == 1.)
    assert np.all(VA.optimal_alpha(g, VA.wiener_config(mode = 'wiener')) == 1.)
    assert VA.optimal_alpha(g.reshape(3,1), cfg).shape == (3,1)


def test_optimal_alpha_fine_grid():
    rng   = np.random.default_rng(3)
    g     = rng.uniform(0., 1., 1000)
    cfg   = VA.wiener_config(beta = 0.7)
    alpha = VA.optimal_alpha(g, cfg)
    fine  = np.linspace(0., 1., 10001)
    Jfine = J(fine[None,:], g[:,None], 0.7)
    best  = fine[np.argmax(Jfine, axis = 1)]
    assert np.mean(np.abs(alpha-best) <= 0.01) >= 0.99
    assert np.all(J(alpha, g, 0.7) >= Jfine.max(axis = 1) - 1e-4)
    assert np.all(J(alpha, g, 0.7) >= J(0., g, 0.7)) and np.all(J(alpha, g, 0.7) >= J(1., g, 0.7))
    assert np.all((alpha >= 0.) & (alpha <= 1.))


def test_shrink_coefficient():
    cfg = VA.wiener_config(beta = 0.7)
    assert VA.shrink_coefficient(10., 1., 1., cfg) == 0.
    assert VA.shrink_coefficient(10., 0.5, 1., cfg) == 0.
    assert VA.shrink_coefficient(-4., 3., 0., cfg) == -4.
    a = VA.optimal_alpha(0.5, cfg)
    assert np.isclose(VA.shrink_coefficient(10., 2., 1., cfg), (1.-a/2.)*10.)


def test_shrinkage_never_amplifies():
    rng = np.random.default_rng(4)
    y   = rng.normal(0., 5., 10**6)
    R_y = rng.uniform(0., 50., 10**6)
    for cfg in (VA.wiener_config(), VA.wiener_config(beta = 0.), VA.wiener_config(mode = 'wiener')):
        out = VA.shrink_coefficient(y, R_y, 2., cfg)
        assert out.shape == y.shape
        assert np.all(np.abs(out) <= np.abs(y))
        assert np.all(np.sign(out)*np.sign(y) >= 0.)
    assert VA.shrink_coefficient(y[:5], R_y[:5], 2., cfg)[0] == VA.shrink_coefficient(y[0], R_y[0], 2., cfg)


def test_invalid_configs():
    with pytest.raises(AssertionError):
        VA.wiener_config(beta = -1.)
    with pytest.raises(AssertionError):
        VA.wiener_config(alpha_grid_step = 0.5)
    with pytest.raises(ValueError):
        VA.wiener_config(mode = 'hard')
    with pytest.raises(AssertionError):
        VA.ici_config(window_sizes = (3, 2))


#------------------------------
# Filtering of a dimension
#------------------------------
def test_filter_zero_dimension():
    out = VA.filter_dimension(VA.dimension_signal(np.zeros(40), 1.), VA.ici_config(), VA.wiener_config())
    assert np.all(out == 0.)


def test_filter_constant_dimension():
    rng = np.random.default_rng(5)
    y   = 200. + rng.standard_normal(128)
    out = VA.filter_dimension(VA.dimension_signal(y, 1.), VA.ici_config(), VA.wiener_config())
    assert np.all(np.abs(out/200. - 1.) <= 0.05)


def test_filter_pure_noise():
    rng = np.random.default_rng(6)
    ici, wiener = VA.ici_config(), VA.wiener_config()
    ms  = [np.mean(VA.filter_dimension(VA.dimension_signal(rng.standard_normal(256), 1.), ici, wiener)**2.)
           for _ in range(100)]
    assert np.mean(ms) <= 0.25


def test_filter_sign_flip():
    y   = np.random.default_rng(7).normal(0., 3., 150)
    ici, wiener = VA.ici_config(), VA.wiener_config()
    pos = VA.filter_dimension(VA.dimension_signal(y, 1.), ici, wiener)
    neg = VA.filter_dimension(VA.dimension_signal(-y, 1.), ici, wiener)
    assert np.allclose(neg, -pos)


#------------------------------
# Clusters
#------------------------------
def test_denoise_cluster_identity():
    X   = np.random.default_rng(8).normal(size = (64, 100))
    out = VA.denoise_cluster(X, 0.)
    assert np.linalg.norm(out-X)/np.linalg.norm(X) < 1e-6


def test_denoise_cluster_translation():
    rng = np.random.default_rng(9)
    X   = rng.normal(size = (16, 80))
    c   = rng.uniform(0., 200., 16)
    assert np.allclose(VA.denoise_cluster(X + c[:,None], 1.), VA.denoise_cluster(X, 1.) + c[:,None], atol = 1e-6)


def test_denoise_constant_cluster():
    rng  = np.random.default_rng(10)
    X    = np.repeat(rng.uniform(0., 255., (64, 1)), 300, axis = 1) + rng.standard_normal((64, 300))
    out  = VA.denoise_cluster(X, 1.)
    spread = lambda A: np.linalg.norm(A - A.mean(axis = 1)[:,None])
    assert spread(out) <= 0.5*spread(X)


def test_denoise_low_rank_cluster():
    rng   = np.random.default_rng(11)
    A, _  = np.linalg.qr(rng.normal(size = (64, 2)))
    X0    = 10.*A@rng.normal(size = (2, 512)) + 50.
    X     = X0 + rng.standard_normal((64, 512))
    out   = VA.denoise_cluster(X, 1.)
    assert np.linalg.norm(X-X0) >= 0.9*np.sqrt(64*512)
    assert np.linalg.norm(out-X0) <= 0.15*np.linalg.norm(X0-50.)


def test_denoise_tiny_cluster():
    X   = np.array([[10., 12.], [3., 1.], [7., 7.]])
    out = VA.denoise_cluster(X, 1.)
    assert out.shape == X.shape and np.all(np.isfinite(out))


if __name__ == '__main__':
    import matplotlib.pyplot as plt
    plt.rc('font', family = 'serif', size = 15)

    #------------------------------
    # Selected windows and filtered coefficients of a step
    #------------------------------
    rng    = np.random.default_rng(0)
    f      = np.concatenate([np.zeros(150), np.full(100, 8.), np.linspace(8., -4., 150)])
    y      = f + 2.*rng.standard_normal(len(f))
    signal = VA.dimension_signal(y, 2.)
    cfg    = VA.ici_config()
    hs     = [VA.ici_select_window(signal, n, cfg) for n in range(len(y))]
    out    = VA.filter_dimension(signal, cfg, VA.wiener_config())

    fig, ax = plt.subplots(2, 1, sharex = True, figsize = (12,8))
    ax[0].plot(y, 'k.', ms = 3, label = 'noisy')
    ax[0].plot(f, 'b-', label = 'clean')
    ax[0].plot(out, 'r-', label = 'filtered')
    ax[0].legend()
    ax[1].step(np.arange(len(y)), hs, 'g-')
    ax[1].set_ylabel('$h$')
    ax[1].set_xlabel('$n$')
    plt.show()
