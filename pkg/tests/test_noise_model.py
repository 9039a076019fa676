import numpy as np
import pytest
import acva.constants as const
import acva.noise_model as NM
from synthetic import staircase

######################
# Test of noise models
######################
# This routine checks noise synthesis, the generalized Anscombe transform
# with its exact unbiased inverse, and the noise estimators.
# Run as a script to plot the stabilized standard deviation and the inverse.

#------------------------------
# Noise synthesis
#------------------------------
def test_awgn_zero_sigma_is_identity():
    img = np.arange(64.).reshape(8,8)
    out = NM.synthesize_awgn(img, NM.gaussian_noise_spec(0., seed = 3))
    assert np.array_equal(out, img)


def test_awgn_statistics():
    img  = np.full((64,64), 128.)
    diff = NM.synthesize_awgn(img, NM.gaussian_noise_spec(20., seed = 1)) - img
    assert abs(diff.var()/400. - 1.) < 0.1
    assert abs(diff.mean()) < 20.*3./64.


def test_awgn_is_reproducible():
    img = np.zeros((16,16))
    a   = NM.synthesize_awgn(img, NM.gaussian_noise_spec(5., seed = 7))
    b   = NM.synthesize_awgn(img, NM.gaussian_noise_spec(5., seed = 7))
    assert np.array_equal(a, b)


def test_poisson_gaussian_at_pedestal():
    params = NM.poisson_gaussian_params(alpha = 2., b = 0., p = 10.)
    out    = NM.synthesize_poisson_gaussian(np.full((8,8), 10.), params, seed = 0)
    assert np.all(out == 0.)


@pytest.mark.parametrize("alpha, variance", [(1., 100.), (4., 25.)])
def test_poisson_gaussian_statistics(alpha, variance):
    img = np.full((128,128), 100.)
    out = NM.synthesize_poisson_gaussian(img, NM.poisson_gaussian_params(alpha), seed = 2)
    assert abs(out.mean()-100.) < 3.*np.sqrt(variance/img.size)
    assert abs(out.var()/variance - 1.) < 0.1


def test_poisson_gaussian_negative_rate():
    with pytest.raises(NM.NegativeRate):
        NM.synthesize_poisson_gaussian(np.array([[5., 1.]]), NM.poisson_gaussian_params(1., p = 2.))


def test_invalid_params():
    with pytest.raises(AssertionError):
        NM.poisson_gaussian_params(alpha = 0.)
    with pytest.raises(AssertionError):
        NM.poisson_gaussian_params(alpha = 1., b = -1.)


#------------------------------
# Forward transform
#------------------------------
def test_gat_forward_values():
    params = NM.poisson_gaussian_params(1.)
    assert NM.gat_forward(-1., params) == 0.
    assert np.isclose(NM.gat_forward(0., params), 1.224745, atol = 1e-6)
    x = np.linspace(-5., 300., 1000)
    assert np.all(np.diff(NM.gat_forward(x, NM.poisson_gaussian_params(3., b = 0.5))) >= 0.)


@pytest.mark.parametrize("y", [10., 50., 100.])
def test_gat_stabilizes_variance(y):
    rng    = np.random.default_rng(11)
    params = NM.poisson_gaussian_params(1.)
    z      = NM.gat_forward(rng.poisson(y, 100000).astype(float), params)
    assert 0.95 <= z.std() <= 1.05


def test_gat_stabilizes_synthesized_image():
    params = NM.poisson_gaussian_params(1.)
    noisy  = NM.synthesize_poisson_gaussian(np.full((400,250), 50.), params, seed = 5)
    assert abs(NM.gat_forward(noisy, params).std() - 1.) < 0.05


#------------------------------
# Expected value and inverse
#------------------------------
def test_gat_expected_values():
    assert np.isclose(NM.gat_expected(0.), const.GAT_ZERO, rtol = 1e-14)
    G = NM.gat_expected(np.arange(0., 100.5, 0.5))
    assert np.all(np.diff(G) > 0.)


def test_gat_expected_monte_carlo():
    rng     = np.random.default_rng(0)
    samples = 2.*np.sqrt(rng.poisson(100., 1000000) + 3./8.)
    error   = samples.std()/np.sqrt(samples.size)
    assert abs(NM.gat_expected(100.) - samples.mean()) < 3.*error


def test_gat_table_round_trip():
    params = NM.poisson_gaussian_params(1.)
    table  = NM.gat_table(params)
    assert np.isclose(table.g_values[0], const.GAT_ZERO)
    assert np.all(np.diff(table.g_values) > 0.)
    assert np.max(np.abs(table.inverse(table.g_values) - table.y_grid)) < 1e-3
    y = np.array([0., 1., 5., 20., 100.])
    assert np.all(np.abs(NM.gat_inverse(NM.gat_expected(y), params, table) - y) < 1e-3)


def test_gat_inverse_branches():
    params = NM.poisson_gaussian_params(1., p = 3.)
    table  = NM.gat_table(params, y_max = 200.)
    assert NM.gat_inverse(table.g_values[0], params, table) == 3.
    assert NM.gat_inverse(0.1, params, table) == 3.
    d = 2.*np.sqrt(1000. + 3./8.)
    assert abs(NM.gat_inverse(d, params, table) - 3. - 1000.) < 0.5


def test_gat_round_trip_noise_free():
    params = NM.poisson_gaussian_params(400.)
    table  = NM.gat_table(params)
    x      = np.linspace(1., 255., 500)
    assert np.max(np.abs(NM.gat_inverse(NM.gat_forward(x, params), params, table) - x)) < 1e-2


def test_gat_table_save_load(tmp_path):
    params = NM.poisson_gaussian_params(2., b = 0.1)
    table  = NM.gat_table(params, y_max = 50.)
    path   = str(tmp_path/'table.txt')
    table.save(path)
    loaded = NM.gat_table.load(path, params)
    assert np.allclose(loaded.g_values, table.g_values, rtol = 1e-8)
    assert loaded.y_max == table.y_max


def test_gaussian_aware_table():
    params = NM.poisson_gaussian_params(1., b = 2.)
    table  = NM.gat_table(params, y_max = 100., gaussian_aware = True)
    assert np.all(np.diff(table.g_values) > 0.)
    rng     = np.random.default_rng(4)
    z       = rng.poisson(20., 400000) + params.sigma_prime*rng.standard_normal(400000)
    samples = NM.gat_forward(z, params)
    G20     = np.interp(20., table.y_grid, table.g_values)
    assert abs(G20 - samples.mean()) < 3.*samples.std()/np.sqrt(samples.size) + 1e-4
    plain = NM.gat_table(NM.poisson_gaussian_params(1.), y_max = 100., gaussian_aware = True)
    assert np.allclose(plain.g_values, NM.gat_expected(plain.y_grid))


#------------------------------
# Estimators
#------------------------------
def test_sigma_mad():
    assert NM.estimate_sigma_mad(np.full((32,32), 7.)) < 1e-6
    r, c  = np.mgrid[0:256, 0:256]
    ramp  = 0.3*r + 0.5*c
    noisy = NM.synthesize_awgn(ramp, NM.gaussian_noise_spec(10., seed = 9))
    assert abs(NM.estimate_sigma_mad(noisy) - 10.) < 1.5
    with pytest.raises(NM.ImageTooSmall):
        NM.estimate_sigma_mad(np.zeros((15,40)))


def test_pg_params_flat_poisson():
    params = NM.poisson_gaussian_params(400.)
    noisy  = NM.synthesize_poisson_gaussian(np.full((200,200), 200.), params, seed = 1)
    with pytest.warns(UserWarning):
        estimate = NM.estimate_pg_params(noisy, (0, 0, 200, 200))
    assert 200. <= estimate.alpha <= 800.
    assert estimate.b == 0. and estimate.p == 0.


def test_pg_params_flat_gaussian():
    # one intensity level: the Gaussian variance must not be read as a Poisson gain
    noisy = NM.synthesize_awgn(np.full((200,200), 100.), NM.gaussian_noise_spec(5., seed = 4))
    with pytest.raises(NM.DegenerateFit):
        with pytest.warns(UserWarning):
            NM.estimate_pg_params(noisy, (0, 0, 200, 200))


def test_pg_params_flat_mixed_or_quantized():
    mixed = NM.synthesize_poisson_gaussian(np.full((200,200), 200.), NM.poisson_gaussian_params(400., b = 0.5), seed = 5)
    # integer levels whose unit step does not explain a variance of 25
    quantized = np.round(NM.synthesize_awgn(np.full((200,200), 100.), NM.gaussian_noise_spec(5., seed = 6)))
    for noisy in (mixed, quantized):
        with pytest.raises(NM.DegenerateFit):
            with pytest.warns(UserWarning):
                NM.estimate_pg_params(noisy, (0, 0, 200, 200))


def test_pg_params_staircase():
    params = NM.poisson_gaussian_params(400.)
    noisy  = NM.synthesize_poisson_gaussian(staircase(50., 250.), params, seed = 2)
    estimate = NM.estimate_pg_params(noisy, (0, 0, 200, 200))
    assert 200. <= estimate.alpha <= 800.
    assert estimate.b < 0.3


def test_pg_params_pure_gaussian():
    noisy = NM.synthesize_awgn(staircase(50., 250.), NM.gaussian_noise_spec(5., seed = 3))
    try:
        estimate = NM.estimate_pg_params(noisy, (0, 0, 200, 200))
    except NM.DegenerateFit:
        return
    assert abs(estimate.b - 5.) < 1.


def test_pg_params_errors():
    with pytest.raises(NM.DegenerateFit):
        with pytest.warns(UserWarning):
            NM.estimate_pg_params(np.full((128,128), 100.), (0, 0, 128, 128))
    with pytest.raises(NM.RegionTooSmall):
        NM.estimate_pg_params(np.zeros((128,128)), (0, 0, 32, 128))


if __name__ == '__main__':
    import matplotlib.pyplot as plt
    plt.rc('font', family = 'serif', size = 15)

    #------------------------------
    # Stabilized standard deviation
    #------------------------------
    rng    = np.random.default_rng(0)
    params = NM.poisson_gaussian_params(1.)
    ys     = np.geomspace(0.1, 200., 40)
    stds   = [NM.gat_forward(rng.poisson(y, 20000).astype(float), params).std() for y in ys]

    table  = NM.gat_table(params, y_max = 200.)
    d      = np.linspace(0.5, 30., 300)

    fig, ax = plt.subplots(1, 2, figsize = (15,6))
    ax[0].semilogx(ys, stds, 'bo', ms = 4)
    ax[0].axhline(1., c = 'k', ls = ':')
    ax[0].set_xlabel('$y$')
    ax[0].set_ylabel('std of $f(z)$')
    ax[1].plot(d, table.inverse(d), 'r-', label = 'exact unbiased')
    ax[1].plot(d, np.maximum((d/2.)**2.-3./8., 0.), 'b--', label = 'algebraic')
    ax[1].set_xlabel('$D$')
    ax[1].set_ylabel('$y$')
    ax[1].legend()
    plt.show()
