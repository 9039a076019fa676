import numpy as np
import acva.constants as const
import acva.useful_functions as UF
import acva.spectral as SP


#==================
# CONFIGURATIONS
#==================
class ici_config():
    """
    Window selection of the variation-adaptive filter.

    :param window_sizes: Candidate half-widths :math:`h_1 < ... < h_J`; a window holds :math:`2h+1` coefficients.
    :type window_sizes: tuple of int, default = (1, 2, 3, 5, 8, 13, 21, 34, 55)

    :param gamma: Threshold :math:`\\Gamma` of the intersection of confidence intervals.
    :type gamma: float, default = 2.0

    :param fixed_h: If not None, every coefficient uses this half-width instead of the adaptive one.
    :type fixed_h: int, default = None
    """
    def __init__(self, window_sizes = const.ICI_WINDOWS, gamma = const.GAMMA_ICI, fixed_h = None):
        window_sizes = tuple(int(h) for h in window_sizes)
        assert len(window_sizes) > 0, "At least one window size is required"
        assert window_sizes[0] >= 0 and np.all(np.diff(window_sizes) > 0), "Window sizes must be non-negative and strictly ascending"
        assert gamma > 0., "gamma must be positive, found %s" %gamma
        assert fixed_h is None or fixed_h >= 0, "fixed_h must be non-negative"
        self.window_sizes = window_sizes
        self.gamma        = float(gamma)
        self.fixed_h      = fixed_h


class wiener_config():
    """
    Shrinkage of the variation-adaptive filter.

    :param beta: Trade-off :math:`\\beta` between signal distortion and noise reduction.
    :type beta: float, default = 0.7

    :param alpha_grid_step: Resolution of the search of the attenuation coefficient.
    :type alpha_grid_step: float, default = 0.005

    :param mode: 'suboptimal' (attenuation coefficient maximizing :math:`J(\\alpha)`) or 'wiener' (:math:`\\alpha = 1`).
    :type mode: string, default = 'suboptimal'
    """
    def __init__(self, beta = const.BETA, alpha_grid_step = const.ALPHA_GRID_STEP, mode = 'suboptimal'):
        assert beta >= 0., "beta must be non-negative, found %s" %beta
        assert 0. < alpha_grid_step <= 0.1, "alpha_grid_step must lie in (0, 0.1], found %s" %alpha_grid_step
        if mode not in ('suboptimal', 'wiener'):
            raise ValueError("Unknown filter mode '%s': use 'suboptimal' or 'wiener'" %mode)
        self.beta            = float(beta)
        self.alpha_grid_step = float(alpha_grid_step)
        self.mode            = mode
        n_alpha              = int(round(1./self.alpha_grid_step))
        self.alpha_grid      = np.minimum(np.arange(n_alpha+1)*self.alpha_grid_step, 1.)


class dimension_signal():
    """
    Coefficient sequence :math:`y(n)` of one PCA dimension and the noise level :math:`\\sigma` it carries.
    """
    def __init__(self, values, sigma):
        self.values = np.asarray(values, dtype = float)
        self.sigma  = float(sigma)
        assert np.all(np.isfinite(self.values)), "Coefficients must be finite"
        assert self.sigma >= 0., "sigma must be non-negative"

    def __len__(self):
        return len(self.values)


#-------------------------------------------------------------------------------
# LOCAL POLYNOMIAL APPROXIMATION
#-------------------------------------------------------------------------------
def lpa_estimate(signal, n, h):
    """
    Zero-order local polynomial fit with uniform kernel: mean of the coefficients over
    :math:`[n-h, n+h]`, truncated to the sequence, and its standard deviation :math:`\\sigma/\\sqrt{N}`,
    `N` being the number of coefficients in the window.

    :type signal: ``dimension_signal`` instance
    :param signal: Coefficient sequence.

    :type n: int
    :param n: Index of the coefficient (0-based).

    :type h: int
    :param h: Half-width of the window.

    :return: mean and standard deviation (floats).
    """
    L  = len(signal)
    assert 0 <= n < L, "Index %i outside sequence of length %i" %(n, L)
    lo, hi = max(n-h, 0), min(n+h, L-1)
    N  = hi-lo+1
    return float(np.mean(signal.values[lo:hi+1])), signal.sigma/np.sqrt(N)


def _ici_half_widths(y, sigma, cfg):
    # Adaptive half-width of every coefficient, None if the whole sequence is the window
    L = len(y)
    if cfg.fixed_h is not None:
        return np.full(L, int(cfg.fixed_h))
    hs = [h for h in cfg.window_sizes if h <= (L-1)//2]
    if len(hs) == 0:
        return None
    lower    = np.full(L, -np.inf)
    upper    = np.full(L, np.inf)
    alive    = np.ones(L, dtype = bool)
    selected = np.full(L, hs[0])
    for h in hs:
        s, N  = UF.clamped_window_sums(y, h)
        mean  = s/N
        std   = sigma/np.sqrt(N)
        lower = np.maximum(lower, mean-cfg.gamma*std)
        upper = np.minimum(upper, mean+cfg.gamma*std)
        alive &= lower < upper
        selected = np.where(alive, h, selected)
    return selected


def ici_select_window(signal, n, cfg):
    """
    Intersection of confidence intervals. For :math:`h_1 < ... < h_J` the intervals
    :math:`D_i = [\\hat{y}(n,h_i) - \\Gamma \\mathrm{std}, \\hat{y}(n,h_i) + \\Gamma \\mathrm{std}]` are intersected one after
    the other; the result is the largest :math:`h_i` for which the running lower bound stays strictly
    below the running upper bound (zero-width intervals end the selection). Half-widths above
    :math:`\\lfloor (L-1)/2 \\rfloor` are discarded; if none is left, the whole sequence is the window.

    :type signal: ``dimension_signal`` instance
    :param signal: Coefficient sequence.

    :type n: int
    :param n: Index of the coefficient (0-based).

    :type cfg: ``ici_config`` instance
    :param cfg: Window selection parameters.

    :return: int, or None when the whole sequence is the window
    """
    L = len(signal)
    assert 0 <= n < L, "Index %i outside sequence of length %i" %(n, L)
    h = _ici_half_widths(signal.values, signal.sigma, cfg)
    return None if h is None else int(h[n])


def local_autocov(signal, n, h):
    """
    Local auto-covariance :math:`R_y(n)`: mean of the squared coefficients over the truncated
    window :math:`[n-h, n+h]`.

    :type signal: ``dimension_signal`` instance
    :param signal: Coefficient sequence.

    :type n: int
    :param n: Index of the coefficient (0-based).

    :type h: int
    :param h: Half-width of the window.

    :return: float
    """
    L = len(signal)
    assert 0 <= n < L, "Index %i outside sequence of length %i" %(n, L)
    lo, hi = max(n-h, 0), min(n+h, L-1)
    return float(np.mean(signal.values[lo:hi+1]**2.))


#-------------------------------------------------------------------------------
# SUBOPTIMAL WIENER FILTER
#-------------------------------------------------------------------------------
def optimal_alpha(g_o, cfg):
    """
    Attenuation coefficient of the suboptimal Wiener filter :math:`h_s = 1 - \\alpha g_o`. It maximizes

    .. math::

     J(\\alpha) = \\frac{(1-g_o)^2}{(1-\\alpha g_o)^2} - \\beta \\alpha^2

    on the grid :math:`\\{0, \\delta, 2\\delta, ..., 1\\}`, ties going to the smaller :math:`\\alpha`.
    In 'wiener' mode :math:`\\alpha = 1`.

    :type g_o: float or array
    :param g_o: Noise to signal-plus-noise ratio :math:`\\sigma^2/R_y`, in :math:`[0,1)`.

    :type cfg: ``wiener_config`` instance
    :param cfg: Shrinkage parameters.

    :return: float or array (same shape as `g_o`)
    """
    g     = np.asarray(g_o, dtype = float)
    assert np.all((g >= 0.) & (g < 1.)), "g_o must lie in [0,1)"
    if cfg.mode == 'wiener':
        return 1. if g.ndim == 0 else np.ones_like(g)
    a     = cfg.alpha_grid
    flat  = g.ravel()
    out   = np.empty_like(flat)
    chunk = 8192
    for start in range(0, len(flat), chunk):
        gg = flat[start:start+chunk, None]
        J  = (1.-gg)**2./(1.-a[None,:]*gg)**2. - cfg.beta*a[None,:]**2.
        out[start:start+chunk] = a[np.argmax(J, axis = 1)]
    if g.ndim == 0:
        return float(out[0])
    return out.reshape(g.shape)


def _shrink(y, R_y, sigma, cfg):
    # Elementwise suboptimal Wiener shrinkage, zero where R_y <= sigma^2
    y, R_y = np.broadcast_arrays(np.asarray(y, dtype = float), np.asarray(R_y, dtype = float))
    if sigma == 0.:
        return y.copy()
    s2   = sigma**2.
    keep = R_y > s2
    out  = np.zeros_like(y)
    if np.any(keep):
        g         = s2/R_y[keep]
        out[keep] = (1.-optimal_alpha(g, cfg)*g)*y[keep]
    return out


def shrink_coefficient(y_n, R_y, sigma, cfg):
    """
    Suboptimal Wiener estimate of one coefficient, :math:`\\hat{f}(n) = (1-\\alpha g_o) y(n)` with
    :math:`g_o = \\sigma^2/R_y` and :math:`\\alpha` from :func:`acva.va_filter.optimal_alpha`.
    The coefficient is zeroed when :math:`R_y \\le \\sigma^2` (no signal power left), and returned
    unchanged when :math:`\\sigma = 0`.

    :type y_n: float or array
    :param y_n: Noisy coefficient(s).

    :type R_y: float or array
    :param R_y: Local auto-covariance, non-negative, broadcastable with `y_n`.

    :type sigma: float
    :param sigma: Noise standard deviation.

    :type cfg: ``wiener_config`` instance
    :param cfg: Shrinkage parameters.

    :return: float or array (broadcast shape)
    """
    assert np.all(np.asarray(R_y) >= 0.) and sigma >= 0., "R_y and sigma must be non-negative"
    out = _shrink(y_n, R_y, sigma, cfg)
    return float(out) if out.ndim == 0 else out


def filter_dimension(signal, ici, wiener, global_window = False):
    """
    Variation-adaptive filtering of the coefficients of one PCA dimension: for every coefficient,
    window selection (:func:`acva.va_filter.ici_select_window`), local auto-covariance over that window
    and suboptimal Wiener shrinkage. Sequences shorter than the smallest window use the whole
    sequence as the window.

    :type signal: ``dimension_signal`` instance
    :param signal: Coefficient sequence.

    :type ici: ``ici_config`` instance
    :param ici: Window selection parameters.

    :type wiener: ``wiener_config`` instance
    :param wiener: Shrinkage parameters.

    :type global_window: boolean, default = False
    :param global_window: Use the whole sequence as the window of every coefficient.

    :return: array
    """
    y = signal.values
    if len(y) == 0:
        return y.copy()
    h = None if global_window else _ici_half_widths(y, signal.sigma, ici)
    if h is None:
        R_y = np.full(len(y), np.mean(y**2.))
    else:
        s, N = UF.clamped_window_sums(y**2., h)
        R_y  = s/N
    return _shrink(y, R_y, signal.sigma, wiener)


def denoise_cluster(cluster, sigma, mu = const.MU, ici = None, wiener = None):
    """
    Denoises a cluster matrix: PCA, rank selection, variation-adaptive filtering of the retained
    dimensions and inverse transform (discarded dimensions are set to zero). The cluster mean is
    added back unchanged. Clusters with fewer than 4 columns keep every dimension and use
    whole-sequence statistics. With :math:`\\sigma = 0` the cluster is returned as reconstructed
    from all its dimensions.

    :type cluster: 2D array
    :param cluster: :math:`M \\times L` matrix of similar patches.

    :type sigma: float
    :param sigma: Noise standard deviation.

    :type mu: float, default = 1.1
    :param mu: Correction coefficient of the rank selection.

    :type ici: ``ici_config`` instance, default = None
    :param ici: Window selection parameters. Defaults if None.

    :type wiener: ``wiener_config`` instance, default = None
    :param wiener: Shrinkage parameters. Defaults if None.

    :return: 2D array, :math:`M \\times L`
    """
    ici    = ici_config() if ici is None else ici
    wiener = wiener_config() if wiener is None else wiener
    X      = np.asarray(cluster, dtype = float)
    M, L   = X.shape
    assert L >= 1, "Empty cluster"
    pca    = SP.pca_decompose(X)
    if sigma == 0.:
        return pca.reconstruct()

    tiny = L < const.MIN_RANK_SAMPLES
    if tiny:
        R = min(M, L)
    else:
        R = SP.select_rank(pca.eigenvalues, sigma, M, L, mu).R
    R = min(R, pca.coeffs.shape[0])
    filtered = np.vstack([filter_dimension(dimension_signal(pca.coeffs[i], sigma), ici, wiener, global_window = tiny)
                          for i in range(R)])
    return pca.reconstruct(coeffs = filtered)
