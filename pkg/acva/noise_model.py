import numpy as np
import scipy.special as ss
import warnings
import pywt
import acva.constants as const


class NegativeRate(ValueError):
    """Raised when a pixel lies below the pedestal of the Poisson-Gaussian model."""

class ImageTooSmall(ValueError):
    """Raised when an image is too small for the requested operation."""

class RegionTooSmall(ValueError):
    """Raised when the region used for parameter estimation is too small."""

class DegenerateFit(ValueError):
    """Raised when the variance-mean relation cannot be fitted."""


#==================
# NOISE PARAMETERS
#==================
class poisson_gaussian_params():
    """
    Parameters of the signal-dependent Poisson-Gaussian noise model. An observation of
    a noise-free value :math:`x` is :math:`\\tilde{x} = \\rho/\\alpha + b v`, with
    :math:`\\rho \\sim P(\\alpha(x-p))` and :math:`v \\sim N(0,1)`.

    :param alpha: Gain, must be positive.
    :type alpha: float

    :param b: Standard deviation of the Gaussian component, in signal units.
    :type b: float, default = 0.0

    :param p: Pedestal, in signal units.
    :type p: float, default = 0.0

    After initialization, the following quantity is stored

    :param sigma_prime: Standard deviation of the Gaussian component in Poisson counts, :math:`\\sigma' = \\alpha b`.
    """
    def __init__(self, alpha, b = 0., p = 0.):
        assert np.isfinite(alpha) and alpha > 0., "alpha must be positive and finite, found %s" %alpha
        assert b >= 0., "b must be non-negative, found %s" %b
        self.alpha       = float(alpha)
        self.b           = float(b)
        self.p           = float(p)
        self.sigma_prime = self.alpha*self.b

    def __repr__(self):
        return "poisson_gaussian_params(alpha = %g, b = %g, p = %g)" %(self.alpha, self.b, self.p)


class gaussian_noise_spec():
    """
    Additive white Gaussian noise.

    :param sigma: Standard deviation, in signal units.
    :type sigma: float

    :param seed: Seed of the random generator.
    :type seed: int, default = 0
    """
    def __init__(self, sigma, seed = 0):
        assert sigma >= 0., "sigma must be non-negative, found %s" %sigma
        self.sigma = float(sigma)
        self.seed  = int(seed)


#-------------------------------------------------------------------------------
# NOISE SYNTHESIS
#-------------------------------------------------------------------------------
def synthesize_awgn(img, spec):
    """
    Adds i.i.d. Gaussian noise to an image. No clipping is applied.

    :type img: 2D array
    :param img: Noise-free image.

    :type spec: ``gaussian_noise_spec`` instance
    :param spec: Noise level and seed.

    :return: 2D array (float)
    """
    img = np.asarray(img, dtype = float)
    rng = np.random.default_rng(spec.seed)
    return img + spec.sigma*rng.standard_normal(img.shape)


def synthesize_poisson_gaussian(img, params, seed = 0):
    """
    Draws a Poisson-Gaussian observation of a noise-free image, pixel by pixel:
    :math:`\\rho/\\alpha + b v` with :math:`\\rho \\sim P(\\alpha(x-p))`.

    :type img: 2D array
    :param img: Noise-free image, nowhere below the pedestal `p`.

    :type params: ``poisson_gaussian_params`` instance
    :param params: Noise parameters.

    :type seed: int, default = 0
    :param seed: Seed of the random generator.

    :return: 2D array (float)
    """
    img  = np.asarray(img, dtype = float)
    rate = params.alpha*(img-params.p)
    if np.any(rate < 0.):
        raise NegativeRate("Poisson rate negative at %i pixel(s): minimum value %g below pedestal %g"
                           %(np.sum(rate < 0.), img.min(), params.p))
    rng  = np.random.default_rng(seed)
    rho  = rng.poisson(rate)
    v    = rng.standard_normal(img.shape)
    return rho/params.alpha + params.b*v


#-------------------------------------------------------------------------------
# GENERALIZED ANSCOMBE TRANSFORM
#-------------------------------------------------------------------------------
def gat_forward(value, params):
    """
    Generalized Anscombe transform. It turns Poisson-Gaussian observations into
    approximately Gaussian ones with unit variance:

    .. math::

     f(x) = 2\\sqrt{x' + 3/8 + \\sigma'^2}, \\qquad x' = \\alpha (x-p),

    and :math:`f(x)=0` where the argument of the square root is not positive.

    :type value: float or array
    :param value: Observed signal.

    :type params: ``poisson_gaussian_params`` instance
    :param params: Noise parameters.

    :return: array (same shape as `value`)
    """
    x   = params.alpha*(np.asarray(value, dtype = float)-params.p)
    arg = x + 3./8. + params.sigma_prime**2.
    return np.where(arg > 0., 2.*np.sqrt(np.maximum(arg, 0.)), 0.)


def _series_bounds(y, tail):
    # Symmetric range [y-w, y+w], widened until the omitted Poisson mass is below `tail`
    w = np.ceil(10.+10.*np.sqrt(y))
    while True:
        lo      = np.maximum(np.floor(y-w), 0.)
        hi      = np.ceil(y+w)
        lower   = np.where(lo > 0., ss.pdtr(np.maximum(lo-1., 0.), y), 0.)
        omitted = lower + ss.pdtrc(hi, y)
        if np.all(omitted < tail):
            return lo, hi
        w = np.where(omitted < tail, w, 2.*w)


def gat_expected(y, sigma_prime = 0., tail = const.GAT_TAIL, gaussian_aware = False):
    """
    Expected value of the stabilized variable given the noise-free Poisson mean,

    .. math::

     G(y) = E[f(x)|y] = 2 \\sum_{x=0}^{\\infty} \\sqrt{x+\\frac{3}{8}} \\ \\frac{y^x e^{-y}}{x!}.

    The series is summed over :math:`[\\max(0,y-w), y+w]`, with `w` widened until the
    omitted Poisson tail mass is below `tail`.
    If `gaussian_aware` is True, the Gaussian component of standard deviation
    `sigma_prime` is integrated with Gauss-Hermite quadrature inside every term.

    :type y: float or array
    :param y: Noise-free Poisson means, non-negative.

    :type sigma_prime: float, default = 0
    :param sigma_prime: Gaussian standard deviation in counts. Only used when `gaussian_aware` is True.

    :type tail: float, default = 1e-12
    :param tail: Maximum omitted Poisson mass.

    :type gaussian_aware: boolean, default = False
    :param gaussian_aware: Include the Gaussian component in the expectation.

    :return: array (same shape as `y`)
    """
    y     = np.asarray(y, dtype = float)
    shape = y.shape
    y     = y.ravel()
    assert np.all(y >= 0.), "Poisson means must be non-negative"

    if gaussian_aware and sigma_prime > 0.:
        nodes, weights = np.polynomial.hermite_e.hermegauss(const.GAT_HERMITE_NODES)
        weights        = weights/np.sqrt(2.*np.pi)
        s2             = sigma_prime**2.
        def transformed(x):
            arg = x[:,None] + sigma_prime*nodes[None,:] + 3./8. + s2
            return 2.*np.sum(weights*np.sqrt(np.maximum(arg, 0.)), axis = 1)
    else:
        def transformed(x):
            return 2.*np.sqrt(x+3./8.)

    G       = np.empty_like(y)
    order   = np.argsort(y, kind = 'stable')
    lo, hi  = _series_bounds(y, tail)
    chunk   = 256
    for start in range(0, len(y), chunk):
        idx   = order[start:start+chunk]
        x     = np.arange(lo[idx].min(), hi[idx].max()+1.)
        fx    = transformed(x)
        yy    = y[idx][:,None]
        logpm = ss.xlogy(x[None,:], yy) - yy - ss.gammaln(x[None,:]+1.)
        G[idx] = np.sum(np.exp(logpm)*fx[None,:], axis = 1)
    return G.reshape(shape)


#==================
# GAT TABLE
#==================
class gat_table():
    """
    Tabulated exact unbiased inverse of the generalized Anscombe transform.
    At initialization the expectation :func:`acva.noise_model.gat_expected` is evaluated on the grid
    :math:`y \\in [0, y_{max}]` with step `y_step`; the table is then immutable and can be
    shared among threads.

    :param params: Noise parameters the table is built for.
    :type params: ``poisson_gaussian_params`` instance

    :param y_max: Upper bound of the grid, in counts. Beyond it the algebraic inverse is used.
    :type y_max: float, default = 1000

    :param y_step: Grid step, in counts.
    :type y_step: float, default = 0.05

    :param gaussian_aware: Include the Gaussian component in the expectation (see :func:`acva.noise_model.gat_expected`). The default reproduces the pure-Poisson series.
    :type gaussian_aware: boolean, default = False

    :param y_grid: Used by :func:`acva.noise_model.gat_table.load` to rebuild a table from file. Must be given together with `g_values`.
    :type y_grid: array, default = None

    :param g_values: See `y_grid`.
    :type g_values: array, default = None

    After initialization, the following quantities will be stored

     - ``self.y_grid`` (`array`) - Ascending noise-free Poisson means.
     - ``self.g_values`` (`array`) - :math:`G(y)` at each grid point, strictly increasing.
     - ``self.y_max`` (`float`) - Upper bound of the grid.
    """
    def __init__(self,
                 params,
                 y_max          = const.GAT_Y_MAX,
                 y_step         = const.GAT_Y_STEP,
                 gaussian_aware = False,
                 y_grid         = None,
                 g_values       = None):

        self.params         = params
        self.gaussian_aware = gaussian_aware

        if y_grid is None:
            n_points      = int(round(y_max/y_step))+1
            self.y_grid   = np.linspace(0., y_max, n_points)
            self.g_values = gat_expected(self.y_grid,
                                         sigma_prime    = params.sigma_prime,
                                         gaussian_aware = gaussian_aware)
        else:
            assert g_values is not None and len(g_values) == len(y_grid), "y_grid and g_values must have the same length"
            self.y_grid   = np.asarray(y_grid, dtype = float)
            self.g_values = np.asarray(g_values, dtype = float)
        assert np.all(np.diff(self.g_values) > 0.), "Tabulated expectation is not strictly increasing"

        self.y_max = self.y_grid[-1]
        self.y_grid.setflags(write = False)
        self.g_values.setflags(write = False)

    #-----------------------------------------------------------------------------------------
    # INVERSE
    #-----------------------------------------------------------------------------------------
    def inverse(self, d):
        """
        Exact unbiased inverse in Poisson counts: the `y` such that :math:`G(y) = d`.
        Inside the table the monotone inverse is obtained by linear interpolation between the
        bracketing grid points; above :math:`G(y_{max})` the algebraic inverse
        :math:`(d/2)^2 - 3/8 - \\sigma'^2` is used; at or below :math:`G(0)` the result is 0.

        :type d: float or array
        :param d: Denoised stabilized values.

        :return: array
        """
        d = np.asarray(d, dtype = float)
        y = np.interp(d, self.g_values, self.y_grid)
        above = d > self.g_values[-1]
        if np.any(above):
            y = np.where(above, (d/2.)**2. - 3./8. - self.params.sigma_prime**2., y)
        return np.where(d <= self.g_values[0], 0., y)

    #-----------------------------------------------------------------------------------------
    # SAVE/LOAD
    #-----------------------------------------------------------------------------------------
    def save(self, path):
        """
        Writes the table as a two-column text file :math:`(y, G(y))`, 9 significant digits.

        :type path: string
        :param path: Output file.

        :return: Nothing.
        """
        header = "alpha = %.9g, b = %.9g, p = %.9g, gaussian_aware = %s\ny G(y)" %(
                  self.params.alpha, self.params.b, self.params.p, self.gaussian_aware)
        np.savetxt(path, np.column_stack([self.y_grid, self.g_values]), fmt = '%.9g', header = header)

    @classmethod
    def load(cls, path, params):
        """
        Reads a table written by :func:`acva.noise_model.gat_table.save`.

        :type path: string
        :param path: Input file.

        :type params: ``poisson_gaussian_params`` instance
        :param params: Noise parameters the table was built for.

        :return: ``gat_table`` instance
        """
        data = np.loadtxt(path, ndmin = 2)
        return cls(params, y_grid = data[:,0], g_values = data[:,1])


def gat_inverse(d, params, table):
    """
    Exact unbiased inverse of the generalized Anscombe transform, in signal units:
    :math:`y/\\alpha + p` where `y` is given by :func:`acva.noise_model.gat_table.inverse`.
    Values at or below :math:`G(0)` map to the pedestal `p`.

    :type d: float or array
    :param d: Denoised stabilized values.

    :type params: ``poisson_gaussian_params`` instance
    :param params: Noise parameters.

    :type table: ``gat_table`` instance
    :param table: Table built for `params`.

    :return: array
    """
    return table.inverse(d)/params.alpha + params.p


#-------------------------------------------------------------------------------
# NOISE ESTIMATION
#-------------------------------------------------------------------------------
def estimate_sigma_mad(img):
    """
    Robust estimate of the standard deviation of additive white Gaussian noise: median absolute
    value of the finest-scale diagonal Haar detail coefficients, divided by 0.6745.

    :type img: 2D array
    :param img: Noisy image, at least 16x16.

    :return: float
    """
    img = np.asarray(img, dtype = float)
    if img.ndim != 2 or min(img.shape) < 16:
        raise ImageTooSmall("Noise estimation needs at least 16x16 pixels, found %s" %(img.shape,))
    h, w = (img.shape[0]//2)*2, (img.shape[1]//2)*2
    _, (_, _, cD) = pywt.dwt2(img[:h,:w], 'haar')
    return float(np.median(np.abs(cD))/const.MAD_CONSTANT)


def _tile_statistics(sub, tile = 8):
    # Tile means and variances of the residual after removing a plane fitted to each tile
    nr, nc = sub.shape[0]//tile, sub.shape[1]//tile
    tiles  = sub[:nr*tile,:nc*tile].reshape(nr, tile, nc, tile).transpose(0,2,1,3).reshape(-1, tile*tile)
    r, c   = np.mgrid[0:tile, 0:tile]
    A      = np.column_stack([np.ones(tile*tile), r.ravel(), c.ravel()])
    coef   = np.linalg.lstsq(A, tiles.T, rcond = None)[0]
    resid  = tiles.T - A@coef
    var    = np.sum(resid**2., axis = 0)/(tile*tile-A.shape[1])
    return tiles.mean(axis = 1), var


def _count_lattice_gain(values):
    # 1/step if the values lie on a lattice of step `step` (unmixed Poisson counts), else None
    levels = np.unique(values)
    if len(levels) < 3:
        return None
    gaps = np.diff(levels)
    step = gaps.min()
    if not np.all(np.abs(gaps/step - np.round(gaps/step)) < 1e-3):
        return None
    return 1./step


def _fit_variance_mean(values, means, variances):
    # Returns (alpha, b) for Var = mean/alpha + b^2, or None if the fit is degenerate
    if np.mean(variances) <= 1e-12*max(np.mean(np.abs(means)), 1.):
        return None
    # Spread of tile means compatible with sampling noise only: flat region, slope not identifiable
    if np.var(means) < 4.*np.mean(variances)/64.:
        gain = _count_lattice_gain(values)
        if gain is None or np.mean(means) <= 0.:
            return None
        ratio = gain*np.mean(variances)/np.mean(means)
        if not 0.5 <= ratio <= 2.:
            return None
        warnings.warn("Flat region: values on a count lattice, pure-Poisson model with alpha = %.6g" %gain)
        return gain, 0.
    slope, intercept = np.polyfit(means, variances, 1)
    if slope <= 0.:
        return None
    return 1./slope, np.sqrt(max(intercept, 0.))


def estimate_pg_params(img, flat_block):
    """
    Estimates the Poisson-Gaussian parameters from a region of a CFA mosaic.
    The region is split into its four CFA subimages; each subimage is divided into 8x8 tiles whose
    means and (plane-detrended) variances are fitted by least squares with
    :math:`\\mathrm{Var} = \\mathrm{mean}/\\alpha + b^2`. The minimum :math:`\\alpha` and the minimum
    :math:`b` over the subimages are returned, with pedestal :math:`p = 0`.
    When the tile means do not spread beyond their sampling noise (flat region) the slope cannot
    be identified. Such a subimage is kept only if its values lie on a lattice of step :math:`1/\\alpha`
    (unmixed Poisson counts) whose gain reproduces :math:`\\mathrm{Var} = \\mathrm{mean}/\\alpha` within a
    factor 2, with :math:`b = 0`; otherwise it is skipped. A flat region with Gaussian noise therefore
    raises ``DegenerateFit``.

    :type img: 2D array
    :param img: CFA mosaic (or any single-channel image).

    :type flat_block: 4-uple of int
    :param flat_block: ``(row, col, height, width)`` of the region, at least 64x64. `row` and `col` are rounded down to even values to keep the CFA phase.

    :return: ``poisson_gaussian_params`` instance
    """
    img = np.asarray(img, dtype = float)
    row, col, height, width = [int(v) for v in flat_block]
    if height < 64 or width < 64:
        raise RegionTooSmall("Region must be at least 64x64, found %ix%i" %(height, width))
    row, col = row-row%2, col-col%2
    region   = img[row:row+height, col:col+width]
    if region.shape[0] < 64 or region.shape[1] < 64:
        raise RegionTooSmall("Region exceeds the image: only %ix%i pixels available" %region.shape)

    alphas, bs = [], []
    for i, j in ((0,0), (0,1), (1,0), (1,1)):
        sub              = region[i::2, j::2]
        means, variances = _tile_statistics(sub)
        fit = _fit_variance_mean(sub, means, variances)
        if fit is None:
            warnings.warn("CFA subimage (%i,%i): degenerate variance-mean relation, skipped" %(i,j))
            continue
        alphas.append(fit[0])
        bs.append(fit[1])
    if len(alphas) == 0:
        raise DegenerateFit("Variance-mean slope not positive in any CFA subimage")
    return poisson_gaussian_params(alpha = min(alphas), b = min(bs), p = 0.)
