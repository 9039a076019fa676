import numpy as np
import os
import json
import logging
from multiprocessing.pool import ThreadPool
import acva.constants as const
import acva.useful_functions as UF
import acva.noise_model as NM
import acva.patching as PT
import acva.clustering as CL
import acva.va_filter as VA
import acva.metrics as MT
from acva.noise_model import ImageTooSmall

logger = logging.getLogger(__name__)


class OddDimensions(ValueError):
    """Raised when a color image cannot be subsampled into a CFA mosaic."""

class ValueOutOfRange(ValueError):
    """Raised when input intensities lie outside the expected range."""


#==================
# CONFIGURATION
#==================
class denoise_config():
    """
    The ``denoise_config`` class collects every tunable of the denoiser. All the parameters have
    the defaults listed in :func:`acva.constants.explanatory`.

    :param d: Patch side.
    :type d: int, default = 8

    :param window_size: Side :math:`W_s` of the sliding window.
    :type window_size: int, default = 128

    :param window_step: Distance between two consecutive windows.
    :type window_step: int, default = 96

    :param patch_stride: Distance between two consecutive patches inside a window.
    :type patch_stride: int, default = 1

    :param mu: Correction coefficient of the rank selection.
    :type mu: float, default = 1.1

    :param beta: Trade-off of the suboptimal Wiener filter.
    :type beta: float, default = 0.7

    :param gamma_ici: Threshold of the intersection of confidence intervals.
    :type gamma_ici: float, default = 2.0

    :param window_sizes: Candidate half-widths of the LPA windows.
    :type window_sizes: tuple of int, default = (1, 2, 3, 5, 8, 13, 21, 34, 55)

    :param L_T: Size gate of the merging.
    :type L_T: int, default = 200

    :param rho_amp: Amplification coefficient of the merging.
    :type rho_amp: float, default = 0.7

    :param epsilon: Tail probability of the merge threshold.
    :type epsilon: float, default = 1.3e-10

    :param min_cluster_size: Merged clusters with fewer patches are absorbed by their nearest larger cluster, see :func:`acva.clustering.absorb_small_clusters`. 1 disables it.
    :type min_cluster_size: int, default = 32

    :param seed: Seed of the clustering.
    :type seed: int, default = 0

    :param thread_count: Number of worker threads. If None, the number of CPUs.
    :type thread_count: int, default = None

    :param alpha_grid_step: Resolution of the attenuation coefficient.
    :type alpha_grid_step: float, default = 0.005

    :param wiener_mode: 'suboptimal' or 'wiener', see :func:`acva.va_filter.wiener_config`.
    :type wiener_mode: string, default = 'suboptimal'

    :param fixed_h: Fixed half-width of the local windows instead of the adaptive one.
    :type fixed_h: int, default = None

    :param dump_clusters: Directory where the cluster label map of each window is written as PGM. None disables it.
    :type dump_clusters: string, default = None
    """
    def __init__(self,
                 d               = const.PATCH_SIZE,
                 window_size     = const.WINDOW_SIZE,
                 window_step     = const.WINDOW_STEP,
                 patch_stride    = const.PATCH_STRIDE,
                 mu              = const.MU,
                 beta            = const.BETA,
                 gamma_ici       = const.GAMMA_ICI,
                 window_sizes    = const.ICI_WINDOWS,
                 L_T             = const.L_T,
                 rho_amp         = const.RHO_AMP,
                 epsilon         = const.EPSILON,
                 min_cluster_size = const.MIN_CLUSTER_SIZE,
                 seed            = 0,
                 thread_count    = None,
                 alpha_grid_step = const.ALPHA_GRID_STEP,
                 wiener_mode     = 'suboptimal',
                 fixed_h         = None,
                 dump_clusters   = None):

        assert d >= 1, "Patch side must be at least 1, found %s" %d
        assert window_size >= d, "Window (%s) smaller than patches (%s)" %(window_size, d)
        assert window_step >= 1 and patch_stride >= 1, "Steps must be at least 1"
        assert mu > 0., "mu must be positive, found %s" %mu
        assert min_cluster_size >= 1, "min_cluster_size must be at least 1, found %s" %min_cluster_size
        assert thread_count is None or thread_count >= 1, "thread_count must be at least 1"

        self.d               = int(d)
        self.window_size     = int(window_size)
        self.window_step     = int(window_step)
        self.patch_stride    = int(patch_stride)
        self.mu              = float(mu)
        self.L_T             = int(L_T)
        self.rho_amp         = float(rho_amp)
        self.epsilon         = float(epsilon)
        self.min_cluster_size = int(min_cluster_size)
        self.seed            = int(seed)
        self.thread_count    = thread_count if thread_count is not None else (os.cpu_count() or 1)
        self.dump_clusters   = dump_clusters
        self.ici             = VA.ici_config(window_sizes = window_sizes, gamma = gamma_ici, fixed_h = fixed_h)
        self.wiener          = VA.wiener_config(beta = beta, alpha_grid_step = alpha_grid_step, mode = wiener_mode)
        # validates L_T, rho_amp and epsilon
        self.merge(1.)

    def merge(self, sigma):
        """
        Merging parameters for a noise level, the threshold being :func:`acva.clustering.merge_threshold`.

        :type sigma: float
        :param sigma: Noise standard deviation.

        :return: ``merge_config`` instance
        """
        xi = CL.merge_threshold(sigma, self.d**2, self.epsilon)
        return CL.merge_config(xi, L_T = self.L_T, rho_amp = self.rho_amp, epsilon = self.epsilon)

    def copy(self, **kwargs):
        """
        New configuration with some parameters replaced.
        """
        params = self.as_dict()
        params.update(kwargs)
        return denoise_config(**params)

    def as_dict(self):
        return {'d':               self.d,
                'window_size':     self.window_size,
                'window_step':     self.window_step,
                'patch_stride':    self.patch_stride,
                'mu':              self.mu,
                'beta':            self.wiener.beta,
                'gamma_ici':       self.ici.gamma,
                'window_sizes':    list(self.ici.window_sizes),
                'L_T':             self.L_T,
                'rho_amp':         self.rho_amp,
                'epsilon':         self.epsilon,
                'min_cluster_size': self.min_cluster_size,
                'seed':            self.seed,
                'thread_count':    self.thread_count,
                'alpha_grid_step': self.wiener.alpha_grid_step,
                'wiener_mode':     self.wiener.mode,
                'fixed_h':         self.ici.fixed_h,
                'dump_clusters':   self.dump_clusters}


#-------------------------------------------------------------------------------
# GAUSSIAN DENOISING
#-------------------------------------------------------------------------------
def _denoise_window(img, index, origin, dims, sigma, merge_cfg, cfg):
    patches  = PT.extract_patches(img, origin, dims, cfg.d, cfg.patch_stride)
    rng      = UF.seed_stream(cfg.seed, index)
    clusters = CL.over_cluster(patches, dims, cfg.d, seed = rng)
    merged   = CL.iterative_merge(clusters, merge_cfg)
    merged   = CL.absorb_small_clusters(merged, cfg.min_cluster_size)
    logger.debug("Window %i at %s: %i clusters, %i after merging", index, origin, clusters.K, merged.K)

    estimates = np.empty_like(patches.vectors)
    for members in merged.member_lists:
        estimates[:, members] = VA.denoise_cluster(patches.vectors[:, members], sigma, cfg.mu, cfg.ici, cfg.wiener)
    if cfg.dump_clusters is not None:
        labels = CL.label_map(merged, patches.coords, dims)
        PT.write_label_map(os.path.join(cfg.dump_clusters, 'clusters_%04i.pgm' %index), labels)
    return PT.aggregation_buffer(dims).deposit_many(estimates, patches.coords)


def denoise_gaussian(img, sigma, cfg = None):
    """
    Denoises an image corrupted by additive white Gaussian noise.
    The image is scanned by sliding windows (see :func:`acva.patching.tile_windows`); in each window the
    patches are over-clustered, the clusters are merged, every cluster is filtered with
    :func:`acva.va_filter.denoise_cluster` and the estimated patches are aggregated. Windows are processed
    by a pool of threads, each one with its own random stream and its own aggregation buffer; the
    buffers are summed in window order, so that the result does not depend on the number of threads.
    Images smaller than the window are processed as a single window.

    :type img: 2D array
    :param img: Noisy image.

    :type sigma: float
    :param sigma: Noise standard deviation, positive.

    :type cfg: ``denoise_config`` instance, default = None
    :param cfg: Parameters. Defaults if None.

    :return: 2D array (float), same size as `img`.
    """
    cfg = denoise_config() if cfg is None else cfg
    img = np.asarray(img, dtype = float)
    assert sigma > 0., "sigma must be positive, found %s" %sigma
    if img.ndim != 2 or min(img.shape) < cfg.d:
        raise ImageTooSmall("Image %s smaller than the patches (%i)" %(img.shape, cfg.d))

    dims      = (min(cfg.window_size, img.shape[0]), min(cfg.window_size, img.shape[1]))
    origins   = PT.tile_windows(img.shape[0], img.shape[1], dims, cfg.window_step)
    merge_cfg = cfg.merge(sigma)
    logger.info("Denoising %ix%i image: sigma = %.4g, %i windows of %ix%i, xi = %.4g",
                img.shape[0], img.shape[1], sigma, len(origins), dims[0], dims[1], merge_cfg.xi)
    if cfg.dump_clusters is not None:
        os.makedirs(cfg.dump_clusters, exist_ok = True)

    work = lambda i: _denoise_window(img, i, origins[i], dims, sigma, merge_cfg, cfg)
    if cfg.thread_count > 1 and len(origins) > 1:
        with ThreadPool(min(cfg.thread_count, len(origins))) as pool:
            buffers = pool.map(work, range(len(origins)))
    else:
        buffers = [work(i) for i in range(len(origins))]

    total = PT.aggregation_buffer(img.shape)
    for origin, buf in zip(origins, buffers):
        total.merge(buf, origin)
    return total.finalize()


#-------------------------------------------------------------------------------
# POISSON-GAUSSIAN DENOISING
#-------------------------------------------------------------------------------
def denoise_poisson_gaussian(img, params, cfg = None, table = None):
    """
    Denoises an image corrupted by Poisson-Gaussian noise: generalized Anscombe transform,
    Gaussian denoising with unit standard deviation and exact unbiased inverse.

    :type img: 2D array
    :param img: Noisy image.

    :type params: ``poisson_gaussian_params`` instance
    :param params: Noise parameters.

    :type cfg: ``denoise_config`` instance, default = None
    :param cfg: Parameters. Defaults if None.

    :type table: ``gat_table`` instance, default = None
    :param table: Inverse table for `params`. Built if None.

    :return: 2D array (float)
    """
    table = NM.gat_table(params) if table is None else table
    logger.info("Poisson-Gaussian denoising with %s", params)
    stabilized = NM.gat_forward(img, params)
    denoised   = denoise_gaussian(stabilized, 1., cfg)
    return NM.gat_inverse(denoised, params, table)


#==================
# RAW MOSAICS
#==================
CFA_CHANNELS = ('R', 'G1', 'G2', 'B')
CFA_OFFSETS  = {'R': (0,0), 'G1': (0,1), 'G2': (1,0), 'B': (1,1)}


class raw_mosaic():
    """
    Single-channel RGGB mosaic: in every 2x2 cell the red sample is top-left, the two green
    samples top-right (G1) and bottom-left (G2), and the blue sample bottom-right.

    :param mosaic: Mosaic, even dimensions.
    :type mosaic: 2D array

    :param params: Noise parameters of the mosaic, if known.
    :type params: ``poisson_gaussian_params`` instance, default = None

    :param r_max: Scale of the raw values.
    :type r_max: float, default = 1.0
    """
    def __init__(self, mosaic, params = None, r_max = 1.):
        mosaic = np.asarray(mosaic, dtype = float)
        if mosaic.ndim != 2 or mosaic.shape[0]%2 or mosaic.shape[1]%2:
            raise OddDimensions("CFA mosaic must have even dimensions, found %s" %(mosaic.shape,))
        self.mosaic = mosaic
        self.params = params
        self.r_max  = float(r_max)

    def subimage(self, channel):
        i, j = CFA_OFFSETS[channel]
        return self.mosaic[i::2, j::2]

    def subimages(self):
        """
        The four half-size subimages, as a dictionary with keys 'R', 'G1', 'G2', 'B'.
        """
        return {c: self.subimage(c) for c in CFA_CHANNELS}

    @classmethod
    def from_subimages(cls, subimages, params = None, r_max = 1.):
        """
        Mosaic reassembled from its four subimages (dictionary with keys 'R', 'G1', 'G2', 'B').
        """
        h, w   = np.shape(subimages['R'])
        mosaic = np.empty((2*h, 2*w))
        for c in CFA_CHANNELS:
            i, j = CFA_OFFSETS[c]
            mosaic[i::2, j::2] = subimages[c]
        return cls(mosaic, params = params, r_max = r_max)


def simulate_raw(rgb, r_max = 1., params = None, seed = 0):
    """
    Simulates a camera raw mosaic from a color image. The channels are scaled by `r_max` and
    subsampled on the RGGB pattern (red on even rows and even columns, counting from 0, green
    on the two mixed positions, blue on odd rows and odd columns); Poisson-Gaussian noise is then
    drawn on the mosaic.

    :type rgb: 3D array
    :param rgb: Color image with values in [0, 1], either ``(H, W, 3)`` or ``(3, H, W)``, or a list of three channels. `H` and `W` must be even.

    :type r_max: float, default = 1.0
    :param r_max: Scale of the raw values.

    :type params: ``poisson_gaussian_params`` instance
    :param params: Noise parameters, in raw units.

    :type seed: int, default = 0
    :param seed: Seed of the noise.

    :return: noisy and clean ``raw_mosaic`` instances.
    """
    assert params is not None, "Noise parameters are required"
    rgb = np.asarray(rgb, dtype = float)
    if rgb.ndim != 3 or 3 not in (rgb.shape[0], rgb.shape[-1]):
        raise ValueError("Expected a color image with 3 channels, found shape %s" %(rgb.shape,))
    if rgb.shape[-1] == 3 and rgb.shape[0] != 3:
        rgb = np.moveaxis(rgb, -1, 0)
    r, g, b = rgb
    if r.shape[0]%2 or r.shape[1]%2:
        raise OddDimensions("Image dimensions must be even, found %ix%i" %r.shape)
    if rgb.min() < 0. or rgb.max() > 1.:
        raise ValueOutOfRange("Color values must lie in [0,1], found [%g, %g]" %(rgb.min(), rgb.max()))

    clean = raw_mosaic.from_subimages({'R':  r_max*r[0::2, 0::2],
                                       'G1': r_max*g[0::2, 1::2],
                                       'G2': r_max*g[1::2, 0::2],
                                       'B':  r_max*b[1::2, 1::2]}, params = params, r_max = r_max)
    noisy = NM.synthesize_poisson_gaussian(clean.mosaic, params, seed = seed)
    logger.info("Simulated %ix%i raw mosaic with %s, r_max = %g", noisy.shape[0], noisy.shape[1], params, r_max)
    return raw_mosaic(noisy, params = params, r_max = r_max), clean


def _subimage_list(images):
    if isinstance(images, raw_mosaic):
        return [images.subimage(c) for c in CFA_CHANNELS]
    if isinstance(images, dict):
        return [images[c] for c in CFA_CHANNELS if c in images]
    return list(images)


def evaluate_raw(denoised, clean, peak = 1.):
    """
    Average PSNR and SSIM over the subimages of a mosaic. The SSIM is reported as NaN when the
    subimages are smaller than its window.

    :type denoised: ``raw_mosaic`` instance, dictionary or list of 2D arrays
    :param denoised: Denoised subimages.

    :type clean: same as `denoised`
    :param clean: Noise-free subimages.

    :type peak: float, default = 1.0
    :param peak: Peak value of the metrics, usually the raw scale.

    :return: ``metric_report`` instance
    """
    denoised = _subimage_list(denoised)
    clean    = _subimage_list(clean)
    if len(denoised) != len(clean) or len(clean) == 0:
        raise MT.DimensionMismatch("%i denoised subimages for %i clean ones" %(len(denoised), len(clean)))
    psnrs = [MT.psnr(c, d, peak) for c, d in zip(clean, denoised)]
    if min(np.shape(clean[0])) >= const.SSIM_WIN:
        ssims = [MT.ssim(c, d, peak) for c, d in zip(clean, denoised)]
    else:
        ssims = [np.nan]
    return MT.metric_report(np.mean(psnrs), np.mean(ssims), image = 'raw')


def denoise_raw_mosaic(mosaic, params = None, cfg = None, flat_block = (0, 0, 200, 200)):
    """
    Denoises an RGGB raw mosaic. The four subimages are denoised separately through
    :func:`acva.pipeline.denoise_poisson_gaussian` with one shared inverse table, then reassembled.
    If the noise parameters are unknown they are estimated from a flat region with
    :func:`acva.noise_model.estimate_pg_params`.

    :type mosaic: ``raw_mosaic`` instance
    :param mosaic: Noisy mosaic.

    :type params: ``poisson_gaussian_params`` instance, default = None
    :param params: Noise parameters. If None, ``mosaic.params`` or else the estimate.

    :type cfg: ``denoise_config`` instance, default = None
    :param cfg: Parameters. Defaults if None.

    :type flat_block: 4-uple of int, default = (0, 0, 200, 200)
    :param flat_block: ``(row, col, height, width)`` of the region used for the estimation.

    :return: ``raw_mosaic`` instance
    """
    params = mosaic.params if params is None else params
    if params is None:
        params = NM.estimate_pg_params(mosaic.mosaic, flat_block)
        logger.info("Estimated noise parameters from block %s: %s", flat_block, params)
    table = NM.gat_table(params)
    out   = {c: denoise_poisson_gaussian(sub, params, cfg, table) for c, sub in mosaic.subimages().items()}
    return raw_mosaic.from_subimages(out, params = params, r_max = mosaic.r_max)


def _sidecar(path):
    return os.path.splitext(path)[0] + '.json'


def write_raw_mosaic(path, mosaic):
    """
    Writes a mosaic as a 16-bit PGM, storing :math:`65535 x/r_{max}`, plus a JSON sidecar with the
    CFA pattern, the noise parameters and the raw scale.

    :type path: string
    :param path: Output PGM file. The sidecar has the same name with extension ``.json``.

    :type mosaic: ``raw_mosaic`` instance
    :param mosaic: Mosaic to write.

    :return: Nothing.
    """
    PT.write_image(path, 65535.*mosaic.mosaic/mosaic.r_max, peak = 65535.)
    p    = mosaic.params
    meta = {'cfa': 'RGGB',
            'alpha': None if p is None else p.alpha,
            'b': None if p is None else p.b,
            'p': None if p is None else p.p,
            'r_max': mosaic.r_max}
    with open(_sidecar(path), 'w') as f:
        json.dump(meta, f, indent = 1)


def read_raw_mosaic(path):
    """
    Reads a mosaic written by :func:`acva.pipeline.write_raw_mosaic`. Without sidecar, the raw scale
    is 1 and the noise parameters are unknown.

    :type path: string
    :param path: Input PGM file.

    :return: ``raw_mosaic`` instance
    """
    data, peak = PT.read_image(path)
    meta = {'cfa': 'RGGB', 'alpha': None, 'r_max': 1.}
    if os.path.exists(_sidecar(path)):
        with open(_sidecar(path)) as f:
            meta.update(json.load(f))
    if meta['cfa'] != 'RGGB':
        raise ValueError("Unsupported CFA pattern '%s'" %meta['cfa'])
    params = None
    if meta['alpha'] is not None:
        params = NM.poisson_gaussian_params(meta['alpha'], meta.get('b', 0.), meta.get('p', 0.))
    return raw_mosaic(data/peak*meta['r_max'], params = params, r_max = meta['r_max'])


#-------------------------------------------------------------------------------
# PARAMETER STUDIES
#-------------------------------------------------------------------------------
def _study(images, sigma, settings, peak):
    # settings: list of (label, denoise_config); returns {label: (mean PSNR, mean SSIM)}
    if isinstance(images, dict):
        names, images = list(images.keys()), list(images.values())
    else:
        names = ['image_%i' %i for i in range(len(images))]
    noisy = [NM.synthesize_awgn(img, NM.gaussian_noise_spec(sigma, seed = k)) for k, img in enumerate(images)]
    results = {}
    for label, cfg in settings:
        reports = [MT.metric_report.compare(img, denoise_gaussian(y, sigma, cfg), peak, image = n, sigma = sigma)
                   for n, img, y in zip(names, images, noisy)]
        results[label] = (np.mean([r.psnr_db for r in reports]), np.mean([r.ssim for r in reports]))
        logger.info("Variant %s: PSNR = %.3f dB, SSIM = %.4f", label, *results[label])
    return results


def clustering_study(images, sigma, variants = ((0, 1.), (0, 0.7), (200, 0.7)), cfg = None, peak = 255.):
    """
    Compares clustering settings on a set of images: each image is corrupted with Gaussian noise
    (seed equal to its index) and denoised once per variant.

    :type images: list or dictionary of 2D arrays
    :param images: Noise-free images.

    :type sigma: float
    :param sigma: Noise standard deviation.

    :type variants: list of 2-uples
    :param variants: ``(L_T, rho_amp)`` settings. ``(0, 1)`` disables the amplification.

    :type cfg: ``denoise_config`` instance, default = None
    :param cfg: Other parameters. Defaults if None.

    :type peak: float, default = 255
    :param peak: Peak value of the metrics.

    :return: dictionary ``{(L_T, rho_amp): (mean PSNR, mean SSIM)}``
    """
    cfg = denoise_config() if cfg is None else cfg
    settings = [((L_T, rho), cfg.copy(L_T = L_T, rho_amp = rho)) for L_T, rho in variants]
    return _study(images, sigma, settings, peak)


def filter_study(images, sigma, variants = (('wiener', 8), ('wiener', None), ('suboptimal', 8), ('suboptimal', None)), cfg = None, peak = 255.):
    """
    Compares filtering settings on a set of images, as :func:`acva.pipeline.clustering_study`.

    :type images: list or dictionary of 2D arrays
    :param images: Noise-free images.

    :type sigma: float
    :param sigma: Noise standard deviation.

    :type variants: list of 2-uples
    :param variants: ``(wiener_mode, fixed_h)`` settings; ``fixed_h = None`` selects the adaptive windows.

    :type cfg: ``denoise_config`` instance, default = None
    :param cfg: Other parameters. Defaults if None.

    :type peak: float, default = 255
    :param peak: Peak value of the metrics.

    :return: dictionary ``{(wiener_mode, fixed_h): (mean PSNR, mean SSIM)}``
    """
    cfg = denoise_config() if cfg is None else cfg
    settings = [((mode, h), cfg.copy(wiener_mode = mode, fixed_h = h)) for mode, h in variants]
    return _study(images, sigma, settings, peak)
