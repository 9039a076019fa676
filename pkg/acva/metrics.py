import numpy as np
import scipy.ndimage as nd
import csv
import acva.constants as const


class DimensionMismatch(ValueError):
    """Raised when two images to compare have different sizes."""

class TooSmall(ValueError):
    """Raised when an image is smaller than the SSIM window."""


def _pair_of_images(a, b):
    a = np.asarray(a, dtype = float)
    b = np.asarray(b, dtype = float)
    if a.shape != b.shape:
        raise DimensionMismatch("Images of different sizes: %s and %s" %(a.shape, b.shape))
    return a, b


#-------------------------------------------------------------------------------
# PSNR
#-------------------------------------------------------------------------------
def psnr(a, b, peak = 255.):
    """
    Peak signal-to-noise ratio, :math:`10 \\log_{10}(\\mathrm{peak}^2/\\mathrm{MSE})`, capped at 99 dB
    (the value reported for identical images).

    :type a: 2D array
    :param a: First image.

    :type b: 2D array
    :param b: Second image.

    :type peak: float, default = 255
    :param peak: Nominal maximum of the images.

    :return: float [dB]
    """
    assert peak > 0., "peak must be positive, found %s" %peak
    a, b = _pair_of_images(a, b)
    mse  = np.mean((a-b)**2.)
    if mse == 0.:
        return const.PSNR_CAP
    return float(min(10.*np.log10(peak**2./mse), const.PSNR_CAP))


#-------------------------------------------------------------------------------
# SSIM
#-------------------------------------------------------------------------------
def ssim(a, b, peak = 255.):
    """
    Mean structural similarity. Local means, variances and covariance are computed with an
    11x11 Gaussian window of standard deviation 1.5; :math:`C_1 = (0.01 \\, \\mathrm{peak})^2`,
    :math:`C_2 = (0.03 \\, \\mathrm{peak})^2`. The map is averaged away from the 5-pixel border,
    where the window would leave the image.

    :type a: 2D array
    :param a: First image, at least 11x11.

    :type b: 2D array
    :param b: Second image.

    :type peak: float, default = 255
    :param peak: Nominal maximum of the images.

    :return: float
    """
    a, b = _pair_of_images(a, b)
    if min(a.shape) < const.SSIM_WIN:
        raise TooSmall("SSIM needs at least %ix%i pixels, found %s" %(const.SSIM_WIN, const.SSIM_WIN, a.shape))
    radius   = const.SSIM_WIN//2
    truncate = radius/const.SSIM_SIGMA
    blur     = lambda x: nd.gaussian_filter(x, const.SSIM_SIGMA, truncate = truncate, mode = 'reflect')
    C1 = (const.SSIM_K1*peak)**2.
    C2 = (const.SSIM_K2*peak)**2.

    mu1  = blur(a)
    mu2  = blur(b)
    s11  = blur(a*a) - mu1*mu1
    s22  = blur(b*b) - mu2*mu2
    s12  = blur(a*b) - mu1*mu2
    smap = ((2.*mu1*mu2 + C1)*(2.*s12 + C2))/((mu1*mu1 + mu2*mu2 + C1)*(s11 + s22 + C2))
    return float(np.mean(smap[radius:-radius, radius:-radius]))


#-------------------------------------------------------------------------------
# REPORTS
#-------------------------------------------------------------------------------
class metric_report():
    """
    Quality of one denoised image.

    :param psnr_db: PSNR [dB].
    :type psnr_db: float

    :param ssim: Mean SSIM, in [-1, 1].
    :type ssim: float

    :param image: Identifier of the image.
    :type image: string, default = ''

    :param sigma: Noise level of the evaluation.
    :type sigma: float, default = None
    """
    def __init__(self, psnr_db, ssim, image = '', sigma = None):
        assert np.isnan(ssim) or -1. <= ssim <= 1.+1e-12, "SSIM must lie in [-1,1], found %s" %ssim
        self.psnr_db = min(float(psnr_db), const.PSNR_CAP)
        self.ssim    = float(ssim)
        self.image   = image
        self.sigma   = sigma

    @classmethod
    def compare(cls, reference, test, peak = 255., image = '', sigma = None):
        """
        Report of `test` against `reference`, see :func:`acva.metrics.psnr` and :func:`acva.metrics.ssim`.
        """
        return cls(psnr(reference, test, peak), ssim(reference, test, peak), image = image, sigma = sigma)

    def row(self):
        return [self.image, '' if self.sigma is None else '%g' %self.sigma, '%.4f' %self.psnr_db, '%.6f' %self.ssim]


def write_csv(reports, stream):
    """
    Writes reports as CSV with header ``image,sigma,psnr_db,ssim``, one row per report.

    :type reports: list of ``metric_report`` instances
    :param reports: Reports to write.

    :type stream: file-like object
    :param stream: Open text stream.

    :return: Nothing.
    """
    writer = csv.writer(stream, lineterminator = '\n')
    writer.writerow(['image', 'sigma', 'psnr_db', 'ssim'])
    for report in reports:
        writer.writerow(report.row())
