import numpy as np

def explanatory():
    """
    This file contains the default tunables of the denoiser and a few numerical constants
    which are used in the other codes. Every default can be overridden through
    :func:`acva.pipeline.denoise_config` or the command line.

    Patches and windows

     - ``PATCH_SIZE``: side :math:`d` of the square patches (:math:`M = d^2`)
     - ``WINDOW_SIZE``: side :math:`W_s` of the sliding window
     - ``WINDOW_STEP``: distance between two consecutive window origins
     - ``PATCH_STRIDE``: distance between two consecutive patches inside a window

    Adaptive clustering

     - ``L_T``: size gate; pairs whose smaller cluster exceeds it get their distance amplified
     - ``RHO_AMP``: amplification coefficient of the between-cluster distance
     - ``EPSILON``: probability of wrongly merging a singleton with a large cluster
     - ``KMEANS_MAX_ITER``: maximum number of Lloyd iterations
     - ``KMEANS_TOL``: stopping tolerance, in units of the data standard deviation
     - ``STAGE1_AREA``: window area per first-stage cluster
     - ``STAGE1_MIN_CLUSTERS``: minimum number of first-stage clusters
     - ``MIN_CLUSTER_SIZE``: merged clusters with fewer patches are absorbed by their nearest larger cluster

    Transform-domain filtering

     - ``MU``: correction coefficient of the noise eigenvalue edge
     - ``MIN_RANK_SAMPLES``: clusters with fewer columns skip rank selection
     - ``BETA``: distortion/noise-reduction trade-off of the suboptimal Wiener filter
     - ``ALPHA_GRID_STEP``: grid resolution of the attenuation coefficient
     - ``GAMMA_ICI``: threshold of the intersection of confidence intervals
     - ``ICI_WINDOWS``: candidate half-widths of the LPA windows

    Variance stabilization

     - ``GAT_Y_MAX``: upper bound of the tabulated exact unbiased inverse
     - ``GAT_Y_STEP``: grid step of the table
     - ``GAT_TAIL``: omitted Poisson mass allowed in the series
     - ``GAT_HERMITE_NODES``: Gauss-Hermite nodes of the Gaussian-aware table
     - ``MAD_CONSTANT``: normal-consistency constant of the median absolute deviation

    Quality metrics

     - ``PSNR_CAP``: PSNR reported for identical images, in dB
     - ``SSIM_K1``, ``SSIM_K2``: stabilizing constants
     - ``SSIM_SIGMA``: standard deviation of the Gaussian window
     - ``SSIM_WIN``: side of the Gaussian window
    """
    return 0

#-------------------------------
# Patches and windows
#-------------------------------
PATCH_SIZE          = 8                 # Patch side d
WINDOW_SIZE         = 128               # Sliding window side W_s
WINDOW_STEP         = 96                # Window step (32-pixel overlap at W_s = 128)
PATCH_STRIDE        = 1                 # Patch stride inside a window

#-------------------------------
# Adaptive clustering
#-------------------------------
L_T                 = 200               # Size gate [patches]
RHO_AMP             = 0.7               # Amplification coefficient
EPSILON             = 1.3e-10           # Merging probability of noise-perturbed centers
KMEANS_MAX_ITER     = 50                # Lloyd iterations
KMEANS_TOL          = 1e-4              # Centroid movement [units of data std]
STAGE1_AREA         = 256*256           # Window area per first-stage cluster [pixels]
STAGE1_MIN_CLUSTERS = 4                 # Minimum number of first-stage clusters
MIN_CLUSTER_SIZE    = 32                # Smallest cluster kept after merging [patches]

#-------------------------------
# Transform-domain filtering
#-------------------------------
MU                  = 1.1               # Edge correction coefficient
MIN_RANK_SAMPLES    = 4                 # Minimum cluster size for rank selection
BETA                = 0.7               # Suboptimal Wiener trade-off
ALPHA_GRID_STEP     = 0.005             # Grid step for the attenuation coefficient
GAMMA_ICI           = 2.0               # ICI threshold
ICI_WINDOWS         = (1, 2, 3, 5, 8, 13, 21, 34, 55)  # LPA half-widths

#-------------------------------
# Variance stabilization
#-------------------------------
GAT_Y_MAX           = 1000.             # Table upper bound [counts]
GAT_Y_STEP          = 0.05              # Table step [counts]
GAT_TAIL            = 1e-12             # Omitted Poisson mass
GAT_HERMITE_NODES   = 40                # Quadrature nodes for the Gaussian part
GAT_ZERO            = 2.*np.sqrt(3./8.) # Stabilized value of a zero count
MAD_CONSTANT        = 0.6745            # Normal consistency of the MAD

#-------------------------------
# Quality metrics
#-------------------------------
PSNR_CAP            = 99.               # [dB]
SSIM_K1             = 0.01
SSIM_K2             = 0.03
SSIM_SIGMA          = 1.5
SSIM_WIN            = 11
