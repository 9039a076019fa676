import numpy as np
import acva.constants as const


#==================
# PCA DECOMPOSITION
#==================
class pca_decomposition():
    """
    PCA of a cluster matrix :math:`X` (:math:`M \\times L`).

    :param mean: Mean column :math:`E(X)`.
    :type mean: array of length `M`

    :param basis: :math:`M \\times R_{full}` orthonormal eigenvectors :math:`u_i`, :math:`R_{full} = \\min(M,L)`.
    :type basis: 2D array

    :param eigenvalues: Eigenvalues :math:`\\lambda_i` of :math:`X_c X_c^T/L`, descending.
    :type eigenvalues: array

    :param coeffs: :math:`R_{full} \\times L` matrix, row `i` holding the coefficients :math:`p_i = u_i^T X_c` of dimension `i`.
    :type coeffs: 2D array
    """
    def __init__(self, mean, basis, eigenvalues, coeffs):
        self.mean        = mean
        self.basis       = basis
        self.eigenvalues = eigenvalues
        self.coeffs      = coeffs

    def reconstruct(self, R = None, coeffs = None):
        """
        Inverse transform from the first `R` dimensions, :math:`E(X) + U_R P_R`.

        :type R: int, default = None
        :param R: Number of dimensions kept. All if None.

        :type coeffs: 2D array, default = None
        :param coeffs: :math:`R \\times L` coefficients to use instead of the stored ones (e.g. filtered ones).

        :return: 2D array, :math:`M \\times L`
        """
        if coeffs is None:
            R      = self.basis.shape[1] if R is None else R
            coeffs = self.coeffs[:R]
        R = len(coeffs)
        return self.mean[:,None] + self.basis[:, :R]@coeffs


def pca_decompose(cluster):
    """
    PCA of a cluster matrix through the singular value decomposition of the centered matrix
    :math:`X_c = X - E(X)`, with :math:`\\lambda_i = s_i^2/L`. Each basis vector is signed so that
    its largest-magnitude entry is positive.

    :type cluster: 2D array
    :param cluster: :math:`M \\times L` matrix, one stretched patch per column.

    :return: ``pca_decomposition`` instance
    """
    X    = np.asarray(cluster, dtype = float)
    M, L = X.shape
    assert L >= 1, "Empty cluster"
    mean = X.mean(axis = 1)
    Xc   = X - mean[:,None]
    U, s, _ = np.linalg.svd(Xc, full_matrices = False)
    lead  = np.argmax(np.abs(U), axis = 0)
    signs = np.sign(U[lead, np.arange(U.shape[1])])
    signs[signs == 0.] = 1.
    U = U*signs[None,:]
    return pca_decomposition(mean, U, s**2./L, U.T@Xc)


#==================
# RANK SELECTION
#==================
class rank_selection():
    """
    Result of :func:`acva.spectral.select_rank`: rank `R`, edge ``lambda_edge`` and correction ``mu``.
    """
    def __init__(self, R, lambda_edge, mu):
        assert R >= 1, "Rank must be at least 1"
        self.R           = int(R)
        self.lambda_edge = float(lambda_edge)
        self.mu          = float(mu)


def mp_edge(sigma, M, L):
    """
    Upper edge of the Marchenko-Pastur law, :math:`\\sigma^2 (1+\\sqrt{M/L})^2`: largest eigenvalue of the
    sample covariance of `L` samples of `M`-dimensional white noise, asymptotically.

    :type sigma: float
    :param sigma: Noise standard deviation.

    :type M: int
    :param M: Dimension.

    :type L: int
    :param L: Number of samples.

    :return: float
    """
    assert M >= 1 and L >= 1, "M and L must be at least 1"
    assert sigma >= 0., "sigma must be non-negative"
    return sigma**2.*(1.+np.sqrt(M/L))**2.


def select_rank(eigenvalues, sigma, M, L, mu = const.MU):
    """
    Number of eigenvalues above the corrected noise edge, :math:`R = \\sum_i 1(\\lambda_i > \\mu \\lambda_{n+})`,
    floored at 1.

    :type eigenvalues: array
    :param eigenvalues: Eigenvalues, descending.

    :type sigma: float
    :param sigma: Noise standard deviation.

    :type M: int
    :param M: Dimension.

    :type L: int
    :param L: Number of samples.

    :type mu: float, default = 1.1
    :param mu: Correction coefficient.

    :return: ``rank_selection`` instance
    """
    edge = mp_edge(sigma, M, L)
    R    = int(np.sum(np.asarray(eigenvalues) > mu*edge))
    return rank_selection(max(R, 1), edge, mu)
