import numpy as np
import scipy.special as ss
import scipy.optimize as so
import scipy.spatial.distance as ssd
import warnings
import acva.constants as const


class KExceedsPoints(ValueError):
    """Raised when more clusters than points are requested."""


def _generator(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


#==================
# CLUSTER SET
#==================
class cluster_set():
    """
    Partition of the columns of a patch matrix.

    :param member_lists: One array of column indices per cluster. The lists must be non-empty, disjoint and cover every column.
    :type member_lists: list of arrays of int

    :param centroids: :math:`M \\times K` matrix of cluster centers, one column per cluster.
    :type centroids: 2D array

    After initialization, the following quantities will be stored

     - ``self.member_lists`` (`list`) - Ordered member indices of each cluster.
     - ``self.sizes`` (`array`) - Number of members of each cluster.
     - ``self.centroids`` (`2D array`) - :math:`M \\times K` cluster centers.
     - ``self.assignments`` (`array`) - Cluster id of every column.
    """
    def __init__(self, member_lists, centroids):
        self.member_lists = [np.asarray(m, dtype = int) for m in member_lists]
        self.sizes        = np.array([len(m) for m in self.member_lists], dtype = int)
        self.centroids    = np.asarray(centroids, dtype = float).reshape(-1, len(self.member_lists))
        assert np.all(self.sizes > 0), "Clusters must not be empty"

        L = self.sizes.sum()
        self.assignments = np.full(L, -1, dtype = int)
        for k, m in enumerate(self.member_lists):
            self.assignments[m] = k
        assert np.all(self.assignments >= 0), "Clusters must be disjoint and cover the %i columns" %L

    @classmethod
    def from_members(cls, vectors, member_lists):
        """
        Clusters whose centers are the means of their members.

        :type vectors: 2D array
        :param vectors: :math:`M \\times L` matrix of stretched patches.

        :type member_lists: list of arrays of int
        :param member_lists: Column indices of each cluster.

        :return: ``cluster_set`` instance
        """
        centroids = np.column_stack([vectors[:, m].mean(axis = 1) for m in member_lists])
        return cls(member_lists, centroids)

    @property
    def K(self):
        return len(self.member_lists)


#-------------------------------------------------------------------------------
# K-MEANS
#-------------------------------------------------------------------------------
def _kmeans_pp(X, k, rng):
    # k-means++ seeding: each new center drawn with probability proportional to D^2
    L       = len(X)
    chosen  = np.zeros(L, dtype = bool)
    idx     = int(rng.integers(L))
    chosen[idx] = True
    centers = [X[idx]]
    d2      = np.sum((X-X[idx])**2., axis = 1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0.:
            idx = int(rng.choice(np.flatnonzero(~chosen)))
        else:
            idx = int(rng.choice(L, p = d2/total))
        chosen[idx] = True
        centers.append(X[idx])
        d2 = np.minimum(d2, np.sum((X-X[idx])**2., axis = 1))
    return np.array(centers)


def kmeans(vectors, k, seed = 0, max_iter = const.KMEANS_MAX_ITER, tol = const.KMEANS_TOL):
    """
    Lloyd's algorithm from a k-means++ initialization.
    Points are assigned to the nearest center (ties to the lowest id), and centers are moved to
    the mean of their points until the total center movement falls below ``tol`` times the
    standard deviation of the data, or `max_iter` iterations are done.
    An emptied cluster is reseeded with the point farthest from its own center.

    :type vectors: 2D array
    :param vectors: :math:`M \\times L` matrix, one point per column.

    :type k: int
    :param k: Number of clusters, :math:`1 \\le k \\le L`.

    :type seed: int or ``numpy.random.Generator``, default = 0
    :param seed: Seed (or generator) of the initialization.

    :type max_iter: int, default = 50
    :param max_iter: Maximum number of iterations.

    :type tol: float, default = 1e-4
    :param tol: Relative stopping tolerance.

    :return: ``cluster_set`` instance, members in ascending order.
    """
    vectors = np.asarray(vectors, dtype = float)
    X       = vectors.T
    L       = len(X)
    if k < 1 or k > L:
        raise KExceedsPoints("Cannot split %i points into %i clusters" %(L, k))
    rng     = _generator(seed)
    C       = _kmeans_pp(X, k, rng)
    xx      = np.sum(X**2., axis = 1)
    tol_abs = tol*np.std(X)
    rows    = np.arange(L)

    for _ in range(max_iter):
        dist   = np.maximum(xx[:,None] - 2.*X@C.T + np.sum(C**2., axis = 1)[None,:], 0.)
        labels = np.argmin(dist, axis = 1)
        counts = np.bincount(labels, minlength = k)
        for j in np.flatnonzero(counts == 0):
            own  = dist[rows, labels]
            own[counts[labels] <= 1] = -1.
            far  = int(np.argmax(own))
            warnings.warn("K-means: empty cluster %i reseeded with point %i" %(j, far))
            counts[labels[far]] -= 1
            labels[far] = j
            counts[j]   = 1
        newC = np.zeros_like(C)
        np.add.at(newC, labels, X)
        newC  = newC/counts[:,None]
        shift = np.sum(np.sqrt(np.sum((newC-C)**2., axis = 1)))
        C     = newC
        if shift < tol_abs:
            break

    order   = np.argsort(labels, kind = 'stable')
    members = np.split(order, np.cumsum(counts)[:-1])
    return cluster_set(members, C.T)


#-------------------------------------------------------------------------------
# OVER-CLUSTERING
#-------------------------------------------------------------------------------
def over_cluster(patches, window_dims, d = const.PATCH_SIZE, seed = 0):
    """
    Two-stage divide and conquer over-clustering of the patches of a window.
    The first stage splits the patches into :math:`K^1 = \\max(\\lfloor st/256^2 \\rfloor, 4)` clusters
    (:math:`s \\times t` being the window size). Each first-stage cluster of :math:`L_k` patches is then
    split into :math:`K^2_k = \\max(\\lfloor L_k/d^2 \\rfloor, 1)` clusters. The number of clusters never
    exceeds the number of patches.

    :type patches: ``patch_set`` instance
    :param patches: Patches of the window.

    :type window_dims: 2-uple of int
    :param window_dims: ``(s, t)`` size of the window.

    :type d: int, default = 8
    :param d: Patch side.

    :type seed: int or ``numpy.random.Generator``, default = 0
    :param seed: Seed (or generator) shared by all the K-means runs.

    :return: ``cluster_set`` instance
    """
    vectors = patches.vectors
    L       = vectors.shape[1]
    assert L > 0, "Empty patch set"
    rng     = _generator(seed)
    s, t    = window_dims
    K1      = min(max(int(s*t)//const.STAGE1_AREA, const.STAGE1_MIN_CLUSTERS), L)
    stage1  = kmeans(vectors, K1, seed = rng)

    members, centroids = [], []
    for group in stage1.member_lists:
        K2 = max(len(group)//(d*d), 1)
        if K2 == 1:
            members.append(group)
            centroids.append(vectors[:, group].mean(axis = 1))
            continue
        stage2 = kmeans(vectors[:, group], K2, seed = rng)
        for k, sub in enumerate(stage2.member_lists):
            members.append(group[sub])
            centroids.append(stage2.centroids[:, k])
    return cluster_set(members, np.column_stack(centroids))


#==================
# MERGING
#==================
class merge_config():
    """
    Parameters of the iterative merging.

    :param xi: Merge threshold, in squared signal units (see :func:`acva.clustering.merge_threshold`).
    :type xi: float

    :param L_T: Size gate. Distances between two clusters both larger than `L_T` are amplified.
    :type L_T: int, default = 200

    :param rho_amp: Amplification coefficient, in (0,1]. 1 disables the amplification.
    :type rho_amp: float, default = 0.7

    :param epsilon: Tail probability the threshold was derived from.
    :type epsilon: float, default = 1.3e-10
    """
    def __init__(self, xi, L_T = const.L_T, rho_amp = const.RHO_AMP, epsilon = const.EPSILON):
        assert xi > 0., "Merge threshold must be positive, found %s" %xi
        assert 0. < rho_amp <= 1., "Amplification coefficient must lie in (0,1], found %s" %rho_amp
        assert 0. < epsilon < 1., "epsilon must lie in (0,1), found %s" %epsilon
        assert L_T >= 0, "Size gate must be non-negative, found %s" %L_T
        self.xi      = float(xi)
        self.L_T     = int(L_T)
        self.rho_amp = float(rho_amp)
        self.epsilon = float(epsilon)


def merge_threshold(sigma, M = const.PATCH_SIZE**2, epsilon = const.EPSILON):
    """
    Merge threshold :math:`\\xi = \\sigma^2 Q`, where :math:`Q` is the lower :math:`\\epsilon`-quantile
    of the :math:`\\chi^2` distribution with `M` degrees of freedom. :math:`Q` is the root of
    :math:`P(M/2, Q/2) = \\epsilon`, `P` being the regularized lower incomplete gamma function.
    For :math:`M = 64` and :math:`\\epsilon = 1.3 \\cdot 10^{-10}` one has :math:`\\xi \\approx 16 \\sigma^2`.

    :type sigma: float
    :param sigma: Noise standard deviation.

    :type M: int, default = 64
    :param M: Dimension of the patch vectors.

    :type epsilon: float, default = 1.3e-10
    :param epsilon: Tail probability.

    :return: float
    """
    assert sigma > 0., "sigma must be positive, found %s" %sigma
    assert M >= 1, "M must be at least 1, found %s" %M
    cdf = lambda q: ss.gammainc(M/2., q/2.) - epsilon
    hi  = float(M)
    while cdf(hi) <= 0.:
        hi *= 2.
    Q = so.brentq(cdf, 0., hi, xtol = 1e-14, rtol = 1e-14, maxiter = 500)
    return sigma**2.*Q


def effective_distance(centroid_a, centroid_b, size_a, size_b, cfg):
    """
    Squared between-cluster distance, divided by the amplification coefficient when both
    clusters are larger than the size gate.

    :type centroid_a: array
    :param centroid_a: Center of the first cluster.

    :type centroid_b: array
    :param centroid_b: Center of the second cluster.

    :type size_a: int
    :param size_a: Size of the first cluster.

    :type size_b: int
    :param size_b: Size of the second cluster.

    :type cfg: ``merge_config`` instance
    :param cfg: Merging parameters.

    :return: float
    """
    D2 = float(np.sum((np.asarray(centroid_a, dtype = float)-np.asarray(centroid_b, dtype = float))**2.))
    if min(size_a, size_b) > cfg.L_T:
        return D2/cfg.rho_amp
    return D2


def _pairwise_effective(centroids, sizes, cfg):
    D2   = ssd.squareform(ssd.pdist(centroids.T, 'sqeuclidean'))
    gate = np.minimum(sizes[:,None], sizes[None,:]) > cfg.L_T
    return np.where(gate, D2/cfg.rho_amp, D2)


def iterative_merge(clusters, cfg):
    """
    Iterative merging of an over-clustered set.
    At every round the effective distances of all pairs are sorted (ties by the lower pair of ids)
    and the pairs below the threshold are merged greedily, each cluster taking part in at most one
    merge per round. Merged clusters take the size-weighted mean of the two centers and the member
    list of the lower id followed by that of the higher id. Rounds are repeated until every
    remaining pair is at an effective distance not below the threshold.

    :type clusters: ``cluster_set`` instance
    :param clusters: Initial clusters.

    :type cfg: ``merge_config`` instance
    :param cfg: Merging parameters.

    :return: ``cluster_set`` instance
    """
    members   = list(clusters.member_lists)
    centroids = clusters.centroids.copy()
    sizes     = clusters.sizes.astype(float)

    while len(members) > 1:
        D       = _pairwise_effective(centroids, sizes, cfg)
        i, j    = np.triu_indices(len(members), 1)
        below   = D[i, j] < cfg.xi
        if not np.any(below):
            break
        i, j, dist = i[below], j[below], D[i[below], j[below]]
        partner = np.full(len(members), -1, dtype = int)
        for n in np.lexsort((j, i, dist)):
            if partner[i[n]] < 0 and partner[j[n]] < 0:
                partner[i[n]], partner[j[n]] = j[n], i[n]

        new_members, new_centroids, new_sizes = [], [], []
        for a in range(len(members)):
            b = partner[a]
            if b < 0:
                new_members.append(members[a])
                new_centroids.append(centroids[:, a])
                new_sizes.append(sizes[a])
            elif a < b:
                size = sizes[a]+sizes[b]
                new_members.append(np.concatenate([members[a], members[b]]))
                new_centroids.append((sizes[a]*centroids[:, a]+sizes[b]*centroids[:, b])/size)
                new_sizes.append(size)
        members   = new_members
        centroids = np.column_stack(new_centroids)
        sizes     = np.array(new_sizes)

    return cluster_set(members, centroids)


def absorb_small_clusters(clusters, min_size = const.MIN_CLUSTER_SIZE):
    """
    Clusters with fewer than `min_size` members are absorbed by the nearest cluster (squared centroid
    distance, ties to the lowest id) that has at least `min_size` members. The mean of :math:`L`
    pure-noise patches lies at about :math:`M\\sigma^2/L` from the true center, within the merge threshold
    only for large enough :math:`L`.
    Absorbed members follow those of the receiving cluster; centers are the size-weighted means.
    If no cluster reaches `min_size` the set is returned unchanged.

    :type clusters: ``cluster_set`` instance
    :param clusters: Merged clusters.

    :type min_size: int, default = 32
    :param min_size: Smallest cluster kept on its own. Values up to 1 disable the absorption.

    :return: ``cluster_set`` instance
    """
    sizes = clusters.sizes
    large = np.flatnonzero(sizes >= min_size)
    small = np.flatnonzero(sizes < min_size)
    if len(large) == 0 or len(small) == 0:
        return clusters

    D2      = ssd.cdist(clusters.centroids[:, small].T, clusters.centroids[:, large].T, 'sqeuclidean')
    target  = large[np.argmin(D2, axis = 1)]
    members = {k: [clusters.member_lists[k]] for k in large}
    weights = {k: sizes[k]*clusters.centroids[:, k] for k in large}
    for k, t in zip(small, target):
        members[t].append(clusters.member_lists[k])
        weights[t] = weights[t] + sizes[k]*clusters.centroids[:, k]

    new_members, new_centroids = [], []
    for k in large:
        merged = np.concatenate(members[k])
        new_members.append(merged)
        new_centroids.append(weights[k]/len(merged))
    return cluster_set(new_members, np.column_stack(new_centroids))


#-------------------------------------------------------------------------------
# LABEL MAP
#-------------------------------------------------------------------------------
def label_map(clusters, coords, window_shape):
    """
    Per-pixel cluster labels of a window, for visual inspection. Each pixel takes the label of the
    patch whose top-left corner is the closest patch origin (pixels of the bottom and right
    borders, where no patch starts, take the label of the last origin).

    :type clusters: ``cluster_set`` instance
    :param clusters: Clusters of the window patches.

    :type coords: 2D array of int
    :param coords: ``(L, 2)`` top-left corners of the patches, on a regular grid.

    :type window_shape: 2-uple of int
    :param window_shape: Size of the window.

    :return: 2D array of int
    """
    coords = np.asarray(coords, dtype = int)
    rows   = np.unique(coords[:,0])
    cols   = np.unique(coords[:,1])
    grid   = np.zeros((len(rows), len(cols)), dtype = int)
    grid[np.searchsorted(rows, coords[:,0]), np.searchsorted(cols, coords[:,1])] = clusters.assignments

    def nearest(origins, n):
        pix = np.arange(n)
        idx = np.clip(np.searchsorted(origins, pix), 0, len(origins)-1)
        prv = np.clip(idx-1, 0, len(origins)-1)
        return np.where(np.abs(origins[prv]-pix) <= np.abs(origins[idx]-pix), prv, idx)

    return grid[nearest(rows, window_shape[0])][:, nearest(cols, window_shape[1])]
