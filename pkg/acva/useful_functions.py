import numpy as np

#-------------------------------------------------------------------------------
# AXIS ORIGINS
#-------------------------------------------------------------------------------
def axis_origins(length, size, step):
    """
    Starting positions of segments of a given size that cover a 1-D range.
    Positions are the multiples of `step`; the last one is clamped to ``length-size``
    so that the end of the range is always covered. Duplicates are removed.

    :type length: int
    :param length: Length of the range.

    :type size: int
    :param size: Length of each segment. Must not exceed `length`.

    :type step: int
    :param step: Distance between two consecutive positions, at least 1.

    :return: sorted array of int
    """
    assert size <= length, "Segment of size %i longer than the range (%i)" %(size, length)
    assert step >= 1, "Step must be at least 1, found %i" %step
    last    = length - size
    origins = np.arange(0, last + 1, step)
    origins = np.unique(np.append(np.minimum(origins, last), last))
    return origins.astype(int)


#-------------------------------------------------------------------------------
# CLAMPED WINDOW SUMS
#-------------------------------------------------------------------------------
def clamped_window_sums(y, h):
    """
    Sums and number of points of a 1-D sequence over the windows :math:`[n-h, n+h]`,
    truncated to the sequence boundaries, for every point `n`.
    The window half-width can be a scalar or an array with one value per point.
    The sums are obtained from cumulative sums, so the cost does not depend on `h`.

    :type y: array
    :param y: Sequence of length `L`.

    :type h: int or array of int
    :param h: Half-width(s) of the windows.

    :return: two arrays of length `L`: sums and number of points in each window.
    """
    y  = np.asarray(y, dtype = float)
    L  = len(y)
    n  = np.arange(L)
    h  = np.broadcast_to(np.asarray(h, dtype = int), (L,))
    lo = np.maximum(n-h, 0)
    hi = np.minimum(n+h, L-1)
    cs = np.concatenate([[0.], np.cumsum(y)])
    return cs[hi+1]-cs[lo], (hi-lo+1).astype(float)


#-------------------------------------------------------------------------------
# SEED STREAM
#-------------------------------------------------------------------------------
def seed_stream(seed, *keys):
    """
    Independent random generator derived deterministically from a base seed and any number of
    integer keys (e.g. a window index). The same seed and keys always give the same stream,
    regardless of the order in which the streams are created.

    :type seed: int
    :param seed: Base seed.

    :param keys: Non-negative integers identifying the stream.

    :return: ``numpy.random.Generator``
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed)] + [int(k) for k in keys]))


#-------------------------------------------------------------------------------
# ROUND HALF AWAY FROM ZERO
#-------------------------------------------------------------------------------
def round_half_away(x):
    """
    Rounds to the nearest integer, ties away from zero (NumPy rounds ties to even).

    :type x: array
    :param x: Values to round.

    :return: array of floats
    """
    x = np.asarray(x, dtype = float)
    return np.sign(x)*np.floor(np.abs(x)+0.5)
