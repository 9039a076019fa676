import numpy as np
import os
from PIL import Image
from numpy.lib.stride_tricks import sliding_window_view
import acva.constants as const
import acva.useful_functions as UF


class WindowLargerThanImage(ValueError):
    """Raised when the sliding window does not fit in the image."""

class BadGeometry(ValueError):
    """Raised when patches do not fit in the window, or the window in the image."""

class OutOfBounds(IndexError):
    """Raised when a patch footprint falls outside the aggregation buffer."""

class UncoveredPixel(ValueError):
    """Raised when a pixel received no deposit before finalization."""


def _pair(size):
    if np.ndim(size) == 0:
        return int(size), int(size)
    return int(size[0]), int(size[1])


#-------------------------------------------------------------------------------
# SLIDING WINDOWS
#-------------------------------------------------------------------------------
def tile_windows(height, width, window_size = const.WINDOW_SIZE, step = const.WINDOW_STEP):
    """
    Origins of the sliding windows covering an image. Along each axis the origins are
    multiples of `step`, the last one being clamped to ``dim - window_size`` so that the
    border is always covered.

    :type height: int
    :param height: Image height.

    :type width: int
    :param width: Image width.

    :type window_size: int or 2-uple of int, default = 128
    :param window_size: Window side (or ``(rows, cols)``).

    :type step: int, default = 96
    :param step: Distance between two consecutive origins along an axis.

    :return: list of ``(row, col)`` tuples, row-major.
    """
    wr, wc = _pair(window_size)
    if wr > height or wc > width:
        raise WindowLargerThanImage("Window %ix%i larger than image %ix%i" %(wr, wc, height, width))
    assert step >= 1, "Window step must be at least 1, found %s" %step
    rows = UF.axis_origins(height, wr, step)
    cols = UF.axis_origins(width, wc, step)
    return [(int(r), int(c)) for r in rows for c in cols]


#==================
# PATCH SET
#==================
class patch_set():
    """
    Stretched patches of a window.

    :param d: Patch side.
    :type d: int

    :param vectors: :math:`M \\times L` matrix, :math:`M = d^2`, one stretched patch (row-major) per column.
    :type vectors: 2D array

    :param coords: ``(row, col)`` of the top-left corner of each patch, relative to the window.
    :type coords: 2D array of int, shape ``(L, 2)``

    :param window_origin: ``(row, col)`` of the window in the full image.
    :type window_origin: 2-uple of int, default = (0,0)
    """
    def __init__(self, d, vectors, coords, window_origin = (0,0)):
        vectors = np.asarray(vectors, dtype = float)
        coords  = np.asarray(coords, dtype = int).reshape(-1, 2)
        assert vectors.ndim == 2 and vectors.shape[0] == d*d, "vectors must have d^2 = %i rows" %(d*d)
        assert vectors.shape[1] == len(coords), "One coordinate per patch is required"
        self.d             = int(d)
        self.vectors       = vectors
        self.coords        = coords
        self.window_origin = tuple(int(v) for v in window_origin)

    @property
    def M(self):
        return self.vectors.shape[0]

    @property
    def L(self):
        return self.vectors.shape[1]


def extract_patches(img, origin = (0,0), window_size = const.WINDOW_SIZE, d = const.PATCH_SIZE, stride = const.PATCH_STRIDE):
    """
    Extracts the :math:`d \\times d` overlapping patches of a window and stretches them into column
    vectors. Patch positions are multiples of `stride` along each axis, the last being clamped
    to ``window_size - d``.

    :type img: 2D array
    :param img: Full image.

    :type origin: 2-uple of int, default = (0,0)
    :param origin: Top-left corner of the window.

    :type window_size: int or 2-uple of int, default = 128
    :param window_size: Window side (or ``(rows, cols)``).

    :type d: int, default = 8
    :param d: Patch side.

    :type stride: int, default = 1
    :param stride: Distance between two consecutive patches.

    :return: ``patch_set`` instance
    """
    img    = np.asarray(img, dtype = float)
    r0, c0 = int(origin[0]), int(origin[1])
    wr, wc = _pair(window_size)
    if r0 < 0 or c0 < 0 or r0+wr > img.shape[0] or c0+wc > img.shape[1]:
        raise BadGeometry("Window %ix%i at (%i,%i) outside image %ix%i" %(wr, wc, r0, c0, img.shape[0], img.shape[1]))
    if d < 1 or d > min(wr, wc):
        raise BadGeometry("Patch side %i incompatible with window %ix%i" %(d, wr, wc))
    if stride < 1:
        raise BadGeometry("Patch stride must be at least 1, found %i" %stride)

    window = img[r0:r0+wr, c0:c0+wc]
    rows   = UF.axis_origins(wr, d, stride)
    cols   = UF.axis_origins(wc, d, stride)
    blocks = sliding_window_view(window, (d, d))[rows][:, cols]
    vectors = blocks.reshape(len(rows)*len(cols), d*d).T.copy()
    rr, cc  = np.meshgrid(rows, cols, indexing = 'ij')
    coords  = np.column_stack([rr.ravel(), cc.ravel()])
    return patch_set(d, vectors, coords, window_origin = (r0, c0))


#==================
# AGGREGATION
#==================
class aggregation_buffer():
    """
    Weighted accumulator of overlapping patch estimates.

    :param shape: ``(rows, cols)`` of the target image.
    :type shape: 2-uple of int

    After initialization, the following quantities will be stored

     - ``self.sum`` (`2D array`) - Weighted sum of the deposited values.
     - ``self.weight`` (`2D array`) - Accumulated weights.
    """
    def __init__(self, shape):
        self.shape  = _pair(shape)
        self.sum    = np.zeros(self.shape)
        self.weight = np.zeros(self.shape)

    def _check_footprint(self, r, c, d):
        if r < 0 or c < 0 or r+d > self.shape[0] or c+d > self.shape[1]:
            raise OutOfBounds("Patch of side %i at (%i,%i) outside buffer %ix%i" %(d, r, c, self.shape[0], self.shape[1]))

    #-----------------------------------------------------------------------------------------
    # DEPOSIT
    #-----------------------------------------------------------------------------------------
    def deposit(self, patch_values, coord, weight = 1.):
        """
        Adds one patch estimate: ``sum += weight*patch`` and ``weight += weight`` over its footprint.

        :type patch_values: array
        :param patch_values: Stretched patch of length :math:`d^2` (or a :math:`d \\times d` block).

        :type coord: 2-uple of int
        :param coord: Top-left corner.

        :type weight: float, default = 1
        :param weight: Non-negative weight.

        :return: the buffer itself.
        """
        assert weight >= 0., "Weights must be non-negative"
        values = np.asarray(patch_values, dtype = float).ravel()
        d      = int(round(np.sqrt(values.size)))
        assert d*d == values.size, "Patch of %i values is not square" %values.size
        r, c = int(coord[0]), int(coord[1])
        self._check_footprint(r, c, d)
        self.sum[r:r+d, c:c+d]    += weight*values.reshape(d, d)
        self.weight[r:r+d, c:c+d] += weight
        return self

    def deposit_many(self, vectors, coords, weights = 1.):
        """
        Vectorized :func:`acva.patching.aggregation_buffer.deposit` of many patches at once.

        :type vectors: 2D array
        :param vectors: :math:`M \\times L` matrix of stretched patches.

        :type coords: 2D array of int
        :param coords: ``(L, 2)`` top-left corners.

        :type weights: float or array of length `L`, default = 1
        :param weights: Non-negative weights.

        :return: the buffer itself.
        """
        vectors = np.asarray(vectors, dtype = float)
        coords  = np.asarray(coords, dtype = int).reshape(-1, 2)
        M, L    = vectors.shape
        d       = int(round(np.sqrt(M)))
        assert d*d == M, "Patches of %i values are not square" %M
        weights = np.broadcast_to(np.asarray(weights, dtype = float), (L,))
        assert np.all(weights >= 0.), "Weights must be non-negative"
        if L == 0:
            return self
        if (coords.min() < 0 or coords[:,0].max()+d > self.shape[0] or coords[:,1].max()+d > self.shape[1]):
            raise OutOfBounds("Patch footprints of side %i exceed buffer %ix%i" %(d, self.shape[0], self.shape[1]))
        dr, dc = np.divmod(np.arange(M), d)
        rows   = coords[:,0][None,:] + dr[:,None]
        cols   = coords[:,1][None,:] + dc[:,None]
        np.add.at(self.sum, (rows, cols), vectors*weights[None,:])
        np.add.at(self.weight, (rows, cols), np.broadcast_to(weights[None,:], (M, L)))
        return self

    #-----------------------------------------------------------------------------------------
    # MERGE
    #-----------------------------------------------------------------------------------------
    def merge(self, other, origin = (0,0)):
        """
        Adds the sums and weights of another buffer placed at `origin`.

        :type other: ``aggregation_buffer`` instance
        :param other: Buffer to add, e.g. the private buffer of a window.

        :type origin: 2-uple of int, default = (0,0)
        :param origin: Position of `other` inside this buffer.

        :return: the buffer itself.
        """
        r, c   = int(origin[0]), int(origin[1])
        hr, hc = other.shape
        if r < 0 or c < 0 or r+hr > self.shape[0] or c+hc > self.shape[1]:
            raise OutOfBounds("Buffer %ix%i at (%i,%i) outside buffer %ix%i" %(hr, hc, r, c, self.shape[0], self.shape[1]))
        self.sum[r:r+hr, c:c+hc]    += other.sum
        self.weight[r:r+hr, c:c+hc] += other.weight
        return self

    #-----------------------------------------------------------------------------------------
    # FINALIZE
    #-----------------------------------------------------------------------------------------
    def finalize(self):
        """
        Weighted average of the deposits, ``sum/weight``.

        :return: 2D array
        """
        uncovered = self.weight <= 0.
        if np.any(uncovered):
            r, c = np.argwhere(uncovered)[0]
            raise UncoveredPixel("%i pixel(s) without deposit, first at (%i,%i)" %(uncovered.sum(), r, c))
        return self.sum/self.weight


#-------------------------------------------------------------------------------
# IMAGE I/O
#-------------------------------------------------------------------------------
def read_image(path):
    """
    Reads a grayscale PGM (P5/P2, 8 or 16 bits) or PNG image.

    :type path: string
    :param path: Input file.

    :return: 2D array (float) and peak value (255 or 65535).
    """
    with Image.open(path) as im:
        if im.mode in ('RGB', 'RGBA', 'P', 'LA'):
            im = im.convert('L')
        mode = im.mode
        data = np.asarray(im, dtype = float)
    if data.ndim != 2:
        raise ValueError("%s is not a single-channel image" %path)
    peak = 255. if mode in ('L', '1') else 65535.
    if mode == '1':
        data = data*255.
    return data, peak


def _to_integers(img, peak):
    return UF.round_half_away(np.clip(np.asarray(img, dtype = float), 0., peak))


def write_image(path, img, peak = 255., plain = False):
    """
    Writes a grayscale image. Values are clamped to ``[0, peak]`` and rounded half away from zero.
    The format follows the extension: ``.pgm`` (binary P5, or plain P2 if `plain` is True)
    or ``.png``. Images with `peak` above 255 are written with 16 bits.

    :type path: string
    :param path: Output file.

    :type img: 2D array
    :param img: Image to write.

    :type peak: float, default = 255
    :param peak: Nominal maximum, at most 65535.

    :type plain: boolean, default = False
    :param plain: Write an ASCII (P2) PGM.

    :return: Nothing.
    """
    assert 0. < peak <= 65535., "peak must lie in (0, 65535], found %s" %peak
    values = _to_integers(img, peak)
    ext    = os.path.splitext(path)[1].lower()
    wide   = peak > 255.
    if plain:
        assert ext in ('.pgm', '.pnm'), "Plain format only available for PGM files"
        maxval = 65535 if wide else 255
        header = "P2\n%i %i\n%i" %(values.shape[1], values.shape[0], maxval)
        np.savetxt(path, values.astype(int), fmt = '%i', header = header, comments = '')
        return
    if ext in ('.pgm', '.pnm'):
        im = Image.fromarray(values.astype(np.int32)) if wide else Image.fromarray(values.astype(np.uint8))
        im.save(path, 'PPM')
    elif ext == '.png':
        im = Image.fromarray(values.astype(np.uint16)) if wide else Image.fromarray(values.astype(np.uint8))
        im.save(path, 'PNG')
    else:
        raise ValueError("Unsupported image format '%s'" %ext)


def write_label_map(path, labels):
    """
    Writes a cluster label map as an 8-bit PGM, labels spread evenly over the gray levels.

    :type path: string
    :param path: Output file.

    :type labels: 2D array of int
    :param labels: Non-negative labels.

    :return: Nothing.
    """
    labels = np.asarray(labels, dtype = int)
    top    = max(labels.max(), 1)
    write_image(path, 255.*labels/top, peak = 255.)


def read_rgb_image(path):
    """
    Reads a color image and normalizes it to [0, 1].

    :type path: string
    :param path: Input file (any format Pillow reads).

    :return: 3D array ``(H, W, 3)``
    """
    with Image.open(path) as im:
        data = np.asarray(im.convert('RGB'), dtype = float)
    return data/255.
