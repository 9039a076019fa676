import numpy as np
import pytest
import acva.patching as PT

######################
# Test of patching
######################
# Sliding windows, patch extraction, aggregation and image files.

#------------------------------
# Windows
#------------------------------
def test_single_window():
    assert PT.tile_windows(128, 128, 128, 96) == [(0,0)]


def test_window_origins():
    origins = PT.tile_windows(256, 256, 128, 96)
    assert len(origins) == 9
    assert sorted(set(r for r, _ in origins)) == [0, 96, 128]
    assert origins == sorted(origins)


@pytest.mark.parametrize("height, width, size, step", [(256, 300, 128, 96), (130, 131, 64, 50), (40, 90, 40, 7)])
def test_windows_cover_image(height, width, size, step):
    covered = np.zeros((height, width), dtype = bool)
    for r, c in PT.tile_windows(height, width, size, step):
        assert r+size <= height and c+size <= width
        covered[r:r+size, c:c+size] = True
    assert covered.all()


def test_window_larger_than_image():
    with pytest.raises(PT.WindowLargerThanImage):
        PT.tile_windows(100, 200, 128, 96)


#------------------------------
# Patch extraction
#------------------------------
def test_patch_counts():
    img = np.arange(128*128.).reshape(128,128)
    assert PT.extract_patches(img, (0,0), 128, 8, 1).L == 121**2
    single = PT.extract_patches(img, (10,20), 8, 8, 1)
    assert single.L == 1
    assert np.array_equal(single.vectors[:,0], img[10:18, 20:28].ravel())


def test_patches_are_exact_copies():
    rng = np.random.default_rng(0)
    img = rng.normal(size = (70, 90))
    ps  = PT.extract_patches(img, (5, 7), (40, 50), 6, 3)
    assert ps.M == 36
    assert ps.window_origin == (5, 7)
    assert ps.L == len(np.unique(ps.coords[:,0]))*len(np.unique(ps.coords[:,1]))
    assert ps.coords[:,0].max() == 40-6 and ps.coords[:,1].max() == 50-6
    for j in range(0, ps.L, 17):
        r, c = ps.coords[j] + np.array([5, 7])
        assert np.array_equal(ps.vectors[:, j], img[r:r+6, c:c+6].ravel())


def test_bad_geometry():
    img = np.zeros((64,64))
    with pytest.raises(PT.BadGeometry):
        PT.extract_patches(img, (10,0), 64, 8, 1)
    with pytest.raises(PT.BadGeometry):
        PT.extract_patches(img, (0,0), 16, 20, 1)


#------------------------------
# Aggregation
#------------------------------
def test_extract_aggregate_identity():
    rng = np.random.default_rng(1)
    img = rng.uniform(0., 255., (48, 40))
    ps  = PT.extract_patches(img, (0,0), (48, 40), 8, 1)
    out = PT.aggregation_buffer(img.shape).deposit_many(ps.vectors, ps.coords).finalize()
    assert np.max(np.abs(out-img)) < 1e-12


def test_deposit_average():
    buf = PT.aggregation_buffer((3,3))
    buf.deposit(np.full(4, 10.), (0,0))
    buf.deposit(np.full(4, 20.), (1,1))
    buf.deposit(np.full(4, 0.), (0,1), weight = 0.)
    buf.deposit(np.full(4, 0.), (1,0), weight = 0.)
    with pytest.raises(PT.UncoveredPixel):
        buf.finalize()
    buf.deposit(np.array([5., 5., 5., 5.]), (1,0))
    buf.deposit(np.array([5., 5., 5., 5.]), (0,1))
    out = buf.finalize()
    assert np.isclose(out[1,1], (10.+20.+5.+5.)/4.)
    assert out[0,0] == 10.
    assert out[2,2] == 20.


def test_deposit_out_of_bounds():
    with pytest.raises(PT.OutOfBounds):
        PT.aggregation_buffer((4,4)).deposit(np.zeros(9), (2,0))


def test_deposit_many_matches_dense_average():
    rng     = np.random.default_rng(2)
    vectors = rng.normal(size = (16, 200))
    coords  = rng.integers(0, 17, size = (200, 2))
    weights = rng.uniform(0.5, 2., 200)
    fast    = PT.aggregation_buffer((20,20)).deposit_many(vectors, coords, weights)
    slow    = PT.aggregation_buffer((20,20))
    for j in range(200):
        slow.deposit(vectors[:,j], coords[j], weights[j])
    assert np.allclose(fast.sum, slow.sum) and np.allclose(fast.weight, slow.weight)


def test_uniform_weights_and_merge():
    img   = np.arange(36.).reshape(6,6)
    part  = PT.aggregation_buffer((4,6))
    part.sum, part.weight = 2.*img[:4], np.full((4,6), 2.)
    total = PT.aggregation_buffer((6,6)).merge(part, (0,0))
    total.deposit(img[2:6, 0:4], (2,0)).deposit(img[2:6, 2:6], (2,2))
    assert np.allclose(total.finalize(), img)
    assert np.all(PT.aggregation_buffer((2,2)).deposit(np.zeros(4), (0,0)).finalize() == 0.)


#------------------------------
# Files
#------------------------------
@pytest.mark.parametrize("name, peak, plain", [('a.pgm', 255., False), ('b.pgm', 65535., False),
                                               ('c.pgm', 255., True), ('d.png', 255., False), ('e.png', 65535., False)])
def test_image_files(tmp_path, name, peak, plain):
    rng  = np.random.default_rng(3)
    img  = rng.uniform(-10., peak+10., (13, 17))
    path = str(tmp_path/name)
    PT.write_image(path, img, peak, plain = plain)
    data, read_peak = PT.read_image(path)
    expected = np.sign(img)*np.floor(np.abs(np.clip(img, 0., peak))+0.5)
    assert read_peak == peak
    assert np.array_equal(data, expected)


def test_rounding_half_away_from_zero(tmp_path):
    path = str(tmp_path/'r.pgm')
    PT.write_image(path, np.array([[0.5, 1.5, 2.5, 254.5]]), 255.)
    assert np.array_equal(PT.read_image(path)[0], [[1., 2., 3., 255.]])


def test_label_map_file(tmp_path):
    path = str(tmp_path/'labels.pgm')
    PT.write_label_map(path, np.array([[0, 1], [2, 3]]))
    data, _ = PT.read_image(path)
    assert np.array_equal(data, [[0., 85.], [170., 255.]])


if __name__ == '__main__':
    import matplotlib.pyplot as plt
    plt.rc('font', family = 'serif', size = 15)

    #------------------------------
    # Number of deposits per pixel
    #------------------------------
    H, W  = 300, 250
    total = PT.aggregation_buffer((H, W))
    for origin in PT.tile_windows(H, W, 128, 96):
        ps = PT.extract_patches(np.zeros((H, W)), origin, 128, 8, 1)
        total.merge(PT.aggregation_buffer((128,128)).deposit_many(ps.vectors, ps.coords), origin)

    plt.figure(figsize = (10,8))
    plt.imshow(total.weight, cmap = 'viridis')
    plt.colorbar(label = 'deposits')
    plt.title('Aggregation weights, $W_s = 128$, step 96')
    plt.show()
