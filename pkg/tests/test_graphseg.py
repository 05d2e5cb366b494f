import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import canonical, components, flood_components, grid_edge_list, naive_segment
from rgbdseg.graphseg import (
    FrameCues,
    Region,
    SegParams,
    Segmentation,
    WeightedGridGraph,
    build_grid_graph,
    color_difference,
    edge_boundary,
    extract_regions,
    grid_edges,
    relabel_raster,
    segment_graph,
    weight_w1,
    weight_w2,
)
from rgbdseg.imgcore import rgb_to_hsv

PROFILE_K = {
    "rutgers": dict(k_x=1.05, k_y=1.5, k_s=0.5),
    "rgbd_scenes": dict(k_x=7.5, k_b=0.66),
    "multi_instance": dict(k_x=1.2, k_b=0.05),
}


def graph_from(h, w, weights, connectivity=8):
    i, j = grid_edges(h, w, connectivity)
    return WeightedGridGraph((h, w), i, j, np.asarray(weights, dtype=np.float64))


# -- parameters and weights ---------------------------------------------------

def test_params_validated():
    with pytest.raises(ValueError):
        SegParams(gamma=0)
    with pytest.raises(ValueError):
        SegParams(k_x=-1)
    with pytest.raises(ValueError):
        SegParams(weight_mode="w3")
    with pytest.raises(ValueError):
        SegParams(connectivity=6)


def test_color_difference_examples():
    assert color_difference((10, 0.3, 0.4), (10, 0.3, 0.4)) == 0
    raw = np.sqrt(4.5 ** 2 + (0.1 * 2) ** 2) / np.sqrt(4.5 ** 2 + 0.1 ** 2)
    assert abs(raw - 1.0007) < 1e-4
    assert color_difference((0, 1, 1), (180, 1, 0)) == 1.0
    assert color_difference((0, 0, 0.5), (90, 0, 0.5)) == 0


def test_color_difference_hue_wraps():
    a = color_difference((350, 0.8, 0.5), (10, 0.8, 0.5))
    b = color_difference((0, 0.8, 0.5), (20, 0.8, 0.5))
    assert abs(a - b) < 1e-12


def test_color_difference_vectorized():
    rng = np.random.default_rng(0)
    hsv = rgb_to_hsv(rng.integers(0, 256, (5, 8, 3), dtype=np.uint8)).reshape(-1, 3)
    vec = color_difference(hsv[:-1], hsv[1:])
    ref = [color_difference(a, b) for a, b in zip(hsv[:-1], hsv[1:])]
    np.testing.assert_allclose(vec, ref, rtol=0, atol=1e-15)


def test_w1_examples():
    k = PROFILE_K["rutgers"]
    assert weight_w1(0, 0, 0, **k) == 0.0
    assert weight_w1(1, 1, 1, **k) == 1.0
    assert abs(weight_w1(1, 0, 0, **k) - 1.5 / 5.05) < 1e-15


def test_w2_examples():
    k = PROFILE_K["rgbd_scenes"]
    assert weight_w2(0, 0, 0, **k) == 0.0
    assert weight_w2(1, 1, 1, **k) == 1.0
    assert abs(weight_w2(0, 1, 1, **k) - 0.66 / 8.16) < 1e-15


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 20), st.floats(0, 20), st.floats(0, 20))
def test_w1_unit_corner_exact_for_any_k(kx, ky, ks):
    assert weight_w1(1, 1, 1, kx, ky, ks) == 1.0


def test_weights_in_unit_range_vectorized():
    rng = np.random.default_rng(1)
    c = rng.random((3, 100000))
    c[:, :8] = [[0, 0, 1, 1, 0, 1, 0, 1], [0, 1, 0, 1, 0, 0, 1, 1], [0, 0, 0, 0, 1, 1, 1, 1]]
    for name, k in PROFILE_K.items():
        w = weight_w1(*c, **k) if "k_y" in k else weight_w2(c[0], c[1], np.round(c[2]), **k)
        assert w.min() >= 0 and w.max() <= 1, name


def test_w1_monotone_in_depth():
    grid = np.linspace(0, 1, 21)
    # the log2 depth term dominates the decreasing part of d * a**(1 + d)
    # whenever k_x is at least ~0.1, which covers every profile
    for k in ({"k_x": 1.05, "k_y": 1.5, "k_s": 0.5}, {"k_x": 0.2, "k_y": 3.0, "k_s": 2.0}):
        for a in grid:
            for s in grid:
                w = weight_w1(a, grid, s, **k)
                assert (np.diff(w) >= -1e-15).all()


# -- graph construction ---------------------------------------------------------

def test_edge_counts():
    assert len(grid_edges(2, 2)[0]) == 6
    assert len(grid_edges(3, 3)[0]) == 20
    assert len(grid_edges(3, 3, 4)[0]) == 12


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 9), st.integers(1, 9), st.sampled_from([4, 8]))
def test_edges_unique_and_adjacent(h, w, conn):
    i, j = grid_edges(h, w, conn)
    assert list(zip(i.tolist(), j.tolist())) == grid_edge_list(h, w, conn)
    pairs = {(min(a, b), max(a, b)) for a, b in zip(i.tolist(), j.tolist())}
    assert len(pairs) == len(i)
    assert (i != j).all()
    yi, xi = np.divmod(i, w)
    yj, xj = np.divmod(j, w)
    cheb = np.maximum(abs(yi - yj), abs(xi - xj))
    assert (cheb == 1).all()


def uniform_cues(h=6, w=7):
    return FrameCues(
        hsv=np.tile([30.0, 0.5, 0.5], (h, w, 1)),
        depth=np.full((h, w), 1.0),
        saliency=np.zeros((h, w)),
        boundary=np.zeros((h, w), bool),
    )


@pytest.mark.parametrize("mode", ["w1", "w2"])
def test_uniform_scene_has_zero_weights(mode):
    g = build_grid_graph(uniform_cues(), SegParams(), mode)
    assert not g.w.any()


def test_graph_requires_resolved_mode_and_cues():
    cues = uniform_cues()
    with pytest.raises(ValueError):
        build_grid_graph(cues, SegParams())
    cues.saliency = None
    with pytest.raises(ValueError):
        build_grid_graph(cues, SegParams(), "w1")


def test_edge_boundary_rule():
    b = np.zeros((3, 3), bool)
    b[0, 1] = b[1, 0] = True  # a diagonal contour
    i, j = grid_edges(3, 3)
    eb = edge_boundary(b, i, j)
    pairs = dict(zip(zip(i.tolist(), j.tolist()), eb.tolist()))
    assert pairs[(0, 4)] == 1.0  # crosses the contour between its two pixels
    assert pairs[(1, 2)] == 1.0  # touches a boundary pixel
    assert pairs[(4, 8)] == 0.0


# -- segmentation ---------------------------------------------------------------

def test_all_zero_weights_single_region():
    seg = segment_graph(graph_from(5, 6, np.zeros(len(grid_edges(5, 6)[0]))), 0.01)
    assert seg.n_regions == 1


def test_two_blocks():
    h, w = 10, 20
    hsv = np.zeros((h, w, 3))
    hsv[:, :10] = [0, 1, 1]
    hsv[:, 10:] = [200, 1, 0.2]
    depth = np.full((h, w), 0.5)
    depth[:, 10:] = 2.0
    cues = FrameCues(hsv=hsv, depth=depth, boundary=np.zeros((h, w), bool))
    g = build_grid_graph(cues, SegParams(gamma=0.0016, k_x=7.5, k_b=0.66), "w2")
    inter = g.w[(g.i % w < 10) != (g.j % w < 10)]
    assert inter.min() > 0.0016 / 100 * 10
    seg = segment_graph(g, 0.0016)
    assert seg.n_regions == 2
    assert (seg.labels[:, :10] == 0).all() and (seg.labels[:, 10:] == 1).all()


def test_huge_gamma_one_region():
    rng = np.random.default_rng(2)
    g = graph_from(8, 9, rng.random(len(grid_edges(8, 9)[0])))
    assert segment_graph(g, 1e6).n_regions == 1


def random_edges(rng, h, w, conn=8, levels=None):
    n = len(grid_edges(h, w, conn)[0])
    wts = rng.random(n)
    if levels:
        wts = np.floor(wts * levels) / levels
    return wts


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 10), st.integers(1, 10), st.integers(0, 2**31 - 1),
       st.sampled_from([0.05, 0.5, 2.0]), st.sampled_from([0, 1, 4, 9]),
       st.sampled_from([None, 3, 10]), st.sampled_from([4, 8]))
def test_matches_naive_oracle(h, w, seed, gamma, min_size, levels, conn):
    rng = np.random.default_rng(seed)
    wts = random_edges(rng, h, w, conn, levels)
    g = graph_from(h, w, wts, conn)
    edges = [(a, b, float(x)) for a, b, x in zip(g.i.tolist(), g.j.tolist(), wts)]
    ref = naive_segment(h * w, edges, gamma, min_size)
    assert canonical(segment_graph(g, gamma, min_size).labels) == canonical(ref)


def test_literal_all_processed_edges_reading_differs():
    # recomputing the internal difference over every processed edge inside a
    # region, not only the merged ones, changes some partitions
    rng = np.random.default_rng(11)
    differs = 0
    for _ in range(40):
        h, w = rng.integers(3, 9, 2)
        wts = np.round(rng.random(len(grid_edges(h, w)[0])), 2)
        g = graph_from(h, w, wts)
        edges = [(a, b, float(x)) for a, b, x in zip(g.i.tolist(), g.j.tolist(), wts)]
        differs += canonical(naive_segment(h * w, edges, 0.3, scan="processed")) != canonical(
            segment_graph(g, 0.3).labels)
    assert differs > 0


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**31 - 1))
def test_gamma_zero_gives_zero_weight_components(h, w, seed):
    rng = np.random.default_rng(seed)
    wts = np.where(rng.random(len(grid_edges(h, w)[0])) < 0.6, 0.0, rng.random(len(grid_edges(h, w)[0])))
    g = graph_from(h, w, wts)
    ref = components(h * w, list(zip(g.i.tolist(), g.j.tolist())), (wts == 0).tolist())
    assert canonical(segment_graph(g, 0.0).labels) == canonical(ref)


def test_region_count_non_increasing_in_gamma():
    ladder = [0.0, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 100.0]
    rng = np.random.default_rng(7)
    for _ in range(60):
        h, w = rng.integers(2, 13, 2)
        g = graph_from(h, w, random_edges(rng, h, w, levels=int(rng.choice([4, 50]))))
        counts = [segment_graph(g, gm).n_regions for gm in ladder]
        assert all(a >= b for a, b in zip(counts, counts[1:])), counts


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10), st.integers(1, 10), st.integers(0, 2**31 - 1),
       st.floats(0.0, 5.0), st.integers(0, 6))
def test_partition_and_connectivity(h, w, seed, gamma, min_size):
    rng = np.random.default_rng(seed)
    g = graph_from(h, w, random_edges(rng, h, w))
    seg = segment_graph(g, gamma, min_size)
    labels = seg.labels
    assert labels.shape == (h, w)
    assert set(np.unique(labels).tolist()) == set(range(seg.n_regions))
    regions = extract_regions(seg)
    assert sum(r.size for r in regions) == h * w
    for r in regions:
        comp = flood_components(r.mask((h, w)))
        assert comp.max() == 1
    if min_size and seg.n_regions > 1:
        assert min(r.size for r in regions) >= min(min_size, h * w)


def test_labels_in_raster_order():
    rng = np.random.default_rng(3)
    seg = segment_graph(graph_from(9, 9, random_edges(rng, 9, 9)), 0.2)
    first = [np.flatnonzero(seg.labels.ravel() == k)[0] for k in range(seg.n_regions)]
    assert first == sorted(first)


def test_relabel_raster():
    np.testing.assert_array_equal(relabel_raster(np.array([7, 7, 3, 9, 3])), [0, 0, 1, 2, 1])


def test_ties_broken_by_edge_index():
    # every weight equal: result must not depend on anything but the order
    g = graph_from(6, 6, np.full(len(grid_edges(6, 6)[0]), 0.5))
    a = segment_graph(g, 0.4).labels
    b = segment_graph(g, 0.4).labels
    np.testing.assert_array_equal(a, b)
    edges = [(x, y, 0.5) for x, y in zip(g.i.tolist(), g.j.tolist())]
    assert canonical(a) == canonical(naive_segment(36, edges, 0.4))


def test_extract_regions_examples():
    seg = Segmentation(np.zeros((4, 5), dtype=np.int64))
    (r,) = extract_regions(seg)
    assert r.size == 20 and r.bbox == (0, 0, 4, 3)
    lab = np.zeros((4, 5), dtype=np.int64)
    lab[:, 3:] = 1
    regs = extract_regions(Segmentation(lab))
    assert [x.size for x in regs] == [12, 8]
    assert regs[1].bbox == (3, 0, 4, 3)
    assert isinstance(regs[1], Region)


def test_extract_regions_matches_flood_fill():
    rng = np.random.default_rng(9)
    lab = (rng.random((12, 12)) < 0.5).astype(np.int64)
    lab = np.where(lab, flood_components(lab == 1), 0)
    # background may split into several pieces: label those too
    bg = flood_components(lab == 0)
    lab = np.where(lab == 0, bg + lab.max(), lab)
    lab = relabel_raster(lab.ravel()).reshape(12, 12)
    for r in extract_regions(Segmentation(lab)):
        assert flood_components(r.mask((12, 12))).max() == 1
