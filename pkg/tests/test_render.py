import numpy as np
import pytest

from risklens.explain import CAP_EXCEEDED, EpisodeTrace
from risklens.render import (
    _round_half_up,
    direction_matrix,
    heatmap_pixels,
    normalize_columns,
    read_trace_csv,
    render_heatmap,
    trace_csv,
    write_ppm,
)


def read_ppm(path):
    """Test-local PPM parser, independent of the writer."""
    data = bytes(open(path, "rb").read())
    assert data.startswith(b"P6\n")
    header, rest = data.split(b"255\n", 1)
    dims = header.split(b"\n")[1].split()
    w, h = int(dims[0]), int(dims[1])
    pix = np.frombuffer(rest, dtype=np.uint8)
    assert pix.size == w * h * 3
    return pix.reshape(h, w, 3)


def make_trace(directions, distances=None, names=("x", "y")):
    t = len(directions)
    if distances is None:
        distances = tuple(range(t))
    dirs = tuple(None if d is None else np.asarray(d, dtype=float) for d in directions)
    return EpisodeTrace(tuple(names), tuple(distances), dirs, cap=6)


def test_round_half_up_ties_away_from_zero():
    x = np.array([0.5, 1.5, 2.4, 254.5])
    assert np.array_equal(_round_half_up(x), [1.0, 2.0, 2.0, 255.0])
    # contrast with numpy's bankers rounding, which this must not follow
    assert np.array_equal(np.round(x), [0.0, 2.0, 2.0, 254.0])


def test_normalize_columns_spec_column():
    m = np.array([[2.0], [-4.0], [1.0]])
    out = normalize_columns(m)
    assert np.array_equal(out[:, 0], [0.5, -1.0, 0.25])


def test_normalize_columns_zero_column_untouched():
    m = np.array([[0.0, 3.0], [0.0, -1.0]])
    out = normalize_columns(m)
    assert np.array_equal(out[:, 0], [0.0, 0.0])
    assert np.array_equal(out[:, 1], [1.0, -1.0 / 3.0])


def test_heatmap_endpoint_colors():
    m = np.array([[1.0, -1.0, 0.0, 0.5]])
    px = heatmap_pixels(m)
    assert tuple(px[0, 0]) == (0, 0, 255)  # +1: pure blue
    assert tuple(px[0, 1]) == (255, 0, 0)  # -1: pure red
    assert tuple(px[0, 2]) == (255, 255, 255)  # 0: white
    assert tuple(px[0, 3]) == (128, 128, 255)  # 0.5: half toward blue, 127.5 rounds up


def test_heatmap_rejects_out_of_range():
    with pytest.raises(ValueError):
        heatmap_pixels(np.array([[1.5]]))


def test_write_ppm_layout(tmp_path):
    px = np.zeros((2, 3, 3), dtype=np.uint8)
    px[0, 0] = (1, 2, 3)
    p = tmp_path / "img.ppm"
    write_ppm(px, p)
    back = read_ppm(p)
    assert back.shape == (2, 3, 3)
    assert np.array_equal(back, px)


def test_direction_matrix_none_becomes_zero_column():
    tr = make_trace([(1.0, 2.0), None, (0.0, -3.0)])
    m = direction_matrix(tr)
    assert m.shape == (2, 3)
    assert np.array_equal(m[:, 1], [0.0, 0.0])


def test_render_heatmap_dimensions_and_band_repetition(tmp_path):
    tr = make_trace([(1.0, -2.0), (0.5, 0.25), None])
    p = tmp_path / "hm.ppm"
    render_heatmap(tr, p, vscale=4)
    px = read_ppm(p)
    assert px.shape == (2 * 4, 3, 3)
    for band in range(2):
        rows = px[band * 4 : (band + 1) * 4]
        assert np.all(rows == rows[0])
    # the None step renders white
    assert np.all(px[:, 2, :] == 255)


def test_render_heatmap_excludes_features_and_renormalizes(tmp_path):
    tr = make_trace([(4.0, 1.0)], names=("big", "small"))
    p = tmp_path / "hm.ppm"
    render_heatmap(tr, p, vscale=1, exclude=("big",))
    px = read_ppm(p)
    assert px.shape == (1, 1, 3)
    # with "big" gone, "small" is its column's peak: pure blue
    assert tuple(px[0, 0]) == (0, 0, 255)
    with pytest.raises(ValueError):
        render_heatmap(tr, p, exclude=("nope",))
    with pytest.raises(ValueError):
        render_heatmap(tr, p, exclude=("big", "small"))


def test_render_heatmap_rejects_empty_trace(tmp_path):
    tr = make_trace([])
    with pytest.raises(ValueError):
        render_heatmap(tr, tmp_path / "hm.ppm")


def test_heatmap_read_back_reconstruction(tmp_path):
    rng = np.random.default_rng(2)
    dirs = [tuple(v) for v in rng.uniform(-7, 7, size=(50, 3))]
    tr = make_trace(dirs, names=("a", "b", "c"))
    p = tmp_path / "hm.ppm"
    render_heatmap(tr, p, vscale=2)
    px = read_ppm(p)[::2]  # one row per feature band
    # reconstruct normalized values from pixel channels
    blue = px[:, :, 2] == 255
    recon = np.where(blue, 1.0 - px[:, :, 0] / 255.0, -(1.0 - px[:, :, 2] / 255.0))
    target = normalize_columns(direction_matrix(tr))
    assert np.max(np.abs(recon - target)) <= 1.0 / 255.0 + 1e-12


def test_trace_csv_exact_content(tmp_path):
    tr = EpisodeTrace(
        ("x", "y"),
        (2, CAP_EXCEEDED, 0),
        (np.array([1.5, -0.25]), None, np.array([0.0, 1.0])),
        cap=6,
    )
    p = tmp_path / "t.csv"
    trace_csv(tr, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "step,distance_to_risk,capped,g_x,g_y"
    assert lines[1] == "0,2,false,1.5,-0.25"
    assert lines[2] == "1,6,true,,"
    assert lines[3] == "2,0,false,0.0,1.0"
    assert len(lines) == 4  # episode length + header


def test_trace_csv_round_trip(tmp_path):
    tr = EpisodeTrace(
        ("x", "y", "z"),
        (CAP_EXCEEDED, 3, 0),
        (None, np.array([0.1, -2.0, 1e-17]), np.array([5.0, 0.0, 0.25])),
        cap=8,
    )
    p = tmp_path / "t.csv"
    trace_csv(tr, p)
    back = read_trace_csv(p)
    assert back.feature_names == tr.feature_names
    assert back.cap == tr.cap
    assert back.distances[0] is CAP_EXCEEDED
    assert back.distances[1:] == tr.distances[1:]
    assert back.directions[0] is None
    for a, b in zip(tr.directions[1:], back.directions[1:]):
        assert np.array_equal(a, b)  # repr-exact floats


def test_read_trace_csv_rejects_bad_header(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("step,foo\n0,1\n")
    with pytest.raises(ValueError):
        read_trace_csv(p)
    p.write_text("")
    with pytest.raises(ValueError):
        read_trace_csv(p)
