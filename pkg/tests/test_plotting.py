import numpy as np
import pytest

from interface_surrogates.plotting import (
    fit_log_line,
    load_series_csv,
    render_plot,
    save_series_csv,
    write_svg,
)


def test_fit_recovers_exact_log_law():
    x = np.array([1.0, 2.0, 4.0, 8.0, 16.0, 64.0])
    a, b = 0.37, -0.052
    y = a + b * np.log(x)
    ah, bh = fit_log_line(x, y)
    assert abs(ah - a) <= 1e-10
    assert abs(bh - b) <= 1e-10


def test_fit_two_points_interpolates():
    x = np.array([2.0, 32.0])
    y = np.array([0.5, 0.1])
    a, b = fit_log_line(x, y)
    np.testing.assert_allclose(a + b * np.log(x), y, atol=1e-12)


def test_fit_rejects_degenerate_input():
    with pytest.raises(ValueError):
        fit_log_line([3.0], [1.0])
    with pytest.raises(ValueError):
        fit_log_line([2.0, 2.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        fit_log_line([-1.0, 2.0], [1.0, 2.0])


def demo_series():
    return [
        {"label": "p = 1", "x": [8, 16, 32, 64], "y": [0.5, 0.55, 0.62, 0.66]},
        {"label": "p = 3", "x": [8, 16, 32, 64], "y": [0.2, 0.21, 0.2, 0.22]},
    ]


def test_svg_deterministic_bytes(tmp_path):
    svg1 = render_plot(demo_series(), title="demo", xlabel="d", ylabel="error")
    svg2 = render_plot(demo_series(), title="demo", xlabel="d", ylabel="error")
    assert svg1 == svg2
    p1, p2 = tmp_path / "a.svg", tmp_path / "b.svg"
    write_svg(p1, svg1)
    write_svg(p2, svg2)
    assert p1.read_bytes() == p2.read_bytes()


def test_svg_structure():
    svg = render_plot(demo_series(), xlabel="d", ylabel="error")
    assert svg.startswith("<svg ") and svg.rstrip().endswith("</svg>")
    # one marker per data point plus two legend markers
    assert svg.count("<circle") == 8 + 2
    # one fit line per series
    assert svg.count("<polyline") == 2
    assert "p = 1" in svg and "p = 3" in svg


def test_single_point_series_has_marker_but_no_fit():
    svg = render_plot([{"label": "only", "x": [4.0], "y": [0.3]}])
    assert svg.count("<circle") == 1 + 1
    assert "<polyline" not in svg


def test_series_csv_roundtrip(tmp_path):
    path = tmp_path / "demo.series.csv"
    save_series_csv(path, demo_series())
    back = load_series_csv(path)
    assert [s["label"] for s in back] == ["p = 1", "p = 3"]
    for orig, got in zip(demo_series(), back):
        np.testing.assert_allclose(got["x"], orig["x"])
        np.testing.assert_allclose(got["y"], orig["y"])


def test_series_csv_rejects_malformed(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("foo,bar\n1,2\n")
    with pytest.raises(ValueError):
        load_series_csv(bad)
    short = tmp_path / "short.csv"
    short.write_text("label,x,y\nseries-a,3\n")
    with pytest.raises(ValueError):
        load_series_csv(short)


def test_render_accepts_numpy_arrays():
    xs = [1.0, 8.0, 64.0]
    ys = [0.5, 0.25, 0.12]
    as_lists = render_plot([{"label": "e", "x": xs, "y": ys}])
    as_arrays = render_plot(
        [{"label": "e", "x": np.array(xs), "y": np.array(ys)}])
    assert as_arrays == as_lists


def test_render_rejects_bad_series():
    with pytest.raises(ValueError):
        render_plot([])
    with pytest.raises(ValueError):
        render_plot([{"label": "a", "x": [], "y": []}])
    with pytest.raises(ValueError):
        render_plot([{"label": "a", "x": [0.0, 1.0], "y": [1.0, 2.0]}])
