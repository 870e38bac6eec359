import json
import subprocess
import sys
from pathlib import Path

import pytest

from heatmap_viewer import RenderSpec, SchemaError, render_cer, render_sc
from heatmap_viewer.render import save

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"


def _run(args, cwd):
    return subprocess.run(
        [sys.executable, "-m", "heatmap_viewer.cli", *args],
        cwd=cwd,
        capture_output=True,
        text=True,
    )


@pytest.mark.parametrize(
    "kind,src,golden",
    [
        ("cer", "cer_synthetic.json", "cer_synthetic.png"),
        ("cer", "cer_synthetic.json", "cer_synthetic.svg"),
        ("sc", "sc_three_axis.json", "sc_three_axis.png"),
        ("sc", "sc_three_axis.json", "sc_three_axis.svg"),
        ("sc", "sc_single_axis.json", "sc_single_axis.png"),
    ],
)
def test_golden_images_are_pixel_identical(tmp_path, kind, src, golden):
    out = tmp_path / golden
    r = _run(
        ["render", "--kind", kind, "--in", str(DATA / src), "--out", str(out)],
        tmp_path,
    )
    assert r.returncode == 0, r.stderr
    assert out.read_bytes() == (GOLDEN / golden).read_bytes()


def test_sweep_marks_vertices_exactly_as_stored():
    spec = RenderSpec(
        inputs=(str(DATA / "sc_three_axis.json"),), kind="sc-sweep", out="x.png"
    )
    fig = render_sc(spec)
    stored = json.loads((DATA / "sc_three_axis.json").read_text())
    assert len(fig.axes) == 3
    for ax, entry in zip(fig.axes, stored["axes"]):
        marks = [
            line.get_xdata()[0]
            for line in ax.lines
            if line.get_linestyle() == "--"
        ]
        assert marks == [entry["theta_star_deg"]]
        assert f"{entry['theta_star_deg']:.2f}" in ax.get_title()


def test_fit_curve_overlays_exact_parabola_data():
    spec = RenderSpec(
        inputs=(str(DATA / "sc_single_axis.json"),), kind="sc-sweep", out="x.png"
    )
    fig = render_sc(spec)
    entry = json.loads((DATA / "sc_single_axis.json").read_text())["axes"][0]
    ax = fig.axes[0]
    curve = [l for l in fig.axes[0].lines if len(l.get_xdata()) == 200][0]
    a, b, c = entry["fit"]["coefficients"]
    for x, y in zip(curve.get_xdata(), curve.get_ydata()):
        assert abs(y - (a * x * x + b * x + c)) < 1e-12


def test_single_axis_gives_single_panel():
    spec = RenderSpec(
        inputs=(str(DATA / "sc_single_axis.json"),), kind="sc-sweep", out="x.png"
    )
    assert len(render_sc(spec).axes) == 1


def test_cer_side_by_side_columns(tmp_path):
    src = str(DATA / "cer_synthetic.json")
    spec = RenderSpec(inputs=(src, src), kind="cer-heatmap", out="x.png")
    fig = render_cer(spec)
    # Two input files become two heatmap columns on a single grid.
    (ax,) = [a for a in fig.axes if a.get_images()]
    assert ax.get_images()[0].get_array().shape[1] == 2


def test_threshold_hides_small_rows():
    src = str(DATA / "cer_synthetic.json")
    full = render_cer(RenderSpec(inputs=(src,), kind="cer-heatmap", out="x.png"))
    cut = render_cer(
        RenderSpec(inputs=(src,), kind="cer-heatmap", out="x.png", threshold=0.001)
    )
    (ax_full,) = [a for a in full.axes if a.get_images()]
    (ax_cut,) = [a for a in cut.axes if a.get_images()]
    n_full = ax_full.get_images()[0].get_array().shape[0]
    n_cut = ax_cut.get_images()[0].get_array().shape[0]
    # The 0.0005 row drops; the identity row always stays.
    assert n_cut == n_full - 1
    assert any("{II}" in t.get_text() for t in ax_cut.get_yticklabels())


def test_schema_mismatch_is_reported(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema": "something/9"}))
    r = _run(
        ["render", "--kind", "cer", "--in", str(bad), "--out", str(tmp_path / "x.png")],
        tmp_path,
    )
    assert r.returncode == 1
    assert "schema" in r.stderr


def test_kind_file_cross_use_is_rejected(tmp_path):
    r = _run(
        [
            "render", "--kind", "cer",
            "--in", str(DATA / "sc_three_axis.json"),
            "--out", str(tmp_path / "x.png"),
        ],
        tmp_path,
    )
    assert r.returncode == 1


def test_unsupported_format_is_rejected(tmp_path):
    r = _run(
        [
            "render", "--kind", "sc",
            "--in", str(DATA / "sc_single_axis.json"),
            "--out", str(tmp_path / "x.pdf"),
        ],
        tmp_path,
    )
    assert r.returncode == 1
    assert "format" in r.stderr


def test_render_spec_validation():
    with pytest.raises(ValueError):
        RenderSpec(inputs=("a.json",), kind="pie-chart", out="x.png")
    with pytest.raises(ValueError):
        RenderSpec(inputs=(), kind="sc-sweep", out="x.png")
    with pytest.raises(ValueError):
        RenderSpec(inputs=("a.json",), kind="sc-sweep", out="x.png", vmin=0.1, vmax=0.01)
