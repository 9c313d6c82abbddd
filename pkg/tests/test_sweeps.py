import math

import pytest

from cohsep import csvio, sweeps
from cohsep.photostats import Poisson, Thermal
from cohsep.scene import SourceScene
from cohsep.sensitivity import normalized_m_D, normalized_m_eps_closed


def tiny_spec(**kw):
    args = dict(
        name="tiny", title="t", quantity="m_d_norm", xlabel="x", ylabel="y",
        xscale="log", yscale="linear", d_over_sigma=(0.5, 1.0, 2.0),
        panels=(
            sweeps.SweepPanel("a", math.pi / 4, 0.0, 1.0, 1.0, Poisson(), "hg"),
            sweeps.SweepPanel("b", math.pi / 4, math.pi, 1.0, 1.0, Thermal(), "hg"),
        ),
    )
    args.update(kw)
    return sweeps.SweepSpec(**args)


def test_all_presets_load():
    names = sweeps.available_presets()
    assert names == [f"fig{i}" for i in range(2, 8)]
    for n in names:
        spec = sweeps.load_preset(n)
        assert spec.panels and len(spec.d_over_sigma) >= 20


def test_unknown_preset():
    with pytest.raises(FileNotFoundError, match="available"):
        sweeps.load_preset("fig99")


def test_bad_quantity_rejected():
    with pytest.raises(ValueError, match="quantity"):
        tiny_spec(quantity="m_banana")


def test_run_sweep_values_match_closed_forms():
    spec = tiny_spec()
    rows = sweeps.run_sweep(spec)
    assert len(rows) == 6
    for label, x, me, md, mt in rows:
        panel = next(p for p in spec.panels if p.label == label)
        sc = SourceScene(d=x, sigma=1.0, theta=panel.theta, phi=panel.phi,
                         kappa=panel.kappa, n_s=panel.n_s)
        assert me == pytest.approx(normalized_m_eps_closed(sc), rel=1e-12)
        assert md == pytest.approx(normalized_m_D(sc, panel.stats), rel=1e-12)
        assert mt == pytest.approx(me + md, rel=1e-12)


def test_sweep_csv_and_svg(tmp_path):
    spec = tiny_spec()
    rows = sweeps.run_sweep(spec)
    csv_path = tmp_path / "s.csv"
    sweeps.write_sweep_csv(spec, rows, csv_path)
    meta, cols, got = csvio.read_csv(csv_path)
    assert meta["preset"] == "tiny"
    assert cols == list(sweeps.SWEEP_COLUMNS)
    assert len(got) == len(rows)

    svg_path = tmp_path / "s.svg"
    sweeps.sweep_svg(spec, rows, svg_path)
    body = svg_path.read_text()
    # one legend entry and at least one polyline per panel
    assert body.count("polyline") >= 2
    assert "a" in body and "b" in body
