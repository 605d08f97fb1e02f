import io
import re
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from mimo_jscc import stm
from mimo_jscc.errors import ConfigError
from mimo_jscc.experiment import Row, SweepResult, load_config, plot_svg, read_csv, run_sweep, write_csv
from mimo_jscc.experiment.cli import main, parse_grid
from mimo_jscc.experiment.config import config_from_dict
from mimo_jscc.experiment.results import HEADER
from mimo_jscc.experiment.svg import PlotError, render_svg
from mimo_jscc.experiment.validate import run_checks, validate

ROOT = Path(__file__).resolve().parents[1]


def small_cfg(**sweep):
    base = {
        "schemes": ["alamouti", "mux", "separation-rd"],
        "nt": 2,
        "nr": [1, 2],
        "snr_db": [0.0, 10.0],
        "rho": "1/4",
        "trials": 70,
        "master_seed": 11,
    }
    base.update(sweep)
    return config_from_dict({"sweep": base, "source": {"n": 32}})


# --- config -------------------------------------------------------------------

def test_shipped_configs_load():
    for name in ("fig3.toml", "fig4.toml", "smoke.toml"):
        cfg = load_config(ROOT / "configs" / name)
        assert cfg.out_csv is not None and cfg.out_csv.is_absolute()
    fig4 = load_config(ROOT / "configs" / "fig4.toml")
    assert fig4.rho_list == (Fraction(1, 8), Fraction(5, 24))


@pytest.mark.parametrize(
    "override,field",
    [
        ({"schemes": ["vblast"]}, "schemes"),
        ({"schemes": ["ostbc3-r12"]}, "schemes/nt"),
        ({"nr": [0]}, "nr"),
        ({"snr_db": [10.0, 0.0]}, "snr_db"),
        ({"snr_db": []}, "snr_db"),
        ({"trials": 0}, "trials"),
        ({"rho": "1/7"}, "not a positive integer"),
        ({"master_seed": -1}, "master_seed"),
        ({"power": 0.0}, "power"),
        ({"post_equalizer": "learned"}, "post_equalizer"),
        ({"bogus": 1}, "unknown keys"),
    ],
)
def test_config_rejection_names_field(override, field):
    with pytest.raises(ConfigError, match=re.escape(field)):
        small_cfg(**override)


def test_config_rejects_block_incompatible_k():
    # k = 1/4 * 36 = 9 channel uses cannot hold whole rate-1/2 blocks of 8 slots
    with pytest.raises(ConfigError, match="rho"):
        config_from_dict({"sweep": {"schemes": ["ostbc3-r12"], "nt": 3, "snr_db": [0], "rho": "1/4"},
                          "source": {"n": 36}})


def test_config_rejects_bad_toml(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("[sweep\nnt = 2")
    with pytest.raises(ConfigError):
        load_config(p)


# --- CSV ------------------------------------------------------------------------

GOLDEN_ROWS = [
    Row("alamouti", 2, 1, 9.0, Fraction(1, 8), "mse", 0.123456789123, 0.001, 1000, 7),
    Row("separation-rd", 2, 4, 17.5, Fraction(5, 24), "capacity_bpcu", 12.0, 0.0, 10, 0),
    Row("mux", 3, 1, -2.0, Fraction(1, 8), "psnr_db", 1 / 3, 2e-12, 1, 18446744073709551615),
]
GOLDEN_TEXT = (
    "scheme,nt,nr,snr_db,rho,metric,value,ci95,trials,seed\n"
    "alamouti,2,1,9,1/8,mse,0.123456789,0.001,1000,7\n"
    "separation-rd,2,4,17.5,5/24,capacity_bpcu,12,0,10,0\n"
    "mux,3,1,-2,1/8,psnr_db,0.333333333,2e-12,1,18446744073709551615\n"
)


def test_csv_golden(tmp_path):
    p = tmp_path / "out.csv"
    write_csv(SweepResult(GOLDEN_ROWS), p)
    assert p.read_bytes() == GOLDEN_TEXT.encode("utf-8")


def test_csv_empty_and_single(tmp_path):
    p = tmp_path / "e.csv"
    write_csv(SweepResult([]), p)
    assert p.read_text() == ",".join(HEADER) + "\n"
    write_csv(SweepResult(GOLDEN_ROWS[:1]), p)
    assert len(p.read_text().splitlines()) == 2


def test_csv_roundtrip(tmp_path):
    p, q = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(SweepResult(GOLDEN_ROWS), p)
    back = read_csv(p)
    assert [r.scheme for r in back.rows] == [r.scheme for r in GOLDEN_ROWS]
    for r, g in zip(back.rows, GOLDEN_ROWS):
        assert r.value == float(format(g.value, ".9g")) and r.rho == g.rho and r.seed == g.seed
    write_csv(back, q)
    assert p.read_bytes() == q.read_bytes()


def test_csv_io_error(tmp_path):
    from mimo_jscc.experiment.results import ResultIOError

    (tmp_path / "dir").mkdir()
    with pytest.raises(ResultIOError, match="dir"):
        write_csv(SweepResult([]), tmp_path / "dir")


# --- SVG ------------------------------------------------------------------------

def _rows(values, scheme="alamouti", nr=1):
    return [Row(scheme, 2, nr, float(i), Fraction(1, 8), "mse", v, 0.0, 1, 0) for i, v in enumerate(values)]


def test_svg_single_series(tmp_path):
    p = tmp_path / "a.svg"
    plot_svg(SweepResult(_rows([0.5, 0.25])), "mse", p)
    text = p.read_text()
    polylines = re.findall(r'<polyline[^>]*points="([^"]*)"', text)
    assert len(polylines) == 1
    assert len(polylines[0].split()) == 2
    assert text.startswith("<svg") and "href" not in text
    assert "SNR (dB)" in text and "alamouti, Nr=1" in text


def test_svg_monotone_data_renders_monotone():
    text = render_svg(SweepResult(_rows([5.0, 4.0, 2.5, 1.0, 0.2])), "mse")
    pts = re.search(r'points="([^"]*)"', text).group(1).split()
    ys = [float(p.split(",")[1]) for p in pts]
    xs = [float(p.split(",")[0]) for p in pts]
    assert all(b > a for a, b in zip(ys, ys[1:]))  # decreasing data moves down the canvas
    assert all(b > a for a, b in zip(xs, xs[1:]))


def test_svg_one_polyline_per_series():
    rows = _rows([1, 2]) + _rows([2, 3], nr=2) + _rows([1, 1], scheme="mux")
    assert render_svg(SweepResult(rows), "mse").count("<polyline") == 3


def test_svg_errors():
    with pytest.raises(PlotError, match="available: mse"):
        render_svg(SweepResult(_rows([1.0])), "sinr_db")
    with pytest.raises(PlotError):
        render_svg(SweepResult([]), "mse")


# --- runner ---------------------------------------------------------------------

def test_single_cell_trial_one():
    cfg = small_cfg(schemes=["alamouti"], nr=1, snr_db=[5.0], trials=1)
    a, b = run_sweep(cfg), run_sweep(cfg)
    assert [r.metric for r in a.rows] == ["mse", "psnr_db", "sinr_db"]
    assert a.rows == b.rows
    assert all(r.ci95 == 0.0 and r.trials == 1 for r in a.rows)


def test_rows_per_cell_and_metrics():
    res = run_sweep(small_cfg(outage_threshold_db=5.0))
    cells = 3 * 2 * 2
    assert len(res.select("mse")) == cells
    assert len(res.select("capacity_bpcu")) == 2 * 2
    assert len(res.select("outage_prob")) == 2 * 2 * 2
    assert set(res.metrics()) <= {"sinr_db", "outage_prob", "diversity_order", "mse", "psnr_db", "capacity_bpcu"}
    assert all(r.ci95 >= 0 for r in res.rows)


def test_fig4_grid_shape():
    cfg = config_from_dict({
        "sweep": {"schemes": ["mux", "ostbc3-r12", "ostbc3-r34"], "nt": 3, "nr": 1,
                  "snr_db": [2, 6, 10], "rho": ["1/8", "5/24"], "trials": 2},
    })
    res = run_sweep(cfg)
    assert len(res.select("mse")) == 2 * 3 * 3
    meta = res.meta["schemes"]
    assert meta["mux"]["latent_length"] == {"1/8": 1152, "5/24": 1920}
    assert meta["ostbc3-r12"]["latent_length"]["1/8"] == 192
    assert meta["ostbc3-r34"]["latent_length"]["1/8"] == 288
    assert meta["ostbc3-r34"]["power_scale"] == pytest.approx(np.sqrt(4 / 3))


def test_common_random_numbers_across_snr():
    res = run_sweep(small_cfg(schemes=["separation-rd"], nr=1, snr_db=[0.0, 5.0, 10.0], trials=200))
    caps = [r.value for r in res.select("capacity_bpcu")]
    assert caps == sorted(caps)


def test_sweep_worker_count_invariant(tmp_path):
    cfg = small_cfg(trials=150)
    write_csv(run_sweep(cfg, workers=1), tmp_path / "w1.csv")
    write_csv(run_sweep(cfg, workers=3), tmp_path / "w3.csv")
    assert (tmp_path / "w1.csv").read_bytes() == (tmp_path / "w3.csv").read_bytes()


def test_seed_changes_output():
    a = run_sweep(small_cfg(schemes=["alamouti"], nr=1))
    b = run_sweep(small_cfg(schemes=["alamouti"], nr=1, master_seed=12))
    assert a.rows[0].value != b.rows[0].value


def test_more_antennas_help_mux():
    res = run_sweep(small_cfg(schemes=["mux"], nr=[1, 2], snr_db=[10.0], trials=300))
    mse = {r.nr: r.value for r in res.select("mse")}
    assert mse[2] < mse[1]


# --- CLI ------------------------------------------------------------------------

def _write_cfg(tmp_path, text):
    p = tmp_path / "c.toml"
    p.write_text(text)
    return p


CFG = """
[sweep]
schemes = ["alamouti", "separation-rd"]
nt = 2
nr = 1
snr_db = [0, 10]
rho = "1/2"
trials = 20
master_seed = 3
[source]
n = 16
[outputs]
csv = "out/r.csv"
"""


def test_cli_sweep_writes_csv_meta_and_figures(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, CFG)
    assert main(["sweep", "--config", str(cfg), "--figures", str(tmp_path / "figs")]) == 0
    out = tmp_path / "out" / "r.csv"
    assert out.read_text().startswith(",".join(HEADER))
    assert (tmp_path / "out" / "r.meta.json").exists()
    assert (tmp_path / "figs" / "mse.png").stat().st_size > 0
    assert (tmp_path / "figs" / "mse.svg").exists()


def test_cli_seed_override(tmp_path):
    cfg = _write_cfg(tmp_path, CFG)
    main(["sweep", "--config", str(cfg), "--seed", "99", "--out-csv", str(tmp_path / "s.csv")])
    rows = read_csv(tmp_path / "s.csv").rows
    assert {r.seed for r in rows} == {99}


def test_cli_exit_codes(tmp_path):
    bad = _write_cfg(tmp_path, CFG.replace('nt = 2', 'nt = 3'))
    assert main(["sweep", "--config", str(bad)]) == 2
    assert main(["sweep", "--config", str(tmp_path / "missing.toml")]) == 3
    assert main(["plot", "--csv", str(tmp_path / "missing.csv"), "--metric", "mse", "--out", str(tmp_path / "x.svg")]) == 3


def test_cli_plot(tmp_path):
    write_csv(SweepResult(_rows([0.5, 0.25])), tmp_path / "r.csv")
    assert main(["plot", "--csv", str(tmp_path / "r.csv"), "--metric", "mse", "--out", str(tmp_path / "p.svg")]) == 0
    assert (tmp_path / "p.svg").read_text().count("<polyline") == 1
    assert main(["plot", "--csv", str(tmp_path / "r.csv"), "--metric", "mse", "--out", str(tmp_path / "p.png")]) == 0
    assert main(["plot", "--csv", str(tmp_path / "r.csv"), "--metric", "nope", "--out", str(tmp_path / "q.svg")]) == 2


def test_cli_metric_subcommands(tmp_path):
    assert main(["sinr", "--nr", "1,2", "--snr-db", "0:10:5", "--trials", "500", "--out-csv", str(tmp_path / "s.csv")]) == 0
    rows = read_csv(tmp_path / "s.csv").rows
    assert len(rows) == 2 * 2 * 3 and {r.metric for r in rows} == {"sinr_db"}
    assert main(["capacity", "--nr", "2", "--snr-db", "0,10", "--trials", "500", "--out-csv", str(tmp_path / "c.csv")]) == 0
    caps = read_csv(tmp_path / "c.csv").rows
    assert [r.scheme for r in caps] == ["separation-rd"] * 2 and caps[1].value > caps[0].value
    assert main(["outage", "--snr-db", "0:20:10", "--threshold-db", "5", "--trials", "20000",
                 "--out-csv", str(tmp_path / "o.csv")]) == 0
    out = read_csv(tmp_path / "o.csv").rows
    assert [r.metric for r in out] == ["outage_prob"] * 3 + ["diversity_order"]
    assert main(["outage", "--trials", "10"]) == 2
    assert main(["sinr", "--snr-db", "5,0"]) == 2


def test_cli_stdout(capsys):
    assert main(["capacity", "--snr-db", "0", "--trials", "10"]) == 0
    assert capsys.readouterr().out.startswith(",".join(HEADER))


def test_parse_grid():
    assert parse_grid("0:30:10") == [0, 10, 20, 30]
    assert parse_grid("1, 2.5") == [1, 2.5]
    with pytest.raises(ConfigError):
        parse_grid("a:b")


# --- validate -------------------------------------------------------------------

def test_validate_fast_passes():
    lines = []
    assert validate("fast", out=lines.append) == 0
    assert all(l.startswith("PASS") for l in lines[:-1])


def test_validate_catches_alamouti_sign_error(monkeypatch):
    def broken(x):
        x1, x2 = x[..., 0], x[..., 1]
        return [[x1, x2], [np.conj(x2), np.conj(x1)]]  # slot 2 lost its minus sign

    monkeypatch.setitem(stm._BLOCK_BUILDERS, stm.SchemeKind.ALAMOUTI, broken)
    results = {r.name: r for r in run_checks("fast")}
    assert not results["ostbc_orthogonality"].passed
    assert validate("fast", out=lambda s: None) == 1


def test_cli_validate(capsys):
    assert main(["validate"]) == 0
    assert "invariants passed" in capsys.readouterr().out
