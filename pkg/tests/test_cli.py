import csv
import numpy as np
import pytest

from dmbeam import Direction, LinkConfig, PortId, ber_sweep, load_pattern_csv
from dmbeam.cli import load_run_config, main
from dmbeam.errors import ConfigError, PatternSchemaError
from dmbeam.io import (
    is_periodic,
    read_beam_cut_csv,
    read_ber_csv,
    read_manifest,
    write_beam_cut_csv,
    write_ber_csv,
)

FAST_DM = ["--set", "dm.n_symbols=2000", "--set", "dm.angle_step=10"]


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# --- config -----------------------------------------------------------------------

def test_config_file_and_overrides(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[pattern]\ntheta_step = 2\n[dm]\nbobs = 10, 20\nsnr_db = 9\n[steer]\nelevation = xz+\n")
    cfg = load_run_config(ini, ["dm.snr_db=7"], seed=5)
    assert cfg.pattern.theta_step == 2.0
    assert cfg.dm.bobs == (10.0, 20.0)
    assert cfg.dm.snr_db == 7.0
    assert cfg.steer.elevation == ("xz+",)
    assert cfg.seed == 5


@pytest.mark.parametrize(
    "text", ["[dm]\nbogus = 1\n", "[plot]\nx = 1\n", "[dm]\nn_symbols = many\n", "[pattern]\nefficiency_scaling = maybe\n"]
)
def test_config_rejects_unknown_or_bad(tmp_path, text):
    ini = tmp_path / "run.ini"
    ini.write_text(text)
    with pytest.raises(ConfigError):
        load_run_config(ini)


def test_cli_config_error_exit_code(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[dm]\nbogus = 1\n")
    assert main(["patterns", "--config", str(ini), "--out", str(tmp_path / "o"), "--quiet"]) == 2
    assert main(["dm", "--set", "dm.n_symbols=10", "--out", str(tmp_path / "o"), "--quiet"]) == 2
    assert main(["dm", "--set", "nodot", "--quiet", "--out", str(tmp_path / "o")]) == 2
    assert main(["frobnicate"]) == 2


def test_cli_runtime_error_exit_code(tmp_path):
    args = ["dm", "--quiet", "--out", str(tmp_path / "o"), "--set", "dm.sweep_plane=elevation",
            "--set", "dm.bobs=0", "--set", "dm.beam=all", *FAST_DM]
    assert main(args) == 3


def test_cli_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["patterns", "--quiet", "--out", str(blocker / "sub")]) == 3


# --- patterns -------------------------------------------------------------------------

@pytest.fixture(scope="module")
def patterns_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("patterns")
    assert main(["patterns", "--quiet", "--out", str(out)]) == 0
    return out


def test_patterns_grid_csv(patterns_dir):
    pset = load_pattern_csv(patterns_dir / "patterns_grid.csv")
    assert pset.grid.shape == (181, 360)
    assert pset.gain(PortId.P4, Direction(90, 45)) == pytest.approx(1j, abs=1e-12)


def test_patterns_p3_phase_constant(patterns_dir):
    _, mag, phase = read_beam_cut_csv(patterns_dir / "patterns_cut_P3.csv")
    assert np.all(phase == phase[0])
    assert np.allclose(mag, 0.0)


@pytest.mark.parametrize("port,slope", [("P4", 2.0), ("P5", -2.0)])
def test_patterns_tm21_phase_slopes(patterns_dir, port, slope):
    angles, _, phase = read_beam_cut_csv(patterns_dir / f"patterns_cut_{port}.csv")
    unwrapped = np.rad2deg(np.unwrap(np.deg2rad(phase)))
    d = np.diff(unwrapped) / np.diff(angles)
    assert np.allclose(d, slope, atol=1e-9)


def test_patterns_manifest(patterns_dir):
    man = read_manifest(patterns_dir / "patterns_manifest.json")
    assert man["command"] == "patterns"
    listed = {f["path"] for f in man["files"]}
    on_disk = {p.name for p in patterns_dir.glob("*.csv")}
    assert listed == on_disk
    assert man["config"]["pattern"]["theta_step"] == 1.0


# --- steer --------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def steer_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("steer")
    assert main(["steer", "--quiet", "--out", str(out)]) == 0
    return out


def test_steer_azimuth_45_cut(steer_dir):
    angles, mag, _ = read_beam_cut_csv(steer_dir / "steer_azimuth_phi045.csv")
    peaks = set(angles[mag >= -1e-9])
    assert peaks == {45.0, 225.0}


def test_steer_report_front_to_back(steer_dir):
    rep = {r["name"]: r for r in rows(steer_dir / "steer_report.csv")}
    assert float(rep["enhanced_phi090_r0.60"]["front_to_back_db"]) > 0
    assert float(rep["enhanced_phi090_r0.00"]["front_to_back_db"]) == pytest.approx(0, abs=0.01)
    assert rep["elevation_xzplus"]["figure"] == "fig5"


def test_steer_cut_round_trip(steer_dir, tmp_path):
    a, m, p = read_beam_cut_csv(steer_dir / "steer_enhanced_phi180_r0.70.csv")
    vals = 10 ** (m / 20) * np.exp(1j * np.deg2rad(p))
    again = write_beam_cut_csv(a, vals, tmp_path / "c.csv")
    a2, m2, p2 = read_beam_cut_csv(again)
    assert np.allclose(a, a2, atol=1e-9) and np.allclose(m, m2, atol=1e-9)
    assert np.allclose(np.exp(1j * np.deg2rad(p)), np.exp(1j * np.deg2rad(p2)), atol=1e-9)


# --- dm --------------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def dm_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("dm")
    assert main(["dm", "--quiet", "--seed", "7", "--out", str(out), *FAST_DM]) == 0
    return out


def test_dm_eight_bob_layout(dm_dir):
    files = sorted(dm_dir.glob("dm_azimuth_bob*.csv"))
    assert len(files) == 8
    summary = rows(dm_dir / "dm_summary.csv")
    assert [float(r["bob_deg"]) for r in summary] == [0, 45, 90, 135, 180, 225, 270, 315]
    for r in summary:
        _, seed = read_ber_csv(dm_dir / r["file"])
        assert seed == 7
        assert float(r["ber_at_bob"]) < 1e-2
        assert float(r["beamwidth_deg"]) > 0
        assert int(r["n_lobes"]) == 1
    man = read_manifest(dm_dir / "dm_manifest.json")
    assert man["figure"] == "fig8" and man["seed"] == 7


def test_dm_rerun_is_byte_identical(dm_dir, tmp_path):
    assert main(["dm", "--quiet", "--seed", "7", "--out", str(tmp_path), *FAST_DM]) == 0
    for f in dm_dir.glob("*"):
        assert (tmp_path / f.name).read_bytes() == f.read_bytes()


def test_manifest_lists_each_file_once(dm_dir):
    man = read_manifest(dm_dir / "dm_manifest.json")
    paths = [f["path"] for f in man["files"]]
    assert len(paths) == len(set(paths))
    assert set(paths) == {p.name for p in dm_dir.glob("*.csv")}


def test_ber_csv_round_trip(tmp_path):
    curve = ber_sweep(LinkConfig(n_symbols=2000, angle_step_deg=30, seed=4))
    path = write_ber_csv(curve, tmp_path / "b.csv")
    records, seed = read_ber_csv(path)
    assert records == curve.records and seed == 4
    assert is_periodic([r.angle_deg for r in records])


def test_ber_csv_rejects_inconsistent_counts(tmp_path):
    path = tmp_path / "b.csv"
    path.write_text("angle_deg,ber,bit_errors,bits,seed\n0.0,0.5,1,4,0\n")
    with pytest.raises(PatternSchemaError):
        read_ber_csv(path)


# --- report ------------------------------------------------------------------------------------

def test_report_empty_directory(tmp_path):
    (tmp_path / "in").mkdir()
    assert main(["report", str(tmp_path / "in"), "--out", str(tmp_path / "o"), "--quiet"]) == 2


def test_report_missing_directory(tmp_path, capsys):
    assert main(["report", str(tmp_path / "nope"), "--quiet"]) == 2
    assert "nope" in capsys.readouterr().err


def test_report_single_ber_csv(tmp_path):
    src = tmp_path / "in"
    src.mkdir()
    write_ber_csv(ber_sweep(LinkConfig(n_symbols=2000, angle_step_deg=5)), src / "one.csv")
    assert main(["report", str(src), "--out", str(tmp_path), "--quiet"]) == 0
    table = rows(tmp_path / "report.csv")
    assert len(table) == 1
    assert table[0]["kind"] == "ber" and table[0]["figure"] == "unknown"


def test_report_mixed_runs_sorted(tmp_path, patterns_dir, steer_dir, dm_dir):
    import shutil

    for d in (dm_dir, steer_dir, patterns_dir):
        shutil.copytree(d, tmp_path / "runs" / d.name)
    assert main(["report", str(tmp_path / "runs"), "--out", str(tmp_path), "--quiet"]) == 0
    figs = [r["figure"] for r in rows(tmp_path / "report.csv")]
    order = ["fig2a", "fig4", "fig5", "fig6", "fig7", "fig8"]
    assert sorted(set(figs), key=order.index) == order
    assert figs == sorted(figs, key=order.index)
