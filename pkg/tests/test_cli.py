import pytest

from gravlat.cli import main, parse_config
from gravlat.exceptions import ConfigError

MINIMAL = """
command = graviton-modes
[model]
g = 0.01
mu = 0.5
"""


def test_parse_minimal_fills_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.command == "graviton-modes"
    assert cfg[("lattice", "ncx")] == 1
    assert cfg[("truncation", "n_max")] == 2
    assert cfg[("", "seed")] == 0
    assert cfg.params.mu == 0.5


def test_parse_reports_every_problem_at_once():
    bad = """
comand = spectrum
[model]
g = -1
g = 0.5
mue = 2
"""
    with pytest.raises(ConfigError) as err:
        parse_config(bad)
    text = "\n".join(err.value.problems)
    assert "nearest valid key: 'command'" in text
    assert "out of range" in text and "'g'" in text
    assert "duplicate key 'g'" in text and "first set at line" in text
    assert "nearest valid key: 'mu'" in text
    assert "missing required key 'command'" in text
    assert len(err.value.problems) == 5


def test_parse_list_values():
    cfg = parse_config(MINIMAL + "\n[sweep]\ng_values = 0, 1e-3 ,2e-3\n")
    assert cfg[("sweep", "g_values")] == (0.0, 1e-3, 2e-3)


def test_parse_type_errors_are_collected():
    with pytest.raises(ConfigError) as err:
        parse_config("command = spectrum\n[lattice]\nncx = two\n")
    assert any("expects int" in p for p in err.value.problems)


def test_unknown_command_is_range_error():
    with pytest.raises(ConfigError):
        parse_config("command = not-a-command\n")


def _run(tmp_path, text, name="cfg.txt", out="out"):
    cfg = tmp_path / name
    cfg.write_text(text)
    return main([str(cfg), "--output", str(tmp_path / out)]), tmp_path / out


def test_main_config_error_exit_code(tmp_path):
    code, _ = _run(tmp_path, "command = nope\n")
    assert code == 2


def test_main_missing_file_exit_code(tmp_path):
    assert main([str(tmp_path / "absent.txt")]) == 2


def test_main_resource_cap_exit_code(tmp_path):
    code, _ = _run(tmp_path, """
command = spectrum
[lattice]
ncx = 2
ncy = 2
[truncation]
n_max = 3
nnz_cap = 100
""")
    assert code == 4


def test_fermi_points_artifact(tmp_path):
    code, out = _run(tmp_path, """
command = fermi-points
[couplings]
jx = 0.6666666666666666
jz = 0.6666666666666666
""")
    assert code == 0
    lines = (out / "fermi_points.csv").read_text().splitlines()
    assert lines[0] == "kx,ky,residual"
    kx, _, residual = map(float, lines[1].split(","))
    assert kx == pytest.approx(2.4183991523122903, abs=1e-9)
    assert residual < 1e-12
    manifest = (out / "manifest.txt").read_text()
    assert "code_version=" in manifest
    assert "wall_time_s=" in manifest


def test_graviton_modes_artifact(tmp_path):
    code, out = _run(tmp_path, MINIMAL)
    assert code == 0
    text = (out / "graviton_modes.txt").read_text()
    assert "omega_plus=0.5" in text
    assert "omega_minus=0.5" in text
    assert "signature=+-" in text


def test_wick_sweep_deterministic_artifacts(tmp_path):
    config = """
command = wick-sweep
seed = 11
[model]
g = 0.01
[lattice]
ncx = 2
ncy = 1
[truncation]
n_max = 2
[manybody]
placement = cell0
[sweep]
g_values = 0,1e-3,1e-2
"""
    code_a, out_a = _run(tmp_path, config, out="run_a")
    code_b, out_b = _run(tmp_path, config, out="run_b")
    assert code_a == 0 and code_b == 0
    assert (out_a / "wick_sweep.csv").read_bytes() == (out_b / "wick_sweep.csv").read_bytes()
    strip = lambda p: [ln for ln in p.read_text().splitlines()
                       if not ln.startswith("wall_time_s=")]
    assert strip(out_a / "manifest.txt") == strip(out_b / "manifest.txt")


def test_map_couplings_roundtrip_artifact(tmp_path):
    code, out = _run(tmp_path, """
command = map-couplings
[model]
g = 0.005
[map]
xi1x = 0.2
xi2y = -0.1
""")
    assert code == 0
    text = dict(line.split("=", 1) for line in
                (out / "map_couplings.txt").read_text().splitlines())
    assert float(text["roundtrip_residual"]) < 1e-12
    assert float(text["jx"]) > 0


def test_spin_connection_refinement_artifact(tmp_path):
    code, out = _run(tmp_path, """
command = spin-connection
seed = 3
[model]
g = 0.02
[fields]
nt = 3
nx = 12
ny = 12
""")
    assert code == 0
    text = dict(line.split("=", 1) for line in
                (out / "spin_connection.txt").read_text().splitlines())
    assert 3.0 < float(text["torsion_ratio"]) < 5.0
    assert 3.0 < float(text["agreement_ratio"]) < 5.0


def test_integrate_out_artifact(tmp_path):
    code, out = _run(tmp_path, """
command = integrate-out
[model]
g = 0.02
mu = 0.8
l = 1.1
""")
    assert code == 0
    text = dict(line.split("=", 1) for line in
                (out / "integrate_out.txt").read_text().splitlines())
    assert text["coefficient_exact_multiple_of_piG_over_l2mu2"] == "-4"
    assert abs(float(text["oracle_residual"])) < 1e-8
