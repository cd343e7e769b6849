import os
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from llimex.grid import GridSpec, VectorField3
from llimex.steppers import SchemeId
from llimex.io_cli import (
    ConfigError,
    cli_main,
    field_from_snapshot,
    parse_config,
    read_snapshot,
    resolved_manifest,
    snapshot_from_field,
    write_snapshot,
)

# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


def test_empty_config_gives_defaults():
    cfg = parse_config("")
    assert cfg.scheme == SchemeId.IMEXRK2
    assert cfg.params.alpha == 0.01
    assert cfg.params.beta == 5.0
    assert cfg.params.eps == 1.0
    assert cfg.params.Q == 0.0
    assert cfg.grid.dim == 1
    assert cfg.k > 0 and cfg.final_time > 0


def test_negative_beta_names_field():
    with pytest.raises(ConfigError, match="beta"):
        parse_config("[material]\nbeta = -1\n")


def test_unknown_key_fatal_lists_valid():
    with pytest.raises(ConfigError, match="valid keys"):
        parse_config("[grid]\nresolution = 8\n")
    with pytest.raises(ConfigError, match="valid sections"):
        parse_config("[mesh]\nn = 8\n")


def test_permalloy_block_derives_Q():
    text = """
[material]
ms = 8e5
mu0 = 1.2566370614359173e-06
cex = 1.3e-11
ku = 1.0e2
l = 2e-6
alpha = 0.1
beta = 3
"""
    cfg = parse_config(text)
    assert cfg.params.Q == pytest.approx(1.2434e-4, rel=1e-3)
    assert cfg.params.alpha == 0.1


def test_material_groups_mutually_exclusive():
    text = "[material]\neps = 1\nms = 8e5\nmu0 = 1.25e-6\ncex = 1.3e-11\nku = 1e2\nl = 2e-6\n"
    with pytest.raises(ConfigError, match="exactly one"):
        parse_config(text)
    with pytest.raises(ConfigError, match="incomplete"):
        parse_config("[material]\nms = 8e5\n")


def test_grid_section_roundtrip():
    cfg = parse_config("[grid]\ndim = 3\nn = 4,8,2\nextent = 1.0,2.0,0.5\n")
    assert cfg.grid.n == (4, 8, 2)
    assert cfg.grid.h == (0.25, 0.25, 0.25)


def test_manifest_echoes_resolved_defaults():
    cfg = parse_config("[scheme]\nid = ssp\n")
    text = resolved_manifest(cfg)
    assert "id = sspimexrk2" in text
    assert "alpha = 0.01" in text
    assert "beta = 5" in text
    assert "seed = 0" in text
    # manifest itself parses back to the same config
    cfg2 = parse_config(text)
    assert cfg2.scheme == cfg.scheme
    assert cfg2.params == cfg.params
    assert cfg2.grid == cfg.grid


# ---------------------------------------------------------------------------
# snapshots
# ---------------------------------------------------------------------------


@given(st.integers(min_value=0, max_value=2**31 - 1), st.sampled_from([1, 3]))
@settings(max_examples=20, deadline=None)
def test_snapshot_round_trip_bitwise(seed, dim):
    r = np.random.default_rng(seed)
    grid = GridSpec.line(5) if dim == 1 else GridSpec.box((3, 2, 2), (1.0, 1.0, 1.0))
    m = VectorField3.from_interior(grid, r.standard_normal(grid.shape_interior + (3,)))
    snap = snapshot_from_field(m, t=0.625)
    path = f"/tmp/llimex_snap_{seed}_{dim}.llmf"
    write_snapshot(snap, path)
    back = read_snapshot(path)
    os.unlink(path)
    assert back.dims == snap.dims
    assert back.spacing == snap.spacing
    assert back.time == snap.time
    assert np.array_equal(back.payload, snap.payload)
    m2 = field_from_snapshot(back)
    assert m2.grid == grid
    assert np.array_equal(m2.interior, m.interior)


def test_snapshot_truncated_file_rejected(tmp_path):
    g = GridSpec.line(4)
    m = VectorField3.zeros(g)
    path = tmp_path / "f.llmf"
    write_snapshot(m, str(path), t=0.0)
    raw = path.read_bytes()
    path.write_bytes(raw[:-5])
    with pytest.raises(ValueError, match="payload"):
        read_snapshot(str(path))
    path.write_bytes(b"XYZ")
    with pytest.raises(ValueError, match="truncated"):
        read_snapshot(str(path))
    path.write_bytes(b"BAD!" + raw[4:])
    with pytest.raises(ValueError, match="magic"):
        read_snapshot(str(path))
    path.write_bytes(raw[:4] + struct.pack("<I", 9) + raw[8:])
    with pytest.raises(ValueError, match="version"):
        read_snapshot(str(path))


def test_snapshot_endianness_golden_bytes(tmp_path):
    # value 1.0 in the first payload slot must be IEEE-754 little-endian
    g = GridSpec.line(1)
    m = VectorField3.zeros(g)
    m.interior[0] = (1.0, 0.0, 0.0)
    path = tmp_path / "g.llmf"
    write_snapshot(m, str(path), t=0.0)
    raw = path.read_bytes()
    header_size = struct.calcsize("<4sI3I3dd")
    assert raw[:4] == b"LLMF"
    assert raw[header_size:header_size + 8] == bytes([0, 0, 0, 0, 0, 0, 0xF0, 0x3F])


def test_snapshot_payload_order_x_fastest_component_interleaved(tmp_path):
    g = GridSpec.box((2, 2, 1), (1.0, 1.0, 0.5))
    m = VectorField3.zeros(g)
    # cell (x, y): value encodes (x, y, component)
    for y in range(2):
        for x in range(2):
            m.interior[0, y, x] = (100 * x + 10 * y, 100 * x + 10 * y + 1, 100 * x + 10 * y + 2)
    path = tmp_path / "h.llmf"
    write_snapshot(m, str(path), t=0.0)
    raw = path.read_bytes()
    header_size = struct.calcsize("<4sI3I3dd")
    vals = np.frombuffer(raw[header_size:], dtype="<f8")
    want = [0, 1, 2, 100, 101, 102, 10, 11, 12, 110, 111, 112]
    assert np.array_equal(vals, want)


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def test_cli_unknown_subcommand_exit_1(capsys):
    assert cli_main(["frobnicate"]) == 1


def test_cli_help_exit_0(capsys):
    assert cli_main(["--help"]) == 0


def test_cli_dump_tableau_ssp(capsys):
    assert cli_main(["dump-tableau", "--scheme", "ssp"]) == 0
    out = capsys.readouterr().out
    assert "sspimexrk2" in out
    assert "0.25" in out  # the quarter-step implicit diagonal
    assert "0.33333333" in out


def test_cli_dump_tableau_bdf_rejected(capsys):
    assert cli_main(["dump-tableau", "--scheme", "bdf2"]) == 1


def test_cli_converge_writes_csv_and_manifest(tmp_path):
    out = str(tmp_path / "runs")
    # tiny custom protocol through a config file to keep the test fast
    rc = cli_main(
        ["converge", "--scheme", "imexrk2", "--dim", "1", "--mode", "temporal", "--out", out]
    )
    assert rc == 0
    runs = os.listdir(out)
    assert len(runs) == 1
    d = os.path.join(out, runs[0])
    names = sorted(os.listdir(d))
    assert names == ["errors.csv", "manifest"]
    lines = open(os.path.join(d, "errors.csv")).read().strip().splitlines()
    assert lines[0] == "k,h,linf,l2,h1"
    assert lines[-1].startswith("order,")
    assert len(lines) == 2 + 5  # header + five samples + order row
    manifest = open(os.path.join(d, "manifest")).read()
    assert "kind = converge" in manifest
    parse_config(manifest)  # manifest must be a valid config


def test_cli_converge_deterministic_output(tmp_path):
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    for out in (out1, out2):
        assert cli_main(["converge", "--dim", "1", "--mode", "temporal", "--out", out]) == 0
    d1 = os.path.join(out1, os.listdir(out1)[0], "errors.csv")
    d2 = os.path.join(out2, os.listdir(out2)[0], "errors.csv")
    assert open(d1, "rb").read() == open(d2, "rb").read()


def test_cli_stability_quick(tmp_path):
    out = str(tmp_path / "runs")
    rc = cli_main(
        ["stability", "--n", "16", "--ratios", "1,10", "--trials", "3", "--steps", "5", "--out", out]
    )
    assert rc == 0
    d = os.path.join(out, os.listdir(out)[0])
    lines = open(os.path.join(d, "stability.csv")).read().strip().splitlines()
    assert lines[0].startswith("ratio,")
    assert len(lines) == 3


def test_cli_bad_scheme_exit_1(capsys):
    assert cli_main(["converge", "--scheme", "rk9"]) == 1
    assert "error" in capsys.readouterr().err


def test_cli_relax_smoke(tmp_path):
    out = str(tmp_path / "runs")
    rc = cli_main(["relax", "--init", "uniform", "--max-steps", "40", "--out", out])
    assert rc == 0
    d = os.path.join(out, os.listdir(out)[0])
    names = sorted(os.listdir(d))
    assert "energy_uniform.csv" in names
    assert "final_uniform.llmf" in names
    assert "manifest" in names
    header = open(os.path.join(d, "energy_uniform.csv")).readline().strip()
    assert header == "step,t,E_exchange,E_anis,E_demag,E_zeeman,E_total"
    snap = read_snapshot(os.path.join(d, "final_uniform.llmf"))
    assert snap.dims == (32, 64, 1)


def test_cli_hysteresis_smoke(tmp_path):
    out = str(tmp_path / "runs")
    rc = cli_main(
        ["hysteresis", "--axis", "y", "--field-steps", "2",
         "--max-steps-per-field", "30", "--out", out]
    )
    assert rc == 0
    d = os.path.join(out, os.listdir(out)[0])
    names = sorted(os.listdir(d))
    assert "loop.csv" in names and "summary.csv" in names and "manifest" in names
    lines = open(os.path.join(d, "loop.csv")).read().strip().splitlines()
    assert lines[0] == "branch,H_mT,mx,my,mz,converged,steps"
    assert len(lines) == 1 + 2 * 3  # header + two branches of three samples
