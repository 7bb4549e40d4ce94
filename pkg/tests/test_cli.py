import os

import pytest
from hypothesis import given, settings, strategies as st

from xyzglass.cli import main
from xyzglass.config import ConfigError, parse_config

MINIMAL = """
[model]
N = 6
gamma = 0.7
h = 0.8
[disorder]
variant = ordered
"""


def _write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_minimal_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.command == "single"
    assert cfg.quench.realizations == 5000
    assert cfg.disorder.sigma_J == 1.0
    assert cfg.model.boundary.value == "periodic"


def test_unknown_key_reports_line():
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL + "colour = blue\n")
    assert info.value.key == "disorder.colour"
    assert info.value.line == 8


@pytest.mark.parametrize("extra", ["[grid]\naxis1 = lam\naxis1_steps = 1\n",
                                   "[bogus]\n", "[quench]\nrealizations = many\n"])
def test_rejected(extra):
    with pytest.raises(ConfigError):
        parse_config(MINIMAL + extra)


def test_line_scan_needs_grid():
    with pytest.raises(ConfigError):
        parse_config("[run]\ncommand = venus\n" + MINIMAL)


@settings(max_examples=30, deadline=None)
@given(N=st.integers(2, 12), gamma=st.floats(-1, 1), h=st.floats(0, 2), mu=st.floats(-2, 2),
       sj=st.floats(0, 2), steps=st.integers(2, 50), seed=st.integers(0, 2**63),
       variant=st.sampled_from(["ordered", "planar", "azimuthal", "both"]),
       command=st.sampled_from(["single", "scan2d", "scan1d", "venus", "hc"]))
def test_round_trip(N, gamma, h, mu, sj, steps, seed, variant, command):
    text = (f"[run]\ncommand = {command}\n[model]\nN = {N}\ngamma = {gamma!r}\nh = {h!r}\n"
            f"[disorder]\nvariant = {variant}\nmu = {mu!r}\nsigma_J = {sj!r}\n"
            f"[quench]\nmaster_seed = {seed}\n"
            f"[grid]\naxis1 = lam\naxis1_min = -1.0\naxis1_max = 1.0\naxis1_steps = {steps}\n"
            "axis2 = mu\naxis2_min = -2.0\naxis2_max = 0.5\naxis2_steps = 3\n")
    cfg = parse_config(text)
    assert parse_config(cfg.to_text()) == cfg


def test_metadata_reparses(tmp_path):
    cfg = parse_config(MINIMAL)
    assert main(["--config", _write(tmp_path, MINIMAL), "--output", str(tmp_path / "o"),
                 "--realizations", "4", "--quiet"]) == 0
    meta = (tmp_path / "o" / "metadata.txt").read_text().splitlines()
    sections = {}
    for line in meta:
        key, val = line.split(" = ", 1)
        if "." in key and not key.startswith("summary."):
            sec, k = key.split(".", 1)
            sections.setdefault(sec, []).append(f"{k} = {val}")
    text = "".join(f"[{s}]\n" + "\n".join(v) + "\n" for s, v in sections.items())
    again = parse_config(text)
    assert again.model == cfg.model and again.quench.realizations == 4


def test_zeeman_single(tmp_path, capsys):
    text = MINIMAL.replace("N = 6", "N = 4")
    assert main(["--config", _write(tmp_path, text), "--output", str(tmp_path / "o"),
                 "--realizations", "3", "--quiet"]) == 0
    lines = (tmp_path / "o" / "results.csv").read_text().splitlines()
    assert lines[0].startswith("# schema=")
    header, row = lines[1].split(","), lines[2].split(",")
    assert len(lines) == 3
    vals = dict(zip(header, row))
    assert float(vals["m_z_mean"]) == 1.0
    for k in ("concurrence_mean", "ggm_mean", "ggm2_mean"):
        assert float(vals[k]) == 0.0
    assert "m_z_mean = 1.0" in capsys.readouterr().out


def test_rerun_is_byte_identical(tmp_path):
    text = ("[run]\ncommand = venus\n" + MINIMAL.replace("N = 6", "N = 4")
            + "[grid]\naxis1 = lam\naxis1_min = 0.2\naxis1_max = 0.6\naxis1_steps = 3\n")
    path = _write(tmp_path, text)
    outs = []
    for n in range(2):
        out = tmp_path / f"o{n}"
        assert main(["--config", path, "--output", str(out), "--seed", "7",
                     "--realizations", "30", "--quiet"]) == 0
        outs.append((out / "results.csv").read_bytes())
    assert outs[0] == outs[1]
    assert b",," not in outs[0]


def test_bad_config_exit_code(tmp_path, capsys):
    assert main(["--config", _write(tmp_path, MINIMAL + "oops\n")]) == 2
    assert "line 8" in capsys.readouterr().err
    assert main(["--config", os.path.join(str(tmp_path), "missing.ini")]) == 2


def test_inline_comments():
    cfg = parse_config(MINIMAL.replace("gamma = 0.7", "gamma = 0.7   # anisotropy")
                       + "; trailing comment line\n")
    assert cfg.model.gamma == 0.7
