import io

import numpy as np
import pytest

from pdcsource.cli import main
from pdcsource.gridio import load_grid, read_header
from pdcsource.ingest import MeasuredJSI, save_measured

SMALL = ["--grid-n", "40", "--n-angles", "5"]


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def test_check():
    code, text = run(["check"])
    assert code == 0 and "group-velocity matched: yes" in text


def test_jsa_writes_grid_image_and_header(tmp_path):
    prefix = str(tmp_path / "pos")
    code, text = run(["jsa", *SMALL, "-o", prefix])
    assert code == 0 and "K = " in text
    head = read_header(prefix + ".grid")
    assert '"chirp_sign":1' in head["config"]
    assert (tmp_path / "pos.ppm").exists() and (tmp_path / "pos.ppm.axes.txt").exists()


def test_output_reproducible_from_own_header(tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    assert run(["jsa", *SMALL, "--chirp-sign", "negative", "-o", a])[0] == 0
    assert run(["jsa", "--config", a + ".grid", "-o", b])[0] == 0
    assert (tmp_path / "a.grid").read_bytes() == (tmp_path / "b.grid").read_bytes()


@pytest.mark.parametrize("threads", ["4", "8"])
def test_threads_do_not_change_bytes(tmp_path, threads):
    one, many = str(tmp_path / "one"), str(tmp_path / "many")
    run(["jsa", *SMALL, "-o", one])
    run(["jsa", *SMALL, "--threads", threads, "-o", many])
    assert (tmp_path / "one.grid").read_bytes() == (tmp_path / "many.grid").read_bytes()


def test_schmidt_and_convergence(tmp_path):
    code, text = run(["schmidt", *SMALL, "--check-convergence", "--modes", "2", "-o", str(tmp_path / "s")])
    assert code == 0 and "convergence: |dK|" in text and "K (flat phase)" in text
    assert (tmp_path / "s.schmidt.txt").read_text().startswith("# config: ")


def test_temporal(tmp_path):
    run(["jsa", *SMALL, "-o", str(tmp_path / "j")])
    code, text = run(["temporal", "--input", str(tmp_path / "j.grid"), "-o", str(tmp_path / "t")])
    assert code == 0 and "temporal correlation" in text
    g = load_grid(tmp_path / "t.jti.grid")
    assert g.row_unit == "fs" and g.kind == "jta"


def test_hom_one_and_two_inputs(tmp_path):
    run(["jsa", *SMALL, "-o", str(tmp_path / "p")])
    run(["jsa", *SMALL, "--chirp-sign", "negative", "-o", str(tmp_path / "n")])
    code, text = run(["hom", str(tmp_path / "p.grid"), "--ray", "o", "-o", str(tmp_path / "h")])
    assert code == 0 and "visibility Tr(rho1 rho2)" in text
    data = np.loadtxt(tmp_path / "h.hom_o.txt")
    assert data.shape == (301, 2)
    code, text = run(["hom", str(tmp_path / "p.grid"), str(tmp_path / "n.grid")])
    assert code == 0 and "chirp signs: 1, -1" in text


def test_hom_refuses_mismatched_axes(tmp_path):
    run(["jsa", *SMALL, "-o", str(tmp_path / "a")])
    run(["jsa", "--grid-n", "42", "--n-angles", "5", "-o", str(tmp_path / "b")])
    code, _ = run(["hom", str(tmp_path / "a.grid"), str(tmp_path / "b.grid")])
    assert code == 2


def test_sweep(tmp_path):
    code, text = run(
        ["sweep", "--rows", "crystal_length:4:5:2", "--cols", "chirp_sign=-1,1", "--threads", "2", "-o", str(tmp_path / "sw")]
    )
    assert code == 0 and "purity:" in text
    g = load_grid(tmp_path / "sw.purity.grid")
    assert g.values.shape == (2, 2) and g.meta["fidelity"] == "reduced" and g.row_unit == "mm"
    assert (tmp_path / "sw.K.grid").exists() and (tmp_path / "sw.purity.ppm").exists()
    assert run(["sweep", "--rows", "length:1:2:2", "--cols", "chirp_sign=1"])[0] == 2


def test_analyze(tmp_path, pos_source):
    save_measured(MeasuredJSI.from_amplitude(pos_source.jsa_), tmp_path / "m.csv")
    code, text = run(["analyze", str(tmp_path / "m.csv"), "-o", str(tmp_path / "m")])
    assert code == 0 and "reference" in text
    assert (tmp_path / "m.report.txt").read_text().startswith("K_no_phase ")


@pytest.mark.parametrize(
    "argv",
    [
        ["jsa", "--length-mm", "0"],
        ["jsa", "--chirp-sign", "sideways"],
        ["jsa", "--n-angles", "4"],
        ["check", "--pump-angle-fwhm-deg", "9"],
        ["jsa", "--beam-fwhm-um", "700"],
        ["jsa", "--threads", "0"],
    ],
)
def test_validation_errors_exit_2(argv, capsys):
    code, _ = run(argv)
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_missing_file_exit_1(tmp_path):
    assert run(["analyze", str(tmp_path / "nope.csv")])[0] == 1


def test_bad_config_key_exit_2(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("[pump]\nwavelength = 415\n")
    assert run(["check", "--config", str(p)])[0] == 2


def test_help_exits_cleanly():
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0


def test_documented_examples_load():
    from pathlib import Path

    ex = Path(__file__).resolve().parents[1] / "docs" / "examples"
    assert run(["analyze", str(ex / "measured_grid.csv")])[0] == 0
    assert run(["analyze", str(ex / "measured_three_column.csv"), "--format", "three_column"])[0] == 0
    assert run(["check", "--config", str(ex / "reference_config.toml")])[0] == 0
