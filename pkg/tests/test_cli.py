import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from blocktoeplitz import MatrixSymbol, adjoint, random_symbol
from blocktoeplitz.cli import EXIT_COMPUTE, EXIT_DIMENSION, EXIT_PARSE, main


def write(tmp_path, name, S):
    p = tmp_path / name
    p.write_text(json.dumps(S.to_dict()))
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def files(tmp_path, w, wbar, cancel_pair):
    F, G = cancel_pair
    return {
        "F": write(tmp_path, "F.json", F),
        "G": write(tmp_path, "G.json", G),
        "w": write(tmp_path, "w.json", w),
        "wbar": write(tmp_path, "wbar.json", wbar),
        "sa": write(tmp_path, "sa.json", w + wbar),
        "n1": write(tmp_path, "n1.json", MatrixSymbol.scalar({0: 1.0})),
    }


def test_zero_semicommutator_cancel_pair(capsys, files):
    code, out, _ = run(capsys, "check-zero-semicommutator", files["F"], files["G"])
    assert code == 0
    obj = json.loads(out)
    assert obj["zero"] is True
    assert obj["criterion_norm"] <= 1e-10
    assert len(obj["certificates"]) == 2
    assert all(c["verified"] for c in obj["certificates"])


def test_zero_semicommutator_analytic_adjoint(capsys, tmp_path, rng):
    F = adjoint(random_symbol(2, 3, 0, rng))
    G = random_symbol(2, 2, 2, rng)
    code, out, _ = run(capsys, "check-zero-semicommutator",
                       write(tmp_path, "a.json", F), write(tmp_path, "b.json", G))
    assert code == 0 and json.loads(out)["zero"] is True


def test_zero_semicommutator_self_adjoint_pair(capsys, files):
    code, out, _ = run(capsys, "check-zero-semicommutator", files["sa"], files["sa"])
    obj = json.loads(out)
    assert code == 0
    assert obj["zero"] is False
    assert "certificates" not in obj


def test_commutator_and_normal(capsys, files):
    code, out, _ = run(capsys, "check-zero-commutator", files["w"], files["w"])
    obj = json.loads(out)
    assert code == 0 and obj["commute"] is True and obj["residual"] == 0.0
    code, out, _ = run(capsys, "check-normal", files["sa"])
    assert json.loads(out)["normal"] is True
    code, out, _ = run(capsys, "check-normal", files["w"])
    obj = json.loads(out)
    assert obj["normal"] is False
    assert obj["criterion_norm"] == pytest.approx(1.0, abs=1e-10)


def test_scan_closed_form(capsys, files):
    code, out, _ = run(capsys, "scan", files["w"], files["wbar"],
                       "--radii", "0.25,0.5,0.75", "--angles", "3")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert out.splitlines()[0] == "r,theta,norm,trace"
    assert len(rows) == 9
    for row in rows:
        r = float(row["r"])
        assert float(row["norm"]) == pytest.approx(1 - r * r, abs=1e-12)


def test_scan_analytic_pair_is_zero(capsys, tmp_path, rng):
    A = write(tmp_path, "a.json", random_symbol(1, 3, 0, rng))
    B = write(tmp_path, "b.json", random_symbol(1, 3, 0, rng))
    code, out, _ = run(capsys, "scan", A, B, "--radii", "0.5,0.9", "--angles", "4")
    assert code == 0
    assert all(float(row["norm"]) == 0.0 for row in csv.DictReader(io.StringIO(out)))


def test_scan_normality_mode(capsys, files):
    code, out, _ = run(capsys, "scan", files["sa"], "--mode", "normality",
                       "--radii", "0.5", "--angles", "2")
    assert code == 0
    assert all(float(row["norm"]) <= 1e-10 for row in csv.DictReader(io.StringIO(out)))


def test_scan_needs_second_symbol(capsys, files):
    code, _, err = run(capsys, "scan", files["w"])
    assert code == EXIT_PARSE and "second symbol" in err


def test_scan_threads_env_is_deterministic(capsys, files, monkeypatch, tmp_path):
    args = ["scan", files["sa"], files["sa"], "--radii", "0.3,0.6,0.9", "--angles", "5"]
    _, one, _ = run(capsys, *args, "--threads", "1")
    monkeypatch.setenv("BTL_THREADS", "4")
    _, four, _ = run(capsys, *args, "--threads", "1")
    assert one == four


def test_certificate_symbol_and_xi2(capsys, tmp_path, wbar):
    f = write(tmp_path, "f.json", MatrixSymbol.from_entries([[wbar, None], [wbar, None]]))
    g = write(tmp_path, "g.json", MatrixSymbol.from_entries([[wbar, None], [-wbar, None]]))
    code, out, _ = run(capsys, "certificate", f, g)
    obj = json.loads(out)
    assert code == 0 and obj["verified"] is True
    assert set(obj["certificate"]) >= {"A", "R", "residual_f", "residual_g"}
    code, out, _ = run(capsys, "certificate", f, g, "--z", "0.3", "0.1")
    assert code == 0 and json.loads(out)["value"] <= 1e-6


def test_certificate_not_zero_instance(capsys, files):
    code, _, err = run(capsys, "certificate", files["wbar"], files["wbar"])
    assert code == EXIT_COMPUTE and "does not vanish" in err


def test_xi2_command(capsys, files):
    code, out, _ = run(capsys, "xi2", files["wbar"], files["wbar"], "--z", "0", "0")
    obj = json.loads(out)
    assert code == 0
    assert obj["value"] == pytest.approx(1.0, abs=1e-6)
    code, out, _ = run(capsys, "xi2", files["wbar"], files["wbar"], "--z", "0", "0",
                       "--method", "subgradient", "--permutations", "all")
    assert json.loads(out)["value"] == pytest.approx(1.0, abs=1e-6)


def test_trace_identity_command(capsys, tmp_path, rng):
    F = write(tmp_path, "a.json", random_symbol(2, 2, 2, rng))
    G = write(tmp_path, "b.json", random_symbol(2, 2, 2, rng))
    code, out, _ = run(capsys, "trace-identity", F, G)
    obj = json.loads(out)
    assert code == 0
    assert obj["points"] == 12
    assert obj["within_tolerance"] is True


def test_generate_squarewave_degree_one(capsys):
    code, out, _ = run(capsys, "generate", "--kind", "squarewave", "--degree", "1")
    S = MatrixSymbol.from_dict(json.loads(out))
    assert code == 0
    assert S.coefficient(1)[0, 0] == pytest.approx(2 / (1j * np.pi), abs=1e-15)
    assert S.coefficient(-1)[0, 0] == pytest.approx(-2 / (1j * np.pi), abs=1e-15)


def test_generate_analytic_and_determinism(capsys):
    _, a, _ = run(capsys, "generate", "--kind", "analytic", "--n", "2", "--degree", "3")
    assert MatrixSymbol.from_dict(json.loads(a)).deg_minus == 0
    _, r1, _ = run(capsys, "generate", "--kind", "random", "--degree", "2", "--seed", "7")
    _, r2, _ = run(capsys, "generate", "--kind", "random", "--degree", "2", "--seed", "7")
    assert r1 == r2


def test_generate_negative_degree(capsys):
    code, _, _ = run(capsys, "generate", "--kind", "random", "--degree", "-1")
    assert code == EXIT_PARSE


def test_repeated_runs_byte_identical(capsys, files):
    outs = {run(capsys, "check-zero-semicommutator", files["F"], files["G"])[1] for _ in range(2)}
    assert len(outs) == 1


def test_out_file(capsys, files, tmp_path):
    target = tmp_path / "verdict.json"
    code, out, _ = run(capsys, "check-normal", files["w"], "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["normal"] is False


def test_parse_error(capsys, tmp_path, files):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, _ = run(capsys, "check-normal", str(bad))
    assert code == EXIT_PARSE
    code, _, _ = run(capsys, "check-normal", str(tmp_path / "missing.json"))
    assert code == EXIT_PARSE


def test_dimension_mismatch(capsys, files):
    code, _, err = run(capsys, "check-zero-semicommutator", files["F"], files["n1"])
    assert code == EXIT_DIMENSION
    assert code != EXIT_PARSE


def test_bad_radius_rejected(capsys, files):
    code, _, err = run(capsys, "scan", files["w"], files["wbar"], "--radii", "1.5")
    assert code == EXIT_PARSE and "(0, 1)" in err


def test_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "blocktoeplitz", "check-normal", files["sa"]],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["normal"] is True
