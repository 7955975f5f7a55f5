import json
import subprocess
import sys

import pytest

from shellkernel.cli import EXIT_CONFIG, EXIT_FAILED, EXIT_NUMERIC, EXIT_OK, build_config, fmt, main, make_parser
from shellkernel.kernel import KernelContext
from shellkernel.shells import verify_inside
from shellkernel.weight import ModelWeight

W12 = ["--k", "10000", "--A", "1", "--B", "2"]


def run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_exit_codes_distinct():
    assert len({EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NUMERIC}) == 4


def test_profile_five_points(tmp_path, capsys):
    out = tmp_path / "p.csv"
    code, _, _ = run(["profile", *W12, "--t-start", "300", "--t-stop", "20000", "--points", "5", "--out", str(out)], capsys)
    assert code == EXIT_OK
    lines = out.read_text().splitlines()
    assert len(lines) == 6
    assert lines[0] == "t,tau,log_bergman,dominant_index,log_rho_pred"
    ts = [float(line.split(",")[0]) for line in lines[1:]]
    assert ts == sorted(ts)


def test_profile_byte_identical(tmp_path, capsys):
    args = ["profile", *W12, "--t-start", "100", "--t-stop", "21000", "--points", "40"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run([*args, "--out", str(a)], capsys)
    run([*args, "--out", str(b)], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_profile_reproduces_shell_value(tmp_path, capsys):
    w = ModelWeight(1, 2)
    rep = verify_inside(KernelContext(10**4, w), [1])[0]
    out = tmp_path / "p.csv"
    t = fmt(rep.spec.tau_shell)
    run(["profile", *W12, "--t-start", t, "--t-stop", t, "--points", "1", "--out", str(out)], capsys)
    row = out.read_text().splitlines()[1].split(",")
    assert float(row[2]) == rep.measured_shell_log
    assert int(row[3]) == 1


def test_profile_bad_point_logged(tmp_path, capsys):
    out = tmp_path / "p.csv"
    # k=500: the first point sits in the uncertified band at the boundary
    code, _, err = run(["profile", "--k", "500", "--A", "1", "--B", "2", "--t-start", "7.95",
                        "--t-stop", "500", "--points", "3", "--out", str(out)], capsys)
    assert code == EXIT_OK
    first = out.read_text().splitlines()[1].split(",")
    assert first[2] == "" and "t=" in err


def test_profile_start_below_disk(capsys):
    code, _, err = run(["profile", *W12, "--t-start", "5"], capsys)
    assert code == EXIT_CONFIG and "config error" in err


def test_shells_json(capsys):
    code, out, _ = run(["shells", *W12, "--a-list", "1,2,3"], capsys)
    assert code == EXIT_OK
    recs = json.loads(out)
    assert len(recs) == 3
    for r in recs:
        assert set(r) == {"a", "tau_shell", "tau_gap", "log_measured", "log_predicted", "log_gap_suppression", "pass"}
        assert r["pass"] is True


def test_shells_empty_list(capsys):
    code, out, _ = run(["shells", *W12, "--a-list", ""], capsys)
    assert code == EXIT_OK
    assert json.loads(out) == []


def test_shells_out_of_regime(capsys):
    code, _, _ = run(["shells", *W12, "--a-list", "50"], capsys)
    assert code == EXIT_CONFIG


def test_json_round_trip(capsys):
    _, out, _ = run(["shells", *W12, "--a-list", "2"], capsys)
    rec = json.loads(out)[0]
    rep = verify_inside(KernelContext(10**4, ModelWeight(1, 2)), [2])[0]
    assert rec["log_measured"] == rep.measured_shell_log
    assert rec["tau_gap"] == rep.spec.tau_gap


@pytest.mark.parametrize("x", [0.1, 1 / 3, 2.0**-1074, 1.7976931348623157e308, -12345.678901234567])
def test_fmt_round_trip(x):
    assert float(fmt(x)) == x


def test_fmt_ints_and_none():
    assert fmt(7) == "7"
    assert fmt(None) == ""


def test_verify_oracles_k200(capsys):
    code, out, _ = run(["verify", "--suite", "oracles", "--k", "200"], capsys)
    assert code == EXIT_OK, out
    assert "suite oracles" in out


def test_verify_inside(capsys, tmp_path):
    detail = tmp_path / "d.json"
    code, out, _ = run(["verify", "--suite", "inside", *W12, "--json", str(detail)], capsys)
    assert code == EXIT_OK, out
    recs = json.loads(detail.read_text())
    assert recs and all(r["pass"] for r in recs)


@pytest.mark.parametrize("suite", ["neck", "concentration", "subspace", "series"])
def test_verify_other_suites(suite, capsys):
    code, out, _ = run(["verify", "--suite", suite, "--k", "10000"], capsys)
    assert code == EXIT_OK, out


def test_verify_failing_check_exit_1(capsys):
    # a tiny k makes the shell statements too coarse to pass
    code, _, _ = run(["verify", "--suite", "inside", "--k", "100", "--A", "1", "--B", "2", "--a-list", "1,2"], capsys)
    assert code == EXIT_FAILED


def test_verify_unknown_suite(capsys):
    assert run(["verify", "--suite", "bogus"], capsys)[0] == EXIT_CONFIG


def test_verify_needs_suite(capsys):
    assert run(["verify"], capsys)[0] == EXIT_CONFIG


def test_bad_k_and_tolerance(capsys):
    assert run(["ja", "--k", "50"], capsys)[0] == EXIT_CONFIG
    assert run(["ja", "--k", "100000000"], capsys)[0] == EXIT_CONFIG
    assert run(["ja", "--rel-tol", "1e-14"], capsys)[0] == EXIT_CONFIG


def test_unknown_flag(capsys):
    assert run(["ja", "--frobnicate"], capsys)[0] == EXIT_CONFIG


def test_config_file_and_override(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("# weight\nk = 2000\nA = 1\nB = 2.5\nkappa_term = 0.25 3/2 1\nprefactor = yes\nn = 2\n")
    args = make_parser().parse_args(["ja", "--config", str(cfg_file), "--B", "3", "--kappa-term", "-1", "2", "0"])
    cfg = build_config(args)
    assert (cfg.k, cfg.A, cfg.B, cfg.n, cfg.prefactor_enabled) == (2000, 1.0, 3.0, 2, True)
    # flag terms replace file terms
    assert cfg.kappa.as_dict() == {(2, 0): -1.0}


def test_config_file_kappa_terms(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("kappa_term = 0.25 3/2 1\nkappa_term = 0.5 2 0\n")
    cfg = build_config(make_parser().parse_args(["ja", "--config", str(cfg_file)]))
    assert set(cfg.kappa.as_dict()) == {(3 / 2, 1), (2, 0)}


@pytest.mark.parametrize("text", ["k 100\n", "colour = red\n", "k = many\n", "kappa_term = 1 2\n"])
def test_config_file_errors(tmp_path, capsys, text):
    cfg_file = tmp_path / "bad.cfg"
    cfg_file.write_text(text)
    assert run(["ja", "--config", str(cfg_file)], capsys)[0] == EXIT_CONFIG


def test_missing_config_file(capsys):
    assert run(["ja", "--config", "/nonexistent/run.cfg"], capsys)[0] == EXIT_CONFIG


def test_kappa_flag_validation(capsys):
    # exponent 1/2 is outside the admissible range for kappa
    assert run(["ja", "--kappa-term", "1", "1/2", "0"], capsys)[0] == EXIT_CONFIG


def test_ja_command(capsys):
    code, out, _ = run(["ja", "--k", "200", "--a-list", "1,2"], capsys)
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "a,t_a,log_J,log_J_laplace,laplace_ratio"
    row = lines[1].split(",")
    assert float(row[2]) == pytest.approx(2000.5006979832415, abs=1e-8)
    assert abs(float(row[4]) - 1) < 0.01


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "shellkernel", "ja", "--k", "200", "--a-list", "1"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.startswith("a,t_a")
