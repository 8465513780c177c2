"""End-to-end tests for the batch front end.

Every test drives cli.main with a scratch --out directory and checks the
exit code, stdout payload, artifact file and manifest together.
"""

import hashlib
import json
from fractions import Fraction

import pytest

from artifact import cli, meanvalue


def run(capsys, tmp_path, *argv):
    code = cli.main(list(argv) + ["--out", str(tmp_path)])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def payload(capsys, tmp_path, *argv):
    code, out, err = run(capsys, tmp_path, *argv)
    assert code == 0, err
    return json.loads(out)


def test_count_j_golden(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, "count-j", "--k", "3", "--s", "1",
                       "--x", "5")
    assert code == 0
    assert json.loads(out) == {"J": "5"}


def test_artifact_and_manifest_agree(capsys, tmp_path):
    _, out, _ = run(capsys, tmp_path, "count-j", "--k", "3", "--s", "1",
                    "--x", "5")
    artifact = tmp_path / "count-j.json"
    assert artifact.read_text(encoding="utf-8") == out
    manifest = json.loads((tmp_path / "run.manifest.json").read_text())
    assert manifest["subcommand"] == "count-j"
    assert manifest["parameters"] == {"k": "3", "s": "1", "x": "5",
                                      "strategy": "auto"}
    assert manifest["budget"] == str(meanvalue.DEFAULT_BUDGET)
    assert manifest["threads"] == "1"
    digest = hashlib.sha256(out.encode("utf-8")).hexdigest()
    assert manifest["artifacts"] == {"count-j.json": digest}
    assert manifest["wall_seconds"] >= 0


def test_count_restricted_matches_library(capsys, tmp_path):
    got = payload(capsys, tmp_path, "count-restricted", "--k", "2", "--s",
                  "2", "--x", "8", "--p", "3", "--c", "1", "--xi", "1")
    params = meanvalue.SystemParams(2, 2, 8)
    want = meanvalue.count_j_restricted(
        params, meanvalue.ResidueConstraint(3, 1, 1))
    assert got == {"J": str(want)}


def test_count_restricted_partial_flags_rejected(capsys, tmp_path):
    code, _, err = run(capsys, tmp_path, "count-restricted", "--k", "2",
                       "--s", "2", "--x", "8", "--p", "3")
    assert code == 1
    assert json.loads(err)["error"] == "invalid-input"


def test_diagonal_matches_library(capsys, tmp_path):
    got = payload(capsys, tmp_path, "diagonal", "--k", "3", "--s", "2",
                  "--x", "10")
    want = meanvalue.diagonal_oracle(meanvalue.SystemParams(3, 2, 10))
    assert got == {"diagonal": str(want)}


def test_ladder_json_and_csv(capsys, tmp_path):
    got = payload(capsys, tmp_path, "ladder", "--k", "2", "--s", "1",
                  "--x-values", "4,8,16")
    assert got["rows"] == [{"X": "4", "J": "4"}, {"X": "8", "J": "8"},
                           {"X": "16", "J": "16"}]
    assert got["slope"] == pytest.approx(1.0)

    code, out, _ = run(capsys, tmp_path, "ladder", "--k", "2", "--s", "1",
                       "--x-values", "4,8", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "X,J,log2X,log2J"
    assert lines[1].startswith("4,4,")
    assert (tmp_path / "ladder.csv").read_text(encoding="utf-8") == out


def test_congruence_b_max_then_replay_witness(capsys, tmp_path):
    family = ["--p", "5", "--a", "0", "--b", "1", "--k", "3", "--r", "2",
              "--h", "2"]
    best = payload(capsys, tmp_path, "congruence-b", *family)
    assert best["cardinality"] == "2"
    replay = payload(capsys, tmp_path, "congruence-b", *family,
                     "--sigma", ",".join(best["sigma"]),
                     "--xi", best["xi"], "--eta", best["eta"],
                     "--m", ",".join(best["m"]))
    assert replay["cardinality"] == best["cardinality"]
    assert sorted(replay["witnesses"]) == sorted(best["witnesses"])


def test_verify_lemma_infers_depth(capsys, tmp_path):
    got = payload(capsys, tmp_path, "verify-lemma", "--lemma", "3.6",
                  "--p", "5", "--a", "0", "--b", "1", "--k", "3", "--r", "2")
    assert got["status"] == "pass"
    assert got["h"] == "2"
    assert got["rhs"] == "6"

    got = payload(capsys, tmp_path, "verify-lemma", "--lemma", "3.3",
                  "--p", "5", "--a", "1", "--b", "2", "--k", "3", "--r", "1")
    assert got["status"] == "pass"
    assert got["h"] == "3"


def test_hensel_single_and_system(capsys, tmp_path):
    got = payload(capsys, tmp_path, "hensel", "--modulus", "5", "--level",
                  "2", "--poly", "0,1")
    assert got == {"count": "1"}
    got = payload(capsys, tmp_path, "hensel", "--modulus", "5", "--level",
                  "2", "--poly=-1,0,1", "--poly=-4,0,1")
    assert got == {"count": "4"}


def test_lemma32_certificate(capsys, tmp_path):
    got = payload(capsys, tmp_path, "lemma32", "--alpha", "1", "--beta", "1")
    assert got == {"alpha": "1", "beta": "1", "c": ["-1", "1"],
                   "d": ["2", "1"]}


def test_exponent_minimum(capsys, tmp_path):
    got = payload(capsys, tmp_path, "exponent", "--k", "3", "--s", "8")
    assert got["minimum"]["exponent"] == "10"
    assert got["minimum"]["source"] == "main-range"
    assert got["bounds"][0] == got["minimum"]
    exponents_seen = [Fraction(b["exponent"]) for b in got["bounds"]]
    assert exponents_seen == sorted(exponents_seen)


def test_gtilde_table_json_and_csv(capsys, tmp_path):
    got = payload(capsys, tmp_path, "gtilde-table", "--k-min", "6",
                  "--k-max", "9")
    assert [row["value"] for row in got["rows"]] == ["52", "75", "103", "135"]
    assert all(row["consistent"] is True for row in got["rows"])

    code, out, _ = run(capsys, tmp_path, "gtilde-table", "--k-min", "6",
                       "--k-max", "6", "--format", "csv")
    assert code == 0
    assert out.splitlines() == [
        "k,value,first,second,provenance,theta,consistent",
        "6,52,52,61,first,8,True",
    ]


def test_gtilde_plus_and_tarry(capsys, tmp_path):
    assert payload(capsys, tmp_path, "gtilde-plus", "--k", "6") == {
        "bound": "26"}
    got = payload(capsys, tmp_path, "tarry", "--k", "8")
    assert got == {"tarry": "50", "C": "126", "S": "112",
                   "sigma": "1/96", "tau": "1/192"}


def test_weyl_eval_integer_phases(capsys, tmp_path):
    got = payload(capsys, tmp_path, "weyl-eval", "--coeffs", "2,3", "--x",
                  "7")
    assert got["re"] == 7.0
    assert got["im"] == 0.0
    assert got["modulus"] == 7.0


def test_minor_arc_both_verdicts(capsys, tmp_path):
    got = payload(capsys, tmp_path, "minor-arc", "--alpha", "377/610",
                  "--k", "3", "--x", "100")
    assert got["verdict"] == "minor"
    assert got["witness"] is None
    got = payload(capsys, tmp_path, "minor-arc", "--alpha", "1/2", "--k",
                  "2", "--x", "100")
    assert got["verdict"] == "major"
    assert got["witness"] == {"a": "1", "q": "2"}


def test_frac_min_exact_zero(capsys, tmp_path):
    got = payload(capsys, tmp_path, "frac-min", "--coeffs", "0,0,0,1/97",
                  "--n", "97")
    assert got == {"n": "97", "value": "0", "below_reference": True}


def test_waring_count(capsys, tmp_path):
    got = payload(capsys, tmp_path, "waring-count", "--s", "2", "--k", "3",
                  "--n", "1729")
    assert got == {"count": "4"}


def test_singular_series_telescopes_for_linear(capsys, tmp_path):
    got = payload(capsys, tmp_path, "singular-series", "--s", "3", "--k",
                  "1", "--n", "10", "--q", "12")
    assert got["value"] == pytest.approx(1.0, abs=1e-12)
    assert got["movement"] == pytest.approx(0.0, abs=1e-12)
    assert got["q_max"] == "12"


def test_constants_shapes(capsys, tmp_path):
    got = payload(capsys, tmp_path, "constants", "--s", "3", "--k", "1",
                  "--q", "6", "--box", "4", "--grid", "32")
    assert got["series"] == pytest.approx(1.0, abs=1e-9)
    assert isinstance(got["integral"], float)
    assert got["grid"] == "32"


def test_ledger_zero_and_explicit_choices(capsys, tmp_path):
    got = payload(capsys, tmp_path, "ledger", "--k", "3", "--r", "1",
                  "--mode", "k", "--steps", "3")
    assert [st["b"] for st in got["states"]] == ["1", "3", "9", "27"]
    assert got["states"][-1]["psi"] == "54"
    assert got["states"][-1]["c"] == "66"
    assert got["report"]["ok"] is True
    assert got["report"]["greedy_b_is_power"] is True

    got = payload(capsys, tmp_path, "ledger", "--k", "3", "--r", "1",
                  "--mode", "k", "--steps", "2", "--h", "0,4,1")
    assert [st["b"] for st in got["states"]] == ["1", "7", "22"]


def test_ledger_seed_reproducible(capsys, tmp_path):
    first = payload(capsys, tmp_path, "ledger", "--k", "4", "--r", "2",
                    "--mode", "rho", "--steps", "4", "--seed", "11")
    second = payload(capsys, tmp_path, "ledger", "--k", "4", "--r", "2",
                     "--mode", "rho", "--steps", "4", "--seed", "11")
    assert first == second
    assert first["report"]["ok"] is True


def test_budget_exit_code(capsys, tmp_path):
    code, _, err = run(capsys, tmp_path, "count-j", "--k", "3", "--s", "2",
                       "--x", "1000000", "--budget", "1000")
    assert code == 2
    diagnostic = json.loads(err)
    assert diagnostic["error"] == "budget-exceeded"
    assert diagnostic["budget"] == "1000"


def test_invalid_input_exit_codes(capsys, tmp_path):
    cases = [
        ("verify-lemma", "--lemma", "3.4", "--p", "3", "--a", "0", "--b",
         "1", "--k", "3", "--r", "1"),                   # p <= k
        ("count-j", "--k", "3", "--s", "1"),             # missing --x
        ("verify-lemma", "--lemma", "9.9", "--p", "5", "--a", "0", "--b",
         "1", "--k", "3", "--r", "1"),                   # unknown rule
        ("tarry", "--k", "8", "--format", "csv"),        # csv unsupported
        ("no-such-command",),
        ("ledger", "--k", "3", "--r", "1", "--mode", "k", "--steps", "2",
         "--h", "0,5,0"),                                # choice above limit
    ]
    for argv in cases:
        code, _, err = run(capsys, tmp_path, *argv)
        assert code == 1, argv
        assert json.loads(err)["error"] == "invalid-input"


def test_config_file_defaults_and_flag_override(capsys, tmp_path,
                                                monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "artifact.toml").write_text("budget = 1000\nthreads = 2\n")
    code, _, err = run(capsys, tmp_path, "count-j", "--k", "3", "--s", "2",
                       "--x", "1000000")
    assert code == 2
    assert json.loads(err)["budget"] == "1000"

    code, out, _ = run(capsys, tmp_path, "count-j", "--k", "2", "--s", "1",
                       "--x", "9", "--budget", str(meanvalue.DEFAULT_BUDGET))
    assert code == 0
    assert json.loads(out) == {"J": "9"}
    manifest = json.loads((tmp_path / "run.manifest.json").read_text())
    assert manifest["budget"] == str(meanvalue.DEFAULT_BUDGET)
    assert manifest["threads"] == "2"


def test_missing_explicit_config_rejected(capsys, tmp_path):
    code, _, err = run(capsys, tmp_path, "count-j", "--k", "2", "--s", "1",
                       "--x", "4", "--config", str(tmp_path / "absent.toml"))
    assert code == 1
    assert "not found" in json.loads(err)["message"]


def test_help_lists_every_subcommand(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["--help"])
    assert info.value.code == 0
    out = capsys.readouterr().out
    for name in ("count-j", "count-restricted", "diagonal", "ladder",
                 "congruence-b", "verify-lemma", "hensel", "lemma32",
                 "exponent", "gtilde-table", "gtilde-plus", "tarry",
                 "weyl-eval", "minor-arc", "frac-min", "waring-count",
                 "singular-series", "constants", "ledger"):
        assert name in out


def test_threads_do_not_change_output(capsys, tmp_path):
    base = payload(capsys, tmp_path, "count-j", "--k", "3", "--s", "2",
                   "--x", "30")
    threaded = payload(capsys, tmp_path, "count-j", "--k", "3", "--s", "2",
                       "--x", "30", "--threads", "4")
    assert base == threaded
