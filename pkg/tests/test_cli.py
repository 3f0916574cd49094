"""CLI behavior: exit codes, frozen CSV shapes, byte-identical reruns."""

import json

import pytest

from dcw import cli


def run(argv):
    return cli.main(argv)


class TestEnumerate:
    def test_prints_counts_and_writes_json(self, capsys, tmp_path):
        out = tmp_path / "basis.json"
        assert run(["enumerate", "--k", "4", "--out", str(out)]) == 0
        assert capsys.readouterr().out == "30 monomials, 24 permutations\n"
        payload = json.loads(out.read_text())
        assert payload["count"] == 30
        assert payload["permutation_count"] == 24
        assert len(payload["monomials"]) == 30

    def test_k2(self, capsys):
        assert run(["enumerate", "--k", "2"]) == 0
        assert "2 monomials" in capsys.readouterr().out

    def test_k_out_of_range_is_usage_error(self, capsys):
        assert run(["enumerate", "--k", "1"]) == 2
        assert run(["enumerate", "--k", "8"]) == 2
        err = capsys.readouterr().err
        assert "dcw:" in err


class TestGram:
    def test_csv_row(self, capsys):
        assert run(["gram", "--k", "3", "--n", "4"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "# dcw gram csv v1"
        assert lines[1] == "k,n,monomials,permutations,z_n,invertible"
        assert lines[2] == "3,4,6,6,4896,1"

    def test_json_format(self, capsys):
        assert run(["gram", "--k", "2", "--n", "1", "--format",
                    "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["z_n"] == "6"
        assert payload["invertible"] is True


class TestFramePotential:
    def test_t0_row_is_commutant_dimension(self, capsys):
        assert run(["frame-potential", "--k", "4", "--n", "5"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "# dcw frame-potential csv v1"
        assert lines[1] == ("t,f_t,excess,bracket_low,bracket_high,"
                            "in_bracket")
        assert lines[2].startswith("0,30.0,6.0,,")

    def test_range_monotone_and_in_bracket(self, capsys):
        assert run(["frame-potential", "--k", "4", "--n", "34",
                    "--t-max", "2"]) == 0
        lines = capsys.readouterr().out.splitlines()
        rows = [line.split(",") for line in lines[2:]]
        excess = [float(r[2]) for r in rows]
        assert excess == sorted(excess, reverse=True)
        assert rows[1][5] == "1" and rows[2][5] == "1"
        assert rows[0][5] == ""  # no bracket at t = 0

    def test_regime_error_exit_code(self, capsys):
        assert run(["frame-potential", "--k", "4", "--n", "2"]) == 3
        assert "dcw:" in capsys.readouterr().err

    def test_bad_ensemble_is_usage_error(self, capsys):
        assert run(["frame-potential", "--k", "3", "--n", "3",
                    "--ensemble", "nonsense"]) == 2
        capsys.readouterr()

    def test_gate_requires_discrete(self, capsys):
        assert run(["frame-potential", "--k", "3", "--n", "3",
                    "--ensemble", "haar", "--gate", "[[1,0],[0,1]]"]) == 2
        capsys.readouterr()

    def test_json_format_carries_report_fields(self, capsys):
        assert run(["frame-potential", "--k", "3", "--n", "6",
                    "--t-max", "1", "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload[0]["f_t"] == 6.0
        assert payload[0]["ensemble"] == "diagonal"
        assert payload[1]["in_bracket"] is None  # n below regime threshold


class TestStateDesign:
    def test_three_design_rows_are_zero(self, capsys):
        assert run(["state-design", "--k", "3", "--n", "6",
                    "--t-max", "2"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "# dcw state-design csv v1"
        assert lines[1] == ("t,z_n,purity_haar,purity_t,relative_fp,"
                            "trace_distance_bound")
        for line in lines[2:]:
            cells = line.split(",")
            assert cells[4] == "0.0" and cells[5] == "0.0"

    def test_json_keeps_exact_string(self, capsys):
        assert run(["state-design", "--k", "2", "--n", "2", "--format",
                    "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload[0]["purity_t"] == 0.1
        assert payload[0]["purity_t_exact"] == "1/10"


class TestBounds:
    def test_table_mixes_values_and_regime_notes(self, capsys):
        assert run(["bounds", "--k", "4", "--n", "64", "--t", "1"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "# dcw bounds csv v1"
        body = "\n".join(lines[2:])
        assert "min_doping_relative,4,64,,1.0,diagonal,1.3333333333333333,ok" \
            in body
        assert "envelope_crossing_t" in body
        assert "need 8 n / delta" in body  # large-k rows out of regime here

    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(["bounds", "--k", "4", "--n", "64", "--t", "2", "--out", str(a)])
        run(["bounds", "--k", "4", "--n", "64", "--t", "2", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()


class TestMonteCarlo:
    def test_rows_and_reproducibility(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["montecarlo", "--k", "2", "--n", "2", "--samples", "2000",
                "--seed", "9"]
        assert run(argv + ["--out", str(a)]) == 0
        assert run(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        lines = a.read_text().splitlines()
        assert lines[0] == "# dcw montecarlo csv v1"
        assert lines[1] == ("estimator,n,k,t,ensemble,samples,seed,mean,"
                            "std_error")
        fp = lines[2].split(",")
        pur = lines[3].split(",")
        assert fp[0] == "frame_potential" and pur[0] == "state_purity"
        assert 1.5 < float(fp[7]) < 2.5
        assert 0.08 < float(pur[7]) < 0.12

    def test_resource_limit_exit_code(self, capsys):
        assert run(["montecarlo", "--k", "2", "--n", "11",
                    "--samples", "10"]) == 5
        capsys.readouterr()

    def test_bad_samples_is_usage_error(self, capsys):
        assert run(["montecarlo", "--k", "2", "--n", "2",
                    "--samples", "1"]) == 2
        capsys.readouterr()


class TestVerify:
    def test_counting_suite_passes(self, capsys, tmp_path):
        out = tmp_path / "report.json"
        assert run(["verify", "counting", "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["passed"] is True
        assert report["suite"] == "counting"
        names = {c["name"] for c in report["checks"]}
        assert "monomial-count-k4" in names
        assert "clifford-n1-exhaustion" in names

    def test_identities_suite_passes(self, capsys):
        assert run(["verify", "identities"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["passed"] is True

    def test_failing_check_exits_4_and_reports(self, capsys, monkeypatch,
                                               tmp_path):
        monkeypatch.setitem(
            cli.SUITES, "counting",
            lambda seed: [{"name": "forced", "passed": False,
                           "detail": "forced failure"}])
        out = tmp_path / "report.json"
        assert run(["verify", "counting", "--out", str(out)]) == 4
        assert json.loads(out.read_text())["passed"] is False
        assert "forced" in capsys.readouterr().err

    def test_unknown_suite_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["verify", "nonsense"])
        assert exc.value.code == 2
        capsys.readouterr()
