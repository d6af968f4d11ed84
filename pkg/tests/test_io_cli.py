import json

import numpy as np
import pytest

from hypercyc import ParseError, WordBudget, orbit_sample, verify_commuting
from hypercyc.cli import main, parse_complex
from hypercyc.io import (
    cloud_to_csv,
    dump_family,
    family_from_dict,
    load_family,
    validate_roundtrip,
)


@pytest.fixture
def family_file(tmp_path):
    rng = np.random.default_rng(0)
    gens = [np.diag(rng.normal(size=3) + 1j * rng.normal(size=3)) for _ in range(2)]
    fam = verify_commuting(gens, labels=["A", "B"])
    path = tmp_path / "family.json"
    dump_family(fam, str(path))
    return str(path), fam


class TestGeneratorSetFormat:
    def test_roundtrip_bit_identical(self, family_file):
        path, fam = family_file
        assert validate_roundtrip(path)
        loaded = load_family(path)
        for g1, g2 in zip(fam.generators, loaded.generators):
            assert np.array_equal(g1, g2)
        assert loaded.labels == ("A", "B")

    def test_truncated_json_is_parse_error(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"n": 2, "p": 1, "matrices": [[[', encoding="utf-8")
        with pytest.raises(ParseError):
            load_family(str(p))

    def test_non_square_matrix_named_in_error(self):
        data = {
            "n": 3,
            "p": 2,
            "matrices": [
                [[[1.0, 0.0]] * 3] * 3,
                [[[1.0, 0.0]] * 2] * 3,
            ],
        }
        with pytest.raises(ParseError, match="matrix 2 is 3x2"):
            family_from_dict(data)

    def test_missing_field(self):
        with pytest.raises(ParseError, match="missing required field 'matrices'"):
            family_from_dict({"n": 1, "p": 1})

    def test_entry_shape_checked(self):
        data = {"n": 1, "p": 1, "matrices": [[[[1.0, 0.0, 0.0]]]]}
        with pytest.raises(ParseError, match="re, im"):
            family_from_dict(data)


class TestCloudCsv:
    def test_header_and_rows(self, tmp_path):
        fam = verify_commuting([np.diag([2.0, 0.5])])
        cloud = orbit_sample(fam, [1.0, 1.0], WordBudget(2, 0))
        path = tmp_path / "cloud.csv"
        cloud_to_csv(cloud, str(path))
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "k1,re1,im1,re2,im2,saturated"
        assert len(lines) == 4
        first = lines[1].split(",")
        assert first[0] == "0" and float(first[1]) == 1.0 and first[-1] == "0"


class TestParseComplex:
    def test_forms(self):
        assert parse_complex("2") == 2.0
        assert parse_complex("2+0i") == 2.0
        assert parse_complex("0.5-0.25i") == 0.5 - 0.25j
        assert parse_complex("1j") == 1j
        with pytest.raises(ParseError):
            parse_complex("two")


class TestCli:
    def run(self, capsys, *argv):
        code = main(list(argv))
        out = capsys.readouterr()
        return code, out.out, out.err

    def test_counterexample_builds_family_file(self, tmp_path, capsys):
        out_file = tmp_path / "cex.json"
        code, out, _ = self.run(
            capsys,
            "counterexample", "--n", "2", "--a", "2+0i",
            "--family-out", str(out_file),
        )
        assert code == 0
        fam = load_family(str(out_file))
        assert fam.p == 3 and fam.is_diagonal
        report = json.loads(out)
        assert report["pair_density_score"] >= 0.9

    def test_certify_identity_exits_two(self, tmp_path, capsys):
        path = tmp_path / "id.json"
        dump_family(verify_commuting([np.eye(2)]), str(path))
        code, out, _ = self.run(capsys, "certify", "--input", str(path))
        assert code == 2
        report = json.loads(out)
        assert report["verdict"] == "not-hypercyclic"
        assert report["reason"] == "structure"

    def test_analyze_reports_partition(self, tmp_path, capsys):
        path = tmp_path / "diag.json"
        dump_family(verify_commuting([np.diag([1.0, 2.0])]), str(path))
        code, out, _ = self.run(capsys, "analyze", "--input", str(path))
        assert code == 0
        report = json.loads(out)
        assert report["partition"] == [1, 1]
        assert report["rank_condition"]["pass"] is True

    def test_jset_scores_targets(self, tmp_path, capsys):
        path = tmp_path / "pair.json"
        dump_family(
            verify_commuting([np.array([[2.0 + 0j]]), np.array([[0.6 + 0.6j]])]),
            str(path),
        )
        code, out, _ = self.run(
            capsys,
            "jset", "--input", str(path), "--x", "e1",
            "--targets", "random:5", "--delta", "0.1", "--budget", "40",
            "--seed", "3",
        )
        assert code == 0
        report = json.loads(out)
        assert len(report["scores"]) == 5
        assert all(r["score"] >= 0 for r in report["scores"])

    def test_orbit_writes_csv(self, tmp_path, capsys):
        path = tmp_path / "pair.json"
        dump_family(verify_commuting([np.array([[2.0 + 0j]])]), str(path))
        csv = tmp_path / "cloud.csv"
        code, out, _ = self.run(
            capsys,
            "orbit", "--input", str(path), "--v", "e1",
            "--budget", "5", "--csv", str(csv),
        )
        assert code == 0
        assert csv.exists()
        report = json.loads(out)
        assert report["points"] == 6

    def test_validate_roundtrip_command(self, tmp_path, capsys):
        path = tmp_path / "f.json"
        dump_family(verify_commuting([np.eye(2)]), str(path))
        code, out, _ = self.run(capsys, "validate", "--input", str(path))
        assert code == 0

    def test_malformed_input_exit_64(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{", encoding="utf-8")
        code, _, err = self.run(capsys, "analyze", "--input", str(path))
        assert code == 64
        assert "parse" in err

    def test_missing_file_exit_64(self, capsys):
        code, _, _ = self.run(capsys, "analyze", "--input", "/nonexistent.json")
        assert code == 64

    def test_dense_pair_failure_exit_one(self, capsys):
        code, _, err = self.run(
            capsys,
            "dense-pair", "--a", "2+0i", "--target-coverage", "1.1",
            "--pair-budget", "40", "--modulus-steps", "2", "--argument-steps", "3",
        )
        assert code == 1
        assert "no-pair-found" in err

    def test_reports_deterministic_modulo_timings(self, tmp_path, capsys):
        path = tmp_path / "diag.json"
        dump_family(verify_commuting([np.diag([1.0, 2.0])]), str(path))
        bodies = []
        for _ in range(2):
            code, out, _ = self.run(capsys, "analyze", "--input", str(path))
            assert code == 0
            body = json.loads(out)
            del body["timings"]
            bodies.append(json.dumps(body, sort_keys=True))
        assert bodies[0] == bodies[1]
