import json
import struct

import numpy as np
import pytest

from xferscore.analysis import CorrelationReport, ExperimentRecord, RankingReport
from xferscore.errors import DimensionHeaderMismatch, Malformed, UnsupportedVersion
from xferscore.io import (
    ExperimentManifest,
    ManifestEntry,
    read_labels,
    read_manifest,
    read_matrix,
    read_matrix_bin,
    read_matrix_csv,
    read_records_csv,
    report_to_dict,
    write_labels,
    write_manifest,
    write_matrix_bin,
    write_matrix_csv,
    write_report_csv,
    write_report_json,
)


class TestBinaryMatrix:
    def test_round_trip_bit_identical(self, tmp_path):
        rng = np.random.default_rng(41)
        path = tmp_path / "m.bin"
        values = rng.standard_normal((7, 3))
        write_matrix_bin(path, values)
        back = read_matrix_bin(path)
        assert back.tobytes() == values.tobytes()
        assert back.shape == (7, 3)

    def test_round_trip_special_values(self, tmp_path):
        path = tmp_path / "m.bin"
        values = np.array([[0.0, -0.0], [np.nextafter(0, 1), 1e308]])
        write_matrix_bin(path, values)
        assert read_matrix_bin(path).tobytes() == values.tobytes()

    def test_corrupted_magic(self, tmp_path):
        path = tmp_path / "m.bin"
        write_matrix_bin(path, np.ones((2, 2)))
        raw = bytearray(path.read_bytes())
        raw[0] = ord("Y")
        path.write_bytes(bytes(raw))
        with pytest.raises(UnsupportedVersion):
            read_matrix_bin(path)

    def test_unknown_version(self, tmp_path):
        path = tmp_path / "m.bin"
        path.write_bytes(struct.pack("<4sIQQ", b"XFSC", 9, 1, 1) + b"\x00" * 8)
        with pytest.raises(UnsupportedVersion):
            read_matrix_bin(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "m.bin"
        write_matrix_bin(path, np.ones((4, 4)))
        data = path.read_bytes()
        path.write_bytes(data[:-8])
        with pytest.raises(DimensionHeaderMismatch):
            read_matrix_bin(path)

    def test_trailing_garbage(self, tmp_path):
        path = tmp_path / "m.bin"
        write_matrix_bin(path, np.ones((2, 2)))
        path.write_bytes(path.read_bytes() + b"\x01")
        with pytest.raises(DimensionHeaderMismatch):
            read_matrix_bin(path)

    def test_short_header(self, tmp_path):
        path = tmp_path / "m.bin"
        path.write_bytes(b"XFSC\x01")
        with pytest.raises(Malformed):
            read_matrix_bin(path)


class TestCsvMatrix:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(42)
        path = tmp_path / "m.csv"
        values = rng.standard_normal((9, 4)) * 10.0 ** rng.integers(-8, 8, (9, 4))
        write_matrix_csv(path, values)
        np.testing.assert_array_equal(read_matrix_csv(path), values)

    def test_comments_and_blank_lines_skipped(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("# header comment\n\n0.5,0.5\n# middle\n0.25,0.75\n")
        np.testing.assert_array_equal(read_matrix_csv(path), [[0.5, 0.5], [0.25, 0.75]])

    def test_wrong_arity_reports_line(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("# comment\n0.5,0.5\n0.1,0.2,0.7\n")
        with pytest.raises(Malformed) as err:
            read_matrix_csv(path)
        assert err.value.where == 3  # 1-based, comments counted

    def test_bad_token_reports_line(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("0.5,0.5\n0.5,abc\n")
        with pytest.raises(Malformed) as err:
            read_matrix_csv(path)
        assert err.value.where == 2

    def test_underscored_literal_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1_000.0,0.5\n")
        with pytest.raises(Malformed):
            read_matrix_csv(path)

    def test_comma_is_separator_never_decimal_point(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("0,5\n")
        np.testing.assert_array_equal(read_matrix_csv(path), [[0.0, 5.0]])

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("# nothing but comments\n")
        with pytest.raises(Malformed):
            read_matrix_csv(path)

    def test_scientific_notation_accepted(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1e-3,2E4\n-1.5e+2,0.0\n")
        np.testing.assert_array_equal(read_matrix_csv(path),
                                      [[1e-3, 2e4], [-1.5e2, 0.0]])


class TestAutoSniff:
    def test_dispatches_on_magic(self, tmp_path):
        values = np.array([[0.25, 0.75]])
        bin_path = tmp_path / "a.bin"
        csv_path = tmp_path / "a.csv"
        write_matrix_bin(bin_path, values)
        write_matrix_csv(csv_path, values)
        np.testing.assert_array_equal(read_matrix(bin_path), values)
        np.testing.assert_array_equal(read_matrix(csv_path), values)

    def test_explicit_format_forced(self, tmp_path):
        path = tmp_path / "data"
        write_matrix_bin(path, np.ones((1, 2)))
        with pytest.raises(Malformed):
            read_matrix_csv(path)  # binary bytes are not a CSV row


class TestLabels:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "labels.txt"
        write_labels(path, np.array([0, 3, 1, 2, 0]))
        np.testing.assert_array_equal(read_labels(path), [0, 3, 1, 2, 0])

    def test_comments_skipped(self, tmp_path):
        path = tmp_path / "labels.txt"
        path.write_text("# classes\n0\n\n1\n")
        np.testing.assert_array_equal(read_labels(path), [0, 1])

    def test_non_integer_rejected_with_line(self, tmp_path):
        path = tmp_path / "labels.txt"
        path.write_text("0\n1.5\n")
        with pytest.raises(Malformed) as err:
            read_labels(path)
        assert err.value.where == 2

    def test_empty_rejected(self, tmp_path):
        path = tmp_path / "labels.txt"
        path.write_text("")
        with pytest.raises(Malformed):
            read_labels(path)


def _manifest_payload():
    return {
        "version": "1",
        "entries": [
            {"model_id": "resnet", "predictions_path": "resnet/pred.bin",
             "labels_path": "labels.txt", "transfer_metric": 0.91,
             "metric_kind": "accuracy"},
            {"model_id": "vgg", "predictions_path": "vgg/pred.bin",
             "labels_path": "labels.txt", "features_path": "vgg/feat.bin"},
        ],
        "label_names": {"0": "cat", "1": "dog"},
    }


class TestManifest:
    def test_parse_and_path_resolution(self, tmp_path):
        path = tmp_path / "exp" / "manifest.json"
        path.parent.mkdir()
        path.write_text(json.dumps(_manifest_payload()))
        manifest = read_manifest(path)
        assert manifest.version == "1"
        assert len(manifest.entries) == 2
        first = manifest.entries[0]
        assert first.predictions_path == tmp_path / "exp" / "resnet" / "pred.bin"
        assert first.transfer_metric == 0.91
        assert manifest.entries[1].features_path == tmp_path / "exp" / "vgg" / "feat.bin"
        assert manifest.label_names == {0: "cat", 1: "dog"}

    def test_duplicate_model_id_rejected(self, tmp_path):
        payload = _manifest_payload()
        payload["entries"][1]["model_id"] = "resnet"
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps(payload))
        with pytest.raises(Malformed):
            read_manifest(path)

    def test_missing_required_key(self, tmp_path):
        payload = _manifest_payload()
        del payload["entries"][0]["labels_path"]
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps(payload))
        with pytest.raises(Malformed):
            read_manifest(path)

    def test_metric_out_of_range(self, tmp_path):
        payload = _manifest_payload()
        payload["entries"][0]["transfer_metric"] = 1.5
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps(payload))
        with pytest.raises(Malformed):
            read_manifest(path)

    def test_bad_version(self, tmp_path):
        payload = _manifest_payload()
        payload["version"] = "2"
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps(payload))
        with pytest.raises(UnsupportedVersion):
            read_manifest(path)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text("{not json")
        with pytest.raises(Malformed):
            read_manifest(path)

    def test_round_trip(self, tmp_path):
        manifest = ExperimentManifest(version="1", entries=[
            ManifestEntry(model_id="a", predictions_path=tmp_path / "a.bin",
                          labels_path=tmp_path / "y.txt",
                          transfer_metric=0.5, metric_kind="f1"),
        ], label_names={0: "neg", 1: "pos"})
        path = tmp_path / "manifest.json"
        write_manifest(path, manifest)
        back = read_manifest(path)
        assert back.entries[0].model_id == "a"
        assert back.entries[0].predictions_path == tmp_path / "a.bin"
        assert back.entries[0].metric_kind == "f1"
        assert back.label_names == {0: "neg", 1: "pos"}


class TestReports:
    def test_correlation_json(self, tmp_path):
        report = CorrelationReport(measure="leep", r=0.9, p_value=0.01, n=20,
                                   fit_slope=0.4, fit_intercept=0.7)
        path = tmp_path / "report.json"
        write_report_json(report, path)
        assert json.loads(path.read_text())["r"] == 0.9

    def test_ranking_csv(self, tmp_path):
        report = RankingReport(measure="leep",
                               entries=[("A", -0.5), ("B", -0.5), ("C", -2.0)],
                               has_ties=True, tie_groups=[["A", "B"]])
        path = tmp_path / "rank.csv"
        write_report_csv(report, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "rank,model_id,score,tied"
        assert lines[1].startswith("1,A,") and lines[1].endswith("yes")
        assert lines[3].endswith("no")

    def test_records_csv_round_trip(self, tmp_path):
        records = [
            ExperimentRecord(task_id="t0", scores={"leep": -0.25, "nce": -0.5},
                             transfer_metric=0.75, metric_kind="accuracy"),
            ExperimentRecord(task_id="t1", scores={"leep": -1.5}),
        ]
        path = tmp_path / "records.csv"
        write_report_csv(records, path)
        back = read_records_csv(path)
        assert back[0].scores == {"leep": -0.25, "nce": -0.5}
        assert back[0].transfer_metric == 0.75
        assert back[1].scores == {"leep": -1.5}
        assert back[1].transfer_metric is None

    def test_ranking_dict_shape(self):
        report = RankingReport(measure="leep", entries=[("A", -0.5)],
                               has_ties=False, tie_groups=[])
        out = report_to_dict(report)
        assert out["entries"] == [{"model_id": "A", "score": -0.5}]
