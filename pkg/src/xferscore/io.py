"""File formats: binary and CSV matrices, label lists, experiment
manifests, and report serialization.

Binary matrix layout (bit-exact round trip): magic ``XFSC``, then
little-endian u32 version (=1), u64 rows, u64 cols, and rows*cols IEEE-754
binary64 values row-major.  CSV matrices are one comma-separated row per
line with optional ``#`` comments and round-trip through 17 significant
digits.  Label files hold one base-10 integer per line.
"""

import csv
import dataclasses
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import METRIC_KINDS, CorrelationReport, ExperimentRecord, RankingReport
from .errors import DimensionHeaderMismatch, Malformed, UnsupportedVersion, ValidationError

MAGIC = b"XFSC"
BIN_VERSION = 1
_HEADER = struct.Struct("<4sIQQ")


# --- matrices -----------------------------------------------------------------

def write_matrix_bin(path, values) -> None:
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError("binary matrix writer needs a 2-D array")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, BIN_VERSION, arr.shape[0], arr.shape[1]))
        fh.write(arr.astype("<f8", copy=False).tobytes(order="C"))


def read_matrix_bin(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise Malformed(len(header), "file shorter than the matrix header")
        magic, version, rows, cols = _HEADER.unpack(header)
        if magic != MAGIC:
            raise UnsupportedVersion(f"bad magic bytes {magic!r}")
        if version != BIN_VERSION:
            raise UnsupportedVersion(f"unsupported matrix format version {version}")
        payload = fh.read()
    expected = rows * cols * 8
    if len(payload) != expected:
        raise DimensionHeaderMismatch(
            f"header says {rows}x{cols} ({expected} bytes), payload has {len(payload)}"
        )
    data = np.frombuffer(payload, dtype="<f8").astype(np.float64, copy=True)
    return data.reshape(rows, cols)


def write_matrix_csv(path, values) -> None:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError("CSV matrix writer needs a 2-D array")
    with open(path, "w", encoding="utf-8") as fh:
        for row in arr:
            fh.write(",".join(format(v, ".17g") for v in row))
            fh.write("\n")


def read_matrix_csv(path) -> np.ndarray:
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        try:
            for lineno, line in enumerate(fh, 1):
                text = line.strip()
                if not text or text.startswith("#"):
                    continue
                parts = text.split(",")
                if width is None:
                    width = len(parts)
                elif len(parts) != width:
                    raise Malformed(lineno, f"expected {width} columns, found {len(parts)}")
                try:
                    rows.append([_parse_float(p) for p in parts])
                except ValueError as exc:
                    raise Malformed(lineno, str(exc)) from exc
        except UnicodeDecodeError as exc:
            raise Malformed(len(rows) + 1, "file is not UTF-8 text") from exc
    if not rows:
        raise Malformed(0, "no data rows")
    return np.asarray(rows, dtype=np.float64)


def _parse_float(token: str) -> float:
    token = token.strip()
    if not token or "_" in token:
        raise ValueError(f"not a decimal float: {token!r}")
    return float(token)


def read_matrix(path, fmt: str = "auto") -> np.ndarray:
    """Dispatch on fmt, sniffing the binary magic when fmt == 'auto'."""
    if fmt == "bin":
        return read_matrix_bin(path)
    if fmt == "csv":
        return read_matrix_csv(path)
    if fmt != "auto":
        raise ValidationError(f"unknown matrix format {fmt!r}")
    with open(path, "rb") as fh:
        head = fh.read(4)
    return read_matrix_bin(path) if head == MAGIC else read_matrix_csv(path)


# --- labels ---------------------------------------------------------------------

def write_labels(path, values) -> None:
    arr = np.asarray(values, dtype=np.int64)
    with open(path, "w", encoding="utf-8") as fh:
        for v in arr:
            fh.write(f"{int(v)}\n")


def read_labels(path) -> np.ndarray:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        try:
            for lineno, line in enumerate(fh, 1):
                text = line.strip()
                if not text or text.startswith("#"):
                    continue
                try:
                    out.append(int(text, 10))
                except ValueError as exc:
                    raise Malformed(lineno, f"not a base-10 integer: {text!r}") from exc
        except UnicodeDecodeError as exc:
            raise Malformed(len(out) + 1, "file is not UTF-8 text") from exc
    if not out:
        raise Malformed(0, "no labels")
    return np.asarray(out, dtype=np.int64)


# --- manifests -------------------------------------------------------------------

MANIFEST_VERSION = "1"


@dataclass(frozen=True)
class ManifestEntry:
    model_id: str
    predictions_path: Path
    labels_path: Path
    features_path: Path | None = None
    transfer_metric: float | None = None
    metric_kind: str | None = None


@dataclass(frozen=True)
class ExperimentManifest:
    version: str
    entries: list
    label_names: dict = field(default_factory=dict)


def read_manifest(path) -> ExperimentManifest:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise Malformed(exc.lineno, f"invalid JSON: {exc.msg}") from exc
    except UnicodeDecodeError as exc:
        raise Malformed(1, "file is not UTF-8 text") from exc
    if not isinstance(raw, dict):
        raise Malformed(1, "manifest root must be a JSON object")
    version = raw.get("version")
    if version != MANIFEST_VERSION:
        raise UnsupportedVersion(f"unsupported manifest version {version!r}")
    entries_raw = raw.get("entries")
    if not isinstance(entries_raw, list) or not entries_raw:
        raise Malformed(1, "manifest needs a nonempty 'entries' list")
    base = path.parent
    entries = []
    seen = set()
    for idx, item in enumerate(entries_raw):
        if not isinstance(item, dict):
            raise Malformed(1, f"entry {idx} is not an object")
        try:
            model_id = item["model_id"]
            predictions = item["predictions_path"]
            labels = item["labels_path"]
        except KeyError as exc:
            raise Malformed(1, f"entry {idx} missing required key {exc.args[0]!r}") from exc
        if not model_id or not predictions or not labels:
            raise Malformed(1, f"entry {idx} has an empty required field")
        if model_id in seen:
            raise Malformed(1, f"duplicate model_id {model_id!r}")
        seen.add(model_id)
        metric = item.get("transfer_metric")
        if metric is not None and not (0.0 <= float(metric) <= 1.0):
            raise Malformed(1, f"entry {idx} transfer_metric outside [0, 1]")
        kind = item.get("metric_kind")
        if kind is not None and kind not in METRIC_KINDS:
            raise Malformed(1, f"entry {idx} metric_kind must be one of {METRIC_KINDS}")
        features = item.get("features_path")
        entries.append(ManifestEntry(
            model_id=str(model_id),
            predictions_path=base / predictions,
            labels_path=base / labels,
            features_path=base / features if features else None,
            transfer_metric=float(metric) if metric is not None else None,
            metric_kind=kind,
        ))
    names = raw.get("label_names") or {}
    if not isinstance(names, dict):
        raise Malformed(1, "label_names must be an object")
    return ExperimentManifest(version=version, entries=entries,
                              label_names={int(k): str(v) for k, v in names.items()})


def write_manifest(path, manifest: ExperimentManifest) -> None:
    path = Path(path)
    base = path.parent
    payload = {
        "version": manifest.version,
        "entries": [
            {
                "model_id": e.model_id,
                "predictions_path": _relativize(e.predictions_path, base),
                "labels_path": _relativize(e.labels_path, base),
                **({"features_path": _relativize(e.features_path, base)}
                   if e.features_path else {}),
                **({"transfer_metric": e.transfer_metric}
                   if e.transfer_metric is not None else {}),
                **({"metric_kind": e.metric_kind} if e.metric_kind else {}),
            }
            for e in manifest.entries
        ],
    }
    if manifest.label_names:
        payload["label_names"] = {str(k): v for k, v in manifest.label_names.items()}
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _relativize(target: Path, base: Path) -> str:
    try:
        return str(Path(target).relative_to(base))
    except ValueError:
        return str(target)


# --- reports ----------------------------------------------------------------------

def report_to_dict(report):
    if isinstance(report, (CorrelationReport, RankingReport)):
        out = dataclasses.asdict(report)
        if isinstance(report, RankingReport):
            out["entries"] = [{"model_id": m, "score": s} for m, s in report.entries]
        return out
    if isinstance(report, ExperimentRecord):
        return dataclasses.asdict(report)
    if isinstance(report, list):
        return [report_to_dict(item) for item in report]
    if isinstance(report, dict):
        return report
    raise ValidationError(f"cannot serialize report of type {type(report).__name__}")


def write_report_json(report, path) -> None:
    Path(path).write_text(json.dumps(report_to_dict(report), indent=2) + "\n", encoding="utf-8")


def write_report_csv(report, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        if isinstance(report, CorrelationReport):
            writer.writerow(["measure", "r", "p_value", "n", "fit_slope", "fit_intercept"])
            writer.writerow([report.measure, _g17(report.r), _g17(report.p_value),
                             report.n, _g17(report.fit_slope), _g17(report.fit_intercept)])
        elif isinstance(report, RankingReport):
            writer.writerow(["rank", "model_id", "score", "tied"])
            tied = {m for group in report.tie_groups for m in group}
            for rank, (model, score) in enumerate(report.entries, 1):
                writer.writerow([rank, model, _g17(score), "yes" if model in tied else "no"])
        elif isinstance(report, list) and all(isinstance(r, ExperimentRecord) for r in report):
            measures = sorted({m for r in report for m in r.scores})
            writer.writerow(["task_id", *measures, "transfer_metric", "metric_kind"])
            for rec in report:
                writer.writerow([
                    rec.task_id,
                    *[_g17(rec.scores[m]) if m in rec.scores else "" for m in measures],
                    _g17(rec.transfer_metric) if rec.transfer_metric is not None else "",
                    rec.metric_kind or "",
                ])
        else:
            raise ValidationError(f"cannot serialize report of type {type(report).__name__} as CSV")


def read_records_csv(path) -> list:
    """Inverse of write_report_csv for record lists."""
    records = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "task_id" not in reader.fieldnames:
            raise Malformed(1, "records CSV needs a task_id column")
        score_cols = [c for c in reader.fieldnames
                      if c not in ("task_id", "transfer_metric", "metric_kind")]
        for row in reader:
            scores = {c: float(row[c]) for c in score_cols if row[c]}
            metric = float(row["transfer_metric"]) if row.get("transfer_metric") else None
            records.append(ExperimentRecord(
                task_id=row["task_id"],
                scores=scores,
                transfer_metric=metric,
                metric_kind=row.get("metric_kind") or None,
            ))
    return records


def _g17(v: float) -> str:
    return format(float(v), ".17g")
