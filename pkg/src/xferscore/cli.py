"""Command-line surface.

Exit codes: 0 success, 1 validation error (bad data, bad request),
2 I/O or format error.  Numbers print with 12 significant digits;
--json switches to machine-readable reports.
"""

import functools
import json
import sys
from dataclasses import asdict
from pathlib import Path

import click
import numpy as np

from . import analysis, io, synth
from .baselines import dummy_labels, h_score, leep_lower_bound, nce_score
from .core import feature_matrix, require_same_n, validate_labels, validate_predictions
from .errors import FormatError, NumericalFailure, ValidationError
from .head import TrainConfig, two_stage_optimal
from .leep import feature_softmax_leep, leep_score

CLI_MEASURES = ("leep", "nce", "hscore", "feature-leep")


def _fmt(v) -> str:
    return format(float(v), ".12g")


def _handled(fn):
    # one place turns library errors into the documented exit codes
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValidationError, NumericalFailure) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
        except FormatError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
    return wrapper


@click.group()
def main():
    """Transferability scores for exported model outputs."""


def _load_predictions(path, fmt):
    return validate_predictions(io.read_matrix(path, fmt))


def _load_features(path, fmt):
    return feature_matrix(io.read_matrix(path, fmt))


def _load_labels(path):
    return validate_labels(io.read_labels(path))


def _compute(measure, predictions, features, labels_path, fmt):
    """Score one (files, measure) request; returns a Score."""
    labels = _load_labels(labels_path)
    if measure in ("leep", "nce"):
        if predictions is None:
            raise ValidationError(f"--predictions is required for measure {measure}")
        pred = _load_predictions(predictions, fmt)
        require_same_n(pred, labels)
        if measure == "leep":
            return leep_score(pred, labels)
        return nce_score(labels, dummy_labels(pred))
    if features is None:
        raise ValidationError(f"--features is required for measure {measure}")
    feats = _load_features(features, fmt)
    require_same_n(feats, labels)
    if measure == "hscore":
        return h_score(feats, labels)
    return feature_softmax_leep(feats, labels)


@main.command()
@click.option("--predictions", type=click.Path(), default=None)
@click.option("--labels", "labels_path", type=click.Path(), required=True)
@click.option("--features", type=click.Path(), default=None)
@click.option("--measure", type=click.Choice(CLI_MEASURES), required=True)
@click.option("--format", "fmt", type=click.Choice(["auto", "csv", "bin"]), default="auto")
@click.option("--json", "as_json", is_flag=True)
@_handled
def score(predictions, labels_path, features, measure, fmt, as_json):
    """Score one model's exported outputs against target labels."""
    result = _compute(measure, predictions, features, labels_path, fmt)
    if as_json:
        click.echo(json.dumps(asdict(result)))
    else:
        click.echo(f"{measure} = {_fmt(result.value)}  "
                   f"(n={result.n}, m={result.m}, c={result.c})")


@main.command()
@click.option("--predictions", type=click.Path(), required=True)
@click.option("--labels", "labels_path", type=click.Path(), required=True)
@click.option("--features", type=click.Path(), default=None)
@click.option("--epochs", type=int, default=100, show_default=True)
@click.option("--lr", type=float, default=0.01, show_default=True)
@click.option("--batch", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["auto", "csv", "bin"]), default="auto")
@click.option("--json", "as_json", is_flag=True)
@_handled
def verify(predictions, labels_path, features, epochs, lr, batch, seed, fmt, as_json):
    """Check the sandwich bounds around the main score on real files.

    The lower side is the hard-label conditional-entropy score plus the mean
    log confidence of the taken argmax; the upper side trains a fresh linear
    head on the features (the prediction matrix doubles as features when no
    --features file was exported) and keeps the better of head and averaged
    predictor.  Both sides print next to the score itself.
    """
    pred = _load_predictions(predictions, fmt)
    labels = _load_labels(labels_path)
    require_same_n(pred, labels)
    feats = _load_features(features, fmt) if features else feature_matrix(pred.values)
    require_same_n(feats, labels)

    main_score = leep_score(pred, labels).value
    lower = leep_lower_bound(pred, labels)
    cfg = TrainConfig(learning_rate=lr, epochs=epochs, batch_size=batch, seed=seed)
    stage = two_stage_optimal(pred, feats, labels, cfg)

    lower_ok = lower <= main_score + 1e-9
    upper_ok = main_score <= stage.l_star
    if as_json:
        click.echo(json.dumps({
            "leep": main_score,
            "lower_bound": lower,
            "upper_bound": stage.l_star,
            "head_loglik": stage.head_loglik,
            "best": stage.best,
            "lower_holds": lower_ok,
            "upper_holds": upper_ok,
        }))
    else:
        click.echo(f"lower bound: {_fmt(lower)} <= leep = {_fmt(main_score)}  "
                   f"[{'ok' if lower_ok else 'VIOLATED'}]")
        click.echo(f"upper bound: leep = {_fmt(main_score)} <= {_fmt(stage.l_star)}  "
                   f"[{'ok' if upper_ok else 'VIOLATED'}]  (best: {stage.best})")
    if not (lower_ok and upper_ok):
        sys.exit(1)


def _records_from_manifest(manifest_path, measure, fmt):
    manifest = io.read_manifest(manifest_path)
    key = measure.replace("-", "_")
    records = []
    for entry in sorted(manifest.entries, key=lambda e: e.model_id):
        result = _compute(measure, entry.predictions_path, entry.features_path,
                          entry.labels_path, fmt)
        records.append(analysis.ExperimentRecord(
            task_id=entry.model_id,
            scores={key: result.value},
            transfer_metric=entry.transfer_metric,
            metric_kind=entry.metric_kind,
        ))
    return records, key


@main.command()
@click.option("--manifest", type=click.Path(), required=True)
@click.option("--measure", type=click.Choice(CLI_MEASURES), required=True)
@click.option("--format", "fmt", type=click.Choice(["auto", "csv", "bin"]), default="auto")
@click.option("--json", "as_json", is_flag=True)
@_handled
def rank(manifest, measure, fmt, as_json):
    """Order the manifest's models by descending score."""
    records, key = _records_from_manifest(manifest, measure, fmt)
    report = analysis.rank_models(records, key)
    if as_json:
        click.echo(json.dumps(io.report_to_dict(report)))
        return
    for position, (model, value) in enumerate(report.entries, 1):
        click.echo(f"{position:3d}  {model}  {_fmt(value)}")
    if report.has_ties:
        click.echo(f"ties: {report.tie_groups}")


@main.command()
@click.option("--manifest", type=click.Path(), required=True)
@click.option("--measure", type=click.Choice(CLI_MEASURES), required=True)
@click.option("--metric", type=click.Choice(list(analysis.METRIC_KINDS)), required=True)
@click.option("--format", "fmt", type=click.Choice(["auto", "csv", "bin"]), default="auto")
@click.option("--json", "as_json", is_flag=True)
@_handled
def correlate(manifest, measure, metric, fmt, as_json):
    """Pearson correlation of a score against the manifest's observed metric."""
    records, key = _records_from_manifest(manifest, measure, fmt)
    report = analysis.correlate(records, key, metric_kind=metric)
    if as_json:
        click.echo(json.dumps(io.report_to_dict(report)))
        return
    click.echo(f"r = {_fmt(report.r)}  p = {_fmt(report.p_value)}  n = {report.n}")
    click.echo(f"fit: metric ~ {_fmt(report.fit_slope)} * score + {_fmt(report.fit_intercept)}")


@main.command()
@click.option("--manifest", type=click.Path(), required=True)
@click.option("--measure", type=click.Choice(CLI_MEASURES), required=True)
@click.option("--k", type=int, default=5, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["auto", "csv", "bin"]), default="auto")
@click.option("--json", "as_json", is_flag=True)
@_handled
def bins(manifest, measure, k, fmt, as_json):
    """Split scores into k equal-width levels and average the metric per level."""
    records, key = _records_from_manifest(manifest, measure, fmt)
    scored = [r for r in records if r.transfer_metric is not None]
    if len(scored) < 2:
        raise ValidationError("binning needs at least 2 entries with a transfer metric")
    values = np.array([r.scores[key] for r in scored])
    metrics = np.array([r.transfer_metric for r in scored])
    levels = analysis.bin_levels(values, k)
    rows = []
    for level in range(k):
        member = levels == level
        rows.append({
            "level": level,
            "count": int(member.sum()),
            "mean_score": float(values[member].mean()) if member.any() else None,
            "mean_metric": float(metrics[member].mean()) if member.any() else None,
        })
    if as_json:
        click.echo(json.dumps(rows))
        return
    for row in rows:
        if row["count"] == 0:
            click.echo(f"level {row['level']}: tasks=0")
        else:
            click.echo(f"level {row['level']}: tasks={row['count']}  "
                       f"mean_score={_fmt(row['mean_score'])}  "
                       f"mean_metric={_fmt(row['mean_metric'])}")


@main.command("synth")
@click.option("--n", type=int, required=True)
@click.option("--m", type=int, required=True)
@click.option("--c", type=int, required=True)
@click.option("--alignment", type=float, required=True)
@click.option("--noise", type=float, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", type=click.Path(), required=True)
@_handled
def synth_cmd(n, m, c, alignment, noise, seed, out):
    """Generate one synthetic task and write it in the exchange formats.

    Produces predictions.bin, features.bin, labels.txt, and a manifest whose
    transfer_metric is the averaged predictor's hold-out accuracy, so the
    directory is immediately consumable by rank/correlate/bins.
    """
    spec = synth.SynthSpec(n=n, m=m, c=c, alignment=alignment, noise=noise, seed=seed)
    pred, feats, labels = synth.generate_task(spec)
    accuracy = synth.eep_holdout_accuracy(pred, labels, seed)

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    io.write_matrix_bin(out_dir / "predictions.bin", pred.values)
    io.write_matrix_bin(out_dir / "features.bin", feats.values)
    io.write_labels(out_dir / "labels.txt", labels.values)
    io.write_manifest(out_dir / "manifest.json", io.ExperimentManifest(
        version=io.MANIFEST_VERSION,
        entries=[io.ManifestEntry(
            model_id=f"synth-{seed}",
            predictions_path=out_dir / "predictions.bin",
            labels_path=out_dir / "labels.txt",
            features_path=out_dir / "features.bin",
            transfer_metric=accuracy,
            metric_kind="accuracy",
        )],
    ))
    click.echo(f"wrote {out_dir}/predictions.bin features.bin labels.txt manifest.json  "
               f"(holdout accuracy {_fmt(accuracy)})")


@main.command()
@click.option("--n", type=int, default=500, show_default=True)
@click.option("--m", type=int, default=10, show_default=True)
@click.option("--c", type=int, default=5, show_default=True)
@click.option("--noise", type=float, default=0.5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--alignments", default="0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0",
              show_default=True, help="comma-separated alignment levels")
@click.option("--tasks-per-point", type=int, default=20, show_default=True)
@click.option("--out", type=click.Path(), default=None,
              help="write the per-task records as CSV")
@click.option("--json", "as_json", is_flag=True)
@_handled
def sweep(n, m, c, noise, seed, alignments, tasks_per_point, out, as_json):
    """Score many synthetic tasks across alignment levels and correlate."""
    try:
        levels = [float(tok) for tok in alignments.split(",") if tok.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad --alignments list: {exc}") from exc
    base = synth.SynthSpec(n=n, m=m, c=c, alignment=0.0, noise=noise, seed=seed)
    records = synth.sweep(base, levels, tasks_per_point)
    if out:
        io.write_report_csv(records, out)
    reports = {name: analysis.correlate(records, name, metric_kind="accuracy")
               for name in ("leep", "nce", "hscore")}
    if as_json:
        click.echo(json.dumps({name: io.report_to_dict(rep) for name, rep in reports.items()}))
        return
    click.echo(f"{len(records)} tasks at {len(levels)} alignment levels")
    for name, rep in reports.items():
        click.echo(f"r({name}, accuracy) = {_fmt(rep.r)}  p = {_fmt(rep.p_value)}")
    if out:
        click.echo(f"records written to {out}")


if __name__ == "__main__":
    main()
