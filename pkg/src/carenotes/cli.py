"""Batch entry points: simulate, ingest, triage, draft, serve, export, stats.

Exit codes: 0 success, 1 operational error (one machine-parseable line on
stderr, `error:<Type>:<detail>`), 2 usage error. Failed invocations never
leave a partial store behind: inputs are validated before the first write.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import metrics
from .bundle import parse_case_bundle, serialize_case_bundle
from .drafting import Backend, GeneratorConfig, draft_case
from .errors import CarenotesError
from .model import UrgencyLabel
from .simulate import CohortSpec, generate_cohort
from .store import CaseStore
from .triage import TriageConfig, triage_case

_DIMENSION_LABELS = (
    "Urgency assessment (Q1)",
    "Intervention recommendations (Q2)",
    "Critical task identification (Q3)",
    "Clinical appropriateness (Q4)",
    "Risk rationale (Q5)",
    "Data completeness (Q6)",
    "Chart information value (Q7)",
    "Adherence accuracy (Q8)",
    "Readiness for consultation (Q9)",
    "Time effort saved (Q10; overall)",
    "Information location efficiency (Q11)",
    "Overall satisfaction (Q12)",
)


def _fail(exc: CarenotesError) -> None:
    click.echo(f"error:{type(exc).__name__}:{exc}", err=True)
    sys.exit(1)


def _load_triage_config(path: str | None) -> TriageConfig:
    return TriageConfig.load(path) if path else TriageConfig.default()


def _parse_mix(value: str) -> dict[UrgencyLabel, int]:
    parts = value.split(",")
    if len(parts) != 3:
        raise click.BadParameter("expected URGENT,ATTENTION,STABLE counts, e.g. 14,8,2")
    try:
        urgent, attention, stable = (int(p) for p in parts)
    except ValueError:
        raise click.BadParameter(f"counts must be integers, got {value!r}") from None
    if min(urgent, attention, stable) < 0:
        raise click.BadParameter("counts must be >= 0")
    return {
        UrgencyLabel.URGENT: urgent,
        UrgencyLabel.ATTENTION: attention,
        UrgencyLabel.STABLE: stable,
    }


@click.group()
def main():
    """Chronic-disease adherence reporting pipeline."""


@main.command()
@click.option("--seed", type=int, required=True, help="Cohort seed.")
@click.option("--mix", default="14,8,2", show_default=True, help="urgent,attention,stable counts.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--period-days", type=int, default=7, show_default=True)
def simulate(seed: int, mix: str, out_dir: str, period_days: int):
    """Write one synthetic bundle file per case."""
    spec = CohortSpec(seed=seed, mix=_parse_mix(mix), period_days=period_days)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cases = generate_cohort(spec)
    for case in cases:
        (out / f"{case.case_id}.json").write_bytes(serialize_case_bundle(case))
    click.echo(f"wrote {len(cases)} bundles to {out}")


@main.command()
@click.argument("sources", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--store-dir", envvar="ADHERENCE_STORE_DIR", required=True,
              type=click.Path(file_okay=False))
def ingest(sources: tuple[str, ...], store_dir: str):
    """Load bundle files (or directories of them) into the store."""
    paths: list[Path] = []
    for source in sources:
        p = Path(source)
        paths.extend(sorted(p.glob("*.json")) if p.is_dir() else [p])
    try:
        cases = [parse_case_bundle(path.read_bytes()) for path in paths]
        store = CaseStore(store_dir)
        seen = set(store.case_ids())
        for case in cases:  # validate the whole batch before the first write
            if case.case_id in seen:
                raise CarenotesError(f"duplicate case_id {case.case_id!r} in batch")
            seen.add(case.case_id)
        for case in cases:
            store.put_case(case)
    except CarenotesError as exc:
        _fail(exc)
    click.echo(f"ingested {len(cases)} cases into {store_dir}")


@main.command()
@click.option("--store-dir", envvar="ADHERENCE_STORE_DIR", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--case", "case_id", default=None, help="Triage a single case.")
@click.option("--all", "do_all", is_flag=True, help="Triage every stored case.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def triage(store_dir: str, case_id: str | None, do_all: bool, config_path: str | None):
    """Classify urgency, rule-only (no external estimator in batch mode)."""
    if bool(case_id) == do_all:
        raise click.UsageError("pass exactly one of --case or --all")
    try:
        config = _load_triage_config(config_path)
        store = CaseStore(store_dir)
        targets = store.case_ids() if do_all else [case_id]
        for cid in targets:
            result = triage_case(store, cid, config)
            click.echo(f"{cid} {result.label.value}")
    except CarenotesError as exc:
        _fail(exc)


@main.command()
@click.option("--store-dir", envvar="ADHERENCE_STORE_DIR", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--case", "case_id", default=None)
@click.option("--all", "do_all", is_flag=True)
@click.option("--gen-backend", type=click.Choice([b.value for b in Backend]),
              default=Backend.TEMPLATE.value, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def draft(store_dir: str, case_id: str | None, do_all: bool, gen_backend: str,
          config_path: str | None):
    """Generate sectioned draft reports with paired charts."""
    if bool(case_id) == do_all:
        raise click.UsageError("pass exactly one of --case or --all")
    try:
        triage_config = _load_triage_config(config_path)
        gen_config = GeneratorConfig(backend=Backend(gen_backend))
        store = CaseStore(store_dir)
        targets = store.case_ids() if do_all else [case_id]
        for cid in targets:  # check the full batch before any write
            store.get_triage(cid)
        for cid in targets:
            report = draft_case(store, cid, gen_config, triage_config)
            click.echo(f"{cid} drafted ({len(report.sections)} sections)")
    except CarenotesError as exc:
        _fail(exc)


@main.command()
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--store-dir", envvar="ADHERENCE_STORE_DIR", required=True,
              type=click.Path(file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--gen-backend", type=click.Choice([b.value for b in Backend]),
              default=Backend.TEMPLATE.value, show_default=True)
@click.option("--ui-dir", type=click.Path(file_okay=False), default=None,
              help="Serve a built frontend from this directory.")
def serve(port: int, host: str, store_dir: str, config_path: str | None,
          gen_backend: str, ui_dir: str | None):
    """Run the review service."""
    from .service import serve as run_service

    try:
        run_service(
            store_dir,
            port=port,
            host=host,
            triage_config=_load_triage_config(config_path),
            gen_config=GeneratorConfig(backend=Backend(gen_backend)),
            frontend_dir=Path(ui_dir) if ui_dir else None,
        )
    except CarenotesError as exc:
        _fail(exc)


@main.command()
@click.option("--store-dir", envvar="ADHERENCE_STORE_DIR", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--case", "case_id", required=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
def export(store_dir: str, case_id: str, out_dir: str):
    """Copy an approved note (JSON + HTML) out of the store."""
    try:
        store = CaseStore(store_dir)
        note = store.get_note(case_id)
        html = store.read_export(case_id)
    except CarenotesError as exc:
        _fail(exc)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{case_id}.json").write_text(json.dumps(note, indent=2) + "\n")
    (out / f"{case_id}.html").write_bytes(html)
    click.echo(f"exported {case_id} to {out}")


@main.command()
@click.argument("responses_file", type=click.Path(exists=True, dir_okay=False))
def stats(responses_file: str):
    """Aggregate questionnaire responses into a results table."""
    try:
        docs = json.loads(Path(responses_file).read_text())
        responses = metrics.responses_from_docs(docs)
        report = metrics.aggregate(responses)
    except (CarenotesError, ValueError, KeyError) as exc:
        click.echo(f"error:{type(exc).__name__}:{exc}", err=True)
        sys.exit(1)

    n = report.n_responses
    width = 44
    click.echo(f"{'Metric':<{width}}Result")
    click.echo("Quality (1-10)")
    for label, mean in zip(_DIMENSION_LABELS, report.dimension_means):
        click.echo(f"  {label:<{width - 2}}{mean:.2f}")
    click.echo("Physician variability")
    for pid in sorted(report.per_physician_q10_mean):
        click.echo(
            f"  {'Q10 (' + pid + ')':<{width - 2}}"
            f"{report.per_physician_q10_mean[pid]:.2f}"
        )
    click.echo(f"  {'Overall mean (Q1-Q12)':<{width - 2}}{report.overall_mean:.2f}")
    click.echo("Safety")
    minor = report.safety_counts[metrics.SafetyFlag.MINOR_CONCERN]
    critical = report.safety_counts[metrics.SafetyFlag.SAFETY_CRITICAL]
    click.echo(f"  {'Minor concerns':<{width - 2}}{minor}/{n}")
    click.echo(f"  {'Safety-critical issues':<{width - 2}}{critical}/{n}")
    click.echo("Editing scope")
    for bucket in metrics.ScopeBucket:
        click.echo(
            f"  {bucket.value:<{width - 2}}{report.bucket_histogram[bucket]}/{n}"
        )


if __name__ == "__main__":
    main()
