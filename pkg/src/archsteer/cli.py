"""Command line interface: serve the steering service, run batch
experiments, and analyze saved fronts."""

from __future__ import annotations

import json
import os

import click

from .experiment import SCALES, analyze_fronts, report_csv, run_experiment_to_files
from .model import ArchsteerError, load_model_file


@click.group()
def main():
    """Interactive multi-objective optimization of architecture refactorings."""


@main.command()
@click.option("--port", default=8000, show_default=True, help="HTTP port to bind.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option(
    "--data-dir",
    default=None,
    help="Session persistence directory (default: $ARCHSTEER_DATA_DIR or ./archsteer-data).",
)
@click.option("--workers", default=2, show_default=True, help="Background search workers.")
@click.option("--ui-dir", default=None, help="Directory of built console assets for /ui.")
def serve(port: int, host: str, data_dir: str | None, workers: int, ui_dir: str | None):
    """Run the steering session service."""
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=data_dir, workers=workers, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Path to a .arch model document.")
@click.option("--scale", default="desk", show_default=True,
              type=click.Choice(sorted(SCALES)), help="Experiment size preset.")
@click.option("--seed", default=42, show_default=True, help="Master seed.")
@click.option("--policy", default="best_perfq", show_default=True,
              help="Scripted centroid choice for the interactive arm.")
@click.option("--out", "out_dir", default="experiment-out", show_default=True,
              type=click.Path(file_okay=False), help="Report output directory.")
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Version-keyed run-config JSON overriding the scale preset.")
@click.option("--detectors", "detectors_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON file of antipattern detector threshold overrides.")
@click.option("--trace", "trace_path", default=None, type=click.Path(dir_okay=False),
              help="Append one JSON line per evaluation to this file.")
@click.option("--quiet", is_flag=True, help="Suppress progress lines.")
def experiment(model_path: str, scale: str, seed: int, policy: str, out_dir: str,
               config_path: str | None, detectors_path: str | None,
               trace_path: str | None, quiet: bool):
    """Run reference / baseline / interactive arms and write the report."""
    try:
        model = load_model_file(model_path)
    except ArchsteerError as exc:
        raise click.ClickException(str(exc))

    def read_json(path):
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)

    log = None if quiet else lambda msg: click.echo(msg, err=True)
    try:
        report = run_experiment_to_files(
            model, out_dir, scale=scale, master_seed=seed, policy=policy, log=log,
            config_doc=read_json(config_path) if config_path else None,
            thresholds=read_json(detectors_path) if detectors_path else None,
            trace_path=trace_path,
        )
    except ArchsteerError as exc:
        raise click.ClickException(str(exc))
    q = report["qualitative"]
    click.echo(f"report written to {out_dir}")
    click.echo(
        "median NPS baseline={:g} interactive={:g}; "
        "HV baseline>=interactive in {:.0%} of seeds".format(
            q["median_nps_baseline"],
            q["median_nps_interactive"],
            q["hv_baseline_ge_interactive_fraction"],
        )
    )


@main.command()
@click.option("--fronts", "fronts_paths", multiple=True, required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="fronts_*.json files; the first is the comparator.")
@click.option("--reference", "reference_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Reference fronts document.")
@click.option("--out", "out_dir", default=None, type=click.Path(file_okay=False),
              help="Write analysis.json/analysis.csv here instead of stdout.")
def analyze(fronts_paths: tuple[str, ...], reference_path: str, out_dir: str | None):
    """Compare saved fronts against a reference front."""

    def read(path):
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)

    try:
        report = analyze_fronts([read(p) for p in fronts_paths], read(reference_path))
    except ArchsteerError as exc:
        raise click.ClickException(str(exc))
    text = json.dumps(report, indent=2, sort_keys=True)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "analysis.json"), "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        with open(os.path.join(out_dir, "analysis.csv"), "w", encoding="utf-8") as fh:
            fh.write(report_csv(report))
        click.echo(f"analysis written to {out_dir}")
    else:
        click.echo(text)


if __name__ == "__main__":
    main(prog_name="archsteer")
