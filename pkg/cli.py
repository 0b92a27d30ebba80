import json
import logging
from pathlib import Path

import click
import pandas as pd

from app.core.config import load_scenario_config, resolve_out_dir, resolve_threads
from app.core.emit import emit, json_safe, read_tables, summarize, write_plotdata, write_positions, write_summary
from app.core.errors import CoexSimError
from app.core.scenario import build_context, run_scenario, snapshot
from app.core.phased_array import pattern_cut
from app.utils.helper import configure_logging

logger = logging.getLogger("cli")

config_option = click.option("--config", "config_path", type=click.Path(dir_okay=False),
                             default=None, help="Scenario JSON (default: $COEXSIM_CONFIG or config/scenario.json)")
out_dir_option = click.option("--out-dir", default=None, help="Output directory (default: $COEXSIM_OUT_DIR or ./results)")


def _load(config_path):
    try:
        return load_scenario_config(config_path)
    except CoexSimError as e:
        raise click.ClickException(str(e))


def _check_cities(config, cities):
    for name in cities:
        try:
            config.city(name)
        except KeyError:
            raise click.BadParameter(f"'{name}' is not a city of the scenario", param_hint="--city")


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Debug logging")
def cli(verbose):
    """LEO downlink coexistence simulator."""
    configure_logging(logging.DEBUG if verbose else logging.INFO)


@cli.command()
@config_option
@out_dir_option
@click.option("--city", "cities", multiple=True, help="Restrict the sweep to these cities (repeatable)")
@click.option("--threads", type=int, default=None, help="Worker processes (default: $COEXSIM_THREADS or physical cores)")
@click.option("--dump-positions", is_flag=True, help="Also write positions.csv for every timestep")
def run(config_path, out_dir, cities, threads, dump_positions):
    """Full time sweep: selection, uncertainty and bounds tables plus summaries."""
    config = _load(config_path)
    _check_cities(config, cities)
    out = resolve_out_dir(out_dir)
    try:
        result = run_scenario(config, cities=list(cities) or None, threads=resolve_threads(threads))
        emit(result, out)
        if dump_positions:
            write_positions(build_context(config), config.times(), out)
    except CoexSimError as e:
        raise click.ClickException(str(e))
    click.echo(f"Wrote results to {out}")


@cli.command("snapshot")
@config_option
@click.option("--city", required=True)
@click.option("--t", "t_s", type=float, default=0.0, show_default=True, help="Simulation time in seconds")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="JSON file (default: stdout)")
def snapshot_cmd(config_path, city, t_s, out):
    """Dump visible sets, bounds and every strategy's choice at one timestep."""
    config = _load(config_path)
    _check_cities(config, [city])
    try:
        dump = json_safe(snapshot(build_context(config), config.city(city), t_s))
    except CoexSimError as e:
        raise click.ClickException(str(e))
    text = json.dumps(dump, indent=2, allow_nan=False)
    if out:
        try:
            Path(out).write_text(text, encoding="utf-8")
        except OSError as e:
            raise click.ClickException(f"Cannot write {out}: {e.strerror}")
    else:
        click.echo(text)


@cli.command()
@out_dir_option
@click.option("--array", "labels", multiple=True, default=("8x8", "16x16", "32x32", "64x64"), show_default=True)
@click.option("--step-deg", type=float, default=0.5, show_default=True)
@click.option("--normalize/--absolute", default=True, show_default=True)
def pattern(out_dir, labels, step_deg, normalize):
    """Principal-plane gain cuts of boresight-steered arrays."""
    out = resolve_out_dir(out_dir)
    if step_deg <= 0:
        raise click.BadParameter("must be positive", param_hint="--step-deg")
    try:
        out.mkdir(parents=True, exist_ok=True)
        for label in labels:
            spec, angles, gains = pattern_cut(label, step_deg, normalize)
            path = out / f"pattern_{spec.label}.csv"
            pd.DataFrame({"angle_deg": angles, "gain_db": gains}).to_csv(path, index=False)
            click.echo(f"Wrote {path}")
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--array")
    except OSError as e:
        raise click.ClickException(f"Cannot write to {out}: {e.strerror}")


@cli.command()
@config_option
@out_dir_option
def figures(config_path, out_dir):
    """Re-aggregate the CSVs of an earlier run into summary.json and plotdata/."""
    config = _load(config_path)
    out = resolve_out_dir(out_dir)
    try:
        bounds, selection, uncertainty = read_tables(out)
        write_summary(summarize(config, bounds, selection, uncertainty), out)
        write_plotdata(config, bounds, selection, uncertainty, out)
    except CoexSimError as e:
        raise click.ClickException(str(e))
    click.echo(f"Wrote summary and plot data to {out}")


if __name__ == "__main__":
    cli()
