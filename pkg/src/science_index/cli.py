"""Command-line entry point.

Exit codes: 0 success, 1 operational error, 2 integrity violation
(broken or diverging ledger chain). JSON output mode is byte-stable:
identical inputs produce identical stdout.
"""

from __future__ import annotations

import sys

import click

from . import canonical, clients, evaluation, ingestion, ledger as ledger_mod
from .bibliometrics import CareerStats, derive_career_stats, AuthorRecord
from .errors import BrokenChain, ReplayMismatch, ScienceIndexError
from .regression import (FeatureVector, ModelConfig, ModelState,
                         delta_statistics, fit_batch, reference_preset)
from .scoring import MODE_LITERAL, MODE_SHARE_BONUS, calibrate_share_weight, score

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INTEGRITY = 2


def _fail(exc: Exception) -> None:
    code = EXIT_INTEGRITY if isinstance(exc, (BrokenChain, ReplayMismatch)) \
        else EXIT_ERROR
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def _emit(payload: dict, output: str) -> None:
    if output == "json":
        click.echo(canonical.dumps(payload).decode("utf-8"))
    else:
        for key, value in payload.items():
            click.echo(f"{key}: {value}")


def _save_model(path: str, state: ModelState) -> None:
    with open(path, "wb") as fh:
        fh.write(canonical.dumps(state.to_payload()))
        fh.write(b"\n")


def _load_model(path: str) -> ModelState:
    with open(path, "rb") as fh:
        return ModelState.from_payload(canonical.loads(fh.read()))


def _stats_stream(authors, fmt, papers, share_map, strict):
    manifest = ingestion.DatasetManifest(authors_path=authors,
                                         papers_path=papers, format=fmt)
    stream = ingestion.load_dataset(manifest, strict=strict)
    if fmt == ingestion.FORMAT_AUTHORS_PLUS_PAPERS:
        stream = (derive_career_stats(a) for a in stream)
    if share_map:
        stream = ingestion.join_share_counts(stream,
                                             ingestion.load_share_map(share_map))
    return stream


def _breakdown_payload(breakdown) -> dict:
    p = breakdown.to_payload()
    p["phi_display"] = f"{breakdown.phi:.4f}"
    return p


output_option = click.option("--output", type=click.Choice(["human", "json"]),
                             default="human", show_default=True)


@click.group(name="science-index")
@click.version_option(version="0.1.0", prog_name="science-index")
def main():
    """Researcher reputation scoring with a data-sharing incentive."""


# --- train ---

@main.command()
@click.option("--authors", required=True, type=click.Path(), help="dataset file")
@click.option("--format", "fmt",
              type=click.Choice([ingestion.FORMAT_PREJOINED,
                                 ingestion.FORMAT_AUTHORS_PLUS_PAPERS]),
              default=ingestion.FORMAT_PREJOINED, show_default=True)
@click.option("--papers", type=click.Path(), default=None,
              help="companion papers file (authors_plus_papers)")
@click.option("--share-map", type=click.Path(), default=None)
@click.option("--feature-set", type=click.Choice(["base", "augmented"]),
              default="base", show_default=True)
@click.option("--ridge-lambda", type=float, default=1e-9, show_default=True)
@click.option("--strict", is_flag=True, help="abort on malformed rows")
@click.option("--out", required=True, type=click.Path())
@output_option
def train(authors, fmt, papers, share_map, feature_set, ridge_lambda,
          strict, out, output):
    """Fit the regression on a dataset and write the model file."""
    try:
        config = ModelConfig(feature_set=feature_set,
                             ridge_lambda=ridge_lambda)
        data = [FeatureVector.from_career_stats(s, config.augmented)
                for s in _stats_stream(authors, fmt, papers, share_map, strict)]
        state = fit_batch(config, data)
        _save_model(out, state)
        mean, std = delta_statistics(state)
        _emit({"weights": [float(w) for w in state.weights],
               "observations": state.stats.n,
               "delta_mean": mean, "delta_std": std,
               "model_path": out}, output)
    except (ScienceIndexError, OSError, ValueError) as exc:
        _fail(exc)


# --- model source options shared by score/submit ---

def model_options(fn):
    fn = click.option("--model", "model_path", type=click.Path(),
                      default=None, help="model file (default: shipped preset)")(fn)
    fn = click.option("--delta-mean", type=float, default=0.0,
                      show_default=True, help="preset residual mean")(fn)
    fn = click.option("--delta-std", type=float, default=1.0,
                      show_default=True, help="preset residual std")(fn)
    return fn


def _resolve_model(model_path, delta_mean, delta_std) -> ModelState:
    if model_path:
        return _load_model(model_path)
    return reference_preset(delta_mean=delta_mean, delta_std=delta_std)


def fetch_options(fn):
    fn = click.option("--cache-dir", type=click.Path(), default=None)(fn)
    fn = click.option("--fetch-mode",
                      type=click.Choice([clients.MODE_FIXTURE_ONLY,
                                         clients.MODE_LIVE,
                                         clients.MODE_LIVE_WITH_RECORD]),
                      default=clients.MODE_FIXTURE_ONLY, show_default=True)(fn)
    return fn


def _fetch_stats(researcher_id, cache_dir, fetch_mode) -> CareerStats:
    policy = clients.FetchPolicy(cache_dir=cache_dir, mode=fetch_mode)
    profile = clients.fetch_author(policy, researcher_id)
    shares = clients.fetch_share_count(policy, researcher_id)
    return derive_career_stats(AuthorRecord(author_id=researcher_id,
                                            papers=profile.papers,
                                            data_share_count=shares))


# --- score ---

@main.command(name="score")
@model_options
@click.option("--career", type=int, default=None)
@click.option("--papers", type=int, default=None)
@click.option("--citations", type=int, default=None)
@click.option("--h-index", type=int, default=None)
@click.option("--shares", type=int, default=0, show_default=True)
@click.option("--researcher-id", default=None,
              help="fetch statistics instead of passing them inline")
@fetch_options
@click.option("--mode", type=click.Choice([MODE_LITERAL, MODE_SHARE_BONUS]),
              default=MODE_SHARE_BONUS, show_default=True)
@click.option("--share-weight", type=float, default=0.0, show_default=True)
@output_option
def score_cmd(model_path, delta_mean, delta_std, career, papers, citations,
              h_index, shares, researcher_id, cache_dir, fetch_mode, mode,
              share_weight, output):
    """Score one researcher from inline statistics or a fetched profile."""
    try:
        model = _resolve_model(model_path, delta_mean, delta_std)
        if researcher_id:
            stats = _fetch_stats(researcher_id, cache_dir, fetch_mode)
        else:
            if None in (career, papers, citations, h_index):
                raise click.UsageError(
                    "provide --career/--papers/--citations/--h-index "
                    "or --researcher-id")
            stats = CareerStats(career_length=career,
                                publication_count=papers,
                                citation_count=citations, h_index=h_index,
                                data_share_count=shares)
        breakdown = score(stats, model, mode, share_weight)
        _emit(_breakdown_payload(breakdown), output)
    except click.UsageError:
        raise
    except (ScienceIndexError, OSError, ValueError) as exc:
        _fail(exc)


# --- ledger commands ---

def _load_ledger(path) -> ledger_mod.LedgerState:
    return ledger_mod.replay(ledger_mod.load_log(path))


@main.command()
@click.option("--ledger", "ledger_path", required=True, type=click.Path())
@model_options
@click.option("--mode", type=click.Choice([MODE_LITERAL, MODE_SHARE_BONUS]),
              default=MODE_SHARE_BONUS, show_default=True)
@click.option("--share-weight", type=float, default=0.0, show_default=True)
@click.option("--researcher-id", default=None)
@fetch_options
@click.option("--no-fulfill", is_flag=True,
              help="submit only; leave the request pending")
@click.option("--fulfill-pending", is_flag=True,
              help="drive the oracle for every pending request")
@output_option
def submit(ledger_path, model_path, delta_mean, delta_std, mode, share_weight,
           researcher_id, cache_dir, fetch_mode, no_fulfill, fulfill_pending,
           output):
    """Submit a score request and (by default) drive the oracle round trip.

    A missing ledger file is initialized with a genesis entry first.
    """
    try:
        import os
        if os.path.exists(ledger_path):
            state = _load_ledger(ledger_path)
        else:
            model = _resolve_model(model_path, delta_mean, delta_std)
            config = ledger_mod.LedgerConfig(mode=mode,
                                             share_weight=share_weight)
            state = ledger_mod.genesis(model, config)
        results = []
        to_fulfill = []
        if researcher_id is not None:
            state, request = ledger_mod.submit_request(state, researcher_id)
            if not no_fulfill:
                to_fulfill.append(request)
        if fulfill_pending:
            to_fulfill = list(state.pending.values())
        for request in to_fulfill:
            stats = _fetch_stats(request.researcher_id, cache_dir, fetch_mode)
            state, breakdown = ledger_mod.apply_fulfillment(
                state, ledger_mod.OracleFulfillment(request.request_id, stats))
            results.append({"request_id": request.request_id,
                            "researcher_id": request.researcher_id,
                            "score": _breakdown_payload(breakdown)})
        ledger_mod.save_log(ledger_path, state.entries)
        _emit({"entries": len(state.entries),
               "pending": len(state.pending),
               "head_digest": state.head_digest.hex(),
               "results": results}, output)
    except (ScienceIndexError, OSError, ValueError) as exc:
        _fail(exc)


@main.command()
@click.option("--ledger", "ledger_path", required=True, type=click.Path())
@output_option
def replay(ledger_path, output):
    """Reconstruct state from a ledger log and print the final digest."""
    try:
        state = _load_ledger(ledger_path)
        _emit({"entries": len(state.entries),
               "fulfillments": state.fulfillment_count(),
               "pending": len(state.pending),
               "model_version": state.model.version,
               "final_digest": state.head_digest.hex()}, output)
    except (ScienceIndexError, OSError, ValueError) as exc:
        _fail(exc)


@main.command()
@click.option("--ledger", "ledger_path", required=True, type=click.Path())
@output_option
def verify(ledger_path, output):
    """Check the digest chain; exit 2 naming the seq if it is broken."""
    try:
        entries = ledger_mod.load_log(ledger_path)
        digest = ledger_mod.verify_chain(entries)
        _emit({"entries": len(entries), "final_digest": digest.hex()}, output)
    except (ScienceIndexError, OSError, ValueError) as exc:
        _fail(exc)


# --- calibration / experiments ---

@main.command()
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--authors", required=True, type=click.Path(),
              help="prejoined stats file")
@click.option("--target", type=float, default=0.27, show_default=True)
@click.option("--tolerance", type=float, default=1e-3, show_default=True)
@output_option
def calibrate(model_path, authors, target, tolerance, output):
    """Solve for the share-bonus weight hitting a target mean score shift."""
    try:
        model = _load_model(model_path)
        population = list(_stats_stream(authors, ingestion.FORMAT_PREJOINED,
                                        None, None, False))
        weight = calibrate_share_weight(model, population, target, tolerance)
        mean_shift, _ = evaluation.run_share_shift_experiment(
            population, model, weight)
        _emit({"share_weight": weight, "measured_mean_shift": mean_shift,
               "target": target}, output)
    except (ScienceIndexError, OSError, ValueError) as exc:
        _fail(exc)


@main.command(name="eval-density")
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--authors", required=True, type=click.Path())
@click.option("--bins", type=int, default=20, show_default=True)
@click.option("--mode", type=click.Choice([MODE_LITERAL, MODE_SHARE_BONUS]),
              default=MODE_LITERAL, show_default=True)
@click.option("--share-weight", type=float, default=0.0, show_default=True)
@click.option("--out", required=True, type=click.Path(), help="CSV output")
@output_option
def eval_density(model_path, authors, bins, mode, share_weight, out, output):
    """Score a population and export its score density as CSV."""
    try:
        model = _load_model(model_path)
        population = list(_stats_stream(authors, ingestion.FORMAT_PREJOINED,
                                        None, None, False))
        phis = [score(s, model, mode, share_weight).phi for s in population]
        series = evaluation.export_density(phis, bins, label="phi")
        series.to_csv(out)
        _emit({"authors": len(phis), "bins": bins,
               "mean_phi": sum(phis) / len(phis), "csv": out}, output)
    except (ScienceIndexError, OSError, ValueError) as exc:
        _fail(exc)


@main.command(name="eval-share-shift")
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--authors", required=True, type=click.Path())
@click.option("--share-weight", type=float, required=True)
@output_option
def eval_share_shift(model_path, authors, share_weight, output):
    """Measure the mean score shift produced by recorded data sharing."""
    try:
        model = _load_model(model_path)
        population = list(_stats_stream(authors, ingestion.FORMAT_PREJOINED,
                                        None, None, False))
        mean_shift, shifts = evaluation.run_share_shift_experiment(
            population, model, share_weight)
        _emit({"authors": len(shifts), "share_weight": share_weight,
               "mean_shift": mean_shift,
               "min_shift": min(shifts), "max_shift": max(shifts)}, output)
    except (ScienceIndexError, OSError, ValueError) as exc:
        _fail(exc)


@main.command(name="eval-north-south")
@click.option("--config", "config_path", required=True, type=click.Path(),
              help="JSON file with north/south population specs")
@click.option("--out-dir", required=True, type=click.Path())
@output_option
def eval_north_south(config_path, out_dir, output):
    """Run the resource-disparity convergence experiment from a spec file."""
    try:
        import json
        import os
        with open(config_path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
        north = evaluation.PopulationSpec(**cfg["north"])
        south = evaluation.PopulationSpec(**cfg["south"])
        model_config = ModelConfig(**cfg.get("model", {}))
        report = evaluation.run_north_south_experiment(
            north, south, model_config, bins=int(cfg.get("bins", 20)))
        os.makedirs(out_dir, exist_ok=True)
        for group in (report.north, report.south):
            group.h_density.to_csv(
                os.path.join(out_dir, f"{group.label}_h_density.csv"))
            group.phi_density.to_csv(
                os.path.join(out_dir, f"{group.label}_phi_density.csv"))
        with open(os.path.join(out_dir, "report.json"), "wb") as fh:
            fh.write(canonical.dumps(report.to_payload()))
            fh.write(b"\n")
        _emit(report.to_payload(), output)
    except (ScienceIndexError, OSError, ValueError, KeyError, TypeError) as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
