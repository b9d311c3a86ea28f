import contextlib
import logging
from pathlib import Path
import sys
from typing import Any

import click
from click.core import ParameterSource
from dotenv import load_dotenv
from pydantic import ValidationError as PydanticValidationError
import typer

from core import __version__
from core.config import RuntimeSettings
from core.domain.classes import TrainedModel, TransferParams
from core.domain.dataset import Dataset, SynthConfig
from core.domain.scores import EvalConfig
from core.domain.trial import ParadigmConfig
from core.engine.evaluation import feasible_n_grid, run_transfer_evaluation, source_weights_for
from core.loaders.yaml_loader import load_run_config, merge_run_config
from core.persistence.dataset_store import load_dataset, save_dataset
from core.persistence.model_store import save_model
from core.persistence.score_store import (
    read_scores,
    render_meta_report,
    summary_path,
    write_meta,
    write_provenance,
    write_scores,
    write_summary,
)
from core.services.classifiers import fit_mdwm, fit_source_means, predict_many
from core.services.datasets import describe_dataset, validate_for_transfer
from core.services.features import CovarianceFeatures
from core.services.meta_stats import run_meta_analysis
from core.services.splits import balanced_accuracy, transfer_split
from core.services.synthetic import generate_synthetic
from core.utils.constants import (
    DEFAULT_PIPELINES,
    OPERATING_LAMBDA,
    OPERATING_N_PER_CLASS,
    PIPELINE_MDWM,
    PIPELINE_TARGET_ONLY,
    PROTOCOL_LAMBDAS,
    PROTOCOL_N_TRAIN,
    PROTOCOL_REPETITIONS,
)
from core.utils.errors import DatasetFormatError, NumericalError, ValidationError

load_dotenv(override=False)
app = typer.Typer(help="Cross-subject transfer benchmark for Riemannian minimum-distance classifiers.")
logger = logging.getLogger(__name__)

_SETTINGS = RuntimeSettings.from_env()


@contextlib.contextmanager
def _exit_on_error():
    """Report a failure on stderr and exit 1 (validation), 2 (numerical) or 3 (I/O, format)."""
    try:
        yield
    except (ValidationError, PydanticValidationError) as e:
        _fail(e, 1)
    except NumericalError as e:
        _fail(e, 2)
    except (DatasetFormatError, OSError) as e:
        _fail(e, 3)


def _fail(error: Exception, code: int) -> None:
    typer.echo(f"error: {error}", err=True)
    for note in getattr(error, "__notes__", []):
        typer.echo(f"  {note}", err=True)
    raise typer.Exit(code)


def _resolve_params(ctx: typer.Context, config: Path | None, list_params: tuple[str, ...] = ()) -> dict[str, Any]:
    """Command parameters with an optional YAML config overlaid; conflicts are errors."""
    values = dict(ctx.params)
    if config is None:
        return values
    explicit = [
        name
        for name in values
        if ctx.get_parameter_source(name) in (ParameterSource.COMMANDLINE, ParameterSource.ENVIRONMENT)
    ]
    return merge_run_config(values, load_run_config(config), explicit, list_params)


def _parse_band(value: Any) -> tuple[float, float]:
    if isinstance(value, list | tuple) and len(value) == 2:
        return float(value[0]), float(value[1])
    parts = str(value).split(":")
    if len(parts) != 2:
        raise ValidationError(f"band {value!r} must look like LOW:HIGH (Hz)")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as e:
        raise ValidationError(f"band {value!r} must look like LOW:HIGH (Hz)") from e


def _parse_regularization(value: Any) -> float | str:
    if str(value).strip().lower() == "auto":
        return "auto"
    try:
        return float(value)
    except ValueError as e:
        raise ValidationError(f"regularization must be a number in [0, 1) or 'auto', got {value!r}") from e


def _parse_source_weights(values: Any) -> dict[str, float] | None:
    """Repeated SUBJECT=WEIGHT flags as a map; None when none were given."""
    if not values:
        return None
    weights: dict[str, float] = {}
    for item in values:
        subject, sep, raw = str(item).partition("=")
        try:
            if not sep or not subject:
                raise ValueError(item)
            weights[subject.strip()] = float(raw)
        except ValueError as e:
            raise ValidationError(f"source weight {item!r} must look like SUBJECT=WEIGHT") from e
    return weights


def _require_path(value: Any, flag: str) -> Path:
    if value is None or str(value) == "":
        raise ValidationError(f"missing required option {flag}")
    return Path(value)


@app.callback()
def root(
    log_level: str = typer.Option(
        _SETTINGS.log_level, "--log-level", help="Logging level (falls back to MDWM_LOG_LEVEL)"
    ),
):
    """Generate datasets, run leave-one-subject-out evaluations and meta-analyses."""
    level = getattr(logging, log_level.upper(), None)
    if not isinstance(level, int):
        raise typer.BadParameter(f"unknown log level {log_level!r}", param_hint="--log-level")
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", force=True)


# --- generate ---

_OPT_CONFIG = typer.Option(None, "--config", help="YAML file of flag values; conflicting flags are errors")
_OPT_OUT_DIR = typer.Option(None, "--out", help="Dataset directory to write")


@app.command("generate")
def cmd_generate(
    ctx: typer.Context,
    seed: int = typer.Option(7, "--seed", help="Master seed of the generator"),
    subjects: int = typer.Option(8, "--subjects"),
    classes: int = typer.Option(4, "--classes"),
    channels: int = typer.Option(8, "--channels"),
    samples: int = typer.Option(256, "--samples", help="Samples per trial"),
    trials_per_class: int = typer.Option(40, "--trials-per-class"),
    sampling_rate: float = typer.Option(256.0, "--sampling-rate", help="Nominal rate in Hz"),
    class_separation: float = typer.Option(0.06, "--class-separation"),
    subject_variability: float = typer.Option(0.05, "--subject-variability"),
    trial_noise: float = typer.Option(0.14, "--trial-noise"),
    out: Path | None = _OPT_OUT_DIR,
    config: Path | None = _OPT_CONFIG,
):
    """Write a seeded synthetic multi-subject dataset."""
    with _exit_on_error():
        params = _resolve_params(ctx, config)
        target = _require_path(params.pop("out"), "--out")
        params.pop("config", None)
        synth = SynthConfig(**params)
        ds = generate_synthetic(synth)
        save_dataset(ds, target)
        write_provenance(
            target, "generate", {"synth": synth.model_dump(mode="json"), "out": str(target)}, __version__
        )
        typer.echo(describe_dataset(ds))
        typer.echo(f"Wrote dataset to {target}")


# --- eval ---

_ARG_DATASET = typer.Argument(..., help="Dataset directory")
_OPT_SCORES_OUT = typer.Option(Path("scores.csv"), "--out", help="Score table CSV to write")
_OPT_N = typer.Option(None, "--n", help="Calibration size; repeat for a grid")
_OPT_LAMBDA = typer.Option(None, "--lambda", help="Transfer weight in [0, 1]; repeat for a grid")
_OPT_REPS = typer.Option(PROTOCOL_REPETITIONS, "--reps", help="Random splits per (subject, n)")
_OPT_EVAL_SEED = typer.Option(0, "--seed", help="Master seed of the calibration splits")
_OPT_PIPELINE = typer.Option(None, "--pipeline", help="Pipeline name; repeat for several")
_OPT_PARADIGM = typer.Option("plain", "--paradigm", help="plain, erp_prototype or filter_bank")
_OPT_PROTOTYPE = typer.Option(None, "--prototype-label", help="Class whose mean ERP is stacked")
_OPT_BAND = typer.Option(None, "--band", help="Filter-bank band LOW:HIGH in Hz; repeat for several")
_OPT_REG = typer.Option("0.05", "--regularization", help="Shrinkage in [0, 1) or 'auto'")
_OPT_JOBS = typer.Option(_SETTINGS.jobs, "--jobs", help="Worker processes (falls back to MDWM_JOBS)")
_OPT_TIMINGS = typer.Option(_SETTINGS.record_timings, "--timings", help="Measure fit and predict times")
_OPT_PROTOCOL = typer.Option(False, "--paper-defaults", help="Protocol grids plus the lambda=0.7, n=2K operating point")
_OPT_NO_CACHE = typer.Option(False, "--no-cache", help="Refit source means for every cell")
_OPT_SOURCE_WEIGHT = typer.Option(
    None, "--source-weight", help="Relative weight of a source subject as SUBJECT=WEIGHT; repeat for every subject"
)


def _eval_grids(params: dict[str, Any], ds: Dataset) -> tuple[tuple[int, ...], tuple[float, ...]]:
    requested_n = [int(n) for n in (params["n"] or [])]
    lambdas = tuple(float(v) for v in (params["lambda_"] or [])) or PROTOCOL_LAMBDAS
    if requested_n:
        n_grid = tuple(requested_n)
    else:
        n_grid = feasible_n_grid(ds, PROTOCOL_N_TRAIN)
    if params["paper_defaults"]:
        operating_n = OPERATING_N_PER_CLASS * len(ds.labels)
        n_grid = tuple(sorted(set(n_grid) | {operating_n}))
        lambdas = tuple(sorted(set(lambdas) | {OPERATING_LAMBDA}))
    if not n_grid:
        raise ValidationError(f"no default calibration size is feasible for dataset {ds.name!r}; pass --n")
    return n_grid, lambdas


def _paradigm(params: dict[str, Any], ds: Dataset) -> ParadigmConfig:
    kind = params["paradigm"]
    if kind == "filter_bank":
        bands = tuple(_parse_band(b) for b in (params["band"] or []))
        return ParadigmConfig(kind=kind, bands=bands, sampling_rate=ds.sampling_rate)
    return ParadigmConfig(kind=kind, prototype_label=params["prototype_label"])


@app.command("eval")
def cmd_eval(
    ctx: typer.Context,
    dataset: Path = _ARG_DATASET,
    out: Path = _OPT_SCORES_OUT,
    n: list[int] | None = _OPT_N,
    lambda_: list[float] | None = _OPT_LAMBDA,
    reps: int = _OPT_REPS,
    seed: int = _OPT_EVAL_SEED,
    pipeline: list[str] | None = _OPT_PIPELINE,
    paradigm: str = _OPT_PARADIGM,
    prototype_label: str | None = _OPT_PROTOTYPE,
    band: list[str] | None = _OPT_BAND,
    regularization: str = _OPT_REG,
    jobs: int = _OPT_JOBS,
    timings: bool = _OPT_TIMINGS,
    paper_defaults: bool = _OPT_PROTOCOL,
    no_cache: bool = _OPT_NO_CACHE,
    source_weight: list[str] | None = _OPT_SOURCE_WEIGHT,
    config: Path | None = _OPT_CONFIG,
):
    """Leave-one-subject-out transfer evaluation; writes the score table and its summary."""
    with _exit_on_error():
        params = _resolve_params(ctx, config, ("n", "lambda_", "pipeline", "band", "source_weight"))
        ds = load_dataset(_require_path(params["dataset"], "DATASET"))
        logger.info(describe_dataset(ds))
        validate_for_transfer(ds)
        n_grid, lambdas = _eval_grids(params, ds)
        eval_config = EvalConfig(
            n_train=n_grid,
            lambdas=lambdas,
            repetitions=params["reps"],
            seed=params["seed"],
            pipelines=tuple(params["pipeline"] or DEFAULT_PIPELINES),
            paradigm=_paradigm(params, ds),
            regularization=_parse_regularization(params["regularization"]),
            jobs=params["jobs"],
            record_timings=params["timings"],
            cache_source_means=not params["no_cache"],
            source_weights=_parse_source_weights(params["source_weight"]),
        )
        table = run_transfer_evaluation(ds, eval_config)
        target = Path(params["out"])
        write_scores(table, target)
        write_summary(table, summary_path(target))
        write_provenance(
            target,
            "eval",
            {"dataset": str(params["dataset"]), "dataset_name": ds.name, "eval": eval_config.model_dump(mode="json")},
            __version__,
        )
        typer.echo(f"Wrote {len(table)} score rows to {target}")


# --- meta ---

_OPT_SCORES = typer.Option(None, "--scores", help="Score table CSV; repeat for several datasets")
_OPT_METHOD_A = typer.Option(PIPELINE_MDWM, "--method-a", help="Method expected to score higher")
_OPT_METHOD_B = typer.Option(PIPELINE_TARGET_ONLY, "--method-b", help="Reference method")
_OPT_META_N = typer.Option(None, "--n", help="Calibration size of the compared cell")
_OPT_META_LAMBDA = typer.Option(OPERATING_LAMBDA, "--lambda", help="Lambda of the compared cell")
_OPT_TWO_SIDED = typer.Option(False, "--two-sided", help="Two-sided instead of one-sided greater test")
_OPT_META_OUT = typer.Option(Path("meta.csv"), "--out", help="Machine-readable summary CSV")


@app.command("meta")
def cmd_meta(
    ctx: typer.Context,
    scores: list[Path] | None = _OPT_SCORES,
    method_a: str = _OPT_METHOD_A,
    method_b: str = _OPT_METHOD_B,
    n: int | None = _OPT_META_N,
    lambda_: float = _OPT_META_LAMBDA,
    two_sided: bool = _OPT_TWO_SIDED,
    out: Path = _OPT_META_OUT,
    config: Path | None = _OPT_CONFIG,
):
    """Per-dataset Wilcoxon tests and SMDs combined across datasets."""
    with _exit_on_error():
        params = _resolve_params(ctx, config, ("scores",))
        paths = [Path(p) for p in (params["scores"] or [])]
        if not paths:
            raise ValidationError("missing required option --scores")
        tables = [read_scores(p) for p in paths]
        n_train = params["n"]
        if n_train is None:
            available = sorted({int(v) for t in tables for v in t.frame["n_train"].unique()})
            if len(available) != 1:
                raise ValidationError(f"score tables hold several calibration sizes {available}; pass --n")
            n_train = available[0]
        result = run_meta_analysis(
            tables,
            params["method_a"],
            params["method_b"],
            int(n_train),
            float(params["lambda_"]),
            "two-sided" if params["two_sided"] else "greater",
        )
        target = Path(params["out"])
        write_meta(result, target)
        write_provenance(
            target,
            "meta",
            {
                "scores": [str(p) for p in paths],
                "method_a": result.method_a,
                "method_b": result.method_b,
                "n_train": result.n_train,
                "lambda": result.lam,
                "alternative": result.alternative,
            },
            __version__,
        )
        typer.echo(render_meta_report(result))


# --- fit-model ---

_OPT_TARGET = typer.Option(..., "--target", help="Subject id used as transfer target")
_OPT_FIT_N = typer.Option(..., "--n", help="Calibration trials drawn from the target")
_OPT_FIT_REP = typer.Option(0, "--repetition", help="Split index")
_OPT_MODEL_OUT = typer.Option(Path("model.json"), "--out", help="Model JSON to write")


@app.command("fit-model")
def cmd_fit_model(
    dataset: Path = _ARG_DATASET,
    target: str = _OPT_TARGET,
    n: int = _OPT_FIT_N,
    lambda_: float = _OPT_META_LAMBDA,
    seed: int = _OPT_EVAL_SEED,
    repetition: int = _OPT_FIT_REP,
    paradigm: str = _OPT_PARADIGM,
    prototype_label: str | None = _OPT_PROTOTYPE,
    band: list[str] | None = _OPT_BAND,
    regularization: str = _OPT_REG,
    source_weight: list[str] | None = _OPT_SOURCE_WEIGHT,
    out: Path = _OPT_MODEL_OUT,
):
    """Fit one MDWM model for a target subject, report its held-out score and save it."""
    with _exit_on_error():
        ds = validate_for_transfer(load_dataset(dataset))
        subject = ds.subject(target)
        sources = [s for s in ds.subjects if s.subject_id != target]
        params = TransferParams(
            lam=lambda_,
            source_subject_weights=source_weights_for(sources, _parse_source_weights(source_weight)),
        )
        paradigm_config = _paradigm(
            {"paradigm": paradigm, "prototype_label": prototype_label, "band": band}, ds
        )
        features = CovarianceFeatures(paradigm_config, _parse_regularization(regularization)).fit(
            [t for s in sources for t in s.trials]
        )
        source_means = fit_source_means(sources, params.source_subject_weights, features)
        train, test = transfer_split(subject, n, repetition, seed)
        means = fit_mdwm(features.labeled(train), source_means, params, feature_key=features.key)
        score = balanced_accuracy([t.label for t in test], predict_many(means, features.transform(test)))
        save_model(TrainedModel(means=means, lam=lambda_), out)
        typer.echo(f"{target}: balanced accuracy {score:.4f} on {len(test)} held-out trials")
        typer.echo(f"Wrote model to {out}")


def main(argv: list[str] | None = None) -> int:
    """Run the CLI and return its exit code; usage errors count as validation failures."""
    try:
        result = app(args=argv, prog_name="mdwm", standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return 1
    except click.Abort:
        return 1
    return result if isinstance(result, int) else 0


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
