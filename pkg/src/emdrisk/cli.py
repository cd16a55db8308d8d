"""Command-line interface: ``emdrisk compare | calibrate | rdist | demo-blackbody``."""

import json
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import click
import jsonschema
import numpy as np

from . import blackbody as bb
from . import io
from .calibration import BlackbodyOmega, CalibrationRecord, bin_records, overconfidence_report, run_calibration
from .emd import DEFAULT_REL_SE_TARGET, MAX_SAMPLES, MIN_SAMPLES, r_distribution_from_losses
from .exceptions import EMDError
from .scenarios import DEMO_SCENARIOS, compare_blackbody, run_scenario
from .selection import comparison_matrix, reject

DEFAULT_C_LIST = tuple(2.0**k for k in range(-6, 4))


def _version():
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


def _schema():
    return json.loads(resources.files("emdrisk").joinpath("config.schema.json").read_text())


def _resolve(ctx, config_path):
    """Merge an optional JSON config into the command's parameters; flags win."""
    params = dict(ctx.params)
    params.pop("config", None)
    if config_path is None:
        return params
    cfg = io.read_json(config_path)
    try:
        jsonschema.validate(cfg, _schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "(top level)"
        raise click.UsageError(f"{config_path}: invalid config at {where}: {exc.message}")
    unknown = sorted(set(cfg) - set(params))
    if unknown:
        raise click.UsageError(f"{config_path}: keys not accepted by this command: {unknown}")
    multiple = {prm.name for prm in ctx.command.params if getattr(prm, "multiple", False)}
    for key, value in cfg.items():
        if ctx.get_parameter_source(key) != click.core.ParameterSource.DEFAULT:
            continue
        if key in multiple:
            value = value if isinstance(value, list) else [value]
            params[key] = tuple(tuple(v) if isinstance(v, list) else v for v in value)
        elif isinstance(value, list):
            raise click.UsageError(f"{config_path}: {key!r} takes a single value for this command")
        else:
            params[key] = value
    return params


def _manifest(command, params, outputs, **extra):
    cfg = {k: (list(v) if isinstance(v, tuple) else v) for k, v in params.items()}
    cfg = {k: ([list(x) if isinstance(x, tuple) else x for x in v] if isinstance(v, list) else v)
           for k, v in cfg.items()}
    return {
        "command": command,
        "version": _version(),
        "config": cfg,
        "constants": bb.CONSTANTS,
        "outputs": sorted(outputs),
        **extra,
    }


def _safe_name(text):
    return re.sub(r"[^A-Za-z0-9_.=+-]", "_", str(text))


def _c_label(c):
    return "c" + io.format_number(float(c))


def _progress(done, total):
    step = max(1, total // 20)
    if done % step == 0 or done == total:
        click.echo(f"[{done}/{total}] experiments done", err=True)


def _run(out, command, fn):
    """Run `fn`, turning library errors into an error artifact and exit status 1."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    err_file = out / "error.json"
    if err_file.exists():
        err_file.unlink()
    try:
        fn(out)
    except click.UsageError as exc:
        io.write_json(err_file, {"command": command, "error": "UsageError", "message": exc.message})
        raise
    except (EMDError, ValueError) as exc:
        io.write_json(err_file, {"command": command, "error": type(exc).__name__, "message": str(exc)})
        raise click.ClickException(str(exc))


def _rdist_options(p):
    return {
        "resolution": p["resolution"],
        "depth": p["depth"],
        "rel_se_target": p["rel_se_target"],
        "min_samples": p["min_samples"],
        "max_samples": p["max_samples"],
    }


def _rdist_task(args):
    model_id, mixed, synth, c, seed, opts = args
    return r_distribution_from_losses(mixed, synth, c, seed, model_id=model_id, **opts)


def _write_rdists(out, rdists, outputs):
    for mid, rd in rdists.items():
        name = f"rdist_{_safe_name(mid)}.json"
        io.write_json(out / name, rd.to_dict())
        outputs.append(name)


common_options = [
    click.option("--config", type=click.Path(dir_okay=False), default=None,
                 help="JSON config file; flags given on the command line override it."),
    click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True,
                 help="Master seed; all randomness derives from it."),
    click.option("--threads", type=click.IntRange(min=1), default=1, show_default=True,
                 help="Worker processes. Outputs do not depend on this."),
    click.option("--out", type=click.Path(file_okay=False), default="emdrisk-out",
                 show_default=True, help="Output directory."),
]

rdist_options = [
    click.option("--resolution", type=click.IntRange(min=2), default=1024, show_default=True,
                 help="PPF grid resolution K."),
    click.option("--depth", type=click.IntRange(min=1), default=8, show_default=True,
                 help="Refinement levels of the hierarchical beta process."),
    click.option("--rel-se-target", type=click.FloatRange(0, 1, min_open=True, max_open=True),
                 default=DEFAULT_REL_SE_TARGET, show_default=True,
                 help="Stop sampling risks once the relative standard error is below this."),
    click.option("--min-samples", type=click.IntRange(min=2), default=MIN_SAMPLES, show_default=True),
    click.option("--max-samples", type=click.IntRange(min=2), default=MAX_SAMPLES, show_default=True),
]

scenario_options = [
    click.option("--s", "s", type=click.FloatRange(0, min_open=True), default=1e5, show_default=True,
                 help="Sensor gain."),
    click.option("--temperature", type=click.FloatRange(0, min_open=True), default=4000.0,
                 show_default=True, help="Source temperature in K."),
    click.option("--lambda-min", type=click.FloatRange(0, min_open=True), default=15.0,
                 show_default=True, help="Shortest wavelength (µm)."),
    click.option("--lambda-max", type=click.FloatRange(0, min_open=True), default=30.0,
                 show_default=True, help="Longest wavelength (µm)."),
]


def _apply(options):
    def deco(f):
        for opt in reversed(options):
            f = opt(f)
        return f
    return deco


@click.group()
@click.version_option(_version(), prog_name="emdrisk")
def main():
    """Model comparison via empirical model discrepancy (EMD) risk distributions."""


@main.command()
@_apply(common_options)
@_apply(rdist_options)
@click.option("--c", "c", type=click.FloatRange(0), default=0.5, show_default=True,
              help="Sensitivity constant.")
@click.option("--epsilon", type=click.FloatRange(0.5, 1, min_open=True), default=0.95,
              show_default=True, help="Rejection threshold.")
@click.option("--model", type=(str, click.Path(dir_okay=False), click.Path(dir_okay=False)),
              multiple=True, help="NAME MIXED.csv SYNTH.csv; repeat once per model.")
@click.option("--column", default=None, help="Column (0-based index or header name) of the loss CSVs.")
@click.option("--scenario", default=None,
              help="Black-body comparison instead of loss files: 'blackbody' or a demo scenario name.")
@click.option("--dataset", type=click.Path(dir_okay=False), default=None,
              help="Black-body spectrum CSV (lambda_um, radiance) used to fit the candidates.")
@click.option("--test-dataset", type=click.Path(dir_okay=False), default=None,
              help="Spectrum CSV used to score the candidates (default: --dataset).")
@_apply(scenario_options)
@click.option("--bias", type=float, default=0.0, show_default=True, help="Detector bias B0.")
@click.option("--n-points", type=click.IntRange(min=3), default=4096, show_default=True,
              help="Spectrum size for generated data.")
@click.pass_context
def compare(ctx, config, **_):
    """Compare models and apply the rejection rule.

    Inputs are either per-model loss CSVs (--model, repeated) or a black-body
    scenario (--scenario / --dataset). Writes comparison_matrix.csv,
    rejection.json, one rdist_<model>.json per model and manifest.json.
    """
    p = _resolve(ctx, config)

    def body(out):
        outputs, extra = [], {}
        opts = _rdist_options(p)
        if p["model"] and (p["scenario"] or p["dataset"]):
            raise click.UsageError("give either --model files or a black-body scenario, not both")
        if p["model"]:
            if len(p["model"]) < 2:
                raise click.UsageError("need at least two --model entries")
            tasks = []
            for name, mixed_path, synth_path in p["model"]:
                mixed = io.read_losses_csv(mixed_path, p["column"])
                synth = io.read_losses_csv(synth_path, p["column"])
                tasks.append((name, mixed, synth, p["c"], p["seed"], opts))
            if p["threads"] > 1:
                with ProcessPoolExecutor(max_workers=p["threads"]) as pool:
                    results = list(pool.map(_rdist_task, tasks))
            else:
                results = [_rdist_task(t) for t in tasks]
            rdists = {t[0]: rd for t, rd in zip(tasks, results)}
            risks = {t[0]: float(np.mean(t[1])) for t in tasks}
            matrix = comparison_matrix(rdists, risks)
        elif p["scenario"] or p["dataset"]:
            if p["dataset"]:
                train = io.read_dataset_csv(p["dataset"])
                test = io.read_dataset_csv(p["test_dataset"]) if p["test_dataset"] else train
                res = compare_blackbody(train, test, p["c"], p["seed"], rdist_options=opts)
            else:
                if p["scenario"] in DEMO_SCENARIOS:
                    process = DEMO_SCENARIOS[p["scenario"]].process
                elif p["scenario"] == "blackbody":
                    process = bb.TrueProcessParams(
                        s=p["s"], T=p["temperature"], B0=p["bias"], lambda_min=p["lambda_min"],
                        lambda_max=p["lambda_max"], L=p["n_points"])
                else:
                    raise click.UsageError(
                        f"unknown scenario {p['scenario']!r}; choose 'blackbody' or one of "
                        f"{sorted(DEMO_SCENARIOS)}")
                res = run_scenario(process, p["c"], p["seed"], rdist_options=opts)
                io.write_dataset_csv(out / "dataset_train.csv", res["train"])
                io.write_dataset_csv(out / "dataset_test.csv", res["test"])
                outputs += ["dataset_train.csv", "dataset_test.csv"]
                extra["process"] = res["process"]
            rdists, matrix = res["rdists"], res["matrix"]
            extra["fitted_models"] = {f: {"T": m.T, "sigma": m.sigma} for f, m in res["models"].items()}
            io.write_json(out / "criteria.json", res["criteria"])
            outputs.append("criteria.json")
        else:
            raise click.UsageError("no inputs: give --model entries, --scenario or --dataset")

        outcome = reject(matrix, p["epsilon"])
        io.write_matrix_csv(out / "comparison_matrix.csv", matrix)
        io.write_json(out / "rejection.json", outcome.to_dict(matrix.model_ids))
        outputs += ["comparison_matrix.csv", "rejection.json"]
        _write_rdists(out, rdists, outputs)
        extra["converged"] = {m: rd.converged for m, rd in rdists.items()}
        io.write_json(out / "manifest.json", _manifest("compare", p, outputs + ["manifest.json"], **extra))
        click.echo(f"rejected: {sorted(outcome.rejected) or 'none'}", err=True)

    _run(p["out"], "compare", body)


RECORD_HEADER = CalibrationRecord.FIELDS
CURVE_HEADER = ("mean_bemd", "mean_bconf", "count")


@main.command()
@_apply(common_options)
@_apply(rdist_options)
@click.option("--c", "c", type=click.FloatRange(0), multiple=True, default=DEFAULT_C_LIST,
              show_default=True, help="Sensitivity constant; repeat for several values.")
@click.option("--n-experiments", type=click.IntRange(min=1), default=512, show_default=True)
@click.option("--bins", type=click.IntRange(min=1), default=32, show_default=True)
@click.option("--tolerance", type=click.FloatRange(0), default=0.05, show_default=True,
              help="Slack of the overconfidence check.")
@click.option("--dataset-size", type=click.IntRange(min=3), default=4096, show_default=True)
@_apply(scenario_options)
@click.option("--bias-range", type=click.FloatRange(0), default=1e-4, show_default=True,
              help="Bias B0 is drawn uniformly from [-bias_range, bias_range].")
@click.pass_context
def calibrate(ctx, config, **_):
    """Calibration experiments on the built-in black-body epistemic distribution.

    Writes records.csv, curve_c<c>.csv and overconfidence_c<c>.json per value
    of c, and manifest.json (including failed experiments).
    """
    p = _resolve(ctx, config)

    def body(out):
        if p["n_experiments"] < p["bins"]:
            raise click.UsageError(
                f"insufficient experiments: --n-experiments ({p['n_experiments']}) "
                f"must be at least --bins ({p['bins']})")
        omega = BlackbodyOmega(s=p["s"], T=p["temperature"], bias_range=p["bias_range"],
                               lambda_min=p["lambda_min"], lambda_max=p["lambda_max"])
        cs = [float(c) for c in p["c"]]
        records = run_calibration(omega, cs, p["n_experiments"], p["dataset_size"], p["seed"],
                                  n_jobs=p["threads"], rdist_options=_rdist_options(p),
                                  progress=_progress)
        outputs = ["records.csv"]
        io.write_table_csv(out / "records.csv", RECORD_HEADER,
                           [[getattr(r, f) for f in RECORD_HEADER] for r in records])
        summary = {}
        for c in cs:
            rs = [r for r in records if r.c == c]
            label = _c_label(c)
            curve = bin_records(rs, p["bins"])
            io.write_table_csv(out / f"curve_{label}.csv", CURVE_HEADER,
                               [[b.mean_bemd, b.mean_bconf, b.count] for b in curve.bins])
            report = overconfidence_report(curve, p["tolerance"])
            report["c"] = c
            io.write_json(out / f"overconfidence_{label}.json", report)
            outputs += [f"curve_{label}.csv", f"overconfidence_{label}.json"]
            summary[label] = {"n_records": len(rs), "n_flagged": report["n_flagged"]}
        io.write_json(out / "manifest.json", _manifest(
            "calibrate", p, outputs + ["manifest.json"],
            omega={k: getattr(omega, k) for k in ("s", "T", "bias_range", "lambda_min",
                                                 "lambda_max", "oracle_size")},
            failures=records.failures, summary=summary))

    _run(p["out"], "calibrate", body)


@main.command()
@_apply(common_options)
@_apply(rdist_options)
@click.option("--c", "c", type=click.FloatRange(0), default=0.5, show_default=True)
@click.option("--mixed", type=click.Path(dir_okay=False), default=None,
              help="Losses of the model on the observed data.")
@click.option("--synth", type=click.Path(dir_okay=False), default=None,
              help="Losses of the model on data it generated itself.")
@click.option("--column", default=None, help="Column (0-based index or header name) of the loss CSVs.")
@click.option("--model-id", default="model", show_default=True)
@click.pass_context
def rdist(ctx, config, **_):
    """Sample one R-distribution; writes rdist.json, summary.json and manifest.json."""
    p = _resolve(ctx, config)

    def body(out):
        if not p["mixed"] or not p["synth"]:
            raise click.UsageError("--mixed and --synth are required (flag or config)")
        mixed = io.read_losses_csv(p["mixed"], p["column"])
        synth = io.read_losses_csv(p["synth"], p["column"])
        rd = r_distribution_from_losses(mixed, synth, p["c"], p["seed"], model_id=p["model_id"],
                                        **_rdist_options(p))
        spread = float(np.ptp(rd.risks))
        summary = {
            "model_id": p["model_id"],
            "mean": rd.mean,
            "standard_error": rd.standard_error,
            "M": rd.M,
            "rel_se_target": p["rel_se_target"],
            "converged": rd.converged,
            # residual spread from the variance floor scales with the loss span
            "degenerate": spread < 1e-6 * max(abs(rd.mean), float(np.ptp(mixed)), 1e-300),
        }
        io.write_json(out / "rdist.json", rd.to_dict())
        io.write_json(out / "summary.json", summary)
        io.write_json(out / "manifest.json", _manifest(
            "rdist", p, ["rdist.json", "summary.json", "manifest.json"]))

    _run(p["out"], "rdist", body)


DEMO_HEADER = ("scenario", "bemd_P_RJ", "log10_Bl", "delta_aic", "log10_BR_bar",
               "log10_Bemd_bar", "T_P", "sigma_P", "T_RJ", "sigma_RJ")


@main.command("demo-blackbody")
@_apply(common_options)
@_apply(rdist_options)
@click.option("--c", "c", type=click.FloatRange(0), default=0.5, show_default=True)
@click.option("--scenario", multiple=True, type=click.Choice(sorted(DEMO_SCENARIOS)),
              default=tuple(DEMO_SCENARIOS), show_default=True)
@click.pass_context
def demo_blackbody(ctx, config, **_):
    """Planck vs Rayleigh-Jeans in two contrasting regimes.

    Writes demo.csv (one row per scenario), per-scenario R-distribution JSONs
    and manifest.json.
    """
    p = _resolve(ctx, config)

    def body(out):
        rows, outputs = [], ["demo.csv"]
        for name in p["scenario"]:
            res = run_scenario(DEMO_SCENARIOS[name].process, p["c"], p["seed"],
                               rdist_options=_rdist_options(p))
            cr = res["criteria"]
            mp, mr = res["models"][bb.PLANCK], res["models"][bb.RAYLEIGH_JEANS]
            rows.append([name, res["bemd_P_RJ"], cr["log10_Bl"], cr["delta_aic"],
                         cr["log10_BR_bar"], cr["log10_Bemd_bar"], mp.T, mp.sigma, mr.T, mr.sigma])
            for fam, rd in res["rdists"].items():
                fname = f"rdist_{_safe_name(name)}_{fam}.json"
                io.write_json(out / fname, rd.to_dict())
                outputs.append(fname)
            click.echo(f"{name}: bemd(P, RJ) = {res['bemd_P_RJ']:.4f}", err=True)
        io.write_table_csv(out / "demo.csv", DEMO_HEADER, rows)
        io.write_json(out / "manifest.json", _manifest(
            "demo-blackbody", p, outputs + ["manifest.json"],
            scenarios={n: DEMO_SCENARIOS[n].process.__dict__ for n in p["scenario"]}))

    _run(p["out"], "demo-blackbody", body)


if __name__ == "__main__":
    sys.exit(main())
