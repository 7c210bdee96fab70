"""Command-line experiment runner.

Usage::

    plscast run CONFIG [--output-dir DIR] [--seed N] [--threads N]
    plscast synth SCENARIO [--output PATH] [--seed N]
    plscast validate CONFIG

Every flag can also be given through an environment variable named
``PLSCAST_<FLAG>`` (``PLSCAST_OUTPUT_DIR``, ``PLSCAST_SEED``,
``PLSCAST_THREADS``, ``PLSCAST_OUTPUT``); a flag wins over the variable,
which wins over the config file.

Exit status: 0 success, 2 configuration error, 3 data error, 4 numerical
failure, 5 I/O failure.

Config files are INI files. A run config looks like::

    [data]
    path = levels.csv            ; or: scenario = scenario.ini
    response = gdp

    [transforms]                 ; name = kind [offset] [diff]
    gdp = log100 diff
    esi = level_offset 100
    unemployment = percent diff

    [hampel]
    enabled = true
    window = 19
    n_mad = 2.5

    [cv]
    k = 36
    window = rolling             ; or expanding
    split = 2020Q1               ; optional two-window reporting

    [model.ridge]
    kind = ridge                 ; ols, ridge, lasso, enet, pls, ar
    rule = cv_min                ; cv_min, cv_1se, aic (or give lambda = ...)

    [ensemble.median]
    members = ridge, lasso, pls1

    [output]
    dir = out

``alpha`` follows the convention alpha = 1 ridge, alpha = 0 LASSO, which
is the REVERSE of glmnet/scikit-learn. Relative paths resolve against the
config file's directory.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import math
import os
import shutil
import sys
import tempfile
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import synthgen
from .errors import ConfigError, DataError, GapError, NumericalError, ParseError, PlscastError
from .evalharness import CvReport, ModelSpec, make_fold_plan, run_cv, with_ensemble
from .periods import format_quarter, parse_quarter
from .preprocess import HampelConfig, LevelTable, SeriesFrame, TransformSpec, build_frame

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4, 5
ENV_PREFIX = "PLSCAST_"


def example_config_path() -> Path:
    """The bundled synthetic example run config."""
    return Path(__file__).parent / "data" / "example.ini"


def fmt(x: float) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return format(float(x), ".17g")


# --------------------------------------------------------------------------
# CSV ingestion


def ingest_csv(path) -> LevelTable:
    """Read a ``period,<series>...`` CSV of quarterly levels.

    Empty cells are missing values. Periods must be consecutive quarters.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as err:
        raise DataError(f"{path}: not valid UTF-8") from err
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "period":
        raise ParseError(f"{path}: first column must be 'period'", row=1, column=header[0] if header else None)
    names = header[1:]
    if len(set(names)) != len(names) or any(not n for n in names):
        raise ParseError(f"{path}: duplicate or empty column names", row=1)

    periods: list[str] = []
    values = [[] for _ in names]
    previous = None
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"{path}: expected {len(header)} cells, got {len(row)}", row=lineno)
        try:
            ordinal = parse_quarter(row[0])
        except ParseError as err:
            raise ParseError(f"{path}: malformed period {row[0]!r}", row=lineno, column="period") from err
        if previous is not None and ordinal != previous + 1:
            if ordinal <= previous:
                raise ParseError(f"{path}: periods must increase", row=lineno, column="period")
            missing = format_quarter(previous + 1)
            raise GapError(f"{path}: quarter {missing} is missing before row {lineno}", period=missing)
        previous = ordinal
        periods.append(format_quarter(ordinal))
        for j, cell in enumerate(row[1:]):
            cell = cell.strip()
            if not cell:
                values[j].append(math.nan)
                continue
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"{path}: non-numeric cell {cell!r}", row=lineno, column=names[j]) from None
            if not math.isfinite(v):
                raise ParseError(f"{path}: non-finite cell {cell!r}", row=lineno, column=names[j])
            values[j].append(v)
    return LevelTable(periods=periods, columns={n: np.array(v, dtype=float) for n, v in zip(names, values)})


def write_table_csv(path, periods, columns: dict[str, np.ndarray]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["period", *columns])
        for i, p in enumerate(periods):
            w.writerow([p, *(fmt(c[i]) if not math.isnan(c[i]) else "" for c in columns.values())])


def write_frame_csv(path, frame: SeriesFrame) -> None:
    cols = {frame.response: frame.y, **{n: frame.X[:, i] for i, n in enumerate(frame.predictors)}}
    write_table_csv(path, frame.periods, cols)


# --------------------------------------------------------------------------
# Configuration


@dataclass
class RunConfig:
    response: str
    transforms: dict[str, TransformSpec]
    k: int
    models: list[ModelSpec]
    dataset: Path | None = None
    scenario: synthgen.ScenarioSpec | None = None
    hampel: HampelConfig | None = field(default_factory=HampelConfig)
    expanding: bool = False
    ensembles: dict[str, list[str]] = field(default_factory=dict)
    split: str | None = None
    output_dir: Path = Path("out")

    def digest(self) -> str:
        """SHA-256 of everything that affects results (not paths or threads)."""
        payload = {
            "response": self.response,
            "transforms": {n: asdict(t) for n, t in self.transforms.items()},
            "k": self.k,
            "models": [asdict(m) for m in self.models],
            "dataset": None if self.dataset is None else hashlib.sha256(self.dataset.read_bytes()).hexdigest(),
            "scenario": None if self.scenario is None else asdict(self.scenario),
            "hampel": None if self.hampel is None else asdict(self.hampel),
            "expanding": self.expanding,
            "ensembles": self.ensembles,
            "split": self.split,
        }
        blob = json.dumps(payload, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()


def _read_ini(path) -> configparser.ConfigParser:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(path.read_text(encoding="utf-8"), source=str(path))
    except configparser.Error as err:
        raise ConfigError(f"{path}: {err}") from err
    return cp


def _get(section, key, conv, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"[{section.name}] missing required key {key!r}")
        return default
    raw = section[key].strip()
    try:
        if conv is bool:
            return section.getboolean(key)
        return conv(raw)
    except ValueError as err:
        raise ConfigError(f"[{section.name}] {key} = {raw!r}: {err}") from err


def parse_transform(text: str) -> TransformSpec:
    tokens = text.split()
    if not tokens:
        raise ConfigError("empty transform")
    kind, rest = tokens[0], tokens[1:]
    difference = False
    offset = 0.0
    for tok in rest:
        if tok in ("diff", "difference"):
            difference = True
        else:
            try:
                offset = float(tok)
            except ValueError:
                raise ConfigError(f"transform {text!r}: unexpected token {tok!r}") from None
    if kind == "level_offset" and not any(t not in ("diff", "difference") for t in rest):
        raise ConfigError(f"transform {text!r}: level_offset needs an offset")
    return TransformSpec(kind=kind, offset=offset, difference=difference)


def _parse_scenario_section(sec, seed_override=None) -> synthgen.ScenarioSpec:
    seed = seed_override if seed_override is not None else _get(sec, "seed", int, 0)
    if _get(sec, "preset", str) == "regime_shift":
        base = synthgen.regime_shift_scenario(seed)
    else:
        base = synthgen.ScenarioSpec(seed=seed)
    kw = {}
    for key, conv in [
        ("n", int), ("q", int), ("noise_sd", float), ("idiosyncratic_sd", float), ("factor_ar", float),
        ("break_at", int), ("break_kind", str), ("shock_size", float), ("shock_length", int), ("start", str),
    ]:
        val = _get(sec, key, conv)
        if val is not None:
            kw[key] = val
    loadings = _get(sec, "loadings", str)
    if loadings is not None:
        vals = [float(v) for v in loadings.replace(",", " ").split()]
        q = kw.get("q", base.q)
        kw["factor_loadings"] = tuple(vals * q) if len(vals) == 1 else tuple(vals)
    elif "q" in kw and base.factor_loadings is not None and len(base.factor_loadings) != kw["q"]:
        kw["factor_loadings"] = None
    return replace(base, **kw)


def load_scenario(path, seed=None) -> synthgen.ScenarioSpec:
    cp = _read_ini(path)
    if "scenario" not in cp:
        raise ConfigError(f"{path}: missing [scenario] section")
    return _parse_scenario_section(cp["scenario"], seed)


def _parse_model(name: str, sec) -> ModelSpec:
    kind = _get(sec, "kind", str, required=True)
    kw = dict(name=name, kind=kind)
    for key, conv in [
        ("alpha", float), ("lambda", float), ("rule", str), ("inner_folds", int), ("grid_count", int),
        ("grid_ratio", float), ("metric", str), ("retune", str), ("d", int),
    ]:
        val = _get(sec, key, conv)
        if val is not None:
            kw["lam" if key == "lambda" else key] = val
    return ModelSpec(**kw)


def load_config(path, *, output_dir=None, seed=None) -> RunConfig:
    path = Path(path)
    base = path.parent
    cp = _read_ini(path)
    for s in ("data", "transforms", "cv"):
        if s not in cp:
            raise ConfigError(f"{path}: missing [{s}] section")
    data = cp["data"]
    response = _get(data, "response", str, required=True)
    dataset = _get(data, "path", str)
    scen = _get(data, "scenario", str)
    if (dataset is None) == (scen is None):
        raise ConfigError("[data] needs exactly one of 'path' or 'scenario'")
    scenario = load_scenario(base / scen, seed) if scen is not None else None

    transforms = {name: parse_transform(val) for name, val in cp["transforms"].items()}
    if response not in transforms:
        raise ConfigError(f"response {response!r} missing from [transforms]")

    hampel = HampelConfig()
    if "hampel" in cp:
        h = cp["hampel"]
        if not _get(h, "enabled", bool, True):
            hampel = None
        else:
            hampel = HampelConfig(window=_get(h, "window", int, 19), n_mad=_get(h, "n_mad", float, 2.5))

    cv = cp["cv"]
    k = _get(cv, "k", int, required=True)
    window = _get(cv, "window", str, "rolling")
    if window not in ("rolling", "expanding"):
        raise ConfigError("[cv] window must be 'rolling' or 'expanding'")
    split = _get(cv, "split", str)
    if split is not None:
        try:
            split = format_quarter(parse_quarter(split))
        except ParseError as err:
            raise ConfigError(f"[cv] split: {err}") from None

    models = [_parse_model(s.split(".", 1)[1], cp[s]) for s in cp.sections() if s.startswith("model.")]
    if not models:
        raise ConfigError("no [model.<name>] sections")
    ensembles = {}
    for s in cp.sections():
        if s.startswith("ensemble."):
            members = [m.strip() for m in _get(cp[s], "members", str, required=True).split(",") if m.strip()]
            ensembles[s.split(".", 1)[1]] = members
    if not any(s.startswith("ensemble.") for s in cp.sections()):
        ensembles = _default_ensemble(models)
    names = {m.name for m in models}
    for ens, members in ensembles.items():
        if ens in names:
            raise ConfigError(f"ensemble {ens!r} clashes with a model name")
        bad = [m for m in members if m not in names]
        if bad:
            raise ConfigError(f"ensemble {ens!r}: unknown member(s) {', '.join(bad)}")

    out = output_dir or os.environ.get(ENV_PREFIX + "OUTPUT_DIR")
    if out is None:
        out = base / (cp["output"].get("dir", "out") if "output" in cp else "out")
    return RunConfig(
        response=response,
        transforms=transforms,
        k=k,
        models=models,
        dataset=None if dataset is None else base / dataset,
        scenario=scenario,
        hampel=hampel,
        expanding=window == "expanding",
        ensembles=ensembles,
        split=split,
        output_dir=Path(out),
    )


def _default_ensemble(models: list[ModelSpec]) -> dict[str, list[str]]:
    """Median of one ridge, one LASSO and one PLS(1) model, when all exist."""
    pick = []
    for test in (
        lambda m: m.kind == "ridge",
        lambda m: m.kind == "lasso",
        lambda m: m.kind == "pls" and m.d == 1,
    ):
        found = [m.name for m in models if test(m)]
        if not found:
            return {}
        pick.append(found[0])
    return {"median": pick}


# --------------------------------------------------------------------------
# Pipeline


def load_frame(config: RunConfig) -> SeriesFrame:
    if config.scenario is not None:
        table = synthgen.level_table(config.scenario)
    else:
        if not config.dataset.is_file():
            raise DataError(f"dataset not found: {config.dataset}")
        table = ingest_csv(config.dataset)
    return build_frame(table, config.transforms, config.response, config.hampel)


def run_pipeline(config: RunConfig, threads: int = 1, write: bool = True) -> tuple[CvReport, SeriesFrame]:
    """Ingest, transform, cross-validate and (optionally) write the reports."""
    frame = load_frame(config)
    plan = make_fold_plan(frame.n, config.k, expanding=config.expanding)
    report = run_cv(frame, config.models, plan, threads=threads)
    for name, members in config.ensembles.items():
        report = with_ensemble(report, members, name)
    report.metadata["config_digest"] = config.digest()
    report.metadata["outliers"] = frame.outliers
    if write:
        emit_report(report, config.output_dir, split=config.split)
    return report, frame


def _metrics(report: CvReport) -> dict:
    out = {}
    for name, r in report.all_results().items():
        out[name] = {
            "mae": r.mae,
            "rmse": r.rmse,
            "failed_folds": {report.periods[j]: msg for j, msg in sorted(r.failures.items())},
        }
    return out


def _cumabs_table(path, report: CvReport):
    write_table_csv(path, report.periods, {n: r.cumabs for n, r in report.all_results().items()})


def emit_report(report: CvReport, directory, split: str | None = None) -> list[Path]:
    """Write report.json, errors_by_fold.csv and cumabs.csv into ``directory``.

    With ``split``, two more cumulative tables restart at the marker:
    ``cumabs_before_<split>.csv`` and ``cumabs_from_<split>.csv``. Files
    are staged in a temporary directory and moved in only once all of them
    were written.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=".plscast-", dir=directory))
    try:
        doc = {
            "config_digest": report.metadata.get("config_digest"),
            "folds": {k: v for k, v in report.metadata.items() if k not in ("config_digest", "outliers")},
            "models": _metrics(report),
            "outliers": report.metadata.get("outliers", {}),
            "test_periods": report.periods,
        }
        names = ["report.json", "errors_by_fold.csv", "cumabs.csv"]
        if split is not None:
            before, after = report.split(split)
            doc["split"] = {"marker": split, "before": _metrics(before), "from": _metrics(after)}
            _cumabs_table(stage / f"cumabs_before_{split}.csv", before)
            _cumabs_table(stage / f"cumabs_from_{split}.csv", after)
            names += [f"cumabs_before_{split}.csv", f"cumabs_from_{split}.csv"]
        with open(stage / "report.json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True, allow_nan=False)
            fh.write("\n")
        preds = {"actual": report.actual, **{n: r.predictions for n, r in report.all_results().items()}}
        write_table_csv(stage / "errors_by_fold.csv", report.periods, preds)
        _cumabs_table(stage / "cumabs.csv", report)
        written = []
        for name in names:
            os.replace(stage / name, directory / name)
            written.append(directory / name)
        return written
    finally:
        shutil.rmtree(stage, ignore_errors=True)


# --------------------------------------------------------------------------
# Entry point


def _env(name, conv):
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None:
        return None
    try:
        return conv(raw)
    except ValueError:
        raise ConfigError(f"environment variable {ENV_PREFIX + name}={raw!r} is invalid") from None


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="plscast", description="Rolling-origin comparison of GDP nowcasting models.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the full pipeline")
    run.add_argument("config")
    run.add_argument("--output-dir")
    run.add_argument("--seed", type=int, help="seed for scenario-backed configs")
    run.add_argument("--threads", type=int)
    synth = sub.add_parser("synth", help="write a synthetic dataset as CSV")
    synth.add_argument("scenario")
    synth.add_argument("--output")
    synth.add_argument("--seed", type=int)
    val = sub.add_parser("validate", help="check a run config without fitting anything")
    val.add_argument("config")
    val.add_argument("--seed", type=int)
    return p


def _cmd_run(args) -> int:
    seed = args.seed if args.seed is not None else _env("SEED", int)
    threads = args.threads if args.threads is not None else (_env("THREADS", int) or 1)
    if threads < 1:
        raise ConfigError("--threads must be at least 1")
    config = load_config(args.config, output_dir=args.output_dir, seed=seed)
    report, _ = run_pipeline(config, threads=threads)
    for name, r in report.all_results().items():
        if r.mae is None:
            print(f"{name:>12}  failed on {len(r.failures)} fold(s)")
        else:
            print(f"{name:>12}  MAE {r.mae:.4f}  RMSE {r.rmse:.4f}")
    print(f"reports written to {config.output_dir}")
    return EXIT_OK


def _cmd_synth(args) -> int:
    seed = args.seed if args.seed is not None else _env("SEED", int)
    path = Path(args.scenario)
    cp = _read_ini(path)
    if "scenario" not in cp:
        raise ConfigError(f"{path}: missing [scenario] section")
    spec = _parse_scenario_section(cp["scenario"], seed)
    out_sec = cp["output"] if "output" in cp else {}
    output = args.output or os.environ.get(ENV_PREFIX + "OUTPUT")
    output = Path(output) if output else path.parent / out_sec.get("path", "synthetic.csv")
    form = out_sec.get("form", "levels")
    if form == "levels":
        table = synthgen.level_table(spec)
        write_table_csv(output, table.periods, table.columns)
    elif form == "frame":
        write_frame_csv(output, synthgen.generate(spec))
    else:
        raise ConfigError("[output] form must be 'levels' or 'frame'")
    print(f"wrote {output}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    config = load_config(args.config, seed=args.seed)
    frame = load_frame(config)
    plan = make_fold_plan(frame.n, config.k, expanding=config.expanding)
    for m in config.models:
        if m.kind != "ar" and frame.q == 0:
            raise ConfigError(f"model {m.name!r} needs predictors")
        if m.kind == "pls" and m.d > frame.q:
            raise ConfigError(f"model {m.name!r}: d={m.d} exceeds the {frame.q} predictors")
    print(f"ok: n={frame.n} q={frame.q} k={plan.k} m={plan.m}, {len(config.models)} models")
    for name, periods in frame.outliers.items():
        if periods:
            print(f"  Hampel clamped {name}: {', '.join(periods)}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handler = {"run": _cmd_run, "synth": _cmd_synth, "validate": _cmd_validate}[args.command]
    try:
        return handler(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, PlscastError) as err:
        print(f"numerical error: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
