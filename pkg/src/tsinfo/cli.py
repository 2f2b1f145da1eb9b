"""Command-line front end.

Reads a comma-delimited table (one column per process), runs the requested
measures in single, pairwise or seed mode and writes long-format results::

    tsinfo --input data.csv --mode seed --seed-column X --measures te,gc \\
        --estimator gaussian --output results.csv

Per-pair failures become rows carrying ``error=<code>`` in ``params``; the
sweep carries on. A ``<output>.meta.json`` sidecar records the configuration
and a per-measure min/max summary.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field

from . import __version__
from .core import Dataset, TimeSeries, standardize
from .errors import DuplicateHeader, InfoError, InvalidRequest, ParseError, RaggedRows
from .estimators import DEFAULT_KERNEL_WIDTH, DEFAULT_KNN, DEFAULT_NOISE_AMPLITUDE, EstimatorKind
from .measures import MEASURES, MeasureRequest, compute, resolve_measure

COLUMNS = ("source", "target", "measure", "estimator", "value_nats", "n_eff", "params")
MODES = ("single", "pairwise", "seed")

EXIT_OK, EXIT_CONFIG, EXIT_NOTHING = 0, 1, 2


def load_csv(path) -> Dataset:
    """Parse a header-plus-numeric-rows CSV into a :class:`Dataset`.

    Rows are numbered from 1 with the header as row 1. Blank lines and lines
    starting with ``#`` are skipped.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [(i, row) for i, row in enumerate(csv.reader(fh), start=1)]
    lines = [(i, r) for i, r in lines if r and not r[0].lstrip().startswith("#")
             and any(cell.strip() for cell in r)]
    if not lines:
        raise ParseError(f"{path}: empty file", row=1)
    _, header = lines[0]
    header = [h.strip() for h in header]
    seen = set()
    for h in header:
        if not h:
            raise ParseError(f"{path}: empty column name in header", row=lines[0][0])
        if h in seen:
            raise DuplicateHeader(f"{path}: duplicate column name {h!r}")
        seen.add(h)
    data = [[] for _ in header]
    for lineno, row in lines[1:]:
        if len(row) != len(header):
            raise RaggedRows(f"{path}: row {lineno} has {len(row)} fields, header has {len(header)}")
        for j, cell in enumerate(row):
            text = cell.strip()
            try:
                if "_" in text:
                    raise ValueError(text)
                value = float(text)
            except ValueError:
                raise ParseError(f"{path}: row {lineno} column {header[j]}: not a number: {cell!r}",
                                 row=lineno, column=header[j]) from None
            if not math.isfinite(value):
                raise ParseError(f"{path}: row {lineno} column {header[j]}: non-finite value {cell!r}",
                                 row=lineno, column=header[j])
            data[j].append(value)
    if len(lines) - 1 < 2:
        raise ParseError(f"{path}: need at least 2 data rows, got {len(lines) - 1}")
    return Dataset(tuple(TimeSeries(v, h) for v, h in zip(data, header)))


@dataclass
class RunConfig:
    input: str
    measures: list
    mode: str = "single"
    estimator: str | None = None
    k: int = 1
    l: int = 1
    tau: int = 1
    K: int = 5
    knn: int = DEFAULT_KNN
    kernel_width: float = DEFAULT_KERNEL_WIDTH
    di_mode: str = "exact"
    seed_column: str | None = None
    source: str | None = None
    target: str | None = None
    noise_seed: int = 0
    standardize: bool = True
    output: str = "-"
    format: str = "csv"
    measure_ids: list = field(init=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidRequest(f"mode must be one of {MODES}")
        if self.mode == "seed" and not self.seed_column:
            raise InvalidRequest("seed mode needs --seed-column")
        if self.format not in ("csv", "json"):
            raise InvalidRequest("format must be csv or json")
        if not self.measures:
            raise InvalidRequest("no measures requested")
        self.measure_ids = list(dict.fromkeys(resolve_measure(m) for m in self.measures))
        self.di_mode = self.di_mode.replace("-", "_")

    def estimator_kind(self):
        if self.estimator is None:
            return None
        return EstimatorKind(self.estimator, kernel_width=self.kernel_width, k_nn=self.knn)


def _jobs(config: RunConfig, names):
    """(source, target, measure) triples; source is None for single-process measures."""
    jobs = []
    for mid in config.measure_ids:
        info = MEASURES[mid]
        if config.mode == "single":
            source = config.source or names[0]
            target = config.target or (names[1] if len(names) > 1 else names[0])
            for n in (source, target):
                if n not in names:
                    raise InvalidRequest(f"unknown column {n!r}")
            jobs.append((source if info.pairwise else None, target, mid))
            continue
        if not info.pairwise:
            jobs.extend((None, n, mid) for n in names)
        elif config.mode == "seed":
            seed = config.seed_column
            for n in names:
                if n == seed:
                    continue
                if info.directed:
                    jobs.append((seed, n, mid))
                else:
                    jobs.append((min(seed, n), max(seed, n), mid))
        else:
            for i, a in enumerate(names):
                for j, b in enumerate(names):
                    if i == j:
                        continue
                    if info.directed:
                        jobs.append((a, b, mid))
                    elif i < j:
                        jobs.append((min(a, b), max(a, b), mid))
    return sorted(set(jobs), key=lambda j: (j[0] or "", j[1], j[2]))


def _params_text(params: dict) -> str:
    return ";".join(f"{k}={v}" for k, v in params.items())


def run(config: RunConfig, dataset: Dataset | None = None):
    """Evaluate every job; returns ``(rows, summary, metadata)``."""
    if dataset is None:
        dataset = load_csv(config.input)
    names = dataset.names
    if config.mode == "seed" and config.seed_column not in names:
        raise InvalidRequest(f"seed column {config.seed_column!r} not in {names}")

    column_error = {}
    if config.standardize:
        cols = []
        for c in dataset.columns:
            try:
                cols.append(standardize(c))
            except InfoError as exc:
                column_error[c.name] = exc
                cols.append(c)
        dataset = Dataset(tuple(cols))

    est = config.estimator_kind()
    rows = []
    for source, target, mid in _jobs(config, names):
        req = MeasureRequest(mid, target=target, source=source, estimator=est,
                             k=config.k, l=config.l, tau_source=config.tau,
                             tau_target=config.tau, K=config.K, di_mode=config.di_mode)
        params = req.params()
        if req.resolved_estimator.uses_neighbors:
            params["noise_seed"] = config.noise_seed
        params["standardized"] = int(config.standardize)
        row = {"source": source or "", "target": target, "measure": mid,
               "estimator": req.resolved_estimator.tag, "value_nats": None, "n_eff": None,
               "params": params, "error": None, "message": None}
        bad = [column_error[n] for n in (source, target) if n in column_error]
        try:
            if bad:
                raise bad[0]
            result = compute(dataset, req, noise_seed=config.noise_seed)
            row["value_nats"] = float(result.value)
            row["n_eff"] = result.n_eff
        except InfoError as exc:
            row["error"] = exc.code
            row["message"] = str(exc)
        rows.append(row)

    summary = {}
    for mid in config.measure_ids:
        ok = [r for r in rows if r["measure"] == mid and r["error"] is None]
        if not ok:
            continue
        lo = min(ok, key=lambda r: r["value_nats"])
        hi = max(ok, key=lambda r: r["value_nats"])
        summary[mid] = {
            "min": {"source": lo["source"], "target": lo["target"], "value_nats": lo["value_nats"]},
            "max": {"source": hi["source"], "target": hi["target"], "value_nats": hi["value_nats"]},
        }

    cfg = asdict(config)
    cfg.pop("measure_ids")
    metadata = {
        "tool": "tsinfo",
        "version": __version__,
        "config": cfg,
        "measures": config.measure_ids,
        "defaults": {"k": 1, "l": 1, "tau": 1, "K": 5, "knn": DEFAULT_KNN,
                     "kernel_width": DEFAULT_KERNEL_WIDTH, "di_mode": "exact",
                     "estimator": {m: MEASURES[m].default_estimator for m in MEASURES}},
        "noise": {"seed": config.noise_seed, "relative_amplitude": DEFAULT_NOISE_AMPLITUDE,
                  "generator": "numpy PCG64, per-column SeedSequence(seed, crc32(sorted column))"},
        "standardized_per_column": config.standardize,
        "units": "nats",
        "T": dataset.T,
        "columns": names,
    }
    return rows, summary, metadata


def _format_value(v):
    return "" if v is None else repr(float(v))


def render_csv(rows, metadata) -> str:
    buf = io.StringIO()
    buf.write(f"# tsinfo {metadata['version']} mode={metadata['config']['mode']} "
              f"noise_seed={metadata['noise']['seed']} "
              f"standardized={int(metadata['standardized_per_column'])}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in rows:
        params = dict(r["params"])
        if r["error"]:
            params["error"] = r["error"]
        writer.writerow([r["source"], r["target"], r["measure"], r["estimator"],
                         _format_value(r["value_nats"]),
                         "" if r["n_eff"] is None else r["n_eff"], _params_text(params)])
    return buf.getvalue()


def render_json(rows, summary, metadata) -> str:
    out_rows = []
    for r in rows:
        item = {c: r[c] for c in COLUMNS}
        item["params"] = _params_text(r["params"])
        if r["error"]:
            item["error"] = r["error"]
            item["message"] = r["message"]
        out_rows.append(item)
    doc = {"metadata": metadata, "rows": out_rows, "summary": summary}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="tsinfo", description="Information-theoretic time-series measures (nats).")
    p.add_argument("--input", required=True, help="CSV with a header row, one column per process")
    p.add_argument("--output", default="-", help="output file (default: stdout)")
    p.add_argument("--mode", choices=MODES, default="single")
    p.add_argument("--seed-column", help="fixed source column for seed mode")
    p.add_argument("--source", help="source column in single mode (default: first column)")
    p.add_argument("--target", help="target column in single mode (default: second column)")
    p.add_argument("--measures", required=True,
                   help="comma list of measure ids or aliases, e.g. transfer_entropy,gc")
    p.add_argument("--estimator", choices=("gaussian", "kernel", "kozachenko", "ksg"),
                   help="default: kozachenko for entropy-based measures, ksg for MI-based")
    p.add_argument("--k", type=int, default=1, help="target memory length")
    p.add_argument("--l", type=int, default=1, help="source memory length")
    p.add_argument("--tau", type=int, default=1, help="embedding lag for source and target")
    p.add_argument("--K", type=int, default=5, help="directed-information window")
    p.add_argument("--knn", type=int, default=DEFAULT_KNN)
    p.add_argument("--kernel-width", type=float, default=DEFAULT_KERNEL_WIDTH)
    p.add_argument("--di-mode", choices=("exact", "pooled-approx"), default="exact")
    p.add_argument("--noise-seed", type=int, default=0)
    p.add_argument("--no-standardize", action="store_true",
                   help="skip per-column standardization before estimation")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig(
            input=args.input, measures=[m for m in args.measures.split(",") if m.strip()],
            mode=args.mode, estimator=args.estimator, k=args.k, l=args.l, tau=args.tau,
            K=args.K, knn=args.knn, kernel_width=args.kernel_width, di_mode=args.di_mode,
            seed_column=args.seed_column, source=args.source, target=args.target,
            noise_seed=args.noise_seed, standardize=not args.no_standardize,
            output=args.output, format=args.format,
        )
        # surface bad parameters as config errors instead of per-row errors
        config.estimator_kind()
        for mid in config.measure_ids:
            MeasureRequest(mid, target="_", source=None if not MEASURES[mid].pairwise else "_",
                           k=config.k, l=config.l, tau_source=config.tau,
                           tau_target=config.tau, K=config.K, di_mode=config.di_mode)
        rows, summary, metadata = run(config)
    except OSError as exc:
        print(f"tsinfo: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfoError as exc:
        print(f"tsinfo: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if config.format == "csv":
        text = render_csv(rows, metadata)
    else:
        text = render_json(rows, summary, metadata)
    try:
        if config.output == "-":
            sys.stdout.write(text)
        else:
            with open(config.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            sidecar = dict(metadata, summary=summary,
                           errors=[{k: r[k] for k in ("source", "target", "measure", "error", "message")}
                                   for r in rows if r["error"]])
            with open(config.output + ".meta.json", "w", encoding="utf-8") as fh:
                json.dump(sidecar, fh, indent=2, sort_keys=True)
                fh.write("\n")
    except OSError as exc:
        print(f"tsinfo: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    for r in rows:
        if r["error"]:
            print(f"tsinfo: {r['measure']} {r['source'] or '-'} -> {r['target']}: "
                  f"{r['error']}: {r['message']}", file=sys.stderr)
    if not any(r["error"] is None for r in rows):
        return EXIT_NOTHING
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
