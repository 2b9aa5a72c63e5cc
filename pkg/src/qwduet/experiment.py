"""Parameter sweeps over (t, tau) and machine-readable export."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from . import __version__
from .classical import classical_initial_state, classical_joint_distribution, classical_step
from .correlations import (
    correlation_measures,
    joint_distribution,
    marginals,
    mutual_information,
    position_moments,
    reduce_to_walkers,
)
from .gates import _check_tau
from .lattice import trajectory
from .momentum import DEFAULT_CUTOFF, asymptotics, exact_first_moment, exact_second_moment, minimum_grid

OBSERVABLES = (
    "joint",
    "marginals",
    "moments",
    "mi",
    "qmi",
    "mid",
    "classical",
    "momentum-moments",
    "asymptotics",
)
DEFAULT_OBSERVABLES = ("moments", "mi", "qmi", "mid")
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    steps: int
    tau_grid: tuple[float, ...]
    observables: tuple[str, ...] = DEFAULT_OBSERVABLES
    out: str = "-"
    format: str = "csv"
    quadrature: int | None = None
    cutoff: float = DEFAULT_CUTOFF
    jobs: int = 1
    backend: str | None = None

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 1:
            raise ConfigError(f"steps must be a positive integer, got {self.steps!r}")
        if not self.tau_grid:
            raise ConfigError("tau grid must not be empty")
        try:
            object.__setattr__(self, "tau_grid", tuple(_check_tau(t) for t in self.tau_grid))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        unknown = sorted(set(self.observables) - set(OBSERVABLES))
        if unknown:
            raise ConfigError(f"unknown observable(s) {', '.join(unknown)}; choose from {', '.join(OBSERVABLES)}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if not 0.0 < self.cutoff < 1.0:
            raise ConfigError(f"cutoff must lie in (0, 1), got {self.cutoff!r}")
        if self.quadrature is not None and "momentum-moments" in self.observables:
            if self.quadrature < minimum_grid(self.steps):
                raise ConfigError(
                    f"quadrature {self.quadrature} too small for steps={self.steps}; "
                    f"need at least {minimum_grid(self.steps)}"
                )
        if self.jobs < 1:
            raise ConfigError(f"jobs must be at least 1, got {self.jobs}")

    def echo(self) -> dict:
        return {
            "steps": self.steps,
            "tau_grid": list(self.tau_grid),
            "observables": list(self.observables),
            "format": self.format,
            "quadrature": self.quadrature,
            "cutoff": self.cutoff,
        }


@dataclass(frozen=True)
class CorrelationRecord:
    t: int
    tau: float
    mi_bits: float | None = None
    qmi_bits: float | None = None
    mid_bits: float | None = None
    classical_mi_of_dephased_bits: float | None = None
    mean1: float | None = None
    mean2: float | None = None
    var1: float | None = None
    var2: float | None = None


RECORD_COLUMNS = tuple(f.name for f in fields(CorrelationRecord))


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list[CorrelationRecord] = field(default_factory=list)
    joint: list[dict] = field(default_factory=list)
    marginals: list[dict] = field(default_factory=list)
    classical: list[dict] = field(default_factory=list)
    momentum_moments: list[dict] = field(default_factory=list)
    asymptotics: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def _sweep_tau(cfg: ExperimentConfig, tau: float) -> dict:
    obs = set(cfg.observables)
    want_corr = bool(obs & {"qmi", "mid"})
    records, joint, margs, notes = [], [], [], []
    for state in trajectory(tau, cfg.steps, backend=cfg.backend):
        if state.t == 0:
            continue
        rw = reduce_to_walkers(state, tau)
        jd = joint_distribution(rw)
        row = {"t": state.t, "tau": tau}
        if "moments" in obs:
            m1, m2 = (position_moments(m) for m in marginals(jd))
            row.update(mean1=m1.mean, mean2=m2.mean, var1=m1.variance, var2=m2.variance)
        if want_corr:
            cm = correlation_measures(rw)
            if "qmi" in obs or "mid" in obs:
                row["qmi_bits"] = cm.qmi_bits
            if "mid" in obs:
                row.update(mid_bits=cm.mid_bits, classical_mi_of_dephased_bits=cm.classical_mi_of_dephased_bits)
                notes.extend(cm.warnings)
            if "mi" in obs:
                row["mi_bits"] = cm.mi_bits
        elif "mi" in obs:
            row["mi_bits"] = mutual_information(jd)
        records.append(CorrelationRecord(**row))
        if state.t == cfg.steps:
            if "joint" in obs:
                joint.append({"t": state.t, "tau": tau, "entries": jd.sparse_entries()})
            if "marginals" in obs:
                for m in marginals(jd):
                    margs.append(
                        {
                            "t": state.t,
                            "tau": tau,
                            "walker": m.walker,
                            "entries": [(int(x), float(p)) for x, p in zip(m.positions, m.probabilities)],
                        }
                    )
    out = {"records": records, "joint": joint, "marginals": margs, "warnings": notes}
    if "momentum-moments" in obs:
        out["momentum_moments"] = momentum_rows(tau, cfg.steps, cfg.quadrature)
    if "asymptotics" in obs:
        out["asymptotics"] = [asymptotics_row(tau, cfg.quadrature, cfg.cutoff)]
    return out


def momentum_rows(tau: float, steps: int, quadrature: int | None) -> list[dict]:
    rows = []
    for t in range(1, steps + 1):
        n = quadrature if quadrature is not None else minimum_grid(t)
        rows.append(
            {
                "t": t,
                "tau": tau,
                "grid": n,
                "mean1": exact_first_moment(tau, t, n),
                "second_moment1": exact_second_moment(tau, t, n),
            }
        )
    return rows


def asymptotics_row(tau: float, grid: int | None, cutoff: float) -> dict:
    rec = asymptotics(tau, grid, cutoff)
    return {"tau": tau, "slope": rec.slope, "C2": rec.C2, "cutoff": rec.eigenfilter_cutoff, "grid": rec.grid}


def classical_rows(steps: int, swap_probs) -> list[dict]:
    rows = []
    for p in swap_probs:
        s = classical_initial_state(steps, p)
        for _ in range(steps):
            s = classical_step(s)
            jd = classical_joint_distribution(s)
            m1, m2 = (position_moments(m) for m in marginals(jd))
            rows.append(
                {
                    "t": s.t,
                    "swap_prob": p,
                    "mean1": m1.mean,
                    "mean2": m2.mean,
                    "var1": m1.variance,
                    "var2": m2.variance,
                    "mi_bits": mutual_information(jd),
                }
            )
    rows.sort(key=lambda r: (r["t"], r["swap_prob"]))
    return rows


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run every (t <= steps, tau in grid) cell; output order is t-major, tau-minor."""
    if cfg.jobs > 1 and len(cfg.tau_grid) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            parts = list(pool.map(_sweep_tau, [cfg] * len(cfg.tau_grid), cfg.tau_grid))
    else:
        parts = [_sweep_tau(cfg, tau) for tau in cfg.tau_grid]

    res = ExperimentResult(cfg)
    order = {tau: i for i, tau in enumerate(cfg.tau_grid)}
    for part in parts:
        res.records.extend(part["records"])
        res.joint.extend(part["joint"])
        res.marginals.extend(part["marginals"])
        res.momentum_moments.extend(part.get("momentum_moments", []))
        res.asymptotics.extend(part.get("asymptotics", []))
        res.warnings.extend(part["warnings"])
    res.records.sort(key=lambda r: (r.t, order[r.tau]))
    res.joint.sort(key=lambda d: (d["t"], order[d["tau"]]))
    res.marginals.sort(key=lambda d: (d["t"], order[d["tau"]], d["walker"]))
    res.momentum_moments.sort(key=lambda d: (d["t"], order[d["tau"]]))
    if "classical" in cfg.observables:
        res.classical = classical_rows(cfg.steps, cfg.tau_grid)
    return res


# -- serialisation ------------------------------------------------------------


def format_real(x) -> str:
    """17 significant digits: enough for an exact float64 round trip."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if not math.isfinite(x):
        return ""
    return format(x, ".17g")


def _json_value(obj, indent: int, level: int) -> str:
    if obj is None or (isinstance(obj, float) and not math.isfinite(obj)):
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format(obj, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{json.dumps(str(k))}: {_json_value(v, indent, level + 1)}" for k, v in obj.items()]
        return "{" + pad + ("," + pad).join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_json_value(v, indent, level + 1) for v in obj) + "]"
        items = [_json_value(v, indent, level + 1) for v in obj]
        return "[" + pad + ("," + pad).join(items) + end + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return _json_value(obj.item(), indent, level)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps_json(obj, indent: int = 2) -> str:
    return _json_value(obj, indent, 0) + "\n"


def _csv_text(columns, rows, comments=()) -> str:
    buf = io.StringIO()
    for note in comments:
        buf.write(f"# {note}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_real(row.get(c)) for c in columns])
    return buf.getvalue()


def _write_text(path: str | Path, text: str):
    if str(path) == "-":
        sys.stdout.write(text)
        return
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _side_path(path: str, suffix: str) -> Path:
    if path == "-":
        raise ConfigError(f"CSV output of {suffix} tables needs --out to name a file")
    p = Path(path)
    return p.with_name(f"{p.stem}.{suffix}{p.suffix or '.csv'}")


def export_records(records, fmt: str, path, meta: dict | None = None, warnings=()):
    """Write correlation records as CSV or JSON (``meta`` + ``records``)."""
    rows = [asdict(r) if isinstance(r, CorrelationRecord) else dict(r) for r in records]
    if fmt == "csv":
        text = _csv_text(RECORD_COLUMNS, rows, warnings)
    elif fmt == "json":
        meta = dict(meta or {})
        meta.setdefault("artifact", "qwduet")
        meta.setdefault("version", __version__)
        meta["warnings"] = list(warnings)
        text = dumps_json({"meta": meta, "records": [{c: r.get(c) for c in RECORD_COLUMNS} for r in rows]})
    else:
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    _write_text(path, text)


def load_records_json(path) -> list[CorrelationRecord]:
    doc = json.loads(Path(path).read_text())
    return [CorrelationRecord(**r) for r in doc["records"]]


def _flatten_entries(dumps, keys, entry_names):
    rows = []
    for d in dumps:
        for entry in d["entries"]:
            row = {k: d[k] for k in keys}
            row.update(zip(entry_names, entry))
            rows.append(row)
    return rows


def write_result(res: ExperimentResult):
    cfg = res.config
    meta = {"artifact": "qwduet", "version": __version__, "command": "simulate", "config": cfg.echo()}
    if cfg.format == "json":
        meta["warnings"] = list(res.warnings)
        doc = {"meta": meta, "records": [asdict(r) for r in res.records]}
        if res.joint:
            doc["joint"] = [
                {"t": d["t"], "tau": d["tau"], "entries": [list(e) for e in d["entries"]]} for d in res.joint
            ]
        if res.marginals:
            doc["marginals"] = [dict(d, entries=[list(e) for e in d["entries"]]) for d in res.marginals]
        if res.classical:
            doc["classical"] = res.classical
        if res.momentum_moments:
            doc["momentum_moments"] = res.momentum_moments
        if res.asymptotics:
            doc["asymptotics"] = res.asymptotics
        _write_text(cfg.out, dumps_json(doc))
        return

    side = []
    if res.joint:
        side.append(("joint", ("t", "tau", "x", "y", "probability"),
                     _flatten_entries(res.joint, ("t", "tau"), ("x", "y", "probability"))))
    if res.marginals:
        side.append(("marginals", ("t", "tau", "walker", "x", "probability"),
                     _flatten_entries(res.marginals, ("t", "tau", "walker"), ("x", "probability"))))
    if res.classical:
        side.append(("classical", CLASSICAL_COLUMNS, res.classical))
    if res.momentum_moments:
        side.append(("momentum", MOMENTUM_COLUMNS, res.momentum_moments))
    if res.asymptotics:
        side.append(("asymptotics", ASYMPTOTICS_COLUMNS, res.asymptotics))
    targets = [(_side_path(cfg.out, name), cols, rows) for name, cols, rows in side]
    export_records(res.records, "csv", cfg.out, warnings=res.warnings)
    for path, cols, rows in targets:
        _write_text(path, _csv_text(cols, rows))


CLASSICAL_COLUMNS = ("t", "swap_prob", "mean1", "mean2", "var1", "var2", "mi_bits")
MOMENTUM_COLUMNS = ("t", "tau", "grid", "mean1", "second_moment1")
ASYMPTOTICS_COLUMNS = ("tau", "slope", "C2", "cutoff", "grid")


def write_table(path, fmt: str, columns, rows, meta: dict, extra: dict | None = None):
    """Generic single-table writer used by the ``momentum`` and ``classical`` commands."""
    if fmt == "csv":
        _write_text(path, _csv_text(columns, rows))
    else:
        doc = {"meta": dict(meta, version=__version__), "records": [{c: r.get(c) for c in columns} for r in rows]}
        doc.update(extra or {})
        _write_text(path, dumps_json(doc))
