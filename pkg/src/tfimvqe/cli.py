"""Command-line interface and run-record serialization.

Commands: vqe, sweep, ed, observables, framepotential.  Options come from a
JSON config file, command-line flags, or both (flags win).  Outputs are CSV
plus a JSON run record (and optional SVG plots); every float is serialized
with 12 significant digits, and reruns with the same config and seed produce
byte-identical files.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .ansatz import SB_PLACEMENTS, AnsatzFamily, AnsatzSpec
from .expressivity import (
    fidelity_histogram,
    frame_potential,
    haar_frame_potential,
    sample_fidelities,
)
from .hamiltonian import build_tfim, eigen_residual, exact_eigenstates
from .lattice import make_lattice
from .observables import build_report
from .optimizer import OptOptions
from .vqe import (
    INIT_MODES,
    OptimizerKind,
    VQEConfig,
    VQEResult,
    run_vqe,
    sweep_field,
)

COMMANDS = ("vqe", "sweep", "ed", "observables", "framepotential")
SWEEP_CSV_COLUMNS = (
    "hx", "energy", "exact_energy", "relative_error", "variance", "magnetization",
    "long_range_corr", "ee_single_site_ln2", "ee_half_cut", "n_evals",
    "restart_index_of_best",
)
_ANSATZ_NAMES = tuple(f.value for f in AnsatzFamily)
_OPTIMIZER_NAMES = ("auto",) + tuple(k.value for k in OptimizerKind)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run description; round-trips through its JSON form."""

    command: str
    dims: tuple[int, ...]
    periodic: bool = True
    jz: float = -1.0
    hx: float | None = None
    hx_grid: tuple[float, ...] | None = None
    ansatz: str | None = None
    layers: int | None = None
    sb_placement: str = "per_layer"
    optimizer: str = "auto"
    init_mode: str = "auto"
    restarts: int = 5
    fresh_restarts: int = 1
    warm_start: bool | None = None  # None: warm only on 3-D lattices
    seed: int = 0
    max_evals: int = 20000
    grad_tol: float = 1e-8
    memory: int = 10
    initial_trust_radius: float = 0.5
    final_trust_radius: float = 1e-6
    k: int = 1
    n_samples: int = 10000
    n_bins: int = 50
    t_max: int = 2
    out: str | None = None
    plots: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"'command' must be one of {COMMANDS}, got {self.command!r}")
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if self.hx_grid is not None:
            object.__setattr__(self, "hx_grid", tuple(float(v) for v in self.hx_grid))
        if self.hx is not None:
            object.__setattr__(self, "hx", float(self.hx))
        if self.warm_start is None:
            object.__setattr__(self, "warm_start", len(self.dims) == 3)
        needs_ansatz = self.command in ("vqe", "sweep", "framepotential")
        if needs_ansatz:
            if self.ansatz is None:
                raise ConfigError(f"'ansatz' is required for command {self.command!r}")
            if self.ansatz not in _ANSATZ_NAMES:
                raise ConfigError(f"'ansatz' must be one of {_ANSATZ_NAMES}, got {self.ansatz!r}")
            if self.layers is None:
                raise ConfigError(f"'layers' is required for command {self.command!r}")
        if self.command in ("vqe", "ed", "observables") and self.hx is None:
            raise ConfigError(f"'hx' is required for command {self.command!r}")
        if self.command == "sweep" and not self.hx_grid:
            raise ConfigError("'hx_grid' is required for command 'sweep'")
        if self.sb_placement not in SB_PLACEMENTS:
            raise ConfigError(f"'sb_placement' must be one of {SB_PLACEMENTS}")
        if self.optimizer not in _OPTIMIZER_NAMES:
            raise ConfigError(f"'optimizer' must be one of {_OPTIMIZER_NAMES}")
        if self.init_mode not in INIT_MODES:
            raise ConfigError(f"'init_mode' must be one of {INIT_MODES}")
        if not 1 <= self.k <= 4:
            raise ConfigError(f"'k' must be in [1, 4], got {self.k}")

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out


def _raw_config(text: str) -> dict:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config is not valid JSON: {exc.msg} at line {exc.lineno} column {exc.colno}"
        ) from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config root must be an object, got {type(raw).__name__}")
    return raw


def load_config(text: str) -> RunConfig:
    """Parse a JSON config document, rejecting unknown keys."""
    return config_from_dict(_raw_config(text))


def config_from_dict(raw: dict) -> RunConfig:
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    if "command" not in raw:
        raise ConfigError("missing required key 'command'")
    if "dims" not in raw:
        raise ConfigError("missing required key 'dims'")
    try:
        return RunConfig(**raw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def serialize_config(cfg: RunConfig) -> str:
    return dumps_json(cfg.to_dict())


# ---------------------------------------------------------------------------
# deterministic serialization: 12 significant digits, insertion-ordered keys

def format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x}")
    return format(float(x), ".12g")


def dumps_json(obj) -> str:
    parts: list[str] = []
    _emit_json(obj, parts)
    return "".join(parts)


def _emit_json(obj, parts: list[str]) -> None:
    if obj is None:
        parts.append("null")
    elif isinstance(obj, bool) or isinstance(obj, np.bool_):
        parts.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        parts.append(format_float(float(obj)))
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    elif isinstance(obj, dict):
        parts.append("{")
        for i, (key, val) in enumerate(obj.items()):
            if i:
                parts.append(", ")
            parts.append(json.dumps(str(key)))
            parts.append(": ")
            _emit_json(val, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        parts.append("[")
        for i, val in enumerate(obj):
            if i:
                parts.append(", ")
            _emit_json(val, parts)
        parts.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    return str(value)


def write_csv(path: str, header, rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(_csv_cell(v) for v in row) for row in rows]
    _write_text(path, "\n".join(lines) + "\n")


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise RuntimeError(f"cannot write output file {path!r}: {exc}") from exc


# ---------------------------------------------------------------------------
# result -> row/record mapping

def _point_row(p: VQEResult) -> list:
    o = p.observables
    return [
        p.hx, p.energy, p.exact_energy, p.relative_error, o.variance,
        o.magnetization, o.long_range_corr, o.single_site_entropy_ln2,
        o.half_cut_entropy, p.n_evals, p.restart_index_of_best,
    ]


def _observables_dict(o) -> dict:
    return {
        "energy": o.energy,
        "variance": o.variance,
        "magnetization": o.magnetization,
        "long_range_corr": o.long_range_corr,
        "ee_single_site": o.single_site_entropy,
        "ee_single_site_ln2": o.single_site_entropy_ln2,
        "ee_half_cut": o.half_cut_entropy,
        "degenerate": o.degenerate,
    }


def _point_dict(p: VQEResult) -> dict:
    return {
        "hx": p.hx,
        "energy": p.energy,
        "exact_energy": p.exact_energy,
        "relative_error": p.relative_error,
        "n_evals": p.n_evals,
        "n_grad_evals": p.n_grad_evals,
        "restart_index_of_best": p.restart_index_of_best,
        "restart_energies": list(p.restart_energies),
        "restart_reasons": list(p.restart_reasons),
        "converged": p.opt.converged,
        "termination_reason": p.opt.termination_reason,
        "observables": _observables_dict(p.observables),
        "params": list(p.params),
    }


def _versions() -> dict:
    return {
        "tfimvqe": __version__,
        "numpy": np.__version__,
        "python": ".".join(str(v) for v in sys.version_info[:3]),
    }


def _record(rc: RunConfig, body: dict) -> dict:
    return {"config": rc.to_dict(), "versions": _versions(), **body}


def _write_sweep_plots(points, out: str, written: list[str]) -> None:
    from .svgplot import line_plot

    xs = [p.hx for p in points]
    panels = [
        ("energy", "energy", [("vqe", xs, [p.energy for p in points]),
                              ("exact", xs, [p.exact_energy for p in points])]),
        ("variance", "Var(E)", [("vqe", xs, [p.observables.variance for p in points])]),
        ("magnetization", "M", [("vqe", xs, [p.observables.magnetization for p in points])]),
        ("long_range_corr", "M_corr",
         [("vqe", xs, [p.observables.long_range_corr for p in points])]),
        ("entropy", "S1 / ln2",
         [("vqe", xs, [p.observables.single_site_entropy_ln2 for p in points])]),
    ]
    for name, ylabel, series in panels:
        path = f"{out}_{name}.svg"
        _write_text(path, line_plot(series, title=name, xlabel="hx", ylabel=ylabel))
        written.append(path)


# ---------------------------------------------------------------------------
# commands

def _build_vqe_config(rc: RunConfig) -> VQEConfig:
    lat = make_lattice(rc.dims, rc.periodic)
    spec = AnsatzSpec(AnsatzFamily(rc.ansatz), rc.layers, lat, rc.sb_placement)
    opts = OptOptions(
        max_evals=rc.max_evals,
        grad_tol=rc.grad_tol,
        memory=rc.memory,
        initial_trust_radius=rc.initial_trust_radius,
        final_trust_radius=rc.final_trust_radius,
    )
    optimizer = None if rc.optimizer == "auto" else OptimizerKind(rc.optimizer)
    return VQEConfig(
        lattice=lat, ansatz=spec, jz=rc.jz, optimizer=optimizer, opt_options=opts,
        restarts=rc.restarts, fresh_restarts=rc.fresh_restarts,
        init_mode=rc.init_mode, seed=rc.seed,
    )


def _cmd_vqe(rc: RunConfig) -> tuple[str, list[str]]:
    result = run_vqe(_build_vqe_config(rc), rc.hx)
    written = []
    if rc.out:
        write_csv(rc.out + ".csv", SWEEP_CSV_COLUMNS, [_point_row(result)])
        _write_text(rc.out + ".json",
                    dumps_json(_record(rc, {"points": [_point_dict(result)]})) + "\n")
        written = [rc.out + ".csv", rc.out + ".json"]
    rel = "n/a" if result.relative_error is None else format_float(result.relative_error)
    return (
        f"vqe hx={format_float(rc.hx)} energy={format_float(result.energy)} "
        f"rel_err={rel} n_evals={result.n_evals}",
        written,
    )


def _cmd_sweep(rc: RunConfig) -> tuple[str, list[str]]:
    report = sweep_field(_build_vqe_config(rc), rc.hx_grid, rc.warm_start)
    written = []
    if rc.out:
        write_csv(rc.out + ".csv", SWEEP_CSV_COLUMNS,
                  [_point_row(p) for p in report.points])
        record = _record(rc, {
            "warm_start": report.warm_start,
            "points": [_point_dict(p) for p in report.points],
        })
        _write_text(rc.out + ".json", dumps_json(record) + "\n")
        written = [rc.out + ".csv", rc.out + ".json"]
        if rc.plots:
            _write_sweep_plots(report.points, rc.out, written)
    total = sum(p.n_evals for p in report.points)
    return (
        f"sweep {len(report.points)} points warm_start={str(report.warm_start).lower()} "
        f"total_evals={total}",
        written,
    )


def _exact_pairs(rc: RunConfig):
    lat = make_lattice(rc.dims, rc.periodic)
    h = build_tfim(lat, rc.jz, rc.hx)
    return lat, h, exact_eigenstates(h, rc.k, seed=rc.seed)


def _cmd_ed(rc: RunConfig) -> tuple[str, list[str]]:
    lat, h, pairs = _exact_pairs(rc)
    written = []
    if rc.out:
        write_csv(rc.out + ".csv",
                  ["hx"] + [f"e{i}" for i in range(len(pairs))],
                  [[rc.hx] + [p.value for p in pairs]])
        record = _record(rc, {
            "eigenvalues": [p.value for p in pairs],
            "residuals": [eigen_residual(h, p) for p in pairs],
            "degenerate": rc.hx == 0.0,
        })
        _write_text(rc.out + ".json", dumps_json(record) + "\n")
        written = [rc.out + ".csv", rc.out + ".json"]
    values = " ".join(format_float(p.value) for p in pairs)
    return f"ed hx={format_float(rc.hx)} eigenvalues: {values}", written


def _cmd_observables(rc: RunConfig) -> tuple[str, list[str]]:
    lat, h, pairs = _exact_pairs(rc)
    report = build_report(pairs[0].state, lat, h, degenerate=(rc.hx == 0.0))
    written = []
    if rc.out:
        header = ["hx", "energy", "variance", "magnetization", "long_range_corr",
                  "ee_single_site_ln2", "ee_half_cut"]
        row = [rc.hx, report.energy, report.variance, report.magnetization,
               report.long_range_corr, report.single_site_entropy_ln2,
               report.half_cut_entropy]
        write_csv(rc.out + ".csv", header, [row])
        _write_text(rc.out + ".json",
                    dumps_json(_record(rc, {"observables": _observables_dict(report)})) + "\n")
        written = [rc.out + ".csv", rc.out + ".json"]
    return (
        f"observables hx={format_float(rc.hx)} energy={format_float(report.energy)} "
        f"ee_single_site_ln2={format_float(report.single_site_entropy_ln2)}",
        written,
    )


def _cmd_framepotential(rc: RunConfig) -> tuple[str, list[str]]:
    lat = make_lattice(rc.dims, rc.periodic)
    spec = AnsatzSpec(AnsatzFamily(rc.ansatz), rc.layers, lat, rc.sb_placement)
    samples = sample_fidelities(spec, rc.n_samples, rc.seed)
    hist = fidelity_histogram(samples, rc.n_bins)
    frame = {f"F{t}": frame_potential(samples, t) for t in range(1, rc.t_max + 1)}
    haar = {f"F{t}": haar_frame_potential(lat.n_sites, t) for t in range(1, rc.t_max + 1)}
    written = []
    if rc.out:
        rows = [
            [hist.bin_edges[i], hist.bin_edges[i + 1], hist.counts[i]]
            for i in range(len(hist.counts))
        ]
        write_csv(rc.out + ".csv", ["bin_low", "bin_high", "count"], rows)
        record = _record(rc, {
            "mean_fidelity": frame["F1"],
            "frame_potentials": frame,
            "haar_frame_potentials": haar,
        })
        _write_text(rc.out + ".json", dumps_json(record) + "\n")
        written = [rc.out + ".csv", rc.out + ".json"]
        if rc.plots:
            from .svgplot import line_plot

            mids = [0.5 * (hist.bin_edges[i] + hist.bin_edges[i + 1])
                    for i in range(len(hist.counts))]
            path = rc.out + "_histogram.svg"
            _write_text(path, line_plot([("counts", mids, list(hist.counts))],
                                        title="fidelity histogram",
                                        xlabel="fidelity", ylabel="count"))
            written.append(path)
    return (
        f"framepotential {rc.ansatz} L={rc.layers} N={lat.n_sites} "
        f"F1={format_float(frame['F1'])} haar={format_float(haar['F1'])}",
        written,
    )


_RUNNERS = {
    "vqe": _cmd_vqe,
    "sweep": _cmd_sweep,
    "ed": _cmd_ed,
    "observables": _cmd_observables,
    "framepotential": _cmd_framepotential,
}


# ---------------------------------------------------------------------------
# argument parsing

def _add_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--dims", type=int, nargs="+", metavar="D")
    p.add_argument("--jz", type=float)
    p.add_argument("--hx", type=float)
    p.add_argument("--hx-grid", type=float, nargs="+", metavar="H", dest="hx_grid")
    p.add_argument("--ansatz", choices=_ANSATZ_NAMES)
    p.add_argument("--layers", type=int)
    p.add_argument("--sb-placement", choices=SB_PLACEMENTS, dest="sb_placement")
    p.add_argument("--optimizer", choices=_OPTIMIZER_NAMES)
    p.add_argument("--init-mode", choices=INIT_MODES, dest="init_mode")
    p.add_argument("--restarts", type=int)
    p.add_argument("--fresh-restarts", type=int, dest="fresh_restarts")
    warm = p.add_mutually_exclusive_group()
    warm.add_argument("--warm-start", action="store_true", default=None, dest="warm_start")
    warm.add_argument("--cold-start", action="store_false", default=None, dest="warm_start")
    p.add_argument("--seed", type=int)
    p.add_argument("--max-evals", type=int, dest="max_evals")
    p.add_argument("--grad-tol", type=float, dest="grad_tol")
    p.add_argument("--memory", type=int)
    p.add_argument("--initial-trust-radius", type=float, dest="initial_trust_radius")
    p.add_argument("--final-trust-radius", type=float, dest="final_trust_radius")
    p.add_argument("--k", type=int)
    p.add_argument("--n-samples", type=int, dest="n_samples")
    p.add_argument("--n-bins", type=int, dest="n_bins")
    p.add_argument("--t-max", type=int, dest="t_max")
    p.add_argument("--out", help="output path prefix (.csv/.json/.svg appended)")
    p.add_argument("--plots", action="store_true", default=None)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tfimvqe",
        description="VQE benchmarks for the transverse-field Ising model",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        _add_flags(sub.add_parser(name))
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    raw: dict = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {args.config!r}: {exc}") from exc
        raw = _raw_config(text)
    raw["command"] = args.command
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        raw[key] = value
    return config_from_dict(raw)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        rc = resolve_config(args)
        summary, written = _RUNNERS[rc.command](rc)
    except (ConfigError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(summary)
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
