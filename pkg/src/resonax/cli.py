"""Batch driver: run ladders from config files and emit tables.

The run pipeline per symmetry block: build the trace at each rung, find
and select a stationary point (continuation from the previous rung after
the first), assemble the matrix at the tier's working precision,
diagonalize, then stabilize across rungs into a resonance table.

Emitted files are deterministic: timing stays in the in-memory report
and never reaches the output bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import config as config_mod
from . import optimizer, oracle, spectrum
from .basis import ParamPoint
from .config import ConfigError, RunConfig
from .matelem import build_matrix, trace_fn
from .potentials import HALF_LINE, eval_potential


@dataclass
class RungRecord:
    sector: str
    M: int
    params: ParamPoint
    values: tuple


@dataclass
class ResonanceRow:
    sector: str
    n: int
    E: float
    Gamma: float
    converged_digits: float
    history: list = field(repr=False, default_factory=list)


@dataclass
class RunReport:
    param_names: tuple
    rungs: list
    resonances: list
    timing: dict
    tier: object = None


def _rung_context(sector: str, M: int):
    def wrap(exc: Exception) -> Exception:
        return RuntimeError(f"rung M={M} sector={sector}: {exc}")

    return wrap


def _run_sector(cfg: RunConfig, sector: str, bas) -> tuple[list, list, dict]:
    rungs = []
    sets = []
    timing = {}
    prev = None
    for M in cfg.M_list:
        t0 = time.perf_counter()
        wrap = _rung_context(sector, M)
        try:
            tf = trace_fn(bas, cfg.potential, M, None)
            if prev is None:
                cands = optimizer.stationary_points(tf, extra_starts=cfg.starts or None)
                probe = optimizer.exposure_probe(tf, tier=cfg.tier) if cfg.probe else None
                params = optimizer.select_root(cands, family=bas.family, probe=probe)
            else:
                cands = optimizer.stationary_points(tf, extra_starts=[prev])
                params = optimizer.select_root(cands, history=prev)
            prev = params
            dps = spectrum.build_dps(cfg.tier, M)
            mat = build_matrix(bas, cfg.potential, params, M, dps)
            eig = spectrum.eigenvalues(mat, cfg.tier)
        except (ValueError, RuntimeError, ArithmeticError) as exc:
            raise wrap(exc) from exc
        sets.append(eig)
        rungs.append(RungRecord(sector=sector, M=M, params=params,
                                values=tuple(complex(v) for v in eig.values)))
        timing[f"{sector}:M={M}"] = time.perf_counter() - t0

    rows = []
    if len(sets) >= 2:
        t0 = time.perf_counter()
        found = spectrum.resonances(sets, tol=cfg.tol, window=cfg.window,
                                    refine=cfg.do_refine)
        timing[f"{sector}:stabilize"] = time.perf_counter() - t0
        for r in found:
            rows.append(ResonanceRow(sector=sector, n=r.n, E=r.E, Gamma=r.Gamma,
                                     converged_digits=r.converged_digits,
                                     history=list(r.history)))
    return rungs, rows, timing


def run(cfg: RunConfig) -> RunReport:
    """Execute the configured ladder over every symmetry block."""
    t_start = time.perf_counter()
    rungs = []
    rows = []
    timing = {}
    param_names: tuple = ()
    for sector, bas in cfg.sector_bases():
        param_names = bas.param_names
        r, res, tm = _run_sector(cfg, sector, bas)
        rungs.extend(r)
        rows.extend(res)
        timing.update(tm)
    rows.sort(key=lambda r: r.E)
    for k, r in enumerate(rows):
        r.n = k
    timing["total"] = time.perf_counter() - t_start
    return RunReport(param_names=param_names, rungs=rungs,
                     resonances=rows, timing=timing, tier=cfg.tier)


def _fmt(x: float) -> str:
    return repr(float(x))


def _param_values(params: ParamPoint, names) -> list[complex]:
    return [complex(getattr(params, n)) for n in names]


def emit_table(report: RunReport, fmt: str = "csv") -> str:
    """Render the report; CSV one row per (rung, tracked state), JSON nested.

    CSV column order is fixed: M, each parameter as Re/Im, state index,
    E, Gamma, converged_digits.  Values are shortest round-trip decimals.
    """
    if fmt == "json":
        return json.dumps(_jsonable(report), indent=1, sort_keys=True)
    if fmt != "csv":
        raise ValueError(f"unknown table format {fmt!r}")
    names = report.param_names
    header = ["M"]
    for name in names:
        header += [f"{name}_re", f"{name}_im"]
    header += ["state", "E", "Gamma", "converged_digits"]
    lines = [",".join(header)]
    cap = spectrum.tier_digits(report.tier)
    for row in report.resonances:
        prev_val = None
        digits = 0.0
        for M, val, params in row.history:
            val = complex(val)
            if prev_val is not None:
                drift = abs(val - prev_val)
                digits = cap if drift == 0.0 else min(cap, -np.log10(max(drift, 1e-300)))
                digits = max(digits, 0.0)
            prev_val = val
            cells = [str(M)]
            for v in _param_values(params, names):
                cells += [_fmt(v.real), _fmt(v.imag)]
            is_last = M == row.history[-1][0]
            e_val = row.E if is_last else val.real
            g_val = row.Gamma if is_last else abs(2.0 * min(val.imag, 0.0))
            d_val = row.converged_digits if is_last else digits
            cells += [str(row.n), _fmt(e_val), _fmt(g_val), _fmt(d_val)]
            lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _jsonable(report: RunReport) -> dict:
    names = list(report.param_names)
    rungs = []
    for r in report.rungs:
        rungs.append({
            "sector": r.sector,
            "M": r.M,
            "params": {n: [v.real, v.imag] for n, v in
                       zip(names, _param_values(r.params, names))},
            "values": [[v.real, v.imag] for v in r.values],
        })
    rows = []
    for r in report.resonances:
        rows.append({
            "sector": r.sector,
            "n": r.n,
            "E": r.E,
            "Gamma": r.Gamma,
            "converged_digits": r.converged_digits,
        })
    return {"param_names": names, "rungs": rungs, "resonances": rows}


def emit_figure_data(cfg: RunConfig, report: RunReport) -> str:
    """Potential samples plus one horizontal segment per resonance.

    Segments sit at height Re(eps) and span the classically allowed
    region of the sampled potential at that height; purely data, no
    rendering.
    """
    radial = cfg.potential.domain == HALF_LINE
    xmax = cfg.xmax
    if xmax is None:
        xmax = 2.0 * optimizer.length_scale(cfg.potential)
    n = cfg.samples
    if radial:
        x = np.linspace(xmax / n, xmax, n)
    else:
        x = np.linspace(-xmax, xmax, n)
    v = np.asarray(eval_potential(cfg.potential, x + 0j))
    v = np.broadcast_to(v, x.shape)
    samples = [[float(a), float(b.real), float(b.imag)] for a, b in zip(x, v)]
    segments = []
    for row in report.resonances:
        height = row.E
        below = np.where(v.real <= height)[0]
        if len(below) > 0:
            x0, x1 = float(x[below[0]]), float(x[below[-1]])
        else:
            x0, x1 = float(x[0]), float(x[-1])
        segments.append({"n": row.n, "sector": row.sector, "E": height,
                         "Gamma": row.Gamma, "x0": x0, "x1": x1})
    return json.dumps({"potential": samples, "segments": segments},
                      indent=1, sort_keys=True)


def _write_out(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _cmd_ladder(cfg: RunConfig) -> str:
    report = run(cfg)
    return emit_table(report, cfg.out_format)


def _cmd_solve(cfg: RunConfig) -> str:
    single = replace(cfg, M_list=(cfg.M_list[0],))
    report = run(single)
    if cfg.out_format == "json":
        return emit_table(report, "json")
    names = report.param_names
    header = ["M"]
    for name in names:
        header += [f"{name}_re", f"{name}_im"]
    header += ["state", "E", "Gamma", "converged_digits"]
    lines = [",".join(header)]
    for r in report.rungs:
        pv = _param_values(r.params, names)
        for k, val in enumerate(r.values):
            cells = [str(r.M)]
            for v in pv:
                cells += [_fmt(v.real), _fmt(v.imag)]
            cells += [str(k), _fmt(val.real), _fmt(abs(2.0 * min(val.imag, 0.0))),
                      _fmt(0.0)]
            lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _cmd_trace_roots(cfg: RunConfig) -> str:
    sector, bas = cfg.sector_bases()[0]
    M = cfg.M_list[0]
    tf = trace_fn(bas, cfg.potential, M, None)
    cands = optimizer.stationary_points(tf, extra_starts=cfg.starts or None)
    lines = ["sector,M," + ",".join(
        f"{n}_re,{n}_im" for n in bas.param_names) + ",residual,valid"]
    for c in cands:
        cells = [sector, str(M)]
        for v in _param_values(c.params, bas.param_names):
            cells += [_fmt(v.real), _fmt(v.imag)]
        cells += [_fmt(c.residual), str(c.valid).lower()]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _cmd_oracle_check(cfg: RunConfig) -> str:
    lines = []
    ok = True
    for sector, bas in cfg.sector_bases():
        M = min(cfg.M_list[0], 12)
        tf = trace_fn(bas, cfg.potential, M, None)
        cands = optimizer.stationary_points(tf, extra_starts=cfg.starts or None)
        params = optimizer.select_root(cands, family=bas.family)
        dev = oracle.matelem_agreement(bas, cfg.potential, params, M=M, nodes=1500)
        good = dev < 1e-11
        ok = ok and good
        status = "pass" if good else "FAIL"
        lines.append(f"{status} sector={sector} M={M} closed-form vs quadrature "
                     f"max deviation {dev:.3e} (gate 1e-11)")
    lines.append("oracle-check: " + ("all gates passed" if ok else "GATE FAILURE"))
    return "\n".join(lines) + "\n"


def _preset_dir():
    from importlib.resources import files

    return files("resonax") / "presets"


def list_presets() -> list[str]:
    root = _preset_dir()
    names = [p.name.removesuffix(".cfg") for p in root.iterdir()
             if p.name.endswith(".cfg")]
    return sorted(names)


def load_preset(name: str) -> RunConfig:
    root = _preset_dir()
    path = root / f"{name}.cfg"
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        known = ", ".join(list_presets())
        raise ConfigError(f"unknown preset {name!r}; available: {known}") from None
    return config_mod.from_dict(config_mod.parse_config(text), label=name)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="resonax",
        description="Rayleigh-Ritz resonance solver with trace-optimized bases")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="path to a dotted-key config file")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--out", default=None, help="output path (default stdout)")

    add_common(sub.add_parser("solve", help="diagonalize at the first ladder rung"))
    add_common(sub.add_parser("ladder", help="run the full ladder and stabilize"))
    add_common(sub.add_parser("trace-roots",
                              help="dump all stationary candidates for audit"))
    add_common(sub.add_parser("oracle-check",
                              help="compare closed forms against quadrature"))
    fig = sub.add_parser("figure-data",
                         help="emit potential samples and resonance segments")
    add_common(fig)
    pre = sub.add_parser("preset", help="run a packaged preset by name")
    pre.add_argument("name", nargs="?", default=None)
    pre.add_argument("--format", choices=("csv", "json"), default=None)
    pre.add_argument("--out", default=None)
    pre.add_argument("--show", action="store_true",
                     help="print the preset config instead of running it")

    args = parser.parse_args(argv)
    try:
        if args.command == "preset":
            if args.name is None:
                _write_out("\n".join(list_presets()) + "\n", args.out)
                return 0
            if args.show:
                text = (_preset_dir() / f"{args.name}.cfg").read_text(encoding="utf-8")
                _write_out(text, args.out)
                return 0
            cfg = load_preset(args.name)
            cfg = config_mod.with_overrides(cfg, args.format, args.out or cfg.out_path)
            _write_out(_cmd_ladder(cfg), cfg.out_path)
            return 0

        cfg = config_mod.from_file(args.config)
        cfg = config_mod.with_overrides(cfg, args.format, args.out or cfg.out_path)
        if args.command == "solve":
            text = _cmd_solve(cfg)
        elif args.command == "ladder":
            text = _cmd_ladder(cfg)
        elif args.command == "trace-roots":
            text = _cmd_trace_roots(cfg)
        elif args.command == "oracle-check":
            text = _cmd_oracle_check(cfg)
        else:
            report = run(cfg)
            text = emit_figure_data(cfg, report)
        _write_out(text, cfg.out_path)
        return 0
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
