"""Command-line front door: config parsing, job orchestration, reports.

All JSON and CSV outputs are deterministic functions of (config, seed):
keys are sorted, floats are emitted via repr, and wall-clock timing goes
only into the run manifest.  Exit codes: 0 full success, 1 config error,
2 partial failure (some estimates rejected or a fit refused).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .channel import CoherentTerm, PauliDistribution
from .circuits import CbCircuit, Cycle
from .pauli import Pauli
from .pie import PieQuery, PieSettings, pie_oracle, resolve_orbit
from .cer import CerConfig, CerResult, cer_run, heatmap_table, orbit_row_label
from .sc import ScAxis, ScConfig, calibrate
from .sim import NoiseModel, run_batch

__all__ = ["main"]

SCHEMA_VERSION = 1


class ConfigError(Exception):
    """Invalid configuration; message names the offending key."""


def _require(cfg: dict, key: str, types, where: str = "config"):
    if key not in cfg:
        raise ConfigError(f"{where}: missing required key {key!r}")
    value = cfg[key]
    if not isinstance(value, types):
        raise ConfigError(f"{where}: key {key!r} has wrong type")
    return value


def _reject_unknown(cfg: dict, allowed: set[str], where: str = "config"):
    unknown = sorted(set(cfg) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key {unknown[0]!r}")


def _parse_hard_cycle(spec, n: int) -> Cycle:
    if not isinstance(spec, list) or not spec:
        raise ConfigError("config: 'hard_cycle' must be a non-empty list")
    gates = []
    covered = set()
    for entry in spec:
        if (
            not isinstance(entry, list)
            or len(entry) != 2
            or not isinstance(entry[0], str)
            or not isinstance(entry[1], list)
        ):
            raise ConfigError("config: 'hard_cycle' entries must be [name, [qubits]]")
        gates.append((entry[0], tuple(int(q) for q in entry[1])))
        covered |= set(entry[1])
    # Qubits not named by any gate idle through the cycle.
    for q in range(n):
        if q not in covered:
            gates.append(("I", (q,)))
    try:
        return Cycle("hard", tuple(gates), n, label=_cycle_label(spec))
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"config: invalid 'hard_cycle': {exc}") from exc


def _cycle_label(spec) -> str:
    return "; ".join(f"({','.join(map(str, qs))}):{name}" for name, qs in spec)


def _parse_noise_model(obj, n: int, base_dir: Path) -> NoiseModel:
    if obj is None:
        return NoiseModel(n)
    if isinstance(obj, str):
        path = base_dir / obj
        try:
            obj = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"noise_model: cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"noise_model: invalid JSON in {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError("noise_model: must be an object or a file path")
    _reject_unknown(
        obj, {"version", "n", "cycles", "meas_flip", "prep_flip"}, "noise_model"
    )
    if int(obj.get("n", n)) != n:
        raise ConfigError("noise_model: key 'n' disagrees with the config")
    errors = {}
    coherent = {}
    for cid, block in obj.get("cycles", {}).items():
        if not isinstance(block, dict):
            raise ConfigError(f"noise_model: cycle {cid!r} must be an object")
        _reject_unknown(block, {"errors", "coherent"}, f"noise_model cycle {cid!r}")
        if "errors" in block:
            entries = {}
            for item in block["errors"]:
                _reject_unknown(item, {"pauli", "prob"}, "noise_model error entry")
                p = Pauli.from_string(_require(item, "pauli", str, "error entry"), n)
                entries[p] = float(_require(item, "prob", (int, float), "error entry"))
            try:
                errors[cid] = PauliDistribution(n, entries)
            except ValueError as exc:
                raise ConfigError(f"noise_model: cycle {cid!r}: {exc}") from exc
        if "coherent" in block:
            terms = []
            for item in block["coherent"]:
                _reject_unknown(item, {"qubit", "axis", "angle_deg"}, "coherent entry")
                terms.append(
                    CoherentTerm(
                        int(_require(item, "qubit", int, "coherent entry")),
                        _require(item, "axis", str, "coherent entry"),
                        math.radians(
                            float(_require(item, "angle_deg", (int, float), "coherent entry"))
                        ),
                    )
                )
            coherent[cid] = terms
    try:
        return NoiseModel(
            n,
            per_cycle_errors=errors,
            coherent_terms=coherent,
            meas_flip=obj.get("meas_flip", 0.0),
            prep_flip=obj.get("prep_flip", 0.0),
        )
    except ValueError as exc:
        raise ConfigError(f"noise_model: {exc}") from exc


_COMMON_KEYS = {
    "version",
    "n",
    "hard_cycle",
    "m_values",
    "randomizations",
    "shots",
    "seed",
    "bootstrap",
    "noise_model",
    "protocol",
}


class RunSetup:
    """Validated common configuration shared by all protocol subcommands."""

    def __init__(self, cfg: dict, base_dir: Path, threads: int, seed_override):
        if not isinstance(cfg, dict):
            raise ConfigError("config: top level must be an object")
        _reject_unknown(cfg, _COMMON_KEYS)
        if int(cfg.get("version", SCHEMA_VERSION)) != SCHEMA_VERSION:
            raise ConfigError("config: unsupported 'version'")
        self.n = int(_require(cfg, "n", int))
        if self.n < 1:
            raise ConfigError("config: 'n' must be positive")
        self.hard = _parse_hard_cycle(_require(cfg, "hard_cycle", list), self.n)
        m_values = cfg.get("m_values", [4, 32])
        if (
            not isinstance(m_values, list)
            or len(m_values) != 2
            or not all(isinstance(v, int) for v in m_values)
        ):
            raise ConfigError("config: 'm_values' must be two integers")
        self.seed = int(_require(cfg, "seed", int))
        if seed_override is not None:
            self.seed = int(seed_override)
        try:
            self.settings = PieSettings(
                m1=m_values[0],
                m2=m_values[1],
                shots=int(cfg.get("shots", 512)),
                randomizations=int(cfg.get("randomizations", 30)),
                bootstrap=int(cfg.get("bootstrap", 200)),
                threads=threads,
            )
        except ValueError as exc:
            raise ConfigError(f"config: {exc}") from exc
        self.model = _parse_noise_model(cfg.get("noise_model"), self.n, base_dir)
        self.protocol = cfg.get("protocol", {})
        if not isinstance(self.protocol, dict):
            raise ConfigError("config: 'protocol' must be an object")


def _load_config(path: str) -> tuple[dict, str, Path]:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    digest = hashlib.sha256(text.encode()).hexdigest()
    return cfg, digest, p.parent


def _clean(obj):
    """Replace NaN/inf by None recursively so the JSON stays standard."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _write_json(path: Path, payload: dict):
    path.write_text(
        json.dumps(_clean(payload), sort_keys=True, indent=2) + "\n"
    )


def _write_manifest(out: Path, files: list[str], digest: str, seed: int, elapsed: float):
    lines = [
        f"tool cerkit {__version__}",
        f"python {platform.python_version()}",
        f"numpy {np.__version__}",
        f"config_sha256 {digest}",
        f"seed {seed}",
        f"elapsed_s {elapsed:.3f}",
        "files " + " ".join(files),
    ]
    (out / "manifest.txt").write_text("\n".join(lines) + "\n")


def _fmt(x: float) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else repr(float(x))


# -- subcommands -----------------------------------------------------------


def _cmd_pie(setup: RunSetup, digest: str, out: Path) -> int:
    proto = dict(setup.protocol)
    _reject_unknown(proto, {"queries", "resolve"}, "protocol")
    labels = proto.get("queries")
    if not isinstance(labels, list) or not labels:
        raise ConfigError("protocol: 'queries' must be a non-empty list")
    try:
        queries = [Pauli.from_string(s, setup.n) for s in labels]
    except ValueError as exc:
        raise ConfigError(f"protocol: {exc}") from exc
    t0 = time.perf_counter()
    res = pie_oracle(queries, setup.hard, setup.settings, setup.model, setup.seed)
    resolved = {}
    if proto.get("resolve"):
        for q in queries:
            if q.weight == 0:
                continue
            est, meta = resolve_orbit(
                PieQuery(q), setup.hard, setup.settings, setup.model, setup.seed
            )
            resolved[q.label()] = {
                "value": est.value,
                "sigma": est.sigma,
                "status": est.status,
                "meta": meta,
            }
    payload = {
        "schema": f"pie_result/{SCHEMA_VERSION}",
        "config_sha256": digest,
        "seed": setup.seed,
        "cycle": setup.hard.label,
        "n": setup.n,
        "orbit_fidelities": [
            {
                "orbit": o.label(),
                "value": est.value,
                "sigma": est.sigma,
                "status": est.status,
            }
            for o, est in sorted(
                res.orbit_fidelities.items(), key=lambda kv: kv[0].key()
            )
        ],
        "queries": [
            {
                "pauli": q.label(),
                "value": est.value,
                "sigma": est.sigma,
                "status": est.status,
            }
            for q, est in sorted(res.query_estimates.items(), key=lambda kv: kv[0].key())
        ],
        "decays": [
            {
                "pauli": r.query.label(),
                "m": r.m,
                "N": r.n_value,
                "shots": r.shots,
                "randomizations": len(r.per_randomization),
            }
            for r in res.records
        ],
        "resolved": resolved,
        "failures": list(res.failures),
    }
    _write_json(out / "pie_result.json", payload)
    _write_manifest(
        out, ["pie_result.json"], digest, setup.seed, time.perf_counter() - t0
    )
    if res.failures or any(
        v["status"] != "ok" for v in resolved.values()
    ):
        return 2
    return 0


def _cer_payload(res: CerResult, digest: str, seed: int) -> dict:
    tables = []
    for a in res.supports:
        table = res.per_support.get(a)
        if table is None:
            continue
        rows = []
        for row in table.rows:
            rows.append(
                {
                    "orbit": orbit_row_label(row.orbit, a),
                    "paulis": [m.label() for m in row.orbit.members],
                    "mu": row.mu,
                    "sigma": row.sigma,
                    "status": row.status,
                }
            )
        tables.append({"support": str(a), "rows": rows})
    return {
        "schema": f"cer_result/{SCHEMA_VERSION}",
        "config_sha256": digest,
        "seed": seed,
        "cycle": res.cycle_label,
        "n": res.config.hard.n,
        "k": res.config.k,
        "threshold": res.config.threshold,
        "supports": [str(a) for a in res.supports],
        "tables": tables,
        "failures": list(res.failures),
    }


def _write_heatmap_csv(path: Path, results: list[CerResult], threshold: float):
    hm = heatmap_table(results, threshold)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["support", "row"]
        for col in hm.columns:
            header += [f"{col} mu", f"{col} sigma"]
        writer.writerow(header)
        for row in hm.rows:
            fields = [row.support_label, row.row_label]
            for cell in row.cells:
                if cell is None:
                    fields += ["", ""]
                else:
                    fields += [_fmt(cell[0]), _fmt(cell[1])]
            writer.writerow(fields)


def _cmd_cer(setup: RunSetup, digest: str, out: Path) -> int:
    proto = dict(setup.protocol)
    _reject_unknown(proto, {"k", "threshold"}, "protocol")
    try:
        cfg = CerConfig(
            setup.hard,
            seed=setup.seed,
            k=int(proto.get("k", 2)),
            settings=setup.settings,
            threshold=float(proto.get("threshold", 0.001)),
        )
    except ValueError as exc:
        raise ConfigError(f"protocol: {exc}") from exc
    t0 = time.perf_counter()
    res = cer_run(cfg, setup.model)
    _write_json(out / "cer_result.json", _cer_payload(res, digest, setup.seed))
    _write_heatmap_csv(out / "heatmap.csv", [res], cfg.threshold)
    _write_manifest(
        out,
        ["cer_result.json", "heatmap.csv"],
        digest,
        setup.seed,
        time.perf_counter() - t0,
    )
    return 2 if res.failures else 0


def _cmd_sc(setup: RunSetup, digest: str, out: Path) -> int:
    proto = dict(setup.protocol)
    _reject_unknown(proto, {"axes", "multipliers", "cer_k"}, "protocol")
    raw_axes = proto.get("axes")
    if not isinstance(raw_axes, list) or not raw_axes:
        raise ConfigError("protocol: 'axes' must be a non-empty list")
    axes = []
    for item in raw_axes:
        _reject_unknown(
            item, {"qubit", "axis", "queries", "base_angle_deg"}, "axis entry"
        )
        try:
            axes.append(
                ScAxis(
                    int(_require(item, "qubit", int, "axis entry")),
                    _require(item, "axis", str, "axis entry"),
                    tuple(
                        Pauli.from_string(s, setup.n)
                        for s in _require(item, "queries", list, "axis entry")
                    ),
                    float(item.get("base_angle_deg", 5.0)),
                )
            )
        except ValueError as exc:
            raise ConfigError(f"protocol: {exc}") from exc
    multipliers = proto.get("multipliers")
    try:
        cfg = ScConfig(
            setup.hard,
            tuple(axes),
            seed=setup.seed,
            settings=setup.settings,
            **({"multipliers": tuple(multipliers)} if multipliers else {}),
        )
    except ValueError as exc:
        raise ConfigError(f"protocol: {exc}") from exc
    t0 = time.perf_counter()
    cal = calibrate(cfg, setup.model, cer_k=int(proto.get("cer_k", 1)))
    sweep = cal.sweep
    payload = {
        "schema": f"sc_sweep/{SCHEMA_VERSION}",
        "config_sha256": digest,
        "seed": setup.seed,
        "cycle": setup.hard.label,
        "n": setup.n,
        "axes": [
            {
                "qubit": f.qubit,
                "axis": f.axis,
                "angles_deg": list(f.angles_deg),
                "objective": list(f.values),
                "sigma": list(f.sigmas),
                "fit": {
                    "coefficients": list(f.coefficients),
                    "covariance": [list(r) for r in f.covariance],
                    "residual_rms": f.residual_rms,
                },
                "theta_star_deg": f.theta_star_deg,
                "theta_star_sigma_deg": f.theta_star_sigma_deg,
                "status": f.status,
                "dropped_deg": list(f.dropped_deg),
            }
            for f in sweep.per_axis
        ],
        "theta_star_deg": list(sweep.theta_star_deg),
        "targeted_before": list(cal.targeted_before),
        "targeted_after": list(cal.targeted_after),
        "reduction_factor": cal.reduction_factor,
    }
    _write_json(out / "sc_sweep.json", payload)
    with (out / "sweep.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["qubit", "axis", "angle_deg", "objective", "sigma"])
        for f in sweep.per_axis:
            for t, v, s in zip(f.angles_deg, f.values, f.sigmas):
                writer.writerow([f.qubit, f.axis, _fmt(t), _fmt(v), _fmt(s)])
    _write_json(out / "cer_before.json", _cer_payload(cal.before, digest, setup.seed))
    _write_json(out / "cer_after.json", _cer_payload(cal.after, digest, setup.seed))
    _write_manifest(
        out,
        ["sc_sweep.json", "sweep.csv", "cer_before.json", "cer_after.json"],
        digest,
        setup.seed,
        time.perf_counter() - t0,
    )
    partial = (
        any(f.status != "ok" for f in sweep.per_axis)
        or cal.before.failures
        or cal.after.failures
    )
    return 2 if partial else 0


def _cmd_sim(setup: RunSetup, digest: str, out: Path) -> int:
    proto = dict(setup.protocol)
    _reject_unknown(proto, {"m"}, "protocol")
    m = int(proto.get("m", setup.settings.m1))
    if m < 1:
        raise ConfigError("protocol: 'm' must be positive")
    base = CbCircuit(
        Cycle.identity(setup.n), setup.hard, Cycle.identity(setup.n), m
    )
    t0 = time.perf_counter()
    results = run_batch(
        base,
        setup.model,
        setup.settings.randomizations,
        setup.settings.shots,
        setup.seed,
        cycle_id=setup.hard.label,
        threads=setup.settings.threads,
    )
    payload = {
        "schema": f"sim_samples/{SCHEMA_VERSION}",
        "config_sha256": digest,
        "seed": setup.seed,
        "cycle": setup.hard.label,
        "n": setup.n,
        "m": m,
        "instances": [
            {
                "frame": r.instance.frame.label(),
                "counts": {
                    format(bits, f"0{setup.n}b")[::-1]: c
                    for bits, c in sorted(r.counts.items())
                },
            }
            for r in results
        ],
    }
    _write_json(out / "samples.json", payload)
    _write_manifest(
        out, ["samples.json"], digest, setup.seed, time.perf_counter() - t0
    )
    return 0


def _cmd_oracle_check(_args) -> int:
    from . import selfcheck

    ok = True
    for name, passed, detail in selfcheck.run_all():
        print(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
        ok = ok and passed
    return 0 if ok else 1


def _run_protocol(args, runner) -> int:
    try:
        cfg, digest, base_dir = _load_config(args.config)
        setup = RunSetup(cfg, base_dir, args.threads, args.seed_override)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return runner(setup, digest, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cerkit",
        description="Cycle error reconstruction and stochastic calibration tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run(name: str, help_text: str):
        outer = sub.add_parser(name, help=help_text)
        inner = outer.add_subparsers(dest="action", required=True)
        run = inner.add_parser("run", help=f"run the {name} protocol")
        run.add_argument("--config", required=True, help="path to the JSON config")
        run.add_argument("--out", default=".", help="output directory")
        run.add_argument("--threads", type=int, default=1, help="worker threads")
        run.add_argument(
            "--seed-override", type=int, default=None, help="replace the config seed"
        )
        return run

    add_run("pie", "orbit-fidelity estimation").set_defaults(
        func=lambda a: _run_protocol(a, _cmd_pie)
    )
    add_run("cer", "cycle error reconstruction").set_defaults(
        func=lambda a: _run_protocol(a, _cmd_cer)
    )
    add_run("sc", "stochastic calibration").set_defaults(
        func=lambda a: _run_protocol(a, _cmd_sc)
    )

    oracle = sub.add_parser("oracle", help="dense-oracle self tests")
    oracle_sub = oracle.add_subparsers(dest="action", required=True)
    oracle_sub.add_parser("check", help="run the equivalence suite").set_defaults(
        func=_cmd_oracle_check
    )

    sim = sub.add_parser("sim", help="raw circuit sampling")
    sim_sub = sim.add_subparsers(dest="action", required=True)
    sample = sim_sub.add_parser("sample", help="sample a compiled circuit")
    sample.add_argument("--config", required=True)
    sample.add_argument("--out", default=".")
    sample.add_argument("--threads", type=int, default=1)
    sample.add_argument("--seed-override", type=int, default=None)
    sample.set_defaults(func=lambda a: _run_protocol(a, _cmd_sim))

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
