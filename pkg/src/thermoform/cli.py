"""Configuration-driven command line.

Usage: ``thermoform CONFIG.yaml [--seed N] [--out DIR] [--tol X]``

The YAML config names a ``command`` and the objects it needs::

    command: pressure
    system: {kind: golden_mean}
    potential: {kind: zero}
    params: {mode: both, n: 18, epsilon: 0.5}
    tolerances: {spectral: 1.0e-12}
    seed: 0
    output: results/golden

Results go to ``<output>.csv`` with a ``<output>.meta.json`` sidecar.
Exit codes: 0 success, 2 invalid configuration, 3 numeric failure,
4 resource limit.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .errors import InvalidParameter, ThermoformError
from .symbolic import Potential, SftSystem

log = logging.getLogger("thermoform")

COMMANDS = ("pressure", "equilibrium", "gibbs-check", "hyp-times", "zoom-times", "skew", "ldp",
            "glue", "katok")
DEFAULT_TOLERANCES = {"spectral": 1e-12, "cylinder_depth": 12, "J": 60}
TOP_LEVEL = {"command", "system", "potential", "map", "psi", "params", "tolerances", "seed", "output"}


@dataclass
class RunConfig:
    command: str
    system: dict = field(default_factory=dict)
    potential: dict = field(default_factory=dict)
    map: dict = field(default_factory=dict)
    psi: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    output: str = ""

    @classmethod
    def from_mapping(cls, raw) -> "RunConfig":
        if not isinstance(raw, dict):
            raise InvalidParameter("config: top level must be a mapping")
        unknown = set(raw) - TOP_LEVEL
        if unknown:
            raise InvalidParameter(f"config: unknown field(s) {sorted(unknown)}")
        command = raw.get("command")
        if command not in COMMANDS:
            raise InvalidParameter(f"command: expected one of {COMMANDS}, got {command!r}")
        for key in ("system", "potential", "map", "psi", "params", "tolerances"):
            if raw.get(key) is not None and not isinstance(raw[key], dict):
                raise InvalidParameter(f"{key}: must be a mapping")
        tol = dict(DEFAULT_TOLERANCES)
        for k, v in (raw.get("tolerances") or {}).items():
            if k not in DEFAULT_TOLERANCES:
                raise InvalidParameter(f"tolerances.{k}: unknown tolerance")
            tol[k] = v
        seed = raw.get("seed", 0)
        if not isinstance(seed, int) or seed < 0:
            raise InvalidParameter("seed: must be a non-negative integer")
        return cls(command=command, system=raw.get("system") or {"kind": "full_shift", "k": 2},
                   potential=raw.get("potential") or {"kind": "zero"}, map=raw.get("map") or {},
                   psi=raw.get("psi") or {}, params=raw.get("params") or {}, tolerances=tol,
                   seed=seed, output=str(raw.get("output") or command))

    def canonical(self) -> dict:
        return {"command": self.command, "system": self.system, "potential": self.potential,
                "map": self.map, "psi": self.psi, "params": self.params,
                "tolerances": self.tolerances, "seed": self.seed}

    def digest(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, default=str)
        return hashlib.sha256(text.encode()).hexdigest()


# --- builders --------------------------------------------------------------------------

def _param(section: dict, name: str, where: str, default=None, kind=float):
    if name not in section:
        if default is None:
            raise InvalidParameter(f"{where}.{name}: required")
        return default
    try:
        return kind(section[name])
    except (TypeError, ValueError):
        raise InvalidParameter(f"{where}.{name}: expected {kind.__name__}, got {section[name]!r}")


def build_system(spec: dict) -> SftSystem:
    kind = spec.get("kind")
    if kind == "full_shift":
        return SftSystem.full_shift(_param(spec, "k", "system", 2, int))
    if kind == "golden_mean":
        return SftSystem.golden_mean()
    if kind == "matrix":
        if "transitions" not in spec:
            raise InvalidParameter("system.transitions: required")
        try:
            return SftSystem(np.asarray(spec["transitions"], dtype=np.int8))
        except InvalidParameter as exc:
            raise InvalidParameter(f"system.transitions: {exc}")
    raise InvalidParameter(f"system.kind: unknown kind {kind!r}")


def build_potential(system: SftSystem, spec: dict, where: str = "potential") -> Potential:
    kind = spec.get("kind")
    try:
        if kind == "zero":
            return Potential.zero(system)
        if kind == "constant":
            return Potential.constant(system, _param(spec, "value", where))
        if kind == "symbol_values":
            return Potential.symbol_values(system, spec["values"])
        if kind == "log_probabilities":
            return Potential.log_probabilities(system, spec["p"])
        if kind == "log_matrix":
            return Potential.log_matrix(system, spec["matrix"])
        if kind == "indicator":
            return Potential.indicator(system, _param(spec, "symbol", where, None, int),
                                       _param(spec, "value", where, 1.0))
        if kind == "table":
            return Potential.table(system, _param(spec, "depth", where, None, int), spec["values"])
    except KeyError as exc:
        raise InvalidParameter(f"{where}.{exc.args[0]}: required")
    raise InvalidParameter(f"{where}.kind: unknown kind {kind!r}")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


@dataclass
class Result:
    header: list
    rows: list
    constants: dict = field(default_factory=dict)


# --- commands ------------------------------------------------------------------------

def cmd_pressure(cfg: RunConfig) -> Result:
    from .transfer import pressure
    system = build_system(cfg.system)
    phi = build_potential(system, cfg.potential)
    mode = cfg.params.get("mode", "spectral")
    if mode not in ("spectral", "finite_n", "both"):
        raise InvalidParameter(f"params.mode: unknown mode {mode!r}")
    header = ["pressure_nats"]
    row = []
    consts = {}
    if mode in ("spectral", "both"):
        P = pressure(system, phi, tol=cfg.tolerances["spectral"])
        row.append(P)
        consts["P"] = {"value": P, "source": "log Perron eigenvalue of the transfer matrix"}
    if mode in ("finite_n", "both"):
        n = _param(cfg.params, "n", "params", 12, int)
        eps = _param(cfg.params, "epsilon", "params", 1.0)
        est = pressure(system, phi, "finite_n", n=n, epsilon=eps)
        if mode == "finite_n":
            header, row = [], []
        header += ["n_steps", "epsilon_radius", "finite_n_estimate_nats", "bracket_lower_nats",
                   "bracket_upper_nats"]
        row += [n, eps, est.value, est.lower, est.upper]
    return Result(header, [row], consts)


def cmd_equilibrium(cfg: RunConfig) -> Result:
    from .transfer import conformal_measure, equilibrium_measure, perron, transfer_matrix
    system = build_system(cfg.system)
    phi = build_potential(system, cfg.potential)
    length = _param(cfg.params, "length", "params", 3, int)
    spec = perron(transfer_matrix(system, phi), cfg.tolerances["spectral"])
    mu = equilibrium_measure(system, phi, spectral=spec)
    nu = conformal_measure(system, phi, spectral=spec)
    from .symbolic import enumerate_words
    rows = [["".join(map(str, w)), mu.weight(w), nu.weight(w)] for w in enumerate_words(system, length)]
    return Result(["cylinder_word", "equilibrium_mass_prob", "conformal_mass_prob"], rows,
                  {"P": {"value": spec.pressure, "source": "log Perron eigenvalue"},
                   "lambda": {"value": spec.lam, "source": "Perron eigenvalue"},
                   "eigen_residual": {"value": spec.residual, "source": "power iteration"}})


def cmd_gibbs_check(cfg: RunConfig) -> Result:
    from .gibbs import gibbs_scan
    from .transfer import equilibrium_measure, perron, transfer_matrix
    system = build_system(cfg.system)
    phi = build_potential(system, cfg.potential)
    spec = perron(transfer_matrix(system, phi), cfg.tolerances["spectral"])
    mu = equilibrium_measure(system, phi, spectral=spec)
    offset = _param(cfg.params, "pressure_offset", "params", 0.0)
    eps = _param(cfg.params, "epsilon", "params", 1.0)
    n_max = _param(cfg.params, "n_max", "params", cfg.tolerances["cylinder_depth"], int)
    P = spec.pressure + offset
    ns, hi, lo = gibbs_scan(mu, phi, P, eps, n_max)
    rows = [[int(n), float(h), float(l), math.exp(h), math.exp(l)] for n, h, l in zip(ns, hi, lo)]
    K = float(max(np.max(hi), -np.min(lo)))
    return Result(["n_steps", "log_ratio_max_nats", "log_ratio_min_nats", "K_upper_ratio",
                   "K_lower_ratio"], rows,
                  {"P": {"value": P, "source": f"spectral pressure plus offset {offset}"},
                   "log_K": {"value": K, "source": "exhaustive cylinder scan"}})


def _orbit(cfg: RunConfig):
    from .maps import iterate_orbit, make_map
    spec = dict(cfg.map)
    kind = spec.pop("kind", None)
    if kind is None:
        raise InvalidParameter("map.kind: required")
    fmap = make_map(kind, **spec)
    length = _param(cfg.params, "length", "params", 100_000, int)
    if length < 1:
        raise InvalidParameter("params.length: must be positive")
    rng = np.random.default_rng(cfg.seed)
    x0 = float(cfg.params.get("x0", rng.uniform(0.0, 1.0)))
    return fmap, iterate_orbit(fmap, x0, length), x0


def cmd_hyp_times(cfg: RunConfig) -> Result:
    from .maps import default_c, hyperbolic_times
    fmap, trace, x0 = _orbit(cfg)
    c = cfg.params.get("c")
    c = default_c(fmap) if c is None else float(c)
    series = hyperbolic_times(trace, c)
    t = np.asarray(series.times)
    rows = [[int(n), (i + 1) / int(n)] for i, n in enumerate(t)]
    return Result(["hyperbolic_time_steps", "cumulative_frequency_ratio"], rows,
                  {"c": {"value": c, "source": "params.c" if "c" in cfg.params else "half mean log derivative"},
                   "theta": {"value": series.frequency, "source": "hyperbolic times / length"},
                   "x0": {"value": x0, "source": "seeded uniform draw" if "x0" not in cfg.params else "params.x0"}})


def cmd_zoom_times(cfg: RunConfig) -> Result:
    from .maps import Zoom, zooming_times
    fmap, trace, x0 = _orbit(cfg)
    delta = _param(cfg.params, "delta", "params", fmap.delta0)
    rate = _param(cfg.params, "rate", "params", 0.25)
    zoom = Zoom.exponential(rate)
    n_max = _param(cfg.params, "n_max", "params", min(trace.length, 2000), int)
    series = zooming_times(fmap, trace, zoom, delta, n_max)
    rows = [[int(n)] for n in series.times]
    return Result(["zooming_time_steps"], rows,
                  {"zoom_rate": {"value": rate, "source": "alpha_n(r) = exp(-rate n) r"},
                   "frequency": {"value": series.frequency, "source": "zooming times / n_max"},
                   "x0": {"value": x0, "source": "seeded uniform draw"}})


def cmd_skew(cfg: RunConfig) -> Result:
    from .skew import FiberPotential, SkewSystem, cohomology_tail, induce_base_potential, pressure_equality_check
    system = build_system(cfg.system)
    base = build_potential(system, cfg.potential)
    rate = _param(cfg.params, "fiber_rate", "params", 1 / 3)
    tau = cfg.params.get("fiber_translation", [0.0, 2 / 3])
    skew = SkewSystem(system, rate, tuple(tau))
    phi = FiberPotential.linear(base, _param(cfg.params, "fiber_slope", "params", 0.1))
    J = int(cfg.tolerances["J"])
    n = _param(cfg.params, "n", "params", 10, int)
    eps = _param(cfg.params, "epsilon", "params", 0.5)
    induced = induce_base_potential(skew, phi, J)
    cert = induced.certificate()
    rep = pressure_equality_check(skew, phi, J, n, eps)
    row = [J, n, cert.spread, cert.tail, rep.base.lower, rep.base.upper, rep.attractor_lower,
           rep.attractor_upper, rep.overlap]
    return Result(["J_terms", "n_steps", "fiber_spread_nats", "tail_bound_nats", "base_lower_nats",
                   "base_upper_nats", "attractor_lower_nats", "attractor_upper_nats", "brackets_overlap_flag"],
                  [row], {"J": {"value": J, "source": "tolerances.J"},
                          "tail": {"value": cohomology_tail(skew, phi, J), "source": "geometric tail of the cohomology series"}})


def cmd_ldp(cfg: RunConfig) -> Result:
    from .ldp import log_deviation_prob, pressure_curve, rate_function
    from .transfer import equilibrium_measure
    system = build_system(cfg.system)
    phi = build_potential(system, cfg.potential)
    psi = build_potential(system, cfg.psi or {"kind": "indicator", "symbol": 1}, "psi")
    c = _param(cfg.params, "c", "params")
    ns = cfg.params.get("ns", [100, 200, 400, 800])
    mu = equilibrium_measure(system, phi, cfg.tolerances["spectral"])
    curve = pressure_curve(system, phi, psi, np.linspace(0, 4, 9))
    I = rate_function(curve, c)
    rows = []
    for n in ns:
        lp = log_deviation_prob(system, mu, psi, c, int(n))
        rows.append([int(n), math.exp(lp), -lp / int(n), I.value])
    return Result(["n_steps", "prob", "minus_log_prob_over_n_nats", "legendre_I_nats"], rows,
                  {"t_star": {"value": I.t_star, "source": "golden-section Legendre minimizer"},
                   "P": {"value": curve.P0, "source": "spectral pressure of phi"}})


def cmd_glue(cfg: RunConfig) -> Result:
    from .ldp import glue_segments
    system = build_system(cfg.system)
    segs = cfg.params.get("segments")
    if not isinstance(segs, list) or not segs:
        raise InvalidParameter("params.segments: required non-empty list of symbol lists")
    res = glue_segments(system, segs)
    conns = [0] + list(res.connectors)
    rows = [[i, off, conns[i]] for i, off in enumerate(res.offsets)]
    return Result(["segment_index", "offset_symbols", "connector_before_symbols"], rows,
                  {"glued_word": {"value": "".join(map(str, res.word)), "source": "shortest lexicographic connectors"},
                   "connector_bound": {"value": res.bound, "source": "graph diameter minus one"}})


def cmd_katok(cfg: RunConfig) -> Result:
    from .ldp import katok_entropy, measure_entropy
    from .transfer import equilibrium_measure
    system = build_system(cfg.system)
    phi = build_potential(system, cfg.potential)
    mu = equilibrium_measure(system, phi, cfg.tolerances["spectral"])
    n = _param(cfg.params, "n", "params", 100, int)
    eps = _param(cfg.params, "epsilon", "params", 1.0)
    rho = _param(cfg.params, "rho", "params", 0.1)
    est = katok_entropy(mu, n, eps, rho)
    h = measure_entropy(mu)
    return Result(["n_steps", "epsilon_radius", "rho_mass", "log_count_nats", "katok_estimate_nats_per_step",
                   "entropy_nats"], [[n, eps, rho, est.log_count, est.value, h]],
                  {"entropy": {"value": h, "source": "-sum pi Q log Q"}})


HANDLERS = {"pressure": cmd_pressure, "equilibrium": cmd_equilibrium, "gibbs-check": cmd_gibbs_check,
            "hyp-times": cmd_hyp_times, "zoom-times": cmd_zoom_times, "skew": cmd_skew, "ldp": cmd_ldp,
            "glue": cmd_glue, "katok": cmd_katok}


# --- driver ------------------------------------------------------------------------------

def load_config(path: str | Path) -> RunConfig:
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InvalidParameter(f"config: cannot read {path}: {exc}")
    except yaml.YAMLError as exc:
        raise InvalidParameter(f"config: not valid YAML: {exc}")
    return RunConfig.from_mapping(raw)


def write_outputs(cfg: RunConfig, result: Result, base: Path) -> tuple:
    base.parent.mkdir(parents=True, exist_ok=True)
    table = base.with_name(base.name + ".csv")
    with open(table, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(result.header)
        for row in result.rows:
            writer.writerow([_fmt(v) for v in row])
    meta = {"config_sha256": cfg.digest(), "version": __version__, "command": cfg.command,
            "seed": cfg.seed, "tolerances": cfg.tolerances,
            "constants": {k: {kk: (_fmt(vv) if isinstance(vv, float) else vv) for kk, vv in v.items()}
                          for k, v in result.constants.items()}}
    sidecar = base.with_name(base.name + ".meta.json")
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
    return table, sidecar


def run(cfg: RunConfig, out_dir: str | Path | None = None) -> tuple:
    result = HANDLERS[cfg.command](cfg)
    base = Path(cfg.output)
    if out_dir is not None:
        base = Path(out_dir) / base.name
    return write_outputs(cfg, result, base)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="thermoform", description=__doc__.splitlines()[0])
    parser.add_argument("config", help="YAML run configuration")
    parser.add_argument("--seed", type=int, help="override the master RNG seed")
    parser.add_argument("--out", help="output directory (keeps the configured basename)")
    parser.add_argument("--tol", type=float, help="override the spectral tolerance")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise InvalidParameter("seed: must be a non-negative integer")
            cfg.seed = args.seed
        if args.tol is not None:
            if not args.tol > 0:
                raise InvalidParameter("tolerances.spectral: must be positive")
            cfg.tolerances["spectral"] = args.tol
        table, sidecar = run(cfg, args.out)
    except ThermoformError as exc:
        print(f"thermoform: error: {exc}", file=sys.stderr)
        return exc.exit_code
    log.info("wrote %s and %s", table, sidecar)
    return 0


if __name__ == "__main__":
    sys.exit(main())
