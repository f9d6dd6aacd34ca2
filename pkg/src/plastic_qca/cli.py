"""Batch runner: one subcommand per verification.

Exit codes: 0 success, 2 configuration error, 3 numerical-contract
violation.  Every command is deterministic for a fixed config and seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .errors import BoundsError, BudgetError, ConfigError, DomainError, NumericalError
from .evolution import evolve, write_observables_csv
from .fermions import build_hqca, build_hs, car_residuals, check_wtilde, mass_identity_check, write_triplets
from .gates import GateParams, GateVariant, scaling_params
from .gauge import GaugeField, gauge_commutator, gauge_field_from_json
from .lattice import BasisLabel, LatticeSpec, TruncationMode, basis_state, load_state, save_state
from .limits import dispersion_table, empirical_order, hamiltonian_convergence, walk_vs_qca

SCHEMA_VERSION = 1

EXIT_OK, EXIT_CONFIG, EXIT_CONTRACT = 0, 2, 3

UNITARY_TOL = 1e-12
CAR_TOL = 1e-14
IDENTITY_TOL = 1e-12

LATTICE_KEYS = {"num_sites", "cutoff", "truncation", "mass", "coupling", "speed", "epsilon", "alpha", "edge_phases", "max_dim"}

DEFAULT_LATTICE = {
    "evolve": {"num_sites": 4, "cutoff": 1},
    "converge": {"num_sites": 4, "cutoff": 2, "mass": 1.0, "coupling": 1.0, "speed": 1.0, "alpha": 1.0},
    "gauge-check": {"num_sites": 4, "cutoff": 1, "mass": 1.0, "coupling": 1.0},
    "dispersion": {"num_sites": 2, "cutoff": 1, "mass": 0.5, "speed": 0.8, "alpha": 0.0},
    "hamiltonian-check": {"num_sites": 4, "cutoff": 1, "mass": 1.0, "coupling": 1.0},
}


class ContractViolation(Exception):
    """A computed residual exceeds its tolerance."""


# ---------------------------------------------------------------------------
# serialization


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _json_text(obj: Any, indent: int = 0) -> str:
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_json_text(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{_json_text(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path: Path, obj: Any) -> None:
    """JSON with every float written to 17 significant digits."""
    path.write_text(_json_text(obj) + "\n")


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


# ---------------------------------------------------------------------------
# configuration


def load_config(path: str | None) -> dict:
    if path is None:
        return {"schema_version": SCHEMA_VERSION}
    try:
        config = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    version = config.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}; expected {SCHEMA_VERSION}")
    return config


def lattice_from_config(command: str, config: dict) -> LatticeSpec:
    fields = dict(DEFAULT_LATTICE[command])
    given = config.get("lattice", {})
    unknown = set(given) - LATTICE_KEYS
    if unknown:
        raise ConfigError(f"unknown lattice keys: {sorted(unknown)}")
    fields.update(given)
    try:
        return LatticeSpec(**fields)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def gate_from_config(spec: LatticeSpec, config: dict) -> GateParams:
    """Scaling parametrization from the lattice, or explicit angles when ``gate.theta`` is set."""
    gate = config.get("gate", {})
    variant = GateVariant(gate.get("variant", "W"))
    if "theta" in gate:
        return GateParams.from_angles(
            float(gate["theta"]),
            float(gate.get("zeta", 0.0)),
            delta_t=spec.epsilon,
            delta_x=spec.epsilon ** (1 - spec.alpha),
            variant=variant,
            corner_angle=float(gate.get("corner_angle", spec.epsilon ** (2 * spec.alpha))),
        )
    return scaling_params(spec.epsilon, spec.alpha, spec.speed, spec.mass, variant)


def spec_echo(spec: LatticeSpec) -> dict:
    return {
        "num_sites": spec.num_sites,
        "cutoff": spec.cutoff,
        "truncation": spec.truncation.value,
        "mass": spec.mass,
        "coupling": spec.coupling,
        "speed": spec.speed,
        "epsilon": spec.epsilon,
        "alpha": spec.alpha,
        "edge_phases": spec.edge_phases,
    }


def parallel_map(fn: Callable, items, threads: int) -> list:
    """Ordered map; results follow input order regardless of scheduling."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# commands


def cmd_evolve(config: dict, out: Path, seed: int, threads: int) -> None:
    spec = lattice_from_config("evolve", config)
    params = gate_from_config(spec, config)
    run = config.get("evolve", {})
    steps = int(run.get("steps", 10))
    if steps < 1:
        raise ConfigError("evolve.steps must be >= 1")
    if "snapshot" in run:
        state = load_state(run["snapshot"], max_dim=spec.max_dim)
        if state.spec.dim != spec.dim:
            raise ConfigError("snapshot does not match the configured lattice")
        state.spec = spec
    else:
        initial = run.get("initial", {})
        occupations = initial.get("occupations", [0] * spec.num_sites)
        links = initial.get("links", [0] * spec.num_links)
        try:
            state = basis_state(BasisLabel(tuple(occupations), tuple(links)), spec)
        except BoundsError as exc:
            raise ConfigError(f"bad initial label: {exc}") from None

    report = evolve(state, params, steps, record_every=int(run.get("record_every", 1)))
    write_observables_csv(report, out / "observables.csv", params.delta_t)
    save_state(out / "final_state.json", report.final)

    norm0 = state.norm()
    summary = {
        "schema_version": SCHEMA_VERSION,
        "command": "evolve",
        "config": config,
        "lattice": spec_echo(spec),
        "seed": seed,
        "steps": steps,
        "norm_drift": max(abs(n - norm0) for n in report.norms),
    }
    ones = [i for i, n in enumerate(state_occupations(config, spec)) if n]
    single_particle = "snapshot" not in run and len(ones) == 1 and spec.coupling == 0
    if single_particle and not any(run.get("initial", {}).get("links", [])):
        initial = np.zeros(spec.num_sites, dtype=complex)
        initial[ones[0]] = 1.0
        walk_steps = min(steps, spec.cutoff - 1)
        if walk_steps >= 1:
            summary["walk_check_steps"] = walk_steps
            summary["walk_deviation"] = walk_vs_qca(spec, params, walk_steps, initial)
    write_json(out / "summary.json", summary)

    if spec.truncation is TruncationMode.CYCLIC_WRAP and summary["norm_drift"] > UNITARY_TOL:
        raise ContractViolation(f"norm drift {summary['norm_drift']:.3e} in CyclicWrap mode")
    if summary.get("walk_deviation", 0.0) > UNITARY_TOL:
        raise ContractViolation(f"walk cross-check deviation {summary['walk_deviation']:.3e}")


def state_occupations(config: dict, spec: LatticeSpec) -> list[int]:
    return list(config.get("evolve", {}).get("initial", {}).get("occupations", [0] * spec.num_sites))


def cmd_converge(config: dict, out: Path, seed: int, threads: int) -> None:
    spec = lattice_from_config("converge", config)
    eps_list = [float(e) for e in config.get("converge", {}).get("eps_list", [0.1, 0.05, 0.025, 0.0125])]
    if len(eps_list) < 3:
        raise ConfigError("converge.eps_list needs at least 3 points for the fit")
    if len(set(eps_list)) != len(eps_list):
        raise ConfigError("converge.eps_list has repeated values")
    eps_list = sorted(eps_list, reverse=True)
    curve = hamiltonian_convergence(spec, eps_list)
    write_csv(out / "convergence.csv", ["epsilon", "residual"], curve.rows())
    write_json(
        out / "fit.json",
        {
            "schema_version": SCHEMA_VERSION,
            "command": "converge",
            "config": config,
            "lattice": spec_echo(spec),
            "seed": seed,
            "slope": curve.slope,
            "intercept": curve.intercept,
            "degenerate": curve.degenerate,
            "epsilons": curve.epsilons,
            "residuals": curve.residuals,
        },
    )


def cmd_gauge_check(config: dict, out: Path, seed: int, threads: int) -> None:
    spec = lattice_from_config("gauge-check", config)
    params = gate_from_config(spec, config)
    run = config.get("gauge", {})
    margin = int(run.get("margin", 0 if spec.truncation is TruncationMode.CYCLIC_WRAP else 1))
    draws = int(run.get("draws", 20))
    rng = np.random.default_rng(seed)

    fields: list[tuple[str, GaugeField]] = []
    if run.get("include_zero", True):
        fields.append(("zero", GaugeField.zero(spec.num_sites)))
    for item in run.get("fields", []):
        fields.append(("given", gauge_field_from_json(item, spec.cutoff)))
    for _ in range(draws):
        if spec.truncation is TruncationMode.CYCLIC_WRAP:
            integers = rng.integers(0, spec.link_dim, size=spec.num_sites)
            fields.append(("random", GaugeField.quantized(integers.tolist(), spec.cutoff)))
        else:
            fields.append(("random", GaugeField(rng.uniform(-math.pi, math.pi, size=spec.num_sites).tolist())))
    allow_unquantized = bool(run.get("allow_unquantized", False))
    if spec.truncation is TruncationMode.CYCLIC_WRAP and not allow_unquantized:
        for _, phi in fields:
            if not phi.is_quantized(spec.cutoff):
                raise ConfigError(f"gauge field {phi.angles} is not quantized for CyclicWrap")

    from .evolution import build_step

    G = build_step(spec, params)
    residuals = parallel_map(lambda f: gauge_commutator(f[1], spec, params, margin, allow_unquantized=allow_unquantized, G=G), fields, threads)
    records = [
        {"kind": kind, "angles": list(phi.angles), "residual": r} for (kind, phi), r in zip(fields, residuals)
    ]
    worst = max(residuals) if residuals else 0.0
    write_json(
        out / "gauge_report.json",
        {
            "schema_version": SCHEMA_VERSION,
            "command": "gauge-check",
            "config": config,
            "lattice": spec_echo(spec),
            "seed": seed,
            "margin": margin,
            "tolerance": UNITARY_TOL,
            "max_residual": worst,
            "draws": records,
        },
    )
    if worst >= UNITARY_TOL:
        raise ContractViolation(f"gauge commutator residual {worst:.3e} exceeds {UNITARY_TOL}")


def cmd_dispersion(config: dict, out: Path, seed: int, threads: int) -> None:
    spec = lattice_from_config("dispersion", config)
    run = config.get("dispersion", {})
    k_list = sorted(float(k) for k in run.get("k_list", [0.0, 0.1, 0.2, 0.3, 0.4, 0.5]))
    eps_list = sorted((float(e) for e in run.get("eps_list", [spec.epsilon])), reverse=True)
    tables = parallel_map(lambda e: dispersion_table(k_list, e, spec.speed, spec.mass), eps_list, threads)
    rows, max_errors = [], []
    for eps, table in zip(eps_list, tables):
        max_errors.append(max(r.error for r in table))
        for r in table:
            rows.append([eps, r.k, r.walk_plus, r.walk_minus, r.dirac_plus, r.dirac_minus, r.error])
    write_csv(
        out / "dispersion.csv",
        ["epsilon", "k", "omega_walk_plus", "omega_walk_minus", "omega_dirac_plus", "omega_dirac_minus", "error"],
        rows,
    )
    summary = {
        "schema_version": SCHEMA_VERSION,
        "command": "dispersion",
        "config": config,
        "lattice": spec_echo(spec),
        "seed": seed,
        "epsilons": eps_list,
        "max_error": max_errors,
    }
    if len(eps_list) > 1 and all(e > 0 for e in max_errors):
        summary["empirical_order"] = empirical_order(eps_list, max_errors)
    write_json(out / "dispersion_summary.json", summary)


def cmd_hamiltonian_check(config: dict, out: Path, seed: int, threads: int) -> None:
    spec = lattice_from_config("hamiltonian-check", config)
    run = config.get("hamiltonian", {})
    rng = np.random.default_rng(seed)

    identity = (build_hqca(spec) - build_hs(spec, 1.0)).frobenius_norm()
    car = car_residuals(spec)
    draws = int(run.get("wtilde_draws", 20))
    angle_draws = [(float(rng.uniform(0, math.pi / 2)), float(rng.uniform(-math.pi, math.pi))) for _ in range(draws)]
    wtilde = []
    for theta, zeta in angle_draws:
        params = GateParams.from_angles(theta, zeta)
        for p in range(spec.num_sites - 1):
            wtilde.append({"theta": theta, "zeta": zeta, "p": p, "residual": check_wtilde(spec, params, p)})
    mass = [{"p": p, "residual": mass_identity_check(spec, p)} for p in range(spec.num_sites - 1)]

    if run.get("export_triplets", False):
        write_triplets(build_hqca(spec), out / "h_qca_triplets.csv")
        write_triplets(build_hs(spec, 1.0), out / "h_s_triplets.csv")

    worst_car = max(max(r["mixed"], r["same"]) for r in car)
    worst_wtilde = max((r["residual"] for r in wtilde), default=0.0)
    worst_mass = max(r["residual"] for r in mass)
    write_json(
        out / "hamiltonian_report.json",
        {
            "schema_version": SCHEMA_VERSION,
            "command": "hamiltonian-check",
            "config": config,
            "lattice": spec_echo(spec),
            "seed": seed,
            "hqca_vs_hs": identity,
            "car_max": worst_car,
            "car": car,
            "wtilde_max": worst_wtilde,
            "wtilde": wtilde,
            "mass_identity": mass,
        },
    )
    failures = []
    if identity >= IDENTITY_TOL:
        failures.append(f"H_QCA - H_S = {identity:.3e}")
    if worst_car >= CAR_TOL:
        failures.append(f"CAR residual {worst_car:.3e}")
    if worst_wtilde >= IDENTITY_TOL:
        failures.append(f"gate fermionization residual {worst_wtilde:.3e}")
    if worst_mass >= IDENTITY_TOL:
        failures.append(f"mass identity residual {worst_mass:.3e}")
    if failures:
        raise ContractViolation("; ".join(failures))


COMMANDS = {
    "evolve": cmd_evolve,
    "converge": cmd_converge,
    "gauge-check": cmd_gauge_check,
    "dispersion": cmd_dispersion,
    "hamiltonian-check": cmd_hamiltonian_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plastic-qca", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file (defaults apply when omitted)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="RNG seed (overrides config 'seed')")
        p.add_argument("--threads", type=int, default=1, help="worker threads for parameter sweeps")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        seed = args.seed if args.seed is not None else int(config.get("seed", 0))
        if seed < 0:
            raise ConfigError("seed must be non-negative")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](config, out, seed, max(1, args.threads))
    except (ConfigError, DomainError, BudgetError, BoundsError, ValueError, KeyError, TypeError) as exc:
        print(f"config error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ContractViolation, NumericalError) as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
