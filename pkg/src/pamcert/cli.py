"""Command-line front end: certifications and parameter scans as CSV/JSON.

Subcommands: eta, certify-preparations, certify-measurements,
activation-scan, incompat-scan, rac.  Scans write CSV, single
certifications write JSON including the full strategy-weight certificate.
Every command is deterministic for a fixed --seed; grid points derive their
seeds as seed + point index, and outputs are written in grid order no
matter how many workers run.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import jsonschema

from . import geometry, incompatibility, witnesses
from .bloch import (
    BlochVector,
    HermitianOperator,
    MeasurementSet,
    Preparation,
    behavior_of,
    state_from_bloch,
)
from .certifier import (
    POVM_DEPOLARIZING_DEFAULT,
    CertificationResult,
    IterationConfig,
    SolverFailure,
    certify_measurements_pm,
    certify_measurements_povm,
    certify_preparations_pm,
    certify_preparations_povm,
)

SEED_ENV_VAR = "PAMCERT_SEED"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SOLVER = 3

_ITER_DEFAULTS = {
    "seed": 0,
    "batch_size": 2000,
    "max_iters": 200,
    "alpha_tol": 1e-6,
    "stall_rounds": 10,
    "guided_restarts": 16,
}

_SCHEMA_TYPES = {
    "seed": {"type": "integer", "minimum": 0},
    "batch_size": {"type": "integer", "minimum": 2},
    "max_iters": {"type": "integer", "minimum": 1},
    "alpha_tol": {"type": "number", "exclusiveMinimum": 0},
    "stall_rounds": {"type": "integer", "minimum": 1},
    "guided_restarts": {"type": "integer", "minimum": 0},
    "polyhedron": {"type": "string"},
    "eta": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
    "t": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
    "povm": {"type": "boolean"},
    "jobs": {"type": "integer", "minimum": 1},
    "out": {"type": "string"},
    "theta_points": {"type": "integer", "minimum": 1},
    "phi_points": {"type": "integer", "minimum": 1},
    "gap_tol": {"type": "number", "exclusiveMinimum": 0},
    "states": {"type": "string"},
    "measurements": {"type": "string"},
    "grid": {"type": "boolean"},
    "mirror_theta": {"type": "number"},
    "family_alpha": {"type": "number", "minimum": 0, "maximum": 1},
    "family_theta": {"type": "number"},
}


def _schema(keys) -> dict:
    return {
        "type": "object",
        "properties": {k: _SCHEMA_TYPES[k] for k in keys},
        "additionalProperties": False,
    }


CONFIG_SCHEMAS = {
    "eta": _schema(["polyhedron", "out"]),
    "certify-preparations": _schema(
        [
            "states", "grid", "theta_points", "phi_points", "polyhedron", "eta",
            "povm", "t", "seed", "batch_size", "max_iters", "alpha_tol",
            "stall_rounds", "guided_restarts", "jobs", "out",
        ]
    ),
    "certify-measurements": _schema(
        [
            "measurements", "mirror_theta", "polyhedron", "povm", "t",
            "seed", "batch_size", "max_iters", "alpha_tol", "stall_rounds",
            "guided_restarts", "out",
        ]
    ),
    "activation-scan": _schema(
        [
            "theta_points", "polyhedron", "seed", "batch_size", "max_iters",
            "alpha_tol", "stall_rounds", "guided_restarts", "jobs", "out",
        ]
    ),
    "incompat-scan": _schema(
        [
            "theta_points", "polyhedron", "gap_tol", "seed", "batch_size",
            "max_iters", "alpha_tol", "stall_rounds", "guided_restarts",
            "jobs", "out",
        ]
    ),
    "rac": _schema(["family_alpha", "family_theta", "states", "measurements", "out"]),
}


class CliError(Exception):
    """User-facing input problem; maps to exit code 2."""


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


def _round_floats(obj):
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def _write_output(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _emit_json(payload: dict, out: str | None) -> None:
    _write_output(json.dumps(_round_floats(payload), indent=2, sort_keys=True) + "\n", out)


def _emit_csv(header: list[str], rows: list[list], out: str | None) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    _write_output("\n".join(lines) + "\n", out)


def _load_json_file(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise CliError(f"cannot read JSON file {path}: {err}") from err


def _resolve_options(args, command: str) -> dict:
    """Layer defaults, env seed, --config values, then explicit CLI flags."""
    opts = dict(_ITER_DEFAULTS)
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            opts["seed"] = int(env)
        except ValueError as err:
            raise CliError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from err
    config_path = getattr(args, "config", None)
    if config_path:
        config = _load_json_file(config_path)
        if not isinstance(config, dict):
            raise CliError(f"config {config_path} must hold a JSON object")
        try:
            jsonschema.validate(config, CONFIG_SCHEMAS[command])
        except jsonschema.ValidationError as err:
            raise CliError(f"config {config_path} invalid: {err.message}") from err
        opts.update(config)
    for key, value in vars(args).items():
        if key in ("command", "config", "func"):
            continue
        if value is not None:
            opts[key] = value
    return opts


def _iteration_config(opts, seed: int) -> IterationConfig:
    return IterationConfig(
        batch_size=int(opts["batch_size"]),
        max_iters=int(opts["max_iters"]),
        stall_rounds=int(opts["stall_rounds"]),
        alpha_tol=float(opts["alpha_tol"]),
        seed=seed,
        guided_restarts=int(opts["guided_restarts"]),
    )


def _load_polyhedron(name_or_path: str) -> geometry.PolyhedronSpec:
    if name_or_path in geometry.KNOWN_POLYHEDRA:
        return geometry.polyhedron(name_or_path)
    try:
        return geometry.load_polyhedron(name_or_path)
    except (OSError, ValueError, json.JSONDecodeError) as err:
        raise CliError(f"bad polyhedron {name_or_path!r}: {err}") from err


def _parse_state(entry) -> HermitianOperator:
    if isinstance(entry, list):
        return state_from_bloch(np.asarray(entry, dtype=float), 2)
    if "re" in entry:
        return HermitianOperator.from_json(entry)
    if "coords" in entry:
        vec = BlochVector.from_json(entry)
        return state_from_bloch(vec)
    raise CliError(f"unrecognized state entry: {entry!r}")


def _load_states(path: str) -> list[HermitianOperator]:
    data = _load_json_file(path)
    if not isinstance(data, dict) or "states" not in data:
        raise CliError(f"{path}: expected an object with a 'states' list")
    try:
        return [_parse_state(e) for e in data["states"]]
    except ValueError as err:
        raise CliError(f"{path}: {err}") from err


def _load_measurements(path: str) -> list[MeasurementSet]:
    data = _load_json_file(path)
    try:
        if isinstance(data, dict) and "axes" in data:
            from .bloch import binary_measurement

            return [
                binary_measurement(np.asarray(a, dtype=float), label=i)
                for i, a in enumerate(data["axes"])
            ]
        if isinstance(data, dict) and "measurements" in data:
            out = []
            for i, m in enumerate(data["measurements"]):
                effects = tuple(HermitianOperator.from_json(e) for e in m["effects"])
                out.append(MeasurementSet(i, effects))
            return out
    except (KeyError, TypeError, ValueError) as err:
        raise CliError(f"{path}: {err}") from err
    raise CliError(f"{path}: expected an object with 'axes' or 'measurements'")


def _theta_grid(points: int) -> np.ndarray:
    return np.linspace(0.0, np.pi / 2, points)


def _result_payload(result: CertificationResult, seed: int, extra: dict | None = None) -> dict:
    payload = result.to_json()
    payload["seed"] = seed
    payload.update(extra or {})
    return payload


def _default_jobs() -> int:
    return os.cpu_count() or 1


def _map_tasks(worker, tasks, jobs: int):
    # Results come back in task order, so parallel runs stay deterministic.
    if jobs <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(worker, tasks))


# ---------------------------------------------------------------------------
# Workers (module level so they pickle for the process pool)
# ---------------------------------------------------------------------------


def _prep_point_worker(task) -> tuple:
    theta, phi, vertices, eta_override, povm, t, opts, seed = task
    spec = geometry.polyhedron("custom", vertices)
    states = [
        state_from_bloch(np.array([1.0, 0.0, 0.0]), 2),
        state_from_bloch(np.array([0.0, 0.0, 1.0]), 2),
        state_from_bloch(
            np.array(
                [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
            ),
            2,
        ),
    ]
    cfg = _iteration_config(opts, seed)
    result = _certify_states(states, spec, eta_override, povm, t, cfg)
    return theta, phi, result.alpha_star, result.eta_used, result.iterations, result.converged, seed


def _certify_states(states, spec, eta_override, povm, t, cfg) -> CertificationResult:
    from . import certifier

    if eta_override is None:
        if povm:
            return certify_preparations_povm(states, spec, t, cfg)
        return certify_preparations_pm(states, spec, cfg)
    probes = states if not povm else [certifier.inflate(s, t) for s in states]
    probe_meas = geometry.measurements_from_vertices(spec)
    return certifier.iterate_visibility(probes, probe_meas, eta_override, cfg)


def _activation_point_worker(task) -> tuple:
    theta, vertices, opts, seed = task
    spec = geometry.polyhedron("custom", vertices)
    fam = witnesses.ActivationFamily(1.0, theta)
    preps = witnesses.activation_preparations(fam)
    alpha_min = 1.0
    for j, triad in enumerate(itertools.combinations(range(4), 3)):
        cfg = _iteration_config(opts, seed + j)
        result = certify_preparations_pm([preps[i] for i in triad], spec, cfg)
        alpha_min = min(alpha_min, result.alpha_star)
    sin_theta = np.sin(theta)
    threshold = 1.0 if sin_theta * np.sqrt(2.0) <= 1.0 else 1.0 / (np.sqrt(2.0) * sin_theta)
    return theta, alpha_min, threshold, alpha_min > threshold


def _incompat_point_worker(task) -> tuple:
    theta, vertices, gap_tol, opts, seed = task
    spec = geometry.polyhedron("custom", vertices)
    meas = incompatibility.mirror_symmetric(theta)
    rob = incompatibility.robustness(meas, gap_tol)
    cfg = _iteration_config(opts, seed)
    bound = certify_measurements_pm(meas, spec, cfg).alpha_star
    # compare against the upper bracket so a positive flag is rigorous
    return theta, rob.chi_lower, bound, bound > rob.chi_upper


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_eta(args) -> int:
    opts = _resolve_options(args, "eta")
    spec = _load_polyhedron(opts.get("polyhedron", "icosahedron"))
    facets = geometry.convex_hull(spec.vertices)
    payload = {
        "polyhedron": opts.get("polyhedron", "icosahedron"),
        "vertices": int(len(spec.vertices)),
        "facets": int(facets.n_facets),
        "eta": geometry.inscribed_radius(facets),
    }
    _emit_json(payload, opts.get("out"))
    return EXIT_OK


def cmd_certify_preparations(args) -> int:
    opts = _resolve_options(args, "certify-preparations")
    seed = int(opts["seed"])
    spec = _load_polyhedron(opts.get("polyhedron", "icosahedron"))
    povm = bool(opts.get("povm", False))
    t = float(opts.get("t", POVM_DEPOLARIZING_DEFAULT))
    eta_override = opts.get("eta")
    if opts.get("grid"):
        thetas = _theta_grid(int(opts.get("theta_points", 21)))
        phis = _theta_grid(int(opts.get("phi_points", 21)))
        tasks = [
            (th, ph, spec.vertices, eta_override, povm, t, dict(opts), seed + i)
            for i, (th, ph) in enumerate(itertools.product(thetas, phis))
        ]
        rows = _map_tasks(_prep_point_worker, tasks, int(opts.get("jobs") or _default_jobs()))
        _emit_csv(
            ["theta", "phi", "alpha_star", "eta", "iterations", "converged", "seed"],
            [list(r) for r in rows],
            opts.get("out"),
        )
        return EXIT_OK
    if not opts.get("states"):
        raise CliError("provide --states FILE or --grid")
    states = _load_states(opts["states"])
    cfg = _iteration_config(opts, seed)
    result = _certify_states(states, spec, eta_override, povm, t, cfg)
    _emit_json(
        _result_payload(result, seed, {"povm": povm, "t": t if povm else 1.0}),
        opts.get("out"),
    )
    return EXIT_OK


def cmd_certify_measurements(args) -> int:
    opts = _resolve_options(args, "certify-measurements")
    seed = int(opts["seed"])
    spec = _load_polyhedron(opts.get("polyhedron", "rhombicuboctahedron"))
    if opts.get("mirror_theta") is not None:
        meas = incompatibility.mirror_symmetric(float(opts["mirror_theta"]))
    elif opts.get("measurements"):
        meas = _load_measurements(opts["measurements"])
    else:
        raise CliError("provide --measurements FILE or --mirror-theta VALUE")
    cfg = _iteration_config(opts, seed)
    povm = bool(opts.get("povm", False))
    t = float(opts.get("t", POVM_DEPOLARIZING_DEFAULT))
    if povm:
        result = certify_measurements_povm(meas, spec, t, cfg)
    else:
        result = certify_measurements_pm(meas, spec, cfg)
    _emit_json(
        _result_payload(result, seed, {"povm": povm, "t": t if povm else 1.0}),
        opts.get("out"),
    )
    return EXIT_OK


def cmd_activation_scan(args) -> int:
    opts = _resolve_options(args, "activation-scan")
    seed = int(opts["seed"])
    spec = _load_polyhedron(opts.get("polyhedron", "rhombicuboctahedron"))
    thetas = _theta_grid(int(opts.get("theta_points", 21)))
    tasks = [
        (th, spec.vertices, dict(opts), seed + 4 * i) for i, th in enumerate(thetas)
    ]
    rows = _map_tasks(_activation_point_worker, tasks, int(opts.get("jobs") or _default_jobs()))
    _emit_csv(
        ["theta", "alpha_star_triads", "alpha_s_threshold", "activation"],
        [list(r) for r in rows],
        opts.get("out"),
    )
    return EXIT_OK


def cmd_incompat_scan(args) -> int:
    opts = _resolve_options(args, "incompat-scan")
    seed = int(opts["seed"])
    spec = _load_polyhedron(opts.get("polyhedron", "rhombicuboctahedron"))
    gap_tol = float(opts.get("gap_tol", 1e-4))
    thetas = _theta_grid(int(opts.get("theta_points", 21)))
    tasks = [
        (th, spec.vertices, gap_tol, dict(opts), seed + i) for i, th in enumerate(thetas)
    ]
    rows = _map_tasks(_incompat_point_worker, tasks, int(opts.get("jobs") or _default_jobs()))
    _emit_csv(
        ["theta", "chi_star", "classicality_lower_bound", "gap_positive"],
        [list(r) for r in rows],
        opts.get("out"),
    )
    return EXIT_OK


def cmd_rac(args) -> int:
    opts = _resolve_options(args, "rac")
    if opts.get("states") or opts.get("measurements"):
        if not (opts.get("states") and opts.get("measurements")):
            raise CliError("rac with files needs both --states and --measurements")
        states = _load_states(opts["states"])
        meas = _load_measurements(opts["measurements"])
        try:
            preps = [Preparation(i, s) for i, s in enumerate(states)]
            beh = behavior_of(preps, meas)
            s_val = witnesses.s_value(beh)
            direct = witnesses.rac_success_from_behavior(beh)
        except ValueError as err:
            raise CliError(str(err)) from err
        payload = {
            "s_value": s_val,
            "rac_success": witnesses.rac_success(s_val),
            "rac_success_direct": direct,
        }
    else:
        alpha = float(opts.get("family_alpha", 1.0))
        theta = float(opts.get("family_theta", np.pi / 2))
        try:
            fam = witnesses.ActivationFamily(alpha, theta)
            beh = behavior_of(
                witnesses.activation_preparations(fam), witnesses.activation_measurements()
            )
        except ValueError as err:
            raise CliError(str(err)) from err
        s_val = witnesses.s_value(beh)
        payload = {
            "family_alpha": alpha,
            "family_theta": theta,
            "s_value": s_val,
            "s_analytic": witnesses.analytic_s(alpha, theta),
            "rac_success": witnesses.rac_success(s_val),
            "rac_success_direct": witnesses.rac_success_from_behavior(beh),
        }
    _emit_json(payload, opts.get("out"))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_common(parser, grid: bool = False, jobs: bool = True) -> None:
    parser.add_argument("--config", help="JSON config file validated against the published schema")
    parser.add_argument("--seed", type=int, default=None,
                        help=f"RNG seed (default 0; env {SEED_ENV_VAR} as fallback)")
    parser.add_argument("--batch-size", dest="batch_size", type=int, default=None,
                        help="active strategy set size per round (default 2000)")
    parser.add_argument("--max-iters", dest="max_iters", type=int, default=None,
                        help="iteration cap for the active-set loop (default 200)")
    parser.add_argument("--alpha-tol", dest="alpha_tol", type=float, default=None,
                        help="stall threshold on visibility change (default 1e-6)")
    parser.add_argument("--stall-rounds", dest="stall_rounds", type=int, default=None,
                        help="consecutive stalled rounds before stopping (default 10)")
    parser.add_argument("--guided-restarts", dest="guided_restarts", type=int, default=None,
                        help="dual-guided pricing candidates per round, 0 disables (default 16)")
    parser.add_argument("--out", default=None, help="output path (default stdout)")
    if jobs:
        parser.add_argument("--jobs", type=int, default=None,
                            help="worker processes for grid scans (default: CPU count)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pamcert",
        description="Certify classical reproducibility of prepare-and-measure statistics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eta", help="inscribed-ball radius of a probe polyhedron")
    p.add_argument("--polyhedron", default=None,
                   help="octahedron|icosahedron|rhombicuboctahedron|tetrahedron or JSON path (default icosahedron)")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int, default=None, help=argparse.SUPPRESS)
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.set_defaults(func=cmd_eta)

    p = sub.add_parser("certify-preparations", help="maximum classical visibility of a state set")
    p.add_argument("--states", default=None, help="JSON file with a 'states' list")
    p.add_argument("--grid", action="store_const", const=True, default=None,
                   help="scan the {x, z, r(theta, phi)} family instead of reading states")
    p.add_argument("--theta-points", dest="theta_points", type=int, default=None,
                   help="grid points for theta in [0, pi/2] (default 21)")
    p.add_argument("--phi-points", dest="phi_points", type=int, default=None,
                   help="grid points for phi in [0, pi/2] (default 21)")
    p.add_argument("--polyhedron", default=None, help="probe polyhedron (default icosahedron)")
    p.add_argument("--eta", type=float, default=None,
                   help="override the inscribed radius (for externally supplied probes)")
    p.add_argument("--povm", action="store_const", const=True, default=None,
                   help="certify against all generalized measurements")
    p.add_argument("--t", type=float, default=None,
                   help=f"depolarizing strength for --povm (default {POVM_DEPOLARIZING_DEFAULT:.6f})")
    _add_common(p)
    p.set_defaults(func=cmd_certify_preparations)

    p = sub.add_parser("certify-measurements", help="maximum certified-classical noise weight of a measurement set")
    p.add_argument("--measurements", default=None, help="JSON file with 'axes' or 'measurements'")
    p.add_argument("--mirror-theta", dest="mirror_theta", type=float, default=None,
                   help="use the mirror-symmetric triple at this angle")
    p.add_argument("--polyhedron", default=None, help="probe polyhedron (default rhombicuboctahedron)")
    p.add_argument("--povm", action="store_const", const=True, default=None,
                   help="certify generalized-measurement classicality")
    p.add_argument("--t", type=float, default=None,
                   help=f"depolarizing strength for --povm (default {POVM_DEPOLARIZING_DEFAULT:.6f})")
    _add_common(p, jobs=False)
    p.set_defaults(func=cmd_certify_measurements)

    p = sub.add_parser("activation-scan", help="triad classicality versus the witness threshold")
    p.add_argument("--theta-points", dest="theta_points", type=int, default=None,
                   help="grid points for theta in [0, pi/2] (default 21)")
    p.add_argument("--polyhedron", default=None, help="probe polyhedron (default rhombicuboctahedron)")
    _add_common(p)
    p.set_defaults(func=cmd_activation_scan)

    p = sub.add_parser("incompat-scan", help="incompatibility robustness versus measurement classicality")
    p.add_argument("--theta-points", dest="theta_points", type=int, default=None,
                   help="grid points for theta in [0, pi/2] (default 21)")
    p.add_argument("--polyhedron", default=None, help="probe polyhedron (default rhombicuboctahedron)")
    p.add_argument("--gap-tol", dest="gap_tol", type=float, default=None,
                   help="bisection bracket width for chi* (default 1e-4)")
    _add_common(p)
    p.set_defaults(func=cmd_incompat_scan)

    p = sub.add_parser("rac", help="witness value and random access code success probability")
    p.add_argument("--family-alpha", dest="family_alpha", type=float, default=None,
                   help="shrink factor of the planar family (default 1.0)")
    p.add_argument("--family-theta", dest="family_theta", type=float, default=None,
                   help="opening angle of the planar family (default pi/2)")
    p.add_argument("--states", default=None, help="JSON states file (with --measurements)")
    p.add_argument("--measurements", default=None, help="JSON measurements file (with --states)")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int, default=None, help=argparse.SUPPRESS)
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.set_defaults(func=cmd_rac)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except SolverFailure as err:
        print(f"solver failure: {err}", file=sys.stderr)
        json.dump({"error": str(err), "partial_trace": err.trace}, sys.stderr)
        print(file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
