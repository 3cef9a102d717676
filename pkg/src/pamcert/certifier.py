"""Classicality certification by linear programming over strategy polytopes.

The central question: given quantum preparations probed by a finite set of
measurements (or measurements probed by a finite set of preparations), what
is the largest visibility at which the observed behavior admits a classical
message-passing model?  A visibility of 1 certifies classicality of the full
strength objects for every measurement (respectively preparation), via the
inscribed-ball shrink factor eta of the probe polyhedron.

The LP matches the probe behavior, inflated by the visibility-over-eta
ratio, against convex mixtures of deterministic strategies.  For strategy
spaces too large to enumerate, an active set of bounded size is optimized
and refreshed each round: strategies with nonzero weight are retained, the
rest replaced by fresh uniform draws and, by default, by columns suggested
by the LP duals (exact pricing when the encoding space is enumerable, an
alternating ascent heuristic otherwise).  The optimum over rounds is
non-decreasing and always a valid lower bound on the true maximum
visibility.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from . import geometry, strategies
from .bloch import (
    HermitianOperator,
    MeasurementSet,
    Preparation,
    depolarize,
    inflate,
    state_from_bloch,
    trace_product,
)

# A visibility this close to 1 counts as a full classicality certificate.
FEASIBILITY_TOL = 1e-7

# Depolarization strength sufficient to make any qubit POVM projective
# simulable; slightly below sqrt(2/3).
POVM_DEPOLARIZING_DEFAULT = float(np.sqrt(2.0 / 3.0)) - 1e-6

_WEIGHT_REPORT_FLOOR = 1e-12
_PRICING_TOL = 1e-9
_EXACT_PRICING_LIMIT = 4096


class Verdict(enum.Enum):
    """Certification outcome; the method is sufficient-only, so a failed
    certificate never asserts non-classicality."""

    CERTIFIED_CLASSICAL = "certified_classical"
    UNDECIDED = "undecided"


class SolverFailure(RuntimeError):
    """LP backend failed for numerical reasons (not a genuine infeasibility)."""

    def __init__(self, message: str, trace: list[float] | None = None):
        super().__init__(message)
        self.trace = list(trace or [])


@dataclass
class LpProblem:
    """min objective . x  subject to  a_eq x = b_eq and box bounds."""

    objective: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    bounds: list[tuple[float, float | None]]


def solve_lp(problem: LpProblem):
    """Default LP backend (HiGHS).  Returns (status, primal, dual_eq)."""
    res = linprog(
        problem.objective,
        A_eq=problem.a_eq,
        b_eq=problem.b_eq,
        bounds=problem.bounds,
        method="highs",
    )
    if res.status == 0:
        return "optimal", res.x, res.eqlin.marginals
    if res.status == 2:
        return "infeasible", None, None
    return f"failure ({res.message})", None, None


@dataclass(frozen=True)
class IterationConfig:
    """Controls for the active-set exploration.

    batch_size is the active strategy count per round; it must leave a
    margin above the number of behavior entries so an optimal basis fits.
    guided_restarts sets how many dual-guided candidate columns are
    generated per round; 0 disables pricing and refills with uniform draws
    only.
    """

    batch_size: int = 2000
    max_iters: int = 200
    stall_rounds: int = 10
    alpha_tol: float = 1e-6
    seed: int = 0
    weight_floor: float = 1e-9
    guided_restarts: int = 16

    def __post_init__(self):
        if self.batch_size < 2 or self.max_iters < 1 or self.stall_rounds < 1:
            raise ValueError("batch_size, max_iters and stall_rounds must be positive")
        if self.alpha_tol <= 0 or self.weight_floor < 0 or self.guided_restarts < 0:
            raise ValueError("invalid tolerance or restart count")


@dataclass
class CertificationResult:
    """Outcome of a visibility maximization.

    alpha_star is the best certified visibility (a lower bound on the true
    optimum unless termination is 'proven'), weights the supporting
    strategy mixture keyed by canonical strategy index, trace the
    per-round optimum.
    """

    alpha_star: float
    weights: dict[int, float]
    iterations: int
    trace: list[float]
    converged: bool
    eta_used: float
    termination: str = "stalled"

    @property
    def verdict(self) -> Verdict:
        if self.alpha_star >= 1.0 - FEASIBILITY_TOL:
            return Verdict.CERTIFIED_CLASSICAL
        return Verdict.UNDECIDED

    def to_json(self) -> dict:
        return {
            "alpha_star": self.alpha_star,
            "weights": {str(k): v for k, v in self.weights.items()},
            "iterations": self.iterations,
            "trace": list(self.trace),
            "converged": self.converged,
            "eta_used": self.eta_used,
            "termination": self.termination,
            "verdict": self.verdict.value,
        }


def _state_of(obj) -> HermitianOperator:
    return obj.state if isinstance(obj, Preparation) else obj


def probe_operators_preparations(preps, eta: float) -> list[HermitianOperator]:
    """Inflated probe operators O_x with rho_x = eta O_x + (1 - eta) I/d."""
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must lie in (0, 1]")
    return [inflate(_state_of(p), eta) for p in preps]


def probe_operators_measurements(meas: Sequence[MeasurementSet], eta: float) -> list[HermitianOperator]:
    """Inflated effect operators, flattened in (measurement, outcome) order.

    Requires rank-1 projective effects, for which the inflation keeps unit
    trace.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must lie in (0, 1]")
    out = []
    for m in meas:
        for e in m.effects:
            if abs(e.trace() - 1.0) > 1e-6 or np.max(
                np.abs(e.entries @ e.entries - e.entries)
            ) > 1e-6:
                raise ValueError(f"measurement {m.label}: effect is not a rank-1 projector")
            out.append(inflate(e, eta))
    return out


def _target_tensor(states: Sequence[HermitianOperator], meas: Sequence[MeasurementSet]) -> np.ndarray:
    """Raw trace table tr(M_{b|y} s_x); unclipped, probe operators allowed."""
    n_b = meas[0].n_outcomes
    table = np.empty((n_b, len(states), len(meas)))
    for x, s in enumerate(states):
        for y, m in enumerate(meas):
            if m.n_outcomes != n_b:
                raise ValueError("all measurements must share the same outcome count")
            for b, e in enumerate(m.effects):
                table[b, x, y] = trace_product(e, s)
    return table


def _noise_rows(meas: Sequence[MeasurementSet], d: int, n_x: int) -> np.ndarray:
    """Fully depolarized behavior tr(M_{b|y})/d, broadcast over x."""
    n_b = meas[0].n_outcomes
    anchor = np.empty((n_b, len(meas)))
    for y, m in enumerate(meas):
        for b, e in enumerate(m.effects):
            anchor[b, y] = e.trace() / d
    return np.broadcast_to(anchor[:, None, :], (n_b, n_x, len(meas))).copy()


def _assemble_lp(p_q: np.ndarray, noise: np.ndarray, eta: float, columns: np.ndarray) -> LpProblem:
    rows, n = columns.shape
    g = (p_q.ravel() - noise.ravel()) / eta
    a_eq = np.zeros((rows + 1, n + 1))
    a_eq[:rows, :n] = columns
    a_eq[:rows, n] = -g
    a_eq[rows, :n] = 1.0
    b_eq = np.concatenate([noise.ravel(), [1.0]])
    objective = np.zeros(n + 1)
    objective[n] = -1.0  # maximize the visibility variable
    bounds = [(0.0, None)] * n + [(0.0, 1.0)]
    return LpProblem(objective, a_eq, b_eq, bounds)


def _run_lp(p_q, noise, eta, columns, solver, trace_so_far=None):
    out = solver(_assemble_lp(p_q, noise, eta, columns))
    status, x = out[0], out[1]
    duals = out[2] if len(out) > 2 else None
    if status != "optimal" or x is None:
        raise SolverFailure(f"LP solver returned status {status!r}", trace_so_far)
    n = columns.shape[1]
    return float(x[n]), np.asarray(x[:n]), duals


def _infer_scenario(preps, probe_meas, strat_list) -> strategies.Scenario:
    first = strat_list[0]
    return strategies.Scenario(
        nX=len(preps),
        nY=len(probe_meas),
        nA=first.dec.shape[0],
        nB=probe_meas[0].n_outcomes,
    )


def solve_visibility(preps, probe_meas, eta: float, strats, *, solver=solve_lp):
    """One-shot visibility LP over an explicit strategy list.

    Returns (alpha, weights) where weights maps canonical strategy indices
    to the optimal mixture.  With the full strategy enumeration this is the
    exact maximum visibility for the probe set.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must lie in (0, 1]")
    strat_list = list(strats)
    if not strat_list:
        raise ValueError("strategy list must be non-empty")
    scen = _infer_scenario(preps, probe_meas, strat_list)
    states = [_state_of(p) for p in preps]
    p_q = _target_tensor(states, probe_meas)
    noise = _noise_rows(probe_meas, states[0].dim, len(states))
    columns = strategies.behavior_columns(scen, strat_list)
    alpha, w, _ = _run_lp(p_q, noise, eta, columns, solver)
    weights = {
        strategies.to_index(scen, strat_list[i]): float(w[i])
        for i in np.nonzero(w > _WEIGHT_REPORT_FLOOR)[0]
    }
    return alpha, weights


def check_feasibility(preps, probe_meas, eta: float, strats, *, solver=solve_lp):
    """Feasibility reading of the visibility LP: classical at full strength?"""
    alpha, weights = solve_visibility(preps, probe_meas, eta, strats, solver=solver)
    return alpha >= 1.0 - FEASIBILITY_TOL, weights


# ---------------------------------------------------------------------------
# Active-set iteration
# ---------------------------------------------------------------------------


def _constant_strategy_indices(s: strategies.Scenario) -> list[int]:
    out = []
    for b in range(s.nB):
        enc = np.zeros(s.nX, dtype=np.int64)
        dec = np.full((s.nA, s.nY), b, dtype=np.int64)
        out.append(strategies.to_index(s, strategies.DeterministicStrategy(enc, dec)))
    return out


def _noise_seed_indices(noise: np.ndarray, s: strategies.Scenario) -> list[int]:
    # Quantile-coupled deterministic functions y -> b whose mixture equals the
    # noise anchor exactly; guarantees feasibility of the LP at visibility 0.
    cums = [np.concatenate([[0.0], np.cumsum(noise[:, 0, y])]) for y in range(s.nY)]
    cuts = sorted(set(float(c) for cum in cums for c in cum if 0.0 < c < 1.0))
    points = [(a + b) / 2 for a, b in zip([0.0] + cuts, cuts + [1.0])]
    out = []
    for u in points:
        dec = np.empty((s.nA, s.nY), dtype=np.int64)
        for y in range(s.nY):
            dec[:, y] = min(int(np.searchsorted(cums[y], u, side="right") - 1), s.nB - 1)
        enc = np.zeros(s.nX, dtype=np.int64)
        out.append(strategies.to_index(s, strategies.DeterministicStrategy(enc, dec)))
    return out


def _staircase_seed_indices(p_q: np.ndarray, s: strategies.Scenario) -> list[int]:
    # Threshold strategies along each probe column; good warm starts when the
    # optimum rides the boundary of the polytope.
    if s.nA < 2:
        return []
    out = []
    for y in range(s.nY):
        order = np.argsort(-p_q[0, :, y], kind="stable")
        for k in range(s.nX + 1):
            enc = np.ones(s.nX, dtype=np.int64)
            enc[order[:k]] = 0
            dec = np.zeros((s.nA, s.nY), dtype=np.int64)
            dec[1] = s.nB - 1
            out.append(strategies.to_index(s, strategies.DeterministicStrategy(enc, dec)))
    return out


def _best_dec_for_enc(dual_cube: np.ndarray, enc: np.ndarray, s: strategies.Scenario):
    dec = np.zeros((s.nA, s.nY), dtype=np.int64)
    value = 0.0
    for a in range(s.nA):
        members = np.nonzero(enc == a)[0]
        if len(members):
            contrib = dual_cube[:, members, :].sum(axis=1)  # (nB, nY)
            dec[a] = np.argmax(contrib, axis=0)
            value += float(contrib.max(axis=0).sum())
    return dec, value


def _price_exact(dual_cube, mu, s):
    candidates = []
    for e in range(s.nA**s.nX):
        enc = np.empty(s.nX, dtype=np.int64)
        t = e
        for x in range(s.nX):
            enc[x] = t % s.nA
            t //= s.nA
        dec, value = _best_dec_for_enc(dual_cube, enc, s)
        candidates.append((value + mu, enc, dec))
    return candidates


def _price_heuristic(dual_cube, mu, s, rng, restarts, warm_encs):
    x_ar = np.arange(s.nX)[:, None]
    y_ar = np.arange(s.nY)[None, :]
    found = []
    starts = [rng.integers(0, s.nA, size=s.nX) for _ in range(restarts)]
    starts += [np.asarray(e) for e in warm_encs]
    for enc in starts:
        enc = enc.copy()
        prev = -np.inf
        while True:
            dec, value = _best_dec_for_enc(dual_cube, enc, s)
            if value <= prev + 1e-12:
                break
            prev = value
            scores = np.stack(
                [dual_cube[dec[a][None, :], x_ar, y_ar].sum(axis=1) for a in range(s.nA)],
                axis=1,
            )
            enc = np.argmax(scores, axis=1)
        found.append((prev + mu, enc, dec))
    return found


def _iterate_engine(p_q, noise, eta, scen, cfg, solver) -> CertificationResult:
    population = strategies.count(scen)
    rows = scen.n_entries
    if cfg.batch_size < rows + 2 and cfg.batch_size < population:
        raise ValueError(
            f"batch_size {cfg.batch_size} is below the behavior dimension margin {rows + 2}"
        )
    batch = min(cfg.batch_size, population)
    exact_pricing = cfg.guided_restarts > 0 and scen.nA**scen.nX <= _EXACT_PRICING_LIMIT

    rng = np.random.default_rng(cfg.seed)
    active: dict[int, None] = {}
    for k in _noise_seed_indices(noise, scen):
        active.setdefault(k, None)
    for k in _constant_strategy_indices(scen):
        active.setdefault(k, None)
    if cfg.guided_restarts > 0:
        for k in _staircase_seed_indices(p_q, scen):
            active.setdefault(k, None)
    trace: list[float] = []
    stall = 0
    weights_vec = np.zeros(0)
    idx_arr: list[int] = []
    termination = "max_iters"
    converged = False

    for _ in range(cfg.max_iters):
        room = min(batch, population) - len(active)
        if room > 0:
            for k in strategies.draw_indices(scen, room, rng, exclude=active.keys()):
                active[k] = None
        idx_arr = list(active.keys())
        columns = strategies.behavior_columns(scen, idx_arr)
        alpha, weights_vec, duals = _run_lp(p_q, noise, eta, columns, solver, trace)
        trace.append(alpha)

        candidates = []
        if cfg.guided_restarts > 0 and duals is not None:
            dual_cube = np.asarray(duals[:rows]).reshape(scen.nB, scen.nX, scen.nY)
            mu = float(duals[rows])
            if exact_pricing:
                candidates = _price_exact(dual_cube, mu, scen)
                if max(c[0] for c in candidates) <= _PRICING_TOL:
                    termination = "proven"
                    converged = True
                    break
            else:
                support = np.nonzero(weights_vec > cfg.weight_floor)[0][:8]
                warm_encs, _ = (
                    strategies.decode_indices(scen, [idx_arr[i] for i in support])
                    if len(support)
                    else (np.zeros((0, scen.nX), dtype=np.int64), None)
                )
                candidates = _price_heuristic(
                    dual_cube, mu, scen, rng, cfg.guided_restarts, list(warm_encs)
                )

        if len(trace) > 1 and alpha - trace[-2] < cfg.alpha_tol:
            stall += 1
        else:
            stall = 0
        if stall >= cfg.stall_rounds:
            termination = "stalled"
            converged = True
            break

        retained = [idx_arr[i] for i in np.nonzero(weights_vec > cfg.weight_floor)[0]]
        active = {k: None for k in retained}
        for value, enc, dec in candidates:
            if value > _PRICING_TOL:
                k = strategies.to_index(scen, strategies.DeterministicStrategy(enc, dec))
                active.setdefault(k, None)

    weights = {
        idx_arr[i]: float(weights_vec[i])
        for i in np.nonzero(weights_vec > _WEIGHT_REPORT_FLOOR)[0]
    }
    return CertificationResult(
        alpha_star=trace[-1],
        weights=weights,
        iterations=len(trace),
        trace=trace,
        converged=converged,
        eta_used=eta,
        termination=termination,
    )


def iterate_visibility(preps, probe_meas, eta: float, cfg: IterationConfig | None = None, *, solver=solve_lp) -> CertificationResult:
    """Maximize visibility by iterating the LP over bounded active sets.

    Each round keeps the strategies carrying weight above the floor and
    replaces the rest; the recorded optimum never decreases.  Termination is
    'proven' when exact pricing certifies no strategy can improve the LP,
    'stalled' after stall_rounds rounds of change below alpha_tol, or
    'max_iters'.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must lie in (0, 1]")
    cfg = cfg or IterationConfig()
    states = [_state_of(p) for p in preps]
    d = states[0].dim
    p_q = _target_tensor(states, probe_meas)
    noise = _noise_rows(probe_meas, d, len(states))
    scen = strategies.Scenario(
        nX=len(states), nY=len(probe_meas), nA=d, nB=probe_meas[0].n_outcomes
    )
    return _iterate_engine(p_q, noise, eta, scen, cfg, solver)


# ---------------------------------------------------------------------------
# Certification entry points
# ---------------------------------------------------------------------------


def _resolve_polyhedron(poly) -> geometry.PolyhedronSpec:
    if isinstance(poly, geometry.PolyhedronSpec):
        return poly
    return geometry.polyhedron(poly)


def _require_qubits(states: Sequence[HermitianOperator]) -> None:
    if any(s.dim != 2 for s in states):
        raise ValueError("polyhedron-based certification supports qubits only")


def certify_preparations_pm(preps, poly, cfg: IterationConfig | None = None, *, solver=solve_lp) -> CertificationResult:
    """Certify preparations against every projective measurement.

    The probe measurements sit at the antipodal vertex pairs of the
    polyhedron and eta is its inscribed-ball radius.  alpha_star >= 1 means
    the preparations at full strength can only produce classically
    reproducible statistics under arbitrary projective measurements.
    """
    spec = _resolve_polyhedron(poly)
    states = [_state_of(p) for p in preps]
    _require_qubits(states)
    probe_meas = geometry.measurements_from_vertices(spec)
    eta = geometry.inscribed_radius(geometry.convex_hull(spec.vertices))
    return iterate_visibility(states, probe_meas, eta, cfg, solver=solver)


def certify_preparations_povm(
    preps,
    poly,
    t: float = POVM_DEPOLARIZING_DEFAULT,
    cfg: IterationConfig | None = None,
    *,
    solver=solve_lp,
) -> CertificationResult:
    """Certify preparations against every generalized measurement.

    Runs the projective certificate on the inflated probes rho/t; success at
    visibility alpha extends classicality of the alpha-weakened
    preparations from projective measurements to all POVMs.  At t = 1 this
    reduces exactly to :func:`certify_preparations_pm`.
    """
    if not 0.0 < t <= 1.0:
        raise ValueError("depolarizing strength t must lie in (0, 1]")
    states = [_state_of(p) for p in preps]
    _require_qubits(states)
    probes = [inflate(s, t) for s in states]
    return certify_preparations_pm(probes, poly, cfg, solver=solver)


def certify_measurements_pm(meas, probe_poly, cfg: IterationConfig | None = None, *, solver=solve_lp) -> CertificationResult:
    """Certify measurements against every preparation set.

    Pure probe states sit at all vertices of the polyhedron; eta is its
    inscribed-ball radius.  alpha_star is the largest noise weight chi for
    which the chi-depolarized measurements certifiedly cannot generate
    non-classical statistics, whatever preparations they act on.
    """
    spec = _resolve_polyhedron(probe_poly)
    meas = list(meas)
    if any(m.dim != 2 for m in meas):
        raise ValueError("polyhedron-based certification supports qubits only")
    probe_states = [state_from_bloch(v, 2) for v in spec.vertices]
    eta = geometry.inscribed_radius(geometry.convex_hull(spec.vertices))
    cfg = cfg or IterationConfig()
    p_q = _target_tensor(probe_states, meas)
    noise = _noise_rows(meas, 2, len(probe_states))
    scen = strategies.Scenario(
        nX=len(probe_states), nY=len(meas), nA=2, nB=meas[0].n_outcomes
    )
    result = _iterate_engine(p_q, noise, eta, scen, cfg, solver)
    return result


def certify_measurements_povm(
    meas,
    probe_poly,
    t: float = POVM_DEPOLARIZING_DEFAULT,
    cfg: IterationConfig | None = None,
    *,
    solver=solve_lp,
) -> CertificationResult:
    """Certify generalized measurements against every preparation.

    The effects are depolarized by t (making them projective simulable for
    qubits at the default strength) and probed with operators inflated onto
    the 1/t ball; self-duality makes the probe statistics equal those of the
    original effects on the unit sphere.  At t = 1 this reduces exactly to
    :func:`certify_measurements_pm`.
    """
    if not 0.0 < t <= 1.0:
        raise ValueError("depolarizing strength t must lie in (0, 1]")
    spec = _resolve_polyhedron(probe_poly)
    meas = list(meas)
    if any(m.dim != 2 for m in meas):
        raise ValueError("polyhedron-based certification supports qubits only")
    smeared = [
        MeasurementSet(m.label, tuple(depolarize(e, t) for e in m.effects)) for m in meas
    ]
    probes = [inflate(state_from_bloch(v, 2), t) for v in spec.vertices]
    eta = geometry.inscribed_radius(geometry.convex_hull(spec.vertices))
    cfg = cfg or IterationConfig()
    p_q = _target_tensor(probes, smeared)
    noise = _noise_rows(smeared, 2, len(probes))
    scen = strategies.Scenario(nX=len(probes), nY=len(smeared), nA=2, nB=meas[0].n_outcomes)
    return _iterate_engine(p_q, noise, eta, scen, cfg, solver)
