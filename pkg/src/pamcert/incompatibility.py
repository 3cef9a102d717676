"""Joint measurability of binary qubit measurements and its noise robustness.

A set of measurements is jointly measurable when a single parent measurement
J_l, indexed by outcome tuples l, reproduces every member as a marginal.
For binary qubit measurements each parent effect J = (s I + u . sigma) / 2
is positive semidefinite exactly when s >= |u|, so existence of a parent for
the noise-mixed set chi M + (1 - chi) I/2 is a small second-order cone
feasibility problem.  The robustness chi* is located by bisection over chi.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import cvxpy as cp

from .bloch import (
    HermitianOperator,
    MeasurementSet,
    binary_measurement,
    generators,
)

_FEAS_MARGIN = -1e-9
_OK_STATUSES = (cp.OPTIMAL, cp.OPTIMAL_INACCURATE)


@lru_cache(maxsize=1)
def _solver_name() -> str:
    for name in ("CLARABEL", "ECOS", "SCS"):
        if name in cp.installed_solvers():
            return name
    raise RuntimeError("no second-order cone solver available in cvxpy")


@dataclass(frozen=True, eq=False)
class ParentMeasurement:
    """Candidate parent: one effect per outcome tuple of the measurement set."""

    effects: dict

    def __post_init__(self):
        if not self.effects:
            raise ValueError("parent measurement has no effects")
        d = next(iter(self.effects.values())).dim
        total = np.zeros((d, d), dtype=complex)
        for key, op in self.effects.items():
            if op.min_eigenvalue() < -1e-8:
                raise ValueError(f"parent effect {key} is not positive semidefinite")
            total = total + op.entries
        if np.max(np.abs(total - np.eye(d))) > 1e-8:
            raise ValueError("parent effects do not sum to the identity")

    @property
    def dim(self) -> int:
        return next(iter(self.effects.values())).dim

    def marginal(self, y: int, b: int) -> HermitianOperator:
        d = self.dim
        total = np.zeros((d, d), dtype=complex)
        for key, op in self.effects.items():
            if key[y] == b:
                total = total + op.entries
        return HermitianOperator(total)


@dataclass(frozen=True, eq=False)
class RobustnessResult:
    """Bisection bracket on the robustness and the certifying parent."""

    chi_lower: float
    chi_upper: float
    certificate: ParentMeasurement

    def __post_init__(self):
        if not 0.0 <= self.chi_lower <= self.chi_upper <= 1.0 + 1e-12:
            raise ValueError("robustness bracket must satisfy 0 <= lower <= upper <= 1")

    def to_json(self) -> dict:
        return {
            "chi_lower": self.chi_lower,
            "chi_upper": self.chi_upper,
            "certificate": {
                "".join(map(str, key)): op.to_json()
                for key, op in self.certificate.effects.items()
            },
        }


def mirror_symmetric(theta: float) -> list[MeasurementSet]:
    """Three binary qubit measurements along x and cos(theta) x +- sin(theta) z."""
    if not 0.0 <= theta <= np.pi / 2 + 1e-12:
        raise ValueError("theta must lie in [0, pi/2]")
    axes = [
        np.array([1.0, 0.0, 0.0]),
        np.array([np.cos(theta), 0.0, np.sin(theta)]),
        np.array([np.cos(theta), 0.0, -np.sin(theta)]),
    ]
    return [binary_measurement(a, label=y) for y, a in enumerate(axes)]


def _effect_components(meas: MeasurementSet) -> tuple[float, np.ndarray]:
    """Decompose the outcome-0 effect as (a I + m . sigma) / 2."""
    gens = generators(2)
    e0 = meas.effects[0]
    a = e0.trace()
    m = np.array([np.real(np.trace(e0.entries @ g.entries)) for g in gens])
    return a, m


def _validate_binary_qubit(measurements) -> list[MeasurementSet]:
    meas = list(measurements)
    if not meas:
        raise ValueError("need at least one measurement")
    for m in meas:
        if m.dim != 2 or m.n_outcomes != 2:
            raise ValueError("joint measurability support is limited to binary qubit measurements")
    return meas


def jm_feasible(measurements, chi: float):
    """Decide joint measurability of the chi-mixed set {chi M + (1-chi) I/2}.

    Parent positivity is expressed as the cone constraints s_l >= |u_l|; the
    program maximizes the worst slack, so feasibility is read off the sign
    of the optimum.  Returns (feasible, parent) with parent None when
    infeasible.
    """
    meas = _validate_binary_qubit(measurements)
    if not 0.0 <= chi <= 1.0:
        raise ValueError("chi must lie in [0, 1]")
    n_meas = len(meas)
    tuples = list(itertools.product((0, 1), repeat=n_meas))
    n_par = len(tuples)

    s_var = cp.Variable(n_par)
    u_var = cp.Variable((n_par, 3))
    slack = cp.Variable()
    constraints = [
        cp.sum(s_var) == 2.0,
        cp.sum(u_var, axis=0) == np.zeros(3),
    ]
    for y, m in enumerate(meas):
        a, mvec = _effect_components(m)
        rows = [i for i, key in enumerate(tuples) if key[y] == 0]
        constraints.append(cp.sum(s_var[rows]) == chi * a + (1.0 - chi))
        constraints.append(cp.sum(u_var[rows], axis=0) == chi * mvec)
    for i in range(n_par):
        constraints.append(cp.SOC(s_var[i] - slack, u_var[i]))

    problem = cp.Problem(cp.Maximize(slack), constraints)
    problem.solve(solver=_solver_name())
    if problem.status not in _OK_STATUSES or slack.value is None:
        return False, None
    if float(slack.value) < _FEAS_MARGIN:
        return False, None

    gens = generators(2)
    effects = {}
    for i, key in enumerate(tuples):
        mat = float(s_var.value[i]) * np.eye(2, dtype=complex)
        for j in range(3):
            mat = mat + float(u_var.value[i, j]) * gens[j].entries
        # round away solver noise below the PSD tolerance of the parent type
        sym = mat / 2.0
        w, v = np.linalg.eigh(sym)
        sym = (v * np.clip(w, 0.0, None)) @ v.conj().T
        effects[key] = HermitianOperator(sym)
    total = sum(op.entries for op in effects.values())
    correction = (np.eye(2) - total) / n_par
    effects = {
        key: HermitianOperator(op.entries + correction) for key, op in effects.items()
    }
    return True, ParentMeasurement(effects)


def verify_parent(parent: ParentMeasurement, measurements, chi: float, tol: float = 1e-7) -> bool:
    """Independent audit of a parent certificate; see :func:`parent_violations`."""
    return not parent_violations(parent, measurements, chi, tol)


def parent_violations(parent: ParentMeasurement, measurements, chi: float, tol: float = 1e-7) -> list[str]:
    """All ways the parent fails to certify the chi-mixed measurement set."""
    meas = _validate_binary_qubit(measurements)
    report = []
    d = parent.dim
    keys = list(parent.effects.keys())
    if sorted(keys) != sorted(itertools.product((0, 1), repeat=len(meas))):
        return [f"outcome tuples do not match {len(meas)} binary measurements"]
    for key, op in parent.effects.items():
        low = op.min_eigenvalue()
        if low < -tol:
            report.append(f"effect {key}: eigenvalue {low:.3e} below -{tol:.1e}")
    total = sum(op.entries for op in parent.effects.values())
    err = np.max(np.abs(total - np.eye(d)))
    if err > tol:
        report.append(f"completeness violated by {err:.3e}")
    for y, m in enumerate(meas):
        for b in (0, 1):
            target = chi * m.effects[b].entries + (1.0 - chi) * np.eye(2) / 2.0
            got = parent.marginal(y, b).entries
            err = np.max(np.abs(got - target))
            if err > tol:
                report.append(f"marginal (y={y}, b={b}) off by {err:.3e}")
    return report


def robustness(measurements, gap_tol: float = 1e-4) -> RobustnessResult:
    """Largest noise weight chi keeping the set jointly measurable.

    chi* = 1 exactly when the measurements are compatible as given; the
    bisection returns a bracket of width at most gap_tol together with a
    parent certificate valid at the lower end.
    """
    meas = _validate_binary_qubit(measurements)
    if gap_tol <= 0:
        raise ValueError("gap_tol must be positive")
    feasible, parent = jm_feasible(meas, 1.0)
    if feasible:
        return RobustnessResult(1.0, 1.0, parent)
    lo, hi = 0.0, 1.0
    best_parent = None
    while hi - lo > gap_tol:
        mid = 0.5 * (lo + hi)
        feasible, parent = jm_feasible(meas, mid)
        if feasible:
            lo, best_parent = mid, parent
        else:
            hi = mid
    if best_parent is None:
        _, best_parent = jm_feasible(meas, lo)  # chi = 0 is always compatible
    return RobustnessResult(lo, hi, best_parent)
