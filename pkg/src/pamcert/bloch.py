"""Operator algebra on the (generalized) Bloch representation.

Hermitian operators of dimension d are expanded over the identity and the
d^2 - 1 traceless generators ``sigma_i`` normalized to
``tr(sigma_i sigma_j) = 2 delta_ij`` (the Pauli matrices for d = 2).  A unit
coefficient vector then corresponds to a rank-1 projector at d = 2, and a
coefficient vector of norm <= 1 to a physical qubit state.

The module also provides the Born rule, the depolarizing map and its
trace-preserving inverse, and the evaluation of full conditional-probability
tables for sets of preparations and measurements.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

# Tolerances: algebraic identities are held to 1e-12, physical properties
# (positivity, normalization) to 1e-9.
ALGEBRAIC_TOL = 1e-12
PHYSICAL_TOL = 1e-9


def _as_complex_matrix(entries) -> np.ndarray:
    m = np.asarray(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """A dense complex Hermitian matrix; carrier for states and effects."""

    entries: np.ndarray

    def __post_init__(self):
        m = _as_complex_matrix(self.entries)
        if np.max(np.abs(m - m.conj().T)) > ALGEBRAIC_TOL:
            raise ValueError("matrix is not Hermitian within 1e-12")
        m = (m + m.conj().T) / 2.0
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "re": np.real(self.entries).tolist(),
            "im": np.imag(self.entries).tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "HermitianOperator":
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data["im"], dtype=float)
        op = cls(re + 1j * im)
        if op.dim != int(data["dim"]):
            raise ValueError("dimension field does not match matrix shape")
        return op


@dataclass(frozen=True, eq=False)
class BlochVector:
    """Real coefficient vector of length d^2 - 1 over the generator basis."""

    dim: int
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if self.dim < 2:
            raise ValueError("dimension must be at least 2")
        if c.shape != (self.dim**2 - 1,):
            raise ValueError(
                f"expected {self.dim**2 - 1} coordinates for dim {self.dim}, got {c.shape}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    def to_json(self) -> dict:
        return {"dim": self.dim, "coords": self.coords.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "BlochVector":
        return cls(int(data["dim"]), np.asarray(data["coords"], dtype=float))


def identity(d: int) -> HermitianOperator:
    return HermitianOperator(np.eye(d))


def maximally_mixed(d: int) -> HermitianOperator:
    return HermitianOperator(np.eye(d) / d)


@lru_cache(maxsize=16)
def _generator_stack(d: int) -> np.ndarray:
    """Stack of the d^2 - 1 traceless generators, tr(g_i g_j) = 2 delta_ij."""
    if d < 2:
        raise ValueError("generators are defined for dimension >= 2")
    mats = []
    for j in range(d):
        for k in range(j + 1, d):
            sym = np.zeros((d, d), dtype=complex)
            sym[j, k] = sym[k, j] = 1.0
            mats.append(sym)
    for j in range(d):
        for k in range(j + 1, d):
            asym = np.zeros((d, d), dtype=complex)
            asym[j, k] = -1j
            asym[k, j] = 1j
            mats.append(asym)
    for l in range(1, d):
        diag = np.zeros((d, d), dtype=complex)
        for j in range(l):
            diag[j, j] = 1.0
        diag[l, l] = -l
        mats.append(diag * np.sqrt(2.0 / (l * (l + 1))))
    stack = np.stack(mats)
    stack.setflags(write=False)
    return stack


def generators(d: int) -> list[HermitianOperator]:
    """Traceless Hermitian generator basis for dimension d.

    For d = 2 this is exactly [X, Y, Z].  The normalization is
    ``tr(g_i g_j) = 2 delta_ij`` so that unit coefficient vectors map to
    rank-1 projectors at d = 2.
    """
    return [HermitianOperator(m) for m in _generator_stack(d)]


def scale_factor(d: int) -> float:
    """Expansion coefficient sqrt(d(d-1)/2) in front of the generator sum."""
    return float(np.sqrt(d * (d - 1) / 2.0))


def _coords_of(v, d: int | None) -> tuple[np.ndarray, int]:
    if isinstance(v, BlochVector):
        if d is not None and d != v.dim:
            raise ValueError(f"dimension mismatch: vector has dim {v.dim}, got d={d}")
        return v.coords, v.dim
    c = np.asarray(v, dtype=float)
    if d is None:
        d = int(round(np.sqrt(c.size + 1)))
    if c.shape != (d**2 - 1,):
        raise ValueError(f"expected {d**2 - 1} coordinates for dim {d}")
    return c, d


def _expand(coords: np.ndarray, d: int) -> np.ndarray:
    gens = _generator_stack(d)
    return (np.eye(d) + scale_factor(d) * np.tensordot(coords, gens, axes=1)) / d


def projector_from_unit_vector(v, d: int | None = None) -> HermitianOperator:
    """Operator (1/d)(I + c_d sum_i v_i g_i) for a unit coefficient vector.

    At d = 2 the result is the rank-1 projector onto the +1 eigenspace of
    ``v . sigma``.  For d > 2 it is the analogous unit-trace operator (not a
    projector for generic v).
    """
    coords, d = _coords_of(v, d)
    if abs(np.linalg.norm(coords) - 1.0) > PHYSICAL_TOL:
        raise ValueError("coefficient vector must have unit norm")
    return HermitianOperator(_expand(coords, d))


def state_from_bloch(r, d: int | None = None) -> HermitianOperator:
    """Unit-trace operator with the given generator coefficients.

    For d = 2 the norm of r must not exceed 1 (physical qubit state).
    """
    coords, d = _coords_of(r, d)
    if d == 2 and np.linalg.norm(coords) > 1.0 + PHYSICAL_TOL:
        raise ValueError("qubit coefficient vector longer than 1 is nonphysical")
    return HermitianOperator(_expand(coords, d))


def bloch_coords(op: HermitianOperator) -> BlochVector:
    """Generator coefficients of the traceless part of ``op``."""
    d = op.dim
    gens = _generator_stack(d)
    raw = np.real(np.einsum("ikl,lk->i", gens, op.entries))
    return BlochVector(d, raw * d / (2.0 * scale_factor(d)))


def trace_product(a: HermitianOperator, b: HermitianOperator) -> float:
    """Real Hilbert-Schmidt product tr(a b), without clamping."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return float(np.real(np.sum(a.entries * b.entries.T)))


def born(effect: HermitianOperator, state: HermitianOperator) -> float:
    """Outcome probability tr(effect state).

    Rounding noise up to 1e-9 outside [0, 1] is clamped away; the result is
    always a valid probability.
    """
    return float(np.clip(trace_product(effect, state), 0.0, 1.0))


def depolarize(op: HermitianOperator, t: float) -> HermitianOperator:
    """Depolarizing map t * op + (1 - t) tr(op)/d * I; self-dual."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("depolarizing strength must lie in [0, 1]")
    d = op.dim
    return HermitianOperator(t * op.entries + (1.0 - t) * op.trace() / d * np.eye(d))


def inflate(op: HermitianOperator, t: float) -> HermitianOperator:
    """Trace-preserving inverse of :func:`depolarize`.

    The result may fail to be positive semidefinite; it is a probe operator,
    not necessarily a state.
    """
    if not 0.0 < t <= 1.0:
        raise ValueError("inflation strength must lie in (0, 1]")
    d = op.dim
    return HermitianOperator((op.entries - (1.0 - t) * op.trace() / d * np.eye(d)) / t)


@dataclass(frozen=True, eq=False)
class Preparation:
    """A labelled quantum state (unit trace, positive semidefinite)."""

    label: int
    state: HermitianOperator

    def __post_init__(self):
        if abs(self.state.trace() - 1.0) > PHYSICAL_TOL:
            raise ValueError(f"preparation {self.label}: trace differs from 1")
        if self.state.min_eigenvalue() < -PHYSICAL_TOL:
            raise ValueError(f"preparation {self.label}: state is not positive semidefinite")

    @property
    def dim(self) -> int:
        return self.state.dim


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    """A labelled measurement: effects that are PSD and sum to the identity."""

    label: int
    effects: tuple = field(default=())

    def __post_init__(self):
        effects = tuple(self.effects)
        if not effects:
            raise ValueError("a measurement needs at least one effect")
        d = effects[0].dim
        total = np.zeros((d, d), dtype=complex)
        for k, e in enumerate(effects):
            if e.dim != d:
                raise ValueError(f"measurement {self.label}: effect {k} has mismatched dim")
            if e.min_eigenvalue() < -PHYSICAL_TOL:
                raise ValueError(f"measurement {self.label}: effect {k} is not PSD")
            total = total + e.entries
        if np.max(np.abs(total - np.eye(d))) > PHYSICAL_TOL:
            raise ValueError(f"measurement {self.label}: effects do not sum to the identity")
        object.__setattr__(self, "effects", effects)

    @property
    def dim(self) -> int:
        return self.effects[0].dim

    @property
    def n_outcomes(self) -> int:
        return len(self.effects)


def binary_measurement(axis, label: int = 0) -> MeasurementSet:
    """Two-outcome projective qubit measurement along a unit Bloch axis."""
    a = np.asarray(axis, dtype=float)
    return MeasurementSet(
        label,
        (projector_from_unit_vector(a, 2), projector_from_unit_vector(-a, 2)),
    )


def behavior_of(preps: Sequence[Preparation], meas: Sequence[MeasurementSet]):
    """Conditional-probability table p(b|x, y) = tr(M_{b|y} rho_x)."""
    from . import strategies

    if not preps or not meas:
        raise ValueError("need at least one preparation and one measurement")
    d = preps[0].dim
    n_b = meas[0].n_outcomes
    for p in preps:
        if p.dim != d:
            raise ValueError("preparations have mixed dimensions")
    for m in meas:
        if m.dim != d:
            raise ValueError("measurement dimension does not match preparations")
        if m.n_outcomes != n_b:
            raise ValueError("all measurements must share the same outcome count")
    table = np.empty((n_b, len(preps), len(meas)))
    for x, p in enumerate(preps):
        for y, m in enumerate(meas):
            for b, e in enumerate(m.effects):
                table[b, x, y] = born(e, p.state)
    scenario = strategies.Scenario(nX=len(preps), nY=len(meas), nA=d, nB=n_b)
    return strategies.Behavior(scenario, table)
