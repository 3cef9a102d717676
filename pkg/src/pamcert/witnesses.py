"""Correlation witness for the 4-preparation scenario and its RAC reading.

For four preparations and two binary measurements, classical models obey
S <= 4 where S is the signed correlator sum with sign pattern
(+,-), (-,+), (-,-), (+,+) over (x, y).  The same quantity determines the
success probability (S + 8) / 16 of the associated 2 -> 1 random access
code.  The planar preparation family below violates the bound with
S = 4 sqrt(2) alpha sin(theta) against the fixed measurement pair
(-x, z).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bloch import MeasurementSet, Preparation, binary_measurement, state_from_bloch
from .strategies import Behavior

S_SIGNS = np.array([[1, -1], [-1, 1], [-1, -1], [1, 1]], dtype=float)

# Input-bit pair (m1, m2) assigned to each preparation x; chosen so that
# (-1)^(m_y(x)) reproduces the sign pattern of S, which makes the RAC
# success probability exactly (S + 8) / 16.
RAC_BIT_MAP = ((0, 1), (1, 0), (1, 1), (0, 0))

_FAMILY_DIRECTIONS = (
    np.array([-1.0, 0.0, -1.0]) / np.sqrt(2.0),
    np.array([1.0, 0.0, 1.0]) / np.sqrt(2.0),
    np.array([1.0, 0.0, -1.0]) / np.sqrt(2.0),
    np.array([-1.0, 0.0, 1.0]) / np.sqrt(2.0),
)
_Y_AXIS = np.array([0.0, 1.0, 0.0])


@dataclass(frozen=True)
class ActivationFamily:
    """Planar four-state family: shrink factor alpha, opening angle theta.

    At theta = 0 all four Bloch vectors coincide at alpha * y; at
    theta = pi/2 they form two antipodal pairs in the xz-plane.
    """

    alpha: float
    theta: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if not 0.0 <= self.theta <= np.pi / 2 + 1e-12:
            raise ValueError("theta must lie in [0, pi/2]")

    def bloch_vectors(self) -> list[np.ndarray]:
        return [
            self.alpha * (np.cos(self.theta) * _Y_AXIS + np.sin(self.theta) * w)
            for w in _FAMILY_DIRECTIONS
        ]


def activation_preparations(fam: ActivationFamily) -> list[Preparation]:
    """The four qubit preparations of the family."""
    return [
        Preparation(x, state_from_bloch(r, 2)) for x, r in enumerate(fam.bloch_vectors())
    ]


def activation_measurements() -> list[MeasurementSet]:
    """The measurement pair (-x, z) used to evaluate the witness."""
    return [
        binary_measurement(np.array([-1.0, 0.0, 0.0]), label=0),
        binary_measurement(np.array([0.0, 0.0, 1.0]), label=1),
    ]


def correlator(beh: Behavior, x: int, y: int) -> float:
    """Expectation value p(0|x,y) - p(1|x,y) of a binary outcome."""
    if beh.scenario.nB != 2:
        raise ValueError("correlators require binary outcomes")
    return float(beh.p[0, x, y] - beh.p[1, x, y])


def s_value(beh: Behavior) -> float:
    """Signed correlator sum; classical behaviors satisfy S <= 4."""
    s = beh.scenario
    if (s.nX, s.nY, s.nB) != (4, 2, 2):
        raise ValueError("witness requires nX=4, nY=2, nB=2")
    e = beh.p[0] - beh.p[1]  # (nX, nY)
    return float(np.sum(S_SIGNS * e))


def analytic_s(alpha: float, theta: float) -> float:
    """Closed form 4 sqrt(2) alpha sin(theta) for the planar family."""
    return 4.0 * np.sqrt(2.0) * alpha * np.sin(theta)


def rac_success(s: float) -> float:
    """Random access code success probability (S + 8) / 16."""
    return (s + 8.0) / 16.0


def rac_success_from_behavior(beh: Behavior) -> float:
    """Direct evaluation of the RAC figure of merit.

    Averages the probability of guessing bit m_y of the input pair encoded
    by preparation x, over uniform inputs and queries.  Identical to
    rac_success(s_value(beh)) for every valid behavior.
    """
    s = beh.scenario
    if (s.nX, s.nY, s.nB) != (4, 2, 2):
        raise ValueError("RAC evaluation requires nX=4, nY=2, nB=2")
    total = 0.0
    for x, bits in enumerate(RAC_BIT_MAP):
        for y in range(2):
            total += beh.p[bits[y], x, y]
    return total / 8.0
