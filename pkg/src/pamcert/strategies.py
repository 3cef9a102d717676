"""Deterministic communication strategies and their behaviors.

A scenario fixes the cardinalities (nX, nY, nA, nB) of preparation inputs,
measurement inputs, classical messages and outcomes.  A deterministic
strategy is an encoding map enc: X -> A together with a decoding map
dec: A x Y -> B; these are the vertices of the polytope of classically
reproducible behaviors.

Strategies carry a canonical integer index.  With E = sum_x enc[x] nA^x and
D = sum_{a,y} dec[a,y] nB^(a nY + y), the index is E * nB^(nA nY) + D, a
bijection onto [0, count).  Index 0 is the all-zeros strategy and
count - 1 the all-max strategy.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

_UINT63 = 2**63  # numpy can draw uniform indices directly below this


@dataclass(frozen=True)
class Scenario:
    """Cardinalities |X|, |Y|, |A|, |B| of a prepare-and-measure setup."""

    nX: int
    nY: int
    nA: int
    nB: int

    def __post_init__(self):
        for name in ("nX", "nY", "nA", "nB"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")

    @property
    def n_entries(self) -> int:
        """Number of probability entries nB * nX * nY in a behavior."""
        return self.nB * self.nX * self.nY


@dataclass(frozen=True, eq=False)
class DeterministicStrategy:
    """Encoding enc: X -> A and decoding dec: (A, Y) -> B."""

    enc: np.ndarray
    dec: np.ndarray

    def __post_init__(self):
        enc = np.asarray(self.enc, dtype=np.int64)
        dec = np.asarray(self.dec, dtype=np.int64)
        if enc.ndim != 1 or dec.ndim != 2:
            raise ValueError("enc must be a vector and dec a 2-d array")
        enc.setflags(write=False)
        dec.setflags(write=False)
        object.__setattr__(self, "enc", enc)
        object.__setattr__(self, "dec", dec)

    def to_json(self) -> dict:
        return {"enc": self.enc.tolist(), "dec": self.dec.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "DeterministicStrategy":
        return cls(np.asarray(data["enc"]), np.asarray(data["dec"]))


@dataclass(frozen=True, eq=False)
class Behavior:
    """Conditional-probability tensor p[b, x, y] for a scenario."""

    scenario: Scenario
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        s = self.scenario
        if p.shape != (s.nB, s.nX, s.nY):
            raise ValueError(f"behavior shape {p.shape} does not match scenario")
        if p.min() < -1e-9 or p.max() > 1.0 + 1e-9:
            raise ValueError("behavior entries outside [0, 1]")
        if np.max(np.abs(p.sum(axis=0) - 1.0)) > 1e-9:
            raise ValueError("outcome probabilities do not sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)


def count(s: Scenario) -> int:
    """Total number of deterministic strategies nA^nX * nB^(nA nY)."""
    return s.nA**s.nX * s.nB ** (s.nA * s.nY)


def _validate(s: Scenario, strat: DeterministicStrategy) -> None:
    if strat.enc.shape != (s.nX,) or strat.dec.shape != (s.nA, s.nY):
        raise ValueError("strategy shape does not match scenario")
    if strat.enc.min() < 0 or strat.enc.max() >= s.nA:
        raise ValueError("encoding value out of range")
    if strat.dec.min() < 0 or strat.dec.max() >= s.nB:
        raise ValueError("decoding value out of range")


def to_index(s: Scenario, strat: DeterministicStrategy) -> int:
    """Canonical integer index of a strategy (exact, arbitrary precision)."""
    _validate(s, strat)
    e = sum(int(strat.enc[x]) * s.nA**x for x in range(s.nX))
    d = sum(
        int(strat.dec[a, y]) * s.nB ** (a * s.nY + y)
        for a in range(s.nA)
        for y in range(s.nY)
    )
    return e * s.nB ** (s.nA * s.nY) + d


def from_index(s: Scenario, k: int) -> DeterministicStrategy:
    """Inverse of :func:`to_index`."""
    total = count(s)
    if not 0 <= k < total:
        raise ValueError(f"strategy index {k} outside [0, {total})")
    dec_radix = s.nB ** (s.nA * s.nY)
    e, d = divmod(int(k), dec_radix)
    enc = np.empty(s.nX, dtype=np.int64)
    for x in range(s.nX):
        enc[x] = e % s.nA
        e //= s.nA
    dec = np.empty((s.nA, s.nY), dtype=np.int64)
    for a in range(s.nA):
        for y in range(s.nY):
            dec[a, y] = d % s.nB
            d //= s.nB
    return DeterministicStrategy(enc, dec)


def decode_indices(s: Scenario, indices) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized index decoding: arrays enc (n, nX) and dec (n, nA, nY)."""
    if count(s) < _UINT63:
        idx = np.asarray(indices, dtype=np.int64)
        dec_radix = s.nB ** (s.nA * s.nY)
        e = idx // dec_radix
        d = idx % dec_radix
        enc = np.empty((len(idx), s.nX), dtype=np.int64)
        for x in range(s.nX):
            enc[:, x] = e % s.nA
            e //= s.nA
        dec = np.empty((len(idx), s.nA, s.nY), dtype=np.int64)
        for a in range(s.nA):
            for y in range(s.nY):
                dec[:, a, y] = d % s.nB
                d //= s.nB
        return enc, dec
    strats = [from_index(s, int(k)) for k in indices]
    return (
        np.stack([st.enc for st in strats]),
        np.stack([st.dec for st in strats]),
    )


def draw_indices(s: Scenario, n: int, rng: np.random.Generator, exclude=()) -> list[int]:
    """Draw n distinct uniform strategy indices, avoiding those in exclude."""
    total = count(s)
    excluded = set(exclude)
    if n > total - len(excluded):
        raise ValueError(f"cannot draw {n} distinct strategies from {total - len(excluded)}")
    picked: dict[int, None] = {}
    small = total < _UINT63
    while len(picked) < n:
        chunk = max(2 * (n - len(picked)), 64)
        if small:
            draws = rng.integers(0, total, size=chunk)
            candidates = (int(k) for k in draws)
        else:
            enc_digits = rng.integers(0, s.nA, size=(chunk, s.nX))
            dec_digits = rng.integers(0, s.nB, size=(chunk, s.nA * s.nY))
            candidates = (
                int(
                    sum(int(enc_digits[i, x]) * s.nA**x for x in range(s.nX))
                    * s.nB ** (s.nA * s.nY)
                    + sum(int(dec_digits[i, j]) * s.nB**j for j in range(s.nA * s.nY))
                )
                for i in range(chunk)
            )
        for k in candidates:
            if k not in excluded and k not in picked:
                picked[k] = None
                if len(picked) == n:
                    break
    return list(picked)


def sample_distinct(s: Scenario, n: int, seed: int) -> list[DeterministicStrategy]:
    """n distinct strategies, uniformly without replacement, reproducible."""
    rng = np.random.default_rng(seed)
    return [from_index(s, k) for k in draw_indices(s, n, rng)]


def deterministic_behavior(s: Scenario, strat: DeterministicStrategy) -> Behavior:
    """0/1 behavior p(b|x,y) = [dec(enc(x), y) = b]."""
    _validate(s, strat)
    b_sel = strat.dec[strat.enc]  # (nX, nY)
    p = (np.arange(s.nB)[:, None, None] == b_sel[None, :, :]).astype(float)
    return Behavior(s, p)


def behavior_columns(s: Scenario, strategies_or_indices) -> np.ndarray:
    """Stack deterministic behaviors as columns of shape (nB nX nY, n).

    Accepts either strategy objects or canonical indices; the flat row order
    is C order over (b, x, y).
    """
    items = list(strategies_or_indices)
    if not items:
        return np.zeros((s.n_entries, 0))
    if isinstance(items[0], DeterministicStrategy):
        for st in items:
            _validate(s, st)
        enc = np.stack([st.enc for st in items])
        dec = np.stack([st.dec for st in items])
    else:
        enc, dec = decode_indices(s, items)
    b_sel = np.take_along_axis(dec, enc[:, :, None], axis=1)  # (n, nX, nY)
    cols = (b_sel[:, None, :, :] == np.arange(s.nB)[None, :, None, None]).astype(float)
    return cols.reshape(len(items), s.n_entries).T


def behaviors_equal_iff_used_parts_agree(
    s: Scenario, first: DeterministicStrategy, second: DeterministicStrategy
) -> bool:
    """Predicate characterizing behavior collisions between two strategies.

    Two strategies produce the same behavior exactly when their encodings
    agree and their decodings agree on every message actually used by the
    encoding; decodings may differ freely on unused messages.
    """
    if not np.array_equal(first.enc, second.enc):
        return False
    used = np.unique(first.enc)
    return bool(np.array_equal(first.dec[used], second.dec[used]))
