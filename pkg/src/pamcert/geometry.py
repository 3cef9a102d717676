"""Probe polyhedra on the qubit Bloch sphere and inscribed-ball radii.

The shrink factor of the classicality certificates is the radius eta of the
largest origin-centered ball inside the convex hull of the probe directions.
All built-in probe sets are closed under negation, for which the
origin-centered ball is the largest inscribed ball outright.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .bloch import MeasurementSet, binary_measurement

KNOWN_POLYHEDRA = ("octahedron", "icosahedron", "rhombicuboctahedron", "tetrahedron")

_VERTEX_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class PolyhedronSpec:
    """A named set of unit vertices on the Bloch sphere."""

    name: str
    vertices: np.ndarray

    def __post_init__(self):
        if self.name not in KNOWN_POLYHEDRA + ("custom",):
            raise ValueError(f"unknown polyhedron name {self.name!r}")
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 3 or v.shape[0] < 2:
            raise ValueError("vertices must form an (n, 3) array with n >= 2")
        norms = np.linalg.norm(v, axis=1)
        if np.max(np.abs(norms - 1.0)) > _VERTEX_TOL:
            raise ValueError("all vertices must have unit norm")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    def is_negation_closed(self, tol: float = _VERTEX_TOL) -> bool:
        for v in self.vertices:
            if np.min(np.linalg.norm(self.vertices + v, axis=1)) > tol:
                return False
        return True


def _octahedron() -> np.ndarray:
    return np.array(
        [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]],
        dtype=float,
    )


def _icosahedron() -> np.ndarray:
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = []
    for s1, s2 in itertools.product((1.0, -1.0), repeat=2):
        base = np.array([0.0, s1, s2 * phi])
        for k in range(3):
            verts.append(np.roll(base, k))
    return np.array(verts) / np.sqrt(1.0 + phi**2)


def _rhombicuboctahedron() -> np.ndarray:
    # all permutations of (+-1, +-1, +-(1 + sqrt(2))), normalized
    c = 1.0 + np.sqrt(2.0)
    verts = set()
    for perm in itertools.permutations((1.0, 1.0, c)):
        for signs in itertools.product((1.0, -1.0), repeat=3):
            verts.add(tuple(s * p for s, p in zip(signs, perm)))
    arr = np.array(sorted(verts))
    return arr / np.linalg.norm(arr, axis=1)[:, None]


def _tetrahedron() -> np.ndarray:
    return np.array(
        [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float
    ) / np.sqrt(3.0)


_BUILDERS = {
    "octahedron": _octahedron,
    "icosahedron": _icosahedron,
    "rhombicuboctahedron": _rhombicuboctahedron,
    "tetrahedron": _tetrahedron,
}


def polyhedron(name: str, vertices=None) -> PolyhedronSpec:
    """Canonical probe polyhedron by name, or a custom vertex set."""
    if name == "custom":
        if vertices is None:
            raise ValueError("custom polyhedron requires explicit vertices")
        return PolyhedronSpec("custom", np.asarray(vertices, dtype=float))
    if name not in _BUILDERS:
        raise ValueError(f"unknown polyhedron name {name!r}")
    return PolyhedronSpec(name, _BUILDERS[name]())


def load_polyhedron(path) -> PolyhedronSpec:
    """Custom polyhedron from a JSON file {"vertices": [[x, y, z], ...]}."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or "vertices" not in data:
        raise ValueError(f"{path}: expected a JSON object with a 'vertices' key")
    return polyhedron("custom", data["vertices"])


def measurements_from_vertices(spec: PolyhedronSpec) -> list[MeasurementSet]:
    """One binary projective measurement per antipodal vertex pair."""
    verts = spec.vertices
    paired = np.zeros(len(verts), dtype=bool)
    meas = []
    for i, v in enumerate(verts):
        if paired[i]:
            continue
        dists = np.linalg.norm(verts + v, axis=1)
        dists[paired] = np.inf
        dists[i] = np.inf
        j = int(np.argmin(dists))
        if dists[j] > _VERTEX_TOL:
            raise ValueError(f"vertex set is not closed under negation (vertex {i})")
        paired[i] = paired[j] = True
        meas.append(binary_measurement(v, label=len(meas)))
    return meas


@dataclass(frozen=True, eq=False)
class HullFacets:
    """Facet description {p : n_k . p <= c_k} of a convex hull in R^3."""

    normals: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.normals, dtype=float)
        c = np.asarray(self.offsets, dtype=float)
        if n.ndim != 2 or n.shape[1] != 3 or c.shape != (n.shape[0],):
            raise ValueError("normals must be (m, 3) and offsets (m,)")
        lengths = np.linalg.norm(n, axis=1)
        if np.any(lengths < 1e-12):
            raise ValueError("degenerate facet normal")
        n = n / lengths[:, None]
        c = c / lengths
        if np.any(c <= 0):
            raise ValueError("origin is not strictly interior to the hull")
        n.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "normals", n)
        object.__setattr__(self, "offsets", c)

    @property
    def n_facets(self) -> int:
        return len(self.offsets)

    def contains(self, points, tol: float = _VERTEX_TOL) -> bool:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return bool(np.all(pts @ self.normals.T <= self.offsets[None, :] + tol))


def convex_hull(points) -> HullFacets:
    """Facets of the convex hull of 3-d points with the origin interior.

    Coplanar facets reported separately by the underlying hull code are
    merged, so facet counts match the geometric facet structure.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError("expected an (n, 3) array of points")
    if len(pts) < 4:
        raise ValueError("need at least 4 points for a full-dimensional hull")
    try:
        hull = ConvexHull(pts)
    except QhullError as err:
        raise ValueError(f"degenerate point set: {err}") from err
    normals = hull.equations[:, :3]
    offsets = -hull.equations[:, 3]
    plane_keys = np.round(np.c_[normals, offsets], 9)
    _, keep = np.unique(plane_keys, axis=0, return_index=True)
    facets = HullFacets(normals[keep], offsets[keep])
    if not facets.contains(pts):
        raise ValueError("hull facets fail to contain the input points")
    return facets


def inscribed_radius(facets: HullFacets) -> float:
    """Radius of the largest origin-centered ball inside the hull.

    Equals min_k c_k over unit facet normals.  This is the global largest
    inscribed ball whenever the vertex set is symmetric under negation.
    """
    return float(np.min(facets.offsets))
