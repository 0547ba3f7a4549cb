"""Triangulations of the unit disk.

Level 0 is a small Delaunay mesh with 16 boundary nodes; every further level
is a uniform red refinement (each triangle split into four) with the new
boundary midpoints pushed radially onto the unit circle.  Boundary node count
and mesh width therefore both halve per level.
"""

from __future__ import annotations

import functools
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay

__all__ = [
    "DiskMesh",
    "MAX_LEVEL",
    "build_disk_mesh",
    "cached_disk_mesh",
    "load_mesh",
    "save_mesh",
]

#: Level 7 has ~524k triangles; anything finer is not useful at desk scale.
MAX_LEVEL = 7

_BASE_BOUNDARY = 16
_HEADER = "diskmesh v1"


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DiskMesh:
    """Polygonal triangulation of the unit disk.

    Attributes
    ----------
    nodes : ndarray, shape (n_nodes, 2)
    triangles : ndarray, shape (n_tris, 3)
        Counter-clockwise node index triples.
    boundary_nodes : ndarray, shape (n_boundary,)
        Indices of the nodes on the unit circle, ordered by increasing angle
        starting at angle 0.
    refinement_level : int
    """

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_nodes: np.ndarray
    refinement_level: int
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", _readonly(np.asarray(self.nodes, dtype=float)))
        object.__setattr__(self, "triangles", _readonly(np.asarray(self.triangles, dtype=np.int64)))
        object.__setattr__(
            self, "boundary_nodes", _readonly(np.asarray(self.boundary_nodes, dtype=np.int64))
        )

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def n_boundary(self) -> int:
        return self.boundary_nodes.shape[0]

    @property
    def signed_areas(self) -> np.ndarray:
        if "areas" not in self._cache:
            p = self.nodes[self.triangles]
            d1 = p[:, 1] - p[:, 0]
            d2 = p[:, 2] - p[:, 0]
            self._cache["areas"] = _readonly(0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]))
        return self._cache["areas"]

    @property
    def centroids(self) -> np.ndarray:
        if "centroids" not in self._cache:
            self._cache["centroids"] = _readonly(self.nodes[self.triangles].mean(axis=1))
        return self._cache["centroids"]

    @property
    def boundary_angles(self) -> np.ndarray:
        """Polar angles of the boundary nodes in [0, 2*pi)."""
        if "angles" not in self._cache:
            xy = self.nodes[self.boundary_nodes]
            th = np.mod(np.arctan2(xy[:, 1], xy[:, 0]), 2 * np.pi)
            self._cache["angles"] = _readonly(th)
        return self._cache["angles"]

    @property
    def boundary_weights(self) -> np.ndarray:
        """Trapezoidal weights of the boundary nodes (arc length of the circle)."""
        return np.full(self.n_boundary, 2 * np.pi / self.n_boundary)

    def edges(self) -> np.ndarray:
        """Unique undirected edges as sorted index pairs."""
        if "edges" not in self._cache:
            t = self.triangles
            e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
            e.sort(axis=1)
            self._cache["edges"] = _readonly(np.unique(e, axis=0))
        return self._cache["edges"]

    def max_edge_length(self) -> float:
        e = self.edges()
        return float(np.max(np.linalg.norm(self.nodes[e[:, 0]] - self.nodes[e[:, 1]], axis=1)))

    def boundary_edges(self) -> np.ndarray:
        """Consecutive boundary node pairs forming the closed boundary polygon."""
        b = self.boundary_nodes
        return np.column_stack([b, np.roll(b, -1)])


def _base_mesh() -> tuple[np.ndarray, np.ndarray]:
    pts = [np.zeros((1, 2))]
    for radius, count, offset in ((0.5, 8, 0.5), (1.0, _BASE_BOUNDARY, 0.0)):
        th = 2 * np.pi * (np.arange(count) + offset) / count
        pts.append(radius * np.column_stack([np.cos(th), np.sin(th)]))
    nodes = np.vstack(pts)
    tris = Delaunay(nodes).simplices.astype(np.int64)
    return nodes, _orient(nodes, tris)


def _orient(nodes: np.ndarray, tris: np.ndarray) -> np.ndarray:
    p = nodes[tris]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    neg = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0] < 0
    tris = tris.copy()
    tris[neg] = tris[neg][:, [0, 2, 1]]
    return tris


def _refine(nodes: np.ndarray, tris: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    e = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    e_sorted = np.sort(e, axis=1)
    uniq, inverse, counts = np.unique(e_sorted, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    mids = 0.5 * (nodes[uniq[:, 0]] + nodes[uniq[:, 1]])
    on_boundary = counts == 1
    mids[on_boundary] /= np.linalg.norm(mids[on_boundary], axis=1)[:, None]
    n0 = nodes.shape[0]
    m = n0 + inverse.reshape(3, -1)  # midpoints of edges (01, 12, 20) per triangle
    m01, m12, m20 = m
    a, b, c = tris.T
    new = np.concatenate(
        [
            np.column_stack([a, m01, m20]),
            np.column_stack([b, m12, m01]),
            np.column_stack([c, m20, m12]),
            np.column_stack([m01, m12, m20]),
        ]
    )
    return np.vstack([nodes, mids]), new


def _boundary_order(nodes: np.ndarray) -> np.ndarray:
    r = np.linalg.norm(nodes, axis=1)
    idx = np.flatnonzero(np.abs(r - 1.0) < 1e-12)
    th = np.mod(np.arctan2(nodes[idx, 1], nodes[idx, 0]), 2 * np.pi)
    # angle 2*pi - tiny must sort first as angle 0
    th[th > 2 * np.pi - 1e-9] = 0.0
    return idx[np.argsort(th, kind="stable")]


@functools.lru_cache(maxsize=8)
def build_disk_mesh(refinement_level: int) -> DiskMesh:
    """Deterministic triangulation of the unit disk.

    Level ``k`` has ``16 * 2**k`` equispaced boundary nodes and
    ``32 * 4**k`` triangles.
    """
    level = int(refinement_level)
    if level < 0 or level > MAX_LEVEL:
        raise ValueError(f"refinement_level must lie in [0, {MAX_LEVEL}], got {refinement_level}")
    nodes, tris = _base_mesh()
    for _ in range(level):
        nodes, tris = _refine(nodes, tris)
    return DiskMesh(nodes, tris, _boundary_order(nodes), level)


def save_mesh(mesh: DiskMesh, path: str | os.PathLike) -> None:
    """Write the plain-text mesh cache format."""
    path = Path(path)
    with path.open("w") as fh:
        fh.write(f"{_HEADER} {mesh.refinement_level} {mesh.n_nodes} {mesh.n_triangles}\n")
        np.savetxt(fh, mesh.nodes, fmt="%.17g")
        np.savetxt(fh, mesh.triangles, fmt="%d")


def load_mesh(path: str | os.PathLike) -> DiskMesh:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().split()
        if header[:2] != _HEADER.split() or len(header) != 5:
            raise ValueError(f"{path}: not a diskmesh v1 file")
        level, n_nodes, n_tris = (int(v) for v in header[2:])
        nodes = np.loadtxt(fh, max_rows=n_nodes, ndmin=2)
        tris = np.loadtxt(fh, max_rows=n_tris, dtype=np.int64, ndmin=2)
    if nodes.shape != (n_nodes, 2) or tris.shape != (n_tris, 3):
        raise ValueError(f"{path}: truncated mesh file")
    return DiskMesh(nodes, tris, _boundary_order(nodes), level)


def cached_disk_mesh(refinement_level: int, cache_dir: str | os.PathLike) -> DiskMesh:
    """Load the level from ``cache_dir``, generating and writing it if absent."""
    path = Path(cache_dir) / f"diskmesh_L{int(refinement_level)}.txt"
    if path.exists():
        try:
            return load_mesh(path)
        except ValueError:
            pass
    mesh = build_disk_mesh(refinement_level)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_mesh(mesh, path)
    return mesh
