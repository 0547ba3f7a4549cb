"""Seeded random conductivities on the unit disk."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..fem import ConductivityField
from ..mesh import DiskMesh

__all__ = ["ConductivityEnsemble", "bump", "inclusion", "inclusion_perturbations"]


def bump(center, width: float):
    """Gaussian bump ``exp(-|x - c|^2 / w^2)`` as a function of ``(x, y)``."""
    cx, cy = center

    def f(x, y):
        return np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / width**2)

    return f


def inclusion(center, radius: float):
    """Indicator of a disk, sampled at triangle centroids."""
    cx, cy = center

    def f(x, y):
        return (((x - cx) ** 2 + (y - cy) ** 2) < radius**2).astype(float)

    return f


def _random_center(rng, r_max):
    r = r_max * np.sqrt(rng.uniform())
    t = rng.uniform(0, 2 * np.pi)
    return (r * np.cos(t), r * np.sin(t))


@dataclass(frozen=True)
class ConductivityEnsemble:
    """Deterministic family of conductivities within ``bounds``.

    Parameters
    ----------
    seed : int
    count : int
    rule : {"bumps", "inclusions", "mixed"}
        Smooth log-bumps, piecewise-constant disk inclusions, or an
        alternation of both.
    bounds : (float, float)
        Lower and upper conductivity bounds; every sample lies inside.
    constant_every : int
        Every ``constant_every``-th sample is a constant (0 disables), since
        constant fields degenerate some checks and must be mixed in on purpose.

    Notes
    -----
    Sample parameters are drawn before any mesh is seen, so the same
    ensemble can be evaluated on several mesh levels.
    """

    seed: int = 0
    count: int = 20
    rule: str = "mixed"
    bounds: tuple = (0.5, 2.0)
    constant_every: int = 5

    def __post_init__(self):
        if self.rule not in ("bumps", "inclusions", "mixed"):
            raise ValueError(f"unknown ensemble rule {self.rule!r}")
        lo, hi = self.bounds
        if not 0 < lo < hi:
            raise ValueError("bounds must satisfy 0 < lower < upper")
        if self.count < 1:
            raise ValueError("count must be positive")

    @property
    def log_bounds(self) -> tuple[float, float]:
        return float(np.log(self.bounds[0])), float(np.log(self.bounds[1]))

    @property
    def radius(self) -> float:
        """Radius of the origin-centred sup-norm ball holding every log-conductivity."""
        return max(abs(v) for v in self.log_bounds)

    def _specs(self) -> list[tuple]:
        rng = np.random.default_rng(self.seed)
        klo, khi = self.log_bounds
        specs = []
        for i in range(self.count):
            if self.constant_every and i % self.constant_every == self.constant_every - 1:
                specs.append(("constant", rng.uniform(klo, khi)))
                continue
            kind = self.rule
            if kind == "mixed":
                kind = "bumps" if i % 2 == 0 else "inclusions"
            n = int(rng.integers(1, 4))
            base = rng.uniform(0.5 * klo, 0.5 * khi)
            parts = []
            for _ in range(n):
                c = _random_center(rng, 0.6)
                size = rng.uniform(0.15, 0.35)
                amp = rng.uniform(klo, khi)
                parts.append((c, size, amp))
            specs.append((kind, base, parts))
        return specs

    def log_fields(self, mesh: DiskMesh) -> list[ConductivityField]:
        """Log-conductivities, clipped into the log bounds."""
        klo, khi = self.log_bounds
        out = []
        for spec in self._specs():
            if spec[0] == "constant":
                out.append(ConductivityField.constant(mesh, spec[1], is_log=True))
                continue
            kind, base, parts = spec
            c = mesh.centroids
            kappa = np.full(mesh.n_triangles, base)
            for center, size, amp in parts:
                shape = bump(center, size) if kind == "bumps" else inclusion(center, size)
                kappa = kappa + amp * shape(c[:, 0], c[:, 1])
            out.append(ConductivityField(mesh, np.clip(kappa, klo, khi), is_log=True))
        return out

    def fields(self, mesh: DiskMesh) -> list[ConductivityField]:
        return [k.exp() for k in self.log_fields(mesh)]

    def monotone_pairs(self, mesh: DiskMesh) -> list[tuple[ConductivityField, ConductivityField]]:
        """Pairs ``sigma_1 <= sigma_2``: each sample and a copy raised on a random bump."""
        rng = np.random.default_rng([self.seed, 1])
        pairs = []
        c = mesh.centroids
        for s in self.fields(mesh):
            center = _random_center(rng, 0.6)
            amp = rng.uniform(0.2, 1.0)
            g = bump(center, rng.uniform(0.2, 0.4))(c[:, 0], c[:, 1])
            pairs.append((s, s * (1.0 + amp * g)))
        return pairs


def inclusion_perturbations(mesh: DiskMesh, count: int, contrast: float = 2.0, seed: int = 0) -> list[ConductivityField]:
    """Log-space perturbations ``+-log(contrast)`` on one random disk inclusion each."""
    rng = np.random.default_rng(seed)
    amp = np.log(contrast)
    c = mesh.centroids
    out = []
    for _ in range(count):
        center = _random_center(rng, 0.6)
        radius = rng.uniform(0.15, 0.35)
        sign = 1.0 if rng.uniform() < 0.5 else -1.0
        out.append(ConductivityField(mesh, sign * amp * inclusion(center, radius)(c[:, 0], c[:, 1]), is_log=True))
    return out
