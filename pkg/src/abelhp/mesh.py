"""Mesh of half-open elements (t_{n-1}, t_n] on [0, T] with per-element degrees."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .orthopoly import DOMAIN_TOL, Element

__all__ = ["Mesh", "uniform_mesh", "sigma", "locate"]


@dataclass(eq=False)
class Mesh:
    """Breakpoints 0 = t_0 < ... < t_N = T and polynomial degrees M_1..M_N.

    Element n (1-based) is the half-open interval (t_{n-1}, t_n]; immutable
    after construction and freely shareable.
    """

    breakpoints: np.ndarray
    degrees: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        deg = np.asarray(self.degrees, dtype=int)
        if bp.ndim != 1 or bp.size < 2:
            raise ValueError("need at least two breakpoints")
        if bp[0] != 0.0:
            raise ValueError("mesh must start at t = 0")
        if np.any(np.diff(bp) <= 0.0):
            raise ValueError("breakpoints must be strictly increasing")
        if deg.shape != (bp.size - 1,):
            raise ValueError("need one degree per element")
        if np.any(deg < 1):
            raise ValueError("element degrees must be >= 1")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "degrees", deg)

    @property
    def N(self) -> int:
        return self.breakpoints.size - 1

    @property
    def T(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    @property
    def h_max(self) -> float:
        return float(self.widths.max())

    @property
    def M_min(self) -> int:
        return int(self.degrees.min())

    @property
    def L(self) -> int:
        """Total number of unknown coefficients."""
        return int(np.sum(self.degrees + 1))

    def element(self, n: int) -> Element:
        """The n-th element, n = 1..N."""
        if not 1 <= n <= self.N:
            raise IndexError(f"element index {n} outside 1..{self.N}")
        return Element(
            float(self.breakpoints[n - 1]),
            float(self.breakpoints[n]),
            int(self.degrees[n - 1]),
        )

    def with_degrees(self, degrees) -> "Mesh":
        return Mesh(self.breakpoints.copy(), np.asarray(degrees, dtype=int))

    def to_config(self) -> dict:
        return {
            "breakpoints": [float(t) for t in self.breakpoints],
            "degrees": [int(m) for m in self.degrees],
        }

    @staticmethod
    def from_config(cfg: dict, T: float | None = None) -> "Mesh":
        """Build a mesh from JSON-style config.

        Either explicit {"breakpoints": [...], "degrees": [...]} or uniform
        {"N": n, "T": t, "M": degree}; a scalar degree is broadcast.
        """
        if "breakpoints" in cfg:
            bp = np.asarray(cfg["breakpoints"], dtype=float)
            deg = cfg.get("degrees", cfg.get("M", 1))
            if np.isscalar(deg):
                deg = np.full(bp.size - 1, int(deg))
            return Mesh(bp, np.asarray(deg, dtype=int))
        N = int(cfg["N"])
        T_cfg = cfg.get("T", T)
        if T_cfg is None:
            raise ValueError("mesh config needs T (or breakpoints)")
        deg = cfg.get("degrees", cfg.get("M", 1))
        if np.isscalar(deg):
            return uniform_mesh(N, float(T_cfg), int(deg))
        return Mesh(np.linspace(0.0, float(T_cfg), N + 1), np.asarray(deg, dtype=int))


def uniform_mesh(N: int, T: float, M: int) -> Mesh:
    """N equal elements on [0, T], all with polynomial degree M."""
    if N < 1 or M < 1:
        raise ValueError("need N >= 1 and M >= 1")
    if not T > 0.0:
        raise ValueError("T must be positive")
    return Mesh(np.linspace(0.0, T, N + 1), np.full(N, M, dtype=int))


def sigma(lam, t, n: int, mesh: Mesh):
    """Rescaling map of element n onto (t_{n-1}, t]: affine, increasing.

    Sends t_{n-1} to itself and t_n to t, so quadrature nodes of the element
    land inside the integration range of the current evaluation point.
    """
    elem = mesh.element(n)
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < elem.left - DOMAIN_TOL) or np.any(lam > elem.right + DOMAIN_TOL):
        raise ValueError("lambda outside element")
    if not (elem.left < t <= elem.right + DOMAIN_TOL):
        raise ValueError("t outside element (left endpoint excluded)")
    out = elem.left + (lam - elem.left) * (t - elem.left) / elem.width
    return float(out) if out.ndim == 0 else out


def locate(t, mesh: Mesh):
    """Element index n (1-based) with t in (t_{n-1}, t_n]."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0.0) or np.any(t_arr > mesh.T + DOMAIN_TOL * max(1.0, mesh.T)):
        raise ValueError(f"point outside (0, {mesh.T}]: {t!r}")
    idx = np.searchsorted(mesh.breakpoints, t_arr, side="left")
    idx = np.minimum(idx, mesh.N)
    return int(idx) if t_arr.ndim == 0 else idx
