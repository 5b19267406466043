"""Data carrier construction.

F lifts the transformed boundary data into the volume so that the unknown
remainder W = V - F has homogeneous Cauchy data on the top boundary.  The
lift is first-order in x2, shaped by a smooth cutoff that kills everything
in the lower part of the domain where backscatter data cannot see well.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fieldtransform import CoeffVectorField
from .forward import Grid2D

__all__ = ["CutoffProfile", "build_cutoff", "build_carrier"]


@dataclass(frozen=True)
class CutoffProfile:
    """chi sampled on the x2 grid line: 0 below -xi, 1 above half_width - xi."""

    half_width: float
    xi: float
    values: np.ndarray


def _chi0(t: np.ndarray, half_width: float, xi: float) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > -xi
    out[pos] = np.exp(-half_width / (t[pos] + xi))
    return out


def build_cutoff(half_width: float, xi: float, grid: Grid2D) -> CutoffProfile:
    """Sample chi(t) = chi0(t) / (chi0(t) + chi0(R - t - 2 xi)) on grid rows.

    The two bump halves never vanish together on [-R, R], so the ratio is
    well defined; this is asserted rather than patched.
    """
    if not (0 < xi < half_width):
        raise ValueError("need 0 < xi < half_width")
    t = grid.nodes
    c_lo = _chi0(t, half_width, xi)
    c_hi = _chi0(half_width - t - 2 * xi, half_width, xi)
    den = c_lo + c_hi
    if np.any(den <= 0):
        raise ArithmeticError("cutoff denominator vanished on the grid line")
    return CutoffProfile(half_width=half_width, xi=xi, values=c_lo / den)


def build_carrier(G0: np.ndarray, G1: np.ndarray, cutoff: CutoffProfile, grid: Grid2D) -> CoeffVectorField:
    """F_n(x) = [G0_n(x1) + (x2 - R) G1_n(x1)] chi(x2).

    G0, G1 are the boundary coefficient arrays of shape (n_modes, n_nodes).
    Because the x2-dependent factors do not involve k, combining the already
    projected data is identical to projecting the lifted scalar field; on the
    top row chi = 1 and the linear term vanishes, so F equals G0 there
    exactly, and the discrete Neumann trace is G1 once h < xi.
    """
    G0 = np.asarray(G0)
    G1 = np.asarray(G1)
    if G0.shape != G1.shape or G0.shape[1] != grid.n_nodes:
        raise ValueError("boundary coefficient arrays must be (n_modes, n_nodes)")
    x2 = grid.nodes
    lift = G0[:, None, :] + (x2[None, :, None] - grid.half_width) * G1[:, None, :]
    return CoeffVectorField(grid=grid, data=lift * cutoff.values[None, :, None])
