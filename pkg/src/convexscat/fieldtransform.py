"""Change of variables for the total field and recovery of the coefficient.

The pipeline is u -> p = u/u_in -> v = Log(p)/k^2 with the principal
logarithm, then projection of v onto the wavenumber basis to get the vector
field V, and finally the pointwise elimination formula that reads a(x) off
the second derivatives of v at the lowest wavenumber.  Everything here is
pure array work; no solver state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .basis import BasisSet, KGrid, project
from .forward import CauchyData, Coefficient, Grid2D, IncidentWave

__all__ = [
    "NearZeroTotalField",
    "P_FLOOR",
    "LogField",
    "CoeffVectorField",
    "total_to_log",
    "log_to_coeffs",
    "cauchy_to_v_data",
    "smooth_traces",
    "recover_coefficient",
]

# Below this magnitude the normalized field is treated as a genuine zero of u
# and the logarithmic change of variables is refused.
P_FLOOR = 1e-8


class NearZeroTotalField(RuntimeError):
    """u/u_in came within P_FLOOR of zero somewhere; Log(p)/k^2 is meaningless there."""


@dataclass(frozen=True)
class LogField:
    """v(x, k) samples, shape (n_k, ny, nx), plus the branch diagnostic.

    branch_jumps counts k-adjacent samples whose phase of p differs by more
    than pi; the principal branch is kept regardless (flagged, not fixed).
    """

    grid: Grid2D
    kgrid: KGrid
    v: np.ndarray
    branch_jumps: int


@dataclass(frozen=True)
class CoeffVectorField:
    """The n_modes complex scalar fields (V, W, F, ...) of the elliptic system.

    data[r, i, j] is field r at node (x1_j, x2_i); lined() gives the single
    flat vector in the lined ordering (i fastest, then j, then r).
    """

    grid: Grid2D
    data: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.data.shape[0]

    def lined(self) -> np.ndarray:
        return self.grid.flatten(self.data)

    @classmethod
    def from_lined(cls, grid: Grid2D, flat: np.ndarray) -> "CoeffVectorField":
        return cls(grid=grid, data=grid.unflatten(np.asarray(flat)))


def _check_floor(p: np.ndarray, what: str) -> None:
    mag = np.abs(p)
    if mag.min() <= P_FLOOR:
        n_bad = int(np.count_nonzero(mag <= P_FLOOR))
        raise NearZeroTotalField(
            f"{what}: |u/u_in| <= {P_FLOOR:g} at {n_bad} samples (min {mag.min():.3e})"
        )


def total_to_log(fields: np.ndarray, wave: IncidentWave, grid: Grid2D, kg: KGrid) -> LogField:
    """v = Log(u/u_in)/k^2 on the whole grid for every wavenumber midpoint."""
    fields = np.asarray(fields)
    X1, X2 = grid.mesh()
    ks = kg.midpoints
    u_in = np.stack([wave.field(X1, X2, k) for k in ks])
    p = fields / u_in
    _check_floor(p, "total_to_log")
    v = np.log(p) / (ks[:, None, None] ** 2)
    jumps = int(np.count_nonzero(np.abs(np.diff(np.angle(p), axis=0)) > np.pi))
    return LogField(grid=grid, kgrid=kg, v=v, branch_jumps=jumps)


def log_to_coeffs(lf: LogField, bs: BasisSet) -> CoeffVectorField:
    """Project v onto the basis: V[n] = int v(., k) Phi_n(k) dk, midpoint rule."""
    coeffs = project(np.moveaxis(lf.v, 0, -1), bs)
    return CoeffVectorField(grid=lf.grid, data=np.moveaxis(coeffs, -1, 0))


def cauchy_to_v_data(cd: CauchyData, wave: IncidentWave, bs: BasisSet):
    """Transform measured traces (g0, g1) into basis coefficients (G0, G1) on Gamma.

    g~0 = Log(g0/u_in)/k^2 and, by the chain rule through v = Log(u/u_in)/k^2,
    g~1 = (g1/g0 - ik d2)/k^2.  Both are then projected; returned arrays have
    shape (n_modes, n_nodes).
    """
    kg = cd.kgrid
    if not np.allclose(kg.midpoints, bs.kgrid.midpoints):
        raise ValueError("basis and data live on different wavenumber grids")
    ks = kg.midpoints
    x1 = cd.grid.nodes
    u_in = wave.field(x1[:, None], cd.grid.half_width, ks[None, :])
    p0 = cd.g0 / u_in
    _check_floor(p0, "cauchy_to_v_data")
    k2 = ks[None, :] ** 2
    gt0 = np.log(p0) / k2
    gt1 = (cd.g1 / cd.g0 - 1j * ks[None, :] * wave.direction[1]) / k2
    return project(gt0, bs).T.copy(), project(gt1, bs).T.copy()


def smooth_traces(G: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian smoothing of mode traces along the measurement line.

    G has shape (n_modes, n_nodes); each row is filtered along the node axis
    with a kernel of width sigma grid spacings (real and imaginary parts
    separately, edge values extended).  Measured traces carry white noise at
    the grid scale while the underlying field is smooth in x1, so the filter
    removes the part of the data that the second-difference recovery would
    otherwise amplify by 1/h^2.
    """
    if sigma <= 0:
        return G
    return (
        gaussian_filter1d(G.real, sigma, axis=-1, mode="nearest")
        + 1j * gaussian_filter1d(G.imag, sigma, axis=-1, mode="nearest")
    )


def _second_diff(f: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Second derivative, centered inside, one-sided second order at the ends."""
    f = np.moveaxis(f, axis, 0)
    out = np.empty_like(f)
    out[1:-1] = f[2:] - 2 * f[1:-1] + f[:-2]
    out[0] = 2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]
    out[-1] = 2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]
    return np.moveaxis(out, 0, axis) / (h * h)


def recover_coefficient(V: CoeffVectorField, bs: BasisSet, k_eval: float | None = None) -> Coefficient:
    """Read the coefficient off v at one wavenumber (lowest by default).

    v(., k) = sum_n V_n Phi_n(k), then a = -Re[Lap v + k^2 (grad v . grad v)
    - 2ik dv/dx2] for the downward incident direction; derivatives are second
    order everywhere (one-sided at the boundary).  No sign clamping here;
    the caller decides when negatives get cut.
    """
    grid = V.grid
    if grid.n_nodes < 4:
        raise ValueError("recovery stencils need at least 4 nodes per side")
    k = bs.kgrid.k_min if k_eval is None else float(k_eval)
    v = np.tensordot(bs.eval_phi(k), V.data, axes=(0, 0))
    h = grid.h
    v1 = np.gradient(v, h, axis=1, edge_order=2)
    v2 = np.gradient(v, h, axis=0, edge_order=2)
    lap = _second_diff(v, h, axis=0) + _second_diff(v, h, axis=1)
    a = -np.real(lap + k * k * (v1 * v1 + v2 * v2) - 2j * k * v2)
    return Coefficient(grid=grid, values=a)
