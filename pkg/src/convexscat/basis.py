"""Orthonormal wavenumber basis and the coupling matrices of the elliptic system.

The basis {Phi_n} is the Gram-Schmidt orthonormalization of

    psi_n(k) = (k - k0)**(n - 1) * exp(k - k0),   k0 = (k_min + k_max) / 2,

in L2(k_min, k_max).  Its defining feature is that the derivative-coupling
matrix d[m, n] = int Phi_m Phi_n' dk has unit diagonal and vanishing strict
lower triangle, which makes it invertible at any truncation order.  The
matrices D, S and the rank-3 tensor B computed here are the coefficients of
the coupled quasilinear elliptic system satisfied by the Fourier coefficient
fields of the log total field.

Two quadratures live side by side on purpose: a composite Gauss-Legendre rule
for all basis-internal integrals (D, S, B, orthonormality), and the midpoint
rule on the n_sub data subintervals for projecting sampled data onto the
basis, matching the measurement grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = [
    "BasisError",
    "KGrid",
    "BasisSet",
    "make_kgrid",
    "build_basis",
    "matrices_DSB",
    "project",
    "synthesize",
]

# Residual-norm fraction below which a raw basis function is declared
# numerically dependent on its predecessors.
GS_DEPENDENCE_TOL = 1e-12


class BasisError(ValueError):
    """Raised when the Gram-Schmidt process degenerates numerically."""


@dataclass(frozen=True)
class KGrid:
    """Wavenumber interval [k_min, k_max] with its two quadrature rules.

    midpoints are the centers of the n_sub uniform subintervals; they carry
    the measured multifrequency data and the midpoint projection rule.
    quad_nodes/quad_weights form a composite Gauss-Legendre rule used for
    basis-internal integrals.
    """

    k_min: float
    k_max: float
    n_sub: int
    midpoints: np.ndarray
    h_k: float
    quad_nodes: np.ndarray
    quad_weights: np.ndarray

    @property
    def k0(self) -> float:
        return 0.5 * (self.k_min + self.k_max)

    def quad_integrate(self, samples: np.ndarray) -> np.ndarray:
        """Integrate samples given on quad_nodes (last axis) over the interval."""
        return np.tensordot(samples, self.quad_weights, axes=(-1, 0))


def make_kgrid(
    k_min: float,
    k_max: float,
    n_sub: int,
    n_panels: int = 8,
    nodes_per_panel: int = 16,
) -> KGrid:
    """Build a KGrid with n_sub midpoint nodes and a composite GL quadrature."""
    if not (0 < k_min < k_max):
        raise ValueError(f"need 0 < k_min < k_max, got [{k_min}, {k_max}]")
    if n_sub < 1:
        raise ValueError("n_sub must be >= 1")
    h_k = (k_max - k_min) / n_sub
    midpoints = k_min + (np.arange(n_sub) + 0.5) * h_k

    xg, wg = leggauss(nodes_per_panel)
    edges = np.linspace(k_min, k_max, n_panels + 1)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (a + b) + 0.5 * (b - a) * xg)
        weights.append(0.5 * (b - a) * wg)
    return KGrid(
        k_min=float(k_min),
        k_max=float(k_max),
        n_sub=int(n_sub),
        midpoints=midpoints,
        h_k=h_k,
        quad_nodes=np.concatenate(nodes),
        quad_weights=np.concatenate(weights),
    )


def _psi(n: int, k: np.ndarray, k0: float) -> np.ndarray:
    """Raw basis function psi_n, n >= 1."""
    return (k - k0) ** (n - 1) * np.exp(k - k0)


def _dpsi(n: int, k: np.ndarray, k0: float) -> np.ndarray:
    """Analytic derivative psi_n' = (n-1)(k-k0)^(n-2) e^(k-k0) + psi_n."""
    e = np.exp(k - k0)
    if n == 1:
        return e
    return (n - 1) * (k - k0) ** (n - 2) * e + (k - k0) ** (n - 1) * e


@dataclass(frozen=True)
class BasisSet:
    """Orthonormal basis truncated at n_modes, with its coupling matrices.

    coeff[n, p] holds the Gram-Schmidt combination Phi_n = sum_p coeff[n, p] psi_{p+1},
    so Phi_n and Phi_n' can be evaluated at arbitrary k (the derivative always
    goes through the analytic psi', never through differencing).  phi/dphi are
    samples on the quadrature nodes, phi_mid/dphi_mid on the data midpoints.

    B[m, n, l] = b_{mn}^{(l)}.  Immutable after construction; safe to share.
    """

    kgrid: KGrid
    n_modes: int
    coeff: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    phi_mid: np.ndarray
    dphi_mid: np.ndarray
    mat_D: np.ndarray
    mat_S: np.ndarray
    tensor_B: np.ndarray

    def eval_phi(self, k, derivative: bool = False) -> np.ndarray:
        """Sample all Phi_n (or Phi_n') at the points k; shape (n_modes,) + k.shape."""
        k = np.asarray(k, dtype=float)
        raw = _dpsi if derivative else _psi
        samples = np.stack([raw(n, k, self.kgrid.k0) for n in range(1, self.n_modes + 1)])
        return np.tensordot(self.coeff, samples, axes=(1, 0))


def build_basis(kg: KGrid, n_modes: int) -> BasisSet:
    """Orthonormalize psi_1..psi_N on kg and assemble D, S, B.

    Modified Gram-Schmidt with one reorthogonalization pass; raises BasisError
    if some psi_n is numerically dependent on its predecessors, which signals
    that n_modes is too large for the interval.
    """
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    k, w, k0 = kg.quad_nodes, kg.quad_weights, kg.k0
    psi = np.stack([_psi(n, k, k0) for n in range(1, n_modes + 1)])
    dpsi = np.stack([_dpsi(n, k, k0) for n in range(1, n_modes + 1)])

    phi = np.zeros_like(psi)
    coeff = np.zeros((n_modes, n_modes))
    for n in range(n_modes):
        v = psi[n].copy()
        c = np.zeros(n_modes)
        c[n] = 1.0
        for _ in range(2):
            for m in range(n):
                r = np.sum(w * v * phi[m])
                v -= r * phi[m]
                c -= r * coeff[m]
        nrm = np.sqrt(np.sum(w * v * v))
        ref = np.sqrt(np.sum(w * psi[n] * psi[n]))
        if nrm < GS_DEPENDENCE_TOL * ref:
            raise BasisError(
                f"psi_{n + 1} is numerically dependent on psi_1..psi_{n} "
                f"(residual {nrm:.3e} vs norm {ref:.3e}); reduce n_modes"
            )
        phi[n] = v / nrm
        coeff[n] = c / nrm

    dphi = coeff @ dpsi
    mat_D, mat_S, tensor_B = _matrices_from_samples(phi, dphi, k, w)
    mids = kg.midpoints
    phi_mid = coeff @ np.stack([_psi(n, mids, k0) for n in range(1, n_modes + 1)])
    dphi_mid = coeff @ np.stack([_dpsi(n, mids, k0) for n in range(1, n_modes + 1)])
    return BasisSet(
        kgrid=kg,
        n_modes=n_modes,
        coeff=coeff,
        phi=phi,
        dphi=dphi,
        phi_mid=phi_mid,
        dphi_mid=dphi_mid,
        mat_D=mat_D,
        mat_S=mat_S,
        tensor_B=tensor_B,
    )


def _matrices_from_samples(phi, dphi, k, w):
    # d_mn = int Phi_m Phi_n' ; s_mn = -2i int Phi_m (Phi_n + k Phi_n') ;
    # b_mn^(l) = int 2k Phi_m Phi_n (Phi_l + k Phi_l')
    g = phi + k * dphi
    mat_D = np.einsum("mq,nq,q->mn", phi, dphi, w)
    mat_S = -2j * np.einsum("mq,nq,q->mn", phi, g, w)
    tensor_B = np.einsum("mq,nq,lq,q->mnl", phi, phi, g, 2.0 * k * w)
    return mat_D, mat_S, tensor_B


def matrices_DSB(bs: BasisSet, kg: KGrid):
    """Recompute (D, S, B) from the stored basis samples on kg's quadrature."""
    return _matrices_from_samples(bs.phi, bs.dphi, kg.quad_nodes, kg.quad_weights)


def project(samples: np.ndarray, bs: BasisSet) -> np.ndarray:
    """Midpoint-rule projection onto the basis.

    samples has the midpoint axis last, shape (..., n_sub); returns the
    coefficient array of shape (..., n_modes) with entry n approximating
    int f(k) Phi_n(k) dk.
    """
    samples = np.asarray(samples)
    if samples.shape[-1] != bs.kgrid.n_sub:
        raise ValueError(
            f"expected {bs.kgrid.n_sub} midpoint samples, got {samples.shape[-1]}"
        )
    return np.einsum("...r,nr->...n", samples, bs.phi_mid) * bs.kgrid.h_k


def synthesize(coeffs: np.ndarray, bs: BasisSet, use_derivative: bool = False) -> np.ndarray:
    """Evaluate sum_n c_n Phi_n (or Phi_n') on the midpoints; inverse of project."""
    coeffs = np.asarray(coeffs)
    if coeffs.shape[-1] != bs.n_modes:
        raise ValueError(f"expected {bs.n_modes} coefficients, got {coeffs.shape[-1]}")
    table = bs.dphi_mid if use_derivative else bs.phi_mid
    return np.einsum("...n,nr->...r", coeffs, table)
