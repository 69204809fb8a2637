"""Fourier ground truth for the lattice Z^d.

Right multiplication by w on l2(Z^d) is diagonalised by the Fourier transform,
becoming multiplication by the trigonometric polynomial
``w_hat(theta) = sum_g c_g exp(i g . theta)`` on the torus.  The spectral
density function is then the normalised Lebesgue measure of
``{theta : |w_hat(theta)|^2 <= lambda^2}`` and the k-th moment of the measure
of w w* is the torus average of ``|w_hat|^(2k)``.  Both are computed with the
midpoint rule on an N^d grid; every value is returned with the change observed
when the grid is halved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, ResourceCapError
from .groups import IntegerLattice
from .ring import RingElement

DEFAULT_N = {1: 4096, 2: 512, 3: 96}
MAX_DIM = 3
MAX_MOMENT = 20


@dataclass(frozen=True)
class TorusSymbol:
    dim: int
    support: tuple[tuple[tuple[int, ...], complex], ...]

    @classmethod
    def of(cls, w: RingElement) -> "TorusSymbol":
        if not isinstance(w.space, IntegerLattice):
            raise DomainError("the torus oracle applies to lattice group rings only")
        if w.space.dim > MAX_DIM:
            raise ResourceCapError("torus dimension", w.space.dim, MAX_DIM)
        return cls(w.space.dim, tuple(w.terms.items()))

    def __call__(self, *thetas: np.ndarray) -> np.ndarray:
        shape = np.broadcast(*thetas).shape
        out = np.zeros(shape, dtype=complex)
        for g, c in self.support:
            phase = sum(k * th for k, th in zip(g, thetas))
            out = out + c * np.exp(1j * phase)
        return out

    def on_grid(self, n: int) -> np.ndarray:
        """Symbol values at the N^d midpoints (2 pi (j + 1/2) / N), flattened."""
        th = 2 * np.pi * (np.arange(n) + 0.5) / n
        axes = np.meshgrid(*([th] * self.dim), indexing="ij", sparse=True)
        return np.broadcast_to(self(*axes), (n,) * self.dim).ravel()

    def abs2_on_grid(self, n: int) -> np.ndarray:
        return np.abs(self.on_grid(n)) ** 2


@dataclass(frozen=True)
class OracleValue:
    value: np.ndarray | float
    refinement_delta: np.ndarray | float


def _grid_n(dim: int, n: int | None) -> int:
    n = DEFAULT_N[dim] if n is None else n
    if n < 2:
        raise ValueError("quadrature grid needs at least 2 points per axis")
    return n


def _sdf_values(abs2: np.ndarray, lam: np.ndarray) -> np.ndarray:
    s = np.sort(abs2)
    # level sets of a constant symbol are hit up to rounding
    slack = 1e-12 * max(1.0, float(s[-1]))
    return np.searchsorted(s, lam**2 + slack, side="right") / s.size


def torus_sdf(w: RingElement, lambda_grid: Sequence[float], n: int | None = None) -> OracleValue:
    """F(R_w) sampled on ``lambda_grid`` by midpoint quadrature."""
    sym = TorusSymbol.of(w)
    n = _grid_n(sym.dim, n)
    lam = np.asarray(lambda_grid, dtype=float)
    if lam.size and np.any(np.diff(lam) < 0):
        raise ValueError("lambda grid must be sorted")
    fine = _sdf_values(sym.abs2_on_grid(n), lam)
    coarse = _sdf_values(sym.abs2_on_grid(n // 2), lam)
    return OracleValue(fine, np.abs(fine - coarse))


def torus_moment(w: RingElement, k: int, n: int | None = None) -> OracleValue:
    """k-th moment of the spectral measure of w w*: torus mean of |w_hat|^(2k)."""
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    if k > MAX_MOMENT:
        raise ResourceCapError("moment order", k, MAX_MOMENT)
    sym = TorusSymbol.of(w)
    n = _grid_n(sym.dim, n)
    fine = float(np.mean(sym.abs2_on_grid(n) ** k))
    coarse = float(np.mean(sym.abs2_on_grid(n // 2) ** k))
    return OracleValue(fine, abs(fine - coarse))


def torus_trace_moment(z: RingElement, k: int, n: int | None = None) -> OracleValue:
    """k-th moment of the spectral measure of a self-adjoint z: mean of z_hat^k."""
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    if k > MAX_MOMENT:
        raise ResourceCapError("moment order", k, MAX_MOMENT)
    if not z.is_self_adjoint():
        raise DomainError("z must be self-adjoint")
    sym = TorusSymbol.of(z)
    n = _grid_n(sym.dim, n)
    fine = float(np.mean(sym.on_grid(n).real ** k))
    coarse = float(np.mean(sym.on_grid(n // 2).real ** k))
    return OracleValue(fine, abs(fine - coarse))


def torus_atoms(
    w: RingElement, n: int | None = None, jump_threshold: float = 0.01, tol: float = 1e-9
) -> list[float]:
    """lambda values where the oracle CDF jumps by at least ``jump_threshold``.

    A jump means |w_hat|^2 takes one value on a set of positive measure; the
    scan looks for such plateaus at both N and N/2 and keeps those seen at both.
    """
    sym = TorusSymbol.of(w)
    n = _grid_n(sym.dim, n)

    def plateaus(m: int) -> list[float]:
        s = np.sort(sym.abs2_on_grid(m))
        breaks = np.flatnonzero(np.diff(s) > tol) + 1
        starts = np.r_[0, breaks]
        ends = np.r_[breaks, s.size]
        return [
            float(np.sqrt(max(s[a:b].mean(), 0.0)))
            for a, b in zip(starts, ends)
            if (b - a) / s.size >= jump_threshold
        ]

    coarse = plateaus(n // 2)
    return [a for a in plateaus(n) if any(abs(a - b) <= 1e-6 for b in coarse)]
