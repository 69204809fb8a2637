"""Markov-type operators of lcmg's and their spectral data.

The operator of an lcmg acts on functions on the vertices by summing incoming
labels: ``(M f)(u) = sum over edges (w, u) of L(w, u) f(w)``, so the matrix
entry ``M[y, x]`` is the label of the edge ``x -> y``.  Moments of the spectral
measure at the basepoint are weighted closed-walk sums; for finite graphs the
measure itself comes from a dense Hermitian eigendecomposition.
"""

from __future__ import annotations

import bisect
import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, NumericError, ResourceCapError
from .groups import DEFAULT_QUOTIENT_CAP, QuotientChain, Space
from .lcmg import Lcmg, cayley_ball, cayley_lcmg_finite
from .ring import RingElement, SymmetrizedSupport, symmetrize

DEFAULT_MOMENT_CAP = 20
MERGE_RTOL = 1e-9
KERNEL_RTOL = 1e-12
PSD_RTOL = 1e-9
# masses below this are eigenvectors invisible from the basepoint
MASS_FLOOR = 1e-15


@dataclass(eq=False)
class MarkovOperator:
    graph: Lcmg
    matrix: sp.csr_matrix

    @classmethod
    def from_lcmg(cls, g: Lcmg) -> "MarkovOperator":
        n = len(g)
        rows = [v for (_, v) in g.edges]
        cols = [u for (u, _) in g.edges]
        data = np.array(list(g.edges.values()), dtype=complex)
        if not np.any(data.imag):
            data = data.real
        m = sp.csr_matrix((data, (rows, cols)), shape=(n, n), dtype=data.dtype)
        return cls(g, m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    @property
    def norm_bound(self) -> float:
        """max(row, column) absolute sum; an upper bound for the operator norm."""
        a = abs(self.matrix)
        rows = np.asarray(a.sum(axis=1)).ravel()
        cols = np.asarray(a.sum(axis=0)).ravel()
        return float(max(rows.max(initial=0.0), cols.max(initial=0.0)))

    def asymmetry(self) -> float:
        """max |M - M^H| entry."""
        d = self.matrix - self.matrix.conj().T
        return float(abs(d).max()) if d.nnz else 0.0

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return self.asymmetry() <= tol


def walk_moments(op: MarkovOperator, kmax: int, at: int | None = None) -> list[complex]:
    """<M^k delta, delta> for k = 0..kmax by repeated sparse products."""
    at = op.graph.basepoint if at is None else at
    v = np.zeros(op.dim, dtype=complex)
    v[at] = 1.0
    out = [complex(v[at])]
    for _ in range(kmax):
        v = op.matrix @ v
        out.append(complex(v[at]))
    return out


def moment_by_walks(
    space: Space, sym: SymmetrizedSupport, k: int, cap: int = DEFAULT_MOMENT_CAP
) -> complex:
    """Weighted closed-walk sum of length k at the identity of a Cayley lcmg.

    A closed walk of length k never leaves the ball of radius k // 2, so the
    operator restricted to that ball gives the exact value.
    """
    return walk_moments_cayley(space, sym, k, cap)[k]


def walk_moments_cayley(
    space: Space, sym: SymmetrizedSupport, kmax: int, cap: int = DEFAULT_MOMENT_CAP
) -> list[complex]:
    if kmax < 0:
        raise ValueError("moment order must be nonnegative")
    if kmax > cap:
        raise ResourceCapError("moment order", kmax, cap)
    ball = cayley_ball(space, sym, kmax // 2, radius_cap=cap)
    return walk_moments(MarkovOperator.from_lcmg(ball.graph), kmax)


def quotient_operator(
    chain: QuotientChain, level: int, z: RingElement, cap: int = DEFAULT_QUOTIENT_CAP
) -> MarkovOperator:
    """Operator of the Cayley lcmg of z_n on G/K_n (right multiplication by z_n).

    ``z`` may be over G or already over the level-n quotient.
    """
    sym = symmetrize(z)
    g = cayley_lcmg_finite(chain, level, sym, cap)
    return MarkovOperator.from_lcmg(g)


@dataclass(frozen=True)
class KestenMeasure:
    """Atomic probability measure: sorted (location, mass) pairs."""

    locations: tuple[float, ...]
    masses: tuple[float, ...]
    bound: float
    dim: int = 1
    raw_eigenvalues: tuple[float, ...] = field(default=(), repr=False, compare=False)

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.locations, self.masses))

    @property
    def total_mass(self) -> float:
        return float(sum(self.masses))

    def cdf(self, x: float, tol: float | None = None) -> float:
        """mu((-inf, x]); atoms within ``tol`` above x count (default 1e-9 * bound)."""
        tol = MERGE_RTOL * self.bound if tol is None else tol
        i = bisect.bisect_right(self.locations, x + tol)
        return float(sum(self.masses[:i]))

    def moment(self, k: int) -> float:
        return float(sum(m * loc**k for loc, m in self.atoms))

    def to_json(self) -> dict:
        return {
            "bound": self.bound,
            "dim": self.dim,
            "atoms": [[loc, m] for loc, m in self.atoms],
        }


def _cluster(values: np.ndarray, tol: float) -> list[tuple[int, int]]:
    """Index ranges of sorted values whose consecutive gaps are <= tol."""
    spans = []
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > tol:
            spans.append((start, i))
            start = i
    return spans


def kesten_measure(op: MarkovOperator, at: int | None = None) -> KestenMeasure:
    """Spectral measure of a finite Hermitian operator at a vertex.

    Atoms sit at the eigenvalues, with mass |<u_j, delta_at>|^2 summed over each
    cluster of eigenvalues closer than 1e-9 * B (B the row-sum bound).
    """
    at = op.graph.basepoint if at is None else at
    bound = op.norm_bound
    if not op.is_hermitian(1e-12 * max(1.0, bound)):
        raise DomainError(f"operator is not Hermitian (asymmetry {op.asymmetry():.3g})")
    a = op.dense()
    try:
        evals, evecs = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(a) if a.size else float("nan")
        raise NumericError(f"eigensolver failed (dim {op.dim}, condition {cond:.3g}): {exc}") from exc
    weights = np.abs(evecs[at, :]) ** 2
    locs, masses = [], []
    for i, j in _cluster(evals, MERGE_RTOL * bound):
        m = float(weights[i:j].sum())
        if m <= MASS_FLOOR:
            continue
        locs.append(float(np.average(evals[i:j])))
        masses.append(m)
    total = sum(masses)
    if abs(total - 1.0) > 1e-9:
        raise NumericError(f"spectral masses sum to {total!r}")
    return KestenMeasure(tuple(locs), tuple(masses), bound, op.dim, tuple(map(float, evals)))


def counting_measure(op: MarkovOperator) -> KestenMeasure:
    """Normalised eigenvalue-counting measure (the normalised trace of the spectral projections).

    For a Cayley lcmg of a finite group every vertex sees the same measure, so
    this equals the Kesten measure at the basepoint and needs no eigenvectors.
    """
    bound = op.norm_bound
    if not op.is_hermitian(1e-12 * max(1.0, bound)):
        raise DomainError(f"operator is not Hermitian (asymmetry {op.asymmetry():.3g})")
    try:
        evals = np.linalg.eigvalsh(op.dense())
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed (dim {op.dim}): {exc}") from exc
    locs, masses = [], []
    for i, j in _cluster(evals, MERGE_RTOL * bound):
        locs.append(float(np.average(evals[i:j])))
        masses.append((j - i) / op.dim)
    return KestenMeasure(tuple(locs), tuple(masses), bound, op.dim, tuple(map(float, evals)))


@dataclass(frozen=True)
class SpectralDensityFunction:
    """F(lambda) = mu([0, lambda^2]) for the measure of z = w w*, lambda >= 0."""

    measure: KestenMeasure

    def __call__(self, lam):
        lam_arr = np.asarray(lam, dtype=float)
        if np.any(lam_arr < 0):
            raise DomainError("spectral density functions are defined for lambda >= 0")
        vals = [self.measure.cdf(float(x) ** 2) for x in lam_arr.ravel()]
        out = np.array(vals).reshape(lam_arr.shape)
        return float(out) if out.ndim == 0 else out

    @property
    def betti(self) -> float:
        return self.measure.masses[0] if self.measure.locations and self.measure.locations[0] == 0.0 else 0.0

    def to_csv(self, grid: Sequence[float]) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["lambda", "F"])
        for lam, val in zip(grid, self(np.asarray(grid, dtype=float))):
            writer.writerow([repr(float(lam)), repr(float(val))])
        return buf.getvalue()


def sdf_from_measure(mu: KestenMeasure) -> SpectralDensityFunction:
    """Clamp small negative atoms to 0 and merge the numerical kernel into one atom at 0.

    Atoms at or below tau = dim * B * 1e-12 count as kernel.
    """
    neg_tol = PSD_RTOL * mu.bound
    if mu.locations and mu.locations[0] < -neg_tol:
        raise NumericError(
            f"measure has mass at {mu.locations[0]:.3g} < 0; input is not of the form w w*"
        )
    tau = mu.dim * mu.bound * KERNEL_RTOL
    kernel = 0.0
    locs, masses = [], []
    for loc, m in mu.atoms:
        if loc <= tau:
            kernel += m
        else:
            locs.append(loc)
            masses.append(m)
    if kernel > 0.0:
        locs.insert(0, 0.0)
        masses.insert(0, kernel)
    return SpectralDensityFunction(
        KestenMeasure(tuple(locs), tuple(masses), mu.bound, mu.dim, mu.raw_eigenvalues)
    )


def betti(sdf: SpectralDensityFunction) -> float:
    """l2-Betti number F(0)."""
    return sdf.betti
