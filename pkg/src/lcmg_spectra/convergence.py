"""Run a quotient chain and compare its spectral data with the limit.

For every level the Cayley lcmg of z_n = w_n w_n* is built, its operator is
diagonalised, and the spectral density function and l2-Betti number are
read off the basepoint measure.  The level is also compared with the
infinite Cayley lcmg: the largest radius with isomorphic balls is certified
and checked against the word-length guarantee, and moments up to that radius
must coincide with the closed-walk moments of the infinite graph.  Lattice
models additionally get a pointwise comparison with the Fourier oracle.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import LcmgSpectraError
from .groups import IntegerLattice, QuotientChain, injectivity_radius
from .lcmg import Ball, ball_agreement_radius, cayley_ball_infinite, cayley_lcmg_finite
from .oracle import torus_atoms, torus_sdf
from .ring import RingElement, SymmetrizedSupport, gram, symmetrize
from .spectral import (
    KestenMeasure,
    MarkovOperator,
    counting_measure,
    sdf_from_measure,
    walk_moments_cayley,
)

log = logging.getLogger(__name__)

MOMENT_RTOL = 1e-9
ATOM_MASS_THRESHOLD = 0.01
SDF_JITTER = 0.01
THREADS_ENV = "LCMG_SPECTRA_THREADS"


def continuity_grid(
    requested: Sequence[float], atoms: Sequence[float] = (), exclusion_delta: float = 1e-3
) -> list[float]:
    """Drop grid points within ``exclusion_delta`` of a known or suspected atom."""
    return [x for x in requested if all(abs(x - a) > exclusion_delta for a in atoms)]


def stable_atoms(
    previous: KestenMeasure,
    last: KestenMeasure,
    threshold: float = ATOM_MASS_THRESHOLD,
    tol: float = 1e-6,
) -> list[float]:
    """lambda = sqrt(location) of atoms with mass >= threshold at both levels."""
    found = []
    for loc, m in last.atoms:
        if m < threshold:
            continue
        if any(abs(loc - l2) <= tol and m2 >= threshold for l2, m2 in previous.atoms):
            found.append(float(np.sqrt(max(loc, 0.0))))
    return found


@dataclass
class LevelRecord:
    level: int
    order: int
    certified_radius: int = -1
    word_bound_radius: int = -1
    moments: list[float] = field(default_factory=list)
    sdf: list[float] = field(default_factory=list)
    betti: float | None = None
    deviation: float | None = None
    error: str | None = None
    measure: KestenMeasure | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("measure")
        d["atoms"] = self.measure.to_json()["atoms"] if self.measure else []
        return d


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{self.name}: {'PASS' if self.passed else 'FAIL'}" + (f" ({self.detail})" if self.detail else "")


@dataclass
class ConvergenceReport:
    model: str
    w: list[dict]
    grid: list[float]
    filtered_grid: list[float]
    excluded_atoms: list[float]
    radius_cap: int
    limit_moments: list[float]
    oracle_sdf: list[float] | None
    oracle_delta: list[float] | None
    limit_betti: float | None
    levels: list[LevelRecord]
    checks: list[Check] = field(default_factory=list)

    @property
    def status(self) -> str:
        if not all(c.passed for c in self.checks):
            return "failed"
        return "verified" if self.oracle_sdf is not None else "consistent"

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def betti_sequence(self) -> list[float | None]:
        return [r.betti for r in self.levels]

    def to_json(self) -> dict:
        return {
            "model": self.model,
            "w": self.w,
            "grid": self.grid,
            "filtered_grid": self.filtered_grid,
            "excluded_atoms": self.excluded_atoms,
            "radius_cap": self.radius_cap,
            "limit": {
                "moments": self.limit_moments,
                "oracle_sdf": self.oracle_sdf,
                "oracle_delta": self.oracle_delta,
                "betti": self.limit_betti,
            },
            "levels": [r.to_json() for r in self.levels],
            "checks": [asdict(c) for c in self.checks],
            "status": self.status,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)

    def sdf_csv(self, level: int) -> str:
        rec = next(r for r in self.levels if r.level == level)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = ["lambda", "F"] + (["F_oracle"] if self.oracle_sdf is not None else [])
        writer.writerow(header)
        for i, lam in enumerate(self.grid):
            row = [repr(lam), repr(rec.sdf[i])]
            if self.oracle_sdf is not None:
                row.append(repr(self.oracle_sdf[i]))
            writer.writerow(row)
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [f"model: {self.model}   status: {self.status}"]
        header = f"{'level':>5} {'order':>8} {'radius':>6} {'bound':>5} {'betti':>12} {'max|dF|':>10}"
        lines.append(header)
        for r in self.levels:
            if r.error:
                lines.append(f"{r.level:>5} {r.order:>8}  error: {r.error}")
                continue
            dev = "-" if r.deviation is None else f"{r.deviation:.6f}"
            lines.append(
                f"{r.level:>5} {r.order:>8} {r.certified_radius:>6} {r.word_bound_radius:>5} "
                f"{r.betti:>12.9f} {dev:>10}"
            )
        lines.append(self.betti_line())
        lines.extend(c.line() for c in self.checks)
        return "\n".join(lines) + "\n"

    def betti_line(self) -> str:
        done = [r for r in self.levels if r.betti is not None]
        seq = ", ".join(format_fraction(r.betti, r.order) for r in done)
        if self.limit_betti is None:
            return f"betti: {seq} (no limit oracle)"
        check = next((c for c in self.checks if c.name == "betti limit"), None)
        verdict = "PASS" if check is None or check.passed else "FAIL"
        return f"betti: {seq} -> {format_fraction(self.limit_betti, 1)} (limit {format_fraction(self.limit_betti, 1)}: {verdict})"


def format_fraction(x: float, denominator_hint: int) -> str:
    """Print x as p/q when it is within 1e-9 of a fraction with q | hint."""
    frac = Fraction(x).limit_denominator(max(1, denominator_hint))
    if abs(float(frac) - x) <= 1e-9:
        return str(frac)
    return f"{x:.9g}"


def _level_record(
    chain: QuotientChain,
    level: int,
    sym: SymmetrizedSupport,
    grid: np.ndarray,
    k_moments: int,
    radius_cap: int,
    infinite: Ball,
) -> LevelRecord:
    order = chain.order(level)
    rec = LevelRecord(level, order)
    try:
        graph = cayley_lcmg_finite(chain, level, sym)
        op = MarkovOperator.from_lcmg(graph)
        # Cayley graphs are vertex-transitive: the basepoint measure is the counting measure
        mu = counting_measure(op)
        sdf = sdf_from_measure(mu)
        rec.measure = mu
        rec.moments = [mu.moment(k) for k in range(k_moments + 1)]
        rec.sdf = [float(v) for v in sdf(grid)] if grid.size else []
        rec.betti = sdf.betti
        rec.certified_radius = ball_agreement_radius(graph, infinite, radius_cap)
        rec.word_bound_radius = injectivity_radius(chain, level, sym.generators, radius_cap)
    except LcmgSpectraError as exc:
        log.warning("level %d failed: %s", level, exc)
        rec.error = str(exc)
    return rec


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def run_chain(
    chain: QuotientChain,
    w: RingElement,
    levels: Sequence[int] | None = None,
    grid: Sequence[float] = (),
    k_moments: int = 10,
    radius_cap: int | None = None,
    exclusion_delta: float = 1e-3,
    sdf_tol: float = 0.05,
) -> ConvergenceReport:
    """Spectral data of w_n = pi_n(w) along the chain, compared with the limit."""
    if w.space != chain.model:
        raise LcmgSpectraError("w must be an element of the chain's group ring")
    levels = list(chain.levels if levels is None else levels)
    for lv in levels:
        chain.quotient(lv)
    radius_cap = k_moments if radius_cap is None else radius_cap
    z = gram(w)
    sym = symmetrize(z)
    model = chain.model
    grid_arr = np.asarray(list(grid), dtype=float)

    limit_moments = [float(np.real(m)) for m in walk_moments_cayley(model, sym, k_moments)]
    infinite = cayley_ball_infinite(model, sym, radius_cap)

    oracle_vals = oracle_delta = None
    limit_betti = None
    if isinstance(model, IntegerLattice) and model.dim <= 3:
        ov = torus_sdf(w, grid_arr)
        oracle_vals = [float(v) for v in ov.value]
        oracle_delta = [float(v) for v in ov.refinement_delta]
        limit_betti = float(torus_sdf(w, [0.0]).value[0])
        atoms = torus_atoms(w)
    else:
        atoms = None

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        records = list(
            pool.map(
                lambda lv: _level_record(chain, lv, sym, grid_arr, k_moments, radius_cap, infinite),
                levels,
            )
        )

    done = [r for r in records if r.error is None]
    if atoms is None:
        atoms = stable_atoms(done[-2].measure, done[-1].measure) if len(done) >= 2 else []
    filtered = continuity_grid(list(map(float, grid_arr)), atoms, exclusion_delta)
    keep = set(filtered)
    mask = np.array([x in keep for x in grid_arr], dtype=bool)

    prev = None
    for r in done:
        cur = np.asarray(r.sdf)
        if oracle_vals is not None and mask.any():
            r.deviation = float(np.max(np.abs(cur[mask] - np.asarray(oracle_vals)[mask])))
        elif prev is not None and mask.any():
            r.deviation = float(np.max(np.abs(cur[mask] - prev[mask])))
        prev = cur

    report = ConvergenceReport(
        model=model.describe(),
        w=w.to_json(),
        grid=list(map(float, grid_arr)),
        filtered_grid=filtered,
        excluded_atoms=atoms,
        radius_cap=radius_cap,
        limit_moments=limit_moments,
        oracle_sdf=oracle_vals,
        oracle_delta=oracle_delta,
        limit_betti=limit_betti,
        levels=records,
    )
    report.checks = _checks(report, done, k_moments, sdf_tol)
    return report


def _checks(report: ConvergenceReport, done: list[LevelRecord], k_moments: int, sdf_tol: float) -> list[Check]:
    checks = []
    failed = [r for r in report.levels if r.error is not None]
    if failed:
        checks.append(Check("levels completed", False, f"{len(failed)} level(s) failed"))

    radii = [r.certified_radius for r in done]
    checks.append(Check("certified radius nondecreasing", all(a <= b for a, b in zip(radii, radii[1:])),
                        ", ".join(map(str, radii))))
    mismatched = [r.level for r in done if r.certified_radius != r.word_bound_radius]
    checks.append(Check("certified radius matches word-length bound", not mismatched,
                        f"mismatch at levels {mismatched}" if mismatched else ""))

    for k in range(k_moments + 1):
        lim = report.limit_moments[k]
        tested = [r for r in done if r.certified_radius >= k]
        bad = [r.level for r in tested if abs(r.moments[k] - lim) > MOMENT_RTOL * max(1.0, abs(lim))]
        checks.append(Check(f"moment stability k={k}", not bad,
                            f"{len(tested)} certified level(s)" + (f", differs at {bad}" if bad else "")))

    if done and done[-1].deviation is not None:
        dev = done[-1].deviation
        if report.oracle_sdf is not None:
            ok = dev <= sdf_tol
            checks.append(Check("sdf deviation vs oracle", ok,
                                f"{dev:.6f} {'<=' if ok else '>'} {sdf_tol}"))
        else:
            # no limit to compare with: successive differences must not grow
            devs = [r.deviation for r in done[-3:] if r.deviation is not None]
            ok = all(b <= a + SDF_JITTER for a, b in zip(devs, devs[1:]))
            checks.append(Check("sdf deviation vs previous level nonincreasing", ok,
                                ", ".join(f"{d:.6f}" for d in devs)))
    if report.limit_betti is not None and done:
        gap = abs(done[-1].betti - report.limit_betti)
        checks.append(Check("betti limit", gap <= sdf_tol, f"|b_n - b| = {gap:.3g}"))
    return checks
