"""Seeded Monte Carlo campaigns over the dilute Wigner ensemble.

Sample ``k`` of a campaign always draws its matrix from the substream
``(cfg.seed, k)``, and per-sample observable values land in slot ``k`` of a
preallocated array. Reduction is one sequential pass over that array, so the
estimates are bit-identical for any worker count.

Covariances follow the convention C(z1, z2) = E g1 g2 - E g1 E g2 without
complex conjugation; the variance E|g - Eg|^2 is C(z, conj z).
"""
from __future__ import annotations

import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from multiprocessing import get_context
from typing import Iterable, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from . import theory
from .eig import eigen_decompose, empirical_cdf, ks_distance
from .ensemble import EnsembleConfig, draw_sample
from .resolvent import (
    SpectralPoint,
    UsageError,
    diag_resolvent,
    diag_resolvent_sq,
    observable_B12,
    observable_L,
    observable_U12,
    squared_vectors,
)

OBSERVABLES = ("g", "trG2", "B12", "U12", "L")
PAIR_OBSERVABLES = ("B12", "U12", "L")
VECTOR_OBSERVABLES = frozenset(PAIR_OBSERVABLES)

CSV_COLUMNS = (
    "observable", "re_z1", "im_z1", "re_z2", "im_z2", "n", "p", "M",
    "re_value", "im_value", "stderr", "re_theory", "im_theory",
)


def _debug_enabled() -> bool:
    return os.environ.get("DILUTE_WIGNER_DEBUG", "") not in ("", "0")


@dataclass(frozen=True)
class MCEstimate:
    value: complex
    stderr: float
    samples: int
    seed: int
    wall_time: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.value.real) and np.isfinite(self.value.imag)):
            raise ValueError("estimate is not finite")
        if self.stderr < 0:
            raise ValueError("stderr must be nonnegative")


@dataclass(frozen=True)
class CampaignSpec:
    """What to measure.

    ``pairs`` index into ``points``; by default every (a, b) with a < b.
    Pair observables and the covariance ``C`` are evaluated on pairs, the
    rest on single points.
    """

    cfg: EnsembleConfig
    points: tuple[complex, ...]
    observables: tuple[str, ...] = ("g",)
    M: int = 1000
    batches: int = 100
    pairs: tuple[tuple[int, int], ...] | None = None
    covariance: bool = True
    backend: str = "lapack"

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(complex(z) for z in self.points))
        object.__setattr__(self, "observables", tuple(self.observables))
        unknown = set(self.observables) - set(OBSERVABLES)
        if unknown:
            raise UsageError(f"unknown observables {sorted(unknown)}")
        if not self.points:
            raise UsageError("campaign needs at least one spectral point")
        if any(z.imag == 0 for z in self.points):
            raise UsageError("spectral points must be off the real axis")
        if not (self.M >= self.batches >= 2):
            raise UsageError(f"need M >= batches >= 2, got M={self.M}, batches={self.batches}")
        if self.pairs is None:
            object.__setattr__(self, "pairs", tuple(combinations(range(len(self.points)), 2)))
        else:
            object.__setattr__(self, "pairs", tuple((int(a), int(b)) for a, b in self.pairs))
        for a, b in self.pairs:
            if not (0 <= a < len(self.points) and 0 <= b < len(self.points)):
                raise UsageError(f"pair {(a, b)} out of range")
        if self.needs_vectors and not self.pairs:
            raise UsageError("pair observables requested but no point pairs available")
        v = self.cfg.law.v
        for z in self.points:
            if not SpectralPoint(z, self.cfg.law.v2).in_lambda_v:
                warnings.warn(f"z={z} lies outside |Im z| >= {2 * v + 1:g}", stacklevel=3)

    @property
    def needs_vectors(self) -> bool:
        return bool(VECTOR_OBSERVABLES & set(self.observables))

    def columns(self) -> list[tuple[str, tuple]]:
        """Per-sample column labels: (observable, point indices)."""
        cols: list[tuple[str, tuple]] = []
        track_g = "g" in self.observables or self.covariance
        for a in range(len(self.points)):
            if track_g:
                cols.append(("g", (a,)))
            if "trG2" in self.observables:
                cols.append(("trG2", (a,)))
        for obs in PAIR_OBSERVABLES:
            if obs in self.observables:
                cols.extend((obs, pair) for pair in self.pairs)
        return cols


def evaluate_sample(spec: CampaignSpec, index: int) -> np.ndarray:
    """All per-sample observables of matrix ``index`` in column order."""
    h = draw_sample(spec.cfg, index)
    s = eigen_decompose(h, want_vectors=spec.needs_vectors, backend=spec.backend)
    lam = s.eigenvalues
    pts = spec.points
    r = [1.0 / (lam - z) for z in pts]
    diag: dict[int, np.ndarray] = {}
    diag_sq: dict[int, np.ndarray] = {}
    if spec.needs_vectors:
        usq = squared_vectors(s)
        used = {i for pair in spec.pairs for i in pair}
        for i in used:
            diag[i] = diag_resolvent(s, pts[i], usq)
            diag_sq[i] = diag_resolvent_sq(s, pts[i], usq)
    out = []
    for obs, idx in spec.columns():
        if obs == "g":
            out.append(np.mean(r[idx[0]]))
        elif obs == "trG2":
            out.append(np.mean(r[idx[0]] ** 2))
        elif obs == "B12":
            out.append(observable_B12(diag[idx[0]], diag[idx[1]]))
        elif obs == "U12":
            out.append(observable_U12(diag_sq[idx[0]], diag[idx[1]]))
        elif obs == "L":
            out.append(observable_L(diag_sq[idx[0]], diag[idx[0]], diag[idx[1]]))
    row = np.array(out, dtype=complex)
    if _debug_enabled():
        _assert_bounds(spec, row)
    return row


def _assert_bounds(spec: CampaignSpec, row: np.ndarray):
    tol = 1 + 1e-12
    for val, (obs, idx) in zip(row, spec.columns()):
        y = [abs(spec.points[i].imag) for i in idx]
        if obs == "g":
            assert val.imag * spec.points[idx[0]].imag > 0, "Herglotz property violated"
            assert abs(val) <= tol / y[0]
        elif obs == "trG2":
            assert abs(val) <= tol / y[0] ** 2
        elif obs == "B12":
            assert abs(val) <= tol / (y[0] * y[1])
        elif obs == "U12":
            assert abs(val) <= tol / (y[0] ** 2 * y[1])
        elif obs == "L":
            assert abs(val) <= tol / (y[0] ** 3 * y[1] ** 2)


def _run_chunk(args) -> tuple[int, np.ndarray]:
    spec, start, stop = args
    with threadpool_limits(limits=1):
        rows = np.empty((stop - start, len(spec.columns())), dtype=complex)
        for k in range(start, stop):
            rows[k - start] = evaluate_sample(spec, k)
    return start, rows


def sample_table(spec: CampaignSpec, threads: int = 1) -> np.ndarray:
    """(M, ncols) complex array of per-sample values, slot k = sample k."""
    M = spec.M
    out = np.empty((M, len(spec.columns())), dtype=complex)
    threads = max(1, int(threads))
    if threads == 1:
        out[:] = _run_chunk((spec, 0, M))[1]
        return out
    nchunks = min(M, threads * 8)
    bounds = np.linspace(0, M, nchunks + 1).astype(int)
    jobs = [(spec, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=threads, mp_context=get_context("spawn")) as pool:
        for start, rows in pool.map(_run_chunk, jobs):
            out[start:start + rows.shape[0]] = rows
    return out


# --- estimators --------------------------------------------------------------

def _complex_std(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.abs(x - x.mean()) ** 2) * x.size / (x.size - 1)))


def covariance(x: np.ndarray, y: np.ndarray) -> complex:
    """Unbiased sample covariance, no conjugation."""
    m = x.size
    return complex(np.sum((x - x.mean()) * (y - y.mean())) / (m - 1))


def batch_mean(x: np.ndarray, batches: int) -> tuple[complex, float]:
    """Mean and batch-means stderr over contiguous blocks."""
    means = np.array([b.mean() for b in np.array_split(x, batches)])
    return complex(x.mean()), _complex_std(means) / math.sqrt(batches)


def batch_covariance(x: np.ndarray, y: np.ndarray, batches: int) -> tuple[complex, float]:
    """Covariance and the spread of per-batch covariances.

    Each batch needs two samples, so ``batches`` is capped at M // 2. Below
    two such batches the jackknife is used; with M = 2 no spread estimate
    exists and the stderr is reported as inf.
    """
    m = x.size
    b = min(batches, m // 2)
    if b >= 2:
        parts = zip(np.array_split(x, b), np.array_split(y, b))
        covs = np.array([covariance(bx, by) for bx, by in parts])
        return covariance(x, y), _complex_std(covs) / math.sqrt(b)
    return covariance(x, y), jackknife_stderr(x, y) if m >= 3 else math.inf


def jackknife_stderr(x: np.ndarray, y: np.ndarray | None = None) -> float:
    """Delete-one jackknife stderr of the mean (``y`` omitted) or of covariance(x, y)."""
    m = x.size
    if y is None:
        loo = (x.sum() - x) / (m - 1)
    else:
        sx, sy, sxy = x.sum(), y.sum(), np.sum(x * y)
        loo = ((sxy - x * y) - (sx - x) * (sy - y) / (m - 1)) / (m - 2)
    return float(np.sqrt((m - 1) / m * np.sum(np.abs(loo - loo.mean()) ** 2)))


# --- campaigns ------------------------------------------------------------------

@dataclass
class CampaignResult:
    spec: CampaignSpec
    estimates: dict[tuple, MCEstimate]
    samples: np.ndarray = field(repr=False)
    wall_time: float = 0.0

    def theory_value(self, key: tuple) -> complex:
        obs, zs = key[0], key[1:]
        law = self.spec.cfg.law
        if obs == "C":
            params = theory.TheoryParams.from_law(law, self.spec.cfg.n, self.spec.cfg.p)
            return complex(theory.C_leading(params, *zs))
        return complex(theory.PREDICTORS[obs](*zs, v2=law.variance))

    def rows(self) -> list[dict]:
        out = []
        for key, est in self.estimates.items():
            zs = key[1:]
            th = self.theory_value(key)
            out.append({
                "observable": key[0], "z1": zs[0], "z2": zs[1] if len(zs) > 1 else None,
                "n": self.spec.cfg.n, "p": self.spec.cfg.p, "M": est.samples,
                "value": est.value, "stderr": est.stderr, "theory": th,
            })
        return out


def run_campaign(spec: CampaignSpec, threads: int = 1, keep_samples: bool = True) -> CampaignResult:
    """Sample, decompose once per matrix, and reduce to estimates with stderr."""
    t0 = time.perf_counter()
    table = sample_table(spec, threads)
    cols = spec.columns()
    wall = time.perf_counter() - t0
    est: dict[tuple, MCEstimate] = {}
    seed = spec.cfg.seed
    col_of = {c: i for i, c in enumerate(cols)}
    for i, (obs, idx) in enumerate(cols):
        if obs == "g" and "g" not in spec.observables:
            continue
        val, err = batch_mean(table[:, i], spec.batches)
        est[(obs, *(spec.points[j] for j in idx))] = MCEstimate(val, err, spec.M, seed, wall)
    if spec.covariance:
        for a, b in spec.pairs:
            x, y = table[:, col_of[("g", (a,))]], table[:, col_of[("g", (b,))]]
            val, err = batch_covariance(x, y, spec.batches)
            est[("C", spec.points[a], spec.points[b])] = MCEstimate(val, err, spec.M, seed, wall)
    return CampaignResult(spec, est, table if keep_samples else np.empty((0, 0)), wall)


def variance_vs_np(configs: Sequence[EnsembleConfig], z: complex, M: int,
                   batches: int = 100, threads: int = 1, backend: str = "lapack") -> dict:
    """Var g(z) = C(z, conj z) on a grid of (n, p) and its log-log slope in np."""
    if len(configs) < 2:
        raise ValueError("slope needs at least two configurations")
    if len({c.law for c in configs}) != 1:
        raise ValueError("all configurations must share one entry law")
    rows = []
    for cfg in configs:
        spec = CampaignSpec(cfg, (z, z.conjugate()), (), M, batches, backend=backend)
        res = run_campaign(spec, threads, keep_samples=False)
        key = ("C", complex(z), complex(z).conjugate())
        e = res.estimates[key]
        var = e.value.real
        params = theory.TheoryParams.from_law(cfg.law, cfg.n, cfg.p)
        rows.append({
            "n": cfg.n, "p": cfg.p, "np": cfg.n * cfg.p, "M": M, "var": var, "stderr": e.stderr,
            "theory": float(np.real(theory.C_leading(params, z, np.conj(z)))),
            "excluded": not var > 0,
        })
    good = [r for r in rows if not r["excluded"]]
    if len(good) < 2:
        raise ValueError("fewer than two positive variance estimates; slope undefined")
    slope, intercept = np.polyfit(np.log([r["np"] for r in good]), np.log([r["var"] for r in good]), 1)
    return {"rows": rows, "slope": float(slope), "intercept": float(intercept)}


@dataclass
class SemicircleStudy:
    cfg: EnsembleConfig
    ks_per_sample: np.ndarray
    ks_pooled: float
    eigenvalues: np.ndarray = field(repr=False)

    @property
    def ks_mean(self) -> float:
        return float(np.mean(self.ks_per_sample))

    def averaged_cdf(self, lam):
        """Average of the K empirical cdfs (= cdf of the pooled spectrum)."""
        return empirical_cdf(self.eigenvalues, lam)


def semicircle_study(cfg: EnsembleConfig, K: int, backend: str = "lapack") -> SemicircleStudy:
    if K < 1:
        raise ValueError("K must be at least 1")
    v2 = cfg.law.variance
    cdf = lambda x: theory.semicircle_cdf(x, v2)  # noqa: E731
    ks = np.empty(K)
    spectra = []
    with threadpool_limits(limits=1):
        for k in range(K):
            s = eigen_decompose(draw_sample(cfg, k), backend=backend)
            ks[k] = ks_distance(s, cdf)
            spectra.append(s.eigenvalues)
    pooled = np.sort(np.concatenate(spectra))
    return SemicircleStudy(cfg, ks, ks_distance(pooled, cdf), pooled)


def prediction_sweep(cfg: EnsembleConfig, z_pairs: Iterable[tuple[complex, complex]], M: int,
                     batches: int = 100, threads: int = 1, backend: str = "lapack") -> list[dict]:
    """MC means of g, (1/n)Tr G^2, B12, U12, L against their leading terms."""
    points: list[complex] = []
    pairs = []
    for z1, z2 in z_pairs:
        for z in (z1, z2):
            if complex(z) not in points:
                points.append(complex(z))
        pairs.append((points.index(complex(z1)), points.index(complex(z2))))
    spec = CampaignSpec(cfg, tuple(points), OBSERVABLES, M, batches, tuple(pairs),
                        covariance=False, backend=backend)
    res = run_campaign(spec, threads, keep_samples=False)
    out = []
    for row in res.rows():
        gap = abs(row["value"] - row["theory"])
        row.update(gap=gap, gap_times_p=gap * cfg.p)
        out.append(row)
    return out
