"""Entry laws and sampling of dilute Wigner matrices.

A dilute Wigner matrix has independent upper-triangle entries

    H(i, j) = a(i, j) * d(i, j) / sqrt(p),      1 <= i <= j <= n,

where ``d`` is Bernoulli(p/n) and ``a`` is drawn from an :class:`EntryLaw`.
Diagonal entries use the same law scaled by sqrt(2), which gives
E a(i,i)^2 = 2 v^2 and E a(i,i)^4 = 4 V4.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from scipy import special

from ._assemble import assemble_symmetric
from .rng import substream


class ConfigurationError(ValueError):
    """Invalid law or ensemble parameters."""


class LawKind(str, Enum):
    GAUSSIAN = "gaussian"
    RADEMACHER = "rademacher"
    SYMMETRIC_UNIFORM = "symmetric_uniform"
    SYMMETRIC_DISCRETE = "symmetric_discrete"


@dataclass(frozen=True)
class EntryLaw:
    """Symmetric law of the undiluted off-diagonal entries ``a(i, j)``.

    ``v2`` is the scale parameter: the variance for the parametric kinds and
    the (derived) second moment for discrete laws. ``cutoff`` is set by
    :func:`truncated_law`; moments and samples then describe
    ``a * 1{|a| <= cutoff}``.
    """

    kind: LawKind
    v2: float = 1.0
    support: tuple[tuple[float, float], ...] = ()
    cutoff: float | None = None

    def __post_init__(self):
        kind = LawKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is LawKind.SYMMETRIC_DISCRETE:
            support = _normalize_support(self.support)
            object.__setattr__(self, "support", support)
            object.__setattr__(self, "v2", sum(w * x * x for x, w in support))
        elif self.support:
            raise ConfigurationError(f"support given for non-discrete law {kind.value}")
        if not (self.v2 > 0 and math.isfinite(self.v2)):
            raise ConfigurationError(f"v2 must be positive and finite, got {self.v2}")
        if self.cutoff is not None and not self.cutoff > 0:
            raise ConfigurationError(f"cutoff must be positive, got {self.cutoff}")

    # constructors ------------------------------------------------------
    @classmethod
    def gaussian(cls, v2: float = 1.0) -> "EntryLaw":
        return cls(LawKind.GAUSSIAN, v2)

    @classmethod
    def rademacher(cls, v2: float = 1.0) -> "EntryLaw":
        return cls(LawKind.RADEMACHER, v2)

    @classmethod
    def symmetric_uniform(cls, v2: float = 1.0) -> "EntryLaw":
        return cls(LawKind.SYMMETRIC_UNIFORM, v2)

    @classmethod
    def discrete(cls, pairs: Sequence[tuple[float, float]]) -> "EntryLaw":
        """Discrete law from ``(value, probability)`` pairs; must be symmetric."""
        return cls(LawKind.SYMMETRIC_DISCRETE, 1.0, tuple((float(x), float(w)) for x, w in pairs))

    # moments -----------------------------------------------------------
    @property
    def v(self) -> float:
        return math.sqrt(self.v2)

    def moment(self, r: int) -> float:
        """E a^r for the off-diagonal law (truncation included)."""
        if r < 0:
            raise ValueError("moment order must be nonnegative")
        if r == 0:
            return 1.0 if self.kind is not LawKind.SYMMETRIC_DISCRETE else sum(w for _, w in self.support)
        if r % 2:
            return 0.0
        return self.abs_moment(r)

    def abs_moment(self, r: float) -> float:
        """E |a|^r, the quantity written mu_r."""
        c = self.cutoff
        if self.kind is LawKind.GAUSSIAN:
            s = self.v
            full = s**r * 2 ** (r / 2) * special.gamma((r + 1) / 2) / math.sqrt(math.pi)
            if c is None:
                return float(full)
            return float(full * special.gammainc((r + 1) / 2, c * c / (2 * self.v2)))
        if self.kind is LawKind.RADEMACHER:
            return 0.0 if (c is not None and self.v > c) else self.v**r
        if self.kind is LawKind.SYMMETRIC_UNIFORM:
            half = math.sqrt(3 * self.v2)
            top = half if c is None else min(half, c)
            return top ** (r + 1) / ((r + 1) * half)
        return sum(w * abs(x) ** r for x, w in self.support if c is None or abs(x) <= c)

    @property
    def V4(self) -> float:
        return self.moment(4)

    @property
    def V6(self) -> float:
        return self.moment(6)

    @property
    def variance(self) -> float:
        return self.moment(2)

    # sampling ----------------------------------------------------------
    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """``size`` untruncated off-diagonal draws."""
        if self.kind is LawKind.GAUSSIAN:
            return rng.standard_normal(size) * self.v
        if self.kind is LawKind.RADEMACHER:
            return (2.0 * rng.integers(0, 2, size=size) - 1.0) * self.v
        if self.kind is LawKind.SYMMETRIC_UNIFORM:
            half = math.sqrt(3 * self.v2)
            return rng.uniform(-half, half, size=size)
        values = np.array([x for x, _ in self.support])
        probs = np.array([w for _, w in self.support])
        return values[rng.choice(len(values), size=size, p=probs / probs.sum())]

    # serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind.value}
        if self.kind is LawKind.SYMMETRIC_DISCRETE:
            out["support"] = [[x, w] for x, w in self.support]
        else:
            out["v2"] = self.v2
        if self.cutoff is not None:
            out["cutoff"] = self.cutoff
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "EntryLaw":
        kind = LawKind(d["kind"])
        cutoff = d.get("cutoff")
        if kind is LawKind.SYMMETRIC_DISCRETE:
            support = tuple((float(x), float(w)) for x, w in d["support"])
            return cls(kind, 1.0, support, cutoff)
        return cls(kind, float(d.get("v2", 1.0)), (), cutoff)


def _normalize_support(pairs) -> tuple[tuple[float, float], ...]:
    merged: dict[float, float] = {}
    for x, w in pairs:
        x, w = float(x), float(w)
        if w < 0:
            raise ConfigurationError(f"negative probability {w} at {x}")
        merged[x] = merged.get(x, 0.0) + w
    if abs(sum(merged.values()) - 1.0) > 1e-9:
        raise ConfigurationError(f"probabilities sum to {sum(merged.values())}, not 1")
    for x, w in merged.items():
        if abs(merged.get(-x, 0.0) - w) > 1e-12:
            raise ConfigurationError(f"support is not symmetric about 0 at {x}")
    return tuple(sorted((x, w) for x, w in merged.items() if w > 0))


def truncated_law(law: EntryLaw, p: float) -> EntryLaw:
    """Law of ``a * 1{|a| <= sqrt(p)}``.

    Discrete laws get the removed mass moved onto the atom 0. The cutoff is
    also recorded, so the sqrt(2)-scaled diagonal entries are truncated at the
    same level.
    """
    if not p > 0:
        raise ConfigurationError(f"p must be positive, got {p}")
    c = math.sqrt(p)
    if law.cutoff is not None:
        c = min(c, law.cutoff)
    if law.kind is LawKind.SYMMETRIC_DISCRETE:
        kept = [(x, w) for x, w in law.support if abs(x) <= c]
        lost = sum(w for x, w in law.support if abs(x) > c)
        if lost > 0:
            kept.append((0.0, lost))
        if not any(x != 0 for x, _ in kept):
            raise ConfigurationError("truncation removes all nonzero mass")
        return EntryLaw(LawKind.SYMMETRIC_DISCRETE, 1.0, tuple(kept), c)
    return EntryLaw(law.kind, law.v2, (), c)


@dataclass(frozen=True)
class EnsembleConfig:
    n: int
    p: float
    law: EntryLaw = field(default_factory=EntryLaw.gaussian)
    seed: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigurationError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if not (0 < self.p <= self.n):
            raise ConfigurationError(f"need 0 < p <= n, got p={self.p}, n={self.n}")
        object.__setattr__(self, "p", float(self.p))

    @property
    def density(self) -> float:
        """Bernoulli success probability p/n."""
        return self.p / self.n

    def alpha(self) -> float:
        """Dilution exponent log p / log n."""
        if self.n == 1:
            return math.nan
        return math.log(self.p) / math.log(self.n)

    def to_dict(self) -> dict:
        return {"n": self.n, "p": self.p, "law": self.law.to_dict(), "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "EnsembleConfig":
        n = int(d["n"])
        p = d["p"] if "p" in d else float(n) ** float(d["alpha"])
        law = EntryLaw.from_dict(d.get("law", {"kind": "gaussian", "v2": 1.0}))
        return cls(n, float(p), law, int(d.get("seed", 0)))


@dataclass(frozen=True, eq=False)
class SymmetricMatrix:
    """Dense real symmetric matrix.

    Stored as a full C-contiguous array; both triangles are written from the
    same upper-triangle draw, so the symmetry is exact.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.entries, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ConfigurationError(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ConfigurationError("matrix has non-finite entries")
        if not np.array_equal(a, a.T):
            raise ConfigurationError("matrix is not symmetric")
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def entry(self, i: int, j: int) -> float:
        return float(self.entries[i, j])

    @classmethod
    def from_upper(cls, n: int, values: np.ndarray) -> "SymmetricMatrix":
        """Build from upper-triangle values in ``np.triu_indices(n)`` order."""
        rows, cols, _ = _triu(n)
        return cls(assemble_symmetric(n, rows, cols, np.asarray(values, dtype=np.float64)))

    @classmethod
    def _trusted(cls, entries: np.ndarray) -> "SymmetricMatrix":
        # symmetric and finite by construction; skips the O(n^2) checks
        m = object.__new__(cls)
        object.__setattr__(m, "entries", entries)
        return m


_TRIU_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _triu(n: int):
    """Row indices, column indices and diagonal mask of the upper triangle."""
    if n not in _TRIU_CACHE:
        rows, cols = np.triu_indices(n)
        if len(_TRIU_CACHE) > 8:
            _TRIU_CACHE.clear()
        _TRIU_CACHE[n] = (rows, cols, rows == cols)
    return _TRIU_CACHE[n]


def sample_matrix(cfg: EnsembleConfig, stream: np.random.Generator) -> SymmetricMatrix:
    """Draw one H_{n,p}.

    Draw order within the stream: one uniform per upper-triangle slot
    (row-major) for the dilution mask, then law draws for the kept slots only.
    """
    n = cfg.n
    rows, cols, diag_mask = _triu(n)
    keep = stream.random(rows.size) < cfg.density
    idx = np.flatnonzero(keep)
    a = cfg.law.draw(stream, idx.size)
    a[diag_mask[idx]] *= math.sqrt(2.0)
    if cfg.law.cutoff is not None:
        a[np.abs(a) > cfg.law.cutoff] = 0.0
    a /= math.sqrt(cfg.p)
    return SymmetricMatrix._trusted(assemble_symmetric(n, rows[idx], cols[idx], a))


def draw_sample(cfg: EnsembleConfig, index: int) -> SymmetricMatrix:
    """Matrix number ``index`` of the ensemble, from its own substream."""
    return sample_matrix(cfg, substream(cfg.seed, index))
