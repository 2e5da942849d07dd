"""Analytic scalar distributions and seeded samplers.

Sampling goes through numpy's PCG64 ``Generator``: Gaussian draws use its
ziggurat method and Gamma draws use Marsaglia-Tsang squeeze/rejection (with
the shape+1 augmentation for shapes below one). Both are pinned by the
numpy version.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class Gaussian:
    mean: float
    var: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.mean) and np.isfinite(self.var) and self.var > 0):
            raise ValueError(f"invalid Gaussian parameters: mean={self.mean}, var={self.var}")

    @property
    def _frozen(self):
        return stats.norm(loc=self.mean, scale=np.sqrt(self.var))

    def cdf(self, a):
        return self._frozen.cdf(a)

    def ppf(self, q):
        return self._frozen.ppf(q)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.normal(self.mean, np.sqrt(self.var), size=n)


@dataclass(frozen=True)
class Gamma:
    """Gamma with density ``x**(shape-1) exp(-x/scale) / (scale**shape Gamma(shape))``."""

    shape: float
    scale: float = 1.0

    def __post_init__(self):
        ok = np.isfinite(self.shape) and np.isfinite(self.scale)
        if not (ok and self.shape > 0 and self.scale > 0):
            raise ValueError(f"invalid Gamma parameters: shape={self.shape}, scale={self.scale}")

    @property
    def _frozen(self):
        return stats.gamma(a=self.shape, scale=self.scale)

    def cdf(self, a):
        return self._frozen.cdf(a)

    def ppf(self, q):
        return self._frozen.ppf(q)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.gamma(self.shape, self.scale, size=n)


def sample_sequence(spec, n: int, seed) -> np.ndarray:
    """``n`` i.i.d. draws from ``spec``; identical for identical ``(spec, n, seed)``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return spec.sample(n, np.random.default_rng(seed))
