"""
Collocation sampling for training and the equispaced evaluation grid.

Training points are drawn per law in four strata: the interior, the loaded
top X=0, the impermeable bottom X=1 and the initial line t=0.
"""

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from src.core.exceptions import ConfigError
from src.core.logger import logger
from src.models.constitutive import OneHotLaw, as_law, encode_law
from src.models.mlp import SamplePoint

# Smallest positive double, used to keep uniform draws inside open intervals.
_TINY = np.nextafter(0.0, 1.0)


class Stratum(IntEnum):
    """Boundary/initial case a point belongs to."""

    INTERIOR = 0
    TOP = 1
    BOTTOM = 2
    INITIAL = 3


def stratum_of(x_hat, t_hat):
    """Classify coordinates into a stratum.

    X=0 wins at the (0, 0) corner. The (1, 0) corner is treated as the
    bottom boundary. Works elementwise on arrays.

    Args:
        x_hat (float or numpy.ndarray): Spatial coordinate.
        t_hat (float or numpy.ndarray): Time coordinate.

    Returns:
        numpy.ndarray or Stratum: Stratum codes.
    """
    x = np.asarray(x_hat, dtype=np.float64)
    t = np.asarray(t_hat, dtype=np.float64)
    codes = np.full(np.broadcast(x, t).shape, int(Stratum.INTERIOR), dtype=np.int64)
    codes[np.broadcast_to(t == 0.0, codes.shape)] = int(Stratum.INITIAL)
    codes[np.broadcast_to(x == 1.0, codes.shape)] = int(Stratum.BOTTOM)
    codes[np.broadcast_to(x == 0.0, codes.shape)] = int(Stratum.TOP)
    if codes.ndim == 0:
        return Stratum(int(codes))
    return codes


@dataclass(frozen=True)
class SamplingPlan:
    """How many points to draw per law and how to split them.

    Args:
        per_law_total: Points per law, at least 4.
        interior_fraction, top_fraction, bottom_fraction, initial_fraction:
            Non-negative stratum shares summing to 1.
        seed: Seed for numpy's default generator.
    """

    per_law_total: int = 1000
    interior_fraction: float = 0.7
    top_fraction: float = 0.1
    bottom_fraction: float = 0.1
    initial_fraction: float = 0.1
    seed: int = 42

    def __post_init__(self):
        fractions = self.fractions()
        if any(f < 0.0 for f in fractions):
            raise ConfigError(f"Stratum fractions must be non-negative, got {fractions}")
        if abs(sum(fractions) - 1.0) > 1e-12:
            raise ConfigError(f"Stratum fractions must sum to 1, got {sum(fractions)!r}")
        if self.per_law_total < 4:
            raise ConfigError(f"per_law_total must be at least 4, got {self.per_law_total}")

    def fractions(self):
        return (self.interior_fraction, self.top_fraction,
                self.bottom_fraction, self.initial_fraction)

    def stratum_counts(self):
        """Point counts per stratum; rounding remainder goes to the interior."""
        counts = [int(round(f * self.per_law_total)) for f in self.fractions()]
        counts[0] += self.per_law_total - sum(counts)
        return counts


class CollocationSet:
    """Flat arrays of collocation points with their laws and strata.

    Attributes:
        x_hat, t_hat (numpy.ndarray): Coordinates, shape (N,).
        onehot (numpy.ndarray): Law encodings, shape (N, 3).
        strata (numpy.ndarray): Stratum codes, shape (N,).
    """

    def __init__(self, x_hat, t_hat, onehot, strata=None):
        self.x_hat = np.asarray(x_hat, dtype=np.float64)
        self.t_hat = np.asarray(t_hat, dtype=np.float64)
        self.onehot = np.asarray(onehot, dtype=np.float64).reshape(-1, 3)
        if strata is None:
            strata = stratum_of(self.x_hat, self.t_hat)
        self.strata = np.asarray(strata, dtype=np.int64)
        if not (self.x_hat.shape == self.t_hat.shape == self.strata.shape == (self.onehot.shape[0],)):
            raise ValueError("Collocation arrays have inconsistent lengths")

    @classmethod
    def from_points(cls, points):
        """Build a set from SamplePoint objects, classifying each by coordinates."""
        points = list(points)
        return cls([p.x_hat for p in points],
                   [p.t_hat for p in points],
                   [p.law.e for p in points])

    def __len__(self):
        return self.x_hat.size

    def inputs(self):
        """Network input matrix (X, t, e1, e2, e3), shape (N, 5)."""
        return np.column_stack([self.x_hat, self.t_hat, self.onehot])

    def law_indices(self):
        """1-based law index of every sample."""
        return np.argmax(self.onehot, axis=1) + 1

    def points(self):
        return [SamplePoint(float(x), float(t), OneHotLaw(tuple(float(v) for v in e)))
                for x, t, e in zip(self.x_hat, self.t_hat, self.onehot)]

    def stratum_counts(self, law=None):
        """Counts per stratum, optionally restricted to one law."""
        strata = self.strata if law is None else self.strata[self.law_indices() == int(law)]
        return {s: int(np.sum(strata == int(s))) for s in Stratum}


def sample_training_set(plan, laws):
    """Draw the training collocation set.

    Args:
        plan (SamplingPlan): Counts, split and seed.
        laws (iterable): Laws to sample, in any order; sampled in index order.

    Returns:
        CollocationSet: per_law_total points per law.

    Raises:
        ConfigError: If no law is given.
    """
    laws = sorted({as_law(law) for law in laws})
    if not laws:
        raise ConfigError("At least one constitutive law is required for sampling")

    rng = np.random.default_rng(plan.seed)
    n_int, n_top, n_bot, n_ini = plan.stratum_counts()
    xs, ts, es, strata = [], [], [], []
    for law in laws:
        x = np.concatenate([
            rng.uniform(_TINY, 1.0, n_int),
            np.zeros(n_top),
            np.ones(n_bot),
            rng.uniform(_TINY, 1.0, n_ini),
        ])
        t = np.concatenate([
            rng.uniform(_TINY, 1.0, n_int),
            rng.uniform(_TINY, 1.0, n_top),
            rng.uniform(_TINY, 1.0, n_bot),
            np.zeros(n_ini),
        ])
        xs.append(x)
        ts.append(t)
        es.append(np.tile(encode_law(law).as_array(), (plan.per_law_total, 1)))
        strata.append(np.repeat([int(Stratum.INTERIOR), int(Stratum.TOP),
                                 int(Stratum.BOTTOM), int(Stratum.INITIAL)],
                                [n_int, n_top, n_bot, n_ini]))

    samples = CollocationSet(np.concatenate(xs), np.concatenate(ts),
                             np.concatenate(es), np.concatenate(strata))
    logger.info(f"Sampled {len(samples)} collocation points for laws "
                f"{[int(law) for law in laws]} ({n_int}/{n_top}/{n_bot}/{n_ini} per law)")
    return samples


def test_grid(n_x, n_t):
    """Equispaced evaluation grid, t=0 row excluded.

    Points are ordered by time first, then space: X_i = i/(n_x-1),
    t_j = (j+1)/n_t.

    Args:
        n_x (int): Spatial nodes including both ends, at least 2.
        n_t (int): Time levels, at least 1.

    Returns:
        numpy.ndarray: (n_x * n_t, 2) array of (x_hat, t_hat).
    """
    if n_x < 2:
        raise ConfigError(f"Test grid needs at least 2 spatial nodes, got {n_x}")
    if n_t < 1:
        raise ConfigError(f"Test grid needs at least 1 time level, got {n_t}")
    x = np.arange(n_x) / (n_x - 1)
    t = (np.arange(n_t) + 1) / n_t
    tt, xx = np.meshgrid(t, x, indexing="ij")
    return np.column_stack([xx.ravel(), tt.ravel()])


# pytest would otherwise collect test_grid as a test function.
test_grid.__test__ = False
