"""One-way delay samplers for the two links.

Delays are in milliseconds and always drawn from a caller-supplied
``numpy.random.Generator`` so a run's randomness comes from one seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Protocol

import numpy as np
from scipy import special


class DelayModel(Protocol):
    def sample(self, rng: np.random.Generator) -> float: ...

    def sample_many(self, rng: np.random.Generator, n: int) -> np.ndarray: ...


@dataclass(frozen=True)
class ConstantDelay:
    delay_ms: float

    def __post_init__(self) -> None:
        if self.delay_ms < 0:
            raise ValueError(f"delay must be >= 0, got {self.delay_ms}")

    def sample(self, rng: np.random.Generator) -> float:
        return self.delay_ms

    def sample_many(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.full(n, self.delay_ms)


@dataclass(frozen=True)
class TriangularDelay:
    """Symmetric triangle on [mean - jitter, mean + jitter]."""

    mean_ms: float
    jitter_ms: float

    def __post_init__(self) -> None:
        if self.jitter_ms < 0 or self.mean_ms - self.jitter_ms < 0:
            raise ValueError(
                f"need 0 <= jitter <= mean, got mean={self.mean_ms} jitter={self.jitter_ms}"
            )

    def sample(self, rng: np.random.Generator) -> float:
        if self.jitter_ms == 0:
            return self.mean_ms
        return float(
            rng.triangular(self.mean_ms - self.jitter_ms, self.mean_ms, self.mean_ms + self.jitter_ms)
        )

    def sample_many(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.jitter_ms == 0:
            return np.full(n, self.mean_ms)
        return rng.triangular(
            self.mean_ms - self.jitter_ms, self.mean_ms, self.mean_ms + self.jitter_ms, size=n
        )


@dataclass(frozen=True)
class ShiftedLogNormalDelay:
    """``min_ms`` plus a log-normal whose mode sits at ``mode_ms``.

    The tail is truncated at ``tail_max_ms`` by inverse-CDF sampling: one
    uniform draw per sample, restricted to the mass below the cut.
    """

    min_ms: float
    mode_ms: float
    tail_max_ms: float
    sigma: float = 0.5

    def __post_init__(self) -> None:
        if not 0 <= self.min_ms < self.mode_ms < self.tail_max_ms:
            raise ValueError(
                "need 0 <= min < mode < tail_max, got "
                f"{self.min_ms}, {self.mode_ms}, {self.tail_max_ms}"
            )
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    @property
    def mu(self) -> float:
        return math.log(self.mode_ms - self.min_ms) + self.sigma**2

    @property
    def tail_mass(self) -> float:
        """Probability of the untruncated law below ``tail_max_ms``."""
        z = (math.log(self.tail_max_ms - self.min_ms) - self.mu) / self.sigma
        return float(special.ndtr(z))

    def _from_uniform(self, u: Any) -> Any:
        return self.min_ms + np.exp(self.mu + self.sigma * special.ndtri(u * self.tail_mass))

    def sample(self, rng: np.random.Generator) -> float:
        return float(self._from_uniform(rng.random()))

    def sample_many(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.asarray(self._from_uniform(rng.random(n)))


def make_delay(config: Any) -> DelayModel:
    """Build a sampler from a delay config section (see ``lwasim.config``)."""
    kind = config.kind
    if kind == "constant":
        return ConstantDelay(config.delay_ms)
    if kind == "triangular":
        return TriangularDelay(config.mean_ms, config.jitter_ms)
    if kind == "lognormal":
        return ShiftedLogNormalDelay(config.min_ms, config.mode_ms, config.tail_max_ms, config.sigma)
    raise ValueError(f"Unknown delay kind: {kind}")
