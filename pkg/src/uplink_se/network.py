"""Network parameters, attenuation scenarios and pilot-estimation coefficients.

Attenuation tensors are indexed ``[k, l, m]``: receiving cell ``k``,
transmitting cell ``l`` and user ``m`` of cell ``l``.  All amplitudes are
dimensionless; ``d ** 2`` is the large-scale power gain of a link.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from .errors import ConfigError, DomainError

# Stream identifiers mixed into the seed so that different consumers of the
# same user seed never share random numbers.
STREAM_ATTENUATION = 1
STREAM_FADING = 2
STREAM_LINEAR = 3
STREAM_ASYM_MU = 4
STREAM_ASYM_SAMPLES = 5
STREAM_LOGDET = 6


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Generator for the substream addressed by ``(seed, *keys)``.

    The stream depends only on the key tuple, never on call order, which is
    what makes threaded and serial runs draw identical numbers.
    """
    if seed < 0:
        raise ConfigError(f"seed must be nonnegative, got {seed}")
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys)))


def noise_power_from_snr_db(snr_db: float) -> float:
    """SNR = 1 / noise_power with unit transmit power."""
    return 10.0 ** (-snr_db / 10.0)


def snr_db_from_noise_power(noise_power: float) -> float:
    if noise_power <= 0:
        raise DomainError("noise power must be positive")
    return -10.0 * math.log10(noise_power)


@dataclass(frozen=True)
class NetworkConfig:
    cells: int
    users_per_cell: int
    antennas: int
    coherence_symbols: int
    pilot_symbols: int
    noise_power: float

    def __post_init__(self):
        for name in ("cells", "users_per_cell", "antennas", "coherence_symbols", "pilot_symbols"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if not (math.isfinite(self.noise_power) and self.noise_power > 0):
            raise ConfigError(f"noise_power must be positive, got {self.noise_power!r}")
        if self.pilot_symbols < self.users_per_cell:
            raise ConfigError("pilot_symbols must be at least users_per_cell")
        if self.pilot_symbols >= self.coherence_symbols:
            raise ConfigError("pilot_symbols must be smaller than coherence_symbols")

    @classmethod
    def from_snr_db(cls, snr_db: float, **kw) -> "NetworkConfig":
        return cls(noise_power=noise_power_from_snr_db(snr_db), **kw)

    @property
    def ratio(self) -> float:
        """beta = K / N."""
        return self.users_per_cell / self.antennas

    @property
    def data_symbols(self) -> int:
        return self.coherence_symbols - self.pilot_symbols

    @property
    def prelog(self) -> float:
        """Fraction of each coherence interval carrying data."""
        return self.data_symbols / self.coherence_symbols

    def replace(self, **changes) -> "NetworkConfig":
        kw = {f: getattr(self, f) for f in self.__dataclass_fields__}
        kw.update(changes)
        return NetworkConfig(**kw)


# Scenario variants ---------------------------------------------------------

@dataclass(frozen=True)
class Synthetic:
    """C^2 = exp(alpha * ((k - l) mod L)) * U[1, 2]."""

    alpha: float

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise ConfigError("alpha must be finite")


@dataclass(frozen=True)
class Geometric:
    """BS 1 at the centre of a square, the others evenly spaced on a circle.

    ``distance_unit_m`` sets the unit in which C is measured (1.0 means
    metres).  It only rescales the whole network's path gains relative to
    the noise power.
    """

    p: float
    circle_radius_m: float = 300.0
    area_side_m: float = 1000.0
    min_distance_m: float = 10.0
    distance_unit_m: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"p must lie in [0, 1], got {self.p}")
        for name in ("circle_radius_m", "area_side_m", "min_distance_m", "distance_unit_m"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive, got {v}")
        if self.circle_radius_m >= self.area_side_m / 2:
            raise ConfigError("circle_radius_m must be below area_side_m / 2")


@dataclass(frozen=True)
class TwoCellBounded:
    """Two cells; d^2 ~ U[x] on direct links and U[y] on cross links."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        for name in ("x_min", "x_max", "y_min", "y_max"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive, got {v}")
        # equal bounds are accepted as a point mass
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ConfigError("support bounds must satisfy min <= max")


Variant = Union[Synthetic, Geometric, TwoCellBounded]


@dataclass(frozen=True)
class ScenarioSpec:
    variant: Variant
    shadowing_std_db: float = 8.0

    def __post_init__(self):
        if not isinstance(self.variant, (Synthetic, Geometric, TwoCellBounded)):
            raise ConfigError(f"unknown scenario variant {self.variant!r}")
        if not (math.isfinite(self.shadowing_std_db) and self.shadowing_std_db >= 0):
            raise ConfigError("shadowing_std_db must be nonnegative")

    def check_cells(self, cells: int) -> None:
        if isinstance(self.variant, TwoCellBounded) and cells != 2:
            raise ConfigError(f"TwoCellBounded requires cells = 2, got {cells}")


WEAK = ScenarioSpec(Synthetic(3.0))
MODERATE = ScenarioSpec(Synthetic(0.25))
STRONG = ScenarioSpec(Synthetic(-1.0))
PROFILES = {"weak": WEAK, "moderate": MODERATE, "strong": STRONG}


def bs_positions(cells: int, geo: Geometric) -> np.ndarray:
    c = geo.area_side_m / 2
    pos = np.empty((cells, 2))
    pos[0] = c, c
    ang = 2 * np.pi * np.arange(cells - 1) / max(cells - 1, 1)
    pos[1:, 0] = c + geo.circle_radius_m * np.cos(ang)
    pos[1:, 1] = c + geo.circle_radius_m * np.sin(ang)
    return pos


def _geometric_distances(cells, users, geo, rng):
    """Distances (k, l, m) from BS k to user m associated with cell l."""
    bs = bs_positions(cells, geo)
    need = np.full(cells, users)
    chunks = [[] for _ in range(cells)]
    while need.any():
        n = int(max(1024, 1.2 * cells * need.max()))
        ut = rng.uniform(0.0, geo.area_side_m, (n, 2))
        dist = np.linalg.norm(ut[:, None, :] - bs[None], axis=-1)
        nearest = dist.argmin(axis=1)
        if cells > 1:
            # uniform over the other L-1 cells: shift by 1..L-1 modulo L
            other = (nearest + rng.integers(1, cells, n)) % cells
            assoc = np.where(rng.random(n) < geo.p, nearest, other)
        else:
            assoc = nearest
        for l in range(cells):
            if need[l]:
                sel = dist[assoc == l][: need[l]]
                chunks[l].append(sel)
                need[l] -= len(sel)
    out = np.stack([np.concatenate(c) for c in chunks])  # (l, m, k)
    return np.maximum(out.transpose(2, 0, 1), geo.min_distance_m)


def sample_attenuation(cells: int, users: int, scenario: ScenarioSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw amplitude attenuations d with shape (cells, cells, users)."""
    scenario.check_cells(cells)
    v = scenario.variant
    shape = (cells, cells, users)
    if isinstance(v, TwoCellBounded):
        direct = np.eye(cells, dtype=bool)[:, :, None]
        x = rng.uniform(v.x_min, v.x_max, shape)
        y = rng.uniform(v.y_min, v.y_max, shape)
        return np.sqrt(np.where(direct, x, y))
    if isinstance(v, Synthetic):
        idx = (np.arange(cells)[:, None] - np.arange(cells)[None, :]) % cells
        c2 = np.exp(v.alpha * idx)[:, :, None] * rng.uniform(1.0, 2.0, shape)
    else:
        c2 = (_geometric_distances(cells, users, v, rng) / v.distance_unit_m) ** 2
    z = 10.0 ** (rng.normal(0.0, scenario.shadowing_std_db, shape) / 20.0)
    return z / c2


def compute_b(d, tau, noise_power) -> np.ndarray:
    """MMSE estimation-quality coefficients for an attenuation tensor.

    The pilot sum runs over the transmitting-cell axis (second to last but
    one for (k, l, m) tensors).  Also accepts sample-major (n, k, l)
    tensors through :func:`compute_b_axis`.
    """
    return compute_b_axis(d, tau, noise_power, axis=-2)


def compute_b_axis(d, tau, noise_power, axis) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        raise DomainError("attenuations must be finite and nonnegative")
    if tau < 1:
        raise DomainError(f"tau must be at least 1, got {tau}")
    if not noise_power > 0:
        raise DomainError(f"noise power must be positive, got {noise_power}")
    d2 = d * d
    return tau * d2 / (noise_power + tau * d2.sum(axis=axis, keepdims=True))


@dataclass(frozen=True)
class AttenuationDraw:
    d: np.ndarray
    b: np.ndarray
    pilot_symbols: int = field(default=0)

    def __post_init__(self):
        if self.d.shape != self.b.shape or self.d.ndim != 3 or self.d.shape[0] != self.d.shape[1]:
            raise ConfigError(f"attenuation tensors must be (L, L, K), got {self.d.shape} and {self.b.shape}")
        for a in (self.d, self.b):
            a.setflags(write=False)

    @property
    def cells(self) -> int:
        return self.d.shape[0]

    @property
    def users(self) -> int:
        return self.d.shape[2]


def make_draw(d: np.ndarray, tau: int, noise_power: float) -> AttenuationDraw:
    d = np.array(d, dtype=float)
    return AttenuationDraw(d, compute_b(d, tau, noise_power), tau)


def generate_attenuation(config: NetworkConfig, scenario: ScenarioSpec, seed: int, realization: int = 0) -> AttenuationDraw:
    """Attenuation realization ``realization`` of the stream keyed by ``seed``."""
    scenario.check_cells(config.cells)
    rng = substream(seed, STREAM_ATTENUATION, realization)
    d = sample_attenuation(config.cells, config.users_per_cell, scenario, rng)
    return make_draw(d, config.pilot_symbols, config.noise_power)


def noise_floor(draw: AttenuationDraw, active_cells: Iterable[int] | None, noise_power: float, zeta: float = 1.0) -> np.ndarray:
    """Residual power at each active BS: estimation error of active cells plus zeta * noise.

    Returned in ascending order of the active cell indices.
    """
    active = sorted(set(range(draw.cells) if active_cells is None else active_cells))
    if not active:
        raise ConfigError("active cell set is empty")
    if active[0] < 0 or active[-1] >= draw.cells:
        raise ConfigError(f"active cells {active} out of range for L = {draw.cells}")
    if not 0.0 < zeta <= 1.0:
        raise ConfigError(f"zeta must lie in (0, 1], got {zeta}")
    resid = ((1.0 - draw.b) * draw.d ** 2)[np.ix_(active, active)].sum(axis=(1, 2))
    return resid + zeta * noise_power
