"""Large-system spectral efficiency of the four decoding schemes.

Every scheme reduces to Marcenko-Pastur values V(A, beta) of scalar random
variables built from single-user attenuation draws.  For a receiving cell
k, an active interval I of cells and a set S of cells decoded jointly (the
"numerator" set),

    A = b_kk d_kk^{-2} sum_{l in S} d_kl^4 / (beta sum_{l in I} mu_kl + zeta sigma^2 / N)

with mu_kl = E[(1 - b_kl) d_kl^2].  Net, interference and time-division
variables are all special cases.  The sigma^2 / N term vanishes as N grows;
it is kept by default (``finite_correction=True``) so that the asymptotic
values track the finite-N engine at the antenna counts actually simulated.

All variables of one :class:`AsymptoticInputs` are built from the same
attenuation samples, so scheme comparisons share their sampling noise.
Standard errors use the delta method: dV/deta = 0 at the fixed point, so
the error of V is that of the sample mean of beta * log2(1 + eta A).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DegenerateError, DomainError
from .finite import SchemeRateReport
from .network import (
    STREAM_ASYM_MU,
    STREAM_ASYM_SAMPLES,
    NetworkConfig,
    ScenarioSpec,
    compute_b,
    sample_attenuation,
    substream,
)
from .rmt import DEFAULT_TOL, EmpiricalDistribution, LOG2E, _solve

DEFAULT_SAMPLES = 200_000
MIN_SAMPLES = 10_000
ZETA_TOL = 1e-7
ZETA_MAX_ITER = 100


@dataclass(frozen=True)
class AsymptoticInputs:
    """Attenuation samples and residual-power means for one scenario.

    ``d2`` and ``b`` have shape (L, L, n) indexed ``[k, l, sample]``; ``mu``
    is the (L, L) matrix of E[(1 - b_kl) d_kl^2] estimated from an
    independent batch.
    """

    config: NetworkConfig
    d2: np.ndarray
    b: np.ndarray
    mu: np.ndarray
    finite_correction: bool = True
    tolerance: float = DEFAULT_TOL
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)
    _warm: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        L = self.config.cells
        if self.d2.shape[:2] != (L, L) or self.b.shape != self.d2.shape or self.mu.shape != (L, L):
            raise ConfigError("sample tensors do not match the cell count")
        idx = np.arange(L)
        if np.any(self.d2[idx, idx] <= 0):
            raise DomainError("direct-link attenuation is zero in some sample")
        if np.any(self.mu.sum(axis=1) <= 0) or not np.all(np.isfinite(self.mu)):
            raise DomainError("residual interference power vanishes; degenerate scenario")
        d4 = np.ascontiguousarray(self.d2 * self.d2)
        base = self.b[idx, idx] / self.d2[idx, idx]
        for a in (d4, base):
            a.setflags(write=False)
        object.__setattr__(self, "_d4", d4)
        object.__setattr__(self, "_base", base)

    # basic quantities
    @property
    def cells(self) -> int:
        return self.config.cells

    @property
    def beta(self) -> float:
        return self.config.ratio

    @property
    def sample_count(self) -> int:
        return self.d2.shape[2]

    @property
    def prefactor(self) -> float:
        return self.config.prelog / (self.cells * self.beta)

    @property
    def noise_per_antenna(self) -> float:
        return self.config.noise_power / self.config.antennas if self.finite_correction else 0.0

    @property
    def denominators(self) -> np.ndarray:
        """mu_k = beta * sum_l mu_kl."""
        return self.beta * self.mu.sum(axis=1)

    # A-variables
    def a_samples(self, k: int, interval: Sequence[int], numerator: Sequence[int], zeta: float = 1.0) -> np.ndarray:
        if not numerator:
            return np.zeros(self.sample_count)
        den = self.beta * self.mu[k, list(interval)].sum() + zeta * self.noise_per_antenna
        num = self._d4[k, numerator[0]].copy()
        for l in numerator[1:]:
            num += self._d4[k, l]
        return self._base[k] * num / den

    @property
    def a_net(self) -> tuple:
        every = tuple(range(self.cells))
        return tuple(EmpiricalDistribution(self.a_samples(k, every, every)) for k in every)

    @property
    def a_int(self) -> tuple:
        every = tuple(range(self.cells))
        return tuple(EmpiricalDistribution(self.a_samples(k, every, _without(every, k))) for k in every)

    def a_td(self, zetas=None) -> tuple:
        z = np.full(self.cells, 1.0 / self.cells) if zetas is None else zetas
        return tuple(EmpiricalDistribution(self.a_samples(k, (k,), (k,), z[k])) for k in range(self.cells))

    # cached V evaluations
    def _key(self, k, interval, numerator, zeta):
        z = float(zeta) if self.noise_per_antenna else 1.0
        return (k, tuple(interval), tuple(numerator), z)

    def v(self, k, interval, numerator, zeta=1.0) -> float:
        key = self._key(k, interval, numerator, zeta)
        hit = self._cache.get(key)
        if hit is None:
            a = self.a_samples(k, interval, numerator, zeta)
            # the same variable at a nearby zeta is an excellent starting point
            eta, _ = _solve(a, self.beta, self.tolerance, guess=self._warm.get(key[:3]), newton=True)
            self._warm[key[:3]] = eta
            if eta == 1.0 and not np.any(a):
                value = 0.0
            else:
                value = self.beta * float(np.mean(np.log2(1.0 + eta * a))) - math.log2(eta) + (eta - 1.0) * LOG2E
            hit = (eta, max(value, 0.0))
            self._cache[key] = hit
        return hit[1]

    def influence(self, k, interval, numerator, zeta=1.0) -> np.ndarray:
        """Per-sample terms whose mean carries the sampling error of V."""
        self.v(k, interval, numerator, zeta)
        eta = self._cache[self._key(k, interval, numerator, zeta)][0]
        return self.beta * np.log2(1.0 + eta * self.a_samples(k, interval, numerator, zeta))

    def std_error(self, weighted_keys: Iterable[tuple[float, tuple]]) -> float:
        """Standard error of sum_i w_i V(key_i), all keys on the shared samples."""
        total = np.zeros(self.sample_count)
        for w, key in weighted_keys:
            if w:
                total += w * self.influence(*key)
        return float(total.std(ddof=1) / math.sqrt(total.size))

    def relabel(self, perm: Sequence[int]) -> "AsymptoticInputs":
        """Inputs for cells renamed so that new cell i is old cell perm[i]."""
        p = np.asarray(perm)
        if sorted(p.tolist()) != list(range(self.cells)):
            raise ConfigError(f"{perm} is not a permutation of the cells")
        ix = np.ix_(p, p)
        return AsymptoticInputs(self.config, np.ascontiguousarray(self.d2[ix]), np.ascontiguousarray(self.b[ix]),
                                self.mu[ix], self.finite_correction, self.tolerance)


def _without(cells, k):
    return tuple(c for c in cells if c != k)


def build_asymptotic_inputs(config: NetworkConfig, scenario: ScenarioSpec, sample_count: int = DEFAULT_SAMPLES,
                            seed: int = 0, finite_correction: bool = True) -> AsymptoticInputs:
    """Estimate mu from one batch of single-user draws, then draw the A samples afresh."""
    if sample_count < MIN_SAMPLES:
        raise ConfigError(f"sample_count must be at least {MIN_SAMPLES}, got {sample_count}")
    scenario.check_cells(config.cells)
    L, tau, s2 = config.cells, config.pilot_symbols, config.noise_power
    # drawing n users per cell gives n independent single-user draws
    d = sample_attenuation(L, sample_count, scenario, substream(seed, STREAM_ASYM_MU))
    b = compute_b(d, tau, s2)
    mu = ((1.0 - b) * d * d).mean(axis=2)
    d = sample_attenuation(L, sample_count, scenario, substream(seed, STREAM_ASYM_SAMPLES))
    b = compute_b(d, tau, s2)
    return AsymptoticInputs(config, d * d, b, mu, finite_correction)


def _report(scheme, inputs, value, se, **meta):
    return SchemeRateReport(scheme, float(inputs.prefactor * value), float(inputs.prefactor * se), inputs.sample_count,
                            {"backend": "asymptotic", "finite_correction": inputs.finite_correction, **meta})


def _all(inputs):
    return tuple(range(inputs.cells))


def rate_ian_asym(inputs: AsymptoticInputs) -> SchemeRateReport:
    every = _all(inputs)
    keys = []
    total = 0.0
    for k in every:
        kn, ki = (k, every, every, 1.0), (k, every, _without(every, k), 1.0)
        total += inputs.v(*kn) - inputs.v(*ki)
        keys += [(1.0, kn), (-1.0, ki)]
    return _report("IAN", inputs, total, inputs.std_error(keys))


def rate_sd_asym(inputs: AsymptoticInputs) -> SchemeRateReport:
    every = _all(inputs)
    vals = np.array([inputs.v(k, every, every) for k in every])
    worst = int(np.argmin(vals))
    se = inputs.std_error([(1.0, (worst, every, every, 1.0))])
    return _report("SD", inputs, float(vals[worst]), se, cell_values=vals, limiting_cell=worst)


def _td_terms(inputs, zetas):
    return [(k, (k,), (k,), float(zetas[k])) for k in range(inputs.cells)]


def _check_zetas(z, n):
    z = np.asarray(z, dtype=float)
    if z.shape != (n,) or np.any(z <= 0) or np.any(z > 1) or abs(z.sum() - 1.0) > 1e-9:
        raise ConfigError(f"zetas must be {n} values in (0, 1] summing to 1, got {z}")
    return z


def rate_td_asym(inputs: AsymptoticInputs, zetas=None) -> SchemeRateReport:
    """Time division with the given fractions (equal split by default)."""
    L = inputs.cells
    z = _check_zetas(np.full(L, 1.0 / L) if zetas is None else zetas, L)
    keys = _td_terms(inputs, z)
    value = sum(zk * inputs.v(*key) for zk, key in zip(z, keys))
    return _report("TD", inputs, value, inputs.std_error(zip(z, keys)), zetas=z)


def _proportional_fixed_point(values_at, n):
    """Solve zeta = Z(zeta) / sum Z(zeta) by direct iteration.

    ``values_at(z)`` returns the per-interval Z values.  Without the finite-N
    correction Z does not depend on zeta and one step is exact.
    """
    z = np.full(n, 1.0 / n)
    for _ in range(ZETA_MAX_ITER):
        vals = np.asarray(values_at(z), dtype=float)
        total = vals.sum()
        if not total > 0:
            raise DegenerateError("every interval has zero rate; time fractions are undefined")
        new = vals / total
        if np.all(new > 0) and np.max(np.abs(new - z)) <= ZETA_TOL:
            return new
        # an interval with Z = 0 gets no time; keep it marginally positive
        z = np.maximum(new, 1e-12)
        z /= z.sum()
    return z


def _with_ratio_error(rep, inputs, z, groups):
    """Delta-method error of sum Z^2 / sum Z, whose gradient is 2 zeta_q - sum zeta^2."""
    z = np.asarray(z)
    grad = 2.0 * z - float(np.sum(z * z))
    keys = [(g * w, key) for g, grp in zip(grad, groups) for w, key in grp]
    se = inputs.prefactor * inputs.std_error(keys)
    return SchemeRateReport(rep.scheme, rep.se_bits, se, rep.trials, rep.metadata)


def optimal_zetas(inputs: AsymptoticInputs):
    """Time fractions proportional to the per-cell V values, and the resulting rate."""
    L = inputs.cells

    def vals(z):
        return [inputs.v(*key) for key in _td_terms(inputs, z)]

    z = _proportional_fixed_point(vals, L)
    rep = rate_td_asym(inputs, z)
    keys = _td_terms(inputs, z)
    return z, _with_ratio_error(rep, inputs, z, [[(1.0, key)] for key in keys])


# optimized scheme --------------------------------------------------------------

@dataclass(frozen=True)
class OsConfiguration:
    """Intervals of simultaneously active cells, decoding clusters per interval
    and the time fraction of each interval.  Cells are 0-based."""

    intervals: tuple
    clusters: tuple
    zetas: tuple | None = None

    def __post_init__(self):
        intervals = tuple(tuple(int(c) for c in i) for i in self.intervals)
        clusters = tuple(tuple(tuple(int(c) for c in j) for j in q) for q in self.clusters)
        object.__setattr__(self, "intervals", intervals)
        object.__setattr__(self, "clusters", clusters)
        cells = [c for i in intervals for c in i]
        if not intervals or any(not i for i in intervals):
            raise ConfigError("intervals must be nonempty")
        if sorted(cells) != list(range(len(cells))):
            raise ConfigError(f"intervals {intervals} must partition the cells 0..L-1")
        if len(clusters) != len(intervals):
            raise ConfigError("need one cluster partition per interval")
        for i, q in zip(intervals, clusters):
            members = [c for j in q for c in j]
            if any(not j for j in q) or sorted(members) != sorted(i):
                raise ConfigError(f"clusters {q} do not partition interval {i}")
        if self.zetas is not None:
            z = tuple(float(x) for x in self.zetas)
            _check_zetas(z, len(intervals))
            object.__setattr__(self, "zetas", z)

    @property
    def cells(self) -> int:
        return sum(len(i) for i in self.intervals)

    @property
    def n_intervals(self) -> int:
        return len(self.intervals)

    def with_zetas(self, zetas) -> "OsConfiguration":
        return OsConfiguration(self.intervals, self.clusters, tuple(zetas))

    def relabel(self, perm: Sequence[int]) -> "OsConfiguration":
        """Same layout after renaming cells so that new cell i is old cell perm[i]."""
        inv = {old: new for new, old in enumerate(perm)}
        return OsConfiguration(
            tuple(tuple(inv[c] for c in i) for i in self.intervals),
            tuple(tuple(tuple(inv[c] for c in j) for j in q) for q in self.clusters),
            self.zetas,
        )

    def canonical(self) -> "OsConfiguration":
        """Blocks sorted internally and ordered by smallest member (zetas follow their interval)."""
        order = sorted(range(self.n_intervals), key=lambda q: min(self.intervals[q]))
        return OsConfiguration(
            tuple(tuple(sorted(self.intervals[q])) for q in order),
            tuple(tuple(sorted((tuple(sorted(j)) for j in self.clusters[q]), key=min)) for q in order),
            None if self.zetas is None else tuple(self.zetas[q] for q in order),
        )

    def interval_string(self) -> str:
        """1-based form such as ``[1,3,4][2,5]``."""
        return "".join("[" + ",".join(str(c + 1) for c in i) + "]" for i in self.intervals)

    def cluster_string(self) -> str:
        return "|".join("".join("[" + ",".join(str(c + 1) for c in j) + "]" for j in q) for q in self.clusters)


def _interval_z(inputs, interval, clusters, zeta):
    """Z for one interval and the weighted V keys of its limiting cells."""
    interval = tuple(sorted(interval))
    total = 0.0
    keys = []
    for cluster in clusters:
        rest = tuple(l for l in interval if l not in cluster)
        best = None
        for k in sorted(cluster):
            kn, ki = (k, interval, interval, zeta), (k, interval, rest, zeta)
            diff = inputs.v(*kn) - inputs.v(*ki)
            if best is None or diff < best[0]:
                best = (diff, kn, ki)
        total += best[0]
        keys += [(1.0, best[1]), (-1.0, best[2])]
    return total, keys


def rate_os_asym(inputs: AsymptoticInputs, os_config: OsConfiguration) -> SchemeRateReport:
    if os_config.cells != inputs.cells:
        raise ConfigError(f"configuration covers {os_config.cells} cells, network has {inputs.cells}")
    if os_config.zetas is None:
        raise ConfigError("configuration has no time fractions; use optimal_os_zetas")
    value = 0.0
    keys = []
    for zq, i, q in zip(os_config.zetas, os_config.intervals, os_config.clusters):
        zval, zkeys = _interval_z(inputs, i, q, zq)
        value += zq * zval
        keys += [(zq * w, key) for w, key in zkeys]
    return _report("OS", inputs, value, inputs.std_error(keys), configuration=os_config)


def optimal_os_zetas(inputs: AsymptoticInputs, os_config: OsConfiguration):
    """Time fractions proportional to each interval's Z, and the resulting rate."""
    if os_config.cells != inputs.cells:
        raise ConfigError(f"configuration covers {os_config.cells} cells, network has {inputs.cells}")
    pairs = list(zip(os_config.intervals, os_config.clusters))

    def vals(z):
        return [_interval_z(inputs, i, q, zq)[0] for zq, (i, q) in zip(z, pairs)]

    z = _proportional_fixed_point(vals, len(pairs))
    rep = rate_os_asym(inputs, os_config.with_zetas(z))
    groups = [_interval_z(inputs, i, q, zq)[1] for zq, (i, q) in zip(z, pairs)]
    return tuple(z), _with_ratio_error(rep, inputs, z, groups)
