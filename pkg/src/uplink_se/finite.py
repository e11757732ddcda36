"""Finite-antenna Monte Carlo engine.

Channel estimates are sampled through their distributional equivalent
``G_hat ~ M B^{1/2} D``, so the expected log-determinants of the joint
decoding schemes only need one N x K Gaussian matrix per (trial, cell).
The explicit pilot phase is also simulated, both for validation and for the
separate linear decoding baseline.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, DomainError, NumericalError
from .network import (
    STREAM_FADING,
    STREAM_LINEAR,
    STREAM_LOGDET,
    AttenuationDraw,
    NetworkConfig,
    ScenarioSpec,
    generate_attenuation,
    noise_floor,
    substream,
)

DEFAULT_TRIALS = 2000
SCHEMES = ("IAN", "SD", "TD", "OS", "LinearMF", "LinearMMSE")


@dataclass(frozen=True)
class SchemeRateReport:
    scheme: str
    se_bits: float
    std_error: float
    trials: int
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}")


@dataclass(frozen=True)
class AggregateMatrices:
    """Diagonals of the aggregate matrices, each of shape (L, K)."""

    a_net: np.ndarray
    a_int: np.ndarray
    a_td: np.ndarray
    zetas: np.ndarray


@dataclass
class ChannelRealization:
    """Per-cell channel matrices; all (k, l) tensors have shape (L, L, N, K)."""

    m_matrix: Optional[np.ndarray] = None
    h: Optional[np.ndarray] = None
    w: Optional[np.ndarray] = None
    g: Optional[np.ndarray] = None
    g_hat: Optional[np.ndarray] = None
    g_tilde: Optional[np.ndarray] = None


def complex_gaussian(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """Proper complex Gaussian entries with E|x|^2 = variance."""
    s = math.sqrt(variance / 2.0)
    return s * rng.standard_normal(shape) + 1j * s * rng.standard_normal(shape)


def _std_error(x: np.ndarray) -> float:
    return float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0


def run_indexed(fn: Callable[[int], np.ndarray], count: int, threads: int = 1) -> np.ndarray:
    """Evaluate ``fn(0..count-1)`` and stack results in index order."""
    if threads == 0:
        import os

        threads = os.cpu_count() or 1
    if threads <= 1 or count <= 1:
        return np.stack([fn(i) for i in range(count)])
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return np.stack(list(pool.map(fn, range(count))))


# log-determinant kernel -----------------------------------------------------

def logdet_from_gram(gram: np.ndarray, a: np.ndarray, trial: int | None = None) -> float:
    """log2|I_K + A^{1/2} gram A^{1/2}| for a Hermitian PSD ``gram``."""
    if not np.any(a):
        return 0.0
    s = np.sqrt(a)
    mat = gram * s[:, None] * s[None, :]
    mat[np.diag_indices_from(mat)] += 1.0
    try:
        c = np.linalg.cholesky(mat)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Cholesky failed in trial {trial}", trial=trial) from exc
    return 2.0 * float(np.log2(np.abs(np.diagonal(c))).sum())


def logdet(m: np.ndarray, a: np.ndarray, trial: int | None = None) -> float:
    """log2|I_N + M diag(a) M^H|, evaluated through the smaller Gram form."""
    n, k = m.shape
    a = np.asarray(a, dtype=float)
    if k <= n:
        return logdet_from_gram(m.conj().T @ m, a, trial)
    ms = m * np.sqrt(a)
    return logdet_from_gram(ms @ ms.conj().T, np.ones(n), trial)


def logdet_mc(diag_entries, n_antennas: int, trials: int, seed: int, threads: int = 1) -> tuple[float, float]:
    """Mean and standard error of log2|I_N + M diag(a) M^H| over fresh M.

    ``diag_entries`` is a K-vector (reused every trial), a (trials, K) array,
    or a callable ``f(rng) -> K-vector`` drawing fresh entries per trial.
    """
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    fixed = None if callable(diag_entries) else np.asarray(diag_entries, dtype=float)
    if fixed is not None and fixed.ndim == 2 and fixed.shape[0] != trials:
        raise ConfigError("per-trial diagonal array must have one row per trial")

    def one(r):
        rng = substream(seed, STREAM_LOGDET, r)
        if fixed is None:
            a = np.asarray(diag_entries(rng), dtype=float)
        else:
            a = fixed[r] if fixed.ndim == 2 else fixed
        if np.any(a < 0):
            raise DomainError("diagonal entries must be nonnegative")
        m = complex_gaussian(rng, (n_antennas, a.size))
        return np.array(logdet(m, a, r))

    vals = run_indexed(one, trials, threads)
    return float(vals.mean()), _std_error(vals)


# aggregate matrices -----------------------------------------------------------

def aggregate_diagonals(draw: AttenuationDraw, noise_power: float, zetas=None) -> AggregateMatrices:
    L = draw.cells
    zetas = np.full(L, 1.0 / L) if zetas is None else np.asarray(zetas, dtype=float)
    d2 = draw.d ** 2
    idx = np.arange(L)
    d2kk = d2[idx, idx]  # (L, K)
    bkk = draw.b[idx, idx]
    base = bkk / d2kk
    d4 = d2 * d2
    t = noise_floor(draw, None, noise_power)
    a_net = base * d4.sum(axis=1) / t[:, None]
    # zero the own-cell term in place so that the summation order matches a_net
    d4_off = d4.copy()
    d4_off[idx, idx] = 0.0
    a_int = base * d4_off.sum(axis=1) / t[:, None]
    own_resid = ((1.0 - bkk) * d2kk).sum(axis=1)
    a_td = bkk * d2kk / (own_resid + zetas * noise_power)[:, None]
    return AggregateMatrices(a_net, a_int, a_td, zetas)


def _check_zetas(zetas, L) -> np.ndarray:
    z = np.asarray(zetas, dtype=float)
    if z.shape != (L,) or np.any(z <= 0) or np.any(z > 1) or abs(z.sum() - 1.0) > 1e-9:
        raise ConfigError(f"zetas must be {L} values in (0, 1] summing to 1, got {zetas}")
    return z


# joint decoding schemes -----------------------------------------------------

def finite_logdets(config: NetworkConfig, scenario: ScenarioSpec, trials: int, seed: int,
                   zetas=None, threads: int = 1) -> np.ndarray:
    """Per-trial log-dets, shape (trials, 3, L): Net, Int and TD rows.

    The three log-dets of cell k in trial r share one Gaussian matrix.
    """
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    scenario.check_cells(config.cells)
    L, K, N = config.cells, config.users_per_cell, config.antennas
    z = _check_zetas(np.full(L, 1.0 / L) if zetas is None else zetas, L)

    def one(r):
        draw = generate_attenuation(config, scenario, seed, r)
        agg = aggregate_diagonals(draw, config.noise_power, z)
        out = np.empty((3, L))
        for k in range(L):
            m = complex_gaussian(substream(seed, STREAM_FADING, r, k), (N, K))
            if K <= N:
                gram = m.conj().T @ m
                out[0, k] = logdet_from_gram(gram, agg.a_net[k], r)
                out[1, k] = logdet_from_gram(gram, agg.a_int[k], r)
                out[2, k] = logdet_from_gram(gram, agg.a_td[k], r)
            else:
                out[0, k] = logdet(m, agg.a_net[k], r)
                out[1, k] = logdet(m, agg.a_int[k], r)
                out[2, k] = logdet(m, agg.a_td[k], r)
        diff = out[0] - out[1]
        if np.any(diff < -1e-9 * np.maximum(1.0, out[0])):
            raise NumericalError(f"negative interference-as-noise integrand in trial {r}", trial=r)
        return out

    return run_indexed(one, trials, threads)


def _meta(config, scenario, seed, **extra):
    return {"backend": "finite", "config": config, "scenario": scenario, "seed": seed, **extra}


def reports_from_logdets(logdets: np.ndarray, config: NetworkConfig, zetas=None, meta=None) -> dict:
    """IAN, SD and TD reports from the per-trial log-dets of :func:`finite_logdets`."""
    trials, _, L = logdets.shape
    K = config.users_per_cell
    scale = config.prelog / (L * K)
    z = np.full(L, 1.0 / L) if zetas is None else np.asarray(zetas, dtype=float)
    meta = dict(meta or {})
    ian = (logdets[:, 0] - logdets[:, 1]).sum(axis=1)
    net = logdets[:, 0]
    cell_means = net.mean(axis=0)
    worst = int(np.argmin(cell_means))
    td = (logdets[:, 2] * z).sum(axis=1)
    return {
        "IAN": SchemeRateReport("IAN", scale * float(ian.mean()), scale * _std_error(ian), trials, meta),
        "SD": SchemeRateReport("SD", scale * float(cell_means[worst]), scale * _std_error(net[:, worst]), trials,
                               {**meta, "cell_rates": scale * cell_means, "limiting_cell": worst}),
        "TD": SchemeRateReport("TD", scale * float(td.mean()), scale * _std_error(td), trials,
                               {**meta, "zetas": z}),
    }


def finite_rates(config, scenario, trials=DEFAULT_TRIALS, seed=0, zetas=None, threads=1) -> dict:
    lds = finite_logdets(config, scenario, trials, seed, zetas, threads)
    return reports_from_logdets(lds, config, zetas, _meta(config, scenario, seed))


def rate_ian_finite(config, scenario, trials=DEFAULT_TRIALS, seed=0, threads=1) -> SchemeRateReport:
    return finite_rates(config, scenario, trials, seed, None, threads)["IAN"]


def rate_sd_finite(config, scenario, trials=DEFAULT_TRIALS, seed=0, threads=1) -> SchemeRateReport:
    return finite_rates(config, scenario, trials, seed, None, threads)["SD"]


def rate_td_finite(config, scenario, zetas=None, trials=DEFAULT_TRIALS, seed=0, threads=1) -> SchemeRateReport:
    """Time division with the given fractions (equal split by default)."""
    return finite_rates(config, scenario, trials, seed, zetas, threads)["TD"]


# channel realizations and explicit estimation --------------------------------

def dft_pilots(users: int, tau: int) -> np.ndarray:
    """K x tau pilot matrix with orthogonal rows, S S^H = tau I."""
    if tau < users:
        raise ConfigError("need at least as many pilot symbols as users")
    return np.exp(-2j * np.pi * np.outer(np.arange(users), np.arange(tau)) / tau)


def sample_channel(draw: AttenuationDraw, n_antennas: int, noise_power: float, tau: int,
                   rng: np.random.Generator) -> ChannelRealization:
    """Fast fading H, pilot-phase noise W and true channels G = H D."""
    L, K = draw.cells, draw.users
    h = complex_gaussian(rng, (L, L, n_antennas, K))
    w = complex_gaussian(rng, (L, n_antennas, tau), noise_power)
    return ChannelRealization(h=h, w=w, g=h * draw.d[:, :, None, :])


def estimate_channel_explicit(pilot_matrix: np.ndarray, draw: AttenuationDraw, channel: ChannelRealization):
    """Simulate the pilot phase and return (G_hat, G_tilde), shape (L, L, N, K).

    Every cell reuses the same pilot matrix, which is the source of pilot
    contamination.
    """
    s = np.asarray(pilot_matrix)
    K, tau = s.shape
    if K != draw.users:
        raise ConfigError("pilot matrix must have one row per user")
    if tau < K:
        raise ConfigError("need at least as many pilot symbols as users")
    if not np.allclose(s @ s.conj().T, tau * np.eye(K), rtol=0, atol=1e-9 * tau):
        raise ConfigError("pilot rows are not orthogonal with S S^H = tau I")
    g = channel.g
    y = np.einsum("klnm,mt->knt", g, s) + channel.w  # (L, N, tau)
    proj = y @ s.conj().T / tau  # (L, N, K)
    g_hat = proj[:, None, :, :] * draw.b[:, :, None, :]
    g_tilde = g - g_hat
    return g_hat, g_tilde


def lemma1_estimate(draw: AttenuationDraw, n_antennas: int, rng: np.random.Generator):
    """Sample (G_hat, G_tilde) from their distributional equivalents.

    G_hat_{k,l} = M_k B_{k,l}^{1/2} D_{k,l} with M_k shared across l, and
    G_tilde_{k,l} = M'_{k,l} (I - B_{k,l})^{1/2} D_{k,l} independent.
    """
    L, K = draw.cells, draw.users
    m = complex_gaussian(rng, (L, 1, n_antennas, K))
    m2 = complex_gaussian(rng, (L, L, n_antennas, K))
    g_hat = m * (np.sqrt(draw.b) * draw.d)[:, :, None, :]
    g_tilde = m2 * (np.sqrt(1.0 - draw.b) * draw.d)[:, :, None, :]
    return g_hat, g_tilde


# separate linear decoding baseline -------------------------------------------

RECEIVERS = ("MF", "MMSE")


def linear_sinr(draw: AttenuationDraw, g: np.ndarray, proj: np.ndarray, noise_power: float,
                receiver: str) -> np.ndarray:
    """Per-user SINR, shape (L, K), from true channels g (L, L, N, K) and the
    pilot projections proj_k = Y_k S^H / tau (L, N, K)."""
    L, K = draw.cells, draw.users
    t = noise_floor(draw, None, noise_power)
    out = np.empty((L, K))
    for k in range(L):
        bkk = draw.b[k, k]
        ghat = proj[k] * bkk
        gtil = g[k, k] - ghat
        if receiver == "MF":
            q = ghat
        elif receiver == "MMSE":
            # (Gh Gh^H + T I)^{-1} Gh = Gh (Gh^H Gh + T I)^{-1}
            gram = ghat.conj().T @ ghat
            gram[np.diag_indices_from(gram)] += t[k]
            q = np.linalg.solve(gram.T, ghat.T).T
        else:
            raise ConfigError(f"unknown receiver {receiver!r}")
        qh = q.conj().T
        signal = np.abs(np.einsum("nm,nm->m", q.conj(), ghat)) ** 2
        cross = np.abs(qh @ g[k].transpose(1, 0, 2).reshape(g.shape[2], L * K)) ** 2  # (K, L*K)
        users = np.arange(K)
        cross[users, k * K + users] = 0.0  # the user's own true channel is not interference
        err = np.abs(np.einsum("nm,nm->m", q.conj(), gtil)) ** 2
        noise = noise_power * (np.abs(q) ** 2).sum(axis=0)
        out[k] = signal / (cross.sum(axis=1) + err + noise)
    return out


def rate_linear_finite(config: NetworkConfig, scenario: ScenarioSpec, receiver: str,
                       trials: int = DEFAULT_TRIALS, seed: int = 0, threads: int = 1) -> SchemeRateReport:
    """Separate linear decoding with matched-filter or MMSE receive filters.

    Uses the same attenuation realizations as the joint schemes for a given
    seed, so comparisons are on matched draws.
    """
    if receiver not in RECEIVERS:
        raise ConfigError(f"receiver must be one of {RECEIVERS}, got {receiver!r}")
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    scenario.check_cells(config.cells)
    L, K, N, tau = config.cells, config.users_per_cell, config.antennas, config.pilot_symbols

    def one(r):
        draw = generate_attenuation(config, scenario, seed, r)
        rng = substream(seed, STREAM_LINEAR, r)
        h = complex_gaussian(rng, (L, L, N, K))
        g = h * draw.d[:, :, None, :]
        # Y S^H / tau is a sufficient statistic: sum of G plus noise of variance sigma^2 / tau
        proj = g.sum(axis=1) + complex_gaussian(rng, (L, N, K), config.noise_power / tau)
        return np.log2(1.0 + linear_sinr(draw, g, proj, config.noise_power, receiver)).mean()

    vals = run_indexed(lambda r: np.array(one(r)), trials, threads)
    scheme = "LinearMF" if receiver == "MF" else "LinearMMSE"
    return SchemeRateReport(scheme, config.prelog * float(vals.mean()), config.prelog * _std_error(vals), trials,
                            _meta(config, scenario, seed, receiver=receiver))
