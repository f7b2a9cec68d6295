"""One-shot energy-efficiency power control game.

K players share a multiple-access channel with processing gain n.  Player i
transmits at power p_i over a fading gain |g_i|^2 and earns

    u_i = rate_i * f(sinr_i) / p_i        [bit/J, with u_i = 0 at p_i = 0]

where sinr_i = n * p_i |g_i|^2 / (sum_{j != i} p_j |g_j|^2 + sigma2).  The
received action a_i = p_i |g_i|^2 is the natural variable: all equilibrium
profiles below equalise actions, not powers.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .efficiency import EfficiencyModel
from .errors import NoNashEquilibriumError, SaturatedRegimeError


def _per_player(value, k: int, name: str) -> tuple[float, ...]:
    if np.ndim(value) == 0:
        return (float(value),) * k
    out = tuple(float(v) for v in value)
    if len(out) != k:
        raise ValueError(f"{name} must have length k={k}, got {len(out)}")
    return out


@dataclass(frozen=True)
class NetworkConfig:
    """Static description of the network: sizes, noise, caps and gain bounds."""

    k: int
    n: int
    sigma2: float
    rates: tuple[float, ...]
    p_max: tuple[float, ...]
    eta_min: tuple[float, ...]
    eta_max: tuple[float, ...]

    def __post_init__(self):
        if self.k < 1 or int(self.k) != self.k:
            raise ValueError("k must be a positive integer")
        if self.n < 1 or int(self.n) != self.n:
            raise ValueError("spreading factor n must be a positive integer")
        if not self.sigma2 > 0.0:
            raise ValueError("noise power sigma2 must be positive")
        object.__setattr__(self, "rates", _per_player(self.rates, self.k, "rates"))
        object.__setattr__(self, "p_max", _per_player(self.p_max, self.k, "p_max"))
        object.__setattr__(self, "eta_min", _per_player(self.eta_min, self.k, "eta_min"))
        object.__setattr__(self, "eta_max", _per_player(self.eta_max, self.k, "eta_max"))
        for name in ("rates", "p_max", "eta_min", "eta_max"):
            if any(v <= 0.0 for v in getattr(self, name)):
                raise ValueError(f"{name} entries must be positive")
        for lo, hi in zip(self.eta_min, self.eta_max):
            if lo > hi:
                raise ValueError("eta_min must not exceed eta_max")

    @classmethod
    def uniform(cls, k, n, sigma2, rate, p_max, eta_min, eta_max) -> "NetworkConfig":
        return cls(k=k, n=n, sigma2=sigma2, rates=rate, p_max=p_max,
                   eta_min=eta_min, eta_max=eta_max)


@dataclass(frozen=True)
class ChannelState:
    """Squared channel gains |g_i|^2 for one stage."""

    gains2: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "gains2", tuple(float(g) for g in self.gains2))
        if any(g <= 0.0 for g in self.gains2):
            raise ValueError("squared gains must be positive")


@dataclass(frozen=True)
class PowerProfile:
    p: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(v) for v in self.p))
        if any(v < 0.0 for v in self.p):
            raise ValueError("powers must be nonnegative")


@dataclass(frozen=True)
class UtilityProfile:
    u: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "u", tuple(float(v) for v in self.u))


def sinr_all(cfg: NetworkConfig, ch: ChannelState, profile: PowerProfile) -> np.ndarray:
    p = np.asarray(profile.p)
    g2 = np.asarray(ch.gains2)
    a = p * g2
    interference = a.sum() - a + cfg.sigma2
    return cfg.n * a / interference


def sinr(cfg: NetworkConfig, ch: ChannelState, profile: PowerProfile, i: int) -> float:
    return float(sinr_all(cfg, ch, profile)[i])


def utility(model: EfficiencyModel, cfg: NetworkConfig, ch: ChannelState,
            profile: PowerProfile) -> UtilityProfile:
    """Per-player efficiency in bit/J; zero wherever the power is zero."""
    p = np.asarray(profile.p)
    x = sinr_all(cfg, ch, profile)
    eff = model.value(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(p > 0.0, np.asarray(cfg.rates) * eff / p, 0.0)
    return UtilityProfile(tuple(u))


def public_signal(cfg: NetworkConfig, ch: ChannelState, profile: PowerProfile) -> float:
    """Total received energy sigma2 + sum_i p_i |g_i|^2, observable by all."""
    return float(cfg.sigma2 + (np.asarray(profile.p) * np.asarray(ch.gains2)).sum())


def reconstruct_public_signal(p_i: float, gain2_i: float, sinr_i: float, n: int) -> float:
    """Recover the public signal from one player's own power, gain and SINR.

    Identity: a_i * (sinr_i + n) / sinr_i = sigma2 + sum_j a_j, so a player
    needs no side information beyond its own measurements.
    """
    if sinr_i <= 0.0:
        raise ValueError("reconstruction requires a positive SINR")
    a_i = p_i * gain2_i
    return a_i * (sinr_i + n) / sinr_i


def _equal_action(cfg: NetworkConfig, x: float) -> float:
    # received action making every player's SINR equal to x
    margin = cfg.n - (cfg.k - 1) * x
    if margin <= 0.0:
        raise NoNashEquilibriumError(
            f"target SINR {x} not sustainable: requires (K-1)*x < N, "
            f"i.e. 2 <= K < N/x + 1 (K={cfg.k}, N={cfg.n})"
        )
    return cfg.sigma2 * x / margin


def _actions_to_profile(cfg: NetworkConfig, ch: ChannelState, actions: np.ndarray,
                        label: str) -> PowerProfile:
    p = actions / np.asarray(ch.gains2)
    over = p > np.asarray(cfg.p_max)
    if np.any(over):
        i = int(np.argmax(over))
        raise SaturatedRegimeError(
            f"{label} power {p[i]} exceeds cap {cfg.p_max[i]} for player {i + 1}"
        )
    return PowerProfile(tuple(p))


def ne_action(cfg: NetworkConfig, beta_star: float) -> float:
    """Received action of the one-shot equilibrium: sigma2*b/(n - (k-1)b)."""
    if cfg.k >= 2 and (cfg.k - 1) * beta_star >= cfg.n:
        raise NoNashEquilibriumError(
            "one-shot equilibrium requires 2 <= K < N/beta_star + 1 "
            f"(K={cfg.k}, N={cfg.n}, beta_star={beta_star})"
        )
    return _equal_action(cfg, beta_star)


def ne_profile(cfg: NetworkConfig, ch: ChannelState, beta_star: float) -> PowerProfile:
    """One-shot equilibrium powers; every SINR equals beta_star."""
    a = ne_action(cfg, beta_star)
    return _actions_to_profile(cfg, ch, np.full(cfg.k, a), "equilibrium")


def op_action(cfg: NetworkConfig, gamma_tilde: float) -> float:
    return _equal_action(cfg, gamma_tilde)


def op_profile(cfg: NetworkConfig, ch: ChannelState, gamma_tilde: float) -> PowerProfile:
    """Cooperative operating-point powers; every SINR equals gamma_tilde."""
    a = op_action(cfg, gamma_tilde)
    return _actions_to_profile(cfg, ch, np.full(cfg.k, a), "operating-point")


def se_profiles(model: EfficiencyModel, cfg: NetworkConfig, ch: ChannelState,
                beta_star: float, gamma_star: float, leader: int,
                ) -> tuple[PowerProfile, UtilityProfile]:
    """Leader-follower equilibrium: powers and closed-form utilities.

    The leader lands at SINR gamma_star, every follower at beta_star.  With
    bn = beta_star/n, gn = gamma_star/n and d = 1 - (k-2)bn - (k-1)gn*bn:

        a_leader   = sigma2 * gamma_star * (1 + bn) / (n d)
        a_follower = sigma2 * beta_star  * (1 + gn) / (n d)

    and utilities follow from u = rate * f(sinr) * gain2 / action.
    """
    if not 0 <= leader < cfg.k:
        raise ValueError(f"leader index {leader} out of range for k={cfg.k}")
    bn = beta_star / cfg.n
    gn = gamma_star / cfg.n
    d = 1.0 - (cfg.k - 2) * bn - (cfg.k - 1) * gn * bn
    if d <= 0.0:
        raise NoNashEquilibriumError(
            "leader-follower equilibrium requires "
            f"1 - (K-2)*b/N - (K-1)*g*b/N^2 > 0, got {d}"
        )
    a_leader = cfg.sigma2 * gamma_star * (1.0 + bn) / (cfg.n * d)
    a_follow = cfg.sigma2 * beta_star * (1.0 + gn) / (cfg.n * d)
    actions = np.full(cfg.k, a_follow)
    actions[leader] = a_leader
    profile = _actions_to_profile(cfg, ch, actions, "leader-follower")

    g2 = np.asarray(ch.gains2)
    rates = np.asarray(cfg.rates)
    scale = rates * g2 / cfg.sigma2 * cfg.n * d
    u = scale * model.value(beta_star) / (beta_star * (1.0 + gn))
    u[leader] = scale[leader] * model.value(gamma_star) / (gamma_star * (1.0 + bn))
    return profile, UtilityProfile(tuple(u))


def social_welfare(u: UtilityProfile) -> float:
    return float(sum(u.u))


def weighted_welfare(u: UtilityProfile, weights) -> float:
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0.0):
        raise ValueError("welfare weights must be nonnegative")
    if w.shape != (len(u.u),):
        raise ValueError("one weight per player required")
    return float((w * np.asarray(u.u)).sum())


def pareto_dominates(ua: UtilityProfile, ub: UtilityProfile) -> bool:
    """True when ua is at least ub everywhere and strictly better somewhere."""
    a, b = np.asarray(ua.u), np.asarray(ub.u)
    return bool(np.all(a >= b) and np.any(a > b))


def sample_utility_region(model: EfficiencyModel, cfg: NetworkConfig, ch: ChannelState,
                          points_per_axis: int = 200) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate normalised utilities u_i/|g_i|^2 on a full power grid.

    Returns (powers, utils_norm), each of shape (points_per_axis**k, k), in
    row-major order over the per-player grids [0, p_max_i].
    """
    if cfg.k >= 4:
        warnings.warn(
            f"region sampling is combinatorial: {points_per_axis}**{cfg.k} profiles",
            stacklevel=2,
        )
    axes = [np.linspace(0.0, pm, points_per_axis) for pm in cfg.p_max]
    mesh = np.meshgrid(*axes, indexing="ij")
    powers = np.stack([m.reshape(-1) for m in mesh], axis=1)

    g2 = np.asarray(ch.gains2)
    rates = np.asarray(cfg.rates)
    a = powers * g2
    interference = a.sum(axis=1, keepdims=True) - a + cfg.sigma2
    x = cfg.n * a / interference
    eff = model.value(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(powers > 0.0, rates * eff / powers, 0.0)
    return powers, u / g2


def region_to_csv(path, powers: np.ndarray, utils_norm: np.ndarray) -> None:
    """Write sampled region rows as p1..pK,u1_norm..uK_norm."""
    k = powers.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"p{i + 1}" for i in range(k)]
                        + [f"u{i + 1}_norm" for i in range(k)])
        for prow, urow in zip(powers, utils_norm):
            writer.writerow([repr(float(v)) for v in prow]
                            + [repr(float(v)) for v in urow])
