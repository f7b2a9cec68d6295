"""Repeated power control: cooperation bounds, trigger strategies, engine.

Players repeat the stage game and sustain the cooperative operating point by
monitoring the public signal omega = sigma2 + sum_i p_i |g_i|^2.  Two plans:

* finite horizon (``FrgPlan``): play the cooperative powers for the first
  T - T0 stages, the one-shot equilibrium for the last T0, and switch to full
  power forever once the public signal leaves its cooperative value.
* discounted horizon (``DrgPlan``): play the cooperative powers and revert to
  the one-shot equilibrium forever after any detected deviation.

``t0_bound`` and ``lambda_bound`` give the horizon/patience thresholds that
make one-stage deviations unprofitable against worst-case bounded gains.
Both are evaluated exactly as stated, including the deviation payoff being
bounded by the interference-free maximum; see ``t0_bound_exact_deviation``
for the tighter diagnostic that uses the true best deviation instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import ceil, log

import numpy as np

from .efficiency import EfficiencyModel, equal_action_utility
from .errors import NoFiniteT0Error, PowerGameError, SaturatedRegimeError
from .static_game import ChannelState, NetworkConfig, ne_action, op_action


@dataclass(frozen=True)
class FrgPlan:
    """Finite-horizon plan: cooperate for t_total - t0 stages, then endgame.

    t0 >= t_total is the degenerate all-endgame plan (empty cooperation
    window), accepted so horizon sweeps need no special casing.
    """

    t_total: int
    t0: int

    def __post_init__(self):
        if not (self.t_total >= 1 and self.t0 >= 0):
            raise ValueError("need t_total >= 1 and t0 >= 0")


@dataclass(frozen=True)
class DrgPlan:
    """Discounted plan: each stage is the last with probability lam."""

    lam: float

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ValueError("stopping probability must lie in (0, 1)")


Plan = FrgPlan | DrgPlan


class Phase(str, Enum):
    COOPERATE = "cooperate"
    ENDGAME = "endgame"
    PUNISH = "punish"


@dataclass(frozen=True)
class RgBounds:
    t0: int
    lambda_max: float
    delta: float


@dataclass(frozen=True)
class GameHistory:
    """What a player can condition on: public signals plus its own powers."""

    omegas: tuple[float, ...]
    own_powers: tuple[float, ...]


@dataclass(frozen=True)
class StageRecord:
    t: int
    gains2: tuple[float, ...]
    powers: tuple[float, ...]
    sinrs: tuple[float, ...]
    utilities: tuple[float, ...]
    omega: float
    phases: tuple[str, ...]
    deviation_detected: bool


@dataclass(frozen=True)
class BestDeviation:
    power: float
    utility: float
    saturated: bool


@dataclass(frozen=True)
class DiscountedAverage:
    value: float
    tail_bound: float


@dataclass(frozen=True)
class DeviationScenario:
    """Deterministic off-plan script for one player.

    ``power`` is a wattage, "max", or "best_response" (the one-stage optimum
    against the other players' emitted powers).  With ``best_response_after``
    the player keeps best-responding at every later stage, which is its
    optimal continuation while being punished.
    """

    player: int
    stage: int
    power: float | str
    best_response_after: bool = False


def delta_gain(model: EfficiencyModel, k: int, n: int,
               beta_star: float, gamma_tilde: float) -> float:
    """Per-stage cooperation surplus in equal-action utility units (>= 0)."""
    if gamma_tilde == beta_star:
        return 0.0
    d = (equal_action_utility(model, gamma_tilde, k, n)
         - equal_action_utility(model, beta_star, k, n))
    if d < -1e-12 * equal_action_utility(model, beta_star, k, n):
        raise PowerGameError("cooperative utility fell below equilibrium utility")
    return max(d, 0.0)


def _t0_ratio(cfg: NetworkConfig, model: EfficiencyModel, beta_star: float,
              gamma_tilde: float, i: int, deviation_term: float) -> float:
    phi_ne = equal_action_utility(model, beta_star, cfg.k, cfg.n)
    f_ne = model.value(beta_star)
    punish_interference = (
        sum(cfg.p_max[j] * cfg.eta_min[j] for j in range(cfg.k) if j != i)
        + cfg.sigma2
    )
    numerator = cfg.eta_max[i] * deviation_term - cfg.eta_min[i] * equal_action_utility(
        model, gamma_tilde, cfg.k, cfg.n)
    denominator = cfg.eta_min[i] * phi_ne - cfg.eta_max[i] * f_ne / (
        beta_star * punish_interference)
    if denominator <= 0.0:
        raise NoFiniteT0Error(
            "full-power punishment too weak for player "
            f"{i + 1}: eta_min*phi(beta_star) <= eta_max*f(beta_star)/"
            f"(beta_star*(sum_j P_j_max*eta_j_min + sigma2)) = {-denominator + cfg.eta_min[i] * phi_ne}"
        )
    return numerator / denominator


def t0_bound(cfg: NetworkConfig, model: EfficiencyModel, beta_star: float,
             gamma_tilde: float, player: int | None = None) -> int:
    """Endgame length making every one-stage deviation unprofitable.

    Per player: ceil of
      (eta_max f(b)/b - eta_min phi(gt)) /
      (eta_min phi(b) - eta_max f(b) / (b (sum_{j!=i} P_j_max eta_j_min + sigma2)))
    with phi the equal-action utility factor.  The numerator bounds the
    deviation payoff by the interference-free maximum f(b)/b.  Network-wide
    (player=None) this is the max over players, the binding one.
    """
    if cfg.k < 2:
        return 1  # nobody to deviate against
    deviation_term = model.value(beta_star) / beta_star
    if player is not None:
        return max(1, ceil(_t0_ratio(cfg, model, beta_star, gamma_tilde, player,
                                     deviation_term)))
    return max(
        max(1, ceil(_t0_ratio(cfg, model, beta_star, gamma_tilde, i, deviation_term)))
        for i in range(cfg.k)
    )


def t0_bound_exact_deviation(cfg: NetworkConfig, model: EfficiencyModel,
                             beta_star: float, gamma_tilde: float,
                             player: int | None = None) -> int:
    """Diagnostic variant of t0_bound with the exact one-stage deviation payoff.

    Replaces the interference-free bound f(b)/b by the utility of the best
    response against the cooperative profile, f(b)/b * (1 - (k-1)*gt/n).
    Never larger than t0_bound.
    """
    if cfg.k < 2:
        return 1
    deviation_term = (model.value(beta_star) / beta_star
                      * (1.0 - (cfg.k - 1) * gamma_tilde / cfg.n))
    if player is not None:
        return max(1, ceil(_t0_ratio(cfg, model, beta_star, gamma_tilde, player,
                                     deviation_term)))
    return max(
        max(1, ceil(_t0_ratio(cfg, model, beta_star, gamma_tilde, i, deviation_term)))
        for i in range(cfg.k)
    )


def lambda_bound(cfg: NetworkConfig, model: EfficiencyModel, beta_star: float,
                 gamma_tilde: float) -> float:
    """Largest stopping probability that keeps cooperation self-enforcing.

    min over players of eta_min*delta / (eta_min*delta + eta_max*((k-1)*f(b) - delta)),
    zero when the cooperation surplus delta vanishes (k = 1 degeneracy).
    """
    delta = delta_gain(model, cfg.k, cfg.n, beta_star, gamma_tilde)
    if delta == 0.0:
        return 0.0
    f_ne = model.value(beta_star)
    out = 1.0
    for lo, hi in zip(cfg.eta_min, cfg.eta_max):
        out = min(out, lo * delta / (lo * delta + hi * ((cfg.k - 1) * f_ne - delta)))
    return out


def rg_bounds(cfg: NetworkConfig, model: EfficiencyModel, beta_star: float,
              gamma_tilde: float) -> RgBounds:
    return RgBounds(
        t0=t0_bound(cfg, model, beta_star, gamma_tilde),
        lambda_max=lambda_bound(cfg, model, beta_star, gamma_tilde),
        delta=delta_gain(model, cfg.k, cfg.n, beta_star, gamma_tilde),
    )


def drg_truncation_horizon(lam: float, tail: float = 1e-12) -> int:
    """Smallest T with (1 - lam)^T below the tail mass."""
    if not 0.0 < lam < 1.0:
        raise ValueError("lam must lie in (0, 1)")
    return int(ceil(log(tail) / log(1.0 - lam)))


class StrategyMachine:
    """Public-signal trigger strategy for one player.

    The machine is a pure function of the public history: every player's
    machine sees the same omegas, so their phases stay synchronised and the
    deviating player punishes itself alongside everyone else.  Detection
    compares omega to its cooperative value in relative terms and is active
    only while cooperating (the endgame is self-enforcing).
    """

    def __init__(self, player: int, plan: Plan, coop_action: float,
                 ne_action: float, p_max: float, expected_omega: float,
                 detection_tol: float = 1e-9):
        self.player = player
        self.plan = plan
        self.coop_action = coop_action
        self.ne_action = ne_action
        self.p_max = p_max
        self.expected_omega = expected_omega
        self.detection_tol = detection_tol
        self._punish_from: int | None = None

    def phase_at(self, t: int) -> Phase:
        if self._punish_from is not None and t >= self._punish_from:
            return Phase.PUNISH
        if isinstance(self.plan, FrgPlan) and t > self.plan.t_total - self.plan.t0:
            return Phase.ENDGAME
        return Phase.COOPERATE

    def act(self, t: int, own_gain2: float) -> float:
        if isinstance(self.plan, FrgPlan) and t > self.plan.t_total:
            raise ValueError(f"stage {t} beyond the {self.plan.t_total}-stage horizon")
        phase = self.phase_at(t)
        if phase is Phase.PUNISH:
            if isinstance(self.plan, FrgPlan):
                return self.p_max
            return self.ne_action / own_gain2
        if phase is Phase.ENDGAME:
            return self.ne_action / own_gain2
        return self.coop_action / own_gain2

    def observe(self, t: int, omega: float) -> bool:
        """Digest the stage-t public signal; True when a deviation is detected."""
        if self.phase_at(t) is not Phase.COOPERATE:
            return False
        if abs(omega - self.expected_omega) > self.detection_tol * self.expected_omega:
            self._punish_from = t + 1
            return True
        return False


def detect_deviation(machine: StrategyMachine, t: int, omega: float) -> bool:
    return machine.observe(t, omega)


def make_machines(cfg: NetworkConfig, model: EfficiencyModel, plan: Plan,
                  beta_star: float, gamma_tilde: float,
                  detection_tol: float = 1e-9) -> list[StrategyMachine]:
    """Build one synchronised machine per player.

    The cooperative public-signal value is computed from the profile itself
    (sigma2 plus the sum of cooperative actions), not from any closed form.
    Raises SaturatedRegimeError if either prescribed action can exceed a
    player's cap somewhere inside the gain bounds.
    """
    a_ne = ne_action(cfg, beta_star)
    a_op = op_action(cfg, gamma_tilde)
    expected_omega = cfg.sigma2 + cfg.k * a_op
    for i in range(cfg.k):
        need = max(a_ne, a_op) / cfg.eta_min[i]
        if need > cfg.p_max[i]:
            raise SaturatedRegimeError(
                f"plan needs up to {need} W from player {i + 1}, cap {cfg.p_max[i]} W"
            )
    return [
        StrategyMachine(i, plan, a_op, a_ne, cfg.p_max[i], expected_omega,
                        detection_tol)
        for i in range(cfg.k)
    ]


def deviation_upper_bound(model: EfficiencyModel, cfg: NetworkConfig,
                          ch: ChannelState, player: int, beta_star: float) -> float:
    """Interference-free ceiling on any one-stage payoff of this player."""
    return (cfg.rates[player] * cfg.n * ch.gains2[player]
            * model.value(beta_star) / (cfg.sigma2 * beta_star))


def minmax_utility(model: EfficiencyModel, cfg: NetworkConfig, ch: ChannelState,
                   player: int, beta_star: float) -> float:
    """Best payoff attainable while everyone else transmits at full power."""
    interference = sum(
        cfg.p_max[j] * ch.gains2[j] for j in range(cfg.k) if j != player
    ) + cfg.sigma2
    return (cfg.rates[player] * cfg.n * ch.gains2[player]
            * model.value(beta_star) / (beta_star * interference))


def best_deviation(model: EfficiencyModel, cfg: NetworkConfig, ch: ChannelState,
                   others, player: int, beta_star: float) -> BestDeviation:
    """One-stage optimum against fixed other-player powers.

    Targets SINR beta_star; when that needs more than the cap, returns the
    cap and its (lower) utility, flagged saturated.  ``others`` is a full
    power vector whose entry for ``player`` is ignored.
    """
    p_other = np.asarray(getattr(others, "p", others), dtype=float)
    g2 = np.asarray(ch.gains2)
    interference = float((p_other * g2).sum() - p_other[player] * g2[player]
                         + cfg.sigma2)
    p_star = beta_star * interference / (cfg.n * g2[player])
    if p_star > cfg.p_max[player]:
        cap = cfg.p_max[player]
        x = cfg.n * cap * g2[player] / interference
        return BestDeviation(cap, cfg.rates[player] * model.value(x) / cap, True)
    return BestDeviation(
        p_star, cfg.rates[player] * model.value(beta_star) / p_star, False)


def averaged_utility_frg(trace: list[StageRecord], player: int) -> float:
    """Arithmetic mean of the player's stage utilities over the trace."""
    if not trace:
        raise ValueError("empty trace")
    return float(np.mean([r.utilities[player] for r in trace]))


def averaged_utility_drg(trace: list[StageRecord], player: int, lam: float,
                         u_max: float | None = None) -> DiscountedAverage:
    """Expected-stopping average sum_t lam*(1-lam)^(t-1) u_i(t) over the trace.

    The reported tail bound is (1-lam)^T times ``u_max`` (the max observed
    stage utility when not given), bounding the mass truncated at T stages.
    """
    if not trace:
        raise ValueError("empty trace")
    if not 0.0 < lam < 1.0:
        raise ValueError("lam must lie in (0, 1)")
    u = np.array([r.utilities[player] for r in trace])
    weights = lam * (1.0 - lam) ** np.arange(len(u))
    cap = float(u.max()) if u_max is None else u_max
    return DiscountedAverage(float(weights @ u), (1.0 - lam) ** len(u) * cap)


def history_at(trace: list[StageRecord], player: int, upto: int) -> GameHistory:
    """Public history available to a player entering stage upto+1."""
    return GameHistory(
        omegas=tuple(r.omega for r in trace[:upto]),
        own_powers=tuple(r.powers[player] for r in trace[:upto]),
    )


def _resolve_override(scenario: DeviationScenario, t: int, powers: np.ndarray,
                      model, cfg, g2: np.ndarray, beta_star: float | None) -> float | None:
    is_stage = t == scenario.stage
    if not is_stage and not (scenario.best_response_after and t > scenario.stage):
        return None
    request = scenario.power if is_stage else "best_response"
    if request == "max":
        return cfg.p_max[scenario.player]
    if request == "best_response":
        if beta_star is None:
            raise ValueError("best_response scripts need beta_star")
        ch = ChannelState(tuple(g2))
        return best_deviation(model, cfg, ch, powers, scenario.player, beta_star).power
    value = float(request)
    if not 0.0 <= value <= cfg.p_max[scenario.player]:
        raise ValueError(f"scripted power {value} outside [0, {cfg.p_max[scenario.player]}]")
    return value


def run_game(model: EfficiencyModel, cfg: NetworkConfig,
             channels: list[ChannelState], machines: list[StrategyMachine],
             scenario: DeviationScenario | None = None,
             beta_star: float | None = None) -> list[StageRecord]:
    """Step the stage game under the machines' plans, one record per stage.

    Machines see only their own current gain when acting and only the public
    signal when updating, so the trace respects the game's information
    structure by construction.
    """
    if len(machines) != cfg.k:
        raise ValueError("one machine per player required")
    plans = {(type(m.plan), m.plan) for m in machines}
    if len(plans) != 1:
        raise ValueError("machines must share a single plan")
    if scenario is not None:
        if not 0 <= scenario.player < cfg.k:
            raise ValueError(f"scenario player {scenario.player} out of range")
        if not 1 <= scenario.stage <= len(channels):
            raise ValueError(f"scenario stage {scenario.stage} outside the horizon")

    rates = np.asarray(cfg.rates)
    records: list[StageRecord] = []
    for t, state in enumerate(channels, start=1):
        g2 = np.asarray(state.gains2)
        phases = tuple(m.phase_at(t).value for m in machines)
        powers = np.array([m.act(t, g2[i]) for i, m in enumerate(machines)])
        if scenario is not None:
            forced = _resolve_override(scenario, t, powers, model, cfg, g2, beta_star)
            if forced is not None:
                powers[scenario.player] = forced
        a = powers * g2
        interference = a.sum() - a + cfg.sigma2
        sinrs = cfg.n * a / interference
        eff = model.value(sinrs)
        with np.errstate(divide="ignore", invalid="ignore"):
            utils = np.where(powers > 0.0, rates * eff / powers, 0.0)
        omega = float(cfg.sigma2 + a.sum())
        detected = [m.observe(t, omega) for m in machines]
        records.append(StageRecord(
            t=t, gains2=tuple(map(float, g2)), powers=tuple(map(float, powers)),
            sinrs=tuple(map(float, sinrs)), utilities=tuple(map(float, utils)),
            omega=omega, phases=phases, deviation_detected=any(detected)))
    return records


def trace_to_csv(path, trace: list[StageRecord]) -> None:
    """One row per (stage, player): t,player,gain2,power,sinr,utility,omega,phase,deviated."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "player", "gain2", "power", "sinr", "utility",
                         "omega", "phase", "deviated"])
        for r in trace:
            for i in range(len(r.powers)):
                writer.writerow([
                    r.t, i + 1, repr(r.gains2[i]), repr(r.powers[i]),
                    repr(r.sinrs[i]), repr(r.utilities[i]), repr(r.omega),
                    r.phases[i], int(r.deviation_detected),
                ])
