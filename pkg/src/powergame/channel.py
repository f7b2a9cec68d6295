"""Block-fading channel processes with bounded Rayleigh power gains.

Squared gains are exponential (Rayleigh power) with a per-player mean,
truncated to [eta_min, eta_max] by rejection, never by clipping.  Draws use
the counter-based Philox generator so every (seed, player, stage) triple maps
to the same gain on every run and under any worker partitioning:

    engine draws:  Philox(key=[seed, player], counter=[0, stage, 0, 0])
    bulk draws:    Philox(key=[seed, 2**32 + substream]), sequential stream

``constant`` mode freezes the stage-1 draw for the whole game; ``per_stage``
redraws every stage.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from math import exp, log10

import numpy as np

from .errors import ChannelConfigError
from .static_game import ChannelState, NetworkConfig

MIN_ACCEPTANCE = 1e-6
_BULK_KEY_OFFSET = 2**32  # keeps bulk substreams disjoint from per-player keys


class ChannelMode(str, Enum):
    CONSTANT = "constant"
    PER_STAGE = "per_stage"


def acceptance_probability(mean: float, lo: float, hi: float) -> float:
    """Mass an Exponential(mean) puts on [lo, hi]."""
    return exp(-lo / mean) - exp(-hi / mean)


def dynamics_db(eta_min: float, eta_max: float) -> float:
    """Gain dynamics 10*log10(eta_max/eta_min) in dB."""
    if not 0.0 < eta_min <= eta_max:
        raise ValueError("need 0 < eta_min <= eta_max")
    return 10.0 * log10(eta_max / eta_min)


@dataclass(frozen=True)
class ChannelProcess:
    mode: ChannelMode
    mean_gain2: tuple[float, ...]
    eta_min: tuple[float, ...]
    eta_max: tuple[float, ...]
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "mode", ChannelMode(self.mode))
        for name in ("mean_gain2", "eta_min", "eta_max"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if not (len(self.mean_gain2) == len(self.eta_min) == len(self.eta_max)):
            raise ChannelConfigError("per-player channel fields must share a length")
        if not 0 <= self.seed < 2**64:
            raise ChannelConfigError("seed must fit in an unsigned 64-bit word")
        for mu, lo, hi in zip(self.mean_gain2, self.eta_min, self.eta_max):
            if not (mu > 0.0 and 0.0 < lo <= hi):
                raise ChannelConfigError("need mean > 0 and 0 < eta_min <= eta_max")
            if lo < hi and acceptance_probability(mu, lo, hi) < MIN_ACCEPTANCE:
                raise ChannelConfigError(
                    f"bounds [{lo}, {hi}] keep less than {MIN_ACCEPTANCE} of the "
                    f"Exponential({mu}) mass; adjust mean or bounds"
                )

    @property
    def k(self) -> int:
        return len(self.mean_gain2)

    @classmethod
    def from_config(cls, cfg: NetworkConfig, mode: ChannelMode | str,
                    mean_gain2=1.0, seed: int = 0) -> "ChannelProcess":
        mean = (float(mean_gain2),) * cfg.k if np.ndim(mean_gain2) == 0 else tuple(mean_gain2)
        return cls(mode=ChannelMode(mode), mean_gain2=mean,
                   eta_min=cfg.eta_min, eta_max=cfg.eta_max, seed=seed)


def _player_generator(process: ChannelProcess, player: int, stage: int) -> np.random.Generator:
    bg = np.random.Philox(counter=[0, stage, 0, 0], key=[process.seed, player])
    return np.random.Generator(bg)


def _draw_one(gen: np.random.Generator, mean: float, lo: float, hi: float) -> float:
    if lo == hi:
        return lo
    while True:
        v = gen.exponential(mean)
        if lo <= v <= hi:
            return float(v)


def draw(process: ChannelProcess, t: int) -> ChannelState:
    """Gains for stage t (1-based).  Constant mode replays the stage-1 draw."""
    if t < 1:
        raise ValueError("stages are 1-based")
    stage = 1 if process.mode is ChannelMode.CONSTANT else t
    gains = tuple(
        _draw_one(_player_generator(process, i, stage), mu, lo, hi)
        for i, (mu, lo, hi) in enumerate(
            zip(process.mean_gain2, process.eta_min, process.eta_max))
    )
    return ChannelState(gains)


def draw_sequence(process: ChannelProcess, stages: int) -> list[ChannelState]:
    return [draw(process, t) for t in range(1, stages + 1)]


def draw_block(process: ChannelProcess, stages: int, substream: int = 0) -> np.ndarray:
    """Vectorised (stages, k) gain matrix from one bulk substream.

    Used by the Monte Carlo experiment runners; one substream per replica
    keeps results independent of chunking and worker count.
    """
    if process.mode is ChannelMode.CONSTANT:
        row = np.asarray(draw(process, 1).gains2)
        return np.tile(row, (stages, 1))
    gen = np.random.Generator(
        np.random.Philox(key=[process.seed, _BULK_KEY_OFFSET + substream]))
    out = np.empty((stages, process.k))
    for i, (mu, lo, hi) in enumerate(
            zip(process.mean_gain2, process.eta_min, process.eta_max)):
        if lo == hi:
            out[:, i] = lo
            continue
        col = gen.exponential(mu, size=stages)
        bad = (col < lo) | (col > hi)
        while bad.any():
            col[bad] = gen.exponential(mu, size=int(bad.sum()))
            bad = (col < lo) | (col > hi)
        out[:, i] = col
    return out


def write_channel_csv(path, draws: list[ChannelState]) -> None:
    """Columns t,player,gain2 with 1-based ids; replayable via read_channel_csv."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "player", "gain2"])
        for t, state in enumerate(draws, start=1):
            for i, g in enumerate(state.gains2, start=1):
                writer.writerow([t, i, repr(float(g))])


def read_channel_csv(path) -> list[ChannelState]:
    stages: dict[int, dict[int, float]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            stages.setdefault(int(row["t"]), {})[int(row["player"])] = float(row["gain2"])
    out = []
    for t in sorted(stages):
        per = stages[t]
        out.append(ChannelState(tuple(per[i] for i in sorted(per))))
    return out
