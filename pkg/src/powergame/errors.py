"""Typed errors raised by the game solvers, builders and runners."""


class PowerGameError(Exception):
    """Base class for all library errors."""


class SolverError(PowerGameError):
    """A scalar root search failed to bracket or converge."""


class SaturatedRegimeError(PowerGameError):
    """A required transmit power exceeds the player's power cap."""


class NoNashEquilibriumError(PowerGameError):
    """The closed-form equilibrium does not exist for this load.

    Raised when the network operates outside 2 <= K < N/beta_star + 1, or
    when the leader-follower closed forms lose their positive denominator.
    """


class NoFiniteT0Error(PowerGameError):
    """No finite endgame length makes the cooperative plan self-enforcing."""


class ChannelConfigError(PowerGameError):
    """Channel bounds or mean make the truncated draw ill-defined."""
