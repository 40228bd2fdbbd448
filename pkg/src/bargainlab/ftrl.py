"""Follow-the-regularized-leader over the pure-strategy grid.

Both update rules maximize cumulative counterfactual utility minus a
regularizer that penalizes distance from a fixed pure "anchor" strategy,
with learning rate ``rate`` scaling how far play may drift from the anchor:

* ``reg=1``: penalty is the L1 distance divided by the rate.  On the simplex
  with a pure anchor the penalized objective is linear, so maximizers are
  pure: every non-anchor pure strategy is handicapped by ``2 / rate``.  Ties
  go to the anchor when it is among the maximizers (its handicap is zero),
  otherwise to the lexicographically largest tied strategy (largest flat
  index).  The resulting play is always a single pure strategy.
* ``reg=2``: penalty is half the squared euclidean distance divided by the
  rate; the maximizer is the euclidean projection of
  ``anchor + rate * cumulative_utility`` onto the simplex, a mixed strategy.

Feedback is full-information: after each round the learner observes the
utility every one of its pure strategies would have earned against the
opponent's actual play, and accumulates that vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from bargainlab.game import (
    PAYOFF_TOL,
    GameConfig,
    Strategy,
    payoff_matrices,
    strategy_from_index,
    strategy_index,
)


class HorizonExceededError(RuntimeError):
    """Raised when a learner is stepped beyond its configured horizon."""


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of a real vector onto the probability simplex.

    Sort-based O(d log d) construction: with u the coordinates sorted
    descending and css the shifted cumulative sums (cumsum(u) - 1), the
    active-set size is the largest j with u_j > css_j / j, and every
    coordinate is pulled down by the corresponding multiplier and clipped
    at zero.
    """
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size == 0:
        raise ValueError("cannot project an empty vector")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    j = np.arange(1, v.size + 1)
    rho = np.nonzero(u * j > css)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


@dataclass(frozen=True)
class MixedStrategy:
    """A distribution over the pure-strategy grid of one agent."""

    cfg: GameConfig
    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (self.cfg.strategy_count,):
            raise ValueError(
                f"weights must have length {self.cfg.strategy_count}, got {w.shape}"
            )
        if (w < -1e-12).any():
            raise ValueError("mixed strategy weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("mixed strategy weights must sum to 1")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def support(self, tol: float = 1e-12) -> list[tuple[Strategy, float]]:
        return [
            (strategy_from_index(self.cfg, int(i)), float(self.weights[i]))
            for i in np.flatnonzero(self.weights > tol)
        ]


Play = Union[Strategy, MixedStrategy]


@dataclass(frozen=True)
class LearnerConfig:
    """Configuration of one learner.

    owner:   "P" (moves first in odd rounds) or "R".
    reg:     1 for the pure-play rule, 2 for the euclidean rule.
    rate:    learning rate (> 0); larger values weaken the anchor pull.
    anchor:  pure strategy the regularizer is centered on.
    initial: pure strategy played in the first round.
    horizon: number of rounds the learner may be stepped.
    """

    owner: str
    reg: int
    rate: float
    anchor: Strategy
    initial: Strategy
    horizon: int

    def __post_init__(self) -> None:
        if self.owner not in ("P", "R"):
            raise ValueError(f"owner must be 'P' or 'R', got {self.owner!r}")
        if self.reg not in (1, 2):
            raise ValueError(f"reg must be 1 or 2, got {self.reg!r}")
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate!r}")
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ValueError(f"horizon must be a positive integer, got {self.horizon!r}")

    def rate_warning_for(self, game: GameConfig) -> str | None:
        """Non-None when the pure-play rule's tie-breaking guarantees are off.

        With ``reg=1`` the anchor handicap ``2 / rate`` must stay below the
        smallest utility gap the grid can produce (1 / D), i.e. rate > 2D;
        otherwise the anchor can override genuine utility differences.
        """
        if self.reg == 1 and self.rate <= 2 * game.grid:
            return (
                f"rate {self.rate} <= 2 * grid {game.grid}: anchor handicap "
                f"{2 / self.rate:.4g} is not below the grid's utility "
                f"resolution; pure-play convergence guarantees need rate > "
                f"{2 * game.grid}"
            )
        return None


@dataclass
class LearnerState:
    """Mutable run state of one learner."""

    game: GameConfig
    config: LearnerConfig
    cumulative: np.ndarray
    current: Play
    steps: int = 0
    rate_warning: str | None = field(default=None)


def make_learner(game: GameConfig, config: LearnerConfig) -> LearnerState:
    """Validate config against the game and build the initial state."""
    for name, s in (("anchor", config.anchor), ("initial", config.initial)):
        if s.denom != game.grid:
            raise ValueError(
                f"{name} grid denominator {s.denom} != game grid {game.grid}"
            )
        if len(s.entries) != game.rounds:
            raise ValueError(
                f"{name} has {len(s.entries)} entries, game has {game.rounds} rounds"
            )
    return LearnerState(
        game=game,
        config=config,
        cumulative=np.zeros(game.strategy_count),
        current=config.initial,
        steps=0,
        rate_warning=config.rate_warning_for(game),
    )


def _feedback(state: LearnerState, opponent_play: Play) -> np.ndarray:
    U_P, U_R = payoff_matrices(state.game)
    if isinstance(opponent_play, Strategy):
        j = strategy_index(state.game, opponent_play)
        return U_P[:, j] if state.config.owner == "P" else U_R[j, :]
    if isinstance(opponent_play, MixedStrategy):
        w = opponent_play.weights
        return U_P @ w if state.config.owner == "P" else U_R.T @ w
    raise TypeError(f"opponent play must be Strategy or MixedStrategy, got {opponent_play!r}")


def l1_objective(state: LearnerState) -> np.ndarray:
    """Cumulative utility minus the anchor handicap, per pure strategy."""
    obj = state.cumulative - 2.0 / state.config.rate
    obj[strategy_index(state.game, state.config.anchor)] += 2.0 / state.config.rate
    return obj


def l1_update(state: LearnerState, tol: float = PAYOFF_TOL) -> Strategy:
    """Pure maximizer of the handicapped cumulative utility.

    Ties within ``tol`` resolve to the largest flat index, which is the
    lexicographically largest entry tuple; the anchor's zero handicap makes
    it win genuine utility ties outright.
    """
    if state.steps < 1:
        raise RuntimeError("update rule needs at least one round of feedback")
    obj = l1_objective(state)
    ties = np.flatnonzero(obj >= obj.max() - tol)
    return strategy_from_index(state.game, int(ties[-1]))


def l2_update(state: LearnerState) -> MixedStrategy:
    """Projection of anchor + rate * cumulative utility onto the simplex."""
    if state.steps < 1:
        raise RuntimeError("update rule needs at least one round of feedback")
    v = np.zeros(state.game.strategy_count)
    v[strategy_index(state.game, state.config.anchor)] = 1.0
    v += state.config.rate * state.cumulative
    return MixedStrategy(state.game, project_to_simplex(v))


def step(state: LearnerState, opponent_play: Play) -> LearnerState:
    """Consume one round of opponent play and advance the learner.

    The strategy the learner used this round is ``state.current`` *before*
    the call; afterwards ``state.current`` holds next round's play.  Feedback
    is the full counterfactual utility vector, so it does not depend on the
    learner's own play.
    """
    if state.steps >= state.config.horizon:
        raise HorizonExceededError(
            f"learner horizon {state.config.horizon} exhausted"
        )
    state.cumulative = state.cumulative + _feedback(state, opponent_play)
    state.steps += 1
    state.current = l1_update(state) if state.config.reg == 1 else l2_update(state)
    return state
