"""Finite-horizon alternating-offers bargaining on a share grid.

Two agents split a unit pie over at most ``rounds`` rounds.  The first mover
("P") proposes in odd rounds, the second mover ("R") in even rounds.  A pure
strategy fixes, for every round, a single grid share: the proposer's entry for
a round is the share it offers to that round's responder, the responder's
entry is its acceptance threshold.  An offer is accepted exactly when it is
greater than or equal to the threshold (weak inequality).  Agreement in round
``k`` on responder share ``y`` pays the responder ``delta**(k-1) * y`` and the
proposer ``delta**(k-1) * (1-y)``; round 1 is undiscounted.  If no round ends
in agreement both payoffs are zero.

Shares live on the uniform grid {0, 1/D, ..., 1} and are stored as integer
numerators, so strategy identity and grid membership are exact; floats only
appear in payoffs.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Literal

import numpy as np

Owner = Literal["P", "R"]

#: Default tolerance for payoff comparisons (ties, best responses, equilibrium
#: checks).  Strategy and grid comparisons are always exact integer compares.
PAYOFF_TOL = 1e-9


@dataclass(frozen=True)
class GameConfig:
    """Parameters of the bargaining game.

    rounds: number of alternating-offer rounds (>= 1).
    grid:   grid denominator D; shares are multiples of 1/D.
    delta:  per-round discount factor in (0, 1].
    """

    rounds: int
    grid: int
    delta: float

    def __post_init__(self) -> None:
        if not isinstance(self.rounds, int) or self.rounds < 1:
            raise ValueError(f"rounds must be a positive integer, got {self.rounds!r}")
        if not isinstance(self.grid, int) or self.grid < 1:
            raise ValueError(f"grid must be a positive integer, got {self.grid!r}")
        if not (0.0 < float(self.delta) <= 1.0):
            raise ValueError(f"delta must lie in (0, 1], got {self.delta!r}")

    @property
    def strategy_count(self) -> int:
        """Number of pure strategies per agent: (D+1) ** rounds."""
        return (self.grid + 1) ** self.rounds

    @property
    def grid_values(self) -> np.ndarray:
        """The D+1 share values as floats."""
        return np.arange(self.grid + 1) / self.grid


@dataclass(frozen=True)
class Strategy:
    """A pure strategy: one grid share per round, stored as integer numerators.

    ``entries[k]`` is the numerator of the round-(k+1) share over denominator
    ``denom``; it is an offer in rounds this agent proposes and an acceptance
    threshold in rounds it responds.
    """

    entries: tuple[int, ...]
    denom: int

    def __post_init__(self) -> None:
        if not isinstance(self.denom, int) or self.denom < 1:
            raise ValueError(f"denom must be a positive integer, got {self.denom!r}")
        if len(self.entries) == 0:
            raise ValueError("a strategy needs at least one round entry")
        for e in self.entries:
            if not isinstance(e, (int, np.integer)):
                raise TypeError(f"grid entries must be integers, got {e!r}")
            if not 0 <= int(e) <= self.denom:
                raise ValueError(
                    f"entry {e} outside grid range [0, {self.denom}]"
                )
        # normalize numpy integers so hashing/equality never depends on dtype
        object.__setattr__(self, "entries", tuple(int(e) for e in self.entries))

    @classmethod
    def from_values(
        cls,
        values: Iterable[float],
        denom: int,
        snap: str = "exact",
        tol: float = 1e-9,
    ) -> "Strategy":
        """Build a strategy from share values in [0, 1].

        ``snap`` controls off-grid values: "exact" rejects them, "floor" /
        "ceil" round toward the named side, "nearest" rounds half away from
        zero.  Values outside [0, 1] are always rejected.
        """
        entries = []
        for v in values:
            v = float(v)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"share {v} outside [0, 1]")
            scaled = v * denom
            if snap == "exact":
                e = round(scaled)
                if abs(scaled - e) > tol:
                    lo, hi = math.floor(scaled), math.ceil(scaled)
                    raise ValueError(
                        f"share {v} is not a multiple of 1/{denom}; nearest "
                        f"grid values are {lo}/{denom} and {hi}/{denom}"
                    )
            elif snap == "floor":
                e = math.floor(scaled + tol)
            elif snap == "ceil":
                e = math.ceil(scaled - tol)
            elif snap == "nearest":
                e = math.floor(scaled + 0.5)
            else:
                raise ValueError(f"unknown snap mode {snap!r}")
            entries.append(int(min(max(e, 0), denom)))
        return cls(tuple(entries), denom)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(e / self.denom for e in self.entries)

    @property
    def fractions(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(e, self.denom) for e in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class Outcome:
    """Result of one play of the game.

    agreement_round is None when every round ended in rejection, in which
    case both payoffs are zero and responder_share is None.  offer_index is
    the grid numerator of the accepted share (None for off-grid play).
    """

    agreement_round: int | None
    responder_share: float | None
    payoff_P: float
    payoff_R: float
    offer_index: int | None = None


def _check_strategy(cfg: GameConfig, s: Strategy, name: str) -> None:
    if s.denom != cfg.grid:
        raise ValueError(
            f"{name} uses grid denominator {s.denom}, game uses {cfg.grid}"
        )
    if len(s.entries) != cfg.rounds:
        raise ValueError(
            f"{name} has {len(s.entries)} round entries, game has {cfg.rounds} rounds"
        )


def play(cfg: GameConfig, proposer: Strategy, responder: Strategy) -> Outcome:
    """Play pure strategies against each other and return the outcome.

    ``proposer`` moves first (odd rounds), ``responder`` moves second (even
    rounds).  This is the direct round-by-round reference implementation; the
    vectorized tables in :func:`payoff_matrices` are cross-checked against it.
    """
    _check_strategy(cfg, proposer, "proposer strategy")
    _check_strategy(cfg, responder, "responder strategy")
    for k in range(1, cfg.rounds + 1):
        p_moves_first = k % 2 == 1
        offer = proposer.entries[k - 1] if p_moves_first else responder.entries[k - 1]
        threshold = responder.entries[k - 1] if p_moves_first else proposer.entries[k - 1]
        if offer >= threshold:
            y = offer / cfg.grid
            disc = cfg.delta ** (k - 1)
            resp_pay = disc * y
            prop_pay = disc * (1.0 - y)
            if p_moves_first:
                return Outcome(k, y, prop_pay, resp_pay, offer)
            return Outcome(k, y, resp_pay, prop_pay, offer)
    return Outcome(None, None, 0.0, 0.0, None)


def continuous_play(
    rounds: int,
    delta: float,
    proposer_values: tuple[float, ...],
    responder_values: tuple[float, ...],
) -> Outcome:
    """Play real-valued (not grid-restricted) strategies.

    Same rules as :func:`play` but entries are arbitrary shares in [0, 1].
    Used to evaluate grid play against unrestricted strategies, e.g. for
    regret against off-grid opponents.
    """
    if len(proposer_values) != rounds or len(responder_values) != rounds:
        raise ValueError("strategy length must equal the number of rounds")
    for k in range(1, rounds + 1):
        p_moves_first = k % 2 == 1
        offer = proposer_values[k - 1] if p_moves_first else responder_values[k - 1]
        threshold = responder_values[k - 1] if p_moves_first else proposer_values[k - 1]
        if not (0.0 <= offer <= 1.0) or not (0.0 <= threshold <= 1.0):
            raise ValueError("shares must lie in [0, 1]")
        if offer >= threshold:
            disc = delta ** (k - 1)
            resp_pay = disc * offer
            prop_pay = disc * (1.0 - offer)
            if p_moves_first:
                return Outcome(k, offer, prop_pay, resp_pay, None)
            return Outcome(k, offer, resp_pay, prop_pay, None)
    return Outcome(None, None, 0.0, 0.0, None)


# ---------------------------------------------------------------------------
# strategy enumeration
# ---------------------------------------------------------------------------


def strategy_index(cfg: GameConfig, s: Strategy) -> int:
    """Flat index of a strategy; flat order == lexicographic entry order."""
    _check_strategy(cfg, s, "strategy")
    idx = 0
    for e in s.entries:
        idx = idx * (cfg.grid + 1) + e
    return idx


def strategy_from_index(cfg: GameConfig, index: int) -> Strategy:
    """Inverse of :func:`strategy_index`."""
    if not 0 <= index < cfg.strategy_count:
        raise ValueError(f"strategy index {index} out of range")
    base = cfg.grid + 1
    entries = []
    for _ in range(cfg.rounds):
        entries.append(index % base)
        index //= base
    return Strategy(tuple(reversed(entries)), cfg.grid)


@functools.lru_cache(maxsize=64)
def _entries_matrix(cfg: GameConfig) -> np.ndarray:
    """(strategy_count, rounds) integer matrix of all pure strategies."""
    base = cfg.grid + 1
    n = cfg.strategy_count
    out = np.empty((n, cfg.rounds), dtype=np.int64)
    idx = np.arange(n)
    for k in range(cfg.rounds - 1, -1, -1):
        out[:, k] = idx % base
        idx //= base
    return out


def all_strategies(cfg: GameConfig) -> list[Strategy]:
    """All pure strategies in flat-index (lexicographic) order."""
    em = _entries_matrix(cfg)
    return [Strategy(tuple(int(e) for e in row), cfg.grid) for row in em]


# ---------------------------------------------------------------------------
# vectorized outcome tables
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=64)
def _outcome_tables(cfg: GameConfig) -> tuple[np.ndarray, np.ndarray]:
    """Agreement round (0 = never) and accepted-offer numerator per profile.

    Entry [i, j] covers first mover strategy i against second mover strategy
    j, indices per :func:`strategy_index`.
    """
    em = _entries_matrix(cfg)
    n = cfg.strategy_count
    agree = np.zeros((n, n), dtype=np.int32)
    offer_idx = np.zeros((n, n), dtype=np.int64)
    alive = np.ones((n, n), dtype=bool)
    for k in range(1, cfg.rounds + 1):
        if k % 2 == 1:
            offers = em[:, k - 1][:, None]  # first mover proposes
            thresholds = em[:, k - 1][None, :]
        else:
            offers = em[:, k - 1][None, :]  # second mover proposes
            thresholds = em[:, k - 1][:, None]
        deal = alive & (offers >= thresholds)
        agree[deal] = k
        offer_idx[deal] = np.broadcast_to(offers, (n, n))[deal]
        alive &= ~deal
    return agree, offer_idx


@functools.lru_cache(maxsize=64)
def payoff_matrices(cfg: GameConfig) -> tuple[np.ndarray, np.ndarray]:
    """Full payoff tables (U_P, U_R), each indexed [first mover, second mover]."""
    agree, offer_idx = _outcome_tables(cfg)
    y = offer_idx / cfg.grid
    disc = np.where(agree > 0, cfg.delta ** np.maximum(agree - 1, 0), 0.0)
    resp_pay = disc * y
    prop_pay = disc * (1.0 - y)
    odd = agree % 2 == 1  # P proposed, R responded
    U_P = np.where(odd, prop_pay, resp_pay)
    U_R = np.where(odd, resp_pay, prop_pay)
    U_P.setflags(write=False)
    U_R.setflags(write=False)
    return U_P, U_R


@dataclass(frozen=True)
class FeedbackVector:
    """Counterfactual utilities of every own pure strategy vs a fixed opponent."""

    cfg: GameConfig
    owner: Owner
    values: np.ndarray

    def value_of(self, s: Strategy) -> float:
        return float(self.values[strategy_index(self.cfg, s)])

    __getitem__ = value_of

    def as_dict(self) -> dict[Strategy, float]:
        return {
            s: float(v) for s, v in zip(all_strategies(self.cfg), self.values)
        }


def _check_owner(owner: str) -> None:
    if owner not in ("P", "R"):
        raise ValueError(f"owner must be 'P' or 'R', got {owner!r}")


def feedback_vector(cfg: GameConfig, owner: Owner, opponent: Strategy) -> FeedbackVector:
    """Utility of each of owner's pure strategies against ``opponent``."""
    _check_owner(owner)
    _check_strategy(cfg, opponent, "opponent strategy")
    U_P, U_R = payoff_matrices(cfg)
    j = strategy_index(cfg, opponent)
    if owner == "P":
        vals = U_P[:, j].copy()
    else:
        vals = U_R[j, :].copy()
    vals.setflags(write=False)
    return FeedbackVector(cfg, owner, vals)


# ---------------------------------------------------------------------------
# best responses and pure equilibria
# ---------------------------------------------------------------------------


def best_responses(
    cfg: GameConfig, owner: Owner, opponent: Strategy, tol: float = PAYOFF_TOL
) -> list[Strategy]:
    """All own strategies within ``tol`` of the maximal payoff vs ``opponent``."""
    fb = feedback_vector(cfg, owner, opponent)
    best = fb.values.max()
    idxs = np.flatnonzero(fb.values >= best - tol)
    return [strategy_from_index(cfg, int(i)) for i in idxs]


def is_pure_ne(
    cfg: GameConfig,
    proposer: Strategy,
    responder: Strategy,
    tol: float = PAYOFF_TOL,
) -> bool:
    """True when neither agent can gain more than ``tol`` by a unilateral move."""
    _check_strategy(cfg, proposer, "proposer strategy")
    _check_strategy(cfg, responder, "responder strategy")
    U_P, U_R = payoff_matrices(cfg)
    i = strategy_index(cfg, proposer)
    j = strategy_index(cfg, responder)
    return bool(
        U_P[i, j] >= U_P[:, j].max() - tol and U_R[i, j] >= U_R[i, :].max() - tol
    )


def equilibrium_value(
    cfg: GameConfig,
    proposer: Strategy,
    responder: Strategy,
    tol: float = PAYOFF_TOL,
) -> float | None:
    """Accepted share (the agreement round's responder share) of a pure equilibrium.

    Raises ValueError when the profile is not a pure equilibrium.  Returns
    None for equilibria in which no round reaches agreement.
    """
    if not is_pure_ne(cfg, proposer, responder, tol):
        raise ValueError("profile is not a pure equilibrium")
    return play(cfg, proposer, responder).responder_share
