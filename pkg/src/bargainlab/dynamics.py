"""Self-play dynamics, convergence prediction, and external regret.

Two learners (first mover "P", second mover "R") repeatedly play the grid
bargaining game, each updating with the anchor-regularized leader rule on the
full counterfactual feedback of the round.  This module provides:

* exact replay of those dynamics, both one pair at a time and vectorized over
  batches of initial conditions (identical arithmetic to the stepwise path);
* convergence detection: the smallest time from which the joint profile is
  constant through the horizon *and* is a pure equilibrium;
* a closed-form predictor for the one-round game, computed in exact rational
  arithmetic, giving the settlement value min{w_r1, w_p1, alpha_r} and the
  exact settlement time;
* sufficient-condition checks under which two-round pure self-play is
  guaranteed to settle on a pure equilibrium;
* external-regret accounting against scripted adversaries whose values are
  constrained to spaced bins, measured against both the best grid strategy
  and the best strategy from a finite continuous candidate set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import NamedTuple, Sequence, Union

import numpy as np

from bargainlab.ftrl import (
    LearnerConfig,
    MixedStrategy,
    Play,
    make_learner,
    step,
)
from bargainlab.game import (
    PAYOFF_TOL,
    GameConfig,
    Strategy,
    _entries_matrix,
    _outcome_tables,
    is_pure_ne,
    payoff_matrices,
    play as play_game,
    strategy_from_index,
    strategy_index,
)

# ---------------------------------------------------------------------------
# batched self-play
# ---------------------------------------------------------------------------


@dataclass
class BatchResult:
    """Vectorized self-play outcomes for a batch of initial-condition pairs.

    profiles[b, t] holds the flat strategy indices (P, R) played at round t+1.
    converged_at[b] is the 1-based smallest time from which the profile is
    constant through the horizon, when the final profile is a pure
    equilibrium and that constancy covers more than just the final step;
    otherwise -1.  ne_value[b] is the accepted share of that equilibrium
    (NaN when not converged or when the equilibrium reaches no agreement).
    payoff_P / payoff_R are the payoffs of the final profile regardless of
    convergence.
    """

    game: GameConfig
    profiles: np.ndarray  # (B, T, 2) int32
    converged_at: np.ndarray  # (B,) int32, -1 when not converged
    ne_value: np.ndarray  # (B,) float64, NaN when unavailable
    ne_round: np.ndarray  # (B,) int32, 0 when no agreement / not converged
    payoff_P: np.ndarray  # (B,) float64
    payoff_R: np.ndarray  # (B,) float64

    @property
    def converged(self) -> np.ndarray:
        return self.converged_at >= 0


def batch_self_play(
    game: GameConfig,
    rate: float,
    horizon: int,
    initial_P: np.ndarray,
    initial_R: np.ndarray,
    anchor_P: np.ndarray,
    anchor_R: np.ndarray,
    tie_tol: float = PAYOFF_TOL,
) -> BatchResult:
    """Run pure-play (reg=1) self-play for many initial conditions at once.

    All four strategy arguments are arrays of flat strategy indices with a
    common length B.  The update arithmetic is performed in the same order as
    the stepwise learner, so results are identical to running
    :func:`self_play` B times with reg=1 on both sides.
    """
    iP = np.asarray(initial_P, dtype=np.int64)
    iR = np.asarray(initial_R, dtype=np.int64)
    aP = np.asarray(anchor_P, dtype=np.int64)
    aR = np.asarray(anchor_R, dtype=np.int64)
    if not (iP.shape == iR.shape == aP.shape == aR.shape) or iP.ndim != 1:
        raise ValueError("index arrays must share one common length")
    n = game.strategy_count
    for arr in (iP, iR, aP, aR):
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ValueError("strategy index out of range")
    if not isinstance(horizon, int) or horizon < 1:
        raise ValueError("horizon must be a positive integer")
    if not rate > 0:
        raise ValueError("rate must be positive")

    B = iP.shape[0]
    T = horizon
    U_P, U_R = payoff_matrices(game)
    U_P_by_resp = np.ascontiguousarray(U_P.T)  # row j = feedback of P vs R=j
    rows = np.arange(B)
    idx = np.arange(n)
    pen = 2.0 / rate

    cum_P = np.zeros((B, n))
    cum_R = np.zeros((B, n))
    cur_P = iP.copy()
    cur_R = iR.copy()
    profiles = np.empty((B, T, 2), dtype=np.int32)

    for t in range(T):
        profiles[:, t, 0] = cur_P
        profiles[:, t, 1] = cur_R
        cum_P += U_P_by_resp[cur_R]
        cum_R += U_R[cur_P]
        if t == T - 1:
            break
        obj_P = cum_P - pen
        obj_P[rows, aP] += pen
        ties = obj_P >= obj_P.max(axis=1, keepdims=True) - tie_tol
        cur_P = np.where(ties, idx, -1).max(axis=1)
        obj_R = cum_R - pen
        obj_R[rows, aR] += pen
        ties = obj_R >= obj_R.max(axis=1, keepdims=True) - tie_tol
        cur_R = np.where(ties, idx, -1).max(axis=1)

    return _detect_batch(game, profiles, tie_tol)


def _detect_batch(
    game: GameConfig, profiles: np.ndarray, tol: float = PAYOFF_TOL
) -> BatchResult:
    """Convergence detection and final-profile bookkeeping for a batch."""
    B, T, _ = profiles.shape
    U_P, U_R = payoff_matrices(game)
    agree, offer_idx = _outcome_tables(game)
    last = profiles[:, -1, :]
    i, j = last[:, 0].astype(np.int64), last[:, 1].astype(np.int64)

    changed = (profiles != last[:, None, :]).any(axis=2)  # (B, T)
    rev_first = np.argmax(changed[:, ::-1], axis=1)
    any_change = changed.any(axis=1)
    t_prime = np.where(any_change, T - rev_first + 1, 1).astype(np.int32)

    best_P_given_R = U_P.max(axis=0)  # over P's strategies, per R index
    best_R_given_P = U_R.max(axis=1)  # over R's strategies, per P index
    pays_P = U_P[i, j]
    pays_R = U_R[i, j]
    is_ne = (pays_P >= best_P_given_R[j] - tol) & (pays_R >= best_R_given_P[i] - tol)
    settled = is_ne & ((t_prime < T) | (T == 1))

    converged_at = np.where(settled, t_prime, -1).astype(np.int32)
    rounds = agree[i, j]
    value = np.where(rounds > 0, offer_idx[i, j] / game.grid, np.nan)
    value = np.where(settled, value, np.nan)
    ne_round = np.where(settled, rounds, 0).astype(np.int32)
    return BatchResult(
        game=game,
        profiles=profiles,
        converged_at=converged_at,
        ne_value=value,
        ne_round=ne_round,
        payoff_P=pays_P,
        payoff_R=pays_R,
    )


# ---------------------------------------------------------------------------
# single-pair self-play
# ---------------------------------------------------------------------------


@dataclass
class TrajectoryRecord:
    """One self-play run: the joint plays of both agents plus convergence data.

    profiles[t] is the joint play of round t+1 (pure strategies under reg=1,
    mixed under reg=2).  converged_at is the smallest 1-based time from which
    the joint profile is constant through the horizon and is a pure
    equilibrium — a window covering only the final step does not count; None
    when that never happens.  ne_value is the accepted share of that
    equilibrium (None when not converged or when the equilibrium reaches no
    agreement).  payoff_P / payoff_R are the payoffs of the final profile.
    """

    game: GameConfig
    proposer_config: LearnerConfig
    responder_config: LearnerConfig
    profiles: list[tuple[Play, Play]]
    converged_at: int | None
    ne_profile: tuple[Strategy, Strategy] | None
    ne_value: float | None
    ne_round: int | None
    payoff_P: float
    payoff_R: float

    @property
    def horizon(self) -> int:
        return len(self.profiles)

    @property
    def payoffs(self) -> tuple[float, float]:
        return self.payoff_P, self.payoff_R


def _as_pure(play_: Play, tol: float = PAYOFF_TOL) -> Strategy | None:
    """The pure strategy a play amounts to, or None for a genuine mixture."""
    if isinstance(play_, Strategy):
        return play_
    w = play_.weights
    k = int(np.argmax(w))
    if w[k] >= 1.0 - tol:
        return strategy_from_index(play_.cfg, k)
    return None


def detect_convergence(
    game: GameConfig,
    record: Union["TrajectoryRecord", Sequence[tuple[Play, Play]]],
    tol: float = PAYOFF_TOL,
) -> tuple[int, tuple[Strategy, Strategy], float | None] | None:
    """Smallest 1-based t from which play is a constant pure equilibrium.

    ``record`` may be a TrajectoryRecord or a raw sequence of joint plays.
    The joint profile must be (numerically) pure and identical from t through
    the end of the run, that profile must be a pure equilibrium of the stage
    game, and the constant window must cover more than just the final step
    (a run that merely ends on an equilibrium it just arrived at does not
    count).  Returns (t, profile, accepted share) — the share is None for an
    equilibrium reaching no agreement — or None.
    """
    profiles = record.profiles if isinstance(record, TrajectoryRecord) else record
    if len(profiles) == 0:
        return None
    pure = [(_as_pure(p, tol), _as_pure(r, tol)) for p, r in profiles]
    last = pure[-1]
    if last[0] is None or last[1] is None:
        return None
    if not is_pure_ne(game, last[0], last[1], tol):
        return None
    t = len(pure)
    while t >= 2 and pure[t - 2] == last:
        t -= 1
    if t == len(pure) and len(pure) >= 2:
        return None
    value = play_game(game, last[0], last[1]).responder_share
    return t, last, value


def self_play(
    game: GameConfig,
    proposer_config: LearnerConfig,
    responder_config: LearnerConfig,
) -> TrajectoryRecord:
    """Run two learners against each other for their common horizon.

    Each step both agents observe the opponent's play of that step and update
    simultaneously.  Both configs must agree on the horizon.  Pure-play pairs
    (reg=1 on both sides with one shared rate) go through the vectorized
    batch engine; any other combination runs the stepwise learners directly.
    Either way the recorded profiles are what each learner actually played.
    """
    if proposer_config.owner != "P" or responder_config.owner != "R":
        raise ValueError("configs must be for owners 'P' and 'R' respectively")
    if proposer_config.horizon != responder_config.horizon:
        raise ValueError("both learners must share one horizon")
    T = proposer_config.horizon

    if (
        proposer_config.reg == 1
        and responder_config.reg == 1
        and proposer_config.rate == responder_config.rate
    ):
        batch = batch_self_play(
            game,
            proposer_config.rate,
            T,
            np.array([strategy_index(game, proposer_config.initial)]),
            np.array([strategy_index(game, responder_config.initial)]),
            np.array([strategy_index(game, proposer_config.anchor)]),
            np.array([strategy_index(game, responder_config.anchor)]),
        )
        profiles = [
            (
                strategy_from_index(game, int(batch.profiles[0, t, 0])),
                strategy_from_index(game, int(batch.profiles[0, t, 1])),
            )
            for t in range(T)
        ]
    else:
        profiles = _self_play_stepwise(game, proposer_config, responder_config)

    det = detect_convergence(game, profiles)
    if det is None:
        converged_at, ne_profile, ne_value, ne_round = None, None, None, None
    else:
        converged_at, ne_profile, ne_value = det
        ne_round = play_game(game, ne_profile[0], ne_profile[1]).agreement_round

    final_p, final_r = profiles[-1]
    pay_P, pay_R = _joint_payoffs(game, final_p, final_r)
    return TrajectoryRecord(
        game=game,
        proposer_config=proposer_config,
        responder_config=responder_config,
        profiles=profiles,
        converged_at=converged_at,
        ne_profile=ne_profile,
        ne_value=ne_value,
        ne_round=ne_round,
        payoff_P=pay_P,
        payoff_R=pay_R,
    )


def _self_play_stepwise(
    game: GameConfig, pc: LearnerConfig, rc: LearnerConfig
) -> list[tuple[Play, Play]]:
    sp = make_learner(game, pc)
    sr = make_learner(game, rc)
    profiles: list[tuple[Play, Play]] = []
    for _ in range(pc.horizon):
        cp, cr = sp.current, sr.current
        profiles.append((cp, cr))
        step(sp, cr)
        step(sr, cp)
    return profiles


def _joint_payoffs(game: GameConfig, p: Play, r: Play) -> tuple[float, float]:
    U_P, U_R = payoff_matrices(game)
    wp = _weights_of(game, p)
    wr = _weights_of(game, r)
    return float(wp @ U_P @ wr), float(wp @ U_R @ wr)


def _weights_of(game: GameConfig, play_: Play) -> np.ndarray:
    if isinstance(play_, Strategy):
        w = np.zeros(game.strategy_count)
        w[strategy_index(game, play_)] = 1.0
        return w
    return play_.weights


# ---------------------------------------------------------------------------
# closed-form settlement prediction for the one-round game
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class G1Classification:
    """Predicted fate of one-round pure self-play, in exact rationals.

    p_min is the settlement share; p_max the competing share the first mover
    may dwell on.  case is "C1" (settlement without a dwell phase, no later
    than t=3) or "C2" (the first mover dwells on p_max and switches at
    predicted_t_prime).  t_prime_bound is the exact real switching threshold
    in case C2 (None in C1); predicted_t_prime = floor(t_prime_bound) + 1
    there.
    """

    p_min: Fraction
    p_max: Fraction
    case: str
    predicted_t_prime: int
    predicted_value: Fraction
    t_prime_bound: Fraction | None = None


def _grid_fraction(game: GameConfig, name: str, v) -> Fraction:
    """Snap a share in (0, 1) to its exact grid fraction."""
    D = game.grid
    num = round(float(v) * D)
    if abs(float(v) - num / D) > 1e-9:
        raise ValueError(f"{name}={v} is not a grid value (denominator {D})")
    if not 0 < num < D:
        raise ValueError(f"{name}={v} must lie strictly between 0 and 1")
    return Fraction(int(num), D)


def classify_g1(
    game: GameConfig,
    w_p1,
    w_r1,
    alpha_p,
    alpha_r,
    rate: float,
    b_coefficient: int = 2,
) -> G1Classification:
    """Predict where and when one-round pure self-play settles.

    Requires a one-round game, interior grid values (strictly between 0 and
    1), and a learning rate above twice the grid denominator.  Derivation,
    with m = min(alpha_r, w_p1), p_min = min(m, w_r1), p_max = max(m, w_r1):

    * round 1 plays (w_p1, w_r1); round 2 plays (w_r1, m): the responder's
      maximizers are the thresholds at or below the observed offer, with the
      anchor winning ties when it qualifies, the largest otherwise.
    * If p_min == p_max play is constant from t=2 (from t=1 when the two
      initials coincide), and the constant profile is an equilibrium.
    * Otherwise the responder sits at p_min from t=2 on while the first
      mover weighs offering p_max (accepted since round 1, cumulative
      (t-1)(1-p_max)) against offering p_min (accepted since round 2,
      cumulative (t-2)(1-p_min)), each handicapped by 2/rate unless it is
      the anchor; ties resolve to the larger offer.  The first mover leaves
      p_max at the first t where the p_min objective strictly beats the
      p_max objective, i.e. t > t_base + eps*[alpha_p = p_max] -
      eps*[alpha_p = p_min] with t_base = (2(1-p_min)-(1-p_max)) /
      (p_max-p_min) and eps = 2/(rate*(p_max-p_min)); settlement at
      floor(bound)+1.
    * When 1-p_min > b*(1-p_max) (default b=2) the dwell phase never
      starts and settlement lands at t=3, as it does when the anchor equals
      p_min and 1-p_min = 2(1-p_max) exactly.

    All arithmetic is exact (Fraction), so the floor is never subject to
    rounding noise.  The settled share is always p_min = min{w_r1, w_p1,
    alpha_r}.
    """
    if game.rounds != 1:
        raise ValueError("classification applies to the one-round game only")
    if not rate > 2 * game.grid:
        raise ValueError(
            f"rate must exceed twice the grid denominator ({2 * game.grid})"
        )
    w_p = _grid_fraction(game, "w_p1", w_p1)
    w_r = _grid_fraction(game, "w_r1", w_r1)
    a_p = _grid_fraction(game, "alpha_p", alpha_p)
    a_r = _grid_fraction(game, "alpha_r", alpha_r)

    m = min(a_r, w_p)
    p_min = min(m, w_r)
    p_max = max(m, w_r)

    if p_min == p_max:
        t = 1 if w_p == w_r else 2
        return G1Classification(p_min, p_max, "C1", t, p_min)

    dwell_skipped = (1 - p_min) > b_coefficient * (1 - p_max)
    anchor_low_boundary = (a_p == p_min) and ((1 - p_min) == 2 * (1 - p_max))
    if dwell_skipped or anchor_low_boundary:
        return G1Classification(p_min, p_max, "C1", 3, p_min)

    t_base = (2 * (1 - p_min) - (1 - p_max)) / (p_max - p_min)
    eps = Fraction(2) / (Fraction(rate) * (p_max - p_min))
    if a_p == p_max:
        bound = t_base + eps
    elif a_p == p_min:
        bound = t_base - eps
    else:
        bound = t_base
    t_pred = math.floor(bound) + 1
    return G1Classification(p_min, p_max, "C2", t_pred, p_min, bound)


# ---------------------------------------------------------------------------
# sufficient conditions for two-round settlement
# ---------------------------------------------------------------------------


def theorem5_preconditions(
    game: GameConfig,
    initial_P: Strategy,
    initial_R: Strategy,
    anchor_P: Strategy,
    anchor_R: Strategy,
) -> bool:
    """Sufficient conditions for two-round self-play to settle on a pure NE.

    All comparisons are exact: the discount factor is taken at its binary
    float value and compared in rational arithmetic.  Conditions:

    * grid fine enough that 1/D < 1 - delta;
    * the responder's opening pair prefers its round-1 deal to waiting:
      1 - w_r1 >= delta * w_r2;
    * the first mover prefers its own round-1 deal to paying its round-2
      threshold's complement: w_p1 > delta * (1 - w_p2);
    * each agent's round-1 anchor lies strictly above the opponent's
      round-1 initial: a_p1 > w_r1 and a_r1 > w_p1.
    """
    if game.rounds != 2:
        raise ValueError("preconditions are defined for the two-round game only")
    D = game.grid
    for s in (initial_P, initial_R, anchor_P, anchor_R):
        if s.denom != D or len(s.entries) != 2:
            raise ValueError("strategies must be two-round strategies on the game grid")
    delta = Fraction(game.delta)
    if Fraction(1, D) >= 1 - delta:
        return False
    w_p1, w_p2 = (Fraction(e, D) for e in initial_P.entries)
    w_r1, w_r2 = (Fraction(e, D) for e in initial_R.entries)
    a_p1 = Fraction(anchor_P.entries[0], D)
    a_r1 = Fraction(anchor_R.entries[0], D)
    return (
        1 - w_r1 >= delta * w_r2
        and w_p1 > delta * (1 - w_p2)
        and a_p1 > w_r1
        and a_r1 > w_p1
    )


# ---------------------------------------------------------------------------
# scripted adversaries and external regret
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdversarySchedule:
    """A scripted opponent whose per-round values come from spaced bins.

    bins[k] lists the values the adversary may use in game round k+1, each
    pair at least the declared spacing apart; plays is the full schedule,
    one n-tuple of values per repetition of the game.
    """

    game: GameConfig
    bins: tuple[tuple[float, ...], ...]
    plays: tuple[tuple[float, ...], ...]
    spacing: float


def make_adversary(
    game: GameConfig,
    plays: Sequence[Sequence[float]],
    bins: Sequence[Sequence[float]] | None = None,
    spacing: float | None = None,
) -> AdversarySchedule:
    """Validate and build an adversary schedule.

    When ``bins`` is omitted it is inferred as the distinct values used per
    round.  ``spacing`` defaults to 1/D and may only be coarser.  Every
    value must lie in [0, 1], every play must use bin values, and within
    each round's bin distinct values must be at least ``spacing`` apart (up
    to a 1e-12 slack).
    """
    n = game.rounds
    if spacing is None:
        spacing = 1.0 / game.grid
    elif spacing < 1.0 / game.grid - 1e-12:
        raise ValueError(
            f"spacing {spacing} is finer than the grid step 1/{game.grid}"
        )
    plays_t = tuple(tuple(float(v) for v in p) for p in plays)
    if len(plays_t) == 0:
        raise ValueError("adversary schedule needs at least one play")
    for p in plays_t:
        if len(p) != n:
            raise ValueError(f"each play needs {n} round values, got {p}")
        for v in p:
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"adversary value {v} outside [0, 1]")
    if bins is None:
        bins_t = tuple(tuple(sorted({p[k] for p in plays_t})) for k in range(n))
    else:
        if len(bins) != n:
            raise ValueError(f"need one bin list per round ({n})")
        bins_t = tuple(tuple(sorted(float(v) for v in b)) for b in bins)
        for k, b in enumerate(bins_t):
            for v in b:
                if not 0.0 <= v <= 1.0:
                    raise ValueError(f"bin value {v} outside [0, 1]")
            used = {p[k] for p in plays_t}
            if not used <= {*b}:
                raise ValueError(
                    f"round {k + 1} plays use values outside the declared bin"
                )
    for k, b in enumerate(bins_t):
        for lo, hi in zip(b, b[1:]):
            if hi - lo < spacing - 1e-12:
                raise ValueError(
                    f"round {k + 1} bin values {lo} and {hi} are closer than "
                    f"the required spacing {spacing}"
                )
    return AdversarySchedule(game=game, bins=bins_t, plays=plays_t, spacing=spacing)


def _grid_utilities_vs_value_play(
    game: GameConfig, owner: str, adversary_values: Sequence[float]
) -> np.ndarray:
    """Utility of every own grid strategy against one real-valued opponent play."""
    em = _entries_matrix(game)
    vals = em / game.grid  # (N, n)
    N = vals.shape[0]
    util = np.zeros(N)
    alive = np.ones(N, dtype=bool)
    for k in range(1, game.rounds + 1):
        own_proposes = (k % 2 == 1) == (owner == "P")
        a = adversary_values[k - 1]
        if own_proposes:
            offers = vals[:, k - 1]
            deal = alive & (offers >= a)
            shares_own = 1.0 - offers[deal]
        else:
            deal = alive & (a >= vals[:, k - 1])
            # opponent offered a; the accepted offer goes to the round responder
            shares_own = np.full(int(deal.sum()), a)
        util[deal] = game.delta ** (k - 1) * shares_own
        alive &= ~deal
    return util


def _candidate_utilities(
    game: GameConfig,
    owner: str,
    candidates: np.ndarray,
    adversary_plays: Sequence[Sequence[float]],
) -> np.ndarray:
    """Cumulative utility of each real-valued candidate over the schedule."""
    C = candidates.shape[0]
    total = np.zeros(C)
    for a in adversary_plays:
        alive = np.ones(C, dtype=bool)
        for k in range(1, game.rounds + 1):
            own_proposes = (k % 2 == 1) == (owner == "P")
            if own_proposes:
                deal = alive & (candidates[:, k - 1] >= a[k - 1])
                gain = game.delta ** (k - 1) * (1.0 - candidates[deal, k - 1])
            else:
                deal = alive & (a[k - 1] >= candidates[:, k - 1])
                gain = game.delta ** (k - 1) * a[k - 1]
            total[deal] += gain
            alive &= ~deal
    return total


class RegretResult(NamedTuple):
    """External regret vs the best fixed grid / continuous-candidate strategy."""

    regret_vs_grid: float
    regret_vs_continuous: float


def external_regret(
    game: GameConfig,
    owner: str,
    played: Sequence[Play],
    adversary: AdversarySchedule,
) -> RegretResult:
    """Cumulative shortfall of the played sequence against two hindsight bars.

    ``owner`` names the role the played sequence occupied ("P" moves first).
    The grid bar is the best fixed own grid strategy.  The continuous bar is
    the best fixed strategy whose round-k value ranges over the grid plus the
    adversary's round-k bin values and their 1/D-shifted neighbors — against
    a bin-spaced adversary that finite set contains a maximizer of the
    continuous problem, because utilities are piecewise monotone between
    consecutive adversary values.  The continuous bar can only exceed the
    grid bar.
    """
    if owner not in ("P", "R"):
        raise ValueError(f"owner must be 'P' or 'R', got {owner!r}")
    if adversary.game != game:
        raise ValueError("adversary was built for a different game")
    if len(played) != len(adversary.plays):
        raise ValueError(
            f"played {len(played)} rounds but the schedule has {len(adversary.plays)}"
        )

    cum_grid = np.zeros(game.strategy_count)
    earned = 0.0
    for own_play, adv in zip(played, adversary.plays):
        u = _grid_utilities_vs_value_play(game, owner, adv)
        cum_grid += u
        earned += float(_weights_of(game, own_play) @ u)
    regret_grid = float(cum_grid.max() - earned)

    per_round_candidates = []
    shift = 1.0 / game.grid
    for k in range(game.rounds):
        vals = set(float(x) for x in game.grid_values)
        for b in adversary.bins[k]:
            for v in (b - shift, b, b + shift):
                if 0.0 <= v <= 1.0:
                    vals.add(v)
        per_round_candidates.append(sorted(vals))
    candidates = np.array(list(product(*per_round_candidates)))
    cont = _candidate_utilities(game, owner, candidates, adversary.plays)
    regret_cont = float(cont.max() - earned)
    return RegretResult(regret_grid, regret_cont)
