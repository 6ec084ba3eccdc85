"""Drive full matches between agents and summarize the results.

One worker owns one MatchState at a time; matches are independent, so a
batch is just a loop over derived seeds.  Recording is off by default
because bulk runs only need outcomes; turn it on to keep the replay
records (and their digests) for logging or commentary.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

from .agents import Agent, AgentConfig, GREEDY, RANDOM, GreedyAgent, RandomAgent, make_agent
from .engine import (
    MATCH_OVER,
    PLAYING,
    MatchState,
    advance_level,
    apply,
    legal_actions,
    new_match,
    next_game,
    observe,
    resolve_tribute,
    round_outcome,
)

# a match that somehow cycles level resets forever is cut off here
DEFAULT_MAX_GAMES = 500


class GameSummary(NamedTuple):
    game: int
    finish_order: tuple[int, int, int, int]
    winning_team: int
    upgrade: int
    best_victory: bool
    levels_after: tuple[int, int]
    steps: int


class MatchResult(NamedTuple):
    seed: int
    winner: int | None
    games: tuple[GameSummary, ...]
    steps: int
    truncated: bool
    final_levels: tuple[int, int]
    state: MatchState


def play_match(
    seed: int,
    agents: list[Agent],
    *,
    record: bool = False,
    tribute_mode: str = "standard",
    max_games: int = DEFAULT_MAX_GAMES,
    on_step: Callable[[MatchState], None] | None = None,
) -> MatchResult:
    """Play one match to its end (or the game cap) and summarize it.

    ``on_step`` runs after every applied play for invariant checking.
    """
    state = new_match(seed, record=record, tribute_mode=tribute_mode)
    games: list[GameSummary] = []
    steps = 0
    truncated = False
    while True:
        game_steps = 0
        while state.phase == PLAYING:
            seat = state.turn
            legal = legal_actions(state, seat)
            combo = agents[seat].choose(observe(state, seat), legal)
            apply(state, seat, combo, validate=False)
            game_steps += 1
            if on_step is not None:
                on_step(state)
        steps += game_steps
        outcome = round_outcome(state)
        advance_level(state, outcome)
        games.append(
            GameSummary(
                game=state.game,
                finish_order=outcome.finish_order,
                winning_team=outcome.winning_team,
                upgrade=outcome.upgrade,
                best_victory=outcome.best_victory,
                levels_after=tuple(state.team_levels),
                steps=game_steps,
            )
        )
        if state.phase == MATCH_OVER:
            break
        if state.game >= max_games:
            truncated = True
            break
        next_game(state)
        resolve_tribute(state)
    return MatchResult(
        seed=seed,
        winner=state.match_winner,
        games=tuple(games),
        steps=steps,
        truncated=truncated,
        final_levels=tuple(state.team_levels),
        state=state,
    )


def agents_from_configs(configs: list[AgentConfig]) -> list[Agent]:
    if len(configs) != 4:
        raise ValueError("a match needs exactly 4 agent configs")
    return [make_agent(cfg, seat) for seat, cfg in enumerate(configs)]


def default_lineup(kinds: list[str], seed: int) -> list[Agent]:
    """One agent per seat; random agents get streams derived from the
    match seed and seat so reruns reproduce."""
    agents: list[Agent] = []
    for seat, kind in enumerate(kinds):
        if kind == RANDOM:
            agents.append(RandomAgent(seed * 4 + seat))
        elif kind == GREEDY:
            agents.append(GreedyAgent())
        else:
            raise ValueError(f"lineup kind must be random or greedy, got {kind!r}")
        # replay agents join through agents_from_configs instead
    return agents


class BatchSummary(NamedTuple):
    matches: int
    wins_by_team: tuple[int, int]
    truncated: int
    total_games: int
    total_steps: int


def run_batch(
    n: int,
    base_seed: int,
    kinds: list[str],
    *,
    tribute_mode: str = "standard",
    max_games: int = DEFAULT_MAX_GAMES,
) -> tuple[BatchSummary, list[MatchResult]]:
    results = []
    wins = [0, 0]
    truncated = 0
    for i in range(n):
        seed = base_seed + i
        result = play_match(
            seed,
            default_lineup(kinds, seed),
            tribute_mode=tribute_mode,
            max_games=max_games,
        )
        results.append(result)
        if result.winner is None:
            truncated += 1
        else:
            wins[result.winner] += 1
    summary = BatchSummary(
        matches=n,
        wins_by_team=(wins[0], wins[1]),
        truncated=truncated,
        total_games=sum(len(r.games) for r in results),
        total_steps=sum(r.steps for r in results),
    )
    return summary, results
