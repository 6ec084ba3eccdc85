"""Decision policies that pick a move from the legal set.

Three stand-ins for a trained player: a seeded uniform policy, a greedy
heuristic, and a policy that replays a recorded log.  All of them only
ever return elements of the legal list they are handed, and greedy is a
pure function of its inputs so self-play runs are reproducible.
"""

from __future__ import annotations

import random
from collections import deque
from typing import NamedTuple, Protocol

from .combos import Combo, InvalidCardsError, PASS, PASS_KIND, is_bomb_like, resolve
from .engine import Observation

RANDOM = "random"
GREEDY = "greedy"
REPLAY = "replay"
AGENT_KINDS = (RANDOM, GREEDY, REPLAY)

# following, a bomb is only worth spending on a plain combo when the
# hand is nearly empty
BOMB_SPEND_HAND = 6


class AgentError(Exception):
    pass


class ReplayExhaustedError(AgentError):
    pass


class ReplayIllegalError(AgentError):
    pass


class AgentConfig(NamedTuple):
    kind: str
    seed: int = 0
    replay_path: str | None = None


class Agent(Protocol):
    def choose(self, observation: Observation, legal: list[Combo]) -> Combo: ...


def _pick(candidates: list[Combo], primary) -> Combo:
    """Minimum by ``primary``, breaking exact ties by card codes."""
    best_key = None
    ties: list[Combo] = []
    for combo in candidates:
        key = primary(combo)
        if best_key is None or key < best_key:
            best_key = key
            ties = [combo]
        elif key == best_key:
            ties.append(combo)
    if len(ties) == 1:
        return ties[0]
    return min(ties, key=lambda c: c.codes())


class RandomAgent:
    """Uniform over the legal list via a private seeded stream."""

    def __init__(self, seed: int = 0):
        self._rng = random.Random(seed)

    def choose(self, observation: Observation, legal: list[Combo]) -> Combo:
        return legal[self._rng.randrange(len(legal))]


class GreedyAgent:
    """Sheds aggressively when leading, spends minimally when following.

    Leading: the combo consuming the most cards, then the lowest rank,
    then the lexicographically smallest card codes.  Following: the
    cheapest beating combo by (card count, rank, codes), except that a
    bomb-like combo is never spent on a plain incumbent while the hand
    still holds more than six cards; Pass when nothing qualifies.
    """

    def choose(self, observation: Observation, legal: list[Combo]) -> Combo:
        incumbent = observation.incumbent
        if incumbent is None or incumbent.kind == PASS_KIND:
            return _pick(legal, lambda c: (-len(c.cards), c.rank))
        save_bombs = (
            not is_bomb_like(incumbent) and len(observation.hand) > BOMB_SPEND_HAND
        )
        candidates = [
            c
            for c in legal
            if c.kind != PASS_KIND and not (save_bombs and is_bomb_like(c))
        ]
        if not candidates:
            return PASS
        return _pick(candidates, lambda c: (len(c.cards), c.rank))


class ReplayAgent:
    """Feeds back the moves one seat made in a recorded match log.

    ``records`` is the parsed log (a list of line dicts); only Pass and
    combo plays by ``seat`` are replayed, synthetic events are skipped.
    """

    def __init__(self, seat: int, records: list[dict]):
        self.seat = seat
        self._queue = deque(
            r
            for r in records
            if r["seat"] == seat and _is_play(r["action"]["kind"])
        )

    def choose(self, observation: Observation, legal: list[Combo]) -> Combo:
        if not self._queue:
            raise ReplayExhaustedError(f"no more logged moves for seat {self.seat}")
        record = self._queue.popleft()
        action = record["action"]
        where = f"game {record['game']} step {record['step']}"
        try:
            combo = resolve(
                action["kind"],
                action["cards"],
                action["wilds"],
                observation.hand,
                observation.active_level,
            )
        except InvalidCardsError as exc:
            raise ReplayIllegalError(
                f"logged {action['kind']} {action['cards']} does not fit the hand at {where}"
            ) from exc
        if combo not in legal:
            raise ReplayIllegalError(
                f"logged {action['kind']} {action['cards']} is not legal at {where}"
            )
        return combo


def _is_play(kind: str) -> bool:
    return kind not in ("Start", "Tribute", "Return", "AntiTribute", "Declare")


def make_agent(config: AgentConfig, seat: int = 0) -> Agent:
    """Build the agent an AgentConfig describes; replay kind loads its log."""
    if config.kind == RANDOM:
        return RandomAgent(config.seed)
    if config.kind == GREEDY:
        return GreedyAgent()
    if config.kind == REPLAY:
        if not config.replay_path:
            raise ValueError("replay agent requires replay_path")
        from .replay import read_replay

        return ReplayAgent(seat, read_replay(config.replay_path))
    raise ValueError(f"unknown agent kind {config.kind!r}")
