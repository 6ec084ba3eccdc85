"""Match replay logs: write, read, and re-simulate for verification.

A log is JSON Lines, one object per recorded event:

    {"game": 1, "step": 4, "seat": 2, "phase": "Playing",
     "action": {"kind": "Pair", "cards": ["H7", "S7"], "wilds": []},
     "level": "2", "digest": "0f3a..."}

Synthetic events use the same shape: ``Start`` opens each game (the
game-1 record also carries ``seed``, ``leader`` and ``mode``, making a
log self-contained), ``Tribute``/``Return`` carry one card and a ``to``
seat, ``AntiTribute`` marks a refused tribute, and ``Declare`` carries
the announced ``count``.  Wild entries are [card code, identity code]
pairs.  ``digest`` is the state hash after the event; card codes do not
name pack copies, and the digest ignores them to match.
"""

from __future__ import annotations

import json

from .cards import parse_code
from .engine import (
    MATCH_OVER,
    PLAYING,
    ROUND_OVER,
    MatchState,
    TributeChoices,
    advance_level,
    apply,
    legal_actions,
    new_match,
    next_game,
    observe,
    resolve_tribute,
    round_outcome,
)

SYNTHETIC_KINDS = ("Start", "Tribute", "Return", "AntiTribute", "Declare")


class ReplayFormatError(Exception):
    pass


class ReplayMismatchError(Exception):
    pass


def dump_line(record: dict) -> str:
    return json.dumps(record, separators=(",", ":"), ensure_ascii=False)


def write_replay(path, records: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(dump_line(record))
            fh.write("\n")


def read_replay(path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ReplayFormatError(f"{path}:{i}: {exc}") from exc
    if not records:
        raise ReplayFormatError(f"{path}: empty log")
    head = records[0]["action"]
    if head.get("kind") != "Start" or "seed" not in head:
        raise ReplayFormatError(f"{path}: log must begin with a seeded Start record")
    return records


def _tribute_choices(state: MatchState, records: list[dict]) -> TributeChoices | None:
    """Reconstruct the logged tribute decisions for the game just dealt.

    Tribute lines precede Return lines, so by the time a Return is seen
    the incoming card for its receiver is known; the return code is
    resolved against the receiver's post-tribute hand.
    """
    game = state.game
    first = state.prev_finish[0]
    pending = dict(state.tribute_pending)
    incoming: dict[int, int] = {}
    pick = None
    returns: dict[int, int] = {}
    for record in records:
        if record["game"] != game:
            continue
        action = record["action"]
        if action["kind"] == "Tribute":
            card = pending[record["seat"]]
            incoming[action["to"]] = card
            if action["to"] == first and len(pending) == 2:
                pick = card
        elif action["kind"] == "Return":
            receiver = record["seat"]
            base = parse_code(action["cards"][0])
            pool = list(state.hands[receiver])
            if receiver in incoming:
                pool.append(incoming[receiver])
            matches = [c for c in pool if c % 54 == base]
            if not matches:
                raise ReplayMismatchError(
                    f"return card {action['cards'][0]} not reachable for seat {receiver}"
                )
            returns[receiver] = min(matches)
    if pick is None and not returns:
        return None
    return TributeChoices(pick=pick, returns=returns or None)


def start_replay(records: list[dict]) -> MatchState:
    """Fresh match seeded from the log's Start record."""
    head = records[0]["action"]
    return new_match(head["seed"], record=True, tribute_mode=head.get("mode", "standard"))


def replay_steps(state: MatchState, records: list[dict]):
    """Drive ``state`` with the logged moves, yielding ``(seat, combo)``
    just before each play is applied; the state is final once exhausted."""
    from .agents import ReplayAgent

    agents = [ReplayAgent(seat, records) for seat in range(4)]
    limit = len(records)
    while len(state.records) < limit and state.phase != MATCH_OVER:
        if state.phase == PLAYING:
            seat = state.turn
            legal = legal_actions(state, seat)
            combo = agents[seat].choose(observe(state, seat), legal)
            yield seat, combo
            apply(state, seat, combo, validate=False)
        elif state.phase == ROUND_OVER:
            advance_level(state, round_outcome(state))
            if state.phase == MATCH_OVER:
                break
            next_game(state)
            resolve_tribute(state, _tribute_choices(state, records))
        else:
            raise ReplayMismatchError(f"cannot drive phase {state.phase}")
    # the closing level bookkeeping emits no records, so run it here
    if state.phase == ROUND_OVER and not state.advanced:
        advance_level(state, round_outcome(state))


def resimulate(records: list[dict]) -> MatchState:
    """Drive a fresh match with the logged moves; returns the final state
    with its own records for comparison."""
    state = start_replay(records)
    for _ in replay_steps(state, records):
        pass
    return state


def verify_replay(path) -> int:
    """Re-simulate a log and require every line to match; returns the
    number of verified records.

    A log may stop at a game boundary (a capped match does), but one
    that ends mid-game was cut and is rejected.
    """
    records = read_replay(path)
    state = resimulate(records)
    fresh = state.records
    if len(fresh) != len(records):
        raise ReplayMismatchError(
            f"log has {len(records)} records, re-simulation produced {len(fresh)}"
        )
    for i, (a, b) in enumerate(zip(records, fresh)):
        if a != b:
            raise ReplayMismatchError(
                f"record {i} diverged:\n  log: {dump_line(a)}\n  sim: {dump_line(b)}"
            )
    if state.phase == PLAYING:
        raise ReplayMismatchError("log ends in the middle of a game")
    return len(records)
