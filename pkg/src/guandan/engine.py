"""Authoritative state machine for a full Guandan match.

A match is a sequence of games.  Both teams (seats 0/2 vs 1/3) start at
level 2; each game is played at the lead team's level, the winner's team
climbs by 3/2/1 levels depending on where its partner finished, and the
match ends only when a team wins at its own level A with its partner
second.  Between games the losers pay tribute and receivers return a
card; a team stuck at level A gets three attempts before falling back
to 2.

All operations mutate the passed state in place and return it.  Card
identity is the integer scheme from :mod:`guandan.cards`; the two pack
copies of a card are interchangeable for rules purposes, and the state
digest deliberately ignores which copy is where.

Digest layout (FNV-1a 64 over the following bytes, in order):
  game (2 bytes big-endian), phase index, active level,
  team levels (2), attempt counters (2), lead team + 1, turn,
  trick owner + 1, consecutive passes, match winner + 1,
  declaration flags packed into one byte,
  finish count then finishing seats,
  previous-game finish seats (empty before game 2),
  per seat: hand size then each card as ``card % 54`` ascending,
  incumbent: 255 when absent, else kind index, rank, card count,
  cards as ``card % 54`` ascending, wild count, then ascending
  (wild % 54, identity) pairs.
"""

from __future__ import annotations

import random
from bisect import insort
from dataclasses import dataclass, field
from typing import NamedTuple

from .cards import (
    BIG_JOKER,
    SMALL_JOKER,
    card_code,
    card_rank,
    effective_order,
    full_deck,
    is_wild,
    level_code,
)
from .combos import Combo, PASS, PASS_KIND, legal_moves

DEALING = "Dealing"
TRIBUTE = "Tribute"
PLAYING = "Playing"
ROUND_OVER = "RoundOver"
MATCH_OVER = "MatchOver"
PHASES = (DEALING, TRIBUTE, PLAYING, ROUND_OVER, MATCH_OVER)

LEVEL_A = 12
HAND_SIZE = 27
DECLARE_AT = 10
MAX_A_ATTEMPTS = 3
UPGRADE_BY_PARTNER_PLACE = {1: 3, 2: 2, 3: 1}

STANDARD = "standard"
PAPER_LITERAL = "paper-literal"
TRIBUTE_MODES = (STANDARD, PAPER_LITERAL)

KIND_INDEX = {
    kind: i
    for i, kind in enumerate(
        (
            "Single",
            "Pair",
            "Triple",
            "FullHouse",
            "Straight",
            "Tube",
            "Plate",
            "Bomb",
            "StraightFlush",
            "FourJokers",
            PASS_KIND,
        )
    )
}

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_FNV_MASK = 0xFFFFFFFFFFFFFFFF


class EngineError(Exception):
    """Base class for rule violations against the match state."""


class WrongPhaseError(EngineError):
    pass


class NotYourTurnError(EngineError):
    pass


class IllegalMoveError(EngineError):
    pass


class InvalidChoiceError(EngineError):
    pass


class InvalidReturnError(EngineError):
    pass


class RoundOutcome(NamedTuple):
    winning_team: int
    upgrade: int
    best_victory: bool
    finish_order: tuple[int, int, int, int]


class TributeChoices(NamedTuple):
    """Optional inputs to resolve_tribute; None fields mean defaults.

    ``pick`` is the tribute card the first finisher takes when two are
    offered.  ``returns`` maps receiver seat to the card it gives back.
    """

    pick: int | None = None
    returns: dict[int, int] | None = None


class Observation(NamedTuple):
    """Read-only view of the match from one seat.

    ``plays`` and ``tribute_events`` reference live per-game lists owned
    by the state; treat them as append-only history.
    """

    seat: int
    hand: tuple[int, ...]
    active_level: int
    incumbent: Combo | None
    incumbent_seat: int | None
    passes: int
    hand_sizes: tuple[int, int, int, int]
    finish_order: tuple[int, ...]
    declared: tuple[bool, bool, bool, bool]
    team_levels: tuple[int, int]
    a_attempts: tuple[int, int]
    lead_team: int | None
    game: int
    step: int
    plays: list[tuple[int, Combo]]
    tribute_events: list[tuple[str, int, int, int]]


@dataclass
class MatchState:
    seed: int
    rng: random.Random
    tribute_mode: str = STANDARD
    team_levels: list[int] = field(default_factory=lambda: [0, 0])
    a_attempts: list[int] = field(default_factory=lambda: [0, 0])
    lead_team: int | None = None
    active_level: int = 0
    phase: str = DEALING
    game: int = 0
    step: int = 0
    hands: list[list[int]] = field(default_factory=list)
    turn: int = 0
    trick_owner: int | None = None
    incumbent: Combo | None = None
    passes: int = 0
    finish_order: list[int] = field(default_factory=list)
    done: list[bool] = field(default_factory=lambda: [False] * 4)
    declared: list[bool] = field(default_factory=lambda: [False] * 4)
    prev_finish: tuple[int, int, int, int] | None = None
    tribute_pending: tuple[tuple[int, int], ...] | None = None
    match_winner: int | None = None
    records: list[dict] | None = None
    plays: list[tuple[int, Combo]] = field(default_factory=list)
    tribute_events: list[tuple[str, int, int, int]] = field(default_factory=list)
    advanced: bool = False


def team_of(seat: int) -> int:
    return seat & 1


def partner_of(seat: int) -> int:
    return (seat + 2) % 4


def fnv1a_64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _FNV_MASK
    return h


def state_digest(state: MatchState) -> int:
    """64-bit FNV-1a over the canonical byte layout in the module docstring."""
    out = bytearray()
    out.append((state.game >> 8) & 0xFF)
    out.append(state.game & 0xFF)
    out.append(PHASES.index(state.phase))
    out.append(state.active_level)
    out.extend(state.team_levels)
    out.extend(state.a_attempts)
    out.append(0 if state.lead_team is None else state.lead_team + 1)
    out.append(state.turn)
    out.append(0 if state.trick_owner is None else state.trick_owner + 1)
    out.append(state.passes)
    out.append(0 if state.match_winner is None else state.match_winner + 1)
    flags = 0
    for i, d in enumerate(state.declared):
        if d:
            flags |= 1 << i
    out.append(flags)
    out.append(len(state.finish_order))
    out.extend(state.finish_order)
    out.extend(state.prev_finish or ())
    for hand in state.hands:
        out.append(len(hand))
        out.extend(sorted(c % 54 for c in hand))
    inc = state.incumbent
    if inc is None:
        out.append(255)
    else:
        out.append(KIND_INDEX[inc.kind])
        out.append(inc.rank)
        out.append(len(inc.cards))
        out.extend(sorted(c % 54 for c in inc.cards))
        out.append(len(inc.wilds))
        for base, identity in sorted((c % 54, b) for c, b in inc.wilds):
            out.append(base)
            out.append(identity)
    return fnv1a_64(bytes(out))


def digest_hex(state: MatchState) -> str:
    return format(state_digest(state), "016x")


def _emit(state: MatchState, seat: int, action: dict) -> None:
    step = state.step
    state.step = step + 1
    if state.records is not None:
        state.records.append(
            {
                "game": state.game,
                "step": step,
                "seat": seat,
                "phase": state.phase,
                "action": action,
                "level": level_code(state.active_level),
                "digest": digest_hex(state),
            }
        )


def _combo_action(combo: Combo) -> dict:
    return {
        "kind": combo.kind,
        "cards": combo.codes(),
        "wilds": combo.wild_codes(),
    }


def _deal(state: MatchState) -> None:
    deck = list(full_deck())
    state.rng.shuffle(deck)
    state.hands = [sorted(deck[i * HAND_SIZE : (i + 1) * HAND_SIZE]) for i in range(4)]
    state.finish_order = []
    state.done = [False] * 4
    state.declared = [False] * 4
    state.incumbent = None
    state.trick_owner = None
    state.passes = 0
    state.step = 0
    state.plays = []
    state.tribute_events = []


def new_match(
    seed: int,
    *,
    record: bool = True,
    tribute_mode: str = STANDARD,
) -> MatchState:
    """Deal game 1 at level 2 with a seed-chosen leader."""
    if tribute_mode not in TRIBUTE_MODES:
        raise ValueError(f"unknown tribute mode {tribute_mode!r}")
    state = MatchState(seed=seed, rng=random.Random(seed), tribute_mode=tribute_mode)
    state.records = [] if record else None
    state.game = 1
    leader = state.rng.randrange(4)
    _deal(state)
    state.turn = leader
    state.phase = PLAYING
    _emit(
        state,
        -1,
        {
            "kind": "Start",
            "cards": [],
            "wilds": [],
            "seed": seed,
            "leader": leader,
            "mode": tribute_mode,
        },
    )
    return state


def _next_active(state: MatchState, seat: int) -> int:
    t = (seat + 1) % 4
    while state.done[t]:
        t = (t + 1) % 4
    return t


def legal_actions(state: MatchState, seat: int) -> list[Combo]:
    """Delegates to legal_moves for the seat whose turn it is."""
    if state.phase != PLAYING:
        raise WrongPhaseError(f"no actions in phase {state.phase}")
    if seat != state.turn:
        raise NotYourTurnError(f"seat {seat} acted on seat {state.turn}'s turn")
    return legal_moves(state.hands[seat], state.incumbent, state.active_level)


def apply(state: MatchState, seat: int, combo: Combo, *, validate: bool = True) -> MatchState:
    """Play ``combo`` (possibly Pass) for ``seat`` and advance the trick."""
    if state.phase != PLAYING:
        raise WrongPhaseError(f"cannot play in phase {state.phase}")
    if seat != state.turn:
        raise NotYourTurnError(f"seat {seat} acted on seat {state.turn}'s turn")
    if validate and combo not in legal_moves(
        state.hands[seat], state.incumbent, state.active_level
    ):
        raise IllegalMoveError(f"{combo.kind} {combo.codes()} is not legal here")
    _apply_play(state, seat, combo)
    return state


def _apply_play(state: MatchState, seat: int, combo: Combo) -> None:
    if combo.kind == PASS_KIND:
        state.passes += 1
        state.plays.append((seat, combo))
        _emit(state, seat, {"kind": PASS_KIND, "cards": [], "wilds": []})
        owner = state.trick_owner
        others = 0
        done = state.done
        for s in range(4):
            if not done[s] and s != owner:
                others += 1
        if state.passes >= others:
            # trick closes; winner leads, or jiefeng if the winner is out
            state.incumbent = None
            state.trick_owner = None
            state.passes = 0
            if not done[owner]:
                state.turn = owner
            else:
                mate = partner_of(owner)
                state.turn = mate if not done[mate] else _next_active(state, owner)
        else:
            state.turn = _next_active(state, seat)
        return

    hand = state.hands[seat]
    for card in combo.cards:
        hand.remove(card)
    state.incumbent = combo
    state.trick_owner = seat
    state.passes = 0
    state.plays.append((seat, combo))
    _emit(state, seat, _combo_action(combo))
    if not state.declared[seat] and len(hand) <= DECLARE_AT:
        state.declared[seat] = True
        _emit(
            state,
            seat,
            {"kind": "Declare", "cards": [], "wilds": [], "count": len(hand)},
        )
    if not hand:
        state.finish_order.append(seat)
        state.done[seat] = True
        if len(state.finish_order) == 3:
            last = next(s for s in range(4) if not state.done[s])
            state.finish_order.append(last)
            state.phase = ROUND_OVER
            return
    state.turn = _next_active(state, seat)


def round_outcome(state: MatchState) -> RoundOutcome:
    if state.phase != ROUND_OVER:
        raise WrongPhaseError(f"round is not over in phase {state.phase}")
    order = tuple(state.finish_order)
    winner = order[0]
    place = order.index(partner_of(winner))
    return RoundOutcome(
        winning_team=team_of(winner),
        upgrade=UPGRADE_BY_PARTNER_PLACE[place],
        best_victory=place == 1,
        finish_order=order,
    )


def advance_level(state: MatchState, outcome: RoundOutcome) -> MatchState:
    """Apply level upgrades, attempt accounting, and lead-team rotation.

    A team wins the match only by taking a best victory in a game played
    at its own level A; a game played at a team's A that ends any other
    way burns one of its three attempts, and the third failure drops the
    team back to level 2.
    """
    if state.phase != ROUND_OVER:
        raise WrongPhaseError(f"cannot advance level in phase {state.phase}")
    if state.advanced:
        raise WrongPhaseError("level already advanced for this game")
    state.advanced = True
    winner = outcome.winning_team
    prev_lead = state.lead_team
    lead_at_a = prev_lead is not None and state.team_levels[prev_lead] == LEVEL_A
    if lead_at_a and winner == prev_lead and outcome.best_victory:
        state.phase = MATCH_OVER
        state.match_winner = winner
        return state
    state.team_levels[winner] = min(state.team_levels[winner] + outcome.upgrade, LEVEL_A)
    if lead_at_a:
        state.a_attempts[prev_lead] += 1
        if state.a_attempts[prev_lead] >= MAX_A_ATTEMPTS:
            state.team_levels[prev_lead] = 0
            state.a_attempts[prev_lead] = 0
    state.lead_team = winner
    state.active_level = state.team_levels[winner]
    return state


def next_game(state: MatchState) -> MatchState:
    """Deal the following game and enter the tribute phase."""
    if state.phase != ROUND_OVER:
        raise WrongPhaseError(f"cannot start a game in phase {state.phase}")
    if not state.advanced:
        raise WrongPhaseError("advance_level must run before the next game")
    state.prev_finish = tuple(state.finish_order)
    state.advanced = False
    state.game += 1
    _deal(state)
    state.phase = TRIBUTE
    state.tribute_pending = tribute_obligations(state)
    _emit(state, -1, {"kind": "Start", "cards": [], "wilds": []})
    return state


def tribute_obligations(state: MatchState) -> tuple[tuple[int, int], ...]:
    """Who owes tribute for the game just dealt, with the forced card.

    Standard mode: both losers pay after a double down, otherwise only
    the fourth finisher.  Paper-literal mode: the later two finishers
    always pay, even across teams.
    """
    first, second, third, fourth = state.prev_finish
    if state.tribute_mode == PAPER_LITERAL or team_of(third) == team_of(fourth):
        payers = (third, fourth)
    else:
        payers = (fourth,)
    return tuple((p, _tribute_card(state, p)) for p in payers)


def _tribute_card(state: MatchState, payer: int) -> int:
    """Forced tribute: highest by effective order, never a joker or wild;
    ties go to the lowest card id."""
    level = state.active_level
    best = -1
    best_key = (-1, 0)
    for card in state.hands[payer]:
        rank = card_rank(card)
        if rank >= SMALL_JOKER or is_wild(card, level):
            continue
        key = (effective_order(rank, level), -card)
        if key > best_key:
            best_key = key
            best = card
    return best


def _default_return(state: MatchState, receiver: int) -> int:
    hand = state.hands[receiver]
    level = state.active_level
    low = [c for c in hand if card_rank(c) <= 8]  # natural rank 10 or below
    pool = low or hand
    return min(pool, key=lambda c: (effective_order(card_rank(c), level), c))


def resolve_tribute(state: MatchState, choices: TributeChoices | None = None) -> MatchState:
    """Move tribute and return cards, then open play.

    Whoever's tribute the first finisher takes leads the game; with a
    single tribute that is its payer.  If the paying side holds both big
    jokers (counting both payers' hands together when two pay), tribute
    is refused and last game's winner leads.
    """
    if state.phase != TRIBUTE:
        raise WrongPhaseError(f"cannot resolve tribute in phase {state.phase}")
    if choices is None:
        choices = TributeChoices()
    first, second = state.prev_finish[0], state.prev_finish[1]
    pending = state.tribute_pending
    state.tribute_pending = None

    big_jokers = sum(
        1 for payer, _ in pending for c in state.hands[payer] if card_rank(c) == BIG_JOKER
    )
    if big_jokers == 2:
        state.tribute_events.append(("AntiTribute", -1, -1, -1))
        _emit(state, -1, {"kind": "AntiTribute", "cards": [], "wilds": []})
        leader = first
    else:
        if len(pending) == 2:
            offered = {card: payer for payer, card in pending}
            pick = choices.pick
            if pick is None:
                level = state.active_level
                pick = max(
                    offered,
                    key=lambda c: (effective_order(card_rank(c), level), -offered[c]),
                )
            elif pick not in offered:
                raise InvalidChoiceError(f"{pick} is not an offered tribute card")
            leader = offered[pick]
            plan = [(offered[pick], pick, first)]
            plan.extend(
                (payer, card, second) for payer, card in pending if card != pick
            )
        else:
            ((payer, card),) = pending
            leader = payer
            plan = [(payer, card, first)]
        for payer, card, receiver in plan:
            state.hands[payer].remove(card)
            insort(state.hands[receiver], card)
            state.tribute_events.append(("Tribute", payer, receiver, card))
            _emit(
                state,
                payer,
                {"kind": "Tribute", "cards": [card_code(card)], "wilds": [], "to": receiver},
            )
        for payer, _, receiver in plan:
            ret = (choices.returns or {}).get(receiver)
            if ret is None:
                ret = _default_return(state, receiver)
            else:
                hand = state.hands[receiver]
                if ret not in hand:
                    raise InvalidReturnError(f"{ret} is not in seat {receiver}'s hand")
                low = [c for c in hand if card_rank(c) <= 8]
                if low and ret not in low:
                    raise InvalidReturnError("a card of rank 10 or lower must be returned")
                if not low:
                    level = state.active_level
                    floor = min(
                        effective_order(card_rank(c), level) for c in hand
                    )
                    if effective_order(card_rank(ret), level) != floor:
                        raise InvalidReturnError("the smallest card must be returned")
            state.hands[receiver].remove(ret)
            insort(state.hands[payer], ret)
            state.tribute_events.append(("Return", receiver, payer, ret))
            _emit(
                state,
                receiver,
                {"kind": "Return", "cards": [card_code(ret)], "wilds": [], "to": payer},
            )
    state.phase = PLAYING
    state.turn = leader
    return state


def observe(state: MatchState, seat: int) -> Observation:
    return Observation(
        seat=seat,
        hand=tuple(state.hands[seat]),
        active_level=state.active_level,
        incumbent=state.incumbent,
        incumbent_seat=state.trick_owner,
        passes=state.passes,
        hand_sizes=tuple(len(h) for h in state.hands),
        finish_order=tuple(state.finish_order),
        declared=tuple(state.declared),
        team_levels=tuple(state.team_levels),
        a_attempts=tuple(state.a_attempts),
        lead_team=state.lead_team,
        game=state.game,
        step=state.step,
        plays=state.plays,
        tribute_events=state.tribute_events,
    )
