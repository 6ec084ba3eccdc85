"""Opponent analysis from exact card counting.

Second stage of the commentary pipeline.  ``unseen_cards`` keeps an
exact ledger of every publicly revealed card (plays, tributes, returns)
so the unseen pool is a true multiset complement.  ``first_order``
fires defeasible rules over the event stream: a pass on a single
suggests no higher single, an exhausted rank is a certainty, an early
bomb marks a strong hand, a declaration marks time pressure.
``second_order`` enumerates beating combos over the unseen pool for one
candidate play and classifies each opponent's predicted stance.

Stance soundness: must-pass is exact, derived only from the unseen pool
and the opponent's public hand size, so whenever it is claimed the true
hand verifiably cannot beat the candidate.  can-beat-cheaply and
needs-bomb are possibilistic claims over unseen cards; the defeasible
first-order exclusions may downgrade cheap beats to bomb-only but never
manufacture a must-pass.

Histories are the engine's record dicts.  Cards reshuffle between
games, so every function considers only records of the observation's
own game (records lacking a ``game`` key are assumed current).
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import NamedTuple

from .cards import RANKS, card_code, card_rank, effective_order, parse_code
from .combos import (
    BOMB,
    FOUR_JOKERS,
    PASS_KIND,
    SINGLE,
    STRAIGHT_FLUSH,
    Combo,
    combo_sort_key,
    is_bomb_like,
    legal_moves,
)
from .engine import Observation
from .guider import combo_phrase, load_template

PACK = 54
COPIES_PER_CODE = 2
DECK_SIZE = 108

# hypothesis tags
NO_SINGLE_ABOVE = "no-single-above"
RANK_EXHAUSTED = "rank-exhausted"
STRONG_HAND = "strong-hand"
UNDER_PRESSURE = "under-pressure"

# predicted stances
MUST_PASS = "must-pass"
CAN_BEAT_CHEAPLY = "can-beat-cheaply"
NEEDS_BOMB = "needs-bomb"

# a bomb within this many records of the game start counts as early
EARLY_BOMB_STEP = 12

_BOMB_KINDS = (BOMB, STRAIGHT_FLUSH, FOUR_JOKERS)

NO_INFERENCES_SENTENCE = {
    "zh": "暂无对手推断。",
    "en": "No inferences yet.",
}

_TRIBUTE_KINDS = ("Tribute", "Return")
_NON_PLAY_KINDS = ("Start", "Pass", "Declare", "AntiTribute") + _TRIBUTE_KINDS


class InconsistentHistoryError(ValueError):
    pass


class IllegalCandidateError(ValueError):
    pass


class Hypothesis(NamedTuple):
    seat: int            # -1 for table-wide facts
    tag: str
    value: int | None    # rank index or declared count, by tag
    event: int           # triggering record index, -1 when none

    def as_dict(self) -> dict:
        return {"seat": self.seat, "tag": self.tag, "value": self.value, "event": self.event}


class ResponsePrediction(NamedTuple):
    seat: int
    stance: str
    beating: int             # combos surviving the exact constraints
    witness: Combo | None    # weakest beating combo, None for must-pass

    def as_dict(self) -> dict:
        witness = None
        if self.witness is not None:
            witness = {"kind": self.witness.kind, "cards": self.witness.codes()}
        return {"seat": self.seat, "stance": self.stance, "beating": self.beating,
                "witness": witness}


class SecondOrderEntry(NamedTuple):
    candidate: Combo
    responses: tuple[ResponsePrediction, ...]

    def as_dict(self) -> dict:
        return {
            "candidate": {"kind": self.candidate.kind, "cards": self.candidate.codes()},
            "responses": [r.as_dict() for r in self.responses],
        }


@dataclass(frozen=True)
class TomReport:
    order: int
    first_order: tuple[Hypothesis, ...]
    second_order: tuple[SecondOrderEntry, ...] = ()

    def __post_init__(self) -> None:
        if self.order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {self.order}")
        if self.order == 1 and self.second_order:
            raise ValueError("second-order entries require order 2")

    def empty(self) -> bool:
        return not self.first_order and not self.second_order

    def as_dict(self) -> dict:
        return {
            "order": self.order,
            "first_order": [h.as_dict() for h in self.first_order],
            "second_order": [e.as_dict() for e in self.second_order],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), ensure_ascii=False, sort_keys=True)


def _game_records(obs: Observation, history: list[dict]) -> list[dict]:
    return [r for r in history if r.get("game", obs.game) == obs.game]


def unseen_cards(obs: Observation, history: list[dict]) -> tuple[int, ...]:
    """Multiset of cards outside the observer's view: the full deck
    minus own hand minus every publicly placed card.  A tribute into
    another seat's hand stays accounted there until that seat plays the
    same code (the two pack copies are interchangeable)."""
    own = Counter(c % PACK for c in obs.hand)
    played: Counter = Counter()
    known: dict[int, Counter] = defaultdict(Counter)  # seat -> codes shown in hand
    for rec in _game_records(obs, history):
        action = rec["action"]
        kind = action["kind"]
        if kind in _TRIBUTE_KINDS:
            card = parse_code(action["cards"][0])
            payer, receiver = rec["seat"], action["to"]
            if payer != obs.seat and known[payer][card] > 0:
                known[payer][card] -= 1
            if receiver != obs.seat:
                known[receiver][card] += 1
            continue
        if kind in _NON_PLAY_KINDS:
            continue
        seat = rec["seat"]
        for code in action["cards"]:
            card = parse_code(code)
            if known[seat][card] > 0:
                known[seat][card] -= 1
            played[card] += 1
    unseen = []
    for base in range(PACK):
        accounted = played[base] + sum(k[base] for k in known.values())
        remaining = COPIES_PER_CODE - own[base] - accounted
        if remaining < 0:
            raise InconsistentHistoryError(
                f"{card_code(base)}: {own[base]} in hand plus {accounted} revealed "
                f"exceeds {COPIES_PER_CODE} copies"
            )
        unseen.extend(base + i * PACK for i in range(remaining))
    return tuple(unseen)


def _combo_rank_of_single(action: dict) -> int:
    # a wild played inside a combo counts as the card it stands for
    if action["wilds"]:
        return card_rank(parse_code(action["wilds"][0][1]))
    return card_rank(parse_code(action["cards"][0]))


def first_order(obs: Observation, history: list[dict]) -> tuple[Hypothesis, ...]:
    records = _game_records(obs, history)
    out: list[Hypothesis] = []

    incumbent_single: int | None = None  # natural rank of the single on the table
    last_seen_at: dict[int, int] = {}    # rank -> last record index revealing a copy
    for i, rec in enumerate(records):
        action = rec["action"]
        kind = action["kind"]
        seat = rec["seat"]
        if kind == "Pass":
            if incumbent_single is not None:
                out.append(Hypothesis(seat, NO_SINGLE_ABOVE, incumbent_single, i))
            continue
        if kind == "Declare":
            out.append(Hypothesis(seat, UNDER_PRESSURE, action["count"], i))
            continue
        if kind in ("Start", "AntiTribute"):
            continue
        for code in action["cards"]:
            last_seen_at[card_rank(parse_code(code))] = i
        if kind in _TRIBUTE_KINDS:
            continue
        incumbent_single = _combo_rank_of_single(action) if kind == SINGLE else None
        if kind in _BOMB_KINDS and i <= EARLY_BOMB_STEP:
            out.append(Hypothesis(seat, STRONG_HAND, None, i))

    unseen_ranks = Counter(card_rank(c) for c in unseen_cards(obs, history))
    for rank in range(len(RANKS)):
        if unseen_ranks[rank] == 0:
            out.append(Hypothesis(-1, RANK_EXHAUSTED, rank, last_seen_at.get(rank, -1)))
    return tuple(out)


def _excluded(pred_seat: int, combo: Combo, hypotheses, level: int) -> bool:
    """True when a first-order read says this seat lacks the combo.
    Single.rank is already the effective order, wilds included."""
    if combo.kind != SINGLE:
        return False
    return any(
        h.seat == pred_seat
        and h.tag == NO_SINGLE_ABOVE
        and combo.rank > effective_order(h.value, level)
        for h in hypotheses
    )


def _witness_key(combo: Combo):
    return (is_bomb_like(combo), len(combo.cards), combo.rank, combo_sort_key(combo))


def second_order(
    obs: Observation, history: list[dict], candidate: Combo
) -> tuple[ResponsePrediction, ...]:
    if candidate not in legal_moves(obs.hand, obs.incumbent, obs.active_level):
        raise IllegalCandidateError(f"{candidate.kind} {candidate.codes()} is not playable here")
    unseen = unseen_cards(obs, history)
    beating = [
        m for m in legal_moves(unseen, candidate, obs.active_level) if m.kind != PASS_KIND
    ]
    hypotheses = first_order(obs, history)
    out = []
    for seat in range(4):
        if seat == obs.seat:
            continue
        fits = [m for m in beating if len(m.cards) <= obs.hand_sizes[seat]]
        if not fits:
            out.append(ResponsePrediction(seat, MUST_PASS, 0, None))
            continue
        bombs = [m for m in fits if is_bomb_like(m)]
        cheap = [
            m for m in fits
            if not is_bomb_like(m) and not _excluded(seat, m, hypotheses, obs.active_level)
        ]
        if cheap:
            stance, pool = CAN_BEAT_CHEAPLY, cheap
        elif bombs:
            stance, pool = NEEDS_BOMB, bombs
        else:
            # every beat is ruled out only by defeasible reads; the
            # possibilistic cheap-beat claim stands
            stance, pool = CAN_BEAT_CHEAPLY, fits
        out.append(ResponsePrediction(seat, stance, len(fits), min(pool, key=_witness_key)))
    return tuple(out)


def analyze(
    obs: Observation,
    history: list[dict],
    order: int = 1,
    candidate: Combo | None = None,
) -> TomReport:
    """Build the full report for one commentated step.  Second-order
    entries appear only at order 2 with a non-pass candidate."""
    entries: tuple[SecondOrderEntry, ...] = ()
    if order >= 2 and candidate is not None and candidate.kind != PASS_KIND:
        entries = (SecondOrderEntry(candidate, second_order(obs, history, candidate)),)
    return TomReport(
        order=2 if order >= 2 else 1,
        first_order=first_order(obs, history),
        second_order=entries,
    )


def _hypothesis_sentence(h: Hypothesis, language: str) -> str:
    zh = language == "zh"
    if h.tag == NO_SINGLE_ABOVE:
        rank = RANKS[h.value]
        return (
            f"{h.seat}号在单张{rank}上过牌，手里可能没有比{rank}大的单张" if zh
            else f"seat {h.seat} passed on a single {rank}; likely no single above {rank}"
        )
    if h.tag == RANK_EXHAUSTED:
        rank = RANKS[h.value]
        return (
            f"{rank}已全部现身，任何人手里都不会再有" if zh
            else f"every copy of {rank} has been seen; none remain in any hand"
        )
    if h.tag == STRONG_HAND:
        return (
            f"{h.seat}号早早动用炸弹，手牌强势" if zh
            else f"seat {h.seat} spent a bomb early; a strong hand"
        )
    if h.tag == UNDER_PRESSURE:
        return (
            f"{h.seat}号已报牌（剩{h.value}张），开始冲刺" if zh
            else f"seat {h.seat} declared {h.value} cards; sprinting for the finish"
        )
    raise ValueError(f"unknown hypothesis tag {h.tag!r}")


def _stance_sentence(pred: ResponsePrediction, language: str) -> str:
    zh = language == "zh"
    if pred.stance == MUST_PASS:
        return f"{pred.seat}号：无牌可压，只能过" if zh else f"seat {pred.seat}: nothing beats it, must pass"
    phrase = combo_phrase(pred.witness.kind, pred.witness.cards, language)
    if pred.stance == CAN_BEAT_CHEAPLY:
        return (
            f"{pred.seat}号：有常规牌可压，例如{phrase}" if zh
            else f"seat {pred.seat}: can beat it cheaply, e.g. {phrase}"
        )
    return (
        f"{pred.seat}号：只能用炸弹压制，例如{phrase}" if zh
        else f"seat {pred.seat}: only a bomb answers, e.g. {phrase}"
    )


def render_tom_prompt(report: TomReport, language: str = "zh") -> str:
    zh = language == "zh"
    if report.empty():
        return NO_INFERENCES_SENTENCE[language]
    lines = [load_template(f"tom_{language}").rstrip("\n"), ""]
    if report.first_order:
        lines.append("一阶判断：" if zh else "First-order reads:")
        for h in sorted(report.first_order, key=lambda h: (h.seat, h.event)):
            lines.append(f"- {_hypothesis_sentence(h, language)}")
    for entry in report.second_order:
        phrase = combo_phrase(entry.candidate.kind, entry.candidate.cards, language)
        if lines[-1]:
            lines.append("")
        lines.append(f"二阶预测（若打出{phrase}）：" if zh else f"Second-order reads (if {phrase} is played):")
        for pred in sorted(entry.responses, key=lambda p: p.seat):
            lines.append(f"- {_stance_sentence(pred, language)}")
    return "\n".join(lines)
