"""Readable-text rendering of match state and guider prompt assembly.

First stage of the commentary pipeline: turns an engine Observation and
the replay record stream into deterministic natural-language text, and
assembles the rule / observation-format / history-format prompt that a
language model would answer.  All wording lives in ``templates/`` as
UTF-8 data files; ``{level}`` and ``{order}`` are the only placeholders
and are substituted literally, so template text may contain any other
braces unescaped.

Rendering is deterministic and injective on hand contents: identical
inputs give byte-identical text, distinct hands give distinct text.  It
never mentions another seat's cards except through public events.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .cards import (
    NATURAL_RANKS,
    RANKS,
    SUITS,
    card_code,
    card_rank,
    card_suit,
    is_joker,
    level_code,
    parse_code,
    effective_order,
)
from .engine import Observation

DEFAULT_LANGUAGE = "zh"
LANGUAGES = ("zh", "en")
DEFAULT_HISTORY_WINDOW = 20

RULE_SECTION_HEADINGS = {
    "zh": ("【总体规则】", "【非压制牌型】", "【压制牌型】", "【单局胜负】", "【整场胜负】"),
    "en": (
        "[General Rules]",
        "[Non-Beating Card Types]",
        "[Beating Card Types]",
        "[Single-Game Outcome]",
        "[Match Outcome]",
    ),
}

SUIT_NAMES = {
    "zh": {"C": "梅花", "D": "方块", "H": "红桃", "S": "黑桃"},
    "en": {"C": "clubs", "D": "diamonds", "H": "hearts", "S": "spades"},
}

JOKER_NAMES = {
    "zh": {"XJ": "小王", "BJ": "大王"},
    "en": {"XJ": "XJ", "BJ": "BJ"},
}

KIND_NAMES = {
    "zh": {
        "Single": "单张",
        "Pair": "对子",
        "Triple": "三同张",
        "FullHouse": "三带二",
        "Straight": "顺子",
        "Tube": "三连对",
        "Plate": "钢板",
        "Bomb": "炸弹",
        "StraightFlush": "同花顺",
        "FourJokers": "四大天王",
    },
    "en": {
        "Single": "single",
        "Pair": "pair",
        "Triple": "triple",
        "FullHouse": "full house",
        "Straight": "straight",
        "Tube": "tube",
        "Plate": "plate",
        "Bomb": "bomb",
        "StraightFlush": "straight flush",
        "FourJokers": "four jokers",
    },
}

PLACE_NAMES = {
    "zh": ("头游", "二游", "三游", "末游"),
    "en": ("first", "second", "third", "last"),
}

EMPTY_HISTORY_SENTENCE = {
    "zh": "尚未有人出牌。",
    "en": "No cards have been played yet.",
}


class TemplateError(ValueError):
    pass


def _check_language(language: str) -> None:
    if language not in LANGUAGES:
        raise TemplateError(f"unknown language: {language!r}")


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    """Raw template text by file stem, e.g. ``rules_zh``."""
    path = resources.files("guandan").joinpath("templates", f"{name}.txt")
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise TemplateError(f"no template named {name!r}") from None


def order_string(level: int) -> str:
    """Natural ranks from weakest to strongest at this level, e.g.
    "3, 4, 5, 6, 7, 8, 9, 10, J, Q, K, A, 2" while 2 is the level."""
    if level not in NATURAL_RANKS:
        raise ValueError(f"invalid level: {level!r}")
    ranks = sorted(NATURAL_RANKS, key=lambda r: effective_order(r, level))
    return ", ".join(RANKS[r] for r in ranks)


def build_rule_prompt(level: int, language: str = DEFAULT_LANGUAGE) -> str:
    _check_language(language)
    text = load_template(f"rules_{language}")
    text = text.replace("{level}", level_code(level))
    return text.replace("{order}", order_string(level)).rstrip("\n")


def card_name(card: int, language: str = DEFAULT_LANGUAGE) -> str:
    if is_joker(card):
        return JOKER_NAMES[language][RANKS[card_rank(card)]]
    if language == "zh":
        return SUIT_NAMES["zh"][SUITS[card_suit(card)]] + RANKS[card_rank(card)]
    return card_code(card)


def _hand_lines(hand: tuple[int, ...], language: str) -> list[str]:
    by_suit: dict[str, list[int]] = {s: [] for s in ("C", "D", "H", "S")}
    jokers: list[int] = []
    for card in sorted(hand, key=lambda c: (card_rank(c), c % 54)):
        if is_joker(card):
            jokers.append(card)
        else:
            by_suit[SUITS[card_suit(card)]].append(card)
    lines = []
    for suit in ("C", "D", "H", "S"):
        cards = by_suit[suit]
        if cards:
            ranks = " ".join(RANKS[card_rank(c)] for c in cards)
            lines.append(f"  {SUIT_NAMES[language][suit]}: {ranks}" if language == "en"
                         else f"  {SUIT_NAMES['zh'][suit]}：{ranks}")
    if jokers:
        names = " ".join(JOKER_NAMES[language][RANKS[card_rank(c)]] for c in jokers)
        lines.append(f"  jokers: {names}" if language == "en" else f"  王牌：{names}")
    return lines


def combo_phrase(kind: str, cards, language: str) -> str:
    """Accepts card ints or code strings; renders rank-major so straights
    read in order."""
    ints = [parse_code(c) if isinstance(c, str) else c for c in cards]
    ints.sort(key=lambda c: (card_rank(c), c % 54))
    names = [card_name(c, language) for c in ints]
    return f"{KIND_NAMES[language][kind]} {' '.join(names)}"


def render_observation(obs: Observation, language: str = DEFAULT_LANGUAGE) -> str:
    _check_language(language)
    zh = language == "zh"
    team_code = (level_code(obs.team_levels[0]), level_code(obs.team_levels[1]))
    declared = [
        (seat, obs.hand_sizes[seat])
        for seat in range(4)
        if obs.declared[seat] and obs.hand_sizes[seat] > 0
    ]
    finished = list(obs.finish_order)

    tribute_parts = []
    for kind, payer, receiver, card in obs.tribute_events:
        if kind == "AntiTribute":
            tribute_parts.append("抗贡" if zh else "tribute refused")
        elif kind == "Tribute":
            name = card_name(card, language)
            tribute_parts.append(
                f"{payer}号贡给{receiver}号{name}" if zh
                else f"seat {payer} pays {name} to seat {receiver}"
            )
        else:
            name = card_name(card, language)
            tribute_parts.append(
                f"{payer}号还给{receiver}号{name}" if zh
                else f"seat {payer} returns {name} to seat {receiver}"
            )

    if zh:
        lines = [
            f"观察席位：{obs.seat}号",
            f"级牌：{level_code(obs.active_level)}",
            f"队伍级别：0/2队打{team_code[0]}，1/3队打{team_code[1]}",
            f"手牌（{len(obs.hand)}张）：",
            *_hand_lines(obs.hand, language),
            "各家剩余：" + "，".join(f"{s}号{obs.hand_sizes[s]}张" for s in range(4)),
            "已报牌：" + ("，".join(f"{s}号剩{n}张" for s, n in declared) or "无"),
            "场上："
            + (
                f"{combo_phrase(obs.incumbent.kind, obs.incumbent.cards, language)}"
                f"（{obs.incumbent_seat}号出）"
                if obs.incumbent is not None
                else "无人出牌"
            ),
            "已出完："
            + ("，".join(f"{PLACE_NAMES['zh'][i]}{s}号" for i, s in enumerate(finished)) or "无"),
            "进贡：" + ("；".join(tribute_parts) or "无"),
        ]
    else:
        lines = [
            f"Seat: {obs.seat}",
            f"Level: {level_code(obs.active_level)}",
            f"Team levels: team 0/2 at {team_code[0]}, team 1/3 at {team_code[1]}",
            f"Hand ({len(obs.hand)} cards):",
            *_hand_lines(obs.hand, language),
            "Remaining: " + ", ".join(f"seat {s} holds {obs.hand_sizes[s]}" for s in range(4)),
            "Declared: " + (", ".join(f"seat {s} with {n} cards" for s, n in declared) or "none"),
            "Table: "
            + (
                f"{combo_phrase(obs.incumbent.kind, obs.incumbent.cards, language)}"
                f" (seat {obs.incumbent_seat})"
                if obs.incumbent is not None
                else "nothing on the table"
            ),
            "Finished: "
            + (
                ", ".join(f"seat {s} {PLACE_NAMES['en'][i]}" for i, s in enumerate(finished))
                or "none"
            ),
            "Tribute: " + ("; ".join(tribute_parts) or "none"),
        ]
    return "\n".join(lines)


def _history_line(record: dict, language: str) -> str | None:
    action = record["action"]
    kind = action["kind"]
    seat = record["seat"]
    zh = language == "zh"
    if kind == "Start":
        return None
    if kind == "AntiTribute":
        return "进贡方 → 抗贡" if zh else "paying side -> refuses tribute"
    if kind == "Pass":
        return f"{seat}号 → 过牌" if zh else f"seat {seat} -> pass"
    if kind == "Declare":
        count = action["count"]
        return (
            f"{seat}号 → 报牌（剩{count}张）" if zh
            else f"seat {seat} -> declares {count} cards"
        )
    if kind == "Tribute":
        name = card_name(parse_code(action["cards"][0]), language)
        return (
            f"{seat}号 → 进贡{name}给{action['to']}号" if zh
            else f"seat {seat} -> pays tribute {name} to seat {action['to']}"
        )
    if kind == "Return":
        name = card_name(parse_code(action["cards"][0]), language)
        return (
            f"{seat}号 → 还贡{name}给{action['to']}号" if zh
            else f"seat {seat} -> returns {name} to seat {action['to']}"
        )
    phrase = combo_phrase(kind, action["cards"], language)
    return f"{seat}号 → 出{phrase}" if zh else f"seat {seat} -> plays {phrase}"


def render_history(
    records: list[dict], window: int = DEFAULT_HISTORY_WINDOW, language: str = DEFAULT_LANGUAGE
) -> str:
    _check_language(language)
    if window < 1:
        raise ValueError(f"window must be at least 1, got {window}")
    lines = [line for r in records if (line := _history_line(r, language)) is not None]
    if not lines:
        return EMPTY_HISTORY_SENTENCE[language]
    return "\n".join(lines[-window:])


@dataclass(frozen=True)
class PromptBundle:
    rule_text: str
    observation_rule_text: str
    history_rule_text: str
    rendered_obs: str
    rendered_history: str
    language: str = DEFAULT_LANGUAGE


def build_bundle(
    obs: Observation,
    records: list[dict],
    language: str = DEFAULT_LANGUAGE,
    window: int = DEFAULT_HISTORY_WINDOW,
) -> PromptBundle:
    _check_language(language)
    return PromptBundle(
        rule_text=build_rule_prompt(obs.active_level, language),
        observation_rule_text=load_template(f"observation_rules_{language}").rstrip("\n"),
        history_rule_text=load_template(f"history_rules_{language}").rstrip("\n"),
        rendered_obs=render_observation(obs, language),
        rendered_history=render_history(records, window, language),
        language=language,
    )


def guider_prompt(bundle: PromptBundle) -> str:
    """Full stage-one prompt: rules, how to read the state, the state,
    how to read the history, the history, then the writing instruction."""
    parts = (
        bundle.rule_text,
        bundle.observation_rule_text,
        bundle.rendered_obs,
        bundle.history_rule_text,
        bundle.rendered_history,
        load_template(f"instruction_{bundle.language}").rstrip("\n"),
    )
    return "\n\n".join(parts) + "\n"


def guider_text(bundle: PromptBundle) -> str:
    """Deterministic stage-one output used in template mode: the rendered
    state followed by the rendered history."""
    return f"{bundle.rendered_obs}\n\n{bundle.rendered_history}"
