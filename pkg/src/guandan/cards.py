"""Card primitives for the two-deck Guandan card set.

A card is a plain int in 0..107.  The deck holds two identical 54-card
packs; ``card // 54`` tells the pack a card came from, ``card % 54`` is
its identity within a pack: 0..51 are suit * 13 + rank, 52 is the small
joker and 53 the big joker.  Keeping cards as ints keeps hands hashable
and cheap to copy, which the move enumerator leans on heavily.
"""

from __future__ import annotations

SUITS = ("C", "D", "H", "S")
CLUBS, DIAMONDS, HEARTS, SPADES = range(4)

RANKS = ("2", "3", "4", "5", "6", "7", "8", "9", "10", "J", "Q", "K", "A", "XJ", "BJ")
SMALL_JOKER = 13
BIG_JOKER = 14
NATURAL_RANKS = range(13)  # "2".."A"

# Rank of the level (trump) card sits above A; jokers above that.
LEVEL_ORDER = 12
SMALL_JOKER_ORDER = 13
BIG_JOKER_ORDER = 14

_SJ_BASE = 52
_BJ_BASE = 53
DECK_SIZE = 108


def make_card(suit: int, rank: int, copy: int = 0) -> int:
    if rank == SMALL_JOKER:
        return copy * 54 + _SJ_BASE
    if rank == BIG_JOKER:
        return copy * 54 + _BJ_BASE
    return copy * 54 + suit * 13 + rank


def card_copy(card: int) -> int:
    return card // 54


def card_base(card: int) -> int:
    """Identity within a pack (0..53); equal for the two copies of a card."""
    return card % 54


def card_rank(card: int) -> int:
    base = card % 54
    if base >= _SJ_BASE:
        return SMALL_JOKER + (base - _SJ_BASE)
    return base % 13


def card_suit(card: int) -> int | None:
    """Suit index, or None for jokers."""
    base = card % 54
    if base >= _SJ_BASE:
        return None
    return base // 13


def is_joker(card: int) -> bool:
    return card % 54 >= _SJ_BASE


def full_deck() -> tuple[int, ...]:
    return tuple(range(DECK_SIZE))


def card_code(card: int) -> str:
    """Text code: suit letter + rank ("H7", "S10", "SJ" the spade jack).

    Jokers use "XJ" (small) and "BJ" (big); X and B are outside the suit
    alphabet, which keeps every code unambiguous.
    """
    base = card % 54
    if base == _SJ_BASE:
        return "XJ"
    if base == _BJ_BASE:
        return "BJ"
    return SUITS[base // 13] + RANKS[base % 13]


def base_code(base: int) -> str:
    """Text code for a pack-local identity (0..53)."""
    return card_code(base)


def parse_code(code: str) -> int:
    """Card code -> pack-local identity (0..53).  Raises ValueError."""
    if code == "XJ":
        return _SJ_BASE
    if code == "BJ":
        return _BJ_BASE
    if len(code) >= 2 and code[0] in SUITS:
        try:
            rank = RANKS.index(code[1:])
        except ValueError:
            raise ValueError(f"bad card code: {code!r}") from None
        if rank < SMALL_JOKER:
            return SUITS.index(code[0]) * 13 + rank
    raise ValueError(f"bad card code: {code!r}")


def codes_to_cards(codes: list[str]) -> list[int]:
    """Map codes to concrete cards, assigning pack copies in order of
    appearance.  A third occurrence of the same code is an error."""
    seen: dict[int, int] = {}
    cards = []
    for code in codes:
        base = parse_code(code)
        copy = seen.get(base, 0)
        if copy > 1:
            raise ValueError(f"more than two copies of {code}")
        seen[base] = copy + 1
        cards.append(base + copy * 54)
    return cards


def parse_level(text: str) -> int:
    """Level rank from its text form ("2".."A").  Jokers are not levels."""
    try:
        rank = RANKS.index(text)
    except ValueError:
        rank = SMALL_JOKER
    if rank >= SMALL_JOKER:
        raise ValueError(f"bad level: {text!r}")
    return rank


def level_code(level: int) -> str:
    return RANKS[level]


def effective_order(rank: int, level: int) -> int:
    """Strength ordinal of a rank at the given level.

    The twelve natural ranks other than the level keep their natural
    order in 0..11, the level rank is 12, the jokers 13 and 14.
    """
    if rank >= SMALL_JOKER:
        return rank
    if rank == level:
        return LEVEL_ORDER
    return rank - 1 if rank > level else rank


def is_wild(card: int, level: int) -> bool:
    """Hearts of the level rank act as any card other than a joker."""
    return card % 54 == HEARTS * 13 + level


def wild_base(level: int) -> int:
    return HEARTS * 13 + level


def card_order_string(level: int) -> str:
    """Ranks from weakest to strongest at this level, space separated,
    jokers omitted (they always sit on top)."""
    order = [RANKS[r] for r in NATURAL_RANKS if r != level]
    order.append(RANKS[level])
    return " ".join(order)
