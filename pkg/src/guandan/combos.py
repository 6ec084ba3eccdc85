"""Combo classification, comparison, and legal-move enumeration.

A combo is a named tuple of (kind, rank, cards, wilds).  ``rank`` is the
key ``beats`` compares within a kind: the effective order of the defining
rank for single/pair/triple/full-house/bomb, and the natural position of
the top card (A low = 1 ... A high = 14) for the straight family, where
the level card keeps its face-value slot.  ``wilds`` records how each
heart-of-level card in ``cards`` is being read, as (card, identity) pairs
with identities in pack-local 0..51 form; a wild acting as itself is not
listed.

Enumeration is generator-per-kind rather than subset-driven so that
27-card hands stay cheap; ``classify`` reuses the same generators and
keeps only full-use readings, which makes the two agree by construction.
Readings that differ only in which card a wild impersonates collapse to
one canonical combo per (kind, rank, cards): wilds take the heart suit
where the suit does not matter, and the lowest wild fills the lowest
role or position when both are in play.
"""

from __future__ import annotations

from itertools import combinations, product
from typing import Iterator, NamedTuple

from .cards import (
    CLUBS,
    DECK_SIZE,
    HEARTS,
    card_code,
    card_rank,
    card_suit,
    effective_order,
    parse_code,
)

SINGLE = "Single"
PAIR = "Pair"
TRIPLE = "Triple"
FULL_HOUSE = "FullHouse"
STRAIGHT = "Straight"
TUBE = "Tube"
PLATE = "Plate"
BOMB = "Bomb"
STRAIGHT_FLUSH = "StraightFlush"
FOUR_JOKERS = "FourJokers"
PASS_KIND = "Pass"

BASIC_KINDS = (SINGLE, PAIR, TRIPLE, FULL_HOUSE, STRAIGHT, TUBE, PLATE)


class Combo(NamedTuple):
    kind: str
    rank: int
    cards: tuple[int, ...]
    wilds: tuple[tuple[int, int], ...]

    def codes(self) -> list[str]:
        # base order, so the two pack copies serialize identically
        return [card_code(c) for c in sorted(self.cards, key=lambda c: c % 54)]

    def wild_codes(self) -> list[list[str]]:
        return [[card_code(c), card_code(b)] for c, b in self.wilds]


PASS = Combo(PASS_KIND, 0, (), ())


class InvalidCardsError(ValueError):
    """Input is not a sub-multiset of the two-pack deck."""


def _pos_rank(pos: int) -> int:
    """Natural position 1..14 -> rank index (A sits at 1 and 14)."""
    return 12 if pos == 1 else pos - 2


def _tier(combo: Combo) -> tuple[int, int, int] | None:
    """Bomb-strength key, or None for basic kinds.

    Four jokers beat six-plus bombs beat straight flushes beat five-card
    bombs beat four-card bombs; within a band, more cards then higher rank.
    """
    kind = combo.kind
    if kind == BOMB:
        n = len(combo.cards)
        if n >= 6:
            return (4, n, combo.rank)
        if n == 5:
            return (2, 0, combo.rank)
        return (1, 0, combo.rank)
    if kind == STRAIGHT_FLUSH:
        return (3, 0, combo.rank)
    if kind == FOUR_JOKERS:
        return (5, 0, 0)
    return None


def is_bomb_like(combo: Combo) -> bool:
    """True for the kinds that beat across types: bombs, straight
    flushes, and four jokers."""
    return _tier(combo) is not None


def beats(challenger: Combo, incumbent: Combo) -> bool:
    """True when playing ``challenger`` over ``incumbent`` is a valid beat."""
    if challenger.kind == PASS_KIND or incumbent.kind == PASS_KIND:
        return False
    ct = _tier(challenger)
    it = _tier(incumbent)
    if ct is not None:
        return True if it is None else ct > it
    if it is not None:
        return False
    if challenger.kind != incumbent.kind:
        return False
    if len(challenger.cards) != len(incumbent.cards):
        return False
    return challenger.rank > incumbent.rank


def combo_sort_key(combo: Combo) -> tuple:
    """Total, deterministic order over combos; used for seeded sampling."""
    return (combo.kind, len(combo.cards), combo.rank, combo.cards, combo.wilds)


class _Hand:
    """Per-call view of a hand: naturals bucketed by rank, wilds aside."""

    __slots__ = ("by_rank", "wilds", "level")

    def __init__(self, cards, level: int):
        by_rank: list[list[int]] = [[] for _ in range(15)]
        wilds: list[int] = []
        wild_base = HEARTS * 13 + level
        for c in sorted(cards):
            if c % 54 == wild_base:
                wilds.append(c)
            else:
                by_rank[card_rank(c)].append(c)
        self.by_rank = by_rank
        self.wilds = wilds
        self.level = level


def _group_wilds(wild_cards, rank: int, level: int) -> tuple[tuple[int, int], ...]:
    """Canonical assignments for wilds completing a same-rank group."""
    if rank == level:
        return ()  # hearts of the level act as themselves
    base = HEARTS * 13 + rank
    return tuple((w, base) for w in wild_cards)


def _gen_singles(h: _Hand, min_rank: int = -1) -> Iterator[Combo]:
    level = h.level
    for r in range(15):
        e = effective_order(r, level)
        if e <= min_rank:
            continue
        for c in h.by_rank[r]:
            yield Combo(SINGLE, e, (c,), ())
    for w in h.wilds:
        for r in range(13):
            e = effective_order(r, level)
            if e > min_rank:
                yield Combo(SINGLE, e, (w,), _group_wilds((w,), r, level))


def _gen_pairs(h: _Hand, min_rank: int = -1) -> Iterator[Combo]:
    level = h.level
    wilds = h.wilds
    for r in range(15):
        e = effective_order(r, level)
        if e <= min_rank:
            continue
        cs = h.by_rank[r]
        for sel in combinations(cs, 2):
            yield Combo(PAIR, e, sel, ())
        if r < 13:
            for c in cs:
                for w in wilds:
                    cards = (c, w) if c < w else (w, c)
                    yield Combo(PAIR, e, cards, _group_wilds((w,), r, level))
    if len(wilds) == 2:
        pair = (wilds[0], wilds[1])
        for r in range(13):
            e = effective_order(r, level)
            if e > min_rank:
                yield Combo(PAIR, e, pair, _group_wilds(wilds, r, level))


def _gen_triples(h: _Hand, min_rank: int = -1) -> Iterator[Combo]:
    level = h.level
    wilds = h.wilds
    for r in range(15):
        e = effective_order(r, level)
        if e <= min_rank:
            continue
        cs = h.by_rank[r]
        for sel in combinations(cs, 3):
            yield Combo(TRIPLE, e, sel, ())
        if r >= 13 or not wilds:
            continue
        for sel in combinations(cs, 2):
            for w in wilds:
                yield Combo(TRIPLE, e, tuple(sorted(sel + (w,))), _group_wilds((w,), r, level))
        if len(wilds) == 2:
            for c in cs:
                yield Combo(TRIPLE, e, tuple(sorted((c,) + tuple(wilds))), _group_wilds(wilds, r, level))


def _gen_bombs(h: _Hand, sizes=None) -> Iterator[Combo]:
    level = h.level
    wilds = h.wilds
    nw = len(wilds)
    for r in range(13):
        cs = h.by_rank[r]
        have = len(cs) + nw
        if have < 4:
            continue
        e = effective_order(r, level)
        for n in range(4, have + 1):
            if sizes is not None and n not in sizes:
                continue
            for k in range(max(0, n - len(cs)), min(nw, n) + 1):
                for wsel in combinations(wilds, k):
                    asg = _group_wilds(wsel, r, level)
                    for sel in combinations(cs, n - k):
                        yield Combo(BOMB, e, tuple(sorted(sel + wsel)), asg)


def _gen_four_jokers(h: _Hand) -> Iterator[Combo]:
    sj = h.by_rank[13]
    bj = h.by_rank[14]
    if len(sj) == 2 and len(bj) == 2:
        yield Combo(FOUR_JOKERS, 15, tuple(sorted(sj + bj)), ())


def _gen_full_houses(h: _Hand, min_rank: int = -1) -> Iterator[Combo]:
    level = h.level
    wilds = h.wilds
    nw = len(wilds)
    by_rank = h.by_rank
    for t in range(13):
        cs_t = by_rank[t]
        if not cs_t:
            continue
        e = effective_order(t, level)
        if e <= min_rank:
            continue
        for i in range(max(1, 3 - nw), min(3, len(cs_t)) + 1):
            wt = 3 - i
            for tsel in combinations(cs_t, i):
                for p in range(15):
                    if p == t:
                        continue
                    cs_p = by_rank[p]
                    for k in (1, 2):
                        if k > len(cs_p):
                            continue
                        wp = 2 - k
                        if wt + wp > nw or (p >= 13 and wp):
                            continue
                        for psel in combinations(cs_p, k):
                            for used in combinations(wilds, wt + wp):
                                asg = _group_wilds(used[:wt], t, level) + _group_wilds(used[wt:], p, level)
                                cards = tuple(sorted(tsel + psel + used))
                                yield Combo(FULL_HOUSE, e, cards, asg)
                # pair made of two wilds: the pair rank is a free choice,
                # so emit one canonical reading only
                if wt == 0 and nw >= 2:
                    p = 1 if t == 0 else 0
                    used = tuple(wilds[:2])
                    asg = _group_wilds(used, p, level)
                    yield Combo(FULL_HOUSE, e, tuple(sorted(tsel + used)), asg)


def _straight_wild_suit(common_suit: int | None) -> int:
    """Suit a wild takes in a plain-straight reading: hearts, unless the
    naturals are all hearts (that would read as a flush again)."""
    return CLUBS if common_suit == HEARTS else HEARTS


def _gen_straights(h: _Hand, want_plain=True, want_flush=True, min_top: int = 0) -> Iterator[Combo]:
    level = h.level
    wilds = h.wilds
    nw = len(wilds)
    by_rank = h.by_rank
    for start in range(1, 11):
        top = start + 4
        if top <= min_top:
            continue
        ranks_w = [_pos_rank(p) for p in range(start, start + 5)]
        opts = [by_rank[r] for r in ranks_w]
        for f in range(nw + 1):
            for wild_idx in combinations(range(5), f):
                nat_idx = [i for i in range(5) if i not in wild_idx]
                if any(not opts[i] for i in nat_idx):
                    continue
                for used in combinations(wilds, f):
                    for nat_sel in product(*(opts[i] for i in nat_idx)):
                        suits = {card_suit(c) for c in nat_sel}
                        cards = tuple(sorted(nat_sel + used))
                        if len(suits) == 1:
                            s = next(iter(suits))
                            if want_flush:
                                asg = tuple(
                                    (used[j], s * 13 + ranks_w[i])
                                    for j, i in enumerate(wild_idx)
                                    if not (s == HEARTS and ranks_w[i] == level)
                                )
                                yield Combo(STRAIGHT_FLUSH, top, cards, asg)
                            if want_plain and f:
                                t = _straight_wild_suit(s)
                                asg = tuple(
                                    (used[j], t * 13 + ranks_w[i])
                                    for j, i in enumerate(wild_idx)
                                    if not (t == HEARTS and ranks_w[i] == level)
                                )
                                yield Combo(STRAIGHT, top, cards, asg)
                        elif want_plain:
                            asg = tuple(
                                (used[j], HEARTS * 13 + ranks_w[i])
                                for j, i in enumerate(wild_idx)
                                if ranks_w[i] != level
                            )
                            yield Combo(STRAIGHT, top, cards, asg)


def _gen_tubes(h: _Hand, min_top: int = 0) -> Iterator[Combo]:
    level = h.level
    wilds = h.wilds
    nw = len(wilds)
    by_rank = h.by_rank
    for start in range(1, 13):
        top = start + 2
        if top <= min_top:
            continue
        ranks_w = [_pos_rank(p) for p in (start, start + 1, start + 2)]
        opts = [by_rank[r] for r in ranks_w]
        for fills in product((0, 1, 2), repeat=3):
            need = sum(fills)
            if need > nw:
                continue
            if any(len(opts[i]) < 2 - fills[i] for i in range(3)):
                continue
            for used in combinations(wilds, need):
                asg = []
                j = 0
                for i in range(3):
                    asg.extend(_group_wilds(used[j:j + fills[i]], ranks_w[i], level))
                    j += fills[i]
                asg_t = tuple(asg)
                for s0 in combinations(opts[0], 2 - fills[0]):
                    for s1 in combinations(opts[1], 2 - fills[1]):
                        for s2 in combinations(opts[2], 2 - fills[2]):
                            cards = tuple(sorted(s0 + s1 + s2 + used))
                            yield Combo(TUBE, top, cards, asg_t)


def _gen_plates(h: _Hand, min_top: int = 0) -> Iterator[Combo]:
    level = h.level
    wilds = h.wilds
    nw = len(wilds)
    by_rank = h.by_rank
    for start in range(1, 14):
        top = start + 1
        if top <= min_top:
            continue
        ranks_w = [_pos_rank(start), _pos_rank(start + 1)]
        opts = [by_rank[r] for r in ranks_w]
        for fills in product((0, 1, 2), repeat=2):
            need = sum(fills)
            if need > nw:
                continue
            if any(len(opts[i]) < 3 - fills[i] for i in range(2)):
                continue
            for used in combinations(wilds, need):
                asg = tuple(
                    _group_wilds(used[:fills[0]], ranks_w[0], level)
                    + _group_wilds(used[fills[0]:], ranks_w[1], level)
                )
                for s0 in combinations(opts[0], 3 - fills[0]):
                    for s1 in combinations(opts[1], 3 - fills[1]):
                        cards = tuple(sorted(s0 + s1 + used))
                        yield Combo(PLATE, top, cards, asg)


def _dedup(out: list[Combo], seen: set[Combo], gen) -> None:
    add = out.append
    for combo in gen:
        if combo not in seen:
            seen.add(combo)
            add(combo)


def enumerate_combos(cards, level: int, sizes=None) -> list[Combo]:
    """Every combo playable from some sub-multiset of ``cards``.

    ``sizes`` restricts output to combos of those card counts; None means
    all.  Pass is never included.  The result has no duplicates and its
    order is a pure function of the hand, so callers may sample it.
    """
    h = _Hand(cards, level)
    out: list[Combo] = []
    seen: set[Combo] = set()
    if sizes is None or 1 in sizes:
        _dedup(out, seen, _gen_singles(h))
    if sizes is None or 2 in sizes:
        _dedup(out, seen, _gen_pairs(h))
    if sizes is None or 3 in sizes:
        _dedup(out, seen, _gen_triples(h))
    if sizes is None or 4 in sizes:
        _dedup(out, seen, _gen_four_jokers(h))
    if sizes is None or 5 in sizes:
        _dedup(out, seen, _gen_full_houses(h))
        _dedup(out, seen, _gen_straights(h))
    if sizes is None or 6 in sizes:
        _dedup(out, seen, _gen_tubes(h))
        _dedup(out, seen, _gen_plates(h))
    _dedup(out, seen, _gen_bombs(h, sizes))
    return out


def _check_cards(cards) -> list[int]:
    out = list(cards)
    if not 1 <= len(out) <= DECK_SIZE:
        raise InvalidCardsError(f"expected 1..{DECK_SIZE} cards, got {len(out)}")
    seen = set()
    for c in out:
        if not isinstance(c, int) or not 0 <= c < DECK_SIZE:
            raise InvalidCardsError(f"not a card: {c!r}")
        if c in seen:
            raise InvalidCardsError(f"card repeated: {card_code(c)}")
        seen.add(c)
    return out


def classify(cards, level: int) -> set[Combo]:
    """All readings of exactly these cards; empty set if they form nothing."""
    checked = _check_cards(cards)
    n = len(checked)
    if n > 10:  # largest combo: eight naturals plus both wilds
        return set()
    return {c for c in enumerate_combos(checked, level, sizes={n}) if len(c.cards) == n}


def resolve(kind: str, codes, wild_codes, hand, level: int) -> Combo:
    """Rebuild a combo from its serialized form against an actual hand.

    Card codes do not distinguish the two pack copies, so each code is
    bound to the lowest matching card still unclaimed in ``hand``; that is
    also the copy enumeration prefers, keeping round trips stable.
    """
    if kind == PASS_KIND:
        return PASS
    hand_left = sorted(hand)
    picked = []
    for code in codes:
        base = parse_code(code)
        for card in hand_left:
            if card % 54 == base:
                picked.append(card)
                hand_left.remove(card)
                break
        else:
            raise InvalidCardsError(f"{code} is not available in this hand")
    wilds = []
    for wild_code, identity_code in wild_codes:
        base = parse_code(wild_code)
        owned = [c for c in picked if c % 54 == base and all(c != w for w, _ in wilds)]
        if not owned:
            raise InvalidCardsError(f"wild {wild_code} is not among the cards")
        wilds.append((min(owned), parse_code(identity_code)))
    candidate = Combo(kind, 0, tuple(sorted(picked)), tuple(wilds))
    for reading in classify(candidate.cards, level):
        if reading.kind == kind and reading.wilds == candidate.wilds:
            return reading
    raise InvalidCardsError(f"cards {list(codes)} do not form a {kind}")


def _gen_beating(h: _Hand, incumbent: Combo) -> Iterator[Combo]:
    inc_tier = _tier(incumbent)
    if inc_tier is None:
        kind = incumbent.kind
        r = incumbent.rank
        if kind == SINGLE:
            yield from _gen_singles(h, r)
        elif kind == PAIR:
            yield from _gen_pairs(h, r)
        elif kind == TRIPLE:
            yield from _gen_triples(h, r)
        elif kind == FULL_HOUSE:
            yield from _gen_full_houses(h, r)
        elif kind == STRAIGHT:
            yield from _gen_straights(h, want_flush=False, min_top=r)
        elif kind == TUBE:
            yield from _gen_tubes(h, r)
        elif kind == PLATE:
            yield from _gen_plates(h, r)
        yield from _gen_bombs(h)
        yield from _gen_straights(h, want_plain=False)
        yield from _gen_four_jokers(h)
    else:
        for combo in _gen_bombs(h):
            if _tier(combo) > inc_tier:
                yield combo
        if inc_tier < (3, 0, 0):
            yield from _gen_straights(h, want_plain=False)
        elif inc_tier[0] == 3:
            yield from _gen_straights(h, want_plain=False, min_top=incumbent.rank)
        if inc_tier < (5, 0, 0):
            yield from _gen_four_jokers(h)


def legal_moves(hand, incumbent: Combo | None, level: int) -> list[Combo]:
    """Moves available to a seat: every playable combo when leading, or
    Pass plus every beating combo when following.  Duplicate-free, in an
    order that is a pure function of the inputs."""
    checked = _check_cards(hand)
    if incumbent is None or incumbent.kind == PASS_KIND:
        return enumerate_combos(checked, level)
    h = _Hand(checked, level)
    out = [PASS]
    _dedup(out, {PASS}, _gen_beating(h, incumbent))
    return out
