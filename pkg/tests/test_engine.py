"""Match state machine: deals, tricks, levels, tribulation, tribute."""

import random

import pytest

from guandan.cards import card_code, full_deck, parse_level
from guandan.combos import PASS, Combo, classify
from guandan.engine import (
    LEVEL_A,
    MATCH_OVER,
    PLAYING,
    ROUND_OVER,
    TRIBUTE,
    IllegalMoveError,
    InvalidChoiceError,
    InvalidReturnError,
    MatchState,
    NotYourTurnError,
    RoundOutcome,
    TributeChoices,
    WrongPhaseError,
    advance_level,
    apply,
    digest_hex,
    fnv1a_64,
    legal_actions,
    new_match,
    next_game,
    observe,
    resolve_tribute,
    round_outcome,
    state_digest,
    tribute_obligations,
)

from conftest import cards


def play(state, seat, text, level=None):
    """Apply the unique classification of the coded cards for ``seat``."""
    lvl = state.active_level if level is None else level
    hand_cards = _from_hand(state.hands[seat], text)
    readings = classify(hand_cards, lvl)
    assert readings, f"{text} is not playable"
    combo = sorted(readings)[0]
    return apply(state, seat, combo)


def _from_hand(hand, text):
    """Resolve codes against a specific hand so copies line up."""
    pool = list(hand)
    out = []
    for code in text.split():
        match = next(c for c in pool if card_code(c) == code)
        out.append(match)
        pool.remove(match)
    return out


def playing_state(hand_texts, turn=0, level=0, **extra):
    """A mid-game Playing state with crafted hands."""
    state = MatchState(seed=0, rng=random.Random(0))
    state.game = 1
    state.hands = [sorted(cards(t)) if t else [] for t in hand_texts]
    state.done = [not h for h in state.hands]
    state.phase = PLAYING
    state.turn = turn
    state.active_level = level
    state.records = []
    for key, value in extra.items():
        setattr(state, key, value)
    return state


def round_over_state(finish, lead_team=None, levels=(0, 0), attempts=(0, 0)):
    state = MatchState(seed=0, rng=random.Random(0))
    state.game = 1
    state.hands = [[], [], [], []]
    state.phase = ROUND_OVER
    state.finish_order = list(finish)
    state.lead_team = lead_team
    state.team_levels = list(levels)
    state.a_attempts = list(attempts)
    if lead_team is not None:
        state.active_level = state.team_levels[lead_team]
    state.records = []
    return state


def tribute_state(prev_finish, hand_texts, level=0, mode="standard"):
    """A Tribute-phase state with crafted 4-seat hands."""
    state = MatchState(seed=0, rng=random.Random(0), tribute_mode=mode)
    state.game = 2
    state.prev_finish = tuple(prev_finish)
    state.hands = [sorted(cards(t)) for t in hand_texts]
    state.done = [False] * 4
    state.phase = TRIBUTE
    state.active_level = level
    state.records = []
    state.tribute_pending = tribute_obligations(state)
    return state


# --- dealing ---------------------------------------------------------------


def test_deal_conserves_the_deck():
    state = new_match(17)
    assert [len(h) for h in state.hands] == [27, 27, 27, 27]
    assert sorted(c for h in state.hands for c in h) == sorted(full_deck())


def test_same_seed_deals_identically():
    a = new_match(99)
    b = new_match(99)
    assert a.hands == b.hands
    assert a.turn == b.turn
    assert digest_hex(a) == digest_hex(b)


def test_match_starts_at_level_two():
    state = new_match(3)
    assert state.team_levels == [parse_level("2"), parse_level("2")]
    assert state.a_attempts == [0, 0]
    assert state.active_level == parse_level("2")
    assert state.lead_team is None


def test_different_seeds_usually_differ():
    assert new_match(1).hands != new_match(2).hands


# --- trick flow ------------------------------------------------------------


def test_leader_may_not_pass():
    state = playing_state(["S5 S6", "S7", "S8", "S9"], turn=0)
    assert PASS not in legal_actions(state, 0)
    with pytest.raises(IllegalMoveError):
        apply(state, 0, PASS)


def test_turn_is_enforced():
    state = playing_state(["S5", "S7", "S8", "S9"], turn=0)
    with pytest.raises(NotYourTurnError):
        legal_actions(state, 1)
    with pytest.raises(NotYourTurnError):
        play(state, 2, "S8")


def test_wrong_phase_is_rejected():
    state = round_over_state([0, 2, 1, 3])
    with pytest.raises(WrongPhaseError):
        legal_actions(state, 0)
    with pytest.raises(WrongPhaseError):
        apply(state, 0, PASS)


def test_three_passes_return_the_lead():
    state = playing_state(["S5 S9", "S6 S6", "S7 S7", "S8 S8"], turn=0)
    play(state, 0, "S5")
    for seat in (1, 2, 3):
        apply(state, seat, PASS)
    assert state.turn == 0
    assert state.incumbent is None
    assert state.passes == 0


def test_follower_keeps_trick_open():
    state = playing_state(["S3 S5 S9", "S6 S6", "S7 S4", "S8 S8"], turn=0)
    play(state, 0, "S5")
    play(state, 1, "S6")
    apply(state, 2, PASS)
    apply(state, 3, PASS)
    # seat 0 may still beat seat 1's single
    assert state.turn == 0
    assert state.incumbent is not None
    play(state, 0, "S9")
    for seat in (1, 2, 3):
        apply(state, seat, PASS)
    assert state.turn == 0
    assert state.incumbent is None


def test_finished_seats_are_skipped():
    state = playing_state(["S5 S9", "S6", "S7 S3", "S8 S8"], turn=1)
    play(state, 1, "S6")  # seat 1 finishes
    assert state.finish_order == [1]
    play(state, 2, "S7")
    play(state, 3, "S8")
    play(state, 0, "S9")
    apply(state, 2, PASS)
    apply(state, 3, PASS)  # two passes close it: seat 1 is out
    assert state.turn == 0


def test_round_ends_when_third_finishes():
    state = playing_state(["S5", "S6", "S7", "S8 S8"], turn=0)
    play(state, 0, "S5")
    play(state, 1, "S6")
    play(state, 2, "S7")
    assert state.phase == ROUND_OVER
    assert state.finish_order == [0, 1, 2, 3]


def test_jiefeng_partner_takes_the_lead():
    state = playing_state(["S9", "S6 S6", "S7 S3", "S8 S8"], turn=0)
    play(state, 0, "S9")  # wins the trick and empties the hand
    for seat in (1, 2, 3):
        apply(state, seat, PASS)
    assert state.turn == 2  # partner of seat 0


def test_jiefeng_falls_to_next_active_when_partner_is_out():
    state = playing_state(["S9", "S6 S6", "", "S8 S8"], turn=0)
    state.finish_order = [2]
    play(state, 0, "S9")
    apply(state, 1, PASS)
    apply(state, 3, PASS)
    assert state.turn == 1


def test_declaration_fires_once_at_ten_or_fewer():
    state = playing_state(
        ["S3 S4 S5 S6 S7 S8 S9 S10 SJ SQ SK", "H3 H3", "H4 H4", "H5 H5"],
        turn=0,
    )
    play(state, 0, "S3 S4 S5 S6 S7")  # 11 -> 6
    declares = [r for r in state.records if r["action"]["kind"] == "Declare"]
    assert len(declares) == 1
    assert declares[0]["action"]["count"] == 6
    assert declares[0]["seat"] == 0
    for seat in (1, 2, 3):
        apply(state, seat, PASS)
    play(state, 0, "S8")  # 6 -> 5, no second declaration
    declares = [r for r in state.records if r["action"]["kind"] == "Declare"]
    assert len(declares) == 1


def test_illegal_follow_is_rejected():
    state = playing_state(["SA S3", "S6 S4", "S7 S7", "S8 S8"], turn=0)
    play(state, 0, "SA")
    weak = sorted(classify(_from_hand(state.hands[1], "S4"), 0))[0]
    with pytest.raises(IllegalMoveError):
        apply(state, 1, weak)


def test_cannot_play_cards_outside_the_hand():
    state = playing_state(["S5 S9", "S6 S6", "S7 S7", "S8 S8"], turn=0)
    foreign = sorted(classify(cards("HA"), 0))[0]
    with pytest.raises(IllegalMoveError):
        apply(state, 0, foreign)


# --- outcomes and levels ---------------------------------------------------


def test_partner_second_upgrades_three():
    out = round_outcome(round_over_state([0, 2, 1, 3]))
    assert out == RoundOutcome(0, 3, True, (0, 2, 1, 3))


def test_partner_third_upgrades_two():
    out = round_outcome(round_over_state([0, 1, 2, 3]))
    assert out.winning_team == 0
    assert out.upgrade == 2
    assert not out.best_victory


def test_partner_fourth_upgrades_one():
    out = round_outcome(round_over_state([0, 1, 3, 2]))
    assert out.upgrade == 1
    assert not out.best_victory


def test_upgrade_moves_two_to_five():
    state = round_over_state([0, 2, 1, 3])
    advance_level(state, round_outcome(state))
    assert state.team_levels[0] == parse_level("5")
    assert state.lead_team == 0
    assert state.active_level == parse_level("5")


def test_upgrade_caps_at_ace():
    state = round_over_state([1, 3, 0, 2], levels=(0, parse_level("Q")))
    advance_level(state, round_outcome(state))
    assert state.team_levels[1] == LEVEL_A


def test_best_victory_at_own_ace_wins_the_match():
    state = round_over_state([0, 2, 1, 3], lead_team=0, levels=(LEVEL_A, 5))
    advance_level(state, round_outcome(state))
    assert state.phase == MATCH_OVER
    assert state.match_winner == 0


def test_ace_win_without_best_victory_burns_an_attempt():
    state = round_over_state([0, 1, 2, 3], lead_team=0, levels=(LEVEL_A, 5))
    advance_level(state, round_outcome(state))
    assert state.phase == ROUND_OVER
    assert state.team_levels[0] == LEVEL_A
    assert state.a_attempts[0] == 1
    assert state.lead_team == 0


def test_ace_loss_burns_an_attempt():
    state = round_over_state([1, 0, 3, 2], lead_team=0, levels=(LEVEL_A, 5))
    advance_level(state, round_outcome(state))
    assert state.a_attempts[0] == 1
    assert state.lead_team == 1
    assert state.active_level == state.team_levels[1]


def test_third_failed_attempt_resets_to_two():
    state = round_over_state(
        [1, 0, 3, 2], lead_team=0, levels=(LEVEL_A, 5), attempts=(2, 0)
    )
    advance_level(state, round_outcome(state))
    assert state.team_levels[0] == parse_level("2")
    assert state.a_attempts[0] == 0


def test_opponents_ace_does_not_burn_attempts():
    # team 1 sits at A but the game was played at team 0's level
    state = round_over_state([0, 2, 1, 3], lead_team=0, levels=(5, LEVEL_A))
    advance_level(state, round_outcome(state))
    assert state.a_attempts == [0, 0]
    assert state.phase == ROUND_OVER


def test_best_victory_at_ace_needs_the_lead():
    # team 1 at A wins best victory, but team 0's level was active
    state = round_over_state([1, 3, 0, 2], lead_team=0, levels=(5, LEVEL_A))
    advance_level(state, round_outcome(state))
    assert state.phase == ROUND_OVER
    assert state.lead_team == 1
    assert state.active_level == LEVEL_A  # now their A is live


def test_advance_level_runs_once():
    state = round_over_state([0, 2, 1, 3])
    out = round_outcome(state)
    advance_level(state, out)
    with pytest.raises(WrongPhaseError):
        advance_level(state, out)


# --- digest ----------------------------------------------------------------


def test_fnv_reference_vectors():
    # published FNV-1a 64-bit reference values
    assert fnv1a_64(b"") == 0xCBF29CE484222325
    assert fnv1a_64(b"a") == 0xAF63DC4C8601EC8C
    assert fnv1a_64(b"foobar") == 0x85944171F73967E8


def test_digest_sees_hand_changes():
    a = new_match(5)
    b = new_match(5)
    b.hands[0][0] = next(c for c in full_deck() if c not in b.hands[0])
    assert state_digest(a) != state_digest(b)


def test_digest_ignores_pack_copies():
    a = new_match(5)
    b = new_match(5)
    card = b.hands[0][0]
    twin = (card + 54) % 108
    if twin not in b.hands[0]:
        b.hands[0][b.hands[0].index(card)] = twin
        assert state_digest(a) == state_digest(b)


def test_digest_sees_level_changes():
    a = new_match(5)
    b = new_match(5)
    b.team_levels[1] = 4
    assert state_digest(a) != state_digest(b)


# --- tribute ---------------------------------------------------------------



def test_single_down_fourth_pays_first():
    state = tribute_state(
        [0, 1, 2, 3],
        ["H3 H4", "H5 H6", "H7 H8", "D2 SA S9"],
        level=0,
    )
    assert state.tribute_pending == ((3, cards("D2")[0]),)
    resolve_tribute(state)
    # trump two outranks the ace at level 2
    assert cards("D2")[0] in state.hands[0]
    assert state.turn == 3  # payer leads


def test_tribute_excludes_heart_trump():
    state = tribute_state(
        [0, 1, 2, 3],
        ["H3 H4", "H5 H6", "H7 H8", "H2 SA S9"],
        level=0,
    )
    ((payer, card),) = state.tribute_pending
    assert card_code(card) == "SA"


def test_tribute_excludes_jokers():
    state = tribute_state(
        [0, 1, 2, 3],
        ["H3 H4", "H5 H6", "H7 H8", "BJ XJ SK S9"],
        level=0,
    )
    ((payer, card),) = state.tribute_pending
    assert card_code(card) == "SK"


def test_double_down_both_pay():
    state = tribute_state(
        [0, 2, 1, 3],
        ["H3 H4", "SQ S5 S4", "H7 H8", "SK S6 S3"],
        level=0,
    )
    assert dict(state.tribute_pending) == {
        1: cards("SQ")[0],
        3: cards("SK")[0],
    }
    resolve_tribute(state)
    # first finisher takes the higher tribute by default; its payer leads
    assert cards("SK")[0] in state.hands[0]
    assert cards("SQ")[0] in state.hands[2]
    assert state.turn == 3


def test_double_down_explicit_pick():
    state = tribute_state(
        [0, 2, 1, 3],
        ["H3 H4", "SQ S5 S4", "H7 H8", "SK S6 S3"],
        level=0,
    )
    resolve_tribute(state, TributeChoices(pick=cards("SQ")[0]))
    assert cards("SQ")[0] in state.hands[0]
    assert cards("SK")[0] in state.hands[2]
    assert state.turn == 1


def test_invalid_pick_is_rejected():
    state = tribute_state(
        [0, 2, 1, 3],
        ["H3 H4", "SQ S5 S4", "H7 H8", "SK S6 S3"],
        level=0,
    )
    with pytest.raises(InvalidChoiceError):
        resolve_tribute(state, TributeChoices(pick=cards("S3")[0]))


def test_anti_tribute_with_both_jokers():
    state = tribute_state(
        [0, 1, 2, 3],
        ["H3 H4", "H5 H6", "H7 H8", "BJ BJ SK"],
        level=0,
    )
    before = [list(h) for h in state.hands]
    resolve_tribute(state)
    assert state.hands == before
    assert state.turn == 0  # previous winner leads
    assert any(r["action"]["kind"] == "AntiTribute" for r in state.records)


def test_anti_tribute_split_across_double_down():
    state = tribute_state(
        [0, 2, 1, 3],
        ["H3 H4", "BJ S5 S4", "H7 H8", "BJ S6 S3"],
        level=0,
    )
    before = [list(h) for h in state.hands]
    resolve_tribute(state)
    assert state.hands == before
    assert state.turn == 0


def test_one_big_joker_is_not_enough():
    state = tribute_state(
        [0, 1, 2, 3],
        ["H3 H4", "H5 H6", "H7 H8", "BJ SK S9"],
        level=0,
    )
    resolve_tribute(state)
    assert cards("SK")[0] in state.hands[0]


def test_return_must_be_ten_or_lower():
    state = tribute_state(
        [0, 1, 2, 3],
        ["S5 SJ SQ", "H5 H6", "H7 H8", "D2 SA S9"],
        level=0,
    )
    with pytest.raises(InvalidReturnError):
        resolve_tribute(state, TributeChoices(returns={0: cards("SJ")[0]}))


def test_default_return_is_smallest_low_card():
    state = tribute_state(
        [0, 1, 2, 3],
        ["S5 S3 SQ", "H5 H6", "H7 H8", "D2 SA S9"],
        level=0,
    )
    resolve_tribute(state)
    assert cards("S3")[0] in state.hands[3]
    assert len(state.hands[0]) == 3
    assert len(state.hands[3]) == 3


def test_return_when_all_high_gives_the_smallest():
    # the incoming ace keeps the receiver's hand all above ten
    state = tribute_state(
        [0, 1, 2, 3],
        ["SJ SQ SK", "H5 H6", "H7 H8", "DA DK S9"],
        level=0,
    )
    resolve_tribute(state)
    assert cards("SJ")[0] in state.hands[3]


def test_return_when_all_high_rejects_larger():
    state = tribute_state(
        [0, 1, 2, 3],
        ["SJ SQ SK", "H5 H6", "H7 H8", "DA DK S9"],
        level=0,
    )
    with pytest.raises(InvalidReturnError):
        resolve_tribute(state, TributeChoices(returns={0: cards("SK")[0]}))


def test_paper_literal_mode_taxes_both_late_finishers():
    # finishers split across teams: standard mode taxes only seat 3, the
    # literal reading also taxes the winner's partner in third place
    state = tribute_state(
        [0, 1, 2, 3],
        ["H3 H4", "H5 H6", "SQ S5 S4", "SK S6 S3"],
        level=0,
        mode="paper-literal",
    )
    assert dict(state.tribute_pending) == {
        2: cards("SQ")[0],
        3: cards("SK")[0],
    }
    resolve_tribute(state)
    assert cards("SK")[0] in state.hands[0]
    assert cards("SQ")[0] in state.hands[1]


def test_tribute_preserves_hand_sizes():
    texts = [
        "S3 S4 S5 S6 S7 S8",
        "C3 C4 C5 C6 C7 CK",
        "D3 D4 D5 D6 D7 D8",
        "H3 H4 H5 H6 H7 HK",
    ]
    state = tribute_state([0, 2, 1, 3], texts, level=0)
    resolve_tribute(state)
    assert [len(h) for h in state.hands] == [6, 6, 6, 6]
    assert sorted(c for h in state.hands for c in h) == sorted(
        cards(" ".join(texts))
    )


def test_tribute_wrong_phase():
    state = new_match(1)
    with pytest.raises(WrongPhaseError):
        resolve_tribute(state)


# --- full games ------------------------------------------------------------


def test_full_game_reaches_round_over():
    state = new_match(23)
    rng = random.Random(23)
    while state.phase == PLAYING:
        seat = state.turn
        legal = legal_actions(state, seat)
        apply(state, seat, legal[rng.randrange(len(legal))], validate=False)
    assert state.phase == ROUND_OVER
    assert len(state.finish_order) == 4
    assert sorted(state.finish_order) == [0, 1, 2, 3]
    assert len(state.hands[state.finish_order[3]]) > 0


def test_next_game_requires_advance():
    state = round_over_state([0, 2, 1, 3])
    with pytest.raises(WrongPhaseError):
        next_game(state)
