"""Release gate: one test per acceptance criterion.

Each criterion is a single test whose verbose pytest line is its pass or
fail verdict; on success the test also prints one summary line (visible
with -s).  The heavyweight checks pin their own wall-clock budgets, so a
plain ``pytest tests/test_acceptance.py`` run doubles as the performance
check.
"""

import itertools
import math
import random
import re
import time
from pathlib import Path

import pytest

from guandan.cards import (
    BIG_JOKER,
    SMALL_JOKER,
    effective_order,
    full_deck,
    parse_level,
)
from guandan.cli import main as cli_main
from guandan.combos import PASS, beats, classify, legal_moves
from guandan.engine import (
    LEVEL_A,
    MATCH_OVER,
    PLAYING,
    ROUND_OVER,
    TRIBUTE,
    InvalidChoiceError,
    InvalidReturnError,
    MatchState,
    TributeChoices,
    advance_level,
    apply,
    legal_actions,
    new_match,
    next_game,
    observe,
    partner_of,
    resolve_tribute,
    round_outcome,
    team_of,
    tribute_obligations,
)
from guandan.gateway import BackendConfig
from guandan.metrics import (
    REPORT_COLUMNS,
    default_classifier,
    nb_score,
    sentiment,
    tfidf_cosine,
    ttr,
)
from guandan.pipeline import (
    MODE_LLM,
    PipelineConfig,
    commentate_match,
    run_ablation,
    write_commentary,
)
from guandan.retrieval import ingest, query, save_index
from guandan.simulate import default_lineup, play_match

from conftest import cards
from retrieval_fixtures import make_corpus, mixed_query, topic_query

GOLDEN = Path(__file__).parent / "data" / "commentary_golden.jsonl"

STYLE_DOCS = [
    ("style-bomb", "好一手炸弹，气势如虹，对手只能望牌兴叹。"),
    ("style-single", "这张单牌打得稳健，守住了节奏。"),
    ("style-straight", "顺子一出，牌局顿时风起云涌。"),
]


def verdict(number: int, label: str, t0: float) -> None:
    print(f"acceptance {number} {label}: PASS ({time.perf_counter() - t0:.1f}s)")


def cid(code: str) -> int:
    """Concrete card id of the first pack copy for a code."""
    return cards(code)[0]


# --- crafted-state builders ------------------------------------------------


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


def tribute_state(prev_finish, hands, level=0):
    """A Tribute-phase state; hands are code strings or card-id lists."""
    state = MatchState(seed=0, rng=random.Random(0))
    state.game = 2
    state.prev_finish = tuple(prev_finish)
    state.hands = [sorted(h if isinstance(h, list) else cards(h)) for h in hands]
    state.done = [False] * 4
    state.phase = TRIBUTE
    state.active_level = level
    state.records = []
    state.tribute_pending = tribute_obligations(state)
    return state


# --- 1. move enumeration against a brute-force oracle ----------------------

ORACLE_HANDS = 1000
ORACLE_MAX_CARDS = 8
ORACLE_LEVELS = (parse_level("2"), parse_level("5"), parse_level("A"))
ORACLE_BUDGET_S = 60.0


def readable_combos(hand, level):
    """Every combo formed by any sub-multiset of the hand."""
    out = set()
    ordered = sorted(hand)
    for n in range(1, len(ordered) + 1):
        for sub in set(itertools.combinations(ordered, n)):
            out |= classify(list(sub), level)
    return out


def test_criterion_1_move_enumeration_oracle():
    t0 = time.perf_counter()
    rng = random.Random(0xACCE55)
    deck = list(full_deck())
    for _ in range(ORACLE_HANDS):
        rng.shuffle(deck)
        size = rng.randrange(1, ORACLE_MAX_CARDS + 1)
        hand = deck[:size]
        other = deck[size : size + ORACLE_MAX_CARDS]
        for level in ORACLE_LEVELS:
            readable = readable_combos(hand, level)
            assert set(legal_moves(hand, None, level)) == readable, (hand, level)
            pool = sorted(readable_combos(other, level))
            incumbent = pool[rng.randrange(len(pool))]
            following = {PASS} | {c for c in readable if beats(c, incumbent)}
            assert set(legal_moves(hand, incumbent, level)) == following, (
                hand,
                incumbent,
                level,
            )
    elapsed = time.perf_counter() - t0
    assert elapsed < ORACLE_BUDGET_S
    verdict(1, "move enumeration oracle", t0)


# --- 2. card order at every level ------------------------------------------


def test_criterion_2_card_order_conformance():
    t0 = time.perf_counter()
    for level in range(13):
        naturals = [r for r in range(13) if r != level]
        expected = {rank: i for i, rank in enumerate(naturals)}
        expected[level] = 12
        expected[SMALL_JOKER] = 13
        expected[BIG_JOKER] = 14
        for rank in range(15):
            assert effective_order(rank, level) == expected[rank], (rank, level)
    verdict(2, "card order conformance", t0)


# --- 3. upgrade table, A-level victory, tribulation reset -------------------


def test_criterion_3_upgrade_and_tribulation():
    t0 = time.perf_counter()

    # every finishing order: partner in place 1/2/3 upgrades 3/2/1 levels
    for order in itertools.permutations(range(4)):
        outcome = round_outcome(round_over_state(order))
        winner = order[0]
        place = order.index(partner_of(winner))
        assert outcome.winning_team == team_of(winner)
        assert outcome.upgrade == {1: 3, 2: 2, 3: 1}[place]
        assert outcome.best_victory == (place == 1)

    # upgrades apply to the winning team and move the lead
    state = round_over_state((0, 1, 2, 3), lead_team=1, levels=(4, 6))
    advance_level(state, round_outcome(state))
    assert state.team_levels == [6, 6]
    assert state.lead_team == 0
    assert state.active_level == 6

    # upgrades never pass level A
    state = round_over_state((0, 2, 1, 3), lead_team=1, levels=(11, 3))
    advance_level(state, round_outcome(state))
    assert state.team_levels[0] == LEVEL_A

    # best victory by the lead team at its own A ends the match
    state = round_over_state((0, 2, 1, 3), lead_team=0, levels=(LEVEL_A, 5))
    advance_level(state, round_outcome(state))
    assert state.phase == MATCH_OVER
    assert state.match_winner == 0
    assert state.team_levels == [LEVEL_A, 5]

    # best victory by the other team does not; it burns the lead's attempt
    state = round_over_state((1, 3, 0, 2), lead_team=0, levels=(LEVEL_A, 5))
    advance_level(state, round_outcome(state))
    assert state.phase != MATCH_OVER
    assert state.a_attempts == [1, 0]
    assert state.team_levels == [LEVEL_A, 8]
    assert state.lead_team == 1

    # a non-best win of its own A game burns an attempt; three failures
    # drop the team back to level 2
    levels, attempts = (LEVEL_A, 5), (0, 0)
    for failure in (1, 2, 3):
        state = round_over_state(
            (0, 1, 2, 3), lead_team=0, levels=levels, attempts=attempts
        )
        advance_level(state, round_outcome(state))
        assert state.phase != MATCH_OVER
        levels, attempts = tuple(state.team_levels), tuple(state.a_attempts)
        if failure < 3:
            assert levels[0] == LEVEL_A
            assert attempts[0] == failure
    assert levels[0] == parse_level("2")
    assert attempts[0] == 0
    verdict(3, "upgrade and tribulation table", t0)


# --- 4. tribute suite: twelve exact-movement scenarios ----------------------


def test_criterion_4_tribute_suite():
    t0 = time.perf_counter()
    ran = []

    # 1. single down: the last finisher pays its highest card, the winner
    #    returns its lowest low card, the payer leads
    st = tribute_state((0, 1, 2, 3), ["S3 S9 SQ", "S4 S5 S6", "S7 S8 C9", "HK C6 D8"])
    resolve_tribute(st)
    assert st.tribute_events == [
        ("Tribute", 3, 0, cid("HK")),
        ("Return", 0, 3, cid("S3")),
    ]
    assert st.phase == PLAYING
    assert st.turn == 3
    assert st.hands[3] == sorted(cards("C6 D8 S3"))
    assert st.hands[0] == sorted(cards("S9 SQ HK"))
    ran.append("single-down")

    # 2. double down: both losers pay; the higher card goes to the first
    #    finisher, the other to the second, and the picked payer leads
    st = tribute_state((0, 2, 1, 3), ["S3 SA", "SQ C5", "D6 DA", "SK D4"])
    resolve_tribute(st)
    assert st.tribute_events == [
        ("Tribute", 3, 0, cid("SK")),
        ("Tribute", 1, 2, cid("SQ")),
        ("Return", 0, 3, cid("S3")),
        ("Return", 2, 1, cid("D6")),
    ]
    assert st.turn == 3
    assert st.hands[0] == sorted(cards("SA SK"))
    assert st.hands[1] == sorted(cards("C5 D6"))
    assert st.hands[2] == sorted(cards("DA SQ"))
    assert st.hands[3] == sorted(cards("D4 S3"))
    ran.append("double-down")

    # 3. anti-tribute with the big jokers split across both payers
    st = tribute_state(
        (0, 2, 1, 3),
        ["S3 S4", "BJ S5", "S6 S7", cards("S8") + [cid("BJ") + 54]],
    )
    before = [list(h) for h in st.hands]
    resolve_tribute(st)
    assert st.tribute_events == [("AntiTribute", -1, -1, -1)]
    assert st.hands == before
    assert st.turn == 0
    ran.append("anti-tribute-split")

    # 4. anti-tribute with both big jokers in the single payer's hand
    st = tribute_state((0, 1, 2, 3), ["S3 S5", "S6 S7", "S8 C4", "BJ BJ S4"])
    before = [list(h) for h in st.hands]
    resolve_tribute(st)
    assert st.tribute_events == [("AntiTribute", -1, -1, -1)]
    assert st.hands == before
    assert st.turn == 0
    ran.append("anti-tribute-single")

    # 5. one big joker is not enough; jokers themselves are never paid
    st = tribute_state((0, 1, 2, 3), ["S3 S9", "S5 S6", "S7 C8", "BJ SK S4"])
    resolve_tribute(st)
    assert st.tribute_events == [
        ("Tribute", 3, 0, cid("SK")),
        ("Return", 0, 3, cid("S3")),
    ]
    assert cid("BJ") in st.hands[3]
    ran.append("one-joker-pays")

    # 6. the off-suit level card is the trump and outranks an ace
    lvl5 = parse_level("5")
    st = tribute_state(
        (0, 1, 2, 3), ["S3 S9 SQ", "S6 S7", "C8 C9", "S5 SA C4"], level=lvl5
    )
    resolve_tribute(st)
    assert st.tribute_events == [
        ("Tribute", 3, 0, cid("S5")),
        ("Return", 0, 3, cid("S3")),
    ]
    ran.append("trump-tribute")

    # 7. the heart level card is wild and exempt from tribute
    st = tribute_state(
        (0, 1, 2, 3), ["S3 S9", "S6 S7", "C8 C9", "H5 SK C4"], level=lvl5
    )
    resolve_tribute(st)
    assert st.tribute_events[0] == ("Tribute", 3, 0, cid("SK"))
    assert cid("H5") in st.hands[3]
    ran.append("heart-trump-exempt")

    # 8. the return must be rank 10 or below; a ten is the boundary case
    hands = ["S10 SQ SA", "S5 S6", "S7 C8", "HK C6"]
    st = tribute_state((0, 1, 2, 3), hands)
    with pytest.raises(InvalidReturnError):
        resolve_tribute(st, TributeChoices(returns={0: cid("SQ")}))
    st = tribute_state((0, 1, 2, 3), hands)
    resolve_tribute(st, TributeChoices(returns={0: cid("S10")}))
    assert st.tribute_events == [
        ("Tribute", 3, 0, cid("HK")),
        ("Return", 0, 3, cid("S10")),
    ]
    ran.append("return-low")

    # 9. a hand of nothing but high cards must return its smallest card
    hands = ["SJ SQ SK SA", "S5 S6", "S7 C8", "HK C6 D4"]
    st = tribute_state((0, 1, 2, 3), hands)
    with pytest.raises(InvalidReturnError):
        resolve_tribute(st, TributeChoices(returns={0: cid("SK")}))
    st = tribute_state((0, 1, 2, 3), hands)
    resolve_tribute(st)
    assert st.tribute_events == [
        ("Tribute", 3, 0, cid("HK")),
        ("Return", 0, 3, cid("SJ")),
    ]
    ran.append("all-high-returns-smallest")

    # 10. leader selection: a lone payer leads regardless of seat numbers
    st = tribute_state((2, 3, 0, 1), ["S4 S6", "DK S5", "S3 S8", "C6 C9"])
    resolve_tribute(st)
    assert st.tribute_events == [
        ("Tribute", 1, 2, cid("DK")),
        ("Return", 2, 1, cid("S3")),
    ]
    assert st.turn == 1
    ran.append("lone-payer-leads")

    # 11. an explicit pick routes the cards and the lead; off-table picks fail
    st = tribute_state((0, 2, 1, 3), ["S3 SA", "SQ C5", "D6 DA", "SK D4"])
    with pytest.raises(InvalidChoiceError):
        resolve_tribute(st, TributeChoices(pick=cid("C5")))
    st = tribute_state((0, 2, 1, 3), ["S3 SA", "SQ C5", "D6 DA", "SK D4"])
    resolve_tribute(st, TributeChoices(pick=cid("SQ")))
    assert st.tribute_events == [
        ("Tribute", 1, 0, cid("SQ")),
        ("Tribute", 3, 2, cid("SK")),
        ("Return", 0, 1, cid("S3")),
        ("Return", 2, 3, cid("D6")),
    ]
    assert st.turn == 1
    ran.append("explicit-pick")

    # 12. equal tribute ranks break toward the earlier finisher's card
    st = tribute_state((0, 2, 1, 3), ["S3 SA", "SK C5", "D6 DA", "DK D4"])
    resolve_tribute(st)
    assert st.tribute_events[0] == ("Tribute", 1, 0, cid("SK"))
    assert st.turn == 1
    ran.append("tie-break")

    assert len(ran) == 12
    verdict(4, "tribute suite", t0)


# --- 5. simulation soundness over 1,000 matches -----------------------------

SOUND_MATCHES = 1000
SOUND_RERUNS = 200
SOUND_LINEUP = ["greedy", "random", "greedy", "random"]
SOUND_GAME_CAP = 200
SOUND_BUDGET_S = 300.0


def drive_checked_match(seed: int) -> list:
    """Play one full match, checking invariants before and after each play."""
    state = new_match(seed, record=True)
    agents = default_lineup(SOUND_LINEUP, seed=seed)
    deck = sorted(full_deck())
    games = 0
    while state.phase != MATCH_OVER:
        games += 1
        assert games <= SOUND_GAME_CAP, f"seed {seed}: match did not terminate"
        out: set[int] = set()
        assert sum(len(h) for h in state.hands) == len(deck)
        while state.phase == PLAYING:
            seat = state.turn
            legal = legal_actions(state, seat)
            combo = agents[seat].choose(observe(state, seat), legal)
            if combo.kind == PASS.kind:
                assert state.incumbent is not None, (seed, seat)
            elif state.incumbent is not None:
                assert beats(combo, state.incumbent), (seed, seat, combo)
            apply(state, seat, combo, validate=False)
            for card in combo.cards:
                assert card not in out, (seed, card)
                out.add(card)
            assert sum(len(h) for h in state.hands) + len(out) == len(deck)
        held = [c for h in state.hands for c in h]
        assert sorted(held + list(out)) == deck, seed
        advance_level(state, round_outcome(state))
        if state.phase == MATCH_OVER:
            break
        next_game(state)
        resolve_tribute(state)
    return state.records


def test_criterion_5_simulation_soundness():
    t0 = time.perf_counter()
    kept = {}
    for seed in range(SOUND_MATCHES):
        records = drive_checked_match(seed)
        if seed < SOUND_RERUNS:
            kept[seed] = records
    for seed, records in kept.items():
        again = play_match(
            seed,
            default_lineup(SOUND_LINEUP, seed=seed),
            record=True,
            max_games=SOUND_GAME_CAP,
        )
        assert not again.truncated
        assert again.state.records == records, seed
    elapsed = time.perf_counter() - t0
    assert elapsed < SOUND_BUDGET_S
    verdict(5, "simulation soundness", t0)


# --- 6. metric oracles ------------------------------------------------------


def test_criterion_6_metric_oracles():
    t0 = time.perf_counter()

    # self-similarity is 1, disjoint vocabulary is exactly 0
    for text in ("panda rocket wizard", "好一手炸弹 气势如虹", "Seat 0 打出 BOMB"):
        assert tfidf_cosine(text, text, ["rocket lab"]) == pytest.approx(
            1.0, abs=1e-9
        )
    assert tfidf_cosine("panda wizard", "rocket comet", ["panda comet"]) == 0.0

    # three-document fixture against the hand-derived value
    w = math.log(4 / 3) + 1.0  # idf of a term in 2 of 3 docs; panda's is 1
    expected = (2.0 + 2.0 * w * w) / (
        math.sqrt(4.0 + w * w) * math.sqrt(1.0 + 4.0 * w * w)
    )
    got = tfidf_cosine("panda panda wizard", "panda wizard wizard", ["panda rocket"])
    assert got == pytest.approx(expected, abs=1e-9)

    # type-token ratio is exact on rational fixtures
    assert ttr(["a", "b", "a", "b"]) == 0.5
    assert ttr(["a", "b", "c", "a"]) == 0.75
    assert ttr(list("abcde")) == 1.0

    # polarity masses sum to one and the compound score stays bounded
    for text in ("精彩 的 炸弹 大胜", "糟糕 失误 被动", "plain filler words", ""):
        masses = sentiment(text)
        assert masses["neg"] + masses["neu"] + masses["pos"] == pytest.approx(
            1.0, abs=1e-6
        )
        assert -1.0 <= masses["compound"] <= 1.0

    # naive-Bayes labels are complementary and nb_score is P(pos)
    clf = default_classifier()
    for text in ("赢 了 这 局", "输 得 很 惨", "panda rocket"):
        p = clf.prob("pos", text)
        assert p + clf.prob("neg", text) == pytest.approx(1.0, abs=1e-9)
        assert nb_score(text) == pytest.approx(p, abs=1e-12)
    verdict(6, "metric oracles", t0)


# --- 7. retrieval tree equals the flat scan ---------------------------------

RETRIEVAL_THRESHOLDS = (0.0, 0.2, 0.5, 1.0)


def test_criterion_7_retrieval_equivalence(tmp_path):
    t0 = time.perf_counter()
    for n_docs, n_topics in ((20, 5), (200, 15)):
        corpus = make_corpus(n_docs, n_topics)
        index = ingest(corpus)
        queries = [topic_query(t) for t in range(n_topics)]
        queries += [mixed_query(t, (t + 1) % n_topics) for t in range(0, n_topics, 3)]
        for text in queries:
            previous = None
            for theta in RETRIEVAL_THRESHOLDS:
                tree = query(index, text, theta).hits
                flat = query(index, text, theta, exhaustive=True).hits
                assert tree == flat, (n_docs, text, theta)
                ids = {hit[0] for hit in tree}
                if previous is not None:
                    assert ids <= previous, (n_docs, text, theta)
                previous = ids
        for name in ("one", "two"):
            save_index(ingest(corpus), tmp_path / f"{n_docs}-{name}.json")
        assert (tmp_path / f"{n_docs}-one.json").read_bytes() == (
            tmp_path / f"{n_docs}-two.json"
        ).read_bytes()
    verdict(7, "retrieval equivalence", t0)


# --- 8. pipeline determinism and structure ----------------------------------


def test_criterion_8_pipeline_determinism(tmp_path):
    t0 = time.perf_counter()
    log = play_match(
        seed=7, agents=default_lineup(["greedy"] * 4, seed=7),
        record=True, max_games=1,
    ).state.records
    index = ingest(STYLE_DOCS)

    # the golden commentary stream reproduces byte for byte
    cfg = PipelineConfig(
        tom_order=2, rag_enabled=True, mode=MODE_LLM,
        backend=BackendConfig(kind="mock"),
    )
    out = tmp_path / "commentary.jsonl"
    write_commentary(out, commentate_match(log, cfg, index=index, stride=40))
    assert out.read_bytes() == GOLDEN.read_bytes()

    # disabling a stage removes exactly its section and leaves the rest
    full = list(
        commentate_match(
            log, PipelineConfig(tom_order=1, rag_enabled=True),
            index=index, stride=40,
        )
    )
    no_rag = list(
        commentate_match(log, PipelineConfig(tom_order=1, rag_enabled=False), stride=40)
    )
    no_tom = list(
        commentate_match(
            log, PipelineConfig(tom_order=0, rag_enabled=True),
            index=index, stride=40,
        )
    )
    for f, nr, nt in zip(full, no_rag, no_tom, strict=True):
        assert [t.stage for t in f.provenance] == [
            "guider", "tom", "retrieval", "coordinator",
        ]
        assert [t.stage for t in nr.provenance] == ["guider", "tom", "coordinator"]
        assert [t.stage for t in nt.provenance] == ["guider", "retrieval", "coordinator"]
        assert nr.guider_text == f.guider_text
        assert nr.tom_text == f.tom_text
        assert nt.guider_text == f.guider_text
        assert set(f.as_dict()) - set(nr.as_dict()) == {"retrieved"}
        assert set(f.as_dict()) - set(nt.as_dict()) == {"tom_text"}

    # a mock that echoes the reference scores cosine 1; disjoint text scores 0
    reference = "a stunning bomb seals the final game"
    probe = PipelineConfig(tom_order=0, mode=MODE_LLM)
    for answer, wanted in ((reference, 1.0), ("zebra xylophone quartz", 0.0)):
        table = {
            rec.provenance[-1].digest: answer
            for rec in commentate_match(log, probe, stride=1000)
        }
        echo = PipelineConfig(
            tom_order=0, mode=MODE_LLM,
            backend=BackendConfig(kind="mock", mock_table=table),
        )
        report = run_ablation(log, [reference], [echo], stride=1000)
        assert report.rows[0].cosine == pytest.approx(wanted, abs=1e-9)
    verdict(8, "pipeline determinism and structure", t0)


# --- 9. ablation report shape ----------------------------------------------

ABLATION_LABELS = [
    "Our(w/o RAG)(Vanilla)",
    "Our(w/o RAG)(1st-ToM)",
    "Our(w/o RAG)(2nd-ToM)",
    "Our(w RAG)(1st-ToM)",
    "Our(w RAG)(2nd-ToM)",
    "Original",
]

CELL = re.compile(r"^-?\d+\.\d{6}$")


def test_criterion_9_ablation_report_shape(tmp_path):
    t0 = time.perf_counter()
    sim = tmp_path / "sim"
    assert cli_main([
        "simulate", "--seed", "7", "--games", "1", "--agents", "greedy",
        "--max-games", "1", "--out", str(sim),
    ]) == 0
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for stem, text in STYLE_DOCS:
        (corpus / f"{stem}.txt").write_text(text, encoding="utf-8")
    index = tmp_path / "index.json"
    assert cli_main(["ingest", "--corpus", str(corpus), "--index", str(index)]) == 0
    refs = tmp_path / "refs.jsonl"
    refs.write_text(
        '{"id": "r1", "text": "一场精彩的掼蛋对局，双方你来我往。"}\n',
        encoding="utf-8",
    )
    report = tmp_path / "report.csv"
    assert cli_main([
        "eval", "--ablation", "--replay", str(sim / "replay-00000007.jsonl"),
        "--references", str(refs), "--index", str(index),
        "--stride", "30", "--out", str(report),
    ]) == 0

    lines = report.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "label,neg,neu,pos,compound,cosine,ttr,nb_score"
    assert lines[0] == ",".join(REPORT_COLUMNS)
    rows = [line.split(",") for line in lines[1:]]
    assert [row[0] for row in rows] == ABLATION_LABELS
    for row in rows:
        assert len(row) == len(REPORT_COLUMNS)
    for row in rows[:-1]:  # five config rows carry every metric
        assert all(CELL.match(cell) for cell in row[1:]), row
    original = rows[-1]  # the reference row has no self-cosine
    assert original[REPORT_COLUMNS.index("cosine")] == ""
    for i, cell in enumerate(original[1:], start=1):
        if i != REPORT_COLUMNS.index("cosine"):
            assert CELL.match(cell), original
    verdict(9, "ablation report shape", t0)
