"""Replay logs: format, round trips, and tamper detection."""

import json

import pytest

from guandan.agents import ReplayIllegalError
from guandan.replay import (
    ReplayFormatError,
    ReplayMismatchError,
    dump_line,
    read_replay,
    resimulate,
    verify_replay,
    write_replay,
)
from guandan.simulate import default_lineup, play_match

LINEUP = ["greedy", "random", "greedy", "random"]


def recorded(seed):
    return play_match(seed, default_lineup(LINEUP, seed), record=True)


def test_log_round_trips_through_files(tmp_path):
    records = recorded(4).state.records
    path = tmp_path / "m.jsonl"
    write_replay(path, records)
    assert read_replay(path) == records


def test_log_lines_are_single_json_objects(tmp_path):
    records = recorded(4).state.records
    path = tmp_path / "m.jsonl"
    write_replay(path, records)
    for line in path.read_text().splitlines():
        obj = json.loads(line)
        assert set(obj) == {"game", "step", "seat", "phase", "action", "level", "digest"}
        assert set(obj["action"]) >= {"kind", "cards", "wilds"}
        assert len(obj["digest"]) == 16


def test_reruns_are_byte_identical():
    a = recorded(21).state.records
    b = recorded(21).state.records
    assert [dump_line(x) for x in a] == [dump_line(x) for x in b]


@pytest.mark.parametrize("seed", [2, 9, 31])
def test_verify_accepts_genuine_logs(tmp_path, seed):
    records = recorded(seed).state.records
    path = tmp_path / "m.jsonl"
    write_replay(path, records)
    assert verify_replay(path) == len(records)


def test_verify_catches_a_forged_card(tmp_path):
    records = [json.loads(dump_line(r)) for r in recorded(5).state.records]
    for record in records:
        action = record["action"]
        if action["kind"] == "Single":
            action["cards"] = ["BJ"] if action["cards"] != ["BJ"] else ["XJ"]
            break
    path = tmp_path / "m.jsonl"
    write_replay(path, records)
    # the forgery either fails to resolve against the hand or changes a digest
    with pytest.raises((ReplayMismatchError, ReplayIllegalError)):
        verify_replay(path)


def test_verify_catches_truncation(tmp_path):
    records = recorded(5).state.records
    path = tmp_path / "m.jsonl"
    write_replay(path, records[:-3])
    with pytest.raises(ReplayMismatchError):
        verify_replay(path)


def test_verify_catches_a_doctored_digest(tmp_path):
    records = [json.loads(dump_line(r)) for r in recorded(5).state.records]
    records[10]["digest"] = "0" * 16
    path = tmp_path / "m.jsonl"
    write_replay(path, records)
    with pytest.raises(ReplayMismatchError):
        verify_replay(path)


def test_read_rejects_garbage(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text("not json\n")
    with pytest.raises(ReplayFormatError):
        read_replay(path)
    path.write_text("")
    with pytest.raises(ReplayFormatError):
        read_replay(path)
    path.write_text('{"game":1,"step":0,"seat":0,"phase":"Playing",'
                    '"action":{"kind":"Pass","cards":[],"wilds":[]},"level":"2","digest":"00"}\n')
    with pytest.raises(ReplayFormatError):
        read_replay(path)


def test_resimulate_reaches_the_same_end():
    result = recorded(13)
    state = resimulate(result.state.records)
    assert state.match_winner == result.winner
    assert state.team_levels == list(result.final_levels)
