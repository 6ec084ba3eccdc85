"""Command line entry point: simulate, ingest, commentate, eval.

Settings merge with flag > environment > config file > default
precedence.  The config file is a JSON object; every scalar key has a
matching ``GUANDAN_*`` environment variable:

    {
      "seed": 7, "games": 1, "agents": ["greedy", "greedy", "greedy", "greedy"],
      "tribute_mode": "standard", "max_games": 500,
      "language": "zh", "mode": "template", "tom_order": 1, "rag": false,
      "theta": 0.2, "top_k": 2, "history_window": 20, "stride": 1,
      "jobs": 1, "label": "generated", "format": "csv",
      "backend": {"kind": "mock", "endpoint": "", "token_env": "",
                  "timeout_ms": 30000, "max_retries": 2, "mock_table": {}},
      "paths": {"corpus": "", "index": "", "replay": "",
                "references": "", "generated": "", "out": ""}
    }

Exit codes: 0 ok, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .agents import AgentError
from .engine import EngineError, TRIBUTE_MODES
from .gateway import BackendConfig, GatewayError
from .guider import DEFAULT_HISTORY_WINDOW, DEFAULT_LANGUAGE, LANGUAGES
from .metrics import EvalReport, MetricError, evaluate_run, reference_row
from .pipeline import (
    DEFAULT_TOP_K,
    MODES,
    PipelineConfig,
    PipelineConfigError,
    StageError,
    TOM_ORDERS,
    ablation_grid,
    commentate_match,
    dump_line,
    run_ablation,
)
from .replay import ReplayFormatError, ReplayMismatchError, read_replay, write_replay
from .retrieval import DEFAULT_THRESHOLD, ingest, load_corpus, load_index, save_index
from .simulate import DEFAULT_MAX_GAMES, default_lineup, play_match

AGENT_CHOICES = ("random", "greedy")
FORMATS = ("csv", "json")
ENV_PREFIX = "GUANDAN_"


class UsageError(Exception):
    """Bad flags, bad config values, or missing input files."""


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_agents(value) -> tuple[str, ...]:
    if isinstance(value, str):
        parts = [p.strip() for p in value.split(",") if p.strip()]
    else:
        parts = [str(p) for p in value]
    if len(parts) == 1:
        parts = parts * 4
    if len(parts) != 4:
        raise ValueError(f"need 1 or 4 agent kinds, got {len(parts)}")
    for kind in parts:
        if kind not in AGENT_CHOICES:
            raise ValueError(f"unknown agent kind {kind!r} for --agents")
    return tuple(parts)


@dataclass(frozen=True)
class AppConfig:
    """Merged settings for one command invocation."""

    seed: int
    games: int
    agents: tuple[str, ...]
    tribute_mode: str
    max_games: int
    language: str
    mode: str
    tom_order: int
    rag: bool
    theta: float
    top_k: int
    history_window: int
    stride: int
    jobs: int
    label: str
    format: str
    backend: BackendConfig
    corpus: Path | None
    index_path: Path | None
    replay: Path | None
    references: Path | None
    generated: Path | None
    out: Path | None
    ablation: bool

    def pipeline_config(self) -> PipelineConfig:
        return PipelineConfig(
            tom_order=self.tom_order,
            rag_enabled=self.rag,
            theta=self.theta,
            top_k=self.top_k,
            history_window=self.history_window,
            language=self.language,
            backend=self.backend,
            mode=self.mode,
        )


# each scalar setting: (key, env suffix, parser for env text, default)
_SETTINGS = (
    ("seed", "SEED", int, 7),
    ("games", "GAMES", int, 1),
    ("agents", "AGENTS", _parse_agents, ("greedy",) * 4),
    ("tribute_mode", "TRIBUTE_MODE", str, "standard"),
    ("max_games", "MAX_GAMES", int, DEFAULT_MAX_GAMES),
    ("language", "LANGUAGE", str, DEFAULT_LANGUAGE),
    ("mode", "MODE", str, "template"),
    ("tom_order", "TOM_ORDER", int, 1),
    ("rag", "RAG", _parse_bool, False),
    ("theta", "THETA", float, DEFAULT_THRESHOLD),
    ("top_k", "TOP_K", int, DEFAULT_TOP_K),
    ("history_window", "HISTORY_WINDOW", int, DEFAULT_HISTORY_WINDOW),
    ("stride", "STRIDE", int, 1),
    ("jobs", "JOBS", int, 0),
    ("label", "LABEL", str, "generated"),
    ("format", "FORMAT", str, "csv"),
)

_PATH_KEYS = (
    ("corpus", "CORPUS"),
    ("index_path", "INDEX"),
    ("replay", "REPLAY"),
    ("references", "REFERENCES"),
    ("generated", "GENERATED"),
    ("out", "OUT"),
)

def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    file = Path(path)
    if not file.is_file():
        raise UsageError(f"config file not found: {file}")
    try:
        data = json.loads(file.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config file {file}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"config file {file} must hold a JSON object")
    return data


def _first_of(flag_value, env_suffix: str, file_value, parse, default):
    """Flag > environment > config file > default, for one setting."""
    if flag_value is not None:
        return flag_value
    env_name = ENV_PREFIX + env_suffix
    if env_name in os.environ:
        try:
            return parse(os.environ[env_name])
        except ValueError as exc:
            raise UsageError(f"bad value for {env_name}: {exc}") from exc
    if file_value is not None:
        try:
            return parse(file_value) if isinstance(file_value, str) else file_value
        except ValueError as exc:
            raise UsageError(f"bad config file value {file_value!r}: {exc}") from exc
    return default


def _section(data: dict, key: str) -> dict:
    section = data.get(key, {})
    if not isinstance(section, dict):
        raise UsageError(f"config key {key!r} must be an object")
    return section


def _resolve_backend(args, data: dict) -> BackendConfig:
    section = _section(data, "backend")
    kind = _first_of(
        getattr(args, "backend_kind", None), "BACKEND", section.get("kind"), str, "mock",
    )
    endpoint = _first_of(
        getattr(args, "endpoint", None), "ENDPOINT", section.get("endpoint"), str, "",
    )
    token_env = _first_of(
        getattr(args, "token_env", None), "TOKEN_ENV", section.get("token_env"), str, "",
    )
    try:
        return BackendConfig(
            kind=kind,
            endpoint=endpoint,
            token_env=token_env,
            timeout_ms=int(section.get("timeout_ms", 30000)),
            max_retries=int(section.get("max_retries", 2)),
            mock_table=dict(section.get("mock_table", {})),
        )
    except ValueError as exc:
        raise UsageError(f"bad backend configuration: {exc}") from exc


def _resolve_path(args, data: dict, key: str, env_suffix: str) -> Path | None:
    # "index_path" avoids shadowing the flag parser; the file key is "index"
    file_key = "index" if key == "index_path" else key
    value = _first_of(
        getattr(args, key, None), env_suffix, _section(data, "paths").get(file_key),
        str, None,
    )
    if not value:
        return None
    return Path(value).expanduser().resolve()


def resolve_config(args) -> AppConfig:
    data = _load_config_file(getattr(args, "config", None))
    values = {
        key: _first_of(getattr(args, key, None), env_suffix, data.get(key), parse, default)
        for key, env_suffix, parse, default in _SETTINGS
    }
    try:
        values["agents"] = _parse_agents(values["agents"])
    except ValueError as exc:
        raise UsageError(f"--agents: {exc}") from exc
    if values["tribute_mode"] not in TRIBUTE_MODES:
        raise UsageError(f"unknown tribute mode {values['tribute_mode']!r}")
    if values["format"] not in FORMATS:
        raise UsageError(f"--format must be csv or json, got {values['format']!r}")
    for key in ("games", "stride"):
        if values[key] < 1:
            raise UsageError(f"--{key} must be at least 1, got {values[key]}")
    if values["jobs"] < 0:
        raise UsageError(f"--jobs must be positive, got {values['jobs']}")
    if values["jobs"] == 0:
        values["jobs"] = os.cpu_count() or 1
    paths = {
        key: _resolve_path(args, data, key, env_suffix)
        for key, env_suffix in _PATH_KEYS
    }
    return AppConfig(
        backend=_resolve_backend(args, data),
        ablation=bool(getattr(args, "ablation", False)),
        **values,
        **paths,
    )


# ---------------------------------------------------------------------------
# Commands

def _require(path: Path | None, flag: str) -> Path:
    if path is None:
        raise UsageError(f"{flag} is required")
    return path


def _require_file(path: Path | None, flag: str) -> Path:
    path = _require(path, flag)
    if not path.exists():
        raise UsageError(f"{flag} path does not exist: {path}")
    return path


def _play_one(seed: int, config: AppConfig):
    agents = default_lineup(list(config.agents), seed)
    return play_match(
        seed, agents,
        record=True,
        tribute_mode=config.tribute_mode,
        max_games=config.max_games,
    )


def cmd_simulate(config: AppConfig) -> int:
    out_dir = _require(config.out, "--out")
    out_dir.mkdir(parents=True, exist_ok=True)
    seeds = [config.seed + i for i in range(config.games)]
    workers = min(config.jobs, len(seeds))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda s: _play_one(s, config), seeds))

    histogram: Counter[str] = Counter()
    action_counts: Counter[str] = Counter()
    wins = [0, 0]
    truncated = 0
    detail = []
    for result in results:
        path = out_dir / f"replay-{result.seed:08d}.jsonl"
        write_replay(path, result.state.records)
        for game in result.games:
            histogram["".join(map(str, game.finish_order))] += 1
        for record in result.state.records:
            kind = record["action"]["kind"]
            if kind in ("Tribute", "Return", "AntiTribute"):
                action_counts[kind] += 1
        if result.winner is None:
            truncated += 1
        else:
            wins[result.winner] += 1
        detail.append({
            "seed": result.seed,
            "winner": result.winner,
            "games": len(result.games),
            "steps": result.steps,
            "final_levels": list(result.final_levels),
            "upgrade_trajectory": [list(g.levels_after) for g in result.games],
            "finish_orders": ["".join(map(str, g.finish_order)) for g in result.games],
        })
        print(
            f"match seed={result.seed} winner={result.winner} "
            f"games={len(result.games)} steps={result.steps}"
        )
    summary = {
        "matches": config.games,
        "base_seed": config.seed,
        "agents": list(config.agents),
        "tribute_mode": config.tribute_mode,
        "wins_by_team": wins,
        "truncated": truncated,
        "total_games": sum(len(r.games) for r in results),
        "total_steps": sum(r.steps for r in results),
        "finish_order_histogram": dict(sorted(histogram.items())),
        "tributes": action_counts["Tribute"],
        "returns": action_counts["Return"],
        "anti_tributes": action_counts["AntiTribute"],
        "matches_detail": detail,
    }
    summary_path = out_dir / "summary.json"
    summary_path.write_text(
        json.dumps(summary, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    print(f"summary -> {summary_path}")
    return 0


def cmd_ingest(config: AppConfig) -> int:
    corpus = _require_file(config.corpus, "--corpus")
    index_path = _require(config.index_path, "--index")
    index = ingest(load_corpus(corpus))
    if not index.nodes:
        print("warning: corpus produced an empty index", file=sys.stderr)
    save_index(index, index_path)
    print(f"ingested {len(index.nodes)} nodes into {len(index.tree)} buckets -> {index_path}")
    return 0


def cmd_commentate(config: AppConfig) -> int:
    replay_path = _require_file(config.replay, "--replay")
    records = read_replay(replay_path)
    index = None
    if config.rag:
        index_path = _require_file(config.index_path, "--index")
        index = load_index(index_path)
    stream = commentate_match(
        records, config.pipeline_config(), index=index, stride=config.stride,
    )
    if config.out is None:
        for record in stream:
            print(dump_line(record))
        return 0
    count = 0
    with open(config.out, "w", encoding="utf-8") as fh:
        for record in stream:
            fh.write(dump_line(record))
            fh.write("\n")
            count += 1
    print(f"wrote {count} records -> {config.out}")
    return 0


def _read_texts(path: Path) -> list[tuple[str, str]]:
    """(id, text) pairs from a JSONL file of references or commentary."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise UsageError(f"{path}:{i}: not JSON: {exc}") from exc
            if "id" in data and "text" in data:
                pairs.append((str(data["id"]), str(data["text"])))
            elif "final_text" in data and "game" in data and "step" in data:
                pairs.append((f"{data['game']}:{data['step']}", str(data["final_text"])))
            else:
                raise UsageError(
                    f"{path}:{i}: need id/text fields or a commentary record"
                )
    if not pairs:
        raise UsageError(f"{path}: no texts found")
    return pairs


def _write_report(report: EvalReport, config: AppConfig) -> int:
    rendered = report.to_csv() if config.format == "csv" else report.to_json() + "\n"
    if config.out is None:
        sys.stdout.write(rendered)
        return 0
    config.out.write_text(rendered, encoding="utf-8")
    print(f"wrote report -> {config.out}")
    return 0


def cmd_eval(config: AppConfig) -> int:
    references = _read_texts(_require_file(config.references, "--references"))
    reference_texts = [text for _, text in references]
    if config.ablation:
        replay_path = _require_file(config.replay, "--replay")
        records = read_replay(replay_path)
        index = None
        if config.index_path is not None:
            index = load_index(_require_file(config.index_path, "--index"))
        grid = ablation_grid(config.pipeline_config())
        report = run_ablation(
            records, reference_texts, grid, index=index, stride=config.stride,
        )
        return _write_report(report, config)

    generated = _read_texts(_require_file(config.generated, "--generated"))
    ref_ids = {i for i, _ in references}
    gen_ids = {i for i, _ in generated}
    if ref_ids != gen_ids:
        missing_gen = ", ".join(sorted(ref_ids - gen_ids))
        missing_ref = ", ".join(sorted(gen_ids - ref_ids))
        parts = []
        if missing_gen:
            parts.append(f"ids missing from generated: {missing_gen}")
        if missing_ref:
            parts.append(f"ids missing from references: {missing_ref}")
        raise UsageError("; ".join(parts))
    by_id = dict(generated)
    ordered_ids = [i for i, _ in references]
    generated_texts = [by_id[i] for i in ordered_ids]
    report = evaluate_run([generated_texts], reference_texts, [config.label])
    report = EvalReport(rows=report.rows + (reference_row(reference_texts),))
    return _write_report(report, config)


# ---------------------------------------------------------------------------
# Parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="guandan",
        description="Guandan match simulation and commentary toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, help="base random seed")
    common.add_argument("--jobs", type=int, help="worker pool size (default: cores)")
    common.add_argument("--out", help="output file or directory")

    pipe = argparse.ArgumentParser(add_help=False)
    pipe.add_argument("--stride", type=int, help="commentate every Nth play")
    pipe.add_argument("--tom-order", type=int, dest="tom_order", choices=TOM_ORDERS,
                      help="opponent analysis order")
    pipe.add_argument("--rag", action=argparse.BooleanOptionalAction, default=None,
                      help="enable style retrieval")
    pipe.add_argument("--mode", choices=MODES, help="generation mode")
    pipe.add_argument("--language", choices=LANGUAGES, help="commentary language")
    pipe.add_argument("--theta", type=float, help="retrieval similarity threshold")
    pipe.add_argument("--top-k", type=int, dest="top_k", help="style snippets to keep")
    pipe.add_argument("--history-window", type=int, dest="history_window",
                      help="history lines in the prompt")
    pipe.add_argument("--index", dest="index_path", help="style index file")
    pipe.add_argument("--backend", dest="backend_kind", choices=("mock", "http"),
                      help="completion backend")
    pipe.add_argument("--endpoint", help="http backend base URL")
    pipe.add_argument("--token-env", dest="token_env",
                      help="environment variable holding the backend token")

    p_sim = sub.add_parser("simulate", parents=[common],
                           help="play seeded matches and write replay logs")
    p_sim.add_argument("--games", type=int, help="number of matches to play")
    p_sim.add_argument("--agents", help="agent kinds: one for all seats or four comma-separated")
    p_sim.add_argument("--tribute-mode", dest="tribute_mode",
                       help="tribute payer selection mode")
    p_sim.add_argument("--max-games", type=int, dest="max_games",
                       help="game cap per match")
    p_sim.set_defaults(func=cmd_simulate)

    p_ing = sub.add_parser("ingest", parents=[common],
                           help="build a style index from a corpus")
    p_ing.add_argument("--corpus", help="corpus directory or JSONL file")
    p_ing.add_argument("--index", dest="index_path", help="index file to write")
    p_ing.set_defaults(func=cmd_ingest)

    p_com = sub.add_parser("commentate", parents=[common, pipe],
                           help="generate commentary over a replay log")
    p_com.add_argument("--replay", help="replay log to commentate")
    p_com.set_defaults(func=cmd_commentate)

    p_eval = sub.add_parser("eval", parents=[common, pipe],
                            help="score commentary against references")
    p_eval.add_argument("--ablation", action="store_true",
                        help="run the retrieval/analysis ablation grid")
    p_eval.add_argument("--replay", help="replay log for ablation runs")
    p_eval.add_argument("--generated", help="generated commentary JSONL")
    p_eval.add_argument("--references", help="reference texts JSONL")
    p_eval.add_argument("--label", help="row label for the generated system")
    p_eval.add_argument("--format", choices=FORMATS, help="report format")
    p_eval.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        return args.func(config)
    except (UsageError, PipelineConfigError, ReplayFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (StageError, GatewayError, ReplayMismatchError,
            AgentError, EngineError, MetricError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
