"""Commentary coordinator: orchestrates the four stages per game step.

Stage 1 renders the observation and history (guider), stage 2 renders the
opponent analysis of the configured order, stage 3 retrieves style
snippets and wraps them in a step-by-step framing, and stage 4 merges
every section into the final commentary.  Each stage leaves a provenance
trace (its prompt and the prompt digest) in stage order; disabling a
stage removes exactly its trace and its section of the coordinator
prompt.

Template mode computes every stage output deterministically from the
packaged templates, so the whole pipeline is a pure function of the
replay log and the configuration.  Llm mode sends the same prompts
through the gateway instead; structure and provenance are identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import NamedTuple

from .combos import PASS_KIND, Combo
from .engine import PLAYING, ROUND_OVER, MatchState, observe
from .gateway import BackendConfig, ChatRequest, GatewayError, complete, prompt_digest
from .guider import (
    DEFAULT_HISTORY_WINDOW,
    DEFAULT_LANGUAGE,
    LANGUAGES,
    build_bundle,
    combo_phrase,
    guider_prompt,
    guider_text,
    load_template,
)
from .metrics import EvalReport, evaluate_run, reference_row
from .replay import replay_steps, start_replay
from .retrieval import DEFAULT_THRESHOLD, StyleIndex, filter_hits, query
from .tom import analyze, render_tom_prompt

MODE_TEMPLATE = "template"
MODE_LLM = "llm"
MODES = (MODE_TEMPLATE, MODE_LLM)
TOM_ORDERS = (0, 1, 2)
DEFAULT_TOP_K = 2

STAGE_GUIDER = "guider"
STAGE_TOM = "tom"
STAGE_RETRIEVAL = "retrieval"
STAGE_COORDINATOR = "coordinator"

TOM_LABELS = {0: "Vanilla", 1: "1st-ToM", 2: "2nd-ToM"}
REFERENCE_LABEL = "Original"


class PipelineConfigError(ValueError):
    """The configuration cannot be run as given."""


class StageError(RuntimeError):
    """A backend failure, tagged with the stage that sent the prompt."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage


def _mock_backend() -> BackendConfig:
    return BackendConfig(kind="mock")


@dataclass(frozen=True)
class PipelineConfig:
    """Ablation switches and generation settings for one run."""

    tom_order: int = 1
    rag_enabled: bool = False
    theta: float = DEFAULT_THRESHOLD
    top_k: int = DEFAULT_TOP_K
    history_window: int = DEFAULT_HISTORY_WINDOW
    language: str = DEFAULT_LANGUAGE
    backend: BackendConfig = field(default_factory=_mock_backend)
    mode: str = MODE_TEMPLATE

    def __post_init__(self) -> None:
        if self.tom_order not in TOM_ORDERS:
            raise PipelineConfigError(f"tom_order must be 0, 1 or 2, got {self.tom_order}")
        if not 0.0 <= self.theta <= 1.0:
            raise PipelineConfigError(f"theta must be within [0, 1], got {self.theta}")
        if self.top_k < 1:
            raise PipelineConfigError(f"top_k must be at least 1, got {self.top_k}")
        if self.history_window < 1:
            raise PipelineConfigError(
                f"history_window must be at least 1, got {self.history_window}"
            )
        if self.language not in LANGUAGES:
            raise PipelineConfigError(f"unknown language {self.language!r}")
        if self.mode not in MODES:
            raise PipelineConfigError(f"mode must be template or llm, got {self.mode!r}")


class StageTrace(NamedTuple):
    """One stage's prompt and the digest of the request built from it."""

    stage: str
    prompt: str
    digest: str

    def as_dict(self) -> dict[str, str]:
        return {"stage": self.stage, "prompt": self.prompt, "digest": self.digest}


@dataclass(frozen=True)
class CommentaryRecord:
    """One commentated step: stage outputs plus provenance in stage order."""

    game: int
    step: int
    guider_text: str
    tom_text: str | None
    retrieved: tuple[tuple[str, float], ...] | None
    final_text: str
    provenance: tuple[StageTrace, ...]

    def as_dict(self) -> dict[str, object]:
        out: dict[str, object] = {"game": self.game, "step": self.step}
        out["guider_text"] = self.guider_text
        if self.tom_text is not None:
            out["tom_text"] = self.tom_text
        if self.retrieved is not None:
            out["retrieved"] = [[node_id, score] for node_id, score in self.retrieved]
        out["final_text"] = self.final_text
        out["provenance"] = [trace.as_dict() for trace in self.provenance]
        return out


def dump_line(record: CommentaryRecord) -> str:
    return json.dumps(
        record.as_dict(), separators=(",", ":"), ensure_ascii=False, sort_keys=True
    )


def write_commentary(path, records) -> None:
    """Commentary records as JSON Lines, one object per step."""
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(dump_line(record))
            fh.write("\n")


def _check_index(config: PipelineConfig, index: StyleIndex | None) -> None:
    if config.rag_enabled and (index is None or not index.nodes):
        raise PipelineConfigError(
            "style retrieval is enabled but no populated index was provided"
        )


def _stage_output(
    stage: str, request: ChatRequest, template_output: str, config: PipelineConfig
) -> str:
    if config.mode == MODE_TEMPLATE:
        return template_output
    try:
        return complete(request, config.backend)
    except GatewayError as exc:
        raise StageError(stage, exc) from exc


def _request(prompt: str) -> ChatRequest:
    return ChatRequest(system_text="", messages=(("user", prompt),))


def commentate_step(
    state: MatchState,
    history: list[dict],
    config: PipelineConfig,
    *,
    index: StyleIndex | None = None,
    seat: int | None = None,
    candidate: Combo | None = None,
) -> CommentaryRecord:
    """Commentary for the current step, observed from ``seat``.

    ``seat`` defaults to the seat about to act (or the first finisher
    once the round is over); ``candidate`` is the combo that seat is
    about to play, feeding the second-order analysis when enabled.
    """
    if state.phase not in (PLAYING, ROUND_OVER):
        raise ValueError(f"cannot commentate phase {state.phase}")
    _check_index(config, index)
    if seat is None:
        seat = state.turn if state.phase == PLAYING else state.finish_order[0]
    obs = observe(state, seat)
    language = config.language

    bundle = build_bundle(obs, history, language, config.history_window)
    g_prompt = guider_prompt(bundle)
    g_request = _request(g_prompt)
    guider_out = _stage_output(STAGE_GUIDER, g_request, guider_text(bundle), config)
    traces = [StageTrace(STAGE_GUIDER, g_prompt, prompt_digest(g_request))]

    tom_out = None
    if config.tom_order >= 1:
        report = analyze(obs, history, order=config.tom_order, candidate=candidate)
        rendered = render_tom_prompt(report, language)
        # the analyzer gets both the structured state and the stage-1 text
        t_prompt = f"{guider_out}\n\n{rendered}"
        t_request = _request(t_prompt)
        tom_out = _stage_output(STAGE_TOM, t_request, rendered, config)
        traces.append(StageTrace(STAGE_TOM, t_prompt, prompt_digest(t_request)))

    retrieved = None
    style_text = None
    r_prompt = None
    if config.rag_enabled:
        combo = candidate if candidate is not None and candidate.kind != PASS_KIND else None
        if combo is None and obs.incumbent is not None and obs.incumbent.kind != PASS_KIND:
            combo = obs.incumbent
        keywords = (
            combo_phrase(combo.kind, combo.cards, language).split() if combo else []
        )
        query_text = guider_out + ("\n" + " ".join(keywords) if keywords else "")
        result = filter_hits(
            index, query(index, query_text, config.theta), keywords, config.top_k
        )
        retrieved = result.filtered
        style_text = "\n".join(
            index.node_by_id(node_id).content for node_id, _ in retrieved
        )
        cot = load_template(f"cot_{language}").rstrip("\n")
        r_prompt = cot + (f"\n\n{style_text}" if style_text else "")
        traces.append(
            StageTrace(STAGE_RETRIEVAL, r_prompt, prompt_digest(_request(r_prompt)))
        )

    sections = [guider_out]
    if tom_out is not None:
        sections.append(tom_out)
    if r_prompt is not None:
        sections.append(r_prompt)
    c_prompt = "\n\n".join(sections + [load_template(f"coordinator_{language}").rstrip("\n")]) + "\n"
    c_request = _request(c_prompt)
    merged = [guider_out]
    if tom_out is not None:
        merged.append(tom_out)
    if style_text:
        merged.append(style_text)
    final_text = _stage_output(
        STAGE_COORDINATOR, c_request, "\n\n".join(merged), config
    )
    traces.append(StageTrace(STAGE_COORDINATOR, c_prompt, prompt_digest(c_request)))

    return CommentaryRecord(
        game=obs.game,
        step=obs.step,
        guider_text=guider_out,
        tom_text=tom_out,
        retrieved=retrieved,
        final_text=final_text,
        provenance=tuple(traces),
    )


def commentate_match(
    records: list[dict],
    config: PipelineConfig,
    *,
    index: StyleIndex | None = None,
    stride: int = 1,
):
    """Re-simulate a replay log, yielding commentary every ``stride`` plays.

    The acting seat is the observer and its logged move the candidate, so
    each record describes the table just before the move lands.
    """
    if stride < 1:
        raise ValueError(f"stride must be at least 1, got {stride}")
    _check_index(config, index)
    state = start_replay(records)
    plays = 0
    for seat, combo in replay_steps(state, records):
        if plays % stride == 0:
            yield commentate_step(
                state, state.records, config,
                index=index, seat=seat, candidate=combo,
            )
        plays += 1


def config_label(config: PipelineConfig) -> str:
    rag = "w RAG" if config.rag_enabled else "w/o RAG"
    return f"Our({rag})({TOM_LABELS[config.tom_order]})"


def ablation_grid(base: PipelineConfig) -> tuple[PipelineConfig, ...]:
    """The ablation variants of ``base``: analysis order crossed with
    retrieval, minus retrieval-without-analysis (not a studied system)."""
    axes = ((False, 0), (False, 1), (False, 2), (True, 1), (True, 2))
    return tuple(
        replace(base, rag_enabled=rag, tom_order=order) for rag, order in axes
    )


def run_ablation(
    records: list[dict],
    references,
    grid,
    *,
    index: StyleIndex | None = None,
    stride: int = 1,
) -> EvalReport:
    """One metric row per configuration, plus the reference's own row.

    ``references`` is a sequence of reference commentary texts; when it
    is empty the similarity column stays absent and no reference row is
    emitted.  Duplicate configurations produce duplicate rows.
    """
    if not grid:
        raise ValueError("ablation grid is empty")
    labels = [config_label(config) for config in grid]
    generated = [
        [record.final_text for record in commentate_match(
            records, config, index=index, stride=stride,
        )]
        for config in grid
    ]
    if not references:
        return EvalReport(rows=tuple(
            reference_row(texts, label) for label, texts in zip(labels, generated)
        ))
    report = evaluate_run(generated, references, labels)
    return EvalReport(rows=report.rows + (reference_row(references, REFERENCE_LABEL),))
