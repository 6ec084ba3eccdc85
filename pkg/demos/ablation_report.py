"""Produce the five-configuration ablation report for one match.

Run from the repository root after installing the package:

    python3 demos/ablation_report.py

The commentary pipeline runs once per configuration (ToM order 0/1/2,
RAG off/on) over the same greedy self-play game, each output is scored
against a reference sentence, and the rows print as the evaluation CSV:
sentiment masses, compound polarity, TF-IDF cosine to the reference,
type-token ratio, and the naive-Bayes positivity score. The Original row
scores the reference itself (no self-cosine).
"""

from guandan.pipeline import PipelineConfig, ablation_grid, run_ablation
from guandan.retrieval import ingest
from guandan.simulate import default_lineup, play_match

STYLE_DOCS = [
    ("bomb", "好一手炸弹，气势如虹，对手只能望牌兴叹。"),
    ("single", "这张单牌打得稳健，守住了节奏。"),
    ("straight", "顺子一出，牌局顿时风起云涌。"),
]

REFERENCES = ["一场精彩的掼蛋对局，双方你来我往，炸弹与顺子轮番登场。"]


def main() -> None:
    log = play_match(
        7, default_lineup(["greedy"] * 4, seed=7), record=True, max_games=1
    ).state.records
    index = ingest(STYLE_DOCS)

    grid = ablation_grid(PipelineConfig())
    report = run_ablation(log, REFERENCES, grid, index=index, stride=30)
    print(report.to_csv(), end="")

    best = max(
        (row for row in report.rows if row.cosine is not None),
        key=lambda row: row.cosine,
    )
    print(f"\nclosest configuration to the reference: {best.label} "
          f"(cosine {best.cosine:.4f})")


if __name__ == "__main__":
    main()
