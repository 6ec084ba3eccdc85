"""Style-corpus retrieval over tf-idf document nodes.

Documents are chunked into nodes (word windows with overlap), embedded as
L2-normalized tf-idf vectors using the same text pipeline as the metrics
module, and grouped into a two-level tree: ceil(sqrt(n)) buckets seeded
with evenly spaced nodes, each node greedily assigned to its nearest seed,
bucket centroids then recomputed as normalized member means. A query
descends to the top-2 buckets by centroid similarity; an exhaustive flat
scan is available as a fallback and serves as the oracle in tests.

Thresholding keeps nodes with score > threshold - 1e-9 and score > 0, so
a threshold of 1.0 admits exact duplicates despite float rounding while a
threshold of 0 still drops non-overlapping nodes.

Node ids are content hashes (first 16 hex chars of sha256) with "-n"
suffixes for repeated content, which makes ingestion idempotent: the same
corpus always serializes to byte-identical index files.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from .metrics import preprocess

__all__ = [
    "CHUNK_TOKENS",
    "CHUNK_OVERLAP",
    "DEFAULT_THRESHOLD",
    "TOP_BUCKETS",
    "DocumentNode",
    "Bucket",
    "StyleIndex",
    "RetrievalResult",
    "load_corpus",
    "ingest",
    "embed",
    "query",
    "filter_hits",
    "save_index",
    "load_index",
]

log = logging.getLogger(__name__)

CHUNK_TOKENS = 256
CHUNK_OVERLAP = 32
DEFAULT_THRESHOLD = 0.2
TOP_BUCKETS = 2
SCORE_EPS = 1e-9


class DocumentNode(NamedTuple):
    """One retrieval unit: a chunk of corpus text plus its vector."""

    id: str
    content: str
    vector: dict[str, float]


class Bucket(NamedTuple):
    """Tree leaf: a centroid vector over the member nodes' ids."""

    centroid: dict[str, float]
    node_ids: tuple[str, ...]


@dataclass(frozen=True)
class StyleIndex:
    """Immutable corpus index: nodes, shared idf, and the bucket tree."""

    nodes: tuple[DocumentNode, ...]
    idf: dict[str, float]
    tree: tuple[Bucket, ...]

    def node_by_id(self, node_id: str) -> DocumentNode:
        for node in self.nodes:
            if node.id == node_id:
                return node
        raise KeyError(node_id)


@dataclass(frozen=True)
class RetrievalResult:
    """Scored hits above the threshold, plus the filtered subset."""

    hits: tuple[tuple[str, float], ...]
    threshold_used: float
    filtered: tuple[tuple[str, float], ...] = ()


# ---------------------------------------------------------------------------
# Corpus loading

def load_corpus(path: str | Path) -> list[tuple[str, str]]:
    """(id, text) pairs from a directory of .txt files or a JSONL file.

    Unreadable entries are logged and skipped; loading continues.
    """
    path = Path(path)
    docs: list[tuple[str, str]] = []
    if path.is_dir():
        for file in sorted(path.glob("*.txt")):
            try:
                docs.append((file.stem, file.read_text(encoding="utf-8")))
            except (OSError, UnicodeDecodeError) as exc:
                log.warning("skipping unreadable document %s: %s", file, exc)
    else:
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except (OSError, UnicodeDecodeError) as exc:
            raise ValueError(f"cannot read corpus {path}: {exc}") from exc
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                docs.append((str(record["id"]), str(record["text"])))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                log.warning("skipping corpus line %d: %s", lineno, exc)
    return docs


# ---------------------------------------------------------------------------
# Ingestion

def _chunk_words(text: str) -> list[str]:
    words = text.split()
    if len(words) <= CHUNK_TOKENS:
        return [" ".join(words)] if words else []
    stride = CHUNK_TOKENS - CHUNK_OVERLAP
    chunks = []
    start = 0
    while start < len(words):
        window = words[start : start + CHUNK_TOKENS]
        chunks.append(" ".join(window))
        if start + CHUNK_TOKENS >= len(words):
            break
        start += stride
    return chunks


def _l2_normalize(weights: dict[str, float]) -> dict[str, float]:
    norm = math.sqrt(sum(w * w for w in weights.values()))
    if norm == 0.0:
        return {}
    return {t: w / norm for t, w in weights.items()}


def _cosine(a: dict[str, float], b: dict[str, float]) -> float:
    if len(b) < len(a):
        a, b = b, a
    value = sum(w * b.get(t, 0.0) for t, w in a.items())
    return max(0.0, min(1.0, value))


def ingest(documents: Iterable[tuple[str, str] | str]) -> StyleIndex:
    """Chunk, embed, and tree-bucket a corpus into an immutable index."""
    contents: list[str] = []
    for doc in documents:
        text = doc[1] if isinstance(doc, tuple) else doc
        contents.extend(_chunk_words(text))

    # content-hash ids, deterministic suffixes for repeated chunks
    seen: Counter[str] = Counter()
    ids: list[str] = []
    for content in contents:
        digest = hashlib.sha256(content.encode("utf-8")).hexdigest()[:16]
        n = seen[digest]
        seen[digest] += 1
        ids.append(digest if n == 0 else f"{digest}-{n}")

    token_lists = [preprocess(content).tokens for content in contents]
    n_nodes = len(contents)
    df: Counter[str] = Counter()
    for tokens in token_lists:
        df.update(set(tokens))
    idf = {t: math.log((1 + n_nodes) / (1 + k)) + 1.0 for t, k in sorted(df.items())}

    nodes = tuple(
        DocumentNode(
            id=node_id,
            content=content,
            vector=_l2_normalize(
                {t: c * idf[t] for t, c in Counter(tokens).items()}
            ),
        )
        for node_id, content, tokens in zip(ids, contents, token_lists)
    )
    return StyleIndex(nodes=nodes, idf=idf, tree=_build_tree(nodes))


def _build_tree(nodes: tuple[DocumentNode, ...]) -> tuple[Bucket, ...]:
    if not nodes:
        return ()
    n_buckets = math.isqrt(len(nodes))
    if n_buckets * n_buckets < len(nodes):
        n_buckets += 1
    # evenly spaced seeds, then one greedy nearest-seed pass
    seed_vectors = [
        nodes[(i * len(nodes)) // n_buckets].vector for i in range(n_buckets)
    ]
    members: list[list[DocumentNode]] = [[] for _ in range(n_buckets)]
    for node in nodes:
        scores = [_cosine(node.vector, seed) for seed in seed_vectors]
        members[scores.index(max(scores))].append(node)

    buckets = []
    for group in members:
        sums: dict[str, float] = {}
        for node in group:
            for t, w in node.vector.items():
                sums[t] = sums.get(t, 0.0) + w
        centroid = _l2_normalize({t: sums[t] for t in sorted(sums)})
        buckets.append(Bucket(centroid=centroid, node_ids=tuple(n.id for n in group)))
    return tuple(buckets)


# ---------------------------------------------------------------------------
# Query

def embed(text: str, index: StyleIndex) -> dict[str, float]:
    """L2-normalized tf-idf vector of a text in the index vocabulary."""
    counts = Counter(preprocess(text).tokens)
    weights = {t: c * index.idf[t] for t, c in counts.items() if t in index.idf}
    return _l2_normalize(weights)


def _passes(score: float, threshold: float) -> bool:
    return score > threshold - SCORE_EPS and score > 0.0


def query(
    index: StyleIndex,
    text: str,
    threshold: float = DEFAULT_THRESHOLD,
    *,
    exhaustive: bool = False,
) -> RetrievalResult:
    """Nodes whose cosine with the text exceeds the threshold.

    Tree mode scores only the nodes in the top-2 buckets by centroid
    similarity; ``exhaustive=True`` scans every node instead.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must be within [0, 1]")
    vec = embed(text, index)
    if not vec or not index.nodes:
        return RetrievalResult(hits=(), threshold_used=threshold)

    if exhaustive:
        candidates: Iterable[DocumentNode] = index.nodes
    else:
        ranked = sorted(
            range(len(index.tree)),
            key=lambda i: (-_cosine(vec, index.tree[i].centroid), i),
        )
        chosen = {
            node_id
            for i in ranked[:TOP_BUCKETS]
            for node_id in index.tree[i].node_ids
        }
        candidates = (n for n in index.nodes if n.id in chosen)

    hits = [
        (node.id, score)
        for node in candidates
        if _passes(score := _cosine(vec, node.vector), threshold)
    ]
    hits.sort(key=lambda hit: (-hit[1], hit[0]))
    return RetrievalResult(hits=tuple(hits), threshold_used=threshold)


def filter_hits(
    index: StyleIndex,
    result: RetrievalResult,
    keywords: Sequence[str],
    k: int,
) -> RetrievalResult:
    """Top-k hits after boosting similarity by keyword overlap.

    Each hit is re-ranked by score * (1 + matched/|keywords|), where a
    keyword matches when its preprocessed tokens intersect the node's
    vector terms. ``filtered`` keeps the original (id, score) pairs in
    the boosted order, so it stays a subset of ``hits``.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    kw_tokens = {tok for kw in keywords for tok in preprocess(kw).tokens}

    def boosted(hit: tuple[str, float]) -> float:
        node = index.node_by_id(hit[0])
        if not kw_tokens:
            return hit[1]
        matched = len(kw_tokens & set(node.vector))
        return hit[1] * (1.0 + matched / len(kw_tokens))

    ranked = sorted(result.hits, key=lambda hit: (-boosted(hit), hit[0]))
    return RetrievalResult(
        hits=result.hits,
        threshold_used=result.threshold_used,
        filtered=tuple(ranked[:k]),
    )


# ---------------------------------------------------------------------------
# Persistence

def save_index(index: StyleIndex, path: str | Path) -> None:
    """Serialize an index to a single deterministic JSON file."""
    payload = {
        "nodes": [
            {"id": n.id, "content": n.content, "vector": n.vector}
            for n in index.nodes
        ],
        "idf": index.idf,
        "tree": [
            {"centroid": b.centroid, "node_ids": list(b.node_ids)}
            for b in index.tree
        ],
    }
    text = json.dumps(payload, ensure_ascii=False, sort_keys=True,
                      separators=(",", ":"))
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_index(path: str | Path) -> StyleIndex:
    """Rebuild a StyleIndex from its JSON serialization."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    nodes = tuple(
        DocumentNode(id=n["id"], content=n["content"], vector=n["vector"])
        for n in payload["nodes"]
    )
    tree = tuple(
        Bucket(centroid=b["centroid"], node_ids=tuple(b["node_ids"]))
        for b in payload["tree"]
    )
    return StyleIndex(nodes=nodes, idf=payload["idf"], tree=tree)
