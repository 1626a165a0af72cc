"""Intrinsic corpus metrics: diversity over embeddings, realism proxies over text."""

from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from . import prompts
from .gateway import Gateway, GenerationRequest, NoJsonFound, SchemaViolation, ask_json
from .schemas import JUDGE_AXES

GRID_BINS = 5
MAX_ENTROPY = math.log(GRID_BINS * GRID_BINS)
LINK_RE = re.compile(r"https?://\S+")

COLUMNS = ("pairwise_correlation", "remote_clique", "entropy", "avg_links", "avg_length")
HEADERS = ("Pairwise Corr. (↓)", "Remote-Clique (↑)", "Entropy (↑)", "Avg. #Links", "Avg. Length")


class DegenerateVector(ValueError):
    pass


class ZeroVector(ValueError):
    pass


class JudgeParseFailed(RuntimeError):
    pass


def _matrix(embeddings) -> np.ndarray:
    m = np.asarray([getattr(e, "values", e) for e in embeddings], dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 2:
        raise ValueError("need at least two equal-length vectors")
    return m


def _upper_mean(sim: np.ndarray) -> float:
    iu = np.triu_indices(sim.shape[0], k=1)
    return float(sim[iu].mean())


def pairwise_correlation(embeddings) -> float:
    """Mean Pearson correlation over unordered document pairs, computed across coordinates."""
    m = _matrix(embeddings)
    if m.shape[1] < 2:
        raise ValueError("dimension must be >= 2")
    centered = m - m.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(centered, axis=1)
    if np.any(norms == 0):
        raise DegenerateVector(f"vector {int(np.argmin(norms))} has constant coordinates")
    z = centered / norms[:, None]
    return _upper_mean(np.clip(z @ z.T, -1.0, 1.0))


def remote_clique(embeddings) -> float:
    """Mean pairwise cosine distance (1 - cosine similarity)."""
    m = _matrix(embeddings)
    norms = np.linalg.norm(m, axis=1)
    if np.any(norms == 0):
        raise ZeroVector(f"vector {int(np.argmin(norms))} is all zeros")
    u = m / norms[:, None]
    return _upper_mean(1.0 - np.clip(u @ u.T, -1.0, 1.0))


def pca_2d(embeddings) -> np.ndarray:
    """Project onto the top two principal components.

    Sign convention: each component's largest-magnitude loading is positive
    (first such coordinate on ties). Missing components (rank < 2) project to 0.
    """
    m = _matrix(embeddings)
    centered = m - m.mean(axis=0)
    _, sv, vt = np.linalg.svd(centered, full_matrices=False)
    comps = np.zeros((2, m.shape[1]))
    # Same rank tolerance as numpy.linalg.matrix_rank; directions below it are noise.
    tol = sv.max(initial=0.0) * max(m.shape) * np.finfo(np.float64).eps
    k = min(2, int(np.sum(sv > tol)))
    comps[:k] = vt[:k]
    for row in comps:
        i = int(np.argmax(np.abs(row)))
        if row[i] < 0:
            row *= -1.0
    return centered @ comps.T


def grid_cells(points: np.ndarray, bins: int = GRID_BINS) -> np.ndarray:
    """Equal-width bin index per axis over [min, max], max edge inclusive."""
    pts = np.asarray(points, dtype=np.float64)
    idx = np.zeros(pts.shape, dtype=np.int64)
    for j in range(pts.shape[1]):
        lo, hi = pts[:, j].min(), pts[:, j].max()
        if hi > lo:
            idx[:, j] = np.minimum(np.floor((pts[:, j] - lo) / (hi - lo) * bins).astype(np.int64), bins - 1)
    return idx


def grid_entropy(points: np.ndarray, bins: int = GRID_BINS) -> float:
    idx = grid_cells(points, bins)
    _, counts = np.unique(idx[:, 0] * bins + idx[:, 1], return_counts=True)
    p = counts / counts.sum()
    h = float(-(p * np.log(p)).sum())
    return max(h, 0.0)


def entropy_grid(embeddings) -> float:
    """Shannon entropy (nats) of 2D-PCA projections binned on a 5x5 grid."""
    m = _matrix(embeddings)
    if np.all(m == m[0]):
        return 0.0
    return grid_entropy(pca_2d(m))


def count_links(text: str) -> int:
    return len(LINK_RE.findall(text))


def avg_links(corpus: Sequence[str]) -> float:
    if not corpus:
        raise ValueError("empty corpus")
    return sum(count_links(d) for d in corpus) / len(corpus)


def avg_length(corpus: Sequence[str]) -> float:
    if not corpus:
        raise ValueError("empty corpus")
    return sum(len(d) for d in corpus) / len(corpus)


@dataclass
class CorpusMetrics:
    pairwise_correlation: float
    remote_clique: float
    entropy: float
    avg_links: float
    avg_length: float
    n_docs: int

    def row(self) -> list[float]:
        return [getattr(self, c) for c in COLUMNS]

    def to_dict(self) -> dict:
        return asdict(self)


def corpus_metrics(docs: Sequence[str], embeddings: np.ndarray) -> CorpusMetrics:
    return CorpusMetrics(
        pairwise_correlation(embeddings), remote_clique(embeddings), entropy_grid(embeddings),
        avg_links(docs), avg_length(docs), len(docs),
    )


def subsampled_eval(
    corpus: Sequence[str],
    embed: Callable[[list[str]], np.ndarray],
    threshold: int = 1000,
    repeats: int = 5,
    seed: int = 0,
) -> CorpusMetrics:
    """Full-corpus metrics, or the mean over ``repeats`` seeded subsamples when large.

    ``embed`` maps a list of documents to an (n, d) array; every document is
    embedded once up front.
    """
    docs = list(corpus)
    if not docs:
        raise ValueError("empty corpus")
    emb = np.asarray(embed(docs), dtype=np.float64)
    if len(docs) <= threshold:
        return corpus_metrics(docs, emb)
    rng = np.random.default_rng(seed)
    runs = []
    for _ in range(repeats):
        idx = np.sort(rng.choice(len(docs), size=threshold, replace=False))
        runs.append(corpus_metrics([docs[i] for i in idx], emb[idx]))
    mean = {c: float(np.mean([getattr(r, c) for r in runs])) for c in COLUMNS}
    return CorpusMetrics(**mean, n_docs=len(docs))


def render_table(rows: Sequence[tuple[str, CorpusMetrics]]) -> str:
    headers = ("Dataset",) + HEADERS
    body = [[name] + [f"{v:.4f}" for v in m.row()[:4]] + [f"{m.avg_length:.2f}"] for name, m in rows]
    widths = [max(len(h), *(len(r[i]) for r in body)) if body else len(h) for i, h in enumerate(headers)]
    line = lambda cells: "  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(cells, widths)))
    return "\n".join([line(headers), line(["-" * w for w in widths])] + [line(r) for r in body]) + "\n"


# --- LLM-as-judge ----------------------------------------------------------------

@dataclass(frozen=True)
class AxisScore:
    score: float
    explanation: str


@dataclass(frozen=True)
class JudgeScores:
    tone: AxisScore
    fluency: AxisScore
    coherence: AxisScore
    informativeness: AxisScore
    engagement: AxisScore
    overall: AxisScore  # explanation holds the overall summary

    @classmethod
    def from_json(cls, d: dict) -> "JudgeScores":
        axes = {a.lower(): AxisScore(float(d[a]["score"]), d[a].get("explanation", "")) for a in JUDGE_AXES}
        return cls(**axes, overall=AxisScore(float(d["Overall"]["score"]), d["Overall"].get("summary", "")))


def llm_judge(gateway: Gateway, email: str) -> JudgeScores:
    request = GenerationRequest(
        system_prompt=prompts.JUDGE_SYSTEM,
        user_prompt=prompts.JUDGE.substitute(input=email),
        agent_role="judge",
    )
    try:
        data = ask_json(gateway, request, "judge")
    except (SchemaViolation, NoJsonFound) as exc:
        raise JudgeParseFailed(str(exc)) from exc
    return JudgeScores.from_json(data)
