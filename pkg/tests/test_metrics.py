import json
import math
import re

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats

from conftest import make_gateway
from oracles import oracle_entropy, oracle_pearson, oracle_projection, oracle_remote_clique
from lifetrace import prompts
from lifetrace.gateway import extract_json
from lifetrace.metrics import (
    COLUMNS,
    MAX_ENTROPY,
    CorpusMetrics,
    DegenerateVector,
    JudgeParseFailed,
    JudgeScores,
    ZeroVector,
    avg_length,
    avg_links,
    count_links,
    entropy_grid,
    llm_judge,
    pairwise_correlation,
    pca_2d,
    remote_clique,
    render_table,
    subsampled_eval,
)


# --- pairwise correlation ------------------------------------------------------------

def test_self_correlation():
    v = [0.3, -1.0, 2.0, 0.1]
    assert pairwise_correlation([v, v]) == pytest.approx(1.0)


def test_anticorrelation():
    assert pairwise_correlation([[1, 2, 3], [3, 2, 1]]) == pytest.approx(-1.0)


def test_pearson_oracle_10x8():
    m = np.random.default_rng(0).standard_normal((10, 8))
    assert abs(pairwise_correlation(m) - oracle_pearson(m)) < 1e-12


def test_constant_vector_rejected():
    with pytest.raises(DegenerateVector):
        pairwise_correlation([[1, 1, 1], [1, 2, 3]])


def test_needs_two_vectors():
    with pytest.raises(ValueError):
        pairwise_correlation([[1, 2, 3]])


# --- remote clique -------------------------------------------------------------------

def test_remote_clique_identical():
    assert remote_clique([[1, 2], [1, 2]]) == pytest.approx(0.0)


def test_remote_clique_orthonormal():
    assert remote_clique([[1, 0], [0, 1]]) == pytest.approx(1.0)


def test_remote_clique_oracle_20x16():
    m = np.random.default_rng(1).standard_normal((20, 16))
    assert abs(remote_clique(m) - oracle_remote_clique(m)) < 1e-12


def test_zero_vector_rejected():
    with pytest.raises(ZeroVector):
        remote_clique([[0, 0], [1, 0]])


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 20), st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_permutation_invariance(n, d, seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((n, d))
    perm = rng.permutation(n)
    assert abs(pairwise_correlation(m[perm]) - pairwise_correlation(m)) < 1e-12
    assert abs(remote_clique(m[perm]) - remote_clique(m)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 20), st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_duplicating_the_corpus(n, d, seed):
    # Each copy pair adds distance 0 / correlation 1, so the new mean is a
    # convex combination of the old mean and that value.
    m = np.random.default_rng(seed).standard_normal((n, d))
    doubled = np.vstack([m, m])
    assert remote_clique(doubled) <= oracle_remote_clique(m) + 1e-12
    assert pairwise_correlation(doubled) >= oracle_pearson(m) - 1e-12


def test_single_duplicate_can_raise_remote_clique():
    # Counterexample to the single-duplicate monotonicity claim: copying an
    # outlier adds n - 1 above-average distances and only one zero.
    m = np.array([[1.0, 0.0], [0.99, 0.14], [0.98, -0.2], [-1.0, 0.05]])
    assert remote_clique(np.vstack([m, m[3]])) > remote_clique(m)


# --- entropy -------------------------------------------------------------------------

def lattice_cloud(dim=8, seed=0):
    # 5x5 lattice with unequal spacings (so PCA axes are well defined), rotated into dim.
    pts = np.array([[3.0 * i, 1.0 * j] for i in range(5) for j in range(5)])
    q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((dim, dim)))
    return np.hstack([pts, np.zeros((25, dim - 2))]) @ q.T + 7.0


def test_identical_points_zero():
    assert entropy_grid(np.ones((30, 5))) == 0.0


@pytest.mark.parametrize("seed", range(5))
def test_one_point_per_cell(seed):
    assert abs(entropy_grid(lattice_cloud(seed=seed)) - math.log(25)) < 1e-9


def test_entropy_oracle_200_points():
    m = np.random.default_rng(2).standard_normal((200, 24))
    assert abs(entropy_grid(m) - oracle_entropy(pca_2d(m))) < 1e-9


def test_projection_matches_eigen_oracle():
    m = np.random.default_rng(3).standard_normal((40, 10))
    assert np.allclose(pca_2d(m), oracle_projection(m), atol=1e-9)


def test_rank_one_projection():
    m = np.outer(np.arange(6.0), np.ones(4))
    p = pca_2d(m)
    assert np.allclose(p[:, 1], 0.0)
    assert entropy_grid(m) == pytest.approx(stats.entropy([2, 1, 1, 1, 1]))


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 40), st.integers(2, 8)),
              elements=st.floats(-1e3, 1e3, allow_nan=False)))
def test_entropy_bounds(m):
    h = entropy_grid(m)
    assert 0.0 <= h <= MAX_ENTROPY + 1e-12


# --- realism proxies -----------------------------------------------------------------

def test_links():
    assert count_links("no links here, www.x.com either") == 0
    assert count_links("see https://a.io and http://b.io/x") == 2
    assert avg_links(["plain", "one http://a.b", "http://x.y and https://z.w/q?1"]) == 1.0


def test_lengths():
    assert avg_length([""]) == 0.0
    assert avg_length(["ab", "abcd"]) == 3.0
    with pytest.raises(ValueError):
        avg_length([])


# --- subsampling ---------------------------------------------------------------------

def corpus(n, seed=0):
    rng = np.random.default_rng(seed)
    words = ["bill", "flight", "dinner", "meeting", "doctor", "gym", "rent", "class", "party", "trip"]
    docs = []
    for i in range(n):
        k = int(rng.integers(5, 60))
        doc = " ".join(rng.choice(words, k))
        if i % 7 == 0:
            doc += " https://example.com/" + str(i)
        docs.append(doc)
    return docs


class CountingEmbed:
    def __init__(self):
        self.gw = make_gateway()
        self.batches = []

    def __call__(self, docs):
        self.batches.append(len(docs))
        return self.gw.embed_many(docs)


def test_small_corpus_single_pass():
    docs = corpus(500)
    emb = make_gateway().embed_many(docs)
    m = subsampled_eval(docs, lambda d: emb, threshold=1000)
    assert m.avg_length == avg_length(docs)
    assert m.remote_clique == remote_clique(emb)
    assert m.n_docs == 500


def test_large_corpus_deterministic():
    docs = corpus(5000)
    embed = CountingEmbed()
    a = subsampled_eval(docs, embed, seed=3)
    b = subsampled_eval(docs, embed, seed=3)
    assert a == b
    assert embed.batches == [5000, 5000]
    assert subsampled_eval(docs, embed, seed=4) != a


def test_subsample_close_to_full_corpus():
    docs = corpus(1200, seed=9)
    embed = make_gateway().embed_many
    full = subsampled_eval(docs, embed, threshold=5000)
    sub = subsampled_eval(docs, embed, threshold=1000, repeats=5, seed=0)
    assert abs(sub.avg_length - full.avg_length) <= 0.05 * full.avg_length
    assert abs(sub.avg_links - full.avg_links) <= 0.05 * full.avg_links + 0.02


def test_subsample_is_mean_of_repeats():
    docs = corpus(60)
    emb = make_gateway().embed_many(docs)
    m = subsampled_eval(docs, lambda d: emb, threshold=20, repeats=3, seed=11)
    rng = np.random.default_rng(11)
    runs = []
    for _ in range(3):
        idx = np.sort(rng.choice(60, size=20, replace=False))
        runs.append([avg_length([docs[i] for i in idx]), remote_clique(emb[idx])])
    assert m.avg_length == pytest.approx(np.mean([r[0] for r in runs]))
    assert m.remote_clique == pytest.approx(np.mean([r[1] for r in runs]))


def test_table_column_order():
    m = CorpusMetrics(0.2, 0.79, 2.83, 0.25, 1437.87, 10)
    table = render_table([("ours", m), ("baseline", m)])
    header, _, row1, row2 = table.splitlines()
    assert re.split(r"\s{2,}", header.strip()) == ["Dataset",
        "Pairwise Corr. (↓)", "Remote-Clique (↑)", "Entropy (↑)", "Avg. #Links", "Avg. Length"]
    assert row1.startswith("ours") and row2.startswith("baseline")
    assert row1.split()[-1] == "1437.87"
    assert list(m.to_dict())[:5] == list(COLUMNS)


# --- judge ---------------------------------------------------------------------------

def judge_payload(score):
    axes = {a: {"score": score, "explanation": "ok"} for a in ["Tone", "Fluency", "Coherence", "Informativeness", "Engagement"]}
    return {**axes, "Overall": {"score": score, "summary": "ok"}}


def test_all_fives():
    gw = make_gateway(responder=lambda r: json.dumps(judge_payload(5)))
    s = llm_judge(gw, "Hello there")
    assert s.overall.score == 5
    assert all(getattr(s, a).score == 5 for a in ("tone", "fluency", "coherence", "informativeness", "engagement"))


def test_out_of_range_fails_after_repair():
    calls = []

    def respond(r):
        calls.append(r)
        return json.dumps({**judge_payload(4), "Tone": {"score": 7, "explanation": "x"}})

    with pytest.raises(JudgeParseFailed):
        llm_judge(make_gateway(responder=respond), "Hello")
    assert len(calls) == 2


def test_judge_prompt_embeds_email_verbatim():
    seen = []
    llm_judge(make_gateway(responder=lambda r: seen.append(r) or json.dumps(judge_payload(4))), "EMAIL-BODY-123")
    assert seen[0].user_prompt.endswith("EMAIL-BODY-123") or "EMAIL-BODY-123" in seen[0].user_prompt
    assert seen[0].user_prompt.startswith(prompts.JUDGE.template.split("$")[0])


def test_documented_example_payload():
    example = extract_json(prompts.JUDGE.template, "judge")
    s = JudgeScores.from_json(example)
    assert (s.tone.score, s.fluency.score, s.overall.score) == (4, 5, 4.2)


def test_mock_judge_scores_in_range(gateway):
    s = llm_judge(gateway, "Dear team, the offsite is moved to Friday.")
    for axis in ("tone", "fluency", "coherence", "informativeness", "engagement", "overall"):
        assert 1 <= getattr(s, axis).score <= 5
