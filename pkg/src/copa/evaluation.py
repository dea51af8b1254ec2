"""Leave-one-motion-out evaluation, threshold-sweep curves and baselines.

The protocol retrains every requested method once per motion on the
remaining motions, scores the held-out motion against its eligible
CoPAs, and collects the scores into per-method matrices.  Curves sweep a
fixed threshold grid over the matrices: pair-level precision/recall, and
per-motion precision-at-1 versus coverage.

Eligibility mirrors the published protocol: BA-k abstains below k
supporting motions per (CoPA, action); the topic methods (KNN, W2V, NB)
only ever score CoPAs flagged topic-related that contain at least
``topic_min_motions`` motions (measured once, on the full dataset); the
feature LR scores every CoPA.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import classifiers as clf
from .classifiers import ScoreMatrix, TopicSentenceCorpus, ensemble
from .kb import Dataset
from .textsim import SimilarityContext, SimilarityKind

KNOWN_METHODS = ("ba", "knn", "w2v", "nb", "lr")


class LengthMismatch(Exception):
    """Paired label lists differ in length."""


class FoldError(Exception):
    """Training failed inside a leave-one-out fold; carries the held-out
    motion id for debugging."""


def default_threshold_grid(step: float = 0.01) -> tuple[float, ...]:
    if not (0.0 < step <= 1.0):
        raise ValueError("threshold step must be in (0, 1]")
    count = int(round(1.0 / step))
    return tuple(np.linspace(0.0, 1.0, count + 1))


@dataclass
class EvalConfig:
    methods: tuple[str, ...] = KNOWN_METHODS
    ba_k: int = 5
    knn_threshold: float = 0.5
    knn_min_neighbors: int = 3
    knn_top: int = 5
    knn_sim_kind: SimilarityKind = SimilarityKind.EMBEDDING
    nb_alpha: float = 1.0
    lam: float = 1e-3
    tol: float = 1e-6
    max_iters: int = 10000
    topic_min_motions: int = 10
    exclude_general: bool = False
    thresholds: tuple[float, ...] = field(default_factory=default_threshold_grid)

    def __post_init__(self):
        if not self.methods:
            raise ValueError("at least one method is required")
        for m in self.methods:
            if m not in KNOWN_METHODS:
                raise ValueError(f"unknown method {m!r}")
        grid = tuple(self.thresholds)
        if not grid or any(t < 0.0 or t > 1.0 for t in grid):
            raise ValueError("threshold grid must lie within [0, 1]")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("threshold grid must be strictly increasing")
        self.thresholds = grid


def topic_method_copas(ds: Dataset, min_motions: int = 10) -> frozenset[str]:
    """CoPAs the topic-based methods are allowed to score."""
    return frozenset(
        c.id for c in ds.copas if c.topic_related and len(c.motion_ids) >= min_motions
    )


def leave_one_out(
    ds: Dataset,
    config: EvalConfig,
    ctx: SimilarityContext,
    corpus: TopicSentenceCorpus | None = None,
) -> dict[str, ScoreMatrix]:
    """One ScoreMatrix per requested method plus their ensemble.

    Each fold trains on all motions but one; the held-out motion is also
    withheld from the count features and from c_t (its topic is ignored),
    and same-topic training motions are dropped from KNN candidate sets.
    """
    if len(ds.motions) < 2:
        raise ValueError("leave-one-out needs at least two motions")
    if "nb" in config.methods and corpus is None:
        raise ValueError("nb method requested but no sentence corpus given")

    matrices = {
        method: ScoreMatrix(method, ds.motion_ids, ds.copa_ids) for method in config.methods
    }
    topic_eligible = topic_method_copas(ds, config.topic_min_motions)

    for held_out in ds.motions:
        fold = ds.without_motion(held_out.id)
        try:
            for method in config.methods:
                scores = _score_fold(method, ds, fold, held_out, config, ctx, corpus)
                if method in ("knn", "w2v", "nb"):
                    scores = {
                        cid: (s if cid in topic_eligible else None)
                        for cid, s in scores.items()
                    }
                matrices[method].put_motion(held_out.id, scores)
        except Exception as exc:
            raise FoldError(f"fold holding out {held_out.id!r}: {exc}") from exc

    matrices["ensemble"] = ensemble(list(matrices.values()))
    return matrices


def _score_fold(method, ds, fold, held_out, config, ctx, corpus):
    if method == "ba":
        model = clf.train_ba(fold, k=config.ba_k)
        return clf.predict_ba(model, held_out)
    if method == "knn":
        return clf.predict_knn(
            fold,
            held_out,
            ctx,
            sim_kind=config.knn_sim_kind,
            threshold=config.knn_threshold,
            min_neighbors=config.knn_min_neighbors,
            top=config.knn_top,
            exclude_topic=held_out.topic,
        )
    if method == "w2v":
        model = clf.train_w2v_lr(
            fold, ctx, lam=config.lam, tol=config.tol, max_iters=config.max_iters
        )
        return clf.predict_w2v(model, held_out, ctx)
    if method == "nb":
        model = clf.train_nb(fold, corpus, alpha=config.nb_alpha)
        return clf.predict_nb(model, held_out, corpus)
    if method == "lr":
        model = clf.train_feature_lr(
            ds,
            ctx,
            lam=config.lam,
            tol=config.tol,
            max_iters=config.max_iters,
            loo_holdout=held_out.id,
        )
        return clf.predict_feature_lr(model, held_out, ds, ctx, loo_holdout=held_out.id)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PRPoint:
    threshold: float
    precision: float
    recall: float


@dataclass(frozen=True)
class PAt1Point:
    threshold: float
    coverage: float
    p_at_1: float


def pr_curve(
    scores: ScoreMatrix,
    ds: Dataset,
    exclude_general: bool = False,
    thresholds: tuple[float, ...] | None = None,
) -> list[PRPoint]:
    """Pair-level precision and recall per threshold.

    A pair is predicted when its score is >= the threshold; abstentions
    never pass.  Recall's denominator is every labelled pair over the
    included CoPAs, regardless of which CoPAs the method could score.
    Thresholds with no predicted pair yield no point.
    """
    grid = thresholds if thresholds is not None else default_threshold_grid()
    included = set(ds.included_copa_ids(exclude_general))
    truths = {(m, c) for (m, c) in ds.labels if c in included}
    entries = [
        (pair, score) for pair, score in scores.entries.items() if pair[1] in included
    ]
    points = []
    for t in grid:
        predicted = [pair for pair, score in entries if score >= t]
        if not predicted:
            continue
        tp = sum(1 for pair in predicted if pair in truths)
        precision = tp / len(predicted)
        recall = tp / len(truths) if truths else 0.0
        points.append(PRPoint(threshold=float(t), precision=precision, recall=recall))
    return points


def p_at_1_curve(
    scores: ScoreMatrix,
    ds: Dataset,
    exclude_general: bool = False,
    thresholds: tuple[float, ...] | None = None,
) -> list[PAt1Point]:
    """Precision of each motion's top-scoring CoPA versus the fraction of
    motions with any score passing the threshold.  Argmax ties break by
    copa id; thresholds covering no motion yield no point."""
    grid = thresholds if thresholds is not None else default_threshold_grid()
    included = set(ds.included_copa_ids(exclude_general))
    best: dict[str, tuple[float, str]] = {}
    for (mid, cid), score in scores.entries.items():
        if cid not in included:
            continue
        current = best.get(mid)
        if current is None or score > current[0] or (score == current[0] and cid < current[1]):
            best[mid] = (score, cid)
    points = []
    for t in grid:
        covered = {mid: pick for mid, pick in best.items() if pick[0] >= t}
        if not covered:
            continue
        hits = sum(1 for mid, (_, cid) in covered.items() if (mid, cid) in ds.labels)
        points.append(
            PAt1Point(
                threshold=float(t),
                coverage=len(covered) / len(ds.motions),
                p_at_1=hits / len(covered),
            )
        )
    return points


# ---------------------------------------------------------------------------
# Baselines and agreement
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LargestCopaBaseline:
    copa_id: str
    precision: float


def baseline_largest(ds: Dataset, exclude_general: bool = False) -> LargestCopaBaseline:
    """Precision of always (and only) predicting the single largest CoPA:
    its size over the number of motions.  Ties break by copa id."""
    if not ds.motions or not ds.copas:
        raise ValueError("baseline needs a non-empty dataset")
    candidates = [ds.copa(cid) for cid in ds.included_copa_ids(exclude_general)]
    if not candidates:
        raise ValueError("no CoPAs left after exclusion")
    largest = min(candidates, key=lambda c: (-len(c.motion_ids), c.id))
    return LargestCopaBaseline(
        copa_id=largest.id, precision=len(largest.motion_ids) / len(ds.motions)
    )


def cohen_kappa(labels_a, labels_b) -> float:
    """Cohen's kappa for two binary annotation lists.

    Degenerate chance agreement (p_e = 1) returns 1.0 under perfect
    observed agreement and 0.0 otherwise.
    """
    a = [int(bool(x)) for x in labels_a]
    b = [int(bool(x)) for x in labels_b]
    if len(a) != len(b) or not a:
        raise LengthMismatch(f"{len(a)} vs {len(b)} labels")
    n = len(a)
    observed = sum(1 for x, y in zip(a, b) if x == y) / n
    pa = sum(a) / n
    pb = sum(b) / n
    expected = pa * pb + (1 - pa) * (1 - pb)
    if expected == 1.0:
        return 1.0 if observed == 1.0 else 0.0
    return (observed - expected) / (1.0 - expected)
