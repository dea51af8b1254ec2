"""Matching methods: per-CoPA scorers over motions, plus their ensemble.

Five methods are implemented: action statistics (BA-k), nearest
neighbours over topic similarity (KNN), logistic regression over topic
embeddings (W2V), Naive Bayes over retrieved topic sentences (NB), and
logistic regression over the engineered 17-feature vectors (LR).  The
ensemble takes, per CoPA, the maximum score any method produced.

Scores live in [0, 1]; ``None`` means the method abstains for that pair
and never passes any decision threshold.  All training is deterministic:
zero-initialized optimizers, no sampling, ordered iteration.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .features import FEATURE_ORDERING, Standardizer, compute_features, standardize
from .kb import Dataset, Motion
from .textsim import SimilarityContext, SimilarityKind, embed_term, term_similarity

Score = float | None


class DimensionMismatch(Exception):
    """Training inputs disagree in length or width."""


# ---------------------------------------------------------------------------
# Score matrices
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class ScoreMatrix:
    """Scores of one method for every (motion, CoPA) pair.

    Pairs missing from ``entries`` are abstentions; stored entries are
    always within [0, 1].
    """

    method: str
    motion_ids: tuple[str, ...]
    copa_ids: tuple[str, ...]
    entries: dict[tuple[str, str], float] = field(default_factory=dict)

    def __post_init__(self):
        self._motion_set = set(self.motion_ids)
        self._copa_set = set(self.copa_ids)
        for (mid, cid), score in self.entries.items():
            self._check(mid, cid, score)

    def _check(self, mid: str, cid: str, score: float):
        if mid not in self._motion_set or cid not in self._copa_set:
            raise KeyError(f"({mid!r}, {cid!r}) outside the matrix id space")
        if not (0.0 <= score <= 1.0):
            raise ValueError(f"score {score} for ({mid!r}, {cid!r}) outside [0, 1]")

    def get(self, motion_id: str, copa_id: str) -> Score:
        return self.entries.get((motion_id, copa_id))

    def put(self, motion_id: str, copa_id: str, score: Score) -> None:
        if score is None:
            self.entries.pop((motion_id, copa_id), None)
            return
        score = float(score)
        self._check(motion_id, copa_id, score)
        self.entries[(motion_id, copa_id)] = score

    def put_motion(self, motion_id: str, scores: dict[str, Score]) -> None:
        for copa_id, score in scores.items():
            self.put(motion_id, copa_id, score)

    def motion_scores(self, motion_id: str) -> dict[str, float]:
        """Non-abstain scores of one motion, keyed by copa id."""
        return {
            cid: self.entries[(motion_id, cid)]
            for cid in self.copa_ids
            if (motion_id, cid) in self.entries
        }


def ensemble(matrices: list[ScoreMatrix], method: str = "ensemble") -> ScoreMatrix:
    """Per-pair maximum over the inputs; abstains only where every input
    abstained.  All matrices must share one id space."""
    if not matrices:
        raise ValueError("ensemble needs at least one score matrix")
    first = matrices[0]
    for m in matrices[1:]:
        if set(m.motion_ids) != set(first.motion_ids) or set(m.copa_ids) != set(first.copa_ids):
            raise ValueError("ensemble inputs have inconsistent id spaces")
    out = ScoreMatrix(method, first.motion_ids, first.copa_ids)
    for m in matrices:
        for pair, score in m.entries.items():
            current = out.entries.get(pair)
            if current is None or score > current:
                out.entries[pair] = score
    return out


# ---------------------------------------------------------------------------
# Logistic regression core
# ---------------------------------------------------------------------------


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    if out.ndim == 0:
        return float(out)
    return out


def logreg_objective(X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, lam: float) -> float:
    """Mean negative log-likelihood plus (lam/2)*||w||^2; bias excluded
    from the penalty."""
    z = X @ w + b
    signs = 2.0 * y - 1.0
    nll = float(np.logaddexp(0.0, -signs * z).mean())
    return nll + 0.5 * lam * float(w @ w)


def _logreg_gradient(X, y, w, b, lam):
    n = len(y)
    residual = (sigmoid(X @ w + b) - y) / n
    grad_w = X.T @ residual + lam * w
    grad_b = float(residual.sum())
    return grad_w, grad_b


def logreg_fit(
    X,
    y,
    lam: float = 1e-3,
    tol: float = 1e-6,
    max_iters: int = 10000,
    on_step=None,
) -> tuple[np.ndarray, float]:
    """Deterministic full-batch gradient descent with backtracking line
    search from a zero start.  Stops when the gradient norm drops below
    ``tol`` or after ``max_iters`` steps.  Returns (weights, bias).

    ``on_step(iteration, objective)`` is called after every accepted
    step; the accepted objective values never increase.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch("X must be a 2-d array")
    if len(X) != len(y) or len(y) == 0:
        raise DimensionMismatch(f"{len(X)} rows vs {len(y)} labels")
    n, d = X.shape

    w = np.zeros(d)
    b = 0.0
    value = logreg_objective(X, y, w, b, lam)
    for iteration in range(max_iters):
        grad_w, grad_b = _logreg_gradient(X, y, w, b, lam)
        grad_sq = float(grad_w @ grad_w) + grad_b * grad_b
        if math.sqrt(grad_sq) < tol:
            break
        step = 1.0
        while step > 1e-20:
            cand_w = w - step * grad_w
            cand_b = b - step * grad_b
            cand_value = logreg_objective(X, y, cand_w, cand_b, lam)
            if cand_value <= value - 1e-4 * step * grad_sq:
                break
            step *= 0.5
        else:
            break  # no descent direction left at float precision
        assert cand_value <= value, "line search accepted an ascent step"
        w, b, value = cand_w, cand_b, cand_value
        if on_step is not None:
            on_step(iteration, value)
    return w, b


@dataclass
class LogRegModel:
    """A trained logistic regression scorer (optionally standardizing its
    inputs first).  ``feature_ordering`` documents what the weights mean."""

    weights: np.ndarray
    bias: float
    standardizer: Standardizer | None = None
    lam: float = 1e-3
    tol: float = 1e-6
    max_iters: int = 10000
    feature_ordering: str = ""

    def score(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        if self.standardizer is not None:
            x = self.standardizer.transform(x)
        return float(sigmoid(float(self.weights @ x) + self.bias))

    def to_dict(self) -> dict:
        return {
            "method": "feature_lr",
            "weights": self.weights.tolist(),
            "bias": self.bias,
            "standardizer": None if self.standardizer is None else self.standardizer.to_dict(),
            "hyperparameters": {"lam": self.lam, "tol": self.tol, "max_iters": self.max_iters},
            "feature_ordering": self.feature_ordering,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LogRegModel":
        hp = doc.get("hyperparameters", {})
        std = doc.get("standardizer")
        return cls(
            weights=np.array(doc["weights"], dtype=float),
            bias=float(doc["bias"]),
            standardizer=None if std is None else Standardizer.from_dict(std),
            lam=hp.get("lam", 1e-3),
            tol=hp.get("tol", 1e-6),
            max_iters=hp.get("max_iters", 10000),
            feature_ordering=doc.get("feature_ordering", ""),
        )


# ---------------------------------------------------------------------------
# BA-k: action statistics
# ---------------------------------------------------------------------------


@dataclass
class BAModel:
    """p(c, a): probability that a training motion with action a belongs
    to CoPA c, with per-pair support counts and the abstention cutoff k."""

    k: int
    copa_ids: tuple[str, ...]
    action_totals: dict[str, int]
    support: dict[tuple[str, str], int]

    def probability(self, copa_id: str, action: str) -> float | None:
        total = self.action_totals.get(action, 0)
        if total == 0:
            return None
        return self.support.get((copa_id, action), 0) / total

    def to_dict(self) -> dict:
        nested: dict[str, dict[str, int]] = {}
        for (cid, action), count in sorted(self.support.items()):
            nested.setdefault(cid, {})[action] = count
        return {
            "method": "ba",
            "hyperparameters": {"k": self.k},
            "copa_ids": list(self.copa_ids),
            "action_totals": dict(sorted(self.action_totals.items())),
            "support": nested,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "BAModel":
        support = {
            (cid, action): int(count)
            for cid, by_action in doc["support"].items()
            for action, count in by_action.items()
        }
        return cls(
            k=int(doc["hyperparameters"]["k"]),
            copa_ids=tuple(doc["copa_ids"]),
            action_totals={a: int(n) for a, n in doc["action_totals"].items()},
            support=support,
        )


def train_ba(ds: Dataset, k: int = 5) -> BAModel:
    if k < 1:
        raise ValueError("k must be at least 1")
    action_totals: dict[str, int] = {}
    support: dict[tuple[str, str], int] = {}
    for m in ds.motions:
        action_totals[m.action] = action_totals.get(m.action, 0) + 1
    for c in ds.copas:
        for mid in c.motion_ids:
            action = ds.motion(mid).action
            support[(c.id, action)] = support.get((c.id, action), 0) + 1
    return BAModel(k=k, copa_ids=ds.copa_ids, action_totals=action_totals, support=support)


def predict_ba(model: BAModel, motion: Motion) -> dict[str, Score]:
    """p(c, action) per CoPA; abstains where fewer than k training
    motions back the estimate (and everywhere for unseen actions)."""
    if model.action_totals.get(motion.action, 0) == 0:
        return {cid: None for cid in model.copa_ids}
    scores: dict[str, Score] = {}
    for cid in model.copa_ids:
        if model.support.get((cid, motion.action), 0) >= model.k:
            scores[cid] = model.probability(cid, motion.action)
        else:
            scores[cid] = None
    return scores


# ---------------------------------------------------------------------------
# KNN over topic similarity
# ---------------------------------------------------------------------------


def predict_knn(
    ds_train: Dataset,
    motion: Motion,
    ctx: SimilarityContext,
    sim_kind: SimilarityKind = SimilarityKind.EMBEDDING,
    threshold: float = 0.5,
    min_neighbors: int = 3,
    top: int = 5,
    exclude_topic: str | None = None,
) -> dict[str, Score]:
    """Fraction of the query topic's nearest training motions that belong
    to each CoPA.

    Candidates are training motions whose topic similarity exceeds
    ``threshold``; with fewer than ``min_neighbors`` of them the method
    abstains entirely, otherwise the best ``top`` (ties broken by motion
    id) vote.  ``exclude_topic`` drops same-topic training motions, used
    by leave-one-out evaluation.
    """
    skip = exclude_topic.lower() if exclude_topic is not None else None
    candidates: list[tuple[float, Motion]] = []
    for m in ds_train.motions:
        if m.id == motion.id:
            continue
        if skip is not None and m.topic.lower() == skip:
            continue
        sim = term_similarity(sim_kind, motion.topic, m.topic, ctx)
        if sim is not None and sim > threshold:
            candidates.append((sim, m))
    if len(candidates) < min_neighbors:
        return {cid: None for cid in ds_train.copa_ids}
    candidates.sort(key=lambda pair: (-pair[0], pair[1].id))
    neighbours = [m for _, m in candidates[:top]]
    scores: dict[str, Score] = {}
    for c in ds_train.copas:
        inside = sum(1 for m in neighbours if m.id in c.motion_ids)
        scores[c.id] = inside / len(neighbours)
    return scores


# ---------------------------------------------------------------------------
# Action blacklists
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Blacklist:
    """Per-CoPA set of actions never seen inside the CoPA in training;
    used by W2V and NB to veto predictions."""

    actions_by_copa: dict[str, frozenset[str]]

    def blocks(self, copa_id: str, action: str) -> bool:
        return action in self.actions_by_copa.get(copa_id, frozenset())

    def to_dict(self) -> dict:
        return {cid: sorted(acts) for cid, acts in sorted(self.actions_by_copa.items())}

    @classmethod
    def from_dict(cls, doc: dict) -> "Blacklist":
        return cls({cid: frozenset(acts) for cid, acts in doc.items()})


def build_blacklist(ds: Dataset) -> Blacklist:
    all_actions = {a.id for a in ds.actions}
    table = {}
    for c in ds.copas:
        present = {ds.motion(mid).action for mid in c.motion_ids}
        table[c.id] = frozenset(all_actions - present)
    return Blacklist(table)


# ---------------------------------------------------------------------------
# W2V: logistic regression over topic embeddings
# ---------------------------------------------------------------------------


@dataclass
class W2VClassifier:
    per_copa: dict[str, LogRegModel]
    blacklist: Blacklist

    def to_dict(self) -> dict:
        return {
            "method": "w2v",
            "per_copa": {cid: m.to_dict() for cid, m in sorted(self.per_copa.items())},
            "blacklist": self.blacklist.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "W2VClassifier":
        return cls(
            per_copa={cid: LogRegModel.from_dict(m) for cid, m in doc["per_copa"].items()},
            blacklist=Blacklist.from_dict(doc["blacklist"]),
        )


def train_w2v_lr(
    ds: Dataset,
    ctx: SimilarityContext,
    lam: float = 1e-3,
    tol: float = 1e-6,
    max_iters: int = 10000,
) -> W2VClassifier:
    """One-vs-rest logistic regression per CoPA over unit topic vectors.
    Motions whose topic has no embedding are left out of training."""
    if ctx.embeddings is None:
        raise ValueError("w2v training requires an embedding store")
    rows = []
    row_motions = []
    for m in ds.motions:
        vec = embed_term(ctx.embeddings, m.topic)
        if vec is not None:
            rows.append(vec)
            row_motions.append(m)
    blacklist = build_blacklist(ds)
    per_copa: dict[str, LogRegModel] = {}
    if rows:
        X = np.stack(rows)
        ordering = f"topic_embedding[{X.shape[1]}]"
        for c in ds.copas:
            y = np.array([1.0 if m.id in c.motion_ids else 0.0 for m in row_motions])
            w, b = logreg_fit(X, y, lam=lam, tol=tol, max_iters=max_iters)
            per_copa[c.id] = LogRegModel(
                weights=w, bias=b, standardizer=None,
                lam=lam, tol=tol, max_iters=max_iters, feature_ordering=ordering,
            )
    return W2VClassifier(per_copa=per_copa, blacklist=blacklist)


def predict_w2v(clf: W2VClassifier, motion: Motion, ctx: SimilarityContext) -> dict[str, Score]:
    copa_ids = sorted(clf.blacklist.actions_by_copa)
    if ctx.embeddings is None:
        return {cid: None for cid in copa_ids}
    x = embed_term(ctx.embeddings, motion.topic)
    if x is None:
        return {cid: None for cid in copa_ids}
    scores: dict[str, Score] = {}
    for cid in copa_ids:
        model = clf.per_copa.get(cid)
        if model is None:
            scores[cid] = None
        elif clf.blacklist.blocks(cid, motion.action):
            scores[cid] = 0.0
        else:
            scores[cid] = model.score(x)
    return scores


# ---------------------------------------------------------------------------
# NB: Naive Bayes over retrieved topic sentences
# ---------------------------------------------------------------------------

_WORD_RE = re.compile(r"\w+")


def tokenize(sentence: str) -> list[str]:
    return _WORD_RE.findall(sentence.lower())


class TopicSentenceCorpus:
    """topic -> sentences mentioning that topic, loaded from JSON lines
    of {"topic": ..., "sentence": ...}."""

    def __init__(self, sentences: dict[str, list[str]]):
        self._sentences: dict[str, list[str]] = {}
        for topic, sents in sentences.items():
            for s in sents:
                if not s:
                    raise ValueError(f"empty sentence for topic {topic!r}")
            self._sentences[topic.strip().lower()] = list(sents)

    def get(self, topic: str) -> list[str]:
        return self._sentences.get(topic.strip().lower(), [])

    def topics(self):
        return self._sentences.keys()

    @classmethod
    def from_jsonl(cls, path) -> "TopicSentenceCorpus":
        table: dict[str, list[str]] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValueError(f"{path}:{lineno}: bad JSON line ({exc})") from exc
                table.setdefault(str(rec["topic"]), []).append(str(rec["sentence"]))
        return cls(table)


@dataclass
class NBModel:
    """Unigram Naive Bayes for one CoPA: sentence-level positive /
    negative classes with Laplace smoothing over the shared vocabulary."""

    alpha: float
    log_prior_pos: float
    log_prior_neg: float
    log_prob_pos: dict[str, float]
    log_prob_neg: dict[str, float]

    def sentence_posterior(self, sentence: str) -> float:
        """P(positive | sentence); prediction-time words outside the
        training vocabulary are skipped."""
        lp = self.log_prior_pos
        ln = self.log_prior_neg
        for w in tokenize(sentence):
            if w in self.log_prob_pos:
                lp += self.log_prob_pos[w]
                ln += self.log_prob_neg[w]
        if lp == -math.inf and ln == -math.inf:
            return 0.5
        # sigmoid of the log-odds: exact 0.5 under perfect symmetry
        return float(sigmoid(lp - ln))

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "log_prior_pos": self.log_prior_pos,
            "log_prior_neg": self.log_prior_neg,
            "log_prob_pos": dict(sorted(self.log_prob_pos.items())),
            "log_prob_neg": dict(sorted(self.log_prob_neg.items())),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "NBModel":
        return cls(
            alpha=float(doc["alpha"]),
            log_prior_pos=float(doc["log_prior_pos"]),
            log_prior_neg=float(doc["log_prior_neg"]),
            log_prob_pos={w: float(v) for w, v in doc["log_prob_pos"].items()},
            log_prob_neg={w: float(v) for w, v in doc["log_prob_neg"].items()},
        )


@dataclass
class NBClassifier:
    per_copa: dict[str, NBModel]
    blacklist: Blacklist

    def to_dict(self) -> dict:
        return {
            "method": "nb",
            "per_copa": {cid: m.to_dict() for cid, m in sorted(self.per_copa.items())},
            "blacklist": self.blacklist.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "NBClassifier":
        return cls(
            per_copa={cid: NBModel.from_dict(m) for cid, m in doc["per_copa"].items()},
            blacklist=Blacklist.from_dict(doc["blacklist"]),
        )


def _log_or_neg_inf(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def train_nb(ds: Dataset, corpus: TopicSentenceCorpus, alpha: float = 1.0) -> NBClassifier:
    """Sentences of member-motion topics are the positive class, all
    other motions' sentences the negative class, per CoPA."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    blacklist = build_blacklist(ds)
    per_copa: dict[str, NBModel] = {}
    motion_sentences = [(m, corpus.get(m.topic)) for m in ds.motions]
    for c in ds.copas:
        pos_counts: Counter[str] = Counter()
        neg_counts: Counter[str] = Counter()
        pos_sentences = 0
        neg_sentences = 0
        for m, sents in motion_sentences:
            if m.id in c.motion_ids:
                pos_sentences += len(sents)
                for s in sents:
                    pos_counts.update(tokenize(s))
            else:
                neg_sentences += len(sents)
                for s in sents:
                    neg_counts.update(tokenize(s))
        vocab = sorted(set(pos_counts) | set(neg_counts))
        pos_total = sum(pos_counts.values())
        neg_total = sum(neg_counts.values())
        denom_pos = pos_total + alpha * len(vocab)
        denom_neg = neg_total + alpha * len(vocab)
        total_sentences = pos_sentences + neg_sentences
        per_copa[c.id] = NBModel(
            alpha=alpha,
            log_prior_pos=_log_or_neg_inf(pos_sentences / total_sentences if total_sentences else 0.0),
            log_prior_neg=_log_or_neg_inf(neg_sentences / total_sentences if total_sentences else 0.0),
            log_prob_pos={w: math.log((pos_counts[w] + alpha) / denom_pos) for w in vocab},
            log_prob_neg={w: math.log((neg_counts[w] + alpha) / denom_neg) for w in vocab},
        )
    return NBClassifier(per_copa=per_copa, blacklist=blacklist)


def predict_nb(clf: NBClassifier, motion: Motion, corpus: TopicSentenceCorpus) -> dict[str, Score]:
    """Mean per-sentence posterior over the topic's sentences; abstains
    when the corpus has none, 0 where the blacklist vetoes the action."""
    copa_ids = sorted(clf.per_copa)
    sentences = corpus.get(motion.topic)
    if not sentences:
        return {cid: None for cid in copa_ids}
    scores: dict[str, Score] = {}
    for cid in copa_ids:
        if clf.blacklist.blocks(cid, motion.action):
            scores[cid] = 0.0
            continue
        model = clf.per_copa[cid]
        posterior = sum(model.sentence_posterior(s) for s in sentences) / len(sentences)
        scores[cid] = min(1.0, max(0.0, posterior))
    return scores


# ---------------------------------------------------------------------------
# LR: logistic regression over engineered features
# ---------------------------------------------------------------------------


def train_feature_lr(
    ds: Dataset,
    ctx: SimilarityContext,
    lam: float = 1e-3,
    tol: float = 1e-6,
    max_iters: int = 10000,
    loo_holdout: str | None = None,
) -> LogRegModel:
    """A single pair classifier over standardized 17-feature vectors of
    every (motion, CoPA) combination in the training set."""
    motions = [m for m in ds.motions if m.id != loo_holdout]
    if not motions:
        raise DimensionMismatch("no training motions left")
    X = []
    y = []
    for m in motions:
        for c in ds.copas:
            X.append(compute_features(m, c, ds, ctx, loo_holdout=loo_holdout))
            y.append(1.0 if (m.id, c.id) in ds.labels else 0.0)
    X = np.stack(X)
    scaler = standardize(X)
    w, b = logreg_fit(scaler.transform_many(X), np.array(y), lam=lam, tol=tol, max_iters=max_iters)
    return LogRegModel(
        weights=w, bias=b, standardizer=scaler,
        lam=lam, tol=tol, max_iters=max_iters, feature_ordering=FEATURE_ORDERING,
    )


def predict_feature_lr(
    model: LogRegModel,
    motion: Motion,
    ds: Dataset,
    ctx: SimilarityContext,
    loo_holdout: str | None = None,
) -> dict[str, Score]:
    """Sigmoid score per CoPA; this method never abstains."""
    return {
        c.id: model.score(compute_features(motion, c, ds, ctx, loo_holdout=loo_holdout))
        for c in ds.copas
    }


# ---------------------------------------------------------------------------
# Model persistence
# ---------------------------------------------------------------------------

_MODEL_TYPES = {
    "ba": BAModel,
    "w2v": W2VClassifier,
    "nb": NBClassifier,
    "feature_lr": LogRegModel,
}


def save_model(model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    method = doc.get("method")
    if method not in _MODEL_TYPES:
        raise ValueError(f"{path}: unknown model method tag {method!r}")
    return _MODEL_TYPES[method].from_dict(doc)
