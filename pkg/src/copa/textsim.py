"""Similarity primitives: embeddings, tf-idf, and Wikipedia-title enrichment.

Everything here is pure and operates on stores that are immutable after
loading.  "Absent" similarity values are represented as ``None``; callers
that average over pairs simply skip them.

Cosine similarities over embeddings are affinely mapped from [-1, 1] to
[0, 1] so that all similarity features share one range; the map is
monotone, so rankings are unaffected.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np


class DomainError(Exception):
    """An argument is outside the operation's documented domain."""


class UnknownTopic(Exception):
    """The corpus has no article record for the requested topic."""


def _norm(term: str) -> str:
    return term.strip().lower()


# ---------------------------------------------------------------------------
# Embeddings
# ---------------------------------------------------------------------------


class EmbeddingStore:
    """word -> vector table with case-normalized lookup."""

    def __init__(self, table: dict[str, np.ndarray], dimension: int):
        if dimension <= 0:
            raise DomainError("embedding dimension must be positive")
        converted = {_norm(w): np.asarray(v, dtype=float) for w, v in table.items()}
        for word, vec in converted.items():
            if vec.shape != (dimension,):
                raise DomainError(f"vector for {word!r} has wrong dimension")
        self.dimension = dimension
        self._table = converted

    def __contains__(self, word: str) -> bool:
        return _norm(word) in self._table

    def __len__(self) -> int:
        return len(self._table)

    def get(self, word: str) -> np.ndarray | None:
        return self._table.get(_norm(word))

    @classmethod
    def from_file(cls, path) -> "EmbeddingStore":
        """Parse the textual format: one "word v1 v2 ... vd" record per
        line, with an optional "count dim" header line (auto-detected).
        Later records win on duplicate words."""
        table: dict[str, np.ndarray] = {}
        dimension = None
        with open(path, encoding="utf-8") as fh:
            first = True
            for lineno, line in enumerate(fh, start=1):
                parts = line.split()
                if not parts:
                    continue
                if first:
                    first = False
                    if len(parts) == 2 and all(_is_int(p) for p in parts):
                        dimension = int(parts[1])
                        continue
                word, values = parts[0], parts[1:]
                try:
                    vec = np.array([float(v) for v in values], dtype=float)
                except ValueError:
                    raise DomainError(f"{path}:{lineno}: non-numeric vector component") from None
                if dimension is None:
                    dimension = len(vec)
                if len(vec) != dimension:
                    raise DomainError(
                        f"{path}:{lineno}: expected {dimension} components, got {len(vec)}"
                    )
                table[_norm(word)] = vec
        if dimension is None:
            raise DomainError(f"{path}: empty embedding file")
        return cls(table, dimension)


def _is_int(token: str) -> bool:
    try:
        int(token)
        return True
    except ValueError:
        return False


def embed_term(store: EmbeddingStore, term: str) -> np.ndarray | None:
    """Unit vector for a term: known single word -> its normalized vector;
    multi-word -> normalized sum of the known word vectors; None when no
    word is known (or the sum cancels to zero exactly)."""
    vectors = [v for w in term.split() if (v := store.get(w)) is not None]
    if not vectors:
        return None
    total = np.sum(vectors, axis=0)
    length = float(np.linalg.norm(total))
    if length == 0.0:
        return None
    return total / length


# ---------------------------------------------------------------------------
# Tf-Idf
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TfIdfModel:
    """Idf table over a document collection.

    idf(t) = ln(n_docs / df(t)); terms never seen get df = 1, hence
    ln(n_docs).  Natural log, no +1 smoothing inside the log.
    """

    idf_table: dict[str, float]
    n_docs: int

    def idf(self, term: str) -> float:
        return self.idf_table.get(_norm(term), math.log(self.n_docs) if self.n_docs > 0 else 0.0)

    @classmethod
    def from_documents(cls, documents) -> "TfIdfModel":
        """``documents`` is an iterable of term collections; each document
        contributes at most one df count per distinct term."""
        df: dict[str, int] = {}
        n_docs = 0
        for doc in documents:
            n_docs += 1
            for term in {_norm(t) for t in doc}:
                df[term] = df.get(term, 0) + 1
        if n_docs == 0:
            raise DomainError("tf-idf model needs at least one document")
        idf = {t: math.log(n_docs / d) for t, d in df.items()}
        return cls(idf, n_docs)

    @classmethod
    def from_wiki_corpus(cls, corpus: "WikiCorpus") -> "TfIdfModel":
        return cls.from_documents(rec.body_terms for rec in corpus.records())


# ---------------------------------------------------------------------------
# Wikipedia corpus
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ArticleRecord:
    link_counts: dict[str, int]
    body_terms: frozenset[str]


class WikiCorpus:
    """Pre-extracted per-topic article data plus a background link pool.

    ``link_counts`` are occurrences of linked titles inside one article;
    the background aggregates link counts over a pool of random articles
    (excluding the topic articles themselves).
    """

    def __init__(
        self,
        articles: dict[str, ArticleRecord],
        background_link_counts: dict[str, int],
        background_total_links: int,
    ):
        if background_total_links < 0:
            raise DomainError("background total_links must be non-negative")
        for title, count in background_link_counts.items():
            if count < 0 or count > background_total_links:
                raise DomainError(f"background count for {title!r} out of range")
        for topic, rec in articles.items():
            for title, count in rec.link_counts.items():
                if count < 0:
                    raise DomainError(f"article {topic!r}: negative count for {title!r}")
        self._articles = articles
        self.background_link_counts = background_link_counts
        self.background_total_links = background_total_links

    def has_article(self, topic: str) -> bool:
        return _norm(topic) in self._articles

    def article(self, topic: str) -> ArticleRecord:
        try:
            return self._articles[_norm(topic)]
        except KeyError:
            raise UnknownTopic(topic) from None

    def records(self):
        return self._articles.values()

    def topics(self):
        return self._articles.keys()

    @classmethod
    def from_file(cls, path) -> "WikiCorpus":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        articles = {}
        for topic, rec in doc.get("articles", {}).items():
            articles[_norm(topic)] = ArticleRecord(
                link_counts={_norm(t): int(c) for t, c in rec.get("link_counts", {}).items()},
                body_terms=frozenset(_norm(t) for t in rec.get("body_terms", [])),
            )
        background = doc.get("background", {})
        return cls(
            articles,
            {_norm(t): int(c) for t, c in background.get("link_counts", {}).items()},
            int(background.get("total_links", 0)),
        )


# ---------------------------------------------------------------------------
# Hypergeometric upper tail
# ---------------------------------------------------------------------------


def _log_comb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def hypergeom_pvalue(k: int, n: int, K: int, N: int) -> float:
    """P[X >= k] for X ~ Hypergeometric(N, K, n), i.e. the chance of at
    least k marked items in a size-n draw from a population of N items
    of which K are marked.  Summed in log space for stability.
    """
    if not (0 <= k <= n <= N and k <= K <= N):
        raise DomainError(f"invalid hypergeometric arguments k={k} n={n} K={K} N={N}")
    lo = max(k, n - (N - K))
    hi = min(n, K)
    if lo > hi:
        return 0.0
    log_denom = _log_comb(N, n)
    log_terms = [
        _log_comb(K, i) + _log_comb(N - K, n - i) - log_denom for i in range(lo, hi + 1)
    ]
    peak = max(log_terms)
    total = peak + math.log(sum(math.exp(t - peak) for t in log_terms))
    return min(1.0, math.exp(total))


# ---------------------------------------------------------------------------
# Term and set similarity
# ---------------------------------------------------------------------------


class SimilarityKind(enum.Enum):
    EMBEDDING = "embedding"
    EMBEDDING_ALT = "embedding_alt"
    TFIDF = "tfidf"


@dataclass
class SimilarityContext:
    """The stores a similarity computation may need.  Any of them may be
    None; similarities whose store is missing come back Absent.

    Term similarities are memoized per context (they are pure in the
    stores, and evaluation recomputes the same pairs constantly)."""

    embeddings: EmbeddingStore | None = None
    alt_embeddings: EmbeddingStore | None = None
    tfidf: TfIdfModel | None = None
    wiki: WikiCorpus | None = None
    _term_cache: dict = field(default_factory=dict, repr=False)
    _title_cache: dict = field(default_factory=dict, repr=False)


def _tfidf_vector(term: str, ctx: SimilarityContext) -> dict[str, float] | None:
    # A term is represented by its article body when the corpus has one,
    # otherwise by the tokens of the term string itself.
    if ctx.tfidf is None:
        return None
    if ctx.wiki is not None and ctx.wiki.has_article(term):
        units = ctx.wiki.article(term).body_terms
    else:
        units = term.split()
    vec = {_norm(u): ctx.tfidf.idf(u) for u in units}
    vec = {u: w for u, w in vec.items() if w != 0.0}
    return vec or None


def _dict_cosine(a: dict[str, float], b: dict[str, float]) -> float:
    # iterate common keys in sorted order so cosine(a, b) == cosine(b, a)
    # bit for bit
    dot = sum(a[t] * b[t] for t in sorted(a.keys() & b.keys()))
    na = math.sqrt(sum(w * w for w in a.values()))
    nb = math.sqrt(sum(w * w for w in b.values()))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


_MISSING = object()


def term_similarity(kind: SimilarityKind, a: str, b: str, ctx: SimilarityContext) -> float | None:
    """Similarity of two terms in [0, 1], or None when either side is
    unrepresentable under the requested measure."""
    # symmetric cache key: sim(a, b) == sim(b, a) exactly, so share entries
    key = (kind, a, b) if a <= b else (kind, b, a)
    value = ctx._term_cache.get(key, _MISSING)
    if value is _MISSING:
        value = _term_similarity(kind, a, b, ctx)
        ctx._term_cache[key] = value
    return value


def _term_similarity(kind: SimilarityKind, a: str, b: str, ctx: SimilarityContext) -> float | None:
    if kind in (SimilarityKind.EMBEDDING, SimilarityKind.EMBEDDING_ALT):
        store = ctx.embeddings if kind is SimilarityKind.EMBEDDING else ctx.alt_embeddings
        if store is None:
            return None
        va = embed_term(store, a)
        vb = embed_term(store, b)
        if va is None or vb is None:
            return None
        cos = float(np.clip(np.dot(va, vb), -1.0, 1.0))
        return (cos + 1.0) / 2.0
    if kind is SimilarityKind.TFIDF:
        va = _tfidf_vector(a, ctx)
        vb = _tfidf_vector(b, ctx)
        if va is None or vb is None:
            return None
        return min(1.0, max(0.0, _dict_cosine(va, vb)))
    raise DomainError(f"unknown similarity kind {kind!r}")


def set_similarity(kind: SimilarityKind, terms_a, terms_b, ctx: SimilarityContext) -> float:
    """Mean term similarity over all cross pairs, skipping Absent pairs;
    0 when either side is empty or every pair is Absent."""
    total = 0.0
    count = 0
    for a in sorted(terms_a):
        for b in sorted(terms_b):
            sim = term_similarity(kind, a, b, ctx)
            if sim is not None:
                total += sim
                count += 1
    return total / count if count else 0.0


# ---------------------------------------------------------------------------
# Topic enrichment
# ---------------------------------------------------------------------------


def topic_related_titles(topic: str, corpus: WikiCorpus, cap: int = 10) -> list[str]:
    """The (at most) ``cap`` titles linked from the topic's article that
    are most enriched versus the background pool, ascending by
    hypergeometric p-value with lexicographic tie-breaks."""
    record = corpus.article(topic)  # raises UnknownTopic
    n = sum(record.link_counts.values())
    scored = []
    for title, count in record.link_counts.items():
        background = corpus.background_link_counts.get(title, 0)
        p = hypergeom_pvalue(
            k=count,
            n=n,
            K=count + background,
            N=n + corpus.background_total_links,
        )
        scored.append((p, title))
    scored.sort()
    return [title for _, title in scored[:cap]]


def avg_idf_in_article(copa_titles, topic: str, corpus: WikiCorpus | None, tfidf: TfIdfModel) -> float:
    """Mean idf of the CoPA's manual titles that occur in the topic's
    article body; 0 when the article is missing or nothing intersects."""
    if corpus is None or not corpus.has_article(topic):
        return 0.0
    body = corpus.article(topic).body_terms
    present = [t for t in copa_titles if _norm(t) in body]
    if not present:
        return 0.0
    return sum(tfidf.idf(t) for t in present) / len(present)
