"""Shared builders for toy datasets and synthetic embedding stores."""

from __future__ import annotations

import numpy as np

from copa.kb import Action, ActionRegistry, Claim, CoPA, Dataset, Motion, Stance
from copa.textsim import EmbeddingStore

ACTION_POOL = ("ban", "legalize", "subsidize", "promote", "limit")


def make_registry(action_ids=ACTION_POOL) -> ActionRegistry:
    return ActionRegistry([Action(a, a.replace("_", " ")) for a in action_ids])


def default_claims(name: str) -> tuple[Claim, Claim]:
    return (
        Claim(f"[TOPIC] advances {name}", Stance.PRO),
        Claim(f"[TOPIC] undermines {name}", Stance.CON),
    )


def build_dataset(motions, copas, labels, general=(), registry=None) -> Dataset:
    """motions: (id, action, topic) triples; copas: (id, name) pairs or
    (id, name, topic_related, titles) tuples; labels: (motion, copa) pairs."""
    registry = registry or make_registry()
    motion_objs = tuple(Motion(mid, action, topic) for mid, action, topic in motions)
    label_set = frozenset(labels)
    copa_objs = []
    for entry in copas:
        cid, name = entry[0], entry[1]
        topic_related = entry[2] if len(entry) > 2 else False
        titles = tuple(entry[3]) if len(entry) > 3 else ()
        members = frozenset(m for m, c in label_set if c == cid)
        copa_objs.append(
            CoPA(cid, name, topic_related, titles, default_claims(name), members)
        )
    return Dataset(
        actions=registry,
        motions=motion_objs,
        copas=tuple(copa_objs),
        labels=label_set,
        general_copa_ids=frozenset(general),
        label_flags={},
    )


def random_dataset(rng: np.random.Generator, max_motions=20, max_copas=5,
                   label_prob=0.4, distinct_topics=True) -> Dataset:
    n_motions = int(rng.integers(2, max_motions + 1))
    n_copas = int(rng.integers(1, max_copas + 1))
    topics = [f"topic{i:02d}" for i in range(n_motions)]
    if not distinct_topics and n_motions >= 4:
        topics[1] = topics[0]  # one duplicated topic to exercise tie handling
    motions = [
        (f"m{i:02d}", ACTION_POOL[int(rng.integers(0, len(ACTION_POOL)))], topics[i])
        for i in range(n_motions)
    ]
    copas = [(f"c{j}", f"theme {j}") for j in range(n_copas)]
    labels = [
        (m[0], c[0]) for m in motions for c in copas if rng.random() < label_prob
    ]
    return build_dataset(motions, copas, labels)


def random_embeddings(rng: np.random.Generator, words, dim=8) -> EmbeddingStore:
    table = {w: rng.normal(size=dim) for w in sorted(set(words))}
    return EmbeddingStore(table, dim)


def topic_words(ds: Dataset):
    words = set()
    for m in ds.motions:
        words.update(m.topic.split())
        words.update(ds.actions.surface(m.action).split())
    return words
