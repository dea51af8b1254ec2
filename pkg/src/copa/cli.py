"""Command-line front door.

Subcommands: ``stats``, ``match``, ``invent``, ``eval``, ``features``.
Everything is driven by a JSON config file naming the dataset and the
optional similarity stores; any config field can be overridden by a
``COPA_``-prefixed environment variable, and flags override both.

Exit codes: 0 success, 2 configuration problem, 3 domain problem (e.g.
unknown action), 4 I/O or data-file problem.
"""

from __future__ import annotations

import dataclasses
import json
import os
import sys
from dataclasses import dataclass

import click

from . import classifiers as clfmod
from . import evaluation as evalmod
from . import kb
from .classifiers import TopicSentenceCorpus
from .evaluation import EvalConfig, default_threshold_grid
from .features import FEATURE_NAMES, compute_features
from .textsim import (
    DomainError,
    EmbeddingStore,
    SimilarityContext,
    TfIdfModel,
    WikiCorpus,
)

EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_IO = 4

ENV_PREFIX = "COPA_"

#: stores each method cannot run without
_METHOD_REQUIRES = {"knn": "embeddings", "w2v": "embeddings", "nb": "sentence_corpus"}


class ConfigError(Exception):
    pass


class CliDomainError(Exception):
    pass


@dataclass
class AppConfig:
    dataset: str | None = None
    embeddings: str | None = None
    alt_embeddings: str | None = None
    sentence_corpus: str | None = None
    wiki_corpus: str | None = None
    ba_k: int = 5
    knn_threshold: float = 0.5
    knn_min_neighbors: int = 3
    knn_top: int = 5
    nb_alpha: float = 1.0
    l2_lambda: float = 1e-3
    tol: float = 1e-6
    max_iters: int = 10000
    threshold_step: float = 0.01
    topic_min_motions: int = 10
    exclude_general: bool = False
    methods: tuple[str, ...] = evalmod.KNOWN_METHODS

    @classmethod
    def load(cls, path: str | None, env=None) -> "AppConfig":
        """File values, then COPA_* environment overrides, then defaults."""
        env = os.environ if env is None else env
        values: dict = {}
        if path is not None:
            try:
                with open(path, encoding="utf-8") as fh:
                    doc = json.load(fh)
            except OSError as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
            if not isinstance(doc, dict):
                raise ConfigError(f"config {path}: top level must be an object")
            values.update(doc)

        fields = {f.name: f for f in dataclasses.fields(cls)}
        for name in fields:
            env_key = ENV_PREFIX + name.upper()
            if env_key in env:
                values[name] = env[env_key]

        unknown = set(values) - set(fields)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

        cfg = cls()
        for name, value in values.items():
            setattr(cfg, name, _coerce(name, value, fields[name].type))
        cfg.validate()
        return cfg

    def validate(self):
        checks = [
            (self.ba_k >= 1, "ba_k must be >= 1"),
            (0.0 <= self.knn_threshold <= 1.0, "knn_threshold must be in [0, 1]"),
            (self.knn_min_neighbors >= 1, "knn_min_neighbors must be >= 1"),
            (self.knn_top >= 1, "knn_top must be >= 1"),
            (self.nb_alpha > 0, "nb_alpha must be positive"),
            (self.l2_lambda >= 0, "l2_lambda must be non-negative"),
            (self.tol > 0, "tol must be positive"),
            (self.max_iters >= 1, "max_iters must be >= 1"),
            (0.0 < self.threshold_step <= 1.0, "threshold_step must be in (0, 1]"),
            (self.topic_min_motions >= 0, "topic_min_motions must be >= 0"),
            (len(self.methods) > 0, "methods must not be empty"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        for m in self.methods:
            if m not in evalmod.KNOWN_METHODS:
                raise ConfigError(f"unknown method {m!r} in config")

    def eval_config(self, exclude_general: bool | None = None) -> EvalConfig:
        return EvalConfig(
            methods=tuple(self.methods),
            ba_k=self.ba_k,
            knn_threshold=self.knn_threshold,
            knn_min_neighbors=self.knn_min_neighbors,
            knn_top=self.knn_top,
            nb_alpha=self.nb_alpha,
            lam=self.l2_lambda,
            tol=self.tol,
            max_iters=self.max_iters,
            topic_min_motions=self.topic_min_motions,
            exclude_general=self.exclude_general if exclude_general is None else exclude_general,
            thresholds=default_threshold_grid(self.threshold_step),
        )


def _coerce(name: str, value, declared: str):
    if value is None:
        return None
    if name == "methods":
        if isinstance(value, str):
            parts = [p.strip() for p in value.split(",") if p.strip()]
            return tuple(parts)
        if isinstance(value, (list, tuple)):
            return tuple(str(v) for v in value)
        raise ConfigError("methods must be a list or a comma-separated string")
    if "bool" in declared:
        if isinstance(value, bool):
            return value
        text = str(value).strip().lower()
        if text in ("1", "true", "yes", "on"):
            return True
        if text in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: cannot parse boolean from {value!r}")
    if "int" in declared:
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{name}: cannot parse integer from {value!r}") from None
    if "float" in declared:
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{name}: cannot parse number from {value!r}") from None
    return str(value)


# ---------------------------------------------------------------------------
# Resource loading
# ---------------------------------------------------------------------------


def _load_dataset(cfg: AppConfig) -> kb.Dataset:
    if cfg.dataset is None:
        raise ConfigError("no dataset path configured (set 'dataset' or COPA_DATASET)")
    return kb.load_dataset(cfg.dataset)


def _build_context(cfg: AppConfig, methods) -> SimilarityContext:
    for method in methods:
        required = _METHOD_REQUIRES.get(method)
        if required and getattr(cfg, required) is None:
            raise ConfigError(f"method {method!r} requires the {required!r} path")
    embeddings = EmbeddingStore.from_file(cfg.embeddings) if cfg.embeddings else None
    alt = EmbeddingStore.from_file(cfg.alt_embeddings) if cfg.alt_embeddings else None
    wiki = WikiCorpus.from_file(cfg.wiki_corpus) if cfg.wiki_corpus else None
    tfidf = TfIdfModel.from_wiki_corpus(wiki) if wiki is not None else None
    return SimilarityContext(embeddings=embeddings, alt_embeddings=alt, tfidf=tfidf, wiki=wiki)


def _load_corpus(cfg: AppConfig, methods) -> TopicSentenceCorpus | None:
    if "nb" not in methods:
        return None
    if cfg.sentence_corpus is None:
        raise ConfigError("method 'nb' requires the 'sentence_corpus' path")
    return TopicSentenceCorpus.from_jsonl(cfg.sentence_corpus)


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(fn):
    """Run a command body, mapping exceptions to the documented exit codes."""
    try:
        fn()
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))
    except CliDomainError as exc:
        _fail(EXIT_DOMAIN, str(exc))
    except (kb.ParseError, kb.ValidationError, DomainError) as exc:
        _fail(EXIT_IO, str(exc))
    except BrokenPipeError:
        # downstream consumer (e.g. head) closed the pipe; silence the
        # interpreter's shutdown flush and report as an I/O condition
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        sys.exit(EXIT_IO)
    except OSError as exc:
        _fail(EXIT_IO, str(exc))


def _fmt(x: float) -> str:
    return format(float(x), ".10g")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


@click.group()
@click.option("--config", "config_path", type=str, default=None, help="Path to the JSON config file.")
@click.option("--exclude-general/--include-general", default=None,
              help="Drop the general CoPAs from statistics and curves.")
@click.pass_context
def main(ctx, config_path, exclude_general):
    """Match debate motions against a taxonomy of recurring arguments."""
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path
    ctx.obj["exclude_general"] = exclude_general


def _config_from_ctx(ctx) -> AppConfig:
    cfg = AppConfig.load(ctx.obj.get("config_path"))
    override = ctx.obj.get("exclude_general")
    if override is not None:
        cfg.exclude_general = override
    return cfg


@main.command()
@click.pass_context
def stats(ctx):
    """Print dataset statistics (sizes, coverage, memberships)."""

    def body():
        cfg = _config_from_ctx(ctx)
        ds = _load_dataset(cfg)
        st = kb.copa_stats(ds, exclude_general=cfg.exclude_general)
        click.echo(f"motions: {len(ds.motions)}")
        click.echo(f"copas: {len(ds.copas)}")
        click.echo(f"labels: {len(ds.labels)}")
        click.echo(f"general_excluded: {cfg.exclude_general}")
        click.echo(f"covered_fraction: {_fmt(st.covered_fraction)}")
        click.echo(f"mean_copas_per_motion: {_fmt(st.mean_copas_per_motion)}")
        click.echo(f"max_copas_per_motion: {st.max_copas_per_motion}")
        for cid in sorted(st.sizes, key=lambda c: (-st.sizes[c], c)):
            click.echo(f"size {cid}: {st.sizes[cid]}")

    _guarded(body)


@main.command()
@click.argument("action")
@click.argument("topic")
@click.option("--method", default="ensemble",
              type=click.Choice(tuple(evalmod.KNOWN_METHODS) + ("ensemble",)),
              help="Scoring method.")
@click.option("--threshold", default=0.0, type=float, help="Minimum score to report.")
@click.pass_context
def match(ctx, action, topic, method, threshold):
    """Rank CoPAs for the motion (ACTION, TOPIC) and show their claims."""

    def body():
        cfg = _config_from_ctx(ctx)
        ds = _load_dataset(cfg)
        if action not in ds.actions:
            raise CliDomainError(f"unknown action {action!r}")
        query = kb.Motion(id="@query", action=action, topic=topic)
        methods = tuple(cfg.methods) if method == "ensemble" else (method,)
        ctx_sim = _build_context(cfg, methods)
        corpus = _load_corpus(cfg, methods)
        per_method = {
            name: _score_query(name, ds, query, cfg, ctx_sim, corpus) for name in methods
        }
        combined: dict[str, float] = {}
        for scores in per_method.values():
            for cid, s in scores.items():
                if s is not None and (cid not in combined or s > combined[cid]):
                    combined[cid] = s
        ranked = sorted(
            ((cid, s) for cid, s in combined.items() if s >= threshold),
            key=lambda pair: (-pair[1], pair[0]),
        )
        for cid, s in ranked:
            copa = ds.copa(cid)
            click.echo(f"{cid}\t{_fmt(s)}\t{copa.name}")
            for stance in (kb.Stance.PRO, kb.Stance.CON):
                claim = kb.instantiate_claim(copa.claim(stance), query)
                click.echo(f"  {stance.value}: {claim}")

    _guarded(body)


def _score_query(method, ds, query, cfg, ctx_sim, corpus):
    if method == "ba":
        return clfmod.predict_ba(clfmod.train_ba(ds, k=cfg.ba_k), query)
    if method == "knn":
        return clfmod.predict_knn(
            ds, query, ctx_sim,
            threshold=cfg.knn_threshold,
            min_neighbors=cfg.knn_min_neighbors,
            top=cfg.knn_top,
        )
    if method == "w2v":
        model = clfmod.train_w2v_lr(ds, ctx_sim, lam=cfg.l2_lambda, tol=cfg.tol,
                                    max_iters=cfg.max_iters)
        return clfmod.predict_w2v(model, query, ctx_sim)
    if method == "nb":
        model = clfmod.train_nb(ds, corpus, alpha=cfg.nb_alpha)
        return clfmod.predict_nb(model, query, corpus)
    if method == "lr":
        model = clfmod.train_feature_lr(ds, ctx_sim, lam=cfg.l2_lambda, tol=cfg.tol,
                                        max_iters=cfg.max_iters)
        return clfmod.predict_feature_lr(model, query, ds, ctx_sim)
    raise CliDomainError(f"unknown method {method!r}")


@main.command()
@click.argument("action")
@click.argument("topic")
@click.argument("copa_id")
@click.option("--stance", default="pro", type=click.Choice(["pro", "con"]))
@click.option("--minor", default=None, help="Override the minor premise.")
@click.pass_context
def invent(ctx, action, topic, copa_id, stance, minor):
    """Print a three-line argument for (ACTION, TOPIC) from COPA_ID."""

    def body():
        cfg = _config_from_ctx(ctx)
        ds = _load_dataset(cfg)
        if action not in ds.actions:
            raise CliDomainError(f"unknown action {action!r}")
        try:
            copa = ds.copa(copa_id)
        except KeyError:
            raise CliDomainError(f"unknown copa {copa_id!r}") from None
        motion = kb.Motion(id="@query", action=action, topic=topic)
        syllogism = kb.build_syllogism(
            motion, copa, kb.Stance(stance), ds.actions, minor_override=minor
        )
        for line in syllogism.lines():
            click.echo(line)

    _guarded(body)


@main.command()
@click.option("--out", "out_dir", required=True, type=str, help="Output directory.")
@click.pass_context
def eval(ctx, out_dir):
    """Run the leave-one-out protocol and write curve CSVs + summary JSON."""

    def body():
        cfg = _config_from_ctx(ctx)
        ds = _load_dataset(cfg)
        ctx_sim = _build_context(cfg, cfg.methods)
        corpus = _load_corpus(cfg, cfg.methods)
        eval_cfg = cfg.eval_config()
        matrices = evalmod.leave_one_out(ds, eval_cfg, ctx_sim, corpus)

        os.makedirs(out_dir, exist_ok=True)
        for name in list(cfg.methods) + ["ensemble"]:
            matrix = matrices[name]
            pr = evalmod.pr_curve(matrix, ds, cfg.exclude_general, eval_cfg.thresholds)
            _write_csv(
                os.path.join(out_dir, f"pr_{name}.csv"),
                ("method", "threshold", "precision", "recall"),
                [(name, _fmt(p.threshold), _fmt(p.precision), _fmt(p.recall)) for p in pr],
            )
            pa1 = evalmod.p_at_1_curve(matrix, ds, cfg.exclude_general, eval_cfg.thresholds)
            _write_csv(
                os.path.join(out_dir, f"p_at_1_{name}.csv"),
                ("method", "threshold", "coverage", "p_at_1"),
                [(name, _fmt(p.threshold), _fmt(p.coverage), _fmt(p.p_at_1)) for p in pa1],
            )
        _write_summary(os.path.join(out_dir, "summary.json"), ds, cfg)
        click.echo(f"wrote evaluation outputs to {out_dir}")

    _guarded(body)


def _stats_dict(st: kb.CopaStats) -> dict:
    return {
        "covered_fraction": st.covered_fraction,
        "mean_copas_per_motion": st.mean_copas_per_motion,
        "max_copas_per_motion": st.max_copas_per_motion,
        "sizes": st.sizes,
        "copa_ids": list(st.copa_ids),
        "overlap": [[float(v) for v in row] for row in st.overlap],
    }


def _write_summary(path: str, ds: kb.Dataset, cfg: AppConfig):
    baseline_all = evalmod.baseline_largest(ds, exclude_general=False)
    summary = {
        "dataset": {
            "motions": len(ds.motions),
            "copas": len(ds.copas),
            "labels": len(ds.labels),
            "general_copas": sorted(ds.general_copa_ids),
        },
        "stats": _stats_dict(kb.copa_stats(ds, exclude_general=False)),
        "stats_excluding_general": _stats_dict(kb.copa_stats(ds, exclude_general=True)),
        "baseline_largest": {
            "copa": baseline_all.copa_id,
            "precision": baseline_all.precision,
        },
        "methods": list(cfg.methods),
    }
    if len(ds.general_copa_ids) < len(ds.copas):
        baseline_ng = evalmod.baseline_largest(ds, exclude_general=True)
        summary["baseline_largest_excluding_general"] = {
            "copa": baseline_ng.copa_id,
            "precision": baseline_ng.precision,
        }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path: str, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(cell) for cell in row) + "\n")


@main.command()
@click.option("--out", "out_file", default=None, type=str,
              help="CSV output path (stdout when omitted).")
@click.pass_context
def features(ctx, out_file):
    """Emit the 17-feature vectors of every (motion, CoPA) pair as CSV."""

    def body():
        cfg = _config_from_ctx(ctx)
        ds = _load_dataset(cfg)
        ctx_sim = _build_context(cfg, ())
        header = list(FEATURE_NAMES) + ["motion_id", "copa_id", "label"]
        rows = []
        for m in ds.motions:
            for c in ds.copas:
                vector = compute_features(m, c, ds, ctx_sim)
                label = 1 if (m.id, c.id) in ds.labels else 0
                rows.append([_fmt(v) for v in vector] + [m.id, c.id, str(label)])
        if out_file is None:
            click.echo(",".join(header))
            for row in rows:
                click.echo(",".join(row))
        else:
            _write_csv(out_file, header, rows)

    _guarded(body)


if __name__ == "__main__":
    main()
