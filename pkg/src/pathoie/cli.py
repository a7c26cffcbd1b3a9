"""Pipeline orchestration.

Subcommands:

* ``build-trainset``  bootstrap tuples, seeds, distant-supervision pairs,
  positive samples and feedback-selected negatives, plus a counts report;
* ``train``           fit the argument or preposition classifier;
* ``extract``         run trained models over a corpus and emit scored triples;
* ``eval``            cumulative precision over a score-sorted triple list
  against a manual annotation file.

Configuration lives in an INI file; every value has a default and the
``--seed`` / ``--threshold`` / ``--jobs`` flags override their config
counterparts.  Exit code is 0 on success and 1 on any diagnosed error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import augment, bootstrap, extractor, sampler
from .corpus import (
    CorpusError,
    attach_sidecar_frames,
    build_tree,
    read_corpus_file,
    read_srl_sidecar,
)
from .neural.embeddings import FEATURES, build_vocabularies, load_word_vectors
from .neural.network import ARGUMENT_LABELS, POSITIVE_LABELS, Network, NetworkConfig, NONE_PREPOSITION
from .neural.train import TrainConfig, checkpoint_extra, load_checkpoint, save_checkpoint, train

log = logging.getLogger("pathoie")


class ConfigurationError(Exception):
    pass


DEFAULTS = {
    "corpus": {"train": "", "srl_sidecar": ""},
    "bootstrap": {
        "verbs": "true",
        "nouns": "true",
        "patterns": "",
        "top_k_srl": "1000000",
        "top_k_dep": "1000000",
    },
    "augment": {
        "enabled": "true",
        "linker": "gazetteer",
        "entity_dump": "",
        "endpoint": "",
        "link_confidence": "0.5",
    },
    "sampler": {
        "threshold_p": "0.9",
        "negative_ratio": "2.0",
        "feedback_epochs": "8",
        "feedback_batch_size": "16",
        "feedback_learning_rate": "0.01",
    },
    "features": {"word": "true", "pos": "true", "dep": "true", "ne": "true"},
    "train.argument": {
        "epochs": "30",
        "batch_size": "32",
        "learning_rate": "0.001",
        "dropout": "0.5",
        "dim_word": "300",
        "dim_pos": "50",
        "dim_dep": "50",
        "dim_ne": "50",
        "dim_l": "450",
        "dim_h": "50",
        "word_vectors": "",
        "freeze_word": "false",
    },
    "train.preposition": {
        "epochs": "30",
        "batch_size": "32",
        "learning_rate": "0.001",
        "dropout": "0.5",
        "dim_word": "300",
        "dim_pos": "50",
        "dim_dep": "50",
        "dim_ne": "50",
        "dim_l": "450",
        "dim_h": "50",
        "word_vectors": "",
        "freeze_word": "false",
    },
    "extract": {"threshold": "0.75"},
}


class PipelineConfig:
    """Typed view over the INI config with package defaults."""

    def __init__(self, parser: configparser.ConfigParser, base_dir: Path):
        self.parser = parser
        self.base_dir = base_dir

    @classmethod
    def load(cls, path=None) -> "PipelineConfig":
        parser = configparser.ConfigParser()
        parser.read_dict(DEFAULTS)
        base_dir = Path(".")
        if path:
            read = parser.read(path, encoding="utf-8")
            if not read:
                raise ConfigurationError("config file %s not found" % path)
            base_dir = Path(path).resolve().parent
        return cls(parser, base_dir)

    def get(self, section, key) -> str:
        try:
            return self.parser.get(section, key)
        except (configparser.NoSectionError, configparser.NoOptionError):
            raise ConfigurationError("missing config value [%s] %s" % (section, key))

    def get_bool(self, section, key) -> bool:
        return self.get(section, key).strip().lower() in ("1", "true", "yes", "on")

    def get_int(self, section, key) -> int:
        return int(self.get(section, key))

    def get_float(self, section, key) -> float:
        return float(self.get(section, key))

    def get_path(self, section, key):
        value = self.get(section, key).strip()
        if not value:
            return None
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p

    def features(self) -> tuple:
        active = tuple(name for name in FEATURES if self.get_bool("features", name))
        if not active:
            raise ConfigurationError("at least one input feature must be enabled")
        return active

    def network_config(self, task, labels) -> NetworkConfig:
        section = "train.%s" % task
        return NetworkConfig(
            task=task,
            labels=tuple(labels),
            features=self.features(),
            dims={name: self.get_int(section, "dim_" + name) for name in FEATURES},
            dim_l=self.get_int(section, "dim_l"),
            dim_h=self.get_int(section, "dim_h"),
            freeze_word=self.get_bool(section, "freeze_word"),
        )

    def train_config(self, task, seed) -> TrainConfig:
        section = "train.%s" % task
        return TrainConfig(
            epochs=self.get_int(section, "epochs"),
            batch_size=self.get_int(section, "batch_size"),
            learning_rate=self.get_float(section, "learning_rate"),
            dropout=self.get_float(section, "dropout"),
            seed=seed,
        )

    def linker(self):
        kind = self.get("augment", "linker").strip()
        if kind == "gazetteer":
            dump = self.get_path("augment", "entity_dump")
            if dump is None:
                raise ConfigurationError("[augment] entity_dump is required for the gazetteer linker")
            return augment.GazetteerLinker.from_file(dump)
        if kind == "http":
            endpoint = self.get("augment", "endpoint").strip()
            if not endpoint:
                raise ConfigurationError("[augment] endpoint is required for the http linker")
            return augment.HttpLinker(endpoint, confidence=self.get_float("augment", "link_confidence"))
        raise ConfigurationError("unknown linker %r" % kind)


def _load_corpus(config: PipelineConfig, corpus_path=None):
    path = Path(corpus_path) if corpus_path else config.get_path("corpus", "train")
    if path is None:
        raise ConfigurationError("no corpus path given ([corpus] train or --corpus)")
    if not Path(path).exists():
        raise ConfigurationError("corpus file %s does not exist" % path)
    sentences = read_corpus_file(path)
    sidecar = config.get_path("corpus", "srl_sidecar")
    if sidecar is not None:
        attach_sidecar_frames(sentences, read_srl_sidecar(sidecar))
    return sentences


def _parallel_map(fn, items, jobs):
    if jobs <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# build-trainset


def _dedup_seeds(seeds):
    seen = {}
    for seed in seeds:
        key = (
            seed.rel_lemma,
            seed.rel_kind,
            seed.prep,
            (seed.left.slot, seed.left.kind, seed.left.entity or seed.left.surface),
            (seed.right.slot, seed.right.kind, seed.right.entity or seed.right.surface),
        )
        if key not in seen:
            seen[key] = seed
    return list(seen.values())


def cmd_build_trainset(config: PipelineConfig, out_dir, seed: int, jobs: int = 1) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sentences = _load_corpus(config)
    by_id = {s.sent_id: s for s in sentences}
    trees = {s.sent_id: build_tree(s) for s in sentences}

    verbs_on = config.get_bool("bootstrap", "verbs")
    nouns_on = config.get_bool("bootstrap", "nouns")
    augment_on = config.get_bool("augment", "enabled")

    tuples = []
    if verbs_on and sentences:
        if not any(s.frames for s in sentences):
            raise ConfigurationError(
                "verb bootstrapping is enabled but the corpus carries no role frames"
            )
        top = bootstrap.select_confident(sentences, "srl", config.get_int("bootstrap", "top_k_srl"))
        for sentence in top:
            for frame in sentence.frames:
                tuples.append(bootstrap.srl_to_tuple(sentence, frame, trees[sentence.sent_id]))
    if nouns_on:
        patterns_path = config.get_path("bootstrap", "patterns")
        patterns = bootstrap.load_patterns(patterns_path) if patterns_path else bootstrap.default_patterns()
        top = bootstrap.select_confident(sentences, "dep", config.get_int("bootstrap", "top_k_dep"))
        for sentence in top:
            tuples.extend(bootstrap.match_noun_patterns(trees[sentence.sent_id], patterns))

    with open(out_dir / "tuples.jsonl", "w", encoding="utf-8") as f:
        augment.write_jsonl(tuples, f)

    linker = config.linker() if (augment_on or tuples) else None
    candidates = [c for tup in tuples for c in augment.to_binary_triples(tup)]
    seeds = _dedup_seeds(augment.filter_seeds(candidates, by_id, linker)) if candidates else []
    with open(out_dir / "seeds.jsonl", "w", encoding="utf-8") as f:
        augment.write_jsonl(seeds, f)

    pairs = []
    if augment_on:
        index = augment.SentenceIndex(sentences, linker) if sentences else None
        if index is not None:
            for s in seeds:
                pairs.extend(augment.match_sentences(s, index))
        with open(out_dir / "pairs.jsonl", "w", encoding="utf-8") as f:
            augment.write_jsonl(pairs, f)

    positives, prep_samples = sampler.label_positives(tuples, pairs, trees)

    negatives = []
    if positives:
        sampler_config = sampler.SamplerConfig(
            threshold=config.get_float("sampler", "threshold_p"),
            negative_ratio=config.get_float("sampler", "negative_ratio"),
            seed=seed,
        )
        feedback_model = _train_feedback_model(config, positives, seed)
        pool = []
        pool_sent_ids = []
        positive_sent_ids = sorted({s.sent_id for s in positives})
        positives_by_sent = {}
        for s in positives:
            positives_by_sent.setdefault(s.sent_id, []).append(s)
        for sent_id in positive_sent_ids:
            paths = sampler.enumerate_non_positive(
                by_id[sent_id], trees[sent_id], positives_by_sent[sent_id]
            )
            pool.extend(paths)
            pool_sent_ids.extend([sent_id] * len(paths))
        negatives = sampler.feedback_negative_sampling(
            feedback_model, pool, sampler_config.threshold, sent_ids=pool_sent_ids
        )
        cap = int(sampler_config.negative_ratio * len(positives))
        negatives = sampler.cap_negatives(feedback_model, negatives, cap)

    argument_samples = positives + negatives
    with open(out_dir / "samples_argument.jsonl", "w", encoding="utf-8") as f:
        sampler.write_samples(argument_samples, f)
    with open(out_dir / "samples_preposition.jsonl", "w", encoding="utf-8") as f:
        sampler.write_samples(prep_samples, f)

    label_counts = {}
    for s in argument_samples:
        label_counts[s.label] = label_counts.get(s.label, 0) + 1
    report = {
        "sentences": len(sentences),
        "tuples_verb": sum(1 for t in tuples if t.rel_kind == "verb"),
        "tuples_noun": sum(1 for t in tuples if t.rel_kind == "noun"),
        "seeds": len(seeds),
        "augmentation": "enabled" if augment_on else "disabled",
        "pairs": len(pairs) if augment_on else None,
        "argument_samples": dict(sorted(label_counts.items())),
        "preposition_samples": len(prep_samples),
    }
    with open(out_dir / "report.json", "w", encoding="utf-8") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    log.info(
        "stage=build-trainset sentences=%d tuples=%d seeds=%d pairs=%s positives=%d negatives=%d",
        len(sentences), len(tuples), len(seeds),
        report["pairs"], len(positives), len(negatives),
    )
    return report


def _train_feedback_model(config: PipelineConfig, positives, seed) -> Network:
    """The positives-only model used to pick hard negatives: the argument
    network with the three positive classes."""
    vocabs = build_vocabularies([s.path.nodes for s in positives], config.features())
    net_config = config.network_config("argument", POSITIVE_LABELS)
    rng = np.random.default_rng(seed)
    network = Network.create(net_config, vocabs, rng)
    feedback = TrainConfig(
        epochs=config.get_int("sampler", "feedback_epochs"),
        batch_size=config.get_int("sampler", "feedback_batch_size"),
        learning_rate=config.get_float("sampler", "feedback_learning_rate"),
        dropout=0.0,
        seed=seed,
    )
    train(network, [s.path.nodes for s in positives], [s.label for s in positives], feedback)
    return network


# ---------------------------------------------------------------------------
# train


def _prep_labels(samples):
    preps = sorted({s.label for s in samples if s.label != NONE_PREPOSITION})
    return tuple(preps) + (NONE_PREPOSITION,)


def cmd_train(config: PipelineConfig, task, samples_path, out_path, seed: int) -> list:
    if task not in ("argument", "preposition"):
        raise ConfigurationError("task must be 'argument' or 'preposition'")
    samples = sampler.read_samples(samples_path)
    if not samples:
        raise ConfigurationError("no training samples in %s" % samples_path)
    labels = ARGUMENT_LABELS if task == "argument" else _prep_labels(samples)
    net_config = config.network_config(task, labels)

    vocabs = build_vocabularies([s.path.nodes for s in samples], net_config.features)
    pretrained = None
    vectors_path = config.get_path("train.%s" % task, "word_vectors")
    if vectors_path is not None:
        dim, vectors = load_word_vectors(vectors_path)
        if dim != net_config.dims["word"]:
            raise ConfigurationError(
                "word vectors have dim %d but dim_word is %d" % (dim, net_config.dims["word"])
            )
        pretrained = vectors

    rng = np.random.default_rng(seed)
    network = Network.create(net_config, vocabs, rng, pretrained_words=pretrained)
    history = train(
        network,
        [s.path.nodes for s in samples],
        [s.label for s in samples],
        config.train_config(task, seed),
    )

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(
        out_path,
        network,
        extra={"task": task, "features": list(net_config.features), "seed": seed},
    )
    with open(str(out_path) + ".losses.tsv", "w", encoding="utf-8") as f:
        f.write("epoch\tloss\taccuracy\n")
        for epoch, loss, accuracy in history:
            f.write("%d\t%.10f\t%.6f\n" % (epoch, loss, accuracy))
    log.info("stage=train task=%s samples=%d epochs=%d final_accuracy=%.4f",
             task, len(samples), len(history), history[-1][2])
    return history


# ---------------------------------------------------------------------------
# extract


def cmd_extract(
    config: PipelineConfig,
    corpus_path,
    argument_ckpt,
    preposition_ckpt,
    out_path,
    threshold=None,
    text_mode=False,
    jobs=1,
    debug_paths=False,
) -> list:
    for ckpt in (argument_ckpt, preposition_ckpt):
        if not Path(ckpt).exists():
            raise ConfigurationError("checkpoint %s does not exist" % ckpt)
    argument_model = load_checkpoint(argument_ckpt)
    preposition_model = load_checkpoint(preposition_ckpt)
    active = list(config.features())
    for name, ckpt in (("argument", argument_ckpt), ("preposition", preposition_ckpt)):
        model_features = checkpoint_extra(ckpt).get("features")
        if model_features is not None and model_features != active:
            raise ConfigurationError(
                "%s checkpoint was trained with features %s but the config enables %s"
                % (name, model_features, active)
            )
    if threshold is None:
        threshold = config.get_float("extract", "threshold")
    if not 0.0 <= threshold <= 1.0:
        raise ConfigurationError("threshold must be in [0, 1]")

    sentences = _load_corpus(config, corpus_path)
    debug = (lambda line: print(line, file=sys.stderr)) if debug_paths else None

    def one(sentence):
        tree = build_tree(sentence)
        return extractor.extract_sentence(
            sentence, tree, argument_model, preposition_model, debug_paths=debug
        )

    per_sentence = _parallel_map(one, sentences, jobs)
    triples = [t for batch in per_sentence for t in batch]
    triples = extractor.filter_by_score(triples, threshold)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as f:
        extractor.write_triples(triples, f, text_mode=text_mode)
    log.info("stage=extract sentences=%d triples=%d threshold=%.2f",
             len(sentences), len(triples), threshold)
    return triples


# ---------------------------------------------------------------------------
# eval


def cmd_eval(triples_path, annotations_path, out_path) -> list:
    """Cumulative precision over the score-sorted triple list."""
    triples = extractor.read_triples(triples_path)
    triples.sort(key=lambda t: (-t.score, t.sent_id, t.arg1, t.rel, t.arg2))
    annotations = {}
    with open(annotations_path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 5 or parts[4] not in ("C", "I"):
                raise ConfigurationError(
                    "annotations line %d: expected sent_id, arg1, rel, arg2, C|I" % line_no
                )
            annotations[tuple(parts[:4])] = parts[4] == "C"

    rows = []
    correct = 0
    unannotated = 0
    for triple in triples:
        key = (triple.sent_id, triple.arg1, triple.rel, triple.arg2)
        if key not in annotations:
            unannotated += 1
            log.warning("unannotated triple excluded: %s", triple.render())
            continue
        correct += 1 if annotations[key] else 0
        rows.append((len(rows) + 1, correct / (len(rows) + 1)))

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as f:
        f.write("yield\tprecision\n")
        for n, precision in rows:
            f.write("%d\t%.6f\n" % (n, precision))
    log.info("stage=eval triples=%d annotated=%d unannotated=%d",
             len(triples), len(rows), unannotated)
    return rows


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathoie",
        description="Open information extraction over shortest dependency paths.",
    )
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-trainset", help="construct labeled training data")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("train", help="train a classifier")
    p.add_argument("--config", required=True)
    p.add_argument("--task", required=True, choices=["argument", "preposition"])
    p.add_argument("--samples", required=True, help="JSON Lines sample file")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("extract", help="extract triples with trained models")
    p.add_argument("--config", required=True)
    p.add_argument("--corpus", default=None, help="corpus to extract from (defaults to [corpus] train)")
    p.add_argument("--argument-model", required=True)
    p.add_argument("--preposition-model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--text", action="store_true", help="human-readable output")
    p.add_argument("--debug-paths", action="store_true", help="print every classified path to stderr")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("eval", help="precision/yield table from manual annotations")
    p.add_argument("--triples", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command == "build-trainset":
            config = PipelineConfig.load(args.config)
            cmd_build_trainset(config, args.out, args.seed, jobs=args.jobs)
        elif args.command == "train":
            config = PipelineConfig.load(args.config)
            cmd_train(config, args.task, args.samples, args.out, args.seed)
        elif args.command == "extract":
            config = PipelineConfig.load(args.config)
            cmd_extract(
                config,
                args.corpus,
                args.argument_model,
                args.preposition_model,
                args.out,
                threshold=args.threshold,
                text_mode=args.text,
                jobs=args.jobs,
                debug_paths=args.debug_paths,
            )
        elif args.command == "eval":
            cmd_eval(args.triples, args.annotations, args.out)
    except (ConfigurationError, CorpusError, ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
