"""Command-line pipeline: tag, train, predict, ensemble, evaluate, analyze,
and an end-to-end demo on bundled synthetic data.

Every subcommand reads an optional YAML config (see README for the schema),
honors ``--seed``/``--out``/``--preset`` overrides, writes artifacts
atomically into the output directory, and drops a ``manifest.json``
recording the effective config hash, seed, and library versions.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from .analysis import correlation_csv, correlation_matrix, incidence, incidence_csv, report
from .data import (DataFormatError, FeatureBank, SplitSet, join, load_features,
                   load_jsonl, save_features, save_jsonl)
from .ensemble import (SearchSpace, average_vote, build_stack, majority_vote,
                       prediction_matrix, random_search_cv, write_cv_report,
                       write_stack_csv)
from .forest import forest_to_json, rf_predict, rf_train
from .fusion.checkpoint import load_checkpoint, save_checkpoint
from .fusion.config import configs_from_preset
from .fusion.trainer import predict, train, write_training_log
from .metrics import accuracy, auroc, write_metrics_csv
from .pipeline import (ConfigError, PipelineConfig, atomic_write,
                       atomic_write_text, build_config, check_paths_exist,
                       load_config, write_manifest)
from .predictions import PredictionSet, read_predictions, write_predictions
from .synth import (generate_split, placeholder_lexicon, simulate_hatexplain,
                    simulate_predictions)
from .tagging import (TextTagger, attach_hatexplain, load_lexicon,
                      read_hatexplain_csv, read_tag_csv, save_lexicon,
                      write_tag_csv)


def _load_cfg(args) -> PipelineConfig:
    overrides = {
        "seed": getattr(args, "seed", None),
        "out_dir": getattr(args, "out", None),
        "preset": getattr(args, "preset", None),
    }
    if getattr(args, "config", None):
        return load_config(args.config, overrides)
    return build_config({}, overrides)


def _out_dir(cfg: PipelineConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _aligned_labels(split: SplitSet, ids) -> np.ndarray:
    by_id = {r.id: r.label for r in split}
    missing = [i for i in ids if by_id.get(i) is None]
    if missing:
        raise ValueError(f"split {split.name!r} has no label for ids {missing[:10]}")
    return np.asarray([by_id[i] for i in ids], dtype=np.int64)


def _tag_table(tags) -> tuple[np.ndarray, list[int]]:
    ids = sorted(tags)
    flags = np.asarray([tags[i].flags() for i in ids], dtype=np.int64)
    return flags, ids


# -- subcommands --------------------------------------------------------------

def cmd_tag(args) -> int:
    cfg = _load_cfg(args)
    paths = cfg.paths
    if args.lexicon:
        paths = dataclasses.replace(paths, lexicon=args.lexicon)
    split_paths = [args.split] if args.split else [
        p for p in (paths.train, paths.val, paths.test) if p]
    if not split_paths:
        raise ConfigError("tag needs --split or paths.train/val/test in the config")
    if not paths.lexicon:
        raise ConfigError("tag needs --lexicon or paths.lexicon in the config")
    lexicon = load_lexicon(paths.lexicon)
    tagger = TextTagger(lexicon).fit()
    tags = {}
    n_records = 0
    for path in split_paths:
        split = load_jsonl(path)
        n_records += len(split)
        for record in split:
            tags[record.id] = tagger.tag(record.text)
    if paths.hatexplain or args.hatexplain:
        tags = attach_hatexplain(
            tags, read_hatexplain_csv(args.hatexplain or paths.hatexplain))
    out = _out_dir(cfg)
    atomic_write(out / "tags.csv", lambda p: write_tag_csv(p, tags))
    write_manifest(out, "tag", cfg, ["tags.csv"])
    print(f"tagged {n_records} records with {len(lexicon)} lexicon terms -> {out / 'tags.csv'}")
    return 0


def cmd_train(args) -> int:
    cfg = _load_cfg(args)
    check_paths_exist(cfg, ["train", "val", "features"])
    train_split = load_jsonl(cfg.paths.train)
    val_split = load_jsonl(cfg.paths.val)
    bank = load_features(cfg.paths.features)
    if bank.dim != cfg.model.region_dim:
        raise ConfigError(f"feature bank dim {bank.dim} does not match "
                          f"model.region_dim {cfg.model.region_dim}")
    model = train(join(train_split, bank), join(val_split, bank),
                  cfg.model, cfg.train, cfg.loss)
    out = _out_dir(cfg)
    atomic_write(out / "model.fmc", lambda p: save_checkpoint(p, model))
    atomic_write(out / "training_log.csv",
                 lambda p: write_training_log(p, model.history))
    write_manifest(out, "train", cfg, ["model.fmc", "training_log.csv"])
    print(f"trained {len(model.history)} evals over {cfg.train.max_updates} updates; "
          f"best val AUROC {model.best_val_auroc:.4f} at step {model.best_step}")
    print(f"checkpoint -> {out / 'model.fmc'}")
    return 0


def cmd_predict(args) -> int:
    cfg = _load_cfg(args)
    paths = cfg.paths
    if args.checkpoint:
        paths = dataclasses.replace(paths, checkpoint=args.checkpoint)
    split_path = args.split or paths.test
    if not split_path or not paths.checkpoint or not paths.features:
        raise ConfigError("predict needs a checkpoint, a split and a feature bank "
                          "(--checkpoint/--split flags or config paths)")
    model = load_checkpoint(paths.checkpoint)
    split = load_jsonl(split_path)
    bank = load_features(paths.features)
    preds = predict(model, join(split, bank))
    out = _out_dir(cfg)
    name = f"{args.name}.csv"
    atomic_write(out / name, lambda p: write_predictions(p, preds))
    write_manifest(out, "predict", cfg, [name])
    print(f"wrote {len(preds)} predictions -> {out / name}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _load_cfg(args)
    pred_path = args.predictions or (cfg.paths.predictions[0] if cfg.paths.predictions else None)
    split_path = args.split or cfg.paths.test
    if not pred_path or not split_path:
        raise ConfigError("evaluate needs --predictions and --split "
                          "(or config paths.predictions / paths.test)")
    preds = read_predictions(pred_path)
    labels = _aligned_labels(load_jsonl(split_path), preds.ids)
    scores = {"auroc": auroc(preds.probas, labels),
              "acc": accuracy(preds.probas, labels)}
    out = _out_dir(cfg)
    atomic_write(out / "metrics.csv", lambda p: write_metrics_csv(p, scores))
    write_manifest(out, "evaluate", cfg, ["metrics.csv"])
    print(f"auroc {scores['auroc']:.6f}  acc {scores['acc']:.6f}  "
          f"({len(preds)} examples) -> {out / 'metrics.csv'}")
    return 0


def cmd_ensemble(args) -> int:
    cfg = _load_cfg(args)
    if not cfg.paths.predictions:
        raise ConfigError("ensemble needs paths.predictions (one CSV per base model)")
    check_paths_exist(cfg, ["predictions"])
    pm = prediction_matrix({Path(p).stem: read_predictions(p)
                            for p in cfg.paths.predictions})
    out = _out_dir(cfg)
    method = cfg.ensemble.method
    artifacts = []
    if method == "majority":
        labels, pseudo = majority_vote(pm, cfg.ensemble.threshold)
        preds = PredictionSet(ids=pm.ids, probas=pseudo, name="majority")
        atomic_write(out / "ensemble_majority.csv",
                     lambda p: write_predictions(p, preds, labels=labels))
        artifacts.append("ensemble_majority.csv")
    elif method == "average":
        preds = PredictionSet(ids=pm.ids, probas=average_vote(pm), name="average")
        atomic_write(out / "ensemble_average.csv",
                     lambda p: write_predictions(p, preds))
        artifacts.append("ensemble_average.csv")
    else:
        artifacts += _rf_ensemble(cfg, pm, out)
    write_manifest(out, "ensemble", cfg, artifacts)
    print(f"{method} ensemble over {pm.n_models} base models "
          f"({len(pm.ids)} ids) -> {out / artifacts[0]}")
    return 0


def _rf_ensemble(cfg: PipelineConfig, pm_test, out: Path) -> list[str]:
    """Random-forest stacking: train on a labeled split's base predictions
    plus tags, predict the target split."""
    check_paths_exist(cfg, ["stack_predictions", "stack_labels", "tags"])
    pm_train = prediction_matrix({Path(p).stem: read_predictions(p)
                                  for p in cfg.paths.stack_predictions})
    if pm_train.model_names != pm_test.model_names:
        raise ConfigError(
            f"stack training models {pm_train.model_names} do not match "
            f"target models {pm_test.model_names}; file stems must agree")
    tags = read_tag_csv(cfg.paths.tags)
    stack_train = build_stack(pm_train, tags)
    stack_test = build_stack(pm_test, tags)
    y = _aligned_labels(load_jsonl(cfg.paths.stack_labels), pm_train.ids)
    artifacts = []
    if cfg.ensemble.rf is not None:
        best = cfg.ensemble.rf
    else:
        best, results = random_search_cv(stack_train.x, y, cfg.ensemble.search,
                                         n_folds=cfg.ensemble.n_folds,
                                         budget=cfg.ensemble.budget,
                                         seed=cfg.seed)
        atomic_write(out / "cv_report.csv", lambda p: write_cv_report(p, results))
        artifacts.append("cv_report.csv")
    forest = rf_train(stack_train.x, y, best, stack_train.schema)
    preds = PredictionSet(ids=pm_test.ids,
                          probas=rf_predict(forest, stack_test.x), name="rf")
    atomic_write(out / "ensemble_rf.csv", lambda p: write_predictions(p, preds))
    atomic_write_text(out / "forest.json", forest_to_json(forest) + "\n")
    atomic_write(out / "stack_features.csv",
                 lambda p: write_stack_csv(p, stack_test))
    return ["ensemble_rf.csv"] + artifacts + ["forest.json", "stack_features.csv"]


def cmd_analyze(args) -> int:
    cfg = _load_cfg(args)
    tags_path = args.tags or cfg.paths.tags
    split_paths = [args.split] if args.split else [
        p for p in (cfg.paths.train, cfg.paths.val, cfg.paths.test) if p]
    if not tags_path or not split_paths:
        raise ConfigError("analyze needs --tags and --split "
                          "(or config paths.tags / paths.train)")
    tags = read_tag_csv(tags_path)
    records = []
    for path in split_paths:
        records.extend(load_jsonl(path).records)
    missing = [r.id for r in records if r.id not in tags]
    if missing:
        raise ValueError(f"tag table is missing ids {missing[:10]}")
    unlabeled = [r.id for r in records if r.label is None]
    if unlabeled:
        raise ValueError(f"analyze needs labels; unlabeled ids {unlabeled[:10]}")
    labels = np.asarray([r.label for r in records], dtype=np.int64)
    flags = np.asarray([tags[r.id].flags() for r in records], dtype=np.int64)
    inc = incidence(labels, flags)
    corr = correlation_matrix(labels, flags)
    out = _out_dir(cfg)
    atomic_write_text(out / "incidence.csv", incidence_csv(inc))
    atomic_write_text(out / "correlation.csv", correlation_csv(corr))
    atomic_write_text(out / "analysis.txt", report(inc, corr))
    write_manifest(out, "analyze", cfg,
                   ["incidence.csv", "correlation.csv", "analysis.txt"])
    print(f"analyzed {len(records)} records -> {out / 'analysis.txt'}")
    return 0


# -- demo ---------------------------------------------------------------------

DEMO_REGION_DIM = 64
DEMO_SIM_MODELS = (("sim_a", 0.78), ("sim_b", 0.82))


def cmd_demo(args) -> int:
    """Generate a synthetic dataset, run the full pipeline on it, and leave
    every intermediate artifact in the output directory."""
    cfg = _load_cfg(args)
    out = _out_dir(cfg)
    data_dir = out / "data"
    pred_dir = out / "predictions"
    data_dir.mkdir(exist_ok=True)
    pred_dir.mkdir(exist_ok=True)
    seeds = [int(s.generate_state(1)[0])
             for s in np.random.SeedSequence(cfg.seed).spawn(12)]
    artifacts = []

    lexicon = placeholder_lexicon()
    atomic_write(data_dir / "lexicon.tsv", lambda p: save_lexicon(p, lexicon))
    train_split, train_bank = generate_split(
        600, seeds[0], "train", id_start=0, region_dim=DEMO_REGION_DIM)
    val_split, val_bank = generate_split(
        200, seeds[1], "dev_seen", id_start=10_000, region_dim=DEMO_REGION_DIM)
    test_split, test_bank = generate_split(
        200, seeds[2], "test_seen", id_start=20_000, region_dim=DEMO_REGION_DIM)
    bank = FeatureBank(list(train_bank.items()) + list(val_bank.items())
                       + list(test_bank.items()))
    for split, filename in ((train_split, "train.jsonl"),
                            (val_split, "dev_seen.jsonl"),
                            (test_split, "test_seen.jsonl")):
        atomic_write(data_dir / filename, lambda p, s=split: save_jsonl(p, s))
    atomic_write(data_dir / "features.mfb", lambda p: save_features(p, bank))
    print(f"generated {len(train_split)}/{len(val_split)}/{len(test_split)} "
          "train/val/test synthetic memes")

    tagger = TextTagger(lexicon).fit()
    tags = {}
    for split in (train_split, val_split, test_split):
        for record in split:
            tags[record.id] = tagger.tag(record.text)
    merged = SplitSet(name="all", records=train_split.records
                      + val_split.records + test_split.records)
    tags = attach_hatexplain(tags, simulate_hatexplain(merged, seeds[3]))
    atomic_write(out / "tags.csv", lambda p: write_tag_csv(p, tags))
    artifacts.append("tags.csv")

    model_cfg, train_cfg, loss_spec = configs_from_preset("synthetic-demo")
    model_cfg = dataclasses.replace(model_cfg, seed=cfg.seed)
    train_cfg = dataclasses.replace(train_cfg, seed=cfg.seed)
    model = train(join(train_split, bank), join(val_split, bank),
                  model_cfg, train_cfg, loss_spec)
    atomic_write(out / "model.fmc", lambda p: save_checkpoint(p, model))
    atomic_write(out / "training_log.csv",
                 lambda p: write_training_log(p, model.history))
    artifacts += ["model.fmc", "training_log.csv"]
    print(f"trained fusion model: best val AUROC {model.best_val_auroc:.4f} "
          f"at step {model.best_step}")

    val_preds = {"fusion": predict(model, join(val_split, bank))}
    test_preds = {"fusion": predict(model, join(test_split, bank))}
    for i, (name, target) in enumerate(DEMO_SIM_MODELS):
        val_preds[name] = simulate_predictions(val_split, target, seeds[4 + 2 * i])
        test_preds[name] = simulate_predictions(test_split, target, seeds[5 + 2 * i])
    for stage, preds in (("val", val_preds), ("test", test_preds)):
        for name, ps in preds.items():
            rel = f"predictions/{name}_{stage}.csv"
            atomic_write(out / rel, lambda p, ps=ps: write_predictions(p, ps))
            artifacts.append(rel)

    pm_val = prediction_matrix(val_preds)
    pm_test = prediction_matrix(test_preds)
    test_labels = _aligned_labels(test_split, pm_test.ids)
    maj_labels, maj_pseudo = majority_vote(pm_test)
    majority = PredictionSet(ids=pm_test.ids, probas=maj_pseudo, name="majority")
    atomic_write(out / "ensemble_majority.csv",
                 lambda p: write_predictions(p, majority, labels=maj_labels))
    average = PredictionSet(ids=pm_test.ids, probas=average_vote(pm_test),
                            name="average")
    atomic_write(out / "ensemble_average.csv",
                 lambda p: write_predictions(p, average))
    artifacts += ["ensemble_majority.csv", "ensemble_average.csv"]

    stack_val = build_stack(pm_val, tags)
    stack_test = build_stack(pm_test, tags)
    y_val = _aligned_labels(val_split, pm_val.ids)
    best, results = random_search_cv(
        stack_val.x, y_val, SearchSpace((32, 96), (2, 8), (1, 4)),
        n_folds=4, budget=4, seed=seeds[8])
    atomic_write(out / "cv_report.csv", lambda p: write_cv_report(p, results))
    forest = rf_train(stack_val.x, y_val, best, stack_val.schema)
    atomic_write_text(out / "forest.json", forest_to_json(forest) + "\n")
    rf_preds = PredictionSet(ids=pm_test.ids,
                             probas=rf_predict(forest, stack_test.x), name="rf")
    atomic_write(out / "ensemble_rf.csv", lambda p: write_predictions(p, rf_preds))
    artifacts += ["cv_report.csv", "forest.json", "ensemble_rf.csv"]
    print(f"stacked {pm_val.n_models} base models with a "
          f"{best.n_trees}-tree forest (depth {best.max_depth})")

    scored = {name: ps.probas for name, ps in test_preds.items()}
    scored["ensemble_majority"] = majority.probas
    scored["ensemble_average"] = average.probas
    scored["ensemble_rf"] = rf_preds.probas
    lines = ["model,auroc,acc"]
    for name in sorted(scored):
        lines.append(f"{name},{auroc(scored[name], test_labels):.6f},"
                     f"{accuracy(scored[name], test_labels):.6f}")
    atomic_write_text(out / "ensemble_report.csv", "\n".join(lines) + "\n")
    artifacts.append("ensemble_report.csv")

    labels = np.asarray([r.label for r in merged], dtype=np.int64)
    flags = np.asarray([tags[r.id].flags() for r in merged], dtype=np.int64)
    inc = incidence(labels, flags)
    corr = correlation_matrix(labels, flags)
    atomic_write_text(out / "incidence.csv", incidence_csv(inc))
    atomic_write_text(out / "correlation.csv", correlation_csv(corr))
    atomic_write_text(out / "analysis.txt", report(inc, corr))
    artifacts += ["incidence.csv", "correlation.csv", "analysis.txt"]

    write_manifest(out, "demo", cfg, artifacts)
    print(f"demo complete; ensemble report -> {out / 'ensemble_report.csv'}")
    return 0


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memefusion",
        description="Hateful-meme detection pipeline: tagging, fusion model "
                    "training, ensembling, and dataset analysis.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="YAML pipeline config")
        p.add_argument("--seed", type=int, help="override the global seed")
        p.add_argument("--out", help="override the output directory")
        p.add_argument("--preset", help="named model/train preset")
        p.set_defaults(func=func)
        return p

    p = add("tag", cmd_tag, "tag split texts against a sensitive-term lexicon")
    p.add_argument("--split", help="JSONL split to tag (default: all config splits)")
    p.add_argument("--lexicon", help="lexicon TSV path")
    p.add_argument("--hatexplain", help="optional id,proba CSV of side-model scores")

    add("train", cmd_train, "train the fusion classifier")

    p = add("predict", cmd_predict, "run a trained checkpoint over a split")
    p.add_argument("--checkpoint", help="model checkpoint path")
    p.add_argument("--split", help="JSONL split to predict (default: paths.test)")
    p.add_argument("--name", default="fusion", help="output file stem")

    add("ensemble", cmd_ensemble, "combine base-model prediction CSVs")

    p = add("evaluate", cmd_evaluate, "score a prediction CSV against labels")
    p.add_argument("--predictions", help="prediction CSV path")
    p.add_argument("--split", help="labeled JSONL split")

    p = add("analyze", cmd_analyze, "incidence and correlation analyses of tags")
    p.add_argument("--tags", help="tag CSV path")
    p.add_argument("--split", help="labeled JSONL split (default: all config splits)")

    add("demo", cmd_demo, "end-to-end run on generated synthetic data")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DataFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
