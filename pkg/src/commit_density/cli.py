"""Command-line interface.

Every subcommand prints one JSON object per line on stdout and writes
diagnostics to stderr. Exit status: 0 success, 1 runtime failure, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import pandas as pd

from . import dataset as dsm
from . import miner, stats
from .diffcore import load_profiles
from .learn import (
    BoostConfig,
    CVPlan,
    ForestConfig,
    ModelFormatError,
    RfePlan,
    SideConfig,
    ZeroRConfig,
    cross_validate,
    evaluate_predictions,
    fit,
    load_model,
    rfe,
    save_model,
    train_compound,
)
from .learn.compound import CompoundModel
from .seeding import derive_seed

log = logging.getLogger("commit_density")

CONFIG_ENV = "COMMIT_DENSITY_CONFIG"


class ConfigError(Exception):
    """Bad arguments or configuration (exit status 2)."""


# --- configuration --------------------------------------------------------


def read_document(path: str | os.PathLike) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"file not found: {path}")
    try:
        if path.suffix.lower() == ".toml":
            try:
                import tomllib
            except ModuleNotFoundError:  # Python < 3.11
                import tomli as tomllib
            with open(path, "rb") as fh:
                return tomllib.load(fh)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def load_config(args) -> dict:
    path = args.config or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    cfg = read_document(path)
    base = Path(path).resolve().parent
    # relative paths in a config file are relative to that file
    for key in ("profiles", "keywords", "mapping"):
        if isinstance(cfg.get(key), str):
            cfg[key] = str(base / cfg[key])
    if isinstance(cfg.get("repos"), list):
        cfg["repos"] = [str(base / r) for r in cfg["repos"]]
    return cfg


def require_file(path: str | None, what: str) -> str:
    if not path:
        raise ConfigError(f"missing {what}")
    if not Path(path).exists():
        raise ConfigError(f"{what} not found: {path}")
    return path


def vocabulary(args, cfg) -> list[str]:
    source = getattr(args, "keywords", None) or cfg.get("keywords")
    if source is None:
        return list(dsm.DEFAULT_KEYWORDS)
    if isinstance(source, list):
        return [str(w) for w in source]
    with open(require_file(source, "keyword vocabulary"), encoding="utf-8") as fh:
        words = [line.strip() for line in fh if line.strip() and not line.startswith("#")]
    if not words:
        raise ConfigError(f"keyword vocabulary {source} is empty")
    return words


def learner_config(kind: str, cfg: dict, seed: int, args=None):
    try:
        if kind == "zeror":
            return ZeroRConfig()
        if kind == "forest":
            opts = dict(cfg.get("forest", {}))
            if args is not None and getattr(args, "trees", None):
                opts["n_trees"] = args.trees
            return ForestConfig(seed=derive_seed(seed, "forest"), **opts)
        if kind == "logitboost":
            opts = dict(cfg.get("logitboost", {}))
            if args is not None and getattr(args, "iterations", None):
                opts["n_iterations"] = args.iterations
            return BoostConfig(seed=derive_seed(seed, "logitboost"), **opts)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {kind} settings: {exc}") from exc
    raise ConfigError(f"unknown model type {kind!r}")


def cv_plan(cfg: dict, seed: int, args=None) -> CVPlan:
    opts = dict(cfg.get("cv", {}))
    if args is not None:
        if getattr(args, "folds", None):
            opts["k"] = args.folds
        if getattr(args, "repeats", None):
            opts["repeats"] = args.repeats
    try:
        return CVPlan(seed=derive_seed(seed, "cv"), **opts)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid cv settings: {exc}") from exc


def _finite(obj):
    """NaN and infinities become null so every document is strict JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def emit(doc: dict) -> None:
    sys.stdout.write(json.dumps(_finite(doc), sort_keys=True, allow_nan=False) + "\n")


def write_json(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_finite(doc), fh, sort_keys=True, indent=2, allow_nan=False)
        fh.write("\n")


def out_dir(args, cfg) -> Path:
    path = Path(args.out or cfg.get("out") or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def seed_of(args, cfg) -> int:
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    try:
        return int(seed)
    except (TypeError, ValueError):
        raise ConfigError(f"seed must be an integer, got {seed!r}") from None


def jobs_of(args, cfg) -> int:
    return int(args.jobs or cfg.get("jobs") or os.cpu_count() or 1)


def load_table(path: str) -> dsm.Dataset:
    return dsm.load_dataset(require_file(path, "data table"))


# --- subcommands ----------------------------------------------------------


def cmd_extract(args, cfg) -> int:
    repos = args.repo or cfg.get("repos") or []
    if not repos:
        raise ConfigError("extract needs --repo")
    profile_path = args.profiles or cfg.get("profiles")
    profiles = load_profiles(require_file(profile_path, "profile set")) if profile_path else None
    try:
        gens = [int(g) for g in args.generations.split(",")] if args.generations else []
    except ValueError:
        raise ConfigError(f"--generations must be a comma-separated list, got {args.generations!r}") from None
    bad = [g for g in gens if g not in miner.GENERATIONS]
    if bad:
        raise ConfigError(f"generations must come from {miner.GENERATIONS}, got {bad}")
    out = Path(args.out or cfg.get("out") or "commits.csv")
    if out.is_dir():
        out = out / "commits.csv"
    repositories = [miner.GitRepository(r) for r in repos]
    records = []
    mining = miner.MiningStats()
    for repo in repositories:
        records.extend(miner.walk_repo(repo, args.branch, args.max_commits, profiles, jobs_of(args, cfg), mining))
    out.parent.mkdir(parents=True, exist_ok=True)
    n = miner.write_records_csv(records, out)
    summary = {"command": "extract", "rows": n, "out": str(out), "merges": mining.merges,
               "skipped_files": mining.skipped_files}
    if gens:
        chain_path = out.with_name(out.stem + ".chains.csv")
        summary["chains"] = write_chain_table(records, gens, chain_path)
        summary["chains_out"] = str(chain_path)
    log.info("extracted %d commits from %d repositories", n, len(repositories))
    emit(summary)
    return 0


def write_chain_table(records, generations, path: Path) -> dict:
    store = {r.sha1: r for r in records}
    counts = {}
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["principal", "generations", "status", "parents"])
        for g in generations:
            chains, rejected = miner.build_chains(store, [r.sha1 for r in records], g)
            by_sha = {c.principal.sha1: c for c in chains}
            for r in records:
                if r.sha1 in by_sha:
                    parents = " ".join(p.sha1 for p in by_sha[r.sha1].parents)
                    writer.writerow([r.sha1, g, "ok", parents])
                else:
                    writer.writerow([r.sha1, g, rejected[r.sha1].value, ""])
            counts[str(g)] = {"ok": len(chains), "rejected": len(rejected)}
    return counts


def cmd_merge(args, cfg) -> int:
    mapping_doc = cfg.get("mapping", {})
    if args.mapping:
        mapping_doc = read_document(args.mapping)
    elif isinstance(mapping_doc, str):
        mapping_doc = read_document(mapping_doc)
    mapping = dsm.ColumnMapping.from_document(mapping_doc)
    vocab = vocabulary(args, cfg) if mapping.message else None
    labeled = dsm.load_labeled_csv(require_file(args.labeled, "labeled CSV"), mapping, vocab)
    for issue in labeled.issues:
        log.warning("labeled row %s (%s): %s", issue.row, issue.sha1, issue.message)
    if not args.mined:
        merged = labeled
        records = []
    else:
        mined_sets = [dsm.load_mined_csv(require_file(p, "mined CSV")) for p in args.mined]
        frame = pd.concat([m.frame for m in mined_sets]).drop_duplicates("sha1").reset_index(drop=True)
        mined = dsm.Dataset(frame, dict(mined_sets[0].roles), "mined")
        merged = dsm.merge_on_sha(labeled, mined)
        records = [rec for p in args.mined for rec in miner.read_records_csv(p)]
    summary = {"command": "merge", "labeled_rows": len(labeled), "rows": len(merged),
               "rejected_rows": len(labeled.issues)}
    if args.generations:
        if not records:
            raise ConfigError("--generations needs --mined tables")
        spec = dsm.VariantSpec(args.variant, args.generations)
        store = {r.sha1: r for r in records}
        chains, rejected = miner.build_chains(store, merged.frame["sha1"], args.generations)
        merged = dsm.build_generation_dataset(spec, chains, merged)
        summary.update(variant=args.variant, generations=args.generations, rows=len(merged),
                       chain_rejections=len(rejected))
    out = Path(args.out or cfg.get("out") or "merged.csv")
    if out.is_dir():
        out = out / "merged.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    dsm.save_dataset(merged, out)
    summary["out"] = str(out)
    emit(summary)
    return 0


def cmd_stats(args, cfg) -> int:
    table = load_table(args.data).frame
    summary = stats.stats_bundle(table, out_dir(args, cfg))
    emit({"command": "stats", **summary})
    return 0


def _prepare(data: dsm.Dataset, args) -> dsm.Dataset:
    if not data.has_labels:
        raise ConfigError("training data has no label column")
    if args.features:
        wanted = [f.strip() for f in args.features.split(",") if f.strip()]
        missing = [f for f in wanted if f not in data.roles]
        if missing:
            raise ConfigError(f"unknown feature columns {missing}")
        keep = data.columns_with(dsm.Role.IDENTITY, dsm.Role.LABEL) + wanted
        data = data.select(keep)
    elif args.group:
        data = dsm.vertical_split(data, args.group)
    return data


def _train(data, args, cfg, seed):
    if args.model_type == "compound":
        if not (args.left and args.right):
            raise ConfigError("compound models need --left and --right")
        side_kind = args.side_model or "forest"
        left = SideConfig(args.left, learner_config(side_kind, cfg, derive_seed(seed, "left"), args))
        right = SideConfig(args.right, learner_config(side_kind, cfg, derive_seed(seed, "right"), args))
        return train_compound(left, right, vocabulary(args, cfg), data)
    return fit(learner_config(args.model_type, cfg, seed, args), data)


def _report(model, data, mode=None) -> dict:
    pred = model.predict(data, mode) if isinstance(model, CompoundModel) else model.predict(data)
    return evaluate_predictions(data.labels, pred).to_document()


def cmd_train(args, cfg) -> int:
    seed = seed_of(args, cfg)
    data = _prepare(load_table(args.data), args)
    out = out_dir(args, cfg)
    train = validation = data
    if args.validation:
        plan = dsm.SplitPlan(1.0 - args.validation, seed=derive_seed(seed, "split"))
        train, validation = dsm.split(data, plan)
    model = _train(train, args, cfg, seed)
    save_model(model, out / "model.json")
    doc = {"model_type": args.model_type, "rows": len(train)}
    if isinstance(model, CompoundModel):
        doc["training"] = {mode: _report(model, train, mode) for mode in ("vote", "routed")}
    else:
        doc["training"] = _report(model, train)
    if args.validation:
        mode = "routed" if isinstance(model, CompoundModel) else None
        doc["validation"] = _report(model, validation, mode)
    if args.cv:
        if args.model_type == "compound":
            raise ConfigError("--cv is not available for compound models")
        doc["cv"] = cross_validate(train, learner_config(args.model_type, cfg, seed, args),
                                   cv_plan(cfg, seed, args), jobs=jobs_of(args, cfg)).to_document()
    write_json(out / "train_report.json", doc)
    training = doc["training"]["vote"] if isinstance(model, CompoundModel) else doc["training"]
    summary = {"command": "train", "model": str(out / "model.json"), "model_type": args.model_type,
               "rows": len(train), "training_accuracy": training["accuracy"], "training_kappa": training["kappa"]}
    if args.validation:
        summary.update(validation_accuracy=doc["validation"]["accuracy"], validation_kappa=doc["validation"]["kappa"])
    if args.cv:
        summary.update(cv_accuracy=doc["cv"]["accuracy"], cv_kappa=doc["cv"]["kappa"])
    emit(summary)
    return 0


def cmd_evaluate(args, cfg) -> int:
    try:
        model = load_model(require_file(args.model, "model"))
    except ModelFormatError as exc:
        raise ConfigError(str(exc)) from exc
    data = load_table(args.data)
    if not data.has_labels:
        raise ConfigError("evaluation data has no label column")
    report = _report(model, data, args.mode if isinstance(model, CompoundModel) else None)
    out = out_dir(args, cfg)
    with open(out / "confusion.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["true\\predicted", *report["classes"]])
        for lab, row in zip(report["classes"], report["confusion"]):
            writer.writerow([lab, *row])
    write_json(out / "evaluation.json", report)
    emit({"command": "evaluate", "n": report["n"], "accuracy": report["accuracy"], "kappa": report["kappa"],
          "accuracy_random": report["accuracy_random"]})
    return 0


def cmd_rfe(args, cfg) -> int:
    seed = seed_of(args, cfg)
    data = _prepare(load_table(args.data), args)
    p = len(data.feature_columns)
    try:
        sizes = [int(s) for s in args.sizes.split(",")] if args.sizes else list(range(1, p + 1))
        plan = RfePlan(tuple(sizes), cv_plan(cfg, seed, args),
                       learner_config(args.model_type, cfg, seed, args),
                       ranker=learner_config("forest", cfg, derive_seed(seed, "rank"), args))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if max(sizes) > p:
        raise ConfigError(f"subset size {max(sizes)} exceeds the {p} available features")
    result = rfe(data, plan)
    out = out_dir(args, cfg)
    with open(out / "rfe_profile.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, ["size", "accuracy", "accuracy_sd", "kappa", "kappa_sd"], lineterminator="\n")
        writer.writeheader()
        writer.writerows(result.profile)
    write_json(out / "rfe.json", result.to_document())
    save_model(result.model, out / "model.json")
    emit({"command": "rfe", "size": result.size, "features": result.features,
          "accuracy": result.report.mean_accuracy, "kappa": result.report.mean_kappa})
    return 0


def _messages(repo: miner.GitRepository, branch: str) -> dict[str, str]:
    raw = repo.run("log", "--first-parent", "--format=%H%x00%B%x1e", repo.resolve(branch)).decode("utf-8", "replace")
    out = {}
    for chunk in raw.split("\x1e"):
        chunk = chunk.strip("\n")
        if chunk:
            sha, _, body = chunk.partition("\x00")
            out[sha] = body.strip()
    return out


def cmd_predict(args, cfg) -> int:
    try:
        model = load_model(require_file(args.model, "model"))
    except ModelFormatError as exc:
        raise ConfigError(str(exc)) from exc
    if args.data:
        data = load_table(args.data)
    else:
        repos = args.repo or cfg.get("repos") or []
        if not repos:
            raise ConfigError("predict needs --repo or --data")
        repo_path = repos[0]
        repo = miner.GitRepository(repo_path)
        profile_path = args.profiles or cfg.get("profiles")
        profiles = load_profiles(require_file(profile_path, "profile set")) if profile_path else None
        records = list(miner.walk_repo(repo, args.branch, args.max_commits, profiles, jobs_of(args, cfg)))
        data = dsm.from_records(records)
        messages = _messages(repo, args.branch)
        frame = data.frame.copy()
        frame.insert(len(dsm.IDENTITY_COLUMNS), "message", [messages.get(s, "") for s in frame["sha1"]])
        roles = {c: data.roles.get(c, dsm.Role.IDENTITY) for c in frame.columns}
        kw = dsm.keyword_features(frame["message"].tolist(), vocabulary(args, cfg))
        for c in kw.columns:
            frame[c] = kw[c].to_numpy()
            roles[c] = dsm.Role.KEYWORD
        data = dsm.Dataset(frame, roles, f"repo:{repo_path}")
    missing = [f for f in model.features if f not in data.roles]
    if missing:
        raise ConfigError(f"input lacks model features {missing}")
    if isinstance(model, CompoundModel):
        proba = model.predict_proba(data, args.mode)
    else:
        proba = model.predict_proba(data)
    shas = data.frame["sha1"].tolist() if "sha1" in data.frame.columns else list(range(len(data)))
    for sha, row in zip(shas, proba):
        emit({"sha1": sha, "label": model.classes[int(np.argmax(row))],
              "probabilities": dict(zip(model.classes, (float(v) for v in row)))})
    return 0


# --- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"TOML or JSON run configuration (fallback: ${CONFIG_ENV})")
    common.add_argument("--seed", type=int, help="master seed; component seeds are derived from it")
    common.add_argument("--jobs", type=int, help="worker threads (default: logical cores)")
    common.add_argument("--out", help="output file or directory")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="commit-density", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", parents=[common], help="mine commit size records from git repositories")
    p.add_argument("--repo", action="append", help="local repository (repeatable)")
    p.add_argument("--branch", default="HEAD")
    p.add_argument("--max-commits", type=int)
    p.add_argument("--profiles", help="language profile set (TOML/JSON)")
    p.add_argument("--generations", help="also write chain tables, e.g. 1,2,3,5,8")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("merge", parents=[common], help="join a labeled CSV with mined size tables")
    p.add_argument("--labeled", required=True)
    p.add_argument("--mined", action="append")
    p.add_argument("--mapping", help="column mapping document (TOML/JSON)")
    p.add_argument("--keywords", help="keyword vocabulary, one word per line")
    p.add_argument("--generations", type=int, choices=miner.GENERATIONS)
    p.add_argument("--variant", default="C", choices=sorted(dsm.VARIANT_ROLES))
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("stats", parents=[common], help="descriptive statistics bundle")
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_stats)

    def learner_args(p, types):
        p.add_argument("--data", required=True)
        p.add_argument("--model-type", default="forest", choices=types)
        p.add_argument("--group", choices=sorted(dsm.GROUP_ROLES), help="train on one feature group")
        p.add_argument("--features", help="comma-separated feature columns")
        p.add_argument("--trees", type=int)
        p.add_argument("--iterations", type=int)
        p.add_argument("--folds", type=int)
        p.add_argument("--repeats", type=int)

    p = sub.add_parser("train", parents=[common], help="train a model")
    learner_args(p, ["zeror", "forest", "logitboost", "compound"])
    p.add_argument("--left", choices=sorted(dsm.GROUP_ROLES))
    p.add_argument("--right", choices=sorted(dsm.GROUP_ROLES))
    p.add_argument("--side-model", choices=["zeror", "forest", "logitboost"], help="learner for compound sides")
    p.add_argument("--keywords", help="keyword vocabulary, one word per line")
    p.add_argument("--validation", type=float, help="hold out this fraction (stratified)")
    p.add_argument("--cv", action="store_true", help="also report repeated k-fold cross-validation")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("rfe", parents=[common], help="recursive feature elimination")
    learner_args(p, ["forest", "logitboost"])
    p.add_argument("--sizes", help="comma-separated subset sizes (default 1..p)")
    p.set_defaults(func=cmd_rfe)

    p = sub.add_parser("evaluate", parents=[common], help="score a saved model on labeled data")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--mode", default="routed", choices=["routed", "vote"])
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", parents=[common], help="label commits with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", help="feature table instead of a repository")
    p.add_argument("--repo", action="append")
    p.add_argument("--branch", default="HEAD")
    p.add_argument("--max-commits", type=int)
    p.add_argument("--profiles")
    p.add_argument("--keywords", help="keyword vocabulary, one word per line")
    p.add_argument("--mode", default="routed", choices=["routed", "vote"])
    p.set_defaults(func=cmd_predict)
    return parser


CONFIG_ERRORS = (ConfigError, miner.ConfigurationError, dsm.SchemaError, FileNotFoundError)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args)
        return args.func(args, cfg)
    except CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        log.debug("traceback", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
