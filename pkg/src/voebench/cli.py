"""Command-line entry point.

Commands: gen, train, eval, flip (train+eval in the flipped reality), report,
serve.  A JSON config file can set any flag; explicit flags override the file.
Exit codes: 0 success, 2 bad configuration, 3 missing artifact.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import EventCategory
from .dataset import generate_dataset, load_manifest, split_counts
from .experiment import (ExperimentConfig, evaluate, format_report_table,
                         train_models, write_report)
from .models import OFPRTrainConfig
from .perception import PerceptionConfig
from .trees import TrainConfig

DESK_TRIALS = 100          # default trials per category
PAPER_SCALE_TRIALS = 500   # 375/75/50 split: the reduced-scale benchmark


class ConfigError(Exception):
    pass


def _parse_categories(value: str) -> list[EventCategory]:
    if value.lower() == "all":
        return list(EventCategory)
    out = []
    for token in value.split(","):
        token = token.strip().upper()
        try:
            out.append(EventCategory(token))
        except ValueError:
            raise ConfigError(f"unknown category {token!r} (use A-E or 'all')")
    return out


def _parse_seeds(value: str) -> list[int]:
    try:
        seeds = [int(s) for s in value.split(",") if s.strip() != ""]
    except ValueError:
        raise ConfigError(f"bad seed list {value!r}")
    if not seeds:
        raise ConfigError("seeds must be non-empty")
    return seeds


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {p} is not valid JSON: {exc}")


def _merged(args: argparse.Namespace, defaults: dict) -> dict:
    """File values fill in anything the command line left at its default."""
    merged = dict(defaults)
    merged.update(_load_config_file(getattr(args, "config", None)))
    for key, value in vars(args).items():
        if key in ("config", "command") or value is None:
            continue
        merged[key] = value
    return merged


def _experiment_config(opts: dict) -> ExperimentConfig:
    dataset = opts.get("dataset")
    if not dataset:
        raise ConfigError("--dataset is required")
    return ExperimentConfig(
        dataset=Path(dataset),
        out=Path(opts.get("out", "runs")),
        categories=_parse_categories(str(opts.get("category", "all"))),
        reality=opts.get("reality", "normal"),
        seeds=_parse_seeds(str(opts.get("seeds", "0,1,2,3,4,5,6,7,8,9"))),
        perception=PerceptionConfig(
            sigma_scalar=float(opts.get("noise_sigma", 0.0)),
            p_flip=float(opts.get("noise_flip", 0.0)),
            p_irrelevance_error=float(opts.get("noise_irrelevance", 0.0))),
        train=OFPRTrainConfig(
            tree=TrainConfig(max_depth=int(opts.get("max_depth", 12)),
                             min_samples_leaf=int(opts.get("min_samples_leaf", 2))),
            posterior_inputs=opts.get("posterior_inputs", "teacher")),
        train_noise=bool(opts.get("train_noise", False)),
    )


def cmd_gen(args: argparse.Namespace) -> int:
    opts = _merged(args, {"trials": None, "seed": 7, "out": "dataset",
                          "category": "all", "paper_scale": False})
    trials = opts.get("trials")
    if trials is None:
        trials = PAPER_SCALE_TRIALS if opts.get("paper_scale") else DESK_TRIALS
    trials = int(trials)
    categories = _parse_categories(str(opts.get("category", "all")))
    counts = {cat: trials for cat in categories}
    manifest = generate_dataset(opts.get("out", "dataset"), counts,
                                int(opts.get("seed", 7)))
    train_n, val_n, test_n = split_counts(trials)
    print(f"dataset written to {manifest.root}")
    print(f"seed={manifest.seed} categories={[c.value for c in categories]}")
    print(f"trials/category={trials} split train/val/test = "
          f"{train_n}/{val_n}/{test_n} "
          f"({train_n/trials:.0%}/{val_n/trials:.0%}/{test_n/trials:.0%})")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _experiment_config(_merged(args, {}))
    if not (Path(cfg.dataset) / "manifest.json").exists():
        print(f"error: no dataset at {cfg.dataset}", file=sys.stderr)
        return 3
    written = train_models(cfg)
    print(f"trained {len(written)} model files under {Path(cfg.out) / 'models'}")
    print(f"reality={cfg.reality} seeds={cfg.seeds}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _experiment_config(_merged(args, {}))
    if not (Path(cfg.dataset) / "manifest.json").exists():
        print(f"error: no dataset at {cfg.dataset}", file=sys.stderr)
        return 3
    try:
        report = evaluate(cfg)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    json_path, txt_path = write_report(report, cfg.out)
    print(format_report_table(report))
    print(f"written: {json_path} and {txt_path}")
    return 0


def cmd_flip(args: argparse.Namespace) -> int:
    """Train and evaluate in the flipped reality (surprising scenes are normal)."""
    opts = _merged(args, {})
    opts["reality"] = "flipped"
    cfg = _experiment_config(opts)
    if not (Path(cfg.dataset) / "manifest.json").exists():
        print(f"error: no dataset at {cfg.dataset}", file=sys.stderr)
        return 3
    train_models(cfg)
    report = evaluate(cfg)
    json_path, txt_path = write_report(report, cfg.out)
    print(format_report_table(report))
    print(f"written: {json_path} and {txt_path}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    from .service import study_report_from_log

    responses = Path(args.responses)
    if not responses.exists():
        print(f"error: response log not found: {responses}", file=sys.stderr)
        return 3
    try:
        report = study_report_from_log(responses)
    except ValueError as exc:
        print(f"error: malformed response data: {exc}", file=sys.stderr)
        return 2
    out = json.dumps(report, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(out + "\n")
        print(f"report written to {args.out}")
    else:
        print(out)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    opts = _merged(args, {"dataset": None, "out": "study", "trials": 250,
                          "port": 8000, "host": "127.0.0.1", "frontend": None})
    if not opts.get("dataset"):
        raise ConfigError("--dataset is required")
    if not (Path(opts["dataset"]) / "manifest.json").exists():
        print(f"error: no dataset at {opts['dataset']}", file=sys.stderr)
        return 3
    app = create_app(dataset=Path(opts["dataset"]), out_dir=Path(opts["out"]),
                     n_trials=int(opts["trials"]),
                     frontend_dir=Path(opts["frontend"]) if opts.get("frontend") else None)
    uvicorn.run(app, host=str(opts["host"]), port=int(opts["port"]), log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="voebench",
        description="expectation-violation physical-reasoning benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--dataset", help="dataset directory")
        p.add_argument("--out", help="output directory")
        p.add_argument("--category", help="A-E, comma list, or 'all'")
        p.add_argument("--seeds", help="comma-separated seed list")
        p.add_argument("--noise-sigma", dest="noise_sigma", type=float,
                       help="perception scalar noise std dev")
        p.add_argument("--noise-flip", dest="noise_flip", type=float,
                       help="categorical flip probability")
        p.add_argument("--noise-irrelevance", dest="noise_irrelevance", type=float,
                       help="relevance corruption probability")
        p.add_argument("--posterior-inputs", dest="posterior_inputs",
                       choices=["teacher", "predicted"])
        p.add_argument("--train-noise", dest="train_noise", action="store_const",
                       const=True, help="corrupt training features too")

    p_gen = sub.add_parser("gen", help="generate a dataset")
    p_gen.add_argument("--config")
    p_gen.add_argument("--trials", type=int, help="trials per category")
    p_gen.add_argument("--seed", type=int)
    p_gen.add_argument("--out")
    p_gen.add_argument("--category", help="A-E, comma list, or 'all'")
    p_gen.add_argument("--paper-scale", dest="paper_scale", action="store_const",
                       const=True,
                       help="500 trials/category (375/150/100 scene split)")
    p_gen.set_defaults(fn=cmd_gen)

    for name, fn, help_text in (("train", cmd_train, "train models"),
                                ("eval", cmd_eval, "evaluate saved models"),
                                ("flip", cmd_flip, "flipped-reality train+eval")):
        p = sub.add_parser(name, help=help_text)
        common(p)
        if name != "flip":
            p.add_argument("--reality", choices=["normal", "flipped"])
        p.set_defaults(fn=fn)

    p_rep = sub.add_parser("report", help="analyze collected human ratings")
    p_rep.add_argument("responses", help="responses.jsonl (study.json beside it)")
    p_rep.add_argument("--out", help="write the JSON report here")
    p_rep.set_defaults(fn=cmd_report)

    p_srv = sub.add_parser("serve", help="run the human-trial service")
    p_srv.add_argument("--config")
    p_srv.add_argument("--dataset")
    p_srv.add_argument("--out")
    p_srv.add_argument("--trials", type=int, help="test-pool size")
    p_srv.add_argument("--port", type=int)
    p_srv.add_argument("--host")
    p_srv.add_argument("--frontend", help="static frontend directory to serve")
    p_srv.set_defaults(fn=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
