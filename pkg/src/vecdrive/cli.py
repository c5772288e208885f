"""Command-line interface.

Exit codes: 0 success, 1 validation error, 2 runtime failure,
3 gradient-check failure.
"""

import argparse
import sys
import traceback
from dataclasses import replace
from pathlib import Path

from .bench import run_bench
from .config import ModelConfig, SceneGenConfig, TrainConfig, load_config_file
from .errors import ConfigError, ParseError, VecdriveError, VersionError
from .evaluation import evaluate_checkpoint, load_matrix_file, run_ablation
from .evaluation.plots import emit_scene_svg
from .gradcheck_suite import run_suite
from .scene import generate_dataset, read_dataset, write_dataset
from .train import load_checkpoint, train


def _configs(args):
    sections = load_config_file(args.config) if getattr(args, "config", None) else {}
    return (sections.get("model", ModelConfig()).validate(),
            sections.get("scene", SceneGenConfig()).validate(),
            sections.get("train", TrainConfig()).validate())


def cmd_gen_data(args):
    _, scene_cfg, _ = _configs(args)
    scenes = generate_dataset(args.seed, args.count, scene_cfg)
    write_dataset(scenes, args.out, scene_cfg)
    print(f"wrote {len(scenes)} scenes to {args.out}")
    return 0


def cmd_train(args):
    model_cfg, _, train_cfg = _configs(args)
    if args.epochs is not None:
        train_cfg = replace(train_cfg, epochs=args.epochs)
    if args.lr is not None:
        train_cfg = replace(train_cfg, learning_rate=args.lr)
    if args.seed is not None:
        train_cfg = replace(train_cfg, seed=args.seed)
    dataset = read_dataset(args.data)
    result = train(dataset, train_cfg.validate(), model_cfg, args.out,
                   resume_from=args.resume, log=print)
    print(f"checkpoint: {result.checkpoint_path}")
    print(f"history:    {result.history_path}")
    return 0


def cmd_eval(args):
    report, _ = evaluate_checkpoint(args.ckpt, args.data, report_path=args.report)
    print(report.format_text())
    if args.plots:
        ckpt = load_checkpoint(args.ckpt)
        dataset = read_dataset(args.data)
        model = ckpt.build_model()
        out_dir = Path(args.plots)
        out_dir.mkdir(parents=True, exist_ok=True)
        for i, scene in enumerate(dataset.scenes):
            output = model.forward_scene(scene, dataset.config)
            emit_scene_svg(scene, output, dataset.config,
                           out_dir / f"scene_{i:04d}.svg")
        print(f"plots: {out_dir}")
    return 0


def cmd_ablate(args):
    specs, train_cfg, model_cfg = load_matrix_file(args.matrix)
    dataset = read_dataset(args.data)
    eval_dataset = read_dataset(args.eval_data) if args.eval_data else dataset
    rows = run_ablation(dataset, eval_dataset, specs, train_cfg, model_cfg,
                        args.out, log=print)
    failed = [r for r in rows if r["status"] != "ok"]
    print(f"{len(rows)} run(s), {len(failed)} failed; table in {args.out}/ablation.txt")
    return 0


def cmd_gradcheck(args):
    ok = run_suite(op_tolerance=args.tolerance,
                   model_tolerance=max(args.tolerance, 1e-3))
    return 0 if ok else 3


def cmd_plot(args):
    ckpt = load_checkpoint(args.ckpt)
    dataset = read_dataset(args.data)
    model = ckpt.build_model()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    count = min(args.scenes, len(dataset.scenes))
    for i in range(count):
        scene = dataset.scenes[i]
        output = model.forward_scene(scene, dataset.config)
        emit_scene_svg(scene, output, dataset.config, out_dir / f"scene_{i:04d}.svg")
    print(f"wrote {count} plot(s) to {out_dir}")
    return 0


def cmd_bench(args):
    run_bench(repeats=args.repeats)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="vecdrive")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic scene dataset")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train a model on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--resume")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--report")
    p.add_argument("--plots")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="run an ablation matrix")
    p.add_argument("--data", required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--eval-data")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("gradcheck", help="finite-difference gradient checks")
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("plot", help="render scenes with model output as SVG")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scenes", type=int, default=8)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("bench", help="compare compiled kernels with the numpy fallback")
    p.add_argument("--repeats", type=int, default=20)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParseError, VersionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except VecdriveError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
