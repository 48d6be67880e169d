"""Command-line entry points: augment, gen-synth, train, eval, inspect.

Every command merges defaults < JSON config file < explicit flags, echoes
the merged config into the output directory, and is bit-reproducible from
that echoed config. Manifests are written last (temp file + rename) so an
interrupted run never leaves a partial dataset that looks complete.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import augment as aug
from . import metrics as met
from . import synth
from .blending import LossConfig
from .frames import (Sequence, read_frame, read_mask, write_frame, write_mask,
                     split_roles, FrameIOError)
from .model import DMapEstimator, infer, continuous_branch
from .training import (TrainConfig, TrainingDiverged, train, save_checkpoint,
                       load_checkpoint)

GUTTER = 4  # pixels between panel columns


class CliError(Exception):
    pass


def _merge_config(defaults: dict, config_path: str | None, flags: dict) -> dict:
    merged = dict(defaults)
    if config_path:
        path = Path(config_path)
        if not path.is_file():
            raise CliError(f"config file not found: {path}")
        merged.update(json.loads(path.read_text()))
    merged.update({k: v for k, v in flags.items() if v is not None})
    return merged


def _echo_config(cfg: dict, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    tmp = out_dir / "config.json.tmp"
    tmp.write_text(json.dumps(cfg, indent=2, sort_keys=True))
    os.replace(tmp, out_dir / "config.json")


def _write_manifest(entries: list, out_dir: Path, extra: dict | None = None) -> None:
    manifest = {"count": len(entries), "samples": entries, **(extra or {})}
    tmp = out_dir / "manifest.json.tmp"
    tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    os.replace(tmp, out_dir / "manifest.json")


def _load_septuplet(sample_dir: Path) -> Sequence:
    frames = []
    for i in range(1, 8):
        path = sample_dir / f"frame_{i}.png"
        if not path.is_file():
            raise CliError(f"malformed input tree: missing {path}")
        frames.append(read_frame(path))
    return split_roles(Sequence(tuple(frames), (0, 2, 4, 6), 3), 4)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_augment(args) -> int:
    cfg = _merge_config(
        {"seed": 0, "p_fm": 0.5, "p_tm": 0.5, "command": "augment"},
        args.config,
        {"input": args.input, "out": args.out, "seed": args.seed},
    )
    if not cfg.get("input"):
        raise CliError("augment needs --input (or 'input' in the config)")
    in_dir = Path(cfg["input"])
    if not in_dir.is_dir():
        raise CliError(f"input directory not found: {in_dir}")
    out_dir = Path(cfg["out"])
    _echo_config(cfg, out_dir)
    params = aug.FTMParams(p_fm=float(cfg["p_fm"]), p_tm=float(cfg["p_tm"]))
    sample_dirs = sorted(p for p in in_dir.iterdir() if p.is_dir())
    if not sample_dirs:
        raise CliError(f"no septuplet directories under {in_dir}")
    entries = []
    for idx, sample_dir in enumerate(sample_dirs):
        seq = _load_septuplet(sample_dir)
        seed = int(np.random.default_rng([int(cfg["seed"]), idx]).integers(2**63))
        sample = aug.apply_ftm(seq, seed, params)
        dest = out_dir / sample_dir.name
        dest.mkdir(parents=True, exist_ok=True)
        for i, frame in enumerate(sample.augmented.frames, start=1):
            write_frame(frame, dest / f"frame_{i}.png")
        write_mask(sample.dgt, dest / "dgt.png")
        (dest / "record.json").write_text(aug.record_to_json(sample.record))
        entries.append({"id": sample_dir.name, "dir": sample_dir.name,
                        "record": aug.record_to_dict(sample.record)})
    _write_manifest(entries, out_dir, {"seed": int(cfg["seed"])})
    print(f"augmented {len(entries)} sequences -> {out_dir}")
    return 0


def cmd_gen_synth(args) -> int:
    cfg = _merge_config(
        {"seed": 0, "n": 10, "height": 64, "width": 64, "command": "gen-synth"},
        args.config,
        {"out": args.out, "seed": args.seed, "n": args.n,
         "height": args.height, "width": args.width},
    )
    if int(cfg["n"]) < 1:
        raise CliError(f"n must be >= 1, got {cfg['n']}")
    out_dir = Path(cfg["out"])
    _echo_config(cfg, out_dir)
    synth.generate_dataset(out_dir, int(cfg["n"]), int(cfg["seed"]),
                           height=int(cfg["height"]), width=int(cfg["width"]))
    print(f"generated {cfg['n']} synthetic sequences -> {out_dir}")
    return 0


def cmd_train(args) -> int:
    cfg = _merge_config(
        {"seed": 0, "steps": 500, "lr": 1e-2, "batch_size": 1,
         "epsilon": 0.001, "lambda_d": 1.0, "command": "train"},
        args.config,
        {"data": args.data, "out": args.out, "seed": args.seed,
         "steps": args.steps, "lr": args.lr, "batch_size": args.batch_size,
         "resume": args.resume},
    )
    if not cfg.get("data"):
        raise CliError("train needs --data (or 'data' in the config)")
    data_root = Path(cfg["data"])
    if not (data_root / "manifest.json").is_file():
        raise CliError(f"no manifest.json under {data_root}")
    dataset = synth.load_dataset(data_root)
    if not dataset:
        raise CliError(f"dataset at {data_root} is empty")
    out_dir = Path(cfg["out"])
    _echo_config(cfg, out_dir)
    train_cfg = TrainConfig(
        lr=float(cfg["lr"]), steps=int(cfg["steps"]),
        batch_size=int(cfg["batch_size"]), seed=int(cfg["seed"]),
        loss=LossConfig(epsilon=float(cfg["epsilon"]), lambda_d=float(cfg["lambda_d"])))
    params, start_step = None, 0
    if cfg.get("resume"):
        params, meta = load_checkpoint(cfg["resume"])
        start_step = int(meta["step"])
    try:
        params, curve = train(dataset, train_cfg, params=params,
                              start_step=start_step,
                              log_path=out_dir / "loss_curve.jsonl")
    except TrainingDiverged as exc:
        raise CliError(str(exc)) from exc
    save_checkpoint(params, out_dir / "checkpoint", train_cfg.seed, train_cfg.steps)
    summary = {
        "steps": train_cfg.steps,
        "start_step": start_step,
        "initial_loss": curve[0].total if curve else None,
        "final_loss": curve[-1].total if curve else None,
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    print(f"trained to step {train_cfg.steps}; final loss "
          f"{summary['final_loss']} -> {out_dir / 'checkpoint.bin'}")
    return 0


def cmd_eval(args) -> int:
    cfg = _merge_config(
        {"sanity": False, "command": "eval"},
        args.config,
        {"checkpoint": args.checkpoint, "data": args.data, "out": args.out,
         "sanity": True if args.sanity else None},
    )
    if not cfg.get("data"):
        raise CliError("eval needs --data (or 'data' in the config)")
    data_root = Path(cfg["data"])
    if not (data_root / "manifest.json").is_file():
        raise CliError(f"no manifest.json under {data_root}")
    out_dir = Path(cfg["out"])
    _echo_config(cfg, out_dir)
    sanity = bool(cfg.get("sanity"))
    if not sanity:
        if not cfg.get("checkpoint"):
            raise CliError("eval needs --checkpoint (or --sanity)")
        ckpt = Path(str(cfg["checkpoint"])).with_suffix(".bin")
        if not ckpt.is_file():
            raise CliError(f"checkpoint not found: {ckpt}")
        params, _ = load_checkpoint(cfg["checkpoint"])
    manifest = json.loads((data_root / "manifest.json").read_text())
    for sub in ("pred", "cont", "gt", "dmap", "dgt"):
        (out_dir / sub).mkdir(parents=True, exist_ok=True)
    for entry in manifest["samples"]:
        sample = synth.load_train_sample(data_root / entry["dir"])
        name = f"{entry['id']}.png"
        if sanity:
            i_hat = i_c = sample.gt
            d = sample.dgt
        else:
            i_hat, d = infer(sample.inputs, params)
            i_c = continuous_branch(sample.inputs)
        write_frame(i_hat, out_dir / "pred" / name)
        write_frame(i_c, out_dir / "cont" / name)
        write_frame(sample.gt, out_dir / "gt" / name)
        write_mask(d, out_dir / "dmap" / name)
        write_mask(sample.dgt, out_dir / "dgt" / name)
    blended = met.evaluate_dataset(out_dir / "pred", out_dir / "gt",
                                   out_dir / "dmap", out_dir / "dgt")
    continuous = met.evaluate_dataset(out_dir / "cont", out_dir / "gt")
    report = {
        "count": blended.count,
        "blended": {"aggregates": blended.aggregates, "samples": blended.samples},
        "continuous": {"aggregates": continuous.aggregates, "samples": continuous.samples},
    }
    tmp = out_dir / "report.json.tmp"
    tmp.write_text(json.dumps(report, indent=2, sort_keys=True))
    os.replace(tmp, out_dir / "report.json")
    (out_dir / "report_blended.csv").write_text(blended.to_csv())
    (out_dir / "report_continuous.csv").write_text(continuous.to_csv())
    print(f"evaluated {blended.count} samples; blended mean PSNR "
          f"{blended.aggregates['mean_psnr_db']:.3f} dB, continuous "
          f"{continuous.aggregates['mean_psnr_db']:.3f} dB -> {out_dir / 'report.json'}")
    return 0


def _panel(frame: np.ndarray, dmap: np.ndarray) -> np.ndarray:
    """Side-by-side: input | D-map | input with mask outline in red."""
    h, w = dmap.shape
    dmap_rgb = np.repeat(dmap[..., None], 3, axis=2)
    outline = frame.copy()
    hard = dmap >= 0.5
    edge = hard & ~(np.roll(hard, 1, 0) & np.roll(hard, -1, 0)
                    & np.roll(hard, 1, 1) & np.roll(hard, -1, 1))
    outline[edge] = (1.0, 0.0, 0.0)
    gutter = np.ones((h, GUTTER, 3))
    return np.concatenate([frame, gutter, dmap_rgb, gutter, outline], axis=1)


def cmd_inspect(args) -> int:
    sample_dir = Path(args.sample)
    if not sample_dir.is_dir():
        raise CliError(f"sample directory not found: {sample_dir}")
    frame_path = sample_dir / "frame_3.png"
    if not frame_path.is_file():
        raise CliError(f"missing input frame: {frame_path}")
    dmap_path = sample_dir / "dmap.png"
    if not dmap_path.is_file():
        dmap_path = sample_dir / "dgt.png"
    if not dmap_path.is_file():
        raise CliError(f"no D-map (dmap.png or dgt.png) under {sample_dir}")
    frame = read_frame(frame_path)
    dmap = read_mask(dmap_path)
    if dmap.shape != frame.shape[:2]:
        raise CliError("D-map and frame dimensions disagree")
    out_path = Path(args.out) if args.out else sample_dir / "panel.png"
    write_frame(_panel(frame, dmap), out_path)
    print(f"wrote inspection panel -> {out_path}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dvfi",
        description="Discontinuity-aware frame interpolation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int)

    p = sub.add_parser("augment", help="apply figure-text mixing to septuplets")
    common(p)
    p.add_argument("--input", help="directory of septuplet subdirectories")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("gen-synth", help="generate synthetic discontinuous scenes")
    common(p)
    p.add_argument("--n", type=int, help="number of sequences")
    p.add_argument("--height", type=int)
    p.add_argument("--width", type=int)
    p.set_defaults(func=cmd_gen_synth)

    p = sub.add_parser("train", help="train the D-map estimator")
    common(p)
    p.add_argument("--data", help="dataset root (with manifest.json)")
    p.add_argument("--steps", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--resume", help="checkpoint prefix to resume from")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    common(p)
    p.add_argument("--data", help="dataset root (with manifest.json)")
    p.add_argument("--checkpoint", help="checkpoint prefix (.bin/.json)")
    p.add_argument("--sanity", action="store_true",
                   help="score ground truth against itself")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("inspect", help="write a side-by-side D-map panel")
    p.add_argument("--sample", required=True, help="sample directory")
    p.add_argument("--out", help="panel image path")
    p.set_defaults(func=cmd_inspect)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, FrameIOError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
