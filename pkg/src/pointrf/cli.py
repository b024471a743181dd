"""Command line entry point: train, render, eval, video, gradcheck."""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .checkpoint import load_checkpoint, save_checkpoint
from .coarse_to_fine import C2FConfig
from .data import camera_from_c2w, frame_dirs, load_blender, write_image
from .errors import PointRFError
from .metrics import psnr, ssim
from .pipeline import fit_static
from .render import RasterConfig, render_view
from .train import TrainConfig, format_record

# CLI flag -> config key
_FLAG_KEYS = {
    "points": "points", "epochs": "epochs", "lmax": "l_max", "radius": "radius",
    "ppp": "points_per_pixel", "tv": "tv_weight", "downscale": "downscale", "seed": "seed",
    "background": "background", "c2f_rounds": "rounds",
}


def _settings(args):
    values = cfgmod.load_config_file(args.config) if getattr(args, "config", None) else {}
    for flag, key in _FLAG_KEYS.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[key] = v
    return values


def _configs(values):
    background = values.get("background", "white")
    rgb = {"white": (1.0, 1.0, 1.0), "black": (0.0, 0.0, 0.0)}.get(str(background))
    train = cfgmod.apply(TrainConfig(), values)
    raster = cfgmod.apply(RasterConfig(), {k: v for k, v in values.items() if k != "background"})
    if rgb is not None:
        raster = cfgmod.apply(raster, {"background": rgb})
    c2f = cfgmod.apply(C2FConfig(), values)
    return train, raster, c2f, str(background)


def _raster_from_checkpoint(ckpt):
    values = {k.split(".", 1)[1]: v for k, v in ckpt.config.items() if k.startswith("raster.")}
    return cfgmod.apply(RasterConfig(), values)


def _open_log(path):
    fh = open(path, "w", encoding="utf-8")

    def sink(line):
        fh.write(line + "\n")
        fh.flush()
    return fh, sink


def cmd_train(args):
    values = _settings(args)
    train, raster, c2f, background = _configs(values)
    downscale = int(values.get("downscale", 1))
    n_points = int(values.get("points", 45_000))
    l_max = int(values.get("l_max", 2))
    views = load_blender(args.data, "train", downscale, background)
    log_path = Path(args.log or str(args.out) + ".log")
    fh, sink = _open_log(log_path)
    with fh:
        sink(format_record({"stage": "data", "views": len(views), "width": views[0].camera.width,
                            "height": views[0].camera.height, "background": background}))
        result = fit_static(views, train, raster, c2f, n_points=n_points, l_max=l_max, sink=sink)
        meta = cfgmod.snapshot(train, raster, c2f)
        meta.update({"data.downscale": downscale, "data.background": background,
                     "train.seconds": f"{result.seconds:.3f}"})
        size = save_checkpoint(result.cloud, args.out, meta)
        sink(format_record({"stage": "done", "points": len(result.cloud), "bytes": size,
                            "seconds": result.seconds}))
    print(f"wrote {args.out} ({len(result.cloud)} points, {size} bytes)")
    return 0


def _pose_camera(args, ckpt):
    pose = args.pose
    if Path(pose).suffix == ".json" and Path(pose).exists():
        spec = json.loads(Path(pose).read_text())
        return camera_from_c2w(spec["transform_matrix"], int(spec["width"]), int(spec["height"]),
                               float(spec["camera_angle_x"]))
    if args.data is None:
        raise PointRFError("--pose index requires --data")
    downscale = args.downscale or int(ckpt.config.get("data.downscale", 1))
    views = load_blender(args.data, args.split, downscale, ckpt.config.get("data.background", "white"))
    try:
        return views[int(pose)].camera
    except (ValueError, IndexError) as exc:
        raise PointRFError(f"bad pose {pose!r}: {exc}") from exc


def cmd_render(args):
    ckpt = load_checkpoint(args.ckpt)
    camera = _pose_camera(args, ckpt)
    rgb, depth = render_view(ckpt.to_cloud(), camera, _raster_from_checkpoint(ckpt))
    write_image(rgb, args.out)
    if args.depth:
        write_image(depth / max(float(depth.max()), 1e-12), args.depth)
    print(f"wrote {args.out}")
    return 0


def evaluate(cloud, views, raster):
    records = []
    for i, view in enumerate(views):
        t0 = time.perf_counter()
        rgb, _ = render_view(cloud, view.camera, raster)
        ms = 1000.0 * (time.perf_counter() - t0)
        records.append({"view": i, "psnr": psnr(rgb, view.image), "ssim": ssim(rgb, view.image),
                        "render_ms": ms})
    return records


def cmd_eval(args):
    ckpt = load_checkpoint(args.ckpt)
    raster = _raster_from_checkpoint(ckpt)
    background = ckpt.config.get("data.background", "white")
    downscale = args.downscale or int(ckpt.config.get("data.downscale", 1))
    views = load_blender(args.data, args.split, downscale, background)
    records = evaluate(ckpt.to_cloud(), views, raster)
    lines = [format_record(r) for r in records]
    agg = {
        "aggregate": "mean", "split": args.split, "views": len(records),
        "psnr": float(np.mean([r["psnr"] for r in records])),
        "ssim": float(np.mean([r["ssim"] for r in records])),
        "render_ms": float(np.mean([r["render_ms"] for r in records])),
        "width": views[0].camera.width, "height": views[0].camera.height,
        "background": background, "points": len(ckpt.positions),
        "checkpoint_bytes": Path(args.ckpt).stat().st_size,
        "train_seconds": ckpt.config.get("train.seconds", "nan"),
    }
    lines.append(format_record(agg))
    Path(args.report).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(lines[-1])
    return 0


def cmd_video(args):
    from .video import FrameSequence, VideoConfig, train_sequence

    values = _settings(args)
    train, raster, c2f, background = _configs(values)
    downscale = int(values.get("downscale", 1))
    frames = [load_blender(d, "train", downscale, background) for d in frame_dirs(args.data)]
    vc = VideoConfig(n_points=int(values.get("points", 45_000)), l_max=int(values.get("l_max", 2)))
    if args.warm_epochs is not None:
        vc.warm_epochs = args.warm_epochs
    if args.align_steps is not None:
        vc.align_steps = args.align_steps
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = cfgmod.snapshot(train, raster, c2f)
    meta.update({"data.downscale": downscale, "data.background": background})
    fh, sink = _open_log(out / "sequence.log")

    def save(res):
        save_checkpoint(res.cloud, out / f"frame_{res.index:04d}.dprf", meta)

    with fh:
        results = train_sequence(FrameSequence(frames), train, raster, c2f, vc, sink=sink,
                                 on_frame=save)
    (out / "report.txt").write_text("\n".join(r.as_record() for r in results) + "\n")
    print(f"trained {len(results)} frames into {out}")
    return 0


def cmd_gradcheck(args):
    from .gradcheck import run_suite

    reports = run_suite(args.seed)
    for r in reports:
        print(r.summary())
    return 0 if all(r.passed for r in reports) else 1


def _add_train_flags(p):
    p.add_argument("--points", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lmax", type=int)
    p.add_argument("--radius", type=float)
    p.add_argument("--ppp", type=int)
    p.add_argument("--tv", type=float)
    p.add_argument("--downscale", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--background", choices=("white", "black"))
    p.add_argument("--c2f-rounds", dest="c2f_rounds", type=int)
    p.add_argument("--config", help="key = value settings file; flags override it")


def build_parser():
    parser = argparse.ArgumentParser(prog="pointrf", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a static scene")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--log")
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("render", help="render one view from a checkpoint")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--pose", required=True, help="view index (with --data) or pose JSON file")
    p.add_argument("--data")
    p.add_argument("--split", default="test")
    p.add_argument("--downscale", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--depth")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("eval", help="PSNR/SSIM report on a dataset split")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--downscale", type=int)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("video", help="train a frame_<idx>/ sequence with warm starts")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--warm-epochs", dest="warm_epochs", type=int)
    p.add_argument("--align-steps", dest="align_steps", type=int)
    _add_train_flags(p)
    p.set_defaults(func=cmd_video)

    p = sub.add_parser("gradcheck", help="finite-difference check of renderer gradients")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PointRFError, OSError, KeyError, ValueError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"pointrf {args.command}: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
