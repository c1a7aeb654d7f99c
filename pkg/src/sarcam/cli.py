"""Command-line surface: compute maps, localize, sweep, render, validate.

Exit codes: 0 success, 2 invalid arguments, 3 bundle validation failure,
4 compute failure, 5 saliency map identically zero (nothing to localize).
Every failure prints one machine-parsable line ``ERROR:<code>: <reason>``
to stderr before exiting.

A ``--bundle`` argument naming a directory of bundle directories switches
to batch mode: each sub-bundle is processed into its own subfolder of
``--out``. ``SARCAM_THREADS`` caps batch parallelism. Each subcommand
accepts ``--config FILE`` with ``key=value`` lines mirroring its flags;
explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .bundle import MANIFEST_NAME, describe_bundle, load_bundle
from .engine import CamConfig, ChannelStrategy, Method, auto_intermediate_side, compute_cam
from .errors import BadFraction, BadIntermediateSize, BundleError, IoFailure, SarcamError
from .figures import localization_figure, sweep_figure
from .localize import DEFAULT_FRACTIONS, BBox, localize, sweep
from .render import RenderSpec, colorize, draw_bbox, overlay, panel, save_png

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BUNDLE = 3
EXIT_COMPUTE = 4
EXIT_ZERO_MAP = 5


class CliArgError(Exception):
    """Invalid command line or config-file value (exit 2)."""


class ZeroMapError(Exception):
    """Saliency map has no positive values (exit 5)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: A003 - argparse API
        raise CliArgError(message)


def _eprint_error(code: int, message: str) -> None:
    first_line = str(message).splitlines()[0] if str(message) else "unknown error"
    print(f"ERROR:{code}: {first_line}", file=sys.stderr)


# ---------------------------------------------------------------------------
# option resolution (config file merge, parsing, validation)


def _read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliArgError(f"--config: cannot read {path} ({exc})") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliArgError(f"--config: line {lineno} is not key=value: {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        values[key] = value
    return values


def _merge_config(args: argparse.Namespace, known_keys: set[str]) -> None:
    """Fill options the command line left unset from the config file."""
    if getattr(args, "config", None) is None:
        return
    values = _read_config_file(args.config)
    for key, value in values.items():
        if key not in known_keys:
            raise CliArgError(f"--config: unknown key {key!r}")
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def _parse_method(value: str) -> Method:
    try:
        return Method(value)
    except ValueError:
        names = ", ".join(m.value for m in Method)
        raise CliArgError(f"--method: unknown method {value!r} (choose from {names})") from None


def _parse_strategy(value: str) -> ChannelStrategy:
    try:
        return ChannelStrategy(value)
    except ValueError:
        names = ", ".join(s.value for s in ChannelStrategy)
        raise CliArgError(
            f"--channel-strategy: unknown strategy {value!r} (choose from {names})"
        ) from None


def _parse_m_size(value: str) -> int | None:
    if value.lower() == "auto":
        return None
    try:
        return int(value)
    except ValueError:
        raise CliArgError(f"--m-size: expected an integer or 'auto', got {value!r}") from None


def _parse_fraction(value: str, flag: str) -> float:
    try:
        fraction = float(value)
    except ValueError:
        raise CliArgError(f"{flag}: expected a decimal fraction, got {value!r}") from None
    if not 0.0 < fraction <= 1.0:
        raise CliArgError(f"{flag}: fraction must be in (0, 1], got {value}")
    return fraction


def _parse_fractions(value: str) -> list[float]:
    parts = [p for p in value.split(",") if p.strip() != ""]
    if not parts:
        raise CliArgError(f"--fractions: no fractions in {value!r}")
    return [_parse_fraction(p.strip(), "--fractions") for p in parts]


def _parse_gt(value: str) -> BBox:
    """Ground truth: a JSON file path, or an inline JSON object."""
    text = value
    path = Path(value)
    if path.is_file():
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise CliArgError(f"--gt: cannot read {value} ({exc})") from exc
    try:
        data = json.loads(text)
        box = BBox.from_dict(data)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CliArgError(
            f"--gt: expected a JSON object with row_min/col_min/row_max/col_max ({exc})"
        ) from exc
    if not (box.row_min <= box.row_max and box.col_min <= box.col_max):
        raise CliArgError(f"--gt: degenerate box {box}")
    return box


def _parse_columns(value: str) -> int:
    try:
        columns = int(value)
    except ValueError:
        raise CliArgError(f"--columns: expected an integer, got {value!r}") from None
    if columns < 1:
        raise CliArgError(f"--columns: must be >= 1, got {columns}")
    return columns


# ---------------------------------------------------------------------------
# shared plumbing


def _discover_bundles(bundle_arg: str) -> list[Path]:
    """Single bundle dir, or batch: a directory of bundle directories."""
    root = Path(bundle_arg)
    if not root.is_dir():
        raise BundleError(f"bundle: no such directory {root}")
    if (root / MANIFEST_NAME).is_file():
        return [root]
    children = sorted(p for p in root.iterdir() if p.is_dir() and (p / MANIFEST_NAME).is_file())
    if not children:
        raise BundleError(f"bundle: {root} holds neither {MANIFEST_NAME} nor bundle subdirectories")
    return children


def _thread_cap(n_tasks: int) -> int:
    env = os.environ.get("SARCAM_THREADS")
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            raise CliArgError(f"SARCAM_THREADS: expected an integer, got {env!r}") from None
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_tasks))


def _run_batch(bundles: list[Path], out_root: Path, worker) -> list[str]:
    """Run worker(bundle_dir, out_dir) per bundle; returns output names."""
    if len(bundles) == 1:
        return worker(bundles[0], out_root)
    outputs: list[str] = []
    with ThreadPoolExecutor(max_workers=_thread_cap(len(bundles))) as pool:
        futures = [
            (bundle.name, pool.submit(worker, bundle, out_root / bundle.name))
            for bundle in bundles
        ]
        for name, future in futures:
            outputs.extend(f"{name}/{out}" for out in future.result())
    return outputs


def _write_run_manifest(out_dir: Path, command: str, config: dict, inputs: list[str],
                        outputs: list[str], started: float) -> None:
    manifest = {
        "command": command,
        "config": config,
        "inputs": inputs,
        "outputs": outputs,
        "tool_version": __version__,
        "wall_time_ms": int((time.monotonic() - started) * 1000),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "run_manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _cam_config(args) -> tuple[CamConfig, dict]:
    method = _parse_method(args.method)
    m_size = _parse_m_size(args.m_size) if args.m_size is not None else None
    strategy = _parse_strategy(args.channel_strategy) if args.channel_strategy is not None \
        else ChannelStrategy.GRADCAM_GAP
    config = CamConfig(method=method, intermediate_side=m_size, channel_strategy=strategy)
    echo = {
        "method": method.value,
        "m_size": m_size if m_size is not None else "auto",
        "channel_strategy": strategy.value,
    }
    return config, echo


def _stem(bundle_name: str, method: Method, m_side: int) -> str:
    return f"{bundle_name}_{method.value}_M{m_side}"


def _resolved_m(bundle, config: CamConfig) -> int:
    if config.intermediate_side is not None:
        return int(config.intermediate_side)
    return auto_intermediate_side(bundle.grid_side, bundle.image_side)


def _require_method(args) -> None:
    if args.method is None:
        raise CliArgError("--method is required")
    if args.out is None:
        raise CliArgError("--out is required")


# ---------------------------------------------------------------------------
# subcommands


def cmd_cam(args) -> int:
    started = time.monotonic()
    _merge_config(args, {"bundle", "method", "m_size", "channel_strategy", "out"})
    _require_method(args)
    if args.bundle is None:
        raise CliArgError("--bundle is required")
    config, echo = _cam_config(args)
    bundles = _discover_bundles(args.bundle)
    out_root = Path(args.out)

    def worker(bundle_dir: Path, out_dir: Path) -> list[str]:
        bundle = load_bundle(bundle_dir)
        saliency = compute_cam(bundle, config)
        m_side = _resolved_m(bundle, config)
        stem = _stem(bundle_dir.name, config.method, m_side)
        out_dir.mkdir(parents=True, exist_ok=True)
        np.save(out_dir / "saliency.npy", np.ascontiguousarray(saliency, dtype="<f4"))
        heat = colorize(saliency)
        save_png(heat, out_dir / f"{stem}.png")
        save_png(overlay(bundle.image, heat, alpha=0.5), out_dir / f"{stem}_overlay.png")
        return ["saliency.npy", f"{stem}.png", f"{stem}_overlay.png"]

    outputs = _run_batch(bundles, out_root, worker)
    _write_run_manifest(out_root, "cam", echo, [str(b) for b in bundles], outputs, started)
    print(f"wrote {len(outputs)} files to {out_root}")
    return EXIT_OK


def _localize_one(bundle_dir: Path, out_dir: Path, config: CamConfig,
                  fraction: float, gt: BBox | None) -> list[str]:
    bundle = load_bundle(bundle_dir)
    saliency = compute_cam(bundle, config)
    if float(saliency.max()) <= 0.0:
        raise ZeroMapError(f"saliency map for {bundle_dir.name} is identically zero")
    report = localize(saliency, fraction, gt)
    m_side = _resolved_m(bundle, config)
    stem = _stem(bundle_dir.name, config.method, m_side)
    out_dir.mkdir(parents=True, exist_ok=True)

    annotated = overlay(bundle.image, colorize(saliency), alpha=0.5)
    if report.bbox is not None:
        annotated = draw_bbox(annotated, report.bbox)
    png_name = f"{stem}_t{fraction:g}.png"
    save_png(annotated, out_dir / png_name)

    payload = {"bundle": bundle_dir.name, "method": config.method.value, **report.to_dict()}
    (out_dir / "localization.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    localization_figure(bundle.image, saliency, report, annotated,
                        out_dir / "localization_figure.png", gt)
    return ["localization.json", png_name, "localization_figure.png"]


def cmd_localize(args) -> int:
    started = time.monotonic()
    _merge_config(args, {"bundle", "method", "m_size", "channel_strategy",
                         "threshold", "gt", "out"})
    _require_method(args)
    if args.bundle is None:
        raise CliArgError("--bundle is required")
    config, echo = _cam_config(args)
    fraction = _parse_fraction(args.threshold, "--threshold") if args.threshold is not None else 0.45
    gt = _parse_gt(args.gt) if args.gt is not None else None
    echo.update({"threshold": fraction, "gt": gt.to_dict() if gt else None})
    bundles = _discover_bundles(args.bundle)
    out_root = Path(args.out)

    outputs = _run_batch(
        bundles, out_root,
        lambda bundle_dir, out_dir: _localize_one(bundle_dir, out_dir, config, fraction, gt),
    )
    _write_run_manifest(out_root, "localize", echo, [str(b) for b in bundles], outputs, started)
    print(f"wrote {len(outputs)} files to {out_root}")
    return EXIT_OK


def _sweep_one(bundle_dir: Path, out_dir: Path, config: CamConfig,
               fractions: list[float], gt: BBox | None) -> list[str]:
    bundle = load_bundle(bundle_dir)
    saliency = compute_cam(bundle, config)
    if float(saliency.max()) <= 0.0:
        raise ZeroMapError(f"saliency map for {bundle_dir.name} is identically zero")
    reports, best_index = sweep(saliency, fractions, gt)
    m_side = _resolved_m(bundle, config)
    stem = _stem(bundle_dir.name, config.method, m_side)
    out_dir.mkdir(parents=True, exist_ok=True)

    outputs: list[str] = []
    lines = []
    heat = colorize(saliency)
    for i, report in enumerate(reports):
        record = {"bundle": bundle_dir.name, "method": config.method.value, **report.to_dict()}
        if gt is not None:
            record["best"] = i == best_index
        lines.append(json.dumps(record, sort_keys=True))
        annotated = overlay(bundle.image, heat, alpha=0.5)
        if report.bbox is not None:
            annotated = draw_bbox(annotated, report.bbox)
        png_name = f"{stem}_t{report.threshold_fraction:g}.png"
        save_png(annotated, out_dir / png_name)
        outputs.append(png_name)
    (out_dir / "sweep.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
    sweep_figure(reports, best_index, out_dir / "sweep_summary.png")
    return ["sweep.jsonl", "sweep_summary.png", *outputs]


def cmd_sweep(args) -> int:
    started = time.monotonic()
    _merge_config(args, {"bundle", "method", "m_size", "channel_strategy",
                         "fractions", "gt", "out"})
    _require_method(args)
    if args.bundle is None:
        raise CliArgError("--bundle is required")
    config, echo = _cam_config(args)
    fractions = _parse_fractions(args.fractions) if args.fractions is not None \
        else list(DEFAULT_FRACTIONS)
    gt = _parse_gt(args.gt) if args.gt is not None else None
    echo.update({"fractions": fractions, "gt": gt.to_dict() if gt else None})
    bundles = _discover_bundles(args.bundle)
    out_root = Path(args.out)

    outputs = _run_batch(
        bundles, out_root,
        lambda bundle_dir, out_dir: _sweep_one(bundle_dir, out_dir, config, fractions, gt),
    )
    _write_run_manifest(out_root, "sweep", echo, [str(b) for b in bundles], outputs, started)
    print(f"wrote {len(outputs)} files to {out_root}")
    return EXIT_OK


def cmd_validate(args) -> int:
    _merge_config(args, {"bundle"})
    if args.bundle is None:
        raise CliArgError("--bundle is required")
    for bundle_dir in _discover_bundles(args.bundle):
        print(describe_bundle(bundle_dir))
    return EXIT_OK


def cmd_render(args) -> int:
    started = time.monotonic()
    _merge_config(args, {"maps", "images", "columns", "out"})
    if not args.maps or not args.images:
        raise CliArgError("--maps and --images are required")
    maps = args.maps.split(",") if isinstance(args.maps, str) else args.maps
    images = args.images.split(",") if isinstance(args.images, str) else args.images
    if len(maps) != len(images):
        raise CliArgError(f"--maps has {len(maps)} entries but --images has {len(images)}")
    if args.out is None:
        raise CliArgError("--out is required")
    columns = _parse_columns(args.columns) if args.columns is not None else len(maps)

    from .bundle import load_image

    tiles = []
    labels = []
    for map_path, image_path in zip(maps, images):
        try:
            saliency = np.load(map_path, allow_pickle=False)
        except (OSError, ValueError) as exc:
            raise CliArgError(f"--maps: cannot load {map_path} ({exc})") from exc
        if saliency.ndim != 2:
            raise CliArgError(f"--maps: {map_path} is not a 2-D map (shape {saliency.shape})")
        image = load_image(image_path)
        if image.shape != saliency.shape:
            raise CliArgError(
                f"map {map_path} shape {saliency.shape} does not match image "
                f"{image_path} shape {image.shape}"
            )
        tiles.append(overlay(image, colorize(saliency), alpha=0.5))
        labels.append(Path(map_path).stem)

    montage = panel(tiles, labels, columns)
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    save_png(montage, out_path)
    _write_run_manifest(
        out_path.parent, "render",
        {"columns": columns, "alpha": RenderSpec().alpha},
        [*maps, *images], [out_path.name], started,
    )
    print(f"wrote {out_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sarcam", description=__doc__)
    parser.add_argument("--version", action="version", version=f"sarcam {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_method=True):
        p.add_argument("--bundle", help="bundle directory, or a directory of bundles (batch)")
        if with_method:
            p.add_argument("--method", help="ms-cam | grad-cam | grad-cam-pp | layer-cam | self-matching-cam")
            p.add_argument("--m-size", dest="m_size", help="intermediate side (int) or 'auto'")
            p.add_argument("--channel-strategy", dest="channel_strategy",
                           help="gradcam-gap | gradcampp | uniform")
        p.add_argument("--out", help="output directory")
        p.add_argument("--config", help="key=value file mirroring the flags; flags win")

    p_cam = sub.add_parser("cam", help="compute a saliency map and its renders")
    add_common(p_cam)
    p_cam.set_defaults(func=cmd_cam)

    p_loc = sub.add_parser("localize", help="threshold a map and box the largest component")
    add_common(p_loc)
    p_loc.add_argument("--threshold", help="fraction of the map maximum (default 0.45)")
    p_loc.add_argument("--gt", help="ground-truth box: JSON file or inline JSON")
    p_loc.set_defaults(func=cmd_localize)

    p_sweep = sub.add_parser("sweep", help="localize at several thresholds and report")
    add_common(p_sweep)
    p_sweep.add_argument("--fractions", help="comma-separated fractions (default 0.30,0.45,0.60)")
    p_sweep.add_argument("--gt", help="ground-truth box: JSON file or inline JSON")
    p_sweep.set_defaults(func=cmd_sweep)

    p_val = sub.add_parser("validate", help="check a bundle and print its shape summary")
    p_val.add_argument("--bundle", help="bundle directory, or a directory of bundles")
    p_val.add_argument("--config", help="key=value file mirroring the flags; flags win")
    p_val.set_defaults(func=cmd_validate)

    p_render = sub.add_parser("render", help="montage saliency maps over their images")
    p_render.add_argument("--maps", nargs="+", help="saliency .npy files")
    p_render.add_argument("--images", nargs="+", help="matching image files (.npy or .png)")
    p_render.add_argument("--columns", help="montage columns (default: one row)")
    p_render.add_argument("--out", help="output PNG path")
    p_render.add_argument("--config", help="key=value file mirroring the flags; flags win")
    p_render.set_defaults(func=cmd_render)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliArgError as exc:
        _eprint_error(EXIT_USAGE, str(exc))
        return EXIT_USAGE
    except BadFraction as exc:
        _eprint_error(EXIT_USAGE, str(exc))
        return EXIT_USAGE
    except BundleError as exc:
        _eprint_error(EXIT_BUNDLE, str(exc))
        return EXIT_BUNDLE
    except ZeroMapError as exc:
        _eprint_error(EXIT_ZERO_MAP, str(exc))
        return EXIT_ZERO_MAP
    except (BadIntermediateSize, IoFailure, SarcamError, ValueError) as exc:
        _eprint_error(EXIT_COMPUTE, str(exc))
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
