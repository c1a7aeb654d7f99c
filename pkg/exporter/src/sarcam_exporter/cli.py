"""Command-line surface of the activation exporter.

Three subcommands::

    sarcam-export export  --checkpoint m.pt --layer conv2 --image x.png \
                          --out bundle/ [--class-id 3]
    sarcam-export fixture --seed 7 --n 32 --g 8 --k 4 --pattern blob --out bundle/
    sarcam-export toy     --out toy.pt [--seed 0] [--channels 8] [--classes 4]

``export`` hooks one layer of a trained model for one image and writes an
activation bundle. ``fixture`` writes a synthetic bundle with known
geometry. ``toy`` materializes the bundled two-conv demo network as a
checkpoint so ``export`` can be exercised without any external model.

Exit codes: 0 success, 1 exporter failure (single-line message on stderr),
2 usage error.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ExporterError
from .fixtures import Pattern, make_fixture
from .hooks import ExportRequest, export_bundle
from .toy import save_toy_checkpoint

__all__ = ["main"]

EXIT_OK = 0
EXIT_FAILURE = 1


def cmd_export(args: argparse.Namespace) -> int:
    request = ExportRequest(
        checkpoint=args.checkpoint,
        layer=args.layer,
        image=args.image,
        out_dir=args.out,
        class_id=args.class_id,
    )
    print(export_bundle(request))
    return EXIT_OK


def cmd_fixture(args: argparse.Namespace) -> int:
    print(make_fixture(args.seed, args.n, args.g, args.k, Pattern(args.pattern), args.out))
    return EXIT_OK


def cmd_toy(args: argparse.Namespace) -> int:
    print(
        save_toy_checkpoint(
            args.out, seed=args.seed, channels=args.channels, classes=args.classes
        )
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sarcam-export",
        description="Dump CNN activations/gradients as saliency bundles, "
        "or generate synthetic fixture bundles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_export = sub.add_parser("export", help="hook a model layer and write one bundle")
    p_export.add_argument("--checkpoint", required=True, help="torch module checkpoint path")
    p_export.add_argument("--layer", required=True, help="named module whose output to capture")
    p_export.add_argument("--image", required=True, help="square grayscale PNG or NPY image")
    p_export.add_argument("--out", required=True, help="bundle directory to write")
    p_export.add_argument(
        "--class-id",
        type=int,
        default=None,
        help="class to explain (default: the argmax prediction)",
    )
    p_export.set_defaults(func=cmd_export)

    p_fixture = sub.add_parser("fixture", help="write a synthetic bundle with known geometry")
    p_fixture.add_argument("--seed", type=int, required=True, help="RNG seed")
    p_fixture.add_argument("--n", type=int, required=True, help="image side in pixels")
    p_fixture.add_argument("--g", type=int, required=True, help="feature grid side")
    p_fixture.add_argument("--k", type=int, required=True, help="channel count")
    p_fixture.add_argument(
        "--pattern", required=True, choices=[p.value for p in Pattern], help="fixture layout"
    )
    p_fixture.add_argument("--out", required=True, help="bundle directory to write")
    p_fixture.set_defaults(func=cmd_fixture)

    p_toy = sub.add_parser("toy", help="write the bundled two-conv demo model as a checkpoint")
    p_toy.add_argument("--out", required=True, help="checkpoint path to write")
    p_toy.add_argument("--seed", type=int, default=0, help="weight RNG seed (default 0)")
    p_toy.add_argument("--channels", type=int, default=8, help="feature channels (default 8)")
    p_toy.add_argument("--classes", type=int, default=4, help="logit count (default 4)")
    p_toy.set_defaults(func=cmd_toy)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ExporterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
