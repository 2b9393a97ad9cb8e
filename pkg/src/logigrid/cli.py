"""``logigrid`` command line: gen, convert, eval, train, infer, gradcheck.

Exit codes: 0 success, 1 runtime or data error, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Optional, Sequence

from . import io as gio
from .core import GridError, MissingQuad, validate
from .metrics import ALL_METRICS, evaluate
from .regressor import ConfigError as RegressorConfigError
from .regressor import RegressorConfig, grad_check_suite, infer, load_checkpoint, save_checkpoint, train
from .synth import ConfigError as SynthConfigError
from .synth import SynthConfig, generate, spanning_fraction
from .transform import adjacency_pairs, from_markup, to_markup

log = logging.getLogger("logigrid")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2

_SYNTH_FLAGS = {
    "n_tables": "--tables", "rows": "--rows", "cols": "--cols",
    "span_probability": "--span-prob", "max_span": "--max-span", "jitter": "--jitter",
    "rotation": "--rotation", "hole_probability": "--hole-prob", "image_size": "--image-size",
}


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_RUNTIME):
        self.code = code
        super().__init__(message)


@contextmanager
def _output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _require_input(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise CliError(f"input file not found: {path}", EXIT_USAGE)
    return p


def _read(path: str):
    try:
        return list(gio.iter_jsonl(_require_input(path)))
    except gio.FormatError as exc:
        raise CliError(f"{path}: {exc}") from exc


def _say(args, message: str) -> None:
    if not args.quiet:
        stream = sys.stderr if args.output in (None, "-") else sys.stdout
        print(message, file=stream)


# -- gen -----------------------------------------------------------------------


def cmd_gen(args) -> int:
    cfg = SynthConfig.from_json(args.config) if args.config else SynthConfig()
    overrides = {
        "n_tables": args.tables, "rows": tuple(args.rows) if args.rows else None,
        "cols": tuple(args.cols) if args.cols else None, "span_probability": args.span_prob,
        "max_span": args.max_span, "jitter": args.jitter, "rotation": args.rotation,
        "hole_probability": args.hole_prob, "image_size": tuple(args.image_size) if args.image_size else None,
        "seed": args.seed,
    }
    for k, v in overrides.items():
        if v is not None:
            setattr(cfg, k, v)
    if args.content:
        cfg.content = True
    try:
        grids = generate(cfg)
    except SynthConfigError as exc:
        flag = _SYNTH_FLAGS.get(exc.field or "", exc.field)
        raise CliError(f"{flag}: {exc}" if flag else str(exc), EXIT_USAGE) from exc
    with _output(args.output) as fh:
        for g in grids:
            fh.write(gio.dumps(g) + "\n")
    n_cells = sum(len(g.cells) for g in grids)
    _say(args, f"tables={len(grids)} cells={n_cells} spanning_fraction={spanning_fraction(grids):.4f}")
    return EXIT_OK


# -- convert ---------------------------------------------------------------------


def cmd_convert(args) -> int:
    if args.to == "jsonl":
        lines = _require_input(args.input).read_text(encoding="utf-8").splitlines()
        with _output(args.output) as fh:
            for lineno, line in enumerate(lines, start=1):
                if not line.strip():
                    continue
                try:
                    g = from_markup(line.strip())
                except GridError as exc:
                    raise CliError(f"line {lineno}: {exc}") from exc
                fh.write(gio.dumps(g) + "\n")
        return EXIT_OK

    rows = _read(args.input)
    with _output(args.output) as fh:
        for lineno, g in rows:
            report = validate(g)
            if not report.valid:
                parts = []
                if report.overlaps:
                    parts.append("overlapping cell ids " + ", ".join(f"{a}&{b}" for a, b in report.overlaps))
                if report.out_of_bounds:
                    parts.append("malformed cell ids " + ", ".join(map(str, report.out_of_bounds)))
                raise CliError(f"line {lineno}: invalid grid: {'; '.join(parts)}")
            if args.to == "html":
                fh.write(str(to_markup(g, args.content)) + "\n")
            else:
                a_r, a_c = adjacency_pairs(g)
                obj = {
                    "A_r": sorted([p.i, p.j] for p in a_r),
                    "A_c": sorted([p.i, p.j] for p in a_c),
                }
                fh.write(json.dumps(obj, separators=(",", ":")) + "\n")
    return EXIT_OK


# -- eval ------------------------------------------------------------------------


def cmd_eval(args) -> int:
    preds = _read(args.pred)
    gts = _read(args.gt)
    if len(preds) != len(gts):
        raise CliError(f"line count mismatch: {len(preds)} predictions vs {len(gts)} ground truths")
    metrics = tuple(args.metrics.split(",")) if args.metrics else ALL_METRICS
    unknown = set(metrics) - set(ALL_METRICS)
    if unknown:
        raise CliError(f"--metrics: unknown metric(s) {sorted(unknown)}", EXIT_USAGE)
    if not 0.0 < args.threshold <= 1.0:
        raise CliError("--threshold must lie in (0, 1]", EXIT_USAGE)
    if any(m in metrics for m in ("detection", "logical", "adjacency")):
        for (ln_p, p), (ln_g, g) in zip(preds, gts):
            for name, lineno, grid in (("pred", ln_p, p), ("gt", ln_g, g)):
                if not grid.has_quads:
                    raise CliError(f"{name} line {lineno}: cell without quad (spatial metrics need quads)")
    gt_invalid = [ln for ln, g in gts if not validate(g).valid]
    if gt_invalid:
        raise CliError(f"gt line {gt_invalid[0]}: invalid ground-truth grid")
    try:
        report = evaluate([p for _, p in preds], [g for _, g in gts], metrics, args.threshold, args.content)
    except MissingQuad as exc:
        raise CliError(str(exc)) from exc
    with _output(args.output) as fh:
        fh.write(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    if args.per_sample:
        report.write_csv(args.per_sample)
    return EXIT_OK


# -- regressor ---------------------------------------------------------------------


def _regressor_config(args) -> RegressorConfig:
    base = {}
    if args.config:
        base = json.loads(_require_input(args.config).read_text())
    cfg = RegressorConfig.from_dict(base)
    for flag, attr in (("d", "d"), ("heads", "heads"), ("ffn", "ffn"), ("layers_base", "layers_base"),
                       ("layers_stack", "layers_stack"), ("epochs", "epochs"), ("lr", "lr")):
        v = getattr(args, flag, None)
        if v is not None:
            setattr(cfg, attr, v)
    if args.command == "train" and args.seed is not None:
        cfg.seed = args.seed
    if getattr(args, "no_cascade", False):
        cfg.cascade = False
    if getattr(args, "no_inter", False):
        cfg.loss_inter = False
    if getattr(args, "no_intra", False):
        cfg.loss_intra = False
    try:
        return cfg.validate()
    except RegressorConfigError as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc


def cmd_train(args) -> int:
    cfg = _regressor_config(args)
    data = [g for _, g in _read(args.dataset)]
    held = [g for _, g in _read(args.heldout)] if args.heldout else None
    try:
        params, history = train(data, cfg, held)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    save_checkpoint(args.checkpoint, params, cfg)
    if args.history:
        history.write_csv(args.history)
    last = history.records[-1] if history.records else None
    if last is not None:
        _say(args, f"epochs={cfg.epochs} L_log={last.loss_log:.4f} heldout_acc_all={last.heldout_acc_all:.4f}")
    return EXIT_OK


def cmd_infer(args) -> int:
    try:
        params, cfg = load_checkpoint(_require_input(args.checkpoint))
    except (ValueError, KeyError) as exc:
        raise CliError(f"{args.checkpoint}: {exc}") from exc
    rows = _read(args.dataset)
    with _output(args.output) as fh:
        for lineno, g in rows:
            try:
                pred, _ = infer(g, params, cfg)
            except MissingQuad as exc:
                raise CliError(f"line {lineno}: {exc}") from exc
            fh.write(gio.dumps(pred) + "\n")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    cfg = _regressor_config(args)
    results = grad_check_suite(cfg, args.instances, args.seed, args.epsilon, args.params)
    for k, res in enumerate(results):
        log.info("instance %d: max_rel_error=%.3e checked=%d excluded=%d worst=%s",
                 k, res.max_rel_error, res.checked, res.excluded, res.worst_param)
    worst = max((r.max_rel_error for r in results), default=0.0)
    with _output(args.output) as fh:
        fh.write(f"max_rel_error={worst:.6e}\n")
    return EXIT_OK if worst < args.threshold else EXIT_RUNTIME


# -- parser ----------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=None, help="seed for every random choice")
    p.add_argument("--quiet", action="store_true", help="suppress summaries and progress")
    p.add_argument("--output", "-o", default=None, help="output path (default: stdout)")
    return p


def _regressor_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with regressor settings")
    p.add_argument("--d", type=int)
    p.add_argument("--heads", type=int)
    p.add_argument("--ffn", type=int)
    p.add_argument("--layers-base", dest="layers_base", type=int)
    p.add_argument("--layers-stack", dest="layers_stack", type=int)
    p.add_argument("--no-cascade", action="store_true", help="single regressor, no stacking stage")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--no-inter", action="store_true", help="disable the inter-cell loss")
    p.add_argument("--no-intra", action="store_true", help="disable the intra-cell loss")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="logigrid", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate synthetic tables as JSONL")
    g.add_argument("--config", help="JSON file with generator settings")
    g.add_argument("--tables", type=int)
    g.add_argument("--rows", type=int, nargs=2, metavar=("MIN", "MAX"))
    g.add_argument("--cols", type=int, nargs=2, metavar=("MIN", "MAX"))
    g.add_argument("--span-prob", dest="span_prob", type=float)
    g.add_argument("--max-span", dest="max_span", type=int)
    g.add_argument("--jitter", type=float)
    g.add_argument("--rotation", type=float, help="max table rotation in degrees")
    g.add_argument("--hole-prob", dest="hole_prob", type=float)
    g.add_argument("--image-size", dest="image_size", type=int, nargs=2, metavar=("W", "H"))
    g.add_argument("--content", action="store_true", help="fill cells with short text")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("convert", parents=[common], help="JSONL grids to markup/adjacency, or markup to JSONL")
    c.add_argument("input")
    c.add_argument("--to", choices=("html", "adjacency", "jsonl"), default="html")
    c.add_argument("--content", action="store_true", help="include cell text in markup")
    c.set_defaults(func=cmd_convert)

    e = sub.add_parser("eval", parents=[common], help="score predictions against ground truth")
    e.add_argument("pred")
    e.add_argument("gt")
    e.add_argument("--threshold", type=float, default=0.5, help="IoU threshold for cell matching")
    e.add_argument("--metrics", help="comma-separated subset of " + ",".join(ALL_METRICS))
    e.add_argument("--content", action="store_true", help="TEDS/BLEU over markup with cell text")
    e.add_argument("--per-sample", dest="per_sample", help="write per-table CSV here")
    e.set_defaults(func=cmd_eval)

    t = sub.add_parser("train", parents=[common], help="train the logical-location regressor")
    t.add_argument("dataset")
    t.add_argument("--heldout")
    t.add_argument("--checkpoint", required=True)
    t.add_argument("--history", help="per-epoch CSV")
    _regressor_flags(t)
    t.set_defaults(func=cmd_train)

    i = sub.add_parser("infer", parents=[common], help="predict logical locations from cell quads")
    i.add_argument("dataset")
    i.add_argument("--checkpoint", required=True)
    i.set_defaults(func=cmd_infer)

    gc = sub.add_parser("gradcheck", parents=[common], help="finite-difference check of the gradients")
    _regressor_flags(gc)
    gc.add_argument("--epsilon", type=float, default=1e-5)
    gc.add_argument("--params", type=int, default=200, help="parameters sampled per instance")
    gc.add_argument("--instances", type=int, default=5)
    gc.add_argument("--threshold", type=float, default=1e-4)
    gc.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr)
    if args.command == "gradcheck" and args.seed is None:
        args.seed = 2024
    try:
        return args.func(args)
    except CliError as exc:
        print(f"logigrid {args.command}: error: {exc}", file=sys.stderr)
        return exc.code
    except (OSError, GridError) as exc:
        print(f"logigrid {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
