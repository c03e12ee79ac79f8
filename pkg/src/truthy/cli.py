"""``truthy`` command line: simulate, extract, graph, features, train, detect.

Exit codes: 0 success, 1 usage error, 2 input/parse failure, 3 internal error.
Diagnostics go to stderr; data goes only to the paths named by flags (or
stdout where a flag is optional and omitted).
"""

from __future__ import annotations

import argparse
import csv
import enum
import logging
import sys
import traceback
from typing import Optional, Sequence

from .classify import TrainConfig, load_model, save_model, train
from .diffusion import build_network, to_dot
from .errors import InputError, InsufficientData, InvariantViolation
from .memes import MemeId, MemeKind, build_index, normalize_url
from .pipeline import detect, extract_csv, features_csv, meme_features, read_features_csv, verdicts_json
from .records import load_stream, write_stream
from .simulate import CampaignSpec, gen_dataset, load_campaign_specs, read_labels

log = logging.getLogger("truthy")


class ExitStatus(enum.IntEnum):
    OK = 0
    USAGE = 1
    INPUT = 2
    INTERNAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _emit(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _load(path: str):
    records, report = load_stream(path)
    log.info(
        "%s: %d records, %d rejected (%d duplicate ids), %d order violations",
        path, report.n_records, report.n_rejected, report.n_duplicate_ids, report.n_order_violations,
    )
    for err in report.errors[:10]:
        log.warning("%s", err)
    return records


# ---------------------------------------------------------------- commands


def cmd_simulate(args) -> int:
    specs = load_campaign_specs(args.campaigns) if args.campaigns else [CampaignSpec()]
    ds = gen_dataset(args.organic, specs, args.seed)
    write_stream(ds.records, args.out)
    if args.labels:
        _emit(ds.truth.to_csv(), args.labels)
    log.info("wrote %d records for %d memes", len(ds.records), len(ds.truth))
    return ExitStatus.OK


def cmd_extract(args) -> int:
    _emit(extract_csv(build_index(_load(args.input))), args.out)
    return ExitStatus.OK


def cmd_graph(args) -> int:
    kind = MemeKind(args.kind)
    key = normalize_url(args.key) if kind is MemeKind.URL else args.key.lstrip("#@").lower()
    meme = MemeId(kind, key)
    stream = _load(args.input)
    index = build_index(stream)
    if meme not in index:
        raise InputError(f"meme {meme.label} does not occur in {args.input}")
    net = build_network(meme, index.posts(meme, stream))
    _emit(to_dot(net), args.dot)
    return ExitStatus.OK


def cmd_features(args) -> int:
    rows = meme_features(_load(args.input))
    _emit(features_csv(rows), args.out)
    log.info("%d analyzable memes", len(rows))
    return ExitStatus.OK


def cmd_train(args) -> int:
    rows = read_features_csv(args.features)
    labels = read_labels(args.labels)
    data = [(vec, labels[meme]) for meme, vec in rows if meme in labels]
    if len(data) < len(rows):
        log.warning("%d feature rows have no label and were skipped", len(rows) - len(data))
    cfg = TrainConfig(learning_rate=args.learning_rate, epochs=args.epochs, l2_lambda=args.l2, seed=args.seed)
    history: list[float] = []
    model = train(data, cfg, history)
    log.info("trained on %d memes; loss %.6f -> %.6f", len(data), history[0], history[-1])
    save_model(model, args.out)
    return ExitStatus.OK


def cmd_detect(args) -> int:
    rows = read_features_csv(args.features)
    model = load_model(args.model) if args.model else None
    _emit(verdicts_json(detect(rows, model)), args.out)
    return ExitStatus.OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser = _Parser(prog="truthy", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("simulate", parents=[common], help="generate a labeled synthetic stream")
    p.add_argument("--organic", type=int, required=True, help="number of organic memes")
    p.add_argument("--campaigns", help="JSON list of campaign specs (default: one default campaign)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output JSONL stream")
    p.add_argument("--labels", help="output CSV meme_kind,meme_key,label")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("extract", parents=[common], help="list memes found in a stream")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", help="CSV output (default stdout)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("graph", parents=[common], help="export one meme's diffusion network as DOT")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--kind", required=True, choices=[k.value for k in MemeKind])
    p.add_argument("--key", required=True)
    p.add_argument("--dot", help="DOT output (default stdout)")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("features", parents=[common], help="compute delivery features per analyzable meme")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", help="CSV output (default stdout)")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", parents=[common], help="fit the logistic classifier")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True, help="model JSON output")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=TrainConfig.epochs)
    p.add_argument("--learning-rate", type=float, default=TrainConfig.learning_rate)
    p.add_argument("--l2", type=float, default=TrainConfig.l2_lambda)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("detect", parents=[common], help="score memes (rule detector unless --model)")
    p.add_argument("--features", required=True)
    p.add_argument("--model")
    p.add_argument("--out", help="JSON verdicts (default stdout)")
    p.set_defaults(func=cmd_detect)
    return parser


def run(argv: Sequence[str]) -> int:
    try:
        args = build_parser().parse_args(list(argv))
    except UsageError as exc:
        sys.stderr.write(str(exc))
        return ExitStatus.USAGE
    except SystemExit as exc:  # --help
        return ExitStatus.OK if not exc.code else ExitStatus.USAGE

    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return int(args.func(args))
    except (InputError, OSError, UnicodeDecodeError, csv.Error) as exc:
        log.error("%s", exc)
        return ExitStatus.INPUT
    except (InvariantViolation, AssertionError) as exc:
        log.error("internal invariant violated: %s", exc)
        return ExitStatus.INTERNAL
    except Exception:  # pragma: no cover - last-resort guard
        traceback.print_exc()
        return ExitStatus.INTERNAL


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
