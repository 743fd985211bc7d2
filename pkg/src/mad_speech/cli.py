"""Command-line interface: ``mads <subcommand> ...``.

Exit status is 0 on success, 1 on a usage error and 2 when an input file is
missing or malformed. Diagnostics go to stderr; data goes to files or stdout.
"""

import argparse
import csv
import io
import json
import logging
import sys
import zipfile
from pathlib import Path

import numpy as np

from . import __version__
from .benchmark import (
    DEFAULT_FEMALE_RATIOS,
    DEFAULT_NOISE_CLASS_COUNTS,
    DEFAULT_SPEAKER_COUNTS,
    load_pool,
    read_manifest,
    sample_entropy_series,
    sample_gender_series,
    sample_noise_series,
    sample_opposed_series,
    sample_voice_series,
)
from .errors import DataError, FormatError
from .evaluation import ScoreTable, evaluate, score_benchmark, score_sets, win_rate
from .facets import Facet
from .fileio import atomic_write_bytes, atomic_write_text, dumps, format_float
from .metrics import Metric, pool_time_axis, score
from .projection import ProjectionHead, head_forward, head_load, head_save
from .store import EmbeddingStore, store_read, store_write
from .training import LabeledFeature, TrainingConfig, load_training_config, train_head

log = logging.getLogger("mad_speech")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_list(cast):
    def parse(text):
        try:
            return [cast(x) for x in text.split(",") if x.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid list {text!r}") from None
    return parse


def _emit(text, path):
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        atomic_write_text(path, text)


def _read_store(path):
    try:
        return store_read(path)
    except FormatError as exc:
        raise DataError(f"{path}: {exc}") from None


def _read_head(path):
    if path is None:
        return None
    try:
        return head_load(Path(path).read_bytes())
    except FormatError as exc:
        raise DataError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# subcommands

def cmd_score(args):
    store = _read_store(args.embeddings)
    head = _read_head(args.head)
    metric = Metric.parse(args.metric)
    if args.sets is None:
        vectors = store.rows.astype(np.float64)
        if head is not None:
            if head.input_dim != store.dim:
                raise DataError(f"{args.head}: head expects dim {head.input_dim}, store has {store.dim}")
            vectors = head_forward(head, vectors)
        _emit(dumps(score(vectors, metric).to_dict()) + "\n", args.output)
        return

    try:
        raw = json.loads(Path(args.sets).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{args.sets}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if isinstance(raw, dict):
        named = list(raw.items())
    elif isinstance(raw, list):
        named = [(str(i), s) for i, s in enumerate(raw)]
    else:
        raise DataError(f"{args.sets}: expected a JSON object or list of id lists")
    for name, ids in named:
        if not isinstance(ids, list) or not all(isinstance(u, str) for u in ids):
            raise DataError(f"{args.sets}: set {name!r} is not a list of utterance ids")
    values = score_sets([ids for _, ids in named], store, head, metric, args.threads)
    results = [{"set_id": name, "metric": metric.value, "value": float(v), "n": len(ids)}
               for (name, ids), v in zip(named, values)]
    _emit(dumps(results) + "\n", args.output)
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["set_id", "score"])
        for r in results:
            w.writerow([r["set_id"], format_float(r["value"])])
        atomic_write_text(args.csv, buf.getvalue())


def cmd_benchmark(args):
    try:
        pool = load_pool(args.pool)
    except UnicodeDecodeError as exc:
        raise DataError(f"{args.pool}: not UTF-8 text ({exc.reason} at byte {exc.start})") from None
    facet = Facet.parse(args.facet)
    common = dict(sets_per_level=args.sets_per_level, seed=args.seed, threads=args.threads)
    if args.set_size is not None:
        common["set_size"] = args.set_size
    policy = {"speaker_policy": args.speaker_policy}
    if args.n_speakers is not None:
        policy["n_speakers"] = args.n_speakers

    def levels(cast, default):
        if args.levels is None:
            return default
        try:
            return [cast(x) for x in args.levels.split(",") if x.strip()]
        except ValueError:
            raise UsageError(f"--levels {args.levels!r} is not a list of {cast.__name__}") from None

    if args.opposed:
        bench = sample_opposed_series(pool, args.opposed, **common)
    elif facet is Facet.VOICE:
        common.setdefault("set_size", 200)
        bench = sample_voice_series(pool, levels(int, DEFAULT_SPEAKER_COUNTS), gender_filter=args.gender, **common)
    elif facet is Facet.GENDER:
        bench = sample_gender_series(pool, levels(float, DEFAULT_FEMALE_RATIOS), **policy, **common)
    elif facet is Facet.NOISE:
        bench = sample_noise_series(pool, levels(int, DEFAULT_NOISE_CLASS_COUNTS), **common)
    else:
        count = levels(int, [6])
        if len(count) != 1:
            raise UsageError("for emotion/accent, --levels is a single level count")
        bench = sample_entropy_series(pool, facet, level_count=count[0], **policy, **common)
    # output location and thread count do not affect the content
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("output", "threads", "verbose", "command")}
    bench.parameters["cli"] = {k: (str(v) if isinstance(v, Path) else v) for k, v in flags.items()}
    _emit(bench.dumps(), args.output)
    log.info("wrote %d levels x %d sets", len(bench.levels), bench.sets_per_level)


def cmd_train_head(args):
    store = _read_store(args.embeddings)
    try:
        pool = load_pool(args.metadata)
    except UnicodeDecodeError as exc:
        raise DataError(f"{args.metadata}: not UTF-8 text ({exc.reason})") from None
    facet = Facet.parse(args.facet)
    if args.config:
        try:
            cfg = load_training_config(args.config, facet)
        except (ValueError, TypeError) as exc:
            raise DataError(f"{args.config}: {exc}") from None
    else:
        cfg = TrainingConfig.for_facet(facet)
    overrides = {k: v for k, v in (("steps", args.steps), ("seed", args.seed)) if v is not None}
    if overrides:
        cfg = TrainingConfig.from_mapping({**cfg.to_dict(), **overrides})

    feats = []
    labelled = [r for r in pool if r.label(facet) is not None]
    if not labelled:
        raise DataError(f"{args.metadata}: no utterances carry a {facet.value} label")
    vectors = store.get([r.utterance_id for r in labelled])
    for r, v in zip(labelled, vectors):
        feats.append(LabeledFeature(v, r.label(facet)))

    validation = None
    if args.val_fraction > 0:
        rng = np.random.default_rng([cfg.seed, 2])
        idx = rng.permutation(len(feats))
        n_val = int(round(args.val_fraction * len(feats)))
        validation = [feats[i] for i in sorted(idx[:n_val])]
        feats = [feats[i] for i in sorted(idx[n_val:])]
        if cfg.eval_every == 0:
            cfg = TrainingConfig.from_mapping({**cfg.to_dict(), "eval_every": max(1, cfg.steps // 20)})

    head = ProjectionHead.initialize(facet, input_dim=store.dim, hidden_dims=args.hidden_dims,
                                     dropout_rate=args.dropout, seed=cfg.seed)
    head, trace = train_head(feats, head, cfg, validation)
    atomic_write_bytes(args.output, head_save(head))
    if args.log:
        atomic_write_text(args.log, trace.to_csv())
    if trace.train_loss:
        log.info("trained %d steps, final loss %.5f", cfg.steps, trace.train_loss[-1])


def cmd_evaluate(args):
    bench = read_manifest(args.manifest)
    store = _read_store(args.embeddings)
    head = _read_head(args.head)
    table = score_benchmark(bench, store, head, args.metric, args.threads)
    report = evaluate(table, level_indices=args.level_subset, pooled=args.pooled)
    _emit(dumps(report.to_dict()) + "\n", args.output)
    if args.csv:
        atomic_write_text(args.csv, table.to_csv())


def _read_score_csv(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError:
        raise DataError(f"{path}: not UTF-8 text") from None
    reader = csv.DictReader(io.StringIO(text))
    if not reader.fieldnames or "score" not in reader.fieldnames:
        raise DataError(f"{path}:1: missing 'score' column")
    keys = [k for k in ("set_id", "level_index", "set_index") if k in reader.fieldnames]
    rows = []
    for lineno, row in enumerate(reader, start=2):
        try:
            value = float(row["score"])
        except (TypeError, ValueError):
            raise DataError(f"{path}:{lineno}: bad score {row.get('score')!r}") from None
        if not np.isfinite(value):
            raise DataError(f"{path}:{lineno}: non-finite score")
        rows.append((tuple(row[k] for k in keys), value))
    return keys, rows


def cmd_compare(args):
    keys_a, rows_a = _read_score_csv(args.a)
    keys_b, rows_b = _read_score_csv(args.b)
    if args.unpaired:
        a = [v for _, v in rows_a]
        b = [v for _, v in rows_b]
    elif keys_a and keys_a == keys_b:
        lookup = dict(rows_b)
        missing = [k for k, _ in rows_a if k not in lookup]
        if missing or len(rows_a) != len(rows_b):
            raise DataError(f"{args.b}: keys do not match {args.a} (e.g. {missing[:1]})")
        a = [v for _, v in rows_a]
        b = [lookup[k] for k, _ in rows_a]
    else:
        if len(rows_a) != len(rows_b):
            raise DataError(f"{args.a} has {len(rows_a)} rows, {args.b} has {len(rows_b)}")
        a = [v for _, v in rows_a]
        b = [v for _, v in rows_b]
    report = win_rate(a, b, paired=not args.unpaired, facet=args.facet, metric=args.metric)
    _emit(dumps(report.to_dict()) + "\n", args.output)


def _load_frames(path):
    path = Path(path)
    try:
        with np.load(path, allow_pickle=False) as npz:
            if not isinstance(npz, np.lib.npyio.NpzFile):
                raise DataError(f"{path}: expected an .npz archive of per-utterance frame arrays")
            return {k: npz[k] for k in npz.files}
    except (zipfile.BadZipFile, ValueError, OSError, EOFError) as exc:
        raise DataError(f"{path}: unreadable frame archive ({exc})") from None


def cmd_pool(args):
    frames = _load_frames(args.frames)
    if not frames:
        raise DataError(f"{args.frames}: archive holds no utterances")
    ids, rows = [], []
    for uid in sorted(frames):
        arr = frames[uid]
        if arr.ndim == 1:
            arr = arr[None, :]
        try:
            rows.append(pool_time_axis(arr))
        except DataError as exc:
            raise DataError(f"{args.frames}: utterance {uid!r}: {exc}") from None
        ids.append(uid)
    dims = {r.shape[0] for r in rows}
    if len(dims) != 1:
        raise DataError(f"{args.frames}: utterances have differing dims {sorted(dims)}")
    try:
        store = EmbeddingStore(ids, np.array(rows))
    except FormatError as exc:
        raise DataError(f"{args.frames}: {exc}") from None
    store_write(args.output, store)


# ---------------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="mads", description="Acoustic diversity metrics over speech embeddings.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    metric_help = "aggregation: 'vendi' (default) or 'cosine' (mean pairwise dissimilarity)"

    s = sub.add_parser("score", help="diversity of a whole embedding file or of listed sets")
    s.add_argument("embeddings", help=".mads embedding file")
    s.add_argument("--head", help="projection head file applied before scoring")
    s.add_argument("--metric", default="vendi", type=Metric.parse, help=metric_help)
    s.add_argument("--sets", help="JSON list (or object) of utterance-id lists to score separately")
    s.add_argument("--csv", help="with --sets, also write set_id,score CSV here")
    s.add_argument("--threads", type=int)
    s.add_argument("-o", "--output", help="output JSON (default: stdout)")

    b = sub.add_parser("benchmark", help="build a controlled-diversity benchmark manifest")
    b.add_argument("--pool", required=True, help="utterance metadata, JSON Lines")
    b.add_argument("--facet", required=True, choices=[f.value for f in Facet])
    b.add_argument("--levels", help="voice: speaker counts; gender: female ratios; noise: class counts; "
                                    "emotion/accent: number of entropy levels")
    b.add_argument("--opposed", choices=["gender_vs_voice", "emotion_vs_voice", "accent_vs_voice"],
                   help="build an opposed-facet series instead")
    b.add_argument("--set-size", type=int)
    b.add_argument("--sets-per-level", type=int, default=100)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--gender", choices=["F", "M"], help="voice series: restrict to one gender")
    b.add_argument("--speaker-policy", default="equal", choices=["equal", "opposed", "none"])
    b.add_argument("--n-speakers", type=int, help="speakers per set under the equal policy")
    b.add_argument("--threads", type=int)
    b.add_argument("-o", "--output", help="manifest path (default: stdout)")

    t = sub.add_parser("train-head", help="train a facet projection head")
    t.add_argument("--embeddings", required=True)
    t.add_argument("--metadata", required=True)
    t.add_argument("--facet", required=True, choices=[f.value for f in Facet])
    t.add_argument("--config", help="JSON or TOML file with TrainingConfig keys")
    t.add_argument("--steps", type=int)
    t.add_argument("--seed", type=int)
    t.add_argument("--hidden-dims", type=_csv_list(int), help="override layer widths, e.g. 256,128")
    t.add_argument("--dropout", type=float, default=0.1)
    t.add_argument("--val-fraction", type=float, default=0.0,
                   help="hold out this fraction and keep the best-validation weights")
    t.add_argument("-o", "--output", required=True, help="head file to write")
    t.add_argument("--log", help="training log CSV")

    e = sub.add_parser("evaluate", help="score a benchmark and correlate with ground truth")
    e.add_argument("--manifest", required=True)
    e.add_argument("--embeddings", required=True)
    e.add_argument("--head")
    e.add_argument("--metric", default="vendi", type=Metric.parse, help=metric_help)
    e.add_argument("--level-subset", type=_csv_list(int), help="only correlate these level indices")
    e.add_argument("--pooled", action="store_true", help="also report one correlation over all sets")
    e.add_argument("--threads", type=int)
    e.add_argument("-o", "--output", help="report JSON (default: stdout)")
    e.add_argument("--csv", help="score table CSV")

    c = sub.add_parser("compare", help="win rate of system A over system B")
    c.add_argument("a", help="score CSV of system A")
    c.add_argument("b", help="score CSV of system B")
    c.add_argument("--unpaired", action="store_true", help="compare every A score with every B score")
    c.add_argument("--facet")
    c.add_argument("--metric")
    c.add_argument("-o", "--output")

    pl = sub.add_parser("pool", help="average frame-level embeddings over time")
    pl.add_argument("frames", help=".npz archive: one (frames x dim) array per utterance id")
    pl.add_argument("-o", "--output", required=True, help=".mads file to write")
    return p


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="mads: %(message)s", stream=sys.stderr)
    handlers = {
        "score": cmd_score,
        "benchmark": cmd_benchmark,
        "train-head": cmd_train_head,
        "evaluate": cmd_evaluate,
        "compare": cmd_compare,
        "pool": cmd_pool,
    }
    try:
        handlers[args.command](args)
    except UsageError as exc:
        print(f"mads {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"mads {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"mads {args.command}: error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"mads {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
