"""Command-line driver: acquire, gen, score, compare, serve, export.

Configuration precedence is flags > config file (JSON) > defaults, and the
effective configuration is echoed to stderr so every run is reproducible.
Exit codes: 0 success, 2 configuration error, 3 empty or unusable corpus,
4 port unavailable.
"""

import argparse
import io
import json
import socket
import sys
from pathlib import Path

from .constraints import ConfigError, ConstraintRanking, DEFAULT_RANKING_ORDER
from .corpus import CorpusError, ParallelCorpusReader, read_corpus
from .evaluation import MODES, AcquisitionConfig, acquire
from .frames import FrameParseError
from .harness import GoldSpec, SpecError, compare_modes, generate, score
from .lexicon import Lexicon, LexiconStore, StoreError, export_lexicon, load_lexicon, save_lexicon

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CORPUS = 3
EXIT_PORT = 4

CONFIG_KEYS = ("mode", "tau", "delta", "kappa", "theta", "min_occ", "ranking",
               "weights", "seed", "gen_cap", "reliability_pivot", "format", "jobs")

DEFAULTS = {
    "mode": "baseline",
    "tau": 0.01,
    "delta": 0.6,
    "kappa": 0.8,
    "theta": 1.0,
    "min_occ": 200,
    "ranking": ",".join(DEFAULT_RANKING_ORDER),
    "weights": None,
    "seed": 0,
    "gen_cap": 5,
    "reliability_pivot": 15,
    "format": "syntex",
    "jobs": 1,
}


class CliError(Exception):
    def __init__(self, message, code=EXIT_CONFIG):
        super().__init__(message)
        self.code = code


def _parse_weights(text):
    weights = {}
    for item in text.split(","):
        key, sep, value = item.partition("=")
        if not sep:
            raise CliError(f"--weights expects ID=VALUE pairs, got {item!r}")
        try:
            weights[key.strip()] = float(value)
        except ValueError:
            raise CliError(f"--weights value for {key.strip()!r} is not a number: {value!r}")
    return weights


def _merge_config(args):
    merged = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            loaded = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read config file {args.config}: {exc}")
        unknown = set(loaded) - set(CONFIG_KEYS)
        if unknown:
            raise CliError(f"unknown config file key(s): {', '.join(sorted(unknown))}")
        merged.update(loaded)
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _build_acquisition_config(merged):
    ranking_ids = merged["ranking"]
    if isinstance(ranking_ids, str):
        ranking_ids = tuple(x.strip() for x in ranking_ids.split(",") if x.strip())
    weights = merged["weights"]
    if isinstance(weights, str):
        weights = _parse_weights(weights)
    try:
        ranking = ConstraintRanking(order=tuple(ranking_ids), tau=merged["tau"],
                                    delta=merged["delta"], kappa=merged["kappa"])
        config = AcquisitionConfig(
            mode=merged["mode"], ranking=ranking, weights=weights,
            theta=merged["theta"], min_verb_occurrences=merged["min_occ"],
            gen_cap=merged["gen_cap"], reliability_pivot=merged["reliability_pivot"],
            seed=merged["seed"],
        )
        config.validate()
    except ConfigError as exc:
        raise CliError(str(exc))
    return config


def _echo_config(config, merged, extra=None):
    effective = config.semantic_dict()
    effective["format"] = merged["format"]
    effective["jobs"] = merged["jobs"]
    if extra:
        effective.update(extra)
    print("effective-config " + json.dumps(effective, sort_keys=True, ensure_ascii=False),
          file=sys.stderr)


def _open_reader(path, fmt, jobs):
    if not Path(path).exists():
        raise CliError(f"--corpus path does not exist: {path}")
    if jobs > 1:
        return ParallelCorpusReader(path, fmt, jobs)
    return read_corpus(path, fmt)


def cmd_acquire(args):
    merged = _merge_config(args)
    config = _build_acquisition_config(merged)
    if not args.corpus:
        raise CliError("--corpus is required")
    if not args.out and not args.store:
        raise CliError("--out (or --store) is required")
    try:
        reader = _open_reader(args.corpus, merged["format"], merged["jobs"])
    except CorpusError as exc:
        raise CliError(str(exc))
    _echo_config(config, merged, {"corpus": str(args.corpus)})

    want_tableaux = bool(args.dump_tableaux)
    result = acquire(reader, config, collect_tableaux=want_tableaux)
    if reader.sentences_read == 0:
        raise CliError(f"no usable sentences in {args.corpus}", code=EXIT_CORPUS)
    if result.summary.get("occurrences", 0) == 0:
        raise CliError(f"no verb occurrences in {args.corpus}", code=EXIT_CORPUS)

    if args.out:
        save_lexicon(result.lexicon, args.out)
    if args.store:
        store = LexiconStore(args.store)
        store.save_base(result.lexicon)
        store.write_meta({
            "corpus_path": str(Path(args.corpus).resolve()),
            "corpus_format": merged["format"],
            "config": config.semantic_dict(),
        })
    if args.dump_tableaux:
        with open(args.dump_tableaux, "w", encoding="utf-8") as handle:
            for tableau in result.tableaux:
                for line in tableau.record_lines():
                    handle.write(line + "\n")
    if args.tally_out and result.full_tally is not None:
        with open(args.tally_out, "w", encoding="utf-8") as handle:
            for line in result.full_tally.export_lines():
                handle.write(line + "\n")
    if args.stats_out and result.stats is not None:
        from .constraints import dispersion_table

        Path(args.stats_out).write_text(
            "\n".join(dispersion_table(result.stats)) + "\n", encoding="utf-8")
    if args.mwe_out and result.stats is not None:
        from .constraints import mwe_table

        Path(args.mwe_out).write_text(
            "\n".join(mwe_table(result.stats, config.ranking.kappa)) + "\n",
            encoding="utf-8")

    summary = result.summary
    print(f"sentences: {reader.sentences_read} read, {reader.sentences_skipped} skipped; "
          f"occurrences: {summary['occurrences']}; "
          f"verbs processed: {summary['verbs_processed']} "
          f"({summary['verbs_insufficient']} below --min-occ); "
          f"frames emitted: {summary['frames_emitted']} "
          f"({summary['frames_accepted']} accepted, {summary['frames_rejected']} filtered); "
          f"idiom candidates: {summary['idiom_candidates']}",
          file=sys.stderr)
    return EXIT_OK


def cmd_gen(args):
    try:
        spec = GoldSpec.from_json(args.spec)
        if args.seed is not None:
            spec.seed = args.seed
        corpus_text, gold = generate(spec)
    except (OSError, SpecError, FrameParseError, json.JSONDecodeError) as exc:
        raise CliError(f"bad gold spec: {exc}")
    Path(args.out_corpus).write_text(corpus_text, encoding="utf-8")
    save_lexicon(gold, args.out_gold)
    print(f"wrote {args.out_corpus} and {args.out_gold} (seed {spec.seed})", file=sys.stderr)
    return EXIT_OK


def _load_lexicon_arg(path, what):
    try:
        return load_lexicon(path)
    except (OSError, StoreError) as exc:
        raise CliError(f"cannot load {what} lexicon: {exc}")


def cmd_score(args):
    acquired = _load_lexicon_arg(args.acquired, "acquired")
    gold = _load_lexicon_arg(args.gold, "gold")
    report = score(acquired, gold)
    for line in report.table_lines():
        print(line)
    if args.records:
        for line in report.record_lines():
            print(line)
    if report.spurious:
        print(f"spurious: {len(report.spurious)}", file=sys.stderr)
    if report.missing:
        print(f"missing: {len(report.missing)}", file=sys.stderr)
    return EXIT_OK


def cmd_compare(args):
    merged = _merge_config(args)
    try:
        spec = GoldSpec.from_json(args.spec)
        if args.seed is not None:
            spec.seed = args.seed
    except (OSError, SpecError, FrameParseError, json.JSONDecodeError) as exc:
        raise CliError(f"bad gold spec: {exc}")
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    configs = {}
    for mode in modes:
        local = dict(merged)
        local["mode"] = mode
        configs[mode] = _build_acquisition_config(local)
    reports = compare_modes(spec, configs)
    print(f"{'mode':<10} {'precision':>9} {'recall':>9} {'F1':>9}")
    for mode in modes:
        report = reports[mode]
        print(f"{mode:<10} {report.precision:>9.3f} {report.recall:>9.3f} {report.f1:>9.3f}")
    return EXIT_OK


def cmd_serve(args):
    import uvicorn

    from .server import create_app

    store = LexiconStore(args.store)
    if not store.exists():
        raise CliError(f"store {args.store} has no lexicon.tsv (run acquire --store first)")
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        probe.bind((args.host, args.port))
    except OSError:
        raise CliError(f"port {args.port} is unavailable on {args.host}", code=EXIT_PORT)
    finally:
        probe.close()
    app = create_app(store, corpus_path=args.corpus, corpus_format=args.format or "tsv",
                     ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def cmd_export(args):
    lexicon = _load_lexicon_arg(args.lexicon, "input")
    lines = "\n".join(export_lexicon(lexicon)) + "\n"
    if args.out:
        Path(args.out).write_text(lines, encoding="utf-8")
    else:
        sys.stdout.write(lines)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="scf-forge",
                                     description="Verb subcategorization-frame acquisition")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_flags(p):
        p.add_argument("--config", help="JSON config file (flags override it)")
        p.add_argument("--mode", choices=MODES)
        p.add_argument("--tau", type=float)
        p.add_argument("--delta", type=float)
        p.add_argument("--kappa", type=float)
        p.add_argument("--theta", type=float)
        p.add_argument("--min-occ", dest="min_occ", type=int)
        p.add_argument("--ranking", help="comma-separated constraint ids, highest first")
        p.add_argument("--weights", help="linear weights, e.g. FAITH-ARG=0.25,FREQ-FLOOR=0.1")
        p.add_argument("--seed", type=int)
        p.add_argument("--gen-cap", dest="gen_cap", type=int)
        p.add_argument("--reliability-pivot", dest="reliability_pivot", type=int)

    p = sub.add_parser("acquire", help="acquire a lexicon from a parsed corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=["syntex", "tsv"])
    p.add_argument("--out", help="lexicon file to write")
    p.add_argument("--store", help="store directory to (over)write")
    p.add_argument("--jobs", type=int)
    p.add_argument("--dump-tableaux", dest="dump_tableaux",
                   help="write per-occurrence tableau records to this file")
    p.add_argument("--stats-out", dest="stats_out",
                   help="write the preposition dispersion table to this file")
    p.add_argument("--mwe-out", dest="mwe_out",
                   help="write idiom-slot candidates to this file")
    p.add_argument("--tally-out", dest="tally_out",
                   help="write the observed (verb, frame) tally to this file")
    add_config_flags(p)
    p.set_defaults(func=cmd_acquire)

    p = sub.add_parser("gen", help="generate a synthetic corpus from a gold spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--out-corpus", dest="out_corpus", required=True)
    p.add_argument("--out-gold", dest="out_gold", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("score", help="score an acquired lexicon against gold")
    p.add_argument("--acquired", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--records", action="store_true", help="also print per-verb records")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("compare", help="run several modes on one generated corpus")
    p.add_argument("--spec", required=True)
    p.add_argument("--modes", default="baseline,ot")
    add_config_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("serve", help="serve the review API over a store")
    p.add_argument("--store", required=True)
    p.add_argument("--port", type=int, default=7474)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--corpus", help="corpus path for evidence display and re-acquisition")
    p.add_argument("--format", choices=["syntex", "tsv"])
    p.add_argument("--ui-dir", dest="ui_dir", help="static review UI directory")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export", help="emit the 8-column lexicon interchange format")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"scf-forge: error: {exc}", file=sys.stderr)
        return exc.code
    except (ConfigError, SpecError, StoreError) as exc:
        print(f"scf-forge: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
