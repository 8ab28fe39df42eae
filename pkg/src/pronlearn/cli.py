"""Command-line entry point: distance, candidates, determine, make-world, synth, learn, evaluate."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .candidate_space import build_candidate_space, format_table
from .errors import InputError
from .eval_report import (grammar_sweep, instance_log_tsv, sweep_json, sweep_table_csv)
from .hpd import POLICIES, determination_order, determine_best_pron, format_trace, list_scorer
from .learner import LearnConfig, learn_all
from .lexicon import (format_corpus, format_grammar, format_lexicon, parse_corpus, parse_grammar,
                      parse_lexicon, parse_pron)
from .phoneme_core import build_confusion_matrix
from .pron_space import (build_name_distance_matrix, inputs_checksum, load_matrix_cache,
                         pron_distance, save_matrix_cache)
from .recognizer import ChannelModel
from .synthetic import format_variants, make_world, parse_variants, synthesize_corpus

log = logging.getLogger("pronlearn")

_DEFAULTS = LearnConfig()


def read_config(path: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment.  Keys use flag spelling."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InputError(f"{path}:{lineno}: expected key = value")
        value = value.strip().strip('"').strip("'")
        out[key.strip().replace("-", "_")] = value
    return out


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _matrix(args):
    return build_confusion_matrix(
        _read(args.phonemes) if args.phonemes else None,
        _read(args.clusters) if args.clusters else None,
        _read(args.acoustic) if args.acoustic else None)


def _learn_config(args) -> LearnConfig:
    return LearnConfig(r0=args.r0, m_max=args.m_max, k1=args.k1, k2=args.k2,
                       order_policy=args.order, reject_threshold=args.reject_threshold,
                       lam=args.lam, allow_deletion=args.allow_deletion)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def cmd_distance(args) -> int:
    m = _matrix(args)
    a = parse_pron(args.a, m.inventory)
    b = parse_pron(args.b, m.inventory)
    print(f"{pron_distance(a, b, m):.6f}")
    return 0


def _word_or_pron(text: str, args, m):
    if args.lexicon:
        lex = parse_lexicon(_read(args.lexicon), m.inventory)
        if text in lex:
            return lex.canonical(text)
    return parse_pron(text, m.inventory)


def cmd_candidates(args) -> int:
    m = _matrix(args)
    base = _word_or_pron(args.word, args, m)
    space = build_candidate_space(base, args.r0, args.m_max, m, args.allow_deletion)
    counts = "  ".join(f"N{k}={n}" for k, n in zip(range(space.M, 0, -1), space.counts))
    print(f"# base: {' '.join(base)}  radius: {space.radius:.6g}  {counts}  X={space.size}")
    sys.stdout.write(format_table(space))
    return 0


def cmd_determine(args) -> int:
    m = _matrix(args)
    base = _word_or_pron(args.base, args, m)
    observed = parse_pron(args.observed, m.inventory)
    space = build_candidate_space(base, args.r0, args.m_max, m, args.allow_deletion)
    order = determination_order(space, args.order)
    res = determine_best_pron(space, list_scorer(m.ids(observed), m, args.lam), order, m)
    print(f"# base: {' '.join(base)}  observed: {' '.join(observed)}  X={space.size}  "
          f"order: {order.policy} {list(order.permutation)}")
    sys.stdout.write(format_trace(res))
    return 0


def cmd_make_world(args) -> int:
    m = _matrix(args)
    world = make_world(m, n_names=args.names, variant_fraction=args.variant_fraction,
                       r0=args.r0, seed=args.seed)
    out = Path(args.out)
    _write(out / "grammar.txt", format_grammar(world.grammar))
    _write(out / "lexicon.dict", format_lexicon(world.lexicon))
    _write(out / "variants.tsv", format_variants(world.variants))
    _write(out / "run.json", json.dumps({"command": "make-world", "seed": args.seed,
                                         "names": args.names,
                                         "variant_fraction": args.variant_fraction,
                                         "r0": args.r0}, indent=2) + "\n")
    print(f"wrote {len(world.grammar)} names, {len(world.lexicon)} words, "
          f"{len(world.variants)} variants to {out}")
    return 0


def cmd_synth(args) -> int:
    m = _matrix(args)
    grammar = parse_grammar(_read(args.grammar))
    lex = parse_lexicon(_read(args.lexicon), m.inventory)
    variants = parse_variants(_read(args.variants), grammar) if args.variants else []
    channel = ChannelModel(args.temperature, args.rho, args.seed)
    corpus = synthesize_corpus(grammar, lex, variants, channel, m, args.per_name, args.prefix)
    text = format_corpus(corpus)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        _write(Path(args.out), text)
        _write(Path(args.out + ".meta.json"),
               json.dumps({"command": "synth", "seed": args.seed, "rho": args.rho,
                           "temperature": args.temperature, "per_name": args.per_name,
                           "instances": len(corpus)}, indent=2) + "\n")
        log.info("wrote %d utterances to %s", len(corpus), args.out)
    return 0


def cmd_learn(args) -> int:
    m = _matrix(args)
    grammar = parse_grammar(_read(args.grammar))
    lex = parse_lexicon(_read(args.lexicon), m.inventory)
    corpus = parse_corpus(_read(args.corpus), m.inventory)
    cfg = _learn_config(args)
    ndm = None
    if args.matrix_cache:
        checksum = inputs_checksum(grammar, lex, m)
        ndm = load_matrix_cache(args.matrix_cache, grammar, checksum)
        if ndm is None:
            ndm = build_name_distance_matrix(grammar, lex, m, lazy=False)
            save_matrix_cache(args.matrix_cache, ndm, checksum)
    elif not args.lazy_matrix:
        ndm = build_name_distance_matrix(grammar, lex, m, lazy=False)
    new_lex, report, timing = learn_all(corpus, grammar, lex, m, cfg, ndm=ndm, jobs=args.jobs)
    report["seed"] = args.seed
    out = Path(args.out)
    _write(out / "lexicon.dict", format_lexicon(new_lex))
    _write(out / "report.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    _write(out / "timing.json", json.dumps(timing, indent=2) + "\n")
    t = report["totals"]
    print(f"baseline errors: {t['baseline_errors']}/{t['utterances']}  "
          f"names learned: {t['target_names']}  words updated: {t['words_updated']}")
    return 0


def cmd_evaluate(args) -> int:
    m = _matrix(args)
    grammar = parse_grammar(_read(args.grammar))
    lex = parse_lexicon(_read(args.lexicon), m.inventory)
    learned = parse_lexicon(_read(args.learned), m.inventory) if args.learned else None
    corpus = parse_corpus(_read(args.corpus), m.inventory)
    sizes = [int(s) for s in args.sizes.split(",")] if args.sizes else [len(grammar)]
    sweep = grammar_sweep(corpus, grammar, sizes, args.seed, lex, learned, m,
                          args.reject_threshold, args.lam)
    table = sweep_table_csv(sweep)
    sys.stdout.write(table)
    if args.out:
        out = Path(args.out)
        _write(out / "table.csv", table)
        _write(out / "detail.json", sweep_json(sweep, {"seed": args.seed}))
        if args.instance_log:
            text = instance_log_tsv(sweep.base[-1], "base")
            if learned is not None:
                text += instance_log_tsv(sweep.learned[-1], "learned").split("\n", 1)[1]
            _write(out / "instances.tsv", text)
        if not args.no_figures:
            from .plotting import plot_ner_sweep
            plot_ner_sweep(sweep, out / "ner.png")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; command-line flags override it")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1, help="worker processes for learning")
    common.add_argument("--phonemes", help="phoneme inventory file (default: shipped)")
    common.add_argument("--clusters", help="linguistic cluster file (default: shipped)")
    common.add_argument("--acoustic", help="raw acoustic CSV (default: shipped synthetic table)")
    common.add_argument("-v", "--verbose", action="store_true")

    search = argparse.ArgumentParser(add_help=False)
    search.add_argument("--r0", type=float, default=_DEFAULTS.r0, help="phoneme search radius")
    search.add_argument("--m-max", type=int, default=_DEFAULTS.m_max,
                        help="longest pronunciation searched at the full radius")
    search.add_argument("--allow-deletion", action="store_true",
                        help="add a void (deletion) candidate at every position")
    search.add_argument("--order", choices=POLICIES, default=_DEFAULTS.order_policy)
    search.add_argument("--lam", type=float, default=_DEFAULTS.lam, help="score sharpness")

    p = argparse.ArgumentParser(prog="pronlearn", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("distance", parents=[common], help="normalized pronunciation distance")
    s.add_argument("a")
    s.add_argument("b")
    s.set_defaults(func=cmd_distance)

    s = sub.add_parser("candidates", parents=[common, search], help="enumerate a candidate space")
    s.add_argument("word", help="lexicon word (with --lexicon) or quoted phoneme string")
    s.add_argument("--lexicon")
    s.set_defaults(func=cmd_candidates)

    s = sub.add_parser("determine", parents=[common, search],
                       help="trace hierarchical determination for one observation")
    s.add_argument("base", help="baseline word (with --lexicon) or phoneme string")
    s.add_argument("observed", help="observed phoneme string")
    s.add_argument("--lexicon")
    s.set_defaults(func=cmd_determine)

    s = sub.add_parser("make-world", parents=[common], help="generate a synthetic name world")
    s.add_argument("--out", required=True)
    s.add_argument("--names", type=int, default=200)
    s.add_argument("--variant-fraction", type=float, default=0.25)
    s.add_argument("--r0", type=float, default=_DEFAULTS.r0)
    s.set_defaults(func=cmd_make_world)

    s = sub.add_parser("synth", parents=[common], help="synthesize a corpus (JSON Lines)")
    s.add_argument("--grammar", required=True)
    s.add_argument("--lexicon", required=True)
    s.add_argument("--variants")
    s.add_argument("--per-name", type=int, default=4)
    s.add_argument("--rho", type=float, default=0.05, help="per-phoneme corruption probability")
    s.add_argument("--temperature", type=float, default=10.0, help="substitution temperature")
    s.add_argument("--prefix", default="", help="instance id prefix")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("learn", parents=[common, search], help="learn pronunciations")
    s.add_argument("--grammar", required=True)
    s.add_argument("--lexicon", required=True)
    s.add_argument("--corpus", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--k1", type=int, default=_DEFAULTS.k1)
    s.add_argument("--k2", type=int, default=_DEFAULTS.k2)
    s.add_argument("--reject-threshold", type=float, default=_DEFAULTS.reject_threshold)
    s.add_argument("--matrix-cache", help="binary name distance matrix cache file")
    s.add_argument("--lazy-matrix", action="store_true",
                   help="compute name distance rows on demand instead of the full matrix")
    s.set_defaults(func=cmd_learn)

    s = sub.add_parser("evaluate", parents=[common], help="NER/ERR over nested grammar sizes")
    s.add_argument("--grammar", required=True)
    s.add_argument("--lexicon", required=True)
    s.add_argument("--learned", help="learned lexicon to compare against the baseline")
    s.add_argument("--corpus", required=True)
    s.add_argument("--sizes", help="comma-separated ascending grammar sizes")
    s.add_argument("--reject-threshold", type=float, default=_DEFAULTS.reject_threshold)
    s.add_argument("--lam", type=float, default=_DEFAULTS.lam)
    s.add_argument("--out", help="directory for table.csv, detail.json and ner.png")
    s.add_argument("--instance-log", action="store_true", help="also write instances.tsv")
    s.add_argument("--no-figures", action="store_true")
    s.set_defaults(func=cmd_evaluate)
    return p


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        values = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(values) - known)
        if unknown:
            raise InputError(f"{args.config}: unknown keys {unknown}")
        for action in sub._actions:
            if action.dest in values and action.type is not None:
                values[action.dest] = action.type(values[action.dest])
            elif action.dest in values and isinstance(action, argparse._StoreTrueAction):
                values[action.dest] = values[action.dest].lower() in ("1", "true", "yes", "on")
        sub.set_defaults(**values)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
