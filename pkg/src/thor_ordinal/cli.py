"""Command-line entry point.

Exit status: 0 success, 1 user/config error, 2 numeric fault.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bench, data, gradcheck, methods
from .core import Boundaries
from .errors import NumericFault, OrdinalError
from .methods import Predictor
from .trainer import TrainConfig, evaluate, train

EXIT_OK, EXIT_USER, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _floats(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text):
    return [int(t) for t in text.split(",") if t.strip()]


def _add_common(p):
    p.add_argument("--config", help="file of key=value lines; explicit flags win")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out-dir", default="out")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_data(p):
    g = p.add_argument_group("data")
    g.add_argument("--data", default="synth", help="'synth' or a CSV path")
    g.add_argument("--k", type=int, default=5)
    g.add_argument("--per-class", type=int, default=200)
    g.add_argument("--d", type=int, default=8)
    g.add_argument("--noise", type=float, default=0.5)
    g.add_argument("--label-noise", type=float, default=0.0)
    g.add_argument("--header", choices=("auto", "yes", "no"), default="auto", help="CSV header row")
    g.add_argument("--ratios", type=_floats, default=[0.6, 0.2, 0.2])


def _add_train(p, with_method=True):
    g = p.add_argument_group("training")
    if with_method:
        g.add_argument("--method", choices=methods.METHODS, default="thor")
    g.add_argument("--epochs", type=int, default=100)
    g.add_argument("--batch-size", type=int, default=32)
    g.add_argument("--lr", type=float, default=0.01)
    g.add_argument("--gamma", type=float, default=0.5)
    g.add_argument("--hidden", type=_ints, default=[64, 32], help="comma-separated widths; empty for linear")
    g.add_argument("--activation", choices=("relu", "tanh", "identity"), default="relu")
    g.add_argument("--boundaries", type=_floats, default=None, help="explicit thresholds b0,...,bK")
    g.add_argument("--select-on", choices=("mae", "accuracy"), default="mae")
    g.add_argument("--c", type=float, default=1.0, help="pairwise-term weight for cnnpor/hybrid")
    g.add_argument("--head", choices=methods.HEADS, default=None)
    g.add_argument("--allow-infeasible-margin", action="store_true")


def build_parser():
    parser = _Parser(prog="thor-ordinal", description="Threshold-based ordinal regression toolkit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    parser.commands = sub.choices

    p = sub.add_parser("gen-data", help="write a synthetic dataset as CSV")
    _add_common(p)
    _add_data(p)

    p = sub.add_parser("train", help="train one method")
    _add_common(p)
    _add_data(p)
    _add_train(p)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    _add_common(p)
    _add_data(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--head", choices=methods.HEADS, default=None)
    p.add_argument("--split", choices=("train", "val", "test", "all"), default="test")

    p = sub.add_parser("compare", help="train several methods on identical splits")
    _add_common(p)
    _add_data(p)
    _add_train(p, with_method=False)
    p.add_argument("--methods", default="thor,orcnn,coral,cnnpor,hybrid")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("sweep-gamma", help="threshold-loss accuracy/MAE across margins")
    _add_common(p)
    _add_data(p)
    _add_train(p, with_method=False)
    p.add_argument("--gammas", type=_floats, default=[0.0, 0.1, 0.2, 0.3, 0.4, 0.5])
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("gradcheck", help="finite-difference audit of every loss")
    _add_common(p)
    p.add_argument("--method", choices=("all", *methods.METHODS), default="all")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-4)
    return parser


def read_config(path):
    """``key=value`` lines; ``#`` starts a comment. Keys may use - or _."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise OrdinalError(f"{path}: line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        sub = parser.commands[args.command]
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, value in read_config(args.config).items():
            action = known.get(key)
            if action is None or key in ("config", "help"):
                raise UsageError(f"{args.config}: unknown key {key!r} for {args.command}")
            if action.const is True and action.nargs == 0:
                defaults[key] = value.lower() in ("1", "true", "yes", "on")
            elif action.type is not None:
                defaults[key] = action.type(value)
            else:
                defaults[key] = value
            if action.choices is not None and defaults[key] not in action.choices:
                raise UsageError(f"{args.config}: {key}={value} not in {list(action.choices)}")
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def load_dataset(args):
    if args.data == "synth":
        spec = data.SyntheticSpec(
            k=args.k,
            per_class=args.per_class,
            d=args.d,
            noise=args.noise,
            transform_seed=args.seed,
            label_noise=args.label_noise,
            seed=args.seed,
        )
        return data.generate_synthetic(spec)
    header = {"auto": None, "yes": True, "no": False}[args.header]
    return data.load_csv(args.data, args.k, header=header)


def load_splits(args):
    return data.split(load_dataset(args), tuple(args.ratios), args.seed)


def train_config(args, method=None):
    b = "default" if args.boundaries is None else Boundaries(tuple(args.boundaries), args.gamma)
    return TrainConfig(
        method=method or getattr(args, "method", "thor"),
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr=args.lr,
        gamma=args.gamma,
        seed=args.seed,
        boundaries=b,
        hidden=tuple(args.hidden),
        select_on=args.select_on,
        activation=args.activation,
        c=args.c,
        head=args.head,
        allow_infeasible_margin=args.allow_infeasible_margin,
    )


def _out_dir(args):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_gen_data(args):
    path = _out_dir(args) / "data.csv"
    data.save_csv(load_dataset(args), path)
    print(path)


def cmd_train(args):
    cfg = train_config(args)
    tr, va, te = load_splits(args)
    out = _out_dir(args)
    rep = train(tr, va, cfg, out)
    head = cfg.eval_head()
    m = evaluate(rep.predictor, te, head)
    print(f"best_epoch={rep.best_epoch} checkpoint={rep.best_checkpoint}")
    print(f"test {m.as_line()}")


def cmd_eval(args):
    pred = Predictor.load(args.checkpoint)
    if args.data == "synth" and args.k != pred.k:
        args.k = pred.k
    if args.split == "all":
        ds = load_dataset(args)
    else:
        ds = dict(zip(("train", "val", "test"), load_splits(args)))[args.split]
    m = evaluate(pred, ds, args.head)
    line = m.as_line()
    if args.head:
        line = f"head={args.head} {line}"
    (_out_dir(args) / "eval.txt").write_text(line + "\n", encoding="utf-8")
    print(line)


def cmd_compare(args):
    names = [m.strip() for m in args.methods.split(",") if m.strip()]
    rows = bench.compare(names, load_splits(args), train_config(args, "thor"), jobs=args.jobs)
    text = bench.format_table(rows, args.format)
    (_out_dir(args) / ("compare.csv" if args.format == "csv" else "compare.txt")).write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def cmd_sweep_gamma(args):
    series = bench.sweep_gamma(
        args.gammas,
        load_splits(args),
        train_config(args, "thor"),
        jobs=args.jobs,
        allow_infeasible=args.allow_infeasible_margin,
    )
    text = bench.format_sweep(series)
    (_out_dir(args) / "sweep.csv").write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def cmd_gradcheck(args):
    names = methods.METHODS if args.method == "all" else (args.method,)
    results = gradcheck.check_all(names, seeds=range(args.seeds), tol=args.tol)
    ok = True
    for name, r in results.items():
        status = "ok" if r.max_rel_error < args.tol else "FAIL"
        ok &= status == "ok"
        print(f"{name:7s} max_rel_error={r.max_rel_error:.3e} checked={r.n_checked} excluded={r.n_excluded} {status}")
    return EXIT_OK if ok else EXIT_NUMERIC


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "eval": cmd_eval,
    "compare": cmd_compare,
    "sweep-gamma": cmd_sweep_gamma,
    "gradcheck": cmd_gradcheck,
}


def run(argv=None):
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USER
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USER
    except (OrdinalError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        status = COMMANDS[args.command](args)
    except NumericFault as exc:
        print(f"numeric fault: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OrdinalError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    return EXIT_OK if status is None else status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
