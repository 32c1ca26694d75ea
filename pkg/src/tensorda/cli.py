"""Command-line interface: synth, fit, predict, evaluate, gridsearch."""

import argparse
import sys

import numpy as np

from . import dataio
from .evaluation import (
    DEFAULT_MAX_BLOCKS,
    DEFAULT_THETA_GRID,
    run_evaluation,
    tune_hyperparameters,
)
from .pipeline import BTTDAClassifier
from .streams import generator
from .synthetic import EffectTerm, SyntheticConfig, generate_synthetic


def _parse_dims(text):
    dims = tuple(int(part) for part in text.split(","))
    if not dims or any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError("dims must be positive integers like 8,16")
    return dims


def _parse_grid(text):
    return tuple(float(part) for part in text.split(","))


def _synth_config(args):
    """Build a generator config with one random orthonormal rank-1 effect per
    requested term; effect e carries amplitude for class ``e mod C`` only."""
    rng = generator(args.seed, 10_000)
    vectors_per_mode = []
    for dim in args.dims:
        q, r = np.linalg.qr(rng.standard_normal((dim, max(args.effects, 1))))
        signs = np.sign(np.diag(r))
        signs[signs == 0] = 1.0
        vectors_per_mode.append(q * signs)
    effects = []
    for e in range(args.effects):
        amplitudes = [0.0] * args.classes
        amplitudes[e % args.classes] = args.effect_scale
        effects.append(
            EffectTerm(
                vectors=tuple(v[:, e % v.shape[1]] for v in vectors_per_mode),
                amplitudes=tuple(amplitudes),
            )
        )
    return SyntheticConfig(
        dims=args.dims,
        n_per_class=args.per_class,
        n_classes=args.classes,
        effects=tuple(effects),
        noise_scale=args.noise,
        seed=args.seed,
    )


def _cmd_synth(args):
    X, y = generate_synthetic(_synth_config(args))
    dataio.write_dataset(args.out, X, y, n_classes=args.classes)
    print(f"wrote {X.shape[0]} samples of dims {tuple(X.shape[1:])} to {args.out}")
    return 0


def _cmd_fit(args):
    X, y, _ = dataio.read_dataset(args.data)
    model = BTTDAClassifier(
        n_blocks=args.blocks,
        theta=args.theta,
        random_state=args.seed,
    ).fit(X, y)
    dataio.save_decoder(args.out, model)
    print(
        f"fitted {model.bttda_.n_blocks_} block(s) at theta={args.theta}; "
        f"saved to {args.out}"
    )
    return 0


def _cmd_predict(args):
    model = dataio.load_decoder(args.model)
    X, y, _ = dataio.read_dataset(args.data)
    predictions = model.predict(X)
    scores = model.decision_scores(X)
    header = "sample,prediction," + ",".join(
        f"score_{c}" for c in model.classes_
    )
    lines = [header]
    for i in range(X.shape[0]):
        score_text = ",".join(repr(float(s)) for s in scores[i])
        lines.append(f"{i},{predictions[i]},{score_text}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_evaluate(args):
    X, y, _ = dataio.read_dataset(args.data)
    records = run_evaluation(
        X,
        y,
        outer_k=args.folds,
        theta_grid=args.theta_grid,
        max_blocks=args.max_blocks,
        inner_k=args.inner_folds,
        seed=args.seed,
        dataset=args.dataset_tag,
        subject=args.subject,
        session=args.session,
    )
    dataio.write_metrics_csv(args.out, records)
    scored = [r for r in records if r.metric != "nmse"]
    mean = float(np.mean([r.value for r in scored]))
    print(f"wrote {len(records)} records to {args.out}; mean {scored[0].metric}: {mean:.4f}")
    return 0


def _cmd_gridsearch(args):
    X, y, _ = dataio.read_dataset(args.data)
    result = tune_hyperparameters(
        X,
        y,
        theta_grid=args.theta_grid,
        max_blocks=args.max_blocks,
        inner_k=args.folds,
        seed=args.seed,
    )
    lines = ["theta,blocks,mean_score"]
    for (theta, blocks) in sorted(result.mean_scores):
        lines.append(f"{theta!r},{blocks},{result.mean_scores[(theta, blocks)]!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
        print(f"best: theta={result.theta} blocks={result.n_blocks}")
    else:
        sys.stdout.write(text)
        print(
            f"best: theta={result.theta} blocks={result.n_blocks}", file=sys.stderr
        )
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tensorda",
        description="Supervised tensor decomposition toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="generate and write a synthetic dataset")
    synth.add_argument("--dims", type=_parse_dims, default=(8, 16))
    synth.add_argument("--per-class", type=int, default=100)
    synth.add_argument("--classes", type=int, default=2)
    synth.add_argument("--effects", type=int, default=1)
    synth.add_argument("--effect-scale", type=float, default=1.0)
    synth.add_argument("--noise", type=float, default=1.0)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True)
    synth.set_defaults(func=_cmd_synth)

    fit = sub.add_parser("fit", help="fit a decoder and write a model file")
    fit.add_argument("--data", required=True)
    fit.add_argument("--theta", type=float, default=0.0)
    fit.add_argument("--blocks", type=int, default=1)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--out", required=True)
    fit.set_defaults(func=_cmd_fit)

    predict = sub.add_parser("predict", help="score samples with a saved model")
    predict.add_argument("--model", required=True)
    predict.add_argument("--data", required=True)
    predict.add_argument("--out", default=None)
    predict.set_defaults(func=_cmd_predict)

    evaluate = sub.add_parser("evaluate", help="nested cross-validated evaluation")
    evaluate.add_argument("--data", required=True)
    evaluate.add_argument("--folds", type=int, default=5)
    evaluate.add_argument("--inner-folds", type=int, default=5)
    evaluate.add_argument("--theta-grid", type=_parse_grid, default=DEFAULT_THETA_GRID)
    evaluate.add_argument("--max-blocks", type=int, default=DEFAULT_MAX_BLOCKS)
    evaluate.add_argument("--seed", type=int, default=0)
    evaluate.add_argument("--dataset-tag", default="synthetic")
    evaluate.add_argument("--subject", default="")
    evaluate.add_argument("--session", default="")
    evaluate.add_argument("--out", required=True)
    evaluate.set_defaults(func=_cmd_evaluate)

    grid = sub.add_parser("gridsearch", help="hyperparameter tuning report")
    grid.add_argument("--data", required=True)
    grid.add_argument("--folds", type=int, default=5)
    grid.add_argument("--theta-grid", type=_parse_grid, default=DEFAULT_THETA_GRID)
    grid.add_argument("--max-blocks", type=int, default=DEFAULT_MAX_BLOCKS)
    grid.add_argument("--seed", type=int, default=0)
    grid.add_argument("--out", default=None)
    grid.set_defaults(func=_cmd_gridsearch)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
