"""Command-line interface: ``ectwists <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import sys

from .curve import CurveError, get_curve
from .dirichlet import CharacterError, enumerate_classes, factor_conductor
from .lvalue import AfeParams, LValueError, algebraic_vector
from .rmt import RmtError, RmtModel, mc_haar_moment, moment_product
from .survey import (
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_PRECISION,
    ConfigError,
    SurveyConfig,
    predict_report,
    read_survey_csv,
    run_survey,
    write_report_csv,
)


def _survey(args) -> int:
    config = SurveyConfig(
        curve=args.curve,
        k=args.order,
        X_max=args.max_cond,
        out=args.out,
        checkpoint=args.checkpoint,
        eps=args.eps,
        jobs=args.jobs,
        include_k_squared=args.include_k_squared,
        coprime_only=not args.all_conductors,
        catalogue=args.catalogue,
    )
    result = run_survey(config)
    s = result.summary
    print(
        f"curve={s.curve} k={s.k} X={s.X_max} include_k_squared={s.include_k_squared} "
        f"coprime_only={s.coprime_only}"
    )
    print(f"conductors={s.conductors} classes={s.classes} characters={s.characters}")
    print(f"vanishing_classes={s.vanishing_classes} vanishing_characters={s.vanishing_characters}")
    print(f"max_residual={s.max_residual:.3g} split_checks={s.split_checks} errors={s.error_count}")
    for err in s.errors:
        print(f"error: {err}", file=sys.stderr)
    return result.exit_code


def _predict(args) -> int:
    model = RmtModel(args.order, args.max_cond, args.ae_half)
    observed = read_survey_csv(args.observed) if args.observed else None
    report = predict_report(
        args.order, args.max_cond, model, observed, args.coprime_to, args.include_k_squared
    )
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_report_csv(report, fh)
    else:
        write_report_csv(report, sys.stdout)
    return EXIT_OK


def _lvalue(args) -> int:
    curve = get_curve(args.curve, args.catalogue)
    classes = enumerate_classes(args.order, factor_conductor(args.order, args.cond))
    if not 0 <= args.class_id < len(classes):
        raise ConfigError(f"class must be in 0..{len(classes) - 1}")
    rec = algebraic_vector(curve, classes[args.class_id], AfeParams(args.eps))
    print(f"character {rec.char_label}")
    for t, (lt, nt) in enumerate(zip(rec.l_values, rec.n_values), start=1):
        print(f"t={t} L(1,chi^t)={lt.real:.15g}{lt.imag:+.15g}i  sigma_t(n_E)={nt:.12g}")
    print(f"n_E coords={list(rec.element.coords)} residual={rec.residual:.3g} vanishing={rec.vanishing}")
    return EXIT_OK


def _rmt_moment(args) -> int:
    print(repr(moment_product(args.s, args.size)))
    return EXIT_OK


def _mc_haar(args) -> int:
    mean, err = mc_haar_moment(args.size, args.s, args.samples, args.seed, args.jobs)
    exact = moment_product(args.s, args.size)
    print(f"estimate={mean!r} stderr={err!r} exact={exact!r} z={(mean - exact) / err:.3f}")
    return EXIT_OK


def _check(args) -> int:
    from .checks import run_checks

    return EXIT_OK if run_checks() else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ectwists", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("survey", help="count vanishing twists up to a conductor bound")
    p.add_argument("--curve", required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--max-cond", type=int, required=True)
    p.add_argument("--eps", type=float, default=1e-10)
    p.add_argument("--out", required=True)
    p.add_argument("--checkpoint")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--include-k-squared", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--all-conductors", action="store_true",
                   help="do not skip conductors sharing a factor with N_E (they are reported as errors)")
    p.add_argument("--catalogue")
    p.set_defaults(func=_survey)

    p = sub.add_parser("predict", help="random-matrix heuristic count")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--max-cond", type=int, required=True)
    p.add_argument("--ae-half", type=float, default=1.0)
    p.add_argument("--observed")
    p.add_argument("--coprime-to", type=int, default=1)
    p.add_argument("--include-k-squared", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--out")
    p.set_defaults(func=_predict)

    p = sub.add_parser("lvalue", help="one Galois class of twists")
    p.add_argument("--curve", required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--cond", type=int, required=True)
    p.add_argument("--class", dest="class_id", type=int, default=0)
    p.add_argument("--eps", type=float, default=1e-10)
    p.add_argument("--catalogue")
    p.set_defaults(func=_lvalue)

    p = sub.add_parser("rmt-moment", help="Keating-Snaith moment M_U(s, N)")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--s", type=float, required=True)
    p.set_defaults(func=_rmt_moment)

    p = sub.add_parser("mc-haar", help="Monte-Carlo moment over Haar U(N)")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--samples", type=int, default=10**5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_mc_haar)

    p = sub.add_parser("check", help="run the identity self-checks")
    p.set_defaults(func=_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, CurveError, CharacterError, RmtError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECISION


if __name__ == "__main__":
    sys.exit(main())
