"""Batch front end for the counting, congruence and exponent modules.

One subcommand per operation, JSON on stdout (CSV for ladders and
tables), and a reproducibility manifest written beside every artifact.
Exact integers and rationals serialize as decimal strings, never as
floats.  Exit codes: 0 success, 1 invalid input, 2 budget exceeded.
"""

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import analytic, congruence, exponents, meanvalue
from .exactmath import IntPolynomial

GLOBAL_FLAGS = ("budget", "threads", "seed", "format", "out", "config")


class UsageError(ValueError):
    """Bad command line or config input; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _plain(value):
    """Make a value JSON-ready: exact numbers become decimal strings."""
    if value is None or isinstance(value, (bool, float, str)):
        return value
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return "%d/%d" % (value.numerator, value.denominator)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    raise TypeError("cannot serialize %r" % (value,))


def _fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError("not a rational: %r" % text) from exc


def _fraction_list(text):
    return [_fraction(part) for part in text.split(",")]


def _int_list(text):
    try:
        return [int(part) for part in text.split(",")]
    except ValueError as exc:
        raise UsageError("not an integer list: %r" % text) from exc


def _load_config(path):
    location = Path(path) if path else Path("artifact.toml")
    if not location.exists():
        if path:
            raise UsageError("config file %s not found" % location)
        return {}
    try:
        return tomllib.loads(location.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise UsageError("broken config %s: %s" % (location, exc)) from exc


def _class_count_payload(count):
    inst = count.instance
    return {
        "p": inst.p, "a": inst.a, "b": inst.b, "k": inst.k, "r": inst.r,
        "h": inst.h, "sigma": list(inst.sigma), "xi": inst.xi,
        "eta": inst.eta, "m": list(inst.m),
        "cardinality": count.cardinality,
        "witnesses": [list(w) for w in count.witnesses],
    }


# ------------------------------------------------------------- handlers
# each returns (payload, text, extension); text None means JSON payload

def _run_count_j(args, config):
    params = meanvalue.SystemParams(args.k, args.s, args.x)
    return {"J": meanvalue.count_j(params, args.strategy, config)}, None, "json"


def _run_count_restricted(args, config):
    params = meanvalue.SystemParams(args.k, args.s, args.x)
    given = (args.p, args.c, args.xi)
    if any(v is not None for v in given) and None in given:
        raise UsageError("--p, --c and --xi must be given together")
    constraint = None
    if args.p is not None:
        constraint = meanvalue.ResidueConstraint(args.p, args.c, args.xi)
    value = meanvalue.count_j_restricted(params, constraint, config=config)
    return {"J": value}, None, "json"


def _run_diagonal(args, config):
    params = meanvalue.SystemParams(args.k, args.s, args.x)
    return {"diagonal": meanvalue.diagonal_oracle(params)}, None, "json"


def _run_ladder(args, config):
    result = meanvalue.scaling_ladder(args.k, args.s, args.x_values,
                                      args.strategy, config)
    if args.format == "csv":
        return None, result.to_csv(), "csv"
    payload = {
        "k": result.k, "s": result.s,
        "rows": [{"X": X, "J": J} for X, J in result.rows],
        "slope": result.slope,
    }
    return payload, None, "json"


def _run_congruence_b(args, config):
    instance_flags = (args.sigma, args.xi, args.eta, args.m)
    if any(v is not None for v in instance_flags):
        if None in instance_flags:
            raise UsageError(
                "--sigma, --xi, --eta and --m must be given together")
        instance = congruence.CongruenceInstance(
            args.p, args.a, args.b, args.k, args.r, args.h,
            tuple(args.sigma), args.xi, args.eta, tuple(args.m))
        count = congruence.enumerate_B(instance, config)
    else:
        family = congruence.CongruenceFamily(args.p, args.a, args.b,
                                             args.k, args.r, args.h)
        count = congruence.max_B(family, config)
    return _class_count_payload(count), None, "json"


def _run_verify_lemma(args, config):
    depth = congruence.BOUND_RULES[args.lemma].depth
    h = args.k if depth == "k" else args.k - args.r + 1
    family = congruence.CongruenceFamily(args.p, args.a, args.b,
                                         args.k, args.r, h)
    report = congruence.verify_lemma_bound(family, args.lemma, config)
    return report.report_dict(), None, "json"


def _run_hensel(args, config):
    if not 1 <= len(args.poly) <= 3:
        raise UsageError("between one and three --poly lists are required")
    if len(args.poly) == 1:
        system = [IntPolynomial(args.poly[0])]
    else:
        # several --poly lists form a diagonal system: list i is read as a
        # univariate polynomial in variable i
        nvars = len(args.poly)
        system = []
        for i, coeffs in enumerate(args.poly):
            terms = {}
            for degree, coeff in enumerate(coeffs):
                if coeff:
                    exponent = [0] * nvars
                    exponent[i] = degree
                    terms[tuple(exponent)] = coeff
            system.append(congruence.MultiPoly(nvars, terms))
    count = congruence.hensel_count(system, args.modulus, args.level, config)
    return {"count": count}, None, "json"


def _run_lemma32(args, config):
    cert = congruence.solve_shift_identity(args.alpha, args.beta,
                                           args.beta_max)
    return {"alpha": cert.alpha, "beta": cert.beta,
            "c": list(cert.c), "d": list(cert.d)}, None, "json"


def _run_exponent(args, config):
    bounds = exponents.envelope(args.k, args.s)

    def row(bound):
        lo, hi = bound.valid_s_range
        return {"exponent": bound.exponent, "source": bound.source,
                "kind": bound.kind, "valid_from": lo, "valid_to": hi}

    return {"minimum": row(bounds[0]),
            "bounds": [row(b) for b in bounds]}, None, "json"


def _gtilde_rows(k_min, k_max):
    rows = []
    for k in range(k_min, k_max + 1):
        got = exponents.gtilde(k)
        row = {"k": k, "value": got.value, "first": got.first,
               "second": got.second, "provenance": got.provenance,
               "integral_boundary": got.integral_boundary,
               "theta": None, "consistent": None}
        if k >= 6:
            table = exponents.theta_table(k)
            row["theta"] = table.theta
            row["consistent"] = table.consistent
        rows.append(row)
    return rows


def _run_gtilde_table(args, config):
    if args.k_min > args.k_max:
        raise UsageError("--k-min must not exceed --k-max")
    rows = _gtilde_rows(args.k_min, args.k_max)
    if args.format == "csv":
        lines = ["k,value,first,second,provenance,theta,consistent"]
        for row in rows:
            lines.append("%d,%d,%d,%d,%s,%s,%s" % (
                row["k"], row["value"], row["first"], row["second"],
                row["provenance"],
                "" if row["theta"] is None else row["theta"],
                "" if row["consistent"] is None else row["consistent"]))
        return None, "\n".join(lines) + "\n", "csv"
    return {"rows": rows}, None, "json"


def _run_gtilde_plus(args, config):
    return {"bound": exponents.gtilde_plus(args.k)}, None, "json"


def _run_tarry(args, config):
    return dict(exponents.misc_exponents(args.k)), None, "json"


def _run_weyl_eval(args, config):
    value = analytic.eval_f(args.coeffs, args.x, config)
    return {"re": value.real, "im": value.imag,
            "modulus": abs(value)}, None, "json"


def _run_minor_arc(args, config):
    verdict = analytic.classify_arc(args.alpha, args.k, args.x)
    witness = None
    if verdict.witness is not None:
        witness = {"a": verdict.witness[0], "q": verdict.witness[1]}
    return {"alpha": verdict.alpha, "k": verdict.k, "X": verdict.X,
            "verdict": verdict.verdict, "witness": witness}, None, "json"


def _run_frac_min(args, config):
    got = analytic.fractional_min_search(args.coeffs, args.n, config)
    return {"n": got.n, "value": got.value,
            "below_reference": got.below_reference}, None, "json"


def _run_waring_count(args, config):
    return {"count": analytic.waring_count(args.s, args.k, args.n,
                                           config)}, None, "json"


def _run_singular_series(args, config):
    got = analytic.singular_series_waring(args.s, args.k, args.n, args.q,
                                          config)
    return {"value": got.value, "q_max": got.q_max,
            "movement": got.movement}, None, "json"


def _run_constants(args, config):
    got = analytic.mean_value_constants(args.s, args.k, args.q, args.box,
                                        args.grid, config)
    return {"series": got.series, "series_q": got.series_q,
            "integral": got.integral, "box": got.box, "grid": got.grid,
            "refinement": got.refinement}, None, "json"


def _run_ledger(args, config):
    choices = args.h
    if choices is None and args.seed is not None:
        choices = args.seed
    trace = exponents.ledger_replay(args.k, args.r, args.mode, args.steps,
                                    choices)
    states = [{"n": st.n, "a": st.a, "b": st.b, "h": st.h, "psi": st.psi,
               "c": st.c, "gamma": st.gamma} for st in trace.states]
    report = trace.report
    return {
        "mode": trace.mode, "k": trace.k, "r": trace.r, "s": trace.s,
        "kappa": trace.kappa, "theta": trace.theta, "steps": trace.steps,
        "states": states,
        "report": {
            "gamma_nonnegative": report.gamma_nonnegative,
            "c_within_growth": report.c_within_growth,
            "c_closed_form": report.c_closed_form,
            "descent_inequality": report.descent_inequality,
            "psi_lower_bound": report.psi_lower_bound,
            "b_lower_bound": report.b_lower_bound,
            "greedy_b_is_power": report.greedy_b_is_power,
            "ok": report.ok,
        },
    }, None, "json"


CSV_CAPABLE = {"ladder", "gtilde-table"}


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("shared options")
    group.add_argument("--budget", type=int, default=None,
                       help="estimated-cost ceiling for enumerations")
    group.add_argument("--threads", type=int, default=None,
                       help="worker threads inside the counting modules")
    group.add_argument("--seed", type=int, default=None,
                       help="seed for randomized trajectories")
    group.add_argument("--format", choices=("json", "csv"), default=None,
                       help="artifact format (csv for ladders and tables)")
    group.add_argument("--out", default=None,
                       help="directory for artifacts and the run manifest")
    group.add_argument("--config", default=None,
                       help="config file (default: ./artifact.toml)")

    parser = _Parser(prog="artifact",
                     description="exact counting and exponent toolbox")
    commands = parser.add_subparsers(dest="subcommand", required=True,
                                     parser_class=_Parser)

    def command(name, handler, helptext):
        sub = commands.add_parser(name, parents=[common], help=helptext)
        sub.set_defaults(func=handler)
        return sub

    sub = command("count-j", _run_count_j,
                  "count solutions of the power-sum system")
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--s", type=int, required=True)
    sub.add_argument("--x", type=int, required=True)
    sub.add_argument("--strategy", default="auto",
                     choices=("auto",) + meanvalue.STRATEGIES)

    sub = command("count-restricted", _run_count_restricted,
                  "count solutions with every variable in one residue class")
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--s", type=int, required=True)
    sub.add_argument("--x", type=int, required=True)
    sub.add_argument("--p", type=int)
    sub.add_argument("--c", type=int)
    sub.add_argument("--xi", type=int)

    sub = command("diagonal", _run_diagonal,
                  "closed-form count of diagonal solutions")
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--s", type=int, required=True)
    sub.add_argument("--x", type=int, required=True)

    sub = command("ladder", _run_ladder,
                  "exact counts over a geometric range with log-log slope")
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--s", type=int, required=True)
    sub.add_argument("--x-values", type=_int_list, required=True,
                     metavar="X1,X2,...")
    sub.add_argument("--strategy", default="auto",
                     choices=("auto",) + meanvalue.STRATEGIES)

    sub = command("congruence-b", _run_congruence_b,
                  "count congruence classes, per instance or maximized")
    sub.add_argument("--p", type=int, required=True)
    sub.add_argument("--a", type=int, required=True)
    sub.add_argument("--b", type=int, required=True)
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--r", type=int, required=True)
    sub.add_argument("--h", type=int, required=True)
    sub.add_argument("--sigma", type=_int_list, metavar="1,-1,...")
    sub.add_argument("--xi", type=int)
    sub.add_argument("--eta", type=int)
    sub.add_argument("--m", type=_int_list, metavar="M1,M2,...")

    sub = command("verify-lemma", _run_verify_lemma,
                  "check one stated class-count bound by enumeration")
    sub.add_argument("--lemma", required=True,
                     choices=tuple(sorted(congruence.BOUND_RULES)))
    sub.add_argument("--p", type=int, required=True)
    sub.add_argument("--a", type=int, required=True)
    sub.add_argument("--b", type=int, required=True)
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--r", type=int, required=True)

    sub = command("hensel", _run_hensel,
                  "count nonsingular roots modulo a prime power")
    sub.add_argument("--modulus", type=int, required=True)
    sub.add_argument("--level", type=int, required=True)
    sub.add_argument("--poly", type=_int_list, action="append",
                     required=True, metavar="C0,C1,...",
                     help="ascending coefficients; repeat for a system")

    sub = command("lemma32", _run_lemma32,
                  "integral certificate for the binomial shift identity")
    sub.add_argument("--alpha", type=int, required=True)
    sub.add_argument("--beta", type=int, required=True)
    sub.add_argument("--beta-max", type=int, default=congruence.DEFAULT_BETA_MAX)

    sub = command("exponent", _run_exponent,
                  "every admissible exponent at (k, s), sharpest first")
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--s", type=int, required=True)

    sub = command("gtilde-table", _run_gtilde_table,
                  "asymptotic-formula thresholds over a range of k")
    sub.add_argument("--k-min", type=int, required=True)
    sub.add_argument("--k-max", type=int, required=True)

    sub = command("gtilde-plus", _run_gtilde_plus,
                  "almost-all threshold for the asymptotic formula")
    sub.add_argument("--k", type=int, required=True)

    sub = command("tarry", _run_tarry,
                  "derived exponents: Tarry, Weyl, equidistribution, moments")
    sub.add_argument("--k", type=int, required=True)

    sub = command("weyl-eval", _run_weyl_eval,
                  "evaluate the exponential sum at exact rational phases")
    sub.add_argument("--coeffs", type=_fraction_list, required=True,
                     metavar="A1,A2,...", help="rationals like 1/2,0,3/7")
    sub.add_argument("--x", type=int, required=True)

    sub = command("minor-arc", _run_minor_arc,
                  "classify a rational point as minor or major")
    sub.add_argument("--alpha", type=_fraction, required=True)
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--x", type=int, required=True)

    sub = command("frac-min", _run_frac_min,
                  "minimize the distance of a polynomial phase to integers")
    sub.add_argument("--coeffs", type=_fraction_list, required=True,
                     metavar="A1,A2,...")
    sub.add_argument("--n", type=int, required=True)

    sub = command("waring-count", _run_waring_count,
                  "exact number of representations by positive powers")
    sub.add_argument("--s", type=int, required=True)
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--n", type=int, required=True)

    sub = command("singular-series", _run_singular_series,
                  "truncated arithmetic factor with movement diagnostic")
    sub.add_argument("--s", type=int, required=True)
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--n", type=int, required=True)
    sub.add_argument("--q", type=int, required=True)

    sub = command("constants", _run_constants,
                  "truncated factors of the main-term asymptotic")
    sub.add_argument("--s", type=int, required=True)
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--q", type=int, required=True)
    sub.add_argument("--box", type=int, required=True)
    sub.add_argument("--grid", type=int, required=True)

    sub = command("ledger", _run_ledger,
                  "replay the descent recurrence and check its inequalities")
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--r", type=int, required=True)
    sub.add_argument("--mode", required=True, choices=exponents.LEDGER_MODES)
    sub.add_argument("--steps", type=int, required=True)
    sub.add_argument("--h", type=_int_list, metavar="H_INIT,H0,H1,...",
                     help="explicit perturbations; omit for zeros or --seed")

    return parser


def _manifest(args, wall_seconds, artifacts):
    parameters = {key: value for key, value in vars(args).items()
                  if key not in GLOBAL_FLAGS + ("func", "subcommand")}
    return {
        "subcommand": args.subcommand,
        "parameters": _plain(parameters),
        "budget": _plain(args.budget),
        "threads": _plain(args.threads),
        "seed": _plain(args.seed),
        "format": args.format,
        "strategy": getattr(args, "strategy", None),
        "wall_seconds": round(wall_seconds, 6),
        "artifacts": artifacts,
    }


def dispatch(argv=None):
    args = _build_parser().parse_args(argv)
    file_defaults = _load_config(args.config)
    for key, fallback in (("budget", meanvalue.DEFAULT_BUDGET),
                          ("threads", 1), ("seed", None),
                          ("format", "json"), ("out", ".")):
        if getattr(args, key) is None:
            setattr(args, key, file_defaults.get(key, fallback))
    if args.format == "csv" and args.subcommand not in CSV_CAPABLE:
        raise UsageError("%s emits JSON only" % args.subcommand)
    config = meanvalue.CountingConfig(budget=args.budget,
                                      threads=args.threads)

    started = time.monotonic()
    payload, text, extension = args.func(args, config)
    wall_seconds = time.monotonic() - started
    if text is None:
        text = json.dumps(_plain(payload), indent=2) + "\n"

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    artifact = out_dir / ("%s.%s" % (args.subcommand, extension))
    artifact.write_text(text, encoding="utf-8")
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    manifest = _manifest(args, wall_seconds, {artifact.name: digest})
    (out_dir / "run.manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    sys.stdout.write(text)
    return 0


def main(argv=None):
    try:
        return dispatch(argv)
    except meanvalue.BudgetExceeded as exc:
        sys.stderr.write(json.dumps(
            {"error": "budget-exceeded", "message": str(exc),
             "estimated": str(exc.estimated), "budget": str(exc.budget)})
            + "\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(json.dumps(
            {"error": "invalid-input", "message": str(exc)}) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
