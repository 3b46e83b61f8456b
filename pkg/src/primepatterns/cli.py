"""Command-line entry point: one subcommand per experiment, CSV or JSON output."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from . import bilinear, dickson, digits, gowers, gpy
from .arith import FactorSieve, PrimeTuple
from .errors import BudgetError, ConsistencyError, DomainError

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_BUDGET, EXIT_INTERNAL = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- parameter parsing ---------------------------------------------------


def parse_number(text: str) -> int | float:
    """Parse 1e7, 2^24, 10**6, 1/4, 0.25 or a plain integer.

    Integral values come back as int.
    """
    s = str(text).strip().replace("**", "^")
    try:
        if "^" in s:
            base, exp = s.split("^", 1)
            value: Any = Fraction(parse_number(base)) ** int(parse_number(exp))
        else:
            value = Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    return int(value) if value.denominator == 1 else float(value)


def parse_int(text: str) -> int:
    v = parse_number(text)
    if not isinstance(v, int):
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    return v


def parse_number_list(text: str) -> list:
    return [parse_number(tok) for tok in str(text).split(",") if tok.strip()]


def parse_int_list(text: str) -> list[int]:
    return [parse_int(tok) for tok in str(text).split(",") if tok.strip()]


# -- emission ------------------------------------------------------------


def _plain(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, float) and not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return v


def _format_cell(v) -> str:
    v = _plain(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(meta: dict, rows: list[dict], fmt: str) -> str:
    rows = [{k: _plain(v) for k, v in r.items()} for r in rows]
    meta = {k: _plain(v) for k, v in meta.items()}
    if fmt == "json":
        return json.dumps({"meta": meta, "rows": rows}, indent=2) + "\n"
    buf = io.StringIO()
    columns = list(rows[0]) if rows else []
    if fmt == "plain":
        for r in rows:
            buf.write(",".join(_format_cell(r[c]) for c in columns) + "\n")
        return buf.getvalue()
    for k, v in meta.items():
        buf.write(f"# {k}={_format_cell(v)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_format_cell(r[c]) for c in columns])
    return buf.getvalue()


# -- subcommands ---------------------------------------------------------

Result = tuple[dict, list[dict]]


def cmd_gaps(a) -> Result:
    tup = PrimeTuple.of(a.tuple)
    config = gpy.GpyConfig(N=a.N, k=a.k, l=a.l, gamma=a.gamma)
    sieve = FactorSieve(2 * a.N + tup.offsets[-1])
    dens = gpy.gpy_densities(sieve, config, tup)
    pred = gpy.rho_predicted(config)
    meta = {"R": dens.R, "Q1": dens.Q1}
    rows = [
        {"i": i + 1, "h": h, "Q2": q2, "rho_empirical": r, "rho_predicted": pred}
        for i, (h, q2, r) in enumerate(zip(tup.offsets, dens.Q2, dens.rho))
    ]
    return meta, rows


def cmd_eq333(a) -> Result:
    sieve = FactorSieve(max(a.P_max, int(max(a.R)), 2))
    rows = []
    for R in a.R:
        res = gpy.main_term_sum(sieve, R, P_max=a.P_max)
        rows.append({"R": R, "value": res.value, "asymptotic_ratio": res.asymptotic_ratio, "euler_constant": res.euler_product})
    return {}, rows


def cmd_bv(a) -> Result:
    sieve = FactorSieve(max(a.N, 2))
    rows = []
    for Q in a.Q:
        res = gpy.bv_discrepancy(sieve, a.N, Q)
        rows.append({"Q": Q, "discrepancy": res.value, "trivial_bound": res.trivial_bound})
    return {}, rows


def _parse_box(text: str, d: int) -> dickson.Box:
    parts = [p for p in text.split(",") if p.strip()]
    bounds = [tuple(parse_int(x) for x in p.split(":")) for p in parts]
    if len(bounds) == 1 and d > 1:
        bounds = bounds * d
    if any(len(b) != 2 for b in bounds) or len(bounds) != d:
        raise DomainError(f"box needs {d} ranges of the form lo:hi")
    return dickson.Box(tuple(b[0] for b in bounds), tuple(b[1] for b in bounds))


def cmd_dickson(a) -> Result:
    system = dickson.LinearFormSystem.parse(a.system)
    box = _parse_box(a.box, system.d)
    pred = dickson.dickson_prediction(system, box, P_max=a.P_max, seed=a.seed)
    row = {
        "beta_inf": pred.beta_inf,
        "beta_inf_stderr": pred.beta_inf_stderr,
        "product": pred.product,
        "prediction": pred.prediction,
    }
    if a.count:
        extreme = int(np.max(np.abs(system.evaluate(box.corners()))))
        sieve = FactorSieve(max(extreme, 2))
        count = dickson.weighted_count(sieve, system, box)
        row["weighted_count"] = count
        row["ratio"] = count / pred.prediction if pred.prediction else float("nan")
    return {"complexity": dickson.complexity(system)}, [row]


def cmd_tuple_series(a) -> Result:
    tup = PrimeTuple.of(a.tuple)
    return {}, [
        {
            "tuple": " ".join(map(str, tup.offsets)),
            "admissible": int(gpy.is_admissible(tup)),
            "singular_series": dickson.tuple_singular_series(tup, a.P_max),
        }
    ]


def cmd_gallagher(a) -> Result:
    rows = []
    for H in a.H:
        g = dickson.gallagher_mean(a.k, H, P_max=a.P_max, seed=a.seed)
        rows.append({"k": a.k, "H": H, "mean": g.mean, "stderr": g.stderr, "shapes": g.shapes, "sampled": int(g.sampled)})
    return {}, rows


def cmd_complexity(a) -> Result:
    system = dickson.LinearFormSystem.parse(a.system)
    c = dickson.complexity(system)
    return {"t": system.t, "d": system.d}, [{"complexity": "inf" if math.isinf(c) else int(c)}]


def cmd_digits_corr(a) -> Result:
    xs = [a.Xmax >> (a.stride * j) for j in range(a.steps - 1, -1, -1)]
    if xs[0] < 1:
        raise DomainError("Xmax too small for the requested steps")
    sieve = FactorSieve(max(a.Xmax, 2))
    rows = []
    for X in xs:
        c = digits.prime_digit_correlation(sieve, X)
        rows.append({"X": X, "correlation": c, "log2_abs_corr": math.log2(abs(c)) if c else float("-inf")})
    logs = [(math.log(r["X"]), math.log(abs(r["correlation"]))) for r in rows if r["correlation"]]
    meta = {}
    if len(logs) >= 2:
        meta["slope"] = float(np.polyfit(*zip(*logs), 1)[0])
    return meta, rows


def cmd_spectrum(a) -> Result:
    rows = []
    for k in range(a.kmin, a.kmax + 1):
        spec = digits.spectrum(k, a.method)
        mags = spec.abs()
        rows.append(
            {
                "k": k,
                "max_abs": float(mags.max()),
                "decay_bound": 2.0 ** (-k / 10),
                "l1_over_sqrt": float(mags.sum() / 2 ** (k / 2)),
                "parseval": float(np.sum(mags**2)),
            }
        )
    return {"method": a.method}, rows


def _sequence(name: str, N: int | None = None) -> Callable[[np.ndarray], np.ndarray]:
    if name == "one":
        return lambda n: np.ones(n.shape)
    if name == "zero":
        return lambda n: np.zeros(n.shape)
    if name == "digits":
        return lambda n: digits.digit_signs(n).astype(np.float64)
    if name.startswith("char:"):
        q = parse_int(name.split(":", 1)[1])
        return lambda n: np.exp(2j * np.pi * (n % q) / q)
    raise DomainError(f"unknown sequence {name!r}; use one, zero, digits or char:q")


def _complex_row(name: str, z) -> dict:
    z = complex(z)
    return {"piece": name, "real": z.real, "imag": z.imag}


def cmd_vaughan(a) -> Result:
    sieve = FactorSieve(max(a.X, 2))
    split = bilinear.vaughan_split(sieve, _sequence(a.f), a.X, a.U)
    rows = [_complex_row(n, getattr(split, n)) for n in ("S1", "S2", "S3", "S4")]
    rows += [_complex_row("total", split.total), _complex_row("direct", split.direct)]
    return {"U": split.U}, rows


def cmd_type_sums(a) -> Result:
    f = _sequence(a.f)
    logX = a.X.bit_length() - 1
    if a.X != 1 << logX:
        raise DomainError("X must be a power of two")
    rng = np.random.default_rng(a.seed)
    rows = []
    for mu in a.mu:
        nu = logX - mu
        if mu < 1 or nu < 1:
            raise DomainError(f"mu={mu} leaves no room for a dyadic n-range below X")
        trivial = float(2 ** (mu - 1) * 2 ** (nu - 1))
        t1 = bilinear.type_i_sum(f, mu, bilinear.DyadicRange(nu))
        rows.append({"type": "I", "mu": mu, "nu": nu, "abs_value": t1, "trivial": trivial, "ratio": t1 / trivial})
        if (1 << (mu - 1)) * (1 << (nu - 1)) <= bilinear.BILINEAR_BUDGET:
            am = rng.choice([-1.0, 1.0], size=1 << (mu - 1))
            bn = rng.choice([-1.0, 1.0], size=1 << (nu - 1))
            t2 = bilinear.type_ii_sum(f, am, bn, mu, nu)
            rows.append({"type": "II", "mu": mu, "nu": nu, "abs_value": abs(t2.value), "trivial": trivial, "ratio": t2.ratio})
    return {}, rows


def _finite_function(name: str, N: int, seed: int) -> gowers.FiniteFunction:
    n = np.arange(N, dtype=np.int64)
    if name == "random":
        rng = np.random.default_rng(seed)
        return gowers.FiniteFunction(rng.uniform(-1, 1, N), True)
    if name == "quadratic":
        return gowers.FiniteFunction(gowers.e((n * n % N) / N), True)
    if name == "bracket":
        return gowers.FiniteFunction(gowers.e((n * np.floor(n * math.sqrt(2)).astype(np.int64) % N) / N), True)
    if name.startswith("char:"):
        return gowers.FiniteFunction.character(N, parse_int(name.split(":", 1)[1]))
    raise DomainError(f"unknown function {name!r}; use random, quadratic, bracket or char:r")


def cmd_gowers(a) -> Result:
    f = _finite_function(a.function, a.N, a.seed)
    rows = [{"k": k, "norm": gowers.u_norm(f, k)} for k in a.k]
    r, corr = gowers.u2_inverse(f)
    return {"argmax_r": r, "max_fourier": corr}, rows


def cmd_wtrick(a) -> Result:
    W = a.W if a.W is not None else gowers.primorial(a.w if a.w is not None else gowers.default_w(a.M))
    sieve = FactorSieve(max(W * a.M + a.b, 2))
    res = gowers.w_tricked_lambda(sieve, a.b, W, a.M)
    return {}, [{"W": W, "b": a.b, "M": a.M, "mean": res.mean}]


def cmd_heisenberg(a) -> Result:
    rows = []
    for n in range(a.nmax + 1):
        pt = gowers.heisenberg_orbit(a.alpha, a.beta, a.gamma, n)
        x, y, z = pt.reduced
        rows.append(
            {"n": n, "x": pt.power[0, 1], "y": pt.power[1, 2], "z": pt.power[0, 2], "x_red": x, "y_red": y, "z_red": z}
        )
    return {}, rows


# -- parser --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="primepatterns", description="Numerical experiments on prime patterns.")
    parser.add_argument("--format", choices=("csv", "json", "plain"), default="csv")
    parser.add_argument("--output", help="write to this path instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(handler=fn)
        p.add_argument("--seed", type=parse_int, default=0)
        return p

    p = add("gaps", cmd_gaps, "weighted densities rho^(i) against their prediction")
    p.add_argument("--N", type=parse_int, default=10**6)
    p.add_argument("--k", type=parse_int, default=3)
    p.add_argument("--l", type=parse_int, default=1)
    p.add_argument("--gamma", type=parse_number, default=0.25)
    p.add_argument("--tuple", type=parse_int_list, default=[0, 2, 6])

    p = add("eq333", cmd_eq333, "odd-divisor main-term sum and its asymptotic ratio")
    p.add_argument("--R", type=parse_number_list, default=[100, 1000])
    p.add_argument("--P-max", dest="P_max", type=parse_int, default=10**5)

    p = add("bv", cmd_bv, "Bombieri-Vinogradov discrepancy sum")
    p.add_argument("--N", type=parse_int, default=10**6)
    p.add_argument("--Q", type=parse_int_list, default=[100])

    p = add("dickson", cmd_dickson, "local factors and archimedean factor for a system of forms")
    p.add_argument("--system", required=True, help='rows "c_1 .. c_d b" separated by ";"')
    p.add_argument("--box", required=True, help="lo:hi per variable, comma separated")
    p.add_argument("--P-max", dest="P_max", type=parse_int, default=10**5)
    p.add_argument("--count", action="store_true", help="also compute the weighted prime count")

    p = add("tuple-series", cmd_tuple_series, "singular series of a prime tuple")
    p.add_argument("--tuple", type=parse_int_list, required=True)
    p.add_argument("--P-max", dest="P_max", type=parse_int, default=10**5)

    p = add("gallagher", cmd_gallagher, "mean singular series over tuples in [0, H]")
    p.add_argument("--k", type=parse_int, default=1)
    p.add_argument("--H", type=parse_int_list, default=[100, 1000])
    p.add_argument("--P-max", dest="P_max", type=parse_int, default=10**5)

    p = add("complexity", cmd_complexity, "complexity of a system of affine-linear forms")
    p.add_argument("--system", required=True)

    p = add("digits-corr", cmd_digits_corr, "mean of Lambda(n)(-1)^{s(n)} over dyadic X")
    p.add_argument("--Xmax", type=parse_int, default=2**24)
    p.add_argument("--steps", type=parse_int, default=5)
    p.add_argument("--stride", type=parse_int, default=2, help="log2 spacing between successive X")

    p = add("spectrum", cmd_spectrum, "sup and L1 size of the digit-sign spectrum")
    p.add_argument("--kmin", type=parse_int, default=4)
    p.add_argument("--kmax", type=parse_int, default=20)
    p.add_argument("--method", choices=digits.METHODS, default="product")

    p = add("vaughan", cmd_vaughan, "four-way Vaughan split of sum Lambda(n) f(n)")
    p.add_argument("--X", type=parse_int, default=2**16)
    p.add_argument("--U", type=parse_number, default=None)
    p.add_argument("--f", default="digits", help="one, zero, digits or char:q")

    p = add("type-sums", cmd_type_sums, "Type I and Type II sums for a sequence")
    p.add_argument("--X", type=parse_int, default=2**20)
    p.add_argument("--mu", type=parse_int_list, default=[1, 5, 10])
    p.add_argument("--f", default="digits")

    p = add("gowers", cmd_gowers, "Gowers norms of a function on Z/NZ")
    p.add_argument("--N", type=parse_int, default=101)
    p.add_argument("--k", type=parse_int_list, default=[2, 3])
    p.add_argument("--function", default="quadratic", help="random, quadratic, bracket or char:r")

    p = add("wtrick", cmd_wtrick, "mean of the W-tricked von Mangoldt function")
    p.add_argument("--b", type=parse_int, default=1)
    p.add_argument("--W", type=parse_int, default=None)
    p.add_argument("--w", type=parse_int, default=None, help="use W = product of primes <= w")
    p.add_argument("--M", type=parse_int, default=10**5)

    p = add("heisenberg", cmd_heisenberg, "orbit of a Heisenberg element and its reduction")
    p.add_argument("--alpha", type=parse_number, default=math.sqrt(2))
    p.add_argument("--beta", type=parse_number, default=0.0)
    p.add_argument("--gamma", type=parse_number, default=1.0)
    p.add_argument("--nmax", type=parse_int, default=10)
    return parser


def _meta(args: argparse.Namespace) -> dict:
    skip = {"handler", "output", "format"}
    out = {}
    for k, v in vars(args).items():
        if k in skip:
            continue
        out[k] = ",".join(map(str, v)) if isinstance(v, list) else v
    return out


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        extra_meta, rows = args.handler(args)
        text = render({**_meta(args), **extra_meta}, rows, args.format)
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            stdout.write(text)
        return EXIT_OK
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except argparse.ArgumentTypeError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=stderr)
        return EXIT_BUDGET
    except DomainError as exc:
        print(f"domain error: {exc}", file=stderr)
        return EXIT_DOMAIN
    except ConsistencyError as exc:
        print(f"internal consistency failure: {exc}", file=stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
