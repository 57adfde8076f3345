"""Command-line front end: ``delone {generate,curve,certify,words,kappa}``.

A JSON ``--config`` file overrides command-line flags.  Completed analyses
exit with status 0, inconclusive verdicts included; invalid input and I/O
failures exit with status 2.
"""

import argparse
import datetime
import json
import math
import sys
import warnings

import numpy as np

from . import __version__
from ._io import dumps, fmt
from .core import Box, PointSample
from .crystallinity import (
    INCONCLUSIVE,
    STAGNATION,
    CERTIFIED_CRYSTAL,
    Verdict,
    certify_by_count,
    certify_by_repetitivity,
    certify_period,
    coset_decomposition,
    extract_periods,
    period_verdict,
    stagnation_verdict,
)
from .generators import (
    TAU,
    BeattyGenerator,
    CrystalGenerator,
    CutProjectGenerator,
    PerturbedGenerator,
    ProductGenerator,
    fibonacci_generator,
    generator_from_dict,
)
from .kappa import CATALOG, kappa_bounds, lattice_covering_radius, named_lattice, shortest_vector_length
from .patches import _class_covering, default_resolution, patch_census
from .words import (
    NdWord,
    cubic_complexity,
    full_periodicity_test,
    morse_hedlund_report,
    read_word,
    sturmian_word,
)

CERTIFICATES = ("count", "repetitivity", "period", "periods", "stagnation", "decompose")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument parsing helpers
# ---------------------------------------------------------------------------


def parse_real(text):
    """A float, or one of ``tau``, ``golden``, ``sqrtN``, ``1/sqrtN`` with an optional sign."""
    t = str(text).strip().lower()
    sign = -1.0 if t.startswith("-") else 1.0
    t = t.lstrip("+-")
    if t in ("tau", "golden", "phi"):
        return sign * TAU
    if t.startswith("1/sqrt"):
        return sign / math.sqrt(float(t[6:]))
    if t.startswith("sqrt"):
        return sign * math.sqrt(float(t[4:]))
    return sign * float(t)


def parse_vector(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [parse_real(v) for v in str(text).split(",") if v.strip()]


def parse_matrix(text):
    """``I2``, a catalog lattice name, or rows separated by ``;`` (``1,0;0,1``)."""
    if isinstance(text, (list, tuple)):
        return np.array(text, dtype=float)
    t = str(text).strip()
    if t[:1] in "Ii" and t[1:].isdigit():
        return np.eye(int(t[1:]))
    if ";" not in t and "," not in t:
        return named_lattice(t)
    return np.array([parse_vector(row) for row in t.split(";")], dtype=float)


def parse_window(text, dim):
    """``-100:100`` (all axes) or ``a:b,c:d,...`` (one interval per axis)."""
    if isinstance(text, dict):
        from .core import region_from_dict

        return region_from_dict(text)
    parts = [p for p in str(text).split(",") if p.strip()]
    bounds = []
    for p in parts:
        lo, sep, hi = p.rpartition(":")
        if not sep:
            raise UsageError(f"bad window interval {p!r}; use lo:hi")
        bounds.append((parse_real(lo), parse_real(hi)))
    if len(bounds) == 1:
        bounds = bounds * dim
    if len(bounds) != dim:
        raise UsageError(f"window has {len(bounds)} intervals for a {dim}-dimensional set")
    lo, hi = zip(*bounds)
    return Box(lo, hi)


def parse_list(text):
    """``5,10,20`` or an inclusive range ``start:stop:step``."""
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    t = str(text)
    if ":" in t:
        a, b, c = (float(v) for v in t.split(":"))
        n = int(math.floor((b - a) / c + 1e-9)) + 1
        return [a + i * c for i in range(n)]
    return [parse_real(v) for v in t.split(",") if v.strip()]


def build_generator(args):
    spec = getattr(args, "generator", None)
    if isinstance(spec, dict):
        return generator_from_dict(spec)
    kind = (args.set or "").lower()
    if kind == "fibonacci":
        return fibonacci_generator()
    if kind == "beatty":
        return BeattyGenerator(parse_real(args.alpha), parse_real(args.delta))
    if kind in ("crystal", "lattice"):
        offsets = None if args.offsets is None else parse_matrix(args.offsets)
        return CrystalGenerator(parse_matrix(args.basis or "I2"), offsets)
    if kind == "product":
        factor = fibonacci_generator() if args.factor in (None, "fibonacci") else BeattyGenerator(
            parse_real(args.alpha), parse_real(args.delta)
        )
        return ProductGenerator(factor, parse_real(args.eta), int(args.dim or 2))
    if kind in ("cut_project", "cut-project"):
        return CutProjectGenerator(parse_matrix(args.basis or "I2"), parse_vector(args.phi), parse_vector(args.delta_vec))
    if kind == "perturbed":
        base = CrystalGenerator(parse_matrix(args.basis or "I2"))
        return PerturbedGenerator(base, parse_vector(args.target), parse_vector(args.displacement))
    raise UsageError(f"unknown or missing --set {args.set!r}")


def load_sample(path):
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return PointSample.from_json(text)
    return PointSample.from_csv(text)


def resolve_input(args):
    """Return ``(sample, generator or None)`` from ``--sample`` or generator flags."""
    if getattr(args, "sample", None):
        sample = load_sample(args.sample)
        spec = sample.meta.get("generator")
        return sample, (generator_from_dict(spec) if spec else None)
    gen = build_generator(args)
    if args.window is None:
        raise UsageError("--window is required with a generator")
    tol = float(args.tol) if args.tol is not None else 1e-9
    return gen.sample(parse_window(args.window, gen.dim), tol), gen


def banner(args):
    if getattr(args, "no_banner", False):
        return None
    stamp = datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return f"delone {__version__} {args.command} {stamp}"


def with_banner_json(obj, args):
    b = banner(args)
    return dumps({"banner": b, **obj} if b else obj) + "\n"


def with_banner_csv(text, args):
    b = banner(args)
    return (f"# {b}\n" + text) if b else text


def emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


DEFAULT_GENERATE_WINDOW = "-10:10"


def cmd_generate(args):
    if args.window is None and not args.sample:
        args.window = DEFAULT_GENERATE_WINDOW
    sample, _ = resolve_input(args)
    fmt_ = args.format or ("csv" if (args.out or "").endswith(".csv") else "json")
    if fmt_ == "csv":
        emit(with_banner_csv(sample.to_csv(), args), args.out)
    else:
        emit(with_banner_json(sample.to_dict(), args), args.out)
    return 0


def curve_rows(sample, T_list, tol=None, resolution=None):
    rows = []
    for T in T_list:
        try:
            reg = patch_census(sample, T, tol, resolution=resolution)
        except ValueError:
            rows.append((T, math.nan, False, math.nan, math.inf, False))
            continue
        M = reg.repetitivity
        lo, hi = (M.lo, M.hi) if M is not None else (math.nan, math.inf)
        rows.append((T, reg.count, reg.exact, lo, hi, reg.exact))
    return rows


def cmd_curve(args):
    sample, _ = resolve_input(args)
    if args.T is None:
        raise UsageError("--T is required")
    T_list = sorted(parse_list(args.T))
    res = None if args.resolution is None else float(args.resolution)
    lines = ["T,N_lo,N_exact_flag,M_lo,M_hi,M_exact_flag"]
    for T, N, nex, lo, hi, mex in curve_rows(sample, T_list, args.tol, res):
        N_txt = "NaN" if isinstance(N, float) else str(N)
        lines.append(",".join([fmt(T), N_txt, str(int(nex)), fmt(lo), fmt(hi), str(int(mex))]))
    emit(with_banner_csv("\n".join(lines) + "\n", args), args.out)
    return 0


def _covering_upper(sample, generator, resolution):
    if generator is not None and generator.declared_R is not None:
        return float(generator.declared_R), "declared"
    iv = _class_covering(sample, sample.points, 0.0, resolution or default_resolution(sample))
    if iv is None:
        raise UsageError("window too small to bound the covering radius; pass --R")
    return iv.hi, "measured"


def run_certificates(sample, generator, T, wanted, R=None, U=None, V=None, resolution=None):
    """All requested verdicts plus the measurements that feed them."""
    out = {"T": T}
    if R is None:
        R, R_source = _covering_upper(sample, generator, resolution)
    else:
        R, R_source = float(R), "given"
    out["R"] = R
    out["R_source"] = R_source
    reg = patch_census(sample, T, resolution=resolution)
    out["census"] = {"count": reg.count, "exact": reg.exact}
    M = reg.repetitivity
    if M is not None:
        out["repetitivity"] = {"lo": M.lo, "hi": M.hi, "exact": reg.exact}
    M_hi = M.hi if M is not None else math.inf
    verdicts = []
    if "count" in wanted:
        verdicts.append(certify_by_count(reg, R))
    if "repetitivity" in wanted:
        verdicts.append(certify_by_repetitivity(M_hi, T, exact=reg.exact))
    if "period" in wanted:
        verdicts.append(certify_period(M_hi, T, sample.dim, exact=reg.exact))
    if "periods" in wanted:
        verdicts.append(period_verdict(sample, extract_periods(reg), T))
    if "stagnation" in wanted or "decompose" in wanted:
        U = T if U is None else float(U)
        V = U + 2 * R + 0.01 if V is None else float(V)
        try:
            stag = stagnation_verdict(sample, U, V, R, resolution=resolution)
        except ValueError as exc:
            stag = Verdict(INCONCLUSIVE, STAGNATION, V, math.nan, 1.0, True, (), str(exc))
        if "stagnation" in wanted:
            verdicts.append(stag)
        if "decompose" in wanted:
            if stag.kind == CERTIFIED_CRYSTAL:
                try:
                    out["decomposition"] = coset_decomposition(sample, U, resolution=resolution).to_dict()
                except ValueError as exc:
                    out["decomposition"] = {"error": str(exc)}
            else:
                out["decomposition"] = {"error": "stagnation not confirmed"}
    out["verdicts"] = [v.to_dict() for v in verdicts]
    return out


def cmd_certify(args):
    sample, gen = resolve_input(args)
    if args.T is None:
        raise UsageError("--T is required")
    wanted = [c.strip() for c in (args.certificates or "count,repetitivity,period,periods").split(",")]
    bad = [c for c in wanted if c not in CERTIFICATES]
    if bad:
        raise UsageError(f"unknown certificate(s) {bad}; choose from {list(CERTIFICATES)}")
    res = None if args.resolution is None else float(args.resolution)
    report = run_certificates(sample, gen, parse_real(args.T), wanted, args.R, args.U, args.V, res)
    report = {"input": {"source": sample.source, "points": len(sample), "window": sample.window.to_dict()}, **report}
    emit(with_banner_json(report, args), args.out)
    return 0


def cmd_words(args):
    if args.file:
        word = read_word(args.file)
    elif args.sturmian is not None:
        word = sturmian_word(parse_real(args.sturmian), int(args.length))
    else:
        raise UsageError("give --sturmian ALPHA or --file PATH")
    if args.periodicity:
        res = full_periodicity_test(word, args.mmax)
        emit(with_banner_json(res.to_dict(), args), args.out)
        return 0
    if isinstance(word, NdWord):
        m_max = int(args.mmax or max(1, min(word.extents) // 4))
        lines = ["m,N"] + [f"{m},{cubic_complexity(word, m)}" for m in range(1, m_max + 1)]
        emit(with_banner_csv("\n".join(lines) + "\n", args), args.out)
        return 0
    m_max = int(args.mmax or 50)
    if not 1 <= m_max <= len(word):
        raise UsageError("--mmax must lie between 1 and the word length")
    emit(with_banner_csv(morse_hedlund_report(word, m_max).to_csv(), args), args.out)
    return 0


def cmd_kappa(args):
    if args.n is not None:
        report = kappa_bounds(int(args.n)).to_dict()
    elif args.lattice or args.basis:
        B = named_lattice(args.lattice) if args.lattice else parse_matrix(args.basis)
        res = None if args.resolution is None else float(args.resolution)
        R = lattice_covering_radius(B, res)
        r = shortest_vector_length(B) / 2
        report = {
            "lattice": args.lattice or "custom",
            "n": len(B),
            "r": r,
            "R_lo": R.lo,
            "R_hi": R.hi,
            "kappa": R.hi / r,
            "kappa_lo": R.lo / r,
            "exact": R.exact,
        }
    else:
        raise UsageError(f"give --n N or --lattice NAME (catalog: {', '.join(CATALOG)})")
    emit(with_banner_json(report, args), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _common(p):
    p.add_argument("--config", help="JSON file whose keys override these flags")
    p.add_argument("--out", "-o", help="output path (default stdout)")
    p.add_argument("--no-banner", action="store_true", help="omit the timestamp banner")
    p.add_argument("--threads", type=int, default=1, help="parallelism bound (computations are single-threaded)")


def _set_args(p):
    p.add_argument("--set", help="fibonacci, beatty, crystal, product, cut_project, perturbed")
    p.add_argument("--sample", help="read a sample file (JSON or CSV) instead of generating")
    p.add_argument("--window", help="lo:hi for all axes, or lo1:hi1,lo2:hi2,... (generate defaults to -10:10)")
    p.add_argument("--alpha", default="tau")
    p.add_argument("--delta", default="-1/sqrt5")
    p.add_argument("--basis", help="I2, a lattice name, or rows 1,0;0,1")
    p.add_argument("--offsets", help="offset rows 0,0;0.5,0.25")
    p.add_argument("--factor", help="product factor: fibonacci (default) or beatty")
    p.add_argument("--eta", default="0.1")
    p.add_argument("--dim", type=int)
    p.add_argument("--phi")
    p.add_argument("--delta-vec", dest="delta_vec")
    p.add_argument("--target")
    p.add_argument("--displacement")
    p.add_argument("--tol", type=float)
    p.add_argument("--resolution", type=float, help="grid pitch for covering radii in dimension >= 2")


def build_parser():
    ap = argparse.ArgumentParser(prog="delone", description="Delone set complexity and crystallinity tools")
    ap.add_argument("--version", action="version", version=f"delone {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a sample of a generated set")
    _common(p)
    _set_args(p)
    p.add_argument("--format", choices=("json", "csv"))
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("curve", help="N(T) and M(T) as CSV")
    _common(p)
    _set_args(p)
    p.add_argument("--T", help="5,10,20 or start:stop:step")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("certify", help="crystallinity and period certificates as JSON")
    _common(p)
    _set_args(p)
    p.add_argument("--T")
    p.add_argument("--R", type=float, help="upper bound on the covering radius")
    p.add_argument("--U", type=float, help="stagnation lower radius (default T)")
    p.add_argument("--V", type=float, help="stagnation upper radius (default U + 2R + 0.01)")
    p.add_argument("--certificates", help=",".join(CERTIFICATES))
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("words", help="symbolic complexity report")
    _common(p)
    p.add_argument("--sturmian", help="slope alpha, e.g. tau or sqrt2")
    p.add_argument("--length", type=int, default=10000)
    p.add_argument("--file")
    p.add_argument("--mmax", type=int)
    p.add_argument("--periodicity", action="store_true")
    p.set_defaults(func=cmd_words)

    p = sub.add_parser("kappa", help="packing-covering constants")
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--lattice")
    p.add_argument("--basis")
    p.add_argument("--resolution", type=float)
    p.set_defaults(func=cmd_kappa)
    return ap


def apply_config(args):
    if not args.config:
        return args
    with open(args.config) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    for key, value in cfg.items():
        key = key.replace("-", "_")
        if key in ("command", "func"):
            continue
        setattr(args, key, value)
    return args


def _join_negative_values(argv):
    # argparse reads "-100:100" as an option; bind it to the preceding flag
    out = []
    for tok in argv:
        prev = out[-1] if out else ""
        if (tok[:1] == "-" and tok[1:2] in "0123456789." and tok[1:2]
                and prev.startswith("--") and "=" not in prev):
            out[-1] = f"{prev}={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_join_negative_values(argv))
    try:
        args = apply_config(args)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return args.func(args)
    except (UsageError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"delone {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
