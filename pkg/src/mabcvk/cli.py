"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 key or validation error, 3 data or
corruption error. Every failure prints exactly one line to stderr of the form
``mabcvk: <ErrorClass>: <message>``.
"""

import argparse
import logging
import os
import shlex
import sys
import tempfile
from pathlib import Path

from . import analysis
from ._validation import check_rng
from .container import FORMATS, decrypt_file, encrypt_file
from .exceptions import DataProblem, InvalidKeyError, KeyNotFoundError, KeyProblem, MABCVKError
from .keys import check_alpha, generate_keypair, make_context, parse_key, serialize_key, validate_keypair
from .modmath import prime_sieve

EXIT_OK, EXIT_USAGE, EXIT_KEY, EXIT_DATA = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _sizes(text):
    try:
        return [_positive_int(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated sizes, got {text!r}") from None


def build_parser():
    parser = _Parser(prog="mabcvk", description="MABCVK block cipher tools")
    parser.add_argument("-v", "--verbose", action="store_true", help=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("keygen", help="generate a validated key file")
    p.add_argument("--bits", type=_positive_int, required=True)
    p.add_argument("--alpha", required=True, help="rotation fraction as N/D")
    p.add_argument("--width", type=_positive_int, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("validate", help="check a key against every block value")
    p.add_argument("--key", type=Path, required=True)
    p.add_argument("--width", type=_positive_int)

    p = sub.add_parser("encrypt")
    p.add_argument("--key", type=Path, required=True)
    p.add_argument("--in", dest="infile", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--format", choices=sorted(FORMATS), default="wide32")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("decrypt")
    p.add_argument("--key", type=Path, required=True)
    p.add_argument("--in", dest="infile", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("bench", help="time encryption over several file sizes")
    p.add_argument("--key", type=Path, required=True)
    p.add_argument("--sizes", type=_sizes, required=True, help="sizes in KB, e.g. 64,128,256")
    p.add_argument("--records", action="store_true", help="key=value lines instead of a table")

    p = sub.add_parser("analyze", help="keyspace and randomization reports")
    kinds = p.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    k = kinds.add_parser("keyspace")
    k.add_argument("--bits", type=_positive_int, action="append")
    k.add_argument("--rate", type=float, action="append", help="encryptions per microsecond")
    k.add_argument("--records", action="store_true")
    k = kinds.add_parser("primes")
    k.add_argument("--bits", type=_positive_int, default=128)
    k.add_argument("--checks", type=float, default=1e12, help="primes tested per second")
    k.add_argument("--records", action="store_true")
    k = kinds.add_parser("randomize")
    k.add_argument("--key", type=Path, required=True)
    k.add_argument("--in", dest="infile", type=Path, required=True)
    k.add_argument("--trials", type=_positive_int, default=100)
    k.add_argument("--seed", type=int)
    k.add_argument("--records", action="store_true")

    p = sub.add_parser("crack", help="known-plaintext exhaustive key search")
    p.add_argument("--known", type=Path, required=True)
    p.add_argument("--cipher", type=Path, required=True)
    p.add_argument("--max-bits", type=_positive_int, required=True)
    return parser


def write_atomic(path, data):
    """Write via a temp file in the same directory, renamed into place on success."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _load_key(path, width=None):
    kp, stored_width = parse_key(Path(path).read_text(encoding="utf-8"))
    return kp, width if width is not None else stored_width


def _load_valid_context(path):
    kp, width = _load_key(path)
    report = validate_keypair(kp, width, exhaustive=False)
    if not report.valid:
        raise InvalidKeyError(report.first_failing_block, width)
    return make_context(kp, width)


def _emit(rows, columns, records, out):
    """Print dict rows as an aligned table or as ``key=value`` records.

    Records are one line per row; values containing spaces are shell-quoted,
    so ``shlex.split`` recovers the fields.
    """
    if records:
        for row in rows:
            print(" ".join(f"{c}={shlex.quote(str(row[c]))}" for c in columns), file=out)
        return
    widths = {c: max(len(c), *(len(str(r[c])) for r in rows)) for c in columns}
    print("  ".join(c.ljust(widths[c]) for c in columns), file=out)
    print("  ".join("-" * widths[c] for c in columns), file=out)
    for row in rows:
        print("  ".join(str(row[c]).ljust(widths[c]) for c in columns), file=out)


def _cmd_keygen(args, out):
    kp = generate_keypair(args.bits, check_alpha(args.alpha), args.width, check_rng(args.seed))
    write_atomic(args.out, serialize_key(kp, args.width).encode("utf-8"))
    print(f"k1={kp.k1} k2={kp.k2} alpha={kp.alpha_num}/{kp.alpha_den} width={args.width}", file=out)


def _cmd_validate(args, out):
    kp, width = _load_key(args.key, args.width)
    report = validate_keypair(kp, width)
    hist = ",".join(f"{k}:{v}" for k, v in report.candidate_count_histogram.items())
    print(
        f"valid={str(report.valid).lower()} min_candidates={report.candidate_count_min} "
        f"failing={len(report.failing_blocks)} histogram={hist}",
        file=out,
    )
    if not report.valid:
        raise InvalidKeyError(report.first_failing_block, width)


def _cmd_encrypt(args, out):
    ctx = _load_valid_context(args.key)
    plain = args.infile.read_bytes()
    write_atomic(args.out, encrypt_file(plain, ctx, check_rng(args.seed), args.format))


def _cmd_decrypt(args, out):
    kp, width = _load_key(args.key)
    write_atomic(args.out, decrypt_file(args.infile.read_bytes(), make_context(kp, width)))


def _cmd_bench(args, out):
    ctx = _load_valid_context(args.key)
    result = analysis.bench(args.sizes, ctx, check_rng(None))
    rows = [
        {"size_kb": r.size_kb, "encrypt_s": f"{r.encrypt_seconds:.6f}", "decrypt_s": f"{r.decrypt_seconds:.6f}"}
        for r in result.rows
    ]
    _emit(rows, ["size_kb", "encrypt_s", "decrypt_s"], args.records, out)
    for name, fit in (("encrypt", result.encrypt_fit), ("decrypt", result.decrypt_fit)):
        if fit is not None:
            print(
                f"fit={name} slope_s_per_kb={fit.slope:.6g} intercept_s={fit.intercept:.6g} "
                f"r2={fit.r_squared:.4f}",
                file=out,
            )


def _cmd_analyze(args, out):
    if args.kind == "keyspace":
        table = analysis.keyspace_table(args.bits or (56, 128, 168), args.rate or (1.0, 1e6))
        rows = [
            {
                "key_bits": r.key_bits,
                "alternative_keys": f"{r.alternative_keys:.3g}",
                "rate_per_us": f"{r.rate_per_microsecond:g}",
                "seconds": f"{r.avg_crack_time_seconds:.6g}",
                "time": "≈" + r.rendered,
            }
            for r in table
        ]
        _emit(rows, list(rows[0]), args.records, out)
    elif args.kind == "primes":
        r = analysis.prime_keyspace_report(args.bits, args.checks)
        row = {
            "key_bits": r.key_bits,
            "checks_per_s": f"{r.checks_per_second:g}",
            "prime_count": f"{r.prime_count:.6g}",
            "years": f"{r.years:.6g}",
        }
        _emit([row], list(row), args.records, out)
    else:
        kp, width = _load_key(args.key)
        ctx = make_context(kp, width)
        report = analysis.randomization_report(
            ctx, args.infile.read_bytes(), args.trials, check_rng(args.seed)
        )
        rows = [
            {
                "value": p,
                "candidates": report.candidate_counts[p],
                "distinct": report.distinct_observed[p],
                "coverage": f"{report.coverage[p]:.3f}",
            }
            for p in sorted(report.candidate_counts)
        ]
        _emit(rows, ["value", "candidates", "distinct", "coverage"], args.records, out)


def _cmd_crack(args, out):
    known = args.known.read_bytes()
    container = args.cipher.read_bytes()
    pairs = analysis.search_space_size(args.max_bits)
    primes = len(prime_sieve(1 << args.max_bits))
    print(f"search primes={primes} pairs={pairs} alpha_values=9", file=out)
    kp = analysis.brute_force_recover(known, container, args.max_bits)
    header_width = container[6]
    print(serialize_key(kp, header_width), end="", file=out)


_COMMANDS = {
    "keygen": _cmd_keygen,
    "validate": _cmd_validate,
    "encrypt": _cmd_encrypt,
    "decrypt": _cmd_decrypt,
    "bench": _cmd_bench,
    "analyze": _cmd_analyze,
    "crack": _cmd_crack,
}


def run(argv=None, out=None, err=None):
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"mabcvk: UsageError: {exc}", file=err)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)

    try:
        _COMMANDS[args.command](args, out)
    except Exception as exc:
        code = _exit_code(exc)
        if code is None:
            raise
        print(f"mabcvk: {type(exc).__name__}: {exc}", file=err)
        return code
    return EXIT_OK


def _exit_code(exc):
    if isinstance(exc, (DataProblem, KeyNotFoundError)):
        return EXIT_DATA
    if isinstance(exc, (KeyProblem, MABCVKError)):
        return EXIT_KEY
    if isinstance(exc, OSError):
        return EXIT_USAGE
    return None


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
