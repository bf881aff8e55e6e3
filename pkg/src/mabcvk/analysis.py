"""Keyspace arithmetic, randomization measurement, timing benchmark and a
toy-scale known-plaintext key search."""

import gc
import logging
import math
import time
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .cipher import encrypt_blocks, rotate_sequence, rotation_offset
from .container import (
    HEADER_SIZE,
    ContainerHeader,
    decode_packed,
    decode_wide32,
    decrypt_file,
    encrypt_file,
    split_blocks,
    WIDE32,
)
from .exceptions import ContainerError, DomainError, KeyNotFoundError
from .keys import ALPHA_GRID, KeyPair, candidate_values, make_context
from .modmath import prime_count_estimate, prime_sieve

logger = logging.getLogger(__name__)

JULIAN_YEAR = 31_557_600.0
HOUR = 3600.0
DAY = 86_400.0


# --- brute-force arithmetic ------------------------------------------------

@dataclass(frozen=True)
class KeyspaceRow:
    key_bits: int
    alternative_keys: float
    rate_per_microsecond: float
    avg_crack_time_seconds: float

    @property
    def rendered(self):
        return render_duration(self.avg_crack_time_seconds)


def crack_time(key_bits, rate_per_microsecond=1.0):
    """Average exhaustive-search time in seconds: half the keyspace at the given rate."""
    if key_bits < 1 or rate_per_microsecond <= 0:
        raise DomainError("need key_bits >= 1 and a positive rate")
    return 2.0 ** (key_bits - 1) / rate_per_microsecond * 1e-6


def render_duration(seconds):
    if seconds < 1e-3:
        return f"{seconds * 1e6:.4g} µs"
    if seconds < 60:
        return f"{seconds:.4g} s"
    if seconds < 2 * DAY:
        return f"{seconds / HOUR:.4g} hours"
    years = seconds / JULIAN_YEAR
    if years < 1e6:
        return f"{years:.4g} years"
    return f"{years:.3g} years"


def keyspace_table(key_bits=(56, 128, 168), rates=(1.0, 1e6)):
    return [
        KeyspaceRow(bits, 2.0**bits, rate, crack_time(bits, rate))
        for bits in key_bits
        for rate in rates
    ]


@dataclass(frozen=True)
class PrimeKeyspace:
    key_bits: int
    checks_per_second: float
    prime_count: float
    years: float


def prime_keyspace_report(key_bits, checks_per_second):
    """Primes below ``2**key_bits`` (``n / ln n`` estimate) and the years to test them all."""
    if key_bits < 2:
        raise DomainError("key_bits must be >= 2")
    count = prime_count_estimate(2**key_bits)
    return PrimeKeyspace(key_bits, checks_per_second, count, count / checks_per_second / JULIAN_YEAR)


# --- randomization ---------------------------------------------------------

@dataclass
class RandomizationReport:
    candidate_counts: dict
    distinct_observed: dict
    observed_values: dict = field(repr=False)

    @property
    def coverage(self):
        """Fraction of each value's candidate set that was actually observed."""
        return {p: self.distinct_observed[p] / self.candidate_counts[p] for p in self.candidate_counts}

    @property
    def histogram(self):
        """How many plaintext values produced each number of distinct cipher blocks."""
        return dict(sorted(Counter(self.distinct_observed.values()).items()))

    @property
    def min_coverage(self):
        cov = self.coverage
        return min(cov.values()) if cov else 1.0


def randomization_report(ctx, sample_plaintext, trials, rng):
    values = split_blocks(sample_plaintext, ctx.block_width)
    observed = {int(p): set() for p in np.unique(values)}
    for _ in range(trials):
        # rotation only permutes positions, so compare before it
        encrypted = encrypt_blocks(values, ctx, rng)
        for p in observed:
            observed[p].update(int(d) for d in np.unique(encrypted[values == p]))
    counts = {p: len(candidate_values(p, ctx.k1, ctx.k2)) for p in observed}
    distinct = {p: len(s) for p, s in observed.items()}
    for p in observed:
        assert distinct[p] <= counts[p], f"value {p}: {distinct[p]} > {counts[p]} candidates"
    return RandomizationReport(counts, distinct, {p: sorted(s) for p, s in observed.items()})


# --- timing ----------------------------------------------------------------

@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


@dataclass(frozen=True)
class BenchRow:
    size_kb: int
    encrypt_seconds: float
    decrypt_seconds: float


@dataclass
class BenchResult:
    rows: list
    encrypt_fit: LinearFit | None
    decrypt_fit: LinearFit | None


def linear_fit(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    total = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(residual**2) / total if total > 0 else 1.0
    return LinearFit(float(slope), float(intercept), float(r2))


def _best_of(repeats, fn):
    # collector pauses are noise here, as in timeit
    gc.collect()
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        best = math.inf
        for _ in range(repeats):
            start = time.perf_counter()
            result = fn()
            best = min(best, time.perf_counter() - start)
    finally:
        if was_enabled:
            gc.enable()
    return best, result


def bench(sizes_kb, ctx, rng, format="wide32", repeats=5):
    """Time encryption and decryption of random files; best of ``repeats`` per size."""
    sizes_kb = list(sizes_kb)
    if any(b <= a for a, b in zip(sizes_kb, sizes_kb[1:])):
        raise DomainError("sizes must be strictly increasing")
    rows = []
    for size in sizes_kb:
        plain = rng.bytes(size * 1024)
        seed = int(rng.integers(1 << 32))
        t_enc, enc = _best_of(
            repeats, lambda: encrypt_file(plain, ctx, np.random.default_rng(seed), format)
        )
        t_dec, dec = _best_of(repeats, lambda: decrypt_file(enc, ctx))
        assert dec == plain, "round trip failed during benchmark"
        rows.append(BenchRow(size, t_enc, t_dec))
        logger.debug("bench %d KB: enc %.4fs dec %.4fs", size, t_enc, t_dec)
    if len(rows) < 2:
        return BenchResult(rows, None, None)
    x = [r.size_kb for r in rows]
    return BenchResult(
        rows,
        linear_fit(x, [r.encrypt_seconds for r in rows]),
        linear_fit(x, [r.decrypt_seconds for r in rows]),
    )


# --- known-plaintext search ------------------------------------------------

def search_space_size(max_key_bits, width=None):
    """``C(pi(2**max_key_bits), 2)`` prime pairs; with ``width`` given, only
    primes above ``2**width`` (those the search actually walks) are counted."""
    primes = prime_sieve(1 << max_key_bits)
    if width is not None:
        primes = [p for p in primes if p > 1 << width]
    return math.comb(len(primes), 2)


def brute_force_recover(known_plain, container, max_key_bits, width=None):
    """Exhaustive search over prime pairs below ``2**max_key_bits`` and the
    alpha grid for a key that decrypts ``container`` to ``known_plain``.

    Pairs are walked in ascending ``(k1, k2, alpha)`` order and the first
    match is returned, after a full :func:`decrypt_file` check.
    """
    if max_key_bits > 20:
        raise DomainError("brute force is limited to keys of at most 20 bits")
    header = ContainerHeader.unpack(container)
    w = header.block_width if width is None else width
    if w != header.block_width:
        raise ContainerError(f"container block width is {header.block_width}, not {w}")
    if 8 * len(known_plain) != header.original_length_bits:
        raise KeyNotFoundError(0)

    n = header.block_count
    target = split_blocks(known_plain, w)
    body = memoryview(container)[HEADER_SIZE:]
    wide = decode_wide32(body) if header.format == WIDE32 else None

    primes = [p for p in prime_sieve(1 << max_key_bits) if p > 1 << w]
    logger.info(
        "searching %d prime pairs x %d alpha values",
        search_space_size(max_key_bits, w),
        len(ALPHA_GRID),
    )
    # distinct rotations across the alpha grid, smallest alpha first
    offsets = {}
    for alpha in ALPHA_GRID:
        offsets.setdefault(rotation_offset(alpha, n), alpha)
    by_alpha = sorted(offsets.items(), key=lambda kv: kv[1])

    tried = 0
    for i, k1 in enumerate(primes):
        if header.format == WIDE32:
            stored = wide
            if stored.size and stored.max() >= k1:
                tried += len(primes) - i - 1
                continue
        else:
            bits = (k1 - 1).bit_length()
            if len(body) != -(-n * bits // 8):
                tried += len(primes) - i - 1
                continue
        for k2 in primes[i + 1 :]:
            tried += 1
            ctx = make_context(KeyPair(k1, k2, ALPHA_GRID[0]), w)
            if header.format != WIDE32:
                stored = decode_packed(body, ctx, n)
                if stored.size and (stored.min() < 1 or stored.max() >= k1):
                    continue
            a = stored * (k2 % k1) % k1
            if (a == 0).any():
                continue
            p = k2 % a
            for k, alpha in by_alpha:
                if np.array_equal(rotate_sequence(p, k, "right"), target):
                    kp = KeyPair(k1, k2, alpha)
                    if decrypt_file(container, make_context(kp, w)) == known_plain:
                        return kp
    raise KeyNotFoundError(tried * len(ALPHA_GRID))
