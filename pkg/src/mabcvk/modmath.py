"""Exact integer number theory used by the cipher and its analysis tools."""

import math

import numpy as np

from .exceptions import (
    CapacityError,
    DomainError,
    GenerationError,
    InvalidModulusError,
    NoInverseError,
)

#: Largest modulus/exponent accepted by the exact routines (64-bit keys).
EXACT_BITS = 64
EXACT_BOUND = 1 << EXACT_BITS
#: Bases may be full products of two exact-width values.
PRODUCT_BOUND = 1 << (2 * EXACT_BITS)
#: Trial division is only attempted below this.
FACTOR_BOUND = 1 << 40

# Deterministic Miller-Rabin witnesses; sufficient for every n < 3.3e24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_SMALL_PRIMES = _MR_WITNESSES


def mod_pow(base, exponent, modulus):
    """Return ``base ** exponent % modulus`` by left-to-right square and multiply."""
    if modulus < 2:
        raise InvalidModulusError(f"modulus must be >= 2, got {modulus}")
    if modulus >= EXACT_BOUND:
        raise CapacityError(modulus, EXACT_BOUND, "modulus")
    if exponent >= EXACT_BOUND:
        raise CapacityError(exponent, EXACT_BOUND, "exponent")
    if base < 0 or exponent < 0:
        raise DomainError("mod_pow takes non-negative integers")
    if base >= PRODUCT_BOUND:
        raise CapacityError(base, PRODUCT_BOUND, "base")

    base %= modulus
    result = 1
    for bit in bin(exponent)[2:]:
        result = result * result % modulus
        if bit == "1":
            result = result * base % modulus
    return result


def mod_inverse_fermat(a, p):
    """Inverse of ``a`` modulo the prime ``p``, as ``a ** (p - 2) mod p``."""
    assert is_prime(p), f"{p} is not prime"
    if a % p == 0:
        raise NoInverseError(f"{a} has no inverse modulo {p}")
    return mod_pow(a, p - 2, p)


def _miller_rabin(n, witnesses):
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in witnesses:
        a %= n
        if a in (0, 1, n - 1):
            continue
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def is_prime(n, rounds=32, rng=None):
    """Primality test.

    Exact for ``n < 2**64`` (fixed witness set). Larger inputs get ``rounds``
    extra random witnesses on top of the fixed ones.
    """
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    if n < EXACT_BOUND:
        return _miller_rabin(n, _MR_WITNESSES)
    rng = np.random.default_rng() if rng is None else rng
    extra = [random_below(n - 3, rng) + 2 for _ in range(rounds)]
    return _miller_rabin(n, _MR_WITNESSES + tuple(extra))


def factorize(n, bound=FACTOR_BOUND):
    """Prime factorization by trial division, as a ``{prime: exponent}`` dict."""
    if n < 1:
        raise DomainError(f"cannot factor {n}")
    if n >= bound:
        raise CapacityError(n, bound, "factorization input")
    factors = {}
    for p in (2, 3):
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
    # 6k +/- 1 wheel
    f, step = 5, 2
    while f * f <= n:
        while n % f == 0:
            factors[f] = factors.get(f, 0) + 1
            n //= f
        f += step
        step = 6 - step
    if n > 1:
        factors[n] = factors.get(n, 0) + 1
    return factors


def divisors(n, bound=FACTOR_BOUND):
    """All divisors of ``n``, ascending."""
    divs = [1]
    for p, e in factorize(n, bound).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def random_below(n, rng):
    """Uniform integer in ``[0, n)`` for arbitrarily large ``n``."""
    if n <= 0:
        raise DomainError("upper bound must be positive")
    nbits = n.bit_length()
    nbytes = (nbits + 7) // 8
    while True:
        x = int.from_bytes(rng.bytes(nbytes), "big") >> (8 * nbytes - nbits)
        if x < n:
            return x


def random_prime(bits, rng, max_attempts=10_000):
    """Random prime with exactly ``bits`` significant bits."""
    if not 3 <= bits <= EXACT_BITS:
        raise DomainError(f"bits must be in [3, {EXACT_BITS}], got {bits}")
    lo = 1 << (bits - 1)
    for attempt in range(max_attempts):
        candidate = (lo + random_below(lo, rng)) | 1
        if is_prime(candidate):
            return candidate
    raise GenerationError(f"no {bits}-bit prime found", max_attempts)


def prime_sieve(limit):
    """All primes below ``limit`` as a sorted list."""
    if limit < 3:
        return []
    sieve = np.ones(limit, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(limit - 1) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return np.flatnonzero(sieve).tolist()


def prime_count_estimate(n):
    """``n / ln n``; undercounts the true prime-counting function."""
    if n < 2:
        raise DomainError(f"estimate needs n >= 2, got {n}")
    # math.log accepts big ints directly, so 2**128 stays exact going in
    return n / math.log(n)
