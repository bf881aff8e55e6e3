"""The block transform.

A block value ``p`` is replaced by a random divisor ``a`` of ``k2 - p`` lying in
``(p, k1)``, so that ``k2 mod a == p``. The stored block is then

    d = ((a**k3 mod k1) * k2) ** k3 mod k1,   k3 = k1 - 2

which, since ``x**k3`` is the Fermat inverse of ``x`` modulo the prime ``k1``,
equals ``a * k2**-1 mod k1``. Decryption runs the chain backwards to get ``a``
and reads ``p`` off as ``k2 mod a``. After all blocks are substituted the whole
sequence is rotated left by ``round(alpha * n)`` places.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exceptions import (
    CorruptBlockError,
    DomainError,
    EmptyCandidateError,
    InvalidSubstitutionError,
)
from .keys import candidate_values
from .modmath import mod_pow

# numpy fast paths stay in int64 while products of two residues fit
_INT64_SAFE_BITS = 31


@dataclass(frozen=True)
class CandidateSet:
    p: int
    values: tuple

    def __len__(self):
        return len(self.values)

    def __contains__(self, a):
        return a in self.values


@dataclass(frozen=True)
class EncryptionTrace:
    """Intermediate values of one block encryption."""

    p: int
    a: int
    b: int
    c: int
    d: int


def candidates(p, ctx):
    if not 0 <= p < ctx.block_limit:
        raise DomainError(f"block value {p} outside [0, {ctx.block_limit})")
    values = candidate_values(p, ctx.k1, ctx.k2)
    if not values:
        raise EmptyCandidateError(p)
    return CandidateSet(p, values)


def encrypt_trace(p, ctx, a):
    if a not in candidates(p, ctx):
        raise InvalidSubstitutionError(
            f"{a} is not a substitution for block value {p} (k2 mod {a} != {p} or out of range)"
        )
    b = mod_pow(a, ctx.k3, ctx.k1)
    c = b * ctx.k2
    d = mod_pow(c, ctx.k3, ctx.k1)
    return EncryptionTrace(p, a, b, c, d)


def encrypt_block(p, ctx, a):
    return encrypt_trace(p, ctx, a).d


def _draw(rng, size=None):
    return rng.integers(0, 1 << 32, size=size, dtype=np.uint32)


def encrypt_block_random(p, ctx, rng):
    """Encrypt ``p`` with a substitution drawn uniformly from its candidates.

    One 32-bit draw per block, mapped to a candidate index by multiply-shift,
    so a loop over blocks consumes the stream exactly like :func:`encrypt_blocks`.
    """
    cands = candidates(p, ctx).values
    return encrypt_block(p, ctx, cands[(int(_draw(rng)) * len(cands)) >> 32])


def decrypt_block(d, ctx):
    if not 1 <= d < ctx.k1:
        raise CorruptBlockError(f"cipher block {d} outside [1, {ctx.k1})")
    b = mod_pow(d * ctx.k2, ctx.k3, ctx.k1)
    if b == 0:
        raise CorruptBlockError(f"cipher block {d} reduces to zero")
    a = mod_pow(b, ctx.k3, ctx.k1)
    p = ctx.k2 % a
    if p >= ctx.block_limit:
        raise CorruptBlockError(
            f"cipher block {d} decrypts to {p}, outside the {ctx.block_width}-bit range "
            "(wrong key or corrupted data)"
        )
    return p


def rotation_offset(alpha, n):
    """Sequence rotation for ``n`` blocks: ``alpha * n`` rounded half up, mod n."""
    if n < 0:
        raise DomainError("sequence length must be non-negative")
    if n <= 1:
        return 0
    return math.floor(Fraction(alpha) * n + Fraction(1, 2)) % n


def rotate_sequence(blocks, k, direction="left"):
    """Cyclic rotation. ``left``: ``out[i] = blocks[(i + k) % n]``; ``right`` undoes it."""
    if direction not in ("left", "right"):
        raise ValueError(f"direction must be 'left' or 'right', got {direction!r}")
    n = len(blocks)
    if n == 0:
        return blocks[:0]
    k %= n
    shift = -k if direction == "left" else k
    if isinstance(blocks, np.ndarray):
        return np.roll(blocks, shift)
    return blocks[-shift:] + blocks[:-shift] if shift else blocks[:]


# --- whole-sequence paths --------------------------------------------------

# widths up to this index the substitution table directly by block value
_DIRECT_TABLE_BITS = 16


@lru_cache(maxsize=1 << 16)
def _encrypted_row(p, k1, k2):
    """Every obtainable cipher block for ``p``, through the full step chain."""
    k3 = k1 - 2
    return tuple(mod_pow(mod_pow(a, k3, k1) * k2, k3, k1) for a in candidate_values(p, k1, k2))


@lru_cache(maxsize=64)
def _substitution_table(keys, k1, k2):
    """Padded rows of encrypted candidates for the block values in ``keys``.

    Returns ``(counts, offsets, flat)``: candidate count and start of each row
    in the flattened table. Cached, since a stream usually hits the same keys.
    """
    rows = []
    for p in keys:
        row = _encrypted_row(p, k1, k2)
        if not row:
            raise EmptyCandidateError(p)
        rows.append(row)
    counts = np.array([len(r) for r in rows], dtype=np.uint64)
    width = int(counts.max()) if rows else 0
    if k1 <= 1 << 32:
        dtype = np.uint32
    elif k1.bit_length() <= 62:
        dtype = np.int64
    else:
        dtype = object
    table = np.zeros((len(rows), width), dtype=dtype)
    for i, row in enumerate(rows):
        table[i, : len(row)] = row
    offsets = np.arange(len(rows), dtype=np.uint64) * np.uint64(width)
    for arr in (counts, offsets, table):
        arr.flags.writeable = False
    return counts, offsets, table.ravel()


def encrypt_blocks(values, ctx, rng):
    """Encrypt an array of block values (no rotation).

    The result is ``uint32`` when ``k1 <= 2**32``, else ``int64`` or objects.

    Block ``i`` uses the ``i``-th 32-bit draw from ``rng`` to choose its
    substitution, so output depends only on the seed and position.
    """
    values = np.asarray(values, dtype=np.int64)
    if values.size == 0:
        return np.zeros(0, dtype=np.int64)
    if values.min() < 0 or values.max() >= ctx.block_limit:
        raise DomainError(f"block values must lie in [0, {ctx.block_limit})")
    if ctx.block_width <= _DIRECT_TABLE_BITS:
        present = np.flatnonzero(np.bincount(values, minlength=ctx.block_limit))
        row_of = np.zeros(ctx.block_limit, dtype=np.intp)
        row_of[present] = np.arange(present.size)
        rows = row_of[values]
    else:
        present, rows = np.unique(values, return_inverse=True)
    try:
        counts, offsets, flat = _substitution_table(tuple(present.tolist()), ctx.k1, ctx.k2)
    except EmptyCandidateError:
        # report the first offender in stream order
        for p in values:
            if not candidate_values(int(p), ctx.k1, ctx.k2):
                raise EmptyCandidateError(int(p)) from None
        raise
    idx = _draw(rng, values.size).astype(np.uint64)
    idx *= counts[rows]
    idx >>= np.uint64(32)
    idx += offsets[rows]
    return flat[idx]


def decrypt_blocks(blocks, ctx):
    """Inverse of :func:`encrypt_blocks`, via ``a = d * k2 mod k1``."""
    k1, k2 = ctx.k1, ctx.k2
    if ctx.k1.bit_length() > _INT64_SAFE_BITS or k2.bit_length() > 62:
        return np.array([decrypt_block(int(d), ctx) for d in blocks], dtype=object)
    d = np.asarray(blocks, dtype=np.int64)
    if d.size == 0:
        return d
    bad = (d < 1) | (d >= k1)
    if bad.any():
        raise CorruptBlockError(f"cipher block {int(d[bad][0])} outside [1, {k1})")
    a = d * (k2 % k1) % k1
    p = k2 % a
    over = p >= ctx.block_limit
    if over.any():
        i = int(np.flatnonzero(over)[0])
        raise CorruptBlockError(
            f"cipher block {int(d[i])} decrypts to {int(p[i])}, outside the "
            f"{ctx.block_width}-bit range (wrong key or corrupted data)"
        )
    return p
