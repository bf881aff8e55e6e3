"""Encrypted file format.

Layout (all integers little-endian)::

    offset  size  field
    0       5     magic  b"MABC1"
    5       1     format (0 = wide-32, 1 = packed)
    6       1     block width w
    7       8     payload block count N
    15      8     original plaintext length in bits
    23      ...   payload

Wide-32 payloads hold one uint32 per block. Packed payloads hold
``ceil(log2 k1)`` bits per block, MSB first, zero padded to a whole byte.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .cipher import decrypt_blocks, encrypt_blocks, rotate_sequence, rotation_offset
from .exceptions import (
    BadFormatError,
    BadMagicError,
    ContainerError,
    CorruptBlockError,
    DomainError,
    TruncatedPayloadError,
)

MAGIC = b"MABC1"
HEADER = struct.Struct("<5sBBQQ")
HEADER_SIZE = HEADER.size  # 23

WIDE32 = 0
PACKED = 1
FORMATS = {"wide32": WIDE32, "packed": PACKED}


def format_code(fmt):
    if isinstance(fmt, str):
        try:
            return FORMATS[fmt]
        except KeyError:
            raise BadFormatError(f"unknown format {fmt!r}; choose from {sorted(FORMATS)}") from None
    if fmt not in (WIDE32, PACKED):
        raise BadFormatError(f"unknown format code {fmt}")
    return fmt


@dataclass(frozen=True)
class ContainerHeader:
    format: int
    block_width: int
    block_count: int
    original_length_bits: int

    def __post_init__(self):
        if self.format not in (WIDE32, PACKED):
            raise BadFormatError(f"unknown format byte {self.format}")
        if not 1 <= self.block_width <= 32:
            raise BadFormatError(f"block width {self.block_width} outside [1, 32]")
        n, w, bits = self.block_count, self.block_width, self.original_length_bits
        # the last block may carry zero padding
        if not (n == 0 and bits == 0 or (n - 1) * w < bits <= n * w):
            raise ContainerError(
                f"length field {bits} bits inconsistent with {n} blocks of {w} bits"
            )
        if bits % 8:
            raise ContainerError(f"length field {bits} is not a whole number of bytes")

    def pack(self):
        return HEADER.pack(
            MAGIC, self.format, self.block_width, self.block_count, self.original_length_bits
        )

    @classmethod
    def unpack(cls, data):
        if len(data) < HEADER_SIZE:
            if not MAGIC.startswith(bytes(data[: len(MAGIC)])):
                raise BadMagicError("not a MABCVK container")
            raise TruncatedPayloadError(
                f"container is {len(data)} bytes, shorter than the {HEADER_SIZE}-byte header"
            )
        magic, fmt, width, count, bits = HEADER.unpack_from(data)
        if magic != MAGIC:
            raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
        return cls(fmt, width, count, bits)


# --- plaintext <-> block values -------------------------------------------

def split_blocks(data, width):
    """Cut a byte string into ``width``-bit values, MSB first; the tail is zero padded."""
    raw = np.frombuffer(bytes(data), dtype=np.uint8)
    if width == 8:
        return raw.astype(np.int64)
    bits = np.unpackbits(raw)
    n = -(-bits.size // width)
    bits = np.concatenate([bits, np.zeros(n * width - bits.size, dtype=np.uint8)])
    weights = 1 << np.arange(width - 1, -1, -1, dtype=np.int64)
    return bits.reshape(n, width).astype(np.int64) @ weights


def join_blocks(values, width, nbits):
    values = np.asarray(values, dtype=np.int64)
    if width == 8:
        return values.astype(np.uint8).tobytes()[: nbits // 8]
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    bits = ((values[:, None] >> shifts) & 1).astype(np.uint8).ravel()
    return np.packbits(bits[:nbits]).tobytes()


# --- payload encodings -----------------------------------------------------

def encode_wide32(blocks):
    if isinstance(blocks, np.ndarray) and blocks.dtype == np.uint32:
        return blocks.astype("<u4", copy=False).tobytes()
    blocks = np.asarray(blocks, dtype=np.int64)
    if blocks.size and (blocks.min() < 0 or blocks.max() >= 1 << 32):
        raise DomainError("wide-32 blocks must lie in [0, 2**32)")
    return blocks.astype("<u4").tobytes()


def decode_wide32(data):
    if len(data) % 4:
        raise TruncatedPayloadError(f"wide-32 payload length {len(data)} not a multiple of 4")
    return np.frombuffer(bytes(data), dtype="<u4").astype(np.int64)


def _check_cipher_blocks(blocks, k1):
    for b in blocks:
        if not 1 <= int(b) < k1:
            raise CorruptBlockError(f"cipher block {int(b)} outside [1, {k1})")


def _to_bit_rows(values, b):
    """``(n, b)`` uint8 matrix of the low ``b`` bits of each value, MSB first."""
    be = np.asarray(values, dtype=np.uint64).astype(">u8")
    return np.unpackbits(be.view(np.uint8).reshape(-1, 8), axis=1)[:, 64 - b :]


def _from_bit_rows(bits, b):
    padded = np.zeros((bits.shape[0], 64), dtype=np.uint8)
    padded[:, 64 - b :] = bits
    return np.packbits(padded, axis=1).view(">u8").ravel().astype(np.int64)


def encode_packed(blocks, ctx):
    """Concatenate blocks at ``ctx.packed_bits`` bits each."""
    b = ctx.packed_bits
    if b <= 62:
        arr = np.asarray(blocks, dtype=np.int64)
        if arr.size and (arr.min() < 1 or arr.max() >= ctx.k1):
            _check_cipher_blocks(arr, ctx.k1)
        return np.packbits(_to_bit_rows(arr, b).ravel()).tobytes()
    blocks = [int(x) for x in blocks]
    _check_cipher_blocks(blocks, ctx.k1)
    total = len(blocks) * b
    acc = 0
    for v in blocks:
        acc = (acc << b) | v
    nbytes = -(-total // 8)
    return (acc << (nbytes * 8 - total)).to_bytes(nbytes, "big") if nbytes else b""


def decode_packed(data, ctx, count):
    b = ctx.packed_bits
    total = count * b
    if len(data) * 8 < total:
        raise TruncatedPayloadError(
            f"packed payload has {len(data) * 8} bits, need {total} for {count} blocks"
        )
    if b <= 62:
        bits = np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8), count=total)
        return _from_bit_rows(bits.reshape(count, b), b)
    acc = int.from_bytes(bytes(data), "big") >> (len(data) * 8 - total)
    mask = (1 << b) - 1
    return np.array([(acc >> (b * (count - 1 - i))) & mask for i in range(count)], dtype=object)


def payload_size(header, ctx=None, packed_bits=None):
    if header.format == WIDE32:
        return 4 * header.block_count
    b = packed_bits if packed_bits is not None else ctx.packed_bits
    return -(-header.block_count * b // 8)


# --- pipelines -------------------------------------------------------------

def encrypt_file(plain, ctx, rng, format="wide32", scatter=False):
    """Encrypt a byte string into container bytes.

    ``scatter=True`` writes each encrypted block straight to its rotated slot
    instead of rotating afterwards; output is identical.
    """
    fmt = format_code(format)
    if fmt == WIDE32 and ctx.k1 > 1 << 32:
        raise BadFormatError("wide-32 format needs k1 <= 2**32; use the packed format")
    values = split_blocks(plain, ctx.block_width)
    n = values.size
    encrypted = encrypt_blocks(values, ctx, rng)
    k = rotation_offset(ctx.alpha, n)
    if scatter:
        payload_blocks = np.empty_like(encrypted)
        payload_blocks[(np.arange(n) - k) % max(n, 1)] = encrypted
    else:
        payload_blocks = rotate_sequence(encrypted, k, "left")
    header = ContainerHeader(fmt, ctx.block_width, n, 8 * len(plain))
    body = encode_wide32(payload_blocks) if fmt == WIDE32 else encode_packed(payload_blocks, ctx)
    return header.pack() + body


def read_payload(data, ctx):
    """Parse container bytes into ``(header, cipher blocks in stored order)``."""
    header = ContainerHeader.unpack(data)
    if header.block_width != ctx.block_width:
        raise ContainerError(
            f"container block width {header.block_width} does not match key width {ctx.block_width}"
        )
    body = memoryview(data)[HEADER_SIZE:]
    expected = payload_size(header, ctx)
    if len(body) < expected:
        raise TruncatedPayloadError(f"payload is {len(body)} bytes, expected {expected}")
    if len(body) > expected:
        raise ContainerError(f"{len(body) - expected} trailing bytes after payload")
    if header.format == WIDE32:
        blocks = decode_wide32(body)
    else:
        blocks = decode_packed(body, ctx, header.block_count)
    return header, blocks


def decrypt_file(data, ctx):
    header, blocks = read_payload(data, ctx)
    k = rotation_offset(ctx.alpha, header.block_count)
    values = decrypt_blocks(rotate_sequence(blocks, k, "right"), ctx)
    return join_blocks(values, header.block_width, header.original_length_bits)
