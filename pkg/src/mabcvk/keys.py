"""Key material: the (k1, k2, alpha) triple, its derived context, validation
and the on-disk key file."""

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .exceptions import (
    AlphaRangeError,
    BlockWidthError,
    GenerationError,
    KeyOrderError,
    MalformedKeyError,
    NonPrimeKeyError,
)
from .modmath import divisors, is_prime, mod_inverse_fermat, random_prime

ALPHA_MIN = Fraction(1, 10)
ALPHA_MAX = Fraction(9, 10)
ALPHA_GRID = tuple(Fraction(i, 10) for i in range(1, 10))

KEY_MAGIC = "MABCVK-KEY 1"
_KEY_FIELDS = ("k1", "k2", "alpha", "width")


def as_alpha(value):
    """Coerce ``value`` (Fraction, int pair, ``"n/d"`` string or decimal
    string) to an exact rational. Floats are refused."""
    if isinstance(value, float):
        raise TypeError("alpha must be exact; pass a Fraction or a 'num/den' string")
    if isinstance(value, tuple):
        value = Fraction(*value)
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise AlphaRangeError(f"unparseable alpha {value!r}") from exc


def check_alpha(alpha):
    alpha = as_alpha(alpha)
    if not ALPHA_MIN <= alpha <= ALPHA_MAX:
        raise AlphaRangeError(f"alpha {alpha} outside [{ALPHA_MIN}, {ALPHA_MAX}]")
    return alpha


@dataclass(frozen=True)
class KeyPair:
    """Private key. Construction enforces primality, ``k1 < k2`` and the
    alpha range; the width-dependent bound lives in :func:`make_context`."""

    k1: int
    k2: int
    alpha: Fraction = Fraction(1, 10)

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        for name in ("k1", "k2"):
            value = getattr(self, name)
            if not is_prime(value):
                raise NonPrimeKeyError(f"{name}={value} is not prime")
        if not self.k1 < self.k2:
            raise KeyOrderError(f"need k1 < k2, got k1={self.k1}, k2={self.k2}")

    @property
    def alpha_num(self):
        return self.alpha.numerator

    @property
    def alpha_den(self):
        return self.alpha.denominator

    @property
    def key_bits(self):
        """Effective key length: the two key lengths summed."""
        return self.k1.bit_length() + self.k2.bit_length()


@dataclass(frozen=True)
class CipherContext:
    k1: int
    k2: int
    k3: int
    alpha: Fraction
    block_width: int
    k2_inverse: int = field(repr=False)

    @property
    def block_limit(self):
        return 1 << self.block_width

    @property
    def packed_bits(self):
        """Bits per block in the packed container format, ceil(log2 k1)."""
        return (self.k1 - 1).bit_length()

    @property
    def keypair(self):
        return KeyPair(self.k1, self.k2, self.alpha)


def make_context(kp, width):
    if width < 1:
        raise BlockWidthError(f"block width must be positive, got {width}")
    if (1 << width) >= kp.k1:
        raise BlockWidthError(
            f"block width {width} too large for k1={kp.k1} (need 2**{width} < k1)"
        )
    # phi(k1) = k1 - 1 for prime k1
    k3 = (kp.k1 - 1) - 1
    return CipherContext(
        k1=kp.k1,
        k2=kp.k2,
        k3=k3,
        alpha=kp.alpha,
        block_width=width,
        k2_inverse=mod_inverse_fermat(kp.k2 % kp.k1, kp.k1),
    )


@lru_cache(maxsize=1 << 16)
def candidate_values(p, k1, k2):
    """Divisors ``d`` of ``k2 - p`` with ``p < d < k1``, as a tuple."""
    return tuple(d for d in divisors(k2 - p) if p < d < k1)


@dataclass
class ValidationReport:
    valid: bool
    first_failing_block: int | None
    candidate_count_min: int
    candidate_count_histogram: dict = field(default_factory=dict)
    failing_blocks: list = field(default_factory=list)

    def __bool__(self):
        return self.valid


def validate_keypair(kp, width, exhaustive=True):
    """Check that every block value in ``[0, 2**width)`` has a substitution.

    Values are scanned from the top of the range down, since large block values
    have the fewest divisors above them; ``first_failing_block`` is the first
    failure met in that order. ``exhaustive=False`` stops there.
    """
    ctx = make_context(kp, width)
    histogram = Counter()
    failing = []
    for p in range(ctx.block_limit - 1, -1, -1):
        count = len(candidate_values(p, ctx.k1, ctx.k2))
        histogram[count] += 1
        if count == 0:
            failing.append(p)
            if not exhaustive:
                break
    return ValidationReport(
        valid=not failing,
        first_failing_block=failing[0] if failing else None,
        candidate_count_min=min(histogram),
        candidate_count_histogram=dict(sorted(histogram.items())),
        failing_blocks=sorted(failing),
    )


def generate_keypair(bits, alpha, width, rng, max_attempts=1000):
    """Draw random ``bits``-bit prime pairs until one validates at ``width``."""
    alpha = check_alpha(alpha)
    if bits <= width:
        raise BlockWidthError(f"key bits ({bits}) must exceed block width ({width})")
    for _ in range(max_attempts):
        k1 = random_prime(bits, rng)
        k2 = random_prime(bits, rng)
        if k1 == k2:
            continue
        k1, k2 = sorted((k1, k2))
        if (1 << width) >= k1:
            continue
        kp = KeyPair(k1, k2, alpha)
        if validate_keypair(kp, width, exhaustive=False).valid:
            return kp
    raise GenerationError(
        f"no {bits}-bit key pair valid at block width {width}", max_attempts
    )


def serialize_key(kp, width):
    make_context(kp, width)
    return (
        f"{KEY_MAGIC}\n"
        f"k1={kp.k1}\n"
        f"k2={kp.k2}\n"
        f"alpha={kp.alpha_num}/{kp.alpha_den}\n"
        f"width={width}\n"
    )


def _parse_natural(name, text):
    if not text.isascii() or not text.isdigit():
        raise MalformedKeyError(f"{name} must be a decimal integer, got {text!r}")
    return int(text)


def parse_key(text):
    """Parse key file text into ``(KeyPair, width)``."""
    if not text.endswith("\n"):
        raise MalformedKeyError("key file must end with a newline")
    lines = text[:-1].split("\n")
    if not lines or lines[0] != KEY_MAGIC:
        raise MalformedKeyError(f"first line must be {KEY_MAGIC!r}")
    if len(lines) != 1 + len(_KEY_FIELDS):
        raise MalformedKeyError(
            f"expected {len(_KEY_FIELDS)} fields, got {len(lines) - 1} lines"
        )
    values = {}
    for expected, line in zip(_KEY_FIELDS, lines[1:]):
        name, sep, raw = line.partition("=")
        if not sep:
            raise MalformedKeyError(f"malformed line {line!r}")
        if name != expected:
            raise MalformedKeyError(f"expected field {expected!r}, got {name!r}")
        values[name] = raw

    num, sep, den = values["alpha"].partition("/")
    if not sep:
        raise MalformedKeyError(f"alpha must be num/den, got {values['alpha']!r}")
    num = _parse_natural("alpha numerator", num)
    den = _parse_natural("alpha denominator", den)
    if den == 0:
        raise MalformedKeyError("alpha denominator is zero")

    kp = KeyPair(
        _parse_natural("k1", values["k1"]),
        _parse_natural("k2", values["k2"]),
        Fraction(num, den),
    )
    width = _parse_natural("width", values["width"])
    make_context(kp, width)
    return kp, width
