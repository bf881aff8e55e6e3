"""scikit-learn style front end.

``fit`` settles the key (generating one if none is given) and validates it for
the block width; ``transform`` encrypts byte strings into containers and
``inverse_transform`` reverses it::

    >>> enc = MABCVKCipher(key_bits=14, block_width=4, random_state=0).fit()
    >>> enc.inverse_transform(enc.transform(b"hello"))
    b'hello'
"""

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_block_width, check_bytes, check_rng
from .container import decrypt_file, encrypt_file, format_code
from .exceptions import InvalidKeyError
from .keys import KeyPair, check_alpha, generate_keypair, make_context, validate_keypair


class MABCVKCipher(TransformerMixin, BaseEstimator):
    """Randomized divisor-substitution cipher as a transformer.

    Parameters
    ----------
    k1, k2 : int or None
        Prime key pair. Leave both as None to generate one in ``fit``.
    alpha : str or Fraction
        Rotation fraction in [1/10, 9/10].
    block_width : int
        Plaintext bits per block. A pair is only valid at width ``w`` when
        ``k2`` follows a prime gap of at least ``2**w``, so generated keys
        are practical up to ``w = 5``; for 8-bit blocks pass a known pair.
    key_bits : int or None
        Size of generated primes; defaults to ``max(14, block_width + 8)``.
    format : {"wide32", "packed"}
    max_attempts : int
        Key generation retry budget.
    random_state : None, int or numpy Generator
        Seeds both key generation and substitution choices. With an int,
        every ``transform`` call restarts from that seed.
    """

    def __init__(
        self,
        k1=None,
        k2=None,
        alpha="1/10",
        block_width=4,
        key_bits=None,
        format="wide32",
        max_attempts=1000,
        random_state=None,
    ):
        self.k1 = k1
        self.k2 = k2
        self.alpha = alpha
        self.block_width = block_width
        self.key_bits = key_bits
        self.format = format
        self.max_attempts = max_attempts
        self.random_state = random_state

    def fit(self, X=None, y=None):
        width = check_block_width(self.block_width)
        alpha = check_alpha(self.alpha)
        format_code(self.format)
        if (self.k1 is None) != (self.k2 is None):
            raise ValueError("give both k1 and k2, or neither")
        if self.k1 is None:
            bits = self.key_bits if self.key_bits is not None else max(14, width + 8)
            kp = generate_keypair(bits, alpha, width, check_rng(self.random_state), self.max_attempts)
        else:
            kp = KeyPair(int(self.k1), int(self.k2), alpha)
        self.validation_report_ = validate_keypair(kp, width)
        if not self.validation_report_.valid:
            raise InvalidKeyError(self.validation_report_.first_failing_block, width)
        self.key_ = kp
        self.context_ = make_context(kp, width)
        return self

    def transform(self, X):
        check_is_fitted(self, "context_")
        items, single = check_bytes(X)
        rng = check_rng(self.random_state)
        out = [encrypt_file(item, self.context_, rng, self.format) for item in items]
        return out[0] if single else out

    def inverse_transform(self, X):
        check_is_fitted(self, "context_")
        items, single = check_bytes(X)
        out = [decrypt_file(item, self.context_) for item in items]
        return out[0] if single else out

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.requires_fit = True
        tags.input_tags.two_d_array = False
        tags.input_tags.string = True
        return tags
