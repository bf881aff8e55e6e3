"""Input checks shared by the estimator and the command line."""

import numbers

import numpy as np


def check_rng(random_state):
    """Turn ``None``, an int seed or a Generator into a ``numpy.random.Generator``."""
    if random_state is None or isinstance(random_state, (numbers.Integral, np.random.SeedSequence)):
        return np.random.default_rng(random_state)
    if isinstance(random_state, np.random.Generator):
        return random_state
    raise TypeError(f"cannot build a Generator from {random_state!r}")


def check_bytes(X):
    """Accept one bytes-like object or a sequence of them.

    Returns ``(list_of_bytes, single)`` where ``single`` records whether the
    input was a lone object, so callers can unwrap the result.
    """
    if isinstance(X, (bytes, bytearray, memoryview)):
        return [bytes(X)], True
    if isinstance(X, str):
        raise TypeError("expected bytes, got str; encode it first")
    try:
        items = list(X)
    except TypeError:
        raise TypeError(f"expected bytes or a sequence of bytes, got {type(X).__name__}") from None
    for item in items:
        if not isinstance(item, (bytes, bytearray, memoryview)):
            raise TypeError(f"expected bytes items, got {type(item).__name__}")
    return [bytes(item) for item in items], False


def check_block_width(width):
    if not isinstance(width, numbers.Integral) or not 1 <= width <= 32:
        raise ValueError(f"block width must be an integer in [1, 32], got {width!r}")
    return int(width)
