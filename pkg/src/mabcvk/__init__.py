"""Modular-arithmetic block cipher with randomized divisor substitution."""

from .cipher import (
    candidates,
    decrypt_block,
    encrypt_block,
    encrypt_block_random,
    rotate_sequence,
    rotation_offset,
)
from .container import ContainerHeader, decrypt_file, encrypt_file
from .estimator import MABCVKCipher
from .keys import (
    CipherContext,
    KeyPair,
    generate_keypair,
    make_context,
    parse_key,
    serialize_key,
    validate_keypair,
)

__all__ = [
    "CipherContext",
    "ContainerHeader",
    "KeyPair",
    "MABCVKCipher",
    "candidates",
    "decrypt_block",
    "decrypt_file",
    "encrypt_block",
    "encrypt_block_random",
    "encrypt_file",
    "generate_keypair",
    "make_context",
    "parse_key",
    "rotate_sequence",
    "rotation_offset",
    "serialize_key",
    "validate_keypair",
]

__version__ = "0.1.0"
