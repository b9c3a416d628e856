"""Deterministic derivation of per-purpose RNG seeds from one run seed."""

import hashlib


def derive_seed(base: int, *tags) -> int:
    """Stable 63-bit seed for a (base seed, purpose tags) combination."""
    key = ":".join([str(base), *map(str, tags)]).encode("utf-8")
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "little") >> 1
