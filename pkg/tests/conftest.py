from __future__ import annotations

import random

import pytest


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0x5EED)


def mutate(rng: random.Random, blob: bytes, n_mutations: int = 4) -> bytes:
    """Randomly corrupt a buffer: byte flips, truncation, or growth."""
    out = bytearray(blob)
    for _ in range(n_mutations):
        choice = rng.random()
        if choice < 0.7 and out:
            out[rng.randrange(len(out))] = rng.randrange(256)
        elif choice < 0.9 and len(out) > 1:
            out = out[: rng.randrange(1, len(out))]
        else:
            out += bytes(rng.randrange(256) for _ in range(rng.randrange(1, 16)))
    return bytes(out)
