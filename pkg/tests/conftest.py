import numpy as np
import pytest

from oqmetro.measurement import (
    Povm,
    bloch_povm,
    build_hovm,
    mutually_unbiased_pair,
    sequential_povm,
)


def mub_hovm(lam):
    """Mutually unbiased z/x pair at the given sharpness plus its HOVM."""
    a, b = mutually_unbiased_pair(lam)
    return a, b, build_hovm(a, b, sequential_povm(a, b))


def random_bloch(rng, max_norm=1.0):
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    return v * rng.uniform(0, max_norm)


def random_qubit_povm(rng):
    return bloch_povm(random_bloch(rng))


def random_conjunction(rng, outcomes=4, dim=2):
    """Random valid POVM: random PSD chunks renormalized by S^{-1/2}."""
    chunks = []
    for _ in range(outcomes):
        x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        chunks.append(x @ x.conj().T)
    total = sum(chunks)
    vals, vecs = np.linalg.eigh(total)
    inv_root = (vecs / np.sqrt(vals)) @ vecs.conj().T
    return Povm(tuple(inv_root @ g @ inv_root for g in chunks))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
