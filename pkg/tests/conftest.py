import math

import numpy as np
import pytest

from mimome import ParallelChannel, ParallelChannelBank


def make_bank(entries, null_dim=0):
    """Build a bank from (kind, b2, e2, omega) tuples, indexed in order."""
    channels = tuple(
        ParallelChannel(i, kind, b2, e2, om)
        for i, (kind, b2, e2, om) in enumerate(entries)
    )
    return ParallelChannelBank(channels, null_dim)


def random_bank(rng, n_shared, n_bob, n_eve=0, null_dim=0):
    """Random bank with all shared channels active (b2 > 1/2)."""
    entries = []
    for _ in range(n_eve):
        entries.append(("eve", 0.0, 1.0, float(rng.uniform(0.3, 3.0))))
    for _ in range(n_shared):
        b2 = float(rng.uniform(0.55, 0.95))
        entries.append(("shared", b2, 1.0 - b2, float(rng.uniform(0.3, 3.0))))
    for _ in range(n_bob):
        entries.append(("bob", 1.0, 0.0, float(rng.uniform(0.3, 3.0))))
    return make_bank(entries, null_dim)


def random_pair_arrays(rng, m_b, m_a, m_e):
    hb = (rng.standard_normal((m_b, m_a))
          + 1j * rng.standard_normal((m_b, m_a))) / math.sqrt(2)
    he = (rng.standard_normal((m_e, m_a))
          + 1j * rng.standard_normal((m_e, m_a))) / math.sqrt(2)
    return hb, he


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
