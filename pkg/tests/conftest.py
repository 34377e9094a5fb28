import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from coverml.datasets import SynthSpec, derive_label, generate_synthetic, generate_xor


@pytest.fixture(scope="session")
def benefits_small():
    """2,000-row labeled benefits-like table (seed 7)."""
    return derive_label(generate_synthetic(SynthSpec(row_count=2000, seed=7)))


@pytest.fixture(scope="session")
def benefits_10k():
    """10,000-row labeled benefits-like table (seed 1), the skew fixture."""
    return derive_label(generate_synthetic(SynthSpec(row_count=10000, seed=1)))


@pytest.fixture(scope="session")
def xor_table():
    """4,000-row interaction fixture (seed 2)."""
    return derive_label(generate_xor(4000, seed=2))
