import numpy as np
import pytest

from cablemass.model import PhysicalParams

# Damping scenarios used throughout (fixed parameters l=1, m0=1,
# ml=1.5, k3=1, beta=1 are the dataclass defaults).
EXAMPLE1 = PhysicalParams(gamma=0.1, alphal=0.1, k0=1.0, kl=1.0)
EXAMPLE2_SMALL = PhysicalParams(gamma=0.0, alpha=0.01, alpha0=0.01,
                                alphal=0.01, k0=0.01, kl=0.01)
EXAMPLE3 = PhysicalParams(gamma=0.1, alpha=0.1, k0=1.0, kl=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_stable(rng, n, margin=0.5):
    """Random dense matrix shifted to have spectral abscissa <= -margin."""
    a = rng.standard_normal((n, n))
    shift = np.linalg.eigvals(a).real.max() + margin
    return a - shift * np.eye(n)
