import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("repo", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("repo")

from regdiag import add_noise, make_problem  # noqa: E402
from regdiag.experiments import noise_seed  # noqa: E402

SEVERE = ("geometric", float(np.exp(2.0)))


def noisy_synthetic(n, decay, seed=0, eps=1e-3, beta=1.0, m=None):
    base = make_problem("synthetic", n, m=m, decay=decay, beta=beta, seed=seed)
    return add_noise(base, eps, noise_seed(seed))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
