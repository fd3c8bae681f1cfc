import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from contrastive.data import Dataset  # noqa: E402
from contrastive.nn import NeuralNet, TrainConfig  # noqa: E402
from contrastive.pipeline import fit_model, prepare  # noqa: E402


def random_net(rng, m, hidden=(8, 6), z=3, scale=None):
    """Random dense net; weights ~ N(0, scale), default 1/sqrt(fan_in) per layer."""
    dims = [m, *hidden, z]
    weights = [rng.normal(0, scale or 1 / np.sqrt(a), (a, b))
               for a, b in zip(dims[:-1], dims[1:])]
    biases = [rng.normal(0, 0.3, b) for b in dims[1:]]
    return NeuralNet(dims, weights, biases)


def separable_dataset(n=300, seed=0):
    """Two features in [0, 1]; class 1 iff x0 > 0.5. The second feature is noise."""
    rng = np.random.default_rng(seed)
    X = rng.random((n, 2))
    y = (X[:, 0] > 0.5).astype(int)
    return Dataset(X, y, ["signal", "noise"], ["low", "high"])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def toy_prep():
    """The separable toy set split and prepared, with a trained net."""
    prep = prepare(separable_dataset(), seed=0, name="toy")
    cfg = TrainConfig(hidden_sizes=(8, 8), batch_size=32, learning_rate=0.01,
                      early_stopping_patience=10, max_epochs=300, rng_seed=0)
    return fit_model(prep, cfg), prep


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICTS", {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
