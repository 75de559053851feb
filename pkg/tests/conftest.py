from pathlib import Path

import numpy as np
import pytest

from reductive.cli.settings import Settings
from reductive.moments import Dataset

ROOT = Path(__file__).resolve().parents[1]
DATA_DIR = ROOT / Settings().data_dir


def make_dataset(rng, n=200, p=6, gamma=None, sigma=1.0, sigma_y=1.0, sigma_0=None):
    """X_y = Gamma y + noise, noise scale sigma_0 off Gamma when given."""
    g = np.eye(p)[:, 0] if gamma is None else np.asarray(gamma, dtype=float)
    g = g / np.linalg.norm(g)
    y = sigma_y * rng.standard_normal(n)
    noise = sigma * rng.standard_normal((n, p))
    if sigma_0 is not None:
        P = np.outer(g, g)
        noise = noise @ P + sigma_0 * rng.standard_normal((n, p)) @ (np.eye(p) - P)
    X = np.outer(y, g) + noise
    return Dataset(X=X, y=y)


@pytest.fixture
def rng():
    return np.random.default_rng(20080601)


@pytest.fixture
def m7_data(rng):
    """n=200, p=6, Gamma = e_1, sigma = sigma_Y = 1."""
    return make_dataset(rng)


@pytest.fixture
def strong_data(rng):
    """A strong one-dimensional signal along (1, 1, 0, 0, 0) / sqrt(2)."""
    g = np.array([1.0, 1.0, 0.0, 0.0, 0.0])
    return make_dataset(rng, n=400, p=5, gamma=g, sigma=0.5, sigma_y=3.0)


@pytest.fixture
def toy_csv(tmp_path, rng):
    path = tmp_path / "toy.csv"
    y = rng.standard_normal(30)
    a = y + 0.3 * rng.standard_normal(30)
    b = rng.standard_normal(30)
    lines = ["a,b,y"] + [f"{float(ai)!r},{float(bi)!r},{float(yi)!r}" for ai, bi, yi in zip(a, b, y)]
    path.write_text("\n".join(lines) + "\n")
    return path
