"""Test systems: the parametric curves and the two approximation benchmarks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Tuple

import numpy as np

from .grid import Dataset
from .rng import Xoshiro256

T_MAX = 10 * np.pi


def sinc(x) -> np.ndarray:
    """``sin(x)/x`` with the removable singularity filled by 1."""
    x = np.asarray(x, dtype=float)
    safe = np.where(x == 0, 1.0, x)
    return np.where(x == 0, 1.0, np.sin(safe) / safe)


def sinc2d(x1, x2) -> np.ndarray:
    return np.sqrt(2 * sinc(x1) ** 2 + 3 * sinc(x2) ** 2)


def parabolic_sine(x1, x2) -> np.ndarray:
    return (np.asarray(x1, dtype=float) - 6 * np.sin(x2)) ** 2


def sin_circle(t) -> Tuple[np.ndarray, np.ndarray]:
    """x1 = sin t, x2 = cos t, y = sin t."""
    t = np.asarray(t, dtype=float)
    return np.column_stack([np.sin(t), np.cos(t)]), np.sin(t)


def sin_plus_cos(t) -> Tuple[np.ndarray, np.ndarray]:
    """x1 = sin t, x2 = cos t, y = sin t + cos t."""
    t = np.asarray(t, dtype=float)
    return np.column_stack([np.sin(t), np.cos(t)]), np.sin(t) + np.cos(t)


def circle(t, radius: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """Single-input data lying on a circle: x = r cos t, y = r sin t."""
    t = np.asarray(t, dtype=float)
    return (radius * np.cos(t)).reshape(-1, 1), radius * np.sin(t)


def zero(x1, x2) -> np.ndarray:
    return np.zeros(np.broadcast(np.asarray(x1), np.asarray(x2)).shape)


@dataclass(frozen=True)
class Generator:
    name: str
    kind: str  # "surface" draws (x1, x2) uniformly, "curve" draws t uniformly
    fn: Callable
    bounds: Tuple[Tuple[float, float], ...]


GENERATORS: Dict[str, Generator] = {
    "sin-circle": Generator("sin-circle", "curve", sin_circle, ((0.0, T_MAX),)),
    "sin-plus-cos": Generator("sin-plus-cos", "curve", sin_plus_cos, ((0.0, T_MAX),)),
    "circle": Generator("circle", "curve", circle, ((0.0, T_MAX),)),
    "sinc2d": Generator("sinc2d", "surface", sinc2d, ((1.0, 10.0), (1.0, 10.0))),
    "parabolic-sine": Generator("parabolic-sine", "surface", parabolic_sine, ((-10.0, 10.0), (0.0, 6.0))),
    "zero": Generator("zero", "surface", zero, ((0.0, 1.0), (0.0, 1.0))),
}


def get_generator(name: str) -> Generator:
    try:
        return GENERATORS[name]
    except KeyError:
        raise ValueError(f"unknown generator {name!r}; choose from {', '.join(GENERATORS)}") from None


def sample(gen: Generator, n: int, rng: Xoshiro256) -> Dataset:
    if n < 1:
        raise ValueError("sample size must be >= 1")
    if gen.kind == "curve":
        (lo, hi), = gen.bounds
        X, y = gen.fn(rng.uniform(lo, hi, n))
        return Dataset(X, y)
    # draw per point (x1, x2, x1, x2, ...) so the stream order is fixed
    u = rng.random(n * len(gen.bounds)).reshape(n, len(gen.bounds))
    lo = np.array([b[0] for b in gen.bounds])
    hi = np.array([b[1] for b in gen.bounds])
    X = lo + (hi - lo) * u
    return Dataset(X, gen.fn(*X.T))


def generate(name: str, n_train: int, n_test: int, seed: int) -> Tuple[Dataset, Dataset]:
    """Training then test samples from one stream seeded with ``seed``."""
    gen = get_generator(name)
    rng = Xoshiro256(seed)
    train = sample(gen, n_train, rng)
    test = sample(gen, n_test, rng)
    return train, test
