"""NARMA-10 benchmark data."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from ringrc.errors import ConfigError, Diverged, OutOfRange

DIVERGENCE_LIMIT = 1e3
ORDER = 10


@dataclass(frozen=True)
class TaskDataset:
    u: np.ndarray
    y: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        if len(self.u) != len(self.y):
            raise ConfigError("u and y must have equal length")

    def __len__(self) -> int:
        return len(self.u)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "u", "y"])
            for k, (u, y) in enumerate(zip(self.u, self.y)):
                w.writerow([k, repr(float(u)), repr(float(y))])


def narma10_response(u: np.ndarray) -> np.ndarray:
    """
    Run the NARMA-10 recurrence on a given input sequence.

    y(k+1) = 0.3·y(k) + 0.05·y(k)·Σ_{i=0..9} y(k-i) + 1.5·u(k)·u(k-9) + 0.1,
    with y(0..9) = 0.
    """
    u = np.asarray(u, dtype=float)
    n = len(u)
    y = np.zeros(n)
    # Plain loop: the recurrence is sequential and short.
    for k in range(ORDER - 1, n - 1):
        yk = y[k]
        y[k + 1] = 0.3 * yk + 0.05 * yk * y[k - ORDER + 1 : k + 1].sum() + 1.5 * u[k] * u[k - ORDER + 1] + 0.1
        if not abs(y[k + 1]) <= DIVERGENCE_LIMIT:
            raise Diverged(f"NARMA-10 output exceeded {DIVERGENCE_LIMIT:g} at k={k + 1}")
    return y


def narma10(seed: int, length: int) -> TaskDataset:
    """Draw u ~ U[0, 0.5] i.i.d. from ``seed`` and compute the NARMA-10 target."""
    if length <= ORDER:
        raise ConfigError(f"length must exceed {ORDER}, got {length}")
    rng = np.random.default_rng(seed)
    u = rng.uniform(0.0, 0.5, size=length)
    return TaskDataset(u=u, y=narma10_response(u), seed=seed)


class Split(NamedTuple):
    warmup: slice
    train: slice
    test: slice


def split(dataset: TaskDataset | int, warmup: int, train: int, test: int) -> Split:
    """Contiguous warmup -> train -> test index ranges over the first symbols."""
    length = dataset if isinstance(dataset, int) else len(dataset)
    if min(warmup, train, test) < 0:
        raise OutOfRange("split sizes must be non-negative")
    if warmup + train + test > length:
        raise OutOfRange(f"warmup+train+test = {warmup + train + test} exceeds length {length}")
    return Split(slice(0, warmup), slice(warmup, warmup + train), slice(warmup + train, warmup + train + test))
