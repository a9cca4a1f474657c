"""Central finite-difference gradient checks against the tape."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .autodiff import Tape, Tensor, backward


def numeric_gradient(f: Callable[[], Tensor], tensors: Sequence[Tensor], h: float = 1e-5) -> list[np.ndarray]:
    """d f / d t for each tensor by central differences; ``f`` must return a scalar."""
    grads = []
    for t in tensors:
        g = np.zeros_like(t.data)
        flat, gflat = t.data.reshape(-1), g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = float(f().data)
            flat[i] = orig - h
            down = float(f().data)
            flat[i] = orig
            gflat[i] = (up - down) / (2 * h)
        grads.append(g)
    return grads


def analytic_gradient(f: Callable[[], Tensor], tensors: Sequence[Tensor]) -> list[np.ndarray]:
    for t in tensors:
        t.requires_grad = True
        t.grad = None
    with Tape():
        backward(f())
    return [np.zeros_like(t.data) if t.grad is None else t.grad.copy() for t in tensors]


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    """||a - b|| / max(||a||, ||b||, 1e-8)."""
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-8)
    return float(np.linalg.norm(a - b) / scale)


def max_relative_error(f: Callable[[], Tensor], tensors: Sequence[Tensor], h: float = 1e-5) -> float:
    analytic = analytic_gradient(f, tensors)
    numeric = numeric_gradient(f, tensors, h)
    return max(relative_error(a, n) for a, n in zip(analytic, numeric))


def sampled_relative_error(f: Callable[[], Tensor], tensors: Sequence[Tensor], n_coords: int,
                           rng: np.random.Generator, h: float = 1e-5) -> float:
    """Relative error over ``n_coords`` randomly chosen parameter entries.

    Full models have too many entries to difference one by one; the analytic
    gradient is still computed in full and compared on the sampled subset.
    """
    analytic = analytic_gradient(f, tensors)
    sizes = np.array([t.data.size for t in tensors])
    flat_idx = rng.choice(sizes.sum(), size=min(n_coords, int(sizes.sum())), replace=False)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    a_vals, n_vals = [], []
    for k in np.sort(flat_idx):
        which = int(np.searchsorted(offsets, k, side="right") - 1)
        t, i = tensors[which], int(k - offsets[which])
        flat = t.data.reshape(-1)
        orig = flat[i]
        flat[i] = orig + h
        up = float(f().data)
        flat[i] = orig - h
        down = float(f().data)
        flat[i] = orig
        n_vals.append((up - down) / (2 * h))
        a_vals.append(analytic[which].reshape(-1)[i])
    return relative_error(np.array(a_vals), np.array(n_vals))
