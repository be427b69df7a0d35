"""Deterministic 1-D golden-section refinement and worker-count helpers."""
from __future__ import annotations

import os
from typing import Callable

_INV_GOLDEN = 0.6180339887498949  # 1/phi


def golden_min(f: Callable[[float], float], a: float, b: float,
               tol: float, max_iter: int = 200) -> tuple[float, float]:
    """Golden-section minimization of ``f`` on [a, b] to bracket width ``tol``.

    Deterministic: evaluation points depend only on the bracket, so repeated
    runs produce identical results.
    """
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = f(d)
    if fc <= fd:
        return c, fc
    return d, fd


def golden_max(f: Callable[[float], float], a: float, b: float,
               tol: float, max_iter: int = 200) -> tuple[float, float]:
    x, fx = golden_min(lambda v: -f(v), a, b, tol, max_iter)
    return x, -fx


def worker_count() -> int:
    """Worker cap for concurrent sweeps/fits; SPLITRING_THREADS overrides."""
    env = os.environ.get("SPLITRING_THREADS", "").strip()
    if env:
        try:
            n = int(env)
        except ValueError:
            n = 1
        return max(1, n)
    return max(1, os.cpu_count() or 1)
