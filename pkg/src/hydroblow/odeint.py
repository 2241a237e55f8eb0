"""Adaptive embedded Runge-Kutta 5(4) time integration (Dormand-Prince pair).

One driver serves both the 1D nonlocal solver and the 2D channel solver so
they share step-control behavior exactly.  The driver supports:

- snapshot times hit exactly (the step is clipped, never interpolated),
- an observer called after every accepted step (sampling, diagnostics),
- a terminate predicate (threshold crossings),
- an optional post-accept transform (boundary pinning, split-step viscous
  solves); the caller says whether it invalidates the first-same-as-last
  derivative reuse.

The controller is the standard elementary one: accept when the weighted RMS
error is at most 1, step factor 0.9 err^(-1/5) clamped to [0.2, 5].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

# Dormand-Prince 5(4) tableau
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0)

_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_SAFETY = 0.9
_UNDERFLOW = 1e-14


@dataclass
class IntegrationResult:
    t: float
    y: np.ndarray
    reason: str  # completed | blowup | step_underflow | max_steps
    snapshots: list = field(default_factory=list)  # (t, y copy) pairs
    n_accepted: int = 0
    n_rejected: int = 0


def integrate_rk54(
    f: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: np.ndarray,
    t_end: float,
    rel_tol: float = 1e-9,
    abs_tol: float = 1e-11,
    max_steps: int = 200_000,
    snapshot_times: Optional[Sequence[float]] = None,
    observer: Optional[Callable[[float, np.ndarray], None]] = None,
    terminate: Optional[Callable[[float, np.ndarray], Optional[str]]] = None,
    post_accept: Optional[Callable[[float, np.ndarray, float], np.ndarray]] = None,
    post_invalidates_fsal: bool = False,
    initial_step: float = 1e-3,
) -> IntegrationResult:
    t = float(t0)
    y = np.array(y0, dtype=float, copy=True)
    span = t_end - t
    if span <= 0:
        raise ValueError("t_end must exceed t0")

    pending = sorted(ts for ts in (snapshot_times or ()) if t < ts <= t_end)
    result = IntegrationResult(t=t, y=y, reason="completed")
    if snapshot_times is not None and any(abs(ts - t) < 1e-15 for ts in snapshot_times):
        result.snapshots.append((t, y.copy()))

    f0 = f(t, y)
    if observer is not None:
        observer(t, y)
    h = min(initial_step, span)

    while t < t_end - 1e-14 * max(1.0, abs(t_end)):
        if result.n_accepted + result.n_rejected >= max_steps:
            result.reason = "max_steps"
            break
        h = min(h, t_end - t)
        clipped = False
        if pending and pending[0] - t <= h:
            h = pending[0] - t
            clipped = True

        k = [f0]
        for c, row in zip(_C[1:], _A[1:]):
            yi = y + h * sum(a * ki for a, ki in zip(row, k) if a != 0.0)
            k.append(f(t + c * h, yi))
        y5 = y + h * sum(b * ki for b, ki in zip(_B5[:6], k))
        k.append(f(t + h, y5))
        y4 = y + h * sum(b * ki for b, ki in zip(_B4, k) if b != 0.0)

        scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y5))
        err = float(np.sqrt(np.mean(((y5 - y4) / scale) ** 2)))

        if err <= 1.0:
            t = pending[0] if clipped else t + h
            y = y5
            f0 = k[-1]
            result.n_accepted += 1
            if post_accept is not None:
                y = post_accept(t, y, h)
                if post_invalidates_fsal:
                    f0 = f(t, y)
            if clipped:
                pending.pop(0)
                result.snapshots.append((t, y.copy()))
            if observer is not None:
                observer(t, y)
            if terminate is not None:
                reason = terminate(t, y)
                if reason:
                    result.reason = reason
                    break
        else:
            result.n_rejected += 1

        factor = _SAFETY * max(err, 1e-12) ** -0.2
        h *= min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
        if h < _UNDERFLOW * max(1.0, abs(t)):
            result.reason = "step_underflow"
            break

    result.t = t
    result.y = y
    return result
