"""Finite-difference verification of the hand-written backward passes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .numerics import Param


@dataclass
class GradCheckFailure:
    param: str
    index: tuple[int, ...]
    analytic: float
    numeric: float
    rel_err: float


@dataclass
class GradCheckReport:
    max_rel_err: float = 0.0
    n_checked: int = 0
    per_param: dict[str, float] = field(default_factory=dict)
    failures: list[GradCheckFailure] = field(default_factory=list)

    def passed(self, tol: float) -> bool:
        return self.max_rel_err < tol


def grad_check(
    loss_fn: Callable[[], float],
    params: list[Param],
    step: float = 1e-3,
    tol: float = 1e-4,
    max_failures: int = 20,
) -> GradCheckReport:
    """Compare each Param's current ``grad`` against central differences.

    The caller runs its backward pass first so that ``param.grad`` holds the
    analytic gradient; ``loss_fn`` must then re-evaluate the same scalar loss
    from ``param.value`` without touching any gradient. Relative error is
    |a - n| / max(|a|, |n|, 1e-8). Entries exceeding ``tol`` are recorded
    (up to ``max_failures``); the report never raises.
    """
    report = GradCheckReport()
    for p in params:
        analytic = p.grad.copy()
        flat_v = p.value.reshape(-1)
        flat_a = analytic.reshape(-1)
        worst = 0.0
        for i in range(flat_v.size):
            orig = flat_v[i]
            flat_v[i] = orig + step
            f_plus = loss_fn()
            flat_v[i] = orig - step
            f_minus = loss_fn()
            flat_v[i] = orig
            numeric = (f_plus - f_minus) / (2.0 * step)
            a = flat_a[i]
            rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
            worst = max(worst, rel)
            report.n_checked += 1
            if rel >= tol and len(report.failures) < max_failures:
                idx = np.unravel_index(i, p.value.shape)
                report.failures.append(
                    GradCheckFailure(p.name, tuple(int(k) for k in idx), float(a),
                                     float(numeric), float(rel))
                )
        report.per_param[p.name] = worst
        report.max_rel_err = max(report.max_rel_err, worst)
    return report
