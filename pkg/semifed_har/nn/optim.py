"""
Adam optimiser.

``adam_step`` is pure: it returns new parameter arrays and a new state and
never mutates its arguments, so a model handed to a client is never changed
behind the caller's back.
"""

from dataclasses import dataclass, field
from typing import Dict, Mapping, Tuple

import numpy as np

from semifed_har.errors import DimensionError, NumericalError


BETA1 = 0.9
BETA2 = 0.999
EPS = 1e-8


@dataclass
class AdamState:
    """First and second moment estimates, one pair per parameter tensor."""
    step_count: int = 0
    first_moment: Dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: Dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def for_params(cls, params: Mapping[str, np.ndarray]) -> "AdamState":
        return cls(
            step_count=0,
            first_moment={k: np.zeros_like(v) for k, v in params.items()},
            second_moment={k: np.zeros_like(v) for k, v in params.items()},
        )


def adam_step(
    params: Mapping[str, np.ndarray],
    grads: Mapping[str, np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = BETA1,
    beta2: float = BETA2,
    eps: float = EPS,
) -> Tuple[Dict[str, np.ndarray], AdamState]:
    """
    Apply one bias-corrected Adam update.

    Raises:
        NumericalError: If any gradient holds NaN or infinity; the
            diagnostics list the offending parameter names.
        DimensionError: If a gradient's shape differs from its parameter.
    """
    bad = [name for name, g in grads.items() if not np.all(np.isfinite(g))]
    if bad:
        raise NumericalError("non-finite gradient", diagnostics=sorted(bad))

    t = state.step_count + 1
    correction1 = 1.0 - beta1 ** t
    correction2 = 1.0 - beta2 ** t

    new_params: Dict[str, np.ndarray] = {}
    new_m: Dict[str, np.ndarray] = {}
    new_v: Dict[str, np.ndarray] = {}
    for name, theta in params.items():
        g = grads.get(name)
        m = state.first_moment.get(name)
        v = state.second_moment.get(name)
        if m is None:
            m = np.zeros_like(theta)
            v = np.zeros_like(theta)
        if g is None:
            g = np.zeros_like(theta)
        if g.shape != theta.shape:
            raise DimensionError(f"gradient shape mismatch for {name}", g.shape, theta.shape)

        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * (g * g)
        m_hat = m / correction1
        v_hat = v / correction2
        update = lr * m_hat / (np.sqrt(v_hat) + eps)
        new_params[name] = (theta - update).astype(theta.dtype, copy=False)
        new_m[name] = m.astype(theta.dtype, copy=False)
        new_v[name] = v.astype(theta.dtype, copy=False)

    return new_params, AdamState(step_count=t, first_moment=new_m, second_moment=new_v)
