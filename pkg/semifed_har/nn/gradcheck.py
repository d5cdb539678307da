"""
Finite-difference gradient checking.

Used by the test-suite to verify every recorded operation against central
differences in 64-bit precision.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Mapping

import numpy as np

from semifed_har.nn.tensor import GradTape, Tensor


LossFn = Callable[[Dict[str, Tensor]], Tensor]


@dataclass
class GradCheckReport:
    """Relative errors between analytic and numeric gradients."""
    relative_errors: Dict[str, float]

    @property
    def max_relative_error(self) -> float:
        return max(self.relative_errors.values(), default=0.0)


def numeric_gradients(fn: LossFn, inputs: Mapping[str, np.ndarray], step: float = 1e-3) -> Dict[str, np.ndarray]:
    """Central differences of ``fn`` with respect to every input array."""
    base = {k: np.array(v, dtype=np.float64) for k, v in inputs.items()}
    grads: Dict[str, np.ndarray] = {}
    for name, array in base.items():
        grad = np.zeros_like(array)
        flat = array.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + step
            plus = fn({k: Tensor(v, name=k) for k, v in base.items()}).item()
            flat[i] = original - step
            minus = fn({k: Tensor(v, name=k) for k, v in base.items()}).item()
            flat[i] = original
            grad.reshape(-1)[i] = (plus - minus) / (2.0 * step)
        grads[name] = grad
    return grads


def check_gradients(fn: LossFn, inputs: Mapping[str, np.ndarray], step: float = 1e-3) -> GradCheckReport:
    """
    Compare tape gradients of ``fn`` with central differences.

    The relative error of each input is ||analytic − numeric|| divided by
    the larger of the two norms (floored at 1e-8).
    """
    params = {k: Tensor.param(k, np.array(v, dtype=np.float64)) for k, v in inputs.items()}
    with GradTape() as tape:
        loss = fn(params)
    analytic = tape.backward(loss, params.values())
    numeric = numeric_gradients(fn, inputs, step=step)

    errors: Dict[str, float] = {}
    for name in inputs:
        a = analytic[name]
        n = numeric[name]
        scale = max(np.linalg.norm(a), np.linalg.norm(n), 1e-8)
        errors[name] = float(np.linalg.norm(a - n) / scale)
    return GradCheckReport(relative_errors=errors)
