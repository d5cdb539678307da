"""
Tensor values and the gradient tape.

A ``Tensor`` is a thin, shape-carrying wrapper around a numpy array. Forward
operations executed while a ``GradTape`` is active are recorded on it; calling
``GradTape.backward`` replays them in reverse to obtain exact reverse-mode
gradients. Outside a tape, operations run without any bookkeeping, which is
what inference paths use.
"""

import contextvars
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from semifed_har.errors import DimensionError


logger = logging.getLogger(__name__)

_active_tape: contextvars.ContextVar[Optional["GradTape"]] = contextvars.ContextVar(
    "semifed_active_tape", default=None
)


class Tensor:
    """
    Dense numeric array with an optional parameter name.

    Floating arrays keep their dtype (float32 for training, float64 for
    gradient checking); anything else is converted to float32.
    """

    __slots__ = ("data", "name", "requires_grad")

    def __init__(self, data, name: Optional[str] = None, requires_grad: bool = False):
        array = np.asarray(data)
        if array.dtype not in (np.float32, np.float64):
            array = array.astype(np.float32)
        self.data: np.ndarray = array
        self.name = name
        self.requires_grad = requires_grad

    @classmethod
    def param(cls, name: str, data) -> "Tensor":
        """Create a named tensor that gradients are tracked for."""
        return cls(data, name=name, requires_grad=True)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def size(self) -> int:
        return int(self.data.size)

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype}{label})"


def as_tensor(value) -> Tensor:
    """Wrap ``value`` in a Tensor unless it already is one."""
    return value if isinstance(value, Tensor) else Tensor(value)


BackwardFn = Callable[[List[np.ndarray]], Sequence[Optional[np.ndarray]]]


@dataclass
class TapeOp:
    """One recorded forward operation."""
    name: str
    inputs: Tuple[Tensor, ...]
    outputs: Tuple[Tensor, ...]
    backward: BackwardFn


@dataclass
class Gradients:
    """Result of a backward pass."""
    by_name: Dict[str, np.ndarray]
    disconnected: List[str] = field(default_factory=list)
    ops_visited: int = 0

    def __getitem__(self, name: str) -> np.ndarray:
        return self.by_name[name]

    def __contains__(self, name: str) -> bool:
        return name in self.by_name


class GradTape:
    """
    Records forward operations for reverse-mode differentiation.

    Use as a context manager; operations executed inside the ``with`` block
    are appended in execution order, which is a topological order of the
    computation graph.
    """

    def __init__(self):
        self._ops: List[TapeOp] = []
        self._token: Optional[contextvars.Token] = None

    def __enter__(self) -> "GradTape":
        self._token = _active_tape.set(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if self._token is not None:
            _active_tape.reset(self._token)
            self._token = None

    @property
    def ops(self) -> List[TapeOp]:
        return list(self._ops)

    def record(self, op: TapeOp) -> None:
        self._ops.append(op)

    def backward(self, loss: Tensor, params: Iterable[Tensor]) -> Gradients:
        """
        Compute d(loss)/d(param) for every parameter tensor.

        Parameters the loss does not depend on receive a zero gradient and
        are listed in ``Gradients.disconnected``.

        Raises:
            DimensionError: If ``loss`` is not a scalar.
        """
        if loss.data.size != 1:
            raise DimensionError("backward requires a scalar loss", loss.shape, ())

        grads: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        visited = 0
        for op in reversed(self._ops):
            visited += 1
            out_grads = [grads.get(id(out)) for out in op.outputs]
            if all(g is None for g in out_grads):
                continue
            filled = [
                g if g is not None else np.zeros_like(out.data)
                for g, out in zip(out_grads, op.outputs)
            ]
            in_grads = op.backward(filled)
            for tensor, grad in zip(op.inputs, in_grads):
                if grad is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                if key in grads:
                    grads[key] = grads[key] + grad
                else:
                    grads[key] = grad

        by_name: Dict[str, np.ndarray] = {}
        disconnected: List[str] = []
        for index, param in enumerate(params):
            name = param.name or f"param{index}"
            grad = grads.get(id(param))
            if grad is None:
                disconnected.append(name)
                grad = np.zeros_like(param.data)
            by_name[name] = grad.astype(param.data.dtype, copy=False)

        if disconnected:
            logger.debug(f"Parameters disconnected from loss: {disconnected}")
        return Gradients(by_name=by_name, disconnected=disconnected, ops_visited=visited)


def active_tape() -> Optional[GradTape]:
    """Return the tape currently recording, if any."""
    return _active_tape.get()


def record(
    name: str,
    inputs: Sequence[Tensor],
    outputs: Sequence[Tensor],
    backward: BackwardFn,
) -> None:
    """
    Register a forward operation on the active tape.

    Outputs inherit ``requires_grad`` from their inputs; nothing is recorded
    when no tape is active or no input needs a gradient.
    """
    tape = _active_tape.get()
    if tape is None:
        return
    if not any(t.requires_grad for t in inputs):
        return
    for out in outputs:
        out.requires_grad = True
    tape.record(TapeOp(name=name, inputs=tuple(inputs), outputs=tuple(outputs), backward=backward))


def backward(tape: GradTape, loss: Tensor, params: Iterable[Tensor]) -> Gradients:
    """Functional alias for ``tape.backward``."""
    return tape.backward(loss, params)
