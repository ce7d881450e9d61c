"""Parameter registry and recurrent building blocks."""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor

INIT_RANGE = 0.1  # uniform [-0.1, 0.1] for weights and embeddings, zeros for biases


class ParamStore:
    """Named parameter registry; names double as checkpoint keys."""

    def __init__(self, rng: np.random.Generator) -> None:
        self.rng = rng
        self._params: dict[str, Tensor] = {}

    def new(self, name: str, shape: tuple[int, ...], zero: bool = False) -> Tensor:
        if name in self._params:
            raise ValueError(f"duplicate parameter {name!r}")
        data = np.zeros(shape) if zero else self.rng.uniform(-INIT_RANGE, INIT_RANGE, shape)
        t = Tensor(data, requires_grad=True)
        self._params[name] = t
        return t

    def add(self, name: str, tensor: Tensor) -> Tensor:
        if name in self._params:
            raise ValueError(f"duplicate parameter {name!r}")
        self._params[name] = tensor
        return tensor

    def items(self):
        return self._params.items()

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __len__(self) -> int:
        return len(self._params)

    def zero_grads(self) -> None:
        for p in self._params.values():
            p.zero_grad()


def linear(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    """x @ w (+ row-broadcast bias)."""
    out = ad.matmul(x, w)
    if b is not None:
        out = ad.add(out, ad.broadcast_to(b, out.shape))
    return out


class GRUCell:
    """Single gated recurrent unit step over (1, dim) row states."""

    def __init__(self, store: ParamStore, prefix: str, in_dim: int, hidden: int) -> None:
        self.hidden = hidden
        self.w_r = store.new(f"{prefix}.w_r", (in_dim, hidden))
        self.u_r = store.new(f"{prefix}.u_r", (hidden, hidden))
        self.b_r = store.new(f"{prefix}.b_r", (1, hidden), zero=True)
        self.w_z = store.new(f"{prefix}.w_z", (in_dim, hidden))
        self.u_z = store.new(f"{prefix}.u_z", (hidden, hidden))
        self.b_z = store.new(f"{prefix}.b_z", (1, hidden), zero=True)
        self.w_n = store.new(f"{prefix}.w_n", (in_dim, hidden))
        self.u_n = store.new(f"{prefix}.u_n", (hidden, hidden))
        self.b_n = store.new(f"{prefix}.b_n", (1, hidden), zero=True)

    def step(self, x: Tensor, h: Tensor) -> Tensor:
        r = ad.sigmoid(ad.add(ad.add(ad.matmul(x, self.w_r), ad.matmul(h, self.u_r)), self.b_r))
        z = ad.sigmoid(ad.add(ad.add(ad.matmul(x, self.w_z), ad.matmul(h, self.u_z)), self.b_z))
        n = ad.tanh(ad.add(ad.add(ad.matmul(x, self.w_n),
                                  ad.mul(r, ad.matmul(h, self.u_n))), self.b_n))
        return ad.add(ad.mul(ad.sub(1.0, z), n), ad.mul(z, h))

    def run(self, inputs: list[Tensor], h0: Tensor | None = None) -> list[Tensor]:
        """Scan over a sequence of (1, in_dim) rows; returns all hidden rows."""
        h = h0 if h0 is not None else ad.zeros((1, self.hidden))
        outs = []
        for x in inputs:
            h = self.step(x, h)
            outs.append(h)
        return outs


def sinusoid_positions(length: int, dim: int) -> np.ndarray:
    """Fixed sinusoidal position encodings, (length, dim)."""
    pos = np.arange(length)[:, None].astype(np.float64)
    i = np.arange(dim)[None, :].astype(np.float64)
    angle = pos / np.power(10000.0, (2.0 * (i // 2)) / dim)
    enc = np.zeros((length, dim))
    enc[:, 0::2] = np.sin(angle[:, 0::2])
    enc[:, 1::2] = np.cos(angle[:, 1::2])
    return enc
