"""Exact base rings: the integers, the rationals and prime fields."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = ["BaseRing", "Z", "Q", "Zmod"]

_INT64_SAFE = 1 << 62


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


@lru_cache(maxsize=4096)
def _einsum_plan(spec: str, shapes: tuple) -> tuple:
    """Pairwise contraction steps ``(operand positions, subscripts)`` for ``spec``.

    Planning costs more than the contraction for the small operands used here,
    so the plan is computed once per shape signature.
    """
    dummies = [np.empty(s, dtype=np.int64) for s in shapes]
    _, steps = np.einsum_path(spec, *dummies, optimize="greedy", einsum_call=True)
    return tuple((tuple(step[0]), step[2]) for step in steps)


def _run_plan(plan, ops):
    ops = list(ops)
    for inds, sub in plan:
        # positions come sorted in decreasing order, so popping keeps them valid
        picked = [ops.pop(i) for i in inds]
        ops.append(np.einsum(sub, *picked, optimize=False))
    return ops[0]


@dataclass(frozen=True)
class BaseRing:
    kind: str  # "Z", "Q" or "Zmod"
    p: int = 0

    def __post_init__(self):
        if self.kind not in ("Z", "Q", "Zmod"):
            raise ValueError(f"unknown base ring {self.kind!r}")
        if self.kind == "Zmod" and not _is_prime(self.p):
            raise ValueError(f"Zmod needs a prime modulus, got {self.p}")

    @property
    def is_field(self) -> bool:
        return self.kind != "Z"

    @property
    def is_integral(self) -> bool:
        """Entries are Python ints (so int64 fast paths may apply)."""
        return self.kind != "Q"

    def coerce(self, x):
        if self.kind == "Q":
            return Fraction(x)
        if isinstance(x, Fraction):
            if x.denominator != 1:
                if self.kind == "Zmod":
                    return x.numerator * pow(x.denominator, -1, self.p) % self.p
                raise ValueError(f"non-integral value {x} over Z")
            x = x.numerator
        x = int(x)
        return x % self.p if self.kind == "Zmod" else x

    def array(self, data, shape=None) -> np.ndarray:
        src = np.asarray(data) if isinstance(data, np.ndarray) else None
        if src is not None and src.dtype.kind in "ib" and self.kind != "Q":
            # astype(object) on int64 yields Python ints
            arr = src.astype(np.int64).astype(object)
            if shape is not None:
                arr = arr.reshape(shape)
            return arr % self.p if self.kind == "Zmod" else arr
        arr = np.array(data, dtype=object)
        if shape is not None:
            arr = arr.reshape(shape)
        flat = arr.reshape(-1)
        if self.kind != "Q" and set(map(type, flat)) <= {int}:
            return arr % self.p if self.kind == "Zmod" else arr
        for k in range(flat.size):
            flat[k] = self.coerce(flat[k])
        return arr

    def zeros(self, shape) -> np.ndarray:
        z = np.zeros(shape, dtype=np.int64).astype(object)
        if self.kind == "Q":
            z = self.array(z)
        return z

    def identity(self, n: int) -> np.ndarray:
        return self.array(np.eye(n, dtype=np.int64))

    def reduce(self, arr):
        if self.kind == "Zmod":
            return arr % self.p
        return arr

    def inverse(self, x):
        if self.kind == "Q":
            return 1 / Fraction(x)
        if self.kind == "Zmod":
            return pow(int(x) % self.p, -1, self.p)
        if x in (1, -1):
            return x
        raise ZeroDivisionError(f"{x} is not a unit in Z")

    def random_array(self, rng: np.random.Generator, shape, scale: int = 3) -> np.ndarray:
        if self.kind == "Zmod":
            vals = rng.integers(0, self.p, size=shape)
        else:
            vals = rng.integers(-scale, scale + 1, size=shape)
        return self.array(vals)

    # -- exact contractions -------------------------------------------------

    def _int64_ok(self, ops, reduction: int) -> bool:
        if not self.is_integral:
            return False
        bound = reduction
        for o in ops:
            if o.size == 0:
                return True
            bound *= int(np.abs(o).max())
            if bound >= _INT64_SAFE:
                return False
        return True

    def einsum(self, spec: str, *ops) -> np.ndarray:
        """Exact ``np.einsum``; runs in int64 when the result provably fits."""
        if "..." in spec:
            raise ValueError("use explicit indices")
        ops = [np.asarray(o, dtype=object) for o in ops]
        lhs, _, rhs = spec.partition("->")
        sizes = {}
        for term, o in zip(lhs.split(","), ops):
            sizes.update(zip(term, o.shape))
        reduction = 1
        for ch in set(lhs.replace(",", "")) - set(rhs):
            reduction *= sizes[ch]
        if self._int64_ok(ops, reduction):
            plan = _einsum_plan(spec, tuple(o.shape for o in ops))
            res = _run_plan(plan, [o.astype(np.int64) for o in ops])
            return self.reduce(np.asarray(res).astype(object))
        res = np.einsum(spec, *ops, optimize=False)
        return self.reduce(np.asarray(res, dtype=object))

    def matmul(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=object)
        b = np.asarray(b, dtype=object)
        if self._int64_ok([a, b], a.shape[-1]):
            return self.reduce(np.matmul(a.astype(np.int64), b.astype(np.int64)).astype(object))
        return self.reduce(np.matmul(a, b))

    # -- text forms ----------------------------------------------------------

    def __str__(self) -> str:
        return f"Zmod:{self.p}" if self.kind == "Zmod" else self.kind

    def to_document(self):
        return {"Zmod": self.p} if self.kind == "Zmod" else self.kind

    @classmethod
    def parse(cls, spec) -> "BaseRing":
        if isinstance(spec, BaseRing):
            return spec
        if isinstance(spec, dict):
            if set(spec) != {"Zmod"}:
                raise ValueError(f"malformed base ring {spec!r}")
            return cls("Zmod", int(spec["Zmod"]))
        text = str(spec).strip()
        if text in ("Z", "Q"):
            return cls(text)
        for prefix in ("Zmod:", "Z/", "Zmod"):
            if text.startswith(prefix):
                return cls("Zmod", int(text[len(prefix):]))
        raise ValueError(f"malformed base ring {spec!r}")


Z = BaseRing("Z")
Q = BaseRing("Q")


def Zmod(p: int) -> BaseRing:
    return BaseRing("Zmod", p)
