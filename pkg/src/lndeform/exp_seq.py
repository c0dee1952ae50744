"""Exponential sequences: finitely supported sequences of non-negative integers.

An exponential sequence ``alpha = (a1, a2, ...)`` indexes a Landweber-Novikov
operation.  The grading used throughout the package is the weighted degree
``sum(i * a_i)``.
"""

from __future__ import annotations

import re
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator, Sequence

__all__ = [
    "ExpSeq",
    "ZERO",
    "degree",
    "add",
    "enumerate_seqs",
    "enumerate_degree",
    "splittings",
    "parse",
]


class ExpSeq:
    """Immutable exponential sequence stored as sorted ``(index, multiplicity)`` pairs."""

    __slots__ = ("_pairs", "_hash", "_degree")

    def __init__(self, entries: Iterable[int] = ()):
        pairs = []
        for i, a in enumerate(entries, start=1):
            a = int(a)
            if a < 0:
                raise ValueError(f"negative entry {a} at position {i}")
            if a:
                pairs.append((i, a))
        self._set(tuple(pairs))

    def _set(self, pairs):
        self._pairs = pairs
        self._hash = hash(pairs)
        self._degree = sum(i * a for i, a in pairs)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "ExpSeq":
        pairs = tuple(sorted((int(i), int(a)) for i, a in pairs if a))
        for k, (i, a) in enumerate(pairs):
            if i < 1 or a < 0:
                raise ValueError(f"bad pair {(i, a)}")
            if k and pairs[k - 1][0] == i:
                raise ValueError(f"repeated index {i}")
        seq = cls.__new__(cls)
        seq._set(pairs)
        return seq

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        return self._pairs

    @property
    def degree(self) -> int:
        return self._degree

    def dense(self) -> tuple[int, ...]:
        """Entries ``(a1, ..., ak)`` with trailing zeros dropped."""
        if not self._pairs:
            return ()
        out = [0] * self._pairs[-1][0]
        for i, a in self._pairs:
            out[i - 1] = a
        return tuple(out)

    def __getitem__(self, i: int) -> int:
        for j, a in self._pairs:
            if j == i:
                return a
        return 0

    def is_zero(self) -> bool:
        return not self._pairs

    def __add__(self, other: "ExpSeq") -> "ExpSeq":
        return add(self, other)

    def __eq__(self, other) -> bool:
        return isinstance(other, ExpSeq) and self._pairs == other._pairs

    def __hash__(self) -> int:
        return self._hash

    def sort_key(self):
        return (self._degree, self._pairs)

    def __lt__(self, other: "ExpSeq") -> bool:
        return self.sort_key() < other.sort_key()

    def __repr__(self) -> str:
        return f"ExpSeq({list(self.dense())})"

    def __str__(self) -> str:
        return "[" + ",".join(str(a) for a in self.dense()) + "]"


ZERO = ExpSeq()


def degree(alpha: ExpSeq) -> int:
    return alpha.degree


def add(alpha: ExpSeq, beta: ExpSeq) -> ExpSeq:
    merged = dict(alpha.pairs)
    for i, b in beta.pairs:
        merged[i] = merged.get(i, 0) + b
    return ExpSeq.from_pairs(merged.items())


def _partitions(n: int, largest: int) -> Iterator[tuple[int, ...]]:
    # partitions of n with parts <= largest, parts in non-increasing order
    if n == 0:
        yield ()
        return
    for part in range(min(n, largest), 0, -1):
        for rest in _partitions(n - part, part):
            yield (part,) + rest


@lru_cache(maxsize=None)
def enumerate_degree(d: int) -> tuple[ExpSeq, ...]:
    """All sequences of degree exactly ``d`` in canonical order."""
    if d < 0:
        raise ValueError("degree must be non-negative")
    seqs = []
    for parts in _partitions(d, d):
        counts: dict[int, int] = {}
        for p in parts:
            counts[p] = counts.get(p, 0) + 1
        seqs.append(ExpSeq.from_pairs(counts.items()))
    return tuple(sorted(seqs, key=ExpSeq.sort_key))


@lru_cache(maxsize=None)
def enumerate_seqs(bound: int) -> tuple[ExpSeq, ...]:
    """All sequences with ``degree <= bound``, ordered by degree then sparse form."""
    if bound < 0:
        raise ValueError("bound must be non-negative")
    out: list[ExpSeq] = []
    for d in range(bound + 1):
        out.extend(enumerate_degree(d))
    return tuple(out)


@lru_cache(maxsize=4096)
def splittings(alpha: ExpSeq) -> tuple[tuple[ExpSeq, ExpSeq], ...]:
    """All ordered pairs ``(beta, gamma)`` with ``beta + gamma == alpha``.

    Ordered by the first component in canonical order.
    """
    idx = [i for i, _ in alpha.pairs]
    ranges = [range(a + 1) for _, a in alpha.pairs]
    out = []
    for choice in product(*ranges):
        beta = ExpSeq.from_pairs(zip(idx, choice))
        gamma = ExpSeq.from_pairs((i, a - c) for (i, a), c in zip(alpha.pairs, choice))
        out.append((beta, gamma))
    out.sort(key=lambda bg: bg[0].sort_key())
    return tuple(out)


_SEQ_RE = re.compile(r"^\s*\[\s*([0-9,\s]*)\]\s*$")


def parse(text: str | Sequence[int]) -> ExpSeq:
    """Parse ``"[a1,a2,...]"`` (or a list of ints) into an :class:`ExpSeq`."""
    if isinstance(text, ExpSeq):
        return text
    if not isinstance(text, str):
        return ExpSeq(text)
    m = _SEQ_RE.match(text)
    if not m:
        raise ValueError(f"malformed exponential sequence {text!r}")
    body = m.group(1).strip()
    if not body:
        return ZERO
    return ExpSeq(int(tok) for tok in body.split(","))
