"""Structure constants of the Landweber-Novikov algebra.

The constants ``n_gamma`` in ``s_alpha s_beta = sum n_gamma s_gamma`` are read
off the composition of formal diffeomorphisms ``x + b1 x^2 + b2 x^3 + ...``.
With the total operation ``s_t = sum_alpha t^alpha s_alpha`` acting on power
series by ``x -> x + sum t_i x^(i+1)``, composing two total operations gives

    s_t s_u = sum_gamma w(t, u)^gamma s_gamma,   b_w = b_u o b_t,

so ``n_gamma(alpha, beta)`` is the coefficient of ``t^alpha u^beta`` in
``w^gamma``: ``alpha`` pairs with the *inner* series, ``beta`` with the outer
one.  The opposite convention is available through ``pairing="outer-left"``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

from .exp_seq import ExpSeq, enumerate_seqs, parse

__all__ = [
    "TruncatedPolynomial",
    "compose_series",
    "identity_series",
    "generic_series",
    "StructureTable",
    "structure_constants",
    "AssociativityReport",
    "associativity_report",
]


class TruncatedPolynomial:
    """Sparse polynomial with weighted variables, truncated above ``bound``.

    Monomials are exponent tuples of length ``len(weights)``; coefficients are
    exact (``int`` or ``Fraction``).  Zero coefficients are never stored.
    """

    __slots__ = ("weights", "bound", "terms")

    def __init__(self, weights: tuple[int, ...], bound: int, terms: Mapping | None = None):
        self.weights = tuple(weights)
        self.bound = bound
        self.terms: dict[tuple[int, ...], object] = {}
        if terms:
            for mono, c in terms.items():
                if c and self.weight(mono) <= bound:
                    self.terms[tuple(mono)] = c

    def weight(self, mono) -> int:
        return sum(w * e for w, e in zip(self.weights, mono))

    @classmethod
    def constant(cls, weights, bound, c=1):
        return cls(weights, bound, {(0,) * len(weights): c})

    @classmethod
    def variable(cls, weights, bound, index, c=1):
        mono = [0] * len(weights)
        mono[index] = 1
        return cls(weights, bound, {tuple(mono): c})

    def _like(self, terms=None):
        p = TruncatedPolynomial.__new__(TruncatedPolynomial)
        p.weights, p.bound, p.terms = self.weights, self.bound, terms if terms is not None else {}
        return p

    def __add__(self, other):
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return self._like(out)

    def __neg__(self):
        return self._like({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k):
        if not k:
            return self._like()
        return self._like({m: k * c for m, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, TruncatedPolynomial):
            return self.scale(other)
        out: dict = {}
        bound = self.bound
        wa = {m: self.weight(m) for m in self.terms}
        wb = {m: other.weight(m) for m in other.terms}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                if wa[ma] + wb[mb] > bound:
                    continue
                m = tuple(x + y for x, y in zip(ma, mb))
                v = out.get(m, 0) + ca * cb
                if v:
                    out[m] = v
                else:
                    out.pop(m, None)
        return self._like(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        result = TruncatedPolynomial.constant(self.weights, self.bound)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        return isinstance(other, TruncatedPolynomial) and self.terms == other.terms

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in sorted(self.terms.items()):
            mono = "*".join(f"v{i}^{e}" if e > 1 else f"v{i}" for i, e in enumerate(m) if e)
            parts.append(f"{c}*{mono}" if mono else f"{c}")
        return " + ".join(parts)


def _series_vars(bound: int) -> tuple[int, ...]:
    # outer generators b'_1..b'_N then inner generators b''_1..b''_N
    return tuple(range(1, bound + 1)) * 2


def generic_series(bound: int, which: str) -> list[TruncatedPolynomial]:
    """Coefficients ``[1, b_1, ..., b_N]`` of ``x + sum b_i x^(i+1)``.

    ``which`` selects the primed (``"outer"``) or double-primed (``"inner"``)
    generators inside the shared two-set variable space.
    """
    weights = _series_vars(bound)
    offset = {"outer": 0, "inner": bound}[which]
    coeffs = [TruncatedPolynomial.constant(weights, bound)]
    for i in range(1, bound + 1):
        coeffs.append(TruncatedPolynomial.variable(weights, bound, offset + i - 1))
    return coeffs


def identity_series(bound: int) -> list[TruncatedPolynomial]:
    weights = _series_vars(bound)
    return [TruncatedPolynomial.constant(weights, bound)] + [
        TruncatedPolynomial(weights, bound) for _ in range(bound)
    ]


def compose_series(outer, inner, bound: int) -> list[TruncatedPolynomial]:
    """Coefficients of ``x^(n+1)``, ``n = 0..bound``, in ``outer(inner(x))``.

    Both arguments are lists ``[c_0, c_1, ..., c_N]`` standing for the series
    ``sum c_n x^(n+1)`` (``c_0 = 1`` for formal diffeomorphisms).
    """
    weights = outer[0].weights
    zero = TruncatedPolynomial(weights, bound)
    # y = inner(x); powers[j][n] = coefficient of x^(n + j + 1) in y^(j + 1)
    y = [inner[n] if n < len(inner) else zero for n in range(bound + 1)]
    power = list(y)
    result = [zero] * (bound + 1)
    for j in range(bound + 1):
        cj = outer[j] if j < len(outer) else zero
        if not cj.is_zero():
            for n in range(bound + 1 - j):
                result[n + j] = result[n + j] + cj * power[n]
        if j == bound:
            break
        # power <- power * y, shifting the x exponent by one
        nxt = [zero] * (bound + 1)
        for a in range(bound + 1):
            if power[a].is_zero():
                continue
            for b in range(bound + 1 - a):
                if not y[b].is_zero():
                    nxt[a + b] = nxt[a + b] + power[a] * y[b]
        power = nxt
    return result


@lru_cache(maxsize=16)
def _composite(bound: int) -> tuple[TruncatedPolynomial, ...]:
    return tuple(compose_series(generic_series(bound, "outer"), generic_series(bound, "inner"), bound))


def _split_monomial(mono, bound):
    outer = ExpSeq(mono[:bound])
    inner = ExpSeq(mono[bound:])
    return outer, inner


@lru_cache(maxsize=16)
def _build_table(bound: int, pairing: str) -> dict:
    comp = _composite(bound)
    weights = _series_vars(bound)
    table: dict[tuple[ExpSeq, ExpSeq], dict[ExpSeq, int]] = {}
    for gamma in enumerate_seqs(bound):
        w = TruncatedPolynomial.constant(weights, bound)
        for i, a in gamma.pairs:
            w = w * comp[i] ** a
        for mono, c in w.terms.items():
            outer, inner = _split_monomial(mono, bound)
            if pairing == "inner-left":
                key = (inner, outer)
            else:
                key = (outer, inner)
            table.setdefault(key, {})[gamma] = int(c)
    for alpha in enumerate_seqs(bound):
        for beta in enumerate_seqs(bound - alpha.degree):
            table.setdefault((alpha, beta), {})
    return table


@dataclass
class StructureTable:
    """Memoised structure constants ``(alpha, beta) -> {gamma: n_gamma}`` up to ``bound``."""

    bound: int
    pairing: str = "inner-left"
    table: dict = field(default=None, repr=False)

    def __post_init__(self):
        if self.pairing not in ("inner-left", "outer-left"):
            raise ValueError(f"unknown pairing {self.pairing!r}")
        if self.table is None:
            self.table = {k: dict(v) for k, v in _build_table(self.bound, self.pairing).items()}

    def constants(self, alpha: ExpSeq, beta: ExpSeq) -> dict[ExpSeq, int]:
        if alpha.degree + beta.degree > self.bound:
            raise ValueError(
                f"degree {alpha.degree}+{beta.degree} exceeds structure table bound {self.bound}"
            )
        return self.table[(alpha, beta)]

    def pairs(self):
        """``(alpha, beta)`` with ``deg alpha + deg beta <= bound`` in canonical order."""
        return sorted(self.table, key=lambda ab: (ab[0].degree + ab[1].degree, ab[0].sort_key(), ab[1].sort_key()))

    def restrict(self, bound: int) -> "StructureTable":
        if bound > self.bound:
            raise ValueError("cannot restrict to a larger bound")
        sub = {k: dict(v) for k, v in self.table.items() if k[0].degree + k[1].degree <= bound}
        return StructureTable(bound, self.pairing, sub)

    def copy(self) -> "StructureTable":
        return StructureTable(self.bound, self.pairing, {k: dict(v) for k, v in self.table.items()})

    def to_document(self) -> dict:
        entries = []
        for alpha, beta in self.pairs():
            consts = self.table[(alpha, beta)]
            entries.append({
                "alpha": list(alpha.dense()),
                "beta": list(beta.dense()),
                "constants": [
                    {"gamma": list(g.dense()), "coeff": c}
                    for g, c in sorted(consts.items(), key=lambda gc: gc[0].sort_key())
                ],
            })
        return {"kind": "structure-table", "bound": self.bound, "pairing": self.pairing, "entries": entries}

    @classmethod
    def from_document(cls, doc: dict) -> "StructureTable":
        table = {}
        for e in doc["entries"]:
            key = (parse(e["alpha"]), parse(e["beta"]))
            table[key] = {parse(c["gamma"]): int(c["coeff"]) for c in e["constants"]}
        return cls(int(doc["bound"]), doc.get("pairing", "inner-left"), table)


def structure_constants(alpha: ExpSeq, beta: ExpSeq, bound: int, pairing: str = "inner-left") -> dict[ExpSeq, int]:
    """Sparse map ``{gamma: n_gamma}`` with ``s_alpha s_beta = sum n_gamma s_gamma``."""
    if alpha.degree + beta.degree > bound:
        raise ValueError(f"degree {alpha.degree}+{beta.degree} exceeds bound {bound}")
    return dict(_build_table(bound, pairing)[(alpha, beta)])


@dataclass
class AssociativityReport:
    ok: bool
    checked: int
    counterexample: tuple | None = None

    def __bool__(self):
        return self.ok


def associativity_report(table: StructureTable | int) -> AssociativityReport:
    """Check ``(s_a s_b) s_c = s_a (s_b s_c)`` on all triples of total degree ``<= bound``.

    The first violation in canonical order is returned as
    ``(alpha, beta, gamma, epsilon, lhs, rhs)``.
    """
    if isinstance(table, int):
        table = StructureTable(table)
    N = table.bound
    seqs = enumerate_seqs(N)
    checked = 0
    for a in seqs:
        for b in seqs:
            if a.degree + b.degree > N:
                continue
            for c in seqs:
                if a.degree + b.degree + c.degree > N:
                    continue
                lhs: dict[ExpSeq, int] = {}
                for d, nd in table.constants(a, b).items():
                    for e, ne in table.constants(d, c).items():
                        lhs[e] = lhs.get(e, 0) + nd * ne
                rhs: dict[ExpSeq, int] = {}
                for r, nr in table.constants(b, c).items():
                    for e, ne in table.constants(a, r).items():
                        rhs[e] = rhs.get(e, 0) + nr * ne
                checked += 1
                for e in sorted(set(lhs) | set(rhs), key=ExpSeq.sort_key):
                    if lhs.get(e, 0) != rhs.get(e, 0):
                        return AssociativityReport(False, checked, (a, b, c, e, lhs.get(e, 0), rhs.get(e, 0)))
    return AssociativityReport(True, checked)
