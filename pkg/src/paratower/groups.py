"""Finite groups, direct products with the free group, and the rank-3 ambient group.

Finite group elements are string labels; product elements are
``(word, label)`` tuples.  The rank-3 free group (generators a, b, c) only
appears as an ambient group for coset-sliced towers, so it gets word
arithmetic, ball enumeration and a canonical right-coset factorization over
the a,b subgroup, nothing more.
"""

from __future__ import annotations

from typing import Dict, Iterator, List, Tuple

from . import words as fw

ProductElem = Tuple[str, str]


class FiniteGroup:
    """A finite group given by its element labels and multiplication table."""

    def __init__(self, name: str, elements: List[str], table: Dict[Tuple[str, str], str]):
        self.name = name
        self.elements = tuple(elements)
        self.table = table
        self.identity = elements[0]
        for e in elements:
            if table[(self.identity, e)] != e or table[(e, self.identity)] != e:
                raise ValueError("first element must be the identity")
        self._inv = {}
        for e in elements:
            for f in elements:
                if table[(e, f)] == self.identity:
                    self._inv[e] = f
        if len(self._inv) != len(elements):
            raise ValueError("multiplication table has no inverses")

    def mul(self, a: str, b: str) -> str:
        return self.table[(a, b)]

    def inv(self, a: str) -> str:
        return self._inv[a]

    def __len__(self) -> int:
        return len(self.elements)

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name})"

    def to_json(self) -> dict:
        return {"name": self.name, "elements": list(self.elements)}


def cyclic_group(n: int) -> FiniteGroup:
    elems = [str(i) for i in range(n)]
    table = {(str(i), str(j)): str((i + j) % n) for i in range(n) for j in range(n)}
    return FiniteGroup(f"Z/{n}", elems, table)


def trivial_group() -> FiniteGroup:
    return cyclic_group(1)


def finite_group_from_json(data: dict) -> FiniteGroup:
    name = data["name"]
    if name.startswith("Z/"):
        return cyclic_group(int(name[2:]))
    raise ValueError(f"unknown finite group: {name!r}")


class ProductGroup:
    """F2 × K for a finite K; elements are (reduced word, K-label) pairs."""

    def __init__(self, k_group: FiniteGroup):
        self.k = k_group

    @property
    def identity(self) -> ProductElem:
        return ("", self.k.identity)

    def mul(self, g: ProductElem, h: ProductElem) -> ProductElem:
        return (fw.multiply(g[0], h[0]), self.k.mul(g[1], h[1]))

    def inv(self, g: ProductElem) -> ProductElem:
        return (fw.inverse(g[0]), self.k.inv(g[1]))

    def ball(self, r: int) -> List[ProductElem]:
        return [(w, e) for w in fw.ball(r) for e in self.k.elements]

    def word_length(self, g: ProductElem) -> int:
        return len(g[0])

    def __repr__(self) -> str:
        return f"F2x{self.k.name}"


# ---------------------------------------------------------------------------
# the rank-3 free group, as ambient group for coset-sliced towers

F3_LETTERS = ("a", "A", "b", "B", "c", "C")
_F3_INV = {"a": "A", "A": "a", "b": "B", "B": "b", "c": "C", "C": "c"}


def f3_reduce(letters: str) -> str:
    stack: List[str] = []
    for x in letters:
        if x not in _F3_INV:
            raise ValueError(f"not a rank-3 generator letter: {x!r}")
        if stack and stack[-1] == _F3_INV[x]:
            stack.pop()
        else:
            stack.append(x)
    return "".join(stack)


def f3_multiply(u: str, v: str) -> str:
    return f3_reduce(u + v)


def f3_inverse(u: str) -> str:
    return "".join(_F3_INV[x] for x in reversed(u))


def f3_ball(r: int) -> List[str]:
    out = [""]
    layer = [""]
    for _ in range(r):
        nxt = []
        for w in layer:
            bad = _F3_INV[w[-1]] if w else None
            for x in F3_LETTERS:
                if x != bad:
                    nxt.append(w + x)
        layer = nxt
        out.extend(layer)
    return out


def f3_factor(w: str) -> Tuple[str, str]:
    """Split a reduced rank-3 word as (a,b-part) · (coset representative).

    The representative is the suffix starting at the first c or C letter; it
    is the canonical shortest element of its right coset over the a,b
    subgroup, and the factorization has no cancellation.
    """
    for i, x in enumerate(w):
        if x in ("c", "C"):
            return w[:i], w[i:]
    return w, ""


def f3_transversal(radius: int) -> List[str]:
    """Coset representatives meeting the radius-r ball: the identity plus
    all reduced words starting with c or C."""
    return [s for s in f3_ball(radius) if s == "" or s[0] in ("c", "C")]
