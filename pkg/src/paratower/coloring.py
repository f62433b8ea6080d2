"""Greedy proper coloring of Cayley graphs.

Given a symmetric finite set E containing the identity of a group K, the
Cayley graph on generating set E^2 has degree |E^2| - 1, so first-fit greedy
coloring along any vertex enumeration uses at most m = |E^2| colors.  The
resulting color classes partition K and each class B satisfies
e·B ∩ e'·B = ∅ for distinct e, e' in E, which is exactly the translation
freeness the tower constructions need.

Supported groups: any finite group table, and the integers with a fixed
canonical enumeration 0, 1, -1, 2, -2, ...
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Sequence, Union

from .groups import FiniteGroup


def _z_enum_index(k: int) -> int:
    # position of k in the enumeration 0, 1, -1, 2, -2, ...
    if k == 0:
        return 0
    if k > 0:
        return 2 * k - 1
    return -2 * k


def _z_enum(i: int) -> int:
    if i == 0:
        return 0
    if i % 2 == 1:
        return (i + 1) // 2
    return -(i // 2)


class Coloring:
    """A proper coloring of Cay(K, E^2) with colors 1..m.

    For the integers the assignment is a memoized greedy extended on
    demand; for a finite K it is computed eagerly.
    """

    def __init__(self, group: Union[FiniteGroup, str], e_set: Sequence):
        self.group = group
        if isinstance(group, FiniteGroup):
            self.e_set = list(e_set)
            if group.identity not in self.e_set:
                raise ValueError("E must contain the identity")
            if any(group.inv(e) not in self.e_set for e in self.e_set):
                raise ValueError("E must be symmetric")
            e2 = sorted({group.mul(e, f) for e in self.e_set for f in self.e_set},
                        key=group.elements.index)
            self.e_squared = e2
            self.m = len(e2)
            self._assign: Dict = {}
            for k in group.elements:
                nbrs = {group.mul(g, k) for g in e2 if g != group.identity}
                used = {self._assign[x] for x in nbrs if x in self._assign}
                self._assign[k] = min(c for c in range(1, self.m + 1) if c not in used)
        elif group == "Z":
            self.e_set = sorted(int(e) for e in e_set)
            if 0 not in self.e_set:
                raise ValueError("E must contain 0")
            if any(-e not in self.e_set for e in self.e_set):
                raise ValueError("E must be symmetric")
            self.e_squared = sorted({e + f for e in self.e_set for f in self.e_set})
            self.m = len(self.e_squared)
            self._assign = {}
            self._next_index = 0
        else:
            raise ValueError(f"unsupported group: {group!r}")

    def _extend_z(self, upto_index: int) -> None:
        offsets = [g for g in self.e_squared if g != 0]
        while self._next_index <= upto_index:
            v = _z_enum(self._next_index)
            used = set()
            for g in offsets:
                w = v + g
                if _z_enum_index(w) < self._next_index:
                    used.add(self._assign[w])
            self._assign[v] = min(c for c in range(1, self.m + 1) if c not in used)
            self._next_index += 1

    def color_of(self, k) -> int:
        if isinstance(self.group, FiniteGroup):
            return self._assign[k]
        self._extend_z(_z_enum_index(int(k)))
        return self._assign[int(k)]

    def colors_used(self) -> int:
        if isinstance(self.group, FiniteGroup):
            return max(self._assign.values())
        return max(self._assign.values(), default=0)

    def color_class(self, j: int):
        """Membership of class j as a set (finite K) or predicate (Z)."""
        if not 1 <= j <= self.m:
            raise IndexError(f"color index {j} out of range 1..{self.m}")
        if isinstance(self.group, FiniteGroup):
            return {k for k in self.group.elements if self._assign[k] == j}
        return lambda k: self.color_of(k) == j

    def is_proper_on(self, window: Iterable) -> bool:
        if isinstance(self.group, FiniteGroup):
            ident = self.group.identity
            return all(
                self.color_of(k) != self.color_of(self.group.mul(g, k))
                for k in window
                for g in self.e_squared
                if g != ident
            )
        win = [int(k) for k in window]
        return all(
            self.color_of(k) != self.color_of(k + g)
            for k in win
            for g in self.e_squared
            if g != 0
        )

    def to_json(self, window: Optional[Sequence] = None) -> dict:
        if isinstance(self.group, FiniteGroup):
            win = list(self.group.elements)
            return {
                "K": self.group.to_json(),
                "E": list(self.e_set),
                "m": self.m,
                "window": win,
                "assignment": [self.color_of(k) for k in win],
            }
        win = list(window) if window is not None else list(range(-100, 101))
        return {
            "K": "Z",
            "E": list(self.e_set),
            "m": self.m,
            "window": win,
            "assignment": [self.color_of(k) for k in win],
        }


def greedy_color(group: Union[FiniteGroup, str], e_set: Sequence) -> Coloring:
    return Coloring(group, e_set)


def periodic_color_z(e_set: Sequence[int]):
    """Closed-form proper coloring of the integers: k mod |E^2|.

    Independent of the greedy path; used as a cross-check oracle.  Valid
    whenever no nonzero offset in E^2 is divisible by |E^2|, which holds
    for interval generating sets like {-1, 0, 1}.
    """
    e = sorted(int(x) for x in e_set)
    offsets = {a + b for a in e for b in e}
    m = len(offsets)
    if any(g != 0 and g % m == 0 for g in offsets):
        raise ValueError("mod-m coloring is not proper for this E")
    return lambda k: (int(k) % m) + 1
