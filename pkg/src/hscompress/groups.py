"""Base groups with exact arithmetic, word lengths and ball enumeration.

Every group exposes the same small interface (``identity``, ``generators``,
``mul``, ``inv``, ``sort_key``, ``length``, ``ball``) and elements are plain
hashable payloads whose equality is group equality.  Constructed groups in
:mod:`hscompress.constructions` reuse this interface.
"""

from __future__ import annotations

import re
import threading
from typing import Any, Callable, Hashable, Iterable, Sequence

from .config import CAPS
from .errors import BallTooLarge, ConfigurationError, RadiusExceeded

Element = Hashable


class Group:
    """Finitely generated group with a memoized breadth-first word metric."""

    name: str = "G"

    def __init__(self, generators: Iterable[Element], radius_cap: int | None = None):
        gens = []
        for g in generators:
            if g == self.identity:
                continue
            for h in (g, self.inv(g)):
                if h not in gens:
                    gens.append(h)
        self.generators: tuple[Element, ...] = tuple(sorted(gens, key=self.sort_key))
        self.radius_cap = CAPS.bfs_radius if radius_cap is None else radius_cap
        self._levels: list[list[Element]] = [[self.identity]]
        self._dist: dict[Element, int] = {self.identity: 0}
        self._exhausted = False
        self._lock = threading.Lock()

    # -- arithmetic, overridden by subclasses -------------------------------
    identity: Element = None

    def mul(self, a: Element, b: Element) -> Element:
        raise NotImplementedError

    def inv(self, a: Element) -> Element:
        raise NotImplementedError

    def sort_key(self, a: Element) -> Any:
        return a

    def format(self, a: Element) -> str:
        return str(a)

    def parse(self, text: str) -> Element:
        raise NotImplementedError

    def to_spec(self) -> dict:
        raise NotImplementedError

    def is_finite(self) -> bool:
        return False

    def closed_length(self, a: Element) -> int | None:
        """Closed-form word length, or None when only BFS is available."""
        return None

    # -- derived operations -------------------------------------------------
    def product(self, elements: Iterable[Element]) -> Element:
        out = self.identity
        for g in elements:
            out = self.mul(out, g)
        return out

    def power(self, a: Element, n: int) -> Element:
        base = a if n >= 0 else self.inv(a)
        out = self.identity
        for _ in range(abs(n)):
            out = self.mul(out, base)
        return out

    def _grow(self) -> bool:
        """Add one BFS level; returns False when the group is exhausted."""
        with self._lock:
            if self._exhausted:
                return False
            if len(self._levels) - 1 >= self.radius_cap:
                return False
            frontier = self._levels[-1]
            r = len(self._levels)
            new: list[Element] = []
            dist = self._dist
            for g in frontier:
                for s in self.generators:
                    h = self.mul(g, s)
                    if h not in dist:
                        dist[h] = r
                        new.append(h)
            if len(dist) > CAPS.ball_size:
                raise BallTooLarge(f"{self.name}: BFS ball exceeds {CAPS.ball_size} elements")
            if not new:
                self._exhausted = True
                return False
            new.sort(key=self.sort_key)
            self._levels.append(new)
            return True

    def bfs_length(self, a: Element) -> int:
        """Distance from the identity in the Cayley graph (never closed form)."""
        while True:
            d = self._dist.get(a)
            if d is not None:
                return d
            if not self._grow():
                if self._exhausted:
                    raise ConfigurationError(f"{self.format(a)} is not generated by {self.name}'s generators")
                raise RadiusExceeded(
                    f"{self.format(a)} not reached within radius {self.radius_cap} in {self.name}"
                )

    def length(self, a: Element) -> int:
        c = self.closed_length(a)
        return self.bfs_length(a) if c is None else c

    def distance(self, a: Element, b: Element) -> int:
        return self.length(self.mul(self.inv(a), b))

    def sphere(self, r: int) -> list[Element]:
        while len(self._levels) <= r:
            if not self._grow():
                if self._exhausted:
                    return []
                raise RadiusExceeded(f"{self.name}: radius {r} exceeds cap {self.radius_cap}")
        return list(self._levels[r])

    def ball(self, radius: int) -> list[Element]:
        """Elements of word length <= radius, ordered by (length, payload)."""
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        out: list[Element] = []
        for r in range(radius + 1):
            level = self.sphere(r)
            if not level:
                break
            out.extend(level)
            if len(out) > CAPS.ball_size:
                raise BallTooLarge(f"ball of radius {radius} in {self.name} is too large")
        return out

    def elements(self) -> list[Element]:
        if not self.is_finite():
            raise ConfigurationError(f"{self.name} is infinite")
        r = 0
        while self.sphere(r):
            r += 1
        return self.ball(r)

    def order(self, a: Element, limit: int = 10_000) -> int | None:
        g = a
        for n in range(1, limit + 1):
            if g == self.identity:
                return n
            g = self.mul(g, a)
        return None

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


# ---------------------------------------------------------------------------
# integers


_INT_RE = re.compile(r"^a\^?(-?\d+)?$")


class Integers(Group):
    """The integers, written multiplicatively with generator ``a``."""

    identity = 0
    name = "Z"

    def __init__(self, generators: Sequence[int] = (1,), radius_cap: int | None = None):
        super().__init__(generators, radius_cap)

    def mul(self, a: int, b: int) -> int:
        return a + b

    def inv(self, a: int) -> int:
        return -a

    def sort_key(self, a: int):
        # positive before negative at equal size, so a sorts before a^-1
        return (abs(a), a < 0)

    def closed_length(self, a: int) -> int | None:
        if self.generators == (1, -1):
            return abs(a)
        return None

    def format(self, a: int) -> str:
        if a == 0:
            return "e"
        return "a" if a == 1 else f"a^{a}"

    def parse(self, text: str) -> int:
        text = text.strip()
        if text in ("e", "1", ""):
            return 0
        if set(text) <= {"a", "A"}:
            return text.count("a") - text.count("A")
        m = _INT_RE.match(text)
        if not m:
            raise ValueError(f"cannot parse integer element {text!r}")
        return 1 if m.group(1) is None else int(m.group(1))

    def to_spec(self) -> dict:
        spec: dict = {"kind": "integers"}
        if self.generators != (1, -1):
            spec["generators"] = [g for g in self.generators if g > 0]
        return spec


# ---------------------------------------------------------------------------
# free groups

_LETTERS = "abcdefghijklmnopqrsuvwxyz"  # 't' is reserved for stable letters


class FreeGroup(Group):
    """Free group of rank k on letters a, b, ...; payloads are reduced int tuples.

    Letter i (1-based) is stored as ``i`` and its inverse as ``-i``.
    """

    identity = ()

    def __init__(self, rank: int, radius_cap: int | None = None):
        if not 1 <= rank <= len(_LETTERS):
            raise ConfigurationError(f"unsupported free group rank {rank}")
        self.rank = rank
        self.name = f"F{rank}"
        super().__init__([(i,) for i in range(1, rank + 1)], radius_cap)

    def mul(self, a: tuple, b: tuple) -> tuple:
        i = 0
        n = len(a)
        m = len(b)
        while i < n and i < m and a[n - 1 - i] == -b[i]:
            i += 1
        return a[: n - i] + b[i:]

    def inv(self, a: tuple) -> tuple:
        return tuple(-x for x in reversed(a))

    def sort_key(self, a: tuple):
        return (len(a), tuple(2 * (abs(x) - 1) + (x < 0) for x in a))

    def closed_length(self, a: tuple) -> int:
        return len(a)

    def format(self, a: tuple) -> str:
        if not a:
            return "e"
        return "".join(_LETTERS[abs(x) - 1] if x > 0 else _LETTERS[abs(x) - 1].upper() for x in a)

    def parse(self, text: str) -> tuple:
        text = text.strip()
        if text in ("e", "1", ""):
            return ()
        out: tuple = ()
        for ch in text:
            idx = _LETTERS.find(ch.lower())
            if idx < 0 or idx >= self.rank:
                raise ValueError(f"letter {ch!r} not in {self.name}")
            out = self.mul(out, ((idx + 1) if ch.islower() else -(idx + 1),))
        return out

    def to_spec(self) -> dict:
        return {"kind": "free", "rank": self.rank}


# ---------------------------------------------------------------------------
# finite groups


class FiniteGroup(Group):
    """Finite group given by a full multiplication table.

    Elements are table indices; ``names`` gives their printable labels and
    the index order is the canonical payload order.
    """

    def __init__(
        self,
        table: Sequence[Sequence[int]],
        generators: Iterable[int],
        names: Sequence[str] | None = None,
        name: str = "G",
        validate: bool = True,
        spec: dict | None = None,
    ):
        self.table = [list(row) for row in table]
        n = len(self.table)
        self.size = n
        self.names = list(names) if names is not None else [str(i) for i in range(n)]
        self.name = name
        if len(self.names) != n or len(set(self.names)) != n:
            raise ConfigurationError("element names must be distinct, one per table row")
        ident = None
        for e in range(n):
            if all(self.table[e][x] == x and self.table[x][e] == x for x in range(n)):
                ident = e
                break
        if ident is None:
            raise ConfigurationError(f"{name}: multiplication table has no identity")
        self.identity = ident
        if validate:
            self._validate()
        self._inverse = []
        for x in range(n):
            inv = [y for y in range(n) if self.table[x][y] == ident]
            if len(inv) != 1:
                raise ConfigurationError(f"{name}: element {self.names[x]} has no unique inverse")
            self._inverse.append(inv[0])
        self._spec = spec
        super().__init__(list(generators))
        if validate and len(self.ball(n)) != n:
            raise ConfigurationError(f"{name}: declared generators do not generate the group")

    def _validate(self) -> None:
        n = self.size
        rng = set(range(n))
        for i, row in enumerate(self.table):
            if len(row) != n or set(row) != rng:
                raise ConfigurationError(f"{self.name}: row {i} is not a permutation")
        for j in range(n):
            if {self.table[i][j] for i in range(n)} != rng:
                raise ConfigurationError(f"{self.name}: column {j} is not a permutation")
        t = self.table
        for a in range(n):
            for b in range(n):
                ab = t[a][b]
                for c in range(n):
                    if t[ab][c] != t[a][t[b][c]]:
                        raise ConfigurationError(f"{self.name}: multiplication is not associative")

    def is_finite(self) -> bool:
        return True

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self._inverse[a]

    def format(self, a: int) -> str:
        return self.names[a]

    def parse(self, text: str) -> int:
        text = text.strip()
        try:
            return self.names.index(text)
        except ValueError:
            raise ValueError(f"{text!r} is not an element of {self.name}") from None

    def to_spec(self) -> dict:
        if self._spec is not None:
            return dict(self._spec)
        return {
            "kind": "finite",
            "name": self.name,
            "elements": list(self.names),
            "table": [list(r) for r in self.table],
            "generators": [self.names[g] for g in self.generators],
        }


def cyclic(order: int, letter: str = "s") -> FiniteGroup:
    """Z_n with generating set {s, s^-1} (a single involution when n = 2)."""
    if order < 1:
        raise ConfigurationError("cyclic group order must be positive")
    names = ["e"] + [letter if k == 1 else f"{letter}{k}" for k in range(1, order)]
    table = [[(i + j) % order for j in range(order)] for i in range(order)]
    gens = [1 % order]
    return FiniteGroup(
        table,
        gens,
        names,
        name=f"Z{order}",
        spec={"kind": "cyclic", "order": order, "letter": letter},
    )


# ---------------------------------------------------------------------------
# direct products and quotients


class DirectProduct(Group):
    """G1 x G2 with generating set (S1 x {e}) u ({e} x S2)."""

    def __init__(self, first: Group, second: Group, radius_cap: int | None = None):
        self.first = first
        self.second = second
        self.name = f"({first.name}x{second.name})"
        self.identity = (first.identity, second.identity)
        gens = [(s, second.identity) for s in first.generators]
        gens += [(first.identity, s) for s in second.generators]
        super().__init__(gens, radius_cap)

    def is_finite(self) -> bool:
        return self.first.is_finite() and self.second.is_finite()

    def mul(self, a, b):
        return (self.first.mul(a[0], b[0]), self.second.mul(a[1], b[1]))

    def inv(self, a):
        return (self.first.inv(a[0]), self.second.inv(a[1]))

    def sort_key(self, a):
        return (self.first.sort_key(a[0]), self.second.sort_key(a[1]))

    def closed_length(self, a) -> int:
        # word length of the product generating set is additive
        return self.first.length(a[0]) + self.second.length(a[1])

    def format(self, a) -> str:
        return f"({self.first.format(a[0])},{self.second.format(a[1])})"

    def parse(self, text: str):
        text = text.strip()
        if not (text.startswith("(") and text.endswith(")")):
            raise ValueError(f"cannot parse product element {text!r}")
        inner = text[1:-1]
        depth = 0
        for i, ch in enumerate(inner):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch == "," and depth == 0:
                return (self.first.parse(inner[:i]), self.second.parse(inner[i + 1 :]))
        raise ValueError(f"cannot parse product element {text!r}")

    def to_spec(self) -> dict:
        return {"kind": "direct_product", "factors": [self.first.to_spec(), self.second.to_spec()]}


class QuotientGroup(Group):
    """G/N for a finite normal subgroup N.

    Each coset is represented by its minimal-length member (ties broken by
    payload order), so the induced length is ``min l(y)`` over the coset.
    """

    def __init__(self, group: Group, normal: Iterable[Element], radius_cap: int | None = None):
        self.group = group
        self.normal = tuple(sorted(set(normal), key=group.sort_key))
        nset = set(self.normal)
        if group.identity not in nset:
            raise ConfigurationError("normal subgroup must contain the identity")
        for a in self.normal:
            for b in self.normal:
                if group.mul(a, group.inv(b)) not in nset:
                    raise ConfigurationError("listed elements do not form a subgroup")
        for s in group.generators:
            for n in self.normal:
                if group.mul(group.mul(s, n), group.inv(s)) not in nset:
                    raise ConfigurationError("subgroup is not normal")
        self.name = f"{group.name}/N"
        self.identity = self.project(group.identity)
        super().__init__([self.project(s) for s in group.generators], radius_cap)

    def project(self, g: Element) -> Element:
        G = self.group
        return min((G.mul(g, n) for n in self.normal), key=lambda y: (G.length(y), G.sort_key(y)))

    def coset(self, g: Element) -> list[Element]:
        return [self.group.mul(g, n) for n in self.normal]

    def is_finite(self) -> bool:
        return self.group.is_finite()

    def mul(self, a, b):
        return self.project(self.group.mul(a, b))

    def inv(self, a):
        return self.project(self.group.inv(a))

    def sort_key(self, a):
        return self.group.sort_key(a)

    def closed_length(self, a) -> int:
        return self.group.length(a)

    def format(self, a) -> str:
        return self.group.format(a) + "N"

    def parse(self, text: str):
        text = text.strip()
        if text.endswith("N"):
            text = text[:-1]
        return self.project(self.group.parse(text))

    def to_spec(self) -> dict:
        return {
            "kind": "quotient",
            "group": self.group.to_spec(),
            "normal_subgroup": [self.group.format(n) for n in self.normal],
        }


# ---------------------------------------------------------------------------
# module-level operations


def word_length(group: Group, g: Element, method: str = "auto") -> int:
    """Word length of ``g``: BFS distance from the identity over the generators.

    ``method`` is ``"auto"`` (closed form when available), ``"bfs"`` or
    ``"closed"``.
    """
    if method == "bfs":
        return group.bfs_length(g)
    if method == "closed":
        c = group.closed_length(g)
        if c is None:
            raise ConfigurationError(f"{group.name} has no closed-form length")
        return c
    return group.length(g)


def enumerate_ball(group: Group, radius: int) -> list[Element]:
    return group.ball(radius)


def verify_length_axioms(
    group: Group,
    pairs: Iterable[tuple[Element, Element]],
    length: Callable[[Element], float] | None = None,
) -> list[str]:
    """Check the length-function axioms on sample pairs; returns violations."""
    ell = length or group.length
    problems: list[str] = []
    seen: set = set()
    for x, y in pairs:
        for z in (x, y):
            if z in seen:
                continue
            seen.add(z)
            lz = ell(z)
            if (lz == 0) != (z == group.identity):
                problems.append(f"l({group.format(z)}) = {lz} violates l(x)=0 <=> x=1")
            if ell(group.inv(z)) != lz:
                problems.append(f"l({group.format(z)}) != l of its inverse")
        xy = group.mul(x, y)
        if ell(xy) > ell(x) + ell(y):
            problems.append(
                f"l({group.format(x)}*{group.format(y)}) = {ell(xy)} > {ell(x)} + {ell(y)}"
            )
    return problems


# ---------------------------------------------------------------------------
# group-spec documents


def group_from_spec(spec: dict) -> Group:
    """Build a base group from its spec document (see README for the schema)."""
    kind = spec.get("kind")
    if kind == "integers":
        return Integers(tuple(spec.get("generators", [1])))
    if kind == "free":
        return FreeGroup(int(spec["rank"]))
    if kind == "cyclic":
        return cyclic(int(spec["order"]), spec.get("letter", "s"))
    if kind == "finite":
        names = list(spec["elements"])
        index = {nm: i for i, nm in enumerate(names)}
        try:
            table = [[index[x] if isinstance(x, str) else int(x) for x in row] for row in spec["table"]]
            gens = [index[g] for g in spec["generators"]]
        except KeyError as exc:
            raise ConfigurationError(f"unknown element name {exc}") from None
        return FiniteGroup(table, gens, names, name=spec.get("name", "G"))
    if kind == "direct_product":
        f1, f2 = spec["factors"]
        return DirectProduct(group_from_spec(f1), group_from_spec(f2))
    if kind == "quotient":
        g = group_from_spec(spec["group"])
        return QuotientGroup(g, [g.parse(s) for s in spec["normal_subgroup"]])
    raise ConfigurationError(f"unknown group kind {kind!r}")
