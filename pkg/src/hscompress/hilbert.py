"""Finitely supported vectors, the exponential Fock map, and kernel unit families."""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Any, Callable, Hashable, Iterable, Mapping

from .config import CAPS
from .errors import ConfigurationError

Number = int | float | Fraction


class SparseVector:
    """Real vector with finite support over hashable keys.

    ``space`` tags the key family (for instance ``"prefix"`` or ``"tree"``);
    combining vectors from different spaces is a type error.  Integer and
    :class:`~fractions.Fraction` coefficients stay exact.
    """

    __slots__ = ("space", "_c")

    def __init__(self, coeffs: Mapping[Hashable, Number] | Iterable = (), space: str = "plain"):
        self.space = space
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        self._c = {k: v for k, v in items if v != 0}

    @classmethod
    def delta(cls, key: Hashable, space: str = "plain", value: Number = 1) -> "SparseVector":
        return cls({key: value}, space)

    @classmethod
    def zero(cls, space: str = "plain") -> "SparseVector":
        return cls({}, space)

    def _check(self, other: "SparseVector") -> None:
        if not isinstance(other, SparseVector):
            raise TypeError(f"expected SparseVector, got {type(other).__name__}")
        if other.space != self.space:
            raise TypeError(f"incompatible key spaces {self.space!r} and {other.space!r}")

    def __getitem__(self, key) -> Number:
        return self._c.get(key, 0)

    def __iter__(self):
        return iter(self._c.items())

    def __len__(self) -> int:
        return len(self._c)

    def support(self) -> frozenset:
        return frozenset(self._c)

    def items(self):
        return self._c.items()

    def __eq__(self, other) -> bool:
        return isinstance(other, SparseVector) and self.space == other.space and self._c == other._c

    def __hash__(self):
        return hash((self.space, frozenset(self._c.items())))

    def __add__(self, other: "SparseVector") -> "SparseVector":
        self._check(other)
        out = dict(self._c)
        for k, v in other._c.items():
            out[k] = out.get(k, 0) + v
        return SparseVector(out, self.space)

    def __neg__(self) -> "SparseVector":
        return SparseVector({k: -v for k, v in self._c.items()}, self.space)

    def __sub__(self, other: "SparseVector") -> "SparseVector":
        return self + (-other)

    def scale(self, a: Number) -> "SparseVector":
        return SparseVector({k: a * v for k, v in self._c.items()}, self.space)

    __rmul__ = scale

    def inner(self, other: "SparseVector") -> Number:
        self._check(other)
        small, big = (self._c, other._c) if len(self._c) <= len(other._c) else (other._c, self._c)
        return sum((v * big[k] for k, v in small.items() if k in big), 0)

    def norm_sq(self) -> Number:
        return sum((v * v for v in self._c.values()), 0)

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())

    def direct_sum(self, other: "SparseVector", tags=(0, 1), space: str | None = None) -> "SparseVector":
        """Embed both vectors into a tagged disjoint union of their key sets."""
        out = {(tags[0], k): v for k, v in self._c.items()}
        out.update({(tags[1], k): v for k, v in other._c.items()})
        return SparseVector(out, space or f"{self.space}+{other.space}")

    def map_keys(self, fn: Callable[[Hashable], Hashable], space: str | None = None) -> "SparseVector":
        return SparseVector({fn(k): v for k, v in self._c.items()}, space or self.space)

    def to_text(self) -> str:
        """One ``key<TAB>value`` line per coordinate, keys in repr order."""
        lines = [f"# space={self.space}"]
        for k in sorted(self._c, key=repr):
            lines.append(f"{k!r}\t{self._c[k]!r}")
        return "\n".join(lines) + "\n"

    def __repr__(self) -> str:
        return f"SparseVector({self._c!r}, space={self.space!r})"


def inner(u: SparseVector, v: SparseVector) -> Number:
    return u.inner(v)


def distance(u: SparseVector, v: SparseVector) -> float:
    return math.sqrt(max(0.0, float((u - v).norm_sq())))


# ---------------------------------------------------------------------------
# Exp(zeta) = 1 + zeta + zeta^{(x)2}/sqrt(2!) + ...


def exp_inner(z1: SparseVector, z2: SparseVector) -> float:
    return math.exp(float(z1.inner(z2)))


def _sym_count(dim: int, order: int) -> int:
    return math.comb(dim + order - 1, order)


def truncated_exp(zeta: SparseVector, N: int) -> SparseVector:
    """Orders 0..N of Exp(zeta) in an orthonormal basis of symmetric tensors.

    The basis vector for the multiset ``M`` with multiplicities ``c`` is the
    normalized symmetrization of ``e_M``; the coefficient of
    ``zeta^{(x)k}/sqrt(k!)`` on it is ``prod zeta^c / sqrt(prod c!)``.
    """
    if N < 0:
        raise ConfigurationError("truncation order must be nonnegative")
    keys = sorted(zeta.support(), key=repr)
    total = sum(_sym_count(len(keys), k) for k in range(N + 1)) if keys else 1
    if total > CAPS.exp_entries:
        raise ConfigurationError(f"truncation too deep: {total} tensor entries")
    coeffs: dict = {(0, ()): 1.0}
    vals = [float(zeta[k]) for k in keys]
    for k in range(1, N + 1):
        for combo in combinations_with_replacement(range(len(keys)), k):
            prod = 1.0
            denom = 1
            run = 1
            for j, idx in enumerate(combo):
                prod *= vals[idx]
                if j and combo[j - 1] == idx:
                    run += 1
                    denom *= run
                else:
                    run = 1
            coeffs[(k, tuple(keys[i] for i in combo))] = prod / math.sqrt(denom)
    return SparseVector(coeffs, f"exp[{zeta.space}]")


def exp_partial_sum(s: float, N: int) -> float:
    return math.fsum(s**k / math.factorial(k) for k in range(N + 1))


# ---------------------------------------------------------------------------
# kernel families xi_x with <xi_x, xi_y> = exp(-t ||f(x) - f(y)||^2)


def choose_t(eps_bar: float, rho_plus_at_R: float) -> float:
    """Scale making ||xi_x - xi_y|| <= eps_bar whenever ||f(x) - f(y)|| <= rho_plus_at_R."""
    if not (eps_bar > 0):
        raise ConfigurationError("eps_bar must be positive")
    if eps_bar >= math.sqrt(2):
        raise ConfigurationError("eps_bar must be below sqrt(2) (logarithm of a nonpositive number)")
    if not (rho_plus_at_R > 0):
        raise ConfigurationError("rho_plus must be positive")
    return -math.log1p(-0.5 * eps_bar * eps_bar) / (rho_plus_at_R * rho_plus_at_R)


class KernelUnitFamily:
    """Unit vectors known only through their Gram kernel.

    ``sqdist(x, y)`` returns ``||f(x) - f(y)||^2`` for the underlying map f.
    """

    def __init__(self, sqdist: Callable[[Any, Any], float], t: float):
        if not t > 0:
            raise ConfigurationError("kernel scale t must be positive")
        self.sqdist = sqdist
        self.t = t

    @classmethod
    def from_vectors(cls, f: Callable[[Any], SparseVector], t: float) -> "KernelUnitFamily":
        return cls(lambda x, y: float((f(x) - f(y)).norm_sq()), t)

    def inner(self, x, y) -> float:
        if x == y:
            return 1.0
        return math.exp(-self.t * self.sqdist(x, y))

    def distance(self, x, y) -> float:
        return xi_distance(self.inner(x, y))

    def materialize(self, f: Callable[[Any], SparseVector], x, N: int) -> SparseVector:
        """Truncated explicit xi_x; for tests only."""
        z = f(x)
        scaled = z.scale(math.sqrt(2 * self.t))
        return truncated_exp(scaled, N).scale(math.exp(-self.t * float(z.norm_sq())))


def xi_inner(fam: KernelUnitFamily, x, y) -> float:
    return fam.inner(x, y)


def xi_distance(inner_value: float) -> float:
    return math.sqrt(max(0.0, 2.0 - 2.0 * inner_value))
