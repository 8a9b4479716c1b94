"""Free products, amalgams over finite subgroups and HNN-extensions.

Elements are canonical normal forms, so Python equality is group equality:

* :class:`FreeProduct` -- reduced alternating words ``((factor, g), ...)``.
* :class:`AmalgamatedProduct` -- ``(letters, f)`` where the letters are
  nonidentity left-coset representatives and ``f`` lies in the amalgamated
  subgroup (stored as an element of the first factor).
* :class:`HNNExtension` -- ``(syllables, h)`` where ``syllables`` is the
  tuple ``((gamma_1, i_1), ..., (gamma_k, i_k))`` of the Britton normal
  form and ``h = alpha_{k+1} f`` is the trailing base-group element.

The vertex ``gH`` of the Bass-Serre tree is identified with the syllable
tuple of ``g``; the section ``G/H -> G`` maps it back to ``(syllables, 1)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Any, Iterable, Sequence

from .errors import ConfigurationError, PreconditionError
from .groups import Element, Group, Integers, group_from_spec

# ---------------------------------------------------------------------------
# free products


@dataclass(frozen=True)
class CommonPartDecomposition:
    """x = h g_x x_tail and y = h g_y y_tail with g_x, g_y in one factor."""

    h: tuple
    factor: int
    g_x: Element
    g_y: Element
    x_tail: tuple
    y_tail: tuple


class FreeProduct(Group):
    """G1 * G2 over the generating set S1 u S2."""

    identity = ()

    def __init__(self, first: Group, second: Group, radius_cap: int | None = None):
        self.factors = (first, second)
        self.name = f"{first.name}*{second.name}"
        gens = [((1, s),) for s in first.generators] + [((2, s),) for s in second.generators]
        super().__init__(gens, radius_cap)

    def factor(self, i: int) -> Group:
        return self.factors[i - 1]

    def _push(self, out: list, letter: tuple) -> None:
        i, g = letter
        if out and out[-1][0] == i:
            G = self.factors[i - 1]
            merged = G.mul(out[-1][1], g)
            out.pop()
            if merged != G.identity:
                out.append((i, merged))
        elif g != self.factors[i - 1].identity:
            out.append(letter)

    def mul(self, a: tuple, b: tuple) -> tuple:
        if not a:
            return b
        if not b:
            return a
        out = list(a)
        for j, letter in enumerate(b):
            if out and out[-1][0] == letter[0]:
                G = self.factors[letter[0] - 1]
                merged = G.mul(out[-1][1], letter[1])
                out.pop()
                if merged != G.identity:
                    out.append((letter[0], merged))
                    out.extend(b[j + 1 :])
                    break
            else:
                out.extend(b[j:])
                break
        return tuple(out)

    def inv(self, a: tuple) -> tuple:
        return tuple((i, self.factors[i - 1].inv(g)) for i, g in reversed(a))

    def sort_key(self, a: tuple):
        return (len(a), tuple((i, self.factors[i - 1].sort_key(g)) for i, g in a))

    def is_finite(self) -> bool:
        return False

    def closed_length(self, a: tuple) -> int:
        return sum(self.factors[i - 1].length(g) for i, g in a)

    def format(self, a: tuple) -> str:
        if not a:
            return "e"
        return ".".join(f"{i}:{self.factors[i - 1].format(g)}" for i, g in a)

    def parse(self, text: str) -> tuple:
        text = text.strip()
        if text in ("e", ""):
            return ()
        letters = []
        for tok in _split_tokens(text):
            i, _, body = tok.partition(":")
            if i not in ("1", "2"):
                raise ValueError(f"bad letter {tok!r}")
            letters.append((int(i), self.factors[int(i) - 1].parse(body)))
        return reduce_free_product(self, letters)

    def to_spec(self) -> dict:
        return {"kind": "free_product", "factors": [f.to_spec() for f in self.factors]}


def _split_tokens(text: str) -> list[str]:
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "." and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return [t for t in out if t]


def reduce_free_product(G: FreeProduct, letters: Iterable[tuple[int, Element]]) -> tuple:
    """Merge adjacent same-factor letters and drop identities, to a fixpoint."""
    out: list = []
    for letter in letters:
        if not (isinstance(letter, tuple) and len(letter) == 2 and letter[0] in (1, 2)):
            raise ValueError(f"bad letter {letter!r}")
        G._push(out, letter)
    return tuple(out)


def common_part(G: FreeProduct, x: tuple, y: tuple) -> CommonPartDecomposition:
    """Decompose two reduced words around their longest common prefix.

    When the letters following the common part come from different factors
    (or one word ends there) the missing side is the identity of the other
    side's factor and the displaced letter moves to the tail.
    """
    n = 0
    while n < len(x) and n < len(y) and x[n] == y[n]:
        n += 1
    h = x[:n]
    xr, yr = x[n:], y[n:]
    if not xr and not yr:
        return CommonPartDecomposition(h, 1, G.factors[0].identity, G.factors[0].identity, (), ())
    if xr and (not yr or yr[0][0] != xr[0][0]):
        i = xr[0][0]
        return CommonPartDecomposition(h, i, xr[0][1], G.factor(i).identity, xr[1:], yr)
    i = yr[0][0]
    if not xr:
        return CommonPartDecomposition(h, i, G.factor(i).identity, yr[0][1], (), yr[1:])
    return CommonPartDecomposition(h, i, xr[0][1], yr[0][1], xr[1:], yr[1:])


def fp_distance(G: FreeProduct, x: tuple, y: tuple) -> int:
    """Word distance from the common-part decomposition, summing factor lengths."""
    cp = common_part(G, x, y)
    Gi = G.factor(cp.factor)
    total = Gi.distance(cp.g_x, cp.g_y)
    for i, g in cp.x_tail:
        total += G.factor(i).length(g)
    for i, g in cp.y_tail:
        total += G.factor(i).length(g)
    return total


# ---------------------------------------------------------------------------
# amalgamated products over a finite subgroup


@dataclass(frozen=True)
class AmalgamNormalForm:
    """x = alpha_1 beta_1 ... alpha_k beta_k f with identities allowed only at the ends."""

    alphas: tuple
    betas: tuple
    f: Element

    @property
    def k(self) -> int:
        return len(self.alphas)


class AmalgamatedProduct(Group):
    """G1 *_F G2 for a finite F given inside G1 together with its image in G2."""

    def __init__(
        self,
        first: Group,
        second: Group,
        subgroup: Iterable[Element],
        embedding: dict,
        radius_cap: int | None = None,
    ):
        self.factors = (first, second)
        self.name = f"{first.name}*_F{second.name}"
        F1 = tuple(sorted(set(subgroup) | {first.identity}, key=first.sort_key))
        f1set = set(F1)
        phi = dict(embedding)
        phi.setdefault(first.identity, second.identity)
        if set(phi) != f1set:
            raise ConfigurationError("embedding must be defined on exactly the subgroup elements")
        for a in F1:
            for b in F1:
                ab = first.mul(a, b)
                if ab not in f1set:
                    raise ConfigurationError("amalgamated elements are not closed under multiplication")
                if phi[ab] != second.mul(phi[a], phi[b]):
                    raise ConfigurationError("images of F in the two factors disagree (not a homomorphism)")
        if len(set(phi.values())) != len(F1):
            raise ConfigurationError("embedding of F into the second factor is not injective")
        if phi[first.identity] != second.identity:
            raise ConfigurationError("embedding must map identity to identity")
        self.F = F1
        self._phi = phi
        self._phi_inv = {v: k for k, v in phi.items()}
        self._sub = (f1set, set(phi.values()))
        self.identity = ((), first.identity)
        self._split_cache: dict = {}
        gens = [self._from_letter(1, s) for s in first.generators]
        gens += [self._from_letter(2, s) for s in second.generators]
        super().__init__(gens, radius_cap)

    @property
    def trivial_F(self) -> bool:
        return len(self.F) == 1

    def to_factor(self, i: int, f: Element) -> Element:
        return f if i == 1 else self._phi[f]

    def from_factor(self, i: int, f: Element) -> Element:
        return f if i == 1 else self._phi_inv[f]

    def split(self, i: int, g: Element) -> tuple[Element, Element]:
        """g = rep * f with rep the canonical representative of gF in factor i."""
        key = (i, g)
        hit = self._split_cache.get(key)
        if hit is not None:
            return hit
        G = self.factors[i - 1]
        sub = [self.to_factor(i, f) for f in self.F]
        rep = min((G.mul(g, c) for c in sub), key=lambda y: (G.length(y), G.sort_key(y)))
        f = G.mul(G.inv(rep), g)
        out = (rep, self.from_factor(i, f))
        self._split_cache[key] = out
        return out

    def _push(self, letters: list, carry: Element, i: int, c: Element) -> Element:
        G = self.factors[i - 1]
        u = G.mul(self.to_factor(i, carry), c)
        if letters and letters[-1][0] == i:
            u = G.mul(letters.pop()[1], u)
        rep, f = self.split(i, u)
        if rep != G.identity:
            letters.append((i, rep))
        return f

    def _from_letter(self, i: int, g: Element):
        letters: list = []
        f = self._push(letters, self.factors[0].identity, i, g)
        return (tuple(letters), f)

    def from_word(self, word: Iterable[tuple[int, Element]]):
        letters: list = []
        carry = self.factors[0].identity
        for i, g in word:
            if i not in (1, 2):
                raise ValueError(f"bad letter {(i, g)!r}")
            carry = self._push(letters, carry, i, g)
        return (tuple(letters), carry)

    def mul(self, a, b):
        letters = list(a[0])
        carry = a[1]
        for i, c in b[0]:
            carry = self._push(letters, carry, i, c)
        return (tuple(letters), self.factors[0].mul(carry, b[1]))

    def inv(self, a):
        G1 = self.factors[0]
        letters: list = []
        carry = G1.inv(a[1])
        for i, c in reversed(a[0]):
            carry = self._push(letters, carry, i, self.factors[i - 1].inv(c))
        return (tuple(letters), carry)

    def sort_key(self, a):
        return (
            len(a[0]),
            tuple((i, self.factors[i - 1].sort_key(g)) for i, g in a[0]),
            self.factors[0].sort_key(a[1]),
        )

    def closed_length(self, a) -> int | None:
        if self.trivial_F:
            return sum(self.factors[i - 1].length(g) for i, g in a[0])
        return None

    def format(self, a) -> str:
        toks = [f"{i}:{self.factors[i - 1].format(g)}" for i, g in a[0]]
        if a[1] != self.factors[0].identity:
            toks.append(f"1:{self.factors[0].format(a[1])}")
        return ".".join(toks) if toks else "e"

    def parse(self, text: str):
        text = text.strip()
        if text in ("e", ""):
            return self.identity
        word = []
        for tok in _split_tokens(text):
            i, _, body = tok.partition(":")
            if i not in ("1", "2"):
                raise ValueError(f"bad letter {tok!r}")
            word.append((int(i), self.factors[int(i) - 1].parse(body)))
        return self.from_word(word)

    def to_spec(self) -> dict:
        G1, G2 = self.factors
        return {
            "kind": "amalgam",
            "factors": [G1.to_spec(), G2.to_spec()],
            "subgroup": [G1.format(f) for f in self.F if f != G1.identity],
            "embedding": {G1.format(f): G2.format(self._phi[f]) for f in self.F if f != G1.identity},
        }


def _letters_and_f(G: Group, g) -> tuple[tuple, Element]:
    if isinstance(G, AmalgamatedProduct):
        return g[0], g[1]
    if isinstance(G, FreeProduct):
        return g, None
    raise PreconditionError(f"{G.name} is not a free or amalgamated product")


def amalgam_normal_form(G: Group, g) -> AmalgamNormalForm:
    """Alternating representative blocks alpha_i (factor 1), beta_i (factor 2), then f."""
    letters, f = _letters_and_f(G, g)
    G1, G2 = G.factors
    if f is None:
        f = G1.identity
    alphas: list = []
    betas: list = []
    seq = list(letters)
    if seq and seq[0][0] == 2:
        seq.insert(0, (1, G1.identity))
    if len(seq) % 2:
        seq.append((2, G2.identity))
    for j in range(0, len(seq), 2):
        alphas.append(seq[j][1])
        betas.append(seq[j + 1][1])
    return AmalgamNormalForm(tuple(alphas), tuple(betas), f)


def recompose_amalgam(G: Group, nf: AmalgamNormalForm):
    word = []
    for a, b in zip(nf.alphas, nf.betas):
        word.append((1, a))
        word.append((2, b))
    if isinstance(G, AmalgamatedProduct):
        return G.mul(G.from_word(word), ((), nf.f))
    return reduce_free_product(G, word)


# ---------------------------------------------------------------------------
# HNN-extensions


class CosetApparatus:
    """Subgroup F <= H, monomorphism theta: F -> H and coset bookkeeping.

    ``split_F(h)`` returns ``(gamma, f)`` with ``h = gamma f``, ``gamma`` the
    canonical left-coset representative (minimal length, then payload order).
    ``split_TF`` does the same for theta(F).
    """

    H: Group

    def in_F(self, h) -> bool:
        raise NotImplementedError

    def in_TF(self, h) -> bool:
        raise NotImplementedError

    def theta(self, f):
        raise NotImplementedError

    def theta_inv(self, c):
        raise NotImplementedError

    def split_F(self, h):
        raise NotImplementedError

    def split_TF(self, h):
        raise NotImplementedError

    def right_reps(self) -> tuple[list, list]:
        """Canonical right-coset representatives of F and of theta(F) in H."""
        raise NotImplementedError

    def vanishing_subgroup(self) -> list | None:
        """Elements of A = <F u theta(F)> when finite, else None."""
        return None

    def to_spec(self) -> dict:
        raise NotImplementedError


def _canonical(H: Group, items: Iterable):
    return min(items, key=lambda y: (H.length(y), H.sort_key(y)))


class FiniteCosetApparatus(CosetApparatus):
    """Finite F with an explicit theta table; H may be finite or infinite."""

    def __init__(self, H: Group, subgroup: Iterable, theta: dict):
        self.H = H
        F = set(subgroup) | {H.identity}
        th = dict(theta)
        th.setdefault(H.identity, H.identity)
        if set(th) != F:
            raise ConfigurationError("theta must be defined on exactly the subgroup elements")
        for a in F:
            for b in F:
                if H.mul(a, b) not in F:
                    raise ConfigurationError("F is not closed under multiplication")
                if th[H.mul(a, b)] != H.mul(th[a], th[b]):
                    raise ConfigurationError("theta is not a homomorphism")
        if len(set(th.values())) != len(F):
            raise ConfigurationError("theta is not injective")
        self.F = sorted(F, key=H.sort_key)
        self.TF = sorted(set(th.values()), key=H.sort_key)
        self._theta = th
        self._theta_inv = {v: k for k, v in th.items()}
        self._fset = set(self.F)
        self._tfset = set(self.TF)
        self._cache: dict = {}

    def in_F(self, h) -> bool:
        return h in self._fset

    def in_TF(self, h) -> bool:
        return h in self._tfset

    def theta(self, f):
        try:
            return self._theta[f]
        except KeyError:
            raise ConfigurationError(f"theta undefined on {self.H.format(f)}") from None

    def theta_inv(self, c):
        try:
            return self._theta_inv[c]
        except KeyError:
            raise ConfigurationError(f"theta^-1 undefined on {self.H.format(c)}") from None

    def _split(self, h, sub: list, tag: str):
        key = (tag, h)
        hit = self._cache.get(key)
        if hit is None:
            H = self.H
            gamma = _canonical(H, (H.mul(h, c) for c in sub))
            hit = (gamma, H.mul(H.inv(gamma), h))
            self._cache[key] = hit
        return hit

    def split_F(self, h):
        return self._split(h, self.F, "F")

    def split_TF(self, h):
        return self._split(h, self.TF, "TF")

    def right_reps(self) -> tuple[list, list]:
        H = self.H
        if not H.is_finite():
            raise ConfigurationError("right-coset tables need a finite base group")
        out = []
        for sub in (self.F, self.TF):
            reps, seen = [], set()
            for h in H.elements():
                if h in seen:
                    continue
                coset = [H.mul(c, h) for c in sub]
                seen.update(coset)
                reps.append(_canonical(H, coset))
            out.append(sorted(reps, key=lambda y: (H.length(y), H.sort_key(y))))
        return out[0], out[1]

    def vanishing_subgroup(self) -> list | None:
        H = self.H
        gens = set(self.F) | set(self.TF)
        A = {H.identity}
        frontier = [H.identity]
        while frontier:
            nxt = []
            for a in frontier:
                for g in gens:
                    b = H.mul(a, g)
                    if b not in A:
                        A.add(b)
                        nxt.append(b)
                        if len(A) > 100_000:
                            return None
            frontier = nxt
        return sorted(A, key=H.sort_key)

    def to_spec(self) -> dict:
        H = self.H
        return {
            "subgroup": [H.format(f) for f in self.F if f != H.identity],
            "theta": {H.format(f): H.format(self._theta[f]) for f in self.F if f != H.identity},
        }


class IntegerCosetApparatus(CosetApparatus):
    """H = Z, F = pZ, theta(p k) = q k; gives BS(p, q) = HNN(Z, pZ, theta)."""

    def __init__(self, H: Integers, p: int, q: int):
        if p == 0 or q == 0:
            raise ConfigurationError("subgroup generators must be nonzero")
        self.H = H
        self.p = abs(p)
        self.q = q if p > 0 else -q

    @staticmethod
    def _rep(n: int, m: int) -> int:
        r = n % m
        # minimal |r|, positive preferred on ties
        if r > m - r:
            r -= m
        return r

    def in_F(self, h: int) -> bool:
        return h % self.p == 0

    def in_TF(self, h: int) -> bool:
        return h % abs(self.q) == 0

    def theta(self, f: int) -> int:
        if f % self.p:
            raise ConfigurationError(f"theta undefined on a^{f}")
        return f // self.p * self.q

    def theta_inv(self, c: int) -> int:
        if c % abs(self.q):
            raise ConfigurationError(f"theta^-1 undefined on a^{c}")
        return c // self.q * self.p

    def split_F(self, h: int):
        g = self._rep(h, self.p)
        return g, h - g

    def split_TF(self, h: int):
        g = self._rep(h, abs(self.q))
        return g, h - g

    def right_reps(self) -> tuple[list, list]:
        H = self.H
        reps = []
        for m in (self.p, abs(self.q)):
            rs = sorted({self._rep(n, m) for n in range(m)}, key=lambda y: (H.length(y), H.sort_key(y)))
            reps.append(rs)
        return reps[0], reps[1]

    def vanishing_subgroup(self) -> None:
        return None

    def to_spec(self) -> dict:
        return {"subgroup_generator": self.p, "theta_generator": self.q}


@dataclass(frozen=True)
class BrittonForm:
    """g = gamma_1 t^{i_1} ... gamma_k t^{i_k} alpha f."""

    gammas: tuple
    exponents: tuple
    alpha: Element
    f: Element

    @property
    def k(self) -> int:
        return len(self.gammas)


class HNNExtension(Group):
    """HNN(H, F, theta) = <H, t | t^-1 f t = theta(f)> over S_H u {t, t^-1}."""

    def __init__(self, apparatus: CosetApparatus, radius_cap: int | None = None, name: str | None = None):
        self.app = apparatus
        self.H = apparatus.H
        self.name = name or f"HNN({self.H.name})"
        e = self.H.identity
        self.identity = ((), e)
        self.t = (((e, 1),), e)
        self.t_inv = (((e, -1),), e)
        gens = [((), s) for s in self.H.generators] + [self.t]
        super().__init__(gens, radius_cap)

    # stack rewriting: pinch when possible, else push a new syllable
    def _push_t(self, syl: list, h, eps: int):
        app, H = self.app, self.H
        if eps == 1:
            if syl and syl[-1][1] == -1 and app.in_F(h):
                gp = syl.pop()[0]
                return H.mul(gp, app.theta(h))
            gamma, f = app.split_F(h)
            syl.append((gamma, 1))
            return app.theta(f)
        if syl and syl[-1][1] == 1 and app.in_TF(h):
            gp = syl.pop()[0]
            return H.mul(gp, app.theta_inv(h))
        gamma, c = app.split_TF(h)
        syl.append((gamma, -1))
        return app.theta_inv(c)

    def from_word(self, word: Iterable) -> tuple:
        """Multiply out a word whose letters are ``('h', element)`` or ``('t', +-1)``."""
        syl: list = []
        h = self.H.identity
        for kind, val in word:
            if kind == "h":
                h = self.H.mul(h, val)
            elif kind == "t" and val in (1, -1):
                h = self._push_t(syl, h, val)
            else:
                raise ValueError(f"bad letter {(kind, val)!r}")
        return (tuple(syl), h)

    def mul(self, a, b):
        H = self.H
        if not b[0]:
            return (a[0], H.mul(a[1], b[1]))
        syl = list(a[0])
        h = a[1]
        for gamma, i in b[0]:
            h = self._push_t(syl, H.mul(h, gamma), i)
        return (tuple(syl), H.mul(h, b[1]))

    def inv(self, a):
        H = self.H
        syl: list = []
        h = H.inv(a[1])
        for gamma, i in reversed(a[0]):
            h = H.mul(self._push_t(syl, h, -i), H.inv(gamma))
        return (tuple(syl), h)

    def sort_key(self, a):
        H = self.H
        return (len(a[0]), tuple((H.sort_key(g), -i) for g, i in a[0]), H.sort_key(a[1]))

    def format(self, a) -> str:
        H = self.H
        toks = []
        for g, i in a[0]:
            if g != H.identity:
                toks.append(H.format(g))
            toks.append("t" if i == 1 else "T")
        if a[1] != H.identity:
            toks.append(H.format(a[1]))
        return ".".join(toks) if toks else "e"

    def parse(self, text: str):
        text = text.strip()
        if text in ("e", ""):
            return self.identity
        word = []
        for tok in _split_tokens(text):
            if tok in ("t", "T"):
                word.append(("t", 1 if tok == "t" else -1))
            else:
                word.append(("h", self.H.parse(tok)))
        return self.from_word(word)

    def to_spec(self) -> dict:
        spec = {"kind": "hnn", "base": self.H.to_spec()}
        spec.update(self.app.to_spec())
        return spec

    # -- Bass-Serre tree ----------------------------------------------------
    def embed_base(self, h):
        return ((), h)

    def in_base(self, g) -> bool:
        return not g[0]

    def vertex(self, g) -> tuple:
        return g[0]

    def section(self, v: tuple):
        return (v, self.H.identity)

    def translate_vertex(self, g, v: tuple) -> tuple:
        """The vertex g.v."""
        return self.mul(g, self.section(v))[0]


def britton_normal_form(G: HNNExtension, g) -> BrittonForm:
    syl, h = g
    alpha, f = G.app.split_F(h)
    return BrittonForm(tuple(s[0] for s in syl), tuple(s[1] for s in syl), alpha, f)


def recompose_britton(G: HNNExtension, nf: BrittonForm):
    word = []
    for g, i in zip(nf.gammas, nf.exponents):
        word += [("h", g), ("t", i)]
    word += [("h", nf.alpha), ("h", nf.f)]
    return G.from_word(word)


def hnn_length(G: HNNExtension, g) -> int:
    """Word length over S_H u {t, t^-1}; equality decided by Britton forms."""
    return G.bfs_length(g)


def tree_distance(u: tuple, v: tuple) -> int:
    """Edge count of the tree path between two vertices (syllable tuples)."""
    n = 0
    m = min(len(u), len(v))
    while n < m and u[n] == v[n]:
        n += 1
    return len(u) + len(v) - 2 * n


def tree_path(u: tuple, v: tuple) -> list[tuple]:
    n = 0
    m = min(len(u), len(v))
    while n < m and u[n] == v[n]:
        n += 1
    down = [u[:j] for j in range(len(u), n - 1, -1)]
    up = [v[:j] for j in range(n + 1, len(v) + 1)]
    return down + up


def _ray_prefix(v: tuple, identity) -> int:
    j = 0
    while j < len(v) and v[j] == (identity, 1):
        j += 1
    return j


def alpha_step(G: HNNExtension, v: tuple) -> tuple:
    """One edge toward the ray H, tH, t^2H, ...; along the ray, away from H."""
    e = G.H.identity
    if _ray_prefix(v, e) == len(v):
        return v + ((e, 1),)
    return v[:-1]


def alpha_edge_sign(G: HNNExtension, v: tuple) -> int:
    """eps with y t^eps in alpha(v) for y in the edge space Y_v."""
    e = G.H.identity
    if _ray_prefix(v, e) == len(v):
        return 1
    return -v[-1][1]


def step_sign(u: tuple, w: tuple) -> int:
    """eps such that x t^eps crosses from vertex u into the adjacent vertex w."""
    if len(w) == len(u) + 1 and w[:-1] == u:
        return w[-1][1]
    if len(u) == len(w) + 1 and u[:-1] == w:
        return -u[-1][1]
    raise PreconditionError("vertices are not adjacent")


def distance_to_ray(G: HNNExtension, v: tuple) -> int:
    return len(v) - _ray_prefix(v, G.H.identity)


def meet_exponents(G: HNNExtension, u: tuple, v: tuple) -> tuple[int, int]:
    """The pair (k, l) with alpha^k(u) = alpha^l(v) and d_T(u, v) = k + l."""
    e = G.H.identity
    ju, jv = _ray_prefix(u, e), _ray_prefix(v, e)
    du, dv = len(u) - ju, len(v) - jv
    if ju == jv:
        n = 0
        m = min(len(u), len(v))
        while n < m and u[n] == v[n]:
            n += 1
        return len(u) - n, len(v) - n
    if ju < jv:
        return du + (jv - ju), dv
    return du, dv + (ju - jv)


def compute_Z(app: CosetApparatus) -> int:
    """Smallest integer exceeding every chosen right-coset representative length."""
    reps_F, reps_TF = app.right_reps()
    if not reps_F or not reps_TF:
        raise ConfigurationError("incomplete coset table")
    H = app.H
    return max(H.length(r) for r in reps_F + reps_TF) + 1


# ---------------------------------------------------------------------------
# shortest blocklength


def shortest_blocklength(G: Group, g) -> int:
    """Minimal total length over words with the normal form's block pattern.

    Amalgams: blocks gamma_1 delta_1 ... gamma_k delta_k (factor lengths).
    HNN: blocks h_1 t^{i_1} ... h_k t^{i_k} h_{k+1}; each t letter counts 1.
    The search runs over the finite carries F (or A for HNN).
    """
    if isinstance(G, HNNExtension):
        return _hnn_blocklength(G, g)
    if isinstance(G, (AmalgamatedProduct, FreeProduct)):
        return _amalgam_blocklength(G, g)
    raise PreconditionError(f"{G.name} has no block structure")


def _amalgam_blocklength(G, g) -> int:
    nf = amalgam_normal_form(G, g)
    G1, G2 = G.factors
    if isinstance(G, FreeProduct):
        F = [G1.identity]
        to2 = {G1.identity: G2.identity}
    else:
        F = list(G.F)
        to2 = G._phi
    blocks = []
    for a, b in zip(nf.alphas, nf.betas):
        blocks += [(1, a), (2, b)]
    if not blocks:
        if nf.f == G1.identity:
            return 0
        blocks = [(1, G1.identity), (2, G2.identity)]

    def conv(i, f):
        return f if i == 1 else to2[f]

    # best[f] = min cost of blocks so far ending with carry f
    best = {G1.identity: 0}
    for j, (i, c) in enumerate(blocks):
        Gi = G.factors[i - 1]
        last = j == len(blocks) - 1
        nxt: dict = {}
        targets = [nf.f] if last else F
        for f_prev, cost in best.items():
            left = Gi.mul(Gi.inv(conv(i, f_prev)), c)
            for f in targets:
                val = cost + Gi.length(Gi.mul(left, conv(i, f)))
                if val < nxt.get(f, math.inf):
                    nxt[f] = val
        best = nxt
    return min(best.values())


def _hnn_blocklength(G: HNNExtension, g) -> int:
    app, H = G.app, G.H
    if not isinstance(app, FiniteCosetApparatus):
        raise PreconditionError("shortest blocklength needs a finite subgroup F")
    syl, h_end = g
    best = {H.identity: 0}  # carry d -> cost
    for gamma, i in syl:
        sub = app.F if i == 1 else app.TF
        nxt: dict = {}
        for d, cost in best.items():
            left = H.mul(H.inv(d), gamma)
            for c in sub:
                carry = app.theta(c) if i == 1 else app.theta_inv(c)
                val = cost + H.length(H.mul(left, c)) + 1
                if val < nxt.get(carry, math.inf):
                    nxt[carry] = val
        best = nxt
    return min(cost + H.length(H.mul(H.inv(d), h_end)) for d, cost in best.items())


# ---------------------------------------------------------------------------
# construction-spec documents


def construction_from_spec(spec: dict) -> Group:
    """Build a base group or a free product / amalgam / HNN from a spec dict."""
    kind = spec.get("kind")
    if kind == "free_product":
        f1, f2 = spec["factors"]
        return FreeProduct(construction_from_spec(f1), construction_from_spec(f2))
    if kind == "amalgam":
        f1, f2 = spec["factors"]
        G1, G2 = construction_from_spec(f1), construction_from_spec(f2)
        sub = [G1.parse(s) for s in spec.get("subgroup", [])]
        emb = {G1.parse(k): G2.parse(v) for k, v in spec.get("embedding", {}).items()}
        return AmalgamatedProduct(G1, G2, sub, emb)
    if kind == "hnn":
        H = construction_from_spec(spec["base"])
        if "subgroup_generator" in spec:
            if not isinstance(H, Integers):
                raise ConfigurationError("generator form of an HNN spec needs H = Z")
            app: CosetApparatus = IntegerCosetApparatus(
                H, int(spec["subgroup_generator"]), int(spec["theta_generator"])
            )
        else:
            sub = [H.parse(s) for s in spec.get("subgroup", [])]
            th = {H.parse(k): H.parse(v) for k, v in spec.get("theta", {}).items()}
            app = FiniteCosetApparatus(H, sub, th)
        return HNNExtension(app, name=spec.get("name"))
    return group_from_spec(spec)


def load_spec(path: str | Path) -> Group:
    with open(path, encoding="utf-8") as fh:
        return construction_from_spec(json.load(fh))


def dump_spec(G: Group) -> str:
    return json.dumps(G.to_spec(), indent=2, sort_keys=True) + "\n"


SPEC_DIR = Path(__file__).with_name("specs")


def shipped_specs() -> dict[str, Path]:
    return {p.stem: p for p in sorted(SPEC_DIR.glob("*.json"))}


def resolve_construction(name_or_path: str) -> Group:
    specs = shipped_specs()
    if name_or_path in specs:
        return load_spec(specs[name_or_path])
    p = Path(name_or_path)
    if p.exists():
        return load_spec(p)
    try:
        return construction_from_spec(json.loads(name_or_path))
    except (json.JSONDecodeError, AttributeError):
        raise ConfigurationError(
            f"unknown construction {name_or_path!r}; shipped: {', '.join(specs)}"
        ) from None
