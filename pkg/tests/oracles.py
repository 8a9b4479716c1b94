"""Independent reference implementations used to derive frozen test values.

Nothing here imports the package. Groups are modelled faithfully by integer
matrices, affine maps or explicit pinch reduction, and word lengths come from
a plain breadth-first search over the model.
"""

from __future__ import annotations

import itertools
import re
from collections import deque
from fractions import Fraction


# ---------------------------------------------------------------------------
# faithful models


class Model:
    """A group given by a multiplication on hashable values and named generators."""

    def __init__(self, identity, mul, inv, generators: dict):
        self.identity = identity
        self.mul = mul
        self.inv = inv
        self.generators = generators

    def symmetric_generators(self) -> list:
        out = []
        for g in self.generators.values():
            for h in (g, self.inv(g)):
                if h not in out:
                    out.append(h)
        return out

    def bfs(self, radius: int) -> dict:
        dist = {self.identity: 0}
        frontier = deque([self.identity])
        gens = self.symmetric_generators()
        while frontier:
            x = frontier.popleft()
            d = dist[x]
            if d == radius:
                continue
            for g in gens:
                y = self.mul(x, g)
                if y not in dist:
                    dist[y] = d + 1
                    frontier.append(y)
        return dist

    def power(self, g, k: int):
        if k < 0:
            g, k = self.inv(g), -k
        out = self.identity
        for _ in range(k):
            out = self.mul(out, g)
        return out


def _mat_mul(a, b):
    return (
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    )


def _mat_inv(a):
    # determinant one
    return (a[3], -a[1], -a[2], a[0])


def _projective(a):
    lead = next(v for v in a if v != 0)
    return a if lead > 0 else tuple(-v for v in a)


def sanov_free_group() -> Model:
    """Rank two free group inside SL(2, Z)."""
    return Model((1, 0, 0, 1), _mat_mul, _mat_inv, {"x": (1, 2, 0, 1), "y": (1, 0, 2, 1)})


def modular_group() -> Model:
    """PSL(2, Z), the free product of orders two and three."""
    mul = lambda a, b: _projective(_mat_mul(a, b))
    inv = lambda a: _projective(_mat_inv(a))
    return Model((1, 0, 0, 1), mul, inv, {"a": (0, -1, 1, 0), "b": _projective((0, -1, 1, 1))})


def _aff_mul(g, h):
    # x -> g(h(x)), maps stored as (multiplier, shift)
    return (g[0] * h[0], g[0] * h[1] + g[1])


def _aff_inv(g):
    m = 1 / Fraction(g[0]) if isinstance(g[0], Fraction) else Fraction(1, g[0])
    return (m, -m * g[1])


def infinite_dihedral() -> Model:
    one = Fraction(1)
    return Model((one, Fraction(0)), _aff_mul, _aff_inv, {"r": (-one, Fraction(0)), "s": (-one, one)})


def bs12_affine() -> Model:
    """<a, t | t^-1 a t = a^2> as x -> x + 1 and x -> x / 2."""
    one = Fraction(1)
    return Model((one, Fraction(0)), _aff_mul, _aff_inv, {"a": (one, one), "t": (Fraction(1, 2), Fraction(0))})


# ---------------------------------------------------------------------------
# reading formatted elements into a model

_POWER = re.compile(r"^([A-Za-z]+)(?:\^?(-?\d+))?$")


def parse_power(token: str) -> tuple[str, int]:
    m = _POWER.match(token)
    if not m:
        raise ValueError(token)
    return m.group(1), int(m.group(2)) if m.group(2) else 1


def free_product_image(model: Model, text: str, letters: dict):
    """letters maps (factor index, letter) to a model generator."""
    out = model.identity
    if text == "e":
        return out
    for token in text.split("."):
        factor, body = token.split(":")
        name, k = parse_power(body)
        out = model.mul(out, model.power(letters[(int(factor), name)], k))
    return out


def hnn_image(model: Model, text: str):
    out = model.identity
    if text == "e":
        return out
    for token in text.split("."):
        if token == "t":
            g = model.generators["t"]
        elif token == "T":
            g = model.inv(model.generators["t"])
        else:
            name, k = parse_power(token)
            g = model.power(model.generators[name], k)
        out = model.mul(out, g)
    return out


# ---------------------------------------------------------------------------
# word problem for HNN(Z2 x Z2, <u> -> <v>) by Britton pinches

U, V = (1, 0), (0, 1)


def _h_add(a, b):
    return ((a[0] + b[0]) % 2, (a[1] + b[1]) % 2)


def pinch_reduce(word: list) -> list:
    """Letters are ('h', (i, j)) or ('t', +-1); returns a pinch-free word."""
    out: list = []
    for letter in word:
        out.append(letter)
        changed = True
        while changed:
            changed = False
            # merge adjacent base letters
            if len(out) >= 2 and out[-1][0] == "h" and out[-2][0] == "h":
                h = _h_add(out[-2][1], out[-1][1])
                out[-2:] = [("h", h)]
                changed = True
            if out and out[-1] == ("h", (0, 0)):
                out.pop()
                changed = True
            # t^e t^-e
            if len(out) >= 2 and out[-1][0] == "t" and out[-2][0] == "t" and out[-1][1] == -out[-2][1]:
                del out[-2:]
                changed = True
            # t^-1 f t -> theta(f), t g t^-1 -> theta^-1(g)
            if len(out) >= 3 and out[-1][0] == "t" and out[-2][0] == "h" and out[-3][0] == "t":
                e1, h, e2 = out[-3][1], out[-2][1], out[-1][1]
                if e1 == -1 and e2 == 1 and h == U:
                    out[-3:] = [("h", V)]
                    changed = True
                elif e1 == 1 and e2 == -1 and h == V:
                    out[-3:] = [("h", U)]
                    changed = True
    return out


def is_identity(word: list) -> bool:
    return not pinch_reduce(word)


def invert_word(word: list) -> list:
    return [("t", -x[1]) if x[0] == "t" else x for x in reversed(word)]


HNN_LETTERS = [("h", U), ("h", V), ("t", 1), ("t", -1)]


def hnn_ball_sizes(radius: int) -> list[int]:
    """Distinct elements among words of length <= r, decided pairwise by the word problem."""
    reps: list = []
    sizes = []
    for r in range(radius + 1):
        for w in itertools.product(HNN_LETTERS, repeat=r):
            w = list(w)
            if not any(is_identity(invert_word(x) + w) for x in reps):
                reps.append(w)
        sizes.append(len(reps))
    return sizes


def hnn_word_from_text(text: str) -> list:
    if text == "e":
        return []
    out = []
    names = {"u": U, "v": V}
    for token in text.split("."):
        if token == "t":
            out.append(("t", 1))
        elif token == "T":
            out.append(("t", -1))
        else:
            a, b = token.strip("()").split(",")
            h = (0, 0)
            for part in (a, b):
                if part != "e":
                    h = _h_add(h, names[part])
            out.append(("h", h))
    return out


# ---------------------------------------------------------------------------
# conditionally negative definite forms, computed directly


def quadratic_form(values, coeffs) -> float:
    """sum_ij c_i c_j psi(x_j^-1 x_i) given the matrix of psi values."""
    n = len(coeffs)
    return sum(coeffs[i] * coeffs[j] * values[i][j] for i in range(n) for j in range(n))


# ---------------------------------------------------------------------------
# schedule thresholds, solved in u = ln m


def schedule_thresholds(p: float, Z: int, dps: int = 80) -> dict:
    """Smallest integers m from which m^p >= (Z+2) ln m, and 8 (ln m + 1)^2 <= m^(4p).

    The second inequality is the squared form of sqrt(2 / m^(1+6p)) <= m^-(1/2+p) / (2 (ln m + 1)).
    Each is a single crossing in u = ln m past its last root, found by bisection.
    """
    import mpmath

    with mpmath.workdps(dps):
        P = mpmath.mpf(repr(p))
        gaps = {
            "n": lambda u: mpmath.exp(P * u) - (Z + 2) * u,
            "s": lambda u: mpmath.exp(4 * P * u) - 8 * (u + 1) ** 2,
        }
        out = {}
        for name, gap in gaps.items():
            hi = mpmath.mpf(1)
            while gap(hi) < 0 or gap(hi * 2) < 0 or hi < 10:
                hi *= 2
            # the last sign change lies below hi; walk down to a negative point
            lo = hi
            while gap(lo) >= 0 and lo > 0.5:
                lo /= 2
            for _ in range(400):
                mid = (lo + hi) / 2
                if gap(mid) >= 0:
                    hi = mid
                else:
                    lo = mid
            m = int(mpmath.floor(mpmath.exp(hi)))
            while gap(mpmath.log(m)) < 0:
                m += 1
            while m > 2 and gap(mpmath.log(m - 1)) >= 0:
                m -= 1
            out[name] = m
        out["both"] = max(out["n"], out["s"])
    return out
