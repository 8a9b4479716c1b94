"""Chains climbing the Bass-Serre tree, averaged unit vectors along them,
their verification reports, and the asymptotic parameter schedule.

Every chain point ``x`` lives in the vertex space ``xH``.  The unit vector
attached to ``x`` is transported from a single family on H: writing
``x = sigma(v) h`` with ``sigma`` the canonical section, ``xi_x`` is the
base vector of ``h`` placed in the summand of ``v``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, asdict
from typing import Iterable, Sequence

import mpmath

from .constructions import (
    FiniteCosetApparatus,
    HNNExtension,
    alpha_edge_sign,
    alpha_step,
    compute_Z,
    distance_to_ray,
    meet_exponents,
    step_sign,
    tree_distance,
    tree_path,
)
from .config import TOL
from .embeddings import exactify_constant
from .errors import ConfigurationError, PreconditionError
from .hilbert import choose_t


@dataclass(frozen=True)
class ChainParams:
    R: float
    eps: float
    s: int
    n: int
    Z: int

    @property
    def eps_bar(self) -> float:
        return self.eps / (2 * (self.R + 1))

    @property
    def R_bar(self) -> float:
        return self.n + 2 * self.s * (self.Z + 1)

    def violations(self) -> list[str]:
        out = []
        if math.sqrt(2 / self.s) > self.eps_bar:
            out.append(f"sqrt(2/s) = {math.sqrt(2 / self.s):.6g} exceeds eps/(2(R+1)) = {self.eps_bar:.6g}")
        if self.n < (self.Z + 2) * self.R:
            out.append(f"n = {self.n} is below (Z+2)R = {(self.Z + 2) * self.R}")
        return out

    @classmethod
    def minimal(cls, R: float, eps: float, Z: int) -> "ChainParams":
        s = math.ceil(8 * (R + 1) ** 2 / eps**2)
        while math.sqrt(2 / s) > eps / (2 * (R + 1)):
            s += 1
        return cls(R, eps, s, math.ceil((Z + 2) * R), Z)


@dataclass(frozen=True)
class Chain:
    points: tuple
    nearest: tuple
    steps: tuple

    @property
    def s(self) -> int:
        return len(self.points)

    def window(self, start: int, s: int) -> "Chain":
        return Chain(self.points[start : start + s], self.nearest[start : start + s - 1], self.steps[start : start + s - 1])


class ChainSystem:
    """Deterministic chains and kernel-based eta vectors for one HNN-extension."""

    def __init__(self, G: HNNExtension, Z: int | None = None):
        self.G = G
        self.H = G.H
        self.Z = compute_Z(G.app) if Z is None else Z
        if self.H.is_finite():
            pool = [G.embed_base(h) for h in self.H.elements()]
        else:
            pool = [g for g in G.ball(max(self.Z - 1, 0)) if G.in_base(g)]
        self._candidates = sorted(pool, key=lambda g: (G.length(g), G.sort_key(g)))
        self._next: dict = {}
        self._chains: dict = {}
        self.base_t: float | None = None

    # -- chains --------------------------------------------------------------
    def next_point(self, x):
        hit = self._next.get(x)
        if hit is not None:
            return hit
        G = self.G
        v = G.vertex(x)
        w = alpha_step(G, v)
        eps = alpha_edge_sign(G, v)
        tt = G.t if eps == 1 else G.t_inv
        for h in self._candidates:
            y = G.mul(x, h)
            z = G.mul(y, tt)
            if G.vertex(z) == w:
                if G.length(h) >= self.Z:
                    raise AssertionError("nearest edge point lies beyond Z; coset table is wrong")
                hit = (y, z, G.length(G.mul(h, tt)))
                self._next[x] = hit
                return hit
        raise AssertionError("no edge point found within the search radius")

    def build_chain(self, x0, s: int) -> Chain:
        if s < 1:
            raise ConfigurationError("chain length must be positive")
        cached = self._chains.get(x0)
        if cached is not None and cached.s >= s:
            return cached.window(0, s)
        pts, near, steps = [x0], [], []
        x = x0
        for _ in range(s - 1):
            y, z, d = self.next_point(x)
            near.append(y)
            steps.append(d)
            pts.append(z)
            x = z
        chain = Chain(tuple(pts), tuple(near), tuple(steps))
        self._chains[x0] = chain
        return chain

    # -- unit vectors ----------------------------------------------------------
    def configure_family(self, params: ChainParams, t: float | None = None) -> float:
        """Kernel scale from the exactified Dirac embedding of H with the induced metric."""
        if t is None:
            G, H = self.G, self.H
            if not H.is_finite():
                raise PreconditionError("eta verification needs a finite base group")
            diam = max(G.length(G.embed_base(h)) for h in H.elements())
            Cbar = exactify_constant(1.0, float(diam), 1.0)
            t = choose_t(params.eps_bar, Cbar * params.R_bar)
        self.base_t = t
        return t

    def xi_inner(self, y, y2) -> float:
        """<xi_y, xi_y'>: zero across vertices, exp(-2t) for distinct points of one vertex."""
        if y[0] != y2[0]:
            return 0.0
        if y[1] == y2[1]:
            return 1.0
        return math.exp(-2.0 * self.base_t)

    def base_kernel(self, h, h2) -> float:
        return 1.0 if h == h2 else math.exp(-2.0 * self.base_t)

    def eta_inner(self, c1: Chain, c2: Chain) -> float:
        if c1.s != c2.s:
            raise ConfigurationError("eta vectors need chains of equal length")
        by_vertex = {p[0]: p for p in c2.points}
        total = 0.0
        for p in c1.points:
            q = by_vertex.get(p[0])
            if q is not None:
                total += self.xi_inner(p, q)
        return total / c1.s

    def eta_distance(self, c1: Chain, c2: Chain) -> float:
        return math.sqrt(max(0.0, 2.0 - 2.0 * self.eta_inner(c1, c2)))

    def kernel_sup(self, threshold: float) -> float:
        """sup <xi_y, xi_y'> over same-vertex pairs with d(y, y') >= threshold (0 if none)."""
        G, H = self.G, self.H
        best = 0.0
        for h in H.elements():
            for h2 in H.elements():
                if G.length(G.embed_base(self.H.mul(self.H.inv(h), h2))) >= threshold:
                    best = max(best, self.base_kernel(h, h2))
        return best

    def family_condition_violations(self, params: ChainParams) -> list[str]:
        """The within-vertex smallness required at scale R_bar."""
        G, H = self.G, self.H
        out = []
        for h in H.elements():
            for h2 in H.elements():
                d = G.length(G.embed_base(H.mul(H.inv(h), h2)))
                dist = math.sqrt(max(0.0, 2 - 2 * self.base_kernel(h, h2)))
                if d <= params.R_bar and dist > params.eps_bar + TOL.certificate:
                    out.append(f"{H.format(h)},{H.format(h2)}")
        return out


@dataclass
class PairReport:
    d: int
    k: int
    l: int
    max_step: int
    meet_distance: int
    eta_dist: float
    bound: float
    telescoped: float
    telescope_bound: float
    inner: float
    kernel_sup: float
    step_ok: bool
    telescope_ok: bool
    eta_close_ok: bool
    kernel_ok: bool

    @property
    def passed(self) -> bool:
        return self.step_ok and self.telescope_ok and self.eta_close_ok and self.kernel_ok


def chain_lemma_report(system: ChainSystem, x0, x1, params: ChainParams, check_params: bool = True) -> PairReport:
    if check_params:
        bad = params.violations()
        if bad:
            raise PreconditionError("; ".join(bad))
    if system.base_t is None:
        system.configure_family(params)
    G = system.G
    s = params.s
    d = G.distance(x0, x1)
    k, l = meet_exponents(G, G.vertex(x0), G.vertex(x1))
    c0 = system.build_chain(x0, s + k)
    c1 = system.build_chain(x1, s + l)
    steps = list(c0.steps[:k]) + list(c1.steps[:l])
    meet = G.distance(c0.points[k], c1.points[l])
    max_step = max(steps + [meet])
    max_step_bound = (system.Z + 2) * params.R
    w0, w1 = c0.window(0, s), c1.window(0, s)
    eta = system.eta_distance(w0, w1)
    inner = system.eta_inner(w0, w1)
    terms = [system.eta_distance(c0.window(i, s), c0.window(i + 1, s)) for i in range(k)]
    terms += [system.eta_distance(c1.window(j, s), c1.window(j + 1, s)) for j in range(l)]
    middle = system.eta_distance(c0.window(k, s), c1.window(l, s))
    step_bound = params.eps / (params.R + 1)
    tele = math.fsum(terms) + middle
    tele_ok = (
        all(t <= step_bound + TOL.certificate for t in terms)
        and middle <= params.eps_bar + TOL.certificate
        and tele <= (k + l + 1) * step_bound + TOL.certificate
    )
    sup = system.kernel_sup(d - 2 * s * (system.Z + 1))
    return PairReport(
        d=d,
        k=k,
        l=l,
        max_step=max_step,
        meet_distance=meet,
        eta_dist=eta,
        bound=params.eps,
        telescoped=tele,
        telescope_bound=(k + l + 1) * step_bound,
        inner=inner,
        kernel_sup=sup,
        step_ok=max_step < max_step_bound if d < params.R else True,
        telescope_ok=tele_ok if d < params.R else True,
        eta_close_ok=eta <= params.eps + TOL.certificate if d < params.R else True,
        kernel_ok=abs(inner) <= sup + TOL.certificate,
    )


def close_pairs(G: HNNExtension, radius: int, R: float) -> list[tuple]:
    """Unordered pairs of distinct ball points at distance < R, in ball order."""
    ball = G.ball(radius)
    idx = {g: i for i, g in enumerate(ball)}
    steps = [g for g in G.ball(math.ceil(R) - 1) if g != G.identity]
    out = []
    for i, x in enumerate(ball):
        for g in steps:
            y = G.mul(x, g)
            j = idx.get(y)
            if j is not None and j > i and G.distance(x, y) < R:
                out.append((x, y))
    return sorted(set(out), key=lambda p: (idx[p[0]], idx[p[1]]))


@dataclass
class ChainVerification:
    params: ChainParams
    Z: int
    rows: list
    pairs: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["d", "k", "l", "max_step", "eta_dist", "bound", "pass"])
        for r in self.rows:
            w.writerow([r.d, r.k, r.l, r.max_step, repr(r.eta_dist), repr(r.bound), int(r.passed)])
        return buf.getvalue()


def verify_chains(G: HNNExtension, params: ChainParams, ball_radius: int, far_pairs: Iterable = ()) -> ChainVerification:
    system = ChainSystem(G, params.Z)
    system.configure_family(params)
    pairs = close_pairs(G, ball_radius, params.R) + list(far_pairs)
    rows = [chain_lemma_report(system, x, y, params) for x, y in pairs]
    return ChainVerification(params, system.Z, rows, pairs)


def finite_instance() -> HNNExtension:
    """HNN(Z2 x Z2, <(1,0)>, (1,0) -> (0,1))."""
    from .groups import DirectProduct, cyclic

    H = DirectProduct(cyclic(2, "u"), cyclic(2, "v"))
    app = FiniteCosetApparatus(H, [(1, 0)], {(1, 0): (0, 1)})
    return HNNExtension(app, name="HNN(Z2xZ2)")


# ---------------------------------------------------------------------------
# path decomposition through the tree


def tree_path_distance(G: HNNExtension, x, y, budget: int | None = None) -> int | None:
    """d_T(xH, yH) plus the cheapest sum of in-vertex hops along the tree path.

    Hops inside a vertex are searched among base-group elements of G-length at
    most ``budget - d_T``; any sequence beating the budget uses only such hops.
    Returns None when no sequence fits the budget.
    """
    path = tree_path(G.vertex(x), G.vertex(y))
    m = len(path) - 1
    if budget is None:
        budget = G.distance(x, y)
    room = budget - m
    if room < 0:
        return None
    cands = [(g, G.length(g)) for g in G.ball(room) if G.in_base(g)]
    states = {x: 0}
    for j in range(m):
        tt = G.t if step_sign(path[j], path[j + 1]) == 1 else G.t_inv
        nxt: dict = {}
        for a, c in states.items():
            for h, lh in cands:
                if c + lh > room:
                    continue
                b = G.mul(G.mul(a, h), tt)
                if G.vertex(b) == path[j + 1] and c + lh < nxt.get(b, room + 1):
                    nxt[b] = c + lh
        states = nxt
    hop = dict(cands)
    best = None
    for a, c in states.items():
        lh = hop.get(G.mul(G.inv(a), y))
        if lh is not None and c + lh <= room and (best is None or c + lh < best):
            best = c + lh
    return None if best is None else m + best


# ---------------------------------------------------------------------------
# schedule


@dataclass
class ScheduleRow:
    m: float
    eps: float
    R: float
    n: float
    s: float
    S: float
    S_prime: float
    eps_bar: float
    R_bar: float
    t: float
    flag_n: bool
    flag_s: bool
    beta: float


def schedule_beta(p: float, alpha1: float) -> float:
    if not (0 < p < alpha1 <= 1):
        raise ConfigurationError("need 0 < p < alpha1 <= 1")
    return (alpha1 - p) / (3 + 18 * p)


def _flags(m, p, Z):
    """Feasibility flags with mpmath arithmetic (m may exceed float resolution)."""
    m = mpmath.mpf(m)
    p = mpmath.mpf(repr(p)) if isinstance(p, float) else mpmath.mpf(p)
    lnm = mpmath.log(m)
    f1 = m**p >= (Z + 2) * lnm
    eps = m ** (-(mpmath.mpf(1) / 2 + p))
    f2 = mpmath.sqrt(2 / m ** (1 + 6 * p)) <= eps / (2 * (lnm + 1))
    return bool(f1), bool(f2)


def schedule(m: float, p: float, alpha1: float, C: float, D: float, Z: int) -> ScheduleRow:
    beta = schedule_beta(p, alpha1)
    if m < 2:
        raise ConfigurationError("m must be at least 2")
    with mpmath.workdps(max(30, int(math.log10(m)) + 30)):
        f1, f2 = _flags(m, p, Z)
    mf = float(m)
    eps = mf ** -(0.5 + p)
    R = math.log(mf)
    n = mf**p
    s = mf ** (1 + 6 * p)
    S = mf ** ((1.5 + 9 * p) / (alpha1 - p))
    Sp = S + 2 * s * (Z + 1)
    eps_bar = eps / (2 * (R + 1))
    R_bar = n + 2 * s * (Z + 1)
    t = -math.log1p(-0.5 * eps_bar * eps_bar) / (C * R_bar + D) ** 2
    return ScheduleRow(mf, eps, R, n, s, S, Sp, eps_bar, R_bar, t, f1, f2, beta)


@dataclass
class Threshold:
    flag: str
    m: int
    checked_up_to: float
    monotone: bool


def minimal_feasible_m(p: float, Z: int, which: str = "both", grid_decades: int = 40) -> Threshold:
    """Smallest integer m >= 2 from which the selected flag(s) hold, with a log-grid monotonicity check."""

    def ok(m) -> bool:
        f1, f2 = _flags(m, p, Z)
        return {"n": f1, "s": f2, "both": f1 and f2}[which]

    with mpmath.workdps(120):
        # coarse scan in ln m; both flags are eventually true
        u = math.log(2)
        while not ok(mpmath.exp(u)):
            u += 0.25
            if u > 5000:
                raise ConfigurationError("no feasible m found")
        lo = int(mpmath.floor(mpmath.exp(max(u - 0.25, math.log(2)))))
        hi = int(mpmath.ceil(mpmath.exp(u)))
        if ok(lo):
            lo = 2
            while not ok(lo):
                lo += 1
            hi = lo
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ok(mid):
                hi = mid
            else:
                lo = mid
        m_star = hi
        monotone = ok(m_star) and (m_star == 2 or not ok(m_star - 1))
        base = mpmath.log(m_star)
        span = grid_decades * mpmath.log(10)
        for k in range(1, 401):
            if not ok(mpmath.exp(base + k * span / 400)):
                monotone = False
        for off in range(1, 50):
            if not ok(m_star + off):
                monotone = False
        top = float(base + span)
    return Threshold(which, m_star, math.exp(top), monotone)


def schedule_table(p: float, alpha1: float, C: float, D: float, Z: int, exponents: Sequence[int]) -> list[ScheduleRow]:
    return [schedule(10.0**e, p, alpha1, C, D, Z) for e in exponents]


def schedule_csv(rows: Sequence[ScheduleRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = list(asdict(rows[0]).keys()) if rows else []
    w.writerow(names)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else int(v) if isinstance(v, bool) else v for v in asdict(r).values()])
    return buf.getvalue()
