"""Conditionally negative definite functions, Gram/GNS vectors, and the
amalgam/HNN constructions built from coset-indicator cocycles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .config import TOL
from .constructions import (
    AmalgamatedProduct,
    FiniteCosetApparatus,
    FreeProduct,
    HNNExtension,
    amalgam_normal_form,
    britton_normal_form,
    shortest_blocklength,
    tree_distance,
)
from .errors import NotCND, PreconditionError
from .groups import Element, Group


class CNDFunction:
    """Cached evaluation of a candidate conditionally negative definite function."""

    def __init__(self, group: Group, rule: Callable[[Element], float], name: str = "psi", vanishing=None):
        self.group = group
        self.rule = rule
        self.name = name
        self.vanishing = vanishing
        self._cache: dict = {}

    def __call__(self, x) -> float:
        v = self._cache.get(x)
        if v is None:
            v = self.rule(x)
            self._cache[x] = v
        return v


def _psi_matrix(psi: CNDFunction, points: Sequence) -> np.ndarray:
    G = psi.group
    invs = [G.inv(x) for x in points]
    n = len(points)
    P = np.empty((n, n))
    for i in range(n):
        xi = invs[i]
        for j in range(i, n):
            P[i, j] = P[j, i] = psi(G.mul(xi, points[j]))
    return P


@dataclass
class CNDReport:
    size: int
    trials: int
    max_form: float
    scale: float
    max_projected_eigenvalue: float
    symmetric: bool
    identity_zero: bool
    passed: bool


def check_cnd(psi: CNDFunction, points: Sequence, trials: int = 200, seed: int = 0) -> CNDReport:
    """Quadratic forms sum a_i a_j psi(x_i^-1 x_j) for seeded weights with sum a = 0."""
    G = psi.group
    points = list(points)
    P = _psi_matrix(psi, points)
    sym = all(abs(psi(x) - psi(G.inv(x))) <= TOL.identity * max(1.0, abs(psi(x))) for x in points)
    ident = psi(G.identity) == 0
    rng = np.random.default_rng(seed)
    n = len(points)
    pmax = float(P.max()) if n else 0.0
    worst, worst_scale = -math.inf, 0.0
    passed = sym and ident
    for _ in range(trials):
        a = rng.standard_normal(n)
        a -= a.mean()
        form = float(a @ P @ a)
        scale = pmax * float(a @ a)
        if form > TOL.cnd_form * scale:
            passed = False
        if form > worst:
            worst, worst_scale = form, scale
    if n > 1:
        Q = np.eye(n) - 1.0 / n
        top = float(np.linalg.eigvalsh(Q @ P @ Q)[-1])
    else:
        top = 0.0
    return CNDReport(n, trials, worst, worst_scale, top, sym, ident, passed)


@dataclass
class GramEmbedding:
    points: list
    index: dict
    vectors: np.ndarray
    eigenvalues: np.ndarray
    clipped: int

    def vector(self, x) -> np.ndarray:
        return self.vectors[self.index[x]]


def gns_embed(psi: CNDFunction, ball: Sequence) -> GramEmbedding:
    """Vectors b(x) with <b(x), b(y)> = (psi(x) + psi(y) - psi(x^-1 y)) / 2."""
    G = psi.group
    pts = list(ball)
    P = _psi_matrix(psi, pts)
    d = np.array([psi(x) for x in pts])
    gram = 0.5 * (d[:, None] + d[None, :] - P)
    w, V = np.linalg.eigh(gram)
    scale = max(1.0, float(np.abs(w).max()) if len(w) else 0.0)
    if len(w) and w[0] < -TOL.eigen_clip * scale:
        raise NotCND(f"not CND on this ball: eigenvalue {w[0]:.3e} (scale {scale:.3e})")
    clipped = int(np.count_nonzero(w < 0))
    w = np.clip(w, 0.0, None)
    vecs = V * np.sqrt(w)[None, :]
    return GramEmbedding(pts, {x: i for i, x in enumerate(pts)}, vecs, w, clipped)


@dataclass
class GNSResidual:
    max_norm_residual: float
    max_pair_residual: float
    max_psi: float
    passed: bool


def gns_residuals(psi: CNDFunction, emb: GramEmbedding) -> GNSResidual:
    G = psi.group
    pts = emb.points
    B = emb.vectors
    norms = (B * B).sum(axis=1)
    d = np.array([psi(x) for x in pts])
    nres = float(np.abs(norms - d).max()) if len(pts) else 0.0
    P = _psi_matrix(psi, pts)  # P[i, j] = psi(x_i^-1 x_j) = psi(x_j^-1 x_i)
    sq = norms[:, None] + norms[None, :] - 2.0 * (B @ B.T)
    pres = float(np.abs(sq - P).max()) if len(pts) else 0.0
    mpsi = float(P.max()) if len(pts) else 0.0
    tol = TOL.gns_residual * max(mpsi, 1e-300)
    return GNSResidual(nres, pres, mpsi, nres <= tol and pres <= tol)


# ---------------------------------------------------------------------------
# coset indicators


def _check_subgroup(H: Group, F: Sequence) -> set:
    fs = set(F) | {H.identity}
    for a in fs:
        for b in fs:
            if H.mul(a, H.inv(b)) not in fs:
                raise PreconditionError("F is not a subgroup")
    return fs


def coset_label(H: Group, F: Iterable, x):
    return min((H.mul(x, f) for f in F), key=H.sort_key)


def coset_indicator_cnd(H: Group, F: Sequence, scale: float = 1.0) -> CNDFunction:
    """psi(x) = 2 scale [x not in F] = scale ||delta_{xF} - delta_F||^2."""
    fs = _check_subgroup(H, F)
    return CNDFunction(H, lambda x: 0.0 if x in fs else 2.0 * scale, "coset_indicator", vanishing=fs)


def coset_cocycle(H: Group, F: Sequence) -> Callable:
    """The explicit vector delta_{xF} - delta_F as a dict over coset labels."""
    fs = sorted(_check_subgroup(H, F), key=H.sort_key)
    base = coset_label(H, fs, H.identity)

    def b(x) -> dict:
        lab = coset_label(H, fs, x)
        return {} if lab == base else {lab: 1.0, base: -1.0}

    return b


def unit_indicator(H: Group, F: Sequence = ()) -> CNDFunction:
    """Indicator equal to 1 off F."""
    return coset_indicator_cnd(H, F, 0.5)


# ---------------------------------------------------------------------------
# amalgams


def _subgroup_of(G) -> tuple[list, list]:
    G1, G2 = G.factors
    if isinstance(G, AmalgamatedProduct):
        return list(G.F), [G._phi[f] for f in G.F]
    return [G1.identity], [G2.identity]


def amalgam_cnd(G, psi1: CNDFunction, psi2: CNDFunction, check_radius: int = 2) -> CNDFunction:
    """psi(x) = sum psi1(alpha_i) + sum psi2(beta_j) over the normal form blocks."""
    F1, F2 = _subgroup_of(G)
    for psi, F, Gi in ((psi1, F1, G.factors[0]), (psi2, F2, G.factors[1])):
        if any(psi(f) != 0 for f in F):
            raise PreconditionError(f"{psi.name} does not vanish on F")
        sample = Gi.elements() if Gi.is_finite() else Gi.ball(check_radius)
        for x in sample:
            if x in F:
                continue
            if psi(x) < 1:
                raise PreconditionError(f"{psi.name} is below 1 off F")
            for f in F:
                for g in F:
                    if psi(Gi.mul(Gi.mul(f, x), g)) != psi(x):
                        raise PreconditionError(f"{psi.name} is not F-bi-invariant")

    def rule(x):
        nf = amalgam_normal_form(G, x)
        return math.fsum(psi1(a) for a in nf.alphas) + math.fsum(psi2(b) for b in nf.betas)

    return CNDFunction(G, rule, "amalgam")


@dataclass
class BoundRow:
    element: str
    length: int
    norm: float
    checks: dict


@dataclass
class BoundReport:
    constants: dict
    rows: list = field(default_factory=list)
    failures: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, name: str, ok: bool, witness: str) -> None:
        if not ok and name not in self.failures:
            self.failures[name] = witness


def _factor_constant(Gi: Group, psi: CNDFunction, excluded: set, eps: float, radius: int) -> float:
    pts = Gi.elements() if Gi.is_finite() else Gi.ball(radius)
    C = 1.0
    for g in pts:
        if g in excluded:
            continue
        l = Gi.length(g)
        nb = math.sqrt(psi(g))
        C = max(C, nb / l, (l**eps) / nb)
    return C


def _comparison_constant(Gi: Group, G: Group, embed: Callable, radius: int) -> float:
    pts = Gi.elements() if Gi.is_finite() else Gi.ball(radius)
    B = 1.0
    for g in pts:
        if g == Gi.identity:
            continue
        B = max(B, Gi.length(g) / G.length(embed(g)))
    return B


def _min_nontrivial(Gi: Group) -> float:
    return min((Gi.length(s) for s in Gi.generators), default=1)


def amalgam_bounds(G, psi1, psi2, psi: CNDFunction, eps: float, radius: int) -> BoundReport:
    """Upper bounds via block sums and Lipschitz constant; lower bounds with M-bar slack."""
    G1, G2 = G.factors
    F1, F2 = _subgroup_of(G)
    C = max(
        _factor_constant(G1, psi1, set(F1), eps, radius),
        _factor_constant(G2, psi2, set(F2), eps, radius),
    )
    M = max([G1.length(f) for f in F1] + [G2.length(f) for f in F2])
    Mp = min(1.0, _min_nontrivial(G1), _min_nontrivial(G2))
    if isinstance(G, AmalgamatedProduct):
        emb1 = lambda g: G.from_word([(1, g)])
        emb2 = lambda g: G.from_word([(2, g)])
        Mbar = max(G.length(emb1(f)) for f in F1)
    else:
        emb1 = lambda g: ((1, g),) if g != G1.identity else ()
        emb2 = lambda g: ((2, g),) if g != G2.identity else ()
        Mbar = 0
    B = max(_comparison_constant(G1, G, emb1, radius), _comparison_constant(G2, G, emb2, radius))
    Lip = C * (2 * M / Mp + 1) * B
    Dp = (Mbar**eps) / C
    rep = BoundReport(dict(C=C, M=M, M_prime=Mp, M_bar=Mbar, B=B, eps=eps, lipschitz=Lip, D_prime=Dp))
    tol = TOL.certificate
    for x in G.ball(radius):
        l = G.length(x)
        nb = math.sqrt(psi(x))
        nf = amalgam_normal_form(G, x)
        blocks = sum(G1.length(a) for a in nf.alphas) + sum(G2.length(b) for b in nf.betas)
        sb = shortest_blocklength(G, x)
        checks = {
            "block_upper": nb <= C * blocks + tol,
            "lipschitz": nb <= Lip * l + tol,
            "blocklength": sb <= B * l,
            "lower": nb >= (max(l - min(l, Mbar), 0) ** eps) / C - tol,
            "lower_affine": nb >= (l**eps) / C - Dp - tol,
        }
        fx = G.format(x)
        for k, ok in checks.items():
            rep.record(k, ok, fx)
        rep.rows.append(BoundRow(fx, l, nb, checks))
    return rep


# ---------------------------------------------------------------------------
# HNN extensions


def vanishing_subgroup(G: HNNExtension) -> list:
    A = G.app.vanishing_subgroup()
    if A is None:
        raise PreconditionError("the subgroup generated by F and theta(F) is not finite")
    return A


def hnn_tilde(G: HNNExtension, psi: CNDFunction) -> Callable:
    def rule(g):
        nf = britton_normal_form(G, g)
        return math.fsum(psi(c) for c in nf.gammas) + psi(nf.alpha)

    return rule


def hnn_cnd(G: HNNExtension, psi: CNDFunction) -> CNDFunction:
    """Block sum over the Britton form plus the tree distance d_T(H, gH)."""
    A = vanishing_subgroup(G)
    H = G.H
    for a in A:
        if psi(a) != 0:
            raise PreconditionError("psi must vanish on A")
    Aset = set(A)
    for x in H.elements() if H.is_finite() else H.ball(2):
        v = psi(x)
        for a in A:
            if psi(H.mul(a, x)) != v or psi(H.mul(x, a)) != v:
                raise PreconditionError("psi is not A-bi-invariant")
    tilde = hnn_tilde(G, psi)
    out = CNDFunction(G, lambda g: tilde(g) + tree_distance((), G.vertex(g)), "hnn", vanishing=Aset)
    out.tilde = tilde
    return out


def tree_cnd(G: HNNExtension) -> CNDFunction:
    return CNDFunction(G, lambda g: float(tree_distance((), G.vertex(g))), "tree")


def hnn_bounds(G: HNNExtension, psi: CNDFunction, psibar: CNDFunction, eps: float, radius: int) -> BoundReport:
    H = G.H
    A = vanishing_subgroup(G)
    Aset = set(A)
    C = _factor_constant(H, psi, Aset, eps, radius)
    M = max(H.length(a) for a in A)
    Mp = min(1.0, _min_nontrivial(H))
    B = _comparison_constant(H, G, G.embed_base, radius)
    Lip = C * (2 * M / Mp + 1) * B
    rep = BoundReport(dict(C=C, M=M, M_prime=Mp, B=B, eps=eps, lipschitz=Lip))
    tol = TOL.certificate
    for g in G.ball(radius):
        l = G.length(g)
        nb = math.sqrt(psibar(g))
        nf = britton_normal_form(G, g)
        dT = tree_distance((), G.vertex(g))
        rhs23 = C * (sum(H.length(c) for c in nf.gammas) + H.length(nf.alpha) + dT)
        decomposition = math.fsum(psi(c) for c in nf.gammas) + psi(nf.alpha) + dT
        sb = shortest_blocklength(G, g)
        checks = {
            "upper_blocks": nb <= rhs23 + tol,
            "lipschitz": nb <= Lip * l + tol,
            "blocklength": sb <= B * l,
            "decomposition": abs(psibar(g) - decomposition) <= tol,
            "lower": nb >= ((max(l - min(l, 2 * M), 0) / (M + 1)) ** eps) / C - tol,
        }
        fx = G.format(g)
        for k, ok in checks.items():
            rep.record(k, ok, fx)
        rep.rows.append(BoundRow(fx, l, nb, checks))
    return rep


def literal_hnn_lower_failures(G: HNNExtension, psibar: CNDFunction, C: float, M: float, eps: float, radius: int) -> list:
    """Elements violating the uncorrected bound (1/C)(l - min(M, l))^eps (diagnostic)."""
    out = []
    for g in G.ball(radius):
        l = G.length(g)
        if math.sqrt(psibar(g)) < ((l - min(M, l)) ** eps) / C - TOL.certificate:
            out.append(G.format(g))
    return out


# -- the cocycle c(x, g) = sigma(x)^-1 g sigma(g^-1 x) ------------------------


def section(G: HNNExtension, v: tuple):
    return G.section(v)


def cocycle(G: HNNExtension, v: tuple, g):
    sv = G.section(v)
    w = G.vertex(G.mul(G.inv(g), sv))
    return G.mul(G.mul(G.inv(sv), g), G.section(w))


def act(G: HNNExtension, g, v: tuple) -> tuple:
    """The vertex g.v."""
    return G.vertex(G.mul(g, G.section(v)))


@dataclass
class CocycleReport:
    triples: int
    relation_failures: list
    outside_base: list
    support_failures: list
    sum_failures: list

    @property
    def passed(self) -> bool:
        return not (self.relation_failures or self.outside_base or self.support_failures or self.sum_failures)


def cocycle_check(
    G: HNNExtension,
    triples: Iterable[tuple],
    psi: CNDFunction | None = None,
    elements: Iterable = (),
    vertex_pool: Iterable[tuple] = (),
) -> CocycleReport:
    """Verify c(x, g1 g2) = c(x, g1) c(g1^-1 x, g2) and the finite-support sum identity."""
    rel, outside = [], []
    n = 0
    for v, g1, g2 in triples:
        n += 1
        lhs = cocycle(G, v, G.mul(g1, g2))
        rhs = G.mul(cocycle(G, v, g1), cocycle(G, act(G, G.inv(g1), v), g2))
        if lhs != rhs:
            rel.append((v, G.format(g1), G.format(g2)))
        if not G.in_base(lhs):
            outside.append((v, G.format(g1), G.format(g2)))
    supp, sums = [], []
    if psi is not None:
        A = set(vanishing_subgroup(G))
        tilde = hnn_tilde(G, psi)
        pool = set(vertex_pool)
        for g in elements:
            verts = set(pool)
            syl = G.vertex(g)
            verts.update(syl[:j] for j in range(len(syl) + 1))
            bad = [v for v in verts if cocycle(G, v, g)[1] not in A]
            k = len(syl)
            if len(bad) > k + 1:
                supp.append((G.format(g), len(bad), k + 1))
            total = math.fsum(psi(cocycle(G, v, g)[1]) for v in bad)
            if abs(total - tilde(g)) > TOL.certificate:
                sums.append((G.format(g), total, tilde(g)))
    return CocycleReport(n, rel, outside, supp, sums)
