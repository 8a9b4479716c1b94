"""Embedding constructors: Dirac exactification, free-product prefix embeddings,
kernel families, the step-profile converse, and quotient transfer."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import mpmath

from .constructions import FreeProduct
from .errors import ConfigurationError, PreconditionError
from .groups import Element, FiniteGroup, Group, Integers, QuotientGroup
from .hilbert import KernelUnitFamily, SparseVector, choose_t


@dataclass(frozen=True)
class DistortionCertificate:
    """Claim: (1/C) d^eps - D <= ||f(x) - f(y)|| <= C d + D for d <= radius."""

    eps: float
    C: float
    D: float = 0.0
    radius: float = math.inf

    def lower(self, d: float) -> float:
        return (d**self.eps) / self.C - self.D if d > 0 else -self.D

    def upper(self, d: float) -> float:
        return self.C * d + self.D


class Embedding:
    """A map from a group into a Hilbert space, known through pairwise distances."""

    def __init__(self, group: Group, certificate: DistortionCertificate | None = None, name: str = ""):
        self.group = group
        self.certificate = certificate
        self.name = name

    def sqdist(self, x, y) -> float:
        raise NotImplementedError

    def distance(self, x, y) -> float:
        return math.sqrt(max(0.0, self.sqdist(x, y)))


class VectorEmbedding(Embedding):
    """Embedding with explicit finitely supported vectors."""

    def __init__(
        self,
        group: Group,
        fn: Callable[[Element], SparseVector],
        certificate: DistortionCertificate | None = None,
        name: str = "",
    ):
        super().__init__(group, certificate, name)
        self._fn = fn
        self._cache: dict = {}

    def vector(self, x) -> SparseVector:
        v = self._cache.get(x)
        if v is None:
            v = self._fn(x)
            self._cache[x] = v
        return v

    def sqdist(self, x, y) -> float:
        return float((self.vector(x) - self.vector(y)).norm_sq())


def with_certificate(f: Embedding, cert: DistortionCertificate) -> Embedding:
    f.certificate = cert
    return f


# ---------------------------------------------------------------------------
# factor embeddings


def integer_embedding(G: Integers) -> VectorEmbedding:
    """n -> n * delta_0, an isometry for the standard generators."""
    if set(G.generators) != {1, -1}:
        raise PreconditionError("identity embedding needs the generators +-1")
    return VectorEmbedding(
        G, lambda n: SparseVector({0: n}, "line"), DistortionCertificate(1.0, 1.0, 0.0), "identity"
    )


def zero_embedding(G: Group, eps: float = 1.0) -> VectorEmbedding:
    """The constant map; certified on a finite group with D = diam^eps."""
    if not G.is_finite():
        raise PreconditionError("the zero map is only certified on finite groups")
    diam = max(G.length(g) for g in G.elements())
    return VectorEmbedding(
        G, lambda x: SparseVector.zero("zero"), DistortionCertificate(eps, 1.0, float(diam) ** eps), "zero"
    )


def exactify_constant(C: float, D: float, B: float) -> float:
    if not B > 0:
        raise ConfigurationError("gap B must be positive")
    return max(2 * math.sqrt(2) * C, 2 * C * D, C + (D + math.sqrt(2)) / B)


def exactify(f: VectorEmbedding, C: float | None = None, D: float | None = None, B: float = 1.0) -> VectorEmbedding:
    """x -> f(x) (+) delta_x, which removes the additive constant D."""
    cert = f.certificate
    if C is None or D is None:
        if cert is None:
            raise PreconditionError("need (C, D) or a certified input embedding")
        C = cert.C if C is None else C
        D = cert.D if D is None else D
    Cbar = exactify_constant(C, D, B)
    eps = cert.eps if cert is not None else 1.0

    def fn(x):
        return f.vector(x).direct_sum(SparseVector.delta(x), tags=("f", "delta"), space="exact")

    return VectorEmbedding(f.group, fn, DistortionCertificate(eps, Cbar, 0.0), f"exact({f.name})")


def recenter(f: VectorEmbedding, base=None) -> VectorEmbedding:
    """x -> f(x) - f(base); distances are unchanged and the base maps to 0."""
    base = f.group.identity if base is None else base
    origin = f.vector(base)
    return VectorEmbedding(f.group, lambda x: f.vector(x) - origin, f.certificate, f.name)


def finite_factor_embedding(G: Group, eps: float = 1.0) -> VectorEmbedding:
    """Exactified zero map on a finite group, shifted so the identity maps to 0."""
    z = zero_embedding(G, eps)
    return recenter(exactify(z, B=1.0))


def factor_embedding(G: Group) -> VectorEmbedding:
    if isinstance(G, Integers):
        return integer_embedding(G)
    if G.is_finite():
        return finite_factor_embedding(G)
    raise PreconditionError(f"no certified factor embedding shipped for {G.name}")


# ---------------------------------------------------------------------------
# free products


def free_product_embed(G: FreeProduct, f1: VectorEmbedding, f2: VectorEmbedding) -> VectorEmbedding:
    """Prefix-keyed embedding: the coordinate block at the prefix x_1..x_j holds f(x_{j+1}).

    The block family is chosen by the factor of the first letter, so the two
    families share only the empty prefix.
    """
    fs = (f1, f2)
    for i, f in enumerate(fs):
        if len(f.vector(f.group.identity)):
            raise PreconditionError(f"factor embedding {i + 1} does not send the identity to 0")
    c1, c2 = f1.certificate, f2.certificate
    cert = None
    if c1 is not None and c2 is not None:
        if c1.D or c2.D:
            raise PreconditionError("factor certificates must have D = 0")
        cert = DistortionCertificate(min(c1.eps, c2.eps, 0.5), max(c1.C, c2.C, 1.0), 0.0)

    def fn(x: tuple) -> SparseVector:
        out: dict = {}
        if not x:
            return SparseVector(out, "prefix")
        comp = x[0][0]
        for j, (i, g) in enumerate(x):
            prefix = x[:j]
            for k, v in fs[i - 1].vector(g).items():
                out[(comp, prefix, k)] = v
        return SparseVector(out, "prefix")

    return VectorEmbedding(G, fn, cert, "free_product")


def standard_free_product_embedding(G: FreeProduct) -> VectorEmbedding:
    return free_product_embed(G, factor_embedding(G.factors[0]), factor_embedding(G.factors[1]))


# ---------------------------------------------------------------------------
# kernel families


@dataclass
class CertifiedFamily:
    family: KernelUnitFamily
    certificate: DistortionCertificate
    eps_bar: float
    R: float

    def rho_plus(self, d: float) -> float:
        return self.certificate.upper(d)

    def rho_minus(self, d: float) -> float:
        return max(0.0, self.certificate.lower(d))

    def kernel_bounds(self, d: float) -> tuple[float, float]:
        t = self.family.t
        return math.exp(-t * self.rho_plus(d) ** 2), math.exp(-t * self.rho_minus(d) ** 2)


def embedding_to_family(f: Embedding, eps_bar: float, R: float) -> CertifiedFamily:
    """Kernel family with ||xi_x - xi_y|| <= eps_bar whenever d(x, y) <= R."""
    cert = f.certificate
    if cert is None:
        raise PreconditionError("embedding needs a certificate to bound rho_plus")
    t = choose_t(eps_bar, cert.upper(R))
    return CertifiedFamily(KernelUnitFamily(f.sqdist, t), cert, eps_bar, R)


@dataclass(frozen=True)
class StepProfile:
    """Value sqrt(n-1)/2 on [S_{n-1}, S_n), with S_0 = 0."""

    thresholds: tuple

    def __call__(self, d: float) -> float:
        n = 1
        for s in self.thresholds[1:]:
            if d >= s:
                n += 1
            else:
                break
        return 0.5 * math.sqrt(n - 1)

    @property
    def valid_up_to(self) -> float:
        return self.thresholds[-1]


class StepEmbedding(Embedding):
    """f(x) = 1/2 (+)_n (eta_n(x) - eta_n(x0)), evaluated through the kernels."""

    def __init__(
        self,
        group: Group,
        families: Sequence[KernelUnitFamily],
        thresholds: Sequence[float],
        base,
        lipschitz: float,
    ):
        if len(thresholds) != len(families) + 1 or thresholds[0] != 0:
            raise PreconditionError("need thresholds S_0 = 0 < S_1 < ... < S_N, one per family")
        if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
            raise PreconditionError("thresholds must increase strictly")
        super().__init__(group, DistortionCertificate(0.0, lipschitz, 0.0), "step")
        self.families = list(families)
        self.profile = StepProfile(tuple(thresholds))
        self.base = base
        self.lipschitz = lipschitz

    def sqdist(self, x, y) -> float:
        return 0.25 * math.fsum(2.0 - 2.0 * fam.inner(x, y) for fam in self.families)

    def norm_sq(self, x) -> float:
        return self.sqdist(x, self.base)


def vectors_to_embedding(
    group: Group,
    families: Sequence[KernelUnitFamily],
    thresholds: Sequence[float],
    base,
    p: float,
) -> StepEmbedding:
    """Assemble a step embedding; the Lipschitz constant uses the full tail of sum i^-(1+2p)."""
    if thresholds is None or len(thresholds) < 2:
        raise PreconditionError("missing thresholds")
    tail = 0.25 * float(mpmath.zeta(1 + 2 * p))
    A = math.sqrt(math.e + tail)
    return StepEmbedding(group, families, thresholds, base, A)


def integer_scale_families(G: Integers, p: float, N: int) -> tuple[list[KernelUnitFamily], list[float]]:
    """Families eta_n on Z with ||eta_n(x)-eta_n(y)|| <= n^-(1/2+p) when d <= ln n
    and <eta_n(x), eta_n(y)> <= 1/2 when d >= S_n."""
    if N < 1:
        raise ConfigurationError("need at least one family")
    f = integer_embedding(G)
    fams, S = [], [0.0]
    for n in range(1, N + 1):
        t = choose_t(n ** -(0.5 + p), max(math.log(n), 1.0))
        fams.append(KernelUnitFamily(f.sqdist, t))
        S.append(math.sqrt(math.log(2) / t))
    return fams, S


# ---------------------------------------------------------------------------
# quotients by finite normal subgroups


def make_quotient(H: Group, F: Iterable[Element]) -> QuotientGroup:
    try:
        return QuotientGroup(H, F)
    except ConfigurationError as exc:
        raise PreconditionError(str(exc)) from None


def quotient_transfer(H: Group, F: Iterable[Element], psi: Callable, direction: str = "lift", sample=None):
    """Move a function between H and H/F.

    ``lift``: psi is defined on H/F, returns x -> psi(xbar) on H.
    ``push``: psi is defined on H, must vanish on F and be F-bi-invariant on
    ``sample`` (default: ball of radius 3); returns xbar -> psi(x).
    Returns ``(Q, transferred_function)``.
    """
    Q = make_quotient(H, F)
    if direction == "lift":
        return Q, lambda x: psi(Q.project(x))
    if direction == "push":
        pts = sample if sample is not None else H.ball(3)
        for f in Q.normal:
            if psi(f) != 0:
                raise PreconditionError("pushed function must vanish on F")
        for x in pts:
            v = psi(x)
            for f in Q.normal:
                for g in Q.normal:
                    if abs(psi(H.mul(H.mul(f, x), g)) - v) > 1e-12:
                        raise PreconditionError("pushed function is not F-bi-invariant")
        return Q, lambda xbar: psi(xbar)
    raise ConfigurationError(f"unknown direction {direction!r}")


def transfer_certificate(cert: DistortionCertificate, M_F: float) -> DistortionCertificate:
    """Certificate for the lift: the quotient length differs by at most M_F = max l(F)."""
    return DistortionCertificate(cert.eps, cert.C, cert.D + (M_F**cert.eps) / cert.C, cert.radius)
