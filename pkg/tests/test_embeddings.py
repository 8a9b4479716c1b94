import itertools
import math

import pytest

from hscompress.constructions import FreeProduct, common_part, resolve_construction
from hscompress.embeddings import (
    DistortionCertificate,
    StepProfile,
    VectorEmbedding,
    embedding_to_family,
    exactify,
    exactify_constant,
    factor_embedding,
    finite_factor_embedding,
    free_product_embed,
    integer_embedding,
    integer_scale_families,
    quotient_transfer,
    standard_free_product_embedding,
    transfer_certificate,
    vectors_to_embedding,
    zero_embedding,
)
from hscompress.errors import ConfigurationError, PreconditionError
from hscompress.estimator import distortion_profile, verify_certificate
from hscompress.groups import DirectProduct, Integers, cyclic
from hscompress.hilbert import SparseVector


@pytest.fixture(scope="module")
def zz():
    return FreeProduct(Integers(), Integers())


def test_exactify_constant_closed_form():
    assert exactify_constant(1, 0, 1) == pytest.approx(2 * math.sqrt(2))
    assert exactify_constant(2, 3, 0.5) == pytest.approx(max(4 * math.sqrt(2), 12, 2 + (3 + math.sqrt(2)) / 0.5))
    with pytest.raises(ConfigurationError):
        exactify_constant(1, 0, 0)


def test_exactify_adds_two():
    G = cyclic(5, "c")
    z = zero_embedding(G)
    ex = exactify(z)
    for x, y in itertools.product(G.elements(), repeat=2):
        expected = z.sqdist(x, y) + (2 if x != y else 0)
        assert ex.sqdist(x, y) == pytest.approx(expected)
    assert ex.distance(G.identity, G.identity) == 0


@pytest.mark.parametrize(
    "G",
    [cyclic(2, "a"), cyclic(3, "b"), cyclic(6, "c"), DirectProduct(cyclic(2, "u"), cyclic(2, "v"))],
    ids=lambda G: G.name,
)
def test_exactified_certificate_holds(G):
    f = finite_factor_embedding(G)
    diam = max(G.length(g) for g in G.elements())
    assert f.certificate.C == pytest.approx(exactify_constant(1.0, float(diam), 1.0))
    prof = distortion_profile(f, G.ball(6))
    assert verify_certificate(prof, f.certificate).passed


def test_free_product_identity_is_zero(zz):
    f = standard_free_product_embedding(zz)
    assert len(f.vector(zz.identity)) == 0


def test_free_product_prefix_support(zz):
    f = standard_free_product_embedding(zz)
    ab = zz.parse("1:a.2:a")
    v = f.vector(ab)
    assert v.support() == frozenset({(1, (), 0), (1, ((1, 1),), 0)})
    assert v.norm() == pytest.approx(math.sqrt(2))


def test_free_product_decomposition_identity(zz):
    f = standard_free_product_embedding(zz)
    fac = [factor_embedding(F) for F in zz.factors]
    sq = lambda i, g: fac[i - 1].vector(g).norm_sq()
    ball = zz.ball(5)
    for x, y in itertools.combinations(ball, 2):
        cp = common_part(zz, x, y)
        gi = fac[cp.factor - 1]
        expected = (
            sum(sq(i, g) for i, g in cp.x_tail)
            + gi.sqdist(cp.g_x, cp.g_y)
            + sum(sq(i, g) for i, g in cp.y_tail)
        )
        assert f.sqdist(x, y) == pytest.approx(expected, abs=1e-12)


def test_free_product_upper_bound_finite_factors():
    G = resolve_construction("z2z3")
    f = standard_free_product_embedding(G)
    C = f.certificate.C
    for x, y in itertools.combinations(G.ball(5), 2):
        assert f.distance(x, y) <= C * G.distance(x, y) + 1e-9
    assert verify_certificate(distortion_profile(f, G.ball(5)), f.certificate).passed


def test_free_product_requires_zero_at_identity(zz):
    Z = Integers()
    shifted = VectorEmbedding(Z, lambda n: SparseVector({0: n + 1.0}), DistortionCertificate(1, 1, 0))
    with pytest.raises(PreconditionError):
        free_product_embed(zz, shifted, integer_embedding(Z))


def test_family_is_close_on_small_distances(zz):
    f = standard_free_product_embedding(zz)
    fam = embedding_to_family(f, 0.2, 3)
    for x, y in itertools.combinations(zz.ball(3), 2):
        d = zz.distance(x, y)
        if d <= 3:
            assert fam.family.distance(x, y) <= 0.2 + 1e-12
        lo, hi = fam.kernel_bounds(d)
        assert lo - 1e-12 <= fam.family.inner(x, y) <= hi + 1e-12
    x = zz.parse("1:a^3")
    assert fam.family.inner(x, x) == 1


def test_step_profile_values():
    prof = StepProfile((0.0, 1.0, 2.5, 4.0))
    assert prof(0.5) == 0
    assert prof(1.0) == pytest.approx(0.5)
    assert prof(3.0) == pytest.approx(math.sqrt(2) / 2)
    assert prof.valid_up_to == 4.0


def test_step_embedding_lower_and_upper_bounds():
    Z = Integers()
    fams, S = integer_scale_families(Z, 0.25, 6)
    f = vectors_to_embedding(Z, fams, S, 0, 0.25)
    assert f.norm_sq(0) == 0
    pts = list(range(-40, 41))
    for x, y in itertools.combinations(pts, 2):
        d = abs(x - y)
        dist = f.distance(x, y)
        if d < S[-1]:
            assert dist >= f.profile(d) - 1e-12
        assert dist <= f.lipschitz * d + 1e-12
        if S[1] <= d < S[2]:
            assert dist >= 0.5 - 1e-12


def test_step_embedding_single_family():
    Z = Integers()
    fams, S = integer_scale_families(Z, 0.25, 1)
    f = vectors_to_embedding(Z, fams, S, 0, 0.25)
    assert f.sqdist(3, 7) == pytest.approx(0.25 * (2 - 2 * fams[0].inner(3, 7)))


def test_step_embedding_needs_thresholds():
    with pytest.raises(PreconditionError):
        vectors_to_embedding(Integers(), [], [0.0], 0, 0.25)


def test_quotient_lift_and_certificate():
    H = DirectProduct(Integers(), cyclic(2, "u"))
    F = [H.identity, H.parse("(e,u)")]
    Q, lifted_sq = quotient_transfer(H, F, lambda xb: float(xb[0]) ** 2, "lift")
    _, lifted_vec = quotient_transfer(H, F, lambda xb: SparseVector({0: float(xb[0])}), "lift")
    f = VectorEmbedding(H, lifted_vec)
    ball = H.ball(6)
    for x in ball:
        assert Q.length(Q.project(x)) <= H.length(x)
        for c in F:
            assert lifted_sq(H.mul(x, c)) == lifted_sq(x)
    cert = transfer_certificate(DistortionCertificate(1.0, 1.0, 0.0), 1.0)
    assert (cert.eps, cert.C, cert.D) == (1.0, 1.0, 1.0)
    assert verify_certificate(distortion_profile(f, ball), cert).passed


def test_quotient_push_requires_vanishing():
    H = DirectProduct(Integers(), cyclic(2, "u"))
    F = [H.identity, H.parse("(e,u)")]
    with pytest.raises(PreconditionError):
        quotient_transfer(H, F, lambda x: 1.0, "push")
    _, pushed = quotient_transfer(H, F, lambda x: float(x[0]) ** 2, "push")
    assert pushed((3, 0)) == 9.0


def test_quotient_needs_normal_subgroup():
    from hscompress.groups import FiniteGroup

    table = [
        [0, 1, 2, 3, 4, 5],
        [1, 0, 4, 5, 2, 3],
        [2, 5, 0, 4, 3, 1],
        [3, 4, 5, 0, 1, 2],
        [4, 3, 1, 2, 5, 0],
        [5, 2, 3, 1, 0, 4],
    ]
    S3 = FiniteGroup(table, [1, 2], [str(i) for i in range(6)])
    with pytest.raises(PreconditionError):
        quotient_transfer(S3, [0, 1], lambda x: 0.0)


def test_zero_embedding_needs_finite_group():
    with pytest.raises(PreconditionError):
        zero_embedding(Integers())
