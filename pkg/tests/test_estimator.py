import dataclasses
import math

import pytest

from hscompress import estimator as estimator_module
from hscompress.config import CAPS
from hscompress.constructions import FreeProduct
from hscompress.embeddings import (
    DistortionCertificate,
    VectorEmbedding,
    integer_embedding,
    standard_free_product_embedding,
)
from hscompress.errors import BallTooLarge, PreconditionError
from hscompress.estimator import distortion_profile, fit_compression, verify_certificate
from hscompress.groups import Integers
from hscompress.hilbert import SparseVector


@pytest.fixture(scope="module")
def zz_profile():
    G = FreeProduct(Integers(), Integers())
    f = standard_free_product_embedding(G)
    return G, f, distortion_profile(f, G.ball(5), 5)


def test_identity_on_integers():
    Z = Integers()
    prof = distortion_profile(integer_embedding(Z), Z.ball(10), 10)
    for r in prof.records:
        assert r.min == r.max == r.d
    assert prof.records[0].d == 0 and prof.records[0].max == 0
    fit = fit_compression(prof)
    assert fit.headline == pytest.approx(1.0)
    assert not fit.degenerate


def test_free_product_min_envelope_is_sqrt(zz_profile):
    _, f, prof = zz_profile
    for r in prof.records:
        assert r.min == pytest.approx(math.sqrt(r.d), abs=1e-12)
        assert r.min <= r.max
    assert verify_certificate(prof, f.certificate).passed


def test_constant_map_is_degenerate():
    Z = Integers()
    f = VectorEmbedding(Z, lambda n: SparseVector.zero())
    prof = distortion_profile(f, Z.ball(4), 4)
    assert all(r.min == r.max == 0 for r in prof.records)
    fit = fit_compression(prof)
    assert fit.degenerate and fit.headline == 0


def test_profile_too_small():
    Z = Integers()
    prof = distortion_profile(integer_embedding(Z), Z.ball(0), 0)
    with pytest.raises(PreconditionError, match="profile too small"):
        fit_compression(prof)


def test_fit_curve_nondecreasing_in_C(zz_profile):
    _, _, prof = zz_profile
    fit = fit_compression(prof, [2.0, 0.5, 1.0, 4.0])
    values = [v for _, v in fit.curve]
    assert [c for c, _ in fit.curve] == [0.5, 1.0, 2.0, 4.0]
    assert values == sorted(values)
    assert 0 <= fit.headline <= 1


def test_small_constant_fails_with_witness(zz_profile):
    _, _, prof = zz_profile
    res = verify_certificate(prof, DistortionCertificate(1.0, 1.0, 0.0))
    assert not res.passed
    assert res.worst_side == "lower"
    assert len(res.witness) == 2


def test_sample_within_exhaustive(zz_profile):
    G, f, prof = zz_profile
    sample = distortion_profile(f, G.ball(5), 5, mode="sample", sample_size=5000, seed=4)
    full = prof.by_distance()
    for r in sample.records:
        assert r.min >= full[r.d].min - 1e-12
        assert r.max <= full[r.d].max + 1e-12
    again = distortion_profile(f, G.ball(5), 5, mode="sample", sample_size=5000, seed=4)
    assert again.to_csv() == sample.to_csv()


def test_exhaustive_cap(monkeypatch):
    monkeypatch.setattr(estimator_module, "CAPS", dataclasses.replace(CAPS, exhaustive_pairs=10))
    Z = Integers()
    with pytest.raises(BallTooLarge):
        distortion_profile(integer_embedding(Z), Z.ball(5))


def test_unknown_mode():
    Z = Integers()
    with pytest.raises(PreconditionError):
        distortion_profile(integer_embedding(Z), Z.ball(2), mode="guess")


def test_csv_and_json(zz_profile):
    _, _, prof = zz_profile
    lines = prof.to_csv().splitlines()
    assert lines[0] == "d,min,max,count"
    ds = [int(line.split(",")[0]) for line in lines[1:]]
    assert ds == sorted(ds)
    data = prof.to_json()
    assert data["mode"] == "exhaustive" and data["records"][2]["d"] == 2


def test_generic_path_matches_vector_path(zz_profile):
    G, f, prof = zz_profile

    class Opaque(VectorEmbedding.__mro__[1]):
        def sqdist(self, x, y):
            return f.sqdist(x, y)

    other = distortion_profile(Opaque(G), G.ball(3), 3)
    small = distortion_profile(f, G.ball(3), 3)
    for a, b in zip(other.records, small.records):
        assert (a.d, a.count) == (b.d, b.count)
        assert a.min == pytest.approx(b.min) and a.max == pytest.approx(b.max)
