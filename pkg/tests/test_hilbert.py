import math

import numpy as np
import pytest

from hscompress.errors import ConfigurationError, PreconditionError
from hscompress.hilbert import (
    KernelUnitFamily,
    SparseVector,
    choose_t,
    distance,
    exp_inner,
    exp_partial_sum,
    inner,
    truncated_exp,
    xi_distance,
    xi_inner,
)


def test_delta_norm():
    d = SparseVector.delta("k")
    assert inner(d, d) == 1


def test_disjoint_supports():
    assert inner(SparseVector({1: 2.0}), SparseVector({2: 3.0})) == 0


def test_shared_keys_arithmetic():
    u = SparseVector({"x": 1, "y": 2})
    v = SparseVector({"x": 3, "y": -1})
    assert inner(u, v) == 1


def test_zero_coefficients_not_stored():
    u = SparseVector({"x": 1, "y": 0})
    assert u.support() == frozenset({"x"})
    assert len(u - u) == 0


def test_space_mismatch_is_type_error():
    with pytest.raises(TypeError):
        inner(SparseVector({1: 1}, "a"), SparseVector({1: 1}, "b"))


def test_rational_inputs_stay_exact():
    from fractions import Fraction

    u = SparseVector({0: Fraction(1, 3), 1: Fraction(2, 7)})
    assert inner(u, u) == Fraction(1, 9) + Fraction(4, 49)


def test_direct_sum_and_distance():
    u = SparseVector({0: 3.0})
    v = SparseVector({0: 0.0, 1: 4.0})
    assert distance(u, v) == pytest.approx(5.0)
    w = u.direct_sum(v, tags=("l", "r"), space="pair")
    assert w.norm_sq() == pytest.approx(25.0)


def test_exp_inner_examples():
    zero = SparseVector.zero()
    assert exp_inner(zero, zero) == 1
    z = SparseVector({0: 1.0})
    assert exp_inner(z, z) == pytest.approx(math.e, abs=1e-9)


def test_truncated_exp_norm_is_partial_sum():
    z = SparseVector({0: 0.7, 1: -0.4})
    v = truncated_exp(z, 8)
    assert v.norm_sq() == pytest.approx(exp_partial_sum(z.norm_sq(), 8), rel=1e-12)


def test_truncated_exp_matches_closed_form():
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 30:
        a, b = rng.normal(size=3), rng.normal(size=3)
        if abs(a @ b) > 4:
            continue
        z1 = SparseVector(dict(enumerate(a.tolist())))
        z2 = SparseVector(dict(enumerate(b.tolist())))
        got = inner(truncated_exp(z1, 20), truncated_exp(z2, 20))
        assert abs(got - exp_inner(z1, z2)) <= 5e-7
        checked += 1


def test_truncation_cap():
    z = SparseVector({k: 0.1 for k in range(40)})
    with pytest.raises(ConfigurationError, match="truncation too deep"):
        truncated_exp(z, 20)


def test_kernel_examples():
    fam = KernelUnitFamily(lambda x, y: float((x - y) ** 2), math.log(2))
    assert xi_inner(fam, 3, 3) == 1
    assert xi_inner(fam, 0, 1) == pytest.approx(0.5)
    v = xi_inner(fam, 0, 5)
    assert xi_distance(v) ** 2 + 2 * v == pytest.approx(2, abs=1e-12)


def test_materialized_family_matches_kernel():
    f = lambda n: SparseVector({0: float(n)}, "line")
    fam = KernelUnitFamily.from_vectors(f, 0.3)
    u, w = fam.materialize(f, 1, 24), fam.materialize(f, 2, 24)
    assert inner(u, w) == pytest.approx(fam.inner(1, 2), abs=1e-9)
    assert u.norm_sq() == pytest.approx(1.0, abs=1e-9)


def test_choose_t_examples():
    assert choose_t(1.0, 1.0) == pytest.approx(math.log(2))
    e = 1e-4
    assert choose_t(e, 3.0) == pytest.approx(e * e / (2 * 9.0), rel=1e-4)
    with pytest.raises((ConfigurationError, PreconditionError, ValueError)):
        choose_t(math.sqrt(2), 1.0)


def test_choose_t_controls_distance():
    t = choose_t(0.3, 2.0)
    fam = KernelUnitFamily(lambda x, y: float((x - y) ** 2), t)
    assert fam.distance(0, 2) <= 0.3 + 1e-12
    assert fam.distance(0, 2) == pytest.approx(0.3, rel=1e-9)
