import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from banach_ito.spaces import (REAL, DimensionMismatch, DualFunctional, Element, Hilbert, Lp,
                               MultiplicationUndefined, NotALattice, Product, SeqSup, SupGrid,
                               UnsupportedExactness, check_multiplication_axioms, dual_decompose,
                               lattice_abs, lattice_join, lattice_leq, lattice_meet, multiply, norm,
                               norming_functionals, operator_norm, space_from_json)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def vecs(n):
    return arrays(float, n, elements=finite)


W4 = (0.3, 0.7, 1.1, 0.4)
CATALOGUE = [SupGrid(4), Lp(W4, 2.0), Lp(W4, 3.0), Lp(W4, 4.0), Lp(W4, math.inf), Hilbert(3),
             SeqSup.from_directions([[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]])]
LATTICES = [s for s in CATALOGUE if s.is_lattice]


# --- norm -----------------------------------------------------------------

def test_norm_of_zero_is_zero():
    assert norm(Element(SupGrid(3), [0, 0, 0])) == 0


def test_supgrid_norm_is_max_abs():
    assert norm(Element(SupGrid(3), [1, -2, 1.5])) == 2


def test_lp_norm_hand_value():
    assert norm(Element(Lp((0.5, 0.5), 2), [2, 2])) == pytest.approx(2, rel=1e-15)


def test_lp_infinity_is_plain_max_over_atoms():
    assert Lp((5.0, 0.01), math.inf).norm(np.array([1.0, -3.0])) == 3.0


def test_seqsup_norm_is_sup_over_functionals():
    s = SeqSup.from_directions([[1, 0], [1, 1]])
    assert s.norm(np.array([1.0, 1.0])) == pytest.approx(math.sqrt(2))


def test_dimension_mismatch_is_structural_error():
    with pytest.raises(DimensionMismatch):
        Element(SupGrid(3), [1, 2])


def test_non_finite_coordinates_rejected():
    with pytest.raises(ValueError):
        Element(SupGrid(2), [1, np.nan])


@pytest.mark.parametrize("space", CATALOGUE, ids=repr)
def test_norm_zero_iff_zero(space, rng):
    x = rng.standard_normal((50, space.dim))
    assert np.all(space.norm(x) > 0)
    assert space.norm(np.zeros(space.dim)) == 0


def test_lp_rejects_bad_parameters():
    with pytest.raises(ValueError):
        Lp((1.0, -1.0), 2)
    with pytest.raises(ValueError):
        Lp((1.0,), 0.5)


def test_seqsup_rows_must_be_unit():
    with pytest.raises(ValueError):
        SeqSup(((2.0, 0.0), (0.0, 1.0)))


# --- multiply ---------------------------------------------------------------

def test_supgrid_product_is_pointwise():
    z = multiply(Element(SupGrid(2), [1, 2]), Element(SupGrid(2), [3, -1]))
    assert z.space == SupGrid(2)
    np.testing.assert_array_equal(z.coords, [3, -2])


def test_hilbert_product_is_inner_product():
    z = multiply(Element(Hilbert(2), [1, 2]), Element(Hilbert(2), [3, -1]))
    assert z.space == REAL
    np.testing.assert_array_equal(z.coords, [1])


@pytest.mark.parametrize("space", CATALOGUE, ids=repr)
def test_times_zero_is_zero(space, rng):
    x = Element(space, rng.standard_normal(space.dim))
    assert not np.any(multiply(x, Element.zero(space)).coords)


def test_targets_follow_kind():
    assert SupGrid(3).mult_target == SupGrid(3)
    assert Lp(W4, 4.0).mult_target == Lp(W4, 2.0)
    assert Lp(W4, math.inf).mult_target == Lp(W4, math.inf)
    assert Hilbert(5).mult_target == REAL
    assert CATALOGUE[-1].mult_target == SupGrid(4)


def test_lp_below_two_has_no_multiplication():
    with pytest.raises(MultiplicationUndefined):
        Lp(W4, 1.5).mult_target


def test_multiply_requires_same_space():
    with pytest.raises(DimensionMismatch):
        multiply(Element(SupGrid(2), [1, 2]), Element(Hilbert(2), [1, 2]))


@pytest.mark.parametrize("space", [SupGrid(4), Lp(W4, 2.0), Lp(W4, 3.0), Lp(W4, 4.0), Lp(W4, math.inf)], ids=repr)
def test_square_norm_equals_norm_squared(space, rng):
    x = rng.standard_normal((200, space.dim))
    np.testing.assert_allclose(space.mult_target.norm(space.multiply(x, x)), space.norm(x) ** 2, rtol=1e-12)


@pytest.mark.parametrize("space", CATALOGUE, ids=repr)
def test_symmetric_bilinear_on_random_triples(space, rng):
    x, y, z = (rng.standard_normal((100, space.dim)) for _ in range(3))
    a, b = 1.7, -0.3
    np.testing.assert_allclose(space.multiply(x, y), space.multiply(y, x), rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(space.multiply(a * x + b * z, y),
                               a * space.multiply(x, y) + b * space.multiply(z, y), rtol=1e-12, atol=1e-11)


@given(vecs(3), vecs(3))
def test_hilbert_cauchy_schwarz_property(x, y):
    h = Hilbert(3)
    assert abs(h.multiply(x, y)[0]) <= h.norm(x) * h.norm(y) * (1 + 1e-12) + 1e-12


# --- axioms report --------------------------------------------------------------

@pytest.mark.parametrize("space", CATALOGUE + [Product((SupGrid(2), Hilbert(2)))], ids=repr)
def test_multiplication_axioms_pass(space):
    rep = check_multiplication_axioms(space, 1000, seed=1)
    assert rep.passed
    assert rep.max_violation <= 1e-9


def test_zero_sample_exercises_square_zero_branch():
    rep = check_multiplication_axioms(SupGrid(4), 1, seed=0)
    assert rep.zero_square_norm == 0.0


def test_axioms_need_a_sample():
    with pytest.raises(ValueError):
        check_multiplication_axioms(SupGrid(2), 0)


# --- lattice ----------------------------------------------------------------

def test_abs_example():
    np.testing.assert_array_equal(lattice_abs(Element(SupGrid(2), [-1, 2])).coords, [1, 2])


def test_join_example():
    np.testing.assert_array_equal(lattice_join(Element(SupGrid(2), [1, 0]), Element(SupGrid(2), [0, 1])).coords, [1, 1])


def test_leq_positive_cone():
    assert lattice_leq(Element(SupGrid(2), [0, 0]), Element(SupGrid(2), [1, 2]))
    assert not lattice_leq(Element(SupGrid(2), [0, 3]), Element(SupGrid(2), [1, 2]))


@pytest.mark.parametrize("space", LATTICES, ids=repr)
@given(data=st.data())
def test_abs_preserves_norm(space, data):
    a = Element(space, data.draw(vecs(space.dim)))
    assert lattice_abs(a).norm() == pytest.approx(a.norm(), rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("space", LATTICES, ids=repr)
@given(data=st.data())
def test_order_axioms(space, data):
    x, y, z = (Element(space, data.draw(vecs(space.dim))) for _ in range(3))
    c = data.draw(st.floats(0, 100))
    if lattice_leq(x, y):
        assert lattice_leq(x + z, y + z, tol=1e-9)
        assert lattice_leq(x * c, y * c, tol=1e-9)
    j = lattice_join(x, y)
    assert lattice_leq(x, j) and lattice_leq(y, j)
    m = lattice_meet(x, y)
    assert lattice_leq(m, x) and lattice_leq(m, y)
    if lattice_leq(lattice_abs(x), lattice_abs(y)):
        assert x.norm() <= y.norm() * (1 + 1e-12)


def test_seqsup_is_not_a_lattice():
    s = SeqSup.from_directions([[1, 0], [1, 1]])
    a = Element(s, [1.0, -1.0])
    # the coordinatewise |a| would change the norm here
    assert s.norm(np.abs(a.coords)) != pytest.approx(a.norm())
    with pytest.raises(NotALattice):
        lattice_abs(a)


# --- functionals --------------------------------------------------------------

def test_norming_supgrid_exact():
    fs = norming_functionals(SupGrid(3), 0)
    assert len(fs) == 3
    x = np.array([0.5, -4.0, 2.0])
    assert max(abs(f(x)) for f in fs) == 4.0


def test_norming_hilbert2_net(rng):
    eps = 0.01
    fs = norming_functionals(Hilbert(2), eps)
    assert len(fs) == math.ceil(math.pi / (2 * math.acos(1 - eps)))
    for f in fs:
        assert f.operator_norm() == pytest.approx(1)
    x = rng.standard_normal((100, 2))
    best = np.max(np.abs(np.stack([f(x) for f in fs])), axis=0)
    assert np.all(best >= (1 - eps) * np.linalg.norm(x, axis=1))


@pytest.mark.parametrize("space,eps", [(Hilbert(3), 0.05), (Lp((0.5, 2.0, 1.0), 2), 0.05),
                                       (Lp((0.5, 2.0), 3), 0.05), (Lp((0.5, 2.0, 1.0), 1), 0),
                                       (Lp(W4, math.inf), 0), (CATALOGUE[-1], 0)], ids=repr)
def test_norming_families_meet_epsilon(space, eps, rng):
    fs = norming_functionals(space, eps)
    for f in fs:
        assert f.operator_norm() == pytest.approx(1, rel=1e-9)
    x = rng.standard_normal((200, space.dim))
    best = np.max(np.abs(np.stack([f(x) for f in fs])), axis=0)
    assert np.all(best >= (1 - eps) * space.norm(x) * (1 - 1e-12))


@pytest.mark.parametrize("space", CATALOGUE[:-1], ids=repr)
def test_norming_of_zero(space):
    fs = norming_functionals(space, 0.2)
    assert max(abs(f(np.zeros(space.dim))) for f in fs) == 0


def test_hilbert_exact_norming_unsupported():
    with pytest.raises(UnsupportedExactness):
        norming_functionals(Hilbert(2), 0)


def test_dual_decompose_examples():
    p, m = dual_decompose(DualFunctional(SupGrid(2), [1, -2]))
    np.testing.assert_array_equal(p.coeffs, [1, 0])
    np.testing.assert_array_equal(m.coeffs, [0, 2])
    p, m = dual_decompose(DualFunctional(SupGrid(2), [0, 0]))
    assert not p.coeffs.any() and not m.coeffs.any()
    _, m = dual_decompose(DualFunctional(SupGrid(2), [1, 2]))
    assert not m.coeffs.any()


@pytest.mark.parametrize("space", LATTICES, ids=repr)
def test_dual_decompose_reproduces_on_basis(space, rng):
    phi = DualFunctional(space, rng.standard_normal(space.dim))
    p, m = dual_decompose(phi)
    basis = np.eye(space.dim)
    np.testing.assert_allclose(p(basis) - m(basis), phi(basis), atol=1e-14)
    cone = np.abs(rng.standard_normal((50, space.dim)))
    assert np.all(p(cone) >= 0) and np.all(m(cone) >= 0)


# --- operator norms and json ----------------------------------------------------------

def test_operator_norm_sup_to_sup_is_max_row_l1():
    A = np.array([[1.0, -2.0], [0.5, 0.5]])
    val, exact = operator_norm(A, SupGrid(2), SupGrid(2))
    assert exact and val == pytest.approx(3.0)


def test_operator_norm_euclidean_is_spectral(rng):
    A = rng.standard_normal((3, 3))
    val, exact = operator_norm(A, Hilbert(3), Hilbert(3))
    assert exact and val == pytest.approx(np.linalg.norm(A, 2))


def test_operator_norm_fallback_is_lower_bound(rng):
    A = rng.standard_normal((2, 3))
    dom, cod = Lp((1.0, 1.0, 1.0), 3), Lp((1.0, 1.0), 3)
    val, exact = operator_norm(A, dom, cod)
    assert not exact
    x = rng.standard_normal((2000, 3))
    assert val >= np.max(cod.norm(x @ A.T) / dom.norm(x)) * (1 - 1e-6)


@pytest.mark.parametrize("space", CATALOGUE + [Product((SupGrid(2), Lp(W4, 4.0)), "l1")], ids=repr)
def test_json_roundtrip(space):
    assert space_from_json(space.to_json()) == space


def test_element_json_is_array():
    assert Element(SupGrid(2), [1, 2]).to_json() == [1.0, 2.0]
