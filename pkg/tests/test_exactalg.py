import cmath
import json
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from stlab.exactalg import (
    AlgebraElement, BaseFieldElement, CyclicAlgebraSpec, FieldKind, algebra_mul,
    algebra_preset, algebra_to_json, apply_sigma, embed_complex, exact_det, extension_preset,
    field_add, field_mul, left_regular_matrix, load_algebra_json, make_extension, matmul,
    norm_to_base,
)

QI = FieldKind.GAUSSIAN
GOLDEN = extension_preset("golden")
CYC8 = extension_preset("cyclotomic8")
ALL_ALGEBRAS = ["golden", "golden-broken", "cyclotomic2", "cyclotomic4", "quaternion"]

small = st.integers(-4, 4)


def rand_field(ext, rng, lo=-3, hi=3):
    if ext.base_kind.dim == 2:
        return ext.element([(rng.randint(lo, hi), rng.randint(lo, hi)) for _ in range(ext.degree)])
    return ext.element([rng.randint(lo, hi) for _ in range(ext.degree)])


def rand_alg(spec, rng):
    return spec.element([rand_field(spec.ext, rng) for _ in range(spec.degree)])


@st.composite
def field_elems(draw, ext):
    if ext.base_kind.dim == 2:
        return ext.element([(draw(small), draw(small)) for _ in range(ext.degree)])
    return ext.element([draw(small) for _ in range(ext.degree)])


def mat_eq(a, b):
    return all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


# -- base field ---------------------------------------------------------------

def test_gaussian_arithmetic():
    a = BaseFieldElement(1, 2, QI)
    b = BaseFieldElement(3, -1, QI)
    assert a * b == BaseFieldElement(5, 5, QI)
    assert (a / b) * b == a
    assert a.abs2() == 5
    assert a.conjugate() == BaseFieldElement(1, -2, QI)


def test_eisenstein_omega_squared():
    w = BaseFieldElement(0, 1, FieldKind.EISENSTEIN)
    assert w * w == BaseFieldElement(-1, -1, FieldKind.EISENSTEIN)
    assert w * w * w == BaseFieldElement(1, 0, FieldKind.EISENSTEIN)
    assert abs(w.to_complex() - cmath.exp(2j * math.pi / 3)) < 1e-15
    assert w.abs2() == 1


@given(small, small, small, small)
def test_eisenstein_inverse(a, b, c, d):
    x = BaseFieldElement(a, b, FieldKind.EISENSTEIN)
    y = BaseFieldElement(c, d, FieldKind.EISENSTEIN)
    if not y.is_zero():
        assert (x / y) * y == x
        assert abs((x / y).to_complex() - x.to_complex() / y.to_complex()) < 1e-12


def test_rational_kind_rejects_imaginary_part():
    with pytest.raises(ValueError):
        BaseFieldElement(1, 1, FieldKind.RATIONAL)


def test_floats_rejected():
    with pytest.raises(TypeError):
        BaseFieldElement(0.5, 0, QI)


def test_mixed_kinds_rejected():
    with pytest.raises(ValueError):
        BaseFieldElement(1, 0, QI) + BaseFieldElement(1, 0, FieldKind.EISENSTEIN)


def test_base_json_roundtrip():
    a = BaseFieldElement(Fraction(-3, 7), Fraction(5, 2), QI)
    assert BaseFieldElement.from_json(json.loads(json.dumps(a.to_json())), QI) == a
    with pytest.raises(ValueError):
        BaseFieldElement.from_json([[1.5, 1], [0, 1]], QI)
    with pytest.raises(ValueError):
        BaseFieldElement.from_json([[1, 0], [0, 1]], QI)


# -- field operations -----------------------------------------------------------

def test_golden_phi_squared():
    phi = GOLDEN.gen
    assert field_mul(phi, phi, GOLDEN) == GOLDEN.element([1, 1])


def test_identity_multiplication():
    rng = random.Random(1)
    for ext in (GOLDEN, CYC8, extension_preset("cyclotomic16")):
        a = rand_field(ext, rng)
        assert field_mul(ext.one, a, ext) == a
        assert field_add(ext.zero, a, ext) == a


def test_zeta8_squared_is_i():
    z = CYC8.gen
    assert field_mul(z, z, CYC8) == CYC8.scalar((0, 1))


def test_sigma_examples():
    phi = GOLDEN.gen
    assert apply_sigma(phi, GOLDEN, 1) == GOLDEN.element([1, -1])
    assert apply_sigma(CYC8.gen, CYC8, 1) == CYC8.element([0, -1])
    a = GOLDEN.element([(2, 1), (-1, 3)])
    assert apply_sigma(a, GOLDEN, 0) == a


def test_sigma_fixes_base_field():
    i = CYC8.scalar((0, 1))
    assert apply_sigma(i, CYC8, 1) == i


def test_norm_examples():
    phi = GOLDEN.gen
    assert norm_to_base(phi, GOLDEN) == BaseFieldElement(-1, 0, QI)
    assert norm_to_base(GOLDEN.one, GOLDEN) == BaseFieldElement(1, 0, QI)
    alpha = GOLDEN.element([(1, 1), (0, -1)])  # 1 + i(1 - phi)
    assert norm_to_base(alpha, GOLDEN) == BaseFieldElement(2, 1, QI)


def test_embedding_examples():
    assert abs(embed_complex(GOLDEN.gen, GOLDEN) - (1 + math.sqrt(5)) / 2) < 1e-15
    assert embed_complex(GOLDEN.scalar((0, 1)), GOLDEN) == 1j
    assert abs(embed_complex(CYC8.gen, CYC8) - (math.sqrt(2) / 2) * (1 + 1j)) < 1e-15


@pytest.mark.parametrize("name", ["golden", "cyclotomic8", "cyclotomic16", "quaternion"])
@settings(max_examples=50, deadline=None)
@given(data=st.data())
def test_sigma_order_and_ring_map(name, data):
    ext = extension_preset(name)
    a = data.draw(field_elems(ext))
    b = data.draw(field_elems(ext))
    assert apply_sigma(a, ext, ext.degree) == a
    assert apply_sigma(field_mul(a, b, ext), ext, 1) == field_mul(
        apply_sigma(a, ext, 1), apply_sigma(b, ext, 1), ext)


@pytest.mark.parametrize("name", ["golden", "cyclotomic8", "cyclotomic16"])
@settings(max_examples=50, deadline=None)
@given(data=st.data())
def test_embedding_is_multiplicative(name, data):
    ext = extension_preset(name)
    big = st.integers(-1000, 1000)
    a = ext.element([(data.draw(big), data.draw(big)) for _ in range(ext.degree)])
    b = ext.element([(data.draw(big), data.draw(big)) for _ in range(ext.degree)])
    lhs = embed_complex(field_mul(a, b, ext), ext)
    rhs = embed_complex(a, ext) * embed_complex(b, ext)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))


@settings(max_examples=50, deadline=None)
@given(data=st.data())
def test_field_inverse(data):
    ext = extension_preset("cyclotomic16")
    a = data.draw(field_elems(ext))
    if not a.is_zero():
        assert field_mul(a, ext.inverse(a), ext) == ext.one


# -- extension validation -------------------------------------------------------

def test_extension_rejects_non_monic():
    with pytest.raises(ValueError, match="monic"):
        make_extension(QI, [-1, -1, 2], [1, -1], 1.0)


def test_extension_rejects_non_automorphism():
    with pytest.raises(ValueError, match="ring map"):
        make_extension(QI, [-1, -1, 1], [1, 1], (1 + math.sqrt(5)) / 2)


def test_extension_rejects_wrong_order():
    # sigma = identity has order 1 in a degree-2 extension
    with pytest.raises(ValueError, match="order"):
        make_extension(QI, [-1, -1, 1], [0, 1], (1 + math.sqrt(5)) / 2)


def test_extension_rejects_bad_root():
    with pytest.raises(ValueError, match="root"):
        make_extension(QI, [-1, -1, 1], [1, -1], 1.5)


@pytest.mark.parametrize("name", ["golden", "cyclotomic8", "cyclotomic16", "quaternion"])
def test_presets_satisfy_invariants(name):
    ext = extension_preset(name)
    # re-running the constructor re-checks every invariant
    rebuilt = make_extension(ext.base_kind, ext.min_poly, ext.sigma_image, ext.complex_root)
    assert rebuilt.degree == ext.degree


def test_unknown_preset():
    with pytest.raises(KeyError):
        algebra_preset("nope")


# -- cyclic algebra -------------------------------------------------------------

@pytest.mark.parametrize("name", ALL_ALGEBRAS)
def test_k_times_u(name):
    # the relation that makes the matrix embedding multiplicative for every n
    spec = algebra_preset(name)
    rng = random.Random(7)
    for _ in range(10):
        k = rand_field(spec.ext, rng)
        lhs = algebra_mul(spec.from_field(k), spec.u, spec)
        rhs = algebra_mul(spec.u, spec.from_field(apply_sigma(k, spec.ext, 1)), spec)
        assert lhs == rhs


@pytest.mark.parametrize("name", ["golden", "golden-broken", "cyclotomic2", "quaternion"])
def test_u_times_k_degree_two(name):
    # sigma is an involution, so u k = sigma(k) u holds as well
    spec = algebra_preset(name)
    rng = random.Random(8)
    for _ in range(10):
        k = rand_field(spec.ext, rng)
        lhs = algebra_mul(spec.u, spec.from_field(k), spec)
        rhs = algebra_mul(spec.from_field(apply_sigma(k, spec.ext, 1)), spec.u, spec)
        assert lhs == rhs


@pytest.mark.parametrize("name", ALL_ALGEBRAS)
def test_u_power_n_is_gamma(name):
    spec = algebra_preset(name)
    p = spec.u
    for _ in range(spec.degree - 1):
        p = algebra_mul(p, spec.u, spec)
    assert p == spec.from_field(spec.ext.scalar(spec.gamma))


@pytest.mark.parametrize("name", ALL_ALGEBRAS)
def test_identity_element(name):
    spec = algebra_preset(name)
    d = rand_alg(spec, random.Random(3))
    assert algebra_mul(spec.from_field(spec.ext.one), d, spec) == d


@pytest.mark.parametrize("name", ALL_ALGEBRAS)
def test_algebra_associative(name):
    spec = algebra_preset(name)
    rng = random.Random(11)
    for _ in range(10):
        a, b, c = (rand_alg(spec, rng) for _ in range(3))
        assert algebra_mul(algebra_mul(a, b, spec), c, spec) == algebra_mul(a, algebra_mul(b, c, spec), spec)


@pytest.mark.parametrize("name", ALL_ALGEBRAS)
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_left_regular_is_homomorphism(name, seed):
    spec = algebra_preset(name)
    rng = random.Random(seed)
    a, b = rand_alg(spec, rng), rand_alg(spec, rng)
    lhs = left_regular_matrix(algebra_mul(a, b, spec), spec)
    rhs = matmul(left_regular_matrix(a, spec), left_regular_matrix(b, spec), spec.ext)
    assert mat_eq(lhs, rhs)


def test_degree_one_algebra():
    ext = make_extension(QI, [(-2, -1), 1], [(2, 1)], 2 + 1j)
    spec = CyclicAlgebraSpec(ext, ext.base_element(3))
    k0 = ext.element([(5, -2)])
    m = left_regular_matrix(spec.element([k0]), spec)
    assert len(m) == 1 and m[0][0] == k0


def test_quaternion_matrix_is_alamouti():
    spec = algebra_preset("quaternion")
    ext = spec.ext
    # s1 = 1 + 2i, s2 = -3 + i as elements of Q(i) = Q[x]/(x^2 + 1)
    d = spec.element([ext.element([1, 2]), ext.element([-3, 1])])
    m = [[embed_complex(e, ext) for e in row] for row in left_regular_matrix(d, spec)]
    s1, s2 = 1 + 2j, -3 + 1j
    want = [[s1, -s2.conjugate()], [s2, s1.conjugate()]]
    assert all(abs(m[r][c] - want[r][c]) < 1e-15 for r in range(2) for c in range(2))


def test_golden_diagonal_matrix():
    spec = algebra_preset("golden")
    ext = spec.ext
    alpha = ext.element([(1, 1), (0, -1)])
    m = left_regular_matrix(spec.element([alpha, ext.zero]), spec)
    assert m[0][0] == alpha and m[1][1] == apply_sigma(alpha, ext, 1)
    assert m[0][1].is_zero() and m[1][0].is_zero()


def test_exact_det_examples():
    spec = algebra_preset("golden")
    ext = spec.ext
    ident = [[ext.one, ext.zero], [ext.zero, ext.one]]
    assert exact_det(ident, ext) == ext.one
    alpha = ext.element([(1, 1), (0, -1)])
    m = left_regular_matrix(spec.element([alpha, ext.zero]), spec)
    assert exact_det(m, ext) == ext.scalar((2, 1))
    q = algebra_preset("quaternion")
    s1 = q.ext.element([1, 1])
    assert exact_det(left_regular_matrix(q.element([s1, q.ext.zero]), q), q.ext) == q.ext.scalar(2)


def test_exact_det_singular_and_pivoting():
    ext = GOLDEN
    a = ext.element([(1, 0), (2, 0)])
    sing = [[a, a.scale(ext.base_element(3))], [a, a.scale(ext.base_element(3))]]
    assert exact_det(sing, ext).is_zero()
    swap = [[ext.zero, ext.one], [ext.one, ext.zero]]
    assert exact_det(swap, ext) == -ext.one


@pytest.mark.parametrize("name", ALL_ALGEBRAS)
def test_reduced_norm_lies_in_base(name):
    spec = algebra_preset(name)
    rng = random.Random(5)
    for _ in range(100 if spec.degree == 2 else 15):
        d = rand_alg(spec, rng)
        assert exact_det(left_regular_matrix(d, spec), spec.ext).in_base()


def test_exact_det_matches_numeric():
    spec = algebra_preset("cyclotomic4")
    rng = random.Random(9)
    import numpy as np
    for _ in range(5):
        m = left_regular_matrix(rand_alg(spec, rng), spec)
        num = np.array([[embed_complex(e, spec.ext) for e in row] for row in m])
        exact = embed_complex(exact_det(m, spec.ext), spec.ext)
        assert abs(exact - np.linalg.det(num)) <= 1e-8 * max(1.0, abs(exact))


def test_algebra_json_roundtrip(tmp_path):
    spec = algebra_preset("golden")
    doc = algebra_to_json(spec)
    text = json.dumps(doc)
    for src in (doc, text):
        again = load_algebra_json(src)
        assert again.ext.min_poly == spec.ext.min_poly and again.gamma == spec.gamma
    path = tmp_path / "alg.json"
    path.write_text(text)
    assert load_algebra_json(str(path)).ext.sigma_image == spec.ext.sigma_image


def test_algebra_json_rejects_float_coefficients():
    doc = algebra_to_json(algebra_preset("golden"))
    doc["gamma"] = [[0.0, 1], [1, 1]]
    with pytest.raises(ValueError):
        load_algebra_json(doc)


def test_eisenstein_extension():
    # K = Q(omega, sqrt(2)) over Q(omega), sigma(x) = -x
    ext = make_extension(FieldKind.EISENSTEIN, [-2, 0, 1], [0, -1], math.sqrt(2))
    spec = CyclicAlgebraSpec(ext, ext.base_element(0, 1))
    rng = random.Random(2)
    for _ in range(20):
        a, b = rand_alg(spec, rng), rand_alg(spec, rng)
        assert mat_eq(left_regular_matrix(algebra_mul(a, b, spec), spec),
                      matmul(left_regular_matrix(a, spec), left_regular_matrix(b, spec), ext))
