"""Exact arithmetic for cyclic extensions K/F and cyclic algebras (K/F, sigma, gamma).

The base field F is one of Q, Q(i) or Q(omega) with omega = (-1 + sqrt(-3))/2.
A cyclic extension K of degree n is presented as F[x]/(f) together with the
image sigma(x) of a generator of its Galois group, and a pinned complex root
that fixes the embedding K -> C.

Everything here works on arbitrary-precision rationals (:class:`fractions.Fraction`).
Values are immutable.
"""

from __future__ import annotations

import cmath
import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

__all__ = [
    "FieldKind", "BaseFieldElement", "ExactFieldElement", "CyclicExtension",
    "CyclicAlgebraSpec", "AlgebraElement", "field_add", "field_mul",
    "apply_sigma", "norm_to_base", "algebra_mul", "left_regular_matrix",
    "exact_det", "embed_complex", "matmul", "extension_preset",
    "algebra_preset", "load_algebra_json", "algebra_to_json", "PRESETS",
]

OMEGA = complex(-0.5, math.sqrt(3.0) / 2.0)


class FieldKind(enum.Enum):
    RATIONAL = "Q"
    GAUSSIAN = "Qi"
    EISENSTEIN = "Qomega"

    @property
    def dim(self) -> int:
        return 1 if self is FieldKind.RATIONAL else 2


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        raise TypeError("floating values are not accepted in exact arithmetic")
    return Fraction(v)


class BaseFieldElement:
    """Element re + im*j of F, where j = i (GAUSSIAN) or omega (EISENSTEIN).

    For EISENSTEIN the pair is the coordinate vector (a, b) of a + b*omega,
    not real and imaginary parts.
    """

    __slots__ = ("re", "im", "kind")

    def __init__(self, re=0, im=0, kind: FieldKind = FieldKind.GAUSSIAN):
        re, im = _frac(re), _frac(im)
        if kind is FieldKind.RATIONAL and im != 0:
            raise ValueError("rational base field element with nonzero second coordinate")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)
        object.__setattr__(self, "kind", kind)

    def __setattr__(self, name, value):
        raise AttributeError("BaseFieldElement is immutable")

    @classmethod
    def _raw(cls, re: Fraction, im: Fraction, kind: FieldKind) -> "BaseFieldElement":
        obj = object.__new__(cls)
        object.__setattr__(obj, "re", re)
        object.__setattr__(obj, "im", im)
        object.__setattr__(obj, "kind", kind)
        return obj

    def _check(self, other: "BaseFieldElement") -> None:
        if other.kind is not self.kind:
            raise ValueError(f"base field mismatch: {self.kind.value} vs {other.kind.value}")

    def _coerce(self, other) -> "BaseFieldElement":
        if isinstance(other, BaseFieldElement):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return BaseFieldElement._raw(Fraction(other), Fraction(0), self.kind)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return BaseFieldElement._raw(self.re + other.re, self.im + other.im, self.kind)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return BaseFieldElement._raw(self.re - other.re, self.im - other.im, self.kind)

    def __rsub__(self, other):
        return -self + other

    def __neg__(self):
        return BaseFieldElement._raw(-self.re, -self.im, self.kind)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b, c, d = self.re, self.im, other.re, other.im
        if self.kind is FieldKind.RATIONAL:
            return BaseFieldElement._raw(a * c, Fraction(0), self.kind)
        if self.kind is FieldKind.GAUSSIAN:
            return BaseFieldElement._raw(a * c - b * d, a * d + b * c, self.kind)
        # omega^2 = -1 - omega
        bd = b * d
        return BaseFieldElement._raw(a * c - bd, a * d + b * c - bd, self.kind)

    __rmul__ = __mul__

    def conjugate(self) -> "BaseFieldElement":
        if self.kind is FieldKind.EISENSTEIN:
            # conj(omega) = -1 - omega
            return BaseFieldElement._raw(self.re - self.im, -self.im, self.kind)
        return BaseFieldElement._raw(self.re, -self.im, self.kind)

    def abs2(self) -> Fraction:
        """Squared complex modulus (the norm from F to Q for the imaginary fields)."""
        a, b = self.re, self.im
        if self.kind is FieldKind.EISENSTEIN:
            return a * a - a * b + b * b
        return a * a + b * b

    def inverse(self) -> "BaseFieldElement":
        n = self.abs2()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        c = self.conjugate()
        return BaseFieldElement._raw(c.re / n, c.im / n, self.kind)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if not isinstance(other, BaseFieldElement):
            return NotImplemented
        return self.kind is other.kind and self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im, self.kind))

    def to_complex(self) -> complex:
        if self.kind is FieldKind.EISENSTEIN:
            return float(self.re) + float(self.im) * OMEGA
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if self.kind is FieldKind.RATIONAL:
            return f"{self.re}"
        unit = "i" if self.kind is FieldKind.GAUSSIAN else "w"
        return f"({self.re} + {self.im}{unit})"

    def to_json(self) -> list:
        coords = [self.re] if self.kind is FieldKind.RATIONAL else [self.re, self.im]
        return [[c.numerator, c.denominator] for c in coords]

    @classmethod
    def from_json(cls, data, kind: FieldKind) -> "BaseFieldElement":
        if len(data) != kind.dim:
            raise ValueError(f"expected {kind.dim} coordinate pair(s) for base {kind.value}, got {data!r}")
        for pair in data:
            if len(pair) != 2 or not all(isinstance(v, int) and not isinstance(v, bool) for v in pair):
                raise ValueError(f"coefficients must be integer (numerator, denominator) pairs: {pair!r}")
            if pair[1] <= 0:
                raise ValueError(f"denominator must be positive: {pair!r}")
        re = Fraction(*data[0])
        im = Fraction(*data[1]) if kind.dim == 2 else Fraction(0)
        return cls(re, im, kind)


def base(kind: FieldKind, re=0, im=0) -> BaseFieldElement:
    return BaseFieldElement(re, im, kind)


@dataclass(frozen=True, eq=False)
class ExactFieldElement:
    """Element of K = F[x]/(f) in the power basis 1, x, ..., x^(n-1)."""

    coeffs: tuple
    ext: "CyclicExtension" = field(repr=False)

    def __post_init__(self):
        if len(self.coeffs) != self.ext.degree:
            raise ValueError(
                f"element has {len(self.coeffs)} coordinates, extension degree is {self.ext.degree}")

    def _same(self, other: "ExactFieldElement") -> None:
        if other.ext is not self.ext and other.ext != self.ext:
            raise ValueError("operands belong to different extensions")

    def __add__(self, other):
        if isinstance(other, (int, Fraction, BaseFieldElement)):
            other = self.ext.scalar(other)
        self._same(other)
        return ExactFieldElement(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.ext)

    __radd__ = __add__

    def __neg__(self):
        return ExactFieldElement(tuple(-a for a in self.coeffs), self.ext)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, BaseFieldElement)):
            return self.scale(other)
        if not isinstance(other, ExactFieldElement):
            return NotImplemented
        return self.ext.mul(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def scale(self, c) -> "ExactFieldElement":
        if not isinstance(c, BaseFieldElement):
            c = self.ext.base_element(c)
        return ExactFieldElement(tuple(a * c for a in self.coeffs), self.ext)

    def __pow__(self, e: int):
        if e < 0:
            return self.ext.inverse(self) ** (-e)
        acc, b = self.ext.one, self
        while e:
            if e & 1:
                acc = acc * b
            b = b * b
            e >>= 1
        return acc

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def in_base(self) -> bool:
        return all(c.is_zero() for c in self.coeffs[1:])

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, BaseFieldElement)):
            other = self.ext.scalar(other)
        if not isinstance(other, ExactFieldElement):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __complex__(self):
        return self.ext.embed(self)

    def __repr__(self):
        return "K" + repr(list(self.coeffs))

    def to_json(self) -> list:
        return [c.to_json() for c in self.coeffs]


@dataclass(frozen=True)
class CyclicExtension:
    """Cyclic Galois extension K = F[x]/(f) of degree n with generator sigma.

    min_poly lists f's coefficients from the constant term upward (n + 1
    entries, last one equal to 1). sigma_image holds the power-basis
    coordinates of sigma(x). complex_root pins the embedding of x into C.
    """

    base_kind: FieldKind
    min_poly: tuple
    sigma_image: tuple
    complex_root: complex
    name: str = ""

    def __post_init__(self):
        n = self.degree
        if n < 1:
            raise ValueError("degree must be positive")
        if any(c.kind is not self.base_kind for c in self.min_poly + self.sigma_image):
            raise ValueError("coefficients must lie in the base field")
        if self.min_poly[-1] != 1:
            raise ValueError("minimal polynomial must be monic")
        if len(self.sigma_image) != n:
            raise ValueError("sigma_image must have one coordinate per power-basis element")
        x = self.gen
        sx = self.element(self.sigma_image)
        if not self.poly_eval(sx).is_zero():
            raise ValueError("sigma(x) is not a root of f: sigma is not a ring map")
        y = x
        for j in range(1, n + 1):
            y = self.sigma(y)
            if j < n and y == x:
                raise ValueError(f"sigma has order {j}, expected {n}")
        if y != x:
            raise ValueError("sigma^n does not fix x")
        val = sum(c.to_complex() * self.complex_root ** j for j, c in enumerate(self.min_poly))
        if abs(val) > 1e-10:
            raise ValueError(f"complex_root is not a root of f (|f(root)| = {abs(val):.3g})")

    @property
    def degree(self) -> int:
        return len(self.min_poly) - 1

    def base_element(self, re=0, im=0) -> BaseFieldElement:
        if isinstance(re, BaseFieldElement):
            if re.kind is not self.base_kind:
                raise ValueError("base field mismatch")
            return re
        if isinstance(re, (tuple, list)):
            re, im = re
        return BaseFieldElement(re, im, self.base_kind)

    def element(self, coeffs: Sequence) -> ExactFieldElement:
        coeffs = tuple(self.base_element(c) for c in coeffs)
        return ExactFieldElement(coeffs, self)

    def scalar(self, c) -> ExactFieldElement:
        zero = self.base_element(0)
        return ExactFieldElement((self.base_element(c),) + (zero,) * (self.degree - 1), self)

    @cached_property
    def zero(self) -> ExactFieldElement:
        return self.scalar(0)

    @cached_property
    def one(self) -> ExactFieldElement:
        return self.scalar(1)

    @cached_property
    def gen(self) -> ExactFieldElement:
        """The class of x."""
        n = self.degree
        if n == 1:
            return self.scalar(-self.min_poly[0])
        return self.element([0, 1] + [0] * (n - 2))

    def add(self, a: ExactFieldElement, b: ExactFieldElement) -> ExactFieldElement:
        self._own(a, b)
        return a + b

    def _own(self, *elems: ExactFieldElement) -> None:
        for e in elems:
            if len(e.coeffs) != self.degree:
                raise ValueError(f"degree mismatch: element of length {len(e.coeffs)} in degree {self.degree} extension")

    def mul(self, a: ExactFieldElement, b: ExactFieldElement) -> ExactFieldElement:
        self._own(a, b)
        n = self.degree
        zero = self.base_element(0)
        prod = [zero] * (2 * n - 1)
        for i, ai in enumerate(a.coeffs):
            if ai.is_zero():
                continue
            for j, bj in enumerate(b.coeffs):
                if not bj.is_zero():
                    prod[i + j] = prod[i + j] + ai * bj
        # x^n = -(f_0 + ... + f_{n-1} x^{n-1})
        f = self.min_poly
        for d in range(2 * n - 2, n - 1, -1):
            c = prod[d]
            if c.is_zero():
                continue
            prod[d] = zero
            for j in range(n):
                if not f[j].is_zero():
                    prod[d - n + j] = prod[d - n + j] - c * f[j]
        return ExactFieldElement(tuple(prod[:n]), self)

    def poly_eval(self, a: ExactFieldElement) -> ExactFieldElement:
        acc = self.zero
        for c in reversed(self.min_poly):
            acc = acc * a + c
        return acc

    @cached_property
    def _sigma_powers(self) -> tuple:
        sx = ExactFieldElement(self.sigma_image, self)
        powers = [self.one]
        for _ in range(1, self.degree):
            powers.append(self.mul(powers[-1], sx))
        return tuple(powers)

    def sigma(self, a: ExactFieldElement, j: int = 1) -> ExactFieldElement:
        self._own(a)
        n = self.degree
        j %= n
        zero = self.base_element(0)
        for _ in range(j):
            out = [zero] * n
            for c, p in zip(a.coeffs, self._sigma_powers):
                if c.is_zero():
                    continue
                for t in range(n):
                    if not p.coeffs[t].is_zero():
                        out[t] = out[t] + c * p.coeffs[t]
            a = ExactFieldElement(tuple(out), self)
        return a

    def norm(self, a: ExactFieldElement) -> BaseFieldElement:
        prod = a
        for j in range(1, self.degree):
            prod = self.mul(prod, self.sigma(a, j))
        if not prod.in_base():
            raise ArithmeticError(f"norm has nonzero non-constant coordinates: {prod!r}")
        return prod.coeffs[0]

    def inverse(self, a: ExactFieldElement) -> ExactFieldElement:
        """a^-1 = (sigma(a) ... sigma^(n-1)(a)) / N(a)."""
        if a.is_zero():
            raise ZeroDivisionError("inverse of zero")
        cof = self.one
        for j in range(1, self.degree):
            cof = self.mul(cof, self.sigma(a, j))
        return cof.scale(self.norm(a).inverse())

    def embed(self, a: ExactFieldElement) -> complex:
        self._own(a)
        acc = 0j
        p = 1 + 0j
        for c in a.coeffs:
            acc += c.to_complex() * p
            p *= self.complex_root
        return acc

    def to_json(self) -> dict:
        return {
            "base": self.base_kind.value,
            "degree": self.degree,
            "min_poly": [c.to_json() for c in self.min_poly],
            "sigma_image": [c.to_json() for c in self.sigma_image],
            "complex_root": [self.complex_root.real, self.complex_root.imag],
        }


def make_extension(kind: FieldKind, min_poly: Sequence, sigma_image: Sequence,
                   root: complex, name: str = "") -> CyclicExtension:
    def conv(c):
        if isinstance(c, BaseFieldElement):
            return c
        return BaseFieldElement(*(c if isinstance(c, tuple) else (c,)), kind=kind)

    return CyclicExtension(kind, tuple(conv(c) for c in min_poly),
                           tuple(conv(c) for c in sigma_image), complex(root), name)


@dataclass(frozen=True)
class CyclicAlgebraSpec:
    ext: CyclicExtension
    gamma: BaseFieldElement
    name: str = ""

    def __post_init__(self):
        if self.gamma.kind is not self.ext.base_kind:
            raise ValueError("gamma must lie in the base field")
        if self.gamma.is_zero():
            raise ValueError("gamma must be nonzero")

    @property
    def degree(self) -> int:
        return self.ext.degree

    def element(self, parts: Sequence[ExactFieldElement]) -> "AlgebraElement":
        return AlgebraElement(tuple(parts), self)

    @property
    def u(self) -> "AlgebraElement":
        n = self.degree
        if n == 1:
            return self.element([self.ext.scalar(self.gamma)])
        return self.element([self.ext.zero, self.ext.one] + [self.ext.zero] * (n - 2))

    def from_field(self, k: ExactFieldElement) -> "AlgebraElement":
        return self.element([k] + [self.ext.zero] * (self.degree - 1))


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """d = k_0 + u k_1 + ... + u^(n-1) k_(n-1).

    The field coefficients are written to the right of the powers of u. With
    this reading :func:`left_regular_matrix` is multiplicative for every n.
    For n = 2 it coincides with the left-coefficient form because sigma is an
    involution.
    """

    parts: tuple
    spec: CyclicAlgebraSpec = field(repr=False)

    def __post_init__(self):
        if len(self.parts) != self.spec.degree:
            raise ValueError(f"expected {self.spec.degree} parts, got {len(self.parts)}")

    def __mul__(self, other: "AlgebraElement") -> "AlgebraElement":
        return algebra_mul(self, other, self.spec)

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        return AlgebraElement(tuple(a + b for a, b in zip(self.parts, other.parts)), self.spec)

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.parts == other.parts

    def __hash__(self):
        return hash(self.parts)


# -- module-level operations ---------------------------------------------------

def field_add(a: ExactFieldElement, b: ExactFieldElement, ext: CyclicExtension) -> ExactFieldElement:
    return ext.add(a, b)


def field_mul(a: ExactFieldElement, b: ExactFieldElement, ext: CyclicExtension) -> ExactFieldElement:
    return ext.mul(a, b)


def apply_sigma(a: ExactFieldElement, ext: CyclicExtension, j: int = 1) -> ExactFieldElement:
    return ext.sigma(a, j)


def norm_to_base(a: ExactFieldElement, ext: CyclicExtension) -> BaseFieldElement:
    return ext.norm(a)


def embed_complex(a: ExactFieldElement, ext: CyclicExtension) -> complex:
    return ext.embed(a)


def algebra_mul(d1: AlgebraElement, d2: AlgebraElement, spec: CyclicAlgebraSpec) -> AlgebraElement:
    """Product using k u = u sigma(k) and u^n = gamma.

    (u^i a)(u^j b) = u^(i+j) sigma^j(a) b, and u^(i+j) = gamma u^(i+j-n) on wrap.
    Equivalently u k = sigma^-1(k) u, which is u k = sigma(k) u when n = 2.
    """
    n = spec.degree
    if len(d1.parts) != n or len(d2.parts) != n:
        raise ValueError("shape mismatch")
    ext = spec.ext
    gamma = spec.gamma
    out = [ext.zero] * n
    for j, b in enumerate(d2.parts):
        if b.is_zero():
            continue
        for i, a in enumerate(d1.parts):
            if a.is_zero():
                continue
            term = ext.mul(ext.sigma(a, j), b)
            t = i + j
            if t >= n:
                term = term.scale(gamma)
                t -= n
            out[t] = out[t] + term
    return AlgebraElement(tuple(out), spec)


def left_regular_matrix(d: AlgebraElement, spec: CyclicAlgebraSpec) -> list:
    """n x n matrix over K: entry (r, c) = sigma^c(k_(r-c)), times gamma above the diagonal."""
    n = spec.degree
    ext = spec.ext
    k = d.parts
    if len(k) != n:
        raise ValueError("shape mismatch")
    rows = [[None] * n for _ in range(n)]
    for c in range(n):
        for r in range(n):
            if r >= c:
                rows[r][c] = ext.sigma(k[r - c], c)
            else:
                rows[r][c] = ext.sigma(k[n + r - c], c).scale(spec.gamma)
    return rows


def matmul(a: list, b: list, ext: CyclicExtension) -> list:
    n, m, p = len(a), len(b), len(b[0])
    out = [[ext.zero] * p for _ in range(n)]
    for i in range(n):
        for j in range(p):
            acc = ext.zero
            for t in range(m):
                if not a[i][t].is_zero() and not b[t][j].is_zero():
                    acc = acc + ext.mul(a[i][t], b[t][j])
            out[i][j] = acc
    return out


def exact_det(m: list, ext: CyclicExtension) -> ExactFieldElement:
    """Determinant by Gaussian elimination over K; pivot = first nonzero entry."""
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValueError("matrix must be square")
    a = [list(row) for row in m]
    det = ext.one
    for col in range(n):
        piv = next((r for r in range(col, n) if not a[r][col].is_zero()), None)
        if piv is None:
            return ext.zero
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        p = a[col][col]
        det = ext.mul(det, p)
        if col == n - 1:
            break
        pinv = ext.inverse(p)
        for r in range(col + 1, n):
            if a[r][col].is_zero():
                continue
            f = ext.mul(a[r][col], pinv)
            for c in range(col + 1, n):
                if not a[col][c].is_zero():
                    a[r][c] = a[r][c] - ext.mul(f, a[col][c])
    return det


# -- presets -------------------------------------------------------------------

Q, QI = FieldKind.RATIONAL, FieldKind.GAUSSIAN
_GOLDEN_RATIO = (1 + math.sqrt(5.0)) / 2


def _build_extensions() -> dict:
    return {
        # K = Q(i, sqrt5) = Q(i)[x]/(x^2 - x - 1), x = phi, sigma(phi) = psi = 1 - phi
        "golden": make_extension(QI, [-1, -1, 1], [1, -1], _GOLDEN_RATIO, "golden"),
        # K = Q(zeta_8) = Q(i)[x]/(x^2 - i), sigma(zeta) = zeta^5 = -zeta
        "cyclotomic8": make_extension(QI, [(0, -1), 0, 1], [0, -1], cmath.exp(1j * math.pi / 4),
                                      "cyclotomic8"),
        # K = Q(zeta_16) = Q(i)[x]/(x^4 - i), sigma(zeta) = zeta^5 = i*zeta
        "cyclotomic16": make_extension(QI, [(0, -1), 0, 0, 0, 1], [0, (0, 1), 0, 0],
                                       cmath.exp(1j * math.pi / 8), "cyclotomic16"),
        # C/R realized as Q(i)/Q with complex conjugation
        "quaternion": make_extension(Q, [1, 0, 1], [0, -1], 1j, "quaternion"),
    }


_EXTENSIONS = _build_extensions()

# name -> (extension, gamma)
PRESETS = {
    "golden": ("golden", (0, 1)),
    # split algebra: negative control, gamma = 1 is a norm
    "golden-broken": ("golden", (1, 0)),
    # shaping demonstration only: i = N(i*zeta) so this is not a division algebra
    "cyclotomic2": ("cyclotomic8", (0, 1)),
    "cyclotomic4": ("cyclotomic16", (0, 1)),
    "quaternion": ("quaternion", (-1, 0)),
}


def extension_preset(name: str) -> CyclicExtension:
    try:
        return _EXTENSIONS[name]
    except KeyError:
        raise KeyError(f"unknown extension preset {name!r}; known: {sorted(_EXTENSIONS)}") from None


def algebra_preset(name: str) -> CyclicAlgebraSpec:
    try:
        ext_name, g = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown algebra preset {name!r}; known: {sorted(PRESETS)}") from None
    ext = _EXTENSIONS[ext_name]
    return CyclicAlgebraSpec(ext, ext.base_element(*g), name)


def load_algebra_json(doc) -> CyclicAlgebraSpec:
    """Build an algebra from a JSON document (dict, JSON string or path)."""
    if isinstance(doc, str):
        if doc.lstrip().startswith("{"):
            doc = json.loads(doc)
        else:
            with open(doc) as fh:
                doc = json.load(fh)
    kind = FieldKind(doc["base"])
    n = int(doc["degree"])
    min_poly = [BaseFieldElement.from_json(c, kind) for c in doc["min_poly"]]
    sigma_image = [BaseFieldElement.from_json(c, kind) for c in doc["sigma_image"]]
    if len(min_poly) != n + 1:
        raise ValueError(f"min_poly needs {n + 1} coefficients for degree {n}")
    root = complex(*doc["complex_root"])
    ext = CyclicExtension(kind, tuple(min_poly), tuple(sigma_image), root, doc.get("name", ""))
    gamma = BaseFieldElement.from_json(doc["gamma"], kind)
    return CyclicAlgebraSpec(ext, gamma, doc.get("name", ""))


def algebra_to_json(spec: CyclicAlgebraSpec) -> dict:
    doc = spec.ext.to_json()
    doc["gamma"] = spec.gamma.to_json()
    if spec.name:
        doc["name"] = spec.name
    return doc
