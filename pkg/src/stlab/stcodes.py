"""Space-time code constructions and their performance verifiers.

A :class:`SpaceTimeCode` is real-linear: with the message flattened to real
coordinates ``v = (x_1, y_1, ..., x_k, y_k)`` (real and imaginary parts of the
symbols) the codeword is ``scale * sum_m v_m B_m``. Codes built from a cyclic
algebra additionally carry an :class:`ExactBackend` so that determinants can be
computed without rounding.
"""

from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Optional, Sequence

import numpy as np

from .exactalg import (
    BaseFieldElement, FieldKind, ExactFieldElement, CyclicAlgebraSpec, algebra_preset, left_regular_matrix,
    exact_det, extension_preset, load_algebra_json, algebra_to_json, PRESETS,
)

__all__ = [
    "LatticeKind", "SignalSet", "ExactBackend", "SpaceTimeCode", "LatticeInfo",
    "alamouti_code", "golden_code", "cda_code", "code_from_spec", "code_preset", "CODE_PRESETS",
    "hurwitz_radon_max_k", "orthogonal_design_check", "rank_criterion_verify",
    "min_det", "nvd_check", "vectorize_generator", "vec_real", "shaping_unitarity",
    "shaping_matrix", "cyclotomic_shaping_basis", "normalized_min_det",
    "golden_constants", "RankReport", "MinDetResult", "NvdReport", "NormalizedMinDet",
]

OMEGA = complex(-0.5, math.sqrt(3.0) / 2.0)
TOL = 1e-12


class LatticeKind(enum.Enum):
    Z = "Z"
    Z_I = "Z_I"
    Z_OMEGA = "Z_OMEGA"

    @property
    def dim(self) -> int:
        return 1 if self is LatticeKind.Z else 2

    @property
    def generators(self) -> tuple:
        return {LatticeKind.Z: (1 + 0j,), LatticeKind.Z_I: (1 + 0j, 1j),
                LatticeKind.Z_OMEGA: (1 + 0j, OMEGA)}[self]


@dataclass(frozen=True)
class SignalSet:
    """Finite box of a lattice: points whose lattice coordinates lie in [-m, m].

    Points and messages are always enumerated in lexicographic order of their
    integer coordinates; every tie-break in the package relies on this order.
    """

    lattice_kind: LatticeKind = LatticeKind.Z_I
    box_radius: int = 1

    def __post_init__(self):
        if self.box_radius < 1:
            raise ValueError("box_radius must be >= 1")

    @property
    def dim(self) -> int:
        return self.lattice_kind.dim

    @property
    def size(self) -> int:
        return (2 * self.box_radius + 1) ** self.dim

    @cached_property
    def coords(self) -> np.ndarray:
        r = range(-self.box_radius, self.box_radius + 1)
        return np.array(list(itertools.product(r, repeat=self.dim)), dtype=np.int64)

    @cached_property
    def points(self) -> np.ndarray:
        return self.to_complex(self.coords)

    @cached_property
    def basis(self) -> np.ndarray:
        """2 x d real matrix taking integer coordinates to (re, im)."""
        g = self.lattice_kind.generators
        return np.array([[z.real for z in g], [z.imag for z in g]])

    def to_complex(self, coords) -> np.ndarray:
        coords = np.asarray(coords)
        g = np.array(self.lattice_kind.generators)
        return coords @ g

    def coord_transform(self, k: int) -> np.ndarray:
        """Block-diagonal 2k x kd map from message coordinates to real coordinates."""
        return _coord_transform(self.lattice_kind, k)

    def messages(self, k: int) -> np.ndarray:
        """All messages as a (size**k, k*d) integer array, lexicographic order."""
        return _box_points(self.box_radius, k * self.dim)

    def contains(self, coords) -> bool:
        coords = np.asarray(coords)
        return bool(np.all(np.abs(coords) <= self.box_radius))

    def second_moment(self) -> tuple:
        """Mean (2,) and second-moment matrix (2, 2) of (re, im) for a uniform symbol."""
        p = self.points
        re_im = np.stack([p.real, p.imag])
        return re_im.mean(axis=1), re_im @ re_im.T / len(p)


@lru_cache(maxsize=32)
def _coord_transform(kind: LatticeKind, k: int) -> np.ndarray:
    g = kind.generators
    t = np.kron(np.eye(k), np.array([[z.real for z in g], [z.imag for z in g]]))
    t.setflags(write=False)
    return t


def _box_points(m: int, dim: int) -> np.ndarray:
    return _box_points_cached(m, dim).copy()


@lru_cache(maxsize=32)
def _box_points_cached(m: int, dim: int) -> np.ndarray:
    side = 2 * m + 1
    if side ** dim > 20_000_000:
        raise ValueError(f"box too large to enumerate: {side}^{dim} points")
    idx = np.indices((side,) * dim, dtype=np.int8).reshape(dim, -1).T
    return idx.astype(np.int64) - m


def _box_chunks(m: int, dim: int, chunk: int = 1 << 17):
    """Yield (offset, coords) chunks of the box in lexicographic order."""
    side = 2 * m + 1
    total = side ** dim
    weights = side ** np.arange(dim - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        coords = (idx[:, None] // weights[None, :]) % side - m
        yield start, coords


# -- exact backend -------------------------------------------------------------

@dataclass(frozen=True)
class ExactBackend:
    """Cyclic algebra, shaping basis and exact squared scale of a code.

    ``split`` means the base field is Q while symbols are complex: each symbol
    then supplies two consecutive rational coordinates.
    """

    spec: CyclicAlgebraSpec
    basis: tuple
    scale_sq: Fraction
    split: bool = False

    @property
    def n(self) -> int:
        return self.spec.degree

    @property
    def n_coords(self) -> int:
        return self.n * len(self.basis)

    def parts(self, field_coords: Sequence) -> list:
        ext = self.spec.ext
        nb = len(self.basis)
        out = []
        for i in range(self.n):
            acc = ext.zero
            for j, beta in enumerate(self.basis):
                t = field_coords[i * nb + j]
                if t:
                    acc = acc + beta.scale(t)
            out.append(acc)
        return out

    def matrix(self, field_coords: Sequence) -> list:
        """Exact unscaled code matrix over K."""
        return left_regular_matrix(self.spec.element(self.parts(field_coords)), self.spec)

    def field_coords(self, coords, lattice_kind: LatticeKind) -> list:
        """Integer message coordinates -> base-field coordinates."""
        ext = self.spec.ext
        kind = ext.base_kind
        coords = [int(c) for c in np.asarray(coords).ravel()]
        if lattice_kind is LatticeKind.Z or self.split:
            return [ext.base_element(c) for c in coords]
        pairs = list(zip(coords[0::2], coords[1::2]))
        if lattice_kind is LatticeKind.Z_I and kind is FieldKind.GAUSSIAN:
            return [ext.base_element(a, b) for a, b in pairs]
        if lattice_kind is LatticeKind.Z_OMEGA and kind is FieldKind.EISENSTEIN:
            return [ext.base_element(a, b) for a, b in pairs]
        raise ValueError(f"signal lattice {lattice_kind.value} is not contained in base field {kind.value}")

    @cached_property
    def det_polynomial(self) -> tuple:
        """det of the unscaled matrix as a degree-n form in the base-field coordinates.

        Returns (monomials, coefficients): monomials are sorted tuples of
        variable indices, coefficients are base-field elements.
        """
        n = self.n
        nb = len(self.basis)
        ext = self.spec.ext
        # entry (r, c) depends only on part (r - c) mod n, hence on nb variables
        forms = {}
        for r in range(n):
            for c in range(n):
                part = (r - c) % n
                form = {}
                for j in range(nb):
                    coords = [0] * self.n_coords
                    coords[part * nb + j] = 1
                    entry = self.matrix(coords)[r][c]
                    if not entry.is_zero():
                        form[part * nb + j] = entry
                forms[r, c] = form
        poly: dict = {}
        for perm in itertools.permutations(range(n)):
            sign = _perm_sign(perm)
            terms = {(): ext.one if sign > 0 else -ext.one}
            for r in range(n):
                form = forms[r, perm[r]]
                nxt: dict = {}
                for mono, coef in terms.items():
                    for v, e in form.items():
                        key = tuple(sorted(mono + (v,)))
                        val = coef * e
                        nxt[key] = nxt[key] + val if key in nxt else val
                terms = nxt
            for mono, coef in terms.items():
                poly[mono] = poly[mono] + coef if mono in poly else coef
        monos, coefs = [], []
        for mono in sorted(poly):
            c = poly[mono]
            if c.is_zero():
                continue
            if not c.in_base():
                raise ArithmeticError("reduced norm polynomial has coefficients outside F")
            monos.append(mono)
            coefs.append(c.coeffs[0])
        return tuple(monos), tuple(coefs)

    def to_json(self) -> dict:
        name = self.spec.name if self.spec.name in PRESETS else None
        return {
            "algebra": name if name else algebra_to_json(self.spec),
            "basis": [b.to_json() for b in self.basis],
            "scale_sq": [self.scale_sq.numerator, self.scale_sq.denominator],
            "split": self.split,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ExactBackend":
        alg = doc["algebra"]
        spec = algebra_preset(alg) if isinstance(alg, str) else load_algebra_json(alg)
        ext = spec.ext
        basis = tuple(ext.element([BaseFieldElement.from_json(c, ext.base_kind) for c in b])
                      for b in doc["basis"])
        return cls(spec, basis, Fraction(*doc["scale_sq"]), bool(doc.get("split", False)))


def _perm_sign(perm) -> int:
    sign, seen = 1, set()
    for i in range(len(perm)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


# -- codes ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpaceTimeCode:
    name: str
    n: int
    k: int
    dispersion: np.ndarray  # (2k, n, n) complex, unscaled
    scale: float = 1.0
    exact: Optional[ExactBackend] = None
    lattice_kind: LatticeKind = LatticeKind.Z_I

    def __post_init__(self):
        disp = np.asarray(self.dispersion, dtype=complex)
        if disp.size and disp.shape != (2 * self.k, self.n, self.n):
            raise ValueError(f"dispersion shape {disp.shape} != {(2 * self.k, self.n, self.n)}")
        object.__setattr__(self, "dispersion", disp)
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @property
    def scaled_dispersion(self) -> np.ndarray:
        return self.scale * self.dispersion

    def encode(self, symbols) -> np.ndarray:
        """Code matrix for a sequence of k complex symbols."""
        s = np.asarray(symbols, dtype=complex).ravel()
        if s.shape != (self.k,):
            raise ValueError(f"expected {self.k} symbols, got {s.shape[0]}")
        v = np.empty(2 * self.k)
        v[0::2], v[1::2] = s.real, s.imag
        return self.encode_real(v)

    def encode_real(self, v) -> np.ndarray:
        """Code matrix (or stack of them) for real coordinate vector(s) v of length 2k."""
        v = np.asarray(v, dtype=float)
        return np.tensordot(v, self.scaled_dispersion, axes=([-1], [0]))

    def encode_exact(self, coords) -> list:
        """Exact unscaled matrix over K for integer message coordinates."""
        if self.exact is None:
            raise ValueError(f"code {self.name!r} has no exact backend")
        return self.exact.matrix(self.exact.field_coords(coords, self.lattice_kind))

    def scaled(self, c) -> "SpaceTimeCode":
        """Same code with every codeword multiplied by c (c rational keeps the backend exact)."""
        c = Fraction(c)
        exact = self.exact
        if exact is not None:
            exact = replace(exact, scale_sq=exact.scale_sq * c * c)
        return replace(self, scale=self.scale * float(c), exact=exact)

    def to_json(self) -> dict:
        doc = {
            "name": self.name, "n": self.n, "k": self.k, "scale": self.scale,
            "lattice_kind": self.lattice_kind.value,
            "dispersion": [[[[z.real, z.imag] for z in row] for row in b] for b in self.dispersion],
        }
        if self.exact is not None:
            doc["exact_backend"] = self.exact.to_json()
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "SpaceTimeCode":
        n, k = int(doc["n"]), int(doc["k"])
        disp = np.array(doc["dispersion"], dtype=float)
        disp = disp[..., 0] + 1j * disp[..., 1] if disp.size else np.zeros((0, n, n), complex)
        exact = ExactBackend.from_json(doc["exact_backend"]) if doc.get("exact_backend") else None
        return cls(doc["name"], n, k, disp, float(doc["scale"]), exact,
                   LatticeKind(doc.get("lattice_kind", "Z_I")))


def alamouti_code() -> SpaceTimeCode:
    """X(s1, s2) = [[s1, -conj(s2)], [s2, conj(s1)]]."""
    disp = np.array([
        [[1, 0], [0, 1]],
        [[1j, 0], [0, -1j]],
        [[0, -1], [1, 0]],
        [[0, 1j], [1j, 0]],
    ], dtype=complex)
    spec = algebra_preset("quaternion")
    ext = spec.ext
    backend = ExactBackend(spec, (ext.one, ext.gen), Fraction(1), split=True)
    return SpaceTimeCode("alamouti", 2, 2, disp, 1.0, backend)


def golden_constants() -> dict:
    phi = (1 + math.sqrt(5)) / 2
    psi = (1 - math.sqrt(5)) / 2
    return {"phi": phi, "psi": psi, "alpha": 1 + 1j * (1 - phi), "theta": 1 + 1j * (1 - psi)}


def _golden_basis(spec: CyclicAlgebraSpec) -> tuple:
    ext = spec.ext
    phi = ext.gen
    alpha = ext.one + (ext.one - phi).scale(ext.base_element(0, 1))
    return alpha, alpha * phi


def golden_code() -> SpaceTimeCode:
    """Golden Code on symbols (s01, s02, s11, s12), scaled by 1/sqrt(5)."""
    g = golden_constants()
    a, t, phi, psi = g["alpha"], g["theta"], g["phi"], g["psi"]
    units = [
        [[a, 0], [0, t]],
        [[a * phi, 0], [0, t * psi]],
        [[0, 1j * t], [a, 0]],
        [[0, 1j * t * psi], [a * phi, 0]],
    ]
    disp = []
    for u in units:
        u = np.array(u, dtype=complex)
        disp += [u, 1j * u]
    spec = algebra_preset("golden")
    backend = ExactBackend(spec, _golden_basis(spec), Fraction(1, 5))
    return SpaceTimeCode("golden", 2, 4, np.array(disp), 1 / math.sqrt(5), backend)


def cda_code(spec: CyclicAlgebraSpec, basis: Sequence[ExactFieldElement], scale_sq=1,
             name: str = "cda", lattice_kind: LatticeKind = LatticeKind.Z_I) -> SpaceTimeCode:
    """Code k_i = sum_j s_(i,j) beta_j placed into the cyclic-algebra matrix.

    ``scale_sq`` is the exact square of the scale factor (e.g. 1/5 for 1/sqrt(5)).
    """
    ext = spec.ext
    n = spec.degree
    basis = tuple(basis)
    if len(basis) != n:
        raise ValueError(f"need {n} basis elements, got {len(basis)}")
    for b in basis:
        if len(b.coeffs) != n:
            raise ValueError("degree mismatch between basis element and extension")
    u = [[ext.sigma(b, r) for b in basis] for r in range(n)]
    if exact_det(u, ext).is_zero():
        raise ValueError("shaping basis is linearly dependent over the base field")
    scale_sq = Fraction(scale_sq)
    split = ext.base_kind is FieldKind.RATIONAL and lattice_kind is not LatticeKind.Z
    if split and lattice_kind is not LatticeKind.Z_I:
        raise ValueError("complex symbols over a rational base field must come from Z[i]")
    backend = ExactBackend(spec, basis, scale_sq, split)
    ncoords = backend.n_coords
    unit = []
    for v in range(ncoords):
        coords = [0] * ncoords
        coords[v] = 1
        m = backend.matrix(coords)
        unit.append(np.array([[ext.embed(e) for e in row] for row in m]))
    disp = []
    if split:
        disp = unit
        k = ncoords // 2
    else:
        for b in unit:
            disp += [b, 1j * b]
        k = ncoords
    return SpaceTimeCode(name, n, k, np.array(disp), math.sqrt(scale_sq), backend, lattice_kind)


def code_from_spec(doc) -> SpaceTimeCode:
    """Build a code from {"algebra", "basis"?, "scale_sq"?, "name"?, "lattice_kind"?}.

    ``algebra`` is a preset name or an algebra document; ``basis`` defaults to
    the power basis 1, x, ..., x^(n-1); ``scale_sq`` is an integer or a
    [numerator, denominator] pair.
    """
    if isinstance(doc, str):
        with open(doc) as fh:
            doc = json.load(fh)
    if "algebra" not in doc:
        raise ValueError("code spec needs an 'algebra' entry")
    alg = doc["algebra"]
    spec = algebra_preset(alg) if isinstance(alg, str) else load_algebra_json(alg)
    ext = spec.ext
    if doc.get("basis") is not None:
        basis = [ext.element([BaseFieldElement.from_json(c, ext.base_kind) for c in b])
                 for b in doc["basis"]]
    else:
        basis = [ext.gen ** j for j in range(spec.degree)]
    sq = doc.get("scale_sq", 1)
    sq = Fraction(*sq) if isinstance(sq, (list, tuple)) else Fraction(sq)
    if sq <= 0:
        raise ValueError("scale_sq must be positive")
    kind = LatticeKind(doc.get("lattice_kind", "Z_I"))
    return cda_code(spec, basis, sq, doc.get("name", spec.name or "cda"), kind)


def _build_code_presets():
    def golden_broken():
        spec = algebra_preset("golden-broken")
        return cda_code(spec, _golden_basis(spec), Fraction(1, 5), "golden-broken")

    def cyclotomic2():
        spec = algebra_preset("cyclotomic2")
        return cda_code(spec, cyclotomic_shaping_basis(1), Fraction(1, 2), "cyclotomic2")

    return {"alamouti": alamouti_code, "golden": golden_code,
            "golden-broken": golden_broken, "cyclotomic2": cyclotomic2}


CODE_PRESETS = _build_code_presets()


def code_preset(name: str) -> SpaceTimeCode:
    try:
        return CODE_PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown code {name!r}; known: {sorted(CODE_PRESETS)}") from None


# -- classical bounds and orthogonal designs -------------------------------------

def hurwitz_radon_max_k(n: int) -> int:
    """Largest k of an n x n complex orthogonal design: a + 1 for n = 2^a (2b + 1)."""
    if n < 1:
        raise ValueError("n must be positive")
    a = 0
    while n % 2 == 0:
        n //= 2
        a += 1
    return a + 1


def orthogonal_design_check(code: SpaceTimeCode, trials: int = 1000, rng=None,
                            messages=None) -> float:
    """Max Frobenius residual of X X^H - (sum |s_i|^2) I over random complex messages."""
    if messages is None:
        rng = np.random.default_rng(rng)
        messages = rng.standard_normal((trials, 2 * code.k))
    v = np.atleast_2d(np.asarray(messages, dtype=float))
    if v.size == 0:
        return 0.0
    x = code.encode_real(v)
    gram = x @ np.conj(np.swapaxes(x, -1, -2))
    energy = np.sum(v * v, axis=1)
    resid = gram - energy[:, None, None] * np.eye(code.n)
    return float(np.max(np.linalg.norm(resid, axis=(1, 2))))


# -- determinant verifiers -----------------------------------------------------

@dataclass
class RankReport:
    ok: bool
    box_radius: int
    checked: int
    exact: bool
    counterexample: Optional[list] = None

    def to_json(self) -> dict:
        return {"check": "rank_criterion", "ok": self.ok, "box_radius": self.box_radius,
                "residual_or_min": None, "counterexample": self.counterexample,
                "checked": self.checked, "exact": self.exact}


@dataclass
class MinDetResult:
    value: float
    value_sq: Fraction  # exact |det|^2
    argmin: list
    box_radius: int

    def to_json(self) -> dict:
        return {"check": "min_det", "ok": self.value > 0, "residual_or_min": self.value,
                "box_radius": self.box_radius, "argmin": self.argmin,
                "value_sq": [self.value_sq.numerator, self.value_sq.denominator]}


def _as_message(coords, d: int) -> list:
    c = [int(x) for x in np.asarray(coords).ravel()]
    return [c[i:i + d] for i in range(0, len(c), d)]


def _require_exact(code: SpaceTimeCode) -> ExactBackend:
    if code.exact is None:
        raise ValueError(f"code {code.name!r} has no exact backend; exact determinants unavailable")
    return code.exact


def _integer_det_form(backend: ExactBackend):
    """Clear denominators: det = (sum c_mono * t^mono) / denom with integral c."""
    monos, coefs = backend.det_polynomial
    denom = 1
    for c in coefs:
        denom = math.lcm(denom, c.re.denominator, c.im.denominator)
    ints = [(int(c.re * denom), int(c.im * denom)) for c in coefs]
    return monos, ints, denom


def det_numerators(code: SpaceTimeCode, box_radius: int):
    """Exact unscaled determinants over the whole message box.

    Returns ``(denom, chunks)``. Each chunk is (coords, num_re, num_im, abs2)
    where det of the unscaled matrix is (num_re + num_im * j) / denom, j = i or
    omega per the base field, and abs2 = |num|^2 is an exact integer.
    """
    backend = _require_exact(code)
    monos, ints, denom = _integer_det_form(backend)
    return denom, _det_chunks(code, backend, monos, ints, box_radius)


def _det_chunks(code, backend, monos, ints, m):
    kind = backend.spec.ext.base_kind
    lk = code.lattice_kind
    d = lk.dim
    nvars = backend.n_coords
    real_vars = lk is LatticeKind.Z or backend.split
    # |re| + |im| of each variable is at most 2m
    bound = sum(abs(a) + abs(b) for a, b in ints) * (2 * m) ** backend.n
    dtype = np.int64 if 4 * bound * bound < 2 ** 62 else object
    for _, coords in _box_chunks(m, code.k * d):
        coords = coords.astype(dtype)
        zero = np.zeros(len(coords), dtype=dtype)
        if real_vars:
            tre = [coords[:, v] for v in range(nvars)]
            tim = [zero] * nvars
        else:
            tre = [coords[:, 2 * v] for v in range(nvars)]
            tim = [coords[:, 2 * v + 1] for v in range(nvars)]
        nre, nim = zero, zero
        for mono, (cre, cim) in zip(monos, ints):
            pre, pim = zero + cre, zero + cim
            for v in mono:
                pre, pim = _mul(pre, pim, tre[v], tim[v], kind)
            nre = nre + pre
            nim = nim + pim
        if kind is FieldKind.EISENSTEIN:
            abs2 = nre * nre - nre * nim + nim * nim
        else:
            abs2 = nre * nre + nim * nim
        yield coords, nre, nim, abs2


def _mul(a, b, c, d, kind):
    if kind is FieldKind.EISENSTEIN:
        bd = b * d
        return a * c - bd, a * d + b * c - bd
    return a * c - b * d, a * d + b * c


def _float_dets(code: SpaceTimeCode, box_radius: int):
    signal = SignalSet(code.lattice_kind, box_radius)
    T = signal.coord_transform(code.k)
    for _, coords in _box_chunks(box_radius, code.k * signal.dim, chunk=1 << 15):
        x = code.encode_real(coords @ T.T)
        yield coords, np.abs(np.linalg.det(x))


def rank_criterion_verify(code: SpaceTimeCode, box_radius: int, float_tol: float = 1e-9) -> RankReport:
    """Every nonzero message in the box must give an invertible matrix.

    By additivity, differences of codewords are codewords of difference
    messages, so nonzero single messages cover all pairs. Uses exact
    determinants when the code has an exact backend, otherwise |det| > float_tol.
    """
    d = code.lattice_kind.dim
    checked = 0
    if code.exact is not None:
        _, chunks = det_numerators(code, box_radius)
        for coords, _, _, abs2 in chunks:
            nonzero = np.any(coords != 0, axis=1)
            bad = np.nonzero(nonzero & (abs2 == 0))[0]
            checked += int(nonzero.sum())
            if len(bad):
                return RankReport(False, box_radius, checked, True, _as_message(coords[bad[0]], d))
        return RankReport(True, box_radius, checked, True)
    for coords, dets in _float_dets(code, box_radius):
        nonzero = np.any(coords != 0, axis=1)
        bad = np.nonzero(nonzero & (dets <= float_tol))[0]
        checked += int(nonzero.sum())
        if len(bad):
            return RankReport(False, box_radius, checked, False, _as_message(coords[bad[0]], d))
    return RankReport(True, box_radius, checked, False)


def min_det(code: SpaceTimeCode, box_radius: int) -> MinDetResult:
    """Exact min |det(X(s))| over nonzero messages in the box; lexicographic tie-break."""
    backend = _require_exact(code)
    denom, chunks = det_numerators(code, box_radius)
    best, best_coords = None, None
    for coords, _, _, abs2 in chunks:
        nonzero = np.any(coords != 0, axis=1)
        cand = abs2[nonzero]
        if len(cand) == 0:
            continue
        i = int(np.argmin(cand))
        val = int(cand[i])
        if best is None or val < best:
            best, best_coords = val, coords[nonzero][i]
    if best is None:
        raise ValueError("no nonzero messages in box")
    # |det(scale X)|^2 = scale^(2n) |det X|^2
    value_sq = backend.scale_sq ** backend.n * Fraction(best, denom * denom)
    return MinDetResult(math.sqrt(value_sq), value_sq,
                        _as_message(best_coords, code.lattice_kind.dim), box_radius)


@dataclass
class NvdReport:
    ok: bool
    minima: dict  # radius -> MinDetResult

    def to_json(self) -> dict:
        return {"check": "nvd", "ok": self.ok,
                "residual_or_min": {str(r): v.value for r, v in self.minima.items()},
                "box_radius": list(self.minima)}


def nvd_check(code: SpaceTimeCode, radii: Sequence[int] = (1, 2)) -> NvdReport:
    """Minimum determinant must be nonzero and not shrink as the box grows."""
    _require_exact(code)
    radii = sorted(set(int(r) for r in radii))
    minima = {r: min_det(code, r) for r in radii}
    first = minima[radii[0]].value_sq
    ok = first > 0 and all(v.value_sq == first for v in minima.values())
    return NvdReport(ok, minima)


# -- lattice and shaping -------------------------------------------------------

@dataclass
class LatticeInfo:
    generator: np.ndarray
    fundamental_volume: Optional[float]


def vec_real(a: np.ndarray) -> np.ndarray:
    """Column-major flattening with interleaved (re, im); works on stacks (..., n, n)."""
    a = np.asarray(a)
    cols = np.swapaxes(a, -1, -2).reshape(a.shape[:-2] + (-1,))
    out = np.empty(cols.shape[:-1] + (2 * cols.shape[-1],))
    out[..., 0::2] = cols.real
    out[..., 1::2] = cols.imag
    return out


def vectorize_generator(code: SpaceTimeCode) -> LatticeInfo:
    if code.dispersion.size == 0:
        raise ValueError("code has no dispersion matrices")
    g = vec_real(code.scaled_dispersion).T
    if np.linalg.matrix_rank(g) < g.shape[1]:
        raise ValueError("generator matrix is rank deficient")
    vol = float(abs(np.linalg.det(g))) if g.shape[0] == g.shape[1] else None
    return LatticeInfo(g, vol)


def shaping_unitarity(code: SpaceTimeCode) -> float:
    """||G^T G - I||_F for the real generator G; requires 2k = 2n^2."""
    g = vectorize_generator(code).generator
    if g.shape[0] != g.shape[1]:
        raise ValueError(f"generator is {g.shape[0]}x{g.shape[1]}, not square")
    return float(np.linalg.norm(g.T @ g - np.eye(g.shape[1])))


def shaping_matrix(basis: Sequence[ExactFieldElement], ext) -> np.ndarray:
    """U[r, j] = embedding of sigma^r(beta_j)."""
    n = ext.degree
    return np.array([[ext.embed(ext.sigma(b, r)) for b in basis] for r in range(n)])


def cyclotomic_shaping_basis(b: int) -> list:
    """Powers 1, zeta, ..., zeta^(2^b - 1) of a primitive 2^(b+2)-th root of unity over Q(i)."""
    names = {1: "cyclotomic8", 2: "cyclotomic16"}
    if b not in names:
        raise ValueError(f"b = {b} unsupported; available: {sorted(names)}")
    ext = extension_preset(names[b])
    zeta = ext.gen
    return [zeta ** j for j in range(2 ** b)]


@dataclass
class NormalizedMinDet:
    min_det: float
    volume: float
    literal: float  # min_det / volume
    volume_normalized: float  # min_det / volume^(1/(2n)), scale invariant
    box_radius: int

    def to_json(self) -> dict:
        return {"check": "normalized_min_det", "ok": True, "residual_or_min": self.literal,
                "volume_normalized": self.volume_normalized, "volume": self.volume,
                "min_det": self.min_det, "box_radius": self.box_radius}


def normalized_min_det(code: SpaceTimeCode, box_radius: int) -> NormalizedMinDet:
    """Box minimum of |det| over the fundamental volume of the code lattice.

    The box minimum is an upper estimate of the lattice minimum.
    """
    info = vectorize_generator(code)
    if info.fundamental_volume is None:
        g = info.generator
        raise ValueError(f"generator is {g.shape[0]}x{g.shape[1]}, not square")
    md = min_det(code, box_radius).value
    vol = info.fundamental_volume
    return NormalizedMinDet(md, vol, md / vol, md / vol ** (1 / (2 * code.n)), box_radius)
