"""Real lattice model of a received block and three decoders.

Stacking real and imaginary parts column by column turns Y = theta H X + W
into y = Z v + w with Z of size 2n^2 x 2k. All decoders search the finite box
of integer lattice coordinates and agree on one tie rule: among candidates
whose squared residual is within ``tie_tolerance(y)`` of the minimum, the
lexicographically smallest coordinate vector wins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .stcodes import SignalSet, SpaceTimeCode, vec_real, _box_points

__all__ = [
    "RealLatticeModel", "DecodeResult", "DegenerateChannelError", "build_real_model",
    "ml_decode", "single_symbol_decode", "sphere_decode", "decode", "DECODERS",
    "tie_tolerance", "ML_MAX_CANDIDATES", "decode_batch", "BatchDecodeResult",
]

ML_MAX_CANDIDATES = 1_000_000


class DegenerateChannelError(ValueError):
    """Raised when the channel draw carries (numerically) no energy."""


@dataclass
class RealLatticeModel:
    z: np.ndarray
    y_real: np.ndarray
    theta: float
    h_trace: float
    scale: float = 1.0

    @property
    def k(self) -> int:
        return self.z.shape[1] // 2


@dataclass
class DecodeResult:
    message: np.ndarray  # (k, d) integer lattice coordinates
    metric: float
    node_count: int
    fallback: bool = False


def build_real_model(code: SpaceTimeCode, h, theta: float, y) -> RealLatticeModel:
    h = np.asarray(h, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if h.shape != (code.n, code.n) or y.shape != (code.n, code.n):
        raise ValueError(f"shape mismatch: h {h.shape}, y {y.shape}, code n = {code.n}")
    z = vec_real(theta * (h @ code.scaled_dispersion)).T
    h_trace = float(np.real(np.trace(h @ h.conj().T)))
    return RealLatticeModel(z, vec_real(y), float(theta), h_trace, code.scale)


def tie_tolerance(y_real) -> float:
    return 1e-10 * (1.0 + float(np.dot(y_real, y_real)))


@lru_cache(maxsize=16)
def _candidates(signal: SignalSet, k: int) -> np.ndarray:
    pts = _box_points(signal.box_radius, k * signal.dim)
    return np.ascontiguousarray(pts.T.astype(float))


def _residuals(y, zc, cols) -> np.ndarray:
    r = y[:, None] - zc @ cols
    return np.einsum("ij,ij->j", r, r)


def _pick(metrics: np.ndarray, tol: float) -> int:
    """First (lexicographically smallest) index within tol of the minimum."""
    return int(np.argmax(metrics <= metrics.min() + tol))


def _reshape(coords, signal: SignalSet) -> np.ndarray:
    return np.asarray(coords, dtype=np.int64).reshape(-1, signal.dim)


def ml_decode(model: RealLatticeModel, signal: SignalSet) -> DecodeResult:
    """Exhaustive search over every message in the box."""
    k = model.k
    count = signal.size ** k
    if count > ML_MAX_CANDIDATES:
        raise ValueError(f"{count} candidates exceeds the ML limit of {ML_MAX_CANDIDATES}")
    zc = model.z @ signal.coord_transform(k)
    cols = _candidates(signal, k)
    metrics = _residuals(model.y_real, zc, cols)
    i = _pick(metrics, tie_tolerance(model.y_real))
    return DecodeResult(_reshape(cols[:, i], signal), float(metrics[i]), count)


def single_symbol_decode(model: RealLatticeModel, signal: SignalSet) -> DecodeResult:
    """Project onto the columns of z and round each symbol separately.

    Exact for orthogonal designs, where z^T z = (theta * scale)^2 Tr(H H^H) I.
    """
    if model.h_trace <= 1e-12:
        raise DegenerateChannelError(f"Tr(HH^H) = {model.h_trace:.3g}; channel carries no energy")
    gain = (model.theta * model.scale) ** 2 * model.h_trace
    v = model.z.T @ model.y_real / gain
    pts = signal.points
    out = []
    for i in range(model.k):
        s = complex(v[2 * i], v[2 * i + 1])
        dist = np.abs(pts - s) ** 2
        out.append(signal.coords[_pick(dist, 1e-12 * (1 + abs(s) ** 2))])
    msg = np.array(out, dtype=np.int64)
    T = signal.coord_transform(model.k)
    r = model.y_real - model.z @ (T @ msg.ravel())
    return DecodeResult(msg, float(r @ r), model.k)


@lru_cache(maxsize=16)
def _zigzag_table(m: int) -> dict:
    """Schnorr-Euchner visiting orders on [-m, m], keyed by (floor(c), nearer-is-floor).

    Integers are visited by increasing distance to the center c, ties going
    to the smaller value; values outside the box are skipped.
    """
    table = {}
    for base in range(-m - 1, m + 1):
        for low_first in (True, False):
            seq = []
            a, b = (base, base + 1) if low_first else (base + 1, base)
            step_a = -1 if low_first else 1
            step_b = 1 if low_first else -1
            while len(seq) < 2 * (2 * m + 2):
                seq += [a, b]
                a += step_a
                b += step_b
            order = tuple(v for v in seq if -m <= v <= m)
            table[base, low_first] = order[:2 * m + 1]
    return table


def _se_order(c: float, m: int, table: dict) -> tuple:
    if c >= m:
        return table[m, True]
    if c <= -m:
        return table[-m - 1, False]
    base = math.floor(c)
    return table[base, c - base <= 0.5]


def _slack(tol: float) -> float:
    # radius slack: at least 1e-9, and wide enough that no tie within tol is pruned
    return max(1e-9, 2.0 * tol)


def _se_search(R: list, yt: list, m: int, slack: float) -> tuple:
    """Depth-first enumeration; returns (leaves, final threshold, node count)."""
    p = len(yt)
    table = _zigzag_table(m)
    x = [0] * p
    babai = 0.0
    for lv in range(p - 1, -1, -1):
        row = R[lv]
        acc = yt[lv]
        for j in range(lv + 1, p):
            acc -= row[j] * x[j]
        v = min(m, max(-m, math.floor(acc / row[lv] + 0.5)))
        x[lv] = v
        e = acc - row[lv] * v
        babai += e * e

    thr = babai + slack
    leaves = []
    nodes = 0

    def search(lv: int, partial: float) -> None:
        nonlocal thr, nodes
        row = R[lv]
        acc = yt[lv]
        for j in range(lv + 1, p):
            acc -= row[j] * x[j]
        rll = row[lv]
        for v in _se_order(acc / rll, m, table):
            e = acc - rll * v
            dist = partial + e * e
            if dist > thr:
                break
            nodes += 1
            x[lv] = v
            if lv == 0:
                leaves.append((dist, tuple(x)))
                if dist + slack < thr:
                    thr = dist + slack
            else:
                search(lv - 1, dist)

    search(p - 1, 0.0)
    return leaves, thr, nodes


def _finish(leaves, thr, y, zc, tol):
    """Re-score surviving leaves on the direct residual and apply the tie rule."""
    pool = [c for d, c in leaves if d <= thr]
    cands = np.array(pool, dtype=float).T
    metrics = _residuals(y, zc, cands)
    best = metrics.min()
    near = [i for i in range(len(pool)) if metrics[i] <= best + tol]
    i = min(near, key=lambda t: pool[t])
    return pool[i], float(metrics[i])


def _triangularize(zc: np.ndarray, y: np.ndarray):
    """Householder QR (LAPACK) with nonnegative diagonal; stacks allowed."""
    q, r = np.linalg.qr(zc)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    sign = np.where(diag < 0, -1.0, 1.0)
    r = sign[..., :, None] * r
    q = q * sign[..., None, :]
    yt = np.einsum("...ji,...j->...i", q, y)
    return r, yt, diag


def _rank_deficient(zc_shape, diag) -> bool:
    a = np.abs(diag)
    return zc_shape[-1] > zc_shape[-2] or a.min() <= 1e-12 * max(1.0, a.max())


def sphere_decode(model: RealLatticeModel, signal: SignalSet) -> DecodeResult:
    """Depth-first closest-point search with Schnorr-Euchner ordering.

    Coordinates are confined to [-m, m], so the result is the exact ML
    decision on the finite box. The initial radius is the residual of the
    clamped Babai point plus a small slack, shrunk on every improvement.
    Falls back to :func:`ml_decode` (``fallback=True``) when z is rank deficient.
    """
    zc = model.z @ signal.coord_transform(model.k)
    y = model.y_real
    r, yt, diag = _triangularize(zc, y)
    if _rank_deficient(zc.shape, diag):
        res = ml_decode(model, signal)
        res.fallback = True
        return res
    tol = tie_tolerance(y)
    leaves, thr, nodes = _se_search(r.tolist(), yt.tolist(), signal.box_radius, _slack(tol))
    choice, metric = _finish(leaves, thr, y, zc, tol)
    return DecodeResult(_reshape(choice, signal), metric, nodes)


@dataclass
class BatchDecodeResult:
    messages: np.ndarray  # (B, k, d)
    node_counts: np.ndarray  # (B,)
    failed: np.ndarray  # (B,) bool, decoder raised on this trial


def decode_batch(name: str, z: np.ndarray, y: np.ndarray, signal: SignalSet,
                 h_trace: np.ndarray, theta_scale: float) -> BatchDecodeResult:
    """Decode a stack of models z (B, 2n^2, 2k), y (B, 2n^2).

    ``h_trace`` (B,) and ``theta_scale`` = theta * code scale are needed by
    single-symbol decoding only. Produces the same decisions as the
    per-model decoders; single-symbol failures are flagged, not raised.
    """
    if name not in DECODERS:
        raise KeyError(f"unknown decoder {name!r}; known: {sorted(DECODERS)}")
    B = z.shape[0]
    k = z.shape[2] // 2
    d = signal.dim
    T = signal.coord_transform(k)
    zc = z @ T
    msgs = np.zeros((B, k, d), dtype=np.int64)
    nodes = np.zeros(B, dtype=np.int64)
    failed = np.zeros(B, dtype=bool)
    yy = np.einsum("bi,bi->b", y, y)
    tols = 1e-10 * (1.0 + yy)
    if name == "ml":
        count = signal.size ** k
        if count > ML_MAX_CANDIDATES:
            raise ValueError(f"{count} candidates exceeds the ML limit of {ML_MAX_CANDIDATES}")
        cols = _candidates(signal, k)
        for s in range(0, B, 256):
            pts = zc[s:s + 256] @ cols
            res = y[s:s + 256, :, None] - pts
            metrics = np.einsum("bij,bij->bj", res, res)
            ok = metrics <= metrics.min(axis=1, keepdims=True) + tols[s:s + 256, None]
            idx = np.argmax(ok, axis=1)
            msgs[s:s + 256] = cols[:, idx].T.reshape(-1, k, d)
        nodes[:] = count
    elif name == "single-symbol":
        failed = h_trace <= 1e-12
        safe = np.where(failed, 1.0, theta_scale ** 2 * h_trace)
        v = np.einsum("bji,bj->bi", z, y) / safe[:, None]
        s = v[:, 0::2] + 1j * v[:, 1::2]
        dist = np.abs(s[:, :, None] - signal.points[None, None, :]) ** 2
        tol = 1e-12 * (1 + np.abs(s) ** 2)
        ok = dist <= dist.min(axis=2, keepdims=True) + tol[:, :, None]
        msgs = signal.coords[np.argmax(ok, axis=2)]
        nodes[:] = k
    else:
        r, yt, diag = _triangularize(zc, y)
        m = signal.box_radius
        for b in range(B):
            if _rank_deficient(zc.shape, diag[b]):
                model = RealLatticeModel(z[b], y[b], 1.0, 1.0)
                res = ml_decode(model, signal)
                msgs[b], nodes[b] = res.message, res.node_count
                continue
            leaves, thr, cnt = _se_search(r[b].tolist(), yt[b].tolist(), m, _slack(tols[b]))
            choice, _ = _finish(leaves, thr, y[b], zc[b], tols[b])
            msgs[b] = np.asarray(choice, dtype=np.int64).reshape(k, d)
            nodes[b] = cnt
    return BatchDecodeResult(msgs, nodes, failed)


DECODERS = {"ml": ml_decode, "single-symbol": single_symbol_decode, "sphere": sphere_decode}


def decode(name: str, model: RealLatticeModel, signal: SignalSet) -> DecodeResult:
    try:
        fn = DECODERS[name]
    except KeyError:
        raise KeyError(f"unknown decoder {name!r}; known: {sorted(DECODERS)}") from None
    return fn(model, signal)
