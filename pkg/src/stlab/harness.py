"""Monte Carlo experiments and the consolidated verification report."""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .channel import (db_to_linear, derive_seed, make_rng, sample_gaussian_matrix, theta_for,
                      transmit)
from .decoders import (DECODERS, DegenerateChannelError, build_real_model, decode, decode_batch)
from .stcodes import (LatticeKind, SignalSet, SpaceTimeCode, code_preset, hurwitz_radon_max_k,
                      min_det, normalized_min_det, nvd_check, orthogonal_design_check,
                      rank_criterion_verify, shaping_unitarity, vec_real)

__all__ = [
    "ExperimentConfig", "SimRecord", "TrialResult", "run_trial", "pep_estimate", "ber_curve",
    "verify_suite", "parse_snr_grid", "wilson_halfwidth", "records_to_csv", "CSV_HEADER",
]

log = logging.getLogger(__name__)

CSV_HEADER = ["snr_db", "trials", "codeword_errors", "cer", "ser", "wilson95", "mean_decoder_nodes"]


def parse_snr_grid(spec) -> list:
    """'a:b:step' (inclusive of b when on the grid), 'a,b,c', a number or a list."""
    if isinstance(spec, (int, float)):
        return [float(spec)]
    if isinstance(spec, (list, tuple)):
        grid = [float(v) for v in spec]
    elif ":" in spec:
        parts = [float(v) for v in spec.split(":")]
        if len(parts) not in (2, 3):
            raise ValueError(f"bad SNR range {spec!r}")
        a, b = parts[0], parts[1]
        step = parts[2] if len(parts) == 3 else 1.0
        if step <= 0:
            raise ValueError("SNR step must be positive")
        count = int(math.floor((b - a) / step + 1e-9)) + 1
        grid = [round(a + i * step, 10) for i in range(max(count, 0))]
    else:
        grid = [float(v) for v in spec.split(",") if v.strip()]
    if not grid:
        raise ValueError("SNR grid is empty")
    return grid


def wilson_halfwidth(errors: int, trials: int, z: float = 1.959963984540054) -> float:
    """Half-width of the Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return float("nan")
    p = errors / trials
    denom = 1 + z * z / trials
    return z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom


@dataclass
class ExperimentConfig:
    code: str = "golden"
    decoder: str = "sphere"
    snr_db: list = field(default_factory=lambda: [10.0])
    trials: int = 1000
    seed: int = 0
    box_radius: int = 1
    lattice_kind: str = "Z_I"
    out: Optional[str] = None
    block_size: int = 1000
    workers: int = 1
    theta_mode: str = "average"
    noiseless: bool = False

    def __post_init__(self):
        self.snr_db = parse_snr_grid(self.snr_db)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        if self.decoder not in DECODERS:
            raise ValueError(f"unknown decoder {self.decoder!r}; known: {sorted(DECODERS)}")

    @property
    def signal(self) -> SignalSet:
        return SignalSet(LatticeKind(self.lattice_kind), self.box_radius)


@dataclass
class SimRecord:
    snr_db: float
    trials: int
    codeword_errors: int
    cer: float
    ser: float
    wilson95: float
    mean_decoder_nodes: float
    decoder_failures: int = 0

    def csv_row(self) -> list:
        return [f"{self.snr_db:g}", str(self.trials), str(self.codeword_errors),
                f"{self.cer:.10g}", f"{self.ser:.10g}", f"{self.wilson95:.10g}",
                f"{self.mean_decoder_nodes:.10g}"]


@dataclass
class TrialResult:
    sent: np.ndarray
    decoded: Optional[np.ndarray]
    failed: bool = False
    node_count: int = 0

    @property
    def error(self) -> bool:
        return self.failed or not np.array_equal(self.sent, self.decoded)


def _resolve(code) -> SpaceTimeCode:
    return code_preset(code) if isinstance(code, str) else code


def run_trial(code, decoder: str, signal: SignalSet, snr: float, rng,
              noiseless: bool = False, theta_mode: str = "average") -> TrialResult:
    """One block: uniform message, encode, draw H and W, receive, decode with H known."""
    code = _resolve(code)
    m, d = signal.box_radius, signal.dim
    sent = rng.integers(-m, m + 1, size=(code.k, d))
    theta = theta_for(code, signal, snr, theta_mode)
    x = code.encode_real(signal.coord_transform(code.k) @ sent.ravel())
    h = sample_gaussian_matrix(rng, code.n)
    y = transmit(x, h, theta, rng, noiseless=noiseless)
    model = build_real_model(code, h, theta, y)
    try:
        res = decode(decoder, model, signal)
    except DegenerateChannelError as exc:
        log.warning("decoder failure: %s", exc)
        return TrialResult(sent, None, True)
    return TrialResult(sent, res.message, False, res.node_count)


def _as_coords(msg, code: SpaceTimeCode, signal: SignalSet) -> np.ndarray:
    a = np.asarray(msg, dtype=np.int64).reshape(code.k, signal.dim)
    if not signal.contains(a):
        raise ValueError(f"message {a.tolist()} outside the signal box")
    return a


def pep_estimate(code, msg_a, msg_b, snr: float, trials: int, rng,
                 signal: Optional[SignalSet] = None, mode: str = "pair",
                 theta_mode: str = "average", chunk: int = 10_000) -> float:
    """Fraction of trials where msg_b is decided while msg_a was sent.

    ``mode="pair"`` is the binary test between X(msg_a) and X(msg_b);
    ``mode="codebook"`` decodes by ML over the whole signal box and counts
    decisions equal to msg_b.
    """
    code = _resolve(code)
    signal = signal or SignalSet(code.lattice_kind, 1)
    a = _as_coords(msg_a, code, signal)
    b = _as_coords(msg_b, code, signal)
    if np.array_equal(a, b):
        raise ValueError("pairwise error probability needs two distinct messages")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    T = signal.coord_transform(code.k)
    theta = theta_for(code, signal, snr, theta_mode)
    xa = code.encode_real(T @ a.ravel())
    xb = code.encode_real(T @ b.ravel())
    errors = 0
    for start in range(0, trials, chunk):
        cnt = min(chunk, trials - start)
        g = sample_gaussian_matrix(rng, code.n, (cnt, 2))
        h, w = g[:, 0], g[:, 1]
        y = theta * (h @ xa) + w
        if mode == "pair":
            da = np.sum(np.abs(y - theta * (h @ xa)) ** 2, axis=(1, 2))
            db = np.sum(np.abs(y - theta * (h @ xb)) ** 2, axis=(1, 2))
            errors += int(np.sum(db < da))
        elif mode == "codebook":
            z = np.swapaxes(vec_real(theta * (h[:, None] @ code.scaled_dispersion[None])), 1, 2)
            htr = np.sum(np.abs(h) ** 2, axis=(1, 2))
            res = decode_batch("ml", z, vec_real(y), signal, htr, theta * code.scale)
            errors += int(np.sum(np.all(res.messages == b[None], axis=(1, 2))))
        else:
            raise ValueError(f"unknown PEP mode {mode!r}")
    return errors / trials


def _run_block(code: SpaceTimeCode, decoder: str, signal: SignalSet, theta: float,
               seed: int, count: int, noiseless: bool) -> tuple:
    """Block stream layout: all messages, then (H, W) per trial."""
    rng = make_rng(seed)
    m, d, k, n = signal.box_radius, signal.dim, code.k, code.n
    sent = rng.integers(-m, m + 1, size=(count, k, d))
    g = sample_gaussian_matrix(rng, n, (count, 2))
    h, w = g[:, 0], g[:, 1]
    x = code.encode_real(sent.reshape(count, -1) @ signal.coord_transform(k).T)
    y = theta * (h @ x)
    if not noiseless:
        y = y + w
    z = np.swapaxes(vec_real(theta * (h[:, None] @ code.scaled_dispersion[None])), 1, 2)
    htr = np.sum(np.abs(h) ** 2, axis=(1, 2))
    res = decode_batch(decoder, z, vec_real(y), signal, htr, theta * code.scale)
    sym_err = np.any(res.messages != sent, axis=2)
    sym_err[res.failed] = True
    cw = int(np.sum(np.any(sym_err, axis=1)))
    return cw, int(sym_err.sum()), int(res.node_counts.sum()), int(res.failed.sum())


@lru_cache(maxsize=8)
def _cached_preset(name: str) -> SpaceTimeCode:
    return code_preset(name)


def _block_task(args):
    code_doc, decoder, kind, m, theta, seed, count, noiseless = args
    code = SpaceTimeCode.from_json(code_doc) if isinstance(code_doc, dict) else _cached_preset(code_doc)
    return _run_block(code, decoder, SignalSet(LatticeKind(kind), m), theta, seed, count, noiseless)


def ber_curve(config: ExperimentConfig, code: Optional[SpaceTimeCode] = None) -> list:
    """One :class:`SimRecord` per SNR point; writes CSV to ``config.out`` if set.

    Trials are split into blocks of ``block_size`` seeded with
    derive_seed(derive_seed(seed, snr_index), block_index), so the output
    depends only on (config, seed, block_size), never on ``workers``.
    """
    code_ref = config.code if code is None else code.to_json()
    code = code or code_preset(config.code)
    signal = config.signal
    tasks, layout = [], []
    for i, snr_db in enumerate(config.snr_db):
        theta = theta_for(code, signal, db_to_linear(snr_db), config.theta_mode)
        point_seed = derive_seed(config.seed, i)
        nblocks = -(-config.trials // config.block_size)
        for b in range(nblocks):
            count = min(config.block_size, config.trials - b * config.block_size)
            tasks.append((code_ref, config.decoder, config.lattice_kind, config.box_radius,
                          theta, derive_seed(point_seed, b), count, config.noiseless))
            layout.append(i)
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            results = list(pool.map(_block_task, tasks))
    else:
        results = [_block_task(t) for t in tasks]
    sums = [[0, 0, 0, 0] for _ in config.snr_db]
    for i, r in zip(layout, results):
        for j in range(4):
            sums[i][j] += r[j]
    records = []
    for snr_db, (cw, se, nodes, fails) in zip(config.snr_db, sums):
        t = config.trials
        records.append(SimRecord(snr_db, t, cw, cw / t, se / (t * code.k),
                                 wilson_halfwidth(cw, t), nodes / t, fails))
    if config.out:
        try:
            with open(config.out, "w", newline="") as fh:
                fh.write(records_to_csv(records))
        except OSError as exc:
            raise OSError(f"cannot write results to {config.out}: {exc}") from exc
    return records


def records_to_csv(records: Sequence[SimRecord]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_HEADER)
    for r in records:
        wr.writerow(r.csv_row())
    return buf.getvalue()


def _skip(check: str, reason: str) -> dict:
    return {"check": check, "ok": None, "skipped": True, "reason": reason,
            "residual_or_min": None, "box_radius": None}


def verify_suite(code, box_radius: int = 1, nvd_radii: Sequence[int] = (1, 2),
                 seed: int = 0) -> dict:
    """Run every applicable criterion check and collect a JSON-ready report."""
    code = _resolve(code)
    checks = []
    checks.append(rank_criterion_verify(code, box_radius).to_json())
    if code.exact is not None:
        md = min_det(code, box_radius)
        rep = md.to_json()
        rep["ok"] = md.value_sq > 0
        checks.append(rep)
        checks.append(nvd_check(code, nvd_radii).to_json())
    else:
        checks.append(_skip("min_det", "no exact backend"))
        checks.append(_skip("nvd", "no exact backend"))
    hr = hurwitz_radon_max_k(code.n)
    if code.k <= hr:
        res = orthogonal_design_check(code, 1000, np.random.default_rng(seed))
        checks.append({"check": "orthogonal_design", "ok": res <= 1e-12, "residual_or_min": res,
                       "box_radius": None})
    else:
        checks.append(_skip("orthogonal_design",
                            f"k = {code.k} exceeds the Hurwitz-Radon bound {hr} for n = {code.n}"))
    if 2 * code.k == 2 * code.n ** 2:
        res = shaping_unitarity(code)
        checks.append({"check": "shaping_unitarity", "ok": res <= 1e-12, "residual_or_min": res,
                       "box_radius": None})
        if code.exact is not None:
            checks.append(normalized_min_det(code, box_radius).to_json())
    else:
        checks.append(_skip("shaping_unitarity",
                            f"generator is {2 * code.n ** 2}x{2 * code.k}, not square"))
    ok = all(c["ok"] for c in checks if not c.get("skipped"))
    return {"code": code.name, "ok": ok, "checks": checks}
