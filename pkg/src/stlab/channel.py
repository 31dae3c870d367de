"""Rayleigh-fading MIMO channel Y = theta H X + W with seeded, reproducible sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .stcodes import SignalSet, SpaceTimeCode

__all__ = [
    "ChannelConfig", "ChannelRealization", "make_rng", "derive_seed", "db_to_linear",
    "sample_gaussian_matrix", "theta_for", "transmit", "frobenius_norm",
]

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, index: int) -> int:
    """Independent 64-bit seed for block ``index`` of a run seeded with ``base_seed``."""
    return splitmix64((int(base_seed) & MASK64) ^ splitmix64(int(index) & MASK64))


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator; the uniform-double stream is fixed by numpy's stream policy."""
    return np.random.Generator(np.random.PCG64(int(seed) & MASK64))


def db_to_linear(snr_db: float) -> float:
    return 10.0 ** (snr_db / 10.0)


@dataclass(frozen=True)
class ChannelConfig:
    n: int
    snr: float  # linear
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not self.snr > 0:
            raise ValueError("snr must be positive")

    @classmethod
    def from_db(cls, n: int, snr_db: float, seed: int = 0) -> "ChannelConfig":
        return cls(n, db_to_linear(snr_db), seed)


@dataclass(frozen=True)
class ChannelRealization:
    h: np.ndarray
    noise_scale: float = 1.0


def sample_gaussian_matrix(rng: np.random.Generator, n: int, size=()) -> np.ndarray:
    """i.i.d. unit-variance circular complex Gaussian entries via Box-Muller.

    Each entry consumes two consecutive uniforms (u1, u2) from the stream, so
    a batched draw of shape ``size + (n, n)`` equals the same number of
    sequential single draws.
    """
    size = tuple(np.atleast_1d(size)) if size != () else ()
    count = int(np.prod(size, dtype=np.int64)) * n * n
    u = rng.random(2 * count).reshape(-1, 2)
    r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))  # 1 - u1 lies in (0, 1]
    ang = 2.0 * np.pi * u[:, 1]
    z = (r * np.cos(ang) + 1j * (r * np.sin(ang))) / math.sqrt(2.0)
    return z.reshape(size + (n, n))


def frobenius_norm(x: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.abs(x) ** 2)))


def theta_for(code: SpaceTimeCode, signal: SignalSet, snr: float, mode: str = "average") -> float:
    """Power normalization theta with theta^2 E||X||_F^2 = n rho (or the peak variant).

    ``mode="average"`` takes the expectation over uniform messages in closed
    form from the dispersion matrices; ``mode="peak"`` uses the largest
    codeword energy, which sits at a corner of the coordinate box.
    """
    if code.dispersion.size == 0:
        raise ValueError("code has no dispersion matrices")
    if not snr > 0:
        raise ValueError("snr must be positive")
    d = code.scaled_dispersion
    # Gram of the real generator: <B_a, B_b> = Re tr(B_a^H B_b)
    flat = d.reshape(len(d), -1)
    gram = np.real(np.conj(flat) @ flat.T)
    if mode == "average":
        mean, second = signal.second_moment()
        k = code.k
        mu = np.tile(mean, k)
        cov = np.kron(np.eye(k), second - np.outer(mean, mean))
        moment = cov + np.outer(mu, mu)
        energy = float(np.sum(gram * moment))
    elif mode == "peak":
        T = signal.coord_transform(code.k)
        q = T.T @ gram @ T
        dim = q.shape[0]
        if dim > 20:
            raise ValueError("peak mode enumerates 2^(kd) box corners; too many")
        corners = signal.box_radius * (2 * np.indices((2,) * dim).reshape(dim, -1).T - 1)
        energy = float(np.max(np.einsum("ij,jk,ik->i", corners, q, corners)))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if energy <= 0:
        raise ValueError("code has zero energy")
    return math.sqrt(code.n * snr / energy)


def transmit(x: np.ndarray, h: np.ndarray, theta: float, rng=None, noiseless: bool = False) -> np.ndarray:
    """y = theta h x + w; w is drawn from ``rng`` unless ``noiseless`` (test hook)."""
    x = np.asarray(x)
    h = np.asarray(h)
    if h.shape[-1] != x.shape[-2] or h.shape[-2] != h.shape[-1]:
        raise ValueError(f"shape mismatch: h {h.shape}, x {x.shape}")
    y = theta * (h @ x)
    if noiseless:
        return y
    if rng is None:
        raise ValueError("rng required unless noiseless")
    n = y.shape[-1]
    if y.shape[-2] != n:
        raise ValueError("square blocks required")
    return y + sample_gaussian_matrix(rng, n, y.shape[:-2])
