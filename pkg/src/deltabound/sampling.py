"""Random direction generators and step-size schedules.

Two samplers produce candidate perturbation directions: plain i.i.d.
standard normals, and a low-pass DCT strategy that draws {-1, 0, 1}
coefficients in the lowest-frequency block of an orthonormal 2D DCT-II
basis and inverse-transforms them to pixel space, independently per
channel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dctn, idctn

P_SCHEDULES = ("const", "linear", "sqrt", "log")


@dataclass(frozen=True)
class SamplerConfig:
    kind: str = "normal"
    rho: float = 1.0
    image_shape: tuple[int, int, int] | None = None  # (channels, height, width)

    def __post_init__(self):
        if self.kind not in ("normal", "dct"):
            raise ValueError(f"unknown sampler kind {self.kind!r}")
        if self.kind == "dct":
            if self.image_shape is None or len(self.image_shape) != 3:
                raise ValueError("dct sampler needs image_shape=(C, H, W)")
            c, h, w = self.image_shape
            if c < 1 or h < 1 or w < 1:
                raise ValueError("image_shape entries must be >= 1")
            if not 0.0 < self.rho <= 1.0:
                raise ValueError("rho must lie in (0, 1]")

    @property
    def dim(self) -> int | None:
        if self.image_shape is None:
            return None
        c, h, w = self.image_shape
        return c * h * w


def sample_normal(dim: int, rng: np.random.Generator) -> np.ndarray:
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return rng.standard_normal(dim)


def dct2(x: np.ndarray) -> np.ndarray:
    """Orthonormal 2D type-II DCT."""
    return dctn(np.asarray(x, dtype=float), type=2, norm="ortho")


def idct2(c: np.ndarray) -> np.ndarray:
    """Exact inverse of :func:`dct2`."""
    return idctn(np.asarray(c, dtype=float), type=2, norm="ortho")


def lowpass_block(rho: float, height: int, width: int) -> tuple[int, int]:
    """Kept low-frequency block size; at least the DC coefficient survives."""
    return max(1, int(rho * height)), max(1, int(rho * width))


def sample_dct(cfg: SamplerConfig, rng: np.random.Generator) -> np.ndarray:
    """Low-pass DCT direction, channels concatenated in (C, H, W) order."""
    if cfg.kind != "dct":
        raise ValueError("sample_dct requires a dct SamplerConfig")
    channels, height, width = cfg.image_shape
    kh, kw = lowpass_block(cfg.rho, height, width)
    out = np.empty((channels, height, width))
    for ch in range(channels):
        coeff = np.zeros((height, width))
        coeff[:kh, :kw] = rng.integers(-1, 2, size=(kh, kw))
        out[ch] = idct2(coeff)
    return out.ravel()


def draw_direction(cfg: SamplerConfig, dim: int, rng: np.random.Generator) -> np.ndarray:
    """Dispatch on the sampler kind; the dct sampler must match dim."""
    if cfg.kind == "normal":
        return sample_normal(dim, rng)
    if cfg.dim != dim:
        raise ValueError(f"dct sampler produces dim {cfg.dim}, expected {dim}")
    return sample_dct(cfg, rng)


def p_value(kind: str, t: int) -> float:
    """Step-size scale p(t) > 0; natural log for the log schedule."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if kind == "const":
        return 1.0
    if kind == "linear":
        return 1.0 / (t + 1)
    if kind == "sqrt":
        return 1.0 / np.sqrt(t + 1)
    if kind == "log":
        return 1.0 / np.log(t + 2)
    raise ValueError(f"unknown p schedule {kind!r}")
