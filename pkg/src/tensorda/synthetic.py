"""Seeded synthetic labeled tensor datasets.

Each sample is a sum of class-scaled rank-1 effect patterns plus Gaussian
noise that may carry a separable (per-mode) covariance structure, mirroring a
multilinear normal model.
"""

from dataclasses import dataclass

import numpy as np

from ._batch import project_stack
from .streams import generator

__all__ = ["EffectTerm", "SyntheticConfig", "generate_synthetic"]


@dataclass(frozen=True)
class EffectTerm:
    """Rank-1 spatial pattern with one amplitude per class.

    ``vectors`` holds one unit-norm vector per mode; the pattern is their
    outer product scaled by the class amplitude.
    """

    vectors: tuple
    amplitudes: tuple

    def pattern(self):
        parts = [np.asarray(v, dtype=np.float64) for v in self.vectors]
        out = parts[0]
        for vec in parts[1:]:
            out = np.multiply.outer(out, vec)
        return out


@dataclass(frozen=True)
class SyntheticConfig:
    dims: tuple
    n_per_class: int
    n_classes: int
    effects: tuple = ()
    noise_scale: float = 1.0
    noise_roots: tuple = None  # optional per-mode covariance square roots
    seed: int = 0

    def __post_init__(self):
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be nonnegative")
        if self.n_per_class < 1 or self.n_classes < 1:
            raise ValueError("need at least one sample and one class")
        for effect in self.effects:
            if len(effect.vectors) != len(self.dims):
                raise ValueError("effect vector count must match the mode count")
            if len(effect.amplitudes) != self.n_classes:
                raise ValueError("effect needs one amplitude per class")
            for mode, vec in enumerate(effect.vectors):
                vec = np.asarray(vec, dtype=np.float64)
                if vec.shape != (self.dims[mode],):
                    raise ValueError(f"effect vector in mode {mode} has wrong length")
                if not np.isclose(np.linalg.norm(vec), 1.0, atol=1e-8):
                    raise ValueError("effect vectors must be unit norm")


def generate_synthetic(config):
    """Draw a labeled dataset ``(X, y)`` per the config, deterministic per seed.

    Sample ``n`` of class ``c`` is ``sum_e amplitude[e][c] * pattern_e`` plus
    ``noise_scale`` times a standard-normal tensor multiplied along each mode
    by the configured covariance root.
    """
    rng = generator(config.seed, 0)
    n_total = config.n_per_class * config.n_classes
    X = np.zeros((n_total,) + tuple(config.dims))
    y = np.repeat(np.arange(config.n_classes), config.n_per_class)

    for effect in config.effects:
        pattern = effect.pattern()
        amplitudes = np.asarray(effect.amplitudes, dtype=np.float64)
        X += amplitudes[y].reshape((-1,) + (1,) * len(config.dims)) * pattern

    if config.noise_scale > 0:
        noise = rng.standard_normal(X.shape)
        if config.noise_roots is not None:
            roots = [np.asarray(r, dtype=np.float64) for r in config.noise_roots]
            noise = project_stack(noise, roots, transpose=False)
        X += config.noise_scale * noise
    return X, y
