"""Seeded synthetic samples used by tests, demos and the ``simulate`` command."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal
from scipy import special as _sp

from .errors import DomainError
from .quantile import SampleMatrix
from .special import RngStream, standard_normal_sample, uniform_sample
from .timeseries import Series

__all__ = ["FAMILIES", "GeneratorSpec", "generate"]

FAMILIES = ("iid-normal", "rademacher-product", "gaussian-pair", "student-t", "ar1")


@dataclass(frozen=True)
class GeneratorSpec:
    """What to simulate.

    ``rho`` is used by ``gaussian-pair``, ``nu`` by ``student-t`` and ``phi``
    by ``ar1``; ``d`` only by ``iid-normal``.
    """

    family: str
    n: int
    seed: int = 0
    d: int = 1
    rho: float = 0.0
    nu: float = 2.0
    phi: float = 0.0

    def validate(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")
        if int(self.n) < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        if self.family == "iid-normal" and int(self.d) < 1:
            raise DomainError(f"d must be >= 1, got {self.d}")
        if self.family == "gaussian-pair" and not abs(self.rho) < 1.0:
            raise DomainError(f"gaussian-pair needs |rho| < 1, got {self.rho}")
        if self.family == "student-t" and not self.nu > 0.0:
            raise DomainError(f"student-t needs nu > 0, got {self.nu}")
        if self.family == "ar1" and not abs(self.phi) < 1.0:
            raise DomainError(f"ar1 needs |phi| < 1, got {self.phi}")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        return self


def _normals(seed, stream_id, n):
    return standard_normal_sample(RngStream(int(seed), stream_id), n)


def generate(spec):
    """Draw the sample described by ``spec``.

    Returns a :class:`SampleMatrix` for ``iid-normal``, ``rademacher-product``
    and ``gaussian-pair`` and a :class:`Series` for ``student-t`` and ``ar1``.
    Column ``j`` of a matrix family is driven by stream ``j`` of the seed.
    """
    spec.validate()
    n, seed = int(spec.n), int(spec.seed)
    fam = spec.family

    if fam == "iid-normal":
        cols = [_normals(seed, j, n) for j in range(int(spec.d))]
        return SampleMatrix(np.column_stack(cols), [f"x{j + 1}" for j in range(int(spec.d))])

    if fam == "rademacher-product":
        x = _normals(seed, 0, n)
        w = np.where(uniform_sample(RngStream(seed, 1), n) < 0.5, 1.0, -1.0)
        return SampleMatrix(np.column_stack([x, w * x]), ["x", "y"])

    if fam == "gaussian-pair":
        z1, z2 = _normals(seed, 0, n), _normals(seed, 1, n)
        rho = float(spec.rho)
        return SampleMatrix(np.column_stack([z1, rho * z1 + math.sqrt(1.0 - rho * rho) * z2]), ["x", "y"])

    if fam == "student-t":
        u = uniform_sample(RngStream(seed, 0), n)
        return Series(_sp.stdtrit(float(spec.nu), u))

    # ar1, started from the stationary law N(0, 1 / (1 - phi^2))
    phi = float(spec.phi)
    eps = _normals(seed, 0, n)
    eps[0] /= math.sqrt(1.0 - phi * phi)
    return Series(signal.lfilter([1.0], [1.0, -phi], eps))
