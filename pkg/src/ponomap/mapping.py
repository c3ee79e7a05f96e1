"""Finite-depth evaluation of the cube homeomorphism and its derivatives.

The depth-K map f_K fixes the boundary of [-1,1]^n, sends each depth-k
annulus radially (in the sup norm) onto its target annulus and each depth-K
core cube linearly onto its target core.  Evaluation is an iterative descent
with accumulated centers rather than a literal composition of the K stages:
on the annulus of word v at depth k,

    f_K(x) = zt_v + (alpha_k * m + beta_k) * (x - z_v) / m,   m = ||x - z_v||_inf,

and on a core cube f_K(x) = zt_v + (rt_K / r_K) (x - z_v).  Center-to-center
invariance (each z_v maps to zt_v) makes the descent exact, and the whole
family is Cauchy: later stages move points by at most the target core
diameter, so f_K approximates the limit map within 2*sqrt(n)*rt_K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .cantor import Location, SequencePack, check_point, descend, locate
from .errors import ConstructionError, RidgeSetError

_RIDGE_RTOL = 1e-12


@dataclass(frozen=True)
class DerivativeInfo:
    depth: int
    region: Literal["annulus", "core"]
    active: int | None  # coordinate carrying the sup norm; None on cores


@dataclass(frozen=True)
class PonomarevMap:
    """Immutable depth-K truncation of the nested-cube homeomorphism."""

    pack: SequencePack
    truncation_error: float
    provenance: str = ""

    def __post_init__(self):
        expected = 2.0 * math.sqrt(self.pack.n) * self.pack.rt[self.pack.K]
        if self.truncation_error != expected:
            raise ConstructionError(
                f"stored truncation error {self.truncation_error!r} "
                f"does not match 2*sqrt(n)*rt_K = {expected!r}"
            )

    @property
    def n(self) -> int:
        return self.pack.n

    @property
    def K(self) -> int:
        return self.pack.K

    def eval(self, x: Sequence[float]) -> tuple[float, ...]:
        """f_K(x) for x in the closed cube; identity on the boundary."""
        pack = self.pack
        x = check_point(x, pack.n)
        d = descend(x, pack, pack.K, "domain")
        if d.region == "annulus":
            k = d.depth
            scale = (pack.alpha[k] * d.m + pack.beta[k]) / d.m
        else:
            scale = pack.rt[pack.K] / pack.r[pack.K]
        return tuple(d.zt[i] + scale * (x[i] - d.z[i]) for i in range(pack.n))

    def eval_inverse(self, y: Sequence[float]) -> tuple[float, ...]:
        """Structural inverse: the same descent run on the target hierarchy."""
        pack = self.pack
        y = check_point(y, pack.n)
        d = descend(y, pack, pack.K, "target")
        if d.region == "annulus":
            k = d.depth
            s = (d.m - pack.beta[k]) / pack.alpha[k]
            scale = s / d.m
        else:
            scale = pack.r[pack.K] / pack.rt[pack.K]
        return tuple(d.z[i] + scale * (y[i] - d.zt[i]) for i in range(pack.n))

    def locate(self, x: Sequence[float], max_depth: int | None = None) -> Location:
        return locate(x, self.pack, max_depth)

    def _annulus_state(self, x: Sequence[float]):
        pack = self.pack
        x = check_point(x, pack.n)
        d = descend(x, pack, pack.K, "domain")
        if d.region == "core":
            return x, d, None
        u = [x[i] - d.z[i] for i in range(pack.n)]
        mags = sorted((abs(c) for c in u), reverse=True)
        if len(mags) > 1 and mags[0] - mags[1] <= _RIDGE_RTOL * mags[0]:
            raise RidgeSetError(
                f"sup norm attained by two coordinates within rtol {_RIDGE_RTOL:g}"
            )
        active = max(range(pack.n), key=lambda i: abs(u[i]))
        return x, d, (u, active)

    def derivative(self, x: Sequence[float]) -> tuple[np.ndarray, DerivativeInfo]:
        """Exact pointwise Jacobian matrix.

        On the annulus of depth k with m attained at coordinate j:

            D[i][l] = alpha_k d_il + beta_k (d_il / m - u_i sgn(u_j) d_jl / m^2)

        with u = x - z_v.  On a depth-K core the matrix is (rt_K/r_K) * I.
        Raises RidgeSetError when the sup norm is attained by two coordinates
        within relative tolerance 1e-12.
        """
        pack = self.pack
        x, d, annulus = self._annulus_state(x)
        n = pack.n
        if annulus is None:
            scale = pack.rt[pack.K] / pack.r[pack.K]
            return (
                scale * np.eye(n),
                DerivativeInfo(depth=pack.K, region="core", active=None),
            )
        u, j = annulus
        k = d.depth
        alpha, beta, m = pack.alpha[k], pack.beta[k], d.m
        sigma = 1.0 if u[j] > 0.0 else -1.0
        mat = (alpha + beta / m) * np.eye(n)
        for i in range(n):
            mat[i, j] -= beta * u[i] * sigma / (m * m)
        return mat, DerivativeInfo(depth=k, region="annulus", active=j)

    def jacobian_det(self, x: Sequence[float]) -> float:
        """Closed-form determinant: alpha (alpha + beta/m)^(n-1) on annuli,
        (rt_K/r_K)^n on cores; strictly positive throughout."""
        pack = self.pack
        x, d, annulus = self._annulus_state(x)
        if annulus is None:
            return (pack.rt[pack.K] / pack.r[pack.K]) ** pack.n
        k = d.depth
        alpha, beta = pack.alpha[k], pack.beta[k]
        return alpha * (alpha + beta / d.m) ** (pack.n - 1)

    def max_partial(self, x: Sequence[float]) -> float:
        """Largest partial-derivative magnitude: alpha + beta/m on annuli,
        rt_K/r_K on cores (the convention used by all norm reports)."""
        pack = self.pack
        x = check_point(x, pack.n)
        d = descend(x, pack, pack.K, "domain")
        if d.region == "core":
            return pack.rt[pack.K] / pack.r[pack.K]
        k = d.depth
        return pack.alpha[k] + pack.beta[k] / d.m


def build(pack: SequencePack, provenance: str = "") -> PonomarevMap:
    """Assemble the map for a validated pack.

    Re-checks the gluing residuals (a pack mutated after construction fails
    here) and records the certified truncation error 2*sqrt(n)*rt_K.
    """
    pack.validate()
    err = 2.0 * math.sqrt(pack.n) * pack.rt[pack.K]
    return PonomarevMap(pack=pack, truncation_error=err, provenance=provenance)
