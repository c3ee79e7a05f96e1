"""Invariant suite: every structural claim checked at a configured scale.

Each check produces (observed, bound, passed); the report is deterministic
for a fixed seed and scale.  A tampered pack (for instance a gluing
coefficient nudged by 1e-3) fails the pack checks; an identity pack passes
everything with unit Jacobian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import analysis
from .cantor import SequencePack, VertexWord, all_words, center, dyadic_cube, dyadic_preimage
from .errors import PonomapError, RidgeSetError
from .gauge import (
    GaugeSpec,
    RawGauge,
    check_gauge_monotone,
    check_tau_invariants,
    eval_h,
)
from .mapping import PonomarevMap, build

ULP1 = math.ulp(1.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    observed: float
    bound: float
    passed: bool
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "observed": self.observed,
            "bound": self.bound,
            "passed": self.passed,
            "note": self.note,
        }


@dataclass(frozen=True)
class VerifyReport:
    checks: tuple[CheckResult, ...]
    passed: bool
    seed: int

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "seed": self.seed,
            "checks": [c.to_dict() for c in self.checks],
        }


@dataclass(frozen=True)
class VerifyScale:
    """Sampling sizes for the randomized checks."""

    boundary_points: int = 500
    face_points: int = 50
    face_depth: int = 12
    roundtrip_points: int = 2_000
    jacobian_points: int = 2_000
    fd_points: int = 200
    injectivity_pairs: int = 5_000
    mc_samples: int = 200_000
    depth_cap: int = 8


def _sup(a: Sequence[float], b: Sequence[float]) -> float:
    return max(abs(x - y) for x, y in zip(a, b))


def _random_word(rng, n: int, depth: int) -> VertexWord:
    return VertexWord(n, tuple(
        tuple(1 if rng.uniform() > 0.5 else -1 for _ in range(n))
        for _ in range(depth)
    ))


def _annulus_point(pack, word, rng, band=(0.15, 0.85), ridge_margin=0.2):
    k = word.depth
    z = center(word, pack)
    lo, hi = pack.r[k], pack.r[k - 1] / 2.0
    radius = lo + (hi - lo) * rng.uniform(*band)
    j = int(rng.integers(pack.n))
    direction = [float(rng.uniform(-(1.0 - ridge_margin), 1.0 - ridge_margin))
                 for _ in range(pack.n)]
    direction[j] = 1.0 if rng.uniform() > 0.5 else -1.0
    return tuple(z[i] + radius * direction[i] for i in range(pack.n))


def _gradient_bound(pack: SequencePack, k: int) -> float:
    """Largest |Df| on the depth-k annulus; conditions the float error model.

    A one-ulp input perturbation legitimately moves the image by about
    |Df| ulps, so ulp-level checks on steep packs normalize by this factor.
    """
    return pack.alpha[k] + pack.beta[k] / pack.r[k]


class _Suite:
    def __init__(self):
        self.checks: list[CheckResult] = []

    def add(self, name: str, observed: float, bound: float, passed: bool,
            note: str = ""):
        self.checks.append(CheckResult(name, float(observed), float(bound),
                                       bool(passed), note))

    def add_le(self, name: str, observed: float, bound: float, note: str = ""):
        self.add(name, observed, bound, observed <= bound, note)


def _check_pack(s: _Suite, pack: SequencePack):
    worst_inner = 0.0
    worst_outer = 0.0
    min_nesting = math.inf
    for k in range(1, pack.K + 1):
        inner = pack.alpha[k] * pack.r[k] + pack.beta[k]
        outer = pack.alpha[k] * (pack.r[k - 1] / 2.0) + pack.beta[k]
        worst_inner = max(worst_inner, abs(inner - pack.rt[k]) / math.ulp(pack.rt[k]))
        ref = pack.rt[k - 1] / 2.0
        worst_outer = max(worst_outer, abs(outer - ref) / math.ulp(ref))
        min_nesting = min(min_nesting,
                          pack.r[k - 1] / 2.0 - pack.r[k],
                          pack.rt[k - 1] / 2.0 - pack.rt[k])
    s.add_le("pack.gluing_inner_ulps", worst_inner, 4.0)
    s.add_le("pack.gluing_outer_ulps", worst_outer, 4.0)
    s.add("pack.nesting_slack", min_nesting, 0.0, min_nesting > 0.0)
    if pack.standard:
        dev = max(
            max(abs(pack.alpha[k] - 0.5) for k in range(1, pack.K + 1)),
            max(abs(pack.beta[k] - 2.0 ** (-k - 1)) for k in range(1, pack.K + 1)),
        )
        s.add_le("pack.standard_coefficients", dev, 0.0)


def _check_cantor(s: _Suite, pack: SequencePack, scale: VerifyScale):
    depth_cap = min(scale.depth_cap, pack.K)
    worst = math.inf
    for k in range(1, depth_cap + 1):
        centers = [0.0]
        for i in range(k):
            half = pack.r[i] / 2.0
            centers = [c + sgn * half for c in centers for sgn in (-1.0, 1.0)]
        centers.sort()
        gap = min(b - a for a, b in zip(centers, centers[1:]))
        worst = min(worst, gap / (2.0 * pack.r[k]))
    s.add("cantor.disjointness_gap_ratio", worst, 1.0, worst >= 1.0)

    bad = 0
    upto = min(5, pack.K)
    count = 0
    for k in range(0, upto + 1):
        for w in all_words(pack.n, k):
            corner, size = dyadic_cube(w)
            if dyadic_preimage(corner, k, pack.n) != w:
                bad += 1
            count += 1
    s.add("cantor.coding_bijection_failures", bad, 0.0, bad == 0,
          note=f"{count} words")

    mism = 0
    for m in range(0, 3):
        for l in range(m, 5):
            expect = 2 ** (pack.n * (l - m))
            got = sum(1 for w in all_words(pack.n, l)
                      if all(v == -1 for lv in w.signs[:m] for v in lv))
            if got != expect:
                mism += 1
    s.add("cantor.counting_identity_failures", mism, 0.0, mism == 0)


def _check_map(s: _Suite, pmap: PonomarevMap, rng, scale: VerifyScale):
    pack = pmap.pack
    n = pack.n

    worst = 0.0
    for _ in range(scale.boundary_points):
        x = [float(rng.uniform(-1.0, 1.0)) for _ in range(n)]
        i = int(rng.integers(n))
        x[i] = 1.0 if rng.uniform() > 0.5 else -1.0
        worst = max(worst, _sup(pmap.eval(tuple(x)), x) / ULP1)
    s.add_le("map.boundary_identity_ulps", worst, 8.0)

    worst = 0.0
    for depth in range(1, min(scale.face_depth, pack.K - 1) + 1):
        cond = max(1.0, _gradient_bound(pack, depth),
                   _gradient_bound(pack, min(depth + 1, pack.K)))
        for _ in range(scale.face_points):
            w = _random_word(rng, n, depth)
            z = center(w, pack)
            j = int(rng.integers(n))
            direction = [float(rng.uniform(-0.7, 0.7)) for _ in range(n)]
            direction[j] = 1.0
            for radius in (pack.r[depth], pack.r[depth - 1] / 2.0):
                lo = tuple(z[i] + radius * (1.0 - 4e-16) * direction[i] for i in range(n))
                hi = tuple(z[i] + radius * (1.0 + 4e-16) * direction[i] for i in range(n))
                try:
                    err = _sup(pmap.eval(lo), pmap.eval(hi))
                except PonomapError:
                    continue
                worst = max(worst, err / (ULP1 * cond))
    s.add_le("map.face_continuity_ulps", worst, 8.0)

    worst = 0.0
    for depth in range(1, min(6, pack.K) + 1):
        # the noise floor is one coordinate ulp amplified by the core scale
        cond = max(1.0, pack.b[depth] / pack.a[depth])
        for _ in range(20):
            w = _random_word(rng, n, depth)
            got = pmap.eval(center(w, pack, "domain"))
            err = _sup(got, center(w, pack, "target"))
            worst = max(worst, err / (ULP1 * cond))
    s.add_le("map.center_invariance_ulps", worst, 8.0)

    worst = 0.0
    for depth in range(1, min(6, pack.K) + 1):
        cond = max(1.0, _gradient_bound(pack, depth))
        for _ in range(20):
            w = _random_word(rng, n, depth)
            z = center(w, pack)
            zt = center(w, pack, "target")
            j = int(rng.integers(n))
            direction = [float(rng.uniform(-1.0, 1.0)) for _ in range(n)]
            direction[j] = 1.0 if rng.uniform() > 0.5 else -1.0
            x = tuple(z[i] + pack.r[depth] * direction[i] for i in range(n))
            y = pmap.eval(x)
            dist = max(abs(y[i] - zt[i]) for i in range(n))
            worst = max(worst, abs(dist - pack.rt[depth]) / (ULP1 * cond))
    s.add_le("map.cube_onto_cube_ulps", worst, 8.0)

    bad_rays = 0
    for depth in (1, min(3, pack.K), min(6, pack.K)):
        for _ in range(10):
            w = _random_word(rng, n, depth)
            z = center(w, pack)
            zt = center(w, pack, "target")
            direction = [float(rng.uniform(-0.6, 0.6)) for _ in range(n)]
            direction[0] = 1.0
            radii = np.linspace(pack.r[depth] * 1.01,
                                pack.r[depth - 1] / 2.0 * 0.99, 12)
            prev = -math.inf
            for radius in radii:
                x = tuple(z[i] + radius * direction[i] for i in range(n))
                img = max(abs(a - b) for a, b in zip(pmap.eval(x), zt))
                if img <= prev:
                    bad_rays += 1
                    break
                prev = img
    s.add("map.monotone_radial_failures", bad_rays, 0.0, bad_rays == 0)

    worst_ann = 0.0
    worst_core = 0.0
    for _ in range(scale.roundtrip_points):
        x = tuple(float(rng.uniform(-1.0, 1.0)) for _ in range(n))
        y = pmap.eval(x)
        err = _sup(pmap.eval(pmap.eval_inverse(y)), y)
        loc = pmap.locate(y)
        if loc.region == "core":
            worst_core = max(worst_core, err)
        else:
            cond = max(1.0, _gradient_bound(pack, loc.depth))
            worst_ann = max(worst_ann, err / cond)
    s.add_le("map.inverse_roundtrip_annulus_ulps", worst_ann / ULP1, 8.0)
    s.add_le("map.inverse_roundtrip_core", worst_core,
             2.0 * pmap.truncation_error)

    worst_ratio = 0.0
    for kp in sorted({max(1, pack.K // 4), max(1, pack.K // 2)}):
        shallow = build(pack.truncate(kp))
        bound = 2.0 * math.sqrt(n) * pack.rt[kp]
        for _ in range(100):
            x = tuple(float(rng.uniform(-1.0, 1.0)) for _ in range(n))
            worst_ratio = max(worst_ratio, _sup(pmap.eval(x), shallow.eval(x)) / bound)
    s.add_le("map.truncation_ratio", worst_ratio, 1.0)

    collisions = 0
    for _ in range(scale.injectivity_pairs):
        x1 = tuple(float(rng.uniform(-1.0, 1.0)) for _ in range(n))
        x2 = tuple(float(rng.uniform(-1.0, 1.0)) for _ in range(n))
        if x1 != x2 and pmap.eval(x1) == pmap.eval(x2):
            collisions += 1
    s.add("map.injectivity_collisions", collisions, 0.0, collisions == 0)


def _check_jacobian(s: _Suite, pmap: PonomarevMap, rng, scale: VerifyScale):
    pack = pmap.pack
    n = pack.n
    min_det = math.inf
    for _ in range(scale.jacobian_points):
        x = tuple(float(rng.uniform(-1.0, 1.0)) for _ in range(n))
        try:
            min_det = min(min_det, pmap.jacobian_det(x))
        except RidgeSetError:
            continue
    s.add("jacobian.min_det", min_det, 0.0, min_det > 0.0)

    worst = 0.0
    for _ in range(scale.fd_points):
        depth = int(rng.integers(1, min(7, pack.K) + 1))
        w = _random_word(rng, n, depth)
        x = _annulus_point(pack, w, rng, band=(0.3, 0.7))
        mat, _ = pmap.derivative(x)
        m = pmap.locate(x).m
        # the step must stay representable against coordinates of order one
        h = max(1e-7 * m, 64.0 * ULP1)
        fd = np.zeros((n, n))
        for l in range(n):
            xp = list(x)
            xm = list(x)
            xp[l] += h
            xm[l] -= h
            delta = xp[l] - xm[l]
            fp = pmap.eval(tuple(xp))
            fm = pmap.eval(tuple(xm))
            for i in range(n):
                fd[i, l] = (fp[i] - fm[i]) / delta
        ref = float(np.max(np.abs(mat)))
        worst = max(worst, float(np.max(np.abs(fd - mat))) / ref)
    s.add_le("jacobian.fd_relative_error", worst, 1e-6)

    worst = 0.0
    for _ in range(scale.fd_points):
        depth = int(rng.integers(1, min(10, pack.K) + 1))
        w = _random_word(rng, n, depth)
        x = _annulus_point(pack, w, rng)
        mat, info = pmap.derivative(x)
        closed = pmap.jacobian_det(x)
        rel = abs(float(np.linalg.det(mat)) - closed) / closed
        # cancellation in the active column scales with |Df| / alpha
        m = pmap.locate(x).m
        k = info.depth
        cond = (pack.alpha[k] + pack.beta[k] / m) / pack.alpha[k]
        tol = max(1e-12, 32.0 * ULP1 * cond)
        worst = max(worst, rel / tol)
    s.add("jacobian.det_identity_rel", worst, 1.0, worst <= 1.0,
          note="relative to conditioning-aware tolerance")


def _check_measures(s: _Suite, pack: SequencePack, gauge: GaugeSpec | None,
                    kind: str, safety: float):
    n = pack.n
    s.add("measure.lebesgue_domain_level",
          analysis.lebesgue_level(pack, pack.K, "domain"),
          2.0 ** n * pack.a[pack.K] ** n, True, note="closed form")
    target = analysis.lebesgue_level(pack, pack.K, "target")
    expect = (1.0 + pack.a[pack.K]) ** n if pack.standard else target
    s.add("measure.lebesgue_target_level", target, expect,
          abs(target - expect) <= 1e-12 * expect)

    mism = 0
    probe_gauge = gauge if gauge is not None else GaugeSpec(
        n=n, raw=RawGauge(family="power", alpha=float(n)))
    for j in range(0, min(3, pack.K) + 1):
        k = min(pack.K, j + 2)
        rep = analysis.pushforward_check(pack, probe_gauge, k, j)
        if not rep.exact:
            mism += 1
    s.add("measure.pushforward_failures", mism, 0.0, mism == 0)

    if gauge is not None and kind == "finite_measure":
        totals = [analysis.hausdorff_upper_sum(gauge, pack, k).total
                  for k in range(1, pack.K + 1)]
        lo, hi = min(totals), max(totals)
        s.add("measure.upper_sum_band", hi, 10.0, 0.1 <= lo and hi <= 10.0,
              note=f"min {lo:.6g}")
    if gauge is not None and kind == "null_measure":
        ok = all(
            analysis.hausdorff_upper_sum(gauge, pack, k).total
            <= safety * 2.0 ** (-n * k)
            for k in range(1, pack.K + 1)
        )
        s.add("measure.upper_sum_collapse", 0.0 if ok else 1.0, 0.0, ok)


def _check_norms(s: _Suite, pmap: PonomarevMap, rng, scale: VerifyScale):
    pack = pmap.pack
    a = pack.a
    worst = 0.0
    for eps in (0.01, 0.5, 1.0):
        diffs = math.fsum(a[k - 1] ** eps - a[k] ** eps for k in range(1, pack.K + 1))
        worst = max(worst, abs(diffs - (1.0 - a[pack.K] ** eps)))
    s.add_le("norm.telescoping_identity", worst, 1e-14)

    if pack.standard:
        rep = analysis.grand_norm_report(pmap, eps_grid=analysis.default_eps_grid(pack.n, 16))
        bad = sum(1 for v, b in zip(rep.values, rep.bounds) if v > b)
        s.add("norm.bound_domination_failures", bad, 0.0, bad == 0,
              note=f"sup={rep.sup:.6g}")

    worst_sigma = 0.0
    for _ in range(4):
        k = int(rng.integers(1, pack.K + 1))
        eps = float(rng.uniform(0.01, pack.n - 1.0))
        phi = analysis.GradientPower(pack.alpha[k], pack.beta[k], pack.n - eps)
        r, R = pack.r[k], pack.r[k - 1] / 2.0
        exact = analysis.shell_integral(phi, r, R, pack.n)
        est, se = analysis.shell_integral_mc(phi, r, R, pack.n,
                                             scale.mc_samples, rng)
        worst_sigma = max(worst_sigma, abs(est - exact) / se)
    s.add_le("norm.shell_mc_sigma", worst_sigma, 3.0)


def _check_gauge(s: _Suite, gauge: GaugeSpec, pack: SequencePack, kind: str,
                 safety: float):
    ok, worst = check_gauge_monotone(gauge, points=4_000)
    s.add("gauge.monotone_worst_drop", worst, 0.0, ok)
    if gauge.tau is not None:
        obs = check_tau_invariants(gauge.tau)
        s.add("tau.min_value", obs["min_value"], 1.0, obs["min_value"] >= 1.0)
        s.add_le("tau.monotonicity_violation",
                 obs["worst_monotonicity_violation"], 0.0)
        s.add("tau.ladder_increasing", 1.0 if obs["ladder_increasing"] else 0.0,
              1.0, obs["ladder_increasing"])
    if kind == "finite_measure" and gauge.tau is not None:
        worst = max(
            abs(pack.a[k] ** pack.n * gauge.tau(2.0 ** -k * pack.a[k]) - 1.0)
            for k in range(1, pack.K + 1)
        )
        s.add_le("gauge.sequence_identity", worst, 1e-10)
    if kind == "null_measure":
        cn = 2.0 * math.sqrt(pack.n)
        ok = all(
            eval_h(gauge, cn * 2.0 ** -k * pack.a[k])
            <= safety * 2.0 ** (-2 * pack.n * k)
            for k in range(1, pack.K + 1)
        )
        s.add("gauge.sequence_inequality", 0.0 if ok else 1.0, 0.0, ok)


def run_suite(pack: SequencePack, gauge: GaugeSpec | None = None,
              kind: str = "custom", seed: int = 0,
              scale: VerifyScale | None = None,
              safety: float = 0.5) -> VerifyReport:
    """Run every module invariant against one construction."""
    scale = scale or VerifyScale()
    rng = np.random.default_rng(seed)
    s = _Suite()
    try:
        pack.validate()
        s.add("pack.validate", 0.0, 0.0, True)
    except PonomapError as exc:
        s.add("pack.validate", 1.0, 0.0, False, note=str(exc))
        return VerifyReport(checks=tuple(s.checks), passed=False, seed=seed)
    _check_pack(s, pack)
    _check_cantor(s, pack, scale)
    pmap = build(pack)
    _check_map(s, pmap, rng, scale)
    _check_jacobian(s, pmap, rng, scale)
    _check_measures(s, pack, gauge, kind, safety)
    _check_norms(s, pmap, rng, scale)
    if gauge is not None:
        _check_gauge(s, gauge, pack, kind, safety)
    return VerifyReport(checks=tuple(s.checks),
                        passed=all(c.passed for c in s.checks), seed=seed)
