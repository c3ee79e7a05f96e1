"""Measure and norm computations for nested-cube constructions.

Everything here is a finite-depth, fully checkable stand-in for a limit
statement:

* Lebesgue level measures of the depth-k cube unions (closed form).
* Upper Hausdorff cover sums: 2^(nk) * h(diam Q) with the Euclidean
  diameter convention diam Q(z, r) = 2*sqrt(n)*r.
* A lower-bound probe that takes a concrete ball cover, certifies that the
  cover dominates the canonical cube covers, and records the counting
  constants the comparison uses.
* Exact sup-norm shell integrals (layer-cake identity
  int_{shell} phi(||x||_inf) dx = n 2^n int phi(t) t^(n-1) dt), with closed
  forms for power laws, adaptive quadrature otherwise, and a seeded
  Monte Carlo cross-check that does not use the identity.
* Grand Lebesgue norm reports eps * int |Df_K|^(n-eps) over an eps grid,
  with the telescoping analytic bound, and classical p-norm sums with a
  per-depth profile for the p = n divergence probe.

Reductions use math.fsum, so reports are bit-stable regardless of
evaluation order.  The derivative magnitude convention is max-of-partials:
|Df| = alpha_k + beta_k / ||x - z_v||_inf on annuli and rt_K/r_K on cores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Literal, Sequence

import numpy as np
from scipy.integrate import quad

from .cantor import (
    SequencePack,
    VertexWord,
    all_words,
    center,
    descendant_count,
)
from .errors import CoverageError, DepthError, ToleranceError
from .gauge import GaugeSpec, eval_h
from .mapping import PonomarevMap

CONVENTION = "max_partials"


# ---------------------------------------------------------------------------
# cover reports


@dataclass(frozen=True)
class CoverReport:
    """Upper cover sum at one depth: total = count * per_cube exactly."""

    depth: int
    count: int
    per_cube: float
    total: float
    ratio_to_one: float

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "count": self.count,
            "per_cube": self.per_cube,
            "total": self.total,
            "ratio_to_one": self.ratio_to_one,
        }


@dataclass(frozen=True)
class Ball:
    """Closed Euclidean ball anchored at the center of an addressed cube."""

    word: VertexWord
    radius: float
    center: tuple[float, ...]


@dataclass(frozen=True)
class BallProbe:
    word: str
    radius: float
    min_contained_depth: int | None
    intersecting_count: int
    contained_count: int
    dominated_sum: float


@dataclass(frozen=True)
class LowerProbeReport:
    level: int
    cover_sum: float
    reference_upper_sum: float
    ratio: float
    balls: tuple[BallProbe, ...]
    max_intersecting: int
    counting_bound: int

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "cover_sum": self.cover_sum,
            "reference_upper_sum": self.reference_upper_sum,
            "ratio": self.ratio,
            "max_intersecting": self.max_intersecting,
            "counting_bound": self.counting_bound,
            "balls": [
                {
                    "word": b.word,
                    "radius": b.radius,
                    "min_contained_depth": b.min_contained_depth,
                    "intersecting_count": b.intersecting_count,
                    "contained_count": b.contained_count,
                    "dominated_sum": b.dominated_sum,
                }
                for b in self.balls
            ],
        }


def lebesgue_level(pack: SequencePack, k: int, side: Literal["domain", "target"] = "domain") -> float:
    """Measure of the depth-k cube union: 2^(nk) (2 r_k)^n = 2^n a_k^n."""
    if not 0 <= k <= pack.K:
        raise DepthError(f"depth {k} outside 0..{pack.K}")
    scale = pack.a[k] if side == "domain" else pack.b[k]
    return 2.0 ** pack.n * scale ** pack.n


def upper_sum_at_scale(h: GaugeSpec, k: int, a_k: float) -> CoverReport:
    """Cover sum 2^(nk) * h(2 sqrt(n) 2^-k a_k) from a bare scale value.

    Useful for sequences whose flat head (clamped tau factors give a_k = 1
    for small k) does not form a valid pack.
    """
    if k < 0:
        raise DepthError("depth must be >= 0")
    n = h.n
    cn = 2.0 * math.sqrt(n)
    per = eval_h(h, cn * math.ldexp(a_k, -k))
    count = 2 ** (n * k)
    total = float(count) * per
    return CoverReport(depth=k, count=count, per_cube=per, total=total,
                       ratio_to_one=total)


def hausdorff_upper_sum(h: GaugeSpec, pack: SequencePack, k: int) -> CoverReport:
    """Cover sum over all depth-k cubes: 2^(nk) * h(2 sqrt(n) r_k)."""
    if h.n != pack.n:
        raise ValueError("gauge dimension does not match the pack")
    if not 0 <= k <= pack.K:
        raise DepthError(f"depth {k} outside 0..{pack.K}")
    return upper_sum_at_scale(h, k, pack.a[k])


# ---------------------------------------------------------------------------
# ball/cube geometry for the lower-bound probe


def _dist_to_cube(c: Sequence[float], z: Sequence[float], r: float) -> float:
    return math.sqrt(math.fsum(max(abs(ci - zi) - r, 0.0) ** 2
                               for ci, zi in zip(c, z)))


def _farthest_corner(c: Sequence[float], z: Sequence[float], r: float) -> float:
    return math.sqrt(math.fsum((abs(ci - zi) + r) ** 2
                               for ci, zi in zip(c, z)))


def _cube_in_ball(c, z, r, rho) -> bool:
    # tiny relative slack so a circumscribing ball contains its own cube
    return _farthest_corner(c, z, r) <= rho * (1.0 + 1e-12)


def _vertices(n: int):
    out = []
    for bits in range(2 ** n):
        out.append(tuple(1 if (bits >> (n - 1 - i)) & 1 else -1 for i in range(n)))
    return out


def _children_with_centers(pack: SequencePack, word_center, depth: int):
    half = 0.5 * pack.r[depth - 1]
    for v in _vertices(pack.n):
        yield v, tuple(word_center[i] + half * v[i] for i in range(pack.n))


def _ball_frontiers(pack: SequencePack, ball: Ball, max_depth: int):
    """Per-depth lists of (center,) of cubes intersecting the ball."""
    frontier = [tuple([0.0] * pack.n)]
    for d in range(1, max_depth + 1):
        nxt = []
        for zc in frontier:
            for _, child in _children_with_centers(pack, zc, d):
                if _dist_to_cube(ball.center, child, pack.r[d]) <= ball.radius:
                    nxt.append(child)
        yield d, nxt
        frontier = nxt


def _contained_blocks(pack: SequencePack, ball: Ball, level: int):
    """Index blocks [start, stop) of depth-``level`` cubes inside the ball."""
    n = pack.n
    blocks: list[tuple[int, int]] = []

    def visit(zc, depth: int, index: int):
        r = pack.r[depth]
        if depth >= 1 and _cube_in_ball(ball.center, zc, r, ball.radius):
            span = descendant_count(depth, level, n)
            blocks.append((index * span, index * span + span))
            return
        if depth == level:
            return
        for ci, (v, child) in enumerate(_children_with_centers(pack, zc, depth + 1)):
            if _dist_to_cube(ball.center, child, pack.r[depth + 1]) <= ball.radius:
                visit(child, depth + 1, index * 2 ** n + ci)

    visit(tuple([0.0] * n), 0, 0)
    return blocks


def canonical_cover(pack: SequencePack, m: int) -> list[Ball]:
    """Balls circumscribing every depth-m cube."""
    if not 1 <= m <= pack.K:
        raise DepthError(f"depth {m} outside 1..{pack.K}")
    rho = math.sqrt(pack.n) * pack.r[m]
    out = []
    for word in all_words(pack.n, m):
        out.append(Ball(word=word, radius=rho, center=center(word, pack)))
    return out


def random_cover(pack: SequencePack, m: int, rng: np.random.Generator,
                 extra_depth: int = 3) -> list[Ball]:
    """One ball per depth-m cube, anchored at a random deeper cube center.

    The radius is the smallest that still contains the depth-m cube, so the
    cover always covers, while staying within twice the circumscribed
    radius; that keeps the per-ball neighbor counts inside the 4^n bound.
    """
    if not 1 <= m <= pack.K:
        raise DepthError(f"depth {m} outside 1..{pack.K}")
    if m + extra_depth > pack.K:
        raise DepthError("extra_depth exceeds the pack depth")
    verts = _vertices(pack.n)
    sqrt_n = math.sqrt(pack.n)
    out = []
    for word in all_words(pack.n, m):
        anchor = word
        for _ in range(extra_depth):
            anchor = anchor.child(verts[rng.integers(len(verts))])
        c = center(anchor, pack)
        zu = center(word, pack)
        dist = math.sqrt(math.fsum((a - b) ** 2 for a, b in zip(c, zu)))
        out.append(Ball(word=anchor, radius=dist + sqrt_n * pack.r[m], center=c))
    return out


def hausdorff_lower_probe(h: GaugeSpec, pack: SequencePack, cover: Sequence[Ball],
                          level: int) -> LowerProbeReport:
    """Certify a ball cover against the depth-``level`` cube cover.

    Checks that every depth-``level`` cube is contained in some ball (else
    CoverageError), computes the cover sum sum_j h(diam B_j), the per-ball
    counting data (minimal contained depth m_j, number of depth-m_j cubes
    the ball intersects, dominated cube sums at the reference level), and
    the ratio of the cover sum to the upper cube sum at the reference
    level.  Intersection counts are compared against the 4^n counting
    bound.
    """
    if h.n != pack.n:
        raise ValueError("gauge dimension does not match the pack")
    if not 1 <= level <= pack.K:
        raise DepthError(f"level {level} outside 1..{pack.K}")
    n = pack.n
    cn = 2.0 * math.sqrt(n)
    per_cube_level = eval_h(h, cn * pack.r[level])
    covered: set[int] = set()
    stats = []
    max_intersecting = 0
    for ball in cover:
        blocks = _contained_blocks(pack, ball, level)
        contained = 0
        for start, stop in blocks:
            contained += stop - start
            covered.update(range(start, stop))
        min_depth = None
        intersecting = 0
        for d, frontier in _ball_frontiers(pack, ball, level):
            if any(_cube_in_ball(ball.center, zc, pack.r[d], ball.radius)
                   for zc in frontier):
                min_depth = d
                intersecting = len(frontier)
                break
        if intersecting:
            max_intersecting = max(max_intersecting, intersecting)
        stats.append(BallProbe(
            word=str(ball.word),
            radius=ball.radius,
            min_contained_depth=min_depth,
            intersecting_count=intersecting,
            contained_count=contained,
            dominated_sum=contained * per_cube_level,
        ))
    total_cubes = 2 ** (n * level)
    if len(covered) != total_cubes:
        raise CoverageError(
            f"cover misses {total_cubes - len(covered)} of {total_cubes} "
            f"depth-{level} cubes"
        )
    cover_sum = math.fsum(eval_h(h, 2.0 * b.radius) for b in cover)
    reference = hausdorff_upper_sum(h, pack, level).total
    return LowerProbeReport(
        level=level,
        cover_sum=cover_sum,
        reference_upper_sum=reference,
        ratio=cover_sum / reference,
        balls=tuple(stats),
        max_intersecting=max_intersecting,
        counting_bound=4 ** n,
    )


# ---------------------------------------------------------------------------
# shell integrals


@dataclass(frozen=True)
class PowerLaw:
    """phi(t) = coefficient * t^exponent; integrates in closed form."""

    exponent: float
    coefficient: float = 1.0

    def __call__(self, t):
        return self.coefficient * t ** self.exponent


@dataclass(frozen=True)
class GradientPower:
    """phi(t) = (alpha + beta/t)^power, the annulus derivative magnitude."""

    alpha: float
    beta: float
    power: float

    def __call__(self, t):
        return (self.alpha + self.beta / t) ** self.power


def shell_integral(phi: Callable[[float], float], r: float, R: float, n: int,
                   rel_tol: float = 1e-10) -> float:
    """Integral of phi(||x||_inf) over the sup-norm shell Q(0,R) \\ Q(0,r).

    Equals n 2^n int_r^R phi(t) t^(n-1) dt.  Power laws use the closed-form
    antiderivative; anything else goes through adaptive quadrature at
    relative tolerance ``rel_tol``.
    """
    if not 0.0 < r < R:
        raise ValueError("need 0 < r < R")
    if n < 1:
        raise ValueError("n must be >= 1")
    front = n * 2.0 ** n
    if isinstance(phi, PowerLaw):
        q = phi.exponent + n
        if q == 0.0:
            return front * phi.coefficient * math.log(R / r)
        return front * phi.coefficient * (R ** q - r ** q) / q
    result = quad(lambda t: phi(t) * t ** (n - 1), r, R,
                  epsabs=0.0, epsrel=min(rel_tol, 1e-11), limit=200,
                  full_output=True)
    value, abserr = result[0], result[1]
    if len(result) > 3:
        raise ToleranceError(f"shell quadrature failed: {result[3]}")
    if abserr > rel_tol * max(abs(value), 1e-300):
        raise ToleranceError(
            f"shell quadrature too loose: abserr={abserr:g} for value={value:g}"
        )
    return front * value


def shell_integral_mc(phi, r: float, R: float, n: int, samples: int,
                      rng: np.random.Generator) -> tuple[float, float]:
    """Monte Carlo estimate (value, standard error) of the shell integral.

    Samples uniformly in [-R, R]^n and keeps the shell hit indicator, so it
    shares no machinery with the layer-cake identity used by
    shell_integral.
    """
    if not 0.0 < r < R:
        raise ValueError("need 0 < r < R")
    pts = rng.uniform(-R, R, size=(samples, n))
    sup = np.max(np.abs(pts), axis=1)
    vals = np.zeros(samples)
    mask = (sup > r) & (sup <= R)
    vals[mask] = phi(sup[mask])
    volume = (2.0 * R) ** n
    est = volume * float(np.mean(vals))
    stderr = volume * float(np.std(vals, ddof=1)) / math.sqrt(samples)
    return est, stderr


# ---------------------------------------------------------------------------
# norm reports


@dataclass(frozen=True)
class NormReport:
    """Grand-norm data over an eps grid.

    values[i] = eps_i * int |Df_K|^(n - eps_i) including the depth-K core
    term; bounds[i] is the analytic telescoping bound
    bound_constant * (a_0^eps - a_K^eps) + core.  partial_sums[i][k-1] is
    the cumulative annulus contribution through depth k (monotone in k).
    """

    eps: tuple[float, ...]
    values: tuple[float, ...]
    bounds: tuple[float, ...]
    sup: float
    convention: str
    depth: int
    bound_constant: float
    partial_sums: tuple[tuple[float, ...], ...]

    def to_dict(self) -> dict:
        return {
            "eps": list(self.eps),
            "values": list(self.values),
            "bounds": list(self.bounds),
            "sup": self.sup,
            "convention": self.convention,
            "depth": self.depth,
        }


def default_eps_grid(n: int, count: int = 64, lo: float = 1e-4) -> tuple[float, ...]:
    return tuple(float(e) for e in np.geomspace(lo, n - 1.0, count))


def _annulus_terms(pack: SequencePack, power: float) -> list[float]:
    """Per-depth totals 2^(nk) * shell_integral((alpha+beta/t)^power)."""
    out = []
    for k in range(1, pack.K + 1):
        phi = GradientPower(pack.alpha[k], pack.beta[k], power)
        term = shell_integral(phi, pack.r[k], pack.r[k - 1] / 2.0, pack.n)
        out.append(2.0 ** (pack.n * k) * term)
    return out


def _core_term(pack: SequencePack, power: float) -> float:
    # 2^(nK) (2 r_K)^n (rt_K/r_K)^power, reduced so nothing overflows
    return (2.0 ** pack.n * pack.a[pack.K] ** (pack.n - power)
            * pack.b[pack.K] ** power)


def grand_norm_report(pmap: PonomarevMap, eps_grid: Sequence[float] | None = None) -> NormReport:
    """eps * int |Df_K|^(n-eps) over an eps grid, with analytic bounds.

    Requires a standard pack (alpha = 1/2, beta = 2^(-k-1)); the analytic
    per-eps bound n 2^n (a_0^eps - a_K^eps) + core uses the pointwise
    domination alpha + beta/t <= 2 beta / t on each annulus.
    """
    pack = pmap.pack
    if not pack.standard:
        raise ValueError("grand norm reports require a standard pack")
    n = pack.n
    if eps_grid is None:
        eps_grid = default_eps_grid(n)
    eps_grid = tuple(float(e) for e in eps_grid)
    for e in eps_grid:
        if not 0.0 < e <= n - 1.0:
            raise ValueError(f"eps {e!r} outside (0, n-1]")
    aK, bK = pack.a[pack.K], pack.b[pack.K]
    const = n * 2.0 ** n
    values = []
    bounds = []
    partials = []
    for e in eps_grid:
        terms = _annulus_terms(pack, n - e)
        running = []
        acc = 0.0
        for t in terms:
            acc = math.fsum((acc, t))
            running.append(e * acc)
        core = e * _core_term(pack, n - e)
        values.append(e * math.fsum(terms) + core)
        bounds.append(const * (1.0 - aK ** e) + e * 2.0 ** n * aK ** e * bK ** (n - e))
        partials.append(tuple(running))
    return NormReport(
        eps=eps_grid,
        values=tuple(values),
        bounds=tuple(bounds),
        sup=max(values),
        convention=CONVENTION,
        depth=pack.K,
        bound_constant=const,
        partial_sums=tuple(partials),
    )


def sobolev_depth_profile(pmap: PonomarevMap, p: float) -> tuple[tuple[float, ...], float]:
    """Cumulative annulus sums of int |Df_K|^p through each depth, plus the
    depth-K core term."""
    pack = pmap.pack
    if not 0.0 < p <= pack.n:
        raise ValueError("p must lie in (0, n]")
    terms = _annulus_terms(pack, p)
    running = []
    acc = 0.0
    for t in terms:
        acc = math.fsum((acc, t))
        running.append(acc)
    return tuple(running), _core_term(pack, p)


def sobolev_norm(pmap: PonomarevMap, p: float) -> float:
    """int |Df_K|^p over the cube (annuli through depth K plus the cores)."""
    partials, core = sobolev_depth_profile(pmap, p)
    return partials[-1] + core


# ---------------------------------------------------------------------------
# pushforward / coding checks


@dataclass(frozen=True)
class PushforwardReport:
    n: int
    j: int
    k: int
    expected: Fraction
    ratios: tuple[Fraction, ...]
    exact: bool
    method: str

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "j": self.j,
            "k": self.k,
            "expected": str(self.expected),
            "exact": self.exact,
            "method": self.method,
        }


def pushforward_check(pack: SequencePack, h: GaugeSpec, k: int, j: int,
                      enumerate_limit: int = 2 ** 20) -> PushforwardReport:
    """Share of the depth-k cover sum carried by each depth-j word.

    All depth-k cubes carry the same gauge value, so each share is the
    exact rational (descendants of the word) / 2^(nk) and must equal
    2^(-jn).  Descendants are counted by exhaustive enumeration when the
    depth-k population is small, by the subtree formula otherwise.
    """
    if h.n != pack.n:
        raise ValueError("gauge dimension does not match the pack")
    if not 0 <= j <= k <= pack.K:
        raise DepthError("need 0 <= j <= k <= K")
    n = pack.n
    total = 2 ** (n * k)
    expected = Fraction(1, 2 ** (n * j))
    if total <= enumerate_limit:
        method = "enumeration"
        counts: dict[tuple, int] = {}
        for word in all_words(n, k):
            key = word.signs[:j]
            counts[key] = counts.get(key, 0) + 1
        ratios = tuple(
            Fraction(counts.get(w.signs, 0), total) for w in all_words(n, j)
        )
    else:
        method = "subtree-formula"
        share = Fraction(descendant_count(j, k, n), total)
        ratios = tuple(share for _ in range(2 ** (n * j)))
    exact = all(rho == expected for rho in ratios)
    return PushforwardReport(n=n, j=j, k=k, expected=expected, ratios=ratios,
                             exact=exact, method=method)
