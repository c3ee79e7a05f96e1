"""Nested-cube hierarchy: addresses, scale packs, point location, binary coding.

Depth-k cubes are indexed by words of k vertices of [-1,1]^n (every
coordinate is +1 or -1).  A word fixes a center

    z_v = sum_{i=1..k} (r_{i-1}/2) * v_i            (domain side)

with the target side using the radii rt instead of r.  Around each center
sit an outer cube of half-edge r_{k-1}/2 and an inner cube of half-edge
r_k; the outer cubes at depth k tile the inner cube of the parent, so every
interior point lands either in a unique annulus (outer minus inner) at some
depth, or survives to the core cubes at the truncation depth.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Literal, Sequence

from .errors import ConstructionError, DepthError, DomainError, PrecisionError

Side = Literal["domain", "target"]

_ULPS = 4  # allowed gluing residual, in units of spacing at the result's scale


@dataclass(frozen=True)
class VertexWord:
    """Address of a cube: one vertex of {-1,+1}^n per level."""

    n: int
    signs: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        for level in self.signs:
            if len(level) != self.n or any(s not in (-1, 1) for s in level):
                raise ValueError(f"invalid vertex {level!r} for n={self.n}")

    @property
    def depth(self) -> int:
        return len(self.signs)

    def prefix(self, j: int) -> "VertexWord":
        if not 0 <= j <= self.depth:
            raise ValueError("prefix length out of range")
        return VertexWord(self.n, self.signs[:j])

    def child(self, vertex: Sequence[int]) -> "VertexWord":
        return VertexWord(self.n, self.signs + (tuple(vertex),))

    def __str__(self) -> str:
        return "|".join(
            "".join("+" if s > 0 else "-" for s in level) for level in self.signs
        )

    @classmethod
    def parse(cls, text: str, n: int) -> "VertexWord":
        if text == "":
            return cls(n, ())
        levels = []
        for chunk in text.split("|"):
            if len(chunk) != n or any(c not in "+-" for c in chunk):
                raise ValueError(f"bad word chunk {chunk!r} for n={n}")
            levels.append(tuple(1 if c == "+" else -1 for c in chunk))
        return cls(n, tuple(levels))


def all_words(n: int, depth: int) -> Iterator[VertexWord]:
    """All 2^(n*depth) words at the given depth, in lexicographic bit order."""
    vertices = list(itertools.product((-1, 1), repeat=n))
    for combo in itertools.product(vertices, repeat=depth):
        yield VertexWord(n, combo)


def harmonic_sequence(K: int) -> tuple[float, ...]:
    return tuple(1.0 / (k + 1) for k in range(K + 1))


def geometric_sequence(K: int, ratio: float = 0.5) -> tuple[float, ...]:
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie in (0, 1)")
    return tuple(ratio ** k for k in range(K + 1))


def _ulp_close(x: float, y: float, ulps: int = _ULPS) -> bool:
    scale = max(abs(x), abs(y))
    return abs(x - y) <= ulps * math.ulp(scale) if scale > 0.0 else x == y


@dataclass(frozen=True)
class SequencePack:
    """Scales of one construction to depth K.

    r_k = 2^-k a_k and rt_k = 2^-k b_k are the domain/target inner
    half-edges at depth k.  alpha_k, beta_k solve the two gluing equations

        alpha_k r_k + beta_k = rt_k
        alpha_k r_{k-1}/2 + beta_k = rt_{k-1}/2

    so the radial factor s -> alpha_k s + beta_k carries the annulus
    [r_k, r_{k-1}/2] onto [rt_k, rt_{k-1}/2].  ``standard`` packs use
    b_k = (1 + a_k)/2, which makes alpha_k = 1/2 and beta_k = 2^(-k-1)
    exactly.
    """

    n: int
    K: int
    a: tuple[float, ...]
    b: tuple[float, ...]
    r: tuple[float, ...]
    rt: tuple[float, ...]
    alpha: tuple[float, ...]  # index 0 unused (nan)
    beta: tuple[float, ...]
    standard: bool

    def __post_init__(self):
        self.validate()

    @classmethod
    def from_standard(cls, n: int, a: Sequence[float]) -> "SequencePack":
        """Pack with b_k = (1 + a_k)/2 and exact gluing coefficients."""
        a = tuple(float(x) for x in a)
        K = len(a) - 1
        b = tuple((1.0 + x) / 2.0 for x in a)
        r = tuple(math.ldexp(a[k], -k) for k in range(K + 1))
        rt = tuple(math.ldexp(b[k], -k) for k in range(K + 1))
        alpha = (math.nan,) + (0.5,) * K
        beta = (math.nan,) + tuple(math.ldexp(1.0, -k - 1) for k in range(1, K + 1))
        return cls(n=n, K=K, a=a, b=b, r=r, rt=rt, alpha=alpha, beta=beta,
                   standard=True)

    @classmethod
    def from_scales(cls, n: int, a: Sequence[float],
                    b: Sequence[float]) -> "SequencePack":
        """Pack for arbitrary target scales; gluing solved numerically."""
        a = tuple(float(x) for x in a)
        b = tuple(float(x) for x in b)
        if len(a) != len(b):
            raise ConstructionError("a and b must have equal length")
        K = len(a) - 1
        r = tuple(math.ldexp(a[k], -k) for k in range(K + 1))
        rt = tuple(math.ldexp(b[k], -k) for k in range(K + 1))
        alpha = [math.nan]
        beta = [math.nan]
        for k in range(1, K + 1):
            denom = r[k - 1] / 2.0 - r[k]
            if denom <= 0.0:
                raise ConstructionError(f"empty annulus at depth {k}")
            al = (rt[k - 1] / 2.0 - rt[k]) / denom
            alpha.append(al)
            beta.append(rt[k] - al * r[k])
        return cls(n=n, K=K, a=a, b=b, r=r, rt=rt, alpha=tuple(alpha),
                   beta=tuple(beta), standard=False)

    def validate(self) -> None:
        if self.n < 1:
            raise ConstructionError("n must be >= 1")
        if self.K < 1:
            raise ConstructionError("K must be >= 1")
        if len(self.a) != self.K + 1 or len(self.b) != self.K + 1:
            raise ConstructionError("scale arrays must have length K+1")
        if self.a[0] != 1.0 or self.b[0] != 1.0:
            raise ConstructionError("a_0 and b_0 must equal 1")
        for k in range(self.K + 1):
            if not (self.a[k] > 0.0 and self.b[k] > 0.0):
                raise ConstructionError(f"scales must be positive (depth {k})")
        for k in range(1, self.K + 1):
            if self.a[k] > self.a[k - 1]:
                raise ConstructionError(f"a must be non-increasing (depth {k})")
            if not self.r[k] < self.r[k - 1] / 2.0:
                raise ConstructionError(f"nesting fails on domain side at depth {k}")
            if not self.rt[k] < self.rt[k - 1] / 2.0:
                raise ConstructionError(f"nesting fails on target side at depth {k}")
        for k in range(1, self.K + 1):
            inner = self.alpha[k] * self.r[k] + self.beta[k]
            outer = self.alpha[k] * (self.r[k - 1] / 2.0) + self.beta[k]
            if not _ulp_close(inner, self.rt[k]):
                raise ConstructionError(
                    f"gluing residual on inner face at depth {k}: "
                    f"{inner!r} vs {self.rt[k]!r}"
                )
            if not _ulp_close(outer, self.rt[k - 1] / 2.0):
                raise ConstructionError(
                    f"gluing residual on outer face at depth {k}: "
                    f"{outer!r} vs {self.rt[k - 1] / 2.0!r}"
                )
        if self.standard:
            for k in range(1, self.K + 1):
                if self.alpha[k] != 0.5 or self.beta[k] != math.ldexp(1.0, -k - 1):
                    raise ConstructionError(
                        f"standard pack must carry alpha=1/2, beta=2^-(k+1) (depth {k})"
                    )
                if self.b[k] != (1.0 + self.a[k]) / 2.0:
                    raise ConstructionError(
                        f"standard pack requires b=(1+a)/2 (depth {k})"
                    )

    def truncate(self, K: int) -> "SequencePack":
        if not 1 <= K <= self.K:
            raise DepthError(f"cannot truncate depth-{self.K} pack to {K}")
        return SequencePack(
            n=self.n, K=K,
            a=self.a[:K + 1], b=self.b[:K + 1],
            r=self.r[:K + 1], rt=self.rt[:K + 1],
            alpha=self.alpha[:K + 1], beta=self.beta[:K + 1],
            standard=self.standard,
        )


@dataclass(frozen=True)
class CubePair:
    """Concentric outer/inner cube around one center."""

    center: tuple[float, ...]
    inner_half_edge: float
    outer_half_edge: float
    side: Side

    def __post_init__(self):
        if not 0.0 < self.inner_half_edge < self.outer_half_edge:
            raise ConstructionError("need 0 < inner < outer half-edge")

    @property
    def n(self) -> int:
        return len(self.center)

    @property
    def inner_diameter(self) -> float:
        """Euclidean diameter of the inner cube, 2*sqrt(n)*r."""
        return 2.0 * math.sqrt(self.n) * self.inner_half_edge


@dataclass(frozen=True)
class Location:
    """Where a point sits in the hierarchy, up to the probed depth."""

    region: Literal["annulus", "core"]
    word: VertexWord
    m: float  # sup distance to the word's center

    @property
    def depth(self) -> int:
        return self.word.depth


@dataclass(frozen=True)
class Descent:
    """Raw state of a hierarchy descent (internal)."""

    region: Literal["annulus", "core"]
    depth: int
    signs: tuple[tuple[int, ...], ...]
    z: tuple[float, ...]
    zt: tuple[float, ...]
    m: float


def check_point(x: Sequence[float], n: int) -> tuple[float, ...]:
    pt = tuple(float(c) for c in x)
    if len(pt) != n:
        raise DomainError(f"expected {n} coordinates, got {len(pt)}")
    for c in pt:
        if math.isnan(c) or abs(c) > 1.0:
            raise DomainError(f"point {pt!r} outside [-1,1]^{n}")
    return pt


def descend(x: Sequence[float], pack: SequencePack, max_depth: int,
            side: Side = "domain") -> Descent:
    """Walk the hierarchy containing x, tracking both center chains.

    ``side`` selects which radii drive the geometry (and which centers the
    sign choices compare against).  Ties on shared faces go to the vertex
    with -1 in the tied coordinate, i.e. the lexicographically smallest
    child.
    """
    n = pack.n
    if not 1 <= max_depth <= pack.K:
        raise DepthError(f"max_depth {max_depth} outside 1..{pack.K}")
    x = check_point(x, n)
    drive = pack.r if side == "domain" else pack.rt
    z = [0.0] * n
    zt = [0.0] * n
    signs: list[tuple[int, ...]] = []
    base = z if side == "domain" else zt
    m = max(abs(c) for c in x)
    for k in range(1, max_depth + 1):
        v = tuple(1 if x[i] - base[i] > 0.0 else -1 for i in range(n))
        half = 0.5 * pack.r[k - 1]
        halft = 0.5 * pack.rt[k - 1]
        for i in range(n):
            z[i] += half * v[i]
            zt[i] += halft * v[i]
        signs.append(v)
        m = max(abs(x[i] - base[i]) for i in range(n))
        if m > drive[k]:
            return Descent("annulus", k, tuple(signs), tuple(z), tuple(zt), m)
    return Descent("core", max_depth, tuple(signs), tuple(z), tuple(zt), m)


def center(word: VertexWord, pack: SequencePack, side: Side = "domain") -> tuple[float, ...]:
    """Center z_v = sum (r_{i-1}/2) v_i (or rt on the target side)."""
    k = word.depth
    if k > pack.K:
        raise DepthError(f"word depth {k} exceeds pack depth {pack.K}")
    radii = pack.r if side == "domain" else pack.rt
    z = [0.0] * word.n
    for i, level in enumerate(word.signs):
        half = 0.5 * radii[i]
        for c in range(word.n):
            z[c] += half * level[c]
    return tuple(z)


def cubes(word: VertexWord, pack: SequencePack, side: Side = "domain") -> CubePair:
    """Outer/inner cube pair addressed by the word (depth 1..K)."""
    k = word.depth
    if not 1 <= k <= pack.K:
        raise DepthError(f"cube depth {k} outside 1..{pack.K}")
    radii = pack.r if side == "domain" else pack.rt
    return CubePair(
        center=center(word, pack, side),
        inner_half_edge=radii[k],
        outer_half_edge=radii[k - 1] / 2.0,
        side=side,
    )


def locate(x: Sequence[float], pack: SequencePack, max_depth: int | None = None,
           side: Side = "domain") -> Location:
    """Locate x: the annulus word at the first depth with ||x - z_v|| > r_k,
    or the core word at max_depth.  Inner cubes are closed, so face points
    keep descending."""
    if max_depth is None:
        max_depth = pack.K
    d = descend(x, pack, max_depth, side)
    word = VertexWord(pack.n, d.signs[:d.depth])
    return Location(region=d.region, word=word, m=d.m)


def dyadic_cube(word: VertexWord) -> tuple[tuple[float, ...], float]:
    """Binary coding of a word: the level-k dyadic cube (corner, size 2^-k).

    Coordinate i of the corner reads the i-th coordinate signs of the word
    as binary digits after the point (+1 -> 1, -1 -> 0).
    """
    k = word.depth
    if k > 52:
        raise PrecisionError("dyadic corners are exact only up to depth 52")
    corner = []
    for i in range(word.n):
        bits = 0
        for level in word.signs:
            bits = (bits << 1) | (1 if level[i] > 0 else 0)
        corner.append(math.ldexp(float(bits), -k))
    return tuple(corner), math.ldexp(1.0, -k)


def dyadic_preimage(corner: Sequence[float], k: int, n: int | None = None) -> VertexWord:
    """Inverse of dyadic_cube on level-k grid corners in [0, 1)^n."""
    if k < 0 or k > 52:
        raise PrecisionError("level k must lie in 0..52")
    pts = tuple(float(c) for c in corner)
    if n is None:
        n = len(pts)
    if len(pts) != n:
        raise ValueError("corner dimension mismatch")
    cols = []
    for c in pts:
        if not 0.0 <= c < 1.0:
            raise PrecisionError(f"corner coordinate {c!r} outside [0, 1)")
        scaled = math.ldexp(c, k)
        bits = round(scaled)
        if bits != scaled:
            raise PrecisionError(f"{c!r} is not a level-{k} dyadic corner")
        cols.append(bits)
    levels = []
    for j in range(k):
        shift = k - 1 - j
        levels.append(tuple(1 if (bits >> shift) & 1 else -1 for bits in cols))
    return VertexWord(n, tuple(levels))


def descendant_count(from_depth: int, to_depth: int, n: int) -> int:
    """Number of depth-l words below one depth-m word: 2^(n (l - m))."""
    if to_depth < from_depth:
        raise ValueError("to_depth must be >= from_depth")
    return 2 ** (n * (to_depth - from_depth))


def constant_suffix_lengths(word: VertexWord) -> tuple[int, ...]:
    """Per coordinate, the length of the trailing run of one repeated sign."""
    runs = []
    for i in range(word.n):
        run = 0
        last = None
        for level in reversed(word.signs):
            if last is None or level[i] == last:
                run += 1
                last = level[i]
            else:
                break
        runs.append(run)
    return tuple(runs)


def is_dyadic_boundary_candidate(word: VertexWord) -> bool:
    """Finite-depth witness for the exceptional coding set.

    A coded coordinate is an exact dyadic rational iff its sign column is
    eventually constant, which no finite prefix can decide; the strongest
    finite witness is a column that is constant over the whole word.  No
    measure or norm computation depends on resolving the set exactly.
    """
    if word.depth == 0:
        return False
    return any(run == word.depth for run in constant_suffix_lengths(word))


def write_cube_table(pack: SequencePack, depth: int, side: Side, fileobj,
                     header_comments: Sequence[str] = ()) -> int:
    """CSV table of all cubes at one depth: word, center, half-edges."""
    for line in header_comments:
        fileobj.write(f"# {line}\n")
    writer = csv.writer(fileobj, lineterminator="\n")
    writer.writerow(
        ["depth", "word"]
        + [f"center{i + 1}" for i in range(pack.n)]
        + ["inner_half_edge", "outer_half_edge"]
    )
    count = 0
    for word in all_words(pack.n, depth):
        pair = cubes(word, pack, side)
        writer.writerow(
            [depth, str(word)]
            + [repr(c) for c in pair.center]
            + [repr(pair.inner_half_edge), repr(pair.outer_half_edge)]
        )
        count += 1
    return count
