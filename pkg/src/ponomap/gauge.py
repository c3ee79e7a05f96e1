"""Gauge functions and the sequence solvers that drive the cube construction.

A gauge is a continuous non-decreasing function h with h(0) = 0; it induces a
generalized Hausdorff measure through cover sums of h(diam U_i).  Two shapes
are supported:

* product gauges h(t) = t^n * tau(t), where tau is a slowly varying factor
  from a small config family (constant, logs, iterated logs, products);
* raw gauges given directly by a formula descriptor (powers, powers damped
  by a log, steep exponentials), used for the null-measure regime.

The two sequence solvers turn a gauge into the scale sequence a_0, ..., a_K
of a nested-cube construction:

* ``finite_measure_sequence`` solves t^n * tau(p t) = 1 at p = 2^-k, which
  calibrates the depth-k cover sums to stay bounded away from 0 and infinity;
* ``null_measure_sequence`` picks a_k small enough that the depth-k cover
  sums collapse geometrically, forcing the measure of the limit set to zero.

All arithmetic is binary64.  tau factors are clamped at 1 from below (the
families may dip slightly under 1 at moderate arguments); the clamp can be
inspected via ``TauSpec.clamps_at``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import (
    ConstructionError,
    GaugeRangeError,
    HypothesisViolatedError,
    NoRootError,
    ToleranceError,
)

TAU_FAMILIES = ("constant", "log", "log_power", "iterated_log", "composed")
RAW_FAMILIES = ("power", "log_inverse", "exp_inverse")

# coarse scan used to locate the first sign crossing of t^n*tau(pt) - 1
_SCAN_DECADES = 12
_SCAN_PER_DECADE = 256


def _stable_log_arg(shift: float, t: float) -> float:
    # log(shift + 1/t) evaluated as log(shift) + log1p(1/(shift*t))
    return math.log(shift) + math.log1p(1.0 / (shift * t))


@dataclass(frozen=True)
class TauSpec:
    """Slowly varying factor tau: (0, inf) -> [1, inf), non-increasing.

    Families:
      constant      tau(t) = value                      (value >= 1)
      log           tau(t) = log(shift + 1/t)           (shift >= e)
      log_power     tau(t) = log(shift + 1/t)^exponent
      iterated_log  tau(t) = (log o ... o log(shift + 1/t))^exponent,
                    with ``iterations`` nested logs
      composed      product of the factor specs

    Values below 1 are clamped to 1 so the factor stays a valid
    slowly varying multiplier.
    """

    family: str
    value: float = 1.0
    exponent: float = 1.0
    iterations: int = 1
    shift: float = math.e
    factors: tuple["TauSpec", ...] = field(default=())

    def __post_init__(self):
        if self.family not in TAU_FAMILIES:
            raise ValueError(f"unknown tau family {self.family!r}")
        if self.family == "constant" and self.value < 1.0:
            raise ValueError("constant tau requires value >= 1")
        if self.exponent < 0.0:
            raise ValueError("exponent must be >= 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.family in ("log", "log_power", "iterated_log") and self.shift < math.e:
            raise ValueError("shift must be >= e")
        if self.family == "composed":
            if not self.factors:
                raise ValueError("composed tau requires at least one factor")
        elif self.factors:
            raise ValueError("factors only allowed for the composed family")

    def _log_depth(self) -> int:
        if self.family == "log" or self.family == "log_power":
            return 1
        return self.iterations

    def raw_value(self, t: float) -> float:
        """Family formula before the clamp at 1."""
        if t <= 0.0 or math.isnan(t):
            raise ValueError("tau is defined for t > 0")
        if self.family == "constant":
            return self.value
        if self.family == "composed":
            prod = 1.0
            for f in self.factors:
                prod *= f(t)
            return prod
        x = _stable_log_arg(self.shift, t)
        for _ in range(self._log_depth() - 1):
            if x <= 0.0:
                return 0.0
            x = math.log(x)
        if x <= 0.0:
            return 0.0
        if self.family == "log":
            return x
        return x ** self.exponent

    def __call__(self, t: float) -> float:
        return max(1.0, self.raw_value(t))

    def clamps_at(self, t: float) -> bool:
        return self.raw_value(t) < 1.0

    @property
    def diverges_at_zero(self) -> bool:
        """True when lim_{t->0+} tau(t) = inf for this family."""
        if self.family == "constant":
            return False
        if self.family == "composed":
            return any(f.diverges_at_zero for f in self.factors)
        return self.exponent > 0.0 or self.family == "log"

    def to_dict(self) -> dict:
        if self.family == "constant":
            return {"family": "constant", "value": self.value}
        if self.family == "log":
            return {"family": "log", "shift": self.shift}
        if self.family == "log_power":
            return {"family": "log_power", "exponent": self.exponent, "shift": self.shift}
        if self.family == "iterated_log":
            return {
                "family": "iterated_log",
                "iterations": self.iterations,
                "exponent": self.exponent,
                "shift": self.shift,
            }
        return {"family": "composed", "factors": [f.to_dict() for f in self.factors]}

    @classmethod
    def from_dict(cls, data: dict) -> "TauSpec":
        if not isinstance(data, dict) or "family" not in data:
            raise ValueError("tau spec must be an object with a 'family' field")
        family = data["family"]
        allowed = {
            "constant": {"family", "value"},
            "log": {"family", "shift"},
            "log_power": {"family", "exponent", "shift"},
            "iterated_log": {"family", "iterations", "exponent", "shift"},
            "composed": {"family", "factors"},
        }
        if family not in allowed:
            raise ValueError(f"unknown tau family {family!r}")
        extra = set(data) - allowed[family]
        if extra:
            raise ValueError(f"unexpected tau fields {sorted(extra)} for family {family!r}")
        if family == "constant":
            return cls(family="constant", value=float(data.get("value", 1.0)))
        if family == "log":
            return cls(family="log", shift=float(data.get("shift", math.e)))
        if family == "log_power":
            return cls(
                family="log_power",
                exponent=float(data.get("exponent", 1.0)),
                shift=float(data.get("shift", math.e)),
            )
        if family == "iterated_log":
            return cls(
                family="iterated_log",
                iterations=int(data.get("iterations", 1)),
                exponent=float(data.get("exponent", 1.0)),
                shift=float(data.get("shift", math.e)),
            )
        return cls(
            family="composed",
            factors=tuple(cls.from_dict(f) for f in data["factors"]),
        )


@dataclass(frozen=True)
class RawGauge:
    """Direct gauge descriptor, not of the t^n * tau(t) shape.

    Families:
      power        h(t) = t^alpha                          (alpha > 0)
      log_inverse  h(t) = t^alpha / log(shift + 1/t)^exponent
      exp_inverse  h(t) = exp(-scale / t)                  (scale > 0)
    """

    family: str
    alpha: float = 1.0
    exponent: float = 1.0
    shift: float = math.e
    scale: float = 1.0

    def __post_init__(self):
        if self.family not in RAW_FAMILIES:
            raise ValueError(f"unknown raw gauge family {self.family!r}")
        if self.family in ("power", "log_inverse") and self.alpha <= 0.0:
            raise ValueError("alpha must be > 0")
        if self.family == "log_inverse":
            if self.exponent < 0.0:
                raise ValueError("exponent must be >= 0")
            if self.shift < math.e:
                raise ValueError("shift must be >= e")
        if self.family == "exp_inverse" and self.scale <= 0.0:
            raise ValueError("scale must be > 0")

    def __call__(self, t: float) -> float:
        if t == 0.0:
            return 0.0
        if self.family == "power":
            return t ** self.alpha
        if self.family == "log_inverse":
            return t ** self.alpha / _stable_log_arg(self.shift, t) ** self.exponent
        return math.exp(-self.scale / t)

    def to_dict(self) -> dict:
        if self.family == "power":
            return {"family": "power", "alpha": self.alpha}
        if self.family == "log_inverse":
            return {
                "family": "log_inverse",
                "alpha": self.alpha,
                "exponent": self.exponent,
                "shift": self.shift,
            }
        return {"family": "exp_inverse", "scale": self.scale}

    @classmethod
    def from_dict(cls, data: dict) -> "RawGauge":
        if not isinstance(data, dict) or "family" not in data:
            raise ValueError("raw gauge spec must be an object with a 'family' field")
        family = data["family"]
        allowed = {
            "power": {"family", "alpha"},
            "log_inverse": {"family", "alpha", "exponent", "shift"},
            "exp_inverse": {"family", "scale"},
        }
        if family not in allowed:
            raise ValueError(f"unknown raw gauge family {family!r}")
        extra = set(data) - allowed[family]
        if extra:
            raise ValueError(f"unexpected raw gauge fields {sorted(extra)} for {family!r}")
        if family == "power":
            if "alpha" not in data:
                raise ValueError("power gauge requires an 'alpha' field")
            return cls(family="power", alpha=float(data["alpha"]))
        if family == "log_inverse":
            return cls(
                family="log_inverse",
                alpha=float(data.get("alpha", 1.0)),
                exponent=float(data.get("exponent", 1.0)),
                shift=float(data.get("shift", math.e)),
            )
        return cls(family="exp_inverse", scale=float(data.get("scale", 1.0)))


@dataclass(frozen=True)
class GaugeSpec:
    """A gauge function h on [0, inf), either h = t^n * tau(t) or a raw formula."""

    n: int
    tau: TauSpec | None = None
    raw: RawGauge | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("dimension n must be >= 2")
        if (self.tau is None) == (self.raw is None):
            raise ValueError("exactly one of tau or raw must be given")

    def describe(self) -> str:
        if self.tau is not None:
            return f"t^{self.n}*tau{self.tau.to_dict()}"
        return f"raw{self.raw.to_dict()}"

    def to_dict(self) -> dict:
        if self.tau is not None:
            return {"n": self.n, "tau": self.tau.to_dict()}
        return {"n": self.n, "raw": self.raw.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "GaugeSpec":
        if not isinstance(data, dict) or "n" not in data:
            raise ValueError("gauge spec must be an object with an 'n' field")
        extra = set(data) - {"n", "tau", "raw"}
        if extra:
            raise ValueError(f"unexpected gauge fields {sorted(extra)}")
        n = data["n"]
        if not isinstance(n, int):
            raise ValueError("n must be an integer")
        tau = TauSpec.from_dict(data["tau"]) if "tau" in data else None
        raw = RawGauge.from_dict(data["raw"]) if "raw" in data else None
        return cls(n=n, tau=tau, raw=raw)


def eval_h(spec: GaugeSpec, t: float) -> float:
    """Evaluate the gauge at t >= 0; exactly 0 at t = 0.

    Raises GaugeRangeError when the value overflows binary64.
    """
    t = float(t)
    if math.isnan(t) or math.isinf(t):
        raise ValueError("t must be finite")
    if t < 0.0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        return 0.0
    try:
        if spec.tau is not None:
            out = t ** spec.n * spec.tau(t)
        else:
            out = spec.raw(t)
    except OverflowError as exc:
        raise GaugeRangeError(f"gauge overflow at t={t!r}") from exc
    if math.isinf(out):
        raise GaugeRangeError(f"gauge overflow at t={t!r}")
    return out


def _first_crossing_root(tau_fn, p: float, n: int, tol: float,
                         per_decade: int = _SCAN_PER_DECADE) -> float:
    """First t in (0, 1] where g(t) = t^n * tau_fn(p t) - 1 crosses to >= 0.

    Coarse log-grid scan (``per_decade`` points per decade over
    ``_SCAN_DECADES`` decades) followed by bisection.  The scan guarantees
    g < 0 at all grid points below the returned root, which is the strict
    inequality the construction relies on below the crossing.
    """
    if tol <= 0.0:
        raise ValueError("tol must be > 0")

    def g(t: float) -> float:
        return t ** n * tau_fn(p * t) - 1.0

    count = _SCAN_DECADES * per_decade
    lo_t = 10.0 ** (-_SCAN_DECADES)
    prev = lo_t
    gprev = g(prev)
    if gprev >= 0.0:
        raise HypothesisViolatedError(
            f"t^{n}*tau({p}*t) >= 1 already at t={prev:g}; tau grows too fast near 0"
        )
    bracket = None
    for i in range(1, count + 1):
        t = 10.0 ** (-_SCAN_DECADES * (1.0 - i / count))
        gt = g(t)
        if gt >= 0.0:
            bracket = (prev, t)
            break
        prev, gprev = t, gt
    if bracket is None:
        raise NoRootError(f"t^{n}*tau({p}*t) < 1 on all of (0, 1]")
    lo, hi = bracket
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    root = hi
    if abs(g(root)) > tol:
        raise ToleranceError(
            f"bisection stalled: |g| = {abs(g(root)):g} > tol = {tol:g} at t = {root:g}"
        )
    return root


def tau_root(tau: TauSpec, p: float, n: int, tol: float = 1e-12) -> float:
    """Solve 1/tau(p t) = t^n for the first crossing t_p in (0, 1].

    Below the returned point, t^n * tau(p t) < 1 holds on the scan grid.
    Raises NoRootError / HypothesisViolatedError when the gauge family does
    not admit a crossing for this p.
    """
    if not (0.0 < p <= 1.0):
        raise ValueError("p must lie in (0, 1]")
    return _first_crossing_root(tau, p, n, tol)


def finite_measure_sequence(tau: TauSpec, n: int, K: int,
                            tol: float = 1e-12) -> tuple[float, ...]:
    """Scale sequence a_0 = 1, a_k = root of t^n * tau(2^-k t) = 1, k = 1..K.

    The sequence is non-increasing; a failing root search raises NoRootError
    carrying the failing k.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    a = [1.0]
    for k in range(1, K + 1):
        try:
            root = tau_root(tau, 2.0 ** -k, n, tol)
        except NoRootError as exc:
            raise NoRootError(f"no root at k={k}: {exc}", k=k) from exc
        if root > a[-1]:
            # roots are monotone in p; tolerate only float-level jitter
            if root > a[-1] * (1.0 + 1e-12):
                raise ConstructionError(
                    f"root sequence not monotone at k={k}: "
                    f"a_k={root!r} > a_(k-1)={a[-1]!r}"
                )
            root = a[-1]
        a.append(root)
    return tuple(a)


def null_measure_sequence(h: GaugeSpec, K: int, safety: float = 0.5,
                          max_iter: int = 400) -> tuple[float, ...]:
    """Scale sequence with a_k <= a_{k-1}/2 and h(c_n 2^-k a_k) <= safety * 2^(-2nk).

    c_n = 2*sqrt(n) is the Euclidean diameter of a unit-half-edge cube.  The
    bound makes the depth-k cover sums collapse like 2^(-nk).  Found by
    monotone bisection in log scale; h(0) = 0 guarantees feasibility.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if not (0.0 < safety < 1.0):
        raise ValueError("safety must lie in (0, 1)")
    n = h.n
    cn = 2.0 * math.sqrt(n)
    a = [1.0]
    for k in range(1, K + 1):
        cap = a[-1] / 2.0
        target = safety * 2.0 ** (-2 * n * k)

        def excess(aa: float) -> float:
            return eval_h(h, cn * 2.0 ** -k * aa) - target

        if excess(cap) <= 0.0:
            a.append(cap)
            continue
        lo = cap
        for _ in range(max_iter):
            lo /= 2.0
            if excess(lo) <= 0.0:
                break
        else:
            raise ToleranceError(f"could not bracket the gauge bound at k={k}")
        hi = lo * 2.0
        for _ in range(max_iter):
            mid = math.sqrt(lo * hi)
            if mid <= lo or mid >= hi:
                break
            if excess(mid) <= 0.0:
                lo = mid
            else:
                hi = mid
        if excess(lo) > 0.0:
            raise ToleranceError(f"bisection failed to certify the bound at k={k}")
        a.append(lo)
    return tuple(a)


def check_gauge_monotone(spec: GaugeSpec, points: int = 10_000,
                         t_max: float = 4.0) -> tuple[bool, float]:
    """Sample h on a [0, t_max] grid; returns (non-decreasing?, worst drop)."""
    worst = 0.0
    prev = eval_h(spec, 0.0)
    for i in range(1, points + 1):
        t = t_max * i / points
        cur = eval_h(spec, t)
        worst = max(worst, prev - cur)
        prev = cur
    return worst <= 0.0, worst


def check_tau_invariants(tau: TauSpec, points: int = 2_000) -> dict:
    """Probe the tau invariants on standard grids.

    Returns observations: clamped lower bound, worst monotonicity violation
    on (0, 1], and whether tau(10^-j) increases along j = 1..12 for
    divergent families.
    """
    min_val = math.inf
    worst_increase = 0.0
    prev = None
    for i in range(1, points + 1):
        t = i / points
        val = tau(t)
        min_val = min(min_val, val)
        if prev is not None:
            worst_increase = max(worst_increase, val - prev)
        prev = val  # grid ascending; tau should be non-increasing
    ladder_ok = True
    if tau.diverges_at_zero:
        ladder = [tau(10.0 ** -j) for j in range(1, 13)]
        ladder_ok = all(b > a for a, b in zip(ladder, ladder[1:]))
    return {
        "min_value": min_val,
        "worst_monotonicity_violation": worst_increase,
        "ladder_increasing": ladder_ok,
    }
