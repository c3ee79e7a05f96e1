"""Command-line front end.

Subcommands: sequence | eval | verify | norms | hausdorff | render.
Every output artifact embeds the resolved-config digest and the seed, no
timestamps, so identical config + seed reproduces byte-identical files.

Exit codes: 0 success, 2 verification failure, 3 config error, 4 numeric
error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import analysis, render
from .cantor import SequencePack, geometric_sequence, harmonic_sequence
from .errors import ConstructionError, PonomapError
from .gauge import GaugeSpec, eval_h, finite_measure_sequence, null_measure_sequence
from .mapping import build
from .verify import VerifyScale, run_suite

EXIT_OK = 0
EXIT_VERIFY_FAILED = 2
EXIT_CONFIG = 3
EXIT_NUMERIC = 4

DEFAULT_CONFIG = {
    "gauge": {"n": 2, "tau": {"family": "log", "shift": math.e}},
    "theorem": 1,
    "sequence": {"kind": "harmonic"},
    "depth": 16,
    "seed": 0,
    "eps_grid": "1e-4:1:64",
    "resolution": 65,
    "safety": 0.5,
    "hausdorff": {"depths": [0, 1, 2, 4, 8], "probe_depth": 3, "probe_level": 5,
                  "random_covers": 5},
    "verify": {},
}


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    gauge: GaugeSpec
    theorem: object  # 1, 2 or "custom"
    sequence: dict
    depth: int
    seed: int
    eps_grid: tuple[float, ...]
    resolution: int
    safety: float
    hausdorff: dict
    verify: dict
    digest: str
    resolved: dict


def parse_eps_grid(text: str, n: int) -> tuple[float, ...]:
    try:
        lo_s, hi_s, count_s = text.split(":")
        lo, hi, count = float(lo_s), float(hi_s), int(count_s)
    except ValueError as exc:
        raise ConfigError(f"bad eps grid {text!r}; expected 'lo:hi:count'") from exc
    if not (0.0 < lo <= hi <= n - 1.0) or count < 1:
        raise ConfigError(f"eps grid {text!r} outside (0, n-1]")
    if count == 1:
        return (hi,)
    return tuple(float(e) for e in np.geomspace(lo, hi, count))


def resolve_config(args: argparse.Namespace) -> RunConfig:
    data = json.loads(json.dumps(DEFAULT_CONFIG))  # deep copy
    if args.config is not None:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(loaded) - set(DEFAULT_CONFIG)
        if unknown:
            raise ConfigError(f"unknown config fields {sorted(unknown)}")
        data.update(loaded)
    if getattr(args, "depth", None) is not None:
        data["depth"] = args.depth
    if getattr(args, "seed", None) is not None:
        data["seed"] = args.seed
    if getattr(args, "eps_grid", None) is not None:
        data["eps_grid"] = args.eps_grid
    if getattr(args, "resolution", None) is not None:
        data["resolution"] = args.resolution
    if getattr(args, "theorem", None) is not None:
        data["theorem"] = args.theorem

    try:
        gauge = GaugeSpec.from_dict(data["gauge"])
    except ValueError as exc:
        raise ConfigError(f"bad gauge spec: {exc}") from exc
    if data["theorem"] not in (1, 2, "custom"):
        raise ConfigError("theorem must be 1, 2 or 'custom'")
    if not isinstance(data["depth"], int) or data["depth"] < 1:
        raise ConfigError("depth must be an integer >= 1")
    if not isinstance(data["seed"], int) or data["seed"] < 0:
        raise ConfigError("seed must be a non-negative integer")
    if not isinstance(data["resolution"], int) or data["resolution"] < 2:
        raise ConfigError("resolution must be an integer >= 2")
    if not (0.0 < float(data["safety"]) < 1.0):
        raise ConfigError("safety must lie in (0, 1)")
    eps = parse_eps_grid(data["eps_grid"], gauge.n)
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(canonical.encode()).hexdigest()
    return RunConfig(
        gauge=gauge,
        theorem=data["theorem"],
        sequence=data["sequence"],
        depth=data["depth"],
        seed=data["seed"],
        eps_grid=eps,
        resolution=data["resolution"],
        safety=float(data["safety"]),
        hausdorff=data["hausdorff"],
        verify=data["verify"],
        digest=digest,
        resolved=data,
    )


def make_scales(cfg: RunConfig) -> tuple[float, ...]:
    if cfg.theorem == 1:
        if cfg.gauge.tau is None:
            raise ConfigError("theorem 1 requires a tau-form gauge")
        return finite_measure_sequence(cfg.gauge.tau, cfg.gauge.n, cfg.depth)
    if cfg.theorem == 2:
        return null_measure_sequence(cfg.gauge, cfg.depth, safety=cfg.safety)
    seq = cfg.sequence
    if "values" in seq:
        vals = tuple(float(v) for v in seq["values"])
        if len(vals) != cfg.depth + 1:
            raise ConfigError("sequence values must have length depth+1")
        return vals
    kind = seq.get("kind", "harmonic")
    if kind == "harmonic":
        return harmonic_sequence(cfg.depth)
    if kind == "geometric":
        return geometric_sequence(cfg.depth, float(seq.get("ratio", 0.5)))
    raise ConfigError(f"unknown sequence kind {kind!r}")


def make_pack(cfg: RunConfig) -> SequencePack:
    return SequencePack.from_standard(cfg.gauge.n, make_scales(cfg))


def kind_of(cfg: RunConfig) -> str:
    return {1: "finite_measure", 2: "null_measure"}.get(cfg.theorem, "custom")


def provenance(cfg: RunConfig) -> list[str]:
    return [f"config_digest={cfg.digest}", f"seed={cfg.seed}"]


def write_json(path: Path, payload: dict, cfg: RunConfig) -> None:
    payload = dict(payload)
    payload["config_digest"] = cfg.digest
    payload["seed"] = cfg.seed
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def cmd_sequence(cfg: RunConfig, out: Path) -> int:
    a = make_scales(cfg)
    n = cfg.gauge.n
    cn = 2.0 * math.sqrt(n)
    rows = []
    for k in range(cfg.depth + 1):
        b = (1.0 + a[k]) / 2.0
        r = math.ldexp(a[k], -k)
        rt = math.ldexp(b, -k)
        alpha = 0.5 if k >= 1 else math.nan
        beta = math.ldexp(1.0, -k - 1) if k >= 1 else math.nan
        if k == 0:
            check = True
        elif cfg.theorem == 1:
            check = abs(a[k] ** n * cfg.gauge.tau(r) - 1.0) <= 1e-10
        elif cfg.theorem == 2:
            check = eval_h(cfg.gauge, cn * r) <= cfg.safety * 2.0 ** (-2 * n * k)
        else:
            check = a[k] < a[k - 1]
        rows.append((k, a[k], b, r, rt, alpha, beta, check))
    with open(out / "sequence.csv", "w", newline="") as f:
        for line in provenance(cfg):
            f.write(f"# {line}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["k", "a", "b", "r", "rt", "alpha", "beta", "check"])
        for row in rows:
            k, av, bv, r, rt, alpha, beta, check = row
            writer.writerow([
                k, repr(av), repr(bv), repr(r), repr(rt),
                "" if math.isnan(alpha) else repr(alpha),
                "" if math.isnan(beta) else repr(beta),
                str(check).lower(),
            ])
    write_json(out / "sequence.json", {
        "k": [row[0] for row in rows],
        "a": [row[1] for row in rows],
        "b": [row[2] for row in rows],
        "r": [row[3] for row in rows],
        "rt": [row[4] for row in rows],
        "alpha": [None if math.isnan(row[5]) else row[5] for row in rows],
        "beta": [None if math.isnan(row[6]) else row[6] for row in rows],
        "check": [row[7] for row in rows],
        "theorem": cfg.theorem,
        "gauge": cfg.gauge.to_dict(),
    }, cfg)
    return EXIT_OK


def read_points(path: Path, n: int) -> list[tuple[float, ...] | str]:
    rows: list[tuple[float, ...] | str] = []
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p for p in line.replace(",", " ").split() if p]
        try:
            vals = tuple(float(p) for p in parts)
        except ValueError:
            rows.append(f"unparsable row: {line!r}")
            continue
        if len(vals) != n:
            rows.append(f"expected {n} coordinates: {line!r}")
            continue
        rows.append(vals)
    return rows


def cmd_eval(cfg: RunConfig, out: Path, points_path: Path) -> int:
    pmap = build(make_pack(cfg), provenance="; ".join(provenance(cfg)))
    n = pmap.n
    rows = read_points(points_path, n)
    with open(out / "eval.csv", "w", newline="") as f:
        for line in provenance(cfg):
            f.write(f"# {line}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(
            [f"x{i + 1}" for i in range(n)]
            + [f"y{i + 1}" for i in range(n)]
            + [f"back{i + 1}" for i in range(n)]
            + ["depth", "region"]
        )
        for row in rows:
            if isinstance(row, str):
                writer.writerow([""] * (3 * n) + ["", f"error: {row}"])
                continue
            try:
                y = pmap.eval(row)
                back = pmap.eval_inverse(y)
                loc = pmap.locate(row)
            except PonomapError as exc:
                writer.writerow([repr(v) for v in row] + [""] * (2 * n)
                                + ["", f"error: {exc}"])
                continue
            writer.writerow(
                [repr(v) for v in row]
                + [repr(v) for v in y]
                + [repr(v) for v in back]
                + [loc.depth, loc.region]
            )
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out: Path) -> int:
    pack = make_pack(cfg)
    scale_kwargs = {k: int(v) for k, v in cfg.verify.items()}
    scale = VerifyScale(**scale_kwargs)
    report = run_suite(pack, gauge=cfg.gauge, kind=kind_of(cfg), seed=cfg.seed,
                       scale=scale, safety=cfg.safety)
    write_json(out / "verify.json", report.to_dict(), cfg)
    for c in report.checks:
        status = "pass" if c.passed else "FAIL"
        print(f"{status} {c.name}: observed={c.observed:.6g} bound={c.bound:.6g}")
    print(f"verify: {'pass' if report.passed else 'FAIL'} "
          f"({sum(c.passed for c in report.checks)}/{len(report.checks)} checks)")
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def cmd_norms(cfg: RunConfig, out: Path) -> int:
    pmap = build(make_pack(cfg))
    rep = analysis.grand_norm_report(pmap, eps_grid=cfg.eps_grid)
    write_json(out / "norms.json", rep.to_dict(), cfg)
    partials, core = analysis.sobolev_depth_profile(pmap, float(pmap.n))
    write_json(out / "norms_divergence.json", {
        "p": float(pmap.n),
        "partial_sums": list(partials),
        "core_term": core,
        "total": partials[-1] + core,
    }, cfg)
    print(f"grand norm sup over {len(rep.eps)} eps points: {rep.sup:.9g}")
    return EXIT_OK


def cmd_hausdorff(cfg: RunConfig, out: Path) -> int:
    a = make_scales(cfg)
    hcfg = cfg.hausdorff
    depths = [int(d) for d in hcfg.get("depths", [0, 1, 2, 4, 8])]
    uppers = []
    for k in depths:
        if k > cfg.depth:
            continue
        uppers.append(analysis.upper_sum_at_scale(cfg.gauge, k, a[k]).to_dict())
    payload = {"upper_sums": uppers, "theorem": cfg.theorem}
    probe_depth = int(hcfg.get("probe_depth", 3))
    probe_level = int(hcfg.get("probe_level", 5))
    trials = int(hcfg.get("random_covers", 5))
    try:
        pack = SequencePack.from_standard(cfg.gauge.n, a)
    except ConstructionError as exc:
        payload["lower_probe"] = {"skipped": str(exc)}
        pack = None
    if pack is not None and probe_level <= pack.K:
        rng = np.random.default_rng(cfg.seed)
        canonical = analysis.hausdorff_lower_probe(
            cfg.gauge, pack, analysis.canonical_cover(pack, probe_depth),
            probe_level)
        randomized = []
        for _ in range(trials):
            cover = analysis.random_cover(pack, probe_depth, rng)
            randomized.append(
                analysis.hausdorff_lower_probe(cfg.gauge, pack, cover,
                                               probe_level).to_dict())
        payload["lower_probe"] = {
            "canonical": canonical.to_dict(),
            "randomized": randomized,
            "c_probe": min([canonical.ratio] + [r["ratio"] for r in randomized]),
        }
    write_json(out / "hausdorff.json", payload, cfg)
    if uppers:
        print(f"upper sum at depth {uppers[-1]['depth']}: {uppers[-1]['total']:.6g}")
    return EXIT_OK


def cmd_render(cfg: RunConfig, out: Path) -> int:
    if cfg.gauge.n != 2:
        raise ConfigError("render supports n = 2 only")
    pmap = build(make_pack(cfg))
    res = cfg.resolution
    comments = provenance(cfg)
    samples = render.eval_grid(pmap, res)
    render.write_grid_csv(out / "render_grid.csv", samples, comments)
    disp = render.displacement_field(pmap, res)
    render.write_pgm(out / "displacement.pgm", render.grayscale(disp), comments)
    jac = render.jacobian_field(pmap, res)
    render.write_ppm(out / "jacobian.ppm", render.diverging_colors(jac), comments)
    grid = render.grid_distortion(pmap, res)
    render.write_pgm(out / "grid.pgm", grid, comments)
    print(f"rendered {res}x{res} grids to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ponomap",
        description="Nested-cube homeomorphisms from gauge functions: "
                    "sequences, evaluation, verification, norms, covers, renders.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("sequence", "emit the scale/coefficient table (CSV + JSON)"),
        ("eval", "evaluate the map and its inverse on a points file"),
        ("verify", "run the full invariant suite; nonzero exit on failure"),
        ("norms", "grand-norm report and p = n divergence profile"),
        ("hausdorff", "upper cover sums and the lower-bound ball probe"),
        ("render", "PGM/PPM renders and CSV grid (n = 2)"),
    ]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", type=Path, default=None, help="JSON config path")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--depth", type=int, default=None, help="truncation depth K")
        p.add_argument("--seed", type=int, default=None, help="RNG seed")
        p.add_argument("--eps-grid", dest="eps_grid", default=None,
                       help="grand-norm grid as lo:hi:count")
        p.add_argument("--resolution", type=int, default=None,
                       help="render resolution (pixels per side)")
        p.add_argument("--theorem", type=int, choices=(1, 2), default=None,
                       help="sequence regime selector")
        if name == "eval":
            p.add_argument("--points", type=Path, required=True,
                           help="CSV/whitespace file of points, one per row")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"config error: cannot create {out}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "sequence":
            return cmd_sequence(cfg, out)
        if args.command == "eval":
            return cmd_eval(cfg, out, args.points)
        if args.command == "verify":
            return cmd_verify(cfg, out)
        if args.command == "norms":
            return cmd_norms(cfg, out)
        if args.command == "hausdorff":
            return cmd_hausdorff(cfg, out)
        if args.command == "render":
            return cmd_render(cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PonomapError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    raise AssertionError("unreachable")


if __name__ == "__main__":
    raise SystemExit(main())
