"""Command-line interface: ``henon-basins <command> [options]``.

Every command takes a map selection (``--henon DELTA MU`` or ``--general G
H``) and an optional ``--config FILE`` of ``key = value`` lines whose keys
are the long option names; flags given on the command line override the
file.  Output files are written only after the computation has finished.

Exit codes: 0 success, 1 a verification check failed, 2 usage error,
3 the origin is not a saddle for the requested parameters.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import verify as V
from .basin import GridSpec, extract_boundary, points_to_csv, raster_to_ppm, rasterize, undecided_points
from .manifolds import Branch, ManifoldKind, NotASaddleError, trace_manifold
from .maps import _CATALOG as SCALAR_CATALOG
from .maps import make_general, make_henon, scalar_map_from_spec
from .orbits import OrbitBudget, classify_backward, classify_forward

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NOT_SADDLE = 0, 1, 2, 3

SWEEP_CHECKS = (
    "lemma5_beta_cone",
    "prop7_polydisk",
    "prop9_adelta",
    "thm10_left_crossing",
    "thm12_right_crossing",
    "prop13_strip_trichotomy",
    "lemma17_curve_c",
    "prop18_lower_half_trichotomy",
)

_SCALAR_HELP = {
    "logistic": "logistic(mu): x -> mu*x*(1-x)",
    "linear": "linear(delta): x -> delta*x",
    "linear_plus_sine": "linear_plus_sine(delta, eta): x -> delta*x + eta*sin(x)",
}


class UsageError(Exception):
    pass


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


@dataclass
class RunConfig:
    """Fully resolved settings of one CLI run.

    ``to_text`` writes the canonical ``key = value`` form; feeding it back
    through :meth:`from_text` gives an equal config.
    """

    command: str
    henon: tuple[float, float] | None = None
    general: tuple[str, str] | None = None
    delta_ref: float | None = None
    point: tuple[float, float] | None = None
    grid: tuple[float, float, float, float, int, int] | None = None
    max_iter: int = 10_000
    escape_norm: float | None = None
    attract_tol: float = 1e-9
    confirm_steps: int = 5
    seed: int = 7
    workers: int = 1
    samples: int | None = None
    backward: bool = False
    kind: str = "stable"
    branch: str = "plus"
    arclength: float = 6.0
    spacing: float = 1e-3
    checks: tuple[str, ...] = ("all",)
    mu: tuple[float, ...] = ()
    delta: tuple[float, ...] = ()
    out: str | None = None
    ppm: str | None = None
    boundary: str | None = None
    undecided: str | None = None

    def to_text(self) -> str:
        parser = build_parser()
        known = {a.dest for a in _subparser(parser, self.command)._actions if a.option_strings}
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name != "command" and f.name not in known:
                continue
            if v is None or (isinstance(v, tuple) and not v):
                continue
            key = f.name.replace("_", "-")
            if isinstance(v, bool):
                text = "true" if v else "false"
            elif isinstance(v, tuple):
                text = " ".join(_fmt(x) if isinstance(x, float) else str(x) for x in v)
            elif isinstance(v, float):
                text = _fmt(v)
            else:
                text = str(v)
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        raw = parse_config_text(text)
        if "command" not in raw:
            raise UsageError("config text lacks a command entry")
        command = raw.pop("command")[0]
        parser = build_parser()
        ns = parser.parse_args([command, *_tokens(raw, _subparser(parser, command))])
        return resolve(ns, {})

    def map_family(self):
        if self.henon is not None:
            d, mu = self.henon
            if d == 0:
                raise UsageError("delta must be nonzero (delta = 0 makes the map non-invertible)")
            if mu <= 0:
                raise UsageError("mu must be positive")
            return make_henon(d, mu)
        if self.general is not None:
            try:
                g = scalar_map_from_spec(self.general[0])
                h = scalar_map_from_spec(self.general[1])
            except ValueError as exc:
                raise UsageError(str(exc)) from exc
            dref = self.delta_ref
            if dref is None:
                dref = h.slope if h.slope is not None else float(h.df(np.float64(0.0)))
            try:
                return make_general(g, h, dref)
            except ValueError as exc:
                raise UsageError(str(exc)) from exc
        raise UsageError("select a map with --henon DELTA MU or --general G H")

    def budget(self, fmap) -> OrbitBudget:
        kw = dict(max_iter=self.max_iter, attract_tol=self.attract_tol, confirm_steps=self.confirm_steps)
        if self.escape_norm is not None:
            kw["escape_norm"] = self.escape_norm
        try:
            return OrbitBudget.default_for(fmap, **kw)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc

    def grid_spec(self, default) -> GridSpec:
        g = self.grid or default
        try:
            return GridSpec(float(g[0]), float(g[1]), float(g[2]), float(g[3]), int(g[4]), int(g[5]))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc


def parse_config_text(text: str) -> dict[str, list[str]]:
    """``key = value`` lines to a dict of whitespace-split values; ``#`` starts a comment."""
    out: dict[str, list[str]] = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("_", "-")] = value.split()
    return out


# ---------------------------------------------------------------------------
# parser


def _catalog_epilog() -> str:
    checks = "\n".join(f"  {cid:32s} {e.label}" for cid, e in V.CATALOG.items())
    scalars = "\n".join(f"  {_SCALAR_HELP.get(k, k)}" for k in SCALAR_CATALOG)
    return f"check catalog:\n{checks}\n\nscalar maps for --general:\n{scalars}\n"


def _add_common(p: argparse.ArgumentParser) -> None:
    m = p.add_argument_group("map selection")
    m.add_argument("--henon", nargs=2, type=float, metavar=("DELTA", "MU"), help="quadratic Hénon map")
    m.add_argument("--general", nargs=2, metavar=("G", "H"), help='general map, e.g. "logistic(2)" "linear_plus_sine(0.1,0.001)"')
    m.add_argument("--delta-ref", type=float, help="linear coefficient h is compared with (default: the catalog slope of h, else h'(0))")
    b = p.add_argument_group("orbit budget")
    b.add_argument("--max-iter", type=int)
    b.add_argument("--escape-norm", type=float, help="default max(10, 3/|delta|)")
    b.add_argument("--attract-tol", type=float)
    b.add_argument("--confirm-steps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--config", type=Path, help="file of key = value lines; flags override it")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.RawDescriptionHelpFormatter
    parser = argparse.ArgumentParser(
        prog="henon-basins",
        description="Basins, invariant manifolds and sampled checks for Hénon-type maps.",
        epilog=_catalog_epilog(),
        formatter_class=fmt,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="fate of one point", formatter_class=fmt)
    _add_common(p)
    p.add_argument("--point", nargs=2, type=float, metavar=("X", "Y"))
    p.add_argument("--backward", action="store_const", const=True, help="classify the backward orbit")

    p = sub.add_parser("basin", help="raster of forward fates, PPM image and boundary CSV", formatter_class=fmt)
    _add_common(p)
    p.add_argument("--grid", nargs=6, metavar=("XMIN", "XMAX", "YMIN", "YMAX", "NX", "NY"))
    p.add_argument("--ppm", help="PPM output path")
    p.add_argument("--boundary", help="boundary CSV output path")
    p.add_argument("--undecided", help="CSV of undecided cell centers")

    p = sub.add_parser("manifold", help="trace a stable or unstable branch of the origin", formatter_class=fmt)
    _add_common(p)
    p.add_argument("--kind", choices=("stable", "unstable"))
    p.add_argument("--branch", choices=("plus", "minus"))
    p.add_argument("--arclength", type=float)
    p.add_argument("--spacing", type=float)
    p.add_argument("--out", help="CSV output path (default stdout)")

    p = sub.add_parser("verify", help="run sampled checks, write a JSON report", epilog=_catalog_epilog(), formatter_class=fmt)
    _add_common(p)
    p.add_argument("--checks", nargs="+", metavar="ID", help='check ids or "all"')
    p.add_argument("--samples", type=int)
    p.add_argument("--out", help="JSON output path (default stdout)")

    p = sub.add_parser("sweep", help="largest delta per mu for which the core checks pass", formatter_class=fmt)
    _add_common(p)
    p.add_argument("--mu", nargs="+", type=float)
    p.add_argument("--delta", nargs="*", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--out", help="CSV output path (default stdout)")
    return parser


def _subparser(parser, command):
    for action in parser._subparsers._group_actions:
        if command in action.choices:
            return action.choices[command]
    raise UsageError(f"unknown command {command!r}")


def _tokens(raw: dict[str, list[str]], sub: argparse.ArgumentParser) -> list[str]:
    known = {a.dest.replace("_", "-"): a for a in sub._actions if a.option_strings}
    toks: list[str] = []
    for key, vals in raw.items():
        if key == "config":
            continue
        if key not in known:
            raise UsageError(f"unknown config key {key!r}")
        action = known[key]
        if action.nargs == 0:
            if vals and vals[0].lower() in ("true", "yes", "1"):
                toks.append(f"--{key}")
            continue
        toks.extend([f"--{key}", *vals])
    return toks


_CONVERT = {
    "grid": lambda v: (float(v[0]), float(v[1]), float(v[2]), float(v[3]), int(v[4]), int(v[5])),
    "henon": lambda v: (float(v[0]), float(v[1])),
    "general": lambda v: (str(v[0]), str(v[1])),
    "point": lambda v: (float(v[0]), float(v[1])),
    "checks": tuple,
    "mu": tuple,
    "delta": tuple,
}


def resolve(ns: argparse.Namespace, file_ns: dict) -> RunConfig:
    """Merge parsed flags over parsed file values into a :class:`RunConfig`."""
    vals = dict(file_ns)
    cli = {k: v for k, v in vars(ns).items() if v is not None and k != "config"}
    if "henon" in cli or "general" in cli:
        vals.pop("henon", None)
        vals.pop("general", None)
    vals.update(cli)
    if "henon" in vals and "general" in vals:
        raise UsageError("give only one of --henon and --general")
    cfg = {}
    names = {f.name for f in fields(RunConfig)}
    for k, v in vals.items():
        if k not in names:
            continue
        try:
            cfg[k] = _CONVERT[k](v) if k in _CONVERT else v
        except (ValueError, IndexError) as exc:
            raise UsageError(f"bad value for {k}: {v}") from exc
    return RunConfig(**cfg)


def load_config(argv=None) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    file_ns: dict = {}
    if ns.config is not None:
        try:
            text = ns.config.read_text()
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}") from exc
        raw = parse_config_text(text)
        raw.pop("command", None)
        sub = _subparser(parser, ns.command)
        fns = parser.parse_args([ns.command, *_tokens(raw, sub)])
        file_ns = {k: v for k, v in vars(fns).items() if v is not None and k not in ("config", "command")}
    return resolve(ns, file_ns)


# ---------------------------------------------------------------------------
# commands


def _emit(text: str | bytes, path: str | None, out) -> None:
    if path is None:
        out.write(text if isinstance(text, str) else text.decode("latin-1"))
        return
    mode = "wb" if isinstance(text, bytes) else "w"
    with open(path, mode) as fh:
        fh.write(text)


def cmd_classify(cfg: RunConfig, out) -> int:
    if cfg.point is None:
        raise UsageError("classify needs --point X Y")
    fmap = cfg.map_family()
    fn = classify_backward if cfg.backward else classify_forward
    try:
        fate = fn(fmap, cfg.point, cfg.budget(fmap))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out.write(f"{fate}\n")
    return EXIT_OK


def cmd_basin(cfg: RunConfig, out) -> int:
    fmap = cfg.map_family()
    spec = cfg.grid_spec((-1.0, 2.0, -0.5, 0.5, 400, 400))
    raster = rasterize(fmap, spec, cfg.budget(fmap), cfg.workers)
    if cfg.ppm:
        _emit(raster_to_ppm(raster), cfg.ppm, out)
    if cfg.boundary:
        _emit(points_to_csv(extract_boundary(raster)), cfg.boundary, out)
    if cfg.undecided:
        _emit(points_to_csv(undecided_points(raster)), cfg.undecided, out)
    counts = raster.counts()
    out.write(" ".join(f"{k}={v}" for k, v in counts.items()) + "\n")
    return EXIT_OK


def cmd_manifold(cfg: RunConfig, out) -> int:
    fmap = cfg.map_family()
    kind = ManifoldKind.STABLE if cfg.kind == "stable" else ManifoldKind.UNSTABLE
    branch = Branch.PLUS if cfg.branch == "plus" else Branch.MINUS
    try:
        curve = trace_manifold(fmap, kind, branch, cfg.arclength, cfg.spacing)
    except NotASaddleError as exc:
        sys.stderr.write(f"henon-basins: {exc}\n")
        return EXIT_NOT_SADDLE
    _emit(curve.to_csv(), cfg.out, out)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out) -> int:
    fmap = cfg.map_family()
    ids = None if cfg.checks == ("all",) else list(cfg.checks)
    if ids is not None:
        unknown = [i for i in ids if i not in V.CATALOG]
        if unknown:
            raise UsageError(f"unknown check id(s): {', '.join(unknown)}")
    samples = cfg.samples or 1000
    if samples < 1:
        raise UsageError("samples must be positive")
    reports = V.run_checks(ids, fmap, samples, cfg.seed)
    _emit(V.reports_to_json(reports), cfg.out, out)
    if cfg.out is not None:
        for r in reports:
            out.write(f"{r.check_id} {r.verdict}\n")
    return EXIT_FAIL if any(r.verdict == V.FAIL for r in reports) else EXIT_OK


def sweep_rows(mus, deltas, samples: int, seed: int) -> list[tuple[float, float, int, int]]:
    """For every ``mu``: the largest ``delta`` of the passing prefix of the sorted grid.

    ``delta_star`` is ``nan`` when even the smallest ``delta`` fails.
    """
    for mu in mus:
        if not 1.0 < mu < 3.0:
            raise UsageError(f"mu must lie in (1, 3), got {mu}")
    grid = sorted(float(d) for d in deltas)
    if any(d <= 0 for d in grid):
        raise UsageError("delta values must be positive")
    rows = []
    if not grid:
        return rows
    for mu in mus:
        prefix = 0
        for d in grid:
            fmap = make_henon(d, mu)
            if all(V.run_check(c, fmap, samples, seed).verdict == V.PASS for c in SWEEP_CHECKS):
                prefix += 1
            else:
                break
        star = grid[prefix - 1] if prefix else math.nan
        rows.append((float(mu), star, prefix, len(grid)))
    return rows


def cmd_sweep(cfg: RunConfig, out) -> int:
    if not cfg.mu:
        raise UsageError("sweep needs --mu")
    samples = cfg.samples or 200
    rows = sweep_rows(cfg.mu, cfg.delta, samples, cfg.seed)
    lines = ["mu,delta_star,prefix_length,n_tested"]
    lines += [f"{_fmt(m)},{_fmt(s)},{p},{n}" for m, s, p, n in rows]
    _emit("\n".join(lines) + "\n", cfg.out, out)
    return EXIT_OK


COMMANDS = {
    "classify": cmd_classify,
    "basin": cmd_basin,
    "manifold": cmd_manifold,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        cfg = load_config(argv)
        return COMMANDS[cfg.command](cfg, out)
    except UsageError as exc:
        sys.stderr.write(f"henon-basins: error: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
