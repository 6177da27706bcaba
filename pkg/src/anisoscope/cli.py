"""
Command-line front end.

Every command writes CSV to standard output, preceded by a ``# manifest:``
comment holding the full parameter set. Summary statistics follow the table
as trailing ``#`` comments. Errors go to standard error as
``ERROR:<category>:<message>`` with exit code 1 (validation) or 2 (numerical).
"""

from __future__ import annotations

import argparse
import io
import math
import shlex
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from anisoscope import __version__
from anisoscope.errors import AnisoscopeError, ValidationError
from anisoscope.optimize import IcfObjective, gs_isotropy_error, gs_optimize, icf_optimize
from anisoscope.schemes import (
    MultiDimPrefactored,
    MultiDimScheme,
    PrefactoredScheme,
    builtin_catalog,
    format_catalog,
    get_scheme,
)
from anisoscope.spectral import anisotropy_polar, derivative_symbols, wavenumber_curve_csv
from anisoscope.stability import (
    closed_form_sigma_limit,
    empirical_stability_boundary,
    leapfrog_cfl,
    maccormack_sigma_limit,
)


class UsageError(ValidationError):
    category = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _scheme_with_beta(label: str, beta: float):
    scheme = get_scheme(label)
    if beta == 0.0:
        return scheme
    if isinstance(scheme, PrefactoredScheme):
        return MultiDimPrefactored(scheme, beta)
    return MultiDimScheme(scheme, beta)


def manifest(command: str, **params) -> str:
    parts = [f"command={command}", f"version={__version__}"]
    parts += [f"{k}={shlex.quote(str(v))}" for k, v in params.items()]
    return "# manifest: " + " ".join(parts) + "\n"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


# {{{ commands


def cmd_list_schemes(args, out):
    out.write(manifest("list-schemes"))
    out.write(format_catalog(builtin_catalog().values()))


def cmd_wavenumber(args, out):
    if args.samples < 2:
        raise ValidationError("need at least 2 samples")
    scheme = _scheme_with_beta(args.scheme, 0.0)
    z = np.linspace(0.0, args.zmax, args.samples)
    k, _ = derivative_symbols(scheme, z, np.zeros_like(z))
    out.write(manifest("wavenumber", scheme=args.scheme, samples=args.samples, zmax=_fmt(args.zmax)))
    out.write(wavenumber_curve_csv(z, k))


def cmd_polar(args, out):
    scheme = _scheme_with_beta(args.scheme, args.beta)
    pol = anisotropy_polar(scheme, args.ppw, args.angles)
    out.write(manifest("polar", scheme=args.scheme, beta=_fmt(args.beta),
                       ppw=_fmt(args.ppw), angles=args.angles))
    out.write(pol.to_csv())
    out.write(f"# spread={_fmt(pol.spread)}\n# max_deviation={_fmt(pol.max_deviation)}\n")


def cmd_optimize_icf(args, out):
    obj = IcfObjective(get_scheme(args.scheme), args.khmax, args.mode)
    res = icf_optimize(obj)
    out.write(manifest("optimize-icf", scheme=args.scheme, khmax=_fmt(args.khmax), mode=args.mode,
                       panels=obj.panels))
    out.write("beta,objective_at_beta,objective_at_zero\n")
    out.write(f"{_fmt(res.beta)},{_fmt(res.value)},{_fmt(res.value_at_zero)}\n")
    if res.flat:
        out.write("# flat objective: left end of the bracket returned\n")


def cmd_optimize_gs(args, out):
    res = gs_optimize(args.wmax)
    out.write(manifest("optimize-gs", wmax=_fmt(args.wmax)))
    out.write("alpha,error_at_alpha,error_at_one_third\n")
    out.write(f"{_fmt(res.alpha)},{_fmt(res.value)},{_fmt(gs_isotropy_error(1 / 3, args.wmax))}\n")


def _stability_limit(args, angle) -> float:
    base = get_scheme(args.scheme)
    if args.marcher == "leapfrog":
        if isinstance(base, PrefactoredScheme) or base.is_compact:
            raise ValidationError("leap-frog limits need an explicit scheme")
        kind = "multidimensional" if args.beta > 0.0 else "conventional"
        return closed_form_sigma_limit(leapfrog_cfl(base), angle, args.beta, kind)
    if args.marcher == "maccormack":
        return maccormack_sigma_limit(angle, args.beta, args.xi_max)
    return math.nan


def cmd_stability(args, out):
    from anisoscope.solver import SimulationConfig

    angle = math.radians(args.direction)
    limit = _stability_limit(args, angle)
    scheme = _scheme_with_beta(args.scheme, args.beta)
    if isinstance(scheme, MultiDimPrefactored):
        raise ValidationError("the solver does not run multidimensional prefactored schemes")
    lo = args.sigma_min if args.sigma_min is not None else (0.8 * limit if math.isfinite(limit) else 0.05)
    hi = args.sigma_max if args.sigma_max is not None else (1.2 * limit if math.isfinite(limit) else 3.0)
    grid = np.linspace(lo, hi, args.grid_points)
    config = SimulationConfig(scheme, args.marcher, n=args.n, angle=angle, steps=args.steps,
                              seed=args.seed)
    boundary = empirical_stability_boundary(config, grid)
    out.write(manifest("stability", scheme=args.scheme, marcher=args.marcher, beta=_fmt(args.beta),
                       direction=_fmt(args.direction), xi_max=_fmt(args.xi_max), n=args.n,
                       steps=args.steps, sigma_min=_fmt(lo), sigma_max=_fmt(hi),
                       grid_points=args.grid_points, seed=args.seed))
    out.write("closed_form_limit,empirical_boundary,margin\n")
    out.write(f"{_fmt(limit)},{_fmt(boundary)},{_fmt(boundary - limit)}\n")


SIMULATE_KEYS = {
    "scheme": str, "beta": float, "marcher": str, "n": int, "h": float, "k": float,
    "c": float, "angle_deg": float, "steps": int, "initial": str, "ppw": float,
    "width": float, "seed": int, "record_stride": int,
}


def parse_config(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (p.strip() for p in line.partition("="))
        if not sep or key not in SIMULATE_KEYS:
            raise ValidationError(f"config line {lineno}: unknown or malformed entry {raw!r}")
        try:
            cfg[key] = SIMULATE_KEYS[key](value)
        except ValueError:
            raise ValidationError(f"config line {lineno}: bad value for {key}: {value!r}") from None
    return cfg


def cmd_simulate(args, out):
    from anisoscope.solver import (
        GaussianPulse,
        PlaneWave,
        SimulationConfig,
        mode_phase_speed,
        run_advection2d,
    )
    from anisoscope.spectral import advection_phase_group

    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read config: {exc}") from None
    cfg = parse_config(text)
    if "scheme" not in cfg:
        raise ValidationError("config needs a scheme")
    scheme = _scheme_with_beta(cfg["scheme"], cfg.get("beta", 0.0))
    angle = math.radians(cfg.get("angle_deg", 0.0))
    config = SimulationConfig(
        scheme, cfg.get("marcher", "rk4"), n=cfg.get("n", 64), h=cfg.get("h", 1.0),
        k=cfg.get("k", 0.1), c=cfg.get("c", 1.0), angle=angle, steps=cfg.get("steps", 100),
        record_stride=cfg.get("record_stride", 0), seed=cfg.get("seed", 0))
    kind = cfg.get("initial", "plane")
    if kind == "plane":
        wave = PlaneWave(2.0 * math.pi / cfg.get("ppw", 8.0), angle)
        mx, my, kh, used = wave.snapped(config.n)
        config = config.replace(angle=used)
        initial = PlaneWave(kh, used)
    elif kind == "gaussian":
        initial = GaussianPulse(cfg.get("width", 4.0))
    elif kind == "random":
        initial = None
    else:
        raise ValidationError(f"initial must be plane, gaussian or random, got {kind!r}")

    hist = run_advection2d(config, initial)
    out.write(manifest("simulate", config=args.config,
                       **{k: v for k, v in sorted(cfg.items())}))
    out.write("time,l2_norm,max_abs\n")
    for t, u in zip(hist.times, hist.snapshots):
        out.write(f"{_fmt(t)},{_fmt(np.sqrt(np.sum(u * u)))},{_fmt(np.max(np.abs(u)))}\n")
    if kind == "plane":
        emp, kh, mode = mode_phase_speed(config, initial)
        pred, _ = advection_phase_group(scheme, kh, config.angle)
        out.write(f"# mode=({mode[0]},{mode[1]}) kh={_fmt(kh)} angle_used={_fmt(config.angle)}\n")
        out.write(f"# phase_speed_empirical={_fmt(emp)}\n# phase_speed_predicted={_fmt(pred)}\n")
    if args.dump:
        dump_field(Path(args.dump), hist.final, hist.times[-1])
        out.write(f"# dump={args.dump}\n")


def dump_field(path: Path, u: np.ndarray, time: float) -> None:
    """Row-major little-endian float64 with a ``.hdr`` text sidecar."""
    path.write_bytes(np.ascontiguousarray(u, dtype="<f8").tobytes(order="C"))
    header = (f"rows={u.shape[0]}\ncols={u.shape[1]}\ndtype=float64\nendian=little\n"
              f"order=row-major\naxis0=x\ntime={_fmt(time)}\n")
    path.with_name(path.name + ".hdr").write_text(header)


def load_field(path: Path) -> np.ndarray:
    meta = dict(line.split("=", 1) for line in
                path.with_name(path.name + ".hdr").read_text().splitlines() if "=" in line)
    data = np.frombuffer(path.read_bytes(), dtype="<f8")
    return data.reshape(int(meta["rows"]), int(meta["cols"]))


def cmd_verify(args, out):
    from anisoscope.verification import run_checks

    out.write(manifest("verify"))
    checks = run_checks()
    for c in checks:
        out.write(f"# {c.line()}\n")
    failed = [c.name for c in checks if not c.passed]
    if failed:
        raise VerifyFailure(f"{len(failed)} check(s) failed: {', '.join(failed)}")


class VerifyFailure(AnisoscopeError):
    category = "verify"


# }}}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="anisoscope", description=__doc__.strip().splitlines()[0])
    p.add_argument("--version", action="version", version=f"anisoscope {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("list-schemes", help="print the scheme catalog")
    s.set_defaults(func=cmd_list_schemes)

    s = sub.add_parser("wavenumber", help="modified wavenumber curve")
    s.add_argument("--scheme", required=True)
    s.add_argument("--samples", type=int, default=64)
    s.add_argument("--zmax", type=float, default=math.pi)
    s.set_defaults(func=cmd_wavenumber)

    s = sub.add_parser("polar", help="phase and group velocity over angle")
    s.add_argument("--scheme", required=True)
    s.add_argument("--ppw", type=float, required=True)
    s.add_argument("--angles", type=int, default=72)
    s.add_argument("--beta", type=float, default=0.0)
    s.set_defaults(func=cmd_polar)

    s = sub.add_parser("optimize-icf", help="optimal isotropy corrector factor")
    s.add_argument("--scheme", required=True)
    s.add_argument("--khmax", type=float, default=math.pi / 2)
    s.add_argument("--mode", choices=("phase", "group"), default="phase")
    s.set_defaults(func=cmd_optimize_icf)

    s = sub.add_parser("optimize-gs", help="optimal compact finite-volume weight")
    s.add_argument("--wmax", type=float, required=True)
    s.set_defaults(func=cmd_optimize_gs)

    s = sub.add_parser("stability", help="closed-form and empirical Courant limits")
    s.add_argument("--scheme", required=True)
    s.add_argument("--marcher", choices=("leapfrog", "rk4", "maccormack"), default="leapfrog")
    s.add_argument("--beta", type=float, default=0.0)
    s.add_argument("--direction", type=float, default=0.0, help="degrees")
    s.add_argument("--xi-max", type=float, default=math.pi)
    s.add_argument("--n", type=int, default=32)
    s.add_argument("--steps", type=int, default=500)
    s.add_argument("--sigma-min", type=float)
    s.add_argument("--sigma-max", type=float)
    s.add_argument("--grid-points", type=int, default=41)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_stability)

    s = sub.add_parser("simulate", help="run the 2D advection solver from a config file")
    s.add_argument("--config", required=True)
    s.add_argument("--dump", help="write the final field as raw little-endian float64")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("verify", help="run the invariant suite")
    s.set_defaults(func=cmd_verify)
    return p


def dispatch(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    buf = io.StringIO()
    try:
        args = build_parser().parse_args(argv)
        args.func(args, buf)
    except AnisoscopeError as exc:
        stdout.write(buf.getvalue())
        stderr.write(f"ERROR:{exc.category}:{exc}\n")
        return exc.exit_code
    stdout.write(buf.getvalue())
    return 0


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
