"""Command-line entry point: every computation as a subcommand with
reproducible configuration and structured output.

Subcommands: tabulate, profile, spectrum, coercivity, blowup, dichotomy,
simulate, report. Outputs are CSV (header row, comma separators, '.'
decimal, scientific notation with 17 significant digits) or JSON for scalar
bundles; files are written atomically (temp file + rename), so identical
configuration yields byte-identical artifacts. Exit status: 0 success,
1 numerical failure, 2 validation error. The environment variable
CRITWAVE_THREADS caps the worker count of fan-out commands.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import blowup_law, coercivity, groundstate as gs, profile, report, spectral, wave_sim
from .errors import CritwaveError, ValidationError
from .numerics import RadialGrid

_FMT = "%.16e"


def _atomic_write(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".critwave-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header: list[str], columns: list[np.ndarray]) -> str:
    lines = [",".join(header)]
    rows = np.column_stack(columns)
    for row in rows:
        lines.append(",".join(_FMT % v for v in row))
    return "\n".join(lines) + "\n"


def _json_text(obj) -> str:
    def default(o):
        if isinstance(o, (np.floating, np.integer)):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (tuple, set)):
            return list(o)
        return str(o)

    return json.dumps(obj, indent=2, sort_keys=True, default=default) + "\n"


def _require(cond: bool, msg: str):
    if not cond:
        raise ValidationError(msg)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_tabulate(args) -> int:
    _require(args.rmax > 1.0, "--rmax must exceed 1")
    _require(args.n >= 16, "--n must be at least 16")
    grid = RadialGrid.geometric(args.rmin, args.rmax, args.n)
    gamma = gs.compute_gamma(grid)
    y = grid.nodes
    text = _csv_text(
        ["y", "Q", "LambdaQ", "Phi", "V", "W", "Gamma"],
        [y, gs.q(y), gs.lambda_q(y), gs.phi(y), gs.v_pot(y), gs.w_pot(y),
         gamma.values])
    _atomic_write(args.out, text)
    print(f"wrote {args.out} ({args.n} rows)")
    return 0


def cmd_profile(args) -> int:
    _require(0.0 < args.b <= 0.2, "--b must lie in (0, 0.2]")
    _require(args.M >= 2.0, "--M must be >= 2")
    factory = profile.ProfileFactory(profile.default_grid_for(args.b, n=args.n),
                                     M=args.M)
    bundle = factory.build(args.b)
    y = bundle.grid
    env_t1 = np.array([profile.t1_envelope(v, args.b, args.M) for v in y])
    env_res = np.array([profile.residual_envelope(v, args.b, args.M) for v in y])
    text = _csv_text(
        ["y", "T1", "PB1", "PsiB1", "dbPB1", "t1_envelope", "residual_envelope"],
        [y, bundle.T1.values, bundle.P, bundle.Psi, bundle.dbP, env_t1, env_res])
    _atomic_write(args.out, text)
    header = {
        "b": bundle.b, "M": bundle.M, "B0": bundle.B0, "B1": bundle.B1,
        "cb": bundle.cb, "c": bundle.c,
        "cb_denominator": bundle.cb_denominator,
        "orthogonality_residual": bundle.orthogonality_residual,
        "fitted_t1_envelope_constant": float(np.max(
            np.abs(bundle.T1.values[1:]) / np.maximum(env_t1[1:], 1e-300))),
        "fitted_residual_envelope_constant": float(np.max(np.abs(
            bundle.Psi - bundle.cb * args.b ** 2
            * profile.Cutoff(bundle.B0 / 4.0)(y) * gs.lambda_q(y))[1:]
            / np.maximum(env_res[1:], 1e-300))),
    }
    _atomic_write(args.out + ".json", _json_text(header))
    print(f"wrote {args.out} and {args.out}.json (b={args.b}, cb={bundle.cb:.6g})")
    return 0


def cmd_spectrum(args) -> int:
    eig = spectral.solve_eigenpair()
    r = eig.psi.grid
    sq = math.sqrt(eig.zeta)
    text = _csv_text(["r", "psi", "psi_exp_compensated"],
                     [r, eig.psi.values, eig.psi.values * np.exp(sq * r)])
    _atomic_write(args.out, text)
    _atomic_write(args.out + ".json", _json_text({
        "zeta": eig.zeta,
        "normalization": eig.normalization,
        "trust_radius": eig.trust_radius,
        "norm_sq": eig.norm_sq,
        "residual_max": eig.residual_max,
        "residual_l2": eig.residual_l2,
        "resonance_overlap": eig.resonance_overlap,
        "decay_flatness": eig.decay_flatness,
        "decay_flatness_raw": eig.decay_flatness_raw,
    }))
    print(f"wrote {args.out}; zeta = {eig.zeta:.10f}")
    return 0


def cmd_coercivity(args) -> int:
    eig = spectral.solve_eigenpair()
    binv_psi = coercivity.invert_B(eig.psi, "inverse_square")
    binv_phi = coercivity.invert_B(gs.phi, "log_inverse_square")
    gram = coercivity.gram_matrix(eig, binv_psi, binv_phi)
    direct = coercivity.count_index_direct(potential="full")
    comparison = coercivity.count_index_direct(potential="comparison")
    bessel = coercivity.count_index_bessel()
    hardy = coercivity.hardy_spot_check()
    payload = {
        "index": {
            "direct_zero_count": direct.zero_count,
            "direct_zero_locations": direct.zero_locations,
            "direct_u_infinity": direct.u_infinity,
            "comparison_zero_count": comparison.zero_count,
            "comparison_u_infinity": comparison.u_infinity,
            "bessel_zero_count": bessel.zero_count,
            "bessel_C1": bessel.bessel_C1,
            "bessel_C2": bessel.bessel_C2,
            "origin_coefficient": bessel.origin_coefficient,
            "origin_coefficient_drift": bessel.origin_coefficient_drift,
        },
        "gram": gram.as_dict(),
        "hardy": hardy,
        "zeta": eig.zeta,
    }
    _atomic_write(args.out, _json_text(payload))
    if args.csv_dir:
        os.makedirs(args.csv_dir, exist_ok=True)
        for name, rf, diagname in (
                ("binv_psi", binv_psi, "r2_value"),
                ("binv_phi", binv_phi, "r2_value_over_logr")):
            r = rf.grid
            diag = r ** 2 * rf.values
            if name == "binv_phi":
                diag = diag / np.where(r > 1.0, np.log(np.maximum(r, 1.0 + 1e-9)), 1.0)
            text = _csv_text(["r", "value", diagname], [r, rf.values, diag])
            _atomic_write(os.path.join(args.csv_dir, name + ".csv"), text)
    print(f"wrote {args.out}; det = {gram.det:.4f}, "
          f"ratio = {gram.invariant_ratio:.4f}")
    return 0


def cmd_blowup(args) -> int:
    _require(1e-6 < args.b0 <= 0.05, "--b0 must lie in (1e-6, 0.05]")
    _require(args.mode in ("b", "j"), "--mode must be 'b' or 'j'")
    tr = blowup_law.integrate_reduced_system(args.b0, mode=args.mode,
                                             s_max=args.smax)
    text = _csv_text(["s", "t", "b", "lambda"],
                     [tr.s, tr.t, tr.b, tr.lam])
    _atomic_write(args.out, text)
    _atomic_write(args.out + ".json", _json_text({
        "mode": tr.mode, "status": tr.status, "T_estimate": tr.T_estimate,
        "fits": tr.fits}))
    print(f"wrote {args.out}; status={tr.status} fits={tr.fits}")
    return 0


def cmd_dichotomy(args) -> int:
    _require(1e-6 < args.b0 <= 0.05, "--b0 must lie in (1e-6, 0.05]")
    res = blowup_law.dichotomy_demo(args.b0, s_max=args.smax)
    print(f"critical unstable amplitude a+* = {res.a_plus_crit:.12e}")
    print(f"bracket width = {res.bracket_width:.3e} "
          f"(target scale b0^2/|log b0| = {args.b0 ** 2 / abs(math.log(args.b0)):.3e})")
    print(f"kappa_minus envelope constant K = {res.kappa_minus_envelope_K:.3f}")
    print("exit ledger (kind, a+, exit sign, exit s):")
    for row in res.exit_ledger[:12]:
        print(f"  {row[0]:9s} {row[1]:+.9e} {row[2]:+d} {row[3]:8.3f}")
    if len(res.exit_ledger) > 12:
        print(f"  ... {len(res.exit_ledger) - 12} more bisection rows")
    return 0


def _parse_config_file(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValidationError(f"config line without '=': {line!r}")
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def cmd_simulate(args) -> int:
    cfg_file = _parse_config_file(args.config) if args.config else {}

    def pick(name, cast, default):
        if getattr(args, name, None) is not None:
            return cast(getattr(args, name))
        if name in cfg_file:
            return cast(cfg_file[name])
        return default

    b0 = pick("b0", float, 0.02)
    _require(1e-3 <= b0 <= 5e-2, "--b0 must lie in [1e-3, 5e-2]")
    cfg = wave_sim.WaveConfig(
        b0=b0,
        grid_points=pick("grid_points", int, 8000),
        cfl=pick("cfl", float, 0.5),
        M=pick("M", float, profile.DEFAULT_M),
        cadence=pick("cadence", int, 10),
        extraction_points=pick("extraction_points", int, 5000),
    )
    extractor = wave_sim.ModulationExtractor(b0, M=cfg.M, r_max=cfg.r_max,
                                             n=cfg.extraction_points)
    if args.dplus == "auto":
        dcrit, _, _, _ = wave_sim.run_and_bisect(b0=b0, config=cfg)
        print(f"bisected critical amplitude d+* = {dcrit:.12e}")
    else:
        dcrit = float(args.dplus)
    cfg = wave_sim.WaveConfig(**{**cfg.__dict__, "dplus": dcrit})
    tr = wave_sim.simulate(cfg, extractor=extractor)
    text = _csv_text(
        ["t", "s", "lambda", "b", "b_s", "kappa_plus", "kappa_minus",
         "calE", "energy"],
        [tr.t, tr.s, tr.lam, tr.b, tr.b_s, tr.kappa_plus, tr.kappa_minus,
         tr.cal_e, tr.energy])
    _atomic_write(args.out, text)
    print(f"wrote {args.out}; status={tr.status} exit_s={tr.exit_s:.3f}")
    return 0


def cmd_report(args) -> int:
    ledger = report.run_report(quick=args.quick)
    for line in ledger.lines():
        print(line)
    if args.out:
        payload = [{"name": e.name, "anchor": e.anchor, "value": e.value,
                    "target": e.target, "tolerance": e.tolerance,
                    "passed": e.passed, "seconds": e.seconds,
                    "detail": e.detail} for e in ledger.entries]
        _atomic_write(args.out, _json_text(
            {"entries": payload, "overall_pass": ledger.passed}))
        print(f"wrote {args.out}")
    print(f"overall: {'PASS' if ledger.passed else 'FAIL'}")
    return 0 if ledger.passed else 1


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="critwave", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("tabulate", help="ground-state family and Gamma as CSV")
    t.add_argument("--rmin", type=float, default=1e-3)
    t.add_argument("--rmax", type=float, default=50.0)
    t.add_argument("--n", type=int, default=4000)
    t.add_argument("--out", default="family.csv")
    t.set_defaults(fn=cmd_tabulate)

    pr = sub.add_parser("profile", help="localized profile at one scale b")
    pr.add_argument("--b", type=float, required=True)
    pr.add_argument("--M", type=float, default=profile.DEFAULT_M)
    pr.add_argument("--n", type=int, default=6000)
    pr.add_argument("--out", default="profile.csv")
    pr.set_defaults(fn=cmd_profile)

    spc = sub.add_parser("spectrum", help="bound state of the linearized operator")
    spc.add_argument("--out", default="spectrum.csv")
    spc.set_defaults(fn=cmd_spectrum)

    co = sub.add_parser("coercivity", help="index, inversions, Gram matrix, Hardy checks")
    co.add_argument("--out", default="coercivity.json")
    co.add_argument("--csv-dir", default=None,
                    help="also dump inversion tabulations as CSV here")
    co.set_defaults(fn=cmd_coercivity)

    bl = sub.add_parser("blowup", help="reduced scale dynamics")
    bl.add_argument("--b0", type=float, default=0.01)
    bl.add_argument("--mode", choices=("b", "j"), default="b")
    bl.add_argument("--smax", type=float, default=1e6)
    bl.add_argument("--out", default="blowup.csv")
    bl.set_defaults(fn=cmd_blowup)

    di = sub.add_parser("dichotomy", help="critical-amplitude bisection (toy system)")
    di.add_argument("--b0", type=float, default=0.01)
    di.add_argument("--smax", type=float, default=40.0)
    di.set_defaults(fn=cmd_dichotomy)

    si = sub.add_parser("simulate", help="radial wave solver with modulation trace")
    si.add_argument("--b0", type=float, default=None)
    si.add_argument("--dplus", default="0.0",
                    help="unstable-mode amplitude, or 'auto' to bisect")
    si.add_argument("--config", default=None, help="key=value configuration file")
    si.add_argument("--grid-points", dest="grid_points", type=int, default=None)
    si.add_argument("--cfl", type=float, default=None)
    si.add_argument("--M", type=float, default=None)
    si.add_argument("--cadence", type=int, default=None)
    si.add_argument("--out", default="trace.csv")
    si.set_defaults(fn=cmd_simulate)

    rp = sub.add_parser("report", help="full verification ledger")
    rp.add_argument("--out", default=None)
    rp.add_argument("--quick", action="store_true",
                    help="smaller grids for the two long-running checks")
    rp.set_defaults(fn=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ValidationError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    except CritwaveError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
