"""Command-line front end.

Subcommands mirror the library surface: `theta`, `kconst`, `rate` print
a single JSON object {inputs..., value}; `lemma-integral` emits CSV;
`solve` writes a solution JSON (optionally with a per-vertex field dump
in the mesh text format); `sweep`, `fit-rate`, `check-3-4`, `check-4-3`
drive the harness.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import asymptotics, harness, neckintegrals
from .geometry import DomainSpec, FlatProfile, PowerProfile, spec_from_json
from .mesh import generate, save_text
from .solver import Problem, solution_to_json, solve


def _emit(inputs: dict, value):
    print(json.dumps({"inputs": inputs, "value": value}))


def _cmd_theta(args):
    if args.kind == "flat":
        value = asymptotics.theta_flat(args.eps, args.p, args.sigma_area)
        inputs = {"kind": "flat", "eps": args.eps, "p": args.p, "sigma_area": args.sigma_area}
    else:
        value = asymptotics.theta_gamma(args.eps, args.p, args.gamma, args.n)
        inputs = {"kind": "gamma", "eps": args.eps, "p": args.p, "gamma": args.gamma, "n": args.n}
    _emit(inputs, value)


def _cmd_kconst(args):
    if args.a0 is None:
        value = asymptotics.k_const(args.n, args.p, args.gamma)
        inputs = {"n": args.n, "p": args.p, "gamma": args.gamma}
    else:
        value = asymptotics.k0_angular(args.a0, args.n, args.p, args.gamma)
        inputs = {"n": args.n, "p": args.p, "gamma": args.gamma, "a0": args.a0}
    _emit(inputs, value)


def _cmd_rate(args):
    rd = asymptotics.blowup_exponent(args.n, args.p, args.gamma, args.regularity)
    _emit(
        {"n": args.n, "p": args.p, "gamma": args.gamma, "regularity": args.regularity},
        {"power": rd.power, "log_power": rd.log_power, "bounded": rd.bounded},
    )


def _profile_from_args(args):
    if args.profile == "flat":
        return FlatProfile(
            sigma_half_width=args.sigma_half_width,
            curvature_coeff=args.curvature_coeff,
            patch_radius=args.patch_radius,
        )
    return PowerProfile(gamma=args.gamma, amp=args.amp, patch_radius=args.patch_radius)


def _cmd_lemma_integral(args):
    profile = _profile_from_args(args)
    eps_list = [float(tok) for tok in args.eps_list.split(",")]
    values = []
    for eps in eps_list:
        if args.profile == "flat":
            v = neckintegrals.neck_integral_flat(profile, eps, args.p, args.r, tol=args.tol)
        else:
            v = neckintegrals.neck_integral_gamma(profile, eps, args.p, args.r, tol=args.tol)
        values.append(v)
    mode = "log" if args.log_mode else "auto"
    extrapolated = neckintegrals.limit_extrapolate(list(zip(eps_list, values)), mode=mode)
    print("eps,value,extrapolated")
    for eps, v in zip(eps_list, values):
        print(f"{eps!r},{v!r},{extrapolated!r}")


def _load_spec(args) -> DomainSpec:
    with open(args.spec) as fh:
        spec = spec_from_json(fh.read())
    if getattr(args, "eps", None) is not None:
        spec = spec.with_epsilon(args.eps)
    return spec


def _cmd_solve(args):
    spec = _load_spec(args)
    mesh = generate(spec, args.h_far, args.neck_fraction)
    problem = Problem(
        mesh=mesh, p=args.p, tol=args.tol, coupling="tied" if args.tied else "free"
    )
    sol = solve(problem)
    payload = solution_to_json(sol)
    with open(args.out, "w") as fh:
        fh.write(payload + "\n")
    if args.field_out:
        save_text(mesh, args.field_out, u=sol.u)
    print(payload)


def _cmd_sweep(args):
    spec = _load_spec(args)
    eps_list = [float(tok) for tok in args.eps_list.split(",")]
    records = harness.sweep(
        spec, args.p, eps_list, h_far=args.h_far, neck_fraction=args.neck_fraction, tol=args.tol
    )
    csv_text = harness.records_to_csv(records)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv_text)
    print(csv_text, end="")


def _cmd_fit_rate(args):
    with open(args.csv) as fh:
        records = harness.records_from_csv(fh.read())
    slope, r2 = harness.fit_rate(records, y=args.y)
    print(json.dumps({"y": args.y, "slope": slope, "r2": r2}))


def _cmd_check_3_4(args):
    spec = _load_spec(args)
    eps_list = [float(tok) for tok in args.eps_list.split(",")]
    report = harness.check_theorem_3_4(
        spec, eps_list, args.p, h_far=args.h_far, neck_fraction=args.neck_fraction, tol=args.tol
    )
    print(json.dumps(report))


def _cmd_check_4_3(args):
    spec = _load_spec(args)
    eps_list = [float(tok) for tok in args.eps_list.split(",")]
    report = harness.check_theorem_4_3(
        spec, eps_list, args.p, h_far=args.h_far, neck_fraction=args.neck_fraction, tol=args.tol
    )
    print(json.dumps(report))


def _add_solver_opts(sp, eps_required=False):
    sp.add_argument("--spec", required=True, help="DomainSpec JSON file")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--eps", type=float, default=None, help="override the spec's epsilon")
    sp.add_argument("--h-far", type=float, default=0.25, dest="h_far")
    sp.add_argument("--neck-fraction", type=float, default=0.25, dest="neck_fraction")
    sp.add_argument("--tol", type=float, default=1e-11)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pneck",
        description="Asymptotics and FEM verification of gradient concentration "
        "between nearly touching perfect conductors",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("theta", help="normalization factor")
    sp.add_argument("--kind", choices=["flat", "gamma"], required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--sigma-area", type=float, default=1.0, dest="sigma_area")
    sp.add_argument("--gamma", type=float, default=0.5)
    sp.add_argument("--n", type=int, default=2)
    sp.set_defaults(func=_cmd_theta)

    sp = sub.add_parser("kconst", help="gamma-function constant K (or K0 for constant a0)")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--a0", type=float, default=None)
    sp.set_defaults(func=_cmd_kconst)

    sp = sub.add_parser("rate", help="blow-up rate descriptor")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--gamma", type=float, default=None)
    sp.add_argument("--regularity", choices=["C2", "C1gamma", "flat"], required=True)
    sp.set_defaults(func=_cmd_rate)

    sp = sub.add_parser("lemma-integral", help="neck integral over an eps schedule (CSV)")
    sp.add_argument("--profile", choices=["flat", "gamma"], required=True)
    sp.add_argument("--sigma-half-width", type=float, default=0.5, dest="sigma_half_width")
    sp.add_argument("--curvature-coeff", type=float, default=1.0, dest="curvature_coeff")
    sp.add_argument("--gamma", type=float, default=0.5)
    sp.add_argument("--amp", type=float, default=1.0)
    sp.add_argument("--patch-radius", type=float, default=1.0, dest="patch_radius")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--r", type=float, default=0.3)
    sp.add_argument("--eps-list", required=True, dest="eps_list")
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--log-mode", action="store_true", dest="log_mode",
                    help="extrapolate in powers of 1/|ln eps| (critical p)")
    sp.set_defaults(func=_cmd_lemma_integral)

    sp = sub.add_parser("solve", help="solve one instance")
    _add_solver_opts(sp)
    sp.add_argument("--tied", action="store_true")
    sp.add_argument("--out", required=True)
    sp.add_argument("--field-out", default=None, dest="field_out",
                    help="write mesh + per-vertex potential in the text format")
    sp.set_defaults(func=_cmd_solve)

    sp = sub.add_parser("sweep", help="eps sweep (CSV)")
    _add_solver_opts(sp)
    sp.add_argument("--eps-list", required=True, dest="eps_list")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=_cmd_sweep)

    sp = sub.add_parser("fit-rate", help="log-log slope of a sweep CSV")
    sp.add_argument("--csv", required=True)
    sp.add_argument("--y", choices=["grad_center", "U_diff_over_theta"], default="grad_center")
    sp.set_defaults(func=_cmd_fit_rate)

    sp = sub.add_parser("check-3-4", help="flat potential-difference limit check")
    _add_solver_opts(sp)
    sp.add_argument("--eps-list", required=True, dest="eps_list")
    sp.set_defaults(func=_cmd_check_3_4)

    sp = sub.add_parser("check-4-3", help="cusp potential-difference limit check")
    _add_solver_opts(sp)
    sp.add_argument("--eps-list", required=True, dest="eps_list")
    sp.set_defaults(func=_cmd_check_4_3)

    args = parser.parse_args(argv)
    try:
        args.func(args)
    except Exception as exc:  # surface errors as exit codes for scripting
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
