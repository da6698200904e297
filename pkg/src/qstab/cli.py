"""Command-line surface for batch model validation, drift reports,
certification, simulation and cross-checks.

Exit codes are the machine contract: 0 success / verdict pass, 1 verdict
fail, 2 input error, 3 internal error.  The environment variable
``QSTAB_SEED`` overrides ``--seed`` when set.  Human-readable report text
may evolve; files written via ``--out`` are byte-stable given identical
inputs and seed.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import fileio
from .certify import (
    check_asymptotic,
    check_exponential,
    check_local,
    check_state,
    estimate_max_rate,
)
from .errors import InternalCheckError, QstabError
from .evolve import (
    CollisionConfig,
    finite_difference_drift_check,
    ito_table_check,
    master_flow_expectation,
    simulate_flow_expectation,
)
from .lyapunov import flow_ito_coefficients, state_ito_coefficients
from .models import diagnose
from .operators import QuantumState, hermiticity_defect

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3


class QstabCliInputError(QstabError, ValueError):
    """Bad command-line flag combination."""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qstab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("validate", help="check a model file's invariants")
    p_val.add_argument("model")
    p_val.add_argument("--tol", type=float, default=1e-9)

    p_drift = sub.add_parser("drift", help="print the four Ito coefficients at a point")
    p_drift.add_argument("model")
    p_drift.add_argument("lyapunov")
    p_drift.add_argument("--point", required=True)
    p_drift.add_argument("--picture", choices=["flow", "state"], default="flow")

    p_cert = sub.add_parser("certify", help="run a stability check and write a certificate")
    p_cert.add_argument("model")
    p_cert.add_argument("lyapunov")
    p_cert.add_argument("--center", required=True)
    p_cert.add_argument(
        "--mode",
        required=True,
        choices=["local", "asymptotic", "exponential", "state-local", "state-asymptotic", "state-exponential"],
    )
    p_cert.add_argument("--epsilon", type=float, required=True)
    p_cert.add_argument("--samples", type=int, required=True)
    p_cert.add_argument("--seed", type=int, default=0)
    p_cert.add_argument("--rate", type=float, help="decay rate a for exponential modes")
    p_cert.add_argument("--margin", type=float, help="uniform drift bound b for asymptotic modes")
    p_cert.add_argument("--family", help="direction-family file (default: random Hermitian ball)")
    p_cert.add_argument("--reference", help="reference state file for state-* modes (default: the center)")
    p_cert.add_argument("--tol", type=float, default=1e-9)
    p_cert.add_argument("--out", help="write the certificate JSON here")
    p_cert.add_argument("--estimate-rate", action="store_true", help="also report the max supported rate")

    p_sim = sub.add_parser("simulate", help="trajectory of E[V] by collision model or master oracle")
    p_sim.add_argument("model")
    p_sim.add_argument("lyapunov")
    p_sim.add_argument("--x0", required=True)
    p_sim.add_argument("--psi0", required=True)
    p_sim.add_argument("--dt", type=float, required=True)
    p_sim.add_argument("--steps", type=int, required=True)
    p_sim.add_argument("--method", choices=["collision", "master"], default="collision")
    p_sim.add_argument("--ancilla-levels", type=int, default=1)
    p_sim.add_argument("--dim-guard", type=int, default=8192)
    p_sim.add_argument("--out", help="write the trajectory CSV here (default: stdout)")

    p_cross = sub.add_parser("crosscheck", help="finite-difference drift check and Ito table check")
    p_cross.add_argument("model")
    p_cross.add_argument("lyapunov")
    p_cross.add_argument("--x0", required=True)
    p_cross.add_argument("--psi0", required=True)
    p_cross.add_argument("--dt", type=float, required=True)
    p_cross.add_argument("--ancilla-levels", type=int, default=1)
    return parser


def _seed_override(seed: int) -> int:
    env = os.environ.get("QSTAB_SEED")
    return int(env) if env else seed


def _print_matrix(name: str, m: np.ndarray) -> None:
    print(f"{name}:")
    print(np.array2string(m, precision=6, suppress_small=True))
    eigs = np.linalg.eigvals(m)
    print(f"  eigenvalues: {np.array2string(np.sort_complex(eigs), precision=6)}")


def _cmd_validate(args) -> int:
    model = fileio.load_model(args.model, tol=args.tol)  # raises naming the defect
    report = diagnose(model, tol=args.tol)
    print(f"model ok: dim {model.dim}")
    print(f"  H hermiticity defect: {report.hamiltonian_defect:.3e}")
    print(f"  S unitarity defect:   {report.scattering_defect:.3e}")
    print(f"  ||H|| {report.norm_hamiltonian:.6g}  ||L|| {report.norm_coupling:.6g}  ||S|| {report.norm_scattering:.6g}")
    print(f"  decay-rate scale ||L†L||: {report.decay_scale:.6g}")
    return EXIT_PASS


def _describe_candidate(candidate) -> None:
    degrees = sorted({(n, m) for n, m, _ in candidate.terms})
    print(f"candidate: {len(candidate.terms)} canonical terms, exponents {degrees}")


def _cmd_drift(args) -> int:
    model = fileio.load_model(args.model)
    candidate = fileio.load_lyapunov(args.lyapunov)
    _describe_candidate(candidate)
    point = fileio.load_operator(args.point)
    if args.picture == "flow":
        coeffs = flow_ito_coefficients(model, candidate, point)
    else:
        coeffs = state_ito_coefficients(model, candidate, point)
    print(f"Ito coefficients ({args.picture} picture), drift hermiticity defect "
          f"{hermiticity_defect(coeffs.drift):.3e}")
    _print_matrix("drift", coeffs.drift)
    _print_matrix("coeff_a (annihilation)", coeffs.coeff_a)
    _print_matrix("coeff_adag (creation)", coeffs.coeff_adag)
    _print_matrix("coeff_gauge", coeffs.coeff_gauge)
    return EXIT_PASS


def _cmd_certify(args) -> int:
    model = fileio.load_model(args.model, tol=args.tol)
    candidate = fileio.load_lyapunov(args.lyapunov)
    _describe_candidate(candidate)
    center = fileio.load_operator(args.center)
    seed = _seed_override(args.seed)
    spec = fileio.level_set_spec_from_args(args.epsilon, args.samples, seed, args.family)

    if args.mode == "local":
        cert = check_local(model, candidate, center, spec, tol=args.tol)
    elif args.mode == "asymptotic":
        if args.margin is None or args.margin <= 0:
            raise QstabCliInputError("asymptotic mode needs --margin > 0")
        cert = check_asymptotic(model, candidate, center, spec, args.margin, tol=args.tol)
    elif args.mode == "exponential":
        if args.rate is None or args.rate <= 0:
            raise QstabCliInputError("exponential mode needs --rate > 0")
        cert = check_exponential(model, candidate, center, spec, args.rate, tol=args.tol)
    else:
        reference = QuantumState(fileio.load_operator(args.reference) if args.reference else center)
        state_mode = args.mode.removeprefix("state-")
        if state_mode == "exponential" and (args.rate is None or args.rate <= 0):
            raise QstabCliInputError("state-exponential mode needs --rate > 0")
        cert = check_state(model, candidate, center, reference, spec, state_mode, rate=args.rate, tol=args.tol)

    print(f"mode {cert.mode}: verdict {cert.verdict}")
    print(f"  equilibrium residual: {cert.equilibrium_residual:.3e}")
    if cert.worst_drift_eigenvalue is not None:
        print(f"  worst drift eigenvalue: {cert.worst_drift_eigenvalue:.6g}")
    if cert.worst_v_min_eigenvalue is not None:
        print(f"  worst candidate minimum: {cert.worst_v_min_eigenvalue:.6g}")
    if cert.rate is not None:
        print(f"  rate: {cert.rate:.6g}")
    if cert.margin is not None:
        print(f"  margin: {cert.margin:.6g}")
    if cert.verdict == "fail":
        print(f"  violated condition: {cert.violated_condition} (violation {cert.violation:.3e})")
    if args.estimate_rate and args.mode in ("local", "asymptotic", "exponential"):
        est = estimate_max_rate(model, candidate, center, spec, tol=args.tol)
        flag = " (positive drift off the candidate support)" if est.support_mismatch else ""
        print(f"  max supported rate: {est.rate:.6g}{flag}")
    if args.out:
        fileio.save_certificate(cert, args.out)
        print(f"  certificate written to {args.out}")
    return EXIT_PASS if cert.passed else EXIT_FAIL


def _cmd_simulate(args) -> int:
    model = fileio.load_model(args.model)
    candidate = fileio.load_lyapunov(args.lyapunov)
    x0 = fileio.load_operator(args.x0)
    psi0 = QuantumState.from_vector(fileio.load_state_vector(args.psi0))
    if args.method == "collision":
        config = CollisionConfig(dt=args.dt, steps=args.steps,
                                 ancilla_levels=args.ancilla_levels, dim_guard=args.dim_guard)
        traj = simulate_flow_expectation(model, candidate, x0, psi0, config)
    else:
        t_grid = args.dt * np.arange(args.steps + 1)
        traj = master_flow_expectation(model, candidate, x0, psi0, t_grid)
    payload = fileio.trajectory_csv_bytes(traj)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(payload)
        print(f"trajectory ({traj.method}) written to {args.out}")
    else:
        sys.stdout.write(payload.decode("utf-8"))
    return EXIT_PASS


def _cmd_crosscheck(args) -> int:
    model = fileio.load_model(args.model)
    candidate = fileio.load_lyapunov(args.lyapunov)
    x0 = fileio.load_operator(args.x0)
    psi0 = QuantumState.from_vector(fileio.load_state_vector(args.psi0))
    config = CollisionConfig(dt=args.dt, steps=1, ancilla_levels=args.ancilla_levels)

    fd = finite_difference_drift_check(model, candidate, x0, psi0, config)
    print("finite-difference drift check:")
    print(f"  analytic {fd.analytic:+.9g}  empirical {fd.empirical:+.9g}  gap {fd.gap:.3e}")
    print(f"  at dt/2: empirical {fd.empirical_half:+.9g}  gap {fd.gap_half:.3e}  ratio {fd.ratio:.3f}")
    print(f"  first-order convergence: {'ok' if fd.order_ok else 'FAILED'}")

    table = ito_table_check(ancilla_levels=args.ancilla_levels, dt=args.dt)
    print(f"Ito table check (dt={table.dt:g}, ancilla levels {table.ancilla_levels}):")
    for e in table.entries:
        print(f"  {e.left:>8s} * {e.right:<8s} -> {e.maps_to:<6s} moment {e.moment:+.3e} "
              f"expected {e.expected:+.3e} deviation {e.deviation:.1e}")
    table_ok = table.max_deviation <= 1e-12
    print(f"  max deviation {table.max_deviation:.3e}: {'ok' if table_ok else 'FAILED'}")
    return EXIT_PASS if fd.order_ok and table_ok else EXIT_FAIL


_HANDLERS = {
    "validate": _cmd_validate,
    "drift": _cmd_drift,
    "certify": _cmd_certify,
    "simulate": _cmd_simulate,
    "crosscheck": _cmd_crosscheck,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors, 0 for --help
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except InternalCheckError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (QstabError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def entry_point() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry_point()
