#!/usr/bin/env python3
"""The stochastic density operator picture and its expectation-level checks.

The state-picture dynamics evolves rho by conjugation with the same
unitary as the flow (rho_t = U rho U†), so its drift

    -i[H, rho] + L†S rho S†L - (1/2){L†L, rho}

is spectrum-preserving in the mean and is *not* the trace-dual of the
observable flow's drift -- the dual of the flow is the reduced master
equation with the opposite sandwich L rho L†.  This script makes that
concrete on the amplitude-damping qubit:

  1. the true adjoint identity the state drift does satisfy,
  2. the quantitative non-duality witness (order-one gap),
  3. the drift of V(rho) = (rho - I/2)^2 vanishing identically on diagonal
     unit-trace states, so the expectation-level check is marginal: the
     weak (local) condition passes with exactly zero drift and the strict
     (asymptotic/exponential) conditions fail.
"""

import numpy as np

from qstab import (
    DirectionFamily,
    LevelSetSpec,
    LyapunovCandidate,
    QsdeModel,
    QuantumState,
    canonicalize,
    check_state,
    equilibrium_residual,
    flow_generator,
    state_generator,
    state_ito_coefficients,
)

GAMMA = 1.0
sigma_minus = np.array([[0, 0], [1, 0]], dtype=complex)
sigma_z = np.diag([1.0, -1.0]).astype(complex)
N = np.diag([1.0, 0.0]).astype(complex)
G = np.diag([0.0, 1.0]).astype(complex)
I2 = np.eye(2, dtype=complex)

model = QsdeModel(hamiltonian=np.zeros((2, 2)), coupling=np.sqrt(GAMMA) * sigma_minus)

print("1. the state drift satisfies Tr(D(rho) X) = Tr(rho (i[H,X] + S†L X L†S - 1/2{L†L,X})):")
rng = np.random.default_rng(3)
worst = 0.0
for _ in range(50):
    rho = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    l = model.coupling
    ldl = l.conj().T @ l
    adj = l @ x @ l.conj().T - 0.5 * (ldl @ x + x @ ldl)  # H = 0, S = I
    worst = max(worst, abs(np.trace(state_generator(model, rho) @ x) - np.trace(rho @ adj)))
print(f"   worst gap over 50 random pairs: {worst:.2e}")

print()
print("2. but it is NOT trace-dual to the flow drift (sandwich sides differ):")
lhs = np.trace(state_generator(model, G) @ N).real
rhs = np.trace(G @ flow_generator(model, N)).real
print(f"   Tr(D(|g><g|) N) = {lhs:+.3f}   vs   Tr(|g><g| L(N)) = {rhs:+.3f}   gap {abs(lhs - rhs):.3f}")
print("   (the reduced master equation, used as the simulation oracle, is the true dual)")

print()
print("3. V(rho) = (rho - I/2)^2 around the equilibrium rho_e = I/2:")
candidate = canonicalize(LyapunovCandidate(terms=((1, 1, I2),), center=I2 / 2))
print(f"   equilibrium residual at I/2: {equilibrium_residual(model, I2 / 2, picture='state'):.2e}")
print("   drift of V on diagonal unit-trace states (vanishes identically):")
for p in (0.1, 0.5, 0.9):
    rho = np.diag([p, 1.0 - p]).astype(complex)
    drift = state_ito_coefficients(model, candidate, rho).drift
    print(f"     p = {p:3.1f}: ||drift|| = {np.linalg.norm(drift, 2):.2e}")

print()
print("4. expectation-level stability checks with diagonal samples:")
family = DirectionFamily(directions=(sigma_z / 2,))
spec = LevelSetSpec(epsilon=0.5, sample_count=10, seed=5, family=family)
reference = QuantumState.maximally_mixed(2)
for mode, rate in (("local", None), ("asymptotic", None), ("exponential", 0.5)):
    cert = check_state(model, candidate, I2 / 2, reference, spec, mode, rate=rate)
    note = ""
    if mode == "local":
        note = f"  (worst E[drift] = {cert.worst_drift_eigenvalue:+.1e})"
    print(f"   state-{mode:<12s} {cert.verdict}{note}")
print("   marginal as expected: mean conjugation dynamics neither grows nor shrinks V.")
