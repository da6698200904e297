#!/usr/bin/env python3
"""Beyond the qubit: a three-level decay cascade 2 -> 1 -> 0.

One coupling operator carries both transitions (rate 1.0 from level 2 to 1,
rate 0.6 from 1 to 0) alongside a diagonal Hamiltonian.  The candidate
V(X) = (X + I)^2 around the scalar equilibrium X_e = -I behaves
differently along different directions of the level set:

  * along the top-level projector P2 the drift is exactly -1.0 y^2 P2,
    so local stability certifies and the estimated rate is the top
    transition rate;
  * along the ground projector P0 the Heisenberg drift is positive (the
    flow "heats" projectors onto decay targets), producing an honest
    counterexample witness;
  * the collision chain reproduces the top-occupation decay e^(-t) found
    by the master oracle, now with a nontrivial Hamiltonian in the step.
"""

import numpy as np

from qstab import (
    CollisionConfig,
    DirectionFamily,
    LevelSetSpec,
    LyapunovCandidate,
    QsdeModel,
    QuantumState,
    canonicalize,
    check_local,
    estimate_max_rate,
    flow_ito_coefficients,
    master_flow_expectation,
    recheck_witness,
    simulate_flow_expectation,
)

RATE_21, RATE_10 = 1.0, 0.6
coupling = np.zeros((3, 3), dtype=complex)
coupling[1, 2] = np.sqrt(RATE_21)
coupling[0, 1] = np.sqrt(RATE_10)
model = QsdeModel(hamiltonian=np.diag([0.3, 0.1, -0.4]).astype(complex), coupling=coupling)

I3 = np.eye(3, dtype=complex)
P2 = np.diag([0.0, 0.0, 1.0]).astype(complex)
P0 = np.diag([1.0, 0.0, 0.0]).astype(complex)
candidate = canonicalize(LyapunovCandidate(terms=((1, 1, I3),), center=-I3))

print("drift along X = -I + y P2 (top level):")
for y in (0.5, 1.0):
    drift = flow_ito_coefficients(model, candidate, -I3 + y * P2).drift
    print(f"  y = {y:3.1f}: diag = {np.round(np.diag(drift).real, 4)}   (= -{RATE_21} y^2 P2)")

spec_top = LevelSetSpec(epsilon=1.0, sample_count=10, seed=3, family=DirectionFamily(directions=(P2,)))
cert = check_local(model, candidate, -I3, spec_top)
est = estimate_max_rate(model, candidate, -I3, spec_top)
print(f"  local certificate: {cert.verdict};  estimated max rate {est.rate:.9f} (top transition rate {RATE_21})")

print()
print("the ground-projector direction is a counterexample:")
spec_gnd = LevelSetSpec(epsilon=1.0, sample_count=6, seed=3, family=DirectionFamily(directions=(P0,)))
cert_gnd = check_local(model, candidate, -I3, spec_gnd)
print(f"  verdict {cert_gnd.verdict}: {cert_gnd.violated_condition}")
print(f"  witness re-violates by {recheck_witness(model, candidate, cert_gnd):.3e}")

print()
print("collision chain vs master oracle for the top occupation (psi0 = |2>):")
psi0 = QuantumState.from_vector(np.array([0.0, 0.0, 1.0]))
v_top = LyapunovCandidate(terms=((1, 0, 0.5 * I3), (0, 1, 0.5 * I3)))
coll = simulate_flow_expectation(model, v_top, P2, psi0, CollisionConfig(dt=1e-2, steps=8))
oracle = master_flow_expectation(model, v_top, P2, psi0, coll.times)
print("       t     collision     oracle       e^(-t)")
for t, c, o in zip(coll.times[::2], coll.v_expect[::2], oracle.v_expect[::2]):
    print(f"  {t:6.2f}  {c:10.6f}  {o:10.6f}  {np.exp(-RATE_21 * t):10.6f}")
print(f"  max |collision - oracle| = {np.max(np.abs(coll.v_expect - oracle.v_expect)):.2e}")
