"""Desk-scale dynamics: collision discretization and a master-equation oracle.

The continuous evolution driven by vacuum noise is discretized by repeated
interactions: at every step the system meets a fresh truncated-mode ancilla
prepared in vacuum and they evolve jointly by

    U_step = exp( (-i H dt) (x) I  +  sqrt(dt) ( L (x) a†  -  L† (x) a ) ),

which is exactly unitary by construction (the exponent is anti-Hermitian),
so the algebraic identities of a genuine unitary flow -- products of flowed
operators equal flowed products -- hold exactly at every step, and the
discretization errs only at O(dt) in expectations.  Contracting one step
against the ancilla vacuum reproduces the continuous drift: <0|U_step|0> =
I - iH dt - (1/2) L†L dt + O(dt^2), the damping term arising at second
order from the coupling.  Nontrivial scattering would need a different step
construction and is rejected rather than approximated.

The chain state grows by one ancilla per step and observables are only ever
applied as matrix-vector products, so the memory/work ceiling is set by
``dim_guard``.  An independent oracle integrates the reduced master
equation

    d rho / dt = -i[H, rho] + L rho L† - (1/2){L†L, rho}

exactly via the superoperator matrix exponential; it shares no error source
with the collision model.  Helper checks compare the two routes, reproduce
the quantum Ito multiplication table on a vacuum ancilla, and test
expectation trajectories against decay envelopes and transit-time bounds.

The stopped-process quantities of the theory use a genuine operator-valued
stop time; everything here works at the expectation level, so exit times
reported from trajectories are a classical surrogate and are labeled as
such.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    ChainDimensionError,
    InternalCheckError,
    InvalidCandidateError,
    UnsupportedScatteringError,
)
from .fock import ladder_operators, vacuum_vector
from .lyapunov import LyapunovCandidate, canonicalize, evaluate, flow_ito_coefficients
from .models import QsdeModel, validate
from .operators import (
    DEFAULT_TOL,
    QuantumState,
    adjoint,
    expectation,
    spectral_norm,
)

DIM_GUARD = 8192


@dataclass(frozen=True)
class CollisionConfig:
    """Step size, horizon and ancilla truncation for a collision run."""

    dt: float
    steps: int
    ancilla_levels: int = 1
    dim_guard: int = DIM_GUARD

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if self.ancilla_levels < 1:
            raise ValueError("ancilla_levels must be at least 1")

    @property
    def horizon(self) -> float:
        return self.dt * self.steps

    def check_chain(self, dim_system: int) -> None:
        total = dim_system * (self.ancilla_levels + 1) ** self.steps
        if total > self.dim_guard:
            raise ChainDimensionError(
                f"collision chain dimension {total} exceeds dim_guard {self.dim_guard}"
            )


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time grid with E[V] and optional observable expectations."""

    times: np.ndarray
    v_expect: np.ndarray
    method: str
    obs_expect: dict | None = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        v = np.asarray(self.v_expect, dtype=float)
        if times.shape != v.shape or times.ndim != 1:
            raise ValueError("times and v_expect must be 1-d arrays of equal length")
        if times[0] != 0.0 or np.any(np.diff(times) <= 0):
            raise ValueError("times must increase strictly from 0")
        if self.obs_expect is not None:
            for name, seq in self.obs_expect.items():
                if np.asarray(seq).shape != times.shape:
                    raise ValueError(f"observable {name!r} length differs from the time grid")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "v_expect", v)


def collision_step_unitary(model: QsdeModel, dt: float, ancilla_levels: int = 1, tol: float = DEFAULT_TOL) -> np.ndarray:
    """One system (x) ancilla collision unitary exp(-iH dt + sqrt(dt) coupling).

    Requires trivial scattering (||S - I|| <= tol); the result is verified
    unitary to 1e-12.
    """
    validate(model, tol=tol)
    if spectral_norm(model.scattering - np.eye(model.dim)) > tol:
        raise UnsupportedScatteringError(
            "the collision simulator supports S = I only; nontrivial scattering is not discretized"
        )
    if dt <= 0:
        raise ValueError("dt must be positive")
    a, a_dag, _ = ladder_operators(ancilla_levels)
    anc_eye = np.eye(ancilla_levels + 1)
    exponent = (
        np.kron(-1j * model.hamiltonian * dt, anc_eye)
        + np.sqrt(dt) * (np.kron(model.coupling, a_dag) - np.kron(adjoint(model.coupling), a))
    )
    u = scipy.linalg.expm(exponent)
    defect = spectral_norm(adjoint(u) @ u - np.eye(u.shape[0]))
    if defect > 1e-12:
        raise InternalCheckError(f"collision step is not unitary: defect {defect:.3e}")
    return u


class _CollisionChain:
    """Grows a system (x) ancilla-chain state one vacuum ancilla per step.

    Vectors are stored flat; the step unitary acts on the (system, newest
    ancilla) index pair, and inverse sweeps apply the step adjoint on every
    ancilla slot in reverse order.  Only matrix-vector work is performed.
    """

    def __init__(self, model: QsdeModel, config: CollisionConfig, psi0: np.ndarray):
        config.check_chain(model.dim)
        self.dim_s = model.dim
        self.dim_a = config.ancilla_levels + 1
        self.u_step = collision_step_unitary(model, config.dt, config.ancilla_levels)
        self.u4 = self.u_step.reshape(self.dim_s, self.dim_a, self.dim_s, self.dim_a)
        self.u4_dag = adjoint(self.u_step).reshape(self.dim_s, self.dim_a, self.dim_s, self.dim_a)
        self.vacuum = vacuum_vector(config.ancilla_levels)
        self.k = 0
        self.psi = np.asarray(psi0, dtype=complex).copy()

    def _apply_on_slot(self, u4: np.ndarray, psi: np.ndarray, slot: int, n_slots: int) -> np.ndarray:
        pre = self.dim_a ** (slot - 1)
        post = self.dim_a ** (n_slots - slot)
        work = psi.reshape(self.dim_s, pre, self.dim_a, post)
        return np.einsum("SAsa,spaq->SpAq", u4, work).reshape(-1)

    def step_vector(self, psi: np.ndarray) -> np.ndarray:
        """Append a vacuum ancilla (slot k+1) and collide it with the system."""
        grown = np.kron(psi, self.vacuum)
        return self._apply_on_slot(self.u4, grown, self.k + 1, self.k + 1)

    def advance(self, tracked: dict | None = None) -> None:
        """Step the chain state and any auxiliary vectors evolving with it."""
        if tracked is not None:
            for key, vec in tracked.items():
                tracked[key] = self.step_vector(vec)
        self.psi = self.step_vector(self.psi)
        self.k += 1

    def conjugate_back(self, psi: np.ndarray) -> np.ndarray:
        """Apply the adjoint of the full step product (U_k ... U_1)†."""
        for slot in range(self.k, 0, -1):
            psi = self._apply_on_slot(self.u4_dag, psi, slot, self.k)
        return psi

    def conjugate_forward(self, psi: np.ndarray) -> np.ndarray:
        """Apply the full step product U_k ... U_1 to a chain vector."""
        for slot in range(1, self.k + 1):
            psi = self._apply_on_slot(self.u4, psi, slot, self.k)
        return psi

    def apply_system(self, op: np.ndarray, psi: np.ndarray) -> np.ndarray:
        return (op @ psi.reshape(self.dim_s, -1)).reshape(-1)


def simulate_flow_expectation(
    model: QsdeModel,
    candidate: LyapunovCandidate,
    x0: np.ndarray,
    system_state: QuantumState,
    config: CollisionConfig,
    observables: dict | None = None,
) -> Trajectory:
    """Collision-model trajectory of E[V(X_t)] from a pure system state.

    At step k the expectation sums <Psi| f(X^n) Theta f(X^m) |Psi> over the
    candidate's terms, with f the conjugation by the ordered product of k
    collision unitaries and Psi the initial system vector tensored with k
    vacuum ancillas.  All operator applications are matrix-vector products;
    nothing of size (chain x chain) is ever formed.  The k = 0 value is
    exactly the expectation of V(x0) in the initial state.

    One-sided terms (n = 0 or m = 0) pair the chain state against an
    auxiliary vector U_t (T (x) I) Psi0 evolved alongside it, so they cost
    one inner product per step; two-sided sandwiches conjugate Theta back
    and forth through the step product at each recorded time.

    ``observables`` maps names to system operators whose flowed
    expectations are recorded alongside E[V].
    """
    cand = candidate if candidate.is_canonical else canonicalize(candidate)
    x0 = np.asarray(x0, dtype=complex)
    if x0.shape[0] != model.dim or cand.dim != model.dim:
        raise ValueError("x0, candidate and model must share the system dimension")
    psi0 = system_state.pure_vector()

    max_pow = max(max(n, m) for n, m, _ in cand.terms)
    x_powers = [np.eye(model.dim, dtype=complex)]
    for _ in range(max_pow):
        x_powers.append(x_powers[-1] @ x0)

    chain = _CollisionChain(model, config, psi0)
    observables = dict(observables or {})
    eye = np.eye(model.dim, dtype=complex)

    constants: dict[int, float] = {}
    tracked: dict[int, np.ndarray] = {}  # term index -> U_t (T (x) I) Psi0
    identity_tracked: set[int] = set()  # terms whose auxiliary vector is Psi_t itself
    sandwich: list[int] = []
    for idx, (n, m, theta) in enumerate(cand.terms):
        if n == 0 and m == 0:
            constants[idx] = complex(np.vdot(psi0, theta @ psi0)).real
        elif n == 0 or m == 0:
            t_init = theta if m == 0 else adjoint(theta)
            if spectral_norm(t_init - eye) == 0.0:
                identity_tracked.add(idx)
            else:
                tracked[idx] = t_init @ psi0
        else:
            sandwich.append(idx)

    times = [0.0]
    v_vals = []
    obs_vals = {name: [] for name in observables}

    def record():
        psi_t = chain.psi
        total = 0.0 + 0.0j
        for idx, (n, m, theta) in enumerate(cand.terms):
            if idx in constants:
                total += constants[idx]
            elif idx in sandwich:
                # <psi0| f(X^n) Theta f(X^m) |psi0> via back-and-forth conjugation.
                right = chain.apply_system(x_powers[m], psi_t)
                right = chain.conjugate_back(right)
                right = chain.apply_system(theta, right)
                right = chain.conjugate_forward(right)
                left = chain.apply_system(adjoint(x_powers[n]), psi_t)
                total += complex(np.vdot(left, right))
            else:
                aux = psi_t if idx in identity_tracked else tracked[idx]
                if m == 0:
                    total += complex(np.vdot(chain.apply_system(adjoint(x_powers[n]), psi_t), aux))
                else:
                    total += complex(np.vdot(aux, chain.apply_system(x_powers[m], psi_t)))
        v_vals.append(total.real)
        for name, op in observables.items():
            obs_vals[name].append(np.vdot(psi_t, chain.apply_system(op, psi_t)).real)

    record()
    for k in range(1, config.steps + 1):
        chain.advance(tracked)
        times.append(k * config.dt)
        record()

    return Trajectory(
        times=np.array(times),
        v_expect=np.array(v_vals),
        method="collision",
        obs_expect={k: np.array(v) for k, v in obs_vals.items()} or None,
    )


def liouvillian_matrix(model: QsdeModel) -> np.ndarray:
    """Dense superoperator of the reduced master equation (row-major vec).

    Generates  d rho/dt = -i[H, rho] + L rho L† - (1/2){L†L, rho},  the
    trace-dual of the observable-flow drift; this is the oracle dynamics,
    deliberately distinct from the state-picture drift of
    :func:`qstab.models.state_generator`.
    """
    h, l = model.hamiltonian, model.coupling
    eye = np.eye(model.dim)
    ldl = adjoint(l) @ l

    def left(a):
        return np.kron(a, eye)

    def right(a):
        return np.kron(eye, a.T)

    return (
        -1j * (left(h) - right(h))
        + left(l) @ right(adjoint(l))
        - 0.5 * (left(ldl) + right(ldl))
    )


def master_evolve(model: QsdeModel, rho0: QuantumState, t_grid) -> list[QuantumState]:
    """Exact reduced-state evolution by superoperator matrix exponential.

    Trace is preserved to 1e-12 and positivity to 1e-10; each returned
    state revalidates those invariants at construction.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid[0] != 0.0 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must increase strictly from 0")
    validate(model)
    liouville = liouvillian_matrix(model)
    vec0 = rho0.rho.reshape(-1)
    states = []
    for t in t_grid:
        vec_t = scipy.linalg.expm(liouville * t) @ vec0
        rho_t = vec_t.reshape(model.dim, model.dim)
        states.append(QuantumState(rho_t, tol_herm=1e-10, tol_psd=1e-10, tol_trace=1e-12))
    return states


def master_flow_expectation(
    model: QsdeModel,
    candidate: LyapunovCandidate,
    x0: np.ndarray,
    system_state: QuantumState,
    t_grid,
    observables: dict | None = None,
) -> Trajectory:
    """Oracle trajectory of E[V(X_t)] from the reduced master equation.

    Because the flow is a homomorphism, a candidate whose coefficients are
    scalar multiples of the identity satisfies V(X_t) = f_t(V(x0)), so its
    expectation is Tr(rho_t V(x0)) with rho_t the reduced state.  Candidates
    with non-scalar coefficients interleave unflowed operators between
    flowed factors and are not reduced-state computable; they are rejected.
    """
    cand = candidate if candidate.is_canonical else canonicalize(candidate)
    for n, m, theta in cand.terms:
        lam = np.trace(theta) / cand.dim
        if spectral_norm(theta - lam * np.eye(cand.dim)) > 1e-12:
            raise InvalidCandidateError(
                "the master oracle needs scalar term coefficients; "
                f"term ({n}, {m}) has a non-scalar Theta"
            )
    v0 = evaluate(cand, np.asarray(x0, dtype=complex))
    states = master_evolve(model, system_state, t_grid)
    v_vals = [expectation(s, v0).real for s in states]
    obs = None
    if observables:
        obs = {name: np.array([expectation(s, op).real for s in states]) for name, op in observables.items()}
    return Trajectory(times=np.asarray(t_grid, dtype=float), v_expect=np.array(v_vals), method="master", obs_expect=obs)


@dataclass(frozen=True)
class DriftCheckReport:
    """One-step finite-difference validation of the analytic drift."""

    analytic: float
    empirical: float
    gap: float
    empirical_half: float
    gap_half: float
    ratio: float
    order_ok: bool


def finite_difference_drift_check(
    model: QsdeModel,
    candidate: LyapunovCandidate,
    x0: np.ndarray,
    system_state: QuantumState,
    config: CollisionConfig,
    atol: float = 1e-12,
) -> DriftCheckReport:
    """Compare (E[V](dt) - E[V](0)) / dt against the analytic drift expectation.

    The noise contributions vanish in vacuum expectation, so the one-step
    slope must converge to <psi| drift(x0) |psi> at first order in dt; the
    check reruns at dt/2 and requires the gap to shrink by a factor in
    [1.5, 2.5] (trivially satisfied when both gaps are below ``atol``).
    """
    cand = candidate if candidate.is_canonical else canonicalize(candidate)
    psi0 = system_state.pure_vector()
    drift = flow_ito_coefficients(model, cand, np.asarray(x0, dtype=complex)).drift
    analytic = float(np.vdot(psi0, drift @ psi0).real)

    def one_step_slope(dt):
        cfg = CollisionConfig(dt=dt, steps=1, ancilla_levels=config.ancilla_levels, dim_guard=config.dim_guard)
        traj = simulate_flow_expectation(model, cand, x0, system_state, cfg)
        return (traj.v_expect[1] - traj.v_expect[0]) / dt

    empirical = float(one_step_slope(config.dt))
    empirical_half = float(one_step_slope(config.dt / 2))
    gap = abs(empirical - analytic)
    gap_half = abs(empirical_half - analytic)
    if gap <= atol and gap_half <= atol:
        ratio = float("nan")
        order_ok = True
    else:
        ratio = gap / max(gap_half, np.finfo(float).tiny)
        order_ok = 1.5 <= ratio <= 2.5
    return DriftCheckReport(
        analytic=analytic,
        empirical=empirical,
        gap=gap,
        empirical_half=empirical_half,
        gap_half=gap_half,
        ratio=ratio,
        order_ok=order_ok,
    )


@dataclass(frozen=True)
class ItoTableEntry:
    left: str
    right: str
    maps_to: str
    moment: float
    expected: float
    deviation: float


@dataclass(frozen=True)
class ItoTableReport:
    dt: float
    ancilla_levels: int
    entries: tuple[ItoTableEntry, ...]

    @property
    def max_deviation(self) -> float:
        return max(e.deviation for e in self.entries)


# Multiplication table for the noise differentials; every pair not listed
# maps to zero.  Products involving dt are second order; dt*dt alone has a
# nonzero deterministic value (dt^2), reproduced exactly by the increments.
_ITO_TABLE = {
    ("dA", "dA_dag"): "dt",
    ("dLambda", "dLambda"): "dLambda",
    ("dLambda", "dA_dag"): "dA_dag",
    ("dA", "dLambda"): "dA",
}


def ito_table_check(ancilla_levels: int = 1, dt: float = 1e-3) -> ItoTableReport:
    """Vacuum moments of all 16 ordered increment products vs the table.

    With dA = a sqrt(dt), dA† = a† sqrt(dt), dLambda = a†a and dt = dt * I
    on one vacuum ancilla, every product's vacuum expectation is computed
    exactly in the truncated mode and compared with the expectation of the
    increment the multiplication table assigns: dt for dA dA†, zero for
    everything else mapping to a noise increment or to zero.  The purely
    deterministic pair dt*dt equals dt^2 identically and is compared with
    that exact value.  All deviations are zero up to float rounding.
    """
    if ancilla_levels < 1:
        raise ValueError("ancilla_levels must be at least 1")
    if dt <= 0:
        raise ValueError("dt must be positive")
    a, a_dag, number = ladder_operators(ancilla_levels)
    eye = np.eye(ancilla_levels + 1)
    vac = vacuum_vector(ancilla_levels)
    increments = {
        "dA": np.sqrt(dt) * a,
        "dA_dag": np.sqrt(dt) * a_dag,
        "dLambda": number,
        "dt": dt * eye,
    }

    def vac_moment(op):
        return float(np.vdot(vac, op @ vac).real)

    entries = []
    for left in increments:
        for right in increments:
            moment = vac_moment(increments[left] @ increments[right])
            if left == "dt" and right == "dt":
                maps_to, expected = "dt*dt", dt * dt
            else:
                maps_to = _ITO_TABLE.get((left, right), "0")
                expected = vac_moment(increments[maps_to]) if maps_to in increments else 0.0
            entries.append(
                ItoTableEntry(
                    left=left, right=right, maps_to=maps_to,
                    moment=moment, expected=expected, deviation=abs(moment - expected),
                )
            )
    return ItoTableReport(dt=dt, ancilla_levels=ancilla_levels, entries=tuple(entries))


def exit_time_estimate(trajectory: Trajectory, epsilon: float) -> float | None:
    """First grid time with E[V] above epsilon, or None if it never leaves.

    This is an expectation-level surrogate for an operator-valued exit
    time: it watches the mean path, not the stopped process.
    """
    above = np.nonzero(trajectory.v_expect > epsilon)[0]
    if above.size == 0:
        return None
    return float(trajectory.times[above[0]])


@dataclass(frozen=True)
class TransitReport:
    applicable: bool
    measured: float | None
    bound: float | None
    entry_value: float | None
    ok: bool | None


def transit_time_check(trajectory: Trajectory, level_hi: float, level_lo: float, b: float) -> TransitReport:
    """Measured high-to-low level transit time against the bound E[V]/b.

    ``b`` is the user's uniform drift bound (drift <= -b I on the band);
    the mean transit from first crossing below ``level_hi`` to first
    crossing below ``level_lo`` must then be at most entry value / b.  A
    failure witnesses an invalid b for this trajectory, not a broken
    trajectory.  Not applicable when the path never crosses both levels.
    """
    if not level_hi > level_lo > 0:
        raise ValueError("levels must satisfy level_hi > level_lo > 0")
    if b <= 0:
        raise ValueError("b must be positive")
    v, t = trajectory.v_expect, trajectory.times
    hi_idx = np.nonzero(v <= level_hi)[0]
    if hi_idx.size == 0:
        return TransitReport(False, None, None, None, None)
    lo_idx = np.nonzero(v <= level_lo)[0]
    lo_idx = lo_idx[lo_idx >= hi_idx[0]]
    if lo_idx.size == 0:
        return TransitReport(False, None, None, None, None)
    entry = float(v[hi_idx[0]])
    measured = float(t[lo_idx[0]] - t[hi_idx[0]])
    bound = entry / b
    return TransitReport(True, measured, bound, entry, measured <= bound)


@dataclass(frozen=True)
class EnvelopeReport:
    ok: bool
    max_ratio: float
    allowance: float
    worst_time: float


def envelope_check(
    trajectory: Trajectory, a: float, v0: float, tol_env: float = 1e-6, dt_allowance_coeff: float = 1.0
) -> EnvelopeReport:
    """Does E[V](t) stay below v0 exp(-a t), up to declared slack?

    The multiplicative slack is ``tol_env`` plus a discretization allowance
    C * dt with dt read off the grid, reported alongside the worst ratio.
    """
    if a <= 0:
        raise ValueError("a must be positive")
    if v0 < 0:
        raise ValueError("v0 must be nonnegative")
    dt = float(np.min(np.diff(trajectory.times))) if trajectory.times.size > 1 else 0.0
    allowance = tol_env + dt_allowance_coeff * dt
    envelope = v0 * np.exp(-a * trajectory.times)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(envelope > 0, trajectory.v_expect / envelope, np.inf)
    worst = int(np.argmax(ratios))
    max_ratio = float(ratios[worst])
    return EnvelopeReport(
        ok=max_ratio <= 1.0 + allowance,
        max_ratio=max_ratio,
        allowance=allowance,
        worst_time=float(trajectory.times[worst]),
    )
