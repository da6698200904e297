"""The (H, L, S) model for a single-channel quantum stochastic evolution.

A model is a Hamiltonian H (self-adjoint), a coupling operator L (carrying
units of 1/sqrt(time), so L†L is a rate) and a unitary scattering operator
S, all on the same finite-dimensional system.  Two pictures of the dynamics
are exposed:

* the *flow* picture of an observable X, whose drift is the Lindblad-type
  generator  i[H,X] + L†XL - (1/2){L†L, X}  and whose noise coefficients
  are  [L†,X]S (annihilation), S†[X,L] (creation) and [S†X,S] (gauge);

* the *state* picture of a stochastically evolved density operator rho,
  with drift  -i[H,rho] + L†S rho S†L - (1/2){L†L, rho}  and noise
  coefficients  [rho,L†S]S†,  S[S†L,rho]  and  [S rho, S†].

Both pictures are implemented exactly as written.  Note that the state
drift is *not* the trace-dual of the flow drift (not even for S = I unless
L is normal); the trace-dual of the flow drift is the reduced master
equation implemented in :mod:`qstab.evolve`.  The model-level diagnostics
report the induced decay scale ||L†L|| but never alter the operators.

All functions are pure and safe for concurrent use.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidModelError
from .operators import (
    DEFAULT_TOL,
    adjoint,
    anticommutator,
    as_operator,
    commutator,
    hermiticity_defect,
    require_same_dim,
    spectral_norm,
)


@dataclass(frozen=True, eq=False)
class QsdeModel:
    """Immutable (H, L, S) triple; S defaults to the identity.

    Construction only enforces shape consistency.  Semantic invariants
    (H self-adjoint, S unitary) are checked by :func:`validate`, so invalid
    triples can be built, inspected and reported on.
    """

    hamiltonian: np.ndarray
    coupling: np.ndarray
    scattering: np.ndarray | None = None

    def __post_init__(self):
        h = as_operator(self.hamiltonian)
        l = as_operator(self.coupling)
        s = as_operator(self.scattering) if self.scattering is not None else as_operator(np.eye(h.shape[0]))
        require_same_dim(h, l, s)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "coupling", l)
        object.__setattr__(self, "scattering", s)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


@dataclass(frozen=True)
class ModelDiagnostics:
    """Defects and scales reported by :func:`diagnose` / :func:`validate`."""

    hamiltonian_defect: float
    scattering_defect: float
    norm_hamiltonian: float
    norm_coupling: float
    norm_scattering: float
    decay_scale: float
    failures: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def diagnose(model: QsdeModel, tol: float = DEFAULT_TOL) -> ModelDiagnostics:
    """Measure all model invariants without raising.

    Reports the Hermiticity defect of H, the unitarity defect of S (the
    worse of ||S†S - I|| and ||SS† - I||), operator norms, and the decay
    scale ||L†L|| implied by the coupling's units.
    """
    h, l, s = model.hamiltonian, model.coupling, model.scattering
    eye = np.eye(model.dim)
    h_defect = hermiticity_defect(h)
    s_defect = max(spectral_norm(adjoint(s) @ s - eye), spectral_norm(s @ adjoint(s) - eye))
    failures = []
    if h_defect > tol:
        failures.append(f"H not self-adjoint, defect {h_defect:.3e}")
    if s_defect > tol:
        failures.append(f"S not unitary, defect {s_defect:.3e}")
    return ModelDiagnostics(
        hamiltonian_defect=h_defect,
        scattering_defect=s_defect,
        norm_hamiltonian=spectral_norm(h),
        norm_coupling=spectral_norm(l),
        norm_scattering=spectral_norm(s),
        decay_scale=spectral_norm(adjoint(l) @ l),
        failures=tuple(failures),
    )


def validate(model: QsdeModel, tol: float = DEFAULT_TOL) -> ModelDiagnostics:
    """Like :func:`diagnose`, but raise on any violated invariant.

    Raises
    ------
    InvalidModelError
        Naming every violated invariant and its defect.
    """
    report = diagnose(model, tol=tol)
    if not report.ok:
        raise InvalidModelError("; ".join(report.failures))
    return report


class NoiseCoefficients(NamedTuple):
    """Coefficients of the annihilation, creation and gauge differentials."""

    annihilation: np.ndarray
    creation: np.ndarray
    gauge: np.ndarray


def flow_generator(model: QsdeModel, x: np.ndarray) -> np.ndarray:
    """Drift of the observable flow:  i[H,X] + L†XL - (1/2){L†L, X}.

    Maps Hermitian inputs to Hermitian outputs and annihilates the identity.
    """
    x = np.asarray(x, dtype=complex)
    require_same_dim(model.hamiltonian, x)
    h, l = model.hamiltonian, model.coupling
    ldl = adjoint(l) @ l
    return 1j * commutator(h, x) + adjoint(l) @ x @ l - 0.5 * anticommutator(ldl, x)


def flow_noise_coefficients(model: QsdeModel, x: np.ndarray) -> NoiseCoefficients:
    """Noise coefficients of the observable flow, evaluated at the point X.

    annihilation = [L†, X] S,  creation = S†[X, L],  gauge = [S†X, S].
    All three vanish at X = I (for unitary S), so multiples of the identity
    are flow equilibria of every model.
    """
    x = np.asarray(x, dtype=complex)
    require_same_dim(model.hamiltonian, x)
    l, s = model.coupling, model.scattering
    return NoiseCoefficients(
        annihilation=commutator(adjoint(l), x) @ s,
        creation=adjoint(s) @ commutator(x, l),
        gauge=commutator(adjoint(s) @ x, s),
    )


def state_generator(model: QsdeModel, rho: np.ndarray) -> np.ndarray:
    """Drift of the stochastic density operator:
    -i[H,rho] + L†S rho S†L - (1/2){L†L, rho}.

    The sandwich term is kept exactly in this form.  The drift maps
    Hermitian to Hermitian but is generally not trace-free and is not the
    trace-dual of :func:`flow_generator`; the argument is treated purely
    algebraically (it need not be a valid state).
    """
    rho = np.asarray(rho, dtype=complex)
    require_same_dim(model.hamiltonian, rho)
    h, l, s = model.hamiltonian, model.coupling, model.scattering
    ldl = adjoint(l) @ l
    return -1j * commutator(h, rho) + adjoint(l) @ s @ rho @ adjoint(s) @ l - 0.5 * anticommutator(ldl, rho)


def state_noise_coefficients(model: QsdeModel, rho: np.ndarray) -> NoiseCoefficients:
    """Noise coefficients of the stochastic density operator at the point rho.

    annihilation = [rho, L†S] S†,  creation = S[S†L, rho],
    gauge = [S rho, S†].
    """
    rho = np.asarray(rho, dtype=complex)
    require_same_dim(model.hamiltonian, rho)
    l, s = model.coupling, model.scattering
    return NoiseCoefficients(
        annihilation=commutator(rho, adjoint(l) @ s) @ adjoint(s),
        creation=s @ commutator(adjoint(s) @ l, rho),
        gauge=commutator(s @ rho, adjoint(s)),
    )


def equilibrium_residual(model: QsdeModel, point: np.ndarray, picture: str = "flow") -> float:
    """How far ``point`` is from being an equilibrium of the chosen picture.

    An equilibrium must annihilate the drift and all three noise
    coefficients; the residual is the max spectral norm over the four, so
    it is zero (within tolerance) iff the point is an equilibrium and
    otherwise reports the binding violation.
    """
    if picture == "flow":
        drift = flow_generator(model, point)
        noise = flow_noise_coefficients(model, point)
    elif picture == "state":
        drift = state_generator(model, point)
        noise = state_noise_coefficients(model, point)
    else:
        raise ValueError(f"picture must be 'flow' or 'state', got {picture!r}")
    return max(spectral_norm(drift), *(spectral_norm(c) for c in noise))
