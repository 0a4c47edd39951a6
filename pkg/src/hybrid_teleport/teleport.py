"""Hybrid qubit -> cat teleportation: circuit, measurement models, fidelities.

Mode labels: ``A`` is the unknown superconducting qubit, ``B`` and ``C`` the
two cavities sharing the entangled coherent channel.  Bob holds ``C``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import fock, states
from .errors import ModelMismatch
from .fock import DensityOperator, ModeSpec, StateVector
from .states import CvQubit, EcsKind, G, E, overlap_factor

QUBIT_LABELS = {G: "g", E: "e"}


class MeasurementModel(enum.Enum):
    IDEAL = "ideal"
    DISPLACED = "displaced"


@dataclass(frozen=True)
class UnknownQubit:
    """cos(theta/2)|g> + exp(i phi) sin(theta/2)|e>."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not -1e-12 <= self.theta <= math.pi + 1e-12:
            raise ValueError(f"theta={self.theta} outside [0, pi]")

    @property
    def a(self) -> complex:
        return complex(math.cos(self.theta / 2.0))

    @property
    def b(self) -> complex:
        return complex(np.exp(1j * self.phi) * math.sin(self.theta / 2.0))

    def ket(self, label: str = "A") -> StateVector:
        return StateVector([ModeSpec.qubit(label)], [self.a, self.b])

    def cv(self, alpha) -> CvQubit:
        return states.cv_qubit(self.a, self.b, alpha)


@dataclass(frozen=True)
class BsmOutcome:
    qubit: str
    cavity_sign: int
    probability: float
    post_state: StateVector
    alpha: complex = 0.0
    model: MeasurementModel = MeasurementModel.IDEAL

    @property
    def key(self) -> tuple[str, int]:
        return (self.qubit, self.cavity_sign)


class BsmOutcomes(tuple):
    """The four BSM outcomes in the order (g,+), (g,-), (e,+), (e,-)."""

    def get(self, qubit: str, sign: int) -> BsmOutcome:
        for o in self:
            if o.key == (qubit, sign):
                return o
        raise KeyError((qubit, sign))

    def probabilities(self) -> np.ndarray:
        return np.array([o.probability for o in self])

    def sample(self, rng=None) -> BsmOutcome:
        """Draw one outcome; ``rng`` is a Generator or an integer seed."""
        rng = np.random.default_rng(rng)
        p = self.probabilities()
        return self[int(rng.choice(len(self), p=p / p.sum()))]


@dataclass(frozen=True)
class FidelityReport:
    f_quantum: float
    f_classical: float
    f_dv_classical: float
    alpha: float
    theta: float
    phi: float = 0.0
    extras: dict = field(default_factory=dict)


def default_dim(alpha) -> int:
    return max(fock.required_dim(alpha), 10)


def prepare_total(q: UnknownQubit, alpha, dim: int | None = None) -> StateVector:
    """|psi>_A (x) |ECS phi+>_BC."""
    dim = dim or default_dim(alpha)
    return fock.tensor(q.ket("A"), states.ecs(EcsKind.PHI_PLUS, alpha, dim))


def conditional_phase(phi_gate: float, dim: int) -> np.ndarray:
    """|g><g| (x) 1 + |e><e| (x) exp(i phi n) on (qubit, cavity)."""
    n = np.arange(dim)
    diag = np.concatenate([np.ones(dim), np.exp(1j * phi_gate * n)])
    return np.diag(diag).astype(complex)


def bsm_circuit(state: StateVector) -> StateVector:
    """Controlled pi phase between A and B, then the y rotation on A."""
    for lab in ("A", "B"):
        if lab not in state.labels:
            raise fock.DimensionMismatch(f"BSM circuit needs mode {lab}")
    dim_b = state.mode("B").dim
    state = state.apply(conditional_phase(math.pi, dim_b), ["A", "B"])
    return state.apply(states.ROT_Y, "A")


def _single_mode(post: StateVector) -> StateVector:
    if len(post.modes) == 1:
        return post
    raise ModelMismatch(f"expected one remaining mode, got {post.labels}")


def _purify_conditioned(joint: StateVector, keep: str, tol: float = 1e-9):
    # conditioned state of ``keep`` after a rank-deficient POVM on the others;
    # returns the dominant Schmidt vector and its weight
    other = [l for l in joint.labels if l != keep]
    t = joint.reorder(other + [keep]).amplitudes.reshape(-1, joint.mode(keep).dim)
    _, s, vh = np.linalg.svd(t, full_matrices=False)
    total = float(np.sum(s**2))
    if total == 0.0:
        return None, 0.0
    if total > 0 and s[1:].dot(s[1:]) > tol * total:
        raise ModelMismatch("conditioned cavity state is not pure; input outside the coherent span")
    vec = vh[0]
    return StateVector([joint.mode(keep)], vec), total


def measure(state: StateVector, alpha, model: MeasurementModel | str = MeasurementModel.IDEAL) -> BsmOutcomes:
    """Enumerate the four hybrid BSM outcomes on modes A and B.

    ``IDEAL`` uses the rank-one Kraus maps <g/e|_A <+-alpha|_B and rescales
    the four weights to sum to one.  ``DISPLACED`` reads A projectively and
    tests B for vacuum after D(alpha): the click element is
    |-alpha><-alpha| (sign -alpha), the no-click element its complement.
    """
    model = MeasurementModel(model)
    if "A" not in state.labels or "B" not in state.labels:
        raise ModelMismatch(f"measurement acts on modes A and B, state has {state.labels}")
    dim_b = state.mode("B").dim
    plus = fock.coherent_amplitudes(alpha, dim_b)
    minus = fock.coherent_amplitudes(-complex(alpha), dim_b)
    raw = []
    for level in (G, E):
        branch = state.contract("A", fock.basis(2, level))
        if model is MeasurementModel.IDEAL:
            for sign, vec in ((1, plus), (-1, minus)):
                post = _single_mode(branch.contract("B", vec))
                raw.append((level, sign, post.norm() ** 2, post))
        else:
            click = _single_mode(branch.contract("B", minus))
            proj = np.eye(dim_b) - np.outer(minus, minus.conj())
            rest = branch.apply(proj, "B")
            rest_post, rest_w = (
                _purify_conditioned(rest, "C") if "C" in rest.labels else (rest, rest.norm() ** 2)
            )
            raw.append((level, 1, rest_w, rest_post))
            raw.append((level, -1, click.norm() ** 2, click))
    total = sum(w for _, _, w, _ in raw)
    out = []
    for level, sign, w, post in raw:
        p = w / total if model is MeasurementModel.IDEAL else w / state.norm() ** 2
        if post is not None and post.norm() > 0:
            post = post.normalize()
        out.append(BsmOutcome(QUBIT_LABELS[level], sign, float(p), post, complex(alpha), model))
    out.sort(key=lambda o: (o.qubit, -o.cavity_sign))
    return BsmOutcomes(out)


FEED_FORWARD = {
    ("g", 1): (),
    ("g", -1): (states.pseudo_x,),
    ("e", 1): (states.pseudo_z,),
    ("e", -1): (states.pseudo_z, states.pseudo_x),  # z first, then x
}


def recover(outcome: BsmOutcome) -> CvQubit:
    """Apply the outcome-dependent pseudo-Pauli correction to Bob's cavity."""
    q = CvQubit.from_state(outcome.post_state, outcome.alpha)
    for gate in FEED_FORWARD[outcome.key]:
        q = gate(q)
    return q


def expected_output(q: UnknownQubit, outcome: tuple[str, int], alpha) -> CvQubit:
    """Ideal uncorrected output for an outcome: pseudo-Paulis applied to cv(q)."""
    base = q.cv(alpha)
    qubit, sign = outcome
    if qubit == "e":
        base = states.pseudo_z(base)
    if sign == -1:
        base = states.pseudo_x(base)
    return base


def tilde_coefficients(theta: float, phi: float, alpha) -> tuple[complex, complex]:
    """Coefficients of the state actually left in C after outcome (g, +alpha)."""
    x = overlap_factor(alpha)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    ph = np.exp(1j * phi)
    return complex(c + x * ph * s), complex(x * c + ph * s)


def fidelity_quantum(theta: float, phi: float, alpha) -> float:
    """Closed-form fidelity of the (g, +alpha) output with the expected cat qubit."""
    x = overlap_factor(alpha)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    w = 1.0 + 4.0 * x * math.cos(phi) * c * s + x * x
    n_exp = 1.0 / math.sqrt(1.0 + 2.0 * x * c * s * math.cos(phi))
    at, bt = tilde_coefficients(theta, phi, alpha)
    n_tilde = 1.0 / math.sqrt(abs(at) ** 2 + abs(bt) ** 2 + 2.0 * x * (bt.conjugate() * at).real)
    return float(abs(n_tilde * n_exp * w) ** 2)


def simulate(q: UnknownQubit, alpha, dim: int | None = None,
             model: MeasurementModel | str = MeasurementModel.IDEAL) -> BsmOutcomes:
    """Full pipeline: prepare, BSM circuit, enumerate outcomes."""
    return measure(bsm_circuit(prepare_total(q, alpha, dim)), alpha, model)


def simulated_fidelity(q: UnknownQubit, alpha, dim: int | None = None,
                       outcome: tuple[str, int] = ("g", 1),
                       model: MeasurementModel | str = MeasurementModel.IDEAL) -> float:
    """Fidelity of the simulated uncorrected output with its expected cat qubit."""
    dim = dim or default_dim(alpha)
    res = simulate(q, alpha, dim, model).get(*outcome)
    expected = expected_output(q, outcome, alpha).ket(dim)
    return fock.fidelity(expected, res.post_state)


def classical_channel(alpha, dim: int | None = None) -> DensityOperator:
    """1/2 (|a,a><a,a| + |-a,-a><-a,-a|) on cavities B, C."""
    dim = dim or default_dim(alpha)
    plus = fock.coherent_state(alpha, dim, "B")
    minus = fock.coherent_state(-complex(alpha), dim, "B")
    branches = [
        fock.tensor(plus, plus.relabel({"B": "C"})),
        fock.tensor(minus, minus.relabel({"B": "C"})),
    ]
    return DensityOperator.from_ensemble([0.5, 0.5], branches)


def classical_weights(theta: float, alpha) -> tuple[float, float]:
    """Weights f+ and f- of the classically teleported mixture (phi = 0), as printed."""
    r2 = abs(alpha) ** 2
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    fp = c * c + s * s * math.exp(-4 * r2) + c * s * math.exp(-2 * r2)
    fm = c * c * math.exp(-4 * r2) + s * s + c * s * math.exp(-2 * r2)
    return fp, fm


def classical_teleport(q: UnknownQubit, alpha, dim: int | None = None,
                       outcome: tuple[str, int] = ("g", 1)) -> DensityOperator:
    """Bob's state after teleporting through the classically correlated channel.

    For phi = 0 and outcome (g, +alpha) the mixture uses the closed-form
    weights of :func:`classical_weights`; otherwise each branch of the mixed
    channel is pushed through the BSM pipeline and the conditioned outputs
    are summed.
    """
    dim = dim or default_dim(alpha)
    if abs(q.phi) < 1e-15 and outcome == ("g", 1):
        fp, fm = classical_weights(q.theta, alpha)
        return DensityOperator.from_ensemble(
            [fp, fm], [fock.coherent_state(alpha, dim), fock.coherent_state(-complex(alpha), dim)]
        )
    return simulate_classical_teleport(q, alpha, dim, outcome)


def simulate_classical_teleport(q: UnknownQubit, alpha, dim: int | None = None,
                                outcome: tuple[str, int] = ("g", 1)) -> DensityOperator:
    dim = dim or default_dim(alpha)
    level = G if outcome[0] == "g" else E
    bra_b = fock.coherent_amplitudes(outcome[1] * complex(alpha), dim)
    outs = []
    for sign in (1, -1):
        coh = fock.coherent_state(sign * complex(alpha), dim, "B")
        branch = fock.tensor(q.ket("A"), coh, coh.relabel({"B": "C"}))
        post = bsm_circuit(branch).contract("A", fock.basis(2, level)).contract("B", bra_b)
        outs.append(post)
    return DensityOperator.from_ensemble([0.5, 0.5], outs)


def fidelity_classical(theta: float, alpha) -> tuple[float, float]:
    """(classical-channel fidelity, DV classical baseline) for phi = 0.

    Evaluated with exact coherent-state overlaps; the expected state is the
    (g, +alpha) output cos(theta/2)|alpha> + sin(theta/2)|-alpha>.
    """
    x = overlap_factor(alpha)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    fp, fm = classical_weights(theta, alpha)
    n2 = 1.0 / (1.0 + 2.0 * x * c * s)
    on_plus = n2 * (c + s * x) ** 2
    on_minus = n2 * (c * x + s) ** 2
    f_cl = (fp * on_plus + fm * on_minus) / (fp + fm)
    return float(f_cl), float(c**4 + s**4)


def fidelity_report(theta: float, phi: float, alpha) -> FidelityReport:
    f_cl, f_dv = fidelity_classical(theta, alpha)
    return FidelityReport(fidelity_quantum(theta, phi, alpha), f_cl, f_dv, float(abs(alpha)), theta, phi)
