"""ECS verification and the repeat-until-success pseudo Pauli-x gate.

Both gadgets run on two cavities ``B``, ``C`` with outer qubits ``A`` (next
to B) and ``X`` (next to C).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fock, states
from .errors import DimensionMismatch, MaxRoundsExceeded
from .fock import DensityOperator, StateVector
from .states import EcsKind, G, E
from .teleport import MeasurementModel

ZZ_THRESHOLD = 0.9
PARITY_HIGH = 0.9
PARITY_LOW = 0.1

ECS_VERDICT = "consistent_with_ecs"
MIXTURE_VERDICT = "consistent_with_mixture"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class VerificationReport:
    zz_correlation: float
    parity_correlation: float
    fringe_wigner_origin: float
    verdict: str


@dataclass(frozen=True)
class PauliXRound:
    outcome_A: str
    outcome_X: str
    success: bool
    probability: float
    post_channel: StateVector


def _as_density(state) -> DensityOperator:
    return state.to_density() if isinstance(state, StateVector) else state


def _two_cavities(state):
    if set(state.labels) != {"B", "C"}:
        raise DimensionMismatch(f"verification needs exactly cavities B and C, got {state.labels}")


def _mode_dim(state, label):
    return state.dims[state.labels.index(label)]


def _readout_elements(alpha, dim, model):
    # (z value, POVM element) per single-cavity readout outcome
    plus = fock.coherent_amplitudes(alpha, dim)
    minus = fock.coherent_amplitudes(-complex(alpha), dim)
    p_minus = np.outer(minus, minus.conj())
    if model is MeasurementModel.IDEAL:
        return [(1, np.outer(plus, plus.conj())), (-1, p_minus)]
    return [(1, np.eye(dim) - p_minus), (-1, p_minus)]


def verify_zz(state, alpha, model: MeasurementModel | str = MeasurementModel.DISPLACED) -> float:
    """Correlation <z_B z_C> of the +-alpha readouts on both cavities.

    Under the ideal model the four joint weights from the non-orthogonal
    projectors are renormalised; the displaced-vacuum POVM is complete.
    """
    model = MeasurementModel(model)
    _two_cavities(state)
    dim_b, dim_c = _mode_dim(state, "B"), _mode_dim(state, "C")
    rho = _as_density(state)
    weights = {}
    for zb, eb in _readout_elements(alpha, dim_b, model):
        for zc, ec in _readout_elements(alpha, dim_c, model):
            weights[(zb, zc)] = rho.expect(fock.tensor(eb, ec), ["B", "C"]).real
    total = sum(weights.values())
    return float(sum(zb * zc * w for (zb, zc), w in weights.items()) / total)


def verify_parity(state, alpha=None) -> tuple[float, DensityOperator]:
    """<P_B P_C> and the state of B conditioned on even parity of C."""
    _two_cavities(state)
    rho = _as_density(state)
    dim_b, dim_c = _mode_dim(rho, "B"), _mode_dim(rho, "C")
    corr = rho.expect(fock.tensor(fock.parity_operator(dim_b), fock.parity_operator(dim_c)), ["B", "C"]).real
    even = np.diag((np.arange(dim_c) % 2 == 0).astype(float)).astype(complex)
    kept = rho.apply(even, "C")
    p_even = kept.trace()
    if p_even <= 0:
        raise ValueError("even parity in C has zero probability")
    cond = DensityOperator(kept.modes, kept.matrix / p_even, check=False)
    return float(corr), fock.partial_trace(cond, ["B"])


def verdict_for(zz: float, parity: float) -> str:
    if zz >= ZZ_THRESHOLD and parity >= PARITY_HIGH:
        return ECS_VERDICT
    if zz >= ZZ_THRESHOLD and parity <= PARITY_LOW:
        return MIXTURE_VERDICT
    return INCONCLUSIVE


def verify_ecs(state, alpha, model: MeasurementModel | str = MeasurementModel.DISPLACED) -> VerificationReport:
    zz = verify_zz(state, alpha, model)
    parity, cond_b = verify_parity(state, alpha)
    w0 = fock.wigner_point(cond_b, 0.0)
    return VerificationReport(zz, parity, w0, verdict_for(zz, parity))


# --- repeat-until-success pseudo Pauli-x ------------------------------------


def build_ghz(alpha, dim: int | None = None) -> StateVector:
    """Entangle outer qubits A, X with the ECS: prep rotations, then C_AB and C_CX.

    Returns a state on modes (A, X, B, C).
    """
    dim = dim or max(fock.required_dim(alpha), 10)
    state = fock.tensor(
        states.qubit_state(G, "A"), states.qubit_state(G, "X"), states.ecs(EcsKind.PHI_PLUS, alpha, dim)
    )
    state = state.apply(states.PREP_Y, "A").apply(states.PREP_Y, "X")
    n = np.arange(dim)
    flip = np.exp(1j * math.pi * n)
    cphase = np.diag(np.concatenate([np.ones(dim), flip])).astype(complex)
    state = state.apply(cphase, ["A", "B"]).apply(cphase, ["X", "C"])
    return state


def bell_qubits(kind: str) -> StateVector:
    """Two-qubit Bell states on (A, X)."""
    g, e = fock.basis(2, G), fock.basis(2, E)
    vecs = {
        "phi+": np.kron(g, g) + np.kron(e, e),
        "psi+": np.kron(g, e) + np.kron(e, g),
        "++": np.kron(g + e, g + e) / math.sqrt(2),
        "--": np.kron(g - e, g - e) / math.sqrt(2),
    }
    return StateVector([fock.ModeSpec.qubit("A"), fock.ModeSpec.qubit("X")], vecs[kind] / math.sqrt(2))


def ghz_ecs_form(alpha, dim: int) -> StateVector:
    """(|phi+>_AX |ECS phi+> + |psi+>_AX |ECS psi+>) / sqrt2."""
    s = fock.tensor(bell_qubits("phi+"), states.ecs(EcsKind.PHI_PLUS, alpha, dim)) + fock.tensor(
        bell_qubits("psi+"), states.ecs(EcsKind.PSI_PLUS, alpha, dim)
    )
    return s.normalize()


def ghz_cat_form(alpha, dim: int) -> StateVector:
    """|++>_AX |cat+>|cat+> + |-->_AX |cat->|cat->, with unnormalised cat kets.

    Unnormalised cats make the rewrite exact; with unit cats the two
    branches would need weights (1 +- exp(-2|alpha|^2)) instead of 1.
    """
    cp = states.cat_ket(1, alpha, dim, "B")
    cm = states.cat_ket(-1, alpha, dim, "B")
    s = fock.tensor(bell_qubits("++"), cp, cp.relabel({"B": "C"})) + fock.tensor(
        bell_qubits("--"), cm, cm.relabel({"B": "C"})
    )
    return s.normalize()


def round_probabilities(state: StateVector) -> dict:
    """Joint probabilities of the four (A, X) outcomes and the conditioned channels."""
    out = {}
    for la in (G, E):
        for lx in (G, E):
            post = state.contract("A", fock.basis(2, la)).contract("X", fock.basis(2, lx))
            out[(la, lx)] = (post.norm() ** 2, post)
    return out


def success_probability(alpha, dim: int | None = None) -> float:
    probs = round_probabilities(build_ghz(alpha, dim))
    return float(sum(p for (la, lx), (p, _) in probs.items() if la != lx))


def _draw(probs: dict, rng) -> PauliXRound:
    keys = list(probs)
    p = np.array([probs[k][0] for k in keys])
    la, lx = keys[int(rng.choice(len(keys), p=p / p.sum()))]
    weight, post = probs[(la, lx)]
    names = {G: "g", E: "e"}
    return PauliXRound(names[la], names[lx], la != lx, float(weight), post.normalize())


def pauli_x_round(state: StateVector, rng=None) -> PauliXRound:
    """Measure A and X in {g, e}; unequal outcomes herald the flipped channel."""
    return _draw(round_probabilities(state), np.random.default_rng(rng))


def pauli_x_until_success(alpha, max_rounds: int, rng=None, dim: int | None = None,
                          state: StateVector | None = None,
                          table: dict | None = None) -> tuple[int, StateVector]:
    """Re-entangle and measure until the outer qubits disagree.

    A failed round leaves the even ECS behind, so every round starts from
    the same four-partite state and shares one outcome table.  Pass
    ``table`` (from :func:`round_probabilities`) to reuse it across calls.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    rng = np.random.default_rng(rng)
    probs = table or round_probabilities(state if state is not None else build_ghz(alpha, dim))
    keys = list(probs)
    weights = np.array([probs[k][0] for k in keys])
    cumulative = np.cumsum(weights / weights.sum())
    for r in range(1, max_rounds + 1):
        la, lx = keys[min(int(np.searchsorted(cumulative, rng.random(), side="right")), len(keys) - 1)]
        if la != lx:
            return r, probs[(la, lx)][1].normalize()
    raise MaxRoundsExceeded(max_rounds)
