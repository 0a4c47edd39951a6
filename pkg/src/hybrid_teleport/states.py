"""Named states: entangled coherent states, cats, hybrid Bell states, CV qubits.

Also holds the pseudo-Pauli coefficient maps and a gate-level simulation of
the circuit that creates |alpha,alpha> + |-alpha,-alpha> with an ancilla.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import fock
from .fock import ModeSpec, StateVector

G, E = 0, 1

# BSM rotation convention: |g> -> (|g>-|e>)/sqrt2, |e> -> (|g>+|e>)/sqrt2
ROT_Y = np.array([[1.0, 1.0], [-1.0, 1.0]], dtype=complex) / math.sqrt(2.0)
# Opposite rotation sense, |g> -> (|g>+|e>)/sqrt2; used wherever a "Hadamard" prepares |+>
PREP_Y = ROT_Y.conj().T
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def overlap_factor(alpha) -> float:
    """<-alpha|alpha> = exp(-2|alpha|^2)."""
    return math.exp(-2.0 * abs(alpha) ** 2)


class EcsKind(enum.Enum):
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"


class HybridBellKind(enum.Enum):
    PHI_PLUS_HE = "phi+"
    PHI_MINUS_HE = "phi-"
    PSI_PLUS_HE = "psi+"
    PSI_MINUS_HE = "psi-"


@dataclass(frozen=True)
class CvQubit:
    """a|alpha> + b|-alpha>, normalised by ``norm_const``."""

    a: complex
    b: complex
    alpha: complex

    @property
    def norm_const(self) -> float:
        x = overlap_factor(self.alpha)
        a, b = complex(self.a), complex(self.b)
        sq = abs(a) ** 2 + abs(b) ** 2 + 2.0 * (b.conjugate() * a).real * x
        if sq <= 0:
            raise ValueError("CV qubit has zero norm")
        return 1.0 / math.sqrt(sq)

    def ket(self, dim: int, label: str = "C", *, normalized: bool = True) -> StateVector:
        plus = fock.coherent_amplitudes(self.alpha, dim)
        minus = fock.coherent_amplitudes(-complex(self.alpha), dim)
        vec = self.a * plus + self.b * minus
        state = StateVector([ModeSpec.cavity(label, dim)], vec)
        return state.normalize() if normalized else state

    def coefficients(self) -> np.ndarray:
        return np.array([self.a, self.b], dtype=complex)

    @classmethod
    def from_state(cls, state: StateVector, alpha) -> "CvQubit":
        """Least-squares coefficients of a single-cavity state on {|alpha>, |-alpha>}.

        The result is rescaled so that |a|^2 + |b|^2 = 1.
        """
        if len(state.modes) != 1:
            raise fock.DimensionMismatch("CV qubit extraction needs a single-mode state")
        dim = state.modes[0].dim
        basis_mat = np.column_stack(
            [fock.coherent_amplitudes(alpha, dim), fock.coherent_amplitudes(-complex(alpha), dim)]
        )
        coef, *_ = np.linalg.lstsq(basis_mat, state.amplitudes, rcond=None)
        coef = coef / np.linalg.norm(coef)
        return cls(complex(coef[0]), complex(coef[1]), alpha)


def cv_qubit(a, b, alpha) -> CvQubit:
    return CvQubit(complex(a), complex(b), alpha)


def pseudo_x(q: CvQubit) -> CvQubit:
    """Swap the coefficients of |alpha> and |-alpha>."""
    return CvQubit(q.b, q.a, q.alpha)


def pseudo_z(q: CvQubit) -> CvQubit:
    """Flip the sign of the |-alpha> coefficient."""
    return CvQubit(q.a, -q.b, q.alpha)


def _pair(alpha, dim):
    return fock.coherent_amplitudes(alpha, dim), fock.coherent_amplitudes(-complex(alpha), dim)


def ecs_norm(sign: int, alpha) -> float:
    """Analytic normalisation 1/sqrt(2(1 +- exp(-4|alpha|^2)))."""
    val = 2.0 * (1.0 + sign * math.exp(-4.0 * abs(alpha) ** 2))
    if val <= 0:
        raise ValueError("odd entangled coherent state is undefined at alpha = 0")
    return 1.0 / math.sqrt(val)


def ecs(kind: EcsKind | str, alpha, dim: int, labels=("B", "C")) -> StateVector:
    """Two-cavity entangled coherent state of the given Bell type."""
    kind = EcsKind(kind) if not isinstance(kind, EcsKind) else kind
    plus, minus = _pair(alpha, dim)
    if kind in (EcsKind.PHI_PLUS, EcsKind.PHI_MINUS):
        first, second = np.kron(plus, plus), np.kron(minus, minus)
    else:
        first, second = np.kron(plus, minus), np.kron(minus, plus)
    sign = 1 if kind in (EcsKind.PHI_PLUS, EcsKind.PSI_PLUS) else -1
    vec = ecs_norm(sign, alpha) * (first + sign * second)
    norm = np.linalg.norm(vec)
    if abs(norm - 1.0) > 1e-8:
        raise fock.TruncationError(f"ECS norm {norm:.12g} deviates from analytic normalisation")
    modes = [ModeSpec.cavity(labels[0], dim), ModeSpec.cavity(labels[1], dim)]
    return StateVector(modes, vec / norm)


def cat_ket(sign: int, alpha, dim: int, label: str = "C") -> StateVector:
    """Unnormalised |alpha> + sign |-alpha>."""
    plus, minus = _pair(alpha, dim)
    return StateVector([ModeSpec.cavity(label, dim)], plus + sign * minus)


def scs(sign: int, alpha, dim: int, label: str = "C") -> StateVector:
    """Even (sign=+1) or odd (sign=-1) Schroedinger cat state."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    fock.check_truncation(alpha, dim)
    if sign == -1 and alpha == 0:
        raise ValueError("odd cat is undefined at alpha = 0")
    n = np.arange(dim)
    c = fock.coherent_amplitudes(alpha, dim)
    # exact parity filtering; avoids cancellation noise in c(alpha) - c(-alpha)
    keep = (n % 2 == 0) if sign == 1 else (n % 2 == 1)
    vec = np.where(keep, c, 0.0)
    return StateVector([ModeSpec.cavity(label, dim)], vec).normalize()


def hybrid_bell(kind: HybridBellKind | str, alpha, dim: int, labels=("A", "B")) -> StateVector:
    """Qubit-cavity Bell states (|g>|+-alpha> +- |e>|-+alpha>)/sqrt2, renormalised numerically."""
    kind = HybridBellKind(kind) if not isinstance(kind, HybridBellKind) else kind
    plus, minus = _pair(alpha, dim)
    g, e = fock.basis(2, G), fock.basis(2, E)
    if kind in (HybridBellKind.PHI_PLUS_HE, HybridBellKind.PHI_MINUS_HE):
        first, second = np.kron(g, plus), np.kron(e, minus)
    else:
        first, second = np.kron(g, minus), np.kron(e, plus)
    sign = 1 if kind in (HybridBellKind.PHI_PLUS_HE, HybridBellKind.PSI_PLUS_HE) else -1
    vec = (first + sign * second) / math.sqrt(2.0)
    modes = [ModeSpec.qubit(labels[0]), ModeSpec.cavity(labels[1], dim)]
    return StateVector(modes, vec).normalize()


def vacuum(dim: int, label: str) -> StateVector:
    return StateVector([ModeSpec.cavity(label, dim)], fock.basis(dim, 0))


def qubit_state(level: int, label: str) -> StateVector:
    return StateVector([ModeSpec.qubit(label)], fock.basis(2, level))


def _joint_vacuum_flip(state: StateVector, qubit: str, cavities=("B", "C")) -> StateVector:
    # X on ``qubit`` only where every listed cavity is in |0>
    labels = [qubit, *cavities]
    t = np.array(state.reorder(labels + [l for l in state.labels if l not in labels]).tensor_view())
    sl = (slice(None),) + (0,) * len(cavities)
    t[sl] = np.tensordot(SIGMA_X, t[sl], axes=([1], [0]))
    flipped = StateVector(
        [state.mode(l) for l in labels] + [m for m in state.modes if m.label not in labels], t
    )
    return flipped.reorder(state.labels)


def create_ecs_circuit(alpha, dim: int | None = None) -> StateVector:
    """Simulate the ancilla-assisted ECS creation circuit on modes (M, B, C).

    M starts in |g> and both cavities in vacuum.  Steps: rotate M to |+>,
    displace both cavities by 2 alpha on the |g> branch of M, flip M where
    both cavities are empty, then displace both cavities by -alpha.
    """
    if dim is None:
        dim = fock.required_dim(2 * abs(alpha))
    fock.check_truncation(2 * abs(alpha), dim)
    state = fock.tensor(qubit_state(G, "M"), vacuum(dim, "B"), vacuum(dim, "C"))
    state = state.apply(PREP_Y, "M")
    d2 = fock.displacement(2 * complex(alpha), dim)
    state = state.apply_controlled("M", G, {"B": d2, "C": d2})
    state = _joint_vacuum_flip(state, "M")
    dm = fock.displacement(-complex(alpha), dim)
    state = state.apply(dm, "B").apply(dm, "C")
    return state
