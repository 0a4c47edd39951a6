"""Dense states and operators on qubit x truncated-oscillator tensor products.

Modes are addressed by label.  Amplitude arrays are stored flat in the
order of ``modes`` (first mode is the slowest index, as with ``np.kron``).
Every value is read-only after construction; operations return new objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import DimensionMismatch, TruncationError, UnknownLabel

QUBIT = "qubit"
CAVITY = "cavity"


def required_dim(alpha) -> int:
    """Smallest Fock dimension accepted for coherent amplitude ``alpha``.

    dim >= |alpha|^2 + 7|alpha| + 10, roughly mean + 7 sigma of the
    Poisson photon distribution.
    """
    r = abs(alpha)
    return int(math.ceil(r * r + 7.0 * r + 10.0 - 1e-12))


def check_truncation(alpha, dim: int) -> None:
    need = required_dim(alpha)
    if dim < need:
        raise TruncationError(
            f"Fock dimension {dim} too small for |alpha|={abs(alpha):.4g} (need >= {need})"
        )


@dataclass(frozen=True)
class ModeSpec:
    kind: str
    dim: int
    label: str

    def __post_init__(self):
        if self.kind not in (QUBIT, CAVITY):
            raise ValueError(f"unknown mode kind {self.kind!r}")
        if self.kind == QUBIT and self.dim != 2:
            raise DimensionMismatch(f"qubit mode {self.label} must have dim 2, got {self.dim}")
        if self.kind == CAVITY and self.dim < 2:
            raise DimensionMismatch(f"cavity mode {self.label} needs dim >= 2, got {self.dim}")

    @classmethod
    def qubit(cls, label: str) -> "ModeSpec":
        return cls(QUBIT, 2, label)

    @classmethod
    def cavity(cls, label: str, dim: int) -> "ModeSpec":
        return cls(CAVITY, int(dim), label)


def _frozen(arr) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


def _axes(modes: Sequence[ModeSpec], labels: Iterable[str]) -> list[int]:
    index = {m.label: i for i, m in enumerate(modes)}
    out = []
    for lab in labels:
        if lab not in index:
            raise UnknownLabel(f"no mode labelled {lab!r} (have {list(index)})")
        out.append(index[lab])
    if len(set(out)) != len(out):
        raise ValueError("repeated mode label")
    return out


def _check_unique(modes: Sequence[ModeSpec]) -> None:
    labels = [m.label for m in modes]
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate mode labels in {labels}")


def _apply_tensor(tensor: np.ndarray, op: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    # contract op's input indices with ``axes`` and put its outputs back in place
    k = len(axes)
    sub = [tensor.shape[a] for a in axes]
    size = int(np.prod(sub))
    if op.shape != (size, size):
        raise DimensionMismatch(f"operator shape {op.shape} does not match subsystem dim {size}")
    opt = op.reshape(sub + sub)
    out = np.tensordot(opt, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


class StateVector:
    """Pure state over labelled modes.

    The amplitude vector is not forced to unit norm: projections and Kraus
    maps produce unnormalised vectors whose squared norm is a probability.
    """

    __slots__ = ("modes", "amplitudes")

    def __init__(self, modes: Sequence[ModeSpec], amplitudes):
        modes = tuple(modes)
        _check_unique(modes)
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        size = int(np.prod([m.dim for m in modes]))
        if amps.size != size:
            raise DimensionMismatch(f"{amps.size} amplitudes for total dimension {size}")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "amplitudes", _frozen(amps))

    def __setattr__(self, name, value):
        raise AttributeError("StateVector is immutable")

    def __repr__(self):
        desc = ",".join(f"{m.label}:{m.dim}" for m in self.modes)
        return f"StateVector([{desc}], norm={self.norm():.6g})"

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(m.dim for m in self.modes)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(m.label for m in self.modes)

    def mode(self, label: str) -> ModeSpec:
        return self.modes[_axes(self.modes, [label])[0]]

    def tensor_view(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalise the zero vector")
        return StateVector(self.modes, self.amplitudes / n)

    def scaled(self, factor) -> "StateVector":
        return StateVector(self.modes, self.amplitudes * factor)

    def __add__(self, other: "StateVector") -> "StateVector":
        if self.modes != other.modes:
            raise DimensionMismatch("cannot add states over different modes")
        return StateVector(self.modes, self.amplitudes + other.amplitudes)

    def __sub__(self, other: "StateVector") -> "StateVector":
        return self + other.scaled(-1.0)

    def apply(self, op, labels: Sequence[str] | str) -> "StateVector":
        """Apply a (possibly multi-mode) operator to the modes in ``labels``."""
        if isinstance(labels, str):
            labels = [labels]
        axes = _axes(self.modes, labels)
        out = _apply_tensor(self.tensor_view(), np.asarray(op), axes)
        return StateVector(self.modes, out)

    def apply_controlled(self, control: str, level: int, ops: dict) -> "StateVector":
        """Apply ``ops`` (label -> operator) only on the ``level`` branch of ``control``."""
        c = _axes(self.modes, [control])[0]
        t = np.array(self.tensor_view())
        branch = np.take(t, level, axis=c)
        rest = [m for m in self.modes if m.label != control]
        for lab, op in ops.items():
            ax = _axes(rest, [lab])
            branch = _apply_tensor(branch, np.asarray(op), ax)
        idx = [slice(None)] * t.ndim
        idx[c] = level
        t[tuple(idx)] = branch
        return StateVector(self.modes, t)

    def contract(self, label: str, bra_vector) -> "StateVector":
        """Project mode ``label`` onto ``bra_vector`` (given as a ket) and drop it."""
        ax = _axes(self.modes, [label])[0]
        vec = np.asarray(bra_vector.amplitudes if isinstance(bra_vector, StateVector) else bra_vector)
        if vec.shape != (self.modes[ax].dim,):
            raise DimensionMismatch(f"bra of length {vec.shape} for mode {label} of dim {self.modes[ax].dim}")
        out = np.tensordot(vec.conj(), self.tensor_view(), axes=([0], [ax]))
        rest = [m for i, m in enumerate(self.modes) if i != ax]
        return StateVector(rest, out)

    def reorder(self, labels: Sequence[str]) -> "StateVector":
        axes = _axes(self.modes, labels)
        if len(axes) != len(self.modes):
            raise DimensionMismatch("reorder needs every label exactly once")
        t = np.transpose(self.tensor_view(), axes)
        return StateVector([self.modes[a] for a in axes], t)

    def relabel(self, mapping: dict) -> "StateVector":
        modes = [ModeSpec(m.kind, m.dim, mapping.get(m.label, m.label)) for m in self.modes]
        return StateVector(modes, self.amplitudes)

    def to_density(self) -> "DensityOperator":
        v = self.amplitudes
        return DensityOperator(self.modes, np.outer(v, v.conj()))

    def expect(self, op, labels: Sequence[str] | str) -> complex:
        return complex(np.vdot(self.amplitudes, self.apply(op, labels).amplitudes))


class DensityOperator:
    """Mixed state over labelled modes.

    Hermiticity and unit trace are checked on construction; positivity costs
    a diagonalisation and is left to :meth:`validate`.
    """

    __slots__ = ("modes", "matrix")

    def __init__(self, modes: Sequence[ModeSpec], matrix, *, check: bool = True):
        modes = tuple(modes)
        _check_unique(modes)
        mat = np.asarray(matrix, dtype=complex)
        size = int(np.prod([m.dim for m in modes]))
        if mat.shape != (size, size):
            raise DimensionMismatch(f"matrix shape {mat.shape} for total dimension {size}")
        if check:
            scale = max(1.0, float(np.max(np.abs(mat))))
            if np.max(np.abs(mat - mat.conj().T)) > 1e-12 * scale:
                raise ValueError("density matrix is not Hermitian")
            if abs(np.trace(mat) - 1.0) > 1e-12:
                raise ValueError(f"density matrix trace {np.trace(mat).real:.15g} != 1")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "matrix", _frozen(mat))

    def __setattr__(self, name, value):
        raise AttributeError("DensityOperator is immutable")

    def __repr__(self):
        desc = ",".join(f"{m.label}:{m.dim}" for m in self.modes)
        return f"DensityOperator([{desc}])"

    @classmethod
    def from_ensemble(cls, weights, states: Sequence[StateVector]) -> "DensityOperator":
        """Trace-normalised sum of w_i |psi_i><psi_i| (states need not be normalised)."""
        modes = states[0].modes
        mat = np.zeros((states[0].amplitudes.size,) * 2, dtype=complex)
        for w, s in zip(weights, states):
            if s.modes != modes:
                raise DimensionMismatch("ensemble members live on different modes")
            v = s.amplitudes
            mat += w * np.outer(v, v.conj())
        tr = np.trace(mat).real
        if tr <= 0:
            raise ValueError("ensemble has zero weight")
        mat /= tr
        mat = 0.5 * (mat + mat.conj().T)
        return cls(modes, mat)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(m.dim for m in self.modes)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(m.label for m in self.modes)

    def tensor_view(self) -> np.ndarray:
        return self.matrix.reshape(self.dims + self.dims)

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def purity(self) -> float:
        return float(np.real(np.sum(self.matrix * self.matrix.T)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def validate(self, tol: float = 1e-10) -> None:
        ev = self.eigenvalues()
        if ev.min() < -tol:
            raise ValueError(f"density matrix has negative eigenvalue {ev.min():.3g}")

    def apply(self, op, labels: Sequence[str] | str) -> "DensityOperator":
        """Conjugate by ``op``: rho -> O rho O^dagger on the given modes."""
        if isinstance(labels, str):
            labels = [labels]
        axes = _axes(self.modes, labels)
        n = len(self.modes)
        op = np.asarray(op)
        t = _apply_tensor(self.tensor_view(), op, axes)
        t = _apply_tensor(t, op.conj(), [a + n for a in axes])
        return DensityOperator(self.modes, t.reshape(self.matrix.shape), check=False)

    def sandwich(self, op, labels: Sequence[str] | str) -> np.ndarray:
        """Unnormalised O rho O^dagger as a raw matrix (for Kraus updates)."""
        return self.apply(op, labels).matrix

    def expect(self, op, labels: Sequence[str] | str) -> complex:
        if isinstance(labels, str):
            labels = [labels]
        axes = _axes(self.modes, labels)
        t = _apply_tensor(self.tensor_view(), np.asarray(op), axes)
        return complex(np.trace(t.reshape(self.matrix.shape)))

    def partial_trace(self, keep: Sequence[str] | str) -> "DensityOperator":
        return partial_trace(self, keep)


# --- single-mode constructors -------------------------------------------------


def basis(dim: int, n: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return v


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def number_operator(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def parity_operator(dim: int) -> np.ndarray:
    return np.diag((-1.0) ** np.arange(dim)).astype(complex)


def coherent_amplitudes(alpha, dim: int) -> np.ndarray:
    """Truncated, renormalised Fock amplitudes of |alpha>."""
    check_truncation(alpha, dim)
    alpha = complex(alpha)
    n = np.arange(dim)
    if alpha == 0:
        return basis(dim, 0)
    # log-space keeps alpha^n / sqrt(n!) finite for large n
    logmag = n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1) - 0.5 * abs(alpha) ** 2
    c = np.exp(logmag) * np.exp(1j * n * np.angle(alpha))
    return c / np.linalg.norm(c)


def coherent_state(alpha, dim: int, label: str = "C") -> StateVector:
    return StateVector([ModeSpec.cavity(label, dim)], coherent_amplitudes(alpha, dim))


@lru_cache(maxsize=64)
def _quadrature_eigensystem(dim: int):
    # i(a^dag - a) is Hermitian; its eigenbasis exponentiates every real displacement
    a = annihilation(dim)
    gen = 1j * (a.conj().T - a)
    lam, vec = np.linalg.eigh(gen)
    lam.setflags(write=False)
    vec.setflags(write=False)
    return lam, vec


def displacement(alpha, dim: int, *, check: bool = True) -> np.ndarray:
    """D(alpha) = exp(alpha a^dag - alpha* a) on a ``dim``-level oscillator.

    The truncated generator is exponentiated through the eigenbasis of the
    quadrature i(a^dag - a) after rotating the phase of ``alpha`` away with
    exp(i theta n), so the result is unitary to machine precision.
    """
    if check:
        check_truncation(alpha, dim)
    alpha = complex(alpha)
    r, theta = abs(alpha), np.angle(alpha)
    lam, vec = _quadrature_eigensystem(dim)
    core = (vec * np.exp(-1j * r * lam)) @ vec.conj().T
    phase = np.exp(1j * theta * np.arange(dim))
    return phase[:, None] * core * phase.conj()[None, :]


# --- multi-mode plumbing ------------------------------------------------------


def tensor(*parts):
    """Tensor product of StateVectors (-> StateVector) or arrays (-> kron)."""
    if len(parts) == 1 and isinstance(parts[0], (list, tuple)):
        parts = tuple(parts[0])
    if not parts:
        raise ValueError("nothing to tensor")
    if all(isinstance(p, StateVector) for p in parts):
        modes = [m for p in parts for m in p.modes]
        amps = parts[0].amplitudes
        for p in parts[1:]:
            amps = np.kron(amps, p.amplitudes)
        return StateVector(modes, amps)
    if any(isinstance(p, (StateVector, DensityOperator)) for p in parts):
        raise TypeError("cannot mix states and raw operators in tensor()")
    out = np.asarray(parts[0])
    for p in parts[1:]:
        out = np.kron(out, np.asarray(p))
    return out


def partial_trace(rho, keep: Sequence[str] | str) -> DensityOperator:
    """Reduced state on ``keep`` (order of ``keep`` is respected)."""
    if isinstance(keep, str):
        keep = [keep]
    if isinstance(rho, StateVector):
        axes = _axes(rho.modes, keep)
        t = rho.tensor_view()
        drop = [i for i in range(len(rho.modes)) if i not in axes]
        mat = np.tensordot(t, t.conj(), axes=(drop, drop))
        modes = [rho.modes[a] for a in sorted(axes)]
        order = [sorted(axes).index(a) for a in axes]
        k = len(axes)
        mat = np.transpose(mat, order + [o + k for o in order])
        modes = [modes[o] for o in order]
        d = int(np.prod([m.dim for m in modes]))
        mat = mat.reshape(d, d)
        mat = mat / np.trace(mat).real
        return DensityOperator(modes, 0.5 * (mat + mat.conj().T))
    axes = _axes(rho.modes, keep)
    n = len(rho.modes)
    letters = "abcdefghijklmnopqrstuvwxyz"
    ket = list(letters[:n])
    bra = list(letters[n : 2 * n])
    drop = [i for i in range(n) if i not in axes]
    for i in drop:
        bra[i] = ket[i]
    out = [ket[a] for a in axes] + [bra[a] for a in axes]
    mat = np.einsum("".join(ket + bra) + "->" + "".join(out), rho.tensor_view())
    modes = [rho.modes[a] for a in axes]
    d = int(np.prod([m.dim for m in modes]))
    mat = mat.reshape(d, d)
    mat = mat / np.trace(mat).real
    return DensityOperator(modes, 0.5 * (mat + mat.conj().T))


def inner(u: StateVector, v: StateVector) -> complex:
    if u.modes != v.modes:
        raise DimensionMismatch(f"inner product over {u.labels} vs {v.labels}")
    return complex(np.vdot(u.amplitudes, v.amplitudes))


def fidelity(pure: StateVector, rho) -> float:
    """<psi|rho|psi> for normalised psi; ``rho`` may itself be a pure state."""
    psi = pure.normalize()
    if isinstance(rho, StateVector):
        if rho.modes != psi.modes:
            raise DimensionMismatch(f"fidelity over {psi.labels} vs {rho.labels}")
        return float(abs(np.vdot(psi.amplitudes, rho.normalize().amplitudes)) ** 2)
    if rho.modes != psi.modes:
        raise DimensionMismatch(f"fidelity over {psi.labels} vs {rho.labels}")
    v = psi.amplitudes
    return float(np.real(np.vdot(v, rho.matrix @ v)))


def von_neumann_entropy(rho: DensityOperator, base: float = 2.0) -> float:
    ev = rho.eigenvalues()
    ev = ev[ev > 1e-15]
    return float(-np.sum(ev * np.log(ev)) / np.log(base))


def _single_mode_matrix(rho) -> np.ndarray:
    if isinstance(rho, StateVector):
        rho = rho.to_density()
    if len(rho.modes) != 1 or rho.modes[0].kind != CAVITY:
        raise DimensionMismatch("Wigner function needs a single cavity mode")
    return np.asarray(rho.matrix)


def _wigner_workspace(mat: np.ndarray, rmax: float):
    d = mat.shape[0]
    work = d + required_dim(rmax)
    padded = np.zeros((work, work), dtype=complex)
    padded[:d, :d] = mat
    return padded, work


def wigner_point(rho, beta) -> float:
    """W(beta) = (2/pi) Tr[D(beta) P D(-beta) rho] for a single cavity mode.

    The state is zero-padded so the displaced copy stays inside the cutoff.
    """
    mat = _single_mode_matrix(rho)
    padded, work = _wigner_workspace(mat, abs(beta))
    return _wigner_from_padded(padded, work, complex(beta))


def _wigner_from_padded(padded, work, beta):
    dm = displacement(-beta, work, check=False)
    signs = (-1.0) ** np.arange(work)
    shifted = dm @ padded @ dm.conj().T
    val = (2.0 / np.pi) * np.sum(signs * np.diag(shifted))
    return float(val.real)


def wigner_grid(rho, xs, ys) -> np.ndarray:
    """W on the grid beta = x + i y; rows follow ``ys``, columns ``xs``."""
    mat = _single_mode_matrix(rho)
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    rmax = float(np.sqrt(np.max(np.abs(xs)) ** 2 + np.max(np.abs(ys)) ** 2)) if xs.size and ys.size else 0.0
    padded, work = _wigner_workspace(mat, rmax)
    out = np.empty((ys.size, xs.size))
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            out[i, j] = _wigner_from_padded(padded, work, complex(x, y))
    return out
