"""Cavity self-Kerr from a fluxonium-cavity-transmon Hamiltonian.

Energies are in GHz (h = 1); Kerr coefficients are reported in kHz.  Each
qubit is pre-diagonalised and truncated to its lowest three levels, then
coupled to the cavity through

    sum_{j<k} lambda_jk (|k><j| a + |j><k| a^dag)

and the dressed 0, 1, 2 photon ladder on the joint qubit ground state
gives K = E2 - 2 E1 + E0.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import AmbiguousBranch, ConvergenceError, DimensionMismatch

KHZ_PER_GHZ = 1e6
LEVEL_TOL_GHZ = 1e-6  # 1 kHz

PAIRS = ((0, 1), (0, 2), (1, 2))


@dataclass(frozen=True)
class TransmonParams:
    EJ: float = 38.0
    EC: float = 0.25
    charge_cutoff: int = 25
    n_levels_kept: int = 3
    ng: float = 0.0

    def __post_init__(self):
        if self.n_levels_kept < 3:
            raise ValueError("keep at least three transmon levels")
        if self.EJ / self.EC < 20:
            warnings.warn(f"EJ/EC = {self.EJ / self.EC:.3g} is below the transmon regime", stacklevel=2)


@dataclass(frozen=True)
class FluxoniumParams:
    EJ: float = 8.5
    EC: float = 3.0
    EL: float = 0.5
    flux_ext: float = 0.141
    basis_size: int = 80
    n_levels_kept: int = 3

    def __post_init__(self):
        if self.EL <= 0:
            raise ValueError("EL must be positive")
        if self.basis_size < 60:
            raise ValueError("basis_size must be >= 60")
        if self.n_levels_kept < 3:
            raise ValueError("keep at least three fluxonium levels")


@dataclass(frozen=True)
class QubitSpectrum:
    """Lowest levels (ground at 0) and charge matrix elements between them."""

    levels: np.ndarray
    charge: np.ndarray

    def transition(self, j: int, k: int) -> float:
        return float(self.levels[k] - self.levels[j])


@dataclass(frozen=True)
class CouplingSet:
    """lambda_jk in GHz for each qubit ('F', 'T'), keyed by (j, k) with j < k."""

    fluxonium: dict = field(default_factory=dict)
    transmon: dict = field(default_factory=dict)
    provenance: str = "explicit"

    @classmethod
    def reference(cls) -> "CouplingSet":
        return cls(
            fluxonium={(0, 1): 0.038, (1, 2): 0.054, (0, 2): 0.122},
            transmon={(0, 1): 0.10, (1, 2): 0.141, (0, 2): 0.0},
        )

    def scaled(self, s: float) -> "CouplingSet":
        return replace(
            self,
            fluxonium={k: s * v for k, v in self.fluxonium.items()},
            transmon={k: s * v for k, v in self.transmon.items()},
        )

    def matrix(self, which: str) -> np.ndarray:
        table = self.fluxonium if which == "F" else self.transmon
        out = np.zeros((3, 3))
        for (j, k), v in table.items():
            if not j < k <= 2:
                raise ValueError(f"coupling index {(j, k)} must satisfy j < k <= 2")
            out[j, k] = v
        return out


@dataclass(frozen=True)
class KerrResult:
    omega_tilde: float
    K: float
    dressed_energies: tuple
    overlaps: tuple = ()


@dataclass(frozen=True)
class CoupledHamiltonian:
    matrix: np.ndarray
    labels: tuple
    dims: tuple

    def bare_index(self, photons: int) -> int:
        idx = [0] * len(self.dims)
        idx[-1] = photons
        return int(np.ravel_multi_index(tuple(idx), self.dims))


# --- qubit spectra ------------------------------------------------------------


def _transmon_diag(p: TransmonParams, cutoff: int):
    n = np.arange(-cutoff, cutoff + 1, dtype=float)
    h = np.diag(4.0 * p.EC * (n - p.ng) ** 2)
    off = -0.5 * p.EJ * np.ones(2 * cutoff)
    h += np.diag(off, 1) + np.diag(off, -1)
    e, v = np.linalg.eigh(h)
    return e, v, np.diag(n - p.ng)


def transmon_spectrum(p: TransmonParams, check_convergence: bool = True) -> QubitSpectrum:
    """Charge-basis transmon levels and charge matrix elements."""
    if p.charge_cutoff < 20:
        raise ValueError("charge_cutoff must be >= 20")
    e, v, nop = _transmon_diag(p, p.charge_cutoff)
    if check_convergence:
        e2, _, _ = _transmon_diag(p, 2 * p.charge_cutoff)
        shift = abs((e2[1] - e2[0]) - (e[1] - e[0]))
        if shift > LEVEL_TOL_GHZ:
            raise ConvergenceError(f"transmon omega_01 moved {shift * KHZ_PER_GHZ:.3g} kHz on doubling cutoff")
    m = p.n_levels_kept
    vk = v[:, :m]
    return QubitSpectrum(e[:m] - e[0], vk.T @ nop @ vk)


def _fluxonium_diag(p: FluxoniumParams, size: int):
    a = np.diag(np.sqrt(np.arange(1, size, dtype=float)), 1)
    phi_zpf = (8.0 * p.EC / p.EL) ** 0.25
    phi = phi_zpf * (a + a.T) / math.sqrt(2.0)
    charge = 1j * (a.T - a) / (math.sqrt(2.0) * phi_zpf)
    # functions of phi through its own eigenbasis (exact for the truncated matrix)
    x, w = np.linalg.eigh(phi)
    cos_term = (w * np.cos(x - 2.0 * math.pi * p.flux_ext)) @ w.T
    omega_p = math.sqrt(8.0 * p.EC * p.EL)
    h_osc = omega_p * np.diag(np.arange(size) + 0.5)
    h = h_osc - p.EJ * cos_term
    e, v = np.linalg.eigh(h)
    return e, v, charge


def fluxonium_spectrum(p: FluxoniumParams, check_convergence: bool = True) -> QubitSpectrum:
    """Fluxonium levels in the oscillator basis of its inductive-capacitive part.

    H = 4 EC n^2 + EL phi^2 / 2 - EJ cos(phi - 2 pi flux_ext), flux_ext in
    units of the flux quantum.
    """
    e, v, charge = _fluxonium_diag(p, p.basis_size)
    m = p.n_levels_kept
    if check_convergence:
        e2, _, _ = _fluxonium_diag(p, 2 * p.basis_size)
        shift = np.max(np.abs((e2[:m] - e2[0]) - (e[:m] - e[0])))
        if shift > LEVEL_TOL_GHZ:
            raise ConvergenceError(f"fluxonium levels moved {shift * KHZ_PER_GHZ:.3g} kHz on doubling basis")
    vk = v[:, :m]
    return QubitSpectrum(e[:m] - e[0], vk.conj().T @ charge @ vk)


def derive_couplings(spec: QubitSpectrum, g: float) -> dict:
    """lambda_jk = g |n_jk| over the three lowest levels."""
    return {(j, k): float(g * abs(spec.charge[j, k])) for j, k in PAIRS}


def calibrate(spec: QubitSpectrum, lambda01: float) -> float:
    """Coupling constant g that reproduces ``lambda01`` on this spectrum."""
    return lambda01 / abs(spec.charge[0, 1])


# --- coupled system -----------------------------------------------------------


def _as_spectrum(q):
    if q is None or isinstance(q, QubitSpectrum):
        return q
    if isinstance(q, TransmonParams):
        return transmon_spectrum(q)
    if isinstance(q, FluxoniumParams):
        return fluxonium_spectrum(q)
    raise TypeError(f"cannot build a spectrum from {type(q).__name__}")


def assemble_hamiltonian(fp, tp, couplings: CouplingSet, cavity_freq: float,
                         n_photon_max: int = 4) -> CoupledHamiltonian:
    """Fluxonium (x) transmon (x) cavity Hamiltonian.

    ``fp`` / ``tp`` are parameter sets, precomputed spectra, or None to leave
    that qubit out entirely.  Only the three lowest levels of each qubit
    enter.
    """
    if n_photon_max < 4:
        raise ValueError("n_photon_max must be >= 4")
    qubits = [(lab, _as_spectrum(q)) for lab, q in (("F", fp), ("T", tp)) if q is not None]
    nc = n_photon_max + 1
    dims = tuple([3] * len(qubits) + [nc])
    labels = tuple([lab for lab, _ in qubits] + ["C"])
    a = np.diag(np.sqrt(np.arange(1, nc, dtype=float)), 1)
    eye3, eyec = np.eye(3), np.eye(nc)

    def embed(local: dict) -> np.ndarray:
        out = np.array([[1.0]])
        for lab in labels:
            out = np.kron(out, local.get(lab, eye3 if lab != "C" else eyec))
        return out

    h = embed({"C": cavity_freq * np.diag(np.arange(nc, dtype=float))})
    for lab, spec in qubits:
        if len(spec.levels) < 3:
            raise DimensionMismatch(f"qubit {lab} needs three levels")
        h += embed({lab: np.diag(spec.levels[:3])})
        lam = couplings.matrix(lab)
        for j, k in PAIRS:
            if lam[j, k] == 0.0:
                continue
            raise_op = np.zeros((3, 3))
            raise_op[k, j] = 1.0
            term = embed({lab: raise_op, "C": a})
            h += lam[j, k] * (term + term.T)
    return CoupledHamiltonian(h, labels, dims)


def extract_kerr(h: CoupledHamiltonian, cavity_freq: float | None = None) -> KerrResult:
    """Dressed photon ladder on the qubit ground state and its Kerr coefficient.

    Each of |0..0, n>, n = 0, 1, 2, is matched to the eigenvector with the
    largest overlap; AmbiguousBranch is raised if that overlap is below 1/2.
    """
    evals, evecs = np.linalg.eigh(h.matrix)
    energies, overlaps, used = [], [], set()
    for n in range(3):
        weights = np.abs(evecs[h.bare_index(n), :]) ** 2
        m = int(np.argmax(weights))
        if weights[m] < 0.5 or m in used:
            raise AmbiguousBranch(f"{n}-photon branch has max bare overlap {weights[m]:.3f}")
        used.add(m)
        energies.append(float(evals[m]))
        overlaps.append(float(weights[m]))
    e0, e1, e2 = energies
    k_ghz = e2 - 2.0 * e1 + e0
    return KerrResult(e1 - e0 - 0.5 * k_ghz, k_ghz * KHZ_PER_GHZ, tuple(energies), tuple(overlaps))


def fit_kerr(energies) -> tuple[float, float]:
    """Least-squares fit of E0 + w n + (K/2) n^2; returns (w in GHz, K in kHz)."""
    n = np.arange(len(energies), dtype=float)
    c2, c1, _ = np.polyfit(n, np.asarray(energies, dtype=float), 2)
    return float(c1), float(2.0 * c2 * KHZ_PER_GHZ)


def kerr_for(fp, tp, couplings: CouplingSet, cavity_freq: float = 9.2, n_photon_max: int = 4) -> KerrResult:
    return extract_kerr(assemble_hamiltonian(fp, tp, couplings, cavity_freq, n_photon_max), cavity_freq)


# --- flux sweep ---------------------------------------------------------------


@dataclass(frozen=True)
class Calibration:
    """How couplings follow the flux.

    ``mode='derived'``: fluxonium lambda_jk = g_F |n_jk(flux)| with g_F fixed
    so lambda_01 equals ``fluxonium_lambda01`` at ``reference_flux``.
    ``mode='explicit'``: the fluxonium couplings stay at ``fixed`` for every
    flux.  Transmon couplings are always ``transmon`` (flux independent).
    """

    mode: str = "derived"
    reference_flux: float = 0.141
    fluxonium_lambda01: float = 0.038
    transmon: dict = field(default_factory=lambda: dict(CouplingSet.reference().transmon))
    fixed: dict = field(default_factory=lambda: dict(CouplingSet.reference().fluxonium))

    def __post_init__(self):
        if self.mode not in ("derived", "explicit"):
            raise ValueError(f"unknown calibration mode {self.mode!r}")


@dataclass(frozen=True)
class SweepPoint:
    flux: float
    result: KerrResult | None
    couplings: dict = field(default_factory=dict)
    error: str = ""


def _sweep_point(args) -> SweepPoint:
    fp_template, tspec, cavity_freq, flux, cal, g_f, n_photon_max = args
    try:
        fspec = fluxonium_spectrum(replace(fp_template, flux_ext=flux))
        lam_f = derive_couplings(fspec, g_f) if cal.mode == "derived" else dict(cal.fixed)
        cs = CouplingSet(fluxonium=lam_f, transmon=dict(cal.transmon), provenance=cal.mode)
        res = kerr_for(fspec, tspec, cs, cavity_freq, n_photon_max)
        return SweepPoint(flux, res, lam_f)
    except (AmbiguousBranch, ConvergenceError) as exc:
        return SweepPoint(flux, None, {}, f"{type(exc).__name__}: {exc}")


def kerr_flux_sweep(fp_template: FluxoniumParams, tp: TransmonParams, cavity_freq: float,
                    flux_grid, calibration: Calibration | None = None, n_photon_max: int = 4,
                    jobs: int = 1) -> list[SweepPoint]:
    """K(flux) with per-point fluxonium re-diagonalisation.

    Failing points come back flagged (``error`` set, ``result`` None); the
    sweep itself never aborts on them.  Output order follows ``flux_grid``.
    """
    cal = calibration or Calibration()
    tspec = transmon_spectrum(tp)
    g_f = 0.0
    if cal.mode == "derived":
        ref = fluxonium_spectrum(replace(fp_template, flux_ext=cal.reference_flux))
        g_f = calibrate(ref, cal.fluxonium_lambda01)
    tasks = [(fp_template, tspec, cavity_freq, float(f), cal, g_f, n_photon_max) for f in flux_grid]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_point, tasks))
    return [_sweep_point(t) for t in tasks]
