import math
import warnings
from dataclasses import replace

import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal
from scipy.special import mathieu_a, mathieu_b

from hybrid_teleport import kerr
from hybrid_teleport.errors import AmbiguousBranch, ConvergenceError
from hybrid_teleport.kerr import CouplingSet, FluxoniumParams, TransmonParams

REFERENCE = CouplingSet.reference()
NO_COUPLING = REFERENCE.scaled(0.0)


@pytest.fixture(scope="module")
def tspec():
    return kerr.transmon_spectrum(TransmonParams())


@pytest.fixture(scope="module")
def fspec():
    return kerr.fluxonium_spectrum(FluxoniumParams())


def phase_grid_levels(p: FluxoniumParams, points: int, half_width=12 * math.pi):
    # finite differences in the phase representation, three lowest levels
    x = np.linspace(-half_width, half_width, points)
    h = x[1] - x[0]
    diag = 8 * p.EC / h**2 + 0.5 * p.EL * x**2 - p.EJ * np.cos(x - 2 * math.pi * p.flux_ext)
    off = -4 * p.EC / h**2 * np.ones(points - 1)
    w = eigh_tridiagonal(diag, off, select="i", select_range=(0, 2), eigvals_only=True)
    return w - w[0]


class TestTransmon:
    def test_matches_mathieu(self, tspec):
        # charge-basis transmon at ng = 0 maps onto Mathieu's equation with q = EJ / (2 EC)
        ej, ec = 38.0, 0.25
        q = ej / (2 * ec)
        e = ec * np.array([mathieu_a(0, q), mathieu_b(2, q), mathieu_a(2, q)])
        np.testing.assert_allclose(tspec.levels, e - e[0], atol=1e-7)

    def test_asymptotic_frequency(self, tspec):
        assert tspec.transition(0, 1) == pytest.approx(math.sqrt(8 * 38 * 0.25) - 0.25, rel=0.02)

    def test_deep_transmon_anharmonicity(self):
        p = TransmonParams(EJ=2500.0, EC=0.25, charge_cutoff=60)
        s = kerr.transmon_spectrum(p)
        assert s.transition(1, 2) - s.transition(0, 1) == pytest.approx(-0.25, rel=0.02)

    def test_parity_forbidden_element(self, tspec):
        assert abs(tspec.charge[0, 2]) < 1e-10
        assert abs(tspec.charge[0, 1]) > 1

    def test_cutoff_guard(self):
        with pytest.raises(ValueError):
            kerr.transmon_spectrum(TransmonParams(charge_cutoff=10))

    def test_regime_warning(self):
        with pytest.warns(UserWarning):
            TransmonParams(EJ=2.0, EC=0.25)

    def test_convergence_error(self):
        with pytest.raises(ConvergenceError):
            kerr.transmon_spectrum(TransmonParams(EJ=200.0, EC=0.01, charge_cutoff=20))


class TestFluxonium:
    def test_matches_phase_grid(self, fspec):
        # Richardson-extrapolate the O(h^2) grid error away
        p = FluxoniumParams()
        coarse, fine = phase_grid_levels(p, 6000), phase_grid_levels(p, 12000)
        np.testing.assert_allclose(fspec.levels, (4 * fine - coarse) / 3, atol=2e-6)

    @pytest.mark.parametrize("flux", [0.0, 0.5])
    def test_symmetric_points_forbid_02(self, flux):
        s = kerr.fluxonium_spectrum(FluxoniumParams(flux_ext=flux))
        assert abs(s.charge[0, 2]) < 1e-8

    def test_operating_point_allows_02(self, fspec):
        assert abs(fspec.charge[0, 2]) > 0.1

    def test_derived_ratios(self, fspec):
        g = kerr.calibrate(fspec, 0.038)
        lam = kerr.derive_couplings(fspec, g)
        assert lam[(0, 1)] == pytest.approx(0.038, rel=1e-12)
        for key, target in REFERENCE.fluxonium.items():
            assert lam[key] == pytest.approx(target, rel=0.25)

    @pytest.mark.parametrize("flux", np.linspace(-0.5, 0.5, 11))
    def test_ordered_levels(self, flux):
        s = kerr.fluxonium_spectrum(FluxoniumParams(flux_ext=float(flux)))
        assert s.levels[0] < s.levels[1] < s.levels[2]

    def test_basis_guard(self):
        with pytest.raises(ValueError):
            FluxoniumParams(basis_size=30)

    def test_convergence_error(self):
        # a very weak inductance spreads the wavefunction beyond 60 oscillator states
        with pytest.raises(ConvergenceError):
            kerr.fluxonium_spectrum(FluxoniumParams(EL=0.05, basis_size=60))

    def test_default_basis_converged(self, fspec):
        big = kerr.fluxonium_spectrum(replace(FluxoniumParams(), basis_size=160))
        np.testing.assert_allclose(fspec.levels, big.levels, atol=1e-6)


class TestHamiltonian:
    def test_uncoupled_spectrum(self, fspec, tspec):
        h = kerr.assemble_hamiltonian(fspec, tspec, NO_COUPLING, 9.2)
        expected = sorted(
            f + t + n * 9.2 for f in fspec.levels for t in tspec.levels for n in range(5)
        )
        np.testing.assert_allclose(np.linalg.eigvalsh(h.matrix), expected, atol=1e-10)

    def test_hermitian(self, fspec, tspec):
        h = kerr.assemble_hamiltonian(None, tspec, REFERENCE, 9.2)
        assert np.max(np.abs(h.matrix - h.matrix.conj().T)) < 1e-12
        h = kerr.assemble_hamiltonian(fspec, tspec, REFERENCE, 9.2)
        assert np.max(np.abs(h.matrix - h.matrix.conj().T)) < 1e-12
        assert h.dims == (3, 3, 5)

    def test_dressed_shift_bounded(self, fspec, tspec):
        res = kerr.kerr_for(fspec, tspec, REFERENCE)
        assert abs(res.dressed_energies[0]) < 0.1

    def test_photon_guard(self, tspec):
        with pytest.raises(ValueError):
            kerr.assemble_hamiltonian(None, tspec, REFERENCE, 9.2, n_photon_max=3)


class TestExtract:
    def test_zero_coupling(self, fspec, tspec):
        res = kerr.kerr_for(fspec, tspec, NO_COUPLING)
        assert abs(res.K) < 1e-6
        assert res.omega_tilde == pytest.approx(9.2, abs=1e-12)

    def test_definition(self, fspec, tspec):
        res = kerr.kerr_for(fspec, tspec, REFERENCE)
        e0, e1, e2 = res.dressed_energies
        assert res.K == pytest.approx((e2 - 2 * e1 + e0) * 1e6, rel=1e-12)

    def test_independent_fit(self, fspec, tspec):
        res = kerr.kerr_for(fspec, tspec, REFERENCE)
        w, k = kerr.fit_kerr(res.dressed_energies)
        assert k == pytest.approx(res.K, rel=1e-9)
        assert w == pytest.approx(res.omega_tilde, rel=1e-9)

    def test_ambiguous_at_resonance(self, tspec):
        with pytest.raises(AmbiguousBranch):
            kerr.kerr_for(None, tspec, REFERENCE, cavity_freq=tspec.transition(0, 1))

    def test_transmon_sign(self, tspec):
        assert kerr.kerr_for(None, tspec, REFERENCE).K < 0

    def test_fluxonium_sign(self, fspec):
        assert kerr.kerr_for(fspec, None, REFERENCE).K > 0

    def test_fourth_order_scaling(self, tspec, fspec):
        # informational: dispersive Kerr is fourth order in the coupling
        for spec_f, spec_t in ((None, tspec), (fspec, None)):
            full = kerr.kerr_for(spec_f, spec_t, REFERENCE).K
            for s in (0.25, 0.5):
                ratio = kerr.kerr_for(spec_f, spec_t, REFERENCE.scaled(s)).K / full
                if abs(ratio / s**4 - 1) > 0.2:
                    warnings.warn(f"K scaling at s={s} is {ratio / s**4:.3f} x s^4")


class TestSweep:
    def test_order_and_flags(self):
        grid = [0.03, 0.141, 0.02]
        pts = kerr.kerr_flux_sweep(FluxoniumParams(), TransmonParams(), 9.2, grid)
        assert [p.flux for p in pts] == grid
        assert pts[0].result is None and pts[0].error.startswith("AmbiguousBranch")
        assert pts[1].result is not None and pts[1].error == ""

    def test_parallel_matches_serial(self):
        grid = np.linspace(0.12, 0.16, 5)
        serial = kerr.kerr_flux_sweep(FluxoniumParams(), TransmonParams(), 9.2, grid)
        par = kerr.kerr_flux_sweep(FluxoniumParams(), TransmonParams(), 9.2, grid, jobs=3)
        assert [p.result.K for p in serial] == [p.result.K for p in par]

    def test_derived_reference_matches_explicit_lambda01(self):
        pt = kerr.kerr_flux_sweep(FluxoniumParams(), TransmonParams(), 9.2, [0.141])[0]
        assert pt.couplings[(0, 1)] == pytest.approx(0.038, rel=1e-12)

    def test_explicit_mode_uses_fixed(self):
        cal = kerr.Calibration(mode="explicit")
        pt = kerr.kerr_flux_sweep(FluxoniumParams(), TransmonParams(), 9.2, [0.2], cal)[0]
        assert pt.couplings == REFERENCE.fluxonium

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            kerr.Calibration(mode="guess")
