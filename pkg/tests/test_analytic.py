import math

import numpy as np
import pytest

from pielm_modes.analytic import (TABULATED_WAVENUMBERS, beam_exact_frequencies, beam_exact_mode,
                                  beam_wavenumbers, cavity_exact_mode, cavity_exact_spectrum,
                                  characteristic, frequency_errors)
from pielm_modes.problem import BeamProblem, BoundaryCondition

from reference_values import BEAM_REFERENCE, CAVITY_REFERENCE, WAVENUMBER_REFERENCE, five_digits, rounds_to

CLAMPED = ["fixed_fixed", "fixed_free"]


def beam(bc):
    return BeamProblem(210e9, 0.003 * 0.002**3 / 12, 7800.0, 0.003 * 0.002, 0.12, bc)


class TestWavenumbers:
    def test_simply_supported_exact(self):
        np.testing.assert_array_equal(beam_wavenumbers("simply_supported", 5), np.pi * np.arange(1, 6))

    @pytest.mark.parametrize("bc", CLAMPED)
    def test_refined_reproduce_printed_digits(self, bc):
        # agreement within one unit of the last printed digit; one entry is truncated, not rounded
        refined = beam_wavenumbers(bc, 5)
        for value, printed in zip(refined, WAVENUMBER_REFERENCE[bc]):
            unit = 10.0 ** -len(printed.split(".")[1])
            assert abs(value - float(printed)) < unit, (value, printed)
        assert sum(rounds_to(v, p) for v, p in zip(refined, WAVENUMBER_REFERENCE[bc])) >= 4

    @pytest.mark.parametrize("bc", CLAMPED)
    def test_characteristic_residual(self, bc):
        for beta in beam_wavenumbers(bc, 8):
            assert abs(characteristic(bc, beta)) <= 1e-12

    @pytest.mark.parametrize("bc", CLAMPED)
    def test_unscaled_equation(self, bc):
        target = 1.0 if bc == "fixed_fixed" else -1.0
        for beta in beam_wavenumbers(bc, 5):
            assert math.cos(beta) * math.cosh(beta) == pytest.approx(target, abs=1e-12 * math.cosh(beta))

    def test_fixed_fixed_fifth_root(self):
        assert beam_wavenumbers("fixed_fixed", 5)[-1] == pytest.approx(17.27875965739948, rel=1e-14)

    def test_roots_within_half_of_table(self):
        for bc, table in TABULATED_WAVENUMBERS.items():
            np.testing.assert_array_less(np.abs(beam_wavenumbers(bc, 5) - np.array(table)), 0.5)

    def test_beyond_table(self):
        beta = beam_wavenumbers("fixed_free", 7)
        assert np.all(np.diff(beta) > 0)
        assert beta[6] == pytest.approx(13 * np.pi / 2, rel=1e-8)
        with pytest.raises(ValueError):
            beam_wavenumbers("fixed_free", 6, refine=False)

    def test_unrefined_table(self):
        np.testing.assert_array_equal(beam_wavenumbers("fixed_free", 5, refine=False),
                                      TABULATED_WAVENUMBERS[BoundaryCondition.FIXED_FREE])


class TestBeamFrequencies:
    @pytest.mark.parametrize("bc,first", [("simply_supported", 2.0532e3), ("fixed_fixed", 4.6545e3),
                                          ("fixed_free", 7.3146e2)])
    def test_first_mode(self, bc, first):
        assert beam_exact_frequencies(beam(bc), 1)[0] == pytest.approx(first, rel=5e-5)

    @pytest.mark.parametrize("bc", sorted(BEAM_REFERENCE))
    def test_tables(self, bc):
        omega = beam_exact_frequencies(beam(bc), 5)
        assert [five_digits(w) for w in omega] == list(BEAM_REFERENCE[bc])

    def test_formula(self):
        prob = beam("simply_supported")
        omega = beam_exact_frequencies(prob, 3)
        np.testing.assert_allclose(omega, (np.arange(1, 4) * np.pi / 0.12) ** 2 * np.sqrt(0.42 / 0.0468),
                                   rtol=1e-14)


class TestBeamModes:
    @pytest.mark.parametrize("n", range(1, 6))
    def test_simply_supported_ends(self, n):
        assert abs(beam_exact_mode("simply_supported", n, 0.0, 0.12)) <= 1e-15
        assert abs(beam_exact_mode("simply_supported", n, 0.12, 0.12)) <= 1e-12

    def test_cantilever_clamped_end(self):
        L = 0.12
        h = 1e-7 * L
        assert abs(beam_exact_mode("fixed_free", 1, 0.0, L)) <= 1e-15
        slope = (beam_exact_mode("fixed_free", 1, h, L) - beam_exact_mode("fixed_free", 1, 0.0, L)) / h
        assert abs(slope * L) <= 1e-6

    def test_fixed_fixed_peak_at_midspan(self):
        x = np.linspace(0, 0.12, 2001)
        u = beam_exact_mode("fixed_fixed", 1, x, 0.12)
        assert np.argmax(np.abs(u)) == 1000
        assert abs(u[1000]) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("bc", ["simply_supported", "fixed_fixed", "fixed_free"])
    @pytest.mark.parametrize("n", range(1, 6))
    def test_own_boundary_conditions(self, bc, n):
        L = 0.12
        f = lambda x: beam_exact_mode(bc, n, np.asarray(x, dtype=float), L)
        h = 1e-3 * L
        # one-sided fourth-order stencils for the endpoint derivatives
        def d1(x0, s):
            return s * (-25 * f(x0) + 48 * f(x0 + s * h) - 36 * f(x0 + 2 * s * h)
                        + 16 * f(x0 + 3 * s * h) - 3 * f(x0 + 4 * s * h)) / (12 * h)
        def d2(x0, s):
            return (45 * f(x0) - 154 * f(x0 + s * h) + 214 * f(x0 + 2 * s * h) - 156 * f(x0 + 3 * s * h)
                    + 61 * f(x0 + 4 * s * h) - 10 * f(x0 + 5 * s * h)) / (12 * h**2)
        scale1, scale2 = 1.0 / L, 1.0 / L**2
        kappa = 5 * n  # derivative magnitudes grow with the wavenumber
        if bc == "simply_supported":
            checks = [abs(f(0.0)), abs(f(L)), abs(d2(0.0, 1)) / (kappa**2 * scale2), abs(d2(L, -1)) / (kappa**2 * scale2)]
            tol = [1e-9, 1e-9, 1e-4, 1e-4]
        elif bc == "fixed_fixed":
            checks = [abs(f(0.0)), abs(f(L)), abs(d1(0.0, 1)) / (kappa * scale1), abs(d1(L, -1)) / (kappa * scale1)]
            tol = [1e-9, 1e-9, 1e-6, 1e-6]
        else:
            checks = [abs(f(0.0)), abs(d1(0.0, 1)) / (kappa * scale1), abs(d2(L, -1)) / (kappa**2 * scale2)]
            tol = [1e-9, 1e-6, 1e-4]
        for value, t in zip(checks, tol):
            assert value <= t

    def test_normalized_on_reference_grid(self):
        x = np.linspace(0, 0.12, 2001)
        for bc in ("simply_supported", "fixed_fixed", "fixed_free"):
            for n in range(1, 6):
                assert np.max(np.abs(beam_exact_mode(bc, n, x, 0.12))) == pytest.approx(1.0, abs=1e-15)


class TestCavity:
    def test_first_mode(self):
        omega, label = cavity_exact_spectrum(5.0, 3.0, 340.0, 1)[0]
        assert label == (1, 0)
        assert omega == pytest.approx(340 * np.pi / 5, rel=1e-15)

    def test_table(self):
        spectrum = cavity_exact_spectrum(5.0, 3.0, 340.0, 5)
        assert [five_digits(w) for w, _ in spectrum] == list(CAVITY_REFERENCE)
        assert [lab for _, lab in spectrum] == [(1, 0), (0, 1), (1, 1), (2, 0), (2, 1)]

    def test_square_degeneracy(self):
        (w1, l1), (w2, l2) = cavity_exact_spectrum(2.0, 2.0, 1.0, 2)
        assert w1 == w2
        assert (l1, l2) == ((0, 1), (1, 0))

    def test_swap_invariance(self):
        a = [w for w, _ in cavity_exact_spectrum(5.0, 3.0, 340.0, 30)]
        b = [w for w, _ in cavity_exact_spectrum(3.0, 5.0, 340.0, 30)]
        np.testing.assert_allclose(a, b, rtol=1e-15)

    def test_large_aspect_ratio_stable(self):
        spectrum = cavity_exact_spectrum(100.0, 1.0, 1.0, 40)
        assert [lab for _, lab in spectrum[:40]] == [(m, 0) for m in range(1, 32)] + \
            [lab for _, lab in spectrum[31:40]]
        assert all(lab[1] == 0 for _, lab in spectrum[:31])

    def test_mode_shape(self):
        x = np.array([0.0, 2.5, 5.0])
        np.testing.assert_allclose(cavity_exact_mode(1, 0, x, np.zeros(3), 5.0, 3.0), [1.0, 0.0, -1.0], atol=1e-15)
        assert cavity_exact_mode(0, 0, 1.3, 0.7, 5.0, 3.0) == 1.0


class TestFrequencyErrors:
    def test_identical(self):
        a, r = frequency_errors([1.0, 2.0], [1.0, 2.0])
        np.testing.assert_array_equal(a, 0.0)
        np.testing.assert_array_equal(r, 0.0)

    def test_constructed(self):
        exact = np.array([213.6, 356.0, 415.2])
        _, rel = frequency_errors(exact * (1 + 1e-10), exact)
        np.testing.assert_allclose(rel, 1e-10, rtol=1e-5)

    def test_mismatch(self):
        with pytest.raises(ValueError):
            frequency_errors([1.0], [1.0, 2.0])
