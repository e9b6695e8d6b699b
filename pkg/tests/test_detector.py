"""
Tests for the lambda sweep, classification, calibration and maps
"""
import numpy as np
import pytest

from models.errors import (
    CalibrationGapTooSmall,
    ContractError,
    StabilityViolation,
    SweepTooShort,
    UnderResolved,
)
from models.results import Classification, DecayFit, PhasePoint, Threshold, WptValue
from processing.detector import (
    SweepConfig,
    calibrate_threshold,
    calibration_sweeps,
    classify,
    coefficient_i,
    coefficient_ii,
    decay_sweep,
    equivalence_report,
    principal_term,
    state_at_time,
    threshold_from_exponents,
    wf_map,
)
from processing.propagator import WindowSpec
from providers.data import backward_evolved_jump_datum, evolved


def _power_law(n):
    """Evaluator with |W| = lam^-n and unit integrand mass"""
    return lambda lam: WptValue(value=lam ** -n, error=0.0, scale=1.0)


def _fit(exponent=5.0, r2=1.0, floor_lambda=None, underflow=False):
    return DecayFit(lambdas=np.ones(6), magnitudes=np.ones(6), exponent=exponent, r2=r2,
                    classification=Classification.INDETERMINATE, floor_lambda=floor_lambda, underflow=underflow)


class TestSweepConfig:
    """Sweep validation"""

    def test_defaults(self):
        cfg = SweepConfig()
        assert cfg.lambdas()[0] == pytest.approx(1.0)
        assert cfg.lambdas()[-1] == pytest.approx(64.0)
        assert len(cfg.lambdas()) == 13

    def test_too_short(self):
        with pytest.raises(SweepTooShort):
            SweepConfig(1.0, 64.0, 5)

    @pytest.mark.parametrize("lo,hi", [(0.5, 64.0), (8.0, 8.0), (16.0, 4.0)])
    def test_bad_range(self, lo, hi):
        with pytest.raises(ContractError):
            SweepConfig(lo, hi, 13)


class TestClassify:
    """Decision rules in order"""

    def test_underflow_first(self):
        assert classify(_fit(underflow=True, floor_lambda=4.0), 4.0) == Classification.INDETERMINATE

    def test_floor_is_regular(self):
        assert classify(_fit(exponent=0.5, r2=0.1, floor_lambda=8.0), 4.0) == Classification.REGULAR

    def test_r2_gate(self):
        assert classify(_fit(exponent=1.0, r2=0.85), 4.0) == Classification.INDETERMINATE

    @pytest.mark.parametrize("exponent,expected", [
        (4.0, Classification.REGULAR),
        (9.0, Classification.REGULAR),
        (2.0, Classification.SINGULAR),
        (0.5, Classification.SINGULAR),
        (3.0, Classification.INDETERMINATE),
    ])
    def test_threshold_and_margin(self, exponent, expected):
        assert classify(_fit(exponent=exponent), 4.0, 2.0) == expected

    def test_nan_exponent(self):
        assert classify(_fit(exponent=float("nan")), 4.0) == Classification.INDETERMINATE


class TestDecaySweep:
    """Sweeps on synthetic evaluators"""

    def test_power_law_exponent(self, sweep):
        fit = decay_sweep(_power_law(5.0), sweep)
        assert fit.exponent == pytest.approx(5.0)
        assert fit.r2 == pytest.approx(1.0)
        assert fit.fit_count == 6
        assert fit.classification == Classification.SINGULAR

    def test_fast_power_law_is_regular(self, sweep):
        fit = decay_sweep(_power_law(5.0), sweep, threshold=Threshold(4.0, 1.0))
        assert fit.classification == Classification.REGULAR

    def test_no_threshold(self):
        fit = decay_sweep(_power_law(3.0), SweepConfig(1.0, 64.0, 13))
        assert fit.exponent == pytest.approx(3.0)
        assert fit.classification == Classification.INDETERMINATE

    def test_resolution_floor_stops_sweep(self, sweep):
        fit = decay_sweep(_power_law(20.0), sweep)
        assert fit.floor_lambda is not None
        assert fit.lambdas.size < 13
        assert fit.classification == Classification.REGULAR

    def test_underflow(self, sweep):
        fit = decay_sweep(lambda lam: WptValue(value=0.0, error=0.0, scale=0.0), sweep)
        assert fit.underflow
        assert np.isnan(fit.exponent)
        assert fit.classification == Classification.INDETERMINATE

    def test_noisy_decay_fails_gate(self, sweep):
        def zigzag(lam):
            k = int(round(2.0 * np.log2(lam)))
            return WptValue(value=1e-3 if k % 2 else 1.0, error=0.0, scale=1.0)

        fit = decay_sweep(zigzag, sweep)
        assert fit.r2 < 0.9
        assert fit.classification == Classification.INDETERMINATE

    def test_truncated_sweep(self, sweep):
        def limited(lam):
            if lam > 4.5:
                raise UnderResolved("too fine")
            return WptValue(value=lam ** -1.0, error=0.0, scale=1.0)

        fit = decay_sweep(limited, sweep)
        assert fit.lambdas.size == 5
        assert fit.exponent == pytest.approx(1.0)
        assert fit.classification == Classification.INDETERMINATE

    def test_point_recorded(self, sweep, origin):
        fit = decay_sweep(_power_law(2.0), sweep, origin)
        assert fit.point == origin
        assert fit.summary()["class"] == "Singular"


class TestCalibration:
    """Threshold placement"""

    def test_midpoint_and_margin(self):
        threshold = threshold_from_exponents(8.0, 0.0)
        assert threshold == Threshold(n_thr=4.0, margin=2.0)

    @pytest.mark.parametrize("smooth,singular", [(3.0, 2.0), (1.0, 2.0), (float("nan"), 1.0)])
    def test_gap_too_small(self, smooth, singular):
        with pytest.raises(CalibrationGapTooSmall):
            threshold_from_exponents(smooth, singular)

    @pytest.mark.slow
    def test_canonical_cases(self, window):
        threshold = calibrate_threshold(window)
        assert 0.5 < threshold.n_thr
        assert threshold.margin >= 0.5

    @pytest.mark.slow
    def test_canonical_fits(self, window):
        """Both canonical sweeps fit cleanly and the threshold sits strictly between them"""
        smooth, singular = calibration_sweeps(window, SweepConfig())
        threshold = threshold_from_exponents(smooth.exponent, singular.exponent)
        assert smooth.r2 >= 0.9
        assert singular.r2 >= 0.9
        assert 0.6 < singular.exponent < 1.1
        assert smooth.exponent > 30.0
        assert threshold.n_thr - threshold.margin > singular.exponent
        assert threshold.n_thr < smooth.exponent

    @pytest.mark.slow
    def test_bump_gap_too_small(self):
        with pytest.raises(CalibrationGapTooSmall):
            calibrate_threshold(WindowSpec.named("bump"))

    @pytest.mark.slow
    def test_sech2_gap(self):
        smooth, singular = calibration_sweeps(WindowSpec.named("sech2"), SweepConfig())
        assert smooth.exponent - singular.exponent >= 2.0


class TestCriteria:
    """Coefficients on the built-in data"""

    @pytest.mark.slow
    def test_jump_is_singular_at_origin(self, jump, window, sweep, origin):
        fit = decay_sweep(lambda lam: coefficient_i(jump, origin, lam, window), sweep, origin)
        assert fit.exponent < 2.0
        assert fit.classification == Classification.SINGULAR

    @pytest.mark.slow
    def test_jump_is_regular_away_from_origin(self, jump, window, sweep):
        point = PhasePoint(2.0, 1.0)
        fit = decay_sweep(lambda lam: coefficient_i(jump, point, lam, window), sweep, point)
        assert fit.classification == Classification.REGULAR

    @pytest.mark.slow
    def test_gaussian_is_regular(self, gaussian, window, sweep, origin):
        fit = decay_sweep(lambda lam: coefficient_i(gaussian, origin, lam, window), sweep, origin)
        assert fit.exponent > sweep.threshold.n_thr
        assert fit.classification != Classification.SINGULAR

    @pytest.mark.slow
    def test_conic_scaling(self, jump, window, sweep, origin):
        """Doubling xi and halving the lambda range covers the same frequencies"""
        doubled = PhasePoint(0.0, 2.0)
        short = SweepConfig(1.0, 32.0, 13, sweep.threshold)
        base = decay_sweep(lambda lam: coefficient_i(jump, origin, lam, window), sweep, origin)
        scaled = decay_sweep(lambda lam: coefficient_i(jump, doubled, lam, window), short, doubled)
        assert base.classification == Classification.SINGULAR
        assert scaled.classification == Classification.SINGULAR
        assert scaled.exponent == pytest.approx(base.exponent, abs=0.15)

    @pytest.mark.slow
    def test_smooth_magnitudes_decrease(self, gaussian, window, sweep, origin):
        fit = decay_sweep(lambda lam: coefficient_i(gaussian, origin, lam, window), sweep, origin)
        tail = fit.magnitudes[fit.lambdas > 4.0]
        assert tail.size >= 2
        assert np.all(tail[1:] <= 1.05 * tail[:-1])

    @pytest.mark.slow
    @pytest.mark.parametrize("base", ["gaussian", "sech2"])
    def test_jump_singular_for_every_window(self, jump, sweep, origin, base, window_d):
        spec = WindowSpec.named(base, window_d)
        fit = decay_sweep(lambda lam: coefficient_i(jump, origin, lam, spec), sweep, origin)
        assert fit.classification == Classification.SINGULAR
        assert fit.exponent == pytest.approx(1.0 - 0.5 * window_d, abs=0.15)

    @pytest.mark.parametrize("lam", [1.0, 2.0, 4.0])
    def test_principal_term_reproduces_free_flow(self, gaussian, zero_coeff, window, lam):
        """For a == 0 the transported term equals criterion (i) on the evolved datum"""
        point = PhasePoint(0.5, 1.0)
        direct = coefficient_i(evolved(gaussian, 0.3), point, lam, window).value
        transported = principal_term(gaussian, zero_coeff, 0.3, point, lam, window).value
        assert abs(direct - transported) <= 1e-9

    def test_traced_position_recorded(self, gaussian, zero_coeff, window):
        value = coefficient_ii(gaussian, zero_coeff, 0.3, PhasePoint(0.5, 1.0), 2.0, window)
        assert value.x == pytest.approx(0.5 + 3.0 * 4.0 * 0.3)

    def test_inadmissible_window(self, gaussian, soliton):
        with pytest.raises(ContractError):
            coefficient_ii(gaussian, soliton, 0.3, PhasePoint(0.0, 1.0), 2.0, WindowSpec.named("gaussian", 0.25))


class TestStateAtTime:
    """u(t0) for the equivalence report"""

    def test_zero_time(self, gaussian, soliton):
        assert state_at_time(gaussian, soliton, 0.0) is gaussian

    def test_free_flow_is_exact(self, gaussian, zero_coeff):
        state = state_at_time(gaussian, zero_coeff, 0.3)
        assert state.has_spectrum
        assert np.allclose(state.transform(np.array([0.5, 2.0])),
                           evolved(gaussian, 0.3).transform(np.array([0.5, 2.0])))

    def test_needs_grid(self, gaussian, soliton):
        with pytest.raises(ContractError):
            state_at_time(gaussian, soliton, 0.3)

    def test_solver_output(self, gaussian, soliton, small_grid):
        state = state_at_time(gaussian, soliton, 0.01, small_grid)
        assert state.is_field
        assert state.name.endswith("@0.01")


class TestMapsAndReports:
    """WF maps and the equivalence report"""

    def test_map_needs_threshold(self, jump, window):
        with pytest.raises(ContractError):
            wf_map(jump, [0.0], [1.0], window, SweepConfig(1.0, 64.0, 13))

    def test_report_needs_threshold(self, jump, zero_coeff, window, origin):
        with pytest.raises(ContractError):
            equivalence_report(jump, zero_coeff, 0.3, [origin], window, SweepConfig(1.0, 64.0, 13))

    def test_failed_cell_is_recorded(self, jump, window, sweep, mocker):
        mocker.patch("processing.detector.decay_sweep", side_effect=StabilityViolation("boom"))
        result = wf_map(jump, [0.0, 1.0], [1.0], window, sweep)
        cells = result.flat()
        assert len(cells) == 2
        assert all(c.classification == Classification.INDETERMINATE for c in cells)
        assert all(c.error == "boom" for c in cells)

    @pytest.mark.slow
    def test_jump_map(self, jump, window, sweep):
        result = wf_map(jump, [0.0, 2.0], [1.0, -1.0], window, sweep, threads=2)
        classes = result.classes()
        assert classes.shape == (2, 2)
        assert list(classes[0]) == ["Singular", "Singular"]
        assert list(classes[1]) == ["Regular", "Regular"]

    @pytest.mark.slow
    def test_free_flow_report_agrees(self, gaussian, zero_coeff, window, sweep):
        points = [PhasePoint(0.0, 1.0), PhasePoint(1.0, -1.0)]
        report = equivalence_report(gaussian, zero_coeff, 0.3, points, window, sweep)
        assert [r.point for r in report.records] == points
        assert report.threshold == sweep.threshold
        assert report.agreement_fraction in (None, 1.0)


class TestEquivalenceSuite:
    """Both criteria on the free-flow suite at t0 = 0.3"""

    @pytest.mark.slow
    def test_scheduled_singularity_forms(self, zero_coeff, window, sweep, origin):
        report = equivalence_report(backward_evolved_jump_datum(0.3), zero_coeff, 0.3, [origin], window, sweep)
        record = report.records[0]
        assert record.class_i == Classification.SINGULAR
        assert record.class_ii == Classification.SINGULAR
        assert report.agreement_fraction == 1.0

    @pytest.mark.slow
    def test_jump_is_smoothed(self, jump, zero_coeff, window, sweep, origin):
        report = equivalence_report(jump, zero_coeff, 0.3, [origin], window, sweep)
        record = report.records[0]
        assert record.class_i == Classification.REGULAR
        assert record.class_ii == Classification.REGULAR
