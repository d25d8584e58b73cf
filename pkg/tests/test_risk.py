import math

import numpy as np
import pytest

from ordest.commands import boundary_estimator, lambda_grid
from ordest.errors import DomainError
from ordest.estimators.ierd import bz_absolute, bz_squared
from ordest.estimators.stein import blee, isotonic, restricted_mle
from ordest.models.loss import absolute_loss, squared_loss
from ordest.models.normal import NormalLocationModel
from ordest.models.parameters import ThetaPoint
from ordest.numerics import std_normal_pdf
from ordest.risk import dominance_report, exact_report, exact_risk, mc_risk, r_lambda


@pytest.fixture(scope="module")
def unit_model() -> NormalLocationModel:
    return NormalLocationModel(sigma=1.0, rho=0.0)


@pytest.fixture(scope="module")
def correlated_model() -> NormalLocationModel:
    return NormalLocationModel(sigma=math.sqrt(0.418), rho=0.626)


PANELS = [(0.2, -0.9), (2.0, -0.5), (1.0, 0.0), (0.5, 0.2), (1.0, 0.5), (10.0, 0.9)]
LOSSES = [squared_loss(), absolute_loss()]


def _blee_level(sigma: float, loss_name: str) -> float:
    if loss_name == "squared":
        return 2.0 * sigma**2
    return 2.0 * sigma * math.sqrt(2.0 / math.pi)


def _isotonic_risk_at_zero(alpha: float) -> float:
    # 2 - 2 alpha (1 - alpha) E[D^2; D < 0] with E[D^2; D < 0] = tau^2 / 2 = 1
    return 2.0 - 2.0 * alpha * (1.0 - alpha)


class TestRLambda:
    def test_squared_closed_form(self, unit_model):
        """Under squared loss r is the slice density times a shifted second moment."""
        u = 0.5 - 0.2
        tau = unit_model.tau
        expected = std_normal_pdf(u / tau) / tau * ((-0.5 * u - 0.3) ** 2 + 0.5)
        value = r_lambda(unit_model, squared_loss(), 0.3, 0.5, 0.2)
        assert value == pytest.approx(expected, rel=1e-8)

    def test_minimized_at_conditional_mean(self, correlated_model):
        """For fixed t the squared-loss r is smallest at c = -(t - lambda)/2."""
        t, lam = 0.4, 1.0
        centre = -0.5 * (t - lam)
        best = r_lambda(correlated_model, squared_loss(), centre, t, lam)
        for c in (centre - 0.1, centre + 0.1):
            assert r_lambda(correlated_model, squared_loss(), c, t, lam) > best

    @pytest.mark.parametrize("loss", LOSSES, ids=["squared", "absolute"])
    def test_grid_minimizer(self, unit_model, loss):
        """The minimizing c on a 0.02 grid sits next to (lambda - t) / 2."""
        cs = np.arange(-2.0, 2.0 + 1e-9, 0.02)
        for t in np.linspace(-1.0, 1.0, 5):
            for lam in np.linspace(0.0, 1.0, 5):
                values = [r_lambda(unit_model, loss, c, t, lam) for c in cs]
                best = cs[int(np.argmin(values))]
                assert abs(best - 0.5 * (lam - t)) <= 0.02 + 1e-9

    def test_negative_lambda(self, unit_model):
        """lambda = theta2 - theta1 is non-negative on the restricted space."""
        with pytest.raises(DomainError):
            r_lambda(unit_model, squared_loss(), 0.0, 0.0, -0.1)


class TestExactRisk:
    @pytest.mark.parametrize("lam", [0.0, 1.5])
    def test_blee_squared(self, unit_model, lam):
        """The BLEE has constant risk 2 sigma^2 under squared loss."""
        assert exact_risk(unit_model, lam, blee(), squared_loss()) == pytest.approx(2.0, abs=1e-6)

    def test_blee_absolute(self, unit_model):
        """Under absolute loss the BLEE risk is 2 E|Z| = 2 sqrt(2 / pi)."""
        risk = exact_risk(unit_model, 0.0, blee(), absolute_loss())
        assert risk == pytest.approx(2.0 * math.sqrt(2.0 / math.pi), abs=1e-6)

    @pytest.mark.parametrize("alpha", [0.5, 0.75, 1.0])
    def test_isotonic_at_zero(self, unit_model, alpha):
        """Closed-form risk of partial pooling at lambda = 0."""
        risk = exact_risk(unit_model, 0.0, isotonic(alpha), squared_loss())
        assert risk == pytest.approx(_isotonic_risk_at_zero(alpha), abs=1e-6)

    def test_mle_at_zero(self, unit_model):
        """The MLE saves E[D^2 / 2; D < 0] = 1/2 over the BLEE at lambda = 0."""
        risk = exact_risk(unit_model, 0.0, restricted_mle(), squared_loss())
        assert risk == pytest.approx(1.5, abs=1e-6)

    def test_bz_matches_blee_at_boundary(self, correlated_model):
        """At lambda = 0 the boundary estimator and the BLEE have equal risk."""
        blee_risk = exact_risk(correlated_model, 0.0, blee(), squared_loss())
        bz_risk = exact_risk(correlated_model, 0.0, bz_squared(correlated_model), squared_loss())
        assert bz_risk == pytest.approx(blee_risk, abs=1e-7)

    @pytest.mark.parametrize("lam", [0.5, 1.0])
    def test_bz_dominates_blee(self, correlated_model, lam):
        """Inside the restricted space the boundary estimator is strictly better."""
        blee_risk = exact_risk(correlated_model, lam, blee(), squared_loss())
        bz_risk = exact_risk(correlated_model, lam, bz_squared(correlated_model), squared_loss())
        assert bz_risk < blee_risk - 1e-6

    def test_isotonic_ordering(self, correlated_model):
        """Risk grows with alpha between the MLE and the BLEE."""
        risks = [
            exact_risk(correlated_model, 0.3, isotonic(alpha), squared_loss())
            for alpha in (0.5, 0.75, 1.0)
        ]
        assert risks[0] < risks[1] < risks[2]


class TestMonteCarloRisk:
    def test_blee_squared(self, unit_model):
        """The sample mean lies within four standard errors of 2."""
        result = mc_risk(unit_model, ThetaPoint.canonical(0.0), blee(), squared_loss(), 20_000, 1)
        assert abs(result.mean - 2.0) < 4.0 * result.std_error
        assert result.n == 20_000
        assert result.loss == "squared"

    def test_seed_fixes_result(self, unit_model):
        """Same seed and stream, same estimate."""
        theta = ThetaPoint.canonical(0.5)
        first = mc_risk(unit_model, theta, restricted_mle(), squared_loss(), 500, 9, stream=(2,))
        second = mc_risk(unit_model, theta, restricted_mle(), squared_loss(), 500, 9, stream=(2,))
        assert first == second

    def test_agrees_with_quadrature(self, correlated_model):
        """Monte Carlo and quadrature agree within a few standard errors."""
        theta = ThetaPoint.canonical(0.2)
        e = bz_squared(correlated_model)
        simulated = mc_risk(correlated_model, theta, e, squared_loss(), 50_000, 3)
        exact = exact_risk(correlated_model, 0.2, e, squared_loss())
        assert abs(simulated.mean - exact) < 5.0 * simulated.std_error

    def test_location_invariance(self, correlated_model):
        """Shifting both means by the same amount leaves the risk unchanged."""
        e = bz_squared(correlated_model)
        lam = 0.4
        near = ThetaPoint(theta1=0.0, theta2=lam)
        far = ThetaPoint(theta1=7.0, theta2=7.0 + lam)
        near_risk = mc_risk(correlated_model, near, e, squared_loss(), 5000, 21)
        far_risk = mc_risk(correlated_model, far, e, squared_loss(), 5000, 21)
        assert far_risk.mean == pytest.approx(near_risk.mean, rel=1e-9)

    def test_tabulated_absolute_agrees_with_quadrature(self, correlated_model):
        """The interpolated median shift gives the quadrature risk by simulation too."""
        e = bz_absolute(correlated_model)
        simulated = mc_risk(
            correlated_model, ThetaPoint.canonical(0.3), e, absolute_loss(), 50_000, 8
        )
        exact = exact_risk(correlated_model, 0.3, e, absolute_loss())
        assert abs(simulated.mean - exact) < 5.0 * simulated.std_error

    def test_needs_two_draws(self, unit_model):
        """A standard error needs n >= 2."""
        with pytest.raises(DomainError):
            mc_risk(unit_model, ThetaPoint.canonical(0.0), blee(), squared_loss(), 1, 1)


class TestDominanceReport:
    def test_single_point_matches_mc_risk(self, unit_model):
        """The first lambda uses substream 0 of the seed."""
        rows = dominance_report(unit_model, [blee()], squared_loss(), [0.7], 1000, 5)
        single = mc_risk(
            unit_model, ThetaPoint.canonical(0.7), blee(), squared_loss(), 1000, 5, stream=(0,)
        )
        assert len(rows) == 1
        assert rows[0].risk == single.mean
        assert rows[0].std_error == single.std_error

    def test_workers_do_not_change_rows(self, unit_model):
        """The table is the same for any worker count."""
        estimators = [blee(), restricted_mle(), isotonic(0.75)]
        grid = [0.0, 0.5, 1.0, 1.5]
        serial = dominance_report(unit_model, estimators, squared_loss(), grid, 800, 11)
        threaded = dominance_report(
            unit_model, estimators, squared_loss(), grid, 800, 11, workers=3
        )
        assert serial == threaded

    def test_rows_sorted(self, unit_model):
        """Rows are ordered by lambda, then estimator name."""
        rows = dominance_report(
            unit_model, [restricted_mle(), blee()], squared_loss(), [1.0, 0.0], 100, 2
        )
        assert [(row.lam, row.estimator) for row in rows] == [
            (0.0, "blee"),
            (0.0, "mle"),
            (1.0, "blee"),
            (1.0, "mle"),
        ]

    def test_common_sample_orders_mle_below_blee(self, unit_model):
        """At lambda = 0 pooling never increases the squared loss of a draw."""
        rows = dominance_report(
            unit_model, [blee(), restricted_mle()], squared_loss(), [0.0], 2000, 4
        )
        risks = {row.estimator: row.risk for row in rows}
        assert risks["mle"] < risks["blee"]

    @pytest.mark.parametrize("loss", LOSSES, ids=["squared", "absolute"])
    @pytest.mark.parametrize("sigma, rho", PANELS)
    def test_panel_dominance(self, sigma, rho, loss):
        """MLE and boundary estimator never lose to the BLEE on the default grid."""
        model = NormalLocationModel(sigma=sigma, rho=rho)
        grid = lambda_grid(model, None, None, None)[0]
        estimators = [blee(), restricted_mle(), boundary_estimator(model, loss)]
        rows = dominance_report(model, estimators, loss, grid, 20_000, 31)
        level = _blee_level(sigma, loss.name)
        for lam in grid:
            at = {row.estimator: row for row in rows if row.lam == lam}
            reference = at["blee"]
            assert abs(reference.risk - level) <= 4.5 * reference.std_error
            for name in ("mle", "bz"):
                assert at[name].risk <= reference.risk + 2.0 * reference.std_error

    def test_mle_merges_with_blee(self, unit_model):
        """The MLE gain is clear at lambda = 0 and gone by lambda = 3 tau."""
        grid = lambda_grid(unit_model, None, None, None)[0]
        ends = [grid[0], grid[-1]]
        rows = dominance_report(
            unit_model, [blee(), restricted_mle()], squared_loss(), ends, 200_000, 6
        )
        first = {row.estimator: row for row in rows if row.lam == grid[0]}
        last = {row.estimator: row for row in rows if row.lam == grid[-1]}
        assert first["mle"].risk <= first["blee"].risk - 3.0 * first["blee"].std_error
        assert abs(last["mle"].risk - last["blee"].risk) <= 3.0 * last["blee"].std_error

    def test_empty_estimators(self, unit_model):
        """At least one estimator is needed."""
        with pytest.raises(DomainError):
            dominance_report(unit_model, [], squared_loss(), [0.0], 100, 1)

    def test_empty_grid(self, unit_model):
        """At least one lambda is needed."""
        with pytest.raises(DomainError):
            dominance_report(unit_model, [blee()], squared_loss(), [], 100, 1)

    def test_negative_lambda(self, unit_model):
        """Every lambda must be non-negative."""
        with pytest.raises(DomainError):
            dominance_report(unit_model, [blee()], squared_loss(), [0.0, -1.0], 100, 1)


class TestExactReport:
    def test_rows(self, unit_model):
        """One row per (lambda, estimator), sorted, with the closed-form values."""
        rows = exact_report(
            unit_model, [restricted_mle(), blee()], squared_loss(), [0.0, 1.0], workers=2
        )
        assert [(row.lam, row.estimator) for row in rows] == [
            (0.0, "blee"),
            (0.0, "mle"),
            (1.0, "blee"),
            (1.0, "mle"),
        ]
        assert rows[0].risk == pytest.approx(2.0, abs=1e-6)
        assert rows[1].risk == pytest.approx(1.5, abs=1e-6)
        assert rows[3].risk < 2.0
        assert all(row.seed is None for row in rows)
