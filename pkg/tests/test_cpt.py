import math

import numpy as np
import pytest

from effectsched.cpt import CptParams, value, value_gain_only, weight
from effectsched.errors import ValidationError

DEFAULTS = CptParams()
INVERSE_S = CptParams(weighting="inverse-s", weighting_gamma=0.65)


class TestValue:
    def test_reference_point_is_zero(self):
        for ref in (0.0, 0.2, 1.7):
            assert value(ref, ref, DEFAULTS) == 0.0

    def test_gain_branch(self):
        assert value(0.7, 0.2, DEFAULTS) == pytest.approx(math.sqrt(0.5), abs=1e-15)

    def test_loss_branch(self):
        assert value(0.0, 0.2, DEFAULTS) == pytest.approx(-2 * math.sqrt(0.2), abs=1e-15)

    def test_continuity_at_reference(self):
        for eps in (1e-6, 1e-9, 1e-12):
            assert abs(value(0.2 + eps, 0.2, DEFAULTS)) < 2e-3
            assert abs(value(0.2 - eps, 0.2, DEFAULTS)) < 4e-3

    def test_loss_aversion_grid(self):
        for d in np.arange(0.01, 1.0001, 0.01):
            loss = abs(value(0.5 - d, 0.5, DEFAULTS))
            gain = value(0.5 + d, 0.5, DEFAULTS)
            assert loss >= DEFAULTS.lambda_loss * gain - 1e-12

    def test_monotone_in_outcome(self):
        rng = np.random.default_rng(5)
        xs = np.sort(rng.uniform(-2, 3, size=200))
        vs = value(xs, 0.4, DEFAULTS)
        assert np.all(np.diff(vs) >= -1e-12)

    def test_array_matches_scalar(self):
        xs = np.array([0.0, 0.2, 0.7])
        out = value(xs, 0.2, DEFAULTS)
        assert out == pytest.approx([value(float(x), 0.2, DEFAULTS) for x in xs])


class TestGainOnly:
    def test_gain(self):
        assert value_gain_only(0.5, 0.0, DEFAULTS) == pytest.approx(math.sqrt(0.5))

    def test_below_reference_gated(self):
        assert value_gain_only(0.1, 0.2, DEFAULTS) == 0.0

    def test_boundary(self):
        assert value_gain_only(0.2, 0.2, DEFAULTS) == 0.0


class TestWeight:
    def test_endpoints_both_modes(self):
        for params in (DEFAULTS, INVERSE_S):
            assert weight(0.0, params) == 0.0
            assert weight(1.0, params) == 1.0

    def test_identity(self):
        assert weight(0.37, DEFAULTS) == 0.37

    def test_inverse_s_midpoint(self):
        g = 0.65
        expected = 0.5**g / (0.5**g + 0.5**g) ** (1 / g)  # direct form
        assert expected == pytest.approx(0.4387705074846802, abs=1e-12)
        assert weight(0.5, INVERSE_S) == pytest.approx(expected, abs=1e-15)

    def test_domain_error(self):
        with pytest.raises(ValidationError):
            weight(-0.1, DEFAULTS)
        with pytest.raises(ValidationError):
            weight(1.1, INVERSE_S)

    def test_monotone_with_fixed_endpoints(self):
        grid = np.linspace(0.0, 1.0, 401)
        for params in (DEFAULTS, INVERSE_S):
            w = weight(grid, params)
            assert np.all(np.diff(w) >= -1e-12)
            assert w[0] == 0.0 and w[-1] == pytest.approx(1.0, abs=1e-12)


def test_parameter_validation():
    with pytest.raises(ValidationError):
        CptParams(alpha_gain=0.0).validate()
    with pytest.raises(ValidationError):
        CptParams(lambda_loss=0.5).validate()
    with pytest.raises(ValidationError):
        CptParams(weighting="inverse-s", weighting_gamma=0.25).validate()
    CptParams(weighting="inverse-s", weighting_gamma=0.3).validate()
