"""Prospect-theory value and probability-weighting functions.

The value function is a two-part power curve around a reference point:
concave above it (gains), convex and loss-amplified below it. The
weighting function transforms transition probabilities; the identity is
the default, with an optional inverse-S curve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class CptParams:
    alpha_gain: float = 0.5
    beta_loss: float = 0.5
    lambda_loss: float = 2.0
    goe_ref: float = 0.2
    weighting: str = "identity"  # "identity" or "inverse-s"
    weighting_gamma: float = 0.65

    def validate(self):
        if not 0.0 < self.alpha_gain <= 1.0:
            raise ValidationError("cpt.alpha must lie in (0, 1]")
        if not 0.0 < self.beta_loss <= 1.0:
            raise ValidationError("cpt.beta must lie in (0, 1]")
        if self.lambda_loss < 1.0:
            raise ValidationError("cpt.lambda must be >= 1")
        if self.goe_ref < 0.0:
            raise ValidationError("cpt.goe_ref must be >= 0")
        if self.weighting not in ("identity", "inverse-s"):
            raise ValidationError("cpt.weighting must be 'identity' or 'inverse-s'")
        if self.weighting == "inverse-s" and not 0.28 < self.weighting_gamma <= 1.0:
            # below ~0.28 the inverse-S curve stops being monotone
            raise ValidationError("cpt.weighting_gamma must lie in (0.28, 1]")


def value(x, ref_point: float, params: CptParams):
    """Two-part value: (x-ref)^alpha for gains, -lambda*(ref-x)^beta for losses."""
    if np.isscalar(x):
        if x >= ref_point:
            return (x - ref_point) ** params.alpha_gain
        return -params.lambda_loss * (ref_point - x) ** params.beta_loss
    x = np.asarray(x, dtype=float)
    d = x - ref_point
    return np.where(
        d >= 0.0,
        np.abs(d) ** params.alpha_gain,
        -params.lambda_loss * np.abs(d) ** params.beta_loss,
    )


def value_gain_only(x, ref_point: float, params: CptParams):
    """Gain branch only; zero at and below the reference point's loss side.

    Used for query costs, whose reference point is zero so the prospect is
    always non-negative.
    """
    if np.isscalar(x):
        return (x - ref_point) ** params.alpha_gain if x >= ref_point else 0.0
    x = np.asarray(x, dtype=float)
    d = x - ref_point
    return np.where(d >= 0.0, np.abs(d) ** params.alpha_gain, 0.0)


def weight(p, params: CptParams):
    """Probability weighting; identity by default, inverse-S optionally.

    The inverse-S form is p^g / (p^g + (1-p)^g)^(1/g).
    """
    scalar = np.isscalar(p)
    arr = np.asarray(p, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValidationError("probabilities must lie in [0, 1]")
    if params.weighting == "identity":
        out = arr
    else:
        g = params.weighting_gamma
        num = arr**g
        out = num / (num + (1.0 - arr) ** g) ** (1.0 / g)
    return float(out) if scalar else out
