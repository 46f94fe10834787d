//! Sampling-density and unit-count arithmetic: moduli of continuity, the
//! tolerance-to-radius chain, and the two variants of the unit-count bound.

use serde::{Deserialize, Serialize};

use crate::covering::box_covering_bound;
use crate::error::{Error, Result};
use crate::funcspace::SampledFunction;

/// Modulus of continuity of an operator, either an exact Lipschitz form or
/// a tabulated monotone curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModulusSpec {
    Lipschitz { constant: f64 },
    Tabulated { points: Vec<(f64, f64)> },
}

impl ModulusSpec {
    pub fn lipschitz(constant: f64) -> Result<Self> {
        if !constant.is_finite() || constant <= 0.0 {
            return Err(Error::Range(format!(
                "Lipschitz constant must be finite and positive, got {constant}"
            )));
        }
        Ok(Self::Lipschitz { constant })
    }

    /// Tabulated modulus: strictly increasing arguments, non-decreasing
    /// values, anchored at (0, 0).
    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Shape("a tabulated modulus needs at least 2 points".into()));
        }
        if points[0] != (0.0, 0.0) {
            return Err(Error::Range("a tabulated modulus must start at (0, 0)".into()));
        }
        for w in points.windows(2) {
            let ((d0, w0), (d1, w1)) = (w[0], w[1]);
            if !d1.is_finite() || !w1.is_finite() || d1 <= d0 || w1 < w0 {
                return Err(Error::Range(format!(
                    "modulus table must be monotone, offending pair ({d0}, {w0}) -> ({d1}, {w1})"
                )));
            }
        }
        Ok(Self::Tabulated { points })
    }

    /// Evaluate the modulus at `delta` (linear interpolation for tables).
    pub fn eval(&self, delta: f64) -> Result<f64> {
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::Range(format!("modulus argument must be >= 0, got {delta}")));
        }
        match self {
            Self::Lipschitz { constant } => Ok(constant * delta),
            Self::Tabulated { points } => {
                let (d_max, _) = *points.last().expect("validated non-empty");
                if delta > d_max {
                    return Err(Error::Range(format!(
                        "modulus argument {delta} exceeds tabulated range {d_max}"
                    )));
                }
                let k = points.partition_point(|&(d, _)| d < delta);
                if k == 0 {
                    return Ok(points[0].1);
                }
                let (d0, w0) = points[k - 1];
                let (d1, w1) = points[k];
                if delta == d0 {
                    return Ok(w0);
                }
                if delta == d1 {
                    return Ok(w1);
                }
                Ok(w0 + (w1 - w0) * (delta - d0) / (d1 - d0))
            }
        }
    }

    /// Smallest-by-construction `delta` with `eval(delta) == target`, found
    /// by bisecting the monotone interpolant to an absolute width of 1e-12.
    pub fn invert(&self, target: f64) -> Result<f64> {
        if !target.is_finite() || target <= 0.0 {
            return Err(Error::Range(format!(
                "modulus inversion target must be positive, got {target}"
            )));
        }
        match self {
            Self::Lipschitz { constant } => Ok(target / constant),
            Self::Tabulated { points } => {
                let (d_max, w_max) = *points.last().expect("validated non-empty");
                if target > w_max {
                    return Err(Error::Range(format!(
                        "inversion target {target} exceeds the tabulated maximum {w_max}"
                    )));
                }
                let mut lo = 0.0f64;
                let mut hi = d_max;
                while hi - lo > 1e-12 {
                    let mid = 0.5 * (lo + hi);
                    if self.eval(mid)? < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(0.5 * (lo + hi))
            }
        }
    }
}

/// Input-space tolerance sufficient for a target uniform output error:
/// a quarter of the modulus inverse at a quarter of the error budget.
///
/// For a Lipschitz modulus this is `eps / (16 constant)`, computed in
/// closed form.
pub fn function_tolerance(modulus: &ModulusSpec, eps: f64) -> Result<f64> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::Range(format!("error budget must be positive, got {eps}")));
    }
    match modulus {
        ModulusSpec::Lipschitz { constant } => Ok(eps / (16.0 * constant)),
        tab => Ok(tab.invert(eps / 4.0)? / 4.0),
    }
}

/// Sampling radius `min(psi / ell, eps / 2)` for input tolerance `psi`,
/// class regularity `ell`, and error budget `eps`.
///
/// `ell == 0` (a class of constants) makes the first branch vacuous.
pub fn cover_radius(psi: f64, ell: f64, eps: f64) -> Result<f64> {
    if !psi.is_finite() || psi <= 0.0 {
        return Err(Error::Range(format!("tolerance must be positive, got {psi}")));
    }
    if !ell.is_finite() || ell < 0.0 {
        return Err(Error::Range(format!("regularity bound must be >= 0, got {ell}")));
    }
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::Range(format!("error budget must be positive, got {eps}")));
    }
    if ell == 0.0 {
        return Ok(eps / 2.0);
    }
    Ok((psi / ell).min(eps / 2.0))
}

/// Largest slope estimate over a family of functions (0 for an empty one).
pub fn max_lipschitz(functions: &[SampledFunction]) -> f64 {
    functions
        .iter()
        .map(|f| f.estimate_lipschitz())
        .fold(0.0, f64::max)
}

/// Input tolerance that keeps a reconstruction within `delta`, given the
/// factorization's reconstruction norm bound `c`: `delta / (2 (1 + c))`.
pub fn factorization_margin(delta: f64, c: f64) -> Result<f64> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::Range(format!("error budget must be positive, got {delta}")));
    }
    if !c.is_finite() || c < 0.0 {
        return Err(Error::Range(format!("norm bound must be >= 0, got {c}")));
    }
    Ok(delta / (2.0 * (1.0 + c)))
}

/// Which reading of the unit-count bound to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    /// Closed form `ceil((2 + 32 diam lambda / (Lambda eps))^d)` with the
    /// operator constant in the denominator.
    AsStated,
    /// Composition of the tolerance chain: `psi = eps / (16 Lambda)`,
    /// `gamma = min(psi / lambda, eps / 2)`, then the box counting bound.
    /// Equals `ceil((2 + 32 diam lambda Lambda / eps)^d)` whenever the
    /// first branch of the radius is active.
    Derived,
}

/// Lower bound on the number of sampling units needed for target error
/// `eps` on a class with slope bound `lambda` under an operator with
/// Lipschitz constant `big_lambda`, over a set of diameter `diam` in
/// dimension `d`.
pub fn unit_count_bound(
    diam: f64,
    lambda: f64,
    big_lambda: f64,
    eps: f64,
    d: usize,
    variant: BoundVariant,
) -> Result<u128> {
    for (name, v) in [
        ("diameter", diam),
        ("class slope bound", lambda),
        ("operator constant", big_lambda),
        ("error budget", eps),
    ] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::Range(format!("{name} must be finite and positive, got {v}")));
        }
    }
    if d == 0 {
        return Err(Error::Range("dimension must be positive".into()));
    }
    match variant {
        BoundVariant::AsStated => {
            let value = (2.0 + 32.0 * diam * lambda / (big_lambda * eps))
                .powi(d as i32)
                .ceil();
            if !value.is_finite() || value >= u128::MAX as f64 {
                return Err(Error::Range("unit-count bound overflows an integer".into()));
            }
            Ok(value as u128)
        }
        BoundVariant::Derived => {
            let modulus = ModulusSpec::lipschitz(big_lambda)?;
            let psi = function_tolerance(&modulus, eps)?;
            let gamma = cover_radius(psi, lambda, eps)?;
            box_covering_bound(diam, gamma, d)
        }
    }
}
