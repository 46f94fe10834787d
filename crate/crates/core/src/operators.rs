//! A small zoo of target operators on grid functions, each carrying a
//! declared modulus of continuity and an image-regularity bound.

use serde::{Deserialize, Serialize};

use crate::bounds::ModulusSpec;
use crate::error::{Error, Result};
use crate::funcspace::{BoxDomain, SampledFunction};

/// Scalar map applied node-wise by the pointwise operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "lowercase")]
pub enum PointwiseMap {
    Sin,
    Cos,
    Tanh,
    Abs,
    Scale { factor: f64 },
}

impl PointwiseMap {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Sin => x.sin(),
            Self::Cos => x.cos(),
            Self::Tanh => x.tanh(),
            Self::Abs => x.abs(),
            Self::Scale { factor } => factor * x,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            Self::Sin | Self::Cos | Self::Tanh | Self::Abs => 1.0,
            Self::Scale { factor } => factor.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    /// Running integral from the left endpoint (cumulative trapezoid).
    Antiderivative,
    /// Node-wise scalar map.
    Pointwise(PointwiseMap),
    /// Windowed mean with the window clipped at the boundary.
    MovingAverage { window: f64 },
    /// Circular shift on the periodic identification of the interval,
    /// quantized to whole grid steps.
    Shift { offset: f64 },
}

/// An operator from grid functions on a fixed domain to grid functions on
/// the same domain.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetOperator {
    kind: Kind,
    domain: BoxDomain,
}

impl TargetOperator {
    pub fn antiderivative(domain: BoxDomain) -> Result<Self> {
        require_1d(&domain, "antiderivative")?;
        Ok(Self { kind: Kind::Antiderivative, domain })
    }

    pub fn pointwise(map: PointwiseMap, domain: BoxDomain) -> Result<Self> {
        if let PointwiseMap::Scale { factor } = map {
            if !factor.is_finite() {
                return Err(Error::Range(format!("scale factor must be finite, got {factor}")));
            }
        }
        Ok(Self { kind: Kind::Pointwise(map), domain })
    }

    pub fn moving_average(window: f64, domain: BoxDomain) -> Result<Self> {
        require_1d(&domain, "moving average")?;
        if !window.is_finite() || window <= 0.0 {
            return Err(Error::Range(format!("window must be finite and positive, got {window}")));
        }
        Ok(Self { kind: Kind::MovingAverage { window }, domain })
    }

    pub fn shift(offset: f64, domain: BoxDomain) -> Result<Self> {
        require_1d(&domain, "shift")?;
        if !offset.is_finite() {
            return Err(Error::Range(format!("shift offset must be finite, got {offset}")));
        }
        Ok(Self { kind: Kind::Shift { offset }, domain })
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    /// Apply the operator to a function on its domain. The output lives on
    /// the input's grid.
    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        if f.grid().domain() != &self.domain {
            return Err(Error::Domain(
                "function domain does not match the operator domain".into(),
            ));
        }
        let grid = f.grid().clone();
        let v = f.values();
        let values = match &self.kind {
            Kind::Antiderivative => {
                let h = grid.spacing()[0];
                let mut out = Vec::with_capacity(v.len());
                out.push(0.0);
                for i in 1..v.len() {
                    out.push(out[i - 1] + 0.5 * h * (v[i - 1] + v[i]));
                }
                out
            }
            Kind::Pointwise(map) => v.iter().map(|&x| map.eval(x)).collect(),
            Kind::MovingAverage { window } => {
                let h = grid.spacing()[0];
                let n = v.len();
                let qw = grid.quad_weights();
                let half = window / 2.0;
                let reach = (half / h).ceil() as usize + 1;
                let mut out = Vec::with_capacity(n);
                for i in 0..n {
                    let lo = i.saturating_sub(reach);
                    let hi = (i + reach).min(n - 1);
                    let mut mass = 0.0;
                    let mut acc = 0.0;
                    for j in lo..=hi {
                        let dist = (j as f64 - i as f64).abs() * h;
                        if dist <= half * (1.0 + 1e-12) {
                            mass += qw[j];
                            acc += v[j] * qw[j];
                        }
                    }
                    out.push(acc / mass);
                }
                out
            }
            Kind::Shift { offset } => {
                let h = grid.spacing()[0];
                let n = v.len();
                let period = (n - 1) as i64;
                let k = (offset / h).round() as i64;
                let mut out = Vec::with_capacity(n);
                for i in 0..n - 1 {
                    let j = (i as i64 - k).rem_euclid(period) as usize;
                    out.push(v[j]);
                }
                out.push(out[0]);
                out
            }
        };
        SampledFunction::new(grid, values, f.interp())
    }

    /// Modulus of continuity of the operator in the sup norm.
    pub fn declared_modulus(&self) -> ModulusSpec {
        let constant = match &self.kind {
            Kind::Antiderivative => self.domain.side(0),
            Kind::Pointwise(map) => map.lipschitz(),
            Kind::MovingAverage { .. } | Kind::Shift { .. } => 1.0,
        };
        ModulusSpec::Lipschitz { constant }
    }

    /// Upper bound on the slope of outputs, for inputs with slope bound
    /// `lambda_in` and amplitude bound `amplitude_in`.
    ///
    /// For the shift this assumes periodic inputs (equal endpoint values);
    /// a non-periodic input carries its endpoint jump to the seam.
    pub fn image_lipschitz(&self, lambda_in: f64, amplitude_in: f64) -> f64 {
        match &self.kind {
            Kind::Antiderivative => amplitude_in,
            Kind::Pointwise(map) => map.lipschitz() * lambda_in,
            Kind::MovingAverage { .. } | Kind::Shift { .. } => lambda_in,
        }
    }
}

fn require_1d(domain: &BoxDomain, what: &str) -> Result<()> {
    if domain.dim() != 1 {
        return Err(Error::Shape(format!(
            "{what} is defined on an interval, got dimension {}",
            domain.dim()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{random_lipschitz, sup_distance, Grid, InterpRule, LipschitzClass};

    fn unit_interval() -> BoxDomain {
        BoxDomain::interval(0.0, 1.0).unwrap()
    }

    fn grid(n: usize) -> Grid {
        Grid::uniform(&unit_interval(), n).unwrap()
    }

    fn zoo() -> Vec<TargetOperator> {
        vec![
            TargetOperator::antiderivative(unit_interval()).unwrap(),
            TargetOperator::pointwise(PointwiseMap::Sin, unit_interval()).unwrap(),
            TargetOperator::moving_average(0.2, unit_interval()).unwrap(),
            TargetOperator::shift(0.25, unit_interval()).unwrap(),
        ]
    }

    #[test]
    fn antiderivative_of_one_is_the_ramp() {
        let op = TargetOperator::antiderivative(unit_interval()).unwrap();
        let one = SampledFunction::constant(grid(101), 1.0, InterpRule::Multilinear);
        let out = op.apply(&one).unwrap();
        for i in 0..101 {
            let t = out.grid().node(i)[0];
            assert!(
                (out.values()[i] - t).abs() <= 1e-12,
                "integral of 1 at {t} was {}",
                out.values()[i]
            );
        }
    }

    #[test]
    fn antiderivative_of_cosine_reaches_one() {
        let domain = BoxDomain::interval(0.0, std::f64::consts::FRAC_PI_2).unwrap();
        let op = TargetOperator::antiderivative(domain.clone()).unwrap();
        let g = Grid::uniform(&domain, 1001).unwrap();
        let h = g.spacing()[0];
        let f = SampledFunction::from_fn(g, InterpRule::Multilinear, |t| t[0].cos());
        let out = op.apply(&f).unwrap();
        let end = *out.values().last().unwrap();
        assert!(
            (end - 1.0).abs() <= h * h,
            "trapezoid integral of cos ended at {end}"
        );
    }

    #[test]
    fn antiderivative_is_linear() {
        let op = TargetOperator::antiderivative(unit_interval()).unwrap();
        let class = LipschitzClass::new(1.0, 1.0).unwrap();
        let g = grid(51);
        let f = random_lipschitz(&class, &g, 1);
        let q = random_lipschitz(&class, &g, 2);
        let combo = SampledFunction::new(
            g.clone(),
            f.values()
                .iter()
                .zip(q.values())
                .map(|(a, b)| 1.5 * a - 0.5 * b)
                .collect(),
            InterpRule::Multilinear,
        )
        .unwrap();
        let lhs = op.apply(&combo).unwrap();
        let fa = op.apply(&f).unwrap();
        let qa = op.apply(&q).unwrap();
        for i in 0..g.len() {
            let rhs = 1.5 * fa.values()[i] - 0.5 * qa.values()[i];
            assert!((lhs.values()[i] - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn pointwise_sine_maps_zero_to_zero() {
        let op = TargetOperator::pointwise(PointwiseMap::Sin, unit_interval()).unwrap();
        let zero = SampledFunction::constant(grid(11), 0.0, InterpRule::Nearest);
        let out = op.apply(&zero).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn moving_average_fixes_constants() {
        let op = TargetOperator::moving_average(0.3, unit_interval()).unwrap();
        let c = SampledFunction::constant(grid(41), 2.5, InterpRule::Multilinear);
        let out = op.apply(&c).unwrap();
        for &v in out.values() {
            assert!((v - 2.5).abs() <= 1e-12);
        }
    }

    #[test]
    fn oversized_window_averages_globally() {
        let op = TargetOperator::moving_average(5.0, unit_interval()).unwrap();
        let g = grid(21);
        let f = SampledFunction::from_fn(g, InterpRule::Multilinear, |t| t[0] * t[0]);
        let out = op.apply(&f).unwrap();
        let first = out.values()[0];
        for &v in out.values() {
            assert_eq!(v, first, "window covering the domain must give one mean");
        }
    }

    #[test]
    fn shift_moves_periodic_samples_by_whole_steps() {
        let op = TargetOperator::shift(0.25, unit_interval()).unwrap();
        let g = grid(41);
        let f = SampledFunction::from_fn(g.clone(), InterpRule::Multilinear, |t| {
            (2.0 * std::f64::consts::PI * t[0]).cos()
        });
        let out = op.apply(&f).unwrap();
        for i in 0..g.len() {
            let t = g.node(i)[0];
            let expected = (2.0 * std::f64::consts::PI * (t - 0.25)).cos();
            assert!(
                (out.values()[i] - expected).abs() <= 1e-12,
                "shifted cosine at {t}: {} vs {expected}",
                out.values()[i]
            );
        }
    }

    #[test]
    fn shift_is_a_sup_norm_isometry_on_periodic_inputs() {
        let op = TargetOperator::shift(0.4, unit_interval()).unwrap();
        let g = grid(33);
        for seed in 0..20u64 {
            let f = periodic_walk(&g, seed);
            let q = periodic_walk(&g, seed + 1000);
            let before = sup_distance(&f, &q).unwrap();
            let after = sup_distance(&op.apply(&f).unwrap(), &op.apply(&q).unwrap()).unwrap();
            assert_eq!(before, after, "seed {seed}");
        }
    }

    /// Random slope-bounded walk out to the midpoint, mirrored back, so the
    /// endpoint values agree.
    fn periodic_walk(g: &Grid, seed: u64) -> SampledFunction {
        let class = LipschitzClass::new(1.0, 1.0).unwrap();
        let base = random_lipschitz(&class, g, seed);
        let n = g.len();
        let values: Vec<f64> = (0..n)
            .map(|i| base.values()[i.min(n - 1 - i)])
            .collect();
        SampledFunction::new(g.clone(), values, InterpRule::Multilinear).unwrap()
    }

    #[test]
    fn declared_moduli_are_sound_on_random_pairs() {
        let g = grid(101);
        let class = LipschitzClass::new(1.0, 1.0).unwrap();
        for op in zoo() {
            let modulus = op.declared_modulus();
            for seed in 0..200u64 {
                let f = random_lipschitz(&class, &g, 2 * seed);
                let q = random_lipschitz(&class, &g, 2 * seed + 1);
                let input_gap = sup_distance(&f, &q).unwrap();
                let output_gap =
                    sup_distance(&op.apply(&f).unwrap(), &op.apply(&q).unwrap()).unwrap();
                let allowed = modulus.eval(input_gap).unwrap() + 1e-9;
                assert!(
                    output_gap <= allowed,
                    "{op:?} stretched {input_gap} to {output_gap}"
                );
            }
        }
    }

    #[test]
    fn image_slopes_stay_under_the_declared_bound() {
        let g = grid(101);
        let class = LipschitzClass::new(1.0, 1.0).unwrap();
        for op in zoo() {
            let bound = op.image_lipschitz(class.lambda, class.amplitude);
            for seed in 0..100u64 {
                // The shift bound is stated for periodic inputs.
                let f = if matches!(op.kind, Kind::Shift { .. }) {
                    periodic_walk(&g, seed)
                } else {
                    random_lipschitz(&class, &g, seed)
                };
                let out = op.apply(&f).unwrap();
                let slope = out.estimate_lipschitz();
                assert!(
                    slope <= bound + 1e-9,
                    "{op:?} produced slope {slope} > bound {bound} at seed {seed}"
                );
            }
        }
    }

    #[test]
    fn declared_modulus_constants() {
        let wide = BoxDomain::interval(0.0, 2.5).unwrap();
        let anti = TargetOperator::antiderivative(wide).unwrap();
        assert_eq!(anti.declared_modulus(), ModulusSpec::Lipschitz { constant: 2.5 });
        let scale =
            TargetOperator::pointwise(PointwiseMap::Scale { factor: -3.0 }, unit_interval())
                .unwrap();
        assert_eq!(scale.declared_modulus(), ModulusSpec::Lipschitz { constant: 3.0 });
        assert_eq!(scale.image_lipschitz(2.0, 1.0), 6.0);
        let anti2 = TargetOperator::antiderivative(unit_interval()).unwrap();
        assert_eq!(anti2.image_lipschitz(7.0, 1.5), 1.5);
    }

    #[test]
    fn constructors_reject_bad_arguments() {
        let square = BoxDomain::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(TargetOperator::antiderivative(square.clone()).is_err());
        assert!(TargetOperator::moving_average(0.2, square.clone()).is_err());
        assert!(TargetOperator::shift(0.1, square).is_err());
        assert!(TargetOperator::moving_average(0.0, unit_interval()).is_err());
        assert!(
            TargetOperator::pointwise(PointwiseMap::Scale { factor: f64::NAN }, unit_interval())
                .is_err()
        );
    }

    #[test]
    fn apply_rejects_foreign_domains() {
        let op = TargetOperator::antiderivative(unit_interval()).unwrap();
        let other = BoxDomain::interval(0.0, 2.0).unwrap();
        let f = SampledFunction::constant(
            Grid::uniform(&other, 11).unwrap(),
            1.0,
            InterpRule::Multilinear,
        );
        assert!(matches!(op.apply(&f), Err(Error::Domain(_))));
    }

    #[test]
    fn pointwise_works_in_two_dimensions() {
        let square = BoxDomain::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let op = TargetOperator::pointwise(PointwiseMap::Tanh, square.clone()).unwrap();
        let g = Grid::uniform(&square, 5).unwrap();
        let f = SampledFunction::from_fn(g, InterpRule::Multilinear, |t| t[0] + t[1]);
        let out = op.apply(&f).unwrap();
        for (o, i) in out.values().iter().zip(f.values()) {
            assert_eq!(*o, i.tanh());
        }
    }
}
