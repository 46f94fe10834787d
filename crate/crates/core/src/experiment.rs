//! End-to-end harness: resolve cover radii from an error budget, factor a
//! target operator through sample vectors, train finite networks of several
//! widths, and certify the held-out sup-norm error of the reconstructed
//! outputs. Every random draw is seeded from the config, so a report is a
//! pure function of its config.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bounds::{cover_radius, function_tolerance};
use crate::covering::cover_box;
use crate::error::{Error, Result};
use crate::factorize::SampleFactorization;
use crate::format::{canonical_json, format_f64};
use crate::funcspace::{
    random_lipschitz, sup_distance, BoxDomain, Grid, InterpRule, LipschitzClass, SampledFunction,
};
use crate::layers::{assemble, Architecture, NetInput};
use crate::net::{train, Activation, Dataset, RestartRecord, TrainConfig, TwoLayerNet};
use crate::operators::{PointwiseMap, TargetOperator};

/// Operator selection in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum OperatorSpec {
    Antiderivative,
    Pointwise {
        #[serde(flatten)]
        map: PointwiseMap,
    },
    MovingAverage { window: f64 },
    Shift { offset: f64 },
}

impl OperatorSpec {
    pub fn build(&self, domain: &BoxDomain) -> Result<TargetOperator> {
        match self {
            Self::Antiderivative => TargetOperator::antiderivative(domain.clone()),
            Self::Pointwise { map } => TargetOperator::pointwise(*map, domain.clone()),
            Self::MovingAverage { window } => {
                TargetOperator::moving_average(*window, domain.clone())
            }
            Self::Shift { offset } => TargetOperator::shift(*offset, domain.clone()),
        }
    }
}

/// Cover radius selection: derived from the error budget, or pinned by hand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum RadiusSpec {
    Auto,
    Manual { gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainSpec {
    pub step: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub restarts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestsetSpec {
    pub train_n: usize,
    pub heldout_n: usize,
}

fn default_activation() -> Activation {
    Activation::Tanh
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub operator: OperatorSpec,
    pub domain: BoxDomain,
    pub class: LipschitzClass,
    pub epsilon: f64,
    pub interp: InterpRule,
    pub radius: RadiusSpec,
    #[serde(default = "default_activation")]
    pub activation: Activation,
    pub widths: Vec<usize>,
    pub train: TrainSpec,
    pub testset: TestsetSpec,
    pub mollify_ratios: Vec<f64>,
    /// Reference-grid cells per cover step along each axis; must be even so
    /// cover points land exactly on grid nodes.
    pub grid_resolution: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    /// A complete worked configuration: the running integral on [0, 1]
    /// over slope- and amplitude-bounded functions, with a 0.2 error
    /// budget.
    pub fn example() -> Self {
        Self {
            operator: OperatorSpec::Antiderivative,
            domain: BoxDomain::interval(0.0, 1.0).expect("unit interval"),
            class: LipschitzClass::new(1.0, 1.0).expect("unit class"),
            epsilon: 0.2,
            interp: InterpRule::Multilinear,
            radius: RadiusSpec::Auto,
            activation: Activation::Tanh,
            widths: vec![4, 16, 64],
            train: TrainSpec { step: 0.05, momentum: 0.9, epochs: 1500, restarts: 3 },
            testset: TestsetSpec { train_n: 160, heldout_n: 100 },
            mollify_ratios: vec![0.2],
            grid_resolution: 10,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::Config(format!(
                "error budget must be positive, got {}",
                self.epsilon
            )));
        }
        if self.widths.is_empty() || self.widths.contains(&0) {
            return Err(Error::Config("widths must be a non-empty list of positive sizes".into()));
        }
        if self.testset.train_n == 0 || self.testset.heldout_n == 0 {
            return Err(Error::Config("both test-set sizes must be positive".into()));
        }
        if self.mollify_ratios.iter().any(|&r| !r.is_finite() || r <= 0.0) {
            return Err(Error::Config("mollify ratios must be finite and positive".into()));
        }
        if self.grid_resolution < 2 || !self.grid_resolution.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "grid resolution must be an even count of at least 2, got {}",
                self.grid_resolution
            )));
        }
        if let RadiusSpec::Manual { gamma } = self.radius {
            if !gamma.is_finite() || gamma <= 0.0 {
                return Err(Error::Config(format!(
                    "manual cover radius must be positive, got {gamma}"
                )));
            }
        }
        Ok(())
    }
}

/// The radii and cover size implied by a config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedRadii {
    /// Input tolerance: perturbing inputs by this much moves operator
    /// outputs by at most a quarter of the budget.
    pub psi: f64,
    /// Slope bound used to convert the tolerance into a cover radius: the
    /// larger of the class slope and the image slope.
    pub ell: f64,
    /// Cover radius.
    pub gamma: f64,
    /// Number of cover points (the sample dimension).
    pub order: usize,
}

pub fn resolve_radii(config: &ExperimentConfig) -> Result<ResolvedRadii> {
    config.validate()?;
    let op = config.operator.build(&config.domain)?;
    let modulus = op.declared_modulus();
    let psi = function_tolerance(&modulus, config.epsilon)?;
    let image = op.image_lipschitz(config.class.lambda, config.class.amplitude);
    let ell = config.class.lambda.max(image);
    let gamma = match config.radius {
        RadiusSpec::Auto => cover_radius(psi, ell, config.epsilon)?,
        RadiusSpec::Manual { gamma } => gamma,
    };
    let order = cover_box(&config.domain, gamma)?.len();
    Ok(ResolvedRadii { psi, ell, gamma, order })
}

/// Discrepancy between the assembled function-input network and the finite
/// network it was lifted from, at one mollification radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollifyGap {
    pub ratio: f64,
    pub radius: f64,
    pub gap: f64,
}

/// Results for one hidden width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthRun {
    pub width: usize,
    /// Final training loss of the winning restart.
    pub train_err: f64,
    /// Largest sup-norm error on held-out functions, measured on the
    /// reference grid after reconstructing the predicted samples.
    pub heldout_sup_err: f64,
    pub winner: usize,
    pub restarts: Vec<RestartRecord>,
    pub gaps: Vec<MollifyGap>,
}

/// Wall-clock timings; excluded from serialized reports so that reruns of
/// the same config produce identical bytes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Runtimes {
    pub total_seconds: f64,
    pub per_width_seconds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub resolved: ResolvedRadii,
    /// Error of reconstructing the true outputs from their own samples: the
    /// part of the held-out error no amount of training can remove.
    pub floor: f64,
    pub runs: Vec<WidthRun>,
    #[serde(skip)]
    pub runtimes: Runtimes,
}

impl Report {
    /// Canonical JSON: byte-identical across reruns of the same config.
    pub fn canonical(&self) -> Result<String> {
        canonical_json(self)
    }

    /// One row per width; floats in canonical form.
    pub fn csv(&self) -> String {
        let mut header = String::from("width,train_err,heldout_sup_err,floor");
        for g in &self.runs.first().map(|r| r.gaps.clone()).unwrap_or_default() {
            header.push_str(&format!(",gap_r{}", g.ratio));
        }
        let mut out = header;
        out.push('\n');
        for run in &self.runs {
            out.push_str(&format!(
                "{},{},{},{}",
                run.width,
                format_f64(run.train_err),
                format_f64(run.heldout_sup_err),
                format_f64(self.floor)
            ));
            for g in &run.gaps {
                out.push(',');
                out.push_str(&format_f64(g.gap));
            }
            out.push('\n');
        }
        out
    }
}

const STREAM_TRAIN_FNS: u64 = 1;
const STREAM_HELDOUT_FNS: u64 = 2;
const STREAM_NET_INIT: u64 = 3;
const STREAM_TRAINING: u64 = 4;

/// Independent sub-seed for (stream, index) under a master seed
/// (splitmix64 finalizer).
fn stream_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut x = seed
        ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    x
}

fn sample_functions(
    class: &LipschitzClass,
    grid: &Grid,
    count: usize,
    seed: u64,
    stream: u64,
) -> Vec<SampledFunction> {
    (0..count)
        .map(|i| random_lipschitz(class, grid, stream_seed(seed, stream, i as u64)))
        .collect()
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    Ok(run_experiment_full(config)?.0)
}

/// Like [`run_experiment`], but also returns the winning network for each
/// width (in config order) so callers can persist the weights.
pub fn run_experiment_full(config: &ExperimentConfig) -> Result<(Report, Vec<TwoLayerNet>)> {
    config.validate()?;
    let started = Instant::now();
    let op = config.operator.build(&config.domain)?;
    let resolved = resolve_radii(config)?;
    let sf = SampleFactorization::build(
        &config.domain,
        resolved.gamma,
        config.interp,
        config.grid_resolution,
    )?;
    let grid = sf.target_grid().clone();

    let train_fns = sample_functions(
        &config.class,
        &grid,
        config.testset.train_n,
        config.seed,
        STREAM_TRAIN_FNS,
    );
    let heldout_fns = sample_functions(
        &config.class,
        &grid,
        config.testset.heldout_n,
        config.seed,
        STREAM_HELDOUT_FNS,
    );

    let mut inputs = Vec::with_capacity(train_fns.len());
    let mut targets = Vec::with_capacity(train_fns.len());
    for f in &train_fns {
        inputs.push(sf.delta(f)?);
        targets.push(sf.delta(&op.apply(f)?)?);
    }
    let data = Dataset::new(inputs, targets)?;

    let heldout_images = heldout_fns
        .iter()
        .map(|f| op.apply(f))
        .collect::<Result<Vec<_>>>()?;
    let mut floor = 0.0f64;
    for df in &heldout_images {
        let rec = sf.delta_star(&sf.delta(df)?)?;
        floor = floor.max(sup_distance(&rec, df)?);
    }

    let mut runs = Vec::with_capacity(config.widths.len());
    let mut nets = Vec::with_capacity(config.widths.len());
    let mut per_width_seconds = Vec::with_capacity(config.widths.len());
    for (w_idx, &width) in config.widths.iter().enumerate() {
        let width_started = Instant::now();
        let net0 = TwoLayerNet::new(
            sf.order(),
            width,
            sf.order(),
            config.activation,
            stream_seed(config.seed, STREAM_NET_INIT, w_idx as u64),
        )?;
        let tc = TrainConfig {
            step: config.train.step,
            momentum: config.train.momentum,
            epochs: config.train.epochs,
            restarts: config.train.restarts,
            seed: stream_seed(config.seed, STREAM_TRAINING, w_idx as u64),
        };
        let outcome = train(net0, &data, &tc)?;
        let train_err = *outcome.history.last().expect("non-empty history");
        let net = outcome.net;

        let mut heldout_sup = 0.0f64;
        for (f, df) in heldout_fns.iter().zip(&heldout_images) {
            let predicted = net.forward(&sf.delta(f)?)?;
            let rec = sf.delta_star(&predicted)?;
            heldout_sup = heldout_sup.max(sup_distance(&rec, df)?);
        }

        let probe_count = heldout_fns.len().min(20);
        let mut gaps = Vec::with_capacity(config.mollify_ratios.len());
        for &ratio in &config.mollify_ratios {
            let radius = ratio * resolved.gamma;
            let lifted = assemble(Architecture::FunctionalBasis, &net, &sf, &sf, radius)?;
            let mut gap = 0.0f64;
            for f in &heldout_fns[..probe_count] {
                let assembled = lifted.apply(NetInput::Function(f))?;
                let finite = sf.delta_star(&net.forward(&sf.delta(f)?)?)?;
                gap = gap.max(sup_distance(&assembled, &finite)?);
            }
            gaps.push(MollifyGap { ratio, radius, gap });
        }

        runs.push(WidthRun {
            width,
            train_err,
            heldout_sup_err: heldout_sup,
            winner: outcome.winner,
            restarts: outcome.restarts,
            gaps,
        });
        nets.push(net);
        per_width_seconds.push(width_started.elapsed().as_secs_f64());
    }

    let report = Report {
        config: config.clone(),
        resolved,
        floor,
        runs,
        runtimes: Runtimes {
            total_seconds: started.elapsed().as_secs_f64(),
            per_width_seconds,
        },
    };
    Ok((report, nets))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config() -> ExperimentConfig {
        ExperimentConfig {
            operator: OperatorSpec::Antiderivative,
            domain: BoxDomain::interval(0.0, 1.0).unwrap(),
            class: LipschitzClass::new(1.0, 1.0).unwrap(),
            epsilon: 0.5,
            interp: InterpRule::Multilinear,
            radius: RadiusSpec::Manual { gamma: 0.25 },
            activation: Activation::Tanh,
            widths: vec![3],
            train: TrainSpec { step: 0.05, momentum: 0.9, epochs: 40, restarts: 2 },
            testset: TestsetSpec { train_n: 6, heldout_n: 4 },
            mollify_ratios: vec![0.2],
            grid_resolution: 4,
            seed: 7,
        }
    }

    #[test]
    fn radii_resolve_to_the_worked_values() {
        let mut config = ExperimentConfig::example();
        config.epsilon = 0.16;
        let r = resolve_radii(&config).unwrap();
        assert_eq!(r.psi, 0.01, "tolerance should be budget over sixteen");
        assert_eq!(r.ell, 1.0);
        assert_eq!(r.gamma, 0.01);
        assert_eq!(r.order, 50);
    }

    #[test]
    fn radii_for_the_example_budget() {
        let r = resolve_radii(&ExperimentConfig::example()).unwrap();
        assert_eq!(r.psi, 0.0125);
        assert_eq!(r.gamma, 0.0125);
        assert_eq!(r.order, 40);
    }

    #[test]
    fn manual_radius_wins_over_the_derivation() {
        let mut config = ExperimentConfig::example();
        config.radius = RadiusSpec::Manual { gamma: 0.25 };
        let r = resolve_radii(&config).unwrap();
        assert_eq!(r.gamma, 0.25);
        assert_eq!(r.order, 2);
    }

    #[test]
    fn the_slope_bound_takes_the_larger_side() {
        let mut config = ExperimentConfig::example();
        config.operator = OperatorSpec::Pointwise { map: PointwiseMap::Scale { factor: 4.0 } };
        config.class = LipschitzClass::new(0.5, 1.0).unwrap();
        let r = resolve_radii(&config).unwrap();
        // Image slope 4 * 0.5 = 2 exceeds the class slope 0.5.
        assert_eq!(r.ell, 2.0);
    }

    #[test]
    fn configs_round_trip_through_json() {
        let config = ExperimentConfig::example();
        let text = serde_json::to_string(&config).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, config);
        assert!(text.contains("\"tag\":\"antiderivative\""));
        assert!(text.contains("\"mode\":\"auto\""));
    }

    #[test]
    fn pointwise_and_shift_specs_keep_their_parameters() {
        let spec = OperatorSpec::Pointwise { map: PointwiseMap::Scale { factor: 2.0 } };
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(text, "{\"tag\":\"pointwise\",\"map\":\"scale\",\"factor\":2.0}");
        let back: OperatorSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let shift: OperatorSpec =
            serde_json::from_str("{\"tag\":\"shift\",\"offset\":0.25}").unwrap();
        assert_eq!(shift, OperatorSpec::Shift { offset: 0.25 });
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut c = quick_config();
        c.widths.clear();
        assert!(c.validate().is_err());
        let mut c = quick_config();
        c.epsilon = 0.0;
        assert!(c.validate().is_err());
        let mut c = quick_config();
        c.grid_resolution = 5;
        assert!(c.validate().is_err());
        let mut c = quick_config();
        c.mollify_ratios = vec![-0.1];
        assert!(c.validate().is_err());
        let mut c = quick_config();
        c.radius = RadiusSpec::Manual { gamma: 0.0 };
        assert!(c.validate().is_err());
        let mut c = quick_config();
        c.testset.heldout_n = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn a_small_experiment_produces_a_coherent_report() {
        let config = quick_config();
        let report = run_experiment(&config).unwrap();
        assert_eq!(report.runs.len(), 1);
        assert_eq!(report.resolved.order, 2);
        let run = &report.runs[0];
        assert_eq!(run.width, 3);
        assert_eq!(run.restarts.len(), 2);
        assert!(run.train_err.is_finite());
        assert!(run.heldout_sup_err > 0.0, "a tiny net cannot be exact");
        assert!(report.floor > 0.0, "a 2-point cover cannot reconstruct exactly");
        assert_eq!(run.gaps.len(), 1);
        assert!(run.gaps[0].gap.is_finite());
        assert!(report.runtimes.total_seconds > 0.0);
    }

    #[test]
    fn reports_are_byte_stable_and_omit_runtimes() {
        let config = quick_config();
        let a = run_experiment(&config).unwrap();
        let b = run_experiment(&config).unwrap();
        let ja = a.canonical().unwrap();
        let jb = b.canonical().unwrap();
        assert_eq!(ja, jb, "rerunning the same config must reproduce the report");
        assert!(!ja.contains("seconds"), "timings must not enter the canonical form");
        let csv_a = a.csv();
        assert_eq!(csv_a, b.csv());
        let mut lines = csv_a.lines();
        assert_eq!(lines.next().unwrap(), "width,train_err,heldout_sup_err,floor,gap_r0.2");
        assert_eq!(lines.clone().count(), 1, "one data row per width");
        assert!(lines.next().unwrap().starts_with("3,"));
    }

    #[test]
    fn reports_deserialize_back() {
        let report = run_experiment(&quick_config()).unwrap();
        let text = report.canonical().unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back.floor, report.floor);
        assert_eq!(back.runs, report.runs);
        assert_eq!(back.runtimes, Runtimes::default());
    }

    #[test]
    fn seeds_change_the_data_but_not_the_shape() {
        let mut config = quick_config();
        let a = run_experiment(&config).unwrap();
        config.seed = 8;
        let b = run_experiment(&config).unwrap();
        assert_ne!(
            a.runs[0].heldout_sup_err, b.runs[0].heldout_sup_err,
            "different seeds should draw different functions"
        );
        assert_eq!(a.resolved, b.resolved);
    }
}
