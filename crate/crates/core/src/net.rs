//! A two-layer network on finite-dimensional vectors: affine, activation,
//! affine. Trained by full-batch gradient descent with classical momentum
//! and random restarts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Tanh => x.tanh(),
            Self::Relu => x.max(0.0),
        }
    }

    /// One-sided derivative; the kink of `relu` reports 0.
    pub fn slope(&self, x: f64) -> f64 {
        match self {
            Self::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            Self::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Dense two-layer network mapping `R^m1 -> R^m2` through `n` hidden units.
/// Weight matrices are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLayerNet {
    m1: usize,
    n: usize,
    m2: usize,
    activation: Activation,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
}

impl TwoLayerNet {
    /// Fresh network with uniform fan-balanced weights and zero biases.
    pub fn new(m1: usize, n: usize, m2: usize, activation: Activation, seed: u64) -> Result<Self> {
        if m1 == 0 || n == 0 || m2 == 0 {
            return Err(Error::Shape(format!(
                "all layer sizes must be positive, got {m1}x{n}x{m2}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a1 = (6.0 / (m1 + n) as f64).sqrt();
        let a2 = (6.0 / (n + m2) as f64).sqrt();
        let w1 = (0..n * m1).map(|_| rng.gen_range(-a1..a1)).collect();
        let w2 = (0..m2 * n).map(|_| rng.gen_range(-a2..a2)).collect();
        Ok(Self {
            m1,
            n,
            m2,
            activation,
            w1,
            b1: vec![0.0; n],
            w2,
            b2: vec![0.0; m2],
        })
    }

    /// Build a network from explicit weights (e.g. loaded from disk).
    pub fn from_weights(
        activation: Activation,
        w1: Vec<f64>,
        b1: Vec<f64>,
        w2: Vec<f64>,
        b2: Vec<f64>,
    ) -> Result<Self> {
        let n = b1.len();
        let m2 = b2.len();
        if n == 0 || m2 == 0 {
            return Err(Error::Shape("bias vectors must be non-empty".into()));
        }
        if !w1.len().is_multiple_of(n) || w1.is_empty() {
            return Err(Error::Shape(format!(
                "first weight matrix of {} entries does not split into {n} rows",
                w1.len()
            )));
        }
        let m1 = w1.len() / n;
        if w2.len() != m2 * n {
            return Err(Error::Shape(format!(
                "second weight matrix must be {m2}x{n}, got {} entries",
                w2.len()
            )));
        }
        Ok(Self { m1, n, m2, activation, w1, b1, w2, b2 })
    }

    pub fn input_dim(&self) -> usize {
        self.m1
    }

    pub fn hidden_dim(&self) -> usize {
        self.n
    }

    pub fn output_dim(&self) -> usize {
        self.m2
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> (&[f64], &[f64], &[f64], &[f64]) {
        (&self.w1, &self.b1, &self.w2, &self.b2)
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (_, _, out) = self.forward_parts(x)?;
        Ok(out)
    }

    fn forward_parts(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        if x.len() != self.m1 {
            return Err(Error::Shape(format!(
                "input has {} entries, expected {}",
                x.len(),
                self.m1
            )));
        }
        let pre = affine(&self.w1, self.n, self.m1, x, &self.b1);
        let hidden: Vec<f64> = pre.iter().map(|&p| self.activation.eval(p)).collect();
        let out = affine(&self.w2, self.m2, self.n, &hidden, &self.b2);
        Ok((pre, hidden, out))
    }

    /// Mean squared error over the dataset, averaged over samples and
    /// output coordinates.
    pub fn loss(&self, data: &Dataset) -> Result<f64> {
        let mut total = 0.0;
        for (x, y) in data.iter() {
            let out = self.forward(x)?;
            if out.len() != y.len() {
                return Err(Error::Shape(format!(
                    "target has {} entries, expected {}",
                    y.len(),
                    out.len()
                )));
            }
            // Accumulated coordinate by coordinate, matching `loss_grad`,
            // so both report bit-identical values for the same parameters.
            for (o, t) in out.iter().zip(y) {
                total += (o - t) * (o - t);
            }
        }
        Ok(total / (data.len() * self.m2) as f64)
    }

    /// Loss together with its gradient in every parameter.
    // Indexed loops keep the flat row-major strides and the accumulation
    // order explicit; both are load-bearing for bit-reproducibility.
    #[allow(clippy::needless_range_loop)]
    pub fn loss_grad(&self, data: &Dataset) -> Result<(f64, Gradients)> {
        let mut grads = Gradients::zeros(self);
        let mut total = 0.0;
        let scale = 2.0 / (data.len() * self.m2) as f64;
        for (x, y) in data.iter() {
            let (pre, hidden, out) = self.forward_parts(x)?;
            if y.len() != self.m2 {
                return Err(Error::Shape(format!(
                    "target has {} entries, expected {}",
                    y.len(),
                    self.m2
                )));
            }
            let dout: Vec<f64> = out
                .iter()
                .zip(y)
                .map(|(o, t)| {
                    total += (o - t) * (o - t);
                    scale * (o - t)
                })
                .collect();
            for r in 0..self.m2 {
                for j in 0..self.n {
                    grads.w2[r * self.n + j] += dout[r] * hidden[j];
                }
                grads.b2[r] += dout[r];
            }
            for j in 0..self.n {
                let mut dh = 0.0;
                for r in 0..self.m2 {
                    dh += self.w2[r * self.n + j] * dout[r];
                }
                let dpre = dh * self.activation.slope(pre[j]);
                for k in 0..self.m1 {
                    grads.w1[j * self.m1 + k] += dpre * x[k];
                }
                grads.b1[j] += dpre;
            }
        }
        Ok((total / (data.len() * self.m2) as f64, grads))
    }

    /// Largest relative disagreement between analytic and central-difference
    /// gradients on one sample, with the denominator floored at one.
    pub fn grad_check(&self, x: &[f64], y: &[f64], h: f64) -> Result<f64> {
        let data = Dataset::new(vec![x.to_vec()], vec![y.to_vec()])?;
        let (_, grads) = self.loss_grad(&data)?;
        let analytic = [&grads.w1, &grads.b1, &grads.w2, &grads.b2];
        let mut worst = 0.0_f64;
        for (slot, a_vec) in analytic.iter().enumerate() {
            for i in 0..a_vec.len() {
                let mut plus = self.clone();
                let mut minus = self.clone();
                *param_mut(&mut plus, slot, i) += h;
                *param_mut(&mut minus, slot, i) -= h;
                let numeric = (plus.loss(&data)? - minus.loss(&data)?) / (2.0 * h);
                let a = a_vec[i];
                let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1.0);
                worst = worst.max(err);
            }
        }
        Ok(worst)
    }
}

fn param_mut(net: &mut TwoLayerNet, slot: usize, i: usize) -> &mut f64 {
    match slot {
        0 => &mut net.w1[i],
        1 => &mut net.b1[i],
        2 => &mut net.w2[i],
        3 => &mut net.b2[i],
        _ => unreachable!("parameter slot {slot}"),
    }
}

/// `out[r] = sum_j w[r,j] x[j] + b[r]`, products accumulated in ascending
/// column order with the bias added last.
pub(crate) fn affine(w: &[f64], rows: usize, cols: usize, x: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows);
    for r in 0..rows {
        let row = &w[r * cols..(r + 1) * cols];
        let mut acc = 0.0;
        for (wj, xj) in row.iter().zip(x) {
            acc += wj * xj;
        }
        out.push(acc + b[r]);
    }
    out
}

#[derive(Debug, Clone)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Gradients {
    fn zeros(net: &TwoLayerNet) -> Self {
        Self {
            w1: vec![0.0; net.w1.len()],
            b1: vec![0.0; net.b1.len()],
            w2: vec![0.0; net.w2.len()],
            b2: vec![0.0; net.b2.len()],
        }
    }
}

/// Paired inputs and targets for supervised training.
#[derive(Debug, Clone)]
pub struct Dataset {
    inputs: Vec<Vec<f64>>,
    targets: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::Shape("dataset must contain at least one sample".into()));
        }
        if inputs.len() != targets.len() {
            return Err(Error::Shape(format!(
                "{} inputs but {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        let din = inputs[0].len();
        let dout = targets[0].len();
        if din == 0 || dout == 0 {
            return Err(Error::Shape("samples must be non-empty vectors".into()));
        }
        if inputs.iter().any(|x| x.len() != din) || targets.iter().any(|y| y.len() != dout) {
            return Err(Error::Shape("ragged dataset".into()));
        }
        Ok(Self { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], &[f64])> {
        self.inputs
            .iter()
            .map(|x| x.as_slice())
            .zip(self.targets.iter().map(|y| y.as_slice()))
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[Vec<f64>] {
        &self.targets
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub step: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !self.step.is_finite() || self.step < 0.0 {
            return Err(Error::Config(format!(
                "step size must be finite and non-negative, got {}",
                self.step
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if self.restarts == 0 {
            return Err(Error::Config("at least one restart is required".into()));
        }
        Ok(())
    }
}

/// Outcome of one restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub seed: u64,
    pub final_loss: f64,
    pub diverged: bool,
}

/// The trained network, the loss history of the winning restart (initial
/// loss plus one entry per epoch), and a record per restart.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub net: TwoLayerNet,
    pub history: Vec<f64>,
    pub restarts: Vec<RestartRecord>,
    pub winner: usize,
}

/// Full-batch gradient descent with classical momentum. Restart 0 starts
/// from the provided network; restart `r > 0` draws a fresh network seeded
/// `config.seed + r`. The restart with the smallest finite final loss wins,
/// earliest index on ties; a non-finite loss marks the restart as diverged
/// rather than failing the call.
pub fn train(net: TwoLayerNet, data: &Dataset, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let dims = (net.m1, net.n, net.m2, net.activation);
    let mut runs: Vec<(TwoLayerNet, Vec<f64>, RestartRecord)> = Vec::new();
    for r in 0..config.restarts {
        let seed = config.seed + r as u64;
        let start = if r == 0 {
            net.clone()
        } else {
            TwoLayerNet::new(dims.0, dims.1, dims.2, dims.3, seed)?
        };
        runs.push(run_once(start, data, config, seed)?);
    }
    let winner = pick_winner(&runs.iter().map(|r| r.2.clone()).collect::<Vec<_>>());
    let restarts = runs.iter().map(|r| r.2.clone()).collect();
    let (net, history, _) = runs.swap_remove(winner);
    Ok(TrainOutcome { net, history, restarts, winner })
}

fn run_once(
    mut net: TwoLayerNet,
    data: &Dataset,
    config: &TrainConfig,
    seed: u64,
) -> Result<(TwoLayerNet, Vec<f64>, RestartRecord)> {
    let mut velocity = Gradients::zeros(&net);
    let mut history = Vec::with_capacity(config.epochs + 1);
    let mut diverged = false;
    for _ in 0..config.epochs {
        let (loss, grads) = net.loss_grad(data)?;
        history.push(loss);
        if !loss.is_finite() {
            diverged = true;
            break;
        }
        for (slot, g) in [&grads.w1, &grads.b1, &grads.w2, &grads.b2].iter().enumerate() {
            let v = match slot {
                0 => &mut velocity.w1,
                1 => &mut velocity.b1,
                2 => &mut velocity.w2,
                _ => &mut velocity.b2,
            };
            for i in 0..g.len() {
                v[i] = config.momentum * v[i] - config.step * g[i];
                *param_mut(&mut net, slot, i) += v[i];
            }
        }
    }
    if !diverged {
        let final_loss = net.loss(data)?;
        history.push(final_loss);
        if !final_loss.is_finite() {
            diverged = true;
        }
    }
    let final_loss = *history.last().unwrap_or(&f64::INFINITY);
    Ok((net, history, RestartRecord { seed, final_loss, diverged }))
}

/// Index of the best restart: smallest final loss among the runs that
/// converged, earliest index on ties; if every run diverged, the earliest
/// smallest final loss overall.
pub(crate) fn pick_winner(records: &[RestartRecord]) -> usize {
    let candidate = |allow_diverged: bool| {
        records
            .iter()
            .enumerate()
            .filter(|(_, r)| allow_diverged || !r.diverged)
            .filter(|(_, r)| !r.final_loss.is_nan())
            .min_by(|(_, a), (_, b)| a.final_loss.total_cmp(&b.final_loss))
            .map(|(i, _)| i)
    };
    candidate(false).or_else(|| candidate(true)).unwrap_or(0)
}
