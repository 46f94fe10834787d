//! Function-space plumbing: boxes, uniform grids, grid-sampled functions,
//! and Lipschitz classes.
//!
//! A continuous function is represented by its values on a uniform tensor
//! grid together with an interpolation rule. All norms and distances are
//! taken over grid nodes, so two functions can only be compared when they
//! share a grid layout.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box `[lower_1, upper_1] x ... x [lower_d, upper_d]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::Shape(format!(
                "box needs matching non-empty bounds, got {} lower and {} upper",
                lower.len(),
                upper.len()
            )));
        }
        for (a, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::Range(format!(
                    "axis {a}: bounds must be finite with lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// Convenience constructor for an interval `[lo, hi]`.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo], vec![hi])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    /// Euclidean diameter (length of the main diagonal).
    pub fn diameter(&self) -> f64 {
        (0..self.dim()).map(|a| self.side(a).powi(2)).sum::<f64>().sqrt()
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.side(a)).product()
    }

    /// Whether `t` lies in the box, allowing `tol` of overshoot per axis.
    pub fn contains(&self, t: &[f64], tol: f64) -> bool {
        t.len() == self.dim()
            && t.iter().enumerate().all(|(a, &x)| {
                x.is_finite() && x >= self.lower[a] - tol && x <= self.upper[a] + tol
            })
    }
}

/// Uniform tensor grid with trapezoid quadrature weights.
///
/// Nodes are ordered lexicographically with the last axis varying fastest.
#[derive(Debug, Clone)]
pub struct Grid {
    domain: BoxDomain,
    nodes_per_axis: Vec<usize>,
    spacing: Vec<f64>,
    axis_nodes: Vec<Vec<f64>>,
    quad_weights: Vec<f64>,
}

impl Grid {
    /// Uniform grid with the same node count on every axis.
    pub fn uniform(domain: &BoxDomain, nodes_per_axis: usize) -> Result<Self> {
        Self::uniform_per_axis(domain, &vec![nodes_per_axis; domain.dim()])
    }

    /// Uniform grid with a separate node count per axis.
    pub fn uniform_per_axis(domain: &BoxDomain, counts: &[usize]) -> Result<Self> {
        if counts.len() != domain.dim() {
            return Err(Error::Shape(format!(
                "expected {} axis counts, got {}",
                domain.dim(),
                counts.len()
            )));
        }
        if let Some(&n) = counts.iter().find(|&&n| n < 2) {
            return Err(Error::Range(format!(
                "grids need at least 2 nodes per axis, got {n}"
            )));
        }
        let mut spacing = Vec::with_capacity(counts.len());
        let mut axis_nodes = Vec::with_capacity(counts.len());
        for (a, &n) in counts.iter().enumerate() {
            let h = domain.side(a) / (n - 1) as f64;
            let mut nodes: Vec<f64> = (0..n).map(|i| domain.lower[a] + i as f64 * h).collect();
            // Pin the last node to the boundary so node coordinates and the
            // domain edge compare equal.
            nodes[n - 1] = domain.upper[a];
            spacing.push(h);
            axis_nodes.push(nodes);
        }
        let quad_weights = trapezoid_weights(counts, &spacing);
        Ok(Self {
            domain: domain.clone(),
            nodes_per_axis: counts.to_vec(),
            spacing,
            axis_nodes,
            quad_weights,
        })
    }

    /// Lattice of `n` labelled points on `[0, 1]` carrying unit quadrature
    /// weight each. Used to embed a finite index set as a discrete domain;
    /// its weights deliberately do not sum to the interval length.
    pub fn point_lattice(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Range("point lattice needs at least one point".into()));
        }
        let domain = BoxDomain::interval(0.0, 1.0)?;
        let nodes: Vec<f64> = if n == 1 {
            vec![0.5]
        } else {
            (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
        };
        let h = if n == 1 { 1.0 } else { 1.0 / (n - 1) as f64 };
        Ok(Self {
            domain,
            nodes_per_axis: vec![n],
            spacing: vec![h],
            axis_nodes: vec![nodes],
            quad_weights: vec![1.0; n],
        })
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.nodes_per_axis.len()
    }

    pub fn nodes_per_axis(&self) -> &[usize] {
        &self.nodes_per_axis
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn axis_nodes(&self, axis: usize) -> &[f64] {
        &self.axis_nodes[axis]
    }

    /// Total number of grid nodes.
    pub fn len(&self) -> usize {
        self.nodes_per_axis.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    /// Coordinates of the flat node `i`.
    pub fn node(&self, i: usize) -> Vec<f64> {
        let idx = self.multi_index(i);
        idx.iter()
            .enumerate()
            .map(|(a, &k)| self.axis_nodes[a][k])
            .collect()
    }

    /// Decode a flat index into per-axis indices (last axis fastest).
    pub fn multi_index(&self, mut i: usize) -> Vec<usize> {
        let d = self.dim();
        let mut idx = vec![0usize; d];
        for a in (0..d).rev() {
            idx[a] = i % self.nodes_per_axis[a];
            i /= self.nodes_per_axis[a];
        }
        idx
    }

    /// Encode per-axis indices into a flat index.
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.nodes_per_axis)
            .fold(0usize, |acc, (&k, &n)| acc * n + k)
    }

    /// Whether two grids share domain and node layout, so their node values
    /// are directly comparable.
    pub fn same_layout(&self, other: &Grid) -> bool {
        self.domain == other.domain && self.nodes_per_axis == other.nodes_per_axis
    }
}

fn trapezoid_weights(counts: &[usize], spacing: &[f64]) -> Vec<f64> {
    let axis_weights: Vec<Vec<f64>> = counts
        .iter()
        .zip(spacing)
        .map(|(&n, &h)| {
            (0..n)
                .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
                .collect()
        })
        .collect();
    let total: usize = counts.iter().product();
    let mut weights = Vec::with_capacity(total);
    for flat in 0..total {
        let mut w = 1.0;
        let mut rest = flat;
        for a in (0..counts.len()).rev() {
            let k = rest % counts[a];
            rest /= counts[a];
            w *= axis_weights[a][k];
        }
        weights.push(w);
    }
    weights
}

/// Interpolation rule attached to a grid-sampled function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpRule {
    /// Value of the nearest node; per-axis ties resolve to the lower index.
    Nearest,
    /// Tensor-product linear interpolation between the surrounding nodes.
    Multilinear,
}

/// A function represented by its values on a grid plus an interpolation rule.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<f64>,
    interp: InterpRule,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<f64>, interp: InterpRule) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "grid has {} nodes but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values, interp })
    }

    /// Constant function on `grid`.
    pub fn constant(grid: Grid, value: f64, interp: InterpRule) -> Self {
        let n = grid.len();
        Self { grid, values: vec![value; n], interp }
    }

    /// Sample a closure at every grid node.
    pub fn from_fn(grid: Grid, interp: InterpRule, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.node(i))).collect();
        Self { grid, values, interp }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn interp(&self) -> InterpRule {
        self.interp
    }

    pub fn with_rule(mut self, interp: InterpRule) -> Self {
        self.interp = interp;
        self
    }

    /// Largest absolute node value.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Evaluate at a point of the domain (boundary inclusive).
    ///
    /// Stored node values are reproduced exactly when `t` coincides with a
    /// node coordinate.
    pub fn evaluate(&self, t: &[f64]) -> Result<f64> {
        let grid = &self.grid;
        let tol = 1e-12;
        if !grid.domain().contains(t, tol) {
            return Err(Error::Domain(format!(
                "point {t:?} lies outside the function domain"
            )));
        }
        match self.interp {
            InterpRule::Nearest => {
                let idx: Vec<usize> = (0..grid.dim())
                    .map(|a| {
                        nearest_axis_index(
                            t[a],
                            grid.domain().lower[a],
                            grid.spacing[a],
                            grid.nodes_per_axis[a],
                        )
                    })
                    .collect();
                Ok(self.values[grid.flat_index(&idx)])
            }
            InterpRule::Multilinear => {
                let d = grid.dim();
                let (cell, frac): (Vec<usize>, Vec<f64>) = (0..d)
                    .map(|a| {
                        axis_cell(
                            t[a],
                            grid.axis_nodes(a),
                            grid.domain().lower[a],
                            grid.spacing[a],
                        )
                    })
                    .unzip();
                let mut acc = 0.0;
                let corners = 1usize << d;
                let mut idx = vec![0usize; d];
                for mask in 0..corners {
                    let mut w = 1.0;
                    for a in 0..d {
                        if mask & (1 << a) != 0 {
                            idx[a] = cell[a] + 1;
                            w *= frac[a];
                        } else {
                            idx[a] = cell[a];
                            w *= 1.0 - frac[a];
                        }
                    }
                    acc += w * self.values[grid.flat_index(&idx)];
                }
                Ok(acc)
            }
        }
    }

    /// Maximum absolute finite-difference slope between adjacent nodes,
    /// taken along every axis. Exact for piecewise-multilinear data; a lower
    /// estimate otherwise.
    pub fn estimate_lipschitz(&self) -> f64 {
        let grid = &self.grid;
        let d = grid.dim();
        let mut strides = vec![1usize; d];
        for a in (0..d.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * grid.nodes_per_axis[a + 1];
        }
        let mut worst = 0.0f64;
        for i in 0..grid.len() {
            let idx = grid.multi_index(i);
            for a in 0..d {
                if idx[a] + 1 < grid.nodes_per_axis[a] {
                    let slope =
                        (self.values[i + strides[a]] - self.values[i]).abs() / grid.spacing[a];
                    worst = worst.max(slope);
                }
            }
        }
        worst
    }
}

/// Index of the node nearest to `t` along one axis, ties to the lower index.
fn nearest_axis_index(t: f64, lower: f64, h: f64, n: usize) -> usize {
    let x = (t - lower) / h;
    let j = x.floor();
    let frac = x - j;
    let mut k = if frac > 0.5 { j as isize + 1 } else { j as isize };
    if k < 0 {
        k = 0;
    }
    if k as usize >= n {
        k = n as isize - 1;
    }
    k as usize
}

/// Cell index and local coordinate along one axis, with node coordinates
/// reproduced exactly and out-of-range fractions clamped to the boundary.
fn axis_cell(t: f64, nodes: &[f64], lower: f64, h: f64) -> (usize, f64) {
    let n = nodes.len();
    let x = (t - lower) / h;
    let mut j = x.floor() as isize;
    if j < 0 {
        j = 0;
    }
    if j as usize > n - 2 {
        j = n as isize - 2;
    }
    let j = j as usize;
    if t == nodes[j] {
        return (j, 0.0);
    }
    if t == nodes[j + 1] {
        return (j, 1.0);
    }
    let u = ((t - nodes[j]) / h).clamp(0.0, 1.0);
    (j, u)
}

/// Sup distance over shared grid nodes.
pub fn sup_distance(f: &SampledFunction, g: &SampledFunction) -> Result<f64> {
    if !f.grid().same_layout(g.grid()) {
        return Err(Error::Shape(
            "sup distance needs both functions on the same grid".into(),
        ));
    }
    Ok(f.values
        .iter()
        .zip(&g.values)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
}

/// Functions with a slope bound and an amplitude bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzClass {
    pub lambda: f64,
    pub amplitude: f64,
}

impl LipschitzClass {
    pub fn new(lambda: f64, amplitude: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::Range(format!(
                "slope bound must be finite and non-negative, got {lambda}"
            )));
        }
        if !amplitude.is_finite() || amplitude <= 0.0 {
            return Err(Error::Range(format!(
                "amplitude bound must be finite and positive, got {amplitude}"
            )));
        }
        Ok(Self { lambda, amplitude })
    }
}

/// Draw a random member of the class on `grid`, deterministically from
/// `seed`.
///
/// Values are a sum over axes of piecewise-linear random walks whose slopes
/// are drawn uniformly from `[-lambda, lambda]`; the result is rescaled into
/// the amplitude bound when it overshoots. Both class bounds hold for the
/// sampled values.
pub fn random_lipschitz(class: &LipschitzClass, grid: &Grid, seed: u64) -> SampledFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = grid.dim();
    let mut walks: Vec<Vec<f64>> = Vec::with_capacity(d);
    for a in 0..d {
        let n = grid.nodes_per_axis()[a];
        let h = grid.spacing()[a];
        let mut walk = Vec::with_capacity(n);
        let start = if a == 0 {
            rng.gen_range(-class.amplitude..=class.amplitude)
        } else {
            0.0
        };
        walk.push(start);
        for i in 1..n {
            let slope = if class.lambda == 0.0 {
                0.0
            } else {
                rng.gen_range(-class.lambda..=class.lambda)
            };
            walk.push(walk[i - 1] + slope * h);
        }
        walks.push(walk);
    }
    let mut values: Vec<f64> = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let idx = grid.multi_index(i);
        values.push((0..d).map(|a| walks[a][idx[a]]).sum());
    }
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > class.amplitude {
        let scale = class.amplitude / peak;
        for v in &mut values {
            *v *= scale;
        }
    }
    SampledFunction::new(grid.clone(), values, InterpRule::Multilinear)
        .expect("values were built from the grid")
}
