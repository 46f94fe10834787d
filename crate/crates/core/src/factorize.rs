//! Sample factorizations: evaluation at cover centers paired with an
//! interpolating reconstruction onto a finer target grid.
//!
//! The sampling map reads a function at the centers of a lattice cover; the
//! reconstruction map turns such a sample vector back into a grid function.
//! The target grid is built so every center coincides with one of its nodes
//! (center coordinates are snapped to the node bit pattern), which makes
//! sampling after reconstruction return the sample vector it started from.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::covering::{cover_box, BoxCover};
use crate::error::{Error, Result};
use crate::funcspace::{sup_distance, BoxDomain, Grid, InterpRule, SampledFunction};

/// Per-node reconstruction recipe, precomputed at build time.
#[derive(Debug, Clone)]
enum Plan {
    /// Flat center index per target node.
    Nearest(Vec<usize>),
    /// Sparse stencil `(center index, weight)` per target node.
    Multilinear(Vec<Vec<(usize, f64)>>),
}

/// A sampling/reconstruction pair over a lattice cover.
#[derive(Debug, Clone)]
pub struct SampleFactorization {
    cover: BoxCover,
    interp: InterpRule,
    target_grid: Grid,
    plan: Plan,
}

impl SampleFactorization {
    /// Build a factorization for `domain` at cover radius `gamma`.
    ///
    /// `cells_per_step` (even, at least 2) sets the target-grid resolution:
    /// that many grid cells per cover step, so centers land on grid nodes.
    pub fn build(
        domain: &BoxDomain,
        gamma: f64,
        interp: InterpRule,
        cells_per_step: usize,
    ) -> Result<Self> {
        if cells_per_step < 2 || !cells_per_step.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "cells_per_step must be even and at least 2, got {cells_per_step}"
            )));
        }
        let cover = cover_box(domain, gamma)?;
        let counts: Vec<usize> = cover
            .counts_per_axis()
            .iter()
            .map(|&n| cells_per_step * n + 1)
            .collect();
        let grid = Grid::uniform_per_axis(domain, &counts)?;
        Self::from_parts(cover, interp, grid)
    }

    /// Assemble from an existing cover and target grid. Every center must
    /// coincide with a grid node (up to one part in 1e9 of a grid cell);
    /// centers are snapped to the exact node coordinates.
    pub fn from_parts(cover: BoxCover, interp: InterpRule, target_grid: Grid) -> Result<Self> {
        if cover.domain() != target_grid.domain() {
            return Err(Error::Shape(
                "cover and target grid must share a domain".into(),
            ));
        }
        let d = target_grid.dim();
        let mut snapped = Vec::with_capacity(d);
        for a in 0..d {
            let nodes = target_grid.axis_nodes(a);
            let h = target_grid.spacing()[a];
            let mut axis = Vec::with_capacity(cover.axis_centers(a).len());
            for &c in cover.axis_centers(a) {
                let idx = ((c - nodes[0]) / h).round() as usize;
                let idx = idx.min(nodes.len() - 1);
                if (c - nodes[idx]).abs() > 1e-9 * h {
                    return Err(Error::Config(format!(
                        "center {c} on axis {a} does not lie on the target grid"
                    )));
                }
                axis.push(nodes[idx]);
            }
            snapped.push(axis);
        }
        let cover = BoxCover::from_parts(cover.domain().clone(), snapped, cover.radius())?;
        let plan = build_plan(&cover, interp, &target_grid);
        Ok(Self { cover, interp, target_grid, plan })
    }

    pub fn cover(&self) -> &BoxCover {
        &self.cover
    }

    pub fn interp(&self) -> InterpRule {
        self.interp
    }

    pub fn target_grid(&self) -> &Grid {
        &self.target_grid
    }

    /// Number of sampling sites.
    pub fn order(&self) -> usize {
        self.cover.len()
    }

    /// Operator norm bound of reconstruction-after-sampling: both rules
    /// produce convex combinations of sample values.
    pub fn norm_bound(&self) -> f64 {
        1.0
    }

    /// Sample a function at the cover centers.
    pub fn delta(&self, f: &SampledFunction) -> Result<Vec<f64>> {
        if f.grid().domain() != self.cover.domain() {
            return Err(Error::Domain(
                "function domain does not match the factorization domain".into(),
            ));
        }
        (0..self.order())
            .map(|i| f.evaluate(&self.cover.center(i)))
            .collect()
    }

    /// Reconstruct a grid function from a sample vector.
    pub fn delta_star(&self, v: &[f64]) -> Result<SampledFunction> {
        if v.len() != self.order() {
            return Err(Error::Shape(format!(
                "expected {} sample values, got {}",
                self.order(),
                v.len()
            )));
        }
        let values: Vec<f64> = match &self.plan {
            Plan::Nearest(centers) => centers.iter().map(|&c| v[c]).collect(),
            Plan::Multilinear(stencils) => stencils
                .iter()
                .map(|st| st.iter().map(|&(c, w)| w * v[c]).sum())
                .collect(),
        };
        SampledFunction::new(self.target_grid.clone(), values, self.interp)
    }

    /// Largest deviation of sample -> reconstruct -> sample from the
    /// identity, over `trials` random sample vectors with entries drawn
    /// uniformly from `[-magnitude, magnitude]`.
    pub fn check_diagram_b(&self, trials: usize, seed: u64, magnitude: f64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..trials {
            let v: Vec<f64> = (0..self.order())
                .map(|_| rng.gen_range(-magnitude..=magnitude))
                .collect();
            let back = self.delta(&self.delta_star(&v)?)?;
            for (a, b) in v.iter().zip(&back) {
                worst = worst.max((a - b).abs());
            }
        }
        Ok(worst)
    }

    /// Largest sup distance between a test function and its
    /// reconstruction-after-sampling. Test functions must live on the
    /// target grid.
    pub fn check_reconstruction(&self, testset: &[SampledFunction]) -> Result<f64> {
        let mut worst = 0.0f64;
        for f in testset {
            let rebuilt = self.delta_star(&self.delta(f)?)?;
            worst = worst.max(sup_distance(f, &rebuilt)?);
        }
        Ok(worst)
    }
}

/// Largest sup distance between `op` and its factored form
/// (sample -> reconstruct on both sides of `op`) over a test set living on
/// the input factorization's target grid.
pub fn map_factorization_error<F>(
    op: F,
    sf_x: &SampleFactorization,
    sf_y: &SampleFactorization,
    testset: &[SampledFunction],
) -> Result<f64>
where
    F: Fn(&SampledFunction) -> Result<SampledFunction>,
{
    let mut worst = 0.0f64;
    for f in testset {
        let exact = op(f)?;
        let rebuilt_input = sf_x.delta_star(&sf_x.delta(f)?)?;
        let mid = op(&rebuilt_input)?;
        let factored = sf_y.delta_star(&sf_y.delta(&mid)?)?;
        worst = worst.max(sup_distance(&factored, &exact)?);
    }
    Ok(worst)
}

fn build_plan(cover: &BoxCover, interp: InterpRule, grid: &Grid) -> Plan {
    let d = grid.dim();
    let counts = cover.counts_per_axis();
    // Strides of the flat center index (last axis fastest).
    let mut strides = vec![1usize; d];
    for a in (0..d.saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * counts[a + 1];
    }
    match interp {
        InterpRule::Nearest => {
            let per_axis: Vec<Vec<usize>> = (0..d)
                .map(|a| {
                    let centers = cover.axis_centers(a);
                    grid.axis_nodes(a)
                        .iter()
                        .map(|&t| nearest_center_index(t, centers))
                        .collect()
                })
                .collect();
            let mut plan = Vec::with_capacity(grid.len());
            for i in 0..grid.len() {
                let idx = grid.multi_index(i);
                let flat = (0..d).map(|a| per_axis[a][idx[a]] * strides[a]).sum();
                plan.push(flat);
            }
            Plan::Nearest(plan)
        }
        InterpRule::Multilinear => {
            // Per axis and node: up to two (center index, weight) entries.
            let per_axis: Vec<Vec<Vec<(usize, f64)>>> = (0..d)
                .map(|a| {
                    let centers = cover.axis_centers(a);
                    grid.axis_nodes(a)
                        .iter()
                        .map(|&t| axis_entries(t, centers))
                        .collect()
                })
                .collect();
            let mut plan = Vec::with_capacity(grid.len());
            for i in 0..grid.len() {
                let idx = grid.multi_index(i);
                let mut stencil: Vec<(usize, f64)> = vec![(0, 1.0)];
                for a in 0..d {
                    let entries = &per_axis[a][idx[a]];
                    let mut next = Vec::with_capacity(stencil.len() * entries.len());
                    for &(flat, w) in &stencil {
                        for &(k, wa) in entries {
                            next.push((flat + k * strides[a], w * wa));
                        }
                    }
                    stencil = next;
                }
                plan.push(stencil);
            }
            Plan::Multilinear(plan)
        }
    }
}

/// Index of the nearest center along one axis, ties to the lower index.
fn nearest_center_index(t: f64, centers: &[f64]) -> usize {
    let m = centers.len();
    if m == 1 {
        return 0;
    }
    let step = centers[1] - centers[0];
    let x = (t - centers[0]) / step;
    let j = x.floor();
    let frac = x - j;
    let k = if frac > 0.5 { j as isize + 1 } else { j as isize };
    k.clamp(0, m as isize - 1) as usize
}

/// Linear-interpolation entries along one axis, clamped to the outermost
/// centers beyond the lattice hull. Node coordinates that equal a center
/// bit-for-bit produce an exact unit weight on that center.
fn axis_entries(t: f64, centers: &[f64]) -> Vec<(usize, f64)> {
    let m = centers.len();
    if m == 1 {
        return vec![(0, 1.0)];
    }
    let step = centers[1] - centers[0];
    let x = (t - centers[0]) / step;
    let mut j = x.floor() as isize;
    j = j.clamp(0, m as isize - 2);
    let j = j as usize;
    if t == centers[j] {
        return vec![(j, 1.0), (j + 1, 0.0)];
    }
    if t == centers[j + 1] {
        return vec![(j, 0.0), (j + 1, 1.0)];
    }
    let u = ((t - centers[j]) / step).clamp(0.0, 1.0);
    vec![(j, 1.0 - u), (j + 1, u)]
}
