//! Finite covers: lattice covers of boxes, greedy covers of finite metric
//! sets, verification, and the counting bound for boxes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::BoxDomain;

/// Lattice cover of a box by Euclidean balls of a common radius.
///
/// Centers form a uniform product lattice, offset half a step inward from
/// the boundary, listed lexicographically with the last axis fastest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxCover {
    domain: BoxDomain,
    per_axis: Vec<Vec<f64>>,
    radius: f64,
}

impl BoxCover {
    /// Rebuild a cover from its stored pieces (used when loading persisted
    /// documents). The per-axis center lists must be non-empty.
    pub fn from_parts(domain: BoxDomain, per_axis: Vec<Vec<f64>>, radius: f64) -> Result<Self> {
        if per_axis.len() != domain.dim() || per_axis.iter().any(|c| c.is_empty()) {
            return Err(Error::Shape(
                "cover needs one non-empty center list per axis".into(),
            ));
        }
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::Range(format!(
                "cover radius must be finite and positive, got {radius}"
            )));
        }
        Ok(Self { domain, per_axis, radius })
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn counts_per_axis(&self) -> Vec<usize> {
        self.per_axis.iter().map(|c| c.len()).collect()
    }

    pub fn axis_centers(&self, axis: usize) -> &[f64] {
        &self.per_axis[axis]
    }

    /// Number of centers.
    pub fn len(&self) -> usize {
        self.per_axis.iter().map(|c| c.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinates of the flat center `i`.
    pub fn center(&self, i: usize) -> Vec<f64> {
        let mut rest = i;
        let d = self.per_axis.len();
        let mut out = vec![0.0; d];
        for a in (0..d).rev() {
            let n = self.per_axis[a].len();
            out[a] = self.per_axis[a][rest % n];
            rest /= n;
        }
        out
    }

    /// All centers in flat order.
    pub fn centers(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.center(i)).collect()
    }

    /// Flat index of the center nearest to `t`, per-axis ties resolving to
    /// the lower index.
    pub fn nearest_center(&self, t: &[f64]) -> usize {
        let mut flat = 0usize;
        for (a, centers) in self.per_axis.iter().enumerate() {
            let n = centers.len();
            let step = if n > 1 { centers[1] - centers[0] } else { 1.0 };
            let x = (t[a] - centers[0]) / step;
            let j = x.floor();
            let frac = x - j;
            let mut k = if frac > 0.5 { j as isize + 1 } else { j as isize };
            k = k.clamp(0, n as isize - 1);
            flat = flat * n + k as usize;
        }
        flat
    }
}

/// Cover a box with the lattice of balls of radius `gamma`.
///
/// Per axis the lattice uses `ceil(side * sqrt(d) / (2 gamma))` centers, so
/// every point of the box lies within `gamma` of some center.
pub fn cover_box(domain: &BoxDomain, gamma: f64) -> Result<BoxCover> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::Range(format!(
            "cover radius must be finite and positive, got {gamma}"
        )));
    }
    let d = domain.dim();
    let sqrt_d = (d as f64).sqrt();
    let mut per_axis = Vec::with_capacity(d);
    for a in 0..d {
        let side = domain.side(a);
        let n = (side * sqrt_d / (2.0 * gamma)).ceil().max(1.0) as usize;
        let step = side / n as f64;
        let centers: Vec<f64> = (0..n)
            .map(|k| domain.lower()[a] + (k as f64 + 0.5) * step)
            .collect();
        per_axis.push(centers);
    }
    BoxCover::from_parts(domain.clone(), per_axis, gamma)
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Largest distance from any probe point to its nearest center.
pub fn verify_cover(cover: &BoxCover, probes: &[Vec<f64>]) -> Result<f64> {
    let d = cover.domain().dim();
    let mut worst = 0.0f64;
    for p in probes {
        if p.len() != d {
            return Err(Error::Shape(format!(
                "probe has {} coordinates, cover lives in dimension {d}",
                p.len()
            )));
        }
        let c = cover.center(cover.nearest_center(p));
        worst = worst.max(euclidean(p, &c));
    }
    Ok(worst)
}

/// Greedy farthest-point cover of `count` items under a caller-supplied
/// metric, returning chosen item indices.
///
/// Starts from item 0, repeatedly adds the item farthest from the chosen
/// set while that distance exceeds `gamma`; ties resolve to the lowest
/// index. The result is a valid `gamma`-cover, not necessarily a minimal
/// one.
pub fn greedy_cover(count: usize, metric: impl Fn(usize, usize) -> f64, gamma: f64) -> Vec<usize> {
    if count == 0 {
        return Vec::new();
    }
    let mut centers = vec![0usize];
    let mut dist: Vec<f64> = (0..count).map(|i| metric(i, 0)).collect();
    loop {
        let mut far = 0usize;
        for i in 1..count {
            if dist[i] > dist[far] {
                far = i;
            }
        }
        if dist[far] <= gamma {
            return centers;
        }
        centers.push(far);
        for (i, di) in dist.iter_mut().enumerate() {
            let d = metric(i, far);
            if d < *di {
                *di = d;
            }
        }
    }
}

/// Largest distance from any item to its nearest chosen center.
pub fn verify_indexed_cover(
    count: usize,
    metric: impl Fn(usize, usize) -> f64,
    centers: &[usize],
) -> Result<f64> {
    if centers.is_empty() {
        return if count == 0 {
            Ok(0.0)
        } else {
            Err(Error::Shape("no centers given for a non-empty item set".into()))
        };
    }
    let mut worst = 0.0f64;
    for i in 0..count {
        let near = centers
            .iter()
            .map(|&c| metric(i, c))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(near);
    }
    Ok(worst)
}

/// Upper bound `ceil((2 + 2 diam / gamma)^d)` on the number of
/// `gamma`-balls needed to cover a set of diameter `diam` in dimension `d`.
pub fn box_covering_bound(diam: f64, gamma: f64, d: usize) -> Result<u128> {
    if !diam.is_finite() || diam <= 0.0 {
        return Err(Error::Range(format!(
            "diameter must be finite and positive, got {diam}"
        )));
    }
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::Range(format!(
            "cover radius must be finite and positive, got {gamma}"
        )));
    }
    if d == 0 {
        return Err(Error::Range("dimension must be positive".into()));
    }
    let value = (2.0 + 2.0 * diam / gamma).powi(d as i32).ceil();
    if !value.is_finite() || value >= u128::MAX as f64 {
        return Err(Error::Range(format!(
            "covering bound overflows an integer: ({diam}, {gamma}, {d})"
        )));
    }
    Ok(value as u128)
}
