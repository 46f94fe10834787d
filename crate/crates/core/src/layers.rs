//! Layers that act on grid functions: functional layers contracting a
//! function to hidden coordinates by quadrature, basis layers expanding
//! coordinates back to a function, and dense integral-kernel layers. A
//! finite two-layer network is lifted into these shapes by `assemble`.

use serde::{Deserialize, Serialize};

use crate::covering::BoxCover;
use crate::error::{Error, Result};
use crate::factorize::SampleFactorization;
use crate::funcspace::{Grid, InterpRule, SampledFunction};
use crate::net::{affine, Activation, TwoLayerNet};

/// Quadrature approximation of the inner product of two functions sampled
/// on the same grid: products are accumulated in ascending node order.
pub fn quad_integral(f: &SampledFunction, w: &SampledFunction) -> Result<f64> {
    if !f.grid().same_layout(w.grid()) {
        return Err(Error::Shape(
            "inner product requires both functions on one grid".into(),
        ));
    }
    let qw = f.grid().quad_weights();
    let mut acc = 0.0;
    for ((fv, wv), q) in f.values().iter().zip(w.values()).zip(qw) {
        acc += fv * wv * q;
    }
    Ok(acc)
}

/// Maps a function to hidden coordinates: unit `j` computes the quadrature
/// inner product against its weight function, plus a bias.
#[derive(Debug, Clone)]
pub struct FunctionalLayer {
    weights: Vec<SampledFunction>,
    biases: Vec<f64>,
}

impl FunctionalLayer {
    pub fn new(weights: Vec<SampledFunction>, biases: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Shape("a functional layer needs at least one unit".into()));
        }
        if weights.len() != biases.len() {
            return Err(Error::Shape(format!(
                "{} weight functions but {} biases",
                weights.len(),
                biases.len()
            )));
        }
        if weights.iter().any(|w| !w.grid().same_layout(weights[0].grid())) {
            return Err(Error::Shape("weight functions live on different grids".into()));
        }
        Ok(Self { weights, biases })
    }

    pub fn units(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, j: usize) -> &SampledFunction {
        &self.weights[j]
    }

    pub fn grid(&self) -> &Grid {
        self.weights[0].grid()
    }

    pub fn apply(&self, f: &SampledFunction) -> Result<Vec<f64>> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| Ok(quad_integral(f, w)? + b))
            .collect()
    }
}

/// Maps hidden coordinates to a function: a fixed combination of basis
/// functions plus a bias function, all on one grid.
#[derive(Debug, Clone)]
pub struct BasisLayer {
    basis: Vec<SampledFunction>,
    bias: SampledFunction,
}

impl BasisLayer {
    pub fn new(basis: Vec<SampledFunction>, bias: SampledFunction) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::Shape("a basis layer needs at least one basis function".into()));
        }
        if basis.iter().any(|b| !b.grid().same_layout(bias.grid())) {
            return Err(Error::Shape("basis and bias live on different grids".into()));
        }
        Ok(Self { basis, bias })
    }

    pub fn units(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self, j: usize) -> &SampledFunction {
        &self.basis[j]
    }

    pub fn bias(&self) -> &SampledFunction {
        &self.bias
    }

    pub fn grid(&self) -> &Grid {
        self.bias.grid()
    }

    pub fn apply(&self, y: &[f64]) -> Result<SampledFunction> {
        if y.len() != self.basis.len() {
            return Err(Error::Shape(format!(
                "{} coordinates for {} basis functions",
                y.len(),
                self.basis.len()
            )));
        }
        let grid = self.bias.grid().clone();
        let mut values = Vec::with_capacity(grid.len());
        for t in 0..grid.len() {
            let mut acc = 0.0;
            for (c, b) in y.iter().zip(&self.basis) {
                acc += c * b.values()[t];
            }
            values.push(acc + self.bias.values()[t]);
        }
        SampledFunction::new(grid, values, self.bias.interp())
    }
}

/// Dense integral-kernel layer: `out(t) = sum_u k(t, u) f(u) qw(u) + bias(t)`
/// with the kernel stored row-major over (output node, input node).
#[derive(Debug, Clone)]
pub struct OperatorLayer {
    kernel: Vec<f64>,
    input_grid: Grid,
    bias: SampledFunction,
}

impl OperatorLayer {
    pub fn new(kernel: Vec<f64>, input_grid: Grid, bias: SampledFunction) -> Result<Self> {
        let rows = bias.grid().len();
        let cols = input_grid.len();
        if kernel.len() != rows * cols {
            return Err(Error::Shape(format!(
                "kernel must be {rows}x{cols}, got {} entries",
                kernel.len()
            )));
        }
        Ok(Self { kernel, input_grid, bias })
    }

    pub fn output_grid(&self) -> &Grid {
        self.bias.grid()
    }

    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        if !f.grid().same_layout(&self.input_grid) {
            return Err(Error::Shape("input is not sampled on the layer's grid".into()));
        }
        let qw = self.input_grid.quad_weights();
        let cols = self.input_grid.len();
        let out_grid = self.bias.grid().clone();
        let mut values = Vec::with_capacity(out_grid.len());
        for r in 0..out_grid.len() {
            let row = &self.kernel[r * cols..(r + 1) * cols];
            let mut acc = 0.0;
            for u in 0..cols {
                acc += row[u] * f.values()[u] * qw[u];
            }
            values.push(acc + self.bias.values()[r]);
        }
        SampledFunction::new(out_grid, values, self.bias.interp())
    }
}

/// Functional-layer weights for a finite first layer `W`: unit `j` gets the
/// step function `sum_x W[j,x] 1_{B_r(x)} / mass(x)`, where `mass(x)` is the
/// quadrature mass of the ball indicator on `grid` (so that the quadrature
/// inner product against a function constant on the ball reproduces `W`
/// exactly). Balls must be disjoint, inside the domain, and contain at
/// least one grid node.
pub fn mollified_functional_weights(
    w: &[f64],
    biases: &[f64],
    cover: &BoxCover,
    r: f64,
    grid: &Grid,
) -> Result<FunctionalLayer> {
    let units = biases.len();
    let m = cover.len();
    if units == 0 {
        return Err(Error::Shape("at least one unit is required".into()));
    }
    if w.len() != units * m {
        return Err(Error::Shape(format!(
            "weight matrix must be {units}x{m}, got {} entries",
            w.len()
        )));
    }
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::Range(format!("ball radius must be finite and positive, got {r}")));
    }
    if grid.domain() != cover.domain() {
        return Err(Error::Domain("cover and quadrature grid disagree on the domain".into()));
    }
    let domain = cover.domain();
    for c in 0..m {
        let center = cover.center(c);
        for (a, &ca) in center.iter().enumerate() {
            if ca - r < domain.lower()[a] - 1e-12 || ca + r > domain.upper()[a] + 1e-12 {
                return Err(Error::Domain(format!(
                    "ball of radius {r} at cover point {c} leaves the domain"
                )));
            }
        }
    }
    for a in 0..domain.dim() {
        let axis = cover.axis_centers(a);
        if axis.len() > 1 {
            let step = axis[1] - axis[0];
            if 2.0 * r >= step * (1.0 - 1e-12) {
                return Err(Error::Domain(format!(
                    "balls of radius {r} overlap: cover spacing on axis {a} is {step}"
                )));
            }
        }
    }

    let mut values = vec![vec![0.0; grid.len()]; units];
    for c in 0..m {
        let center = cover.center(c);
        let mut mass = 0.0;
        let mut members = Vec::new();
        for u in 0..grid.len() {
            let node = grid.node(u);
            let dist2: f64 = node
                .iter()
                .zip(&center)
                .map(|(n, x)| (n - x) * (n - x))
                .sum();
            if dist2.sqrt() <= r * (1.0 + 1e-12) {
                mass += grid.quad_weights()[u];
                members.push(u);
            }
        }
        if mass <= 0.0 {
            return Err(Error::Range(format!(
                "ball of radius {r} at cover point {c} contains no grid node"
            )));
        }
        for (j, row) in values.iter_mut().enumerate() {
            let scaled = w[j * m + c] / mass;
            for &u in &members {
                row[u] += scaled;
            }
        }
    }
    let weights = values
        .into_iter()
        .map(|v| SampledFunction::new(grid.clone(), v, InterpRule::Nearest))
        .collect::<Result<Vec<_>>>()?;
    FunctionalLayer::new(weights, biases.to_vec())
}

/// Basis layer for a finite second layer `V` and bias `b`: basis function
/// `i` interpolates column `i` of `V`, and the bias function interpolates
/// `b`, through the output-side reconstruction.
pub fn basis_from_interpolation(
    sf: &SampleFactorization,
    v: &[f64],
    n_cols: usize,
    bias: &[f64],
) -> Result<BasisLayer> {
    let m2 = sf.order();
    if n_cols == 0 {
        return Err(Error::Shape("at least one basis column is required".into()));
    }
    if v.len() != m2 * n_cols {
        return Err(Error::Shape(format!(
            "matrix must be {m2}x{n_cols}, got {} entries",
            v.len()
        )));
    }
    if bias.len() != m2 {
        return Err(Error::Shape(format!("bias must have {m2} entries, got {}", bias.len())));
    }
    let basis = (0..n_cols)
        .map(|i| {
            let col: Vec<f64> = (0..m2).map(|c| v[c * n_cols + i]).collect();
            sf.delta_star(&col)
        })
        .collect::<Result<Vec<_>>>()?;
    let bias_fn = sf.delta_star(bias)?;
    BasisLayer::new(basis, bias_fn)
}

/// Shape of an assembled network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    /// Two integral-kernel layers through a latent point lattice.
    OperatorOperator,
    /// Functional layer into the hidden units, basis layer out.
    FunctionalBasis,
    /// Finite first layer on sample vectors, basis layer out.
    FiniteBasis,
}

/// A two-layer network assembled to consume and produce grid functions.
// The variants intentionally differ in size: each holds exactly the layer
// data its architecture needs, and a network is built once per experiment.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
pub enum OperatorNet {
    OperatorOperator {
        first: OperatorLayer,
        activation: Activation,
        second: OperatorLayer,
    },
    FunctionalBasis {
        functional: FunctionalLayer,
        activation: Activation,
        basis: BasisLayer,
    },
    FiniteBasis {
        w1: Vec<f64>,
        b1: Vec<f64>,
        activation: Activation,
        basis: BasisLayer,
    },
}

/// Input to an assembled network: a function for the two function-input
/// shapes, a sample vector for the finite-input shape.
#[derive(Debug, Clone, Copy)]
pub enum NetInput<'a> {
    Function(&'a SampledFunction),
    Vector(&'a [f64]),
}

impl OperatorNet {
    pub fn architecture(&self) -> Architecture {
        match self {
            Self::OperatorOperator { .. } => Architecture::OperatorOperator,
            Self::FunctionalBasis { .. } => Architecture::FunctionalBasis,
            Self::FiniteBasis { .. } => Architecture::FiniteBasis,
        }
    }

    pub fn output_grid(&self) -> &Grid {
        match self {
            Self::OperatorOperator { second, .. } => second.output_grid(),
            Self::FunctionalBasis { basis, .. } => basis.grid(),
            Self::FiniteBasis { basis, .. } => basis.grid(),
        }
    }

    pub fn apply(&self, input: NetInput) -> Result<SampledFunction> {
        match (self, input) {
            (Self::OperatorOperator { first, activation, second }, NetInput::Function(f)) => {
                let mid = first.apply(f)?;
                let hidden = SampledFunction::new(
                    mid.grid().clone(),
                    mid.values().iter().map(|&v| activation.eval(v)).collect(),
                    mid.interp(),
                )?;
                second.apply(&hidden)
            }
            (Self::FunctionalBasis { functional, activation, basis }, NetInput::Function(f)) => {
                let pre = functional.apply(f)?;
                let hidden: Vec<f64> = pre.iter().map(|&v| activation.eval(v)).collect();
                basis.apply(&hidden)
            }
            (Self::FiniteBasis { w1, b1, activation, basis }, NetInput::Vector(x)) => {
                let n = b1.len();
                let m1 = w1.len() / n;
                if x.len() != m1 {
                    return Err(Error::Shape(format!(
                        "input has {} entries, expected {m1}",
                        x.len()
                    )));
                }
                let pre = affine(w1, n, m1, x, b1);
                let hidden: Vec<f64> = pre.iter().map(|&v| activation.eval(v)).collect();
                basis.apply(&hidden)
            }
            (Self::FiniteBasis { .. }, NetInput::Function(_)) => Err(Error::Config(
                "this architecture takes a sample vector, not a function".into(),
            )),
            (_, NetInput::Vector(_)) => Err(Error::Config(
                "this architecture takes a function input, not a vector".into(),
            )),
        }
    }
}

/// Lift a trained finite network into the requested shape. The input
/// factorization interprets the first layer's columns, the output
/// factorization interpolates the second layer's columns, and `mollify_r`
/// sets the ball radius of the functional weights (unused for the
/// finite-input shape).
pub fn assemble(
    architecture: Architecture,
    net: &TwoLayerNet,
    sf_x: &SampleFactorization,
    sf_y: &SampleFactorization,
    mollify_r: f64,
) -> Result<OperatorNet> {
    if net.input_dim() != sf_x.order() {
        return Err(Error::Shape(format!(
            "network consumes {} coordinates but the input cover has {} points",
            net.input_dim(),
            sf_x.order()
        )));
    }
    if net.output_dim() != sf_y.order() {
        return Err(Error::Shape(format!(
            "network produces {} coordinates but the output cover has {} points",
            net.output_dim(),
            sf_y.order()
        )));
    }
    let (w1, b1, w2, b2) = net.weights();
    let basis = basis_from_interpolation(sf_y, w2, net.hidden_dim(), b2)?;
    match architecture {
        Architecture::FiniteBasis => Ok(OperatorNet::FiniteBasis {
            w1: w1.to_vec(),
            b1: b1.to_vec(),
            activation: net.activation(),
            basis,
        }),
        Architecture::FunctionalBasis => {
            let functional =
                mollified_functional_weights(w1, b1, sf_x.cover(), mollify_r, sf_x.target_grid())?;
            Ok(OperatorNet::FunctionalBasis {
                functional,
                activation: net.activation(),
                basis,
            })
        }
        Architecture::OperatorOperator => {
            let functional =
                mollified_functional_weights(w1, b1, sf_x.cover(), mollify_r, sf_x.target_grid())?;
            let latent = Grid::point_lattice(net.hidden_dim())?;
            let in_len = functional.grid().len();
            let mut k1 = Vec::with_capacity(net.hidden_dim() * in_len);
            for j in 0..net.hidden_dim() {
                k1.extend_from_slice(functional.weight(j).values());
            }
            let first = OperatorLayer::new(
                k1,
                functional.grid().clone(),
                SampledFunction::new(latent.clone(), b1.to_vec(), InterpRule::Nearest)?,
            )?;
            let out_len = basis.grid().len();
            let mut k2 = Vec::with_capacity(out_len * net.hidden_dim());
            for t in 0..out_len {
                for j in 0..net.hidden_dim() {
                    // Latent quadrature weights are one, so the kernel is
                    // the basis values themselves.
                    k2.push(basis.basis(j).values()[t]);
                }
            }
            let second = OperatorLayer::new(k2, latent, basis.bias().clone())?;
            Ok(OperatorNet::OperatorOperator {
                first,
                activation: net.activation(),
                second,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::cover_box;
    use crate::funcspace::{sup_distance, BoxDomain};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_interval() -> BoxDomain {
        BoxDomain::interval(0.0, 1.0).unwrap()
    }

    fn factorization(gamma: f64, cells: usize, interp: InterpRule) -> SampleFactorization {
        SampleFactorization::build(&unit_interval(), gamma, interp, cells).unwrap()
    }

    #[test]
    fn quadrature_inner_products_match_exact_integrals() {
        let g = Grid::uniform(&unit_interval(), 11).unwrap();
        let one = SampledFunction::constant(g.clone(), 1.0, InterpRule::Multilinear);
        assert!((quad_integral(&one, &one).unwrap() - 1.0).abs() <= 1e-15);
        let ramp = SampledFunction::from_fn(g, InterpRule::Multilinear, |t| t[0]);
        // The trapezoid rule integrates piecewise-linear functions exactly.
        assert!((quad_integral(&ramp, &one).unwrap() - 0.5).abs() <= 1e-15);
    }

    #[test]
    fn quadrature_rejects_mismatched_grids() {
        let a = SampledFunction::constant(
            Grid::uniform(&unit_interval(), 11).unwrap(),
            1.0,
            InterpRule::Nearest,
        );
        let b = SampledFunction::constant(
            Grid::uniform(&unit_interval(), 12).unwrap(),
            1.0,
            InterpRule::Nearest,
        );
        assert!(quad_integral(&a, &b).is_err());
    }

    #[test]
    fn functional_layer_matches_a_hand_computation() {
        let g = Grid::uniform(&unit_interval(), 3).unwrap();
        // Quadrature weights are (0.25, 0.5, 0.25).
        let w = SampledFunction::new(g.clone(), vec![2.0, 0.0, 4.0], InterpRule::Nearest).unwrap();
        let layer = FunctionalLayer::new(vec![w], vec![0.5]).unwrap();
        let f = SampledFunction::new(g, vec![1.0, 7.0, 3.0], InterpRule::Nearest).unwrap();
        let out = layer.apply(&f).unwrap();
        assert_eq!(out.len(), 1);
        let expected = 2.0 * 1.0 * 0.25 + 4.0 * 3.0 * 0.25 + 0.5;
        assert!((out[0] - expected).abs() <= 1e-15, "got {}", out[0]);
    }

    #[test]
    fn mollified_weights_integrate_back_to_the_matrix() {
        let cover = cover_box(&unit_interval(), 0.1).unwrap();
        let g = Grid::uniform(&unit_interval(), 201).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let w: Vec<f64> = (0..3 * cover.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let layer = mollified_functional_weights(&w, &[0.0; 3], &cover, 0.02, &g).unwrap();
        let one = SampledFunction::constant(g, 1.0, InterpRule::Nearest);
        for j in 0..3 {
            let integral = quad_integral(layer.weight(j), &one).unwrap();
            let row_sum: f64 = (0..cover.len()).map(|c| w[j * cover.len() + c]).sum();
            assert!(
                (integral - row_sum).abs() <= 1e-12,
                "unit {j}: integral {integral} vs row sum {row_sum}"
            );
        }
    }

    #[test]
    fn mollified_weights_reproduce_samples_of_linear_functions() {
        // Balls are symmetric around their centers, so averaging a linear
        // function over a ball returns its center value.
        let cover = cover_box(&unit_interval(), 0.1).unwrap();
        let g = Grid::uniform(&unit_interval(), 201).unwrap();
        let m = cover.len();
        let mut w = vec![0.0; m * m];
        for c in 0..m {
            w[c * m + c] = 1.0;
        }
        let layer = mollified_functional_weights(&w, &vec![0.0; m], &cover, 0.02, &g).unwrap();
        let f = SampledFunction::from_fn(g, InterpRule::Multilinear, |t| 3.0 * t[0] - 1.0);
        let out = layer.apply(&f).unwrap();
        for (c, &val) in out.iter().enumerate() {
            let expected = 3.0 * cover.center(c)[0] - 1.0;
            assert!(
                (val - expected).abs() <= 1e-12,
                "center {c}: {val} vs {expected}"
            );
        }
    }

    #[test]
    fn mollified_weights_reject_bad_geometry() {
        let cover = cover_box(&unit_interval(), 0.1).unwrap();
        let g = Grid::uniform(&unit_interval(), 201).unwrap();
        let m = cover.len();
        let w = vec![1.0; m];
        // Spacing between centers is 0.2, so radius 0.1 makes balls touch.
        let overlap = mollified_functional_weights(&w, &[0.0], &cover, 0.1, &g);
        assert!(matches!(overlap, Err(Error::Domain(_))), "touching balls must be rejected");
        let wide = cover_box(&unit_interval(), 0.6).unwrap();
        let escape = mollified_functional_weights(&[1.0], &[0.0], &wide, 0.6, &g);
        assert!(matches!(escape, Err(Error::Domain(_))), "balls must stay inside the domain");
        let coarse = Grid::uniform(&unit_interval(), 2).unwrap();
        let empty = mollified_functional_weights(&[1.0], &[0.0], &wide, 0.1, &coarse);
        assert!(matches!(empty, Err(Error::Range(_))), "node-free balls must be rejected");
        assert!(mollified_functional_weights(&w, &[0.0], &cover, -0.1, &g).is_err());
        assert!(mollified_functional_weights(&w[..3], &[0.0], &cover, 0.02, &g).is_err());
    }

    #[test]
    fn basis_layer_agrees_with_reconstructing_the_affine_image() {
        for interp in [InterpRule::Nearest, InterpRule::Multilinear] {
            let sf = factorization(0.1, 4, interp);
            let m2 = sf.order();
            let n = 3;
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            let v: Vec<f64> = (0..m2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..m2).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let layer = basis_from_interpolation(&sf, &v, n, &b).unwrap();
            for trial in 0..20u64 {
                let mut trng = ChaCha8Rng::seed_from_u64(trial);
                let y: Vec<f64> = (0..n).map(|_| trng.gen_range(-1.0..1.0)).collect();
                let direct = layer.apply(&y).unwrap();
                let image: Vec<f64> = (0..m2)
                    .map(|c| {
                        let mut acc = 0.0;
                        for (i, yi) in y.iter().enumerate() {
                            acc += v[c * n + i] * yi;
                        }
                        acc + b[c]
                    })
                    .collect();
                let reconstructed = sf.delta_star(&image).unwrap();
                let gap = sup_distance(&direct, &reconstructed).unwrap();
                assert!(gap <= 1e-12, "{interp:?} trial {trial}: gap {gap}");
            }
        }
    }

    #[test]
    fn operator_layer_matches_a_hand_computation() {
        let g = Grid::uniform(&unit_interval(), 3).unwrap();
        let out_grid = Grid::point_lattice(2).unwrap();
        let bias = SampledFunction::new(out_grid, vec![1.0, -1.0], InterpRule::Nearest).unwrap();
        // Rows: constant kernel 1, and a kernel reading the middle node.
        let kernel = vec![1.0, 1.0, 1.0, 0.0, 2.0, 0.0];
        let layer = OperatorLayer::new(kernel, g.clone(), bias).unwrap();
        let f = SampledFunction::new(g, vec![4.0, 8.0, 12.0], InterpRule::Nearest).unwrap();
        let out = layer.apply(&f).unwrap();
        // Quadrature weights (0.25, 0.5, 0.25): row 1 integrates f, row 2
        // reads 2*f(mid)*0.5.
        assert!((out.values()[0] - (8.0 + 1.0)).abs() <= 1e-15);
        assert!((out.values()[1] - (8.0 - 1.0)).abs() <= 1e-15);
    }

    #[test]
    fn latent_lattice_has_unit_weights() {
        let latent = Grid::point_lattice(4).unwrap();
        assert_eq!(latent.quad_weights(), &[1.0; 4]);
    }

    fn assembled_pair(
        interp: InterpRule,
    ) -> (TwoLayerNet, SampleFactorization, SampleFactorization) {
        let sf_x = factorization(0.1, 4, interp);
        let sf_y = factorization(0.1, 4, interp);
        let net =
            TwoLayerNet::new(sf_x.order(), 6, sf_y.order(), Activation::Tanh, 99).unwrap();
        (net, sf_x, sf_y)
    }

    #[test]
    fn kernel_and_functional_assemblies_agree_exactly() {
        let (net, sf_x, sf_y) = assembled_pair(InterpRule::Multilinear);
        let kernel_net =
            assemble(Architecture::OperatorOperator, &net, &sf_x, &sf_y, 0.02).unwrap();
        let functional_net =
            assemble(Architecture::FunctionalBasis, &net, &sf_x, &sf_y, 0.02).unwrap();
        let g = sf_x.target_grid().clone();
        for seed in 0..10u64 {
            let f = crate::funcspace::random_lipschitz(
                &crate::funcspace::LipschitzClass::new(1.0, 1.0).unwrap(),
                &g,
                seed,
            );
            let a = kernel_net.apply(NetInput::Function(&f)).unwrap();
            let b = functional_net.apply(NetInput::Function(&f)).unwrap();
            let gap = sup_distance(&a, &b).unwrap();
            assert_eq!(gap, 0.0, "seed {seed}: the two assemblies should be bit-identical");
        }
    }

    #[test]
    fn finite_assembly_reproduces_the_reconstructed_forward_pass() {
        let (net, sf_x, sf_y) = assembled_pair(InterpRule::Nearest);
        let finite = assemble(Architecture::FiniteBasis, &net, &sf_x, &sf_y, 0.02).unwrap();
        let g = sf_x.target_grid().clone();
        for seed in 0..10u64 {
            let f = crate::funcspace::random_lipschitz(
                &crate::funcspace::LipschitzClass::new(1.0, 1.0).unwrap(),
                &g,
                seed,
            );
            let x = sf_x.delta(&f).unwrap();
            let through_net = sf_y.delta_star(&net.forward(&x).unwrap()).unwrap();
            let through_layers = finite.apply(NetInput::Vector(&x)).unwrap();
            let gap = sup_distance(&through_net, &through_layers).unwrap();
            assert_eq!(gap, 0.0, "seed {seed}: nearest reconstruction should be bit-exact");
        }
    }

    #[test]
    fn inputs_of_the_wrong_kind_are_rejected() {
        let (net, sf_x, sf_y) = assembled_pair(InterpRule::Multilinear);
        let functional_net =
            assemble(Architecture::FunctionalBasis, &net, &sf_x, &sf_y, 0.02).unwrap();
        let finite = assemble(Architecture::FiniteBasis, &net, &sf_x, &sf_y, 0.02).unwrap();
        let x = vec![0.0; sf_x.order()];
        assert!(matches!(
            functional_net.apply(NetInput::Vector(&x)),
            Err(Error::Config(_))
        ));
        let f = SampledFunction::constant(
            sf_x.target_grid().clone(),
            0.0,
            InterpRule::Multilinear,
        );
        assert!(matches!(finite.apply(NetInput::Function(&f)), Err(Error::Config(_))));
    }

    #[test]
    fn assemble_checks_the_dimensions() {
        let (_, sf_x, sf_y) = assembled_pair(InterpRule::Multilinear);
        let wrong = TwoLayerNet::new(sf_x.order() + 1, 4, sf_y.order(), Activation::Tanh, 1)
            .unwrap();
        assert!(assemble(Architecture::FunctionalBasis, &wrong, &sf_x, &sf_y, 0.02).is_err());
        let wrong_out = TwoLayerNet::new(sf_x.order(), 4, sf_y.order() + 2, Activation::Tanh, 1)
            .unwrap();
        assert!(assemble(Architecture::FiniteBasis, &wrong_out, &sf_x, &sf_y, 0.02).is_err());
    }
}
