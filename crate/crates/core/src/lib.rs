//! Factoring operators on function spaces through finite sample vectors.
//!
//! The pieces, bottom to top:
//!
//! - [`funcspace`]: box domains, uniform grids with trapezoid quadrature,
//!   grid-sampled functions with nearest or multilinear interpolation, and
//!   random slope-bounded test functions.
//! - [`covering`]: lattice covers of a box at a given radius, greedy covers
//!   of finite metric sets, and counting bounds.
//! - [`bounds`]: moduli of continuity, the tolerance chain from an error
//!   budget down to a cover radius, and unit-count bounds.
//! - [`factorize`]: the sampling/reconstruction pair through cover points,
//!   exact on samples by construction.
//! - [`operators`]: a zoo of target operators with declared moduli.
//! - [`net`]: a dense two-layer network with full-batch momentum training.
//! - [`layers`]: functional, basis, and integral-kernel layers lifting a
//!   finite network to one that consumes and produces functions.
//! - [`persist`]: canonical JSON documents for everything above.
//! - [`experiment`]: the end-to-end harness producing byte-stable reports.

pub mod bounds;
pub mod covering;
pub mod error;
pub mod experiment;
pub mod factorize;
pub mod format;
pub mod funcspace;
pub mod layers;
pub mod net;
pub mod operators;
pub mod persist;

pub use bounds::{
    cover_radius, factorization_margin, function_tolerance, max_lipschitz, unit_count_bound,
    BoundVariant, ModulusSpec,
};
pub use covering::{box_covering_bound, cover_box, greedy_cover, verify_cover, BoxCover};
pub use error::{Error, Result};
pub use factorize::{map_factorization_error, SampleFactorization};
pub use format::{canonical_json, format_f64};
pub use funcspace::{
    random_lipschitz, sup_distance, BoxDomain, Grid, InterpRule, LipschitzClass, SampledFunction,
};
pub use layers::{
    assemble, basis_from_interpolation, mollified_functional_weights, quad_integral, Architecture,
    BasisLayer, FunctionalLayer, NetInput, OperatorLayer, OperatorNet,
};
pub use net::{train, Activation, Dataset, TrainConfig, TrainOutcome, TwoLayerNet};
pub use operators::{PointwiseMap, TargetOperator};
pub use persist::{
    load_assembly, load_function, load_json, load_net, save_assembly, save_function, save_json,
    save_net, AssemblyDoc, FactorizationDoc, FunctionDoc, NetDoc,
};
pub use experiment::{
    resolve_radii, run_experiment, run_experiment_full, ExperimentConfig, OperatorSpec,
    RadiusSpec, Report, ResolvedRadii, TestsetSpec, TrainSpec,
};
