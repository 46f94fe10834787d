//! JSON documents for networks, factorizations, assembled operator
//! networks, and sampled functions. All floats are written canonically
//! (17 significant digits), so saving the same object twice produces
//! identical bytes.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::covering::BoxCover;
use crate::error::{Error, Result};
use crate::factorize::SampleFactorization;
use crate::format::canonical_json;
use crate::funcspace::{BoxDomain, Grid, InterpRule, SampledFunction};
use crate::layers::{assemble, Architecture, OperatorNet};
use crate::net::{Activation, TwoLayerNet};

/// Write any serializable value as canonical JSON plus a trailing newline.
pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = canonical_json(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// On-disk form of a two-layer network. Weight matrices are stored as rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetDoc {
    pub m1: usize,
    pub n: usize,
    pub m2: usize,
    pub activation: Activation,
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    pub w2: Vec<Vec<f64>>,
    pub b2: Vec<f64>,
}

impl NetDoc {
    pub fn from_net(net: &TwoLayerNet) -> Self {
        let (w1, b1, w2, b2) = net.weights();
        Self {
            m1: net.input_dim(),
            n: net.hidden_dim(),
            m2: net.output_dim(),
            activation: net.activation(),
            w1: w1.chunks(net.input_dim()).map(<[f64]>::to_vec).collect(),
            b1: b1.to_vec(),
            w2: w2.chunks(net.hidden_dim()).map(<[f64]>::to_vec).collect(),
            b2: b2.to_vec(),
        }
    }

    pub fn build(&self) -> Result<TwoLayerNet> {
        if self.w1.len() != self.n
            || self.w1.iter().any(|row| row.len() != self.m1)
            || self.b1.len() != self.n
            || self.w2.len() != self.m2
            || self.w2.iter().any(|row| row.len() != self.n)
            || self.b2.len() != self.m2
        {
            return Err(Error::Shape(format!(
                "weight document does not describe a {}x{}x{} network",
                self.m1, self.n, self.m2
            )));
        }
        TwoLayerNet::from_weights(
            self.activation,
            self.w1.concat(),
            self.b1.clone(),
            self.w2.concat(),
            self.b2.clone(),
        )
    }
}

pub fn save_net(path: &Path, net: &TwoLayerNet) -> Result<()> {
    save_json(path, &NetDoc::from_net(net))
}

pub fn load_net(path: &Path) -> Result<TwoLayerNet> {
    load_json::<NetDoc>(path)?.build()
}

/// On-disk form of a sample factorization: the cover lattice, the
/// reconstruction rule, and the node counts of the target grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationDoc {
    pub domain: BoxDomain,
    pub per_axis: Vec<Vec<f64>>,
    pub radius: f64,
    pub interp: InterpRule,
    pub target_nodes: Vec<usize>,
}

impl FactorizationDoc {
    pub fn from_factorization(sf: &SampleFactorization) -> Self {
        let cover = sf.cover();
        Self {
            domain: cover.domain().clone(),
            per_axis: (0..cover.domain().dim())
                .map(|a| cover.axis_centers(a).to_vec())
                .collect(),
            radius: cover.radius(),
            interp: sf.interp(),
            target_nodes: sf.target_grid().nodes_per_axis().to_vec(),
        }
    }

    pub fn build(&self) -> Result<SampleFactorization> {
        let cover =
            BoxCover::from_parts(self.domain.clone(), self.per_axis.clone(), self.radius)?;
        let grid = Grid::uniform_per_axis(&self.domain, &self.target_nodes)?;
        SampleFactorization::from_parts(cover, self.interp, grid)
    }
}

/// On-disk form of an assembled operator network: the finite network plus
/// everything needed to re-lift it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssemblyDoc {
    pub architecture: Architecture,
    pub mollify_r: f64,
    pub net: NetDoc,
    pub input: FactorizationDoc,
    pub output: FactorizationDoc,
}

impl AssemblyDoc {
    pub fn from_parts(
        architecture: Architecture,
        net: &TwoLayerNet,
        sf_x: &SampleFactorization,
        sf_y: &SampleFactorization,
        mollify_r: f64,
    ) -> Self {
        Self {
            architecture,
            mollify_r,
            net: NetDoc::from_net(net),
            input: FactorizationDoc::from_factorization(sf_x),
            output: FactorizationDoc::from_factorization(sf_y),
        }
    }

    pub fn build(&self) -> Result<OperatorNet> {
        let net = self.net.build()?;
        let sf_x = self.input.build()?;
        let sf_y = self.output.build()?;
        assemble(self.architecture, &net, &sf_x, &sf_y, self.mollify_r)
    }
}

pub fn save_assembly(path: &Path, doc: &AssemblyDoc) -> Result<()> {
    save_json(path, doc)
}

pub fn load_assembly(path: &Path) -> Result<(AssemblyDoc, OperatorNet)> {
    let doc: AssemblyDoc = load_json(path)?;
    let net = doc.build()?;
    Ok((doc, net))
}

/// On-disk form of a sampled function on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionDoc {
    pub domain: BoxDomain,
    pub nodes_per_axis: Vec<usize>,
    pub interp: InterpRule,
    pub values: Vec<f64>,
}

impl FunctionDoc {
    pub fn from_function(f: &SampledFunction) -> Self {
        Self {
            domain: f.grid().domain().clone(),
            nodes_per_axis: f.grid().nodes_per_axis().to_vec(),
            interp: f.interp(),
            values: f.values().to_vec(),
        }
    }

    pub fn build(&self) -> Result<SampledFunction> {
        let grid = Grid::uniform_per_axis(&self.domain, &self.nodes_per_axis)?;
        SampledFunction::new(grid, self.values.clone(), self.interp)
    }
}

pub fn save_function(path: &Path, f: &SampledFunction) -> Result<()> {
    save_json(path, &FunctionDoc::from_function(f))
}

pub fn load_function(path: &Path) -> Result<SampledFunction> {
    load_json::<FunctionDoc>(path)?.build()
}
