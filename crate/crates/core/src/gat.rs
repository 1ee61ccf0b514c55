//! Inference for the node-scoring network: graph-attention layers followed
//! by a dense head with a logistic output.
//!
//! Dropout is the identity at inference and batch normalization uses the
//! stored running statistics. Every attention neighborhood includes the
//! node itself.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path as FsPath;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::graph::WeightedGraph;
use crate::scoring::NodeScore;

pub const FORMAT_TAG: &str = "grasp-gat-v1";

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `self · rhs`
    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let o = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                for (ov, &b) in o.iter_mut().zip(rhs.row(k)) {
                    *ov += a * b;
                }
            }
        }
        out
    }
}

impl From<&FeatureMatrix> for Matrix {
    fn from(f: &FeatureMatrix) -> Self {
        Matrix {
            rows: f.rows,
            cols: f.cols,
            data: f.values.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Elu,
    Relu,
    Sigmoid,
    Identity,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Elu => {
                if x > 0.0 {
                    x
                } else {
                    x.exp_m1()
                }
            }
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Activation::Identity => x,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub scale: Vec<f64>,
    pub shift: Vec<f64>,
    pub eps: f64,
}

impl BatchNorm {
    fn apply(&self, x: &mut Matrix) {
        for r in 0..x.rows {
            for (c, v) in x.row_mut(r).iter_mut().enumerate() {
                *v = (*v - self.mean[c]) / (self.var[c] + self.eps).sqrt() * self.scale[c]
                    + self.shift[c];
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GatLayer {
    pub name: String,
    pub heads: usize,
    pub head_dim: usize,
    /// `in_dim × (heads · head_dim)`
    pub weight: Matrix,
    /// `heads × head_dim`, applied to the neighbor's transformed features.
    pub att_src: Matrix,
    /// `heads × head_dim`, applied to the receiving node's transformed features.
    pub att_dst: Matrix,
    pub bias: Vec<f64>,
    pub norm: Option<BatchNorm>,
    pub activation: Activation,
    pub negative_slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub name: String,
    /// `in_dim × out_dim`
    pub weight: Matrix,
    pub bias: Vec<f64>,
    pub norm: Option<BatchNorm>,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Gat(GatLayer),
    Dense(DenseLayer),
}

impl Layer {
    pub fn name(&self) -> &str {
        match self {
            Layer::Gat(l) => &l.name,
            Layer::Dense(l) => &l.name,
        }
    }

    pub fn in_dim(&self) -> usize {
        match self {
            Layer::Gat(l) => l.weight.rows,
            Layer::Dense(l) => l.weight.rows,
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            Layer::Gat(l) => l.heads * l.head_dim,
            Layer::Dense(l) => l.weight.cols,
        }
    }

    fn param_count(&self) -> usize {
        let bn = |n: &Option<BatchNorm>| n.as_ref().map_or(0, |b| 4 * b.mean.len());
        match self {
            Layer::Gat(l) => {
                l.weight.data.len() + l.att_src.data.len() + l.att_dst.data.len() + l.bias.len() + bn(&l.norm)
            }
            Layer::Dense(l) => l.weight.data.len() + l.bias.len() + bn(&l.norm),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default)]
    pub topology: String,
    #[serde(default)]
    pub feature_families: Vec<String>,
    #[serde(default)]
    pub config_hash: String,
    /// Anything else the producer recorded (label mode, schedule, ...).
    #[serde(default, flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights {
    pub input_dim: usize,
    pub metadata: Metadata,
    pub layers: Vec<Layer>,
}

/// Per-node attention over `[self, neighbors ascending]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeAttention {
    pub neighborhood: Vec<usize>,
    /// `coefficients[head][k]` weights `neighborhood[k]`.
    pub coefficients: Vec<Vec<f64>>,
}

fn check_finite(m: &Matrix, layer: &str) -> Result<()> {
    if m.data.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numeric {
            layer: layer.to_string(),
        })
    }
}

impl GatLayer {
    fn neighborhood(g: &WeightedGraph, i: usize) -> Vec<usize> {
        let mut hood = Vec::with_capacity(g.degree(i) + 1);
        hood.push(i);
        hood.extend(g.neighbors(i).iter().map(|&(j, _)| j));
        hood
    }

    fn scores(&self, z: &Matrix) -> (Matrix, Matrix) {
        let n = z.rows;
        let mut src = Matrix::zeros(n, self.heads);
        let mut dst = Matrix::zeros(n, self.heads);
        for i in 0..n {
            let zi = z.row(i);
            for h in 0..self.heads {
                let seg = &zi[h * self.head_dim..(h + 1) * self.head_dim];
                let s: f64 = seg.iter().zip(self.att_src.row(h)).map(|(a, b)| a * b).sum();
                let d: f64 = seg.iter().zip(self.att_dst.row(h)).map(|(a, b)| a * b).sum();
                src.data[i * self.heads + h] = s;
                dst.data[i * self.heads + h] = d;
            }
        }
        (src, dst)
    }

    fn leaky(&self, x: f64) -> f64 {
        if x >= 0.0 {
            x
        } else {
            self.negative_slope * x
        }
    }

    /// Softmax-normalized attention coefficients of this layer for input `x`.
    pub fn attention(&self, g: &WeightedGraph, x: &Matrix) -> Vec<NodeAttention> {
        let z = x.matmul(&self.weight);
        let (src, dst) = self.scores(&z);
        (0..g.node_count())
            .map(|i| {
                let hood = Self::neighborhood(g, i);
                let coefficients = (0..self.heads)
                    .map(|h| {
                        let raw: Vec<f64> = hood
                            .iter()
                            .map(|&j| self.leaky(dst.get(i, h) + src.get(j, h)))
                            .collect();
                        let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                        let exp: Vec<f64> = raw.iter().map(|r| (r - max).exp()).collect();
                        let total: f64 = exp.iter().sum();
                        exp.into_iter().map(|e| e / total).collect()
                    })
                    .collect();
                NodeAttention {
                    neighborhood: hood,
                    coefficients,
                }
            })
            .collect()
    }

    fn forward(&self, g: &WeightedGraph, x: &Matrix) -> Result<Matrix> {
        let z = x.matmul(&self.weight);
        let att = self.attention(g, x);
        let width = self.heads * self.head_dim;
        let mut out = Matrix::zeros(x.rows, width);
        for (i, a) in att.iter().enumerate() {
            let row = out.row_mut(i);
            for h in 0..self.heads {
                let span = h * self.head_dim..(h + 1) * self.head_dim;
                for (k, &j) in a.neighborhood.iter().enumerate() {
                    let w = a.coefficients[h][k];
                    for (o, &zj) in row[span.clone()].iter_mut().zip(&z.row(j)[span.clone()]) {
                        *o += w * zj;
                    }
                }
            }
            for (o, b) in row.iter_mut().zip(&self.bias) {
                *o += b;
            }
        }
        finish(&mut out, self.norm.as_ref(), self.activation);
        check_finite(&out, &self.name)?;
        Ok(out)
    }
}

fn finish(x: &mut Matrix, norm: Option<&BatchNorm>, act: Activation) {
    if let Some(bn) = norm {
        bn.apply(x);
    }
    for v in x.data.iter_mut() {
        *v = act.apply(*v);
    }
}

impl DenseLayer {
    fn forward(&self, x: &Matrix) -> Result<Matrix> {
        let mut out = x.matmul(&self.weight);
        for r in 0..out.rows {
            for (o, b) in out.row_mut(r).iter_mut().zip(&self.bias) {
                *o += b;
            }
        }
        finish(&mut out, self.norm.as_ref(), self.activation);
        check_finite(&out, &self.name)?;
        Ok(out)
    }
}

/// Layer sizes for [`ModelWeights::random`].
#[derive(Debug, Clone, PartialEq)]
pub struct Architecture {
    /// `(heads, head_dim)` per attention layer.
    pub gat: Vec<(usize, usize)>,
    pub dense: Vec<usize>,
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture {
            gat: vec![(16, 8), (32, 1)],
            dense: vec![32, 32, 32],
        }
    }
}

impl ModelWeights {
    /// Glorot-uniform weights with plausible batch-norm statistics; for
    /// tests and demos only.
    pub fn random(input_dim: usize, arch: &Architecture, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let glorot = |rows: usize, cols: usize, rng: &mut ChaCha8Rng| {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            Matrix {
                rows,
                cols,
                data: (0..rows * cols).map(|_| rng.gen_range(-limit..limit)).collect(),
            }
        };
        let bn = |width: usize, rng: &mut ChaCha8Rng| BatchNorm {
            mean: (0..width).map(|_| rng.gen_range(-0.1..0.1)).collect(),
            var: (0..width).map(|_| rng.gen_range(0.5..1.5)).collect(),
            scale: (0..width).map(|_| rng.gen_range(0.8..1.2)).collect(),
            shift: (0..width).map(|_| rng.gen_range(-0.1..0.1)).collect(),
            eps: 1e-5,
        };
        let mut layers = Vec::new();
        let mut width = input_dim;
        for (i, &(heads, head_dim)) in arch.gat.iter().enumerate() {
            let out = heads * head_dim;
            layers.push(Layer::Gat(GatLayer {
                name: format!("gat{}", i + 1),
                heads,
                head_dim,
                weight: glorot(width, out, &mut rng),
                att_src: glorot(heads, head_dim, &mut rng),
                att_dst: glorot(heads, head_dim, &mut rng),
                bias: (0..out).map(|_| rng.gen_range(-0.05..0.05)).collect(),
                norm: Some(bn(out, &mut rng)),
                activation: Activation::Elu,
                negative_slope: 0.2,
            }));
            width = out;
        }
        for (i, &units) in arch.dense.iter().enumerate() {
            layers.push(Layer::Dense(DenseLayer {
                name: format!("dense{}", i + 1),
                weight: glorot(width, units, &mut rng),
                bias: (0..units).map(|_| rng.gen_range(-0.05..0.05)).collect(),
                norm: Some(bn(units, &mut rng)),
                activation: Activation::Elu,
            }));
            width = units;
        }
        layers.push(Layer::Dense(DenseLayer {
            name: "output".into(),
            weight: glorot(width, 1, &mut rng),
            bias: vec![0.0],
            norm: None,
            activation: Activation::Sigmoid,
        }));
        ModelWeights {
            input_dim,
            metadata: Metadata {
                topology: "random".into(),
                config_hash: format!("seed-{seed}"),
                ..Default::default()
            },
            layers,
        }
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// Checks the dimension chain, the single-unit logistic output, and
    /// finiteness of every value.
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Schema("no layers".into()));
        }
        let mut width = self.input_dim;
        let mut seen_dense = false;
        for layer in &self.layers {
            let name = layer.name();
            if layer.in_dim() != width {
                return Err(Error::Schema(format!(
                    "layer `{name}` expects input width {} but receives {width}",
                    layer.in_dim()
                )));
            }
            match layer {
                Layer::Gat(l) => {
                    if seen_dense {
                        return Err(Error::Schema(format!(
                            "attention layer `{name}` follows a dense layer"
                        )));
                    }
                    let out = l.heads * l.head_dim;
                    if l.weight.cols != out
                        || l.att_src.rows != l.heads
                        || l.att_src.cols != l.head_dim
                        || l.att_dst.rows != l.heads
                        || l.att_dst.cols != l.head_dim
                        || l.bias.len() != out
                    {
                        return Err(Error::Schema(format!("layer `{name}` has inconsistent shapes")));
                    }
                    check_norm(name, l.norm.as_ref(), out)?;
                }
                Layer::Dense(l) => {
                    seen_dense = true;
                    if l.bias.len() != l.weight.cols {
                        return Err(Error::Schema(format!("layer `{name}` bias width mismatch")));
                    }
                    check_norm(name, l.norm.as_ref(), l.weight.cols)?;
                }
            }
            if !layer_values_finite(layer) {
                return Err(Error::Schema(format!("layer `{name}` holds non-finite values")));
            }
            width = layer.out_dim();
        }
        let last = self.layers.last().expect("non-empty");
        match last {
            Layer::Dense(l) if l.weight.cols == 1 && l.activation == Activation::Sigmoid => Ok(()),
            _ => Err(Error::Schema(format!(
                "final layer `{}` must be a one-unit sigmoid dense layer",
                last.name()
            ))),
        }
    }

    /// Runs the network and returns one score in `[0, 1]` per node.
    pub fn forward(&self, g: &WeightedGraph, features: &FeatureMatrix) -> Result<NodeScore> {
        if features.cols != self.input_dim {
            return Err(Error::validation(format!(
                "feature width {} does not match model input {}",
                features.cols, self.input_dim
            )));
        }
        if features.rows != g.node_count() {
            return Err(Error::validation("feature rows differ from node count"));
        }
        let mut x = Matrix::from(features);
        for layer in &self.layers {
            x = match layer {
                Layer::Gat(l) => l.forward(g, &x)?,
                Layer::Dense(l) => l.forward(&x)?,
            };
        }
        NodeScore::new((0..x.rows).map(|r| x.get(r, 0)).collect())
    }

    /// Attention coefficients of the `index`-th attention layer, computed
    /// on the activations that actually reach it.
    pub fn attention(
        &self,
        g: &WeightedGraph,
        features: &FeatureMatrix,
        index: usize,
    ) -> Result<Vec<NodeAttention>> {
        let mut x = Matrix::from(features);
        let mut seen = 0;
        for layer in &self.layers {
            if let Layer::Gat(l) = layer {
                if seen == index {
                    return Ok(l.attention(g, &x));
                }
                seen += 1;
                x = l.forward(g, &x)?;
            }
        }
        Err(Error::validation(format!("model has no attention layer #{index}")))
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: WeightFile =
            serde_json::from_str(text).map_err(|e| Error::Schema(format!("unparseable weight file: {e}")))?;
        let weights = file.into_weights()?;
        weights.validate()?;
        Ok(weights)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&WeightFile::from(self))?)
    }

    pub fn save(&self, path: impl AsRef<FsPath>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

fn check_norm(name: &str, bn: Option<&BatchNorm>, width: usize) -> Result<()> {
    if let Some(bn) = bn {
        if [bn.mean.len(), bn.var.len(), bn.scale.len(), bn.shift.len()]
            .iter()
            .any(|&l| l != width)
        {
            return Err(Error::Schema(format!("layer `{name}` batch-norm width mismatch")));
        }
        if bn.var.iter().any(|&v| v + bn.eps <= 0.0) {
            return Err(Error::Schema(format!("layer `{name}` has non-positive variance")));
        }
    }
    Ok(())
}

fn layer_values_finite(layer: &Layer) -> bool {
    let fin = |v: &[f64]| v.iter().all(|x| x.is_finite());
    let bn_fin = |n: &Option<BatchNorm>| {
        n.as_ref()
            .is_none_or(|b| fin(&b.mean) && fin(&b.var) && fin(&b.scale) && fin(&b.shift))
    };
    match layer {
        Layer::Gat(l) => {
            fin(&l.weight.data) && fin(&l.att_src.data) && fin(&l.att_dst.data) && fin(&l.bias) && bn_fin(&l.norm)
        }
        Layer::Dense(l) => fin(&l.weight.data) && fin(&l.bias) && bn_fin(&l.norm),
    }
}

// ---- on-disk representation ----

#[derive(Debug, Serialize, Deserialize)]
struct Tensor {
    shape: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum LayerKind {
    Gat,
    Dense,
}

#[derive(Debug, Serialize, Deserialize)]
struct LayerRecord {
    name: String,
    kind: LayerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    heads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    head_dim: Option<usize>,
    activation: Activation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    negative_slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bn_eps: Option<f64>,
    tensors: BTreeMap<String, Tensor>,
}

#[derive(Debug, Serialize, Deserialize)]
struct WeightFile {
    format: String,
    input_dim: usize,
    #[serde(default)]
    metadata: Metadata,
    layers: Vec<LayerRecord>,
}

impl LayerRecord {
    fn take(&mut self, key: &str) -> Result<Tensor> {
        let t = self
            .tensors
            .remove(key)
            .ok_or_else(|| Error::Schema(format!("layer `{}` lacks tensor `{key}`", self.name)))?;
        let expected: usize = t.shape.iter().product();
        if expected != t.values.len() {
            return Err(Error::Schema(format!(
                "layer `{}` tensor `{key}` has shape {:?} but {} values",
                self.name,
                t.shape,
                t.values.len()
            )));
        }
        Ok(t)
    }

    fn matrix(&mut self, key: &str) -> Result<Matrix> {
        let t = self.take(key)?;
        if t.shape.len() != 2 {
            return Err(Error::Schema(format!(
                "layer `{}` tensor `{key}` must be 2-D",
                self.name
            )));
        }
        Ok(Matrix {
            rows: t.shape[0],
            cols: t.shape[1],
            data: t.values,
        })
    }

    fn vector(&mut self, key: &str) -> Result<Vec<f64>> {
        let t = self.take(key)?;
        if t.shape.len() != 1 {
            return Err(Error::Schema(format!(
                "layer `{}` tensor `{key}` must be 1-D",
                self.name
            )));
        }
        Ok(t.values)
    }

    fn norm(&mut self) -> Result<Option<BatchNorm>> {
        if !self.tensors.contains_key("bn_mean") {
            return Ok(None);
        }
        Ok(Some(BatchNorm {
            mean: self.vector("bn_mean")?,
            var: self.vector("bn_var")?,
            scale: self.vector("bn_scale")?,
            shift: self.vector("bn_shift")?,
            eps: self.bn_eps.unwrap_or(1e-5),
        }))
    }
}

fn vec_tensor(v: &[f64]) -> Tensor {
    Tensor {
        shape: vec![v.len()],
        values: v.to_vec(),
    }
}

fn mat_tensor(m: &Matrix) -> Tensor {
    Tensor {
        shape: vec![m.rows, m.cols],
        values: m.data.clone(),
    }
}

fn norm_tensors(t: &mut BTreeMap<String, Tensor>, bn: &Option<BatchNorm>) -> Option<f64> {
    let bn = bn.as_ref()?;
    t.insert("bn_mean".into(), vec_tensor(&bn.mean));
    t.insert("bn_var".into(), vec_tensor(&bn.var));
    t.insert("bn_scale".into(), vec_tensor(&bn.scale));
    t.insert("bn_shift".into(), vec_tensor(&bn.shift));
    Some(bn.eps)
}

impl WeightFile {
    fn into_weights(self) -> Result<ModelWeights> {
        if self.format != FORMAT_TAG {
            return Err(Error::Schema(format!(
                "unsupported format `{}` (expected `{FORMAT_TAG}`)",
                self.format
            )));
        }
        let mut layers = Vec::with_capacity(self.layers.len());
        for mut rec in self.layers {
            let norm = rec.norm()?;
            let layer = match rec.kind {
                LayerKind::Gat => {
                    let heads = rec
                        .heads
                        .ok_or_else(|| Error::Schema(format!("layer `{}` lacks `heads`", rec.name)))?;
                    let head_dim = rec
                        .head_dim
                        .ok_or_else(|| Error::Schema(format!("layer `{}` lacks `head_dim`", rec.name)))?;
                    Layer::Gat(GatLayer {
                        heads,
                        head_dim,
                        weight: rec.matrix("weight")?,
                        att_src: rec.matrix("att_src")?,
                        att_dst: rec.matrix("att_dst")?,
                        bias: rec.vector("bias")?,
                        norm,
                        activation: rec.activation,
                        negative_slope: rec.negative_slope.unwrap_or(0.2),
                        name: rec.name,
                    })
                }
                LayerKind::Dense => Layer::Dense(DenseLayer {
                    weight: rec.matrix("weight")?,
                    bias: rec.vector("bias")?,
                    norm,
                    activation: rec.activation,
                    name: rec.name,
                }),
            };
            layers.push(layer);
        }
        Ok(ModelWeights {
            input_dim: self.input_dim,
            metadata: self.metadata,
            layers,
        })
    }
}

impl From<&ModelWeights> for WeightFile {
    fn from(w: &ModelWeights) -> Self {
        let layers = w
            .layers
            .iter()
            .map(|layer| {
                let mut tensors = BTreeMap::new();
                match layer {
                    Layer::Gat(l) => {
                        tensors.insert("weight".into(), mat_tensor(&l.weight));
                        tensors.insert("att_src".into(), mat_tensor(&l.att_src));
                        tensors.insert("att_dst".into(), mat_tensor(&l.att_dst));
                        tensors.insert("bias".into(), vec_tensor(&l.bias));
                        let bn_eps = norm_tensors(&mut tensors, &l.norm);
                        LayerRecord {
                            name: l.name.clone(),
                            kind: LayerKind::Gat,
                            heads: Some(l.heads),
                            head_dim: Some(l.head_dim),
                            activation: l.activation,
                            negative_slope: Some(l.negative_slope),
                            bn_eps,
                            tensors,
                        }
                    }
                    Layer::Dense(l) => {
                        tensors.insert("weight".into(), mat_tensor(&l.weight));
                        tensors.insert("bias".into(), vec_tensor(&l.bias));
                        let bn_eps = norm_tensors(&mut tensors, &l.norm);
                        LayerRecord {
                            name: l.name.clone(),
                            kind: LayerKind::Dense,
                            heads: None,
                            head_dim: None,
                            activation: l.activation,
                            negative_slope: None,
                            bn_eps,
                            tensors,
                        }
                    }
                }
            })
            .collect();
        WeightFile {
            format: FORMAT_TAG.into(),
            input_dim: w.input_dim,
            metadata: w.metadata.clone(),
            layers,
        }
    }
}
