//! Fully connected networks with tanh hidden layers and a linear output,
//! evaluated in batches. Parameters live in one flat slice: for each layer the
//! row-major `out x in` weight matrix followed by the bias.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpShape {
    /// Layer widths from input to output.
    pub sizes: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
struct Layer {
    w: usize,
    b: usize,
    fan_in: usize,
    fan_out: usize,
}

impl MlpShape {
    pub fn new(input: usize, hidden: &[usize], output: usize) -> Self {
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(input);
        sizes.extend_from_slice(hidden);
        sizes.push(output);
        MlpShape { sizes }
    }

    pub fn input(&self) -> usize {
        self.sizes[0]
    }

    pub fn output(&self) -> usize {
        *self.sizes.last().expect("shape has at least two layers")
    }

    pub fn num_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn num_params(&self) -> usize {
        self.sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.len() < 2 || self.sizes.contains(&0) {
            return Err(Error::ShapeMismatch(format!("invalid layer sizes {:?}", self.sizes)));
        }
        Ok(())
    }

    fn layers(&self) -> impl Iterator<Item = Layer> + '_ {
        let mut offset = 0;
        self.sizes.windows(2).map(move |w| {
            let layer = Layer { w: offset, b: offset + w[0] * w[1], fan_in: w[0], fan_out: w[1] };
            offset += w[0] * w[1] + w[1];
            layer
        })
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(Error::ShapeMismatch(format!(
                "network {:?} needs {} parameters, got {}",
                self.sizes,
                self.num_params(),
                params.len()
            )));
        }
        Ok(())
    }

    /// Orthogonal weights scaled by `hidden_gain` (hidden layers) or
    /// `output_gain` (last layer); zero biases.
    pub fn init<R: Rng + ?Sized>(&self, params: &mut [f64], rng: &mut R, hidden_gain: f64, output_gain: f64) -> Result<()> {
        self.check_params(params)?;
        let last = self.num_layers() - 1;
        for (l, layer) in self.layers().enumerate() {
            let gain = if l == last { output_gain } else { hidden_gain };
            let w = orthogonal(layer.fan_out, layer.fan_in, rng);
            for (dst, src) in params[layer.w..layer.b].iter_mut().zip(&w) {
                *dst = gain * src;
            }
            params[layer.b..layer.b + layer.fan_out].fill(0.0);
        }
        Ok(())
    }

    /// Batched forward pass. `input` is row-major `batch x input()`; the
    /// output is left in `cache.output()`.
    pub fn forward(&self, params: &[f64], input: &[f64], batch: usize, cache: &mut MlpCache) -> Result<()> {
        self.check_params(params)?;
        if input.len() != batch * self.input() {
            return Err(Error::LengthMismatch { what: "network input", expected: batch * self.input(), got: input.len() });
        }
        cache.prepare(self, batch);
        cache.acts[0].copy_from_slice(input);
        let last = self.num_layers() - 1;
        for (l, layer) in self.layers().enumerate() {
            let (head, tail) = cache.acts.split_at_mut(l + 1);
            let a_in = &head[l];
            let z = &mut tail[0];
            let bias = &params[layer.b..layer.b + layer.fan_out];
            for row in z.chunks_exact_mut(layer.fan_out) {
                row.copy_from_slice(bias);
            }
            // z (batch x out) += a_in (batch x in) * W^T
            gemm(
                batch,
                layer.fan_in,
                layer.fan_out,
                Mat { data: a_in, rs: layer.fan_in, cs: 1 },
                Mat { data: &params[layer.w..layer.b], rs: 1, cs: layer.fan_in },
                z,
                1.0,
            );
            if l != last {
                z.iter_mut().for_each(|v| *v = v.tanh());
            }
        }
        if !cache.output().iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite network output ({:?})", self.sizes)));
        }
        Ok(())
    }

    /// Accumulate into `grad` the parameter gradient of `sum(d_out . output)`
    /// for the batch last passed through `forward` with the same cache.
    pub fn backward(&self, params: &[f64], cache: &mut MlpCache, d_out: &[f64], grad: &mut [f64]) -> Result<()> {
        self.check_params(params)?;
        self.check_params(grad)?;
        let batch = cache.batch;
        if d_out.len() != batch * self.output() {
            return Err(Error::LengthMismatch { what: "output gradient", expected: batch * self.output(), got: d_out.len() });
        }
        let layers: Vec<Layer> = self.layers().collect();
        cache.delta.clear();
        cache.delta.extend_from_slice(d_out);
        for (l, layer) in layers.iter().enumerate().rev() {
            let a_in = &cache.acts[l];
            let delta = &cache.delta;
            // dW (out x in) += delta^T (out x batch) * a_in (batch x in)
            gemm(
                layer.fan_out,
                batch,
                layer.fan_in,
                Mat { data: delta, rs: 1, cs: layer.fan_out },
                Mat { data: a_in, rs: layer.fan_in, cs: 1 },
                &mut grad[layer.w..layer.b],
                1.0,
            );
            let gb = &mut grad[layer.b..layer.b + layer.fan_out];
            for row in delta.chunks_exact(layer.fan_out) {
                for (g, d) in gb.iter_mut().zip(row) {
                    *g += d;
                }
            }
            if l == 0 {
                break;
            }
            // d a_in (batch x in) = delta (batch x out) * W (out x in)
            cache.scratch.clear();
            cache.scratch.resize(batch * layer.fan_in, 0.0);
            gemm(
                batch,
                layer.fan_out,
                layer.fan_in,
                Mat { data: delta, rs: layer.fan_out, cs: 1 },
                Mat { data: &params[layer.w..layer.b], rs: layer.fan_in, cs: 1 },
                &mut cache.scratch,
                0.0,
            );
            for (d, a) in cache.scratch.iter_mut().zip(a_in) {
                *d *= 1.0 - a * a;
            }
            std::mem::swap(&mut cache.delta, &mut cache.scratch);
        }
        Ok(())
    }
}

/// Activations kept between forward and backward passes.
#[derive(Debug, Clone, Default)]
pub struct MlpCache {
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    scratch: Vec<f64>,
    batch: usize,
}

impl MlpCache {
    fn prepare(&mut self, shape: &MlpShape, batch: usize) {
        self.acts.resize_with(shape.sizes.len(), Vec::new);
        for (a, &n) in self.acts.iter_mut().zip(&shape.sizes) {
            a.resize(batch * n, 0.0);
        }
        self.batch = batch;
    }

    /// Output of the last forward pass, row-major `batch x output`.
    pub fn output(&self) -> &[f64] {
        self.acts.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Activations of hidden layer `l` (1-based) from the last forward pass.
    pub fn hidden(&self, l: usize) -> &[f64] {
        &self.acts[l]
    }
}

struct Mat<'a> {
    data: &'a [f64],
    rs: usize,
    cs: usize,
}

/// `c (m x n, row-major) = a (m x k) * b (k x n) + beta * c`.
fn gemm(m: usize, k: usize, n: usize, a: Mat<'_>, b: Mat<'_>, c: &mut [f64], beta: f64) {
    let need = |mat: &Mat<'_>, rows: usize, cols: usize| (rows - 1) * mat.rs + (cols - 1) * mat.cs + 1;
    if m == 0 || n == 0 {
        return;
    }
    assert!(c.len() >= m * n);
    if k == 0 {
        c[..m * n].iter_mut().for_each(|v| *v *= beta);
        return;
    }
    assert!(a.data.len() >= need(&a, m, k) && b.data.len() >= need(&b, k, n));
    // SAFETY: the asserts above bound every element the strides can reach.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.data.as_ptr(),
            a.rs as isize,
            a.cs as isize,
            b.data.as_ptr(),
            b.rs as isize,
            b.cs as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Row-orthonormal (or column-orthonormal when `rows > cols`) matrix from a
/// Gaussian draw, row-major.
fn orthogonal<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Vec<f64> {
    let (n, len) = if rows <= cols { (rows, cols) } else { (cols, rows) };
    let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(n);
    while vecs.len() < n {
        let mut v: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
        for u in &vecs {
            let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|a| *a /= norm);
            vecs.push(v);
        }
    }
    let mut out = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            out[i * cols + j] = if rows <= cols { vecs[i][j] } else { vecs[j][i] };
        }
    }
    out
}
