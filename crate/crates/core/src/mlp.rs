//! Dense feed-forward network with a flat parameter vector.
//!
//! Parameters are stored layer by layer; each layer contributes its weight
//! matrix (`out × in`, row-major) followed by its bias vector. Hidden layers
//! apply the activation, the output layer is affine.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::rng::{self, Rng};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    #[default]
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    fn apply<T: Scalar>(self, z: T) -> T {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(T::zero()),
        }
    }

    /// Derivative expressed through the activation's output.
    #[inline]
    fn derivative_from_output<T: Scalar>(self, a: T) -> T {
        match self {
            Activation::Tanh => T::one() - a * a,
            Activation::Relu => {
                if a > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }
}

pub fn param_count_for(widths: &[usize]) -> usize {
    widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp<T> {
    /// Layer widths including input and output, e.g. `[p, 64, 1]`.
    pub widths: Vec<usize>,
    pub activation: Activation,
    pub params: Vec<T>,
}

/// Per-sample forward activations, reused across calls.
#[derive(Debug, Default, Clone)]
pub struct Scratch<T> {
    acts: Vec<Vec<T>>,
    deltas: Vec<Vec<T>>,
}

impl<T: Scalar> Mlp<T> {
    pub fn new(widths: Vec<usize>, activation: Activation, params: Vec<T>) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::config("mlp needs at least an input and an output layer of positive width"));
        }
        check_dim("mlp parameters", params.len(), param_count_for(&widths))?;
        Ok(Mlp {
            widths,
            activation,
            params,
        })
    }

    pub fn zeros(widths: Vec<usize>, activation: Activation) -> Result<Self> {
        let k = param_count_for(&widths);
        Self::new(widths, activation, vec![T::zero(); k])
    }

    /// Uniform(−s, s) weights with `s = init_scale` or `1/√fan_in`; zero biases.
    pub fn random(widths: Vec<usize>, activation: Activation, init_scale: Option<f64>, rng: &mut Rng) -> Result<Self> {
        let mut net = Self::zeros(widths, activation)?;
        for l in 0..net.layers() {
            let (fan_in, out) = (net.widths[l], net.widths[l + 1]);
            let s = init_scale.unwrap_or(1.0 / (fan_in as f64).sqrt());
            let off = net.layer_offset(l);
            for p in &mut net.params[off..off + fan_in * out] {
                *p = rng::uniform(rng, -s, s);
            }
        }
        Ok(net)
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn layers(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    fn layer_offset(&self, l: usize) -> usize {
        param_count_for(&self.widths[..=l])
    }

    /// Mask selecting weight entries (true) versus biases (false).
    pub fn weight_mask(&self) -> Vec<bool> {
        let mut mask = Vec::with_capacity(self.params.len());
        for l in 0..self.layers() {
            let (i, o) = (self.widths[l], self.widths[l + 1]);
            mask.extend(std::iter::repeat_n(true, i * o));
            mask.extend(std::iter::repeat_n(false, o));
        }
        mask
    }

    fn forward_into(&self, x: &[T], scratch: &mut Scratch<T>) {
        let layers = self.layers();
        scratch.acts.resize_with(layers + 1, Vec::new);
        scratch.acts[0].clear();
        scratch.acts[0].extend_from_slice(x);
        let mut off = 0;
        for l in 0..layers {
            let (din, dout) = (self.widths[l], self.widths[l + 1]);
            let w = &self.params[off..off + din * dout];
            let b = &self.params[off + din * dout..off + din * dout + dout];
            off += din * dout + dout;
            let (prev, rest) = scratch.acts.split_at_mut(l + 1);
            let input = &prev[l];
            let out = &mut rest[0];
            out.clear();
            let hidden = l + 1 < layers;
            for o in 0..dout {
                let row = &w[o * din..(o + 1) * din];
                let mut z = b[o];
                for (wi, xi) in row.iter().zip(input.iter()) {
                    z += *wi * *xi;
                }
                out.push(if hidden { self.activation.apply(z) } else { z });
            }
        }
    }

    /// First output unit.
    pub fn forward(&self, x: &[T]) -> Result<T> {
        check_dim("x", x.len(), self.input_dim())?;
        let mut s = Scratch::default();
        Ok(self.forward_with(x, &mut s))
    }

    pub fn forward_with(&self, x: &[T], scratch: &mut Scratch<T>) -> T {
        self.forward_into(x, scratch);
        scratch.acts[self.layers()][0]
    }

    /// Accumulates `d(coef · out)/dθ` for one sample into `grad`, where the
    /// forward pass for this sample is already in `scratch`.
    fn backward_into(&self, coef: T, scratch: &mut Scratch<T>, grad: &mut [T]) {
        let layers = self.layers();
        scratch.deltas.resize_with(layers + 1, Vec::new);
        let last = &mut scratch.deltas[layers];
        last.clear();
        last.push(coef);
        let mut off_end = self.params.len();
        for l in (0..layers).rev() {
            let (din, dout) = (self.widths[l], self.widths[l + 1]);
            let off = off_end - (din * dout + dout);
            off_end = off;
            let (lower, upper) = scratch.deltas.split_at_mut(l + 1);
            let delta = &upper[0];
            let input = &scratch.acts[l];
            let (gw, gb) = grad[off..off + din * dout + dout].split_at_mut(din * dout);
            for o in 0..dout {
                let d = delta[o];
                gb[o] += d;
                for (g, a) in gw[o * din..(o + 1) * din].iter_mut().zip(input) {
                    *g += d * *a;
                }
            }
            if l > 0 {
                let w = &self.params[off..off + din * dout];
                let prev = &mut lower[l];
                prev.clear();
                prev.resize(din, T::zero());
                for o in 0..dout {
                    let d = delta[o];
                    for (p, wi) in prev.iter_mut().zip(&w[o * din..(o + 1) * din]) {
                        *p += d * *wi;
                    }
                }
                for (p, a) in prev.iter_mut().zip(input) {
                    *p *= self.activation.derivative_from_output(*a);
                }
            }
        }
    }

    /// Mean square loss over `rows` against `targets` and its gradient.
    ///
    /// `grad` is overwritten.
    pub fn square_loss_grad(&self, xs: &[&[T]], targets: &[T], grad: &mut [T]) -> T {
        debug_assert_eq!(xs.len(), targets.len());
        grad.iter_mut().for_each(|g| *g = T::zero());
        let m = T::of_usize(xs.len());
        let two = T::of(2.0);
        let mut scratch = Scratch::default();
        let mut total = T::zero();
        for (x, &t) in xs.iter().zip(targets) {
            let out = self.forward_with(x, &mut scratch);
            let r = out - t;
            total += r * r;
            self.backward_into(two * r / m, &mut scratch, grad);
        }
        total / m
    }

    /// Gradient of the first output with respect to the parameters at `x`.
    pub fn output_grad(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim("x", x.len(), self.input_dim())?;
        let mut scratch = Scratch::default();
        let mut grad = vec![T::zero(); self.params.len()];
        self.forward_into(x, &mut scratch);
        self.backward_into(T::one(), &mut scratch, &mut grad);
        Ok(grad)
    }
}

/// Relative error `‖g − g_fd‖ / max(‖g‖, ‖g_fd‖)` between the backprop
/// gradient of the mean square loss and central differences with step `h`.
pub fn gradient_check(net: &Mlp<f64>, xs: &[&[f64]], targets: &[f64], h: f64) -> f64 {
    let mut grad = vec![0.0; net.param_count()];
    net.square_loss_grad(xs, targets, &mut grad);
    let loss = |m: &Mlp<f64>| -> f64 {
        xs.iter()
            .zip(targets)
            .map(|(x, t)| (m.forward(x).expect("valid input") - t).powi(2))
            .sum::<f64>()
            / xs.len() as f64
    };
    let mut probe = net.clone();
    let mut diff = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (i, &g) in grad.iter().enumerate() {
        let orig = probe.params[i];
        probe.params[i] = orig + h;
        let up = loss(&probe);
        probe.params[i] = orig - h;
        let down = loss(&probe);
        probe.params[i] = orig;
        let fd = (up - down) / (2.0 * h);
        diff += (g - fd).powi(2);
        na += g * g;
        nb += fd * fd;
    }
    let scale = na.sqrt().max(nb.sqrt());
    if scale == 0.0 {
        0.0
    } else {
        diff.sqrt() / scale
    }
}
