//! Feed-forward Q-function with two rectified hidden layers and a scalar
//! output, trained by plain gradient descent on the squared TD error.

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};

const DUMP_HEADER: &str = "kcharge-qpolicy 1";

#[derive(Clone, Debug, PartialEq)]
pub struct QPolicy {
    input_dim: usize,
    h1: usize,
    h2: usize,
    /// `h1 x input_dim`, row-major.
    w1: Vec<f64>,
    b1: Vec<f64>,
    /// `h2 x h1`, row-major.
    w2: Vec<f64>,
    b2: Vec<f64>,
    w3: Vec<f64>,
    b3: f64,
}

/// Gradient with the same layout as the parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
    w3: Vec<f64>,
    b3: f64,
}

impl Gradients {
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        out.extend_from_slice(&self.w1);
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.w2);
        out.extend_from_slice(&self.b2);
        out.extend_from_slice(&self.w3);
        out.push(self.b3);
        out
    }
}

struct Activations {
    h1: Vec<f64>,
    h2: Vec<f64>,
}

impl QPolicy {
    pub fn zeros(input_dim: usize, hidden: [usize; 2]) -> Self {
        let [h1, h2] = hidden;
        QPolicy {
            input_dim,
            h1,
            h2,
            w1: vec![0.0; h1 * input_dim],
            b1: vec![0.0; h1],
            w2: vec![0.0; h2 * h1],
            b2: vec![0.0; h2],
            w3: vec![0.0; h2],
            b3: 0.0,
        }
    }

    /// He-uniform weights, zero biases.
    pub fn random<R: Rng>(input_dim: usize, hidden: [usize; 2], rng: &mut R) -> Self {
        let mut p = Self::zeros(input_dim, hidden);
        let mut fill = |w: &mut Vec<f64>, fan_in: usize| {
            let bound = (6.0 / fan_in as f64).sqrt();
            for v in w.iter_mut() {
                *v = rng.gen_range(-bound..bound);
            }
        };
        fill(&mut p.w1, input_dim);
        fill(&mut p.w2, p.h1);
        fill(&mut p.w3, p.h2);
        p
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden(&self) -> [usize; 2] {
        [self.h1, self.h2]
    }

    pub fn num_params(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len() + self.w3.len() + 1
    }

    fn forward(&self, x: &[f64]) -> (f64, Activations) {
        let mut h1 = self.b1.clone();
        for (j, h) in h1.iter_mut().enumerate() {
            let row = &self.w1[j * self.input_dim..(j + 1) * self.input_dim];
            *h = (*h + dot(row, x)).max(0.0);
        }
        let mut h2 = self.b2.clone();
        for (j, h) in h2.iter_mut().enumerate() {
            let row = &self.w2[j * self.h1..(j + 1) * self.h1];
            *h = (*h + dot(row, &h1)).max(0.0);
        }
        let q = self.b3 + dot(&self.w3, &h2);
        (q, Activations { h1, h2 })
    }

    pub fn q_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        Ok(self.forward(x).0)
    }

    /// Q-value without the dimension check; callers own the layout.
    pub(crate) fn q(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.input_dim);
        self.forward(x).0
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            w1: vec![0.0; self.w1.len()],
            b1: vec![0.0; self.b1.len()],
            w2: vec![0.0; self.w2.len()],
            b2: vec![0.0; self.b2.len()],
            w3: vec![0.0; self.w3.len()],
            b3: 0.0,
        }
    }

    /// Adds the gradient of `(y - Q(x))^2` to `grads`; returns the loss.
    pub fn accumulate(&self, x: &[f64], y: f64, grads: &mut Gradients) -> f64 {
        let (q, act) = self.forward(x);
        let err = q - y;
        let g = 2.0 * err;

        grads.b3 += g;
        let mut d2 = vec![0.0; self.h2];
        for j in 0..self.h2 {
            grads.w3[j] += g * act.h2[j];
            if act.h2[j] > 0.0 {
                d2[j] = g * self.w3[j];
            }
        }
        let mut d1 = vec![0.0; self.h1];
        for j in 0..self.h2 {
            if d2[j] == 0.0 {
                continue;
            }
            grads.b2[j] += d2[j];
            let row = j * self.h1;
            for i in 0..self.h1 {
                grads.w2[row + i] += d2[j] * act.h1[i];
                d1[i] += d2[j] * self.w2[row + i];
            }
        }
        for j in 0..self.h1 {
            if act.h1[j] <= 0.0 || d1[j] == 0.0 {
                continue;
            }
            grads.b1[j] += d1[j];
            let row = j * self.input_dim;
            for i in 0..self.input_dim {
                grads.w1[row + i] += d1[j] * x[i];
            }
        }
        err * err
    }

    /// Summed squared loss over `(features, target)` pairs and its gradient.
    pub fn loss_and_gradient(&self, batch: &[(&[f64], f64)]) -> (f64, Gradients) {
        let mut grads = self.zero_gradients();
        let mut loss = 0.0;
        for (x, y) in batch {
            loss += self.accumulate(x, *y, &mut grads);
        }
        (loss, grads)
    }

    pub fn loss(&self, batch: &[(&[f64], f64)]) -> f64 {
        batch.iter().map(|(x, y)| (self.forward(x).0 - y).powi(2)).sum()
    }

    pub fn sgd_step(&mut self, grads: &Gradients, step: f64) {
        let pairs = [
            (&mut self.w1, &grads.w1),
            (&mut self.b1, &grads.b1),
            (&mut self.w2, &grads.w2),
            (&mut self.b2, &grads.b2),
            (&mut self.w3, &grads.w3),
        ];
        for (p, g) in pairs {
            for (v, d) in p.iter_mut().zip(g) {
                *v -= step * d;
            }
        }
        self.b3 -= step * grads.b3;
    }

    /// All parameters in layout order `w1 b1 w2 b2 w3 b3`.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        out.extend_from_slice(&self.w1);
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.w2);
        out.extend_from_slice(&self.b2);
        out.extend_from_slice(&self.w3);
        out.push(self.b3);
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                got: flat.len(),
            });
        }
        let mut rest = flat;
        for p in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2, &mut self.w3] {
            let (head, tail) = rest.split_at(p.len());
            p.copy_from_slice(head);
            rest = tail;
        }
        self.b3 = rest[0];
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|v| v.is_finite())
    }

    /// Plain-text dump: a header line, the shape, then one line per named
    /// array (`name len v...`). Values round-trip exactly.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{DUMP_HEADER}");
        let _ = writeln!(out, "shape {} {} {}", self.input_dim, self.h1, self.h2);
        let b3 = [self.b3];
        let arrays: [(&str, &[f64]); 6] = [
            ("w1", &self.w1),
            ("b1", &self.b1),
            ("w2", &self.w2),
            ("b2", &self.b2),
            ("w3", &self.w3),
            ("b3", &b3),
        ];
        for (name, values) in arrays {
            let _ = write!(out, "{name} {}", values.len());
            for v in values {
                let _ = write!(out, " {v:?}");
            }
            out.push('\n');
        }
        out
    }

    pub fn load(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Malformed(format!("policy dump: {msg}"));
        let mut lines = text.lines();
        if lines.next() != Some(DUMP_HEADER) {
            return Err(bad("missing or unsupported header"));
        }
        let shape: Vec<usize> = lines
            .next()
            .and_then(|l| l.strip_prefix("shape "))
            .ok_or_else(|| bad("missing shape"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad shape")))
            .collect::<Result<_>>()?;
        let [input_dim, h1, h2] = shape[..] else {
            return Err(bad("shape needs three numbers"));
        };
        let mut policy = QPolicy::zeros(input_dim, [h1, h2]);
        let mut flat = Vec::with_capacity(policy.num_params());
        for name in ["w1", "b1", "w2", "b2", "w3", "b3"] {
            let line = lines.next().ok_or_else(|| bad("truncated"))?;
            let mut tokens = line.split_whitespace();
            if tokens.next() != Some(name) {
                return Err(bad(&format!("expected array {name}")));
            }
            let len: usize = tokens
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad("bad array length"))?;
            let values: Vec<f64> = tokens
                .map(|t| t.parse().map_err(|_| bad("bad value")))
                .collect::<Result<_>>()?;
            if values.len() != len {
                return Err(bad(&format!("array {name} has wrong length")));
            }
            flat.extend(values);
        }
        policy.set_params(&flat)?;
        Ok(policy)
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
