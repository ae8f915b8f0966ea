use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    /// Steps taken so far.
    pub t: u64,
}

impl Adam {
    pub fn new(n: usize, lr: f64) -> Self {
        Adam { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::ShapeMismatch(format!(
                "optimizer holds {} moments, got {} parameters and {} gradients",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        self.t += 1;
        let t = i32::try_from(self.t).unwrap_or(i32::MAX);
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *p -= self.lr * (*m / bc1) / ((*v / bc2).sqrt() + self.eps);
        }
        Ok(())
    }
}

/// Scale `grad` in place so its Euclidean norm is at most `max_norm`.
/// Returns the norm before scaling.
pub fn clip_grad_norm(grad: &mut [f64], max_norm: f64) -> f64 {
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if max_norm > 0.0 && norm > max_norm {
        let s = max_norm / norm;
        grad.iter_mut().for_each(|g| *g *= s);
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut opt = Adam::new(3, 1e-3);
        let mut p = vec![1.0, -2.0, 3.0];
        opt.step(&mut p, &[0.0; 3]).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 3.0]);
        assert_eq!(opt.t, 1);
    }

    #[test]
    fn first_step_closed_form() {
        let lr = 5e-5;
        let mut opt = Adam::new(3, lr);
        let g = [0.3, -2.0, 1e-9];
        let mut p = vec![0.0; 3];
        opt.step(&mut p, &g).unwrap();
        for (pi, gi) in p.iter().zip(g) {
            let want = -lr * gi / (gi.abs() + 1e-8);
            assert!((pi - want).abs() < 1e-18, "{pi} vs {want}");
        }
    }

    #[test]
    fn stateful() {
        let g = [0.5, -0.1];
        let mut a = Adam::new(2, 0.01);
        let mut pa = vec![0.0; 2];
        a.step(&mut pa, &g).unwrap();
        a.step(&mut pa, &g).unwrap();
        let mut b = Adam::new(2, 0.02);
        let mut pb = vec![0.0; 2];
        b.step(&mut pb, &g).unwrap();
        assert_ne!(pa, pb);
    }

    #[test]
    fn shape_mismatch() {
        let mut opt = Adam::new(2, 0.1);
        assert!(matches!(opt.step(&mut [0.0; 3], &[0.0; 3]), Err(Error::ShapeMismatch(_))));
        assert!(matches!(opt.step(&mut [0.0; 2], &[0.0; 1]), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn grad_clipping() {
        let mut g = [3.0, 4.0];
        assert_eq!(clip_grad_norm(&mut g, 0.5), 5.0);
        assert!((g[0] - 0.3).abs() < 1e-15 && (g[1] - 0.4).abs() < 1e-15);
        let mut g = [0.1, 0.1];
        clip_grad_norm(&mut g, 0.5);
        assert_eq!(g, [0.1, 0.1]);
    }
}
