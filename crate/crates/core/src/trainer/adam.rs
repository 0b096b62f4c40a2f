use crate::error::{Error, Result};

/// Adam with bias correction.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    steps: u64,
}

impl Adam {
    pub fn new(len: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; len],
            v: vec![0.0; len],
            steps: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.m
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.v
    }

    /// Applies one update. Fails without touching anything if a gradient
    /// entry is not finite.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::WidthMismatch {
                expected: self.m.len(),
                got: grads.len().min(params.len()),
            });
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("gradient"));
        }
        self.steps += 1;
        let bc1 = 1.0 - self.beta1.powi(self.steps as i32);
        let bc2 = 1.0 - self.beta2.powi(self.steps as i32);
        for ((p, &g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_and_decays_moments() {
        let mut adam = Adam::new(2, 0.1);
        let mut p = vec![1.0, -2.0];
        adam.step(&mut p, &[0.5, -0.5]).unwrap();
        let (m1, v1) = (adam.first_moment().to_vec(), adam.second_moment().to_vec());
        let before = p.clone();
        adam.step(&mut p, &[0.0, 0.0]).unwrap();
        for k in 0..2 {
            assert_eq!(adam.first_moment()[k], 0.9 * m1[k]);
            assert_eq!(adam.second_moment()[k], 0.999 * v1[k]);
        }
        // Remaining momentum still moves the parameters; a fresh optimizer does not.
        let mut fresh = Adam::new(2, 0.1);
        let mut q = before.clone();
        fresh.step(&mut q, &[0.0, 0.0]).unwrap();
        assert_eq!(q, before);
    }

    #[test]
    fn first_step_is_bounded_by_lr() {
        let lr = 1e-3;
        for g in [1e-6, 0.3, -7.0, 1e4] {
            let mut adam = Adam::new(1, lr);
            let mut p = vec![0.0];
            adam.step(&mut p, &[g]).unwrap();
            assert!(p[0].abs() <= lr * (1.0 + 1e-12));
            assert_eq!(p[0].signum(), -g.signum());
        }
    }

    #[test]
    fn quadratic_bowl_converges() {
        let mut adam = Adam::new(1, 1e-2);
        let mut theta = vec![1.0];
        for _ in 0..500 {
            let g = [2.0 * theta[0]];
            adam.step(&mut theta, &g).unwrap();
        }
        assert!(theta[0].abs() < 0.05, "{}", theta[0]);
    }

    #[test]
    fn non_finite_gradient_is_rejected() {
        let mut adam = Adam::new(2, 1e-3);
        let mut p = vec![0.0, 0.0];
        assert!(adam.step(&mut p, &[1.0, f64::NAN]).is_err());
        assert_eq!(p, vec![0.0, 0.0]);
        assert_eq!(adam.steps(), 0);
    }
}
