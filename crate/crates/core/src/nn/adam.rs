use crate::error::{Error, Result};

/// Bias-corrected Adam state for a fixed set of parameter buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step_count: u64,
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
}

impl AdamState {
    /// Fresh state with the usual defaults (β1 = 0.9, β2 = 0.999, ε = 1e-8)
    /// for buffers of the given lengths.
    pub fn new(learning_rate: f64, buffer_sizes: &[usize]) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step_count: 0,
            first_moment: buffer_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            second_moment: buffer_sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn first_moment(&self) -> &[Vec<f64>] {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &[Vec<f64>] {
        &self.second_moment
    }

    /// One update of every buffer.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<()> {
        let mut wrapped: Vec<Option<&mut [f64]>> =
            params.iter_mut().map(|p| Some(&mut **p)).collect();
        self.step_masked(&mut wrapped, grads)
    }

    /// One update; `None` buffers are skipped entirely (their moments stay
    /// untouched), which is how frozen layers stay bit-identical.
    pub fn step_masked(
        &mut self,
        params: &mut [Option<&mut [f64]>],
        grads: &[&[f64]],
    ) -> Result<()> {
        if params.len() != self.first_moment.len() || grads.len() != params.len() {
            return Err(Error::Dimension(format!(
                "adam tracks {} buffers, got {} parameters and {} gradients",
                self.first_moment.len(),
                params.len(),
                grads.len()
            )));
        }
        for (k, (p, g)) in params.iter().zip(grads).enumerate() {
            let n = self.first_moment[k].len();
            if p.as_ref().is_some_and(|p| p.len() != n) || g.len() != n {
                return Err(Error::Dimension(format!("buffer {k} length mismatch")));
            }
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.learning_rate, self.epsilon);
        for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let Some(p) = p else { continue };
            let m = &mut self.first_moment[k];
            let v = &mut self.second_moment[k];
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = b1 * m[i] + (1.0 - b1) * gi;
                v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
                let mh = m[i] / c1;
                let vh = v[i] / c2;
                p[i] -= lr * mh / (vh.sqrt() + eps);
            }
        }
        Ok(())
    }
}
