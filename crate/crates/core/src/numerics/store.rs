use std::collections::BTreeMap;

use super::{Real, Tensor};
use crate::error::{Error, Result};

/// Adam hyperparameters. Defaults follow the usual
/// `lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8`.
#[derive(Clone, Copy, Debug)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        AdamConfig {
            lr,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug)]
struct Entry<F> {
    value: Tensor<F>,
    m: Tensor<F>,
    v: Tensor<F>,
}

/// Named parameter arrays with per-parameter Adam state.
///
/// Names are ordered (BTreeMap) so every whole-store walk is
/// deterministic. One store is exclusively owned by one training loop;
/// forward evaluation against a frozen store is safe to share.
#[derive(Clone, Debug)]
pub struct ParamStore<F: Real> {
    entries: BTreeMap<String, Entry<F>>,
    step: u64,
}

impl<F: Real> Default for ParamStore<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Real> ParamStore<F> {
    pub fn new() -> Self {
        ParamStore {
            entries: BTreeMap::new(),
            step: 0,
        }
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Tensor<F>) {
        let (r, c) = value.shape();
        self.entries.insert(
            name.into(),
            Entry {
                value,
                m: Tensor::zeros(r, c),
                v: Tensor::zeros(r, c),
            },
        );
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    /// Panics if the parameter is unknown; parameter names are a
    /// programmer-level contract.
    pub fn tensor(&self, name: &str) -> &Tensor<F> {
        &self
            .entries
            .get(name)
            .unwrap_or_else(|| panic!("unknown parameter {name:?}"))
            .value
    }

    pub fn tensor_mut(&mut self, name: &str) -> &mut Tensor<F> {
        &mut self
            .entries
            .get_mut(name)
            .unwrap_or_else(|| panic!("unknown parameter {name:?}"))
            .value
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn num_scalars(&self) -> usize {
        self.entries.values().map(|e| e.value.len()).sum()
    }

    /// Sum of squares of every stored scalar, for L2 loss terms.
    pub fn l2_norm_sq(&self) -> F {
        let mut acc = F::zero();
        for e in self.entries.values() {
            for &x in e.value.as_slice() {
                acc += x * x;
            }
        }
        acc
    }

    /// One bias-corrected Adam step over every gradient in `grads`.
    /// Parameters without a gradient entry are left untouched.
    pub fn adam_step(&mut self, grads: &Gradients<F>, cfg: &AdamConfig) -> Result<()> {
        for (name, g) in &grads.map {
            let entry = self
                .entries
                .get(name)
                .ok_or_else(|| Error::usage(format!("gradient for unknown parameter {name:?}")))?;
            if entry.value.shape() != g.shape() {
                return Err(Error::usage(format!(
                    "gradient shape {:?} does not match parameter {name:?} shape {:?}",
                    g.shape(),
                    entry.value.shape()
                )));
            }
        }
        self.step += 1;
        let t = self.step as i32;
        let b1 = F::from_f64(cfg.beta1);
        let b2 = F::from_f64(cfg.beta2);
        let lr = F::from_f64(cfg.lr);
        let eps = F::from_f64(cfg.eps);
        let bias1 = F::one() - b1.powi(t);
        let bias2 = F::one() - b2.powi(t);
        for (name, g) in &grads.map {
            let entry = self.entries.get_mut(name).expect("validated above");
            let (values, ms, vs) = (
                entry.value.as_mut_slice(),
                entry.m.as_mut_slice(),
                entry.v.as_mut_slice(),
            );
            for ((p, m), (v, &gi)) in values
                .iter_mut()
                .zip(ms.iter_mut())
                .zip(vs.iter_mut().zip(g.as_slice()))
            {
                *m = b1 * *m + (F::one() - b1) * gi;
                *v = b2 * *v + (F::one() - b2) * gi * gi;
                let m_hat = *m / bias1;
                let v_hat = *v / bias2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

/// Gradient accumulator shaped like a [`ParamStore`].
#[derive(Clone, Debug)]
pub struct Gradients<F: Real> {
    map: BTreeMap<String, Tensor<F>>,
}

impl<F: Real> Gradients<F> {
    /// Zero gradients for every parameter in the store.
    pub fn zeros_like(store: &ParamStore<F>) -> Self {
        let map = store
            .entries
            .iter()
            .map(|(k, e)| {
                let (r, c) = e.value.shape();
                (k.clone(), Tensor::zeros(r, c))
            })
            .collect();
        Gradients { map }
    }

    pub fn tensor_mut(&mut self, name: &str) -> &mut Tensor<F> {
        self.map
            .get_mut(name)
            .unwrap_or_else(|| panic!("unknown gradient {name:?}"))
    }

    pub fn tensor(&self, name: &str) -> &Tensor<F> {
        self.map
            .get(name)
            .unwrap_or_else(|| panic!("unknown gradient {name:?}"))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(|s| s.as_str())
    }

    /// Resets every gradient to zero, keeping the allocations.
    pub fn zero_all(&mut self) {
        for t in self.map.values_mut() {
            t.fill(F::zero());
        }
    }

    /// Adds the gradient of `lambda * ||theta||^2`, i.e. `2 lambda theta`,
    /// for every parameter of the store.
    pub fn add_l2_from(&mut self, store: &ParamStore<F>, lambda: f64) {
        let two_lambda = F::from_f64(2.0 * lambda);
        for (name, e) in &store.entries {
            if let Some(g) = self.map.get_mut(name) {
                g.add_scaled(&e.value, two_lambda);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_store(v: f64) -> ParamStore<f64> {
        let mut s = ParamStore::new();
        s.insert("theta", Tensor::from_vec(1, 1, vec![v]));
        s
    }

    #[test]
    fn zero_gradient_is_fixed_point() {
        let mut s = scalar_store(0.7);
        let g = Gradients::zeros_like(&s);
        for _ in 0..5 {
            s.adam_step(&g, &AdamConfig::default()).unwrap();
        }
        assert_eq!(s.tensor("theta").get(0, 0), 0.7);
    }

    #[test]
    fn first_step_matches_hand_evaluation() {
        // theta=0, g=1, lr=1e-3: bias-corrected step is
        // lr * 1 / (1 + eps) ~ 1e-3.
        let mut s = scalar_store(0.0);
        let mut g = Gradients::zeros_like(&s);
        g.tensor_mut("theta").set(0, 0, 1.0);
        s.adam_step(&g, &AdamConfig::default()).unwrap();
        let got = s.tensor("theta").get(0, 0);
        assert!((got - (-1e-3)).abs() < 1e-6, "got {got}");
    }

    #[test]
    fn f32_step_matches_f64_step_loosely() {
        // Same update in both precisions; they agree to f32 resolution.
        let mut s64 = scalar_store(0.25);
        let mut s32: ParamStore<f32> = ParamStore::new();
        s32.insert("theta", Tensor::from_vec(1, 1, vec![0.25f32]));
        let mut g64 = Gradients::zeros_like(&s64);
        g64.tensor_mut("theta").set(0, 0, 0.5);
        let mut g32 = Gradients::zeros_like(&s32);
        g32.tensor_mut("theta").set(0, 0, 0.5);
        s64.adam_step(&g64, &AdamConfig::default()).unwrap();
        s32.adam_step(&g32, &AdamConfig::default()).unwrap();
        let diff = (s64.tensor("theta").get(0, 0) - s32.tensor("theta").get(0, 0) as f64).abs();
        assert!(diff < 1e-6, "diff {diff}");
    }

    #[test]
    fn identical_calls_identical_results() {
        let run = || {
            let mut s = scalar_store(0.3);
            let mut g = Gradients::zeros_like(&s);
            g.tensor_mut("theta").set(0, 0, -0.2);
            for _ in 0..10 {
                s.adam_step(&g, &AdamConfig::default()).unwrap();
            }
            s.tensor("theta").get(0, 0)
        };
        assert_eq!(run().to_bits(), run().to_bits());
    }

    #[test]
    fn shape_mismatch_is_usage_error() {
        let mut s = scalar_store(0.0);
        let other = {
            let mut o = ParamStore::new();
            o.insert("theta", Tensor::<f64>::zeros(2, 2));
            o
        };
        let g = Gradients::zeros_like(&other);
        assert!(matches!(
            s.adam_step(&g, &AdamConfig::default()),
            Err(crate::Error::Usage(_))
        ));
    }

    #[test]
    fn l2_gradient_accumulates() {
        let s = scalar_store(3.0);
        let mut g = Gradients::zeros_like(&s);
        g.add_l2_from(&s, 0.01);
        assert!((g.tensor("theta").get(0, 0) - 0.06).abs() < 1e-15);
    }
}
