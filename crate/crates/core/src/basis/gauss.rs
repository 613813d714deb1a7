//! Gauss–Hermite rules for integrals over ℝ of Gaussian-decaying integrands.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use super::hermite::hermite_table_into;

/// An N-point Gauss–Hermite rule stored in "scaled" form: for an integrand g
/// that already carries its Gaussian decay,
///
/// ∫ g(ξ) dξ ≈ Σ_i `scaled_weights[i]` · g(`nodes[i]`)
///
/// where the scaled weight is w_i e^{ξ_i²} = 1 / (N h_{N−1}(ξ_i)²).
#[derive(Clone, Debug)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    scaled_weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss–Hermite order must be positive");
        // Golub–Welsch: eigenvalues of the Jacobi matrix with off-diagonal √(k/2)
        let mut jacobi = DMatrix::<f64>::zeros(order, order);
        for k in 1..order {
            let b = (k as f64 / 2.0).sqrt();
            jacobi[(k, k - 1)] = b;
            jacobi[(k - 1, k)] = b;
        }
        let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
        nodes.sort_by(f64::total_cmp);

        let mut table = vec![0.0; order + 1];
        let nf = order as f64;
        for x in nodes.iter_mut() {
            // Newton polish on h_N, with h_N' = √(2N) h_{N−1} − x h_N
            for _ in 0..3 {
                hermite_table_into(*x, &mut table);
                let h_n = table[order];
                let dh = (2.0 * nf).sqrt() * table[order - 1] - *x * h_n;
                if dh == 0.0 {
                    break;
                }
                let step = h_n / dh;
                *x -= step;
                if step.abs() < 1e-15 * x.abs().max(1.0) {
                    break;
                }
            }
        }
        // symmetric rule: enforce exact antisymmetry of the node set
        for i in 0..order / 2 {
            let j = order - 1 - i;
            let m = 0.5 * (nodes[j] - nodes[i]);
            nodes[i] = -m;
            nodes[j] = m;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        let scaled_weights = nodes
            .iter()
            .map(|&x| {
                hermite_table_into(x, &mut table);
                let h = table[order - 1];
                1.0 / (nf * h * h)
            })
            .collect();
        GaussHermite {
            nodes,
            scaled_weights,
        }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn scaled_weights(&self) -> &[f64] {
        &self.scaled_weights
    }

    /// Classical weights w_i for ∫ e^{−ξ²} p(ξ) dξ. Underflows for large orders;
    /// use the scaled form in computations.
    pub fn weights(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .zip(&self.scaled_weights)
            .map(|(&x, &w)| w * (-x * x).exp())
            .collect()
    }
}

/// Shared rule of the given order, built once per process.
pub fn rule(order: usize) -> Arc<GaussHermite> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussHermite>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(r) = cache.lock().unwrap().get(&order) {
        return Arc::clone(r);
    }
    let r = Arc::new(GaussHermite::new(order));
    Arc::clone(cache.lock().unwrap().entry(order).or_insert(r))
}
