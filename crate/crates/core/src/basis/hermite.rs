use super::MultiIndex;
use crate::error::{Error, Result};

/// π^{−1/4}
pub(crate) const H0_SCALE: f64 = 0.751_125_544_464_942_5;

/// Normalized Hermite function h_k(x) = (2^k √π k!)^{−1/2} H_k(x) e^{−x²/2}.
///
/// Evaluated with the three-term recurrence
/// `h_{k+1} = x √(2/(k+1)) h_k − √(k/(k+1)) h_{k−1}`, so no factorial or raw
/// polynomial value is ever formed.
pub fn hermite_1d(k: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = H0_SCALE * (-0.5 * x * x).exp();
    for j in 0..k {
        let jf = j as f64;
        let next = x * (2.0 / (jf + 1.0)).sqrt() * cur - (jf / (jf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// h_0(x), …, h_{k_max}(x) in one pass, written into `out`.
pub fn hermite_table_into(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = H0_SCALE * (-0.5 * x * x).exp();
    if out.len() > 1 {
        out[1] = 2f64.sqrt() * x * out[0];
    }
    for j in 1..out.len().saturating_sub(1) {
        let jf = j as f64;
        out[j + 1] = x * (2.0 / (jf + 1.0)).sqrt() * out[j] - (jf / (jf + 1.0)).sqrt() * out[j - 1];
    }
}

pub fn hermite_table(k_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; k_max + 1];
    hermite_table_into(x, &mut out);
    out
}

/// Φ_α(x) = Π_j h_{α_j}(x_j).
pub fn hermite_tensor(alpha: &MultiIndex, x: &[f64]) -> Result<f64> {
    if alpha.dim() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: alpha.dim(),
            found: x.len(),
        });
    }
    Ok(alpha
        .entries()
        .iter()
        .zip(x)
        .map(|(&k, &xj)| hermite_1d(k, xj))
        .product())
}
