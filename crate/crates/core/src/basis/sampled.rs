use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::gauss;
use super::special::{order_for, special_hermite_1d_table};
use super::Truncation;
use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};

/// Largest sampled basis (nodes × modes) built in memory.
pub const SAMPLED_BASIS_LIMIT: usize = 20_000_000;

/// Every mode of a truncation sampled on every node of a grid.
///
/// `values[(node, i)] = Φ_{pair_i}(node)`.
#[derive(Clone, Debug)]
pub struct SampledBasis {
    truncation: Truncation,
    grid: GridSpec,
    values: DMatrix<Complex64>,
    weights: Vec<f64>,
}

impl SampledBasis {
    pub fn new(truncation: &Truncation, grid: &GridSpec) -> Result<Self> {
        if truncation.dim() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                found: truncation.dim(),
            });
        }
        let entries = grid.len() * truncation.len();
        if entries > SAMPLED_BASIS_LIMIT {
            return Err(Error::SizeGuard {
                entries,
                limit: SAMPLED_BASIS_LIMIT,
            });
        }
        let m = grid.points_per_axis();
        let k = truncation.max_entry();
        let dim = k + 1;
        let rule = gauss::rule(order_for(truncation.k_max(), grid.half_width()));
        let nodes = grid.axis_nodes();

        // one table of all 1D Φ_μν per node of the (x, y) plane
        let plane: Vec<Vec<Complex64>> = (0..m * m)
            .into_par_iter()
            .map(|p| {
                let z = Complex64::new(nodes[p / m], nodes[p % m]);
                special_hermite_1d_table(k, z, &rule)
            })
            .collect();

        let n = grid.dim();
        let pairs = truncation.pairs();
        let flat: Vec<(Vec<usize>, Vec<usize>)> = pairs
            .iter()
            .map(|p| (p.mu.entries().to_vec(), p.nu.entries().to_vec()))
            .collect();
        let mut values = DMatrix::<Complex64>::zeros(grid.len(), pairs.len());
        let cols: Vec<Vec<Complex64>> = flat
            .par_iter()
            .map(|(mu, nu)| {
                let mut ix = vec![0; 2 * n];
                (0..grid.len())
                    .map(|node| {
                        grid.unravel(node, &mut ix);
                        (0..n)
                            .map(|j| plane[ix[2 * j] * m + ix[2 * j + 1]][mu[j] * dim + nu[j]])
                            .product()
                    })
                    .collect()
            })
            .collect();
        for (i, col) in cols.into_iter().enumerate() {
            values.column_mut(i).copy_from_slice(&col);
        }
        Ok(SampledBasis {
            truncation: truncation.clone(),
            grid: *grid,
            values,
            weights: grid.weights(),
        })
    }

    pub fn truncation(&self) -> &Truncation {
        &self.truncation
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &DMatrix<Complex64> {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.truncation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truncation.is_empty()
    }

    pub fn column(&self, i: usize) -> Field {
        Field::from_values(self.grid, self.values.column(i).iter().copied().collect())
            .expect("sampled basis values are finite")
    }

    /// Σ c_i Φ_i on the grid.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Result<Field> {
        if coeffs.len() != self.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for {} modes",
                coeffs.len(),
                self.len()
            )));
        }
        let c = nalgebra::DVector::from_column_slice(coeffs);
        let v = &self.values * c;
        Field::from_values(self.grid, v.iter().copied().collect())
    }

    /// ⟨f, Φ_i⟩ for every mode.
    pub fn analyze(&self, f: &Field) -> Result<Vec<Complex64>> {
        self.grid.check_same(f.grid())?;
        let wf: Vec<Complex64> = f
            .values()
            .iter()
            .zip(&self.weights)
            .map(|(v, &w)| v * w)
            .collect();
        Ok((0..self.len())
            .into_par_iter()
            .map(|i| {
                let col = self.values.column(i);
                let terms: Vec<Complex64> = col.iter().zip(&wf).map(|(p, v)| v * p.conj()).collect();
                crate::grid::pairwise_sum(&terms)
            })
            .collect())
    }

    /// G_ij = ⟨Φ_j, Φ_i⟩ under the grid quadrature.
    pub fn gram(&self) -> DMatrix<Complex64> {
        let mut weighted = self.values.clone();
        for (mut row, &w) in weighted.row_iter_mut().zip(&self.weights) {
            row *= Complex64::from(w);
        }
        self.values.adjoint() * weighted
    }
}
