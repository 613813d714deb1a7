//! Hermite and special Hermite functions, their index sets, and grid samples.

mod gauss;
mod hermite;
mod index;
mod sampled;
mod special;

pub use gauss::{rule as gauss_hermite_rule, GaussHermite};
pub use hermite::{hermite_1d, hermite_table, hermite_table_into, hermite_tensor};
pub use index::{count_up_to_degree, enumerate_pairs, MultiIndex, MultiIndexPair, Truncation};
pub use sampled::{SampledBasis, SAMPLED_BASIS_LIMIT};
pub use special::{negligible_radius, phi_k, required_order, special_hermite, special_hermite_auto};
