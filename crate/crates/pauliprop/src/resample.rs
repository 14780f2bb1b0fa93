use pauliprop_core::rng::seeded_rng;
use rand::Rng;

use crate::error::Result;

/// Draws a vector of the same length i.i.d. with replacement from the pooled
/// values of `optimized`. Keeps the marginal distribution and discards
/// which parameter had which value.
pub fn resample_parameters(optimized: &[f64], seed: u64) -> Result<Vec<f64>> {
    if optimized.is_empty() {
        return Err(pauliprop_core::Error::EmptyInput("resampling needs at least one parameter").into());
    }
    let mut rng = seeded_rng(seed);
    Ok((0..optimized.len()).map(|_| optimized[rng.gen_range(0..optimized.len())]).collect())
}
