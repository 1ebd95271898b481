use crate::error::{NnkError, Result};

/// Mean squared Euclidean distance between a point's leave-one-out estimate
/// and the leave-one-out estimates of its interpolating neighbors.
///
/// For two classes this is twice the squared difference of the scalar
/// estimates, since both one-hot components move together.
pub fn interpolation_spread(own: &[f64], neighbors: &[&[f64]]) -> Result<f64> {
    if neighbors.is_empty() {
        return Err(NnkError::invalid("spread needs at least one neighbor"));
    }
    let mut total = 0.0;
    for other in neighbors {
        if other.len() != own.len() {
            return Err(NnkError::Dimension {
                expected: own.len(),
                actual: other.len(),
            });
        }
        total += own
            .iter()
            .zip(other.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    Ok(total / neighbors.len() as f64)
}
