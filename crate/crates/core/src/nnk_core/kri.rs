use crate::error::{NnkError, Result};

/// Kernel ratio interval test.
///
/// `k_ij` and `k_ik` are the similarities of candidates `j` and `k` to the
/// query `i`, `k_jk` the similarity between the candidates. Both candidates
/// can carry positive weight together iff
/// `k_jk < k_ij / k_ik < 1 / k_jk`, with strict inequalities.
pub fn kri_admissible(k_ij: f64, k_ik: f64, k_jk: f64) -> Result<bool> {
    for (name, v) in [("K_ij", k_ij), ("K_ik", k_ik), ("K_jk", k_jk)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(NnkError::invalid(format!("{name} = {v} is outside (0, 1]")));
        }
    }
    let ratio = k_ij / k_ik;
    Ok(k_jk < ratio && ratio < 1.0 / k_jk)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert!(!kri_admissible(0.8, 0.6, 0.9).unwrap());
        assert!(kri_admissible(0.8, 0.7, 0.5).unwrap());
        assert!(!kri_admissible(0.8, 0.7, 1.0).unwrap());
        // Equal similarities to a duplicate still collapse to an empty interval.
        assert!(!kri_admissible(0.7, 0.7, 1.0).unwrap());
    }

    #[test]
    fn rejects_zero_denominator() {
        assert!(kri_admissible(0.8, 0.0, 0.5).is_err());
        assert!(kri_admissible(0.8, 0.5, 1.5).is_err());
    }
}
