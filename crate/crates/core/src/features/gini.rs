use crate::error::{invalid, Result};

/// Gini coefficient of a degree distribution, via the sorted identity
/// `G = 2 * sum_i i * d_(i) / (k * sum d) - (k + 1) / k` with ascending
/// order statistics and 1-based `i`. Returns 0 when every degree is 0.
pub fn gini_coefficient(degrees: &[usize]) -> Result<f64> {
    if degrees.is_empty() {
        return invalid("gini coefficient of an empty degree array");
    }
    let mut sorted = degrees.to_vec();
    sorted.sort_unstable();
    Ok(gini_of_sorted(&sorted))
}

pub(crate) fn gini_of_sorted(sorted: &[usize]) -> f64 {
    let k = sorted.len() as u128;
    let total: u128 = sorted.iter().map(|&d| d as u128).sum();
    if total == 0 {
        return 0.0;
    }
    let weighted: u128 = sorted.iter().enumerate().map(|(i, &d)| (i as u128 + 1) * d as u128).sum();
    // (2*weighted - (k+1)*total) / (k*total), kept in integers until the end
    let num = 2 * weighted as i128 - ((k + 1) * total) as i128;
    num as f64 / (k * total) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Mean-absolute-difference definition, O(k^2).
    fn pairwise(d: &[usize]) -> f64 {
        let total: f64 = d.iter().map(|&v| v as f64).sum();
        if total == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for &a in d {
            for &b in d {
                acc += (a as f64 - b as f64).abs();
            }
        }
        acc / (2.0 * d.len() as f64 * total)
    }

    #[test]
    fn perfect_equality() {
        assert_eq!(gini_coefficient(&[3, 3, 3, 3]).unwrap(), 0.0);
    }

    #[test]
    fn single_holder() {
        assert_eq!(pairwise(&[0, 0, 0, 4]), 24.0 / 32.0);
        assert_eq!(gini_coefficient(&[0, 0, 0, 4]).unwrap(), 0.75);
    }

    #[test]
    fn all_zero_and_empty() {
        assert_eq!(gini_coefficient(&[0, 0]).unwrap(), 0.0);
        assert!(gini_coefficient(&[]).is_err());
    }

    proptest! {
        #[test]
        fn matches_pairwise(d in proptest::collection::vec(0usize..1000, 1..200)) {
            prop_assert!((gini_coefficient(&d).unwrap() - pairwise(&d)).abs() <= 1e-12);
        }

        #[test]
        fn scale_and_permutation_invariant(
            d in proptest::collection::vec(0usize..500, 1..100),
            c in 1usize..50,
            seed in any::<u64>(),
        ) {
            let g = gini_coefficient(&d).unwrap();
            let scaled: Vec<usize> = d.iter().map(|&v| v * c).collect();
            prop_assert!((gini_coefficient(&scaled).unwrap() - g).abs() <= 1e-12);
            let mut shuffled = d.clone();
            let n = shuffled.len();
            for i in 0..n {
                let j = (seed as usize).wrapping_mul(i + 7) % n;
                shuffled.swap(i, j);
            }
            prop_assert_eq!(gini_coefficient(&shuffled).unwrap(), g);
            let k = d.len() as f64;
            prop_assert!(g >= 0.0 && g <= (k - 1.0) / k + 1e-15);
        }
    }
}
