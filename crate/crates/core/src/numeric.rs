//! Compensated summation helpers for mass and moment accumulation.

/// Neumaier-compensated sum; error independent of length.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Compensated dot product.
pub fn kahan_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    kahan_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensates_cancellation() {
        let xs = vec![1e16, 1.0, -1e16, 1.0];
        assert_eq!(kahan_sum(xs), 2.0);
    }

    #[test]
    fn dot_matches_naive_on_small_input() {
        let a = [1.0, 2.0, 3.0];
        let b = [4.0, 5.0, 6.0];
        assert_eq!(kahan_dot(&a, &b), 32.0);
    }
}
