//! Small numerical helpers shared by the simulators.

/// Pairwise (cascade) summation. The result depends only on the order of
/// `values`, never on how the caller produced them.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let (left, right) = values.split_at(values.len() / 2);
    pairwise_sum(left) + pairwise_sum(right)
}

/// SplitMix64 finalizer; derives independent sub-seeds from a master seed.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Truncated geometric sums over `k = 0..len` for two ratios `a >= b >= 0`
/// whose difference `a - b` is known exactly.
///
/// Blocks are concatenated by binary splitting, and every update adds
/// non-negative terms, so differences such as `Σ (a^k - b^k)` keep full
/// relative precision even when `a` and `b` nearly coincide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricBlock {
    pub len: f64,
    /// `a^len`
    pub a_pow: f64,
    /// `b^len`
    pub b_pow: f64,
    /// `a^len - b^len`
    pub pow_diff: f64,
    /// `Σ a^k`
    pub sum_a: f64,
    /// `Σ b^k`
    pub sum_b: f64,
    /// `Σ (a^k - b^k)`
    pub sum_diff: f64,
    /// `Σ (k + 1) a^k`
    pub moment_a: f64,
}

impl GeometricBlock {
    const EMPTY: Self =
        Self { len: 0.0, a_pow: 1.0, b_pow: 1.0, pow_diff: 0.0, sum_a: 0.0, sum_b: 0.0, sum_diff: 0.0, moment_a: 0.0 };

    fn unit(a: f64, b: f64, diff: f64) -> Self {
        Self { len: 1.0, a_pow: a, b_pow: b, pow_diff: diff, sum_a: 1.0, sum_b: 1.0, sum_diff: 0.0, moment_a: 1.0 }
    }

    /// `self` followed by `next`.
    fn then(&self, next: &Self) -> Self {
        Self {
            len: self.len + next.len,
            a_pow: self.a_pow * next.a_pow,
            b_pow: self.b_pow * next.b_pow,
            pow_diff: self.a_pow * next.pow_diff + self.pow_diff * next.b_pow,
            sum_a: self.sum_a + self.a_pow * next.sum_a,
            sum_b: self.sum_b + self.b_pow * next.sum_b,
            sum_diff: self.sum_diff + self.a_pow * next.sum_diff + self.pow_diff * next.sum_b,
            moment_a: self.moment_a + self.a_pow * (self.len * next.sum_a + next.moment_a),
        }
    }

    /// Sums over `k = 0..n` with `diff = a - b`.
    pub fn new(a: f64, b: f64, diff: f64, n: u64) -> Self {
        let mut acc = Self::EMPTY;
        let mut block = Self::unit(a, b, diff);
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.then(&block);
            }
            n >>= 1;
            if n > 0 {
                block = block.then(&block);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_block_matches_loops() {
        let (a, b) = (0.9, 0.7);
        for n in [0u64, 1, 2, 3, 7, 64, 1000] {
            let g = GeometricBlock::new(a, b, 0.2, n);
            let (mut sa, mut sb, mut sd, mut m) = (0.0, 0.0, 0.0, 0.0);
            for k in 0..n {
                let (ak, bk) = (a.powi(k as i32), b.powi(k as i32));
                sa += ak;
                sb += bk;
                sd += ak - bk;
                m += (k + 1) as f64 * ak;
            }
            assert!((g.sum_a - sa).abs() <= 1e-13 * sa.max(1.0), "n={n}");
            assert!((g.sum_b - sb).abs() <= 1e-13 * sb.max(1.0));
            assert!((g.sum_diff - sd).abs() <= 1e-13 * sd.max(1.0));
            assert!((g.moment_a - m).abs() <= 1e-13 * m.max(1.0));
            assert!((g.pow_diff - (a.powi(n as i32) - b.powi(n as i32))).abs() < 1e-15);
            assert_eq!(g.len, n as f64);
        }
    }

    #[test]
    fn pairwise_matches_exact_small_sums() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn seeds_differ_by_salt() {
        assert_ne!(mix_seed(7, 0), mix_seed(7, 1));
        assert_eq!(mix_seed(7, 3), mix_seed(7, 3));
    }
}
