//! Small probability helpers shared by the reliability and attack analyses.

use statrs::distribution::{Binomial, Discrete};

/// Binary entropy in bits, with `H(0) = H(1) = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// `Pr(X = i)` for `i = 0..=m`, `X ~ Bin(m, q)`.
pub fn binomial_pmf(m: usize, q: f64) -> Vec<f64> {
    let q = q.clamp(0.0, 1.0);
    let dist = Binomial::new(q, m as u64).expect("probability clamped to [0, 1]");
    (0..=m as u64).map(|i| dist.pmf(i)).collect()
}

/// `Pr(X >= h)` for `X ~ Bin(m, q)`; 1 for `h = 0`, 0 for `h > m`.
pub fn binomial_upper_tail(m: usize, q: f64, h: usize) -> f64 {
    if h == 0 {
        return 1.0;
    }
    if h > m {
        return 0.0;
    }
    binomial_pmf(m, q)[h..].iter().sum::<f64>().min(1.0)
}

/// Exact `C(n, r)` as `u128`; panics on overflow, which cannot happen for
/// `n <= 64`.
pub fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}
