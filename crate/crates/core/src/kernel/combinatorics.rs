//! Factorials and binomial coefficients, exact while they fit in 64 bits and
//! in log-space beyond that.

const EXACT_FACTORIAL_MAX: u64 = 20;

/// `n!` exactly, or `None` once it overflows `u64` (n > 20).
pub fn factorial_exact(n: u64) -> Option<u64> {
    if n > EXACT_FACTORIAL_MAX {
        return None;
    }
    Some((1..=n).product())
}

/// `ln(n!)`.
pub fn ln_factorial(n: u64) -> f64 {
    match factorial_exact(n) {
        Some(f) => (f as f64).ln(),
        None => {
            let base = (factorial_exact(EXACT_FACTORIAL_MAX).unwrap() as f64).ln();
            base + ((EXACT_FACTORIAL_MAX + 1)..=n).map(|i| (i as f64).ln()).sum::<f64>()
        }
    }
}

/// `C(n, k)` exactly, or `None` on 64-bit overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc holds C(n, i); C(n, i+1) = C(n, i) * (n - i) / (i + 1) is exact.
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    u64::try_from(acc).ok()
}

/// `ln C(n, k)`, usable far past the point where `binomial` overflows.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    match binomial(n, k) {
        Some(b) => (b as f64).ln(),
        None => ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k),
    }
}

/// Multinomial coefficient `k! / ∏ λᵢ!` as a float, with `k = Σ λᵢ`.
pub fn multinomial(lambda: &[u32]) -> f64 {
    let k: u64 = lambda.iter().map(|&l| l as u64).sum();
    if let Some(num) = factorial_exact(k) {
        let den: u64 = lambda
            .iter()
            .map(|&l| factorial_exact(l as u64).unwrap())
            .product();
        return (num / den) as f64;
    }
    let ln = ln_factorial(k) - lambda.iter().map(|&l| ln_factorial(l as u64)).sum::<f64>();
    ln.exp()
}

/// `ln ∏ λᵢ!`.
pub fn ln_factorial_product(lambda: &[u32]) -> f64 {
    lambda.iter().map(|&l| ln_factorial(l as u64)).sum()
}
