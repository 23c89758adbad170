//! Exact monomial moments of the uniform probability measure on `S^{n-1}`.

/// `∫ x^α dσ` over `S^{n-1}`, with `n = alpha.len()`.
///
/// Zero if any exponent is odd; otherwise
/// `∏ (α_i - 1)!! / (n (n+2) ... (n + |α| - 2))`. Numerator and denominator
/// are formed as exact integers and divided once; only when they exceed 128
/// bits does the computation fall back to summing logarithms.
pub fn monomial_moment(alpha: &[u32]) -> f64 {
    let n = alpha.len() as u128;
    let mut half_total = 0u32;
    for &a in alpha {
        if a % 2 == 1 {
            return 0.0;
        }
        half_total += a / 2;
    }
    match exact_ratio(alpha, n, half_total) {
        Some(v) => v,
        None => log_ratio(alpha, n as f64, half_total).exp(),
    }
}

/// Moment of the product monomial `x^(a+b)`.
#[inline]
pub(crate) fn moment_of_sum(a: &[u32], b: &[u32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut buf = [0u32; 32];
    if a.len() <= buf.len() {
        for (k, (x, y)) in a.iter().zip(b).enumerate() {
            buf[k] = x + y;
        }
        monomial_moment(&buf[..a.len()])
    } else {
        let v: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        monomial_moment(&v)
    }
}

fn exact_ratio(alpha: &[u32], n: u128, half_total: u32) -> Option<f64> {
    let mut num: u128 = 1;
    for &a in alpha {
        let mut k = 1u128;
        while k < a as u128 {
            num = num.checked_mul(k)?;
            k += 2;
        }
    }
    let mut den: u128 = 1;
    for j in 0..half_total as u128 {
        den = den.checked_mul(n + 2 * j)?;
    }
    Some(num as f64 / den as f64)
}

fn log_ratio(alpha: &[u32], n: f64, half_total: u32) -> f64 {
    let mut acc = 0.0;
    for &a in alpha {
        let mut k = 1u32;
        while k < a {
            acc += (k as f64).ln();
            k += 2;
        }
    }
    for j in 0..half_total {
        acc -= (n + 2.0 * j as f64).ln();
    }
    acc
}
