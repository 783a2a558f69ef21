use crate::scalar::{c, ci, Real};

/// `ln n!`, summed exactly up to `10⁴` and by the Stirling series beyond.
pub fn ln_factorial<T: Real>(n: u64) -> T {
    if n <= 10_000 {
        return (2..=n).fold(T::zero(), |acc, j| acc + ci::<T>(j as i64).ln());
    }
    let x = ci::<T>(n as i64);
    let inv = T::one() / x;
    let inv2 = inv * inv;
    // Bernoulli terms through 1/x^9 are far below 40 digits at x > 10⁴.
    let series = inv
        * (c::<T>(1.0 / 12.0)
            - inv2
                * (c::<T>(1.0 / 360.0)
                    - inv2
                        * (c::<T>(1.0 / 1260.0)
                            - inv2 * (c::<T>(1.0 / 1680.0) - inv2 * c::<T>(1.0 / 1188.0)))));
    x * x.ln() - x + c::<T>(0.5) * (c::<T>(2.0) * T::PI() * x).ln() + series
}

/// `ln H_n` for the normalization `H_n = (2π)^{n/2} n^{−n²/2} e^{3n²/4} ∏_{k<n} k!`.
pub fn ln_hn<T: Real>(n: u64) -> T {
    if n == 0 {
        return T::zero();
    }
    let nn = ci::<T>(n as i64);
    let prod = (0..n).fold(T::zero(), |acc, k| acc + ln_factorial::<T>(k));
    nn / c(2.0) * (c::<T>(2.0) * T::PI()).ln() - nn * nn / c(2.0) * nn.ln()
        + c::<T>(0.75) * nn * nn
        + prod
}

/// Leading large-n behaviour `ln H_n ≈ n ln 2π − (ln n)/12`.
pub fn ln_hn_asymptotic<T: Real>(n: u64) -> T {
    let nn = ci::<T>(n as i64);
    nn * (c::<T>(2.0) * T::PI()).ln() - nn.ln() / c(12.0)
}

/// `ln ζ_{k,1} = (k/2) ln 2π + Σ_{j<k} ln j!`, the Gaussian case.
pub fn ln_zeta_gaussian<T: Real>(k: u64) -> T {
    let kk = ci::<T>(k as i64);
    kk / c(2.0) * (c::<T>(2.0) * T::PI()).ln()
        + (0..k).fold(T::zero(), |acc, j| acc + ln_factorial::<T>(j))
}

/// Large-k approximation `ln ζ_{k,ν} ≈ (k²/2ν) ln k − 3k²/4ν + (k/ν) ln k`,
/// in the form usually quoted. Against the exact chain its error grows
/// faster than `k`; see [`ln_zeta_leading`] for the version that holds.
pub fn ln_zeta_asymptotic<T: Real>(k: u64, nu: u32) -> T {
    if k == 0 {
        return T::zero();
    }
    let kk = ci::<T>(k as i64);
    let nu = ci::<T>(nu as i64);
    let lk = kk.ln();
    kk * kk / (c::<T>(2.0) * nu) * lk - c::<T>(3.0) * kk * kk / (c::<T>(4.0) * nu) + kk / nu * lk
}

/// `ln ζ_{k,ν} ≈ (k²/2ν)(ln k − 3/2 − ln C(2ν−1, ν)) + k ln 2π`, with error
/// `O(ln k)`.
///
/// The binomial comes from the Freud asymptotics `γ_k^{2ν} ≈ k/C(2ν−1, ν)`
/// of the `y^{2ν}/2ν` weight; for `ν = 1` this is Barnes' G expansion.
pub fn ln_zeta_leading<T: Real>(k: u64, nu: u32) -> T {
    if k == 0 {
        return T::zero();
    }
    let kk = ci::<T>(k as i64);
    let two_nu = ci::<T>(2 * nu as i64);
    let n = 2 * nu as u64 - 1;
    let ln_binom = ln_factorial::<T>(n) - ln_factorial::<T>(nu as u64) - ln_factorial::<T>(n - nu as u64);
    kk * kk / two_nu * (kk.ln() - c::<T>(1.5) - ln_binom) + kk * (c::<T>(2.0) * T::PI()).ln()
}
