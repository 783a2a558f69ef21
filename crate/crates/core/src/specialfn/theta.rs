use num_complex::Complex;

use crate::scalar::{c, ci, Real};
use crate::Error;

/// `θ₁(z | τ) = 2 Σ_{n≥0} (−1)^n q^{(n+½)²} sin((2n+1)πz)` with `q = e^{iπτ}`.
///
/// The argument has period 2 and quasi-period `τ`. Only purely imaginary
/// `τ` is supported, so the nome is real.
pub fn theta1<T: Real>(z: Complex<T>, tau: Complex<T>) -> Result<Complex<T>, Error> {
    let q = nome(tau)?;
    let pi = T::PI();
    let mut sum = Complex::new(T::zero(), T::zero());
    let ln_q = q.ln();
    let growth = pi * z.im.abs();
    let mut n: i64 = 0;
    loop {
        let np = ci::<T>(n) + c(0.5);
        let k = ci::<T>(2 * n + 1);
        // Log of the largest possible magnitude of this term.
        let ln_bound = np * np * ln_q + k * growth;
        let term = (z * pi * k).sin() * (np * np * ln_q).exp();
        let term = if n % 2 == 0 { term } else { -term };
        sum = sum + term;
        // Terms are log-concave in n: stop once past the peak and negligible.
        let past_peak = np > growth / (-ln_q);
        let small = ln_bound.exp() <= T::eps() * c(1e-3) * (sum.norm() + T::min_positive_value());
        if (past_peak && small) || n > 10_000 {
            break;
        }
        n += 1;
    }
    Ok(sum * c::<T>(2.0))
}

/// `θ₁′(0 | τ)`, the derivative in `z` (so it carries the factor `π`):
/// `2π Σ (−1)^n (2n+1) q^{(n+½)²}`.
pub fn theta1_prime0<T: Real>(tau: Complex<T>) -> Result<T, Error> {
    let q = nome(tau)?;
    let ln_q = q.ln();
    let mut sum = T::zero();
    for n in 0..10_000i64 {
        let np = ci::<T>(n) + c(0.5);
        let term = ci::<T>(2 * n + 1) * (np * np * ln_q).exp();
        sum = if n % 2 == 0 { sum + term } else { sum - term };
        if term <= T::eps() * c(1e-3) * sum.abs() {
            break;
        }
    }
    Ok(sum * c::<T>(2.0) * T::PI())
}

fn nome<T: Real>(tau: Complex<T>) -> Result<T, Error> {
    if !(tau.im > T::zero()) {
        return Err(Error::Domain("theta function needs Im τ > 0".into()));
    }
    if tau.re != T::zero() {
        return Err(Error::Domain("only purely imaginary τ is supported".into()));
    }
    Ok((-T::PI() * tau.im).exp())
}
