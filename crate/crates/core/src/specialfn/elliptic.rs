use num_complex::Complex;

use crate::scalar::{c, Real};
use crate::Error;

/// Complete elliptic integrals of a parameter and of its complement, with
/// the nome of the period lattice.
///
/// `m` is the parameter (squared modulus) and `m1 = 1 − m` its complement;
/// both are stored because near-critical curves have `m` as small as
/// `1e−12` and forming `1 − m` would throw away its digits.
#[derive(Clone, Copy, Debug)]
pub struct EllipticParams<T> {
    pub m: T,
    pub m1: T,
    pub k: T,
    pub kprime: T,
    pub e: T,
    pub eprime: T,
    /// `τ = i K′/K`.
    pub tau: Complex<T>,
    /// `q = e^{iπτ} = e^{−πK′/K}` (real for real `m`).
    pub q: T,
}

/// `K` and `E` for parameter `m` given `√(1−m)` directly.
///
/// Gauss' AGM: `K = π/(2·M(1, √(1−m)))` and `E = K·(1 − Σ 2^{n−1} c_n²)`.
fn k_and_e<T: Real>(m: T, sqrt_m1: T) -> (T, T) {
    let two = c::<T>(2.0);
    let mut a = T::one();
    let mut b = sqrt_m1;
    let mut sum = m / two;
    let mut pow2 = c::<T>(0.5);
    let tol = T::eps();
    for _ in 0..200 {
        let cn = (a - b) / two;
        if cn.abs() <= tol * a {
            break;
        }
        let an = (a + b) / two;
        b = (a * b).sqrt();
        a = an;
        pow2 = pow2 * two;
        sum = sum + pow2 * cn * cn;
    }
    let k = T::FRAC_PI_2() / a;
    (k, k * (T::one() - sum))
}

/// Complete integrals for `m ∈ [0, 1)`.
pub fn complete_integrals<T: Real>(m: T) -> Result<EllipticParams<T>, Error> {
    complete_integrals_pair(m, T::one() - m)
}

/// Complete integrals for a parameter whose complement is known exactly.
pub fn complete_integrals_pair<T: Real>(m: T, m1: T) -> Result<EllipticParams<T>, Error> {
    if !(m >= T::zero() && m < T::one()) || !(m1 > T::zero()) {
        return Err(Error::Domain(format!(
            "elliptic parameter {m} outside [0,1)"
        )));
    }
    let (k, e) = k_and_e(m, m1.sqrt());
    let (kprime, eprime) = if m == T::zero() {
        (T::infinity(), T::one())
    } else {
        k_and_e(m1, m.sqrt())
    };
    let ratio = kprime / k;
    let q = if m == T::zero() {
        T::zero()
    } else {
        (-T::PI() * ratio).exp()
    };
    Ok(EllipticParams {
        m,
        m1,
        k,
        kprime,
        e,
        eprime,
        tau: Complex::new(T::zero(), ratio),
        q,
    })
}

impl<T: Real> EllipticParams<T> {
    /// Parameters of the complementary modulus (`m ↔ 1−m`).
    pub fn complement(&self) -> Result<Self, Error> {
        complete_integrals_pair(self.m1, self.m)
    }

    /// Legendre's relation `EK′ + E′K − KK′`, which equals `π/2`.
    pub fn legendre(&self) -> T {
        self.e * self.kprime + self.eprime * self.k - self.k * self.kprime
    }
}

/// `sn, cn, dn` for real argument by descending Landen transformation.
///
/// `m1 = 1 − m` is passed separately for the same reason as in
/// [`complete_integrals_pair`].
pub fn sn_cn_dn_real<T: Real>(u: T, m: T, m1: T) -> (T, T, T) {
    let two = c::<T>(2.0);
    if m == T::zero() {
        return (u.sin(), u.cos(), T::one());
    }
    let tol = T::eps();
    let mut a = vec![T::one()];
    let mut cs = vec![m.sqrt()];
    let mut b = m1.sqrt();
    for _ in 0..200 {
        let last_a = *a.last().unwrap();
        let cn = (last_a - b) / two;
        let an = (last_a + b) / two;
        b = (last_a * b).sqrt();
        a.push(an);
        cs.push(cn);
        if cn.abs() <= tol * an {
            break;
        }
    }
    let n = a.len() - 1;
    let mut phi = two.powi(n as i32) * a[n] * u;
    for j in (1..=n).rev() {
        phi = (phi + (cs[j] / a[j] * phi.sin()).asin()) / two;
    }
    let (s, cc) = (phi.sin(), phi.cos());
    // dn = √(m₁ + m cn²) has no cancellation anywhere on the real axis, unlike
    // the Landen quotient cn/cos(φ₁ − φ₀), which is 0/0 near u = K.
    (s, cc, (m1 + m * cc * cc).sqrt())
}

/// `sn, cn, dn` for complex argument `u = x + iy` and real `m ∈ [0,1)`.
///
/// The imaginary part is handled by Jacobi's imaginary transformation and
/// the two pieces are combined with the addition theorems.
pub fn sn_cn_dn<T: Real>(
    u: Complex<T>,
    m: T,
) -> Result<(Complex<T>, Complex<T>, Complex<T>), Error> {
    sn_cn_dn_pair(u, m, T::one() - m)
}

/// As [`sn_cn_dn`] with the complementary parameter supplied exactly.
pub fn sn_cn_dn_pair<T: Real>(
    u: Complex<T>,
    m: T,
    m1: T,
) -> Result<(Complex<T>, Complex<T>, Complex<T>), Error> {
    if !(m >= T::zero() && m < T::one()) {
        return Err(Error::Domain(format!(
            "elliptic parameter {m} outside [0,1)"
        )));
    }
    let (s, cc, d) = sn_cn_dn_real(u.re, m, m1);
    if u.im == T::zero() {
        let z = T::zero();
        return Ok((Complex::new(s, z), Complex::new(cc, z), Complex::new(d, z)));
    }
    let (s1, c1, d1) = sn_cn_dn_real(u.im, m1, m);
    let den = c1 * c1 + m * s * s * s1 * s1;
    if den.abs() <= T::eps().sqrt() {
        return Err(Error::Domain(format!(
            "argument {} + {}i is at a pole of sn (denominator {den})",
            u.re, u.im
        )));
    }
    let sn = Complex::new(s * d1, cc * d * s1 * c1) / den;
    let cn = Complex::new(cc * c1, -s * d * s1 * d1) / den;
    let dn = Complex::new(d * c1 * d1, -m * s * cc * s1) / den;
    Ok((sn, cn, dn))
}

/// Incomplete integral of the second kind in Jacobi's form,
/// `E(u, m) = ∫_0^{sn u} √((1 − m y²)/(1 − y²)) dy` along the straight
/// segment in the `y` plane.
///
/// Evaluated through Carlson's forms:
/// `E = s·R_F(cn², dn², 1) − (m/3)·s³·R_D(cn², dn², 1)` with `s = sn u`.
pub fn incomplete_e<T: Real>(u: Complex<T>, m: T) -> Result<Complex<T>, Error> {
    let (s, cn, dn) = sn_cn_dn(u, m)?;
    if s.im.abs() <= T::eps() * s.re.abs() && s.re.abs() > T::one() {
        return Err(Error::Domain(
            "straight path from 0 to sn(u) crosses the branch cut at |y| > 1".into(),
        ));
    }
    let one = Complex::new(T::one(), T::zero());
    let x = cn * cn;
    let y = dn * dn;
    let rf = super::carlson_rf(x, y, one)?;
    let rd = super::carlson_rd(x, y, one)?;
    Ok(s * rf - s * s * s * rd * (m / c(3.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_at_zero() {
        let p = complete_integrals(0.0f64).unwrap();
        assert!((p.k - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((p.e - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn reference_values() {
        // K(0.5) = 1.8540746773013719, E(0.5) = 1.3506438810476755
        let p = complete_integrals(0.5f64).unwrap();
        assert!((p.k - 1.854_074_677_301_371_9).abs() < 1e-14);
        assert!((p.e - 1.350_643_881_047_675_5).abs() < 1e-14);
    }
}
