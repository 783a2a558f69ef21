//! Expansions around the critical temperature.
//!
//! Throughout, `t = T − T_c` is an absolute temperature offset. Prefactors
//! use `t` itself while logarithms use `ln(t/T_c)`, so that every `ln` has
//! a dimensionless argument. The linear `t < 0` laws and the width of the
//! newborn cut are only consistent with the solver under this reading.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::equilibrium::{solve_one_cut, solve_two_cut, EqMeasure, SolveOptions};
use crate::poly::Poly;
use crate::potentials::CriticalSpec;
use crate::scalar::{c, ci, Real};
use crate::specialfn::ln_factorial;
use crate::Error;

/// Leading-order endpoints and recurrence coefficients for `t < 0`.
#[derive(Clone, Copy, Debug)]
pub struct OneCutDrift<T> {
    pub a: T,
    pub b: T,
    pub gamma_n: T,
    pub beta_n: T,
}

/// Leading-order description of the newborn cut for `t > 0`.
#[derive(Clone, Debug)]
pub struct NewbornScaling<T> {
    pub zeta: T,
    pub c_const: T,
    /// Even monic polynomial of degree `2ν − 2`.
    pub g: Poly<T>,
    /// `(−t/ln t)^{1/2ν}`.
    pub scale: T,
    pub c: T,
    pub d: T,
    pub delta_x0: T,
    pub m_asym: T,
    /// `τ = i·tau_im`.
    pub tau_im: T,
    pub epsilon: T,
}

fn ln_ratio<T: Real>(spec: &CriticalSpec<T>, t: T) -> T {
    (t.abs() / spec.tc).ln()
}

/// `1/((e−2)^{2ν−1}Q(2))` and `1/((e+2)^{2ν−1}Q(−2))`.
fn edge_factors<T: Real>(spec: &CriticalSpec<T>) -> (T, T) {
    let k = (2 * spec.nu - 1) as i32;
    let two = c::<T>(2.0);
    let right = T::one() / ((spec.e - two).powi(k) * spec.q.eval(two));
    let left = T::one() / ((spec.e + two).powi(k) * spec.q.eval(-two));
    (right, left)
}

pub fn one_cut_drift<T: Real>(spec: &CriticalSpec<T>, t: T) -> Result<OneCutDrift<T>, Error> {
    if t > T::zero() {
        return Err(Error::Domain("one-cut drift needs t ≤ 0".into()));
    }
    let (right, left) = edge_factors(spec);
    let two = c::<T>(2.0);
    Ok(OneCutDrift {
        a: -two + t * left,
        b: two - t * right,
        gamma_n: T::one() - t / c(4.0) * (right + left),
        beta_n: -t / two * (right - left),
    })
}

/// `C = 4ν²φ_e/(sinh φ_e Q(e))`.
pub fn c_constant<T: Real>(spec: &CriticalSpec<T>) -> T {
    let nu = spec.nu_t();
    c::<T>(4.0) * nu * nu * spec.phi_e / (spec.sinh_phi() * spec.q_at_e())
}

/// `ζ = (C/2 · ν!(ν−1)!/(2ν)!)^{1/2ν}`.
pub fn zeta<T: Real>(spec: &CriticalSpec<T>) -> T {
    let nu = spec.nu as u64;
    let ln_ratio: T = ln_factorial::<T>(nu) + ln_factorial::<T>(nu - 1) - ln_factorial::<T>(2 * nu);
    (c_constant(spec) / c(2.0) * ln_ratio.exp()).powf(T::one() / ci(2 * nu as i64))
}

fn binom_central(k: u64) -> u128 {
    // (2k)!/(k!k!) by the multiplicative formula.
    let mut acc: u128 = 1;
    for j in 1..=k as u128 {
        acc = acc * (k as u128 + j) / j;
    }
    acc
}

/// `G(ξ) = Σ_{k<ν} (2k)!/(k!)² ζ^{2k} ξ^{2(ν−1−k)}`.
pub fn g_poly<T: Real>(nu: u32, zeta: T) -> Poly<T> {
    let nu = nu as usize;
    let mut coeffs = vec![T::zero(); 2 * nu - 1];
    for k in 0..nu {
        let coef = ci::<T>(binom_central(k as u64) as i64) * zeta.powi(2 * k as i32);
        coeffs[2 * (nu - 1 - k)] = coef;
    }
    Poly::new(coeffs)
}

/// `G` over the rationals for a rational `ζ²`.
pub fn g_poly_exact(nu: u32, zeta_sq: &BigRational) -> Poly<BigRational> {
    let nu = nu as usize;
    let mut coeffs = vec![BigRational::zero(); 2 * nu - 1];
    let mut zpow = BigRational::one();
    for k in 0..nu {
        coeffs[2 * (nu - 1 - k)] =
            BigRational::from_integer(BigInt::from(binom_central(k as u64))) * &zpow;
        zpow = &zpow * zeta_sq;
    }
    Poly::new(coeffs)
}

/// Check `((2ν−2)G − ξG′)(ξ² − 4ζ²) = 4ζ²(G − G(2ζ))` exactly, coefficient
/// by coefficient, for a rational `ζ²`.
pub fn g_ode_holds_exact(nu: u32, zeta_sq: &BigRational) -> bool {
    let g = g_poly_exact(nu, zeta_sq);
    let int = |v: i64| BigRational::from_integer(BigInt::from(v));
    let four_z2 = int(4) * zeta_sq;
    let xi = Poly::new(vec![int(0), int(1)]);
    let lhs_core = &g.scale(int(2 * nu as i64 - 2)) - &(&xi * &g.derivative());
    let quad = Poly::new(vec![-four_z2.clone(), int(0), int(1)]);
    let lhs = &lhs_core * &quad;
    // G(2ζ) only involves even powers of 2ζ, i.e. powers of 4ζ².
    let mut g_at = BigRational::zero();
    let mut pw = BigRational::one();
    for (i, coef) in g.coeffs().iter().enumerate() {
        if i % 2 == 0 {
            g_at += coef * &pw;
            pw = &pw * &four_z2;
        }
    }
    let rhs = (&g - &Poly::constant(g_at)).scale(four_z2);
    lhs == rhs
}

/// Integer identity `G(2ζ)/ζ^{2ν−2} = ½(2ν)!/((ν−1)!ν!)`.
pub fn g_at_two_zeta_ratio_exact(nu: u32) -> (BigInt, BigInt) {
    let nu = nu as u64;
    let mut lhs = BigInt::zero();
    for k in 0..nu {
        lhs += BigInt::from(binom_central(k)) * BigInt::from(4u32).pow((nu - 1 - k) as u32);
    }
    let fact = |n: u64| (1..=n).fold(BigInt::one(), |a, j| a * BigInt::from(j));
    let rhs = fact(2 * nu) / (fact(nu - 1) * fact(nu) * BigInt::from(2));
    (lhs, rhs)
}

/// `Σ_j binom(2ν−1, ν+j) sinh((2j+1)ψ)/sinh ψ`, the closed form of
/// `G(2ζ cosh ψ)/ζ^{2ν−2}`.
pub fn g_cosh_form<T: Real>(nu: u32, psi: T) -> T {
    let n = 2 * nu as i64 - 1;
    let mut acc = T::zero();
    for j in 0..nu as i64 {
        let k = nu as i64 + j;
        let binom = (0..k).fold(T::one(), |a, i| a * ci::<T>(n - i) / ci::<T>(i + 1));
        acc = acc + binom * (ci::<T>(2 * j + 1) * psi).sinh() / psi.sinh();
    }
    acc
}

pub fn newborn_scaling<T: Real>(spec: &CriticalSpec<T>, t: T) -> Result<NewbornScaling<T>, Error> {
    if !(t > T::zero()) {
        return Err(Error::Domain("newborn scaling needs t > 0".into()));
    }
    let lt = ln_ratio(spec, t);
    if !(lt < T::zero()) {
        return Err(Error::Domain("newborn scaling needs t < T_c".into()));
    }
    let nu = spec.nu_t();
    let z = zeta(spec);
    let scale = (-t / lt).powf(T::one() / (c::<T>(2.0) * nu));
    let sh = spec.sinh_phi();
    Ok(NewbornScaling {
        zeta: z,
        c_const: c_constant(spec),
        g: g_poly(spec.nu, z),
        scale,
        c: spec.e - c::<T>(2.0) * z * scale,
        d: spec.e + c::<T>(2.0) * z * scale,
        delta_x0: c::<T>(4.0) * nu * spec.phi_e * sh / lt,
        m_asym: c::<T>(4.0) * z / (sh * sh) * scale,
        tau_im: -lt / (c::<T>(2.0) * nu * T::PI()),
        epsilon: -c::<T>(2.0) * nu * spec.phi_e * t / (spec.tc * lt),
    })
}

/// Mean number of eigenvalues near `e` when `n` exceeds `N`:
/// `2νφ_e(n − N)/ln N`.
pub fn expected_count<T: Real>(spec: &CriticalSpec<T>, n_big: T, n: T) -> T {
    c::<T>(2.0) * spec.nu_t() * spec.phi_e * (n - n_big) / n_big.ln()
}

/// `∂²F/∂t²` on either side of the transition.
pub fn transition_curvature<T: Real>(spec: &CriticalSpec<T>, t: T) -> Result<T, Error> {
    if t == T::zero() {
        return Err(Error::Domain("curvature formula undefined at t = 0".into()));
    }
    if t < T::zero() {
        let (right, left) = edge_factors(spec);
        Ok(t / c(2.0) * (right + left))
    } else {
        let phi = spec.phi_e;
        Ok(c::<T>(4.0) * spec.nu_t() * phi * phi / ln_ratio(spec, t))
    }
}

/// Solve the equilibrium problem at `T = T_c + t`, seeding Newton with the
/// expansions above: one cut for `t ≤ 0`, two cuts for `t > 0`.
///
/// For the two-cut side the newborn width from the ansatz tends to be
/// short by a logarithmic factor, so a few wider seeds are tried as well.
pub fn solve_near_critical<T: Real>(spec: &CriticalSpec<T>, t: T) -> Result<EqMeasure<T>, Error> {
    let temp = spec.tc + t;
    let opts = SolveOptions::default();
    if t <= T::zero() {
        let guess = if t == T::zero() {
            [c(-2.0), c(2.0)]
        } else {
            let dr = one_cut_drift(spec, t)?;
            [dr.a, dr.b]
        };
        return solve_one_cut(&spec.v, temp, guess, opts);
    }
    let nb = newborn_scaling(spec, t)?;
    let half = (nb.d - nb.c) / c(2.0);
    let mut last = Error::Numerical("no seed tried".into());
    for widen in [1.0, 2.5, 0.5, 5.0] {
        let w = half * c(widen);
        match solve_two_cut(
            &spec.v,
            temp,
            [c(-2.0), c(2.0), spec.e - w, spec.e + w],
            opts,
        ) {
            Ok(mu) => return Ok(mu),
            Err(e) => last = e,
        }
    }
    Err(last)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_binomials() {
        assert_eq!(binom_central(0), 1);
        assert_eq!(binom_central(3), 20);
        assert_eq!(binom_central(10), 184_756);
    }
}
