//! Mean-field predictions in the regime where `n − N` is of order `ln N`.
//!
//! Every quantity here is a ratio of sums over the number `k` of eigenvalues
//! sitting in the newborn well,
//! `S(p) = Σ_k N^{−k²/2ν} e^{2kpφ_e} A_k`,
//! with `A_k` taken from [`ModelChain`]. Sums are evaluated as log-sum-exp so
//! that large `N` and large `k` never overflow.
//!
//! The scaling variable is `u = 2νφ_e p/ln N`; `ū` is the integer closest to
//! `u` and `ε_u` tells on which side of `ū` the variable sits. Two-term
//! "reduced" formulas keep only the sectors `ū` and `ū ± 1`.

use crate::critical::{newborn_scaling, solve_near_critical};
use crate::equilibrium::{classical_gamma_beta, ClassicalRecurrence, EqMeasure};
use crate::modelchain::ModelChain;
use crate::potentials::CriticalSpec;
use crate::scalar::{c, ci, Real};
use crate::Error;

/// Distance from a forbidden value of `u` below which a regime is flagged.
pub const GUARD_BAND: f64 = 0.02;

/// A point `(N, p)` of the scaling regime.
///
/// `N` and `p` are real so that the oracle can hit a prescribed `u` with an
/// integer index `N + p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegimePoint<T> {
    pub n_big: T,
    pub p: T,
    pub u: T,
    pub ubar: i64,
    pub eps_u: i64,
    /// `u > 0` and `u` not within the guard band of an integer.
    pub valid_z: bool,
    /// `u > 1/2` and `u` not within the guard band of a half-integer.
    pub valid_psi: bool,
}

fn classify<T: Real>(u: T) -> (i64, i64, bool, bool) {
    let half = c::<T>(0.5);
    let guard = c::<T>(GUARD_BAND);
    let ubar = if u >= T::zero() {
        (u + half).floor().to_i64().unwrap_or(0)
    } else {
        0
    };
    let diff = u - ci(ubar);
    let eps = if u > T::zero() && diff < T::zero() {
        -1
    } else {
        1
    };
    let dist_int = (u - u.round()).abs();
    let dist_half = (u - half - (u - half).round()).abs();
    let valid_z = u > guard && dist_int >= guard;
    let valid_psi = u > half + guard && dist_half >= guard;
    (ubar, eps, valid_z, valid_psi)
}

fn two_nu_phi<T: Real>(spec: &CriticalSpec<T>) -> T {
    c::<T>(2.0) * spec.nu_t() * spec.phi_e
}

/// Regime bookkeeping for given `N` and `p`.
pub fn make_regime<T: Real>(spec: &CriticalSpec<T>, n_big: T, p: T) -> RegimePoint<T> {
    let u = two_nu_phi(spec) * p / n_big.ln();
    let (ubar, eps_u, valid_z, valid_psi) = classify(u);
    RegimePoint {
        n_big,
        p,
        u,
        ubar,
        eps_u,
        valid_z,
        valid_psi,
    }
}

/// Regime bookkeeping at a prescribed `u` (so `p = u ln N/(2νφ_e)`).
pub fn regime_at_u<T: Real>(spec: &CriticalSpec<T>, n_big: T, u: T) -> RegimePoint<T> {
    let p = u * n_big.ln() / two_nu_phi(spec);
    make_regime(spec, n_big, p)
}

impl<T: Real> RegimePoint<T> {
    /// `1 − 2ε_u(u − ū)`, the gap between the dominant and the next sector
    /// exponents, in units of `ln N/2ν`.
    pub fn sector_gap(&self) -> T {
        T::one() - ci::<T>(2 * self.eps_u) * (self.u - ci(self.ubar))
    }
}

/// Local coordinate around the newborn well.
#[derive(Clone, Copy, Debug)]
pub struct ScalingMap<T> {
    pub e: T,
    pub n_big: T,
    /// `N^{−1/2ν}(2 sinh φ_e Q(e)/T_c)^{−1/2ν}`, i.e. `dx/dy`.
    pub scale: T,
}

impl<T: Real> ScalingMap<T> {
    pub fn new(spec: &CriticalSpec<T>, n_big: T) -> Self {
        let base = n_big * c::<T>(2.0) * spec.sinh_phi() * spec.q_at_e() / spec.tc;
        let scale = base.powf(-T::one() / (c::<T>(2.0) * spec.nu_t()));
        ScalingMap {
            e: spec.e,
            n_big,
            scale,
        }
    }

    pub fn to_x(&self, y: T) -> T {
        self.e + self.scale * y
    }

    pub fn to_y(&self, x: T) -> T {
        (x - self.e) / self.scale
    }

    pub fn dy_dx(&self) -> T {
        T::one() / self.scale
    }
}

fn log_sum_exp<T: Real>(terms: impl IntoIterator<Item = T>) -> T {
    let v: Vec<T> = terms.into_iter().collect();
    let m = v.iter().copied().fold(T::neg_infinity(), T::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().fold(T::zero(), |a, &t| a + (t - m).exp()).ln()
}

/// The sector sum `Σ_k N^{(2ku−k²)/2ν} A_k` and the computable prefactors of
/// the partition function.
#[derive(Clone, Debug)]
pub struct ZSum<T> {
    /// `ln Σ_k N^{(2ku−k²)/2ν} A_k`.
    pub ln_sum: T,
    /// `(k, ln term_k)` for every sector included.
    pub ln_terms: Vec<(usize, T)>,
    /// `p ln 2π − p N V_eff(e)/T_c`, when `V_eff(e)` was supplied.
    pub ln_known_prefactor: Option<T>,
    /// `ln H_N` with `H_N = ∏_{j<N} j!`, when `N` is an integer.
    pub ln_h_big_n: Option<T>,
}

/// Two-term coefficients shared by the reduced formulas.
#[derive(Clone, Copy, Debug)]
struct Reduced<T> {
    pre: T,
    a_plus: T,
    a_minus: T,
    /// `N^{(2|u−ū|−1)/2ν} A_{ū+ε}/A_ū`.
    x: T,
}

/// Summary of the classical comparison for `u ≥ 3`.
#[derive(Clone, Debug)]
pub struct LargeUReport<T> {
    pub u: T,
    /// `t = T_c p/N`, the temperature offset matched to `n = N + p`.
    pub t: T,
    pub gamma_reduced: T,
    pub beta_reduced: T,
    pub gamma_full: T,
    pub beta_full: T,
    /// Extremes of the full-sum `γ` over the period `[ū − ½, ū + ½]`.
    pub gamma_envelope: (T, T),
    pub beta_envelope: (T, T),
    /// `1 + ζ s` and `cosh φ_e` with `s` the newborn scale.
    pub gamma_bounds_analytic: (T, T),
    /// `2ζ s` and `e − 2`.
    pub beta_bounds_analytic: (T, T),
    /// Bounds from the solved two-cut measure, if the solver converged.
    pub gamma_bounds_measure: Option<(T, T)>,
    pub beta_bounds_measure: Option<(T, T)>,
    pub gamma_full_inside: bool,
    pub beta_full_inside: bool,
}

/// Mean-field evaluator tying a critical spec to the model chain.
#[derive(Clone, Copy, Debug)]
pub struct MeanField<'a, T> {
    pub spec: &'a CriticalSpec<T>,
    pub chain: &'a ModelChain<T>,
    a: T,
    phi: T,
    sinh: T,
    cosh: T,
}

impl<'a, T: Real> MeanField<'a, T> {
    /// The chain must have its constant `A` attached.
    pub fn new(spec: &'a CriticalSpec<T>, chain: &'a ModelChain<T>) -> Result<Self, Error> {
        let a = chain
            .a_const
            .ok_or_else(|| Error::Domain("model chain has no A constant attached".into()))?;
        if chain.nu != spec.nu {
            return Err(Error::Domain("model chain and spec disagree on ν".into()));
        }
        Ok(MeanField {
            spec,
            chain,
            a,
            phi: spec.phi_e,
            sinh: spec.phi_e.sinh(),
            cosh: spec.phi_e.cosh(),
        })
    }

    fn nu2(&self) -> T {
        c::<T>(2.0) * self.spec.nu_t()
    }

    /// Largest `k` with a known amplitude `A_k`.
    fn k_top(&self) -> usize {
        self.chain.ln_a.len() - 1
    }

    /// Regime shifted by `dp` at fixed `N`.
    pub fn shifted(&self, rp: &RegimePoint<T>, dp: i64) -> RegimePoint<T> {
        make_regime(self.spec, rp.n_big, rp.p + ci(dp))
    }

    /// `ln(N^{(2ku−k²)/2ν} A_k)`.
    pub fn ln_sector(&self, rp: &RegimePoint<T>, k: usize) -> T {
        let kk = ci::<T>(k as i64);
        rp.n_big.ln() / self.nu2() * (c::<T>(2.0) * kk * rp.u - kk * kk) + self.chain.ln_a[k]
    }

    /// `ln S(p + shift)`, with `S(p) = Σ_k N^{−k²/2ν} e^{2kpφ_e} A_k`.
    pub fn ln_s(&self, rp: &RegimePoint<T>, shift: i64) -> T {
        let q = self.shifted(rp, shift);
        log_sum_exp((0..=self.k_top()).map(|k| self.ln_sector(&q, k)))
    }

    fn mean_k(&self, rp: &RegimePoint<T>, shift: i64) -> T {
        let q = self.shifted(rp, shift);
        let terms: Vec<T> = (0..=self.k_top()).map(|k| self.ln_sector(&q, k)).collect();
        let m = terms.iter().copied().fold(T::neg_infinity(), T::max);
        let (mut num, mut den) = (T::zero(), T::zero());
        for (k, &t) in terms.iter().enumerate() {
            let w = (t - m).exp();
            num = num + ci::<T>(k as i64) * w;
            den = den + w;
        }
        num / den
    }

    /// The sector sum. Fails if the chain does not reach `ū + 10`.
    ///
    /// `veff_e` is the effective potential at the well, measured in the
    /// same normalization as `V`; it only enters the reported prefactor.
    pub fn sum_z(&self, rp: &RegimePoint<T>, veff_e: Option<T>) -> Result<ZSum<T>, Error> {
        if (self.k_top() as i64) < rp.ubar + 10 {
            return Err(Error::Domain(format!(
                "model chain reaches k = {}, need at least ū + 10 = {}",
                self.k_top(),
                rp.ubar + 10
            )));
        }
        let ln_terms: Vec<(usize, T)> = (0..=self.k_top())
            .map(|k| (k, self.ln_sector(rp, k)))
            .collect();
        let ln_sum = log_sum_exp(ln_terms.iter().map(|t| t.1));
        let ln_2pi = (c::<T>(2.0) * T::PI()).ln();
        let ln_known_prefactor = veff_e.map(|v| rp.p * ln_2pi - rp.p * rp.n_big * v / self.spec.tc);
        let ln_h_big_n = if rp.n_big == rp.n_big.round() && rp.n_big > T::zero() {
            let n = rp.n_big.to_usize().unwrap_or(0);
            Some(crate::specialfn::ln_hn::<T>(n as u64))
        } else {
            None
        };
        Ok(ZSum {
            ln_sum,
            ln_terms,
            ln_known_prefactor,
            ln_h_big_n,
        })
    }

    /// `ln(h_{N+p}/(2π e^{−N V_eff(e)/T_c})) = ln S(p+1) − ln S(p)`.
    pub fn ln_h_ratio_full(&self, rp: &RegimePoint<T>) -> T {
        self.ln_s(rp, 1) - self.ln_s(rp, 0)
    }

    /// Two-term version of [`Self::ln_h_ratio_full`].
    pub fn ln_h_ratio_reduced(&self, rp: &RegimePoint<T>) -> T {
        let r = self.reduced(rp);
        let eps = ci::<T>(rp.eps_u);
        c::<T>(2.0) * ci::<T>(rp.ubar) * self.phi
            + (T::one() + c::<T>(2.0) * eps * (eps * self.phi).exp() * self.sinh * r.x).ln()
    }

    /// `γ_{N+p} = √(S(p+1)S(p−1))/S(p)`.
    pub fn gamma_full(&self, rp: &RegimePoint<T>) -> T {
        (c::<T>(0.5) * (self.ln_s(rp, 1) + self.ln_s(rp, -1)) - self.ln_s(rp, 0)).exp()
    }

    /// `β_{N+p} = 2 sinh φ_e (⟨k⟩_{p+1} − ⟨k⟩_p)`, measured from the
    /// main-cut value `0`.
    pub fn beta_full(&self, rp: &RegimePoint<T>) -> T {
        c::<T>(2.0) * self.sinh * (self.mean_k(rp, 1) - self.mean_k(rp, 0))
    }

    fn reduced(&self, rp: &RegimePoint<T>) -> Reduced<T> {
        let ln_n = rp.n_big.ln();
        let nu2 = self.nu2();
        let ub = rp.ubar;
        let d = rp.u - ci(ub);
        let la = |k: i64| self.chain.ln_amp(k);
        let ln_ub = la(ub).expect("ū beyond model chain");
        let a_plus = (ln_n * d / nu2
            + c::<T>(0.5) * (la(ub + 1).expect("ū+1 beyond model chain") - ln_ub))
            .exp();
        let a_minus = match la(ub - 1) {
            Some(l) => (-ln_n * d / nu2 + c::<T>(0.5) * (l - ln_ub)).exp(),
            None => T::zero(),
        };
        let ln_ratio = la(ub + rp.eps_u).expect("ū+ε beyond model chain") - ln_ub;
        let x = (ln_n * (c::<T>(2.0) * d.abs() - T::one()) / nu2 + ln_ratio).exp();
        Reduced {
            pre: (self.a / (c::<T>(2.0) * self.sinh)).sqrt(),
            a_plus,
            a_minus,
            x,
        }
    }

    /// `1 + 2 sinh²φ_e N^{(|u−ū|−½)/ν} A_{ū+ε}/A_ū`. Meaningful when
    /// `rp.valid_z`.
    pub fn gamma_reduced(&self, rp: &RegimePoint<T>) -> T {
        T::one() + c::<T>(2.0) * self.sinh * self.sinh * self.reduced(rp).x
    }

    /// `4 sinh²φ_e N^{(2|u−ū|−1)/2ν} e^{ε_u φ_e} A_{ū+ε}/A_ū`. Meaningful
    /// when `rp.valid_z`.
    pub fn beta_reduced(&self, rp: &RegimePoint<T>) -> T {
        let eps = ci::<T>(rp.eps_u);
        c::<T>(4.0) * self.sinh * self.sinh * (eps * self.phi).exp() * self.reduced(rp).x
    }

    /// Denominators `(L₁₁, L₂₂) = (1 + cosh φ_e x e^{−εφ_e}, 1 + cosh φ_e x e^{εφ_e})`.
    fn l_diag(&self, rp: &RegimePoint<T>, x: T) -> (T, T) {
        let e = (ci::<T>(rp.eps_u) * self.phi).exp();
        (T::one() + self.cosh * x / e, T::one() + self.cosh * x * e)
    }

    /// `(ψ_{N+p−1}, ψ_{N+p})` at `x = x(y)` from the two dominant sectors.
    /// Uses `ψ_{−1} ≡ 0` when `ū = 0`.
    pub fn psi_reduced(&self, rp: &RegimePoint<T>, y: T) -> (T, T) {
        let r = self.reduced(rp);
        let ub = rp.ubar;
        let ps_u = self.chain.psi_model(ub, y);
        let ps_m = self.chain.psi_model(ub - 1, y);
        let (l1, l2) = self.l_diag(rp, r.x);
        let h = (self.phi / c(2.0)).exp();
        let lo = r.pre * (r.a_plus * ps_u / h + r.a_minus * h * ps_m) / l1;
        let hi = r.pre * (r.a_plus * h * ps_u + r.a_minus * ps_m / h) / l2;
        (lo, hi)
    }

    /// `(φ_{N+p−1}, φ_{N+p})` from the two dominant sectors.
    pub fn phi_reduced(&self, rp: &RegimePoint<T>, y: T) -> Result<(T, T), Error> {
        let r = self.reduced(rp);
        let ub = rp.ubar;
        let hat_u = self.chain.psihat_model(ub, y)?;
        let hat_m = if ub >= 1 {
            self.chain.psihat_model(ub - 1, y)?
        } else {
            T::zero()
        };
        let (l1, l2) = self.l_diag(rp, r.x);
        let h = (self.phi / c(2.0)).exp();
        let lo = r.pre * (r.a_plus * hat_u / h + r.a_minus * h * hat_m) / l1;
        let hi = r.pre * (r.a_plus * h * hat_u + r.a_minus * hat_m / h) / l2;
        Ok((lo, hi))
    }

    /// The 2×2 matrix `[[ψ_{n−1}, φ_{n−1}], [ψ_n, φ_n]]` assembled as
    /// `√(A/2 sinh φ_e) L^{−1} M R Y(y)`.
    pub fn psi_matrix(&self, rp: &RegimePoint<T>, y: T) -> Result<[[T; 2]; 2], Error> {
        let r = self.reduced(rp);
        let ub = rp.ubar;
        let yv = [
            [
                self.chain.psi_model(ub - 1, y),
                if ub >= 1 {
                    self.chain.psihat_model(ub - 1, y)?
                } else {
                    T::zero()
                },
            ],
            [self.chain.psi_model(ub, y), self.chain.psihat_model(ub, y)?],
        ];
        let rd = [r.a_minus, r.a_plus];
        let h = (self.phi / c(2.0)).exp();
        let m = [[h, T::one() / h], [T::one() / h, h]];
        let (l1, l2) = self.l_diag(rp, r.x);
        let linv = [T::one() / l1, T::one() / l2];
        let mut out = [[T::zero(); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let s = (0..2).fold(T::zero(), |acc, k| acc + m[i][k] * rd[k] * yv[k][j]);
                *cell = r.pre * linv[i] * s;
            }
        }
        Ok(out)
    }

    /// Coefficients `c_k` with `ψ_{N+p}(x) ≈ Σ_k c_k ψ_{k,ν}(y)`, including
    /// the `N^{1/8ν}` prefactor.
    pub fn psi_full_coeffs(&self, rp: &RegimePoint<T>) -> Vec<T> {
        let ln_n = rp.n_big.ln();
        let nu2 = self.nu2();
        let base = ln_n / (c::<T>(4.0) * nu2)
            + c::<T>(0.5) * (self.a / (c::<T>(2.0) * self.sinh)).ln()
            - c::<T>(0.5) * (self.ln_s(rp, 1) + self.ln_s(rp, 0));
        (0..self.k_top())
            .map(|k| {
                let kh = ci::<T>(k as i64) + c(0.5);
                (base
                    + ln_n / nu2 * (c::<T>(2.0) * kh * rp.u - kh * kh)
                    + kh * self.phi
                    + c::<T>(0.5) * (self.chain.ln_a[k] + self.chain.ln_a[k + 1]))
                    .exp()
            })
            .collect()
    }

    /// `ψ_{N+p}` from the full sector sum.
    pub fn psi_full(&self, rp: &RegimePoint<T>, y: T) -> T {
        let coef = self.psi_full_coeffs(rp);
        let ps = self.chain.psi_all(coef.len() - 1, y);
        coef.iter()
            .zip(&ps)
            .fold(T::zero(), |a, (&c, &p)| a + c * p)
    }

    /// `ψ_{N+p}` and `d/dy` of its polynomial part (the weight factor is
    /// common to all terms and cancels in Christoffel–Darboux numerators).
    fn psi_full_with_derivative(&self, rp: &RegimePoint<T>, y: T) -> (T, T) {
        let coef = self.psi_full_coeffs(rp);
        let (ps, ds) = self.chain.chain().psi_with_derivative(coef.len() - 1, y);
        coef.iter()
            .zip(ps.iter().zip(&ds))
            .fold((T::zero(), T::zero()), |(a, b), (&c, (&p, &d))| {
                (a + c * p, b + c * d)
            })
    }

    /// `φ_{N+p−1}` from the full sector sum. The sum runs from `k = −1`; that
    /// term is taken as `√(A_{−1}A_0) ψ̂_{−1}(y) := √(2π/A) e^{y^{2ν}/4ν}`,
    /// which follows from `P̂_{−1} = 1` and `h_{−1} = 2π A_0/(A A_{−1})`.
    pub fn phi_full(&self, rp: &RegimePoint<T>, y: T) -> T {
        let ln_n = rp.n_big.ln();
        let nu2 = self.nu2();
        let base = ln_n / (c::<T>(4.0) * nu2)
            + c::<T>(0.5) * (self.a / (c::<T>(2.0) * self.sinh)).ln()
            - c::<T>(0.5) * (self.ln_s(rp, 0) + self.ln_s(rp, -1));
        let kt = self.k_top();
        let hats = self.chain.psihat_all(kt - 1, y);
        let expo = |kh: T| ln_n / nu2 * (c::<T>(2.0) * kh * rp.u - kh * kh) - kh * self.phi;
        let two_pi = c::<T>(2.0) * T::PI();
        let y2nu = y.powi(2 * self.spec.nu as i32) / nu2;
        let seed = c::<T>(0.5) * ((two_pi / self.a).ln() + y2nu);
        let mut acc = (base + expo(c(-0.5)) + seed).exp();
        for (k, &hat) in hats.iter().enumerate() {
            let kh = ci::<T>(k as i64) + c(0.5);
            let ln_c =
                base + expo(kh) + c::<T>(0.5) * (self.chain.ln_a[k] + self.chain.ln_a[k + 1]);
            acc = acc + ln_c.exp() * hat;
        }
        acc
    }

    /// `K_{ū,ν}(y, y′)·dy/dx` with `y, y′` the scaled positions of `x, x′`.
    pub fn kernel_reduced(&self, rp: &RegimePoint<T>, x: T, x2: T) -> T {
        let map = ScalingMap::new(self.spec, rp.n_big);
        let k = rp.ubar.max(0) as usize;
        self.chain.kernel_model(k, map.to_y(x), map.to_y(x2)) * map.dy_dx()
    }

    /// Christoffel–Darboux kernel built from the full-sum `ψ_{N+p}`,
    /// `ψ_{N+p−1}` and `γ_{N+p}`.
    pub fn kernel_full(&self, rp: &RegimePoint<T>, x: T, x2: T) -> T {
        let map = ScalingMap::new(self.spec, rp.n_big);
        let prev = self.shifted(rp, -1);
        let g = self.gamma_full(rp);
        let (y, y2) = (map.to_y(x), map.to_y(x2));
        if (y - y2).abs() < c::<T>(1e-10) * (y.abs() + T::one()) {
            let ym = (y + y2) / c(2.0);
            let (v1, d1) = self.psi_full_with_derivative(rp, ym);
            let (v0, d0) = self.psi_full_with_derivative(&prev, ym);
            return g * (d1 * v0 - d0 * v1) * map.dy_dx();
        }
        let a1 = self.psi_full(rp, y);
        let a0 = self.psi_full(&prev, y);
        let b1 = self.psi_full(rp, y2);
        let b0 = self.psi_full(&prev, y2);
        g * (a1 * b0 - a0 * b1) / (x - x2)
    }

    /// Compare the mean-field `γ`, `β` at large `u` with the two-cut classical
    /// bounds at the matched temperature `T_c (1 + p/N)`.
    pub fn large_u_match(&self, rp: &RegimePoint<T>) -> Result<LargeUReport<T>, Error> {
        if rp.u < c(3.0) {
            return Err(Error::Domain("large-u comparison needs u ≥ 3".into()));
        }
        let spec = self.spec;
        let t = spec.tc * rp.p / rp.n_big;
        let nb = newborn_scaling(spec, t)?;
        let gamma_bounds_analytic = (T::one() + nb.zeta * nb.scale, self.cosh);
        let beta_bounds_analytic = (c::<T>(2.0) * nb.zeta * nb.scale, spec.e - c(2.0));
        let measure: Option<EqMeasure<T>> = solve_near_critical(spec, t).ok();
        let (gamma_bounds_measure, beta_bounds_measure) =
            match measure.as_ref().map(classical_gamma_beta) {
                Some(ClassicalRecurrence::Bounds {
                    gamma_lo,
                    gamma_hi,
                    beta_lo,
                    beta_hi,
                }) => (Some((gamma_lo, gamma_hi)), Some((beta_lo, beta_hi))),
                _ => (None, None),
            };
        let mut g_env = (T::infinity(), T::neg_infinity());
        let mut b_env = (T::infinity(), T::neg_infinity());
        let samples = 41;
        for i in 0..samples {
            let frac = ci::<T>(i) / ci::<T>(samples - 1) - c(0.5);
            let q = regime_at_u(spec, rp.n_big, ci::<T>(rp.ubar) + frac);
            let g = self.gamma_full(&q);
            let b = self.beta_full(&q);
            g_env = (g_env.0.min(g), g_env.1.max(g));
            b_env = (b_env.0.min(b), b_env.1.max(b));
        }
        let gamma_full = self.gamma_full(rp);
        let beta_full = self.beta_full(rp);
        // β_full is measured from the main cut centre; the classical β is
        // the absolute diagonal coefficient with a main cut centred near 0.
        let (glo, ghi) = gamma_bounds_measure.unwrap_or(gamma_bounds_analytic);
        let (blo, bhi) = beta_bounds_measure.unwrap_or(beta_bounds_analytic);
        Ok(LargeUReport {
            u: rp.u,
            t,
            gamma_reduced: self.gamma_reduced(rp),
            beta_reduced: self.beta_reduced(rp),
            gamma_full,
            beta_full,
            gamma_envelope: g_env,
            beta_envelope: b_env,
            gamma_bounds_analytic,
            beta_bounds_analytic,
            gamma_bounds_measure,
            beta_bounds_measure,
            gamma_full_inside: gamma_full >= glo && gamma_full <= ghi,
            beta_full_inside: beta_full >= blo && beta_full <= bhi,
        })
    }
}

/// Saw-tooth deviation of an exact `γ` from a prediction,
/// `|γ − γ_pred|/(γ_pred − 1 + N^{−1/2})`. The floor keeps the measure finite
/// where the predicted correction vanishes.
pub fn gamma_deviation<T: Real>(n_big: T, exact: T, predicted: T) -> T {
    (exact - predicted).abs() / (predicted - T::one() + T::one() / n_big.sqrt())
}

/// `|β − β_pred|/(|β_pred| + N^{−1/2})`.
pub fn beta_deviation<T: Real>(n_big: T, exact: T, predicted: T) -> T {
    (exact - predicted).abs() / (predicted.abs() + T::one() / n_big.sqrt())
}
