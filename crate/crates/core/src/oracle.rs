//! Exact finite-N ground truth.
//!
//! The recurrence coefficients of the model couple partition
//! functions at temperatures `T(n) = T_c·n/N`. Because the weight of the
//! n-th partition function is `exp(−(n/T(n))·V) = exp(−(N/T_c)·V)` for
//! every `n`, a single orthogonal-polynomial chain for this fixed weight
//! yields all `h_n`, `γ_n`, `β_n` at once.
//!
//! `N` is a real parameter here. Sampling the `ln N` regime at a prescribed
//! scaling variable with an integer `n` then only requires adjusting `N`.

use crate::orthopoly::{GridSpec, OrthoChain, PolyWeight};
use crate::poly::Poly;
use crate::quadrature::GaussLegendre;
use crate::scalar::{c, ci, Real};
use crate::Error;

/// Default discretization for the oracle.
pub fn default_grid() -> GridSpec {
    GridSpec {
        nodes: 6000,
        per_panel: 60,
        tail: 1e-45,
    }
}

/// `n_max = N + ⌈3 ln N⌉`.
pub fn default_n_max(n_big: f64) -> usize {
    (n_big + (3.0 * n_big.ln()).ceil()).ceil() as usize
}

/// Recurrence data for the weight `exp(−(N/T_c) V(x))`.
#[derive(Clone, Debug)]
pub struct RecChain<T> {
    pub n_big: T,
    pub tc: T,
    pub v: Poly<T>,
    pub n_max: usize,
    /// `ln h_n` for `n = 0..=n_max`.
    pub ln_h: Vec<T>,
    /// `γ_n` for `n = 1..=n_max` (index 0 unused).
    pub gamma: Vec<T>,
    /// `β_n` for `n = 0..=n_max`.
    pub beta: Vec<T>,
    chain: OrthoChain<T>,
}

/// Build the oracle chain.
///
/// After the Stieltjes pass, orthonormality of the first few wavefunctions
/// is re-integrated on an independent grid; a defect above
/// `max(1e−15, 1e6·eps)` is reported as a `Numerical` error.
pub fn build_rec_chain<T: Real>(
    v: &Poly<T>,
    n_big: T,
    tc: T,
    n_max: usize,
    grid: GridSpec,
) -> Result<RecChain<T>, Error> {
    if !(n_big > T::zero()) || !(tc > T::zero()) {
        return Err(Error::Domain("N and T_c must be positive".into()));
    }
    let weight = PolyWeight::new(v.clone(), n_big / tc)?;
    let chain = OrthoChain::build(weight, n_max, grid, false)?;
    let check = n_max.min(12);
    let defect = chain.gram_defect_reintegrated(check, grid.nodes + 600, grid.per_panel);
    let tol = c::<T>(1e-15).max(T::eps() * c(1e6));
    if !(defect < tol) {
        return Err(Error::Numerical(format!(
            "oracle orthogonality defect {defect}; increase nodes or precision"
        )));
    }
    Ok(RecChain {
        n_big,
        tc,
        v: v.clone(),
        n_max,
        ln_h: chain.ln_h.clone(),
        gamma: chain.gamma.clone(),
        beta: chain.beta.clone(),
        chain,
    })
}

impl<T: Real> RecChain<T> {
    pub fn ortho(&self) -> &OrthoChain<T> {
        &self.chain
    }

    /// `ψ_n(x) = π_n(x) e^{−NV(x)/2T_c}/√h_n`.
    pub fn eval_psi_exact(&self, n: usize, x: T) -> T {
        self.chain.psi(n, x)[n]
    }

    /// `φ_n(x) = π̂_n(x) e^{NV(x)/2T_c}/√h_n`, with the Cauchy transform taken
    /// as a principal value inside the numerical support.
    ///
    /// Evaluated through [`OrthoChain::phi_stable`], which stays accurate
    /// where the weight is exponentially small.
    pub fn eval_phi_exact(&self, n: usize, x: T) -> T {
        self.chain.phi_stable(n, &[x])[0][n]
    }

    /// [`Self::eval_phi_exact`] at many points, sharing the node values.
    pub fn eval_phi_exact_many(&self, n: usize, xs: &[T]) -> Vec<T> {
        self.chain.phi_stable(n, xs).into_iter().map(|v| v[n]).collect()
    }

    /// `φ_n(x)` from the forward recurrence seeded with the Cauchy transform
    /// of the weight. Accurate in the bulk, useless deep in the tail.
    pub fn eval_phi_recurrence(&self, n: usize, x: T) -> T {
        self.chain.phi(n, x)[n]
    }

    /// Christoffel–Darboux kernel `K_n(x, x′)`.
    pub fn kernel_exact(&self, n: usize, x: T, x2: T) -> T {
        self.chain.kernel(n, x, x2)
    }

    /// `∫_lo^hi K_n(x,x) dx`, with `hi` clipped to the numerical support.
    /// The diagonal is summed directly as `Σ_{j<n} ψ_j(x)²`.
    pub fn expected_count_exact(&self, n: usize, lo: T, hi: T, panels: usize) -> T {
        let lo = lo.max(self.chain.lo);
        let hi = hi.min(self.chain.hi);
        if !(hi > lo) {
            return T::zero();
        }
        let rule = GaussLegendre::<T>::new(32);
        rule.composite(
            |x| {
                let psi = self.chain.psi(n, x);
                psi[..n].iter().fold(T::zero(), |a, &p| a + p * p)
            },
            lo,
            hi,
            panels,
        )
    }

    /// Plain-text table `n, ln h_n, gamma_n, beta_n` at 30 significant digits.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "# N = {}\n# Tc = {}\n# n ln_h gamma beta\n",
            self.n_big.to_sci(30),
            self.tc.to_sci(30)
        );
        for n in 0..=self.n_max {
            let g = if n == 0 {
                "-".to_string()
            } else {
                self.gamma[n].to_sci(30)
            };
            out.push_str(&format!(
                "{n} {} {g} {}\n",
                self.ln_h[n].to_sci(30),
                self.beta[n].to_sci(30)
            ));
        }
        out
    }
}

/// `ln h_k` for `k = 0..=n` from Hankel determinants of the moments
/// `μ_j = ∫ x^j exp(−(n_k/T_k)·V)`, where the coupling is formed as
/// `n_k/T_k` with `T_k = T_c·n_k/N` for a reference index `n_k`.
///
/// This is the direct definition; it is only usable for small `n` because
/// Hankel matrices are badly conditioned.
pub fn hankel_ln_h<T: Real>(
    v: &Poly<T>,
    n_big: T,
    tc: T,
    n_ref: usize,
    n: usize,
    lo: T,
    hi: T,
) -> Result<Vec<T>, Error> {
    let n_ref_t = ci::<T>(n_ref.max(1) as i64);
    let temp = tc * n_ref_t / n_big;
    let coupling = n_ref_t / temp;
    let weight = PolyWeight::new(v.clone(), coupling)?;
    let rule = GaussLegendre::<T>::new(48);
    let size = n + 1;
    let mut mom = vec![T::zero(); 2 * size - 1];
    for (j, m) in mom.iter_mut().enumerate() {
        *m = rule
            .doubling(
                |x| x.powi(j as i32) * weight.scaled(x),
                lo,
                hi,
                T::eps() * c(1e3),
                4096,
            )
            .ok_or_else(|| Error::Numerical("moment quadrature did not converge".into()))?;
    }
    // Cholesky of the Hankel matrix: h_k are the squared pivots.
    let mut l = vec![vec![T::zero(); size]; size];
    let mut out = Vec::with_capacity(size);
    for i in 0..size {
        for j in 0..=i {
            let mut s = mom[i + j];
            for k in 0..j {
                s = s - l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > T::zero()) {
                    return Err(Error::Numerical("Hankel matrix lost positivity".into()));
                }
                l[i][i] = s.sqrt();
                out.push(s.ln() + weight.ln_offset);
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Ok(out)
}

/// A sample point of the `ln N` regime at an integer index.
#[derive(Clone, Copy, Debug)]
pub struct RegimeSample<T> {
    /// Integer index `n = N + p`.
    pub n: usize,
    /// Real `N` chosen so that the scaling variable equals the target.
    pub n_big: T,
    pub p: T,
    pub u: T,
}

/// Choose `n = N₀ + round(u ln N₀/(2νφ))` and then solve
/// `(n − N)·2νφ/ln N = u` for a real `N` close to `N₀`.
pub fn sample_at_u<T: Real>(n0: T, u: T, nu: u32, phi: T) -> Result<RegimeSample<T>, Error> {
    if !(n0 > ci(1)) {
        return Err(Error::Domain("N must exceed 1".into()));
    }
    let two_nu_phi = ci::<T>(2 * nu as i64) * phi;
    let p0 = u * n0.ln() / two_nu_phi;
    let n_int = (n0 + p0).round();
    if !(n_int > T::zero()) {
        return Err(Error::Domain(
            "scaling variable gives a negative index".into(),
        ));
    }
    // g(N) = (n − N)·2νφ − u·ln N; strictly decreasing for N > 0 when u ≥ 0.
    let mut nb = n_int - p0;
    for _ in 0..60 {
        let g = (n_int - nb) * two_nu_phi - u * nb.ln();
        let dg = -two_nu_phi - u / nb;
        let step = g / dg;
        nb = nb - step;
        if step.abs() < T::eps() * nb * c(4.0) {
            break;
        }
    }
    let p = n_int - nb;
    Ok(RegimeSample {
        n: n_int.to_usize().unwrap_or(0),
        n_big: nb,
        p,
        u: p * two_nu_phi / nb.ln(),
    })
}
