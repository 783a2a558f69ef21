//! The effective matrix model with weight `exp(−y^{2ν}/2ν)`.
//!
//! Near the transition, the eigenvalues that tunnel into the well at `e`
//! behave like a small matrix model in this potential. Its partition
//! functions `ζ_k = ∏_{j<k} h_j` (with `h_j` the monic norms) and the
//! amplitudes `A_k = A^{−k²}(2π)^{−k}ζ_k` weight the sum over the number `k`
//! of eigenvalues in the newborn cut.

use crate::orthopoly::{GridSpec, OrthoChain, PolyWeight};
use crate::poly::Poly;
use crate::potentials::CriticalSpec;
use crate::scalar::{c, ci, Real};
use crate::Error;

/// Recurrence data and wavefunctions of the `y^{2ν}/2ν` model.
#[derive(Clone, Debug)]
pub struct ModelChain<T> {
    pub nu: u32,
    pub k_max: usize,
    /// `ln ζ_k` for `k = 0..=k_max+1`.
    pub ln_zeta: Vec<T>,
    /// `ln h_k` for `k = 0..=k_max`.
    pub ln_h: Vec<T>,
    /// `γ_k` for `k = 1..=k_max` (index 0 unused).
    pub gamma: Vec<T>,
    /// Diagonal recurrence coefficients; zero up to rounding for this even
    /// weight.
    pub rec_beta: Vec<T>,
    /// The constant `A`, once attached.
    pub a_const: Option<T>,
    /// `ln A_k` for `k = 0..=k_max+1`, once `A` is attached.
    pub ln_a: Vec<T>,
    chain: OrthoChain<T>,
}

/// `A = (2 sinh φ_e)²(2 sinh φ_e Q(e)/T_c)^{1/2ν}`.
pub fn a_constant<T: Real>(spec: &CriticalSpec<T>) -> T {
    let sh = spec.sinh_phi();
    let base = c::<T>(2.0) * sh * spec.q_at_e() / spec.tc;
    c::<T>(4.0) * sh * sh * base.powf(T::one() / (c::<T>(2.0) * spec.nu_t()))
}

/// Largest `k_max` accepted by [`ModelChain::build`].
pub const K_MAX_LIMIT: usize = 200;

impl<T: Real> ModelChain<T> {
    /// Run the Stieltjes procedure for the model weight.
    ///
    /// The chain is carried one order past `k_max` so that kernels and
    /// `ζ_{k_max+1}` are available. After building, orthonormality of the
    /// first (up to 21) wavefunctions is re-checked on an independent grid
    /// and a `Numerical` error is raised if it has degraded.
    pub fn build(nu: u32, k_max: usize, grid: GridSpec) -> Result<Self, Error> {
        if nu == 0 {
            return Err(Error::Domain("ν must be at least 1".into()));
        }
        if k_max > K_MAX_LIMIT {
            return Err(Error::Domain(format!(
                "k_max must be at most {K_MAX_LIMIT}"
            )));
        }
        let deg = 2 * nu as usize;
        let poly = Poly::monomial(T::one() / ci::<T>(deg as i64), deg);
        let weight = PolyWeight::new(poly, T::one())?;
        let chain = OrthoChain::build(weight, k_max + 1, grid, false)?;
        let check_k = k_max.min(20);
        let defect = chain.gram_defect_reintegrated(check_k, grid.nodes + 512, grid.per_panel);
        let tol = c::<T>(1e-20).max(T::eps() * c(1e4));
        if !(defect < tol) {
            return Err(Error::Numerical(format!(
                "model chain lost orthonormality (defect {defect}); use more nodes or precision"
            )));
        }
        let ln_h = chain.ln_h[..=k_max + 1].to_vec();
        let mut ln_zeta = vec![T::zero()];
        for k in 0..=k_max {
            ln_zeta.push(ln_zeta[k] + ln_h[k]);
        }
        Ok(ModelChain {
            nu,
            k_max,
            ln_zeta,
            ln_h: ln_h[..=k_max].to_vec(),
            gamma: chain.gamma[..=k_max].to_vec(),
            rec_beta: chain.beta[..=k_max].to_vec(),
            a_const: None,
            ln_a: Vec::new(),
            chain,
        })
    }

    /// Attach the constant `A` and fill `ln A_k`.
    pub fn with_a_const(mut self, a: T) -> Self {
        let ln_a_const = a.ln();
        let ln_2pi = (c::<T>(2.0) * T::PI()).ln();
        self.ln_a = self
            .ln_zeta
            .iter()
            .enumerate()
            .map(|(k, &lz)| {
                let kk = ci::<T>(k as i64);
                lz - kk * kk * ln_a_const - kk * ln_2pi
            })
            .collect();
        self.a_const = Some(a);
        self
    }

    /// `ln A_k`; `A_k` is taken as zero for `k < 0`.
    pub fn ln_amp(&self, k: i64) -> Option<T> {
        if k < 0 {
            None
        } else {
            self.ln_a.get(k as usize).copied()
        }
    }

    /// Underlying orthogonal-polynomial chain.
    pub fn chain(&self) -> &OrthoChain<T> {
        &self.chain
    }

    /// `ψ_{k,ν}(y) = P_k(y) e^{−y^{2ν}/4ν}/√h_k`; zero for `k < 0`.
    pub fn psi_model(&self, k: i64, y: T) -> T {
        if k < 0 {
            return T::zero();
        }
        self.chain.psi(k as usize, y)[k as usize]
    }

    /// `ψ̂_{k,ν}(y) = √h_k·P̂_k(y)·e^{y^{2ν}/4ν}` with `P̂_k = π̂_k/h_k`, the
    /// normalized Cauchy transform (principal value on the real axis).
    ///
    /// Forward recurrence is unstable wherever `ψ̂_k` is the recessive
    /// solution (|y| past the largest zero), so this goes through the
    /// node-integral form instead.
    pub fn psihat_model(&self, k: i64, y: T) -> Result<T, Error> {
        if k < 0 {
            return Err(Error::Domain(
                "ψ̂ has no intrinsic normalization below k = 0".into(),
            ));
        }
        Ok(self.chain.phi_cached(k as usize, y)[k as usize])
    }

    /// `ψ_k(y)` for `k = 0..=k`.
    pub fn psi_all(&self, k: usize, y: T) -> Vec<T> {
        self.chain.psi(k, y)
    }

    /// `ψ̂_k(y)` for `k = 0..=k`.
    pub fn psihat_all(&self, k: usize, y: T) -> Vec<T> {
        self.chain.phi_cached(k, y)
    }

    /// Christoffel–Darboux kernel `Σ_{j<k} ψ_j(y)ψ_j(y′)`; zero for `k = 0`.
    pub fn kernel_model(&self, k: usize, y: T, y2: T) -> T {
        if k == 0 {
            return T::zero();
        }
        self.chain.kernel(k, y, y2)
    }

    /// Plain-text table with columns `k, ln_zeta, gamma, ln_A` at 30
    /// significant digits. `gamma` and `ln_A` are blank where undefined.
    pub fn to_table(&self) -> String {
        let mut out = format!("# nu = {}\n# k ln_zeta gamma ln_A\n", self.nu);
        for k in 0..=self.k_max {
            let gamma = if k == 0 {
                "-".to_string()
            } else {
                self.gamma[k].to_sci(30)
            };
            let ln_a = self
                .ln_a
                .get(k)
                .map(|v| v.to_sci(30))
                .unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "{k} {} {gamma} {ln_a}\n",
                self.ln_zeta[k].to_sci(30)
            ));
        }
        out
    }
}
