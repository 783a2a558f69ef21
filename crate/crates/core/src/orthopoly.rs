//! Discretized Stieltjes procedure for weights of the form
//! `w(x) = exp(−s·P(x))` with `P` a polynomial bounded below.
//!
//! The same engine drives the exact finite-N oracle (`P = V`, `s = N/T_c`)
//! and the effective `y^{2ν}/2ν` model chain (`s = 1`).
//!
//! Orthogonalization works on the normalized vectors
//! `q_k(i) = √ω_i · p_k(x_i)`, where `ω_i` are quadrature weights times the
//! weight function and `p_k` are the orthonormal polynomials, so every
//! stored number stays of order one no matter how large `h_k` gets.

use crate::poly::Poly;
use crate::quadrature::GaussLegendre;
use crate::scalar::{c, ci, Real};
use crate::Error;
use std::sync::OnceLock;

/// `w(x) = exp(−coupling·P(x))`, stored with an offset so that the largest
/// value on the real line is of order one.
#[derive(Clone, Debug)]
pub struct PolyWeight<T> {
    pub poly: Poly<T>,
    pub coupling: T,
    /// `ln w(x) = −coupling·P(x)` is represented as `ln w̃(x) + ln_offset`.
    pub ln_offset: T,
}

impl<T: Real> PolyWeight<T> {
    /// Build the weight and pick the offset from the global minimum of `P`.
    pub fn new(poly: Poly<T>, coupling: T) -> Result<Self, Error> {
        let deg = poly.degree();
        if deg == 0 || deg % 2 == 1 || poly.leading() <= T::zero() {
            return Err(Error::Domain(
                "weight polynomial must have even positive degree and positive leading coefficient"
                    .into(),
            ));
        }
        if coupling <= T::zero() {
            return Err(Error::Domain("weight coupling must be positive".into()));
        }
        let dp = poly.derivative();
        let bound = cauchy_root_bound(&dp);
        let crit = dp.real_roots_in(-bound - T::one(), bound + T::one());
        let pmin = crit
            .iter()
            .map(|&x| poly.eval(x))
            .fold(poly.eval(T::zero()), |m, v| m.min(v));
        Ok(PolyWeight {
            poly,
            coupling,
            ln_offset: -coupling * pmin,
        })
    }

    /// `ln w̃(x) = −coupling·P(x) − ln_offset` (at most zero).
    pub fn ln_scaled(&self, x: T) -> T {
        -self.coupling * self.poly.eval(x) - self.ln_offset
    }

    pub fn scaled(&self, x: T) -> T {
        self.ln_scaled(x).exp()
    }

    /// `d/dx ln w(x)`.
    pub fn dlog(&self, x: T) -> T {
        -self.coupling * self.poly.derivative().eval(x)
    }

    /// Interval outside which `w(x)·(1+|x|)^{2n}` stays below `tail` relative
    /// to the peak of `w`.
    pub fn support(&self, n: usize, tail: T) -> (T, T) {
        let ln_tail = tail.ln();
        let two_n = ci::<T>(2 * n as i64);
        let excess = |x: T| self.ln_scaled(x) + two_n * (T::one() + x.abs()).ln() - ln_tail;
        let step = c::<T>(0.25);
        let find = |dir: T| {
            let mut x = T::zero();
            // Walk out past the last point where the envelope is significant.
            let mut last_significant = T::zero();
            for _ in 0..100_000 {
                x = x + dir * step;
                if excess(x) > T::zero() {
                    last_significant = x;
                } else if (x - last_significant).abs() > c(4.0) && self.dlog(x) * dir < T::zero() {
                    break;
                }
            }
            // Refine the crossing by bisection between the last significant
            // point and one step beyond it.
            let (mut a, mut b) = (last_significant, last_significant + dir * step);
            for _ in 0..60 {
                let m = (a + b) / c(2.0);
                if excess(m) > T::zero() {
                    a = m;
                } else {
                    b = m;
                }
            }
            b
        };
        (find(-T::one()), find(T::one()))
    }
}

/// Every real root of `p` lies in `[-bound, bound]`.
pub(crate) fn cauchy_root_bound<T: Real>(p: &Poly<T>) -> T {
    let lead = p.leading().abs();
    let n = p.coeffs().len();
    if n <= 1 {
        return T::one();
    }
    T::one()
        + p.coeffs()[..n - 1]
            .iter()
            .fold(T::zero(), |m, a| m.max(a.abs() / lead))
}

/// Settings for the discretization grid.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    /// Total number of quadrature nodes (rounded up to whole panels).
    pub nodes: usize,
    /// Gauss–Legendre points per panel.
    pub per_panel: usize,
    /// Relative tail of the weight (times `x^{2n}`) that may be discarded.
    pub tail: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            nodes: 4096,
            per_panel: 64,
            tail: 1e-45,
        }
    }
}

/// Recurrence coefficients of the orthonormal polynomials of a weight,
/// together with the discretization they came from.
///
/// Indexing: `beta[k] = β_k` for `k = 0..=n`, `gamma[k] = γ_k` for
/// `k = 1..=n` (`gamma[0]` is an unused zero), and
/// `x p_k = γ_{k+1} p_{k+1} + β_k p_k + γ_k p_{k−1}`.
#[derive(Clone, Debug)]
pub struct OrthoChain<T> {
    pub weight: PolyWeight<T>,
    pub lo: T,
    pub hi: T,
    pub beta: Vec<T>,
    pub gamma: Vec<T>,
    /// `ln h_k`, the monic norms `∫ π_k² w`.
    pub ln_h: Vec<T>,
    xs: Vec<T>,
    /// Plain quadrature weights.
    qw: Vec<T>,
    /// Scaled weight function `w̃(x_i)` at the nodes.
    wt: Vec<T>,
    /// Quadrature weight times the scaled weight function.
    ws: Vec<T>,
    vectors: Option<Vec<Vec<T>>>,
    /// `ψ_0..ψ_{n_max}` at every node, filled on first use.
    node_psi: OnceLock<Vec<Vec<T>>>,
}

impl<T: Real> OrthoChain<T> {
    /// Run the Stieltjes procedure for `p_0..p_n`.
    ///
    /// With `keep_vectors` the normalized vectors are stored, which allows
    /// [`OrthoChain::discrete_gram_defect`] and costs `nodes·(n+1)` scalars.
    ///
    /// The starting interval comes from [`PolyWeight::support`], which judges
    /// significance against the peak of the weight alone. When the global
    /// minimum of `P` sits in a well the polynomials do not populate, that
    /// envelope can cut off the region that matters. So after each pass the
    /// orthonormal functions are scanned outward from both edges, and the
    /// interval is widened and the pass repeated while any of them is still
    /// significant there.
    pub fn build(
        weight: PolyWeight<T>,
        n: usize,
        grid: GridSpec,
        keep_vectors: bool,
    ) -> Result<Self, Error> {
        let (mut lo, mut hi) = weight.support(n + 1, c(grid.tail));
        for _ in 0..8 {
            let chain = Self::build_on(weight.clone(), n, grid, keep_vectors, lo, hi)?;
            match chain.uncovered(c(grid.tail)) {
                None => return Ok(chain),
                Some((l, h)) => {
                    lo = l;
                    hi = h;
                }
            }
        }
        Err(Error::Numerical(
            "could not find an interval holding the orthonormal functions".into(),
        ))
    }

    /// Wider interval if some `ψ_k` carries more than `tail` of its mass
    /// outside `[lo, hi]`, judged on a walk of step 1/4 from each edge.
    fn uncovered(&self, tail: T) -> Option<(T, T)> {
        let n = self.n_max();
        let width = self.hi - self.lo;
        let step = c::<T>(0.25);
        let significant = |x: T| {
            let psi = self.psi(n, x);
            let peak = psi.iter().fold(T::zero(), |m, &v| m.max(v * v));
            !peak.is_finite() || peak * width > tail
        };
        let walk = |edge: T, dir: T| -> Option<T> {
            let mut x = edge;
            let mut last = None;
            for _ in 0..100_000 {
                x = x + dir * step;
                if significant(x) {
                    last = Some(x);
                } else if (x - last.unwrap_or(edge)).abs() > c(4.0)
                    && self.weight.dlog(x) * dir < T::zero()
                {
                    break;
                }
            }
            last.map(|l| l + dir * step)
        };
        let new_lo = walk(self.lo, -T::one());
        let new_hi = walk(self.hi, T::one());
        if new_lo.is_none() && new_hi.is_none() {
            return None;
        }
        Some((new_lo.unwrap_or(self.lo), new_hi.unwrap_or(self.hi)))
    }

    fn build_on(
        weight: PolyWeight<T>,
        n: usize,
        grid: GridSpec,
        keep_vectors: bool,
        lo: T,
        hi: T,
    ) -> Result<Self, Error> {
        let rule = GaussLegendre::<T>::new(grid.per_panel);
        let panels = grid.nodes.div_ceil(grid.per_panel).max(1);
        let (xs, qw) = rule.composite_grid(lo, hi, panels);
        let wt: Vec<T> = xs.iter().map(|&x| weight.scaled(x)).collect();
        let ws: Vec<T> = qw.iter().zip(&wt).map(|(&a, &b)| a * b).collect();
        let mass: T = ws.iter().fold(T::zero(), |a, &b| a + b);
        if !(mass > T::zero()) || !mass.is_finite() {
            return Err(Error::Numerical("weight has no mass on the grid".into()));
        }
        let ln_h0 = mass.ln() + weight.ln_offset;

        let m = xs.len();
        // Each node carries its own exponent: q_i = q̂_i·exp(sh_i) with
        // sh_i ≤ 0. Deep in the tail the starting entries √(w_i) are far
        // below the smallest representable value of a narrow-exponent type,
        // yet high-degree polynomials grow there to O(1). The recurrence is
        // node-wise linear, so the exponent can be split off and moved back
        // into the mantissa as it grows.
        let ln_mass = mass.ln();
        let tiny = c::<T>(-40.0);
        let mut sh: Vec<T> = Vec::with_capacity(m);
        let mut q: Vec<T> = Vec::with_capacity(m);
        for (&x, &a) in xs.iter().zip(&qw) {
            let ln_q = c::<T>(0.5) * (a.ln() + weight.ln_scaled(x) - ln_mass);
            if ln_q < tiny {
                sh.push(ln_q);
                q.push(T::one());
            } else {
                sh.push(T::zero());
                q.push(ln_q.exp());
            }
        }
        let mut f2: Vec<T> = sh.iter().map(|&v| (v + v).exp()).collect();
        let mut q_prev = vec![T::zero(); m];
        let big = c::<T>(1e20);
        let mut beta = Vec::with_capacity(n + 1);
        let mut gamma = vec![T::zero()];
        let mut ln_h = vec![ln_h0];
        let mut vectors = keep_vectors.then(Vec::new);
        let actual = |q: &[T], sh: &[T]| -> Vec<T> {
            q.iter()
                .zip(sh)
                .map(|(&v, &e)| if e == T::zero() { v } else { v * e.exp() })
                .collect()
        };
        let mut r = vec![T::zero(); m];
        for k in 0..=n {
            let b = (0..m).fold(T::zero(), |acc, i| acc + xs[i] * q[i] * q[i] * f2[i]);
            beta.push(b);
            if k == n {
                if let Some(v) = vectors.as_mut() {
                    v.push(actual(&q, &sh));
                }
                break;
            }
            let g = gamma[k];
            let mut norm2 = T::zero();
            for i in 0..m {
                let v = (xs[i] - b) * q[i] - g * q_prev[i];
                norm2 = norm2 + v * v * f2[i];
                r[i] = v;
            }
            let g_next = norm2.sqrt();
            if !(g_next > T::zero()) || !g_next.is_finite() {
                return Err(Error::Numerical(format!(
                    "Stieltjes breakdown at degree {}: grid too coarse for this many polynomials",
                    k + 1
                )));
            }
            gamma.push(g_next);
            ln_h.push(ln_h[k] + c::<T>(2.0) * g_next.ln());
            let inv = T::one() / g_next;
            let next: Vec<T> = r.iter().map(|&v| v * inv).collect();
            let old = std::mem::replace(&mut q, next);
            if let Some(v) = vectors.as_mut() {
                v.push(actual(&old, &sh));
            }
            q_prev = old;
            for i in 0..m {
                if sh[i] < T::zero() && q[i].abs() > big {
                    let shift = q[i].abs().ln().min(-sh[i]);
                    let s = (-shift).exp();
                    q[i] = q[i] * s;
                    q_prev[i] = q_prev[i] * s;
                    sh[i] = sh[i] + shift;
                    f2[i] = (sh[i] + sh[i]).exp();
                }
            }
        }
        Ok(OrthoChain {
            weight,
            lo,
            hi,
            beta,
            gamma,
            ln_h,
            xs,
            qw,
            wt,
            ws,
            vectors,
            node_psi: OnceLock::new(),
        })
    }

    /// Highest degree available.
    pub fn n_max(&self) -> usize {
        self.beta.len() - 1
    }

    pub fn nodes(&self) -> usize {
        self.xs.len()
    }

    /// Largest `|⟨q_j, q_k⟩ − δ_jk|` over stored vectors with `j,k ≤ kmax`.
    pub fn discrete_gram_defect(&self, kmax: usize) -> Option<T> {
        let v = self.vectors.as_ref()?;
        let kmax = kmax.min(v.len() - 1);
        let mut worst = T::zero();
        for j in 0..=kmax {
            for k in j..=kmax {
                let dot = v[j]
                    .iter()
                    .zip(&v[k])
                    .fold(T::zero(), |a, (&x, &y)| a + x * y);
                let target = if j == k { T::one() } else { T::zero() };
                worst = worst.max((dot - target).abs());
            }
        }
        Some(worst)
    }

    /// Orthonormal functions `p_k(x)·exp(ln_w(x)/2)` for `k = 0..=n`, i.e.
    /// `ψ_k(x) = π_k(x) √w(x) / √h_k`.
    ///
    /// The recurrence runs on rescaled values with the logarithm of the
    /// scale carried separately, so neither `p_k` nor the weight can overflow.
    pub fn psi(&self, n: usize, x: T) -> Vec<T> {
        self.psi_with_derivative(n, x).0
    }

    /// `ψ_k(x)` together with `p_k′(x)·√w(x)/…` in the same scaling, i.e. the
    /// values `D_k = p_k′(x)·exp(ln_w(x)/2)`. The kernel diagonal only needs
    /// the combination `ψ_k D_{k−1} − …`, where the weight derivative cancels.
    pub fn psi_with_derivative(&self, n: usize, x: T) -> (Vec<T>, Vec<T>) {
        assert!(n <= self.n_max());
        let ln_pref = c::<T>(0.5) * (self.weight.ln_scaled(x) + self.weight.ln_offset)
            - c::<T>(0.5) * self.ln_h[0];
        let mut vals = Vec::with_capacity(n + 1);
        let mut ders = Vec::with_capacity(n + 1);
        let big = c::<T>(1e30);
        let mut scale = ln_pref;
        let mut scale_exp = scale.exp();
        let (mut p_prev, mut d_prev) = (T::zero(), T::zero());
        let (mut p, mut d) = (T::one(), T::zero());
        vals.push(p * scale_exp);
        ders.push(d * scale_exp);
        for k in 0..n {
            let g_next = self.gamma[k + 1];
            let xb = x - self.beta[k];
            let p_next = (xb * p - self.gamma[k] * p_prev) / g_next;
            let d_next = (xb * d + p - self.gamma[k] * d_prev) / g_next;
            p_prev = p;
            d_prev = d;
            p = p_next;
            d = d_next;
            let mag = p.abs().max(d.abs());
            if mag > big {
                let s = T::one() / mag;
                p = p * s;
                d = d * s;
                p_prev = p_prev * s;
                d_prev = d_prev * s;
                scale = scale + mag.ln();
                scale_exp = scale.exp();
            }
            vals.push(p * scale_exp);
            ders.push(d * scale_exp);
        }
        (vals, ders)
    }

    /// Cauchy transform `C[w](y) = ∫ w(x)/(y−x) dx`, scaled by `exp(−ln_offset)`.
    ///
    /// Inside the grid span the principal value is taken by subtracting the
    /// singularity: `∫ (w(x) − w(y))/(y − x) dx + w(y)·ln|(y − lo)/(hi − y)|`.
    fn cauchy_weight_scaled(&self, y: T) -> T {
        if y <= self.lo || y >= self.hi {
            return self
                .xs
                .iter()
                .zip(&self.ws)
                .fold(T::zero(), |a, (&x, &w)| a + w / (y - x));
        }
        let wy = self.weight.scaled(y);
        let dl = self.weight.dlog(y);
        let d2l = -self.weight.coupling * self.weight.poly.derivative().derivative().eval(y);
        let f1 = dl * wy;
        let f2 = (dl * dl + d2l) * wy;
        let close = T::eps().sqrt() * (self.hi - self.lo);
        let mut acc = T::zero();
        for ((&x, &qw), &wx) in self.xs.iter().zip(&self.qw).zip(&self.wt) {
            let dx = y - x;
            let quotient = if dx.abs() < close {
                -f1 + c::<T>(0.5) * f2 * dx
            } else {
                (wx - wy) / dx
            };
            acc = acc + qw * quotient;
        }
        acc + wy * ((y - self.lo) / (self.hi - y)).abs().ln()
    }

    /// Second-kind functions `φ_k(y) = π̂_k(y)/(√h_k·√w(y))` for `k = 0..=n`,
    /// with `π̂_k(y) = ∫ π_k(x) w(x)/(y − x) dx` (principal value on the
    /// support).
    ///
    /// `π̂_0` is computed by quadrature; higher orders follow from the
    /// three-term recurrence with the `h_0` inhomogeneity at `k = 0`.
    pub fn phi(&self, n: usize, y: T) -> Vec<T> {
        assert!(n <= self.n_max());
        // Everything below carries the common factor exp(ln_offset/2), which
        // the seed's scaled Cauchy transform and √h̃_0 share.
        let ln_w_y = self.weight.ln_scaled(y) + self.weight.ln_offset;
        let ln_h0_scaled = self.ln_h[0] - self.weight.ln_offset;
        let sqrt_h0s = (c::<T>(0.5) * ln_h0_scaled).exp();
        let seed = self.cauchy_weight_scaled(y) / sqrt_h0s;
        let ln_pref = c::<T>(0.5) * self.weight.ln_offset - c::<T>(0.5) * ln_w_y;
        let pref = ln_pref.exp();
        let mut out = Vec::with_capacity(n + 1);
        out.push(seed * pref);
        if n == 0 {
            return out;
        }
        let mut prev = seed;
        let mut cur = ((y - self.beta[0]) * seed - sqrt_h0s) / self.gamma[1];
        out.push(cur * pref);
        for k in 1..n {
            let next = ((y - self.beta[k]) * cur - self.gamma[k] * prev) / self.gamma[k + 1];
            prev = cur;
            cur = next;
            out.push(cur * pref);
        }
        out
    }

    /// `φ_k(y)` for `k = 0..=n` at several points, through the identity
    /// `p_m(y)·π̂_k(y)/√h_k = ∫ p_k(x) p_m(x) w(x)/(y − x) dx` for
    /// `m ∈ {k, k−1}`. It holds because `(p_m(y) − p_m(x))/(y − x)` is a
    /// polynomial of degree below `k`.
    ///
    /// In the tail of the weight the second-kind function is exponentially
    /// small against the dominant solution, and both the forward recurrence
    /// and direct quadrature lose every digit. The integrand here is a
    /// product of orthonormal functions of size O(1), so nothing cancels.
    /// The denominator uses whichever of `ψ_k(y)`, `ψ_{k−1}(y)` is larger;
    /// the two never vanish together.
    pub fn phi_stable(&self, n: usize, ys: &[T]) -> Vec<Vec<T>> {
        assert!(n <= self.n_max());
        let node_psi: Vec<Vec<T>> = self.xs.iter().map(|&x| self.psi(n, x)).collect();
        ys.iter().map(|&y| self.phi_from_nodes(n, y, &node_psi)).collect()
    }

    /// Single-point version of [`OrthoChain::phi_stable`] that keeps the
    /// node table between calls, for callers that evaluate many points one
    /// at a time.
    pub fn phi_cached(&self, n: usize, y: T) -> Vec<T> {
        assert!(n <= self.n_max());
        let table = self
            .node_psi
            .get_or_init(|| self.xs.iter().map(|&x| self.psi(self.n_max(), x)).collect());
        self.phi_from_nodes(n, y, table)
    }

    fn phi_from_nodes(&self, n: usize, y: T, node_psi: &[Vec<T>]) -> Vec<T> {
        let (v, d) = self.psi_with_derivative(n, y);
        let half_dl = c::<T>(0.5) * self.weight.dlog(y);
        let inside = y > self.lo && y < self.hi;
        let close = T::eps().sqrt() * (self.hi - self.lo);
        let log_term = if inside {
            ((y - self.lo) / (self.hi - y)).abs().ln()
        } else {
            T::zero()
        };
        (0..=n)
            .map(|k| {
                let m = if k > 0 && v[k - 1].abs() > v[k].abs() {
                    k - 1
                } else {
                    k
                };
                let (dk, dm) = (d[k] + half_dl * v[k], d[m] + half_dl * v[m]);
                let fy = v[k] * v[m];
                let dfy = dk * v[m] + v[k] * dm;
                let mut acc = T::zero();
                for ((&x, &w), row) in self.xs.iter().zip(&self.qw).zip(node_psi) {
                    let dx = y - x;
                    let fx = row[k] * row[m];
                    let quotient = if !inside {
                        fx / dx
                    } else if dx.abs() < close {
                        -dfy
                    } else {
                        (fx - fy) / dx
                    };
                    acc = acc + w * quotient;
                }
                (acc + fy * log_term) / v[m]
            })
            .collect()
    }

    /// Same quantity as [`OrthoChain::phi`] for a single order, by direct
    /// principal-value quadrature of `p_k w` rather than by recurrence.
    pub fn phi_direct(&self, k: usize, y: T) -> T {
        // p_k on the grid through the recurrence (unscaled orthonormal values).
        let pk_at = |x: T| -> T {
            let (mut a, mut b) = (T::zero(), T::one());
            for j in 0..k {
                let next = ((x - self.beta[j]) * b - self.gamma[j] * a) / self.gamma[j + 1];
                a = b;
                b = next;
            }
            b
        };
        let f = |x: T| pk_at(x) * self.weight.scaled(x);
        let mut acc = T::zero();
        let inside = y > self.lo && y < self.hi;
        let fy = if inside { f(y) } else { T::zero() };
        for ((&x, &qw), &wx) in self.xs.iter().zip(&self.qw).zip(&self.wt) {
            let dx = y - x;
            if dx == T::zero() {
                continue;
            }
            acc = acc + qw * (pk_at(x) * wx - fy) / dx;
        }
        if inside {
            acc = acc + fy * ((y - self.lo) / (self.hi - y)).abs().ln();
        }
        let ln_w_y = self.weight.ln_scaled(y) + self.weight.ln_offset;
        let ln_h0_scaled = self.ln_h[0] - self.weight.ln_offset;
        // ∫ p_k w /(y−x) with p_k orthonormal for w = w̃·e^{offset}:
        // p_k = p̃_k·e^{−offset/2}, and p̃ obeys the recurrence seeded with 1/√h̃_0.
        let scale = (c::<T>(0.5) * self.weight.ln_offset
            - c::<T>(0.5) * ln_h0_scaled
            - c::<T>(0.5) * ln_w_y)
            .exp();
        acc * scale
    }

    /// `∫ p_j p_k w` on an independent grid with `nodes` points over the
    /// same interval, for `j,k ≤ kmax`. Returns the largest deviation from
    /// the identity.
    pub fn gram_defect_reintegrated(&self, kmax: usize, nodes: usize, per_panel: usize) -> T {
        let rule = GaussLegendre::<T>::new(per_panel);
        let panels = nodes.div_ceil(per_panel);
        let (xs, qw) = rule.composite_grid(self.lo, self.hi, panels);
        let mut gram = vec![vec![T::zero(); kmax + 1]; kmax + 1];
        for (&x, &w) in xs.iter().zip(&qw) {
            let psi = self.psi(kmax, x);
            for j in 0..=kmax {
                let pj = psi[j] * w;
                for k in j..=kmax {
                    gram[j][k] = gram[j][k] + pj * psi[k];
                }
            }
        }
        let mut worst = T::zero();
        for (j, row) in gram.iter().enumerate() {
            for (k, &v) in row.iter().enumerate().skip(j) {
                let target = if j == k { T::one() } else { T::zero() };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }

    /// Christoffel–Darboux kernel `Σ_{j<n} ψ_j(x)ψ_j(x′)` in its closed form
    /// `γ_n (ψ_n(x)ψ_{n−1}(x′) − ψ_{n−1}(x)ψ_n(x′))/(x − x′)`, switching to the
    /// derivative form on the diagonal.
    pub fn kernel(&self, n: usize, x: T, x2: T) -> T {
        assert!(n >= 1 && n <= self.n_max());
        let scale = (x.abs() + x2.abs() + T::one()) * c(1e-8);
        if (x - x2).abs() < scale {
            let xm = (x + x2) / c(2.0);
            let (v, d) = self.psi_with_derivative(n, xm);
            return self.gamma[n] * (d[n] * v[n - 1] - d[n - 1] * v[n]);
        }
        let a = self.psi(n, x);
        let b = self.psi(n, x2);
        self.gamma[n] * (a[n] * b[n - 1] - a[n - 1] * b[n]) / (x - x2)
    }

    /// `Σ_{j<n} ψ_j(x)ψ_j(x′)` summed directly.
    pub fn kernel_direct(&self, n: usize, x: T, x2: T) -> T {
        let a = self.psi(n, x);
        let b = self.psi(n, x2);
        (0..n).fold(T::zero(), |acc, j| acc + a[j] * b[j])
    }
}
