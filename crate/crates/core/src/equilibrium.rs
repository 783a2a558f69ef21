//! One- and two-cut equilibrium measures.
//!
//! The resolvent is `W = ½(V′ − M√σ)` with `σ = ∏(x − r_i)` over the
//! endpoints. Writing `V′/√σ = Σ_j c_j x^j` at infinity, `M` is the
//! polynomial part and the endpoints are fixed by
//!
//! * one cut: `c_{−1} = 0`, `c_{−2} = 2T`;
//! * two cuts: `c_{−1} = c_{−2} = 0` with `c_{−3} = 2T`, plus equal
//!   effective potential on both cuts, `∫_b^c M√σ = 0`.
//!
//! The Laurent coefficients are exact finite sums (the series of
//! `∏(1 − r/x)^{−1/2}`), so the moment conditions and their Jacobian carry
//! no quadrature error. Only the gap condition needs an integral; it is
//! done by tanh-sinh with the endpoint distances passed explicitly.
//!
//! Branches on the real axis are fixed by continuity from `+∞`: with `k`
//! endpoints to the right of `x`, `√σ(x + i0) = i^k √|σ(x)|`.

use num_complex::Complex;

use crate::kv::{KvBlock, KvWriter};
use crate::poly::Poly;
use crate::potentials::CriticalSpec;
use crate::quadrature::tanh_sinh;
use crate::scalar::{c, ci, f, Real};
use crate::specialfn::{
    carlson_rf, complete_integrals_pair, incomplete_e, theta1, theta1_prime0, EllipticParams,
};
use crate::Error;

/// Extra data attached to a two-cut measure.
#[derive(Clone, Debug)]
pub struct TwoCutData<T> {
    /// Zero of the normalized third-kind differential `Ω = (x − x₀)/√σ`.
    pub x0: T,
    /// Biratio `(b−a)(d−c)/((c−a)(d−b))`.
    pub m: T,
    /// `u_∞ = i·u_inf_im`.
    pub u_inf_im: T,
    pub ell: EllipticParams<T>,
}

/// An equilibrium measure with `s ∈ {1, 2}` cuts.
#[derive(Clone, Debug)]
pub struct EqMeasure<T> {
    pub s: usize,
    /// `[a, b]` or `[a, b, c, d]`, increasing.
    pub endpoints: Vec<T>,
    pub m: Poly<T>,
    pub t: T,
    pub v: Poly<T>,
    pub two_cut: Option<TwoCutData<T>>,
}

/// Newton settings for the solvers.
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions<T> {
    /// Tolerance on the scaled residuals; `None` picks `eps^0.8`.
    pub tol: Option<T>,
    pub max_iter: usize,
}

impl<T> Default for SolveOptions<T> {
    fn default() -> Self {
        SolveOptions {
            tol: None,
            max_iter: 100,
        }
    }
}

// ---------------------------------------------------------------------------
// Laurent series at infinity
// ---------------------------------------------------------------------------

/// Coefficients `s_k` of `∏_i (1 − r_i/x)^{p}` in powers of `1/x`, for
/// `p = ±½`, up to `x^{−(n−1)}`.
fn series_pow_half<T: Real>(roots: &[T], n: usize, inverse: bool) -> Vec<T> {
    let mut out = vec![T::zero(); n];
    out[0] = T::one();
    for &r in roots {
        // (1 − r/x)^{∓½} coefficients: a_k = a_{k−1}·(k − 1 ± ½)/k · r.
        let mut fac = vec![T::zero(); n];
        fac[0] = T::one();
        for k in 1..n {
            let kk = ci::<T>(k as i64);
            let shift = if inverse { c::<T>(-0.5) } else { c::<T>(-1.5) };
            fac[k] = fac[k - 1] * (kk + shift) / kk * r;
        }
        let mut next = vec![T::zero(); n];
        for i in 0..n {
            if out[i] == T::zero() {
                continue;
            }
            for j in 0..n - i {
                next[i + j] = next[i + j] + out[i] * fac[j];
            }
        }
        out = next;
    }
    out
}

/// `d/dr_i` of the `∏(1 − r/x)^{−½}` series: `½ x^{−1} S Σ_k r_i^k x^{−k}`.
fn series_inv_sqrt_deriv<T: Real>(s: &[T], r: T) -> Vec<T> {
    let n = s.len();
    let mut out = vec![T::zero(); n];
    // out[k] = ½ Σ_{l<k} s_l r^{k−1−l}, built incrementally.
    let mut acc = T::zero();
    for k in 1..n {
        acc = acc * r + s[k - 1];
        out[k] = acc * c(0.5);
    }
    out
}

/// Coefficients of `V′/√σ` at infinity for powers `x^{top}` down to
/// `x^{−depth}`: returns `(M, [c_{−1}, …, c_{−depth}])`.
fn moments_from_series<T: Real>(
    vp: &Poly<T>,
    s_half: usize,
    series: &[T],
    depth: usize,
) -> (Poly<T>, Vec<T>) {
    let dv = vp.degree() as i64;
    let top = dv - s_half as i64;
    let coef = |j: i64| -> T {
        let mut acc = T::zero();
        for (i, &vi) in vp.coeffs().iter().enumerate() {
            let k = i as i64 - s_half as i64 - j;
            if k >= 0 && (k as usize) < series.len() {
                acc = acc + vi * series[k as usize];
            }
        }
        acc
    };
    let m = if top >= 0 {
        Poly::new((0..=top).map(coef).collect())
    } else {
        Poly::zero()
    };
    let neg = (1..=depth as i64).map(|j| coef(-j)).collect();
    (m, neg)
}

/// `M` and the first negative-power coefficients of `V′/√σ`.
pub fn laurent_moments<T: Real>(vp: &Poly<T>, roots: &[T], depth: usize) -> (Poly<T>, Vec<T>) {
    let s_half = roots.len() / 2;
    let n = vp.degree() + depth + 2;
    let series = series_pow_half(roots, n, true);
    moments_from_series(vp, s_half, &series, depth)
}

/// Negative-power coefficients `w_k` (k ≥ 1) of `P(x)·√σ(x)` at infinity,
/// i.e. `P√σ = polynomial + Σ_{k≥1} w_k x^{−k}`; returns `w_1..w_n`.
fn negative_part_times_sqrt<T: Real>(p: &Poly<T>, roots: &[T], n: usize) -> Vec<T> {
    let s_half = roots.len() / 2;
    let len = p.degree() + s_half + n + 2;
    let series = series_pow_half(roots, len, false);
    // P(x) x^{s} Σ_k series_k x^{−k}: power = i + s − k.
    (1..=n as i64)
        .map(|k| {
            let mut acc = T::zero();
            for (i, &pi) in p.coeffs().iter().enumerate() {
                let idx = i as i64 + s_half as i64 + k;
                if idx >= 0 && (idx as usize) < series.len() {
                    acc = acc + pi * series[idx as usize];
                }
            }
            acc
        })
        .collect()
}

/// Number of series terms needed for full precision when `|x| ≥ 2·max|r|`.
fn tail_terms<T: Real>() -> usize {
    (T::digits() as f64 * std::f64::consts::LOG2_10) as usize + 8
}

// ---------------------------------------------------------------------------
// Real-axis helpers
// ---------------------------------------------------------------------------

/// `√|σ(x)|` with the distances to the two enclosing endpoints supplied
/// directly (tanh-sinh gives them without cancellation).
fn sqrt_abs_sigma_between<T: Real>(roots: &[T], x: T, lo_idx: usize, xa: T, xb: T) -> T {
    let mut prod = T::one();
    for (i, &r) in roots.iter().enumerate() {
        let dist = if i == lo_idx {
            xa
        } else if i == lo_idx + 1 {
            xb
        } else {
            (x - r).abs()
        };
        prod = prod * dist;
    }
    prod.sqrt()
}

fn sqrt_abs_sigma<T: Real>(roots: &[T], x: T) -> T {
    roots
        .iter()
        .fold(T::one(), |acc, &r| acc * (x - r).abs())
        .sqrt()
}

fn quad_tol<T: Real>() -> T {
    T::eps() * c(1e3)
}

impl<T: Real> EqMeasure<T> {
    /// `σ(x) = ∏ (x − r_i)`.
    pub fn sigma(&self, x: T) -> T {
        self.endpoints
            .iter()
            .fold(T::one(), |acc, &r| acc * (x - r))
    }

    /// Number of endpoints strictly to the right of `x`.
    fn endpoints_above(&self, x: T) -> usize {
        self.endpoints.iter().filter(|&&r| r > x).count()
    }

    pub fn in_support(&self, x: T) -> bool {
        self.endpoints.chunks(2).any(|p| x >= p[0] && x <= p[1])
    }

    /// Eigenvalue density `ρ(x) = M(x)√(−σ(x))/(2πT)` on the support, zero
    /// elsewhere. The sign follows the boundary value from the upper half
    /// plane, so a negative result flags an inconsistent measure.
    pub fn density(&self, x: T) -> T {
        if !self.in_support(x) {
            return T::zero();
        }
        let k = self.endpoints_above(x);
        let sign = if k % 4 == 1 { T::one() } else { -T::one() };
        sign * self.m.eval(x) * sqrt_abs_sigma(&self.endpoints, x)
            / (c::<T>(2.0) * T::PI() * self.t)
    }

    /// `∫ ρ` over cut number `i` (0-based).
    pub fn cut_mass(&self, i: usize) -> T {
        let (lo, hi) = (self.endpoints[2 * i], self.endpoints[2 * i + 1]);
        let k = self.endpoints.len() - 2 * i - 1;
        let sign = if k % 4 == 1 { T::one() } else { -T::one() };
        let roots = self.endpoints.clone();
        let m = &self.m;
        let val = tanh_sinh(
            |x, xa, xb| m.eval(x) * sqrt_abs_sigma_between(&roots, x, 2 * i, xa, xb),
            lo,
            hi,
            quad_tol(),
        );
        sign * val / (c::<T>(2.0) * T::PI() * self.t)
    }

    /// Total mass, which should be one.
    pub fn normalization(&self) -> T {
        (0..self.s).fold(T::zero(), |acc, i| acc + self.cut_mass(i))
    }

    /// Smallest density value on a uniform sample of each cut.
    pub fn min_density_sample(&self, samples: usize) -> T {
        let mut worst = T::infinity();
        for p in self.endpoints.chunks(2) {
            for j in 1..samples {
                let x = p[0] + (p[1] - p[0]) * ci::<T>(j as i64) / ci::<T>(samples as i64);
                worst = worst.min(self.density(x));
            }
        }
        worst
    }

    /// `∫ M √|σ|` between endpoints `lo_idx` and `lo_idx + 1`. Over the gap
    /// of a two-cut measure this vanishes at equilibrium.
    pub fn m_sqrt_between(&self, lo_idx: usize) -> T {
        let roots = &self.endpoints;
        let m = &self.m;
        tanh_sinh(
            |x, xa, xb| m.eval(x) * sqrt_abs_sigma_between(roots, x, lo_idx, xa, xb),
            roots[lo_idx],
            roots[lo_idx + 1],
            quad_tol(),
        )
    }

    /// `∫_r^x M√|σ|` for `x` outside the support with `r` the nearest
    /// endpoint and no endpoint in between.
    fn m_sqrt_from_endpoint(&self, r: T, x: T) -> T {
        let roots = &self.endpoints;
        let m = &self.m;
        let (lo, hi) = if x > r { (r, x) } else { (x, r) };
        let v = tanh_sinh(
            |y, ya, yb| {
                let mut prod = T::one();
                for &q in roots.iter() {
                    let dist = if q == lo {
                        ya
                    } else if q == hi {
                        yb
                    } else {
                        (y - q).abs()
                    };
                    prod = prod * dist;
                }
                m.eval(y) * prod.sqrt()
            },
            lo,
            hi,
            quad_tol(),
        );
        if x > r {
            v
        } else {
            -v
        }
    }

    /// `V_eff(x) − V_eff(b_s)` for `x` outside the open support.
    ///
    /// On the real axis `V_eff′ = (−1)^{k/2} M√|σ|` with `k` endpoints to the
    /// right; the effective potential takes the same value at every
    /// endpoint of an equilibrium measure.
    pub fn effective_potential(&self, x: T) -> Result<T, Error> {
        let ep = &self.endpoints;
        let inside = ep.chunks(2).any(|p| x > p[0] && x < p[1]);
        if inside {
            return Err(Error::Domain(format!("x = {x} lies inside the support")));
        }
        let k = self.endpoints_above(x);
        let sign = if (k / 2) % 2 == 0 {
            T::one()
        } else {
            -T::one()
        };
        // Integrate from the nearest endpoint above x, or from b_s.
        let anchor = if k == 0 {
            *ep.last().unwrap()
        } else {
            ep[ep.len() - k]
        };
        if x == anchor {
            return Ok(T::zero());
        }
        Ok(sign * self.m_sqrt_from_endpoint(anchor, x))
    }

    /// `V_eff(b_s)` itself, from `V_eff(x) = V(x) − 2T ln x − 2∫_∞^x (W − T/x)`.
    ///
    /// The integral from infinity is summed from the Laurent series of
    /// `M√σ` beyond `X = 2 max|r| + 1`, and the remaining piece from `b_s` to
    /// `X` is done by quadrature.
    pub fn effective_potential_at_edge(&self) -> T {
        let big = self
            .endpoints
            .iter()
            .fold(T::zero(), |m, &r| m.max(r.abs()));
        let x_far = c::<T>(2.0) * big + T::one();
        let n = tail_terms::<T>();
        // W − T/x = −½ Σ_{k≥2} w_k x^{−k} (the 1/x term is exactly T/x).
        let w = negative_part_times_sqrt(&self.m, &self.endpoints, n);
        let mut tail = T::zero();
        for (idx, &wk) in w.iter().enumerate().skip(1) {
            let k = (idx + 1) as i32;
            tail = tail + wk * x_far.powi(1 - k) / ci::<T>((k - 1) as i64);
        }
        // −2∫_∞^X (W − T/x) = 2∫_X^∞ (W − T/x) = −Σ w_k X^{1−k}/(k−1).
        let veff_far = self.v.eval(x_far) - c::<T>(2.0) * self.t * x_far.ln() - tail;
        let b_s = *self.endpoints.last().unwrap();
        veff_far - self.m_sqrt_from_endpoint(b_s, x_far)
    }

    /// Residual of `W ~ T/x`: the `1/x` coefficient of `−½M√σ` minus `T`.
    pub fn normalization_residual(&self) -> T {
        let w = negative_part_times_sqrt(&self.m, &self.endpoints, 1);
        c::<T>(-0.5) * w[0] - self.t
    }

    /// Serialize to a `key = value` block.
    pub fn to_kv(&self) -> String {
        let mut w = KvWriter::new();
        w.comment("equilibrium measure");
        w.raw("s", self.s)
            .real("T", self.t)
            .reals("endpoints", &self.endpoints)
            .reals("M", self.m.coeffs())
            .reals("V", self.v.coeffs());
        if let Some(tc) = &self.two_cut {
            w.real("x0", tc.x0)
                .real("m", tc.m)
                .real("u_inf_im", tc.u_inf_im);
        }
        w.finish()
    }

    /// Read a block written by [`EqMeasure::to_kv`]; two-cut data are
    /// recomputed from the endpoints.
    pub fn from_kv(text: &str) -> Result<Self, Error> {
        let b = KvBlock::parse(text)?;
        let s = b.integer("s")? as usize;
        let endpoints = b.reals::<T>("endpoints")?;
        if !(s == 1 || s == 2) || endpoints.len() != 2 * s {
            return Err(Error::Parse {
                line: 0,
                msg: "need s ∈ {1,2} and 2s endpoints".into(),
            });
        }
        let mut mu = EqMeasure {
            s,
            endpoints,
            m: Poly::new(b.reals::<T>("M")?),
            t: b.real::<T>("T")?,
            v: Poly::new(b.reals::<T>("V")?),
            two_cut: None,
        };
        if s == 2 {
            mu.two_cut = Some(two_cut_data(&mu.endpoints)?);
        }
        Ok(mu)
    }

    /// The exact one-cut measure of a critical model at `T = T_c`.
    pub fn critical(spec: &CriticalSpec<T>) -> Self {
        EqMeasure {
            s: 1,
            endpoints: vec![c(-2.0), c(2.0)],
            m: spec.m_critical(),
            t: spec.tc,
            v: spec.v.clone(),
            two_cut: None,
        }
    }
}

// ---------------------------------------------------------------------------
// Newton solvers
// ---------------------------------------------------------------------------

fn solve_linear<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[piv][col] == T::zero() || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let fct = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] = a[row][k] - fct * a[col][k];
            }
            b[row] = b[row] - fct * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

fn max_abs<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

fn default_tol<T: Real>() -> T {
    T::eps().powf(c(0.8))
}

/// Solve for a one-cut measure `[a, b]` at temperature `t`.
pub fn solve_one_cut<T: Real>(
    v: &Poly<T>,
    t: T,
    guess: [T; 2],
    opts: SolveOptions<T>,
) -> Result<EqMeasure<T>, Error> {
    if !(t > T::zero()) {
        return Err(Error::Domain("temperature must be positive".into()));
    }
    if !(guess[0] < guess[1]) {
        return Err(Error::Domain("guess must satisfy a < b".into()));
    }
    let vp = v.derivative();
    let tol = opts.tol.unwrap_or_else(default_tol);
    let n_series = vp.degree() + 6;
    let resid_jac = |x: &[T]| -> (Vec<T>, Vec<Vec<T>>) {
        let roots = [x[0], x[1]];
        let s = series_pow_half(&roots, n_series, true);
        let (_, neg) = moments_from_series(&vp, 1, &s, 2);
        let f = vec![neg[0] / t, (neg[1] - c::<T>(2.0) * t) / t];
        let mut jac = vec![vec![T::zero(); 2]; 2];
        for (col, &r) in roots.iter().enumerate() {
            let ds = series_inv_sqrt_deriv(&s, r);
            let (_, dneg) = moments_from_series(&vp, 1, &ds, 2);
            jac[0][col] = dneg[0] / t;
            jac[1][col] = dneg[1] / t;
        }
        (f, jac)
    };
    let mut x = guess.to_vec();
    let (mut fx, mut jac) = resid_jac(&x);
    let mut converged = false;
    for _ in 0..opts.max_iter {
        if max_abs(&fx) < tol {
            converged = true;
            break;
        }
        let step = solve_linear(jac.clone(), fx.iter().map(|&v| -v).collect())
            .ok_or_else(|| Error::Numerical("singular Jacobian in one-cut solve".into()))?;
        let mut lambda = T::one();
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<T> = x
                .iter()
                .zip(&step)
                .map(|(&xi, &si)| xi + lambda * si)
                .collect();
            if trial[0] < trial[1] {
                let (ft, jt) = resid_jac(&trial);
                if max_abs(&ft) < max_abs(&fx) || max_abs(&ft) < tol {
                    x = trial;
                    fx = ft;
                    jac = jt;
                    accepted = true;
                    break;
                }
            }
            lambda = lambda / c(2.0);
        }
        if !accepted {
            break;
        }
    }
    if !converged && max_abs(&fx) >= tol {
        return Err(Error::Numerical(format!(
            "one-cut Newton did not converge (residual {})",
            f(max_abs(&fx))
        )));
    }
    let (m, _) = laurent_moments(&vp, &x, 2);
    let mu = EqMeasure {
        s: 1,
        endpoints: x,
        m,
        t,
        v: v.clone(),
        two_cut: None,
    };
    check_density(&mu)?;
    Ok(mu)
}

fn check_density<T: Real>(mu: &EqMeasure<T>) -> Result<(), Error> {
    let scale = mu
        .endpoints
        .chunks(2)
        .map(|p| p[1] - p[0])
        .fold(T::zero(), |a, b| a.max(b));
    let worst = mu.min_density_sample(256);
    if worst < -T::eps().sqrt() * scale {
        return Err(Error::Domain(format!(
            "negative density {} on the support: this cut count is invalid at T = {}",
            f(worst),
            mu.t
        )));
    }
    Ok(())
}

/// Solve for a two-cut measure `[a, b] ∪ [c, d]` at temperature `t`.
///
/// Newton runs on `(a, b, (c+d)/2, ln((d−c)/2))`, which keeps the small
/// newborn cut well-conditioned and ordered.
pub fn solve_two_cut<T: Real>(
    v: &Poly<T>,
    t: T,
    guess: [T; 4],
    opts: SolveOptions<T>,
) -> Result<EqMeasure<T>, Error> {
    if !(t > T::zero()) {
        return Err(Error::Domain("temperature must be positive".into()));
    }
    if !(guess[0] < guess[1] && guess[1] < guess[2] && guess[2] < guess[3]) {
        return Err(Error::Domain("guess must satisfy a < b < c < d".into()));
    }
    let vp = v.derivative();
    if vp.degree() < 3 {
        return Err(Error::Domain("a two-cut measure needs deg V ≥ 4".into()));
    }
    let tol = opts.tol.unwrap_or_else(default_tol);
    let n_series = vp.degree() + 8;
    let to_roots = |y: &[T]| -> [T; 4] {
        let w = y[3].exp();
        [y[0], y[1], y[2] - w, y[2] + w]
    };
    let gap = |roots: &[T; 4]| -> T {
        let s = series_pow_half(roots, n_series, true);
        let (m, _) = moments_from_series(&vp, 2, &s, 3);
        tanh_sinh(
            |x, xa, xb| m.eval(x) * sqrt_abs_sigma_between(roots, x, 1, xa, xb),
            roots[1],
            roots[2],
            quad_tol(),
        )
    };
    let y0 = [
        guess[0],
        guess[1],
        (guess[2] + guess[3]) / c(2.0),
        ((guess[3] - guess[2]) / c(2.0)).ln(),
    ];
    // Scale of the gap integrand at the initial guess: ∫√|σ| times the
    // larger endpoint value of |M|.
    let gap_scale = {
        let roots = to_roots(&y0);
        let s = series_pow_half(&roots, n_series, true);
        let (m, _) = moments_from_series(&vp, 2, &s, 3);
        let area = tanh_sinh(
            |x, xa, xb| sqrt_abs_sigma_between(&roots, x, 1, xa, xb),
            roots[1],
            roots[2],
            quad_tol(),
        );
        (area * m.eval(roots[1]).abs().max(m.eval(roots[2]).abs())).max(T::min_positive_value())
    };
    let resid = |y: &[T]| -> Vec<T> {
        let roots = to_roots(y);
        let s = series_pow_half(&roots, n_series, true);
        let (_, neg) = moments_from_series(&vp, 2, &s, 3);
        let g = gap(&roots);
        vec![
            neg[0] / t,
            neg[1] / t,
            (neg[2] - c::<T>(2.0) * t) / t,
            g / gap_scale,
        ]
    };
    let jacobian = |y: &[T]| -> Vec<Vec<T>> {
        let roots = to_roots(y);
        let s = series_pow_half(&roots, n_series, true);
        let mut d_root = Vec::with_capacity(4);
        for &r in roots.iter() {
            let ds = series_inv_sqrt_deriv(&s, r);
            let (_, dneg) = moments_from_series(&vp, 2, &ds, 3);
            d_root.push(dneg);
        }
        let w = y[3].exp();
        let mut jac = vec![vec![T::zero(); 4]; 4];
        for row in 0..3 {
            jac[row][0] = d_root[0][row] / t;
            jac[row][1] = d_root[1][row] / t;
            jac[row][2] = (d_root[2][row] + d_root[3][row]) / t;
            jac[row][3] = w * (d_root[3][row] - d_root[2][row]) / t;
        }
        // Gap row by central differences.
        let h_rel = T::eps().powf(c(1.0 / 3.0));
        for col in 0..4 {
            let h = if col == 3 {
                h_rel
            } else {
                h_rel * (T::one() + y[col].abs())
            };
            let mut yp = y.to_vec();
            let mut ym = y.to_vec();
            yp[col] = yp[col] + h;
            ym[col] = ym[col] - h;
            let gp = gap(&to_roots(&yp));
            let gm = gap(&to_roots(&ym));
            jac[3][col] = (gp - gm) / (c::<T>(2.0) * h * gap_scale);
        }
        jac
    };
    let ordered = |y: &[T]| {
        let r = to_roots(y);
        r[0] < r[1] && r[1] < r[2] && r[2] < r[3]
    };
    let mut y = y0.to_vec();
    let mut fy = resid(&y);
    let mut converged = false;
    for _ in 0..opts.max_iter {
        if max_abs(&fy) < tol {
            converged = true;
            break;
        }
        let jac = jacobian(&y);
        let step = solve_linear(jac, fy.iter().map(|&v| -v).collect())
            .ok_or_else(|| Error::Numerical("singular Jacobian in two-cut solve".into()))?;
        let mut lambda = T::one();
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<T> = y.iter().zip(&step).map(|(&a, &s)| a + lambda * s).collect();
            if ordered(&trial) && trial[3] < c(5.0) {
                let ft = resid(&trial);
                if max_abs(&ft) < max_abs(&fy) || max_abs(&ft) < tol {
                    y = trial;
                    fy = ft;
                    accepted = true;
                    break;
                }
            }
            lambda = lambda / c(2.0);
        }
        if !accepted {
            break;
        }
    }
    // The gap row is limited by quadrature and finite differences; accept a
    // stalled iteration if it is within a few orders of the target.
    if !converged && max_abs(&fy) >= tol * c(1e3) {
        let roots = to_roots(&y);
        if roots[2] - roots[1] <= T::eps().sqrt() * (T::one() + roots[1].abs()) {
            return Err(Error::Domain(
                "cuts collided: the measure is one-cut at this temperature".into(),
            ));
        }
        return Err(Error::Numerical(format!(
            "two-cut Newton did not converge (residual {})",
            f(max_abs(&fy))
        )));
    }
    let roots = to_roots(&y).to_vec();
    let (m, _) = laurent_moments(&vp, &roots, 3);
    let two_cut = Some(two_cut_data(&roots)?);
    let mu = EqMeasure {
        s: 2,
        endpoints: roots,
        m,
        t,
        v: v.clone(),
        two_cut,
    };
    check_density(&mu)?;
    Ok(mu)
}

/// `F(arctan y | 1 − m)` written as `y·R_F(1, 1 + m y², 1 + y²)`; this is the
/// imaginary part of `u(x)` for real `x > d` (with `y → √((d−b)/(b−a))` as
/// `x → ∞`).
fn f_imag<T: Real>(y: T, m: T) -> Result<T, Error> {
    let z = |v: T| Complex::new(v, T::zero());
    Ok(y * carlson_rf(z(T::one()), z(T::one() + m * y * y), z(T::one() + y * y))?.re)
}

/// Biratio, complete integrals, `u_∞` and `x₀` from four endpoints.
pub fn two_cut_data<T: Real>(r: &[T]) -> Result<TwoCutData<T>, Error> {
    let (a, b, cc, d) = (r[0], r[1], r[2], r[3]);
    let den = (cc - a) * (d - b);
    let m = (b - a) * (d - cc) / den;
    let m1 = (cc - b) * (d - a) / den;
    let ell = complete_integrals_pair(m, m1)?;
    let y = ((d - b) / (b - a)).sqrt();
    let u_inf_im = f_imag(y, m)?;
    let u_inf = Complex::new(T::zero(), u_inf_im);
    let e_inf = incomplete_e(u_inf, m)?;
    // x₀ = d + i√((c−a)(d−b))·(E(u_∞) − (1 − E′/K′)u_∞).
    let bracket = e_inf - u_inf * (T::one() - ell.eprime / ell.kprime);
    let x0 = d - den.sqrt() * bracket.im;
    Ok(TwoCutData {
        x0,
        m,
        u_inf_im,
        ell,
    })
}

// ---------------------------------------------------------------------------
// Abelian objects
// ---------------------------------------------------------------------------

/// `Ω`, `Λ` and `γ` attached to a measure.
#[derive(Clone, Debug)]
pub struct AbelianObjects<'a, T> {
    mu: &'a EqMeasure<T>,
    /// `γ = lim x/Λ(x)`, from the closed form (Joukowski or θ₁).
    pub gamma: T,
}

/// Build the abelian objects of `mu`.
pub fn abelian_objects<T: Real>(mu: &EqMeasure<T>) -> Result<AbelianObjects<'_, T>, Error> {
    let gamma = match mu.s {
        1 => (mu.endpoints[1] - mu.endpoints[0]) / c(4.0),
        _ => gamma_theta(mu)?,
    };
    Ok(AbelianObjects { mu, gamma })
}

/// `γ = (i/4K)√((d−b)(c−a)) e^{−πu_∞²/(KK′)} θ₁′(0)/θ₁(u_∞/K)`.
fn gamma_theta<T: Real>(mu: &EqMeasure<T>) -> Result<T, Error> {
    let data = mu
        .two_cut
        .as_ref()
        .ok_or_else(|| Error::Domain("two-cut data missing".into()))?;
    let r = &mu.endpoints;
    let (k, kp) = (data.ell.k, data.ell.kprime);
    let ui = data.u_inf_im;
    let tau = data.ell.tau;
    let th = theta1(Complex::new(T::zero(), ui / k), tau)?;
    let th0 = theta1_prime0(tau)?;
    // i/θ₁(i·y) is real: θ₁(iy) = i·Im.
    let pref = ((r[3] - r[1]) * (r[2] - r[0])).sqrt() / (c::<T>(4.0) * k);
    let expo = (T::PI() * ui * ui / (k * kp)).exp();
    Ok(pref * expo * th0 / th.im)
}

impl<T: Real> AbelianObjects<'_, T> {
    /// `Ω(x)` for real `x > b_s`.
    pub fn omega(&self, x: T) -> T {
        let r = &self.mu.endpoints;
        match self.mu.s {
            1 => T::one() / sqrt_abs_sigma(r, x),
            _ => (x - self.mu.two_cut.as_ref().unwrap().x0) / sqrt_abs_sigma(r, x),
        }
    }

    /// `Λ(x)` on the real axis outside the support.
    ///
    /// One cut: the Joukowski root `w ± √(w²−1)` of modulus above one, with
    /// `w = (2x − a − b)/(b − a)`. Two cuts: the θ₁ quotient for `x > d`.
    pub fn lambda(&self, x: T) -> Result<T, Error> {
        let r = &self.mu.endpoints;
        match self.mu.s {
            1 => {
                let w = (c::<T>(2.0) * x - r[0] - r[1]) / (r[1] - r[0]);
                if w.abs() <= T::one() {
                    return Err(Error::Domain(format!("x = {x} is on the cut")));
                }
                let root = (w * w - T::one()).sqrt();
                Ok(if w > T::zero() { w + root } else { w - root })
            }
            _ => self.lambda_two_cut(x),
        }
    }

    fn lambda_two_cut(&self, x: T) -> Result<T, Error> {
        let r = &self.mu.endpoints;
        let data = self.mu.two_cut.as_ref().unwrap();
        if !(x > r[3]) {
            return Err(Error::Domain(
                "two-cut Λ is implemented for real x beyond the last endpoint".into(),
            ));
        }
        let (a, b, d) = (r[0], r[1], r[3]);
        let s = ((d - b) / (b - a) * (x - a) / (x - d)).sqrt();
        let ux = f_imag(s, data.m)?;
        let ui = data.u_inf_im;
        let (k, kp) = (data.ell.k, data.ell.kprime);
        let two_k = c::<T>(2.0) * k;
        let num = theta1(Complex::new(T::zero(), (ux + ui) / two_k), data.ell.tau)?;
        let den = theta1(Complex::new(T::zero(), (ux - ui) / two_k), data.ell.tau)?;
        // π u u_∞/(KK′) with u = i·ux, u_∞ = i·ui.
        let expo = (-T::PI() * ux * ui / (k * kp)).exp();
        Ok(expo * num.im / den.im)
    }

    /// `γ` from the defining limit, `ln γ = ln b_s − ∫_{b_s}^∞ (Ω − 1/x) dx`.
    pub fn gamma_from_limit(&self) -> T {
        let r = &self.mu.endpoints;
        let b_s = *r.last().unwrap();
        let big = r.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
        let x_far = c::<T>(2.0) * big + T::one();
        // Ω − 1/x from the series of Q_Ω/√σ; Q_Ω = 1 or x − x₀.
        let q_omega = match self.mu.s {
            1 => Poly::one(),
            _ => Poly::linear_root(self.mu.two_cut.as_ref().unwrap().x0),
        };
        let n = tail_terms::<T>();
        let series = series_pow_half(r, n + 2, true);
        let s_half = self.mu.s;
        // Q_Ω(x) x^{−s} Σ series_k x^{−k}; coefficient of x^{−j}.
        let coef = |j: i64| {
            let mut acc = T::zero();
            for (i, &qi) in q_omega.coeffs().iter().enumerate() {
                let k = j + i as i64 - s_half as i64;
                if k >= 0 && (k as usize) < series.len() {
                    acc = acc + qi * series[k as usize];
                }
            }
            acc
        };
        let mut tail = T::zero();
        for j in 2..=(n as i64) {
            tail = tail + coef(j) * x_far.powi(1 - j as i32) / ci::<T>(j - 1);
        }
        let near = tanh_sinh(
            |x, xa, _| {
                let mut prod = T::one();
                for &q in r.iter() {
                    prod = prod * if q == b_s { xa } else { (x - q).abs() };
                }
                q_omega.eval(x) / prod.sqrt() - T::one() / x
            },
            b_s,
            x_far,
            quad_tol(),
        );
        (b_s.ln() - near - tail).exp()
    }
}

/// `H(x, ξ)` and `E(x, ξ)` for a one-cut measure, both arguments outside
/// the cut on the real axis.
pub fn prime_form_one_cut<T: Real>(mu: &EqMeasure<T>, x: T, xi: T) -> Result<(T, T), Error> {
    if mu.s != 1 {
        return Err(Error::Domain(
            "prime form implemented for one cut only".into(),
        ));
    }
    let ab = abelian_objects(mu)?;
    let lx = ab.lambda(x)?;
    let lxi = ab.lambda(xi)?;
    // e^{φ(x)} = Λ(x); φ′(x) = Ω(x) with the branch sign of √σ.
    let dphi = T::one() / (lx - T::one() / lx) * c::<T>(4.0) / (mu.endpoints[1] - mu.endpoints[0]);
    let h = dphi / (lx * lxi - T::one());
    let e = T::one() - T::one() / (lx * lxi);
    Ok((h, e))
}

/// Temperature derivatives of the free energy.
#[derive(Clone, Copy, Debug)]
pub struct ThermoDerivatives<T> {
    /// `∂F/∂T = V_eff(b_s)`.
    pub df_dt: T,
    /// `∂²F/∂T² = −2 ln γ`.
    pub d2f_dt2: T,
    /// `∂𝒯/∂T` for the first moment 𝒯.
    pub dtrace_dt: T,
}

pub fn thermo_derivatives<T: Real>(mu: &EqMeasure<T>) -> Result<ThermoDerivatives<T>, Error> {
    let ab = abelian_objects(mu)?;
    let r = &mu.endpoints;
    let dtrace_dt = match mu.s {
        1 => (r[0] + r[1]) / c(2.0),
        _ => (r[0] + r[1] + r[2] + r[3]) / c(2.0) - mu.two_cut.as_ref().unwrap().x0,
    };
    Ok(ThermoDerivatives {
        df_dt: mu.effective_potential_at_edge(),
        d2f_dt2: c::<T>(-2.0) * ab.gamma.ln(),
        dtrace_dt,
    })
}

/// `∂𝒯/∂r = γ/Λ(ξ)` for a logarithmic insertion at `ξ` (one cut).
pub fn dtrace_dr_one_cut<T: Real>(mu: &EqMeasure<T>, xi: T) -> Result<T, Error> {
    let ab = abelian_objects(mu)?;
    Ok(ab.gamma / ab.lambda(xi)?)
}

/// Large-n recurrence coefficients predicted by the measure.
#[derive(Clone, Copy, Debug)]
pub enum ClassicalRecurrence<T> {
    /// One cut: `γ_n → (b−a)/4`, `β_n → (a+b)/2`.
    Limits { gamma: T, beta: T },
    /// Two cuts: `γ_n` and `β_n` oscillate inside these ranges.
    Bounds {
        gamma_lo: T,
        gamma_hi: T,
        beta_lo: T,
        beta_hi: T,
    },
}

pub fn classical_gamma_beta<T: Real>(mu: &EqMeasure<T>) -> ClassicalRecurrence<T> {
    let r = &mu.endpoints;
    match mu.s {
        1 => ClassicalRecurrence::Limits {
            gamma: (r[1] - r[0]) / c(4.0),
            beta: (r[0] + r[1]) / c(2.0),
        },
        _ => {
            let (a, b, cc, d) = (r[0], r[1], r[2], r[3]);
            ClassicalRecurrence::Bounds {
                gamma_lo: (d - a - cc + b) / c(4.0),
                gamma_hi: (d - a + cc - b) / c(4.0),
                beta_lo: (d + a - cc + b) / c(2.0),
                beta_hi: (d + a + cc - b) / c(2.0),
            }
        }
    }
}
