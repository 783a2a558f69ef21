//! Gauss–Legendre (single and composite) and tanh-sinh quadrature in the
//! working precision.

use crate::scalar::{c, ci, Real};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// `n`-point rule, nodes found by Newton iteration on the Legendre
    /// recurrence carried out in `T`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let m = n.div_ceil(2);
        let tol = T::eps() * c(16.0);
        for i in 0..m {
            let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut x: T = c(guess);
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let dx = p / d;
                x = x - dx;
                if dx.abs() <= tol {
                    let (_, d) = legendre_and_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = c::<T>(2.0) / ((T::one() - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_a^b f` with a single application of the rule.
    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F, a: T, b: T) -> T {
        let half = (b - a) / c(2.0);
        let mid = (a + b) / c(2.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + w * f(mid + half * x))
            * half
    }

    /// Composite rule with `panels` equal panels.
    pub fn composite<F: FnMut(T) -> T>(&self, mut f: F, a: T, b: T, panels: usize) -> T {
        let h = (b - a) / ci(panels as i64);
        (0..panels).fold(T::zero(), |acc, k| {
            let lo = a + h * ci(k as i64);
            acc + self.integrate(&mut f, lo, lo + h)
        })
    }

    /// Nodes and weights of the composite rule, flattened.
    pub fn composite_grid(&self, a: T, b: T, panels: usize) -> (Vec<T>, Vec<T>) {
        let h = (b - a) / ci(panels as i64);
        let half = h / c(2.0);
        let mut xs = Vec::with_capacity(panels * self.len());
        let mut ws = Vec::with_capacity(panels * self.len());
        for k in 0..panels {
            let mid = a + h * ci(k as i64) + half;
            for (&x, &w) in self.nodes.iter().zip(&self.weights) {
                xs.push(mid + half * x);
                ws.push(half * w);
            }
        }
        (xs, ws)
    }

    /// Composite integration, doubling the panel count until the relative
    /// change drops below `rel_tol`. Returns `None` if `max_panels` is hit first.
    pub fn doubling<F: FnMut(T) -> T>(
        &self,
        f: F,
        a: T,
        b: T,
        rel_tol: T,
        max_panels: usize,
    ) -> Option<T> {
        self.doubling_scaled(f, a, b, rel_tol, T::zero(), max_panels)
    }

    /// Like [`Self::doubling`], but convergence is judged against
    /// `max(|I|, scale)`. Needed for integrals that cancel to zero.
    pub fn doubling_scaled<F: FnMut(T) -> T>(
        &self,
        mut f: F,
        a: T,
        b: T,
        rel_tol: T,
        scale: T,
        max_panels: usize,
    ) -> Option<T> {
        let mut panels = 1;
        let mut prev = self.composite(&mut f, a, b, panels);
        while panels < max_panels {
            panels *= 2;
            let cur = self.composite(&mut f, a, b, panels);
            let scale = cur.abs().max(scale).max(T::min_positive_value());
            if (cur - prev).abs() <= rel_tol * scale {
                return Some(cur);
            }
            prev = cur;
        }
        None
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_and_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kk = ci::<T>(k as i64);
        let p2 = ((kk + kk - T::one()) * x * p1 - (kk - T::one()) * p0) / kk;
        p0 = p1;
        p1 = p2;
    }
    let nn = ci::<T>(n as i64);
    let d = nn * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Tanh-sinh quadrature on `[a, b]`.
///
/// The integrand receives `(x, x − a, b − x)` with both distances computed
/// without cancellation, which lets it evaluate factors like `√(x − a)`
/// accurately right up to the endpoints. Step halving stops once two levels
/// agree to `rel_tol` (relative to the sum of absolute contributions, so an
/// integral that cancels to zero still terminates).
pub fn tanh_sinh<T: Real, F: FnMut(T, T, T) -> T>(mut f: F, a: T, b: T, rel_tol: T) -> T {
    let half = (b - a) / c(2.0);
    let pi_2 = T::FRAC_PI_2();
    let tmax = t_max::<T>();

    let mut eval = |t: T| -> (T, T) {
        let s = pi_2 * t.sinh();
        let cosh_s = s.cosh();
        // Distance from the nearer endpoint: half·(1 − tanh|s|) = half·2/(1+e^{2|s|}).
        let e2 = (c::<T>(2.0) * s.abs()).exp();
        let near = half * c::<T>(2.0) / (T::one() + e2);
        let w = half * pi_2 * t.cosh() / (cosh_s * cosh_s);
        let far = half * c::<T>(2.0) - near;
        let (xa, xb) = if s < T::zero() {
            (near, far)
        } else {
            (far, near)
        };
        if near <= T::zero() || w == T::zero() {
            return (T::zero(), T::zero());
        }
        let x = if s < T::zero() { a + xa } else { b - xb };
        let v = f(x, xa, xb) * w;
        (v, v.abs())
    };

    let mut h = T::one();
    let (mut sum, mut abs_sum) = eval(T::zero());
    let mut k = 1;
    loop {
        let t = h * ci(k);
        if t > tmax {
            break;
        }
        let (v1, a1) = eval(t);
        let (v2, a2) = eval(-t);
        sum = sum + v1 + v2;
        abs_sum = abs_sum + a1 + a2;
        k += 1;
    }
    let mut estimate = sum * h;
    for _level in 0..12 {
        h = h / c(2.0);
        let mut k = 1;
        loop {
            let t = h * ci(k);
            if t > tmax {
                break;
            }
            let (v1, a1) = eval(t);
            let (v2, a2) = eval(-t);
            sum = sum + v1 + v2;
            abs_sum = abs_sum + a1 + a2;
            k += 2;
        }
        let next = sum * h;
        let scale = (abs_sum * h).max(T::min_positive_value());
        let converged = (next - estimate).abs() <= rel_tol * scale;
        estimate = next;
        if converged && _level >= 2 {
            break;
        }
    }
    estimate
}

/// Truncation point in the tanh-sinh variable.
///
/// Chosen so that the abscissae get within `eps³` of the endpoints, which
/// keeps the neglected tail of an inverse-square-root singularity below
/// the working precision.
fn t_max<T: Real>() -> T {
    let s_max = 1.5 * T::digits() as f64 * std::f64::consts::LN_10;
    c((s_max / std::f64::consts::FRAC_PI_2).asinh())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let g = GaussLegendre::<f64>::new(8);
        let v = g.integrate(|x| x.powi(15) + x.powi(14), -1.0, 1.0);
        assert!((v - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        // ∫_0^1 1/√x = 2
        let v = tanh_sinh(|_, xa: f64, _| 1.0 / xa.sqrt(), 0.0, 1.0, 1e-13);
        assert!((v - 2.0).abs() < 1e-11, "{v}");
    }
}
