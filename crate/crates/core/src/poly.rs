//! Dense univariate polynomials.
//!
//! The ring operations only need `Num + Clone`, so the same type serves the
//! floating-point potentials and the exact rational checks on `G(ξ)`.
//! Root isolation (Sturm sequences) needs a [`Real`] scalar.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{FromPrimitive, Num};

use crate::scalar::{c, Real};

/// A polynomial stored by ascending powers.
///
/// Trailing zero coefficients are stripped, so `coeffs().last()` is the
/// leading coefficient and the zero polynomial has no coefficients at all.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Num + Clone> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|v| v.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(v: T) -> Self {
        Poly::new(vec![v])
    }

    pub fn one() -> Self {
        Poly::constant(T::one())
    }

    /// `v·x^k`.
    pub fn monomial(v: T, k: usize) -> Self {
        let mut coeffs = vec![T::zero(); k + 1];
        coeffs[k] = v;
        Poly::new(coeffs)
    }

    /// The monic linear factor `x − r`.
    pub fn linear_root(r: T) -> Self {
        Poly::new(vec![T::zero() - r, T::one()])
    }

    /// `∏ (x − r_i)`.
    pub fn from_roots(roots: &[T]) -> Self {
        roots
            .iter()
            .fold(Poly::one(), |acc, r| &acc * &Poly::linear_root(r.clone()))
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Coefficient of `x^i`, zero beyond the degree.
    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the convention that constants (including zero) have degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> T {
        self.coeffs.last().cloned().unwrap_or_else(T::zero)
    }

    pub fn eval(&self, x: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, a| acc * x.clone() + a.clone())
    }

    pub fn scale(&self, s: T) -> Self {
        Poly::new(self.coeffs.iter().map(|a| a.clone() * s.clone()).collect())
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Poly::one(), |acc, _| &acc * self)
    }

    /// Euclidean division: `self = q·d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Poly<T>) -> (Poly<T>, Poly<T>) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        if self.coeffs.len() < d.coeffs.len() {
            return (Poly::zero(), self.clone());
        }
        let dl = d.leading();
        let nd = d.coeffs.len();
        let mut r = self.coeffs.clone();
        let mut q = vec![T::zero(); r.len() - nd + 1];
        for k in (0..q.len()).rev() {
            let f = r[k + nd - 1].clone() / dl.clone();
            for (j, dj) in d.coeffs.iter().enumerate() {
                r[k + j] = r[k + j].clone() - f.clone() * dj.clone();
            }
            q[k] = f;
        }
        r.truncate(nd - 1);
        (Poly::new(q), Poly::new(r))
    }
}

impl<T: Num + Clone + FromPrimitive> Poly<T> {
    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| a.clone() * T::from_usize(i).expect("small index"))
                .collect(),
        )
    }

    /// The antiderivative vanishing at the origin.
    pub fn antiderivative(&self) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(T::zero());
        for (i, a) in self.coeffs.iter().enumerate() {
            out.push(a.clone() / T::from_usize(i + 1).expect("small index"));
        }
        Poly::new(out)
    }
}

impl<T: Real> Poly<T> {
    /// Strip trailing coefficients that are negligible next to the largest one.
    pub fn cleaned(&self, rel_tol: T) -> Self {
        let scale = self.max_abs_coeff();
        let mut v = self.coeffs.clone();
        while v.last().is_some_and(|a| a.abs() <= rel_tol * scale) {
            v.pop();
        }
        Poly::new(v)
    }

    pub fn max_abs_coeff(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, a| m.max(a.abs()))
    }

    /// Sturm sequence `p, p′, −rem(p, p′), …` with numerically negligible
    /// remainders treated as zero.
    pub fn sturm_sequence(&self) -> Vec<Poly<T>> {
        let tol = T::eps() * c(1e4);
        let mut seq = vec![self.clone()];
        let d = self.derivative().cleaned(tol);
        if d.is_zero() {
            return seq;
        }
        seq.push(d);
        loop {
            let n = seq.len();
            let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
            let scale = seq[n - 2].max_abs_coeff();
            let mut v = r.coeffs.clone();
            while v.last().is_some_and(|a| a.abs() <= tol * scale) {
                v.pop();
            }
            if v.is_empty() {
                break;
            }
            seq.push(-Poly::new(v));
        }
        seq
    }

    fn sign_changes(seq: &[Poly<T>], x: T) -> usize {
        let mut count = 0;
        let mut last: Option<bool> = None;
        for p in seq {
            let v = p.eval(x);
            if v == T::zero() {
                continue;
            }
            let pos = v > T::zero();
            if last.is_some_and(|l| l != pos) {
                count += 1;
            }
            last = Some(pos);
        }
        count
    }

    /// Number of distinct real roots in the half-open interval `(lo, hi]`.
    pub fn count_real_roots(&self, lo: T, hi: T) -> usize {
        let seq = self.sturm_sequence();
        Self::sign_changes(&seq, lo).saturating_sub(Self::sign_changes(&seq, hi))
    }

    /// All distinct real roots in `(lo, hi]`, isolated by Sturm counts and
    /// refined by bisection on the counts (so multiple roots are found too).
    pub fn real_roots_in(&self, lo: T, hi: T) -> Vec<T> {
        let seq = self.sturm_sequence();
        let count =
            |a: T, b: T| Self::sign_changes(&seq, a).saturating_sub(Self::sign_changes(&seq, b));
        let two = c::<T>(2.0);
        let mut out = Vec::new();
        let mut stack = vec![(lo, hi, count(lo, hi))];
        while let Some((a, b, n)) = stack.pop() {
            if n == 0 {
                continue;
            }
            let width_tol = T::eps() * c::<T>(8.0) * (a.abs() + b.abs() + T::one());
            if n == 1 || b - a <= width_tol {
                if n == 1 {
                    let (mut a, mut b) = (a, b);
                    for _ in 0..400 {
                        if b - a <= width_tol {
                            break;
                        }
                        let m = (a + b) / two;
                        if count(a, m) == 1 {
                            b = m;
                        } else {
                            a = m;
                        }
                    }
                    out.push((a + b) / two);
                } else {
                    out.push((a + b) / two);
                }
                continue;
            }
            let m = (a + b) / two;
            stack.push((m, b, count(m, b)));
            stack.push((a, m, count(a, m)));
        }
        out.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
        out
    }

    /// Convert the coefficients to another real type.
    pub fn cast<S: Real>(&self) -> Poly<S> {
        Poly::new(
            self.coeffs
                .iter()
                .map(|&a| crate::scalar::convert(a))
                .collect(),
        )
    }
}

impl<T: Num + Clone> Add for &Poly<T> {
    type Output = Poly<T>;
    fn add(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<T: Num + Clone> Sub for &Poly<T> {
    type Output = Poly<T>;
    fn sub(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<T: Num + Clone> Mul for &Poly<T> {
    type Output = Poly<T>;
    fn mul(self, rhs: &Poly<T>) -> Poly<T> {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }
}

impl<T: Num + Clone> Add for Poly<T> {
    type Output = Poly<T>;
    fn add(self, rhs: Poly<T>) -> Poly<T> {
        &self + &rhs
    }
}

impl<T: Num + Clone> Sub for Poly<T> {
    type Output = Poly<T>;
    fn sub(self, rhs: Poly<T>) -> Poly<T> {
        &self - &rhs
    }
}

impl<T: Num + Clone> Mul for Poly<T> {
    type Output = Poly<T>;
    fn mul(self, rhs: Poly<T>) -> Poly<T> {
        &self * &rhs
    }
}

impl<T: Num + Clone> Neg for Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        Poly::new(self.coeffs.into_iter().map(|a| T::zero() - a).collect())
    }
}

impl<T: fmt::Display + Num + Clone> fmt::Display for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, a) in self.coeffs.iter().enumerate().rev() {
            if a.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{a}")?,
                1 => write!(f, "({a})x")?,
                _ => write!(f, "({a})x^{i}")?,
            }
        }
        Ok(())
    }
}
