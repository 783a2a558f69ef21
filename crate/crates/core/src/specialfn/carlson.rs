use num_complex::Complex;

use crate::scalar::{c, Real};
use crate::Error;

fn cabs<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}

/// Carlson's symmetric integral `R_F(x, y, z)` by duplication, valid for
/// complex arguments off the closed negative real axis.
pub fn carlson_rf<T: Real>(
    x: Complex<T>,
    y: Complex<T>,
    z: Complex<T>,
) -> Result<Complex<T>, Error> {
    let (mut x, mut y, mut z) = (x, y, z);
    let three = c::<T>(3.0);
    let quarter = c::<T>(0.25);
    // Series truncation after the fifth-order term: error ~ r^6 for r = tol^(1/6).
    let tol = T::eps().powf(c(1.0 / 6.0)) * c(0.5);
    for _ in 0..200 {
        let mu = (x + y + z) / three;
        let dx = (mu - x) / mu;
        let dy = (mu - y) / mu;
        let dz = (mu - z) / mu;
        let r = cabs(dx).max(cabs(dy)).max(cabs(dz));
        if r < tol {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            let series = Complex::new(T::one(), T::zero()) - e2 / c::<T>(10.0)
                + e3 / c::<T>(14.0)
                + e2 * e2 / c::<T>(24.0)
                - e2 * e3 * c::<T>(3.0 / 44.0);
            return Ok(series / mu.sqrt());
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * sy + sx * sz + sy * sz;
        x = (x + lambda) * quarter;
        y = (y + lambda) * quarter;
        z = (z + lambda) * quarter;
    }
    Err(Error::Numerical("R_F duplication did not converge".into()))
}

/// Carlson's `R_D(x, y, z) = R_J(x, y, z, z)` by duplication.
pub fn carlson_rd<T: Real>(
    x: Complex<T>,
    y: Complex<T>,
    z: Complex<T>,
) -> Result<Complex<T>, Error> {
    let (mut x, mut y, mut z) = (x, y, z);
    let quarter = c::<T>(0.25);
    let tol = T::eps().powf(c(1.0 / 6.0)) * c(0.3);
    let mut sum = Complex::new(T::zero(), T::zero());
    let mut fac = T::one();
    for _ in 0..200 {
        let mu = (x + y + z * c::<T>(3.0)) / c::<T>(5.0);
        let dx = (mu - x) / mu;
        let dy = (mu - y) / mu;
        let dz = (mu - z) / mu;
        let r = cabs(dx).max(cabs(dy)).max(cabs(dz));
        if r < tol {
            let ea = dx * dy;
            let eb = dz * dz;
            let ec = ea - eb;
            let ed = ea - eb * c::<T>(6.0);
            let ee = ed + ec + ec;
            let one = Complex::new(T::one(), T::zero());
            let series =
                one + ed
                    * (ed * c::<T>(9.0 / 88.0) - dz * c::<T>(9.0 / 52.0) * ee - c::<T>(3.0 / 14.0))
                    + dz * (ee * c::<T>(1.0 / 6.0)
                        + dz * (ec * c::<T>(-9.0 / 22.0) + dz * ea * c::<T>(3.0 / 26.0)));
            return Ok(sum * c::<T>(3.0) + series * fac / (mu * mu.sqrt()));
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * sy + sx * sz + sy * sz;
        sum = sum + Complex::new(fac, T::zero()) / (sz * (z + lambda));
        fac = fac * quarter;
        x = (x + lambda) * quarter;
        y = (y + lambda) * quarter;
        z = (z + lambda) * quarter;
    }
    Err(Error::Numerical("R_D duplication did not converge".into()))
}
