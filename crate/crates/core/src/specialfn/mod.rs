//! Special functions: Jacobi elliptic functions and integrals with the odd
//! theta function, plus Stirling-type sums.

mod carlson;
mod elliptic;
mod stirling;
mod theta;

pub use carlson::{carlson_rd, carlson_rf};
pub use elliptic::{
    complete_integrals, complete_integrals_pair, incomplete_e, sn_cn_dn, sn_cn_dn_pair,
    sn_cn_dn_real, EllipticParams,
};
pub use stirling::{
    ln_factorial, ln_hn, ln_hn_asymptotic, ln_zeta_asymptotic, ln_zeta_gaussian, ln_zeta_leading,
};
pub use theta::{theta1, theta1_prime0};
