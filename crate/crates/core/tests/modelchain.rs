use birthcut::modelchain::{a_constant, ModelChain, K_MAX_LIMIT};
use birthcut::orthopoly::GridSpec;
use birthcut::potentials::CriticalSpec;
use birthcut::quadrature::GaussLegendre;
use birthcut::scalar::f;
use birthcut::specialfn::ln_factorial;
use birthcut::Hp;
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::OnceLock;

fn gaussian() -> &'static ModelChain<f64> {
    static CHAIN: OnceLock<ModelChain<f64>> = OnceLock::new();
    CHAIN.get_or_init(|| ModelChain::build(1, 50, GridSpec::default()).unwrap())
}

fn quartic() -> &'static ModelChain<f64> {
    static CHAIN: OnceLock<ModelChain<f64>> = OnceLock::new();
    CHAIN.get_or_init(|| ModelChain::build(2, 40, GridSpec::default()).unwrap())
}

#[test]
fn gaussian_chain_is_hermite() {
    let mc = gaussian();
    for k in 1..=50 {
        let g2 = mc.gamma[k] * mc.gamma[k];
        assert!((g2 - k as f64).abs() < 1e-10 * k as f64, "k = {k}: γ² = {g2}");
    }
    // h_j = √(2π)·j!, so ln ζ_k = (k/2) ln 2π + Σ_{j<k} ln j!.
    let mut acc = 0.0;
    for k in 0..=50usize {
        let want = 0.5 * k as f64 * (2.0 * PI).ln() + acc;
        let got = mc.ln_zeta[k];
        assert!((got - want).abs() < 1e-10 * want.abs().max(1.0), "k = {k}");
        acc += ln_factorial::<f64>(k as u64);
    }
}

#[test]
fn second_hermite_wavefunction() {
    let mc = gaussian();
    let h2 = 2.0 * (2.0 * PI).sqrt();
    for y in [-2.5f64, -0.3, 0.0, 1.1, 3.7] {
        let want = (y * y - 1.0) * (-y * y / 4.0).exp() / h2.sqrt();
        assert!((mc.psi_model(2, y) - want).abs() < 1e-13);
    }
    assert_eq!(mc.psi_model(-1, 0.4), 0.0);
    assert!(mc.psihat_model(-1, 0.4).is_err());
}

fn gram(mc: &ModelChain<f64>, kmax: usize) -> f64 {
    let ch = mc.chain();
    let rule = GaussLegendre::<f64>::new(40);
    let (xs, ws) = rule.composite_grid(ch.lo, ch.hi, 200);
    let mut g = vec![vec![0.0; kmax + 1]; kmax + 1];
    for (&x, &w) in xs.iter().zip(&ws) {
        let p = mc.psi_all(kmax, x);
        for j in 0..=kmax {
            for k in 0..=kmax {
                g[j][k] += w * p[j] * p[k];
            }
        }
    }
    let mut worst: f64 = 0.0;
    for (j, row) in g.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            worst = worst.max((v - if j == k { 1.0 } else { 0.0 }).abs());
        }
    }
    worst
}

#[test]
fn wavefunctions_are_orthonormal() {
    assert!(gram(gaussian(), 30) < 1e-12);
    assert!(gram(quartic(), 30) < 1e-12);
}

#[test]
fn even_weight_has_no_diagonal_coefficients() {
    for mc in [gaussian(), quartic()] {
        for b in &mc.rec_beta {
            assert!(b.abs() < 1e-12);
        }
    }
}

#[test]
fn quartic_chain_obeys_freud_equation() {
    // For e^{−y⁴/4}: γ_k²(γ_{k−1}² + γ_k² + γ_{k+1}²) = k.
    let mc = quartic();
    let g2: Vec<f64> = mc.gamma.iter().map(|g| g * g).collect();
    for k in 1..40 {
        let lhs = g2[k] * (g2[k - 1] + g2[k] + g2[k + 1]);
        assert!((lhs - k as f64).abs() < 1e-10 * k as f64, "k = {k}: {lhs}");
    }
}

#[test]
fn higher_freud_equation_for_sextic() {
    // For e^{−y⁶/6} the string equation reads k = ⟨p_k, y⁵ p_{k−1}⟩·γ_k,
    // i.e. the (k, k−1) entry of J⁵ times γ_k. Build J and compare.
    let mc = ModelChain::<f64>::build(3, 30, GridSpec::default()).unwrap();
    let n = 31;
    let mut j = vec![vec![0.0; n]; n];
    for k in 1..n {
        j[k][k - 1] = mc.gamma[k];
        j[k - 1][k] = mc.gamma[k];
    }
    let mul = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| {
        let mut c = vec![vec![0.0; n]; n];
        for i in 0..n {
            for l in 0..n {
                if a[i][l] != 0.0 {
                    for m in 0..n {
                        c[i][m] += a[i][l] * b[l][m];
                    }
                }
            }
        }
        c
    };
    let j2 = mul(&j, &j);
    let j4 = mul(&j2, &j2);
    let j5 = mul(&j4, &j);
    // Truncation only touches entries within distance 5 of the corner.
    for k in 1..n - 5 {
        let lhs = mc.gamma[k] * j5[k][k - 1];
        assert!((lhs - k as f64).abs() < 1e-9 * k as f64, "k = {k}: {lhs}");
    }
}

#[test]
fn psihat_obeys_recurrence_and_matches_direct_quadrature() {
    let mc = quartic();
    for y in [-1.7, -0.2, 0.45, 1.3, 4.0, 5.0] {
        let v = mc.psihat_all(12, y);
        for k in 1..12 {
            let res = y * v[k] - mc.gamma[k + 1] * v[k + 1] - mc.gamma[k] * v[k - 1];
            let size = (y * v[k]).abs() + (mc.gamma[k] * v[k - 1]).abs();
            assert!(res.abs() < 1e-10 * size.max(1.0), "y = {y}, k = {k}: {res}");
        }
        for k in [0, 3, 8, 12] {
            let direct = mc.chain().phi_direct(k, y);
            let rel = (v[k] - direct).abs() / direct.abs().max(1.0);
            assert!(rel < 1e-7, "y = {y}, k = {k}: {} vs {direct}", v[k]);
            assert_eq!(mc.psihat_model(k as i64, y).unwrap(), v[k]);
        }
    }
}

#[test]
fn kernel_closed_form_matches_sum() {
    let mc = quartic();
    for (y, y2) in [(0.3, -1.2), (1.5, 1.5), (-2.0, 0.7), (0.0, 1e-12)] {
        for k in [1, 4, 15] {
            let cd = mc.kernel_model(k, y, y2);
            let direct = mc.chain().kernel_direct(k, y, y2);
            assert!((cd - direct).abs() < 1e-10, "k = {k}, ({y}, {y2})");
            assert!((cd - mc.kernel_model(k, y2, y)).abs() < 1e-12);
        }
    }
    assert_eq!(mc.kernel_model(0, 0.1, 0.2), 0.0);
}

#[test]
fn kernel_diagonal_integrates_to_k() {
    let mc = quartic();
    let ch = mc.chain();
    let rule = GaussLegendre::<f64>::new(40);
    for k in [1usize, 5, 20] {
        let tot = rule.composite(|y| mc.kernel_model(k, y, y), ch.lo, ch.hi, 100);
        assert!((tot - k as f64).abs() < 1e-10, "k = {k}: {tot}");
    }
}

#[test]
fn node_doubling_leaves_coefficients_unchanged() {
    let g1 = GridSpec::default();
    let g2 = GridSpec {
        nodes: 2 * g1.nodes,
        ..g1
    };
    for nu in [1, 2] {
        let a = ModelChain::<f64>::build(nu, 30, g1).unwrap();
        let b = ModelChain::<f64>::build(nu, 30, g2).unwrap();
        for k in 1..=30 {
            assert!((a.gamma[k] - b.gamma[k]).abs() < 1e-12 * b.gamma[k]);
            assert!((a.ln_zeta[k] - b.ln_zeta[k]).abs() < 1e-12 * b.ln_zeta[k].abs().max(1.0));
        }
    }
}

#[test]
fn extended_precision_gaussian() {
    let mc = ModelChain::<Hp>::build(1, 20, GridSpec::default()).unwrap();
    for k in 1..=20 {
        let g2 = f(mc.gamma[k] * mc.gamma[k]);
        assert!((g2 - k as f64).abs() < 1e-25 * k as f64, "k = {k}");
    }
}

#[test]
fn amplitudes_follow_the_a_identity() {
    let spec = CriticalSpec::<f64>::quartic(1.0).unwrap();
    let a = a_constant(&spec);
    let sh = spec.sinh_phi();
    let want = 4.0 * sh * sh * (2.0 * sh * spec.q_at_e() / spec.tc).sqrt();
    assert!((a - want).abs() < 1e-13 * want);
    let mc = gaussian().clone();
    assert!(mc.ln_amp(3).is_none());
    let mc = mc.with_a_const(a);
    for k in 0..=20i64 {
        let kk = k as f64;
        let want = mc.ln_zeta[k as usize] - kk * kk * a.ln() - kk * (2.0 * PI).ln();
        assert!((mc.ln_amp(k).unwrap() - want).abs() < 1e-12 * want.abs().max(1.0));
    }
    assert!(mc.ln_amp(-1).is_none());
    assert_eq!(mc.ln_amp(0), Some(0.0));
}

#[test]
fn build_rejects_bad_arguments() {
    assert!(ModelChain::<f64>::build(0, 5, GridSpec::default()).is_err());
    assert!(ModelChain::<f64>::build(1, K_MAX_LIMIT + 1, GridSpec::default()).is_err());
}

#[test]
fn table_has_one_row_per_order() {
    let mc = ModelChain::<f64>::build(2, 6, GridSpec::default()).unwrap();
    let t = mc.to_table();
    assert_eq!(t.lines().filter(|l| !l.starts_with('#')).count(), 7);
    assert!(t.starts_with("# nu = 2"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn wavefunctions_are_even_or_odd(y in -4.0f64..4.0, k in 0usize..25) {
        let mc = quartic();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let (a, b) = (mc.psi_model(k as i64, y), mc.psi_model(k as i64, -y));
        prop_assert!((a - sign * b).abs() < 1e-12);
    }

    #[test]
    fn kernel_is_symmetric_and_positive_on_diagonal(y in -3.0f64..3.0, y2 in -3.0f64..3.0, k in 1usize..30) {
        let mc = quartic();
        let kd = mc.kernel_model(k, y, y);
        prop_assert!(kd > 0.0);
        let off = mc.kernel_model(k, y, y2);
        // Cauchy–Schwarz on the projection kernel.
        prop_assert!(off * off <= kd * mc.kernel_model(k, y2, y2) * (1.0 + 1e-9) + 1e-24);
    }
}

#[test]
fn zeta_asymptotics_against_the_exact_chain() {
    use birthcut::specialfn::{ln_zeta_asymptotic, ln_zeta_leading};
    for nu in 1..=3u32 {
        let mc = ModelChain::<f64>::build(nu, 60, GridSpec::default()).unwrap();
        // The corrected form is off by O(ln k) only.
        for k in [20u64, 40, 60] {
            let r = (mc.ln_zeta[k as usize] - ln_zeta_leading::<f64>(k, nu)) / k as f64;
            assert!(r.abs() < 2.5 * (k as f64).ln() / k as f64, "nu = {nu}, k = {k}: {r}");
        }
        // The commonly quoted form drifts: its residual per k keeps falling.
        let drift = |k: u64| (mc.ln_zeta[k as usize] - ln_zeta_asymptotic::<f64>(k, nu)) / k as f64;
        assert!(drift(40) < drift(20) - 0.3, "nu = {nu}");
    }
}
