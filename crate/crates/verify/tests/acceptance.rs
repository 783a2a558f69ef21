//! Acceptance run for criteria A1 to A10.
//!
//! Prints one PASS/FAIL line per criterion with indented sub-checks and
//! notes, then a tally. The process exits non-zero when any criterion fails.
//! Several criteria test large-N claims at desk-scale N and are expected to
//! fail; the notes print the measured numbers so the failure can be judged.

use birthcut::asymptotics::{
    beta_deviation, gamma_deviation, make_regime, MeanField, RegimePoint, ScalingMap, GUARD_BAND,
};
use birthcut::critical::{
    c_constant, g_at_two_zeta_ratio_exact, g_ode_holds_exact, g_poly, newborn_scaling,
    solve_near_critical, transition_curvature, zeta,
};
use birthcut::equilibrium::thermo_derivatives;
use birthcut::modelchain::{a_constant, ModelChain};
use birthcut::oracle::{build_rec_chain, default_grid, sample_at_u, RecChain, RegimeSample};
use birthcut::orthopoly::GridSpec;
use birthcut::potentials::{build_critical_q, quartic_etilde, CriticalSpec};
use birthcut::quadrature::GaussLegendre;
use birthcut::scalar::{c, f};
use birthcut::specialfn::{
    complete_integrals, ln_factorial, ln_zeta_asymptotic, ln_zeta_leading, sn_cn_dn,
    sn_cn_dn_real,
};
use birthcut::{Complex, Error, Hp, Poly, Real};
use birthcut_verify::{summary, Criterion};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, One, Zero};
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::time::Duration;

type R<T> = Result<T, Error>;

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn hp(s: &str) -> Hp {
    Hp::parse_decimal(s).expect("decimal literal")
}

fn run(id: &'static str, title: &'static str, budget: Option<Duration>, body: impl FnOnce(&mut Criterion) -> R<()>) -> Criterion {
    let mut cr = Criterion::new(id, title);
    if let Err(e) = body(&mut cr) {
        cr.fail_with(e);
    }
    cr.finish(budget);
    print!("{}", cr.render());
    cr
}

// ---------------------------------------------------------------- A1

fn a1(cr: &mut Criterion) -> R<()> {
    let rule = GaussLegendre::<f64>::new(40);
    let mut worst_rel: f64 = 0.0;
    let mut worst_int: f64 = 0.0;
    for phi in [0.5, 1.0, 1.5] {
        let e = 2.0 * f64::cosh(phi);
        let closed = quartic_etilde(phi)?;
        let (_, built) = build_critical_q(1, e, &Poly::one())?;
        worst_rel = worst_rel.max((closed - built).abs() / closed.abs());
        // x = 2 cosh s turns the square root into 2 sinh s.
        let s_end = (e / 2.0).acosh();
        let val = rule.composite(
            |s| {
                let x = 2.0 * s.cosh();
                let sh = s.sinh();
                (x - e) * (x - closed) * 4.0 * sh * sh
            },
            0.0,
            s_end,
            32,
        );
        worst_int = worst_int.max(val.abs() / (e - 2.0).powi(3));
    }
    cr.check("closed-form ẽ vs built Q", worst_rel < 1e-10, format!("max rel diff {worst_rel:.2e} (tol 1e-10)"));
    cr.check(
        "equal-height integral",
        worst_int < 1e-10,
        format!("max |∫|/(e−2)³ = {worst_int:.2e} (tol 1e-10)"),
    );
    Ok(())
}

// ---------------------------------------------------------------- A2

fn a2(cr: &mut Criterion) -> R<()> {
    let mut ode_ok = true;
    let mut ratio_ok = true;
    for nu in 1..=6u32 {
        for (num, den) in [(1i64, 3i64), (7, 5), (2, 1), (13, 17)] {
            let z2 = BigRational::new(BigInt::from(num), BigInt::from(den));
            ode_ok &= g_ode_holds_exact(nu, &z2);
        }
        let (lhs, rhs) = g_at_two_zeta_ratio_exact(nu);
        ratio_ok &= lhs == rhs;
    }
    cr.check("G ODE coefficient-wise, ν = 1..6", ode_ok, "exact rational arithmetic");
    cr.check("G(2ζ)/ζ^{2ν−2} exact, ν = 1..6", ratio_ok, "exact integers");

    let mut worst_c: f64 = 0.0;
    let mut worst_f: f64 = 0.0;
    for nu in 1..=6u32 {
        for phi in [0.5, 1.0, 1.5] {
            let spec = CriticalSpec::<f64>::minimal(nu, phi)?;
            let z = zeta(&spec);
            let g = g_poly(nu, z);
            let cc = c_constant(&spec);
            worst_c = worst_c.max(((4.0 * z * z * g.eval(2.0 * z) - cc) / cc).abs());
            let n = nu as u64;
            let want = 0.5
                * (ln_factorial::<f64>(2 * n) - ln_factorial::<f64>(n - 1) - ln_factorial::<f64>(n)).exp();
            let got = g.eval(2.0 * z) / z.powi(2 * nu as i32 - 2);
            worst_f = worst_f.max(((got - want) / want).abs());
        }
    }
    cr.check("4ζ²G(2ζ) = C", worst_c < 1e-12, format!("max rel {worst_c:.2e} (tol 1e-12)"));
    cr.check("G(2ζ)/ζ^{2ν−2} in floating point", worst_f < 1e-12, format!("max rel {worst_f:.2e} (tol 1e-12)"));
    Ok(())
}

// ---------------------------------------------------------------- A3

fn a3(cr: &mut Criterion) -> R<()> {
    // Legendre's relation, log-spaced m.
    let mut worst: f64 = 0.0;
    for i in 0..=48 {
        let m = if i == 48 { 0.99 } else { 10f64.powf(-8.0 + i as f64 * 8.0 / 48.0) };
        let m = m.min(0.99);
        let p = complete_integrals(m)?;
        worst = worst.max((p.legendre() - FRAC_PI_2).abs());
    }
    cr.check("Legendre relation, m ∈ [1e−8, 0.99]", worst < 1e-12, format!("max |EK′+E′K−KK′−π/2| = {worst:.2e}"));

    // Small-m expansions, evaluated in extended precision so that the
    // remainder is not hidden under double rounding.
    let (mut rk, mut re, mut rep, mut rep_fixed, mut rkp, mut rkp_fixed) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut ok_ke = true;
    let mut ok_ep = true;
    for m_s in ["1e-3", "1e-4", "1e-5", "1e-6"] {
        let m = hp(m_s);
        let mf = f(m);
        let p = complete_integrals(m)?;
        let half_pi = Hp::FRAC_PI_2();
        let one = Hp::one();
        let k_ser = half_pi * (one + m / c(4.0) + c::<Hp>(9.0) * m * m / c(64.0));
        let e_ser = half_pi * (one - m / c(4.0) - c::<Hp>(3.0) * m * m / c(64.0));
        let l_pub = (one / m.sqrt()).ln();
        let ep_pub = one - m / c(2.0) * l_pub;
        let kp_pub = l_pub * (one + m / c(4.0) + c::<Hp>(9.0) * m * m / c(64.0));
        let l4 = (c::<Hp>(4.0) / m.sqrt()).ln();
        let ep_fixed = one + m / c(2.0) * (l4 - c(0.5));
        let kp_fixed = l4 + m / c(4.0) * (l4 - one);
        let dk = f((p.k - k_ser).abs());
        let de = f((p.e - e_ser).abs());
        let dep = f((p.eprime - ep_pub).abs());
        ok_ke &= dk < 5.0 * mf.powi(3) && de < 5.0 * mf.powi(3);
        ok_ep &= dep < 5.0 * mf * mf;
        rk = rk.max(dk / mf.powi(3));
        re = re.max(de / mf.powi(3));
        rep = rep.max(dep / (mf * mf));
        rep_fixed = rep_fixed.max(f((p.eprime - ep_fixed).abs()) / (mf * mf * f(l4)));
        rkp = rkp.max(f((p.kprime - kp_pub).abs()));
        rkp_fixed = rkp_fixed.max(f((p.kprime - kp_fixed).abs()) / (mf * mf * f(l4)));
    }
    cr.check("K, E small-m series, remainder < 5m³", ok_ke, format!("max |ΔK|/m³ = {rk:.3}, |ΔE|/m³ = {re:.3}"));
    cr.check(
        "E′ ≈ 1 − (m/2)ln(1/√m), remainder < 5m²",
        ok_ep,
        format!("max |ΔE′|/m² = {rep:.3e}"),
    );
    cr.note(format!(
        "E′ as stated is off at order m ln m. The expansion that holds is\n\
         E′ = 1 + (m/2)(ln(4/√m) − 1/2) + O(m² ln m); its max remainder/(m² ln(4/√m)) = {rep_fixed:.3}.\n\
         K′ ≈ ln(1/√m)(…) likewise misses ln 4: max |ΔK′| = {rkp:.3} (not part of the criterion);\n\
         with ln(4/√m) + (m/4)(ln(4/√m) − 1) the remainder/(m² ln) is {rkp_fixed:.3}."
    ));

    // Pythagorean identities in extended precision, real and complex u.
    let mut worst_p: f64 = 0.0;
    for m_s in ["1e-8", "0.1", "0.5", "0.9", "0.99"] {
        let m = hp(m_s);
        let m1 = Hp::one() - m;
        for u_s in ["-0.8", "0.3", "1.1", "2.7"] {
            let (s, cn, dn) = sn_cn_dn_real(hp(u_s), m, m1);
            worst_p = worst_p.max(f((s * s + cn * cn - Hp::one()).abs()));
            worst_p = worst_p.max(f((dn * dn + m * s * s - Hp::one()).abs()));
        }
        for (re_s, im_s) in [("0.4", "0.3"), ("-1.2", "0.15")] {
            let u = Complex::new(hp(re_s), hp(im_s));
            let (s, cn, dn) = sn_cn_dn(u, m)?;
            let one = Complex::new(Hp::one(), Hp::zero());
            let e1 = s * s + cn * cn - one;
            let e2 = dn * dn + s * s * m - one;
            let size = f(s.norm()).max(1.0).powi(2);
            worst_p = worst_p.max(f(e1.norm()) / size).max(f(e2.norm()) / size);
        }
    }
    cr.check("sn²+cn² = 1, dn²+m sn² = 1", worst_p < 1e-25, format!("max residual {worst_p:.2e} (tol 1e-25)"));
    Ok(())
}

// ---------------------------------------------------------------- A4

fn a4(cr: &mut Criterion) -> R<()> {
    let g = ModelChain::<f64>::build(1, 50, GridSpec::default())?;
    let mut wg: f64 = 0.0;
    let mut wz: f64 = 0.0;
    let mut acc = 0.0;
    for k in 0..=50usize {
        if k > 0 {
            wg = wg.max((g.gamma[k] * g.gamma[k] - k as f64).abs() / k as f64);
        }
        let want = 0.5 * k as f64 * (2.0 * PI).ln() + acc;
        wz = wz.max((g.ln_zeta[k] - want).abs() / want.abs().max(1.0));
        acc += ln_factorial::<f64>(k as u64);
    }
    cr.check("ν=1: γ_k² = k, k ≤ 50", wg < 1e-10, format!("max rel {wg:.2e}"));
    cr.check("ν=1: ln ζ_k closed form, k ≤ 50", wz < 1e-10, format!("max rel {wz:.2e}"));

    let q = ModelChain::<Hp>::build(2, 30, GridSpec::default())?;
    let ch = q.chain();
    let rule = GaussLegendre::<Hp>::new(40);
    let (xs, ws) = rule.composite_grid(ch.lo, ch.hi, 200);
    let kmax = 30;
    let mut gram = vec![vec![Hp::zero(); kmax + 1]; kmax + 1];
    for (&x, &w) in xs.iter().zip(&ws) {
        let p = q.psi_all(kmax, x);
        for j in 0..=kmax {
            let wj = w * p[j];
            for k in j..=kmax {
                gram[j][k] = gram[j][k] + wj * p[k];
            }
        }
    }
    let mut defect: f64 = 0.0;
    for (j, row) in gram.iter().enumerate() {
        for (k, v) in row.iter().enumerate().skip(j) {
            let id = if j == k { Hp::one() } else { Hp::zero() };
            defect = defect.max(f((*v - id).abs()));
        }
    }
    cr.check("ν=2 orthonormality, k ≤ 30, extended precision", defect < 1e-20, format!("max |G − I| = {defect:.2e} (tol 1e-20)"));

    // "Bounded" residual/k: the doubling increments |r(2k) − r(k)| over
    // k = 10 → 20 → 40 must shrink, and the last one must be below 0.25.
    let mut bounded = true;
    let mut lines = String::new();
    for nu in 1..=3u32 {
        let mc = ModelChain::<f64>::build(nu, 40, GridSpec::default())?;
        let r_pub = |k: u64| (mc.ln_zeta[k as usize] - ln_zeta_asymptotic::<f64>(k, nu)) / k as f64;
        let r_fix = |k: u64| (mc.ln_zeta[k as usize] - ln_zeta_leading::<f64>(k, nu)) / k as f64;
        let (a, b, cc) = (r_pub(10), r_pub(20), r_pub(40));
        let d1 = (b - a).abs();
        let d2 = (cc - b).abs();
        let ok = d2 < d1 && d2 < 0.25;
        bounded &= ok;
        let (fa, fb, fc) = (r_fix(10), r_fix(20), r_fix(40));
        writeln!(
            lines,
            "ν={nu}: stated form r(10,20,40) = {a:.3}, {b:.3}, {cc:.3}; corrected form = {fa:.3}, {fb:.3}, {fc:.3}"
        )
        .unwrap();
    }
    cr.check(
        "stated ln ζ asymptotic: residual/k bounded on [10, 40]",
        bounded,
        "doubling increments must shrink and end below 0.25",
    );
    cr.note(format!(
        "{lines}The stated form lacks −(k²/2ν) ln C(2ν−1, ν) and carries a spurious (k/ν) ln k;\n\
         the corrected form (which also carries k ln 2π) leaves a residual/k that decays like ln k/k."
    ));
    Ok(())
}

// ---------------------------------------------------------------- A5, A6

struct Row {
    u: f64,
    n: usize,
    n_big: f64,
    away: bool,
    g_or: f64,
    g_red: f64,
    b_or: f64,
    b_red: f64,
    g_full: f64,
    b_full: f64,
    dev_g: f64,
    dev_b: f64,
}

/// Build the oracle at `N₀` and `u`, with the regime point it realizes.
fn oracle_at(spec: &CriticalSpec<Hp>, n0: f64, u: f64) -> R<(RegimeSample<Hp>, RecChain<Hp>, RegimePoint<Hp>)> {
    let s = sample_at_u(c::<Hp>(n0), c::<Hp>(u), spec.nu, spec.phi_e)?;
    let ch = build_rec_chain(&spec.v, s.n_big, spec.tc, s.n + 1, default_grid())?;
    let rp = make_regime(spec, s.n_big, s.p);
    Ok((s, ch, rp))
}

fn away_from_bands(u: f64) -> bool {
    let d = (2.0 * u - (2.0 * u).round()).abs() / 2.0;
    d >= GUARD_BAND
}

fn scan(spec: &CriticalSpec<Hp>, mf: &MeanField<Hp>, n0: f64) -> R<Vec<Row>> {
    let mut rows = Vec::new();
    for i in 1..=29 {
        let u = i as f64 / 10.0;
        let (s, ch, rp) = oracle_at(spec, n0, u)?;
        let (go, bo) = (ch.gamma[s.n], ch.beta[s.n]);
        let (gr, br) = (mf.gamma_reduced(&rp), mf.beta_reduced(&rp));
        rows.push(Row {
            u: f(rp.u),
            n: s.n,
            n_big: f(s.n_big),
            away: away_from_bands(f(rp.u)),
            g_or: f(go),
            g_red: f(gr),
            b_or: f(bo),
            b_red: f(br),
            g_full: f(mf.gamma_full(&rp)),
            b_full: f(mf.beta_full(&rp)),
            dev_g: f(gamma_deviation(s.n_big, go, gr)),
            dev_b: f(beta_deviation(s.n_big, bo, br)),
        });
    }
    Ok(rows)
}

fn mean_field_chain(spec: &CriticalSpec<Hp>) -> R<ModelChain<Hp>> {
    Ok(ModelChain::<Hp>::build(spec.nu, 24, GridSpec::default())?.with_a_const(a_constant(spec)))
}

fn scan_table(n0: f64, rows: &[Row]) -> String {
    let mut s = format!(
        "scan at N₀ = {n0}:\n   u     n   N_eff     γ_oracle   γ_reduced  dev_γ    γ_full      β_oracle    β_reduced   dev_β    β_full\n"
    );
    for r in rows {
        writeln!(
            s,
            "{}{:4.1} {:4} {:8.3}  {:10.6} {:10.6} {:7.3}  {:9.6}   {:10.6}  {:10.6} {:7.3}  {:9.6}",
            if r.away { ' ' } else { '*' },
            r.u,
            r.n,
            r.n_big,
            r.g_or,
            r.g_red,
            r.dev_g,
            r.g_full,
            r.b_or,
            r.b_red,
            r.dev_b,
            r.b_full
        )
        .unwrap();
    }
    s.push_str("(* = inside a guard band, excluded from the deviation maxima)");
    s
}

fn local_minima(rows: &[Row]) -> Vec<f64> {
    (1..rows.len() - 1)
        .filter(|&i| rows[i].g_or < rows[i - 1].g_or && rows[i].g_or < rows[i + 1].g_or)
        .map(|i| rows[i].u)
        .collect()
}

fn value_at(rows: &[Row], u: f64) -> f64 {
    rows.iter()
        .min_by(|a, b| (a.u - u).abs().total_cmp(&(b.u - u).abs()))
        .map(|r| r.g_or - 1.0)
        .unwrap_or(f64::NAN)
}

fn a5(cr: &mut Criterion, mf: &MeanField<Hp>, scans: &[(f64, Vec<Row>)]) {
    let mut dev_max = Vec::new();
    for (n0, rows) in scans {
        let mins = local_minima(rows);
        let near_int = |u: f64| (u - u.round()).abs() <= 0.15 && u.round() >= 1.0;
        let all_near = !mins.is_empty() && mins.iter().all(|&u| near_int(u));
        let each_int = [1.0, 2.0].iter().all(|&k| mins.iter().any(|&u| (u - k).abs() <= 0.15));
        cr.check(
            format!("N₀={n0}: local minima of γ within ±0.15 of integer u"),
            all_near && each_int,
            format!("minima at u = {mins:?}"),
        );
        let half: Vec<f64> = [0.5, 1.5, 2.5].iter().map(|&u| value_at(rows, u)).collect();
        let int: Vec<f64> = [1.0, 2.0].iter().map(|&u| value_at(rows, u)).collect();
        let mh = half.iter().sum::<f64>() / half.len() as f64;
        let mi = int.iter().sum::<f64>() / int.len() as f64;
        cr.check(
            format!("N₀={n0}: amplitude γ−1 at half-integer ≥ 3× at integer"),
            mh >= 3.0 * mi,
            format!("half-integer {half:.4?}, integer {int:.4?}, ratio of means {:.2}", mh / mi),
        );
        let dm = rows.iter().filter(|r| r.away).map(|r| r.dev_g).fold(0.0, f64::max);
        let at = rows.iter().filter(|r| r.away).max_by(|a, b| a.dev_g.total_cmp(&b.dev_g)).map(|r| r.u).unwrap_or(f64::NAN);
        dev_max.push((*n0, dm, at));
    }
    if let [(n1, d1, u1), (n2, d2, u2)] = dev_max[..] {
        cr.check(
            "max γ deviation decreases from N₀=40 to 80",
            d2 < d1,
            format!("N₀={n1}: {d1:.3} (u={u1}), N₀={n2}: {d2:.3} (u={u2})"),
        );
        cr.check("max γ deviation < 0.25 at N₀=80", d2 < 0.25, format!("{d2:.3}"));
    }
    let mut why = String::from(
        "Dominant sector switches k → k+1 at u = k + 1/2 + ν ln(A_k/A_{k+1})/ln N, not at k + 1/2.\n",
    );
    for (n0, rows) in scans {
        let sw: Vec<String> = (0..3).map(|k| format!("{:.2}", sector_switch(mf, k, *n0))).collect();
        let far = rows.iter().map(|r| (r.g_or - r.g_full).abs()).fold(0.0, f64::max);
        let far_b = rows.iter().map(|r| (r.b_or - r.b_full).abs()).fold(0.0, f64::max);
        writeln!(
            why,
            "N₀={n0}: switches at u = [{}]; max |γ_oracle − γ_full| = {far:.3}, max |β_oracle − β_full| = {far_b:.3}",
            sw.join(", ")
        )
        .unwrap();
    }
    let sw_big: Vec<String> = (0..3).map(|k| format!("{:.2}", sector_switch(mf, k, 1e8))).collect();
    write!(
        why,
        "At N = 1e8 the switches are still at [{}]; the shift decays only like 1/ln N.\n\
         The full A-weighted sum puts its γ extrema where the oracle has them, so the\n\
         saw-tooth is present but displaced. The reduced formula expands in\n\
         N^{{(2|u−ū|−1)/2ν}} A_{{ū±1}}/A_ū, which exceeds 1 across most of the scan at N ≤ 80;\n\
         hence the blow-up of γ_reduced and the large deviations.",
        sw_big.join(", ")
    )
    .unwrap();
    cr.note(why);
    for (n0, rows) in scans {
        cr.note(scan_table(*n0, rows));
    }
}

/// `u` where sectors `k` and `k+1` carry equal weight at this `N`.
fn sector_switch(mf: &MeanField<Hp>, k: usize, n_big: f64) -> f64 {
    let nu = mf.spec.nu as f64;
    let la = &mf.chain.ln_a;
    k as f64 + 0.5 + nu * f(la[k] - la[k + 1]) / n_big.ln()
}

fn a6(cr: &mut Criterion, scans: &[(f64, Vec<Row>)]) {
    let mut dev_max = Vec::new();
    for (n0, rows) in scans {
        let valid: Vec<&Row> = rows.iter().filter(|r| r.away).collect();
        let sign_bad: Vec<f64> = valid
            .iter()
            .filter(|r| r.b_red != 0.0 && r.b_or.signum() != r.b_red.signum())
            .map(|r| r.u)
            .collect();
        cr.check(format!("N₀={n0}: sign of β matches"), sign_bad.is_empty(), format!("mismatches at u = {sign_bad:?}"));
        let off: Vec<(f64, f64)> = valid
            .iter()
            .map(|r| (r.u, r.b_or / r.b_red))
            .filter(|(_, q)| !(*q >= 0.1 && *q <= 10.0))
            .collect();
        let (lo, hi) = valid
            .iter()
            .map(|r| r.b_or / r.b_red)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), q| (a.min(q), b.max(q)));
        cr.check(
            format!("N₀={n0}: β_oracle/β_reduced within one decade"),
            off.is_empty(),
            format!("ratio range [{lo:.3}, {hi:.3}]; outside at {off:.3?}"),
        );
        let dm = valid.iter().map(|r| r.dev_b).fold(0.0, f64::max);
        dev_max.push((*n0, dm));
    }
    if let [(n1, d1), (n2, d2)] = dev_max[..] {
        cr.check("max β deviation decreases from N₀=40 to 80", d2 < d1, format!("N₀={n1}: {d1:.3}, N₀={n2}: {d2:.3}"));
    }
}

// ---------------------------------------------------------------- A7

fn a7(cr: &mut Criterion) -> R<()> {
    let spec = CriticalSpec::<f64>::quartic(1.0)?;
    let mut worst: f64 = 0.0;
    let mut detail = String::new();
    for rel in [1e-5, 1e-4, 1e-3] {
        let t = -rel * spec.tc;
        let mu = solve_near_critical(&spec, t)?;
        let solver = thermo_derivatives(&mu)?.d2f_dt2;
        let law = transition_curvature(&spec, t)?;
        let e = ((solver - law) / law).abs();
        worst = worst.max(e);
        write!(detail, "t/Tc=−{rel:.0e}: {e:.3}; ").unwrap();
    }
    cr.check("t<0 slope within 10%", worst < 0.1, detail);

    let target = 4.0 * spec.nu as f64 * spec.phi_e * spec.phi_e;
    let (mut num, mut den) = (0.0, 0.0);
    let mut pts = String::new();
    // Same magnitudes as the t < 0 branch.
    for rel in [1e-3, 1e-4, 1e-5] {
        let t = rel * spec.tc;
        let mu = solve_near_critical(&spec, t)?;
        let d2 = thermo_derivatives(&mu)?.d2f_dt2;
        let inv = 1.0 / rel.ln();
        num += d2 * inv;
        den += inv * inv;
        write!(pts, "{rel:.0e}: {:.3}  ", d2 / inv).unwrap();
    }
    let a = num / den;
    cr.check(
        "t>0 fit −2 ln γ = a/ln(t/Tc), a within 15% of 4νφ²",
        ((a - target) / target).abs() < 0.15,
        format!("a = {a:.3} vs {target:.3}"),
    );
    // Far below the tested range, in extended precision, for the record.
    let hspec = CriticalSpec::<Hp>::quartic(Hp::one())?;
    let mut deep = String::new();
    for e in [8, 16, 30] {
        let rel = hp(&format!("1e-{e}"));
        let mu = solve_near_critical(&hspec, rel * hspec.tc)?;
        let d2 = f(thermo_derivatives(&mu)?.d2f_dt2);
        let l = f(rel).ln();
        let a = d2 * l;
        let kappa = (1.0 - a / target) * l.abs() / l.abs().ln();
        write!(deep, "1e-{e}: {a:.3} (κ = {kappa:.3})  ").unwrap();
    }
    cr.note(format!(
        "pointwise a(t) = (−2 ln γ)·ln(t/Tc): {pts}\n\
         deeper: {deep}\n\
         a(t) does approach 4νφ², with 4νφ² − a ≈ 4νφ²·κ·ln|L|/|L|, L = ln(t/Tc).\n\
         Getting within 15% needs t/Tc of order 1e−13."
    ));
    Ok(())
}

// ---------------------------------------------------------------- A8, A10

const N0: f64 = 80.0;

fn count_at(spec: &CriticalSpec<Hp>, ch: &RecChain<Hp>, n: usize) -> Hp {
    ch.expected_count_exact(n, spec.e_tilde, ch.ortho().hi, 200)
}

fn a8(cr: &mut Criterion, spec: &CriticalSpec<Hp>, mf: &MeanField<Hp>) -> R<f64> {
    let mut at13 = f64::NAN;
    let mut occ = String::new();
    for u in [0.8, 1.3, 1.8] {
        let (s, ch, rp) = oracle_at(spec, N0, u)?;
        let n = f(count_at(spec, &ch, s.n));
        write!(occ, "u={u}: {:.3}  ", mean_sector(mf, &rp)?).unwrap();
        if u == 1.3 {
            at13 = n;
        }
        cr.check(
            format!("u={u}: count over (ẽ, ∞) vs ū={}", rp.ubar),
            (n - rp.ubar as f64).abs() <= 0.5,
            format!("n = {}, N = {:.3}, count = {n:.4}", s.n, f(s.n_big)),
        );
    }
    cr.note(format!(
        "A-weighted mean sector k̄ = Σ k w_k/Σ w_k, w_k = N^{{(2ku−k²)/2ν}} A_k: {occ}\n\
         The oracle count sits within 10% of k̄ at all three u. k̄ only locks onto ū once the\n\
         sector switches (see A5) are far from u, which needs much larger N."
    ));
    Ok(at13)
}

fn mean_sector(mf: &MeanField<Hp>, rp: &RegimePoint<Hp>) -> R<f64> {
    let z = mf.sum_z(rp, None)?;
    let top = z.ln_terms.iter().map(|t| f(t.1)).fold(f64::NEG_INFINITY, f64::max);
    let (mut num, mut den) = (0.0, 0.0);
    for (k, l) in &z.ln_terms {
        let w = (f(*l) - top).exp();
        num += *k as f64 * w;
        den += w;
    }
    Ok(num / den)
}

fn a10(cr: &mut Criterion, spec: &CriticalSpec<Hp>, mf: &MeanField<Hp>, count_a8: f64) -> R<()> {
    let (s, ch, rp) = oracle_at(spec, N0, 1.3)?;
    let map = ScalingMap::new(spec, s.n_big);
    let ys = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let (mut diff, mut size, mut worst_point) = (0.0f64, 0.0f64, (0.0, 0.0, 0.0));
    for &y in &ys {
        for &y2 in &ys {
            let (x, x2) = (map.to_x(c::<Hp>(y)), map.to_x(c::<Hp>(y2)));
            let kf = f(mf.kernel_full(&rp, x, x2));
            let kr = f(mf.kernel_reduced(&rp, x, x2));
            size = size.max(kf.abs());
            if (kf - kr).abs() > diff {
                diff = (kf - kr).abs();
                worst_point = (y, y2, kf);
            }
        }
    }
    let rel = diff / size;
    cr.check(
        "full vs reduced kernel on the 5×5 grid",
        rel < 0.2,
        format!("sup|K_full − K_red|/sup|K_full| = {rel:.3} (worst at y={}, y′={}, K_full={:.4})", worst_point.0, worst_point.1, worst_point.2),
    );
    cr.note(format!(
        "The full sum differs from the reduced kernel by the next sector, whose weight is\n\
         N^{{−(1−2|u−ū|)/2ν}} = {:.3} at N = 80, u = 1.3; the 0.2 target needs larger N.",
        f(s.n_big).powf(-(1.0 - 2.0 * (f(rp.u) - rp.ubar as f64).abs()) / 2.0)
    ));

    let rule = GaussLegendre::<Hp>::new(32);
    let integral = f(rule.composite(|x| ch.kernel_exact(s.n, x, x), spec.e_tilde, ch.ortho().hi, 200));
    cr.check(
        "∫ K_n(x,x) over (ẽ, ∞) matches the A8 count",
        (integral - count_a8).abs() <= 0.5,
        format!("{integral:.4} vs {count_a8:.4} (ū = {})", rp.ubar),
    );
    Ok(())
}

// ---------------------------------------------------------------- A9

fn a9(cr: &mut Criterion) -> R<()> {
    let spec = CriticalSpec::<f64>::quartic(1.0)?;
    let mut prev = f64::INFINITY;
    for rel in [1e-3, 1e-4] {
        let t = rel * spec.tc;
        let mu = solve_near_critical(&spec, t)?;
        let nb = newborn_scaling(&spec, t)?;
        let half = (mu.endpoints[3] - mu.endpoints[2]) / 2.0;
        let pred = (nb.d - nb.c) / 2.0;
        let err = (half / pred - 1.0).abs();
        cr.check(
            format!("t/Tc={rel:.0e}: (d−c)/2 within 25%"),
            err < 0.25 && err < prev,
            format!("{half:.5} vs {pred:.5}, ratio {:.3}", half / pred),
        );
        prev = err;
    }
    Ok(())
}

fn main() {
    let mut all = Vec::new();
    all.push(run("A1", "quartic consistency", secs(1), a1));
    all.push(run("A2", "exact polynomial identities", secs(1), a2));
    all.push(run("A3", "special functions", secs(5), a3));
    all.push(run("A4", "model chain ground truth", secs(60), a4));

    let spec = CriticalSpec::<Hp>::quartic(Hp::one()).expect("quartic spec");
    let mc = mean_field_chain(&spec).expect("model chain");
    let mf = MeanField::new(&spec, &mc).expect("mean field");

    // A5 and A6 share the scan and its runtime budget.
    let mut scans = Vec::new();
    let mut a5c = Criterion::new("A5", "saw-tooth in γ");
    let mut a6c = Criterion::new("A6", "saw-tooth in β");
    for n0 in [40.0, 80.0] {
        match scan(&spec, &mf, n0) {
            Ok(rows) => scans.push((n0, rows)),
            Err(e) => {
                a5c.fail_with(&e);
                a6c.fail_with(&e);
            }
        }
    }
    if scans.len() == 2 {
        a5(&mut a5c, &mf, &scans);
        a6(&mut a6c, &scans);
    }
    a5c.finish(secs(30 * 60));
    a6c.elapsed = a5c.elapsed;
    print!("{}", a5c.render());
    print!("{}", a6c.render());
    all.push(a5c);
    all.push(a6c);

    all.push(run("A7", "transition order", secs(120), a7));

    let mut count = f64::NAN;
    all.push(run("A8", "expected count near e", secs(600), |cr| {
        count = a8(cr, &spec, &mf)?;
        Ok(())
    }));
    all.push(run("A9", "newborn endpoints", secs(120), a9));
    all.push(run("A10", "kernel reduction", secs(600), |cr| a10(cr, &spec, &mf, count)));

    println!("{}", summary(&all));
    if all.iter().any(|c| !c.passed()) {
        std::process::exit(1);
    }
}
