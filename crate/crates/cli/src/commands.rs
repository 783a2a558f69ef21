//! Subcommand implementations.

use std::fmt::Write as _;
use std::thread;

use birthcut::asymptotics::{
    beta_deviation, gamma_deviation, make_regime, regime_at_u, MeanField, ScalingMap,
};
use birthcut::critical::{c_constant, g_poly, solve_near_critical, transition_curvature, zeta};
use birthcut::equilibrium::{classical_gamma_beta, thermo_derivatives, ClassicalRecurrence};
use birthcut::modelchain::{a_constant, ModelChain};
use birthcut::oracle::{build_rec_chain, default_grid, default_n_max, sample_at_u, RecChain};
use birthcut::orthopoly::GridSpec;
use birthcut::potentials::{validate_critical, CriticalSpec};
use birthcut::scalar::c;
use birthcut::{Error, Hp, Real};

use crate::grid::{parse_list_or_range, parse_range};
use crate::{Cli, Command, Common, HP_BITS};

type W = Hp;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(fm, "{m}"),
            CliError::Numerical(m) => write!(fm, "numerical failure: {m}"),
        }
    }
}

fn numerical(e: Error) -> CliError {
    match e {
        Error::Parse { .. } | Error::Domain(_) => CliError::Usage(e.to_string()),
        Error::Numerical(_) => CliError::Numerical(e.to_string()),
    }
}

/// Default `t/T_c` values on both sides of the transition.
const DEFAULT_T: [f64; 10] = [
    -1e-3, -3e-4, -1e-4, -3e-5, -1e-5, 1e-5, 3e-5, 1e-4, 3e-4, 1e-3,
];

pub fn run(cli: &Cli) -> Result<u8, CliError> {
    let common = &cli.common;
    if common.bits < 128 {
        return Err(CliError::Usage(format!(
            "--bits must be at least 128 (got {})",
            common.bits
        )));
    }
    if common.bits > HP_BITS {
        eprintln!(
            "warning: --bits {} requested; the extended type carries about {HP_BITS} bits",
            common.bits
        );
    }
    let spec = load_spec(common)?;
    let mut out = String::new();
    let mut failed = false;
    let code = match &cli.command {
        Command::Validate => {
            let report = validate_critical(&spec);
            write!(out, "{report}").unwrap();
            if report.all_passed() {
                0
            } else {
                1
            }
        }
        Command::Equilibrium => {
            failed = cmd_equilibrium(&spec, &t_values(common)?, &mut out);
            0
        }
        Command::Critical => {
            cmd_critical(&spec, &mut out);
            0
        }
        Command::Chain { model, k_max } => {
            if *model {
                let ch = ModelChain::<W>::build(spec.nu, *k_max, GridSpec::default())
                    .map_err(numerical)?
                    .with_a_const(a_constant(&spec));
                out.push_str(&ch.to_table());
            } else {
                for &n in &n_values(common)? {
                    let n_big = c::<W>(n);
                    let ch =
                        build_rec_chain(&spec.v, n_big, spec.tc, default_n_max(n), default_grid())
                            .map_err(numerical)?;
                    out.push_str(&ch.to_table());
                }
            }
            0
        }
        Command::ScanU => {
            let us = u_values(common, "0.1:3:0.1")?;
            failed = cmd_scan_u(&spec, &n_values(common)?, &us, &mut out)?;
            0
        }
        Command::Psi { y_grid } => {
            let ys = parse_range(y_grid).map_err(CliError::Usage)?;
            let n = n_values(common)?[0];
            let u = u_values(common, "1.3:1.3:1")?[0];
            cmd_psi(&spec, n, u, &ys, &mut out)?;
            0
        }
        Command::Transition => {
            failed = cmd_transition(&spec, &t_values(common)?, &mut out);
            0
        }
        Command::Compare => {
            let n = common.n_list.first().copied().unwrap_or(1e6);
            if !(n >= 3.0) {
                return Err(CliError::Usage("N must be at least 3".into()));
            }
            let us = u_values(common, "3:6:1")?;
            cmd_compare(&spec, n, &us, &mut out)?;
            0
        }
    };
    emit(common, &out)?;
    if failed {
        return Err(CliError::Numerical(
            "some rows could not be computed (marked `error` in the output)".into(),
        ));
    }
    Ok(code)
}

fn load_spec(common: &Common) -> Result<CriticalSpec<W>, CliError> {
    match &common.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            CriticalSpec::<W>::from_kv(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
        }
        None => {
            if common.nu == 0 {
                return Err(CliError::Usage("--nu must be at least 1".into()));
            }
            if !(common.phi_e > 0.0) {
                return Err(CliError::Usage("--phi-e must be positive".into()));
            }
            CriticalSpec::<W>::minimal(common.nu, c(common.phi_e)).map_err(numerical)
        }
    }
}

fn n_values(common: &Common) -> Result<Vec<f64>, CliError> {
    if common.n_list.is_empty() {
        return Err(CliError::Usage("this subcommand needs --N".into()));
    }
    if let Some(bad) = common.n_list.iter().find(|&&n| !(n >= 3.0)) {
        return Err(CliError::Usage(format!("N must be at least 3 (got {bad})")));
    }
    Ok(common.n_list.clone())
}

fn u_values(common: &Common, default: &str) -> Result<Vec<f64>, CliError> {
    parse_range(common.u_grid.as_deref().unwrap_or(default)).map_err(CliError::Usage)
}

fn t_values(common: &Common) -> Result<Vec<f64>, CliError> {
    match &common.t_grid {
        Some(text) => {
            let v = parse_list_or_range(text).map_err(CliError::Usage)?;
            if v.iter().any(|&t| t == 0.0) {
                return Err(CliError::Usage("t = 0 is not allowed in --t-grid".into()));
            }
            Ok(v)
        }
        None => Ok(DEFAULT_T.to_vec()),
    }
}

fn emit(common: &Common, text: &str) -> Result<(), CliError> {
    match &common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn g(x: W) -> String {
    x.to_sci(17)
}

fn cmd_critical(spec: &CriticalSpec<W>, out: &mut String) {
    out.push_str(&spec.to_kv());
    let z = zeta(spec);
    let gp = g_poly(spec.nu, z);
    let coeffs: Vec<String> = gp.coeffs().iter().map(|x| x.to_sci(30)).collect();
    writeln!(out, "# derived constants").unwrap();
    writeln!(out, "zeta = {}", z.to_sci(30)).unwrap();
    writeln!(out, "C = {}", c_constant(spec).to_sci(30)).unwrap();
    writeln!(out, "A = {}", a_constant(spec).to_sci(30)).unwrap();
    writeln!(out, "G = {}", coeffs.join(", ")).unwrap();
}

/// Returns `true` if any row failed.
fn cmd_equilibrium(spec: &CriticalSpec<W>, ts: &[f64], out: &mut String) -> bool {
    out.push_str(
        "t_rel,t,cuts,a,b,c,d,norm_residual,newborn_mass,gamma_lo,gamma_hi,beta_lo,beta_hi\n",
    );
    let rows = par_map(ts, |&tr| {
        let t = spec.tc * c::<W>(tr);
        match solve_near_critical(spec, t) {
            Ok(mu) => {
                let r = &mu.endpoints;
                let (cc, d, mass) = if mu.s == 2 {
                    (g(r[2]), g(r[3]), g(mu.cut_mass(1)))
                } else {
                    (String::new(), String::new(), "0".to_string())
                };
                let (glo, ghi, blo, bhi) = match classical_gamma_beta(&mu) {
                    ClassicalRecurrence::Limits { gamma, beta } => (gamma, gamma, beta, beta),
                    ClassicalRecurrence::Bounds {
                        gamma_lo,
                        gamma_hi,
                        beta_lo,
                        beta_hi,
                    } => (gamma_lo, gamma_hi, beta_lo, beta_hi),
                };
                (
                    false,
                    format!(
                        "{tr:e},{},{},{},{},{cc},{d},{},{mass},{},{},{},{}\n",
                        g(t),
                        mu.s,
                        g(r[0]),
                        g(r[1]),
                        g(mu.normalization_residual()),
                        g(glo),
                        g(ghi),
                        g(blo),
                        g(bhi)
                    ),
                )
            }
            Err(e) => (true, format!("{tr:e},{},error: {e}\n", g(t))),
        }
    });
    collect_rows(rows, out)
}

fn cmd_transition(spec: &CriticalSpec<W>, ts: &[f64], out: &mut String) -> bool {
    out.push_str("t_rel,t,cuts,d2F_solver,d2F_formula\n");
    let rows = par_map(ts, |&tr| {
        let t = spec.tc * c::<W>(tr);
        let formula = transition_curvature(spec, t).map(g).unwrap_or_default();
        let solved = solve_near_critical(spec, t)
            .and_then(|mu| thermo_derivatives(&mu).map(|th| (mu.s, th.d2f_dt2)));
        match solved {
            Ok((s, d2)) => (false, format!("{tr:e},{},{s},{},{formula}\n", g(t), g(d2))),
            Err(e) => (true, format!("{tr:e},{},,error: {e},{formula}\n", g(t))),
        }
    });
    collect_rows(rows, out)
}

fn model_chain_for(spec: &CriticalSpec<W>, u_max: f64) -> Result<ModelChain<W>, CliError> {
    let k_max = (u_max.max(0.0).ceil() as usize + 14).max(24);
    Ok(ModelChain::<W>::build(spec.nu, k_max, GridSpec::default())
        .map_err(numerical)?
        .with_a_const(a_constant(spec)))
}

fn cmd_scan_u(
    spec: &CriticalSpec<W>,
    ns: &[f64],
    us: &[f64],
    out: &mut String,
) -> Result<bool, CliError> {
    let u_max = us.iter().copied().fold(0.0, f64::max);
    let mc = model_chain_for(spec, u_max)?;
    let mf = MeanField::new(spec, &mc).map_err(numerical)?;
    out.push_str(
        "N,N_eff,n,p,u,ubar,eps_u,valid_z,gamma_oracle,gamma_reduced,gamma_full,beta_oracle,beta_reduced,beta_full,rel_err_gamma,rel_err_beta\n",
    );
    let mut failed = false;
    for &n in ns {
        let items: Vec<f64> = us.to_vec();
        let rows = par_map(&items, |&u| {
            let s = match sample_at_u(c::<W>(n), c::<W>(u), spec.nu, spec.phi_e) {
                Ok(s) => s,
                Err(e) => return (true, format!("{n},,,,{u},error: {e}\n")),
            };
            let chain: Result<RecChain<W>, Error> =
                build_rec_chain(&spec.v, s.n_big, spec.tc, s.n + 1, default_grid());
            let ch = match chain {
                Ok(ch) => ch,
                Err(e) => {
                    return (
                        true,
                        format!("{n},{},{},,{u},error: {e}\n", g(s.n_big), s.n),
                    )
                }
            };
            let rp = make_regime(spec, s.n_big, s.p);
            let (go, bo) = (ch.gamma[s.n], ch.beta[s.n]);
            let (gr, br) = (mf.gamma_reduced(&rp), mf.beta_reduced(&rp));
            let eg = gamma_deviation(s.n_big, go, gr);
            let eb = beta_deviation(s.n_big, bo, br);
            (
                false,
                format!(
                    "{n},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    g(s.n_big),
                    s.n,
                    g(s.p),
                    g(rp.u),
                    rp.ubar,
                    rp.eps_u,
                    rp.valid_z,
                    g(go),
                    g(gr),
                    g(mf.gamma_full(&rp)),
                    g(bo),
                    g(br),
                    g(mf.beta_full(&rp)),
                    g(eg),
                    g(eb)
                ),
            )
        });
        failed |= collect_rows(rows, out);
    }
    Ok(failed)
}

fn cmd_psi(
    spec: &CriticalSpec<W>,
    n: f64,
    u: f64,
    ys: &[f64],
    out: &mut String,
) -> Result<(), CliError> {
    let mc = model_chain_for(spec, u)?;
    let mf = MeanField::new(spec, &mc).map_err(numerical)?;
    let s = sample_at_u(c::<W>(n), c::<W>(u), spec.nu, spec.phi_e).map_err(numerical)?;
    let ch =
        build_rec_chain(&spec.v, s.n_big, spec.tc, s.n + 1, default_grid()).map_err(numerical)?;
    let rp = make_regime(spec, s.n_big, s.p);
    let map = ScalingMap::new(spec, s.n_big);
    let prev = mf.shifted(&rp, -1);
    writeln!(
        out,
        "# N_eff = {}, n = {}, u = {}, ubar = {}, valid_psi = {}",
        g(s.n_big),
        s.n,
        g(rp.u),
        rp.ubar,
        rp.valid_psi
    )
    .unwrap();
    out.push_str("y,x,psi_oracle_n,psi_reduced_n,psi_full_n,psi_oracle_nm1,psi_reduced_nm1,psi_full_nm1,phi_oracle_nm1,phi_reduced_nm1,phi_full_nm1,kernel_oracle,kernel_reduced,kernel_full\n");
    let xs: Vec<W> = ys.iter().map(|&y| map.to_x(c::<W>(y))).collect();
    let phi_oracle = ch.eval_phi_exact_many(s.n - 1, &xs);
    let idx: Vec<usize> = (0..ys.len()).collect();
    let rows = par_map(&idx, |&i| {
        let yf = ys[i];
        let y = c::<W>(yf);
        let x = xs[i];
        let (pr_lo, pr_hi) = mf.psi_reduced(&rp, y);
        let phr = mf
            .phi_reduced(&rp, y)
            .map(|v| g(v.0))
            .unwrap_or_else(|e| format!("error: {e}"));
        (
            false,
            format!(
                "{yf},{},{},{},{},{},{},{},{},{phr},{},{},{},{}\n",
                g(x),
                g(ch.eval_psi_exact(s.n, x)),
                g(pr_hi),
                g(mf.psi_full(&rp, y)),
                g(ch.eval_psi_exact(s.n - 1, x)),
                g(pr_lo),
                g(mf.psi_full(&prev, y)),
                g(phi_oracle[i]),
                g(mf.phi_full(&rp, y)),
                g(ch.kernel_exact(s.n, x, x)),
                g(mf.kernel_reduced(&rp, x, x)),
                g(mf.kernel_full(&rp, x, x))
            ),
        )
    });
    collect_rows(rows, out);
    Ok(())
}

fn cmd_compare(
    spec: &CriticalSpec<W>,
    n: f64,
    us: &[f64],
    out: &mut String,
) -> Result<(), CliError> {
    let u_max = us.iter().copied().fold(0.0, f64::max);
    let mc = model_chain_for(spec, u_max)?;
    let mf = MeanField::new(spec, &mc).map_err(numerical)?;
    out.push_str("N,u,t,gamma_reduced,gamma_full,gamma_env_lo,gamma_env_hi,gamma_lo_measure,gamma_hi_measure,gamma_lo_analytic,gamma_hi_analytic,beta_reduced,beta_full,beta_env_lo,beta_env_hi,beta_lo_measure,beta_hi_measure,beta_lo_analytic,beta_hi_analytic,gamma_inside,beta_inside\n");
    let rows = par_map(us, |&u| {
        let rp = regime_at_u(spec, c::<W>(n), c::<W>(u));
        match mf.large_u_match(&rp) {
            Ok(r) => {
                let opt = |b: Option<(W, W)>| match b {
                    Some((lo, hi)) => (g(lo), g(hi)),
                    None => (String::new(), String::new()),
                };
                let (gml, gmh) = opt(r.gamma_bounds_measure);
                let (bml, bmh) = opt(r.beta_bounds_measure);
                (
                    false,
                    format!(
                        "{n},{u},{},{},{},{},{},{gml},{gmh},{},{},{},{},{},{},{bml},{bmh},{},{},{},{}\n",
                        g(r.t),
                        g(r.gamma_reduced),
                        g(r.gamma_full),
                        g(r.gamma_envelope.0),
                        g(r.gamma_envelope.1),
                        g(r.gamma_bounds_analytic.0),
                        g(r.gamma_bounds_analytic.1),
                        g(r.beta_reduced),
                        g(r.beta_full),
                        g(r.beta_envelope.0),
                        g(r.beta_envelope.1),
                        g(r.beta_bounds_analytic.0),
                        g(r.beta_bounds_analytic.1),
                        r.gamma_full_inside,
                        r.beta_full_inside
                    ),
                )
            }
            Err(e) => (true, format!("{n},{u},error: {e}\n")),
        }
    });
    if collect_rows(rows, out) {
        return Err(CliError::Numerical("large-u comparison failed".into()));
    }
    Ok(())
}

/// Map over items on scoped threads; results keep the input order.
fn par_map<I: Sync, F: Fn(&I) -> (bool, String) + Sync>(
    items: &[I],
    work: F,
) -> Vec<(bool, String)> {
    let threads = thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(items.len().max(1));
    let mut slots: Vec<Option<(bool, String)>> = (0..items.len()).map(|_| None).collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let results = std::sync::Mutex::new(&mut slots);
    thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = work(&items[i]);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|r| r.expect("every item processed"))
        .collect()
}

fn collect_rows(rows: Vec<(bool, String)>, out: &mut String) -> bool {
    let mut failed = false;
    for (bad, line) in rows {
        failed |= bad;
        out.push_str(&line);
    }
    failed
}
