use crate::validate::{run_suite, Suite};
use crate::{svg, Figure2Args, LyapunovArgs, ModelName, MomentArgs, RouteName, SuiteName, ValidateArgs};
use pam_core::expansion::{default_contour, mu_via_partitions, onesided_weight};
use pam_core::lyapunov::{
    almost_sure_replica, figure2_table, gamma2_general, gamma_k_onesided, intermittency_report, she_gamma,
    Figure2Row, ReportModel,
};
use pam_core::montecarlo::{mc_moment, pinned_walk_second_moment, SimConfig};
use pam_core::oracle::{ode_moment, OdeOptions};
use pam_core::quadrature::{
    first_moment_with, onesided_integral, second_moment_q, two_point_integral, FIRST_MOMENT_TOL, ONESIDED_TOL,
};
use pam_core::{ModelParams, MomentResult, PamError, Route};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const MAX_FIGURE_K: usize = 8;
pub const MOMENT_HEADER: &str = "p,q,beta,t,n,route,log_value,sign,value,error_estimate";
/// Largest `ln|x|` written as a linear value; beyond it the column reads `inf`.
const LINEAR_LIMIT: f64 = 709.0;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(PamError),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => crate::EXIT_USAGE,
            CliError::Compute(_) | CliError::Io(_) => crate::EXIT_FAILURE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Compute(e) => write!(f, "{e}"),
        }
    }
}

impl From<PamError> for CliError {
    fn from(e: PamError) -> Self {
        CliError::Compute(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Validated settings of a moment run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ModelParams,
    pub t: f64,
    pub n: Vec<i64>,
    pub routes: Vec<RouteName>,
    pub tol: Option<f64>,
    pub replicas: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_args(a: &MomentArgs) -> Result<Self, CliError> {
        let params = ModelParams::new(a.p, a.q, a.beta).map_err(|e| CliError::Usage(e.to_string()))?;
        if !(a.t >= 0.0 && a.t.is_finite()) {
            return Err(CliError::Usage(format!("t must be finite and ≥ 0, got {}", a.t)));
        }
        if a.n.is_empty() {
            return Err(CliError::Usage("n needs at least one site".into()));
        }
        if let Some(tol) = a.tol {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(CliError::Usage(format!("tol must lie in (0, 1), got {tol}")));
            }
        }
        let mut routes = a.route.clone();
        routes.dedup();
        Ok(Self {
            params,
            t: a.t,
            n: a.n.clone(),
            routes,
            tol: a.tol,
            replicas: a.replicas,
            seed: a.seed,
            out: a.out.clone(),
        })
    }
}

fn quadrature_moment(cfg: &RunConfig) -> Result<MomentResult, PamError> {
    let p = &cfg.params;
    let n = &cfg.n;
    if p.is_one_sided() && n.iter().any(|&m| m < 0) {
        // jumps only go right, so sites left of the origin stay empty
        return Ok(MomentResult::from_real(0.0, Route::Quadrature, 0.0, 0));
    }
    match (n.len(), p.is_one_sided()) {
        (1, _) => first_moment_with(p, cfg.t, n[0], cfg.tol.unwrap_or(FIRST_MOMENT_TOL), None),
        (_, true) => {
            // the moment is symmetric; the nested contours want n₁ ≥ ⋯ ≥ n_k
            let mut sorted = n.clone();
            sorted.sort_unstable_by(|a, b| b.cmp(a));
            onesided_integral(p.beta(), cfg.t, &sorted, None, cfg.tol.unwrap_or(ONESIDED_TOL))
        }
        (2, false) => {
            // the two-point formula is written for n₁ ≥ n₂
            let (hi, lo) = (n[0].max(n[1]), n[0].min(n[1]));
            match cfg.tol {
                None => second_moment_q(p, cfg.t, hi, lo),
                Some(tol) => two_point_integral(p, cfg.t, hi, lo, tol),
            }
        }
        (k, false) => Err(PamError::Precondition(format!(
            "the two-sided model has contour formulas for k ≤ 2 only, got k = {k}"
        ))),
    }
}

/// One-sided constant tuple through the partition expansion, with `β`
/// restored by Brownian scaling.
fn partition_moment(cfg: &RunConfig) -> Result<MomentResult, PamError> {
    let p = &cfg.params;
    if !p.is_one_sided() {
        return Err(PamError::Precondition("the partition route covers the one-sided model only".into()));
    }
    let m = cfg.n[0];
    if cfg.n.iter().any(|&x| x != m) {
        return Err(PamError::Precondition("the partition route needs all sites equal".into()));
    }
    if p.beta() <= 0.0 {
        return Err(PamError::Precondition("the partition route needs β > 0".into()));
    }
    let (b2, k) = (p.beta_sq(), cfg.n.len());
    let f = onesided_weight(b2 * cfg.t, m);
    let (mu, _) = mu_via_partitions(&f, k, &default_contour(), cfg.tol.unwrap_or(1e-10))?;
    let shift = -2.0 * (k as i64 * m) as f64 * p.beta().ln() + k as f64 * (b2 - 1.0) * cfg.t;
    Ok(MomentResult {
        log_abs: mu.log_abs + shift,
        route: Route::Partition,
        ..mu
    })
}

/// Deterministic results with a larger error estimate are rejected.
pub const MAX_REL_ERROR: f64 = 1e-3;

pub fn moment_by_route(cfg: &RunConfig, route: RouteName) -> Result<MomentResult, PamError> {
    let r = compute(cfg, route)?;
    let deterministic = !matches!(route, RouteName::Mc | RouteName::Pinned);
    if deterministic && !(r.rel_error <= MAX_REL_ERROR) {
        return Err(PamError::Inaccurate { rel_error: r.rel_error, limit: MAX_REL_ERROR });
    }
    Ok(r)
}

fn compute(cfg: &RunConfig, route: RouteName) -> Result<MomentResult, PamError> {
    match route {
        RouteName::Quadrature => quadrature_moment(cfg),
        RouteName::Ode => {
            let opts = cfg.tol.map(OdeOptions::with_tol).unwrap_or_default();
            ode_moment(&cfg.params, &cfg.n, cfg.t, &opts)
        }
        RouteName::Mc => {
            let sim = SimConfig::new(&cfg.params, cfg.t, &cfg.n, cfg.replicas, cfg.seed);
            Ok(mc_moment(&cfg.params, cfg.t, &cfg.n, &sim)?.to_moment())
        }
        RouteName::Partition => partition_moment(cfg),
        RouteName::Pinned => {
            if cfg.n.len() != 2 {
                return Err(PamError::Precondition("the pinned-walk route computes k = 2 only".into()));
            }
            let sim = SimConfig::new(&cfg.params, cfg.t, &cfg.n, cfg.replicas, cfg.seed);
            Ok(pinned_walk_second_moment(&cfg.params, cfg.t, (cfg.n[0], cfg.n[1]), &sim)?.to_moment())
        }
    }
}

pub fn sci(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.17e}")
    }
}

fn linear(r: &MomentResult) -> String {
    if r.sign == 0.0 {
        sci(0.0)
    } else if r.log_abs > LINEAR_LIMIT {
        if r.sign < 0.0 { "-inf" } else { "inf" }.into()
    } else {
        sci(r.value())
    }
}

pub fn moment_row(cfg: &RunConfig, route: RouteName, r: &MomentResult) -> String {
    let n: Vec<String> = cfg.n.iter().map(|x| x.to_string()).collect();
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        sci(cfg.params.p()),
        sci(cfg.params.q()),
        sci(cfg.params.beta()),
        sci(cfg.t),
        n.join(";"),
        route.name(),
        sci(r.log_abs),
        r.sign as i32,
        linear(r),
        sci(r.rel_error)
    )
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(CliError::from),
    }
}

/// Rows for every requested route, then the pairwise relative differences.
pub fn cmd_moment(a: &MomentArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = RunConfig::from_args(a)?;
    let mut results = Vec::new();
    for &route in &cfg.routes {
        results.push((route, moment_by_route(&cfg, route)?));
    }
    let mut text = String::from(MOMENT_HEADER);
    text.push('\n');
    for (route, r) in &results {
        text.push_str(&moment_row(&cfg, *route, r));
        text.push('\n');
    }
    if results.len() > 1 {
        text.push_str("\nroute_a,route_b,rel_diff\n");
        for i in 0..results.len() {
            for j in i + 1..results.len() {
                let d = results[i].1.rel_diff(&results[j].1);
                text.push_str(&format!("{},{},{}\n", results[i].0.name(), results[j].0.name(), sci(d)));
            }
        }
    }
    emit(out, cfg.out.as_deref(), &text)?;
    Ok(0)
}

fn opt(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_default()
}

pub fn cmd_lyapunov(a: &LyapunovArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    if a.kmax == 0 || a.kmax > 10 {
        return Err(CliError::Usage(format!("kmax must be in 1..=10, got {}", a.kmax)));
    }
    let mut text = String::from("quantity,k,value,critical_point,method\n");
    let report_model = match a.model {
        ModelName::Onesided => {
            let r = almost_sure_replica(a.nu)?;
            text.push_str(&format!("gamma_tilde,1,{},{},{}\n", sci(r.value), opt(r.critical_point), r.method.name()));
            for k in 1..=a.kmax {
                let g = gamma_k_onesided(k, a.nu)?;
                text.push_str(&format!("gamma,{k},{},{},{}\n", sci(g.value), opt(g.critical_point), g.method.name()));
            }
            ReportModel::OneSided
        }
        ModelName::Symmetric => {
            let params = ModelParams::symmetric(a.beta).map_err(|e| CliError::Usage(e.to_string()))?;
            let ex = gamma2_general(&params)?;
            text.push_str(&format!("gamma,1,{},,closed-form\n", sci(ex.gamma1)));
            text.push_str(&format!(
                "gamma,2,{},{},{}\n",
                sci(ex.gamma2.value),
                opt(ex.gamma2.critical_point),
                ex.gamma2.method.name()
            ));
            ReportModel::Symmetric { beta: a.beta }
        }
        ModelName::She => {
            for k in 1..=a.kmax {
                text.push_str(&format!("gamma,{k},{},,closed-form\n", sci(she_gamma(k))));
            }
            ReportModel::She
        }
    };
    if a.report {
        let rep = intermittency_report(a.nu, a.kmax, report_model)?;
        text.push_str("\nlower,upper,margin,strict\n");
        for c in &rep.comparisons {
            text.push_str(&format!("{},{},{},{}\n", c.lower, c.upper, sci(c.margin), c.strict));
        }
    }
    out.write_all(text.as_bytes())?;
    Ok(0)
}

pub fn figure2_grid(nu_min: f64, nu_max: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| nu_min + (nu_max - nu_min) * i as f64 / (points - 1) as f64)
        .collect()
}

pub fn figure2_csv(rows: &[Figure2Row], kmax: usize) -> String {
    let mut text = String::from("nu,gamma_tilde_norm,gamma_1_norm");
    for k in 2..=kmax {
        text.push_str(&format!(",gamma_{k}_over_{k}_norm"));
    }
    text.push('\n');
    for r in rows {
        text.push_str(&format!("{},{}", sci(r.nu), sci(r.tilde_gamma1)));
        for v in &r.scaled {
            text.push(',');
            text.push_str(&sci(*v));
        }
        text.push('\n');
    }
    text
}

pub fn figure2_svg(rows: &[Figure2Row], kmax: usize) -> String {
    let mut series = vec![(
        "γ̃₁ − γ₁".to_string(),
        rows.iter().map(|r| (r.nu, r.tilde_gamma1)).collect::<Vec<_>>(),
    )];
    for k in 1..=kmax {
        let label = if k == 1 { "γ₁ − γ₁".to_string() } else { format!("γ_{k}/{k} − γ₁") };
        series.push((label, rows.iter().map(|r| (r.nu, r.scaled[k - 1])).collect()));
    }
    svg::line_plot(&series, "ν", "normalised exponent")
}

/// Writes `figure2.csv` and `figure2.svg` to the output directory.
pub fn cmd_figure2(a: &Figure2Args, out: &mut dyn Write) -> Result<i32, CliError> {
    if !(a.nu_min > 0.0 && a.nu_min < a.nu_max && a.nu_max <= 5.0) {
        return Err(CliError::Usage(format!(
            "need 0 < nu-min < nu-max ≤ 5, got {} and {}",
            a.nu_min, a.nu_max
        )));
    }
    if a.kmax == 0 || a.kmax > MAX_FIGURE_K {
        return Err(CliError::Usage(format!("kmax must be in 1..={MAX_FIGURE_K}")));
    }
    if a.points < 2 {
        return Err(CliError::Usage("points must be ≥ 2".into()));
    }
    let rows = figure2_table(&figure2_grid(a.nu_min, a.nu_max, a.points), a.kmax)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| CliError::Io(format!("{}: {e}", a.out_dir.display())))?;
    let csv = a.out_dir.join("figure2.csv");
    let plot = a.out_dir.join("figure2.svg");
    emit(out, Some(&csv), &figure2_csv(&rows, a.kmax))?;
    emit(out, Some(&plot), &figure2_svg(&rows, a.kmax))?;
    writeln!(out, "{}\n{}", csv.display(), plot.display())?;
    Ok(0)
}

pub fn cmd_validate(a: &ValidateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let suite = match a.suite {
        SuiteName::Quick => Suite::Quick,
        SuiteName::Full => Suite::Full,
    };
    let mut all = true;
    for outcome in run_suite(suite, &a.only, |o| {
        let _ = writeln!(out, "{o}");
        let _ = out.flush();
    }) {
        all &= outcome.passed;
    }
    Ok(if all { 0 } else { crate::EXIT_FAILURE })
}
