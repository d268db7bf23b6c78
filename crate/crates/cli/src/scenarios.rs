use ergolab_core::conv_ops::{self, right_conv_operator};
use ergolab_core::duals::{check_state, random_element, StateSpec};
use ergolab_core::hopf::{self, CheckKind};
use ergolab_core::lp::{self, Exponent};
use ergolab_core::semigroups::{self, GeneratingFunctional};
use ergolab_core::{blocks, io, Complex64, Error, Functional, QuantumGroup, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::report::{num, Report};

/// Fully resolved scenario parameters (defaults already applied).
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub group: String,
    pub state: String,
    pub n_max: usize,
    pub t_grid: Vec<f64>,
    pub p: Vec<String>,
    pub q: f64,
    pub l_max: f64,
    pub tol: f64,
    pub seed: u64,
    pub draws: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// A bad input, reported against the flag that supplied it.
    #[error("--{field}: {message}")]
    Field { field: &'static str, message: String },
    #[error("cannot write report: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn field(field: &'static str, message: impl ToString) -> Self {
        Self::Field {
            field,
            message: message.to_string(),
        }
    }
}

/// Attributes a library error to the flag most likely responsible for it.
fn blame(default: &'static str) -> impl Fn(Error) -> CliError {
    move |e| {
        let field = match &e {
            Error::NotAState { .. }
            | Error::NonPositive { .. }
            | Error::NotSymmetric { .. }
            | Error::NotTauInvariant { .. }
            | Error::InvalidGenerator(_) => "state",
            Error::InvalidExponent(_) => "p",
            Error::InvalidTime(_) => "t-grid",
            Error::InvalidDeformation(_) => "q",
            Error::InvalidSpin(_) => "l-max",
            _ => default,
        };
        CliError::field(field, e)
    }
}

pub fn parse_exponents(ps: &[String]) -> Result<Vec<Exponent<f64>>, CliError> {
    ps.iter()
        .map(|p| p.parse().map_err(|e: Error| CliError::field("p", e)))
        .collect()
}

fn load(cfg: &ScenarioConfig) -> Result<QuantumGroup, CliError> {
    io::resolve_group(&cfg.group).map_err(|e| CliError::field("group", e))
}

fn load_solved(cfg: &ScenarioConfig) -> Result<QuantumGroup, CliError> {
    load(cfg)?
        .with_solved_haar()
        .map_err(|e| CliError::field("group", e))
}

fn state(cfg: &ScenarioConfig, g: &QuantumGroup) -> Result<Functional, CliError> {
    let spec: StateSpec = cfg.state.parse().map_err(|e| CliError::field("state", e))?;
    spec.resolve(g).map_err(|e| CliError::field("state", e))
}

/// Seeded test vector scaled to `‖x‖_∞ = 1`.
fn test_vector(g: &QuantumGroup, seed: u64) -> Result<Vector, CliError> {
    let x = random_element(g.dim(), &mut ChaCha8Rng::seed_from_u64(seed));
    let ctx = lp::make_context(g, Exponent::Inf).map_err(blame("group"))?;
    let n = ctx.norm(&x);
    Ok(x / Complex64::new(n, 0.0))
}

/// Decades up to `n_max`, closed with `n_max` itself.
fn decade_grid(n_max: usize) -> Vec<usize> {
    let mut ns: Vec<usize> = std::iter::successors(Some(10usize), |n| n.checked_mul(10))
        .take_while(|&n| n < n_max)
        .collect();
    ns.push(n_max.max(1));
    ns
}

fn nonincreasing(rs: &[f64], slack: f64) -> bool {
    rs.windows(2).all(|w| w[1] <= w[0] + slack)
}

fn fmt_vector(v: &Vector) -> String {
    let body: Vec<String> = v.iter().map(|z| format!("{},{}", num(z.re), num(z.im))).collect();
    format!("[{}]", body.join(";"))
}

pub fn run(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    match cfg.scenario.as_str() {
        "axioms" => axioms(cfg),
        "haar" => haar(cfg),
        "cesaro" => cesaro(cfg),
        "iterates" => iterates(cfg),
        "idempotents" => idempotents(cfg),
        "lp" => lp_scenario(cfg),
        "semigroup" => semigroup(cfg),
        "blocks" => blocks_scenario(cfg),
        "list" => Ok(list()),
        other => Err(CliError::field("scenario", format!("unknown scenario `{other}`"))),
    }
}

fn axioms(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let raw = load(cfg)?;
    let mut rep = Report::new("axioms", &["check", "kind", "value", "passed"]);
    // A broken structure may have no Haar state; the axiom rows still say why.
    let g = match raw.with_solved_haar() {
        Ok(g) => g,
        Err(e) => {
            rep.note("haar", e.to_string());
            raw
        }
    };
    let ax = hopf::verify_axioms(&g, cfg.tol);
    for c in &ax.checks {
        let kind = match c.kind {
            CheckKind::Residual => "residual",
            CheckKind::Invertibility => "invertibility",
            CheckKind::PositiveDefinite => "positive_definite",
        };
        rep.row(vec![c.name.clone(), kind.into(), num(c.value), c.passed.to_string()]);
        if !c.passed {
            rep.fail(c.name.clone());
        }
    }
    rep.note("group", g.name());
    rep.note("dim", g.dim());
    rep.note("max_residual", ax.max_residual());
    Ok(rep)
}

fn haar(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let g = load_solved(cfg)?;
    let h = g.haar().map_err(blame("group"))?;
    let mut rep = Report::new("haar", &["index", "re", "im"]);
    for (i, z) in h.values().iter().enumerate() {
        rep.row(vec![i.to_string(), num(z.re), num(z.im)]);
    }
    let ax = hopf::verify_axioms(&g, cfg.tol);
    for c in ax.checks.iter().filter(|c| c.name.starts_with("haar")) {
        rep.note(&c.name, c.value);
        if !c.passed {
            rep.fail(c.name.clone());
        }
    }
    let st = check_state(&g, &h, cfg.tol);
    let trace = hopf::traciality_residual(&g, h.values());
    rep.note("faithful", st.faithful);
    rep.note("min_eig", st.min_eig);
    rep.note("traciality_residual", trace);
    if !st.state {
        rep.fail("state");
    }
    Ok(rep)
}

fn cesaro(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let g = load_solved(cfg)?;
    let phi = state(cfg, &g)?;
    let t = right_conv_operator(&g, &phi).map_err(blame("state"))?.matrix;
    let f = conv_ops::fixed_point_projection(&t, cfg.tol).map_err(blame("state"))?;
    let erg = conv_ops::check_ergodicity(&g, &phi, cfg.tol).map_err(blame("state"))?;
    let ns = decade_grid(cfg.n_max);
    let rows = conv_ops::cesaro_convergence(&g, &t, &f, &ns).map_err(blame("group"))?;
    let constant = conv_ops::cesaro_check(&g, &t, &f, 1).map_err(blame("state"))?.constant;
    let mut rep = Report::new("cesaro", &["n", "residual", "residual_l2", "bound"]);
    for r in &rows {
        let bound = constant / r.n as f64;
        rep.row(vec![r.n.to_string(), num(r.residual_op), num(r.residual_l2), num(bound)]);
        if r.residual_op > 1.01 * bound + cfg.tol.sqrt() {
            rep.fail(format!("residual above C/n at n = {}", r.n));
        }
    }
    let tail: Vec<_> = rows.iter().filter(|r| r.n >= 100 && r.residual_op > 0.0).collect();
    if tail.len() >= 2 {
        let xs: Vec<f64> = tail.iter().map(|r| r.n as f64).collect();
        let ys: Vec<f64> = tail.iter().map(|r| r.residual_op).collect();
        rep.note("fitted_exponent", conv_ops::fit_power_law(&xs, &ys).1);
    }
    rep.note("ergodic", erg.ergodic);
    rep.note("fixed_dim", erg.fixed_dim);
    rep.note("constant", constant);
    Ok(rep)
}

fn iterates(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let g = load_solved(cfg)?;
    let phi = state(cfg, &g)?;
    let x = test_vector(&g, cfg.seed)?;
    let st = conv_ops::stein_even_iterates(&g, &phi, &x, cfg.n_max, cfg.tol).map_err(blame("state"))?;
    let mut rep = Report::new("iterates", &["n", "residual"]);
    for (k, r) in st.residuals.iter().enumerate() {
        rep.row(vec![(k + 1).to_string(), num(*r)]);
    }
    if !nonincreasing(&st.residuals, cfg.tol) {
        rep.fail("even iterates are not monotone");
    }
    rep.note("rate", st.rate);
    rep.note("observed_rate", st.observed_rate);
    Ok(rep)
}

fn idempotents(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let g = load_solved(cfg)?;
    let scan = conv_ops::idempotent_scan(&g, cfg.draws, cfg.seed, cfg.tol).map_err(blame("group"))?;
    let mut rep = Report::new("idempotents", &["index", "subgroup", "idempotency", "rho"]);
    for (i, r) in scan.idempotents.iter().enumerate() {
        let sub = r.subgroup.map(|s| s.to_string()).unwrap_or_default();
        rep.row(vec![i.to_string(), sub, num(r.idempotency), fmt_vector(r.rho.values())]);
        if r.idempotency > cfg.tol {
            rep.fail(format!("idempotent {i} has ‖ρ⋆ρ − ρ‖ = {:e}", r.idempotency));
        }
    }
    rep.note("subgroups", scan.subgroups.len());
    rep.note("idempotents", scan.idempotents.len());
    rep.note("atypical", scan.atypical().count());
    Ok(rep)
}

fn lp_scenario(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let g = load_solved(cfg)?;
    let phi = state(cfg, &g)?;
    let ps = parse_exponents(&cfg.p)?;
    let x = test_vector(&g, cfg.seed)?;
    let ns = decade_grid(cfg.n_max);
    let mut rep = Report::new("lp", &["p", "n", "lp_residual"]);
    let mut bounds = serde_json::Map::new();
    for p in ps {
        let ctx = lp::make_context(&g, p).map_err(blame("group"))?;
        let op = lp::conv_operator_lp(&ctx, &phi).map_err(blame("state"))?;
        let target = lp::fixed_point_projection_lp(&ctx, &phi, &x, cfg.tol)
            .map_err(blame("state"))?
            .value;
        let rs = lp::cesaro_lp_residuals(&ctx, &op.matrix, &x, &target, &ns);
        for (n, r) in ns.iter().zip(&rs) {
            rep.row(vec![num(p.as_f64()), n.to_string(), num(*r)]);
        }
        let sampled = lp::sampled_operator_norm(&ctx, &op.matrix, 64, cfg.seed);
        bounds.insert(
            num(p.as_f64()),
            serde_json::json!({
                "sampled_norm": sampled,
                "interpolation_bound": op.interpolation_bound,
                "four_kernel_bound": op.four_kernel_bound,
            }),
        );
        if !nonincreasing(&rs, cfg.tol) {
            rep.fail(format!("residuals not monotone at p = {}", num(p.as_f64())));
        }
        if sampled > op.interpolation_bound * (1.0 + 1e-9) + cfg.tol {
            rep.fail(format!("‖T‖_p exceeds ‖φ‖ at p = {}", num(p.as_f64())));
        }
    }
    rep.note("operator_norms", bounds);
    Ok(rep)
}

fn semigroup(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let g = load_solved(cfg)?;
    let psi = state(cfg, &g)?;
    let l = GeneratingFunctional::poisson(&g, &psi);
    let ps = parse_exponents(&cfg.p)?;
    let x = test_vector(&g, cfg.seed)?;
    let sg = semigroups::semigroup_limits(&g, &l, &ps, &cfg.t_grid, &x, cfg.tol).map_err(blame("state"))?;
    let mut rep = Report::new(
        "semigroup",
        &["t", "p", "residual_avg", "residual_direct", "is_state_min_eig"],
    );
    for r in &sg.rows {
        rep.row(vec![
            num(r.t),
            num(r.p),
            num(r.residual_avg),
            r.residual_direct.map(num).unwrap_or_default(),
            num(r.is_state_min_eig),
        ]);
        if r.is_state_min_eig < -cfg.tol {
            rep.fail(format!("φ_t is not a state at t = {}", num(r.t)));
        }
    }
    if !sg.generator.valid {
        rep.fail("generator");
    }
    for c in &sg.certificates {
        if let Some(why) = &c.failure {
            rep.fail(format!("certificate at p = {}: {why}", num(c.p)));
        }
    }
    rep.note("symmetric", sg.symmetric);
    rep.note("conditional_min_eig", sg.generator.conditional_min_eig);
    Ok(rep)
}

fn blocks_scenario(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let bs = match &cfg.blocks {
        Some(path) => blocks::load_blocks::<f64>(path).map_err(|e| CliError::field("blocks", e))?,
        None => blocks::su_q2_blocks(cfg.q, cfg.l_max).map_err(blame("q"))?,
    };
    let mut rep = Report::new("blocks", &["block", "relation", "q", "l", "t", "residual"]);
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    let mut labels = Vec::new();
    for b in &bs {
        let cr = blocks::verify_commutation_relations(b, &cfg.t_grid, cfg.tol);
        for r in &cr.rows {
            rep.row(vec![
                b.label().to_string(),
                r.relation.clone(),
                opt(r.q),
                opt(r.l),
                opt(r.t),
                num(r.residual),
            ]);
        }
        for r in cr.failures() {
            rep.fail(format!("{}: {}", b.label(), r.relation));
        }
        labels.push(b.label().to_string());
    }
    rep.note("blocks", labels);
    Ok(rep)
}

fn list() -> Report {
    let mut rep = Report::new("list", &["name", "dim"]);
    for (name, dim) in io::builtin_catalog() {
        rep.row(vec![name, dim.to_string()]);
    }
    rep
}
