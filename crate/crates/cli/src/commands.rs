// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use ito_dilation::chains::{derive_seed, sample_poisson_chain, PoissonConfig};
use ito_dilation::dilation::{max_chain_from_env, output_ledger};
use ito_dilation::linalg::{c, dagger, expm, max_abs, max_abs_diff, C64, I};
use ito_dilation::pseudo::{
    central_limit_deviation, diagonalizer, ito_product, lorentz_conjugate_hyperbolic, pi_dt,
    pseudo_wiener_increment, weyl_conjugate_counting, LorentzBoost, WeylGenerator,
};
use ito_dilation::{
    build_interaction, entanglement_rank, evolve_on_chain, exact_expectation, large_number_sweep,
    matrix_exponential, mc_expectation_with, partial_dilation_propagator, project_output, semi_tensor_square,
    star_adjoint, Execution, Hamiltonian, IncrementKind, IncrementRep, Metric, PartialDilationConfig,
};
use ndarray::{array, Array2};

use crate::input::{matrix_to_pairs, parse_psi, vector_to_pairs};
use crate::report::{float, Check, RunReport};
use crate::CliError;

/// Named thresholds accepted by `--tol NAME=VALUE`.
pub const CHECK_NAMES: &[&str] = &[
    "ito_table",
    "dt_nilpotent",
    "dt_self_adjoint",
    "minkowski_diagonalization",
    "lorentz_conjugation",
    "boost_action",
    "interaction_star_unitary",
    "semi_tensor_square",
    "weyl_conjugation",
    "weyl_star_unitary",
    "central_limit",
    "pseudo_wiener_nilpotent",
    "output_measure",
    "martingale_centering",
    "propagator_recovery",
    "partial_dilation",
    "mc_expectation",
    "deviation_from_expm",
];

/// Threshold overrides keyed by check name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Tolerances {
    pub fn parse(specs: &[String]) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for spec in specs {
            let (name, value) = spec
                .split_once('=')
                .ok_or_else(|| CliError::Validation(format!("--tol expects NAME=VALUE, got '{spec}'")))?;
            if !CHECK_NAMES.contains(&name) {
                return Err(CliError::Validation(format!("unknown check '{name}' in --tol")));
            }
            let value: f64 = value
                .parse()
                .ok()
                .filter(|v: &f64| *v >= 0.0)
                .ok_or_else(|| CliError::Validation(format!("bad tolerance '{value}' for {name}")))?;
            map.insert(name.to_string(), value);
        }
        Ok(Self(map))
    }

    pub fn get(&self, name: &str, default: f64) -> f64 {
        self.0.get(name).copied().unwrap_or(default)
    }

    fn check(&self, name: &str, value: f64, default: f64) -> Check {
        Check::new(name, value, self.get(name, default))
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub hamiltonian: Hamiltonian,
    pub source: String,
    pub t: f64,
    pub nu: f64,
    pub samples: u64,
    pub seed: u64,
    pub tolerances: Tolerances,
    /// Test hook: replaces `π(dt)` by `[[0, 1], [−1, 0]]`, which squares to `−I`.
    pub perturb_dt: bool,
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{name} must be positive, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<(), CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{name} must be non-negative, got {v}")))
    }
}

fn core(e: ito_dilation::Error) -> CliError {
    CliError::Validation(e.to_string())
}

/// Runs every identity check. The report passes iff all checks do.
pub fn verify(opts: &VerifyOptions) -> Result<RunReport, CliError> {
    positive("t", opts.t)?;
    non_negative("nu", opts.nu)?;
    if opts.samples == 0 {
        return Err(CliError::Validation("samples must be positive".into()));
    }
    let tol = &opts.tolerances;
    let h = &opts.hamiltonian;
    let mut r = RunReport::new("verify");
    r.input("hamiltonian", &opts.source);
    r.input("t", opts.t);
    r.input("nu", opts.nu);
    r.input("samples", opts.samples);
    r.input("seed", opts.seed);

    let kinds = [IncrementKind::Dt3, IncrementKind::Dn3, IncrementKind::Da3, IncrementKind::DaStar3];
    let mut mismatches = 0usize;
    for &a in &kinds {
        for &b in &kinds {
            let (ra, rb) = (IncrementRep::new(a), IncrementRep::new(b));
            let product = ra.matrix().dot(rb.matrix());
            let table = ito_product(&ra, &rb)
                .map_err(core)?
                .map(|p| p.matrix().clone())
                .unwrap_or_else(|| Array2::zeros((3, 3)));
            mismatches += usize::from(product != table);
        }
    }
    r.check(tol.check("ito_table", mismatches as f64, 0.0));

    let mut dt = pi_dt();
    if opts.perturb_dt {
        dt[[1, 0]] = c(-1.0);
    }
    r.check(tol.check("dt_nilpotent", max_abs(&dt.dot(&dt)), 0.0));
    let dt_star = star_adjoint(&dt, &Metric::eta2()).map_err(core)?;
    r.check(tol.check("dt_self_adjoint", max_abs_diff(dt_star.matrix(), &dt), 0.0));

    let u = diagonalizer();
    let d = dagger(u.matrix()).dot(Metric::eta2().matrix()).dot(u.matrix());
    let signature = array![[c(1.0), c(0.0)], [c(0.0), c(-1.0)]];
    r.check(tol.check("minkowski_diagonalization", max_abs_diff(&d, &signature), 1e-15));

    let lorentz = [-2.0, -1.0, 0.0, 1.0, 2.0f64]
        .iter()
        .map(|&theta| {
            let (_, rotated) = lorentz_conjugate_hyperbolic(theta);
            let expected = array![[theta.exp(), 0.0], [0.0, (-theta).exp()]];
            (&rotated - &expected).iter().fold(0.0f64, |m, v| m.max(v.abs()))
        })
        .fold(0.0, f64::max);
    r.check(tol.check("lorentz_conjugation", lorentz, 1e-12));

    let mut boost = 0.0f64;
    for nu in [0.1, 1.0, 10.0] {
        let b = LorentzBoost::new(nu).map_err(core)?;
        boost = boost.max(max_abs_diff(&b.boost_dt(), &(pi_dt() * c(nu))));
    }
    r.check(tol.check("boost_action", boost, 1e-12));

    let mut unitarity = build_interaction(h).star_unitarity_defect();
    for (k, dim) in [2usize, 4, 8].into_iter().enumerate() {
        let random = Hamiltonian::random(dim, derive_seed(opts.seed, 100 + k as u64));
        unitarity = unitarity.max(build_interaction(&random).star_unitarity_defect());
    }
    r.check(tol.check("interaction_star_unitary", unitarity, 1e-12));

    r.check(tol.check("semi_tensor_square", semi_tensor_square(&build_interaction(h)).defect, 1e-13));

    let (mut weyl, mut weyl_unitary) = (0.0f64, 0.0f64);
    for nu in [1.0, 4.0f64] {
        let s = nu.sqrt();
        let mut expected = Array2::<C64>::zeros((4, 4));
        expected[[0, 2]] = c(s);
        expected[[0, 3]] = c(nu);
        expected[[1, 2]] = c(1.0);
        expected[[1, 3]] = c(s);
        weyl = weyl.max(max_abs_diff(&weyl_conjugate_counting(nu).map_err(core)?, &expected));
        weyl_unitary = weyl_unitary.max(WeylGenerator::new(nu).map_err(core)?.operator().star_unitarity_defect());
    }
    r.check(tol.check("weyl_conjugation", weyl, 1e-12));
    r.check(tol.check("weyl_star_unitary", weyl_unitary, 1e-13));

    let mut clt = 0.0f64;
    for nu in [1e2, 1e4, 1e6f64] {
        clt = clt.max((central_limit_deviation(nu).map_err(core)? - 1.0 / nu.sqrt()).abs());
    }
    r.check(tol.check("central_limit", clt, 1e-14));
    let dw = pseudo_wiener_increment();
    r.check(tol.check("pseudo_wiener_nilpotent", max_abs(&dw.dot(&dw)), 0.0));

    let (mut measure, mut martingale) = (0.0f64, 0.0f64);
    for lambda in [0.5, 1.0, 2.0] {
        for nu in [0.25, 1.0, 4.0] {
            let ledger = output_ledger(h, lambda, nu).map_err(core)?;
            measure = measure.max((ledger.per_point_counting_coefficient - nu).abs());
            martingale = martingale.max(ledger.martingale_expectation);
        }
    }
    r.check(tol.check("output_measure", measure, 1e-12));
    r.check(tol.check("martingale_centering", martingale, 1e-12));

    let series = exact_expectation(h, opts.t, opts.nu, 25).map_err(core)?;
    let reference = matrix_exponential(h, opts.t, opts.nu).map_err(core)?;
    r.check(tol.check("propagator_recovery", max_abs_diff(&series.matrix, &reference.matrix), 1e-10));

    let norm = h.spectral_norm();
    let t_grid = if norm > 0.0 { 2.0 / norm } else { 1.0 };
    let mut partial = 0.0f64;
    for lambda in [0.5, 1.0, 2.0] {
        for nu in [0.25, 1.0, 4.0] {
            let cfg = PartialDilationConfig::new(lambda, nu).map_err(core)?;
            let v = partial_dilation_propagator(h, &cfg, t_grid, 25).map_err(core)?;
            let rate = cfg.effective_rate();
            let oracle = expm(&h.matrix().mapv(|z| -I * rate * t_grid * z));
            partial = partial.max(max_abs_diff(&v, &oracle));
        }
    }
    r.check(tol.check("partial_dilation", partial, 1e-10));

    let cfg = PoissonConfig::new(opts.nu, opts.t, opts.samples, opts.seed).map_err(core)?;
    let mc = mc_expectation_with(h, &cfg, Execution::default());
    let mc_err = max_abs_diff(&mc.matrix, &reference.matrix);
    r.result("mc_stderr", mc.stderr);
    r.check(tol.check("mc_expectation", mc_err, 5.0 * mc.stderr));

    let failed: Vec<String> = r.failed_checks().into_iter().map(String::from).collect();
    r.result("failed", failed);
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropagateMethod {
    ExactSeries,
    Expm,
    Mc,
}

impl PropagateMethod {
    pub fn name(self) -> &'static str {
        match self {
            PropagateMethod::ExactSeries => "exact-series",
            PropagateMethod::Expm => "expm",
            PropagateMethod::Mc => "mc",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PropagateOptions {
    pub hamiltonian: Hamiltonian,
    pub source: String,
    pub t: f64,
    pub nu: f64,
    pub method: PropagateMethod,
    pub truncation: usize,
    pub samples: u64,
    pub seed: u64,
    pub tolerances: Tolerances,
}

pub fn propagate(opts: &PropagateOptions) -> Result<RunReport, CliError> {
    non_negative("t", opts.t)?;
    non_negative("nu", opts.nu)?;
    let h = &opts.hamiltonian;
    let mut r = RunReport::new("propagate");
    r.input("hamiltonian", &opts.source);
    r.input("t", opts.t);
    r.input("nu", opts.nu);
    r.input("method", opts.method.name());
    r.input("truncation", opts.truncation);
    r.input("samples", opts.samples);
    r.input("seed", opts.seed);

    let reference = matrix_exponential(h, opts.t, opts.nu).map_err(core)?;
    let (estimate, default_tol) = match opts.method {
        PropagateMethod::ExactSeries => (exact_expectation(h, opts.t, opts.nu, opts.truncation).map_err(core)?, 1e-10),
        PropagateMethod::Expm => (reference.clone(), 0.0),
        PropagateMethod::Mc => {
            positive("t", opts.t)?;
            let cfg = PoissonConfig::new(opts.nu, opts.t, opts.samples, opts.seed).map_err(core)?;
            let mc = mc_expectation_with(h, &cfg, Execution::default());
            let tol = 5.0 * mc.stderr;
            (mc, tol)
        }
    };
    let deviation = max_abs_diff(&estimate.matrix, &reference.matrix);
    r.result("matrix", matrix_to_pairs(&estimate.matrix));
    r.result("deviation_from_expm", deviation);
    r.result("stderr", estimate.stderr);
    if let Some(bound) = estimate.remainder_bound {
        r.result("remainder_bound", bound);
    }
    r.check(opts.tolerances.check("deviation_from_expm", deviation, default_tol));
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    McSamples,
    LargeNumber,
    CentralLimit,
}

impl SweepMode {
    pub fn name(self) -> &'static str {
        match self {
            SweepMode::McSamples => "mc-samples",
            SweepMode::LargeNumber => "large-number",
            SweepMode::CentralLimit => "central-limit",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub hamiltonian: Hamiltonian,
    pub source: String,
    pub mode: SweepMode,
    pub grid: Vec<f64>,
    pub t: f64,
    pub nu: f64,
    pub samples: u64,
    pub seed: u64,
    pub tolerances: Tolerances,
}

/// One row per grid point in fixed column order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub mode: SweepMode,
    pub columns: Vec<&'static str>,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub grid: f64,
    pub metric: f64,
    pub stderr: f64,
    pub pass: bool,
    /// Extra columns, matching `columns[4..]`.
    pub extra: Vec<f64>,
}

impl SweepTable {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let mut cells = vec![float(row.grid), float(row.metric), float(row.stderr), row.pass.to_string()];
            cells.extend(row.extra.iter().map(|&x| float(x)));
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_report(&self, opts: &SweepOptions) -> RunReport {
        let mut r = RunReport::new("sweep");
        r.input("hamiltonian", &opts.source);
        r.input("mode", self.mode.name());
        r.input("grid", &opts.grid);
        r.input("t", opts.t);
        r.input("nu", opts.nu);
        r.input("samples", opts.samples);
        r.input("seed", opts.seed);
        let rows: Vec<BTreeMap<&str, serde_json::Value>> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = BTreeMap::new();
                m.insert("grid", row.grid.into());
                m.insert("metric", row.metric.into());
                m.insert("stderr", row.stderr.into());
                m.insert("pass", row.pass.into());
                for (name, &x) in self.columns[4..].iter().zip(&row.extra) {
                    m.insert(name, x.into());
                }
                m
            })
            .collect();
        r.result("rows", rows);
        r.pass = self.pass();
        r
    }
}

pub fn sweep(opts: &SweepOptions) -> Result<SweepTable, CliError> {
    if opts.grid.is_empty() {
        return Err(CliError::Validation("grid must not be empty".into()));
    }
    let h = &opts.hamiltonian;
    let base = vec!["grid", "metric", "stderr", "pass"];
    match opts.mode {
        SweepMode::McSamples => {
            positive("t", opts.t)?;
            non_negative("nu", opts.nu)?;
            let exact = matrix_exponential(h, opts.t, opts.nu).map_err(core)?.matrix;
            let sigmas = opts.tolerances.get("mc_expectation", 5.0);
            let rows = opts
                .grid
                .iter()
                .enumerate()
                .map(|(k, &m)| {
                    if !(m >= 1.0 && m.fract() == 0.0 && m <= u64::MAX as f64) {
                        return Err(CliError::Validation(format!("sample count {m} is not a positive integer")));
                    }
                    let cfg = PoissonConfig::new(opts.nu, opts.t, m as u64, derive_seed(opts.seed, k as u64))
                        .map_err(core)?;
                    let mc = mc_expectation_with(h, &cfg, Execution::default());
                    let err = max_abs_diff(&mc.matrix, &exact);
                    Ok(SweepRow {
                        grid: m,
                        metric: err,
                        stderr: mc.stderr,
                        pass: err <= sigmas * mc.stderr,
                        extra: vec![],
                    })
                })
                .collect::<Result<_, _>>()?;
            Ok(SweepTable {
                mode: opts.mode,
                columns: base,
                rows,
            })
        }
        SweepMode::LargeNumber => {
            positive("t", opts.t)?;
            if let Some(bad) = opts.grid.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
                return Err(CliError::Validation(format!("nu grid value {bad} must be positive")));
            }
            if opts.samples == 0 {
                return Err(CliError::Validation("samples must be positive".into()));
            }
            let sigmas = opts.tolerances.get("mc_expectation", 5.0);
            let rows = large_number_sweep(h, opts.t, &opts.grid, opts.samples, opts.seed, Execution::default())
                .map_err(core)?
                .into_iter()
                .map(|row| SweepRow {
                    grid: row.nu,
                    metric: row.bias,
                    stderr: row.stderr,
                    pass: row.bias_within(sigmas),
                    extra: vec![row.fluctuation, row.fluctuation_stderr],
                })
                .collect();
            let mut columns = base;
            columns.extend(["fluctuation", "fluctuation_stderr"]);
            Ok(SweepTable {
                mode: opts.mode,
                columns,
                rows,
            })
        }
        SweepMode::CentralLimit => {
            let tol = opts.tolerances.get("central_limit", 1e-14);
            let rows = opts
                .grid
                .iter()
                .map(|&nu| {
                    let dev = central_limit_deviation(nu).map_err(core)?;
                    Ok(SweepRow {
                        grid: nu,
                        metric: dev,
                        stderr: 0.0,
                        pass: (dev - 1.0 / nu.sqrt()).abs() <= tol,
                        extra: vec![],
                    })
                })
                .collect::<Result<_, CliError>>()?;
            Ok(SweepTable {
                mode: opts.mode,
                columns: base,
                rows,
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrajectoryOptions {
    pub hamiltonian: Hamiltonian,
    pub source: String,
    pub t: f64,
    pub nu: f64,
    pub seed: u64,
    pub psi: String,
}

/// Samples one chain, evolves the compound state and reports it.
pub fn trajectory(opts: &TrajectoryOptions) -> Result<RunReport, CliError> {
    positive("t", opts.t)?;
    non_negative("nu", opts.nu)?;
    let h = &opts.hamiltonian;
    let psi = parse_psi(&opts.psi, h)?;
    let mut r = RunReport::new("trajectory");
    r.input("hamiltonian", &opts.source);
    r.input("t", opts.t);
    r.input("nu", opts.nu);
    r.input("seed", opts.seed);
    r.input("psi", &opts.psi);

    let chain = sample_poisson_chain(2.0 * opts.nu, opts.t, opts.seed, 0);
    let cap = max_chain_from_env();
    if chain.len() > cap {
        return Err(CliError::ChainCap { len: chain.len(), max: cap });
    }
    let state = evolve_on_chain(&build_interaction(h), &chain, &psi, opts.t, cap).map_err(core)?;
    let rank = if chain.is_empty() {
        None
    } else {
        Some(entanglement_rank(&state, 1e-10).map_err(core)?)
    };
    r.result("chain", chain.times());
    r.result("pattern_norms", state.pattern_norms());
    r.result("entanglement_rank", rank);
    r.result("output", vector_to_pairs(&project_output(&state, opts.nu).map_err(core)?));
    Ok(r)
}
