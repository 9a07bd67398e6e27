//! Executes a [`RunConfig`]. Output depends on the config alone, so any
//! artifact can be regenerated from its header.

use qsg_core::config::{ConfigError, GraphSpec, RunConfig};
use qsg_core::ensemble::{Ensemble, EnsembleError};
use qsg_core::hypergraph::Hypergraph;
use qsg_core::limit_laws::{q_of_lambda, LawError, LimitLaw, MAX_ENUMERATED_K};
use qsg_core::moment_oracle::{expected_moment, MomentBreakdown, OracleError};
use qsg_core::numeric::{catalan, double_factorial};
use qsg_core::partitions::crossing_histogram;
use qsg_core::pauli::PauliString;
use qsg_core::sampling::{self, RunOptions, SampleRun};
use qsg_core::spectra::{estimate_expected_moments, ks_distance, Binning, SolveOptions, SpectraError};
use serde_json::json;
use thiserror::Error;

use crate::table::{Cell, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    /// A computation refused or could not meet its contract.
    #[error("{0}")]
    Contract(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Contract(_) => "contract",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Contract(_) => 3,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<LawError> for CliError {
    fn from(e: LawError) -> Self {
        match e {
            LawError::InvalidLambda(_) | LawError::UnknownLaw(_) | LawError::OddK(_) | LawError::KTooLarge { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Contract(e.to_string()),
        }
    }
}

impl From<EnsembleError> for CliError {
    fn from(e: EnsembleError) -> Self {
        match e {
            EnsembleError::DenseCap { .. } => CliError::Contract(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::InvalidBinning(_) => CliError::Config(e.to_string()),
            SpectraError::Ensemble(inner) => inner.into(),
            _ => CliError::Contract(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Ensemble(inner) => inner.into(),
            _ => CliError::Contract(e.to_string()),
        }
    }
}

pub struct Outcome {
    pub text: String,
    /// Tolerance contracts that did not hold; the artifact is still written.
    pub failures: Vec<String>,
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut failures = Vec::new();
    let table = match cfg.command.as_str() {
        "spectrum" => spectrum(cfg, &mut failures)?,
        "moments" => moments(cfg, &mut failures)?,
        "laws" => laws(cfg)?,
        "partitions" => partitions(cfg)?,
        "convergence" => convergence(cfg, &mut failures)?,
        "coefficients" => coefficients(cfg)?,
        other => return Err(CliError::Config(format!("unknown command {other:?}"))),
    };
    Ok(Outcome { text: table.render(cfg), failures })
}

fn flag(cfg: &RunConfig, key: &str) -> bool {
    cfg.options.get(key).and_then(|v| v.as_bool()).unwrap_or(false)
}

fn graph(cfg: &RunConfig) -> Result<(&GraphSpec, Hypergraph), CliError> {
    let spec = cfg.graph.as_ref().ok_or_else(|| CliError::Config(format!("{} needs a graph", cfg.command)))?;
    Ok((spec, spec.build()?))
}

fn law(cfg: &RunConfig) -> Result<Option<LimitLaw>, CliError> {
    cfg.law.as_deref().map(|s| s.parse::<LimitLaw>().map_err(CliError::from)).transpose()
}

fn run_samples(ens: &Ensemble, cfg: &RunConfig, binning: Binning, k_max: u32, sink: impl FnMut(u64, &qsg_core::Spectrum)) -> Result<SampleRun, CliError> {
    let opts = RunOptions { samples: cfg.samples, seed: cfg.seed, first_index: 0, binning, k_max, solve: SolveOptions::default() };
    Ok(sampling::run(ens, &opts, sink)?)
}

fn identity_notes(t: &mut Table, run: &SampleRun, failures: &mut Vec<String>) {
    let bad = run.identity_failures();
    t.note("identity_failures", json!(bad));
    t.note("worst_second_moment_rel_err", json!(run.worst_second_rel_err()));
    t.note("worst_trace_over_tol", json!(run.worst_trace_ratio()));
    if bad > 0 {
        failures.push(format!("trace or second-moment identity failed on {bad} samples"));
    }
}

fn spectrum(cfg: &RunConfig, failures: &mut Vec<String>) -> Result<Table, CliError> {
    let (_, g) = graph(cfg)?;
    let law = law(cfg)?;
    let ens = Ensemble::new(&g, cfg.dist)?;
    let range = Binning::default_for(law.as_ref().unwrap_or(&LimitLaw::Gaussian));
    let binning = Binning::new(range.lo, range.hi, cfg.bins.unwrap_or(range.bins))?;
    if flag(cfg, "eigenvalues") {
        let mut t = Table::new(&["sample", "index", "eigenvalue"]);
        let mut rows = Vec::new();
        let run = run_samples(&ens, cfg, binning, 2, |i, s| {
            for (j, &x) in s.eigenvalues().iter().enumerate() {
                rows.push(vec![Cell::from(i), Cell::from(j), Cell::from(x)]);
            }
        })?;
        t.rows = rows;
        identity_notes(&mut t, &run, failures);
        return Ok(t);
    }
    let run = run_samples(&ens, cfg, binning, 2, |_, _| {})?;
    let dos = &run.dos;
    let mut cols = vec!["bin_left", "bin_right", "count", "density_estimate"];
    let law_cdf = match &law {
        Some(l) => {
            cols.push("law_density");
            Some(l.cdf_sorted(&binning.edges())?)
        }
        None => None,
    };
    let mut t = Table::new(&cols);
    let density = dos.density();
    for i in 0..binning.bins {
        let mut row = vec![
            Cell::from(binning.edge(i)),
            Cell::from(binning.edge(i + 1)),
            Cell::from(dos.counts[i]),
            Cell::from(density[i]),
        ];
        if let Some(c) = &law_cdf {
            row.push(Cell::from((c[i + 1] - c[i]) / binning.width()));
        }
        t.push(row);
    }
    t.note("samples", json!(dos.n_samples));
    t.note("eigenvalues", json!(dos.total()));
    t.note("underflow", json!(dos.underflow));
    t.note("overflow", json!(dos.overflow));
    if let Some(l) = &law {
        t.note("law", json!(l.name()));
        t.note("ks_distance", json!(ks_distance(dos, l)?));
    }
    identity_notes(&mut t, &run, failures);
    if dos.nan > 0 {
        failures.push(format!("{} eigenvalues were NaN", dos.nan));
    }
    Ok(t)
}

fn moments(cfg: &RunConfig, failures: &mut Vec<String>) -> Result<Table, CliError> {
    let (_, g) = graph(cfg)?;
    let law = law(cfg)?.unwrap_or(LimitLaw::Gaussian);
    let oracle = flag(cfg, "oracle");
    if cfg.samples == 0 && !oracle {
        return Err(CliError::Config("moments needs --samples > 0 or --oracle".into()));
    }
    let ens = Ensemble::new(&g, cfg.dist)?;
    let mut cols = vec!["k", "mean", "stderr", "limit_law_moment", "abs_error"];
    if oracle {
        cols.extend(["oracle_total", "oracle_d", "oracle_a", "oracle_b", "oracle_abs_error"]);
    }
    let mut t = Table::new(&cols);
    let estimates = if cfg.samples > 0 {
        let run = run_samples(&ens, cfg, Binning::default_for(&law), cfg.k_max, |_, _| {})?;
        identity_notes(&mut t, &run, failures);
        Some(estimate_expected_moments(&run.moment_rows))
    } else {
        None
    };
    for k in 0..=cfg.k_max {
        let m = law.moment(k as usize);
        let est = estimates.as_ref().map(|e| e[k as usize]);
        let mut row = vec![
            Cell::Int(k as i128),
            est.map(|e| e.mean).into(),
            est.map(|e| if cfg.samples > 1 { e.stderr } else { f64::NAN }).into(),
            Cell::from(m),
            est.map(|e| (e.mean - m).abs()).into(),
        ];
        if oracle {
            let b: MomentBreakdown = expected_moment(&g, cfg.dist, k as usize)?;
            row.extend([b.total, b.part_d, b.part_a, b.part_b, (b.total - m).abs()].map(Cell::from));
        }
        t.push(row);
    }
    t.note("law", json!(law.name()));
    Ok(t)
}

fn law_list(cfg: &RunConfig) -> Result<Vec<LimitLaw>, CliError> {
    let mut laws = vec![LimitLaw::Gaussian, LimitLaw::Semicircle, LimitLaw::Star];
    if let Some(l) = cfg.lambda {
        laws.push(LimitLaw::q_interp(l)?);
    }
    Ok(laws)
}

fn laws(cfg: &RunConfig) -> Result<Table, CliError> {
    let laws = law_list(cfg)?;
    let names: Vec<String> = laws.iter().map(|l| l.name()).collect();
    let mut t;
    if flag(cfg, "density") {
        let b = Binning::new(-4.0, 4.0, cfg.bins.unwrap_or(101))?;
        let mut cols = vec!["x"];
        cols.extend(names.iter().map(String::as_str));
        t = Table::new(&cols);
        for i in 0..b.bins {
            let x = 0.5 * (b.edge(i) + b.edge(i + 1));
            let mut row = vec![Cell::from(x)];
            row.extend(laws.iter().map(|l| Cell::from(l.density(x))));
            t.push(row);
        }
    } else {
        let mut cols = vec!["k"];
        cols.extend(names.iter().map(String::as_str));
        t = Table::new(&cols);
        for k in 0..=cfg.k_max {
            let mut row = vec![Cell::from(k)];
            row.extend(laws.iter().map(|l| Cell::from(l.moment(k as usize))));
            t.push(row);
        }
    }
    if let Some(l) = cfg.lambda {
        t.note("q", json!(q_of_lambda(l)));
    }
    Ok(t)
}

fn partitions(cfg: &RunConfig) -> Result<Table, CliError> {
    let k_max = cfg.k_max as usize;
    if k_max > MAX_ENUMERATED_K {
        return Err(CliError::Config(format!("k = {k_max} exceeds the enumeration limit {MAX_ENUMERATED_K}")));
    }
    let mut t = Table::new(&["k", "partitions", "noncrossing", "crossing_histogram"]);
    for k in (2..=k_max).step_by(2) {
        let hist = crossing_histogram(k).map_err(|e| CliError::Config(e.to_string()))?;
        let text: Vec<String> = hist.iter().map(u64::to_string).collect();
        t.push(vec![
            Cell::from(k),
            Cell::Text(double_factorial(k as i64 - 1).to_string()),
            Cell::Text(catalan(k as u64 / 2).to_string()),
            Cell::Text(text.join(" ")),
        ]);
    }
    Ok(t)
}

fn convergence(cfg: &RunConfig, failures: &mut Vec<String>) -> Result<Table, CliError> {
    let spec = cfg.graph.as_ref().ok_or_else(|| CliError::Config("convergence needs a family".into()))?;
    let range = cfg.n_range.ok_or_else(|| CliError::Config("convergence needs --n a:b:step".into()))?;
    let law = match law(cfg)? {
        Some(l) => l,
        None if matches!(spec, GraphSpec::Star { .. }) => LimitLaw::Star,
        None => LimitLaw::Gaussian,
    };
    let k = cfg.k_max as usize;
    let mut cols = vec!["n", "edges", "d_max", "d_max_over_e", "oracle_moment", "limit_law_moment", "abs_error", "error_over_rate"];
    if cfg.samples > 0 {
        cols.extend(["mean", "stderr", "mc_abs_error"]);
    }
    let mut t = Table::new(&cols);
    let m = law.moment(k);
    let mut errs = Vec::new();
    for n in range.values() {
        let g = spec.with_n(n).build()?;
        let rate = g.max_vertex_degree() as f64 / g.edge_count() as f64;
        let exact = expected_moment(&g, cfg.dist, k)?.total;
        let err = (exact - m).abs();
        errs.push(err);
        let mut row = vec![
            Cell::from(n),
            Cell::from(g.edge_count()),
            Cell::from(g.max_vertex_degree()),
            Cell::from(rate),
            Cell::from(exact),
            Cell::from(m),
            Cell::from(err),
            Cell::from(err / rate),
        ];
        if cfg.samples > 0 {
            let ens = Ensemble::new(&g, cfg.dist)?;
            let run = run_samples(&ens, cfg, Binning::default_for(&law), cfg.k_max, |_, _| {})?;
            if run.identity_failures() > 0 {
                failures.push(format!("identity check failed on {} samples at n = {n}", run.identity_failures()));
            }
            let e = estimate_expected_moments(&run.moment_rows)[k];
            row.extend([Cell::from(e.mean), Cell::from(e.stderr), Cell::from((e.mean - m).abs())]);
        }
        t.push(row);
    }
    t.note("law", json!(law.name()));
    t.note("k", json!(k));
    t.note("monotone", json!(errs.windows(2).all(|w| w[1] < w[0])));
    Ok(t)
}

fn string_label(p: &PauliString) -> String {
    (1..=p.n_sites())
        .filter_map(|s| match p.letter(s) {
            0 => None,
            a => Some(format!("{}{s}", ['I', 'X', 'Y', 'Z'][a as usize])),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn coefficients(cfg: &RunConfig) -> Result<Table, CliError> {
    let (_, g) = graph(cfg)?;
    let ens = Ensemble::new(&g, cfg.dist)?;
    let mut t = Table::new(&["sample", "term", "edge", "string", "coefficient"]);
    for i in 0..cfg.samples {
        let h = ens.draw(cfg.seed, i);
        for (j, term) in h.terms().iter().enumerate() {
            t.push(vec![
                Cell::from(i),
                Cell::from(j),
                Cell::from(term.edge + 1),
                Cell::Text(string_label(&term.string)),
                Cell::from(term.coeff),
            ]);
        }
    }
    Ok(t)
}
