//! Sweeps over the manufactured problem, corrector scaling studies and their
//! CSV / markdown output.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cfvm::{run_manufactured, Scheme, SimConfig};
use crate::correctors::{scaling_slope, CorrectorEval, ScalingQuantity, ScalingStudy};
use crate::error::{LayerError, Result};
use crate::mms;

/// Grid sizes of the reproduction sweep.
pub const TABLE_GRIDS: [usize; 3] = [10, 20, 30];
/// Viscosities of the reproduction sweep.
pub const TABLE_EPS: [f64; 5] = [1e-2, 1e-3, 1e-5, 1e-6, 1e-7];
/// Viscosities of the scaling studies.
pub const SCALING_EPS: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Markdown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    Blowup,
}

impl RowStatus {
    pub fn name(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Blowup => "blowup",
        }
    }
}

/// One run of the manufactured problem at `t`, with every parameter needed to
/// repeat it. Error fields are `None` exactly when the run blew up.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub n: usize,
    pub t: f64,
    pub eps: f64,
    pub scheme: Scheme,
    pub vel_l2: Option<f64>,
    pub p_l2: Option<f64>,
    pub dt: f64,
    pub theta: f64,
    pub alpha: f64,
    pub status: RowStatus,
    pub wall_clock_s: f64,
}

impl ExperimentRow {
    pub fn blew_up(&self) -> bool {
        self.status == RowStatus::Blowup
    }

    /// Configuration that reproduces this row, with solver settings from `base`.
    pub fn config(&self, base: &SimConfig) -> SimConfig {
        SimConfig {
            eps: self.eps,
            alpha: self.alpha,
            dt: self.dt,
            t_end: self.t,
            theta: self.theta,
            scheme: self.scheme,
            ..*base
        }
    }
}

/// Runs one scheme on the `n^3` manufactured grid. Solver failures are
/// logged and recorded as blow-ups.
pub fn run_one(n: usize, cfg: &SimConfig) -> Result<ExperimentRow> {
    cfg.validate()?;
    let g = mms::grid(n)?;
    let start = Instant::now();
    let outcome = run_manufactured(cfg, &g);
    let wall_clock_s = start.elapsed().as_secs_f64();
    let (vel_l2, p_l2, status) = match outcome {
        Ok(res) if !res.blew_up() => (res.final_velocity_error(), res.final_pressure_error(), RowStatus::Ok),
        Ok(res) => {
            warn!("{} N={n} eps={:e}: blow-up ({:?})", cfg.scheme, cfg.eps, res.status);
            (None, None, RowStatus::Blowup)
        }
        Err(e) => {
            warn!("{} N={n} eps={:e}: {e}", cfg.scheme, cfg.eps);
            (None, None, RowStatus::Blowup)
        }
    };
    Ok(ExperimentRow {
        n,
        t: cfg.t_end,
        eps: cfg.eps,
        scheme: cfg.scheme,
        vel_l2,
        p_l2,
        dt: cfg.dt,
        theta: cfg.theta,
        alpha: cfg.alpha,
        status,
        wall_clock_s,
    })
}

/// Cross product of grids, viscosities and schemes, ordered by viscosity, then
/// grid, then scheme. Runs execute on `jobs` threads (all cores when `None`).
pub fn run_table(
    grids: &[usize],
    eps_list: &[f64],
    schemes: &[Scheme],
    base: &SimConfig,
    jobs: Option<usize>,
) -> Result<Vec<ExperimentRow>> {
    if grids.is_empty() || eps_list.is_empty() || schemes.is_empty() {
        return Err(LayerError::InvalidConfig("grid, eps and scheme lists must be nonempty".into()));
    }
    let mut cases = Vec::new();
    for &eps in eps_list {
        for &n in grids {
            mms::grid(n)?;
            for &scheme in schemes {
                let cfg = SimConfig { eps, scheme, ..*base };
                cfg.validate()?;
                cases.push((n, cfg));
            }
        }
    }
    let sweep = || cases.par_iter().map(|(n, cfg)| run_one(*n, cfg)).collect::<Result<Vec<_>>>();
    let rows = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| LayerError::InvalidConfig(format!("thread pool: {e}")))?
            .install(sweep)?,
        None => sweep()?,
    };
    info!("sweep finished: {} rows, {} blow-ups", rows.len(), rows.iter().filter(|r| r.blew_up()).count());
    Ok(rows)
}

/// Fits the power law of `quantity` in `eps` at time `t`.
pub fn run_scaling_study(eps_list: &[f64], quantity: ScalingQuantity, t: f64, alpha: f64) -> Result<ScalingStudy> {
    let first =
        *eps_list.first().ok_or_else(|| LayerError::InvalidConfig("scaling study needs a nonempty eps list".into()))?;
    let ce = CorrectorEval::new(first, alpha)?;
    scaling_slope(&ce, quantity, eps_list, t)
}

/// Which measured quantity a comparison refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Velocity,
    Pressure,
}

/// Reference errors at `t = 1`: `(N, eps, [cfvm velocity, nfvm velocity], [cfvm pressure, nfvm pressure])`.
pub const REFERENCE_ERRORS: [(usize, f64, [f64; 2], [f64; 2]); 15] = [
    (10, 1e-2, [0.03206, 0.12836], [0.02493, 0.03178]),
    (20, 1e-2, [0.00634, 0.03893], [0.00511, 0.00920]),
    (30, 1e-2, [0.00269, 0.02553], [0.00224, 0.00533]),
    (10, 1e-3, [0.092294, 0.22647], [0.02684, 0.02771]),
    (20, 1e-3, [0.033726, 0.15753], [0.00553, 0.00907]),
    (30, 1e-3, [0.01331, 0.08020], [0.002381, 0.00590]),
    (10, 1e-5, [1.61660e3, 0.04487], [1.48996e2, 0.02602]),
    (20, 1e-5, [0.08741, 0.010303], [0.00774, 0.00539]),
    (30, 1e-5, [0.11722, 0.00460], [0.00655, 0.00238]),
    (10, 1e-6, [1.10612e10, 0.044901], [1.01953e16, 0.026016]),
    (20, 1e-6, [4.42881e6, 0.01032], [2.83861e5, 0.00539]),
    (30, 1e-6, [1.12960e3, 0.00442], [58.98117, 0.00238]),
    (10, 1e-7, [5.26218e62, 0.04490], [4.85027e61, 0.02601]),
    (20, 1e-7, [1.16428e29, 0.01032], [7.46273e27, 0.005394]),
    (30, 1e-7, [6.72495e17, 0.00443], [3.51186e16, 0.00238]),
];

/// Reference value for one cell, if tabulated.
pub fn reference_error(n: usize, eps: f64, scheme: Scheme, kind: ErrorKind) -> Option<f64> {
    let col = match scheme {
        Scheme::Cfvm => 0,
        Scheme::Nfvm => 1,
    };
    REFERENCE_ERRORS.iter().find(|(rn, re, _, _)| *rn == n && (re / eps - 1.0).abs() < 1e-9).map(|(_, _, vel, p)| {
        match kind {
            ErrorKind::Velocity => vel[col],
            ErrorKind::Pressure => p[col],
        }
    })
}

/// Agreement thresholds against the reference errors. Cells whose reference
/// exceeds `blowup_reference` are divergent runs and only need to land within
/// `blowup_decades` orders of magnitude below it (or blow up); other cells
/// must agree within a factor `stable_factor`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonPolicy {
    pub stable_factor: f64,
    pub blowup_reference: f64,
    pub blowup_decades: f64,
}

impl Default for ComparisonPolicy {
    fn default() -> Self {
        Self { stable_factor: 3.0, blowup_reference: 10.0, blowup_decades: 1.0 }
    }
}

impl ComparisonPolicy {
    pub fn agrees(&self, measured: Option<f64>, reference: f64) -> bool {
        if reference > self.blowup_reference {
            return match measured {
                None => true,
                Some(v) => v >= reference * 10f64.powf(-self.blowup_decades),
            };
        }
        match measured {
            None => false,
            Some(v) => v >= reference / self.stable_factor && v <= reference * self.stable_factor,
        }
    }
}

/// A measured error next to its reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub n: usize,
    pub eps: f64,
    pub scheme: Scheme,
    pub kind: ErrorKind,
    pub measured: Option<f64>,
    pub reference: f64,
    pub agrees: bool,
}

/// Compares every row that has a reference cell, for both error kinds.
pub fn compare(rows: &[ExperimentRow], policy: &ComparisonPolicy) -> Vec<Comparison> {
    let mut out = Vec::new();
    for r in rows {
        for (kind, measured) in [(ErrorKind::Velocity, r.vel_l2), (ErrorKind::Pressure, r.p_l2)] {
            if let Some(reference) = reference_error(r.n, r.eps, r.scheme, kind) {
                out.push(Comparison {
                    n: r.n,
                    eps: r.eps,
                    scheme: r.scheme,
                    kind,
                    measured,
                    reference,
                    agrees: policy.agrees(measured, reference),
                });
            }
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    #[serde(rename = "N")]
    n: usize,
    t: f64,
    eps: f64,
    scheme: String,
    vel_l2: Option<f64>,
    p_l2: Option<f64>,
    dt: f64,
    theta: f64,
    alpha: f64,
    status: String,
    wall_clock_s: f64,
}

impl From<&ExperimentRow> for CsvRow {
    fn from(r: &ExperimentRow) -> Self {
        Self {
            n: r.n,
            t: r.t,
            eps: r.eps,
            scheme: r.scheme.name().into(),
            vel_l2: r.vel_l2,
            p_l2: r.p_l2,
            dt: r.dt,
            theta: r.theta,
            alpha: r.alpha,
            status: r.status.name().into(),
            wall_clock_s: r.wall_clock_s,
        }
    }
}

impl TryFrom<CsvRow> for ExperimentRow {
    type Error = LayerError;

    fn try_from(c: CsvRow) -> Result<Self> {
        let scheme = Scheme::parse(&c.scheme)
            .ok_or_else(|| LayerError::InvalidConfig(format!("unknown scheme `{}`", c.scheme)))?;
        let status = match c.status.as_str() {
            "ok" => RowStatus::Ok,
            "blowup" => RowStatus::Blowup,
            other => return Err(LayerError::InvalidConfig(format!("unknown status `{other}`"))),
        };
        Ok(Self {
            n: c.n,
            t: c.t,
            eps: c.eps,
            scheme,
            vel_l2: c.vel_l2,
            p_l2: c.p_l2,
            dt: c.dt,
            theta: c.theta,
            alpha: c.alpha,
            status,
            wall_clock_s: c.wall_clock_s,
        })
    }
}

fn to_csv(rows: &[ExperimentRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(CsvRow::from(r))?;
    }
    let bytes = w.into_inner().map_err(|e| LayerError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Inverse of the CSV rendering.
pub fn parse_csv(text: &str) -> Result<Vec<ExperimentRow>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    rd.deserialize::<CsvRow>().map(|rec| ExperimentRow::try_from(rec?)).collect()
}

fn fmt_error(v: Option<f64>) -> String {
    match v {
        None => "BLOWUP".into(),
        Some(x) if (1e-3..1e3).contains(&x.abs()) => format!("{x:.5}"),
        Some(x) => format!("{x:.5e}"),
    }
}

fn to_markdown(rows: &[ExperimentRow]) -> String {
    // (eps, n, t) blocks in first-seen order
    let mut keys: Vec<(f64, usize, f64)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.eps, r.n, r.t)) {
            keys.push((r.eps, r.n, r.t));
        }
    }
    let cell = |key: &(f64, usize, f64), scheme: Scheme, kind: ErrorKind| -> String {
        rows.iter()
            .find(|r| (r.eps, r.n, r.t) == *key && r.scheme == scheme)
            .map(|r| {
                fmt_error(match kind {
                    ErrorKind::Velocity => r.vel_l2,
                    ErrorKind::Pressure => r.p_l2,
                })
            })
            .unwrap_or_else(|| "-".into())
    };
    let mut out = String::new();
    for (title, kind) in [("Velocity L2 error", ErrorKind::Velocity), ("Pressure L2 error", ErrorKind::Pressure)] {
        let _ = writeln!(out, "### {title}\n");
        let _ = writeln!(out, "| N=M=L | t | eps | CFVM | NFVM |");
        let _ = writeln!(out, "|---|---|---|---|---|");
        for key in &keys {
            let _ = writeln!(
                out,
                "| {} | {} | {:e} | {} | {} |",
                key.1,
                key.2,
                key.0,
                cell(key, Scheme::Cfvm, kind),
                cell(key, Scheme::Nfvm, kind)
            );
        }
        out.push('\n');
    }
    let mut params: Vec<(f64, f64, f64)> = Vec::new();
    for r in rows {
        if !params.contains(&(r.dt, r.theta, r.alpha)) {
            params.push((r.dt, r.theta, r.alpha));
        }
    }
    for (dt, theta, alpha) in params {
        let _ = writeln!(out, "Parameters: dt = {dt}, theta = {theta}, alpha = {alpha}");
    }
    out
}

/// Renders rows in the requested format.
pub fn render(rows: &[ExperimentRow], format: OutputFormat) -> Result<String> {
    if rows.is_empty() {
        return Err(LayerError::InvalidConfig("nothing to emit: no rows".into()));
    }
    match format {
        OutputFormat::Csv => to_csv(rows),
        OutputFormat::Markdown => Ok(to_markdown(rows)),
    }
}

/// Writes rows to `path`.
pub fn emit(rows: &[ExperimentRow], format: OutputFormat, path: &Path) -> Result<()> {
    let text = render(rows, format)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// CSV of scaling studies: one line per (quantity, eps).
pub fn render_scaling(studies: &[ScalingStudy]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["quantity", "eps", "norm", "slope", "expected_slope"])?;
    for s in studies {
        for (eps, norm) in s.eps.iter().zip(&s.norms) {
            w.write_record([
                s.quantity.name().to_string(),
                eps.to_string(),
                norm.to_string(),
                s.slope.to_string(),
                s.quantity.expected_exponent().to_string(),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| LayerError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(status: RowStatus) -> ExperimentRow {
        let err = |v| (status == RowStatus::Ok).then_some(v);
        ExperimentRow {
            n: 10,
            t: 1.0,
            eps: 1e-6,
            scheme: Scheme::Cfvm,
            vel_l2: err(0.1234567890123),
            p_l2: err(3.3e-17),
            dt: 1e-2,
            theta: 1.0,
            alpha: 1.0,
            status,
            wall_clock_s: 0.25,
        }
    }

    #[test]
    fn one_row_gives_header_and_one_line() {
        let text = render(&[row(RowStatus::Ok)], OutputFormat::Csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "N,t,eps,scheme,vel_l2,p_l2,dt,theta,alpha,status,wall_clock_s");
    }

    #[test]
    fn blowup_row_has_empty_errors() {
        let text = render(&[row(RowStatus::Blowup)], OutputFormat::Csv).unwrap();
        let fields: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(fields[4], "");
        assert_eq!(fields[5], "");
        assert_eq!(fields[9], "blowup");
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let rows = vec![row(RowStatus::Ok), row(RowStatus::Blowup)];
        let back = parse_csv(&render(&rows, OutputFormat::Csv).unwrap()).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn empty_rows_are_rejected() {
        assert!(render(&[], OutputFormat::Csv).is_err());
    }

    #[test]
    fn markdown_has_both_tables() {
        let md = render(&[row(RowStatus::Blowup)], OutputFormat::Markdown).unwrap();
        assert!(md.contains("| N=M=L | t | eps | CFVM | NFVM |"));
        assert!(md.contains("| 10 | 1 | 1e-6 | BLOWUP | - |"));
        assert_eq!(md.matches("###").count(), 2);
    }

    #[test]
    fn reference_lookup_and_policy() {
        assert_eq!(reference_error(20, 1e-2, Scheme::Cfvm, ErrorKind::Velocity), Some(0.00634));
        assert_eq!(reference_error(30, 1e-6, Scheme::Nfvm, ErrorKind::Pressure), Some(0.00238));
        assert_eq!(reference_error(40, 1e-6, Scheme::Nfvm, ErrorKind::Pressure), None);
        let p = ComparisonPolicy::default();
        assert!(p.agrees(Some(0.02), 0.0449));
        assert!(!p.agrees(Some(0.2), 0.0449));
        assert!(!p.agrees(None, 0.0449));
        assert!(p.agrees(None, 1.1e10));
        assert!(p.agrees(Some(2e9), 1.1e10));
        assert!(!p.agrees(Some(0.03), 1.1e10));
    }

    #[test]
    fn empty_scaling_list_is_an_error() {
        assert!(run_scaling_study(&[], ScalingQuantity::Dphi3DtL2, 1.0, 1.0).is_err());
    }

    #[test]
    fn scaling_slopes_match_exponents() {
        for q in [ScalingQuantity::Dphi3DtL2, ScalingQuantity::ZEpsD2phi3L2] {
            let s = run_scaling_study(&SCALING_EPS, q, 1.0, 1.0).unwrap();
            assert!((s.slope - q.expected_exponent()).abs() < 0.1, "{}: {}", q.name(), s.slope);
        }
    }

    #[test]
    fn sweep_orders_rows_and_echoes_parameters() {
        let base = SimConfig { t_end: 0.05, ..SimConfig::default() };
        let rows = run_table(&[4, 5], &[1e-2], &[Scheme::Cfvm, Scheme::Nfvm], &base, Some(2)).unwrap();
        let order: Vec<(usize, Scheme)> = rows.iter().map(|r| (r.n, r.scheme)).collect();
        assert_eq!(order, vec![(4, Scheme::Cfvm), (4, Scheme::Nfvm), (5, Scheme::Cfvm), (5, Scheme::Nfvm)]);
        assert!(rows.iter().all(|r| r.t == 0.05 && r.dt == 1e-2 && r.status == RowStatus::Ok));
        assert!(run_table(&[2], &[1e-2], &[Scheme::Cfvm], &base, None).is_err());
    }
}
