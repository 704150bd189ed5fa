//! Batch front end: scans, verification suites and table export, with JSON
//! or CSV reports.
//!
//! Subcommands map one-to-one onto the library modules. Reports are written
//! as a single file (or to standard output); progress and diagnostics go to
//! standard error only. Identical configuration and seed produce
//! byte-identical reports. Exit status: 0 success, 1 verification failure,
//! 2 usage error.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use num::BigRational;
use serde::Serialize;

use crate::asymptotics::{
    self, boundary_integral, default_eps_grid, default_t_grid, petersson_flow_exponent,
    pole_model_classify, GrowthClass, RMatrix,
};
use crate::cone::{cone_membership, dual_character, is_primitive, Character, QuadForm};
use crate::cusp_tables::{cusp_form_table, kodaira_fact};
use crate::cyclic_rep::{enumerate_splittings, parse_rep};
use crate::reid_tai::{classify, scan, ClassifiedCase};
use crate::siegel::run_siegel_trials;
use crate::symplectic::run_relation_trials;

/// An inclusive integer range, written `a..b` or as a single value `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InclusiveRange {
    pub lo: u64,
    pub hi: u64,
}

impl FromStr for InclusiveRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| format!("invalid range bound {t:?}"))
        };
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if lo > hi {
            return Err(format!("empty range {s:?}"));
        }
        Ok(InclusiveRange { lo, hi })
    }
}

impl std::fmt::Display for InclusiveRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AsymptoticsModel {
    Flow,
    Boundary,
    Pole,
}

/// Command-line configuration; `run` consumes it and writes one report.
#[derive(Debug, Parser)]
#[command(name = "kuga-sing", version, about = "Canonical-singularity scans and verification suites for Kuga varieties")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Report destination; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: ReportFormat,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exhaustive Reid-Tai scan over inclusive ranges of g and n.
    RtScan {
        #[arg(long, default_value = "2..6")]
        g: InclusiveRange,
        #[arg(long, default_value = "1..4")]
        n: InclusiveRange,
    },
    /// Reid-Tai evaluation of a single representation at fixed (g, n).
    RtCheck {
        /// Representation label, e.g. V6+V1^2.
        #[arg(long)]
        rep: String,
        #[arg(long)]
        g: u64,
        #[arg(long)]
        n: u64,
    },
    /// Transvection relations and symplectic-condition checks on seeded
    /// random rational instances.
    SymplecticVerify {
        #[arg(long, default_value = "0")]
        seed: u64,
        /// Trials per value of g.
        #[arg(long, default_value = "1000")]
        trials: usize,
        #[arg(long, default_value = "2..3")]
        g: InclusiveRange,
    },
    /// Cocycle, metric and volume identities on random Siegel points.
    SiegelVerify {
        #[arg(long, default_value = "2..3")]
        g: InclusiveRange,
        /// Trials per value of g.
        #[arg(long, default_value = "500")]
        trials: usize,
        #[arg(long, default_value = "1e-9")]
        tol: f64,
        #[arg(long, default_value = "0")]
        seed: u64,
    },
    /// Boundary growth models: Petersson flow, annulus integral, or the
    /// radial pole-order trichotomy.
    Asymptotics {
        #[arg(long, value_enum)]
        model: AsymptoticsModel,
        /// flow: matrix dimension g'.
        #[arg(long, default_value = "2")]
        gprime: usize,
        /// flow: rank of the random psd direction.
        #[arg(long, default_value = "1")]
        rank: usize,
        /// flow: seed for the random direction.
        #[arg(long, default_value = "0")]
        seed: u64,
        /// boundary: log-power exponent a.
        #[arg(long, default_value = "0")]
        a: f64,
        /// boundary: smallest epsilon of the grid.
        #[arg(long, default_value = "1e-8")]
        eps: f64,
        /// boundary: outer radius R.
        #[arg(long, default_value = "0.5")]
        r: f64,
        /// pole: pole order nu.
        #[arg(long, default_value = "1")]
        nu: i64,
        /// pole: canonical multiple m.
        #[arg(long, default_value = "1")]
        m: i64,
    },
    /// Cone membership, rank, primitivity and dual character of an integer
    /// form given by its upper triangle.
    ConeCheck {
        /// Comma-separated upper-triangle coordinates, e.g. 1,0,0.
        #[arg(long)]
        form: String,
    },
    /// Cusp-form facts and weight bookkeeping for g in the given range.
    Tables {
        #[arg(long, default_value = "2..6")]
        g: InclusiveRange,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Rep(#[from] crate::cyclic_rep::RepError),
    #[error(transparent)]
    ReidTai(#[from] crate::reid_tai::ReidTaiError),
    #[error(transparent)]
    Cone(#[from] crate::cone::ConeError),
    #[error(transparent)]
    Table(#[from] crate::cusp_tables::TableError),
    #[error(transparent)]
    Asymptotics(#[from] crate::asymptotics::AsymptoticsError),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
}

/// A rendered report plus the verification verdict.
#[derive(Debug)]
pub struct Outcome {
    pub report: String,
    pub verified: bool,
}

/// Renders the report for `config` and writes it to the configured
/// destination. Returns the process exit code.
pub fn run(config: &RunConfig) -> i32 {
    match render(config) {
        Ok(outcome) => {
            let write_result = match &config.out {
                Some(path) => std::fs::write(path, &outcome.report).map_err(CliError::Io),
                None => {
                    use std::io::Write;
                    std::io::stdout()
                        .write_all(outcome.report.as_bytes())
                        .map_err(CliError::Io)
                }
            };
            if let Err(err) = write_result {
                eprintln!("error: {err}");
                return 2;
            }
            if outcome.verified {
                0
            } else {
                eprintln!("verification failed");
                1
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            2
        }
    }
}

/// Pure part of `run`: produces the report body and the verdict.
pub fn render(config: &RunConfig) -> Result<Outcome, CliError> {
    match &config.command {
        Command::RtScan { g, n } => rt_scan(config, *g, *n),
        Command::RtCheck { rep, g, n } => rt_check(config, rep, *g, *n),
        Command::SymplecticVerify { seed, trials, g } => symplectic_verify(config, *seed, *trials, *g),
        Command::SiegelVerify { g, trials, tol, seed } => {
            siegel_verify(config, *g, *trials, *tol, *seed)
        }
        Command::Asymptotics {
            model,
            gprime,
            rank,
            seed,
            a,
            eps,
            r,
            nu,
            m,
        } => asymptotics_report(config, *model, *gprime, *rank, *seed, *a, *eps, *r, *nu, *m),
        Command::ConeCheck { form } => cone_check(config, form),
        Command::Tables { g } => tables(config, *g),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut body = serde_json::to_string_pretty(value).expect("report types serialize");
    body.push('\n');
    body
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let encoded: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
        out.push_str(&encoded.join(","));
        out.push('\n');
    }
    out
}

fn case_csv_row(kind: &str, case: &ClassifiedCase) -> Vec<String> {
    let v_angles = case
        .v_angles
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(";");
    vec![
        kind.to_string(),
        case.g.to_string(),
        case.n.to_string(),
        case.rep.label(),
        v_angles,
        case.rt.to_string(),
        case.is_canonical_cert.to_string(),
        case.is_quasi_reflection.to_string(),
    ]
}

fn rt_scan(config: &RunConfig, g: InclusiveRange, n: InclusiveRange) -> Result<Outcome, CliError> {
    eprintln!("rt-scan: g {g}, n {n}, {} workers", crate::reid_tai::worker_count());
    let report = scan(g.lo, g.hi, n.lo, n.hi)?;
    let verified = report.quasi_reflections.is_empty();

    #[derive(Serialize)]
    struct ScanDoc<'a> {
        g_min: u64,
        g_max: u64,
        n_min: u64,
        n_max: u64,
        exceptional: &'a [ClassifiedCase],
        quasi_reflections: &'a [ClassifiedCase],
    }

    let body = match config.format {
        ReportFormat::Json => to_json(&ScanDoc {
            g_min: g.lo,
            g_max: g.hi,
            n_min: n.lo,
            n_max: n.hi,
            exceptional: &report.sub_one,
            quasi_reflections: &report.quasi_reflections,
        }),
        ReportFormat::Csv => {
            let mut rows = Vec::new();
            for case in &report.sub_one {
                rows.push(case_csv_row("exceptional", case));
            }
            for case in &report.quasi_reflections {
                rows.push(case_csv_row("quasi_reflection", case));
            }
            csv_table(
                &["kind", "g", "n", "rep", "v_angles", "rt", "canonical", "quasi_reflection"],
                &rows,
            )
        }
    };
    Ok(Outcome { report: body, verified })
}

fn rt_check(config: &RunConfig, rep_label: &str, g: u64, n: u64) -> Result<Outcome, CliError> {
    let rep = parse_rep(rep_label)?;
    if rep.two_g() != 2 * g {
        return Err(CliError::Config(format!(
            "--g {g} does not match the dimension of {rep_label} (two_g = {})",
            rep.two_g()
        )));
    }
    if n < 1 {
        return Err(CliError::Config("--n must be at least 1".to_string()));
    }
    let mut cases = Vec::new();
    for splitting in enumerate_splittings(&rep) {
        cases.push(classify(g, n, &rep, &splitting)?);
    }
    let rt_min = cases
        .iter()
        .map(|c| c.rt.clone())
        .min()
        .ok_or_else(|| CliError::Config("representation has no splittings".to_string()))?;

    #[derive(Serialize)]
    struct CheckDoc<'a> {
        rep: String,
        g: u64,
        n: u64,
        #[serde(serialize_with = "ser_rational")]
        rt: BigRational,
        all_canonical_certified: bool,
        cases: &'a [ClassifiedCase],
    }

    fn ser_rational<S: serde::Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    let all_cert = cases.iter().all(|c| c.is_canonical_cert);
    let body = match config.format {
        ReportFormat::Json => to_json(&CheckDoc {
            rep: rep.label(),
            g,
            n,
            rt: rt_min,
            all_canonical_certified: all_cert,
            cases: &cases,
        }),
        ReportFormat::Csv => {
            let rows: Vec<Vec<String>> =
                cases.iter().map(|c| case_csv_row("case", c)).collect();
            csv_table(
                &["kind", "g", "n", "rep", "v_angles", "rt", "canonical", "quasi_reflection"],
                &rows,
            )
        }
    };
    Ok(Outcome { report: body, verified: true })
}

fn symplectic_verify(
    config: &RunConfig,
    seed: u64,
    trials: usize,
    g: InclusiveRange,
) -> Result<Outcome, CliError> {
    if g.lo < 2 {
        return Err(CliError::Config("symplectic-verify needs g >= 2".to_string()));
    }
    let mut reports = Vec::new();
    for gv in g.lo..=g.hi {
        eprintln!("symplectic-verify: g = {gv}, {trials} trials");
        reports.push(run_relation_trials(gv as usize, trials, seed));
    }
    let verified = reports.iter().all(|r| r.all_passed());
    let body = match config.format {
        ReportFormat::Json => to_json(&reports),
        ReportFormat::Csv => {
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    vec![
                        r.g.to_string(),
                        r.trials.to_string(),
                        r.seed.to_string(),
                        r.relations_ok.to_string(),
                        r.symplectic_ok.to_string(),
                        r.all_passed().to_string(),
                    ]
                })
                .collect();
            csv_table(&["g", "trials", "seed", "relations_ok", "symplectic_ok", "passed"], &rows)
        }
    };
    Ok(Outcome { report: body, verified })
}

fn siegel_verify(
    config: &RunConfig,
    g: InclusiveRange,
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<Outcome, CliError> {
    if g.lo < 2 {
        return Err(CliError::Config("siegel-verify needs g >= 2".to_string()));
    }
    if tol <= 0.0 || tol.is_nan() {
        return Err(CliError::Config("--tol must be positive".to_string()));
    }
    let mut reports = Vec::new();
    for gv in g.lo..=g.hi {
        eprintln!("siegel-verify: g = {gv}, {trials} trials, tol {tol:e}");
        reports.push(run_siegel_trials(gv as usize, trials, tol, seed));
    }
    let verified = reports.iter().all(|r| r.all_passed());
    let body = match config.format {
        ReportFormat::Json => to_json(&reports),
        ReportFormat::Csv => {
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    vec![
                        r.g.to_string(),
                        r.trials.to_string(),
                        r.seed.to_string(),
                        format!("{:e}", r.tol),
                        format!("{:e}", r.max_cocycle_err),
                        format!("{:e}", r.max_metric_err),
                        format!("{:e}", r.max_volume_err),
                        r.failures.to_string(),
                        r.all_passed().to_string(),
                    ]
                })
                .collect();
            csv_table(
                &["g", "trials", "seed", "tol", "max_cocycle_err", "max_metric_err", "max_volume_err", "failures", "passed"],
                &rows,
            )
        }
    };
    Ok(Outcome { report: body, verified })
}

/// Rows of the shared asymptotics CSV schema.
#[derive(Serialize)]
struct AsymptoticsRow {
    eps: f64,
    integral: f64,
    class: String,
    fitted_exponent: Option<f64>,
}

fn asymptotics_rows_to_csv(rows: &[AsymptoticsRow]) -> String {
    let encoded: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                format!("{:e}", r.eps),
                format!("{:e}", r.integral),
                r.class.clone(),
                r.fitted_exponent.map(|e| format!("{e}")).unwrap_or_default(),
            ]
        })
        .collect();
    csv_table(&["eps", "integral", "class", "fitted_exponent"], &encoded)
}

#[allow(clippy::too_many_arguments)]
fn asymptotics_report(
    config: &RunConfig,
    model: AsymptoticsModel,
    gprime: usize,
    rank: usize,
    seed: u64,
    a: f64,
    eps: f64,
    r: f64,
    nu: i64,
    m: i64,
) -> Result<Outcome, CliError> {
    #[derive(Serialize)]
    struct AsymptoticsDoc {
        model: String,
        verified: bool,
        fitted_exponent: Option<f64>,
        class: Option<String>,
        max_disagreement: Option<f64>,
        rows: Vec<AsymptoticsRow>,
    }

    let doc = match model {
        AsymptoticsModel::Flow => {
            if rank > gprime {
                return Err(CliError::Config(format!(
                    "--rank {rank} exceeds --gprime {gprime}"
                )));
            }
            let q = asymptotics::seeded_psd_matrix(gprime, rank, seed);
            let im0 = RMatrix::identity(gprime, gprime);
            let t_grid = default_t_grid();
            let exponent = petersson_flow_exponent(&im0, &q, &t_grid)?;
            let rows: Vec<AsymptoticsRow> = t_grid
                .iter()
                .map(|&t| AsymptoticsRow {
                    eps: t,
                    integral: (&im0 + &q * t).determinant(),
                    class: "power".to_string(),
                    fitted_exponent: Some(exponent),
                })
                .collect();
            AsymptoticsDoc {
                model: "flow".to_string(),
                verified: (exponent - rank as f64).abs() <= 0.05,
                fitted_exponent: Some(exponent),
                class: None,
                max_disagreement: None,
                rows,
            }
        }
        AsymptoticsModel::Boundary => {
            if !(0.0 < eps && eps < r && r < 1.0) {
                return Err(CliError::Config(format!(
                    "boundary model needs 0 < eps < R < 1, got eps={eps:e}, R={r:e}"
                )));
            }
            let mut grid = Vec::new();
            let mut x = r / 2.0;
            while x >= eps {
                grid.push(x);
                x /= 2.0;
            }
            let mut max_disagreement = 0.0f64;
            let rows: Vec<AsymptoticsRow> = grid
                .iter()
                .map(|&e| {
                    let b = boundary_integral(a, e, r)?;
                    max_disagreement = max_disagreement.max(b.disagreement());
                    Ok(AsymptoticsRow {
                        eps: e,
                        integral: b.closed_form,
                        class: String::new(),
                        fitted_exponent: None,
                    })
                })
                .collect::<Result<_, CliError>>()?;
            AsymptoticsDoc {
                model: "boundary".to_string(),
                verified: max_disagreement <= 1e-6,
                fitted_exponent: None,
                class: None,
                max_disagreement: Some(max_disagreement),
                rows,
            }
        }
        AsymptoticsModel::Pole => {
            let classification = pole_model_classify(nu, m, &default_eps_grid())?;
            let expected = match nu.cmp(&m) {
                std::cmp::Ordering::Less => GrowthClass::Bounded.severity(),
                std::cmp::Ordering::Equal => GrowthClass::Logarithmic.severity(),
                std::cmp::Ordering::Greater => GrowthClass::Power { exponent: 0.0 }.severity(),
            };
            let fitted = match classification.class {
                GrowthClass::Power { exponent } => Some(exponent),
                _ => None,
            };
            let label = classification.class.label().to_string();
            let rows: Vec<AsymptoticsRow> = classification
                .samples
                .iter()
                .map(|&(e, v)| AsymptoticsRow {
                    eps: e,
                    integral: v,
                    class: label.clone(),
                    fitted_exponent: fitted,
                })
                .collect();
            AsymptoticsDoc {
                model: "pole".to_string(),
                verified: classification.class.severity() == expected,
                fitted_exponent: fitted,
                class: Some(label),
                max_disagreement: None,
                rows,
            }
        }
    };

    let verified = doc.verified;
    let body = match config.format {
        ReportFormat::Json => to_json(&doc),
        ReportFormat::Csv => asymptotics_rows_to_csv(&doc.rows),
    };
    Ok(Outcome { report: body, verified })
}

fn cone_check(config: &RunConfig, form: &str) -> Result<Outcome, CliError> {
    let coords: Vec<i64> = form
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| CliError::Config(format!("invalid form coordinate {t:?}")))
        })
        .collect::<Result<_, _>>()?;
    let q = QuadForm::new(coords)?;
    let membership = cone_membership(&q);
    let primitive = if q.is_zero() { false } else { is_primitive(&q)? };
    let chi: Option<Character> = if primitive {
        Some(dual_character(&q)?)
    } else {
        None
    };
    let pairing = chi.as_ref().map(|c| c.pairing(&q).expect("same length"));

    #[derive(Serialize)]
    struct ConeDoc<'a> {
        form: &'a [i64],
        g_prime: usize,
        membership: crate::cone::ConeMembership,
        primitive: bool,
        dual_character: Option<&'a [i64]>,
        pairing: Option<i64>,
    }

    let doc = ConeDoc {
        form: q.coords(),
        g_prime: q.g_prime(),
        membership,
        primitive,
        dual_character: chi.as_ref().map(|c| c.coords.as_slice()),
        pairing,
    };
    let verified = pairing.map(|p| p == 1).unwrap_or(true);
    let body = match config.format {
        ReportFormat::Json => to_json(&doc),
        ReportFormat::Csv => {
            let join = |v: &[i64]| {
                v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";")
            };
            let row = vec![
                join(doc.form),
                doc.g_prime.to_string(),
                format!("{:?}", membership.position).to_lowercase(),
                membership.rank.to_string(),
                primitive.to_string(),
                doc.dual_character.map(join).unwrap_or_default(),
                pairing.map(|p| p.to_string()).unwrap_or_default(),
            ];
            csv_table(
                &["form", "g_prime", "position", "rank", "primitive", "dual_character", "pairing"],
                &[row],
            )
        }
    };
    Ok(Outcome { report: body, verified })
}

fn tables(config: &RunConfig, g: InclusiveRange) -> Result<Outcome, CliError> {
    #[derive(Serialize)]
    struct TableRow {
        fact: crate::cusp_tables::CuspFormFact,
        kodaira: crate::cusp_tables::KodairaFact,
    }

    let mut rows = Vec::new();
    for gv in g.lo..=g.hi {
        let kodaira = kodaira_fact(gv as i64)?;
        let fact = cusp_form_table()
            .into_iter()
            .find(|f| u64::from(f.g) == gv)
            .expect("kodaira_fact succeeded, so the row exists");
        rows.push(TableRow { fact, kodaira });
    }
    let body = match config.format {
        ReportFormat::Json => to_json(&rows),
        ReportFormat::Csv => {
            let encoded: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.fact.g.to_string(),
                        r.fact.weight.to_string(),
                        r.fact.dim.lower_bound().to_string(),
                        r.fact.dim.is_exact().to_string(),
                        r.fact.is_minimal_weight.to_string(),
                        r.kodaira.min_n_for_nonneg_kodaira.to_string(),
                        r.fact.source.clone(),
                    ]
                })
                .collect();
            csv_table(
                &["g", "weight", "dim_lower_bound", "dim_is_exact", "is_minimal_weight", "min_n_for_nonneg_kodaira", "source"],
                &encoded,
            )
        }
    };
    Ok(Outcome { report: body, verified: true })
}
