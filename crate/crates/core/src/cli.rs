//! Command-line front end. Every subcommand validates its flags, computes,
//! and writes one CSV table or one JSON object to `--out` (or stdout).

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::correlations::{default_operators, tcf_reports, TcfOptions};
use crate::equilibrium::{default_bins, default_tolerance, dimension_estimate, select_equilibrium_subspace};
use crate::pauli::{random_error_family, LocalOperator};
use crate::qec::{
    build_recovery, check_completeness, fixtures, kl_check_basis, kl_check_random, round_trip_residual, CodeSpace,
    ErrorChannel, KLReport, KL_TOLERANCE,
};
use crate::thermo::{bulk_free_energy, entropy_density, partition_function_exact, ThermoParams};
use crate::xx0::full_spectrum;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "xx0-qec",
    version,
    about = "Exact XX0 chain thermodynamics and error-correction checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormArg {
    Basis,
    Random,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fixture {
    /// `span{|000>, |111>}` under `{Id, X1, X2, X3}/2`
    RepetitionX,
    /// `span{|000>, |111>}` under `{Id, Z1}/sqrt2`
    RepetitionZ,
}

#[derive(Debug, clap::Args)]
pub struct Output {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// All 2^n eigenstates with their momentum labels and energies.
    Spectrum {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        h: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        output: Output,
    },
    /// Finite-n free energy against the bulk value.
    Thermo {
        #[arg(long = "T", allow_hyphen_values = true)]
        temperature: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        h: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        output: Output,
    },
    /// Select the equilibrium subspace.
    Equilibrium {
        #[arg(long)]
        n: usize,
        #[arg(long = "T", allow_hyphen_values = true)]
        temperature: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        h: f64,
        /// Bin count; floor(n/4) when absent.
        #[arg(long)]
        bins: Option<usize>,
        /// L1 tolerance; 0.15 * sqrt(8/n) when absent.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Correlation functions over the equilibrium subspace for several n.
    TcfScan {
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long = "T", allow_hyphen_values = true)]
        temperature: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        h: f64,
        /// Comma-separated operators such as `Z1,X1 X2`.
        #[arg(long, value_delimiter = ',')]
        ops: Option<Vec<String>>,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 32)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Knill-Laflamme check on the equilibrium subspace or a fixture.
    QecCheck {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "T", default_value_t = 1.0, allow_hyphen_values = true)]
        temperature: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        h: f64,
        #[arg(long)]
        bins: Option<usize>,
        /// Selection tolerance of the equilibrium subspace.
        #[arg(long)]
        tol: Option<f64>,
        /// Pass/fail threshold on the KL violation.
        #[arg(long, default_value_t = KL_TOLERANCE)]
        kl_tol: f64,
        #[arg(long, default_value_t = 1)]
        weight: usize,
        #[arg(long, default_value_t = 4)]
        family_size: usize,
        #[arg(long, default_value_t = 16)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = FormArg::Both)]
        form: FormArg,
        #[arg(long, value_enum)]
        fixture: Option<Fixture>,
        #[command(flatten)]
        output: Output,
    },
    /// Recovery synthesis and round trips on the fixture codes.
    RecoveryTest {
        /// Random code-space density matrices per fixture.
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("{0}")]
    Compute(String),
    #[error("cannot write output: {0}")]
    Io(#[from] io::Error),
}

fn compute<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

/// Full-precision decimal for CSV cells.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn sink(output: &Output) -> Result<Box<dyn Write>, CliError> {
    Ok(match &output.out {
        Some(path) => Box::new(io::BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json(output: &Output, mut value: Value) -> Result<(), CliError> {
    if let Value::Object(map) = &mut value {
        map.insert("schema_version".into(), json!(SCHEMA_VERSION));
    }
    let mut w = sink(output)?;
    serde_json::to_writer_pretty(&mut w, &value).map_err(io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_csv(output: &Output, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let w = sink(output)?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(header).map_err(|e| CliError::Io(e.into()))?;
    for row in rows {
        csv.write_record(row).map_err(|e| CliError::Io(e.into()))?;
    }
    csv.flush()?;
    Ok(())
}

fn params(temperature: f64, h: f64) -> Result<ThermoParams, CliError> {
    ThermoParams::new(temperature, h).map_err(|e| invalid(e.to_string()))
}

fn selection(n: usize, bins: Option<usize>, tol: Option<f64>) -> Result<(usize, f64), CliError> {
    let bins = bins.unwrap_or_else(|| default_bins(n));
    let tol = tol.unwrap_or_else(|| default_tolerance(n));
    if bins == 0 || 4 * bins > n {
        return Err(invalid(format!("--bins {bins} needs 1 <= bins <= n/4 for n = {n}")));
    }
    if tol.is_nan() || tol < 0.0 {
        return Err(invalid(format!("--tol must be non-negative, got {tol}")));
    }
    Ok((bins, tol))
}

fn check_n(n: usize) -> Result<(), CliError> {
    if !(2..=crate::xx0::DENSE_CAP).contains(&n) {
        return Err(invalid(format!("n = {n} outside 2..={}", crate::xx0::DENSE_CAP)));
    }
    Ok(())
}

fn complex_json(z: Complex64) -> Value {
    // adding 0.0 turns -0.0 into 0.0
    json!([z.re + 0.0, z.im + 0.0])
}

fn matrix_json(m: &DMatrix<Complex64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_json(m[(i, j)])).collect()))
            .collect(),
    )
}

fn kl_json(r: &KLReport) -> Value {
    json!({
        "form": r.form.label(),
        "passed": r.passed,
        "max_violation": r.max_violation,
        "max_violation_diag": r.max_violation_diag,
        "max_violation_offdiag": r.max_violation_offdiag,
        "c_matrix": matrix_json(&r.c_matrix),
        "witness": r.witness.as_ref().map(|w| json!({
            "a": w.a,
            "b": w.b,
            "value": complex_json(w.value),
            "reference_value": complex_json(w.reference_value),
            "coefficients": w.coeffs.iter().map(|z| complex_json(*z)).collect::<Vec<_>>(),
            "reference_coefficients": w.reference_coeffs.iter().map(|z| complex_json(*z)).collect::<Vec<_>>(),
        })),
    })
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum { n, h, format, output } => spectrum(n, h, format, &output),
        Command::Thermo {
            temperature,
            h,
            n_list,
            format,
            output,
        } => thermo(temperature, h, &n_list, format, &output),
        Command::Equilibrium {
            n,
            temperature,
            h,
            bins,
            tol,
            output,
        } => equilibrium(n, temperature, h, bins, tol, &output),
        Command::TcfScan {
            n_list,
            temperature,
            h,
            ops,
            bins,
            tol,
            samples,
            seed,
            output,
        } => tcf_scan(&n_list, temperature, h, ops, bins, tol, samples, seed, &output),
        Command::QecCheck {
            n,
            temperature,
            h,
            bins,
            tol,
            kl_tol,
            weight,
            family_size,
            samples,
            seed,
            form,
            fixture,
            output,
        } => {
            let opts = QecArgs {
                n,
                temperature,
                h,
                bins,
                tol,
                kl_tol,
                weight,
                family_size,
                samples,
                seed,
                form,
                fixture,
            };
            qec_check(&opts, &output)
        }
        Command::RecoveryTest { samples, seed, output } => recovery_test(samples, seed, &output),
    }
}

fn spectrum(n: usize, h: f64, format: Format, output: &Output) -> Result<(), CliError> {
    check_n(n)?;
    if !h.is_finite() {
        return Err(invalid("--h must be finite"));
    }
    let states = full_spectrum(n, h).map_err(compute)?;
    match format {
        Format::Json => {
            let records: Vec<_> = states.iter().map(|s| s.record()).collect();
            write_json(output, json!({ "n": n, "h": h, "states": records }))
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = states
                .iter()
                .map(|s| {
                    let idx: Vec<String> = s.momenta().indices().iter().map(|i| i.to_string()).collect();
                    vec![
                        s.m().to_string(),
                        idx.join(" "),
                        num(s.paper_energy()),
                        num(s.hamiltonian_energy()),
                    ]
                })
                .collect();
            write_csv(
                output,
                &["m", "momentum_indices", "paper_energy", "hamiltonian_energy"],
                &rows,
            )
        }
    }
}

#[derive(Serialize)]
struct ThermoRow {
    n: usize,
    #[serde(rename = "T")]
    temperature: f64,
    h: f64,
    log2z_over_n: f64,
    f_bulk: f64,
    abs_err: f64,
    s_density: f64,
}

fn thermo(temperature: f64, h: f64, n_list: &[usize], format: Format, output: &Output) -> Result<(), CliError> {
    let p = params(temperature, h)?;
    for &n in n_list {
        check_n(n)?;
    }
    let f = bulk_free_energy(&p).map_err(compute)?;
    let s = entropy_density(&p).map_err(compute)?;
    let mut rows = Vec::new();
    for &n in n_list {
        eprintln!("thermo: n = {n}");
        let per_site = partition_function_exact(n, &p).map_err(compute)? / n as f64;
        rows.push(ThermoRow {
            n,
            temperature,
            h,
            log2z_over_n: per_site,
            f_bulk: f.value,
            abs_err: (per_site - f.value).abs(),
            s_density: s,
        });
    }
    match format {
        Format::Csv => {
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        num(r.temperature),
                        num(r.h),
                        num(r.log2z_over_n),
                        num(r.f_bulk),
                        num(r.abs_err),
                        num(r.s_density),
                    ]
                })
                .collect();
            write_csv(
                output,
                &["n", "T", "h", "log2Z_over_n", "f_bulk", "abs_err", "S_density"],
                &table,
            )
        }
        Format::Json => write_json(output, json!({ "f_bulk_quadrature_error": f.abs_error, "rows": rows })),
    }
}

fn equilibrium(
    n: usize,
    temperature: f64,
    h: f64,
    bins: Option<usize>,
    tol: Option<f64>,
    output: &Output,
) -> Result<(), CliError> {
    check_n(n)?;
    let p = params(temperature, h)?;
    let (bins, tol) = selection(n, bins, tol)?;
    let sub = select_equilibrium_subspace(n, &p, bins, tol).map_err(compute)?;
    let members: Vec<Value> = sub
        .members()
        .iter()
        .map(|m| {
            json!({
                "m": m.state.m(),
                "momentum_indices": m.state.momenta().indices(),
                "score": m.score,
            })
        })
        .collect();
    write_json(
        output,
        json!({
            "n": n,
            "T": temperature,
            "h": h,
            "bins": bins,
            "tol": tol,
            "dim": sub.dim(),
            "nS_estimate": dimension_estimate(n, &p).map_err(compute)?,
            "log2_dim": (sub.dim() as f64).log2(),
            "boltzmann_mass": sub.boltzmann_mass().map_err(compute)?,
            "members": members,
        }),
    )
}

#[allow(clippy::too_many_arguments)]
fn tcf_scan(
    n_list: &[usize],
    temperature: f64,
    h: f64,
    ops: Option<Vec<String>>,
    bins: Option<usize>,
    tol: Option<f64>,
    samples: usize,
    seed: u64,
    output: &Output,
) -> Result<(), CliError> {
    let p = params(temperature, h)?;
    let labelled: Vec<(String, LocalOperator)> = match ops {
        None => default_operators(),
        Some(list) => list
            .into_iter()
            .map(|s| {
                let s = s.trim().to_string();
                let op = s.parse::<LocalOperator>().map_err(|e| invalid(e.to_string()))?;
                Ok((s, op))
            })
            .collect::<Result<_, CliError>>()?,
    };
    let mut cells = Vec::new();
    for &n in n_list {
        check_n(n)?;
        let cell = selection(n, bins, tol)?;
        for (label, op) in &labelled {
            if op.max_site() > n {
                return Err(invalid(format!("operator {label} acts beyond site {n}")));
            }
        }
        cells.push((n, cell));
    }
    let ops: Vec<LocalOperator> = labelled.iter().map(|(_, o)| o.clone()).collect();
    let options = TcfOptions {
        samples,
        seed,
        full_trace: true,
    };
    let mut rows = Vec::new();
    for (n, (bins, tol)) in cells {
        let sub = select_equilibrium_subspace(n, &p, bins, tol).map_err(compute)?;
        let reports = tcf_reports(&ops, &sub, &options).map_err(compute)?;
        for ((label, _), r) in labelled.iter().zip(&reports) {
            eprintln!("tcf-scan: n = {n}, operator {label}");
            rows.push(vec![
                n.to_string(),
                num(temperature),
                num(h),
                label.clone(),
                r.dim.to_string(),
                num(r.full_trace_value.expect("requested").re),
                num(r.restricted_value.re),
                num(r.mean().re),
                num(r.std_dev()),
                num(r.max_spread()),
            ]);
        }
    }
    write_csv(
        output,
        &[
            "n",
            "T",
            "h",
            "operator",
            "dim_C",
            "full",
            "restricted",
            "mean",
            "std_dev",
            "max_spread",
        ],
        &rows,
    )
}

struct QecArgs {
    n: Option<usize>,
    temperature: f64,
    h: f64,
    bins: Option<usize>,
    tol: Option<f64>,
    kl_tol: f64,
    weight: usize,
    family_size: usize,
    samples: usize,
    seed: u64,
    form: FormArg,
    fixture: Option<Fixture>,
}

fn qec_check(args: &QecArgs, output: &Output) -> Result<(), CliError> {
    if !(args.kl_tol > 0.0) {
        return Err(invalid("--kl-tol must be positive"));
    }
    if args.form != FormArg::Basis && args.samples < 2 {
        return Err(invalid("--samples must be at least 2"));
    }
    let mut extra = serde_json::Map::new();
    let (channel, code) = match args.fixture {
        Some(fixture) => {
            if let Some(n) = args.n {
                if n != 3 {
                    return Err(invalid("fixtures live on n = 3"));
                }
            }
            let channel = match fixture {
                Fixture::RepetitionX => fixtures::bit_flip_channel(),
                Fixture::RepetitionZ => fixtures::phase_flip_channel(),
            };
            extra.insert("fixture".into(), json!(format!("{fixture:?}")));
            (channel, fixtures::repetition_code())
        }
        None => {
            let n = args.n.ok_or_else(|| invalid("--n is required without --fixture"))?;
            check_n(n)?;
            let p = params(args.temperature, args.h)?;
            let (bins, tol) = selection(n, args.bins, args.tol)?;
            if args.weight > n {
                return Err(invalid("--weight exceeds n"));
            }
            let family = random_error_family(n, args.weight, args.family_size, args.seed, true)
                .map_err(|e| invalid(e.to_string()))?;
            let sub = select_equilibrium_subspace(n, &p, bins, tol).map_err(compute)?;
            extra.insert("n".into(), json!(n));
            extra.insert("T".into(), json!(args.temperature));
            extra.insert("h".into(), json!(args.h));
            extra.insert("bins".into(), json!(bins));
            extra.insert("tol".into(), json!(tol));
            extra.insert(
                "family".into(),
                json!(family.iter().map(|o| o.to_string()).collect::<Vec<_>>()),
            );
            let channel = ErrorChannel::from_local(n, family).map_err(compute)?;
            let code = CodeSpace::from_blocked(sub.basis()).map_err(compute)?;
            (channel, code)
        }
    };
    eprintln!("qec-check: dim C = {}, {} Kraus operators", code.dim(), channel.len());
    let mut reports = Vec::new();
    if args.form != FormArg::Random {
        reports.push(kl_check_basis(&channel, &code, args.kl_tol).map_err(compute)?);
    }
    if args.form != FormArg::Basis {
        reports.push(kl_check_random(&channel, &code, args.samples, args.seed, args.kl_tol).map_err(compute)?);
    }
    let primary = &reports[0];
    let mut value = json!({
        "dim_C": code.dim(),
        "m": channel.len(),
        "c_matrix": matrix_json(&primary.c_matrix),
        "max_violation_diag": reports.iter().map(|r| r.max_violation_diag).fold(0.0, f64::max),
        "max_violation_offdiag": reports.iter().map(|r| r.max_violation_offdiag).fold(0.0, f64::max),
        "passed": reports.iter().all(|r| r.passed),
        "degenerate": code.dim() == 1,
        "kl_tol": args.kl_tol,
        "reports": reports.iter().map(kl_json).collect::<Vec<_>>(),
    });
    if let Value::Object(map) = &mut value {
        map.extend(extra);
    }
    write_json(output, value)
}

fn recovery_test(samples: usize, seed: u64, output: &Output) -> Result<(), CliError> {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    let code = fixtures::repetition_code();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results = Vec::new();
    for (name, channel) in [
        ("repetition-x", fixtures::bit_flip_channel()),
        ("repetition-z", fixtures::phase_flip_channel()),
    ] {
        eprintln!("recovery-test: {name}");
        let report = kl_check_basis(&channel, &code, KL_TOLERANCE).map_err(compute)?;
        let entry = match build_recovery(&channel, &code, KL_TOLERANCE) {
            Ok(recovery) => {
                let mut worst = 0.0f64;
                for _ in 0..samples {
                    let p = crate::qec::random_code_density(&code, &mut rng).map_err(compute)?;
                    worst = worst.max(round_trip_residual(&channel, &recovery, &p).map_err(compute)?);
                }
                json!({
                    "fixture": name,
                    "kl_passed": report.passed,
                    "c_matrix": matrix_json(&report.c_matrix),
                    "recovery_operators": recovery.len(),
                    "recovery_completeness": check_completeness(&recovery).map_err(compute)?,
                    "max_round_trip_residual": worst,
                    "rejected": false,
                })
            }
            Err(e) => json!({
                "fixture": name,
                "kl_passed": report.passed,
                "c_matrix": matrix_json(&report.c_matrix),
                "max_violation": report.max_violation,
                "rejected": true,
                "reason": e.to_string(),
            }),
        };
        results.push(entry);
    }
    write_json(output, json!({ "samples": samples, "seed": seed, "fixtures": results }))
}
