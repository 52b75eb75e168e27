//! Command-line front end.
//!
//! Exit codes: 0 success, 1 internal check failure, 2 input validation,
//! 3 missing coefficient data.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use borcherds_weyl::{assemble_phi, character_datum_of, solve_weight, weyl_vector, QZeroData};
use classifier::{self, MAX_RANK};
use lattice_core::arith::{self, fmt_q, Q};
use lattice_core::error::{Error, Result};
use lattice_core::lattice::{self, Lattice};
use root_systems::{build_dual_set, decompose, detect_roots, DualSet, Subcase};
use series_engine::{self, borch_expand, BorchOptions, CoefficientMap, WeightedSeries};

#[derive(Debug, Parser)]
#[command(
    name = "orthoforms",
    version,
    about = "Exact computations with lattices, reflective Borcherds products and Jacobians"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank, determinant, parity, discriminant group and level.
    Lattice {
        /// `builtin:NAME` or a JSON file `{"label", "gram"}`.
        lattice: String,
    },
    /// Reflective roots and their irreducible components.
    Roots {
        lattice: String,
        /// Largest root norm considered.
        #[arg(long, default_value_t = 2)]
        max_norm: i64,
        /// Subcase (i, ii, iii) for A1/B components with div-2d short roots.
        #[arg(long)]
        subcase: Option<String>,
    },
    /// Weight and Weyl vector of the reflective product of a root system
    /// or a q^0 data file.
    Weyl {
        input: String,
        #[arg(long, default_value_t = 2)]
        max_norm: i64,
        #[arg(long)]
        subcase: Option<String>,
    },
    /// Truncated expansion of a Borcherds product.
    Borch {
        input: String,
        /// Truncation rectangle `A,T`.
        #[arg(long, default_value = "1,1")]
        rect: String,
        /// Minimal global exponent denominator.
        #[arg(long, default_value_t = 24)]
        den: i64,
        /// Leave out the factors (1 - zeta^l)^f(0,l).
        #[arg(long)]
        no_toric: bool,
        #[arg(long, default_value_t = 2)]
        max_norm: i64,
        #[arg(long)]
        subcase: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Jacobian determinant of weighted series files.
    Jacobian {
        inputs: Vec<PathBuf>,
        /// Check the syzygy on rank+4 inputs instead.
        #[arg(long)]
        syzygy: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// The classification table.
    Classify {
        #[arg(long, default_value_t = MAX_RANK)]
        max_rank: usize,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::MissingCoefficients(_) => 3,
        Error::Internal(_) => 1,
        _ => 2,
    }
}

fn rect_of(s: &str) -> Result<(i64, i64)> {
    let (a, t) = series_engine::parse_rect(s)?;
    match (arith::to_i64(&a), arith::to_i64(&t)) {
        (Some(a), Some(t)) if a >= 0 && t >= 0 => Ok((a, t)),
        _ => Err(Error::Invalid(format!("rectangle {s:?} needs nonnegative integer bounds"))),
    }
}

fn subcase_of(s: &Option<String>) -> Result<Option<Subcase>> {
    s.as_deref().map(Subcase::parse).transpose()
}

fn lattice_report(lat: &Lattice) -> Result<Value> {
    let dg = lat.discriminant_group()?;
    Ok(json!({
        "label": lat.label(),
        "rank": lat.rank(),
        "det": lat.det().to_string(),
        "even": lat.is_even(),
        "discriminant_group": dg.to_string(),
        "elementary_divisors": dg.elementary_divisors.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
        "level": dg.level.to_string(),
    }))
}

fn dual_sets(lat: &Lattice, max_norm: i64, subcase: Option<Subcase>) -> Result<(Vec<Value>, Vec<DualSet>)> {
    let rd = detect_roots(lat, max_norm)?;
    let mut reports = Vec::new();
    let mut sets = Vec::new();
    for comp in decompose(&rd)? {
        let comp = if comp.needs_subcase() { comp.with_subcase(subcase) } else { comp };
        reports.push(serde_json::to_value(comp.report()).expect("serializable"));
        sets.push(build_dual_set(&comp)?);
    }
    Ok((reports, sets))
}

/// q^0 data and the full coefficient map from a lattice reference or file.
fn load_phi(input: &str, max_norm: i64, subcase: Option<Subcase>) -> Result<(QZeroData, CoefficientMap)> {
    let phi = if input.starts_with("builtin:") {
        let lat = lattice::resolve_ref(input)?;
        let (_, sets) = dual_sets(&lat, max_norm, subcase)?;
        assemble_phi(&lat, &sets, None)?
    } else {
        let text = std::fs::read_to_string(input)?;
        let v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
        if v.get("lattice").is_none() {
            // a bare lattice file
            let lat = Lattice::from_json(&text)?;
            let (_, sets) = dual_sets(&lat, max_norm, subcase)?;
            assemble_phi(&lat, &sets, None)?
        } else {
            let mut q0 = v.clone();
            let mut higher = v.clone();
            let all = v.get("coeffs").and_then(Value::as_array).cloned().unwrap_or_default();
            let (low, high): (Vec<Value>, Vec<Value>) =
                all.into_iter().partition(|e| e.get("n").and_then(Value::as_i64).is_some_and(|n| n <= 0));
            q0["coeffs"] = Value::Array(low);
            higher["coeffs"] = Value::Array(high);
            let phi = QZeroData::from_json(&q0.to_string())?;
            let phi = if phi.weight().is_none() {
                let k = solve_weight(&phi)?;
                phi.with_weight(k)?
            } else {
                phi
            };
            let mut cm = CoefficientMap::from_q0(&phi, None)?;
            higher["rank"] = Value::from(phi.lattice().rank());
            let extra = CoefficientMap::from_json(&higher.to_string())?;
            cm.coeffs.extend(extra.coeffs);
            cm.complete_through = extra.complete_through;
            return Ok((phi, cm));
        }
    };
    let k = solve_weight(&phi)?;
    let phi = phi.with_weight(k)?;
    let cm = CoefficientMap::from_q0(&phi, None)?;
    Ok((phi, cm))
}

fn emit(out: &mut dyn Write, v: &Value) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).expect("serializable"))?;
    Ok(())
}

fn write_or_print(path: &Option<PathBuf>, v: &Value, out: &mut dyn Write) -> Result<bool> {
    match path {
        Some(p) => {
            std::fs::write(p, serde_json::to_string_pretty(v).expect("serializable") + "\n")?;
            Ok(true)
        }
        None => {
            emit(out, v)?;
            Ok(false)
        }
    }
}

fn run_command(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Lattice { lattice } => {
            let lat = lattice::resolve_ref(&lattice)?;
            emit(out, &lattice_report(&lat)?)?;
        }
        Command::Roots { lattice, max_norm, subcase } => {
            let lat = lattice::resolve_ref(&lattice)?;
            let rd = detect_roots(&lat, max_norm)?;
            let sub = subcase_of(&subcase)?;
            let comps: Vec<Value> = decompose(&rd)?
                .into_iter()
                .map(|c| {
                    let c = if c.needs_subcase() { c.with_subcase(sub) } else { c };
                    serde_json::to_value(c.report()).expect("serializable")
                })
                .collect();
            emit(out, &json!({ "lattice": lat.label(), "roots": rd.len(), "components": comps }))?;
        }
        Command::Weyl { input, max_norm, subcase } => {
            let (phi, cm) = load_phi(&input, max_norm, subcase_of(&subcase)?)?;
            let w = weyl_vector(&phi)?;
            let (d, chi) = character_datum_of(&cm.coeffs);
            let mut v = w.to_json();
            v["k"] = Value::String(fmt_q(phi.weight().expect("solved")));
            v["D"] = Value::from(d);
            v["chi"] = Value::from(chi);
            emit(out, &v)?;
        }
        Command::Borch { input, rect, den, no_toric, max_norm, subcase, output } => {
            if den <= 0 {
                return Err(Error::Invalid("denominator must be positive".into()));
            }
            let rect = rect_of(&rect)?;
            let (phi, cm) = load_phi(&input, max_norm, subcase_of(&subcase)?)?;
            let w = weyl_vector(&phi)?;
            let opts = BorchOptions { include_toric: !no_toric, den, ..Default::default() };
            let g = borch_expand(&cm, Some(phi.lattice()), &w, rect, &opts)?;
            let (d, chi) = character_datum_of(&cm.coeffs);
            let summary = format!(
                "A = {}, B = {}, C = {}, weight = {}, D = {d}, chi = {chi}",
                fmt_q(&w.a),
                borcherds_weyl::fmt_vec(&w.b),
                fmt_q(&w.c),
                fmt_q(phi.weight().expect("solved")),
            );
            let wrote = write_or_print(&output, &g.to_json(), out)?;
            if wrote {
                writeln!(out, "{summary}")?;
            } else {
                writeln!(err, "{summary}")?;
            }
        }
        Command::Jacobian { inputs, syzygy, output } => {
            let forms = inputs
                .iter()
                .map(|p| WeightedSeries::from_json(&std::fs::read_to_string(p)?))
                .collect::<Result<Vec<_>>>()?;
            let j = if syzygy { series_engine::syzygy_check(&forms)? } else { series_engine::jacobian(&forms)? };
            let rank = forms.first().map(|f| f.series.rank()).unwrap_or(0) as i64;
            let note = match j.leading_order() {
                Err(Error::VanishesToRectangleOrder) => "vanishes to rectangle order".to_string(),
                Err(e) => return Err(e),
                Ok((a, c)) => {
                    let bound = Q::from_integer((rank + 1).into());
                    let meets = a >= bound && c >= bound;
                    format!("leading order ({}, {}); meets ({}, {}): {meets}", fmt_q(&a), fmt_q(&c), rank + 1, rank + 1)
                }
            };
            let wrote = write_or_print(&output, &j.to_json(), out)?;
            if wrote {
                writeln!(out, "{note}")?;
            } else {
                writeln!(err, "{note}")?;
            }
        }
        Command::Classify { max_rank, format } => {
            if max_rank == 0 || max_rank > MAX_RANK {
                return Err(Error::Invalid(format!("max rank must be between 1 and {MAX_RANK}")));
            }
            let report = if max_rank == MAX_RANK { classifier::full_table()? } else { classifier::classify(max_rank)? };
            match format {
                Format::Json => emit(out, &report.to_json())?,
                Format::Table => write!(out, "{}", report.to_table())?,
            }
            if !report.unresolved.is_empty() {
                return Err(Error::Internal(format!("{} unresolved candidates", report.unresolved.len())));
            }
        }
    }
    Ok(0)
}

/// Caps rayon's pool at `ORTHOFORMS_THREADS` when set.
pub fn configure_threads() {
    if let Some(n) = std::env::var("ORTHOFORMS_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Parses arguments and runs; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 2;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    match run_command(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
