//! Command-line front end: `synthesize`, `verify` and `sweep`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::dataset::{distinct_token_dataset, DatasetFile, Token};
use crate::error::{MemcapError, Result};
use crate::ffn::max_bits_budget;
use crate::ir::{Mode, Model, SynthesisReport, WeightFile};
use crate::numerics::BigRational;
use crate::separation::check_separated;
use crate::synth::{
    synthesize_deepset, synthesize_embedding, synthesize_next_token, synthesize_next_token_limited_bits,
    synthesize_seq2seq, Variant,
};
use crate::verify::{
    bounds, report_from_weights, scaling_sweep, shatter_sweep, verify_bounds, verify_memorization, write_csv, Inputs,
    SweepRow, VerificationReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONSISTENCY: i32 = 2;
pub const EXIT_SYNTHESIS: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "memcap", version, about = "Exact memorizing transformer synthesis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    NextToken,
    Seq2seq,
    Deepset,
    Embedding,
    LimitedBits,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::NextToken => Variant::NextToken,
            VariantArg::Seq2seq => Variant::Seq2seq,
            VariantArg::Deepset => Variant::DeepSet,
            VariantArg::Embedding => Variant::Embedding,
            VariantArg::LimitedBits => Variant::LimitedBits,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepMode {
    Scaling,
    Shatter,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build exact weights that memorize a dataset file.
    Synthesize {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "next-token")]
        variant: VariantArg,
        /// Bits budget B for the limited-bits variant, at most ceil(sqrt N).
        #[arg(long = "bits-budget")]
        bits_budget: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to `<out>.report.json`.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check a weight file against a dataset file.
    Verify { weights: PathBuf, dataset: PathBuf },
    /// Scaling or shattering sweep; writes CSV.
    Sweep {
        #[arg(long, value_enum, default_value = "scaling")]
        mode: SweepMode,
        /// Comma-separated list of N values.
        #[arg(long, default_value = "16,32,64")]
        grid: String,
        #[arg(long = "len", short = 'n', default_value_t = 4)]
        n: usize,
        #[arg(long, short = 'd', default_value_t = 3)]
        d: usize,
        #[arg(long, short = 'c', default_value_t = 4)]
        classes: u64,
        /// Number of seeds, starting at `--seed`.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "next-token")]
        variant: VariantArg,
        #[arg(long = "bits-budget")]
        bits_budget: Option<usize>,
        /// Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn exit_code(e: &MemcapError) -> i32 {
    match e {
        MemcapError::Consistency { .. } | MemcapError::NotDistinct { .. } => EXIT_CONSISTENCY,
        MemcapError::SearchExhausted { .. }
        | MemcapError::PrecisionExhausted { .. }
        | MemcapError::GapViolation(_)
        | MemcapError::PreconditionViolation(_)
        | MemcapError::Degenerate(_) => EXIT_SYNTHESIS,
        MemcapError::DimensionMismatch { .. }
        | MemcapError::Range(_)
        | MemcapError::Parse(_)
        | MemcapError::Schema(_)
        | MemcapError::Io(_) => EXIT_USAGE,
    }
}

/// Synthesis report as written to disk, with the bound checks and the
/// frozen constants they used.
#[derive(Serialize)]
struct ReportFile<'a> {
    #[serde(flatten)]
    report: &'a SynthesisReport,
    bound_constants: BoundConstants,
    bound_checks: Vec<bounds::BoundCheck>,
}

#[derive(Serialize)]
struct BoundConstants {
    depth: f64,
    bits: f64,
}

fn write_report(path: &Path, report: &SynthesisReport, variant: Variant) -> Result<()> {
    let (depth, bits) = bounds::constants(variant);
    let file = ReportFile {
        report,
        bound_constants: BoundConstants { depth, bits },
        bound_checks: verify_bounds(report, variant),
    };
    std::fs::write(path, serde_json::to_string_pretty(&file)? + "\n")?;
    Ok(())
}

/// Rejects declared `r` smaller than the measured radius or declared `delta`
/// larger than the measured separation.
fn check_declared(file: &DatasetFile, tokens: &[Token]) -> Result<()> {
    let measured = check_separated(tokens);
    if let Some(r) = file.declared_r()? {
        if &r * &r < measured.r_sq {
            return Err(MemcapError::Schema(format!("declared r = {r} is below the measured radius")));
        }
    }
    if let Some(delta) = file.declared_delta()? {
        if delta <= BigRational::from_integer(0.into()) || &delta * &delta > measured.delta_sq {
            return Err(MemcapError::Schema(format!("declared delta = {delta} exceeds the measured separation")));
        }
    }
    Ok(())
}

fn synthesize_file(
    input: &Path,
    variant: Variant,
    bits_budget: Option<usize>,
    seed: u64,
) -> Result<(WeightFile, SynthesisReport)> {
    let file = DatasetFile::load(input)?;
    if bits_budget.is_some() && variant != Variant::LimitedBits {
        return Err(MemcapError::Range("--bits-budget only applies to the limited-bits variant".into()));
    }
    match variant {
        Variant::DeepSet => {
            let ds = file.to_set_dataset()?;
            check_declared(&file, &ds.sets.iter().flatten().cloned().collect::<Vec<_>>())?;
            let syn = synthesize_deepset(&ds, seed)?;
            Ok((syn.weight_file(), syn.report))
        }
        Variant::Embedding => {
            let ds = file.to_id_dataset()?;
            let syn = synthesize_embedding(&ds, seed)?;
            Ok((syn.weight_file(), syn.report))
        }
        _ => {
            let ds = file.to_dataset()?;
            check_declared(&file, &ds.sequences.iter().flatten().cloned().collect::<Vec<_>>())?;
            let (syn, _) = match variant {
                Variant::NextToken => synthesize_next_token(&ds, seed)?,
                Variant::Seq2seq => synthesize_seq2seq(&ds, seed)?,
                _ => {
                    let max = max_bits_budget(ds.len());
                    let b = bits_budget.unwrap_or(max);
                    if b == 0 || b > max {
                        return Err(MemcapError::Range(format!("bits budget {b} outside 1..={max}")));
                    }
                    synthesize_next_token_limited_bits(&ds, b, seed)?
                }
            };
            Ok((syn.weight_file(), syn.report))
        }
    }
}

/// Memorization and bound checks of a weight file against a dataset file.
pub fn verify_files(weights: &Path, dataset: &Path) -> Result<VerificationReport> {
    let wf = WeightFile::load(weights)?;
    let file = DatasetFile::load(dataset)?;
    let variant = Variant::from_tag(&wf.header.variant)
        .ok_or_else(|| MemcapError::Schema(format!("unknown variant '{}'", wf.header.variant)))?;
    let mut rep = match &wf.model {
        Model::DeepSet(_) => verify_memorization(&wf.model, &Inputs::Sets(&file.to_set_dataset()?))?,
        Model::Embedding(_) => verify_memorization(&wf.model, &Inputs::Ids(&file.to_id_dataset()?))?,
        Model::Transformer(_) => verify_memorization(&wf.model, &Inputs::Sequences(&file.to_dataset()?))?,
        Model::Mlp(_) => return Err(MemcapError::Schema("bare feed-forward weights cannot be verified".into())),
    };
    rep.bound_checks = verify_bounds(&report_from_weights(&wf), variant);
    Ok(rep)
}

fn parse_grid(s: &str) -> Result<Vec<usize>> {
    let grid = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| MemcapError::Parse(format!("grid value '{t}'"))))
        .collect::<Result<Vec<_>>>()?;
    if grid.is_empty() || grid.contains(&0) {
        return Err(MemcapError::Range("grid values must be positive".into()));
    }
    Ok(grid)
}

#[allow(clippy::too_many_arguments)]
fn sweep_rows(
    mode: SweepMode,
    grid: &[usize],
    n: usize,
    d: usize,
    classes: u64,
    seeds: &[u64],
    variant: Variant,
    bits_budget: Option<usize>,
) -> Result<Vec<SweepRow>> {
    match mode {
        SweepMode::Scaling => Ok(scaling_sweep(grid, n, d, classes, seeds, variant, bits_budget)),
        SweepMode::Shatter => {
            let label_mode = match variant {
                Variant::NextToken => Mode::NextToken,
                Variant::Seq2seq => Mode::Seq2seq,
                _ => return Err(MemcapError::Range("shatter sweeps support next-token and seq2seq".into())),
            };
            let mut rows = Vec::new();
            for &count in grid {
                for &s in seeds {
                    let inputs = distinct_token_dataset(s, count, n, d);
                    rows.extend(shatter_sweep(&inputs, label_mode, s)?.rows);
                }
            }
            Ok(rows)
        }
    }
}

fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Synthesize { input, variant, bits_budget, seed, out, report } => {
            let variant = Variant::from(variant);
            let (wf, rep) = synthesize_file(&input, variant, bits_budget, seed)?;
            let report_path = report.unwrap_or_else(|| {
                let mut p = out.clone().into_os_string();
                p.push(".report.json");
                PathBuf::from(p)
            });
            wf.save(&out)?;
            write_report(&report_path, &rep, variant)?;
            writeln!(
                stdout,
                "{}: width {} depth {} params {} max_bits {}",
                rep.variant, rep.width, rep.depth, rep.param_count, rep.max_bit_complexity
            )?;
            Ok(EXIT_OK)
        }
        Command::Verify { weights, dataset } => {
            let rep = verify_files(&weights, &dataset)?;
            writeln!(stdout, "{}", serde_json::to_string_pretty(&rep)?)?;
            if let Some(i) = rep.counterexample {
                writeln!(stderr, "memorization failed: counterexample index {i}")?;
            }
            for b in rep.bound_checks.iter().filter(|b| !b.pass) {
                writeln!(stderr, "bound check failed: {} measured {} limit {}", b.name, b.measured, b.formula_value)?;
            }
            Ok(if rep.ok() { EXIT_OK } else { EXIT_VERIFICATION })
        }
        Command::Sweep { mode, grid, n, d, classes, seeds, seed, variant, bits_budget, out } => {
            let grid = parse_grid(&grid)?;
            let seeds: Vec<u64> = (seed..seed + seeds).collect();
            let rows = sweep_rows(mode, &grid, n, d, classes, &seeds, variant.into(), bits_budget)?;
            match out {
                Some(p) => write_csv(&rows, std::fs::File::create(p)?)?,
                None => write_csv(&rows, &mut *stdout)?,
            }
            let ok = rows.iter().filter(|r| r.ok).count();
            writeln!(stderr, "{ok}/{} rows ok", rows.len())?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    match run(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_mapping() {
        assert_eq!(exit_code(&MemcapError::Consistency { first: 0, second: 1, detail: String::new() }), 2);
        assert_eq!(exit_code(&MemcapError::NotDistinct { first: 0, second: 1 }), 2);
        assert_eq!(exit_code(&MemcapError::SearchExhausted { attempts: 3 }), 3);
        assert_eq!(exit_code(&MemcapError::Range(String::new())), 1);
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("16, 32,64").unwrap(), vec![16, 32, 64]);
        assert!(parse_grid("16,x").is_err());
        assert!(parse_grid("0").is_err());
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(main_with_args(["memcap", "sweep", "--bogus"], &mut o, &mut e), EXIT_USAGE);
    }
}
