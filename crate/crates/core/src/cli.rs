//! Command-line front end. Every subcommand renders library results; the
//! process exit code follows `0` ok, `2` usage, `3` undefined at the point,
//! `4` verification failure.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelParams, SubspaceIndex};
use crate::spectral::{block_spectrum, critical_coupling};
use crate::sweep::{
    figure_dataset, format_sig, run_sweep, write_rows, Destination, Figure, Format, SweepRow,
    SweepSpec, DEFAULT_EP_WINDOW, FIGURE_SUBSPACES,
};
use crate::thermo::{thermo_point, Temperature};
use crate::verify::run_verification;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNDEFINED: i32 = 3;
pub const EXIT_VERIFY_FAILED: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "pseudotherm",
    version,
    about = "Spectra, metrics and thermodynamics of a pseudo-Hermitian spin-1/2 oscillator model"
)]
pub struct Cli {
    #[command(flatten)]
    pub config: CliConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CliConfig {
    /// Level splitting
    #[arg(
        long,
        global = true,
        default_value_t = 5.0,
        allow_negative_numbers = true
    )]
    pub alpha: f64,
    /// Oscillator quantum (hbar * omega)
    #[arg(
        long,
        global = true,
        default_value_t = 1.0,
        allow_negative_numbers = true
    )]
    pub homega: f64,
    /// Temperature in energy units (k_B = 1)
    #[arg(
        long,
        global = true,
        default_value_t = 5.0,
        allow_negative_numbers = true
    )]
    pub tau: f64,
    /// Subspace index; comma-separated list for sweeps
    #[arg(long, global = true, value_delimiter = ',')]
    pub n: Vec<u32>,
    /// Coupling strength (spectrum, thermo)
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(
        long,
        global = true,
        default_value_t = 0.0,
        allow_negative_numbers = true
    )]
    pub mu_min: f64,
    #[arg(
        long,
        global = true,
        default_value_t = 4.0,
        allow_negative_numbers = true
    )]
    pub mu_max: f64,
    #[arg(long, global = true, default_value_t = 401)]
    pub steps: usize,
    /// Half-width of the excluded band around each critical coupling
    #[arg(long, global = true, default_value_t = DEFAULT_EP_WINDOW, allow_negative_numbers = true)]
    pub ep_window: f64,
    /// csv or json
    #[arg(long, global = true, default_value = "csv")]
    pub format: Format,
    /// Output path, or `-` for standard output
    #[arg(long, global = true, default_value = "-")]
    pub output: String,
    /// Oscillator cutoff for the full-space oracle
    #[arg(long, global = true, default_value_t = 8)]
    pub cutoff: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues, discriminant, phase and critical coupling of one block
    Spectrum,
    /// Partition function and observables at one point
    Thermo,
    /// Coupling sweep over the selected subspaces
    Sweep,
    /// Dataset behind one of the coupling-dependence figures
    Fig {
        /// 1: free energy, 2: entropy, 3: specific heat
        #[arg(long)]
        id: u8,
    },
    /// Run the oracle suite and report every check
    Verify,
}

impl CliConfig {
    fn subspaces(&self, default: &[u32]) -> Vec<u32> {
        if self.n.is_empty() {
            default.to_vec()
        } else {
            self.n.clone()
        }
    }

    fn point_params(&self) -> Result<ModelParams> {
        let mu = self.mu.ok_or(Error::InvalidParameter {
            name: "mu",
            value: f64::NAN,
            reason: "--mu is required",
        })?;
        ModelParams::new(self.alpha, self.homega, mu)
    }

    fn sweep_spec(&self, default_subspaces: &[u32]) -> SweepSpec {
        SweepSpec {
            alpha: self.alpha,
            homega: self.homega,
            tau: self.tau,
            subspaces: self.subspaces(default_subspaces),
            mu_min: self.mu_min,
            mu_max: self.mu_max,
            steps: self.steps,
            ep_window: self.ep_window,
        }
    }
}

#[derive(Debug, Serialize)]
struct SpectrumRecord {
    n: u32,
    alpha: f64,
    homega: f64,
    mu: f64,
    region: crate::spectral::PhaseRegion,
    mu_c: f64,
    discriminant: f64,
    e_plus_re: f64,
    e_plus_im: f64,
    e_minus_re: f64,
    e_minus_im: f64,
}

const SPECTRUM_HEADER: &str =
    "n,alpha,homega,mu,region,mu_c,discriminant,e_plus_re,e_plus_im,e_minus_re,e_minus_im";

fn spectrum_records(params: &ModelParams, subspaces: &[u32]) -> Vec<SpectrumRecord> {
    subspaces
        .iter()
        .map(|&n| {
            let idx = SubspaceIndex(n);
            let s = block_spectrum(params, idx);
            SpectrumRecord {
                n,
                alpha: params.alpha(),
                homega: params.homega(),
                mu: params.mu(),
                region: s.region,
                mu_c: critical_coupling(params, idx),
                discriminant: s.discriminant,
                e_plus_re: s.e_plus.re,
                e_plus_im: s.e_plus.im,
                e_minus_re: s.e_minus.re,
                e_minus_im: s.e_minus.im,
            }
        })
        .collect()
}

fn write_spectrum<W: Write>(
    records: &[SpectrumRecord],
    format: Format,
    mut out: W,
) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "{SPECTRUM_HEADER}")?;
            for r in records {
                let nums = [r.alpha, r.homega, r.mu].map(format_sig).join(",");
                let tail = [
                    r.mu_c,
                    r.discriminant,
                    r.e_plus_re,
                    r.e_plus_im,
                    r.e_minus_re,
                    r.e_minus_im,
                ]
                .map(format_sig)
                .join(",");
                writeln!(out, "{},{},{},{}", r.n, nums, r.region, tail)?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, records)?;
            writeln!(out)?;
        }
    }
    out.flush()
}

/// Opens the configured destination and hands the writer to `f`.
fn with_output<F>(config: &CliConfig, stdout: &mut dyn Write, f: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let destination = Destination::parse(&config.output);
    let io_err = |e: std::io::Error| Error::Io {
        destination: destination.to_string(),
        message: e.to_string(),
    };
    match &destination {
        Destination::Stdout => f(stdout).map_err(io_err),
        Destination::File(path) => {
            let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
            f(&mut file).map_err(io_err)
        }
    }
}

fn usage_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter { .. } | Error::InvalidSweep(_) => EXIT_USAGE,
        _ => 1,
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    let config = &cli.config;
    match &cli.command {
        Command::Spectrum => {
            let params = config.point_params()?;
            let records = spectrum_records(&params, &config.subspaces(&[0]));
            with_output(config, stdout, |out| {
                write_spectrum(&records, config.format, out)
            })?;
            Ok(EXIT_OK)
        }
        Command::Thermo => {
            let params = config.point_params()?;
            let t = Temperature::new(config.tau)?;
            let points: Vec<_> = config
                .subspaces(&[0])
                .into_iter()
                .map(|n| thermo_point(&params, SubspaceIndex(n), t))
                .collect();
            let rows: Vec<SweepRow> = points.iter().map(SweepRow::from_point).collect();
            with_output(config, stdout, |out| write_rows(&rows, config.format, out))?;
            if points.iter().all(|p| p.all_undefined()) {
                Ok(EXIT_UNDEFINED)
            } else {
                Ok(EXIT_OK)
            }
        }
        Command::Sweep => {
            let rows = run_sweep(&config.sweep_spec(&FIGURE_SUBSPACES))?;
            with_output(config, stdout, |out| write_rows(&rows, config.format, out))?;
            Ok(EXIT_OK)
        }
        Command::Fig { id } => {
            let fig = Figure::from_id(*id)?;
            let rows = figure_dataset(fig, &config.sweep_spec(&FIGURE_SUBSPACES))?;
            with_output(config, stdout, |out| write_rows(&rows, config.format, out))?;
            Ok(EXIT_OK)
        }
        Command::Verify => {
            let report = run_verification(config.alpha, config.homega, config.cutoff)?;
            with_output(config, stdout, |out| {
                for check in &report.checks {
                    writeln!(out, "{check}")?;
                }
                let verdict = if report.passed() {
                    "all checks passed"
                } else {
                    "verification FAILED"
                };
                writeln!(out, "{verdict}")
            })?;
            Ok(if report.passed() {
                EXIT_OK
            } else {
                EXIT_VERIFY_FAILED
            })
        }
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = write!(sink, "{text}");
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    match execute(&cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            usage_code(&e)
        }
    }
}
