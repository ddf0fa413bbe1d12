//! Coupling sweeps over several subspaces and their CSV/JSON emission.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelParams, SubspaceIndex};
use crate::spectral::{critical_coupling, PhaseRegion};
use crate::thermo::{thermo_point, Temperature, ThermoPoint};

pub const DEFAULT_EP_WINDOW: f64 = 1e-6;
pub const FIGURE_SUBSPACES: [u32; 4] = [0, 1, 2, 5];
pub const CSV_HEADER: &str = "n,mu,tau,region,mu_c,Z,F,S,Cv,valid";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub alpha: f64,
    pub homega: f64,
    pub tau: f64,
    pub subspaces: Vec<u32>,
    pub mu_min: f64,
    pub mu_max: f64,
    pub steps: usize,
    /// Half-width of the band around each `mu_c` whose rows are tagged
    /// exceptional and left without observables.
    pub ep_window: f64,
}

impl SweepSpec {
    /// `alpha = 5`, `homega = 1`, `n in {0, 1, 2, 5}`, `mu in [0, 4]` in
    /// steps of 0.01.
    pub fn figure_default(tau: f64) -> Self {
        Self {
            alpha: 5.0,
            homega: 1.0,
            tau,
            subspaces: FIGURE_SUBSPACES.to_vec(),
            mu_min: 0.0,
            mu_max: 4.0,
            steps: 401,
            ep_window: DEFAULT_EP_WINDOW,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidSweep(msg));
        ModelParams::new(self.alpha, self.homega, 0.0)?;
        Temperature::new(self.tau)?;
        if !(self.mu_min.is_finite() && self.mu_max.is_finite()) {
            return invalid("mu range must be finite".into());
        }
        if self.mu_min < 0.0 {
            return invalid(format!("mu_min = {} must be non-negative", self.mu_min));
        }
        if self.mu_min >= self.mu_max {
            return invalid(format!(
                "mu_min = {} must be below mu_max = {}",
                self.mu_min, self.mu_max
            ));
        }
        if self.steps < 2 {
            return invalid(format!("steps = {} must be at least 2", self.steps));
        }
        if !(self.ep_window >= 0.0 && self.ep_window.is_finite()) {
            return invalid(format!(
                "ep_window = {} must be non-negative",
                self.ep_window
            ));
        }
        if self.subspaces.is_empty() {
            return invalid("no subspaces selected".into());
        }
        Ok(())
    }

    pub fn mu_grid(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.mu_max
                } else {
                    self.mu_min + (self.mu_max - self.mu_min) * (i as f64) / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: u32,
    pub mu: f64,
    pub tau: f64,
    pub region: PhaseRegion,
    pub mu_c: f64,
    pub z: Option<f64>,
    pub free_energy: Option<f64>,
    pub entropy: Option<f64>,
    pub specific_heat: Option<f64>,
    /// `Z > 0` away from the EP, so that every observable is defined.
    pub valid: bool,
    /// Evaluation failure other than the EP; not part of the emitted data.
    pub error: Option<Error>,
}

impl SweepRow {
    pub fn from_point(point: &ThermoPoint) -> Self {
        Self {
            n: point.n.n(),
            mu: point.mu,
            tau: point.tau,
            region: point.region,
            mu_c: point.mu_c,
            z: point.z,
            free_energy: point.free_energy,
            entropy: point.entropy,
            specific_heat: point.specific_heat,
            valid: point.region != PhaseRegion::Exceptional && point.z_positive,
            error: point.error.clone(),
        }
    }
}

fn evaluate_row(spec: &SweepSpec, n: u32, mu: f64) -> Result<SweepRow> {
    let params = ModelParams::new(spec.alpha, spec.homega, mu)?;
    let idx = SubspaceIndex(n);
    let mu_c = critical_coupling(&params, idx);
    let row = SweepRow {
        n,
        mu,
        tau: spec.tau,
        region: PhaseRegion::Exceptional,
        mu_c,
        z: None,
        free_energy: None,
        entropy: None,
        specific_heat: None,
        valid: false,
        error: None,
    };
    if (mu - mu_c).abs() <= spec.ep_window {
        return Ok(row);
    }
    let point = thermo_point(&params, idx, Temperature::new(spec.tau)?);
    Ok(SweepRow::from_point(&point))
}

/// Uniform coupling grid per subspace, rows ordered by `(n, mu)`.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut subspaces = spec.subspaces.clone();
    subspaces.sort_unstable();
    subspaces.dedup();
    let grid = spec.mu_grid();
    let jobs: Vec<(u32, f64)> = subspaces
        .iter()
        .flat_map(|&n| grid.iter().map(move |&mu| (n, mu)))
        .collect();
    jobs.par_iter()
        .map(|&(n, mu)| evaluate_row(spec, n, mu))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    FreeEnergy = 1,
    Entropy = 2,
    SpecificHeat = 3,
}

impl Figure {
    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(Figure::FreeEnergy),
            2 => Ok(Figure::Entropy),
            3 => Ok(Figure::SpecificHeat),
            _ => Err(Error::InvalidParameter {
                name: "figure",
                value: f64::from(id),
                reason: "must be 1, 2 or 3",
            }),
        }
    }

    /// CSV column carrying the plotted observable.
    pub fn column(self) -> &'static str {
        match self {
            Figure::FreeEnergy => "F",
            Figure::Entropy => "S",
            Figure::SpecificHeat => "Cv",
        }
    }

    pub fn observable(self, row: &SweepRow) -> Option<f64> {
        match self {
            Figure::FreeEnergy => row.free_energy,
            Figure::Entropy => row.entropy,
            Figure::SpecificHeat => row.specific_heat,
        }
    }
}

/// Rows for one of the three coupling-dependence figures. Every row carries
/// `mu_c`, so a plotting layer can shade the unbroken segment `mu < mu_c`.
pub fn figure_dataset(_fig: Figure, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    // All three figures share one grid; the figure only picks the column.
    run_sweep(spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidSweep(format!("unknown format `{s}`"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Destination {
    Stdout,
    File(PathBuf),
}

impl Destination {
    pub fn parse(s: &str) -> Self {
        if s == "-" || s == "stdout" {
            Destination::Stdout
        } else {
            Destination::File(PathBuf::from(s))
        }
    }
}

impl fmt::Display for Destination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Destination::Stdout => f.write_str("stdout"),
            Destination::File(p) => write!(f, "{}", p.display()),
        }
    }
}

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros trimmed,
/// exponent notation outside `[1e-5, 1e12)`.
pub fn format_sig(x: f64) -> String {
    const DIGITS: usize = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..DIGITS as i32).contains(&exp) {
        let decimals = (DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Rounds to the emitted precision so JSON and CSV carry identical values.
fn rounded(x: f64) -> f64 {
    format_sig(x).parse().unwrap_or(x)
}

fn opt_field(x: Option<f64>) -> String {
    x.map(format_sig).unwrap_or_default()
}

impl Serialize for SweepRow {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("SweepRow", 10)?;
        s.serialize_field("n", &self.n)?;
        s.serialize_field("mu", &rounded(self.mu))?;
        s.serialize_field("tau", &rounded(self.tau))?;
        s.serialize_field("region", &self.region)?;
        s.serialize_field("mu_c", &rounded(self.mu_c))?;
        s.serialize_field("Z", &self.z.map(rounded))?;
        s.serialize_field("F", &self.free_energy.map(rounded))?;
        s.serialize_field("S", &self.entropy.map(rounded))?;
        s.serialize_field("Cv", &self.specific_heat.map(rounded))?;
        s.serialize_field("valid", &self.valid)?;
        s.end()
    }
}

pub fn csv_line(row: &SweepRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        row.n,
        format_sig(row.mu),
        format_sig(row.tau),
        row.region,
        format_sig(row.mu_c),
        opt_field(row.z),
        opt_field(row.free_energy),
        opt_field(row.entropy),
        opt_field(row.specific_heat),
        row.valid
    )
}

pub fn write_rows<W: Write>(rows: &[SweepRow], format: Format, mut out: W) -> io::Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "{CSV_HEADER}")?;
            for row in rows {
                writeln!(out, "{}", csv_line(row))?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
    }
    out.flush()
}

pub fn emit(rows: &[SweepRow], format: Format, destination: &Destination) -> Result<()> {
    let io_err = |e: io::Error| Error::Io {
        destination: destination.to_string(),
        message: e.to_string(),
    };
    match destination {
        Destination::Stdout => write_rows(rows, format, io::stdout().lock()).map_err(io_err),
        Destination::File(path) => {
            let file = File::create(path).map_err(io_err)?;
            write_rows(rows, format, BufWriter::new(file)).map_err(io_err)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(tau: f64, n: u32, lo: f64, hi: f64, steps: usize) -> SweepSpec {
        SweepSpec {
            alpha: 5.0,
            homega: 1.0,
            tau,
            subspaces: vec![n],
            mu_min: lo,
            mu_max: hi,
            steps,
            ep_window: DEFAULT_EP_WINDOW,
        }
    }

    fn render(rows: &[SweepRow], format: Format) -> String {
        let mut buf = Vec::new();
        write_rows(rows, format, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(2.0), "2");
        assert_eq!(format_sig(0.5), "0.5");
        assert_eq!(format_sig(-1.40671306559), "-1.40671306559");
        assert_eq!(format_sig(4.082514369321), "4.08251436932");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig(1.5e-7), "1.5e-7");
        assert_eq!(format_sig(-2.5e20), "-2.5e20");
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(123456789012.4), "123456789012");
    }

    #[test]
    fn grid_hits_the_ep() {
        let rows = run_sweep(&spec(5.0, 0, 0.0, 4.0, 9)).unwrap();
        assert_eq!(rows.len(), 9);
        let at_ep = rows.iter().find(|r| r.mu == 2.0).unwrap();
        assert_eq!(at_ep.region, PhaseRegion::Exceptional);
        assert!(at_ep.z.is_none() && at_ep.specific_heat.is_none());
        assert!(!at_ep.valid);
        assert!(rows.windows(2).all(|w| w[0].mu < w[1].mu));
    }

    #[test]
    fn endpoints_match_point_evaluation() {
        let rows = run_sweep(&spec(1.0, 0, 0.0, 1.0, 2)).unwrap();
        let first = &rows[0];
        assert!((first.z.unwrap() - 4.56377406896).abs() < 1e-10);
        let last = &rows[1];
        assert!((last.z.unwrap() - 4.08251436932).abs() < 1e-10);
        assert!((last.free_energy.unwrap() + 1.40671306559).abs() < 1e-10);
        assert!((last.entropy.unwrap() - 0.279801519054).abs() < 1e-10);
        assert!((last.specific_heat.unwrap() - 0.353158819743).abs() < 1e-10);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(matches!(
            run_sweep(&spec(5.0, 0, 0.0, 4.0, 1)),
            Err(Error::InvalidSweep(_))
        ));
        assert!(run_sweep(&spec(5.0, 0, 4.0, 0.0, 10)).is_err());
        assert!(run_sweep(&spec(0.0, 0, 0.0, 4.0, 10)).is_err());
        let mut s = spec(5.0, 0, 0.0, 4.0, 10);
        s.ep_window = -1.0;
        assert!(run_sweep(&s).is_err());
    }

    #[test]
    fn rows_are_ordered_by_subspace_then_coupling() {
        let mut s = spec(5.0, 0, 0.0, 3.0, 7);
        s.subspaces = vec![5, 0, 2, 0];
        let rows = run_sweep(&s).unwrap();
        assert_eq!(rows.len(), 21);
        let keys: Vec<(u32, f64)> = rows.iter().map(|r| (r.n, r.mu)).collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        assert_eq!(keys, sorted);
    }

    #[test]
    fn emission_formats() {
        assert_eq!(render(&[], Format::Csv), format!("{CSV_HEADER}\n"));

        let rows = run_sweep(&spec(1.0, 0, 0.5, 1.0, 2)).unwrap();
        let csv = render(&rows[1..], Format::Csv);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(
            lines[1],
            "0,1,1,unbroken,2,4.08251436932,-1.40671306559,0.279801519054,0.353158819743,true"
        );

        // broken row with Z < 0
        let rows = run_sweep(&spec(1.0, 0, 2.5, 3.0, 2)).unwrap();
        let line = csv_line(&rows[1]);
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[3], "broken");
        assert!(fields[5].starts_with("-1.004607"));
        assert_eq!((fields[6], fields[7]), ("", ""));
        assert!(!fields[8].is_empty());
        assert_eq!(fields[9], "false");
    }

    #[test]
    fn json_uses_null_for_undefined() {
        let rows = run_sweep(&spec(5.0, 0, 0.0, 4.0, 9)).unwrap();
        let json = render(&rows, Format::Json);
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        let at_ep = &value.as_array().unwrap()[4];
        assert_eq!(at_ep["mu"], 2.0);
        assert_eq!(at_ep["region"], "exceptional");
        assert!(at_ep["Z"].is_null() && at_ep["F"].is_null() && at_ep["Cv"].is_null());
        let keys: Vec<&String> = at_ep.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 10);
    }

    #[test]
    fn emission_is_deterministic() {
        let s = SweepSpec::figure_default(5.0);
        let a = render(
            &figure_dataset(Figure::SpecificHeat, &s).unwrap(),
            Format::Csv,
        );
        let b = render(
            &figure_dataset(Figure::SpecificHeat, &s).unwrap(),
            Format::Csv,
        );
        assert_eq!(a, b);
        let a = render(&run_sweep(&s).unwrap(), Format::Json);
        let b = render(&run_sweep(&s).unwrap(), Format::Json);
        assert_eq!(a, b);
    }

    #[test]
    fn writes_files_and_reports_bad_destinations() {
        let dir = std::env::temp_dir().join(format!("pseudotherm-emit-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("rows.csv");
        let rows = run_sweep(&spec(5.0, 1, 0.0, 2.0, 5)).unwrap();
        emit(&rows, Format::Csv, &Destination::File(path.clone())).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            render(&rows, Format::Csv)
        );
        let bad = Destination::File(dir.join("missing").join("rows.csv"));
        match emit(&rows, Format::Csv, &bad) {
            Err(Error::Io { destination, .. }) => assert!(destination.ends_with("rows.csv")),
            other => panic!("expected Io error, got {other:?}"),
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
