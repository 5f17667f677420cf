//! Run configuration: defaults, flat key=value config files and flag
//! overrides, plus parsing of the coefficient specification.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use indosc_core::params::PTable;
use indosc_core::{coefficient_inverse_square, CoefficientP, ExampleParams, ToleranceConfig};

/// How the coefficient `p` was requested on the command line or in a
/// config file: `zero`, `invsq:<lambda>` or `table:<path>`.
#[derive(Debug, Clone, PartialEq)]
pub enum PSpec {
    Zero,
    InverseSquare(f64),
    Table(PathBuf),
}

impl PSpec {
    pub fn parse(text: &str) -> Result<Self> {
        if text == "zero" {
            return Ok(PSpec::Zero);
        }
        if let Some(rest) = text.strip_prefix("invsq:") {
            let lambda: f64 = rest
                .parse()
                .with_context(|| format!("bad lambda in p spec `{text}`"))?;
            if !(lambda >= 0.0) {
                bail!("lambda must be nonnegative in p spec `{text}`");
            }
            return Ok(PSpec::InverseSquare(lambda));
        }
        if let Some(rest) = text.strip_prefix("table:") {
            return Ok(PSpec::Table(PathBuf::from(rest)));
        }
        bail!("p spec must be `zero`, `invsq:<lambda>` or `table:<path>`, got `{text}`")
    }

    /// The canonical text form, echoed into report metadata.
    pub fn label(&self) -> String {
        match self {
            PSpec::Zero => "zero".to_string(),
            PSpec::InverseSquare(lambda) => format!("invsq:{lambda}"),
            PSpec::Table(path) => format!("table:{}", path.display()),
        }
    }

    /// Materializes the coefficient, reading and validating the table
    /// file if one was requested.
    pub fn build(&self, s0: f64) -> Result<CoefficientP> {
        match self {
            PSpec::Zero => Ok(CoefficientP::zero(s0)),
            PSpec::InverseSquare(lambda) => Ok(coefficient_inverse_square(*lambda, s0)),
            PSpec::Table(path) => {
                let points = read_p_table(path)?;
                if points[0].0 > s0 {
                    bail!(
                        "table file {}: first abscissa {} exceeds s0 = {s0}",
                        path.display(),
                        points[0].0
                    );
                }
                let table = PTable::new(&points)
                    .map_err(|e| anyhow!("table file {}: {e}", path.display()))?;
                Ok(CoefficientP::Table { table, s0 })
            }
        }
    }
}

/// Reads a two-column whitespace-separated `(s, p(s))` file. Blank lines
/// and `#` comments are skipped.
fn read_p_table(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read table file {}", path.display()))?;
    let mut points = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split_whitespace();
        let (Some(a), Some(b), None) = (cols.next(), cols.next(), cols.next()) else {
            bail!("{}:{}: expected exactly two columns", path.display(), idx + 1);
        };
        let s: f64 = a
            .parse()
            .with_context(|| format!("{}:{}: bad abscissa `{a}`", path.display(), idx + 1))?;
        let p: f64 = b
            .parse()
            .with_context(|| format!("{}:{}: bad value `{b}`", path.display(), idx + 1))?;
        points.push((s, p));
    }
    if points.len() < 2 {
        bail!("table file {} needs at least two data rows", path.display());
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Everything a command needs to run: parameters, coefficient choice,
/// index range, tolerances and output disposition.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ExampleParams,
    pub p_spec: PSpec,
    pub m_lo: u32,
    pub m_hi: u32,
    pub tol: ToleranceConfig,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub compare: Option<PathBuf>,
}

/// Command-line options shared by every subcommand. Each field overrides
/// the config file, which in turn overrides the built-in defaults
/// (alpha=200, beta=1, epsilon=2.5e-5, s0=pi, p=zero, m 1..6, json).
#[derive(Debug, Clone, clap::Args)]
pub struct CommonOpts {
    /// Flat key=value config file; keys match the long flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Amplitude scale of the negative bumps.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Amplitude scale of the positive bumps.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Decay base of the amplitude sequence epsilon^(m^2).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Left endpoint of the domain.
    #[arg(long)]
    pub s0: Option<f64>,
    /// Coefficient p: `zero`, `invsq:<lambda>` or `table:<path>`.
    #[arg(long)]
    pub p: Option<String>,
    /// First bump index to process.
    #[arg(long = "m-lo")]
    pub m_lo: Option<u32>,
    /// Last bump index to process.
    #[arg(long = "m-hi")]
    pub m_hi: Option<u32>,
    /// Relative tolerance for finite-interval quadrature.
    #[arg(long = "tol-quad")]
    pub tol_quad: Option<f64>,
    /// Relative tolerance for improper-integral and series truncation.
    #[arg(long = "tol-tail")]
    pub tol_tail: Option<f64>,
    /// Minimum scaled margin for a strict inequality to certify.
    #[arg(long = "margin-min")]
    pub margin_min: Option<f64>,
    /// Report format.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Compare the produced data body against this file; exit 1 on
    /// mismatch. Generation metadata is excluded from the comparison.
    #[arg(long)]
    pub compare: Option<PathBuf>,
}

impl CommonOpts {
    /// Resolves defaults, config file and flags into a `RunConfig`.
    pub fn resolve(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => parse_config_file(path)?,
            None => BTreeMap::new(),
        };
        for key in file.keys() {
            const KNOWN: &[&str] = &[
                "alpha", "beta", "epsilon", "s0", "p", "m-lo", "m-hi", "tol-quad", "tol-tail",
                "margin-min", "format",
            ];
            if !KNOWN.contains(&key.as_str()) {
                bail!("config file: unknown key `{key}`");
            }
        }

        let num = |flag: Option<f64>, key: &str, dflt: f64| -> Result<f64> {
            if let Some(v) = flag {
                return Ok(v);
            }
            match file.get(key) {
                Some(raw) => raw
                    .parse()
                    .with_context(|| format!("config file: bad number for `{key}`: `{raw}`")),
                None => Ok(dflt),
            }
        };
        let idx = |flag: Option<u32>, key: &str, dflt: u32| -> Result<u32> {
            if let Some(v) = flag {
                return Ok(v);
            }
            match file.get(key) {
                Some(raw) => raw
                    .parse()
                    .with_context(|| format!("config file: bad index for `{key}`: `{raw}`")),
                None => Ok(dflt),
            }
        };

        let base = ExampleParams::baseline();
        let params = ExampleParams::new(
            num(self.alpha, "alpha", base.alpha)?,
            num(self.beta, "beta", base.beta)?,
            num(self.epsilon, "epsilon", base.epsilon)?,
            num(self.s0, "s0", base.s0)?,
        );

        let p_text = self
            .p
            .clone()
            .or_else(|| file.get("p").cloned())
            .unwrap_or_else(|| "zero".to_string());
        let p_spec = PSpec::parse(&p_text)?;

        let m_lo = idx(self.m_lo, "m-lo", 1)?;
        let m_hi = idx(self.m_hi, "m-hi", 6)?;
        if m_lo > m_hi {
            bail!("m-lo ({m_lo}) must not exceed m-hi ({m_hi})");
        }

        let dflt = ToleranceConfig::default();
        let tol = ToleranceConfig {
            quad_rel_tol: num(self.tol_quad, "tol-quad", dflt.quad_rel_tol)?,
            tail_rel_tol: num(self.tol_tail, "tol-tail", dflt.tail_rel_tol)?,
            margin_min: num(self.margin_min, "margin-min", dflt.margin_min)?,
            fd_step_scale: dflt.fd_step_scale,
        };
        for (name, v) in [
            ("tol-quad", tol.quad_rel_tol),
            ("tol-tail", tol.tail_rel_tol),
            ("margin-min", tol.margin_min),
        ] {
            if !(v > 0.0) {
                bail!("{name} must be positive, got {v}");
            }
        }

        let format = match self.format {
            Some(f) => f,
            None => match file.get("format").map(String::as_str) {
                Some("json") => OutputFormat::Json,
                Some("csv") => OutputFormat::Csv,
                Some(other) => bail!("config file: format must be json or csv, got `{other}`"),
                None => OutputFormat::Json,
            },
        };

        Ok(RunConfig {
            params,
            p_spec,
            m_lo,
            m_hi,
            tol,
            format,
            out: self.out.clone(),
            compare: self.compare.clone(),
        })
    }
}

/// Parses a flat `key = value` file. `#` starts a comment; blank lines
/// are skipped.
fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{}:{}: expected key=value", path.display(), idx + 1);
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn p_spec_round_trip() {
        assert_eq!(PSpec::parse("zero").unwrap(), PSpec::Zero);
        assert_eq!(
            PSpec::parse("invsq:0.1").unwrap(),
            PSpec::InverseSquare(0.1)
        );
        assert_eq!(
            PSpec::parse("table:/tmp/p.dat").unwrap(),
            PSpec::Table(PathBuf::from("/tmp/p.dat"))
        );
        assert!(PSpec::parse("gauss:1").is_err());
        assert!(PSpec::parse("invsq:-1").is_err());
        assert_eq!(PSpec::InverseSquare(0.1).label(), "invsq:0.1");
    }

    #[test]
    fn flags_override_config_file() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "alpha = 400  # overridden below").unwrap();
        writeln!(file, "beta = 2").unwrap();
        writeln!(file, "m-hi = 4").unwrap();
        writeln!(file, "format = csv").unwrap();
        let opts = CommonOpts {
            config: Some(file.path().to_path_buf()),
            alpha: Some(250.0),
            beta: None,
            epsilon: None,
            s0: None,
            p: None,
            m_lo: None,
            m_hi: None,
            tol_quad: None,
            tol_tail: None,
            margin_min: None,
            format: None,
            out: None,
            compare: None,
        };
        let cfg = opts.resolve().unwrap();
        assert_eq!(cfg.params.alpha, 250.0);
        assert_eq!(cfg.params.beta, 2.0);
        assert_eq!(cfg.m_hi, 4);
        assert_eq!(cfg.format, OutputFormat::Csv);
        // Untouched keys keep their defaults.
        assert_eq!(cfg.params.epsilon, 2.5e-5);
    }

    #[test]
    fn unknown_config_key_is_rejected() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "alhpa = 400").unwrap();
        let opts = CommonOpts {
            config: Some(file.path().to_path_buf()),
            alpha: None,
            beta: None,
            epsilon: None,
            s0: None,
            p: None,
            m_lo: None,
            m_hi: None,
            tol_quad: None,
            tol_tail: None,
            margin_min: None,
            format: None,
            out: None,
            compare: None,
        };
        let err = opts.resolve().unwrap_err().to_string();
        assert!(err.contains("alhpa"), "{err}");
    }

    #[test]
    fn table_file_is_parsed_and_validated() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "# s  p(s)").unwrap();
        writeln!(file, "1.0  0.02").unwrap();
        writeln!(file, "20.0 0.0").unwrap();
        let spec = PSpec::Table(file.path().to_path_buf());
        let p = spec.build(std::f64::consts::PI).unwrap();
        assert!(p.tail(std::f64::consts::PI) > 0.0);

        let mut bad = tempfile::NamedTempFile::new().unwrap();
        writeln!(bad, "5.0 0.1").unwrap();
        writeln!(bad, "9.0 0.0").unwrap();
        let spec = PSpec::Table(bad.path().to_path_buf());
        // First abscissa above s0 leaves [s0, 5) undefined.
        assert!(spec.build(std::f64::consts::PI).is_err());
    }
}
