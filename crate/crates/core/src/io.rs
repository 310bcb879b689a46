//! Config files, presets and output writers.
//!
//! Experiments are described in TOML. Complex numbers are written as
//! `[re, im]` pairs and unknown keys are rejected:
//!
//! ```toml
//! seed = 1
//! steps = 3000
//!
//! [coin]
//! beta = 1.4922565104551517
//!
//! [potential]
//! drift = 0.2
//!
//! [potential.shape]
//! kind = "multipole"
//! poles = [{ amplitude = [0.0, -1.0], position = [90.0, 1.0], order = 2 }]
//!
//! [excitation]
//! kind = "delta"
//! site = 0
//!
//! [output]
//! stride = 10
//! sites = [-300, 300]
//! ```
//!
//! Maps are written as CSV (`m,n,value` or `m,n,re,im`), summaries as JSON.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bands::{band_table, enumerate_channels, BandRow, ChannelSet, MovingFrameParams, DEFAULT_ALPHA_RANGE};
use crate::born::{born_weights, BornPrediction};
use crate::error::{Error, Result};
use crate::harness::{
    run_pair, transmitted_channel_analysis, ChannelMeasurement, Excitation, ExperimentConfig, ExperimentResult,
    FieldMap, RecordSpec, Window,
};
use crate::lattice::{Band, CoinConfig, DEFAULT_OVERFLOW_GUARD};
use crate::potentials::{random_multipole, DriftingPotential, KKMultiPole, Pole, Shape, Tabulated};

/// Version tag written into every summary.
pub const SUMMARY_FORMAT: &str = "meshwalk-summary/1";

/// Incident wavenumber used for channel tables of runs without a carrier.
pub const DEFAULT_TABLE_Q0: f64 = PI / 2.0;

pub mod presets {
    //! Parameters of the bundled scenarios.
    use std::f64::consts::PI;

    pub const NAMES: [&str; 5] = ["fig2", "fig3a", "fig3b", "fig3c", "fig4"];

    pub const FIG2_BETA: f64 = PI / 3.0;
    pub const FIG2_DRIFT: f64 = 0.8;
    pub const FIG2_Q0: f64 = 0.5;
    pub const FIG2_ALPHAS: std::ops::RangeInclusive<i32> = -3..=3;
    pub const FIG2_POINTS: usize = 512;

    pub const FIG3_BETA: f64 = 0.95 * PI / 2.0;
    pub const FIG3_AMPLITUDE: [f64; 2] = [0.0, -1.0];
    pub const FIG3_POSITION: [f64; 2] = [90.0, 1.0];
    pub const FIG3_ORDER: u32 = 2;
    pub const FIG3_SLOW_DRIFT: f64 = 0.2;
    pub const FIG3_FAST_DRIFT: f64 = 0.8;

    pub const FIG4_POLES: usize = 25;
    pub const FIG4_BASE: [f64; 2] = [90.0, 1.0];
    pub const FIG4_AMPLITUDE_RANGE: [f64; 2] = [0.0, 0.5];
    pub const FIG4_ORDER: u32 = 2;
    pub const FIG4_DRIFT: f64 = 0.2;
    pub const FIG4_SEED: u64 = 1;

    /// Long enough for the drifting support to clear the excitation.
    pub const STEPS: u64 = 3000;
    pub const STRIDE: u64 = 5;
    pub const SITES: [i64; 2] = [-300, 300];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoinSection {
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleSpec {
    pub amplitude: Complex64,
    pub position: Complex64,
    pub order: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Zero,
    Multipole {
        poles: Vec<PoleSpec>,
    },
    RealPart {
        poles: Vec<PoleSpec>,
    },
    Tabulated {
        xs: Vec<f64>,
        values: Vec<Complex64>,
    },
    /// Drawn from the top-level seed.
    RandomMultipole {
        count: usize,
        base: Complex64,
        amplitude_range: [f64; 2],
        order: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub drift: f64,
    pub shape: ShapeSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExcitationSpec {
    Delta {
        #[serde(default)]
        site: i64,
    },
    WavePacket {
        q: f64,
        width: f64,
        #[serde(default)]
        center: i64,
        #[serde(default = "upper")]
        band: Band,
    },
}

fn upper() -> Band {
    Band::Upper
}

fn yes() -> bool {
    true
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "yes")]
    pub power: bool,
    #[serde(default = "yes")]
    pub difference: bool,
    #[serde(default)]
    pub fields: bool,
    #[serde(default = "one")]
    pub stride: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sites: Option<[i64; 2]>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: None, power: true, difference: true, fields: false, stride: 1, sites: None }
    }
}

fn alpha_min() -> i32 {
    *DEFAULT_ALPHA_RANGE.start()
}

fn alpha_max() -> i32 {
    *DEFAULT_ALPHA_RANGE.end()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    /// Defaults to the wave-packet carrier, or pi/2 for other excitations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q0: Option<f64>,
    #[serde(default = "alpha_min")]
    pub alpha_min: i32,
    #[serde(default = "alpha_max")]
    pub alpha_max: i32,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self { q0: None, alpha_min: alpha_min(), alpha_max: alpha_max() }
    }
}

/// Contents of an experiment config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    #[serde(default)]
    pub seed: u64,
    pub steps: u64,
    pub coin: CoinSection,
    pub potential: PotentialSection,
    pub excitation: ExcitationSpec,
    /// Explicit `[lo, hi]`; automatic when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[i64; 2]>,
    #[serde(default = "yes")]
    pub require_passage: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overflow_guard: Option<f64>,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub channels: ChannelSection,
}

fn complex(c: [f64; 2]) -> Complex64 {
    Complex64::new(c[0], c[1])
}

fn config_error(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl ShapeSpec {
    pub fn build(&self, seed: u64) -> Result<Shape> {
        let poles = |specs: &[PoleSpec]| {
            KKMultiPole::new(specs.iter().map(|p| Pole::new(p.amplitude, p.position, p.order)).collect())
        };
        match self {
            ShapeSpec::Zero => Ok(Shape::zero()),
            ShapeSpec::Multipole { poles: p } => Ok(Shape::MultiPole(poles(p)?)),
            ShapeSpec::RealPart { poles: p } => Ok(Shape::RealPart(poles(p)?)),
            ShapeSpec::Tabulated { xs, values } => Ok(Shape::Tabulated(Tabulated::new(xs.clone(), values.clone())?)),
            ShapeSpec::RandomMultipole { count, base, amplitude_range, order } => Ok(Shape::MultiPole(
                random_multipole(*count, *base, (amplitude_range[0], amplitude_range[1]), *order, seed)?,
            )),
        }
    }
}

impl ExcitationSpec {
    pub fn build(&self) -> Excitation {
        match *self {
            ExcitationSpec::Delta { site } => Excitation::Delta { site },
            ExcitationSpec::WavePacket { q, width, center, band } => Excitation::WavePacket { q, width, center, band },
        }
    }
}

/// A validated experiment plus the channel table request.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub q0: f64,
    pub alphas: RangeInclusive<i32>,
}

impl RunFile {
    pub fn from_toml(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Check every parameter and assemble the harness config.
    pub fn build(&self) -> Result<Experiment> {
        let coin = CoinConfig::new(self.coin.beta).map_err(config_error)?;
        let shape = self.potential.shape.build(self.seed).map_err(config_error)?;
        let potential = DriftingPotential::new(shape, self.potential.drift).map_err(config_error)?;
        let mut config = ExperimentConfig::new(coin, potential, self.steps, self.excitation.build());
        if let Some([lo, hi]) = self.window {
            config.window = Window::Explicit { lo, hi };
        }
        config.record = RecordSpec {
            power: self.output.power,
            difference: self.output.difference,
            fields: self.output.fields,
            stride: self.output.stride,
            sites: self.output.sites.map(|[lo, hi]| (lo, hi)),
        };
        config.overflow_guard = self.overflow_guard.unwrap_or(DEFAULT_OVERFLOW_GUARD);
        config.require_passage = self.require_passage;
        config.validate().map_err(config_error)?;

        let q0 = match (self.channels.q0, config.excitation.carrier()) {
            (Some(q), _) => q,
            (None, Some((q, Band::Upper))) => q,
            _ => DEFAULT_TABLE_Q0,
        };
        if !(q0 > -PI && q0 <= PI) {
            return Err(Error::Config(format!("channel q0 = {q0} outside (-pi, pi]")));
        }
        if self.channels.alpha_min > self.channels.alpha_max {
            return Err(Error::Config(format!(
                "alpha_min {} exceeds alpha_max {}",
                self.channels.alpha_min, self.channels.alpha_max
            )));
        }
        Ok(Experiment { config, q0, alphas: self.channels.alpha_min..=self.channels.alpha_max })
    }
}

/// Read, parse and validate a config file.
pub fn load_config(path: &Path) -> Result<RunFile> {
    if !path.exists() {
        return Err(Error::ConfigNotFound(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let run = RunFile::from_toml(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), msg: e.to_string() })?;
    run.build()?;
    Ok(run)
}

/// What a preset asks for.
#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    /// Band table and channel roots only.
    Bands { beta: f64, drift: f64, q0: f64, alphas: RangeInclusive<i32>, points: usize },
    Run(Box<RunFile>),
}

fn fig3(drift: f64, shape: ShapeSpec) -> RunFile {
    RunFile {
        seed: 0,
        steps: presets::STEPS,
        coin: CoinSection { beta: presets::FIG3_BETA },
        potential: PotentialSection { drift, shape },
        excitation: ExcitationSpec::Delta { site: 0 },
        window: None,
        require_passage: true,
        overflow_guard: None,
        output: OutputSection {
            stride: presets::STRIDE,
            sites: Some(presets::SITES),
            ..OutputSection::default()
        },
        channels: ChannelSection::default(),
    }
}

fn fig3_pole() -> Vec<PoleSpec> {
    vec![PoleSpec {
        amplitude: complex(presets::FIG3_AMPLITUDE),
        position: complex(presets::FIG3_POSITION),
        order: presets::FIG3_ORDER,
    }]
}

pub fn preset(name: &str) -> Result<Preset> {
    use presets::*;
    Ok(match name {
        "fig2" => Preset::Bands {
            beta: FIG2_BETA,
            drift: FIG2_DRIFT,
            q0: FIG2_Q0,
            alphas: FIG2_ALPHAS,
            points: FIG2_POINTS,
        },
        "fig3a" => Preset::Run(Box::new(fig3(FIG3_SLOW_DRIFT, ShapeSpec::Multipole { poles: fig3_pole() }))),
        "fig3b" => Preset::Run(Box::new(fig3(FIG3_FAST_DRIFT, ShapeSpec::Multipole { poles: fig3_pole() }))),
        "fig3c" => Preset::Run(Box::new(fig3(FIG3_SLOW_DRIFT, ShapeSpec::RealPart { poles: fig3_pole() }))),
        "fig4" => {
            let mut run = fig3(
                FIG4_DRIFT,
                ShapeSpec::RandomMultipole {
                    count: FIG4_POLES,
                    base: complex(FIG4_BASE),
                    amplitude_range: FIG4_AMPLITUDE_RANGE,
                    order: FIG4_ORDER,
                },
            );
            run.seed = FIG4_SEED;
            Preset::Run(Box::new(run))
        }
        other => {
            return Err(Error::Config(format!("unknown preset '{other}' (expected one of {})", NAMES.join(", "))))
        }
    })
}

/// `%.17g`: 17 significant digits with trailing zeros removed.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    }
}

fn parse_float(s: &str) -> Option<f64> {
    s.trim().parse().ok()
}

/// Values that can fill a field-map CSV.
pub trait MapValue: Copy + Sized {
    /// Value columns after `m,n`.
    const COLUMNS: &'static str;
    fn write_cells(&self, out: &mut String);
    fn parse_cells(cells: &[&str]) -> Option<Self>;
}

impl MapValue for f64 {
    const COLUMNS: &'static str = "value";

    fn write_cells(&self, out: &mut String) {
        out.push_str(&format_float(*self));
    }

    fn parse_cells(cells: &[&str]) -> Option<Self> {
        match cells {
            [x] => parse_float(x),
            _ => None,
        }
    }
}

impl MapValue for Complex64 {
    const COLUMNS: &'static str = "re,im";

    fn write_cells(&self, out: &mut String) {
        let _ = write!(out, "{},{}", format_float(self.re), format_float(self.im));
    }

    fn parse_cells(cells: &[&str]) -> Option<Self> {
        match cells {
            [re, im] => Some(Complex64::new(parse_float(re)?, parse_float(im)?)),
            _ => None,
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_all(path: &Path, text: &str) -> Result<()> {
    let mut out = create(path)?;
    out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}

/// CSV with one row per `(m, n)` in row-major order.
pub fn write_field_map<T: MapValue>(map: &FieldMap<T>, path: &Path) -> Result<()> {
    if map.is_empty() {
        return Err(Error::InvalidParameter("cannot write an empty field map".into()));
    }
    let mut out = create(path)?;
    let mut line = String::new();
    writeln!(out, "m,n,{}", T::COLUMNS).map_err(|e| Error::io(path, e))?;
    for (m, n, value) in map.entries() {
        line.clear();
        let _ = write!(line, "{m},{n},");
        value.write_cells(&mut line);
        line.push('\n');
        out.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Inverse of [`write_field_map`]; rows must cover a full rectangle.
pub fn read_field_map<T: MapValue>(path: &Path) -> Result<FieldMap<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let bad = |msg: String| Error::Parse { path: path.to_path_buf(), msg };
    let mut lines = BufReader::new(file).lines();
    let header = lines.next().transpose().map_err(|e| Error::io(path, e))?.unwrap_or_default();
    let expected = format!("m,n,{}", T::COLUMNS);
    if header != expected {
        return Err(bad(format!("header '{header}', expected '{expected}'")));
    }
    let mut rows: Vec<(u64, i64, T)> = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let cells: Vec<&str> = line.split(',').collect();
        let parsed = (cells.len() >= 3)
            .then(|| Some((cells[0].parse().ok()?, cells[1].parse().ok()?, T::parse_cells(&cells[2..])?)))
            .flatten();
        rows.push(parsed.ok_or_else(|| bad(format!("line {}: '{line}'", k + 2)))?);
    }
    let (Some(first), Some(last)) = (rows.first(), rows.last()) else {
        return Err(bad("no data rows".into()));
    };
    let (lo, hi) = (first.1, last.1);
    let mut map = FieldMap::new(lo, hi);
    let width = map.width();
    if hi < lo || rows.len() % width != 0 {
        return Err(bad("rows do not form a rectangle".into()));
    }
    for chunk in rows.chunks(width) {
        let m = chunk[0].0;
        if chunk.iter().zip(lo..=hi).any(|(r, n)| r.0 != m || r.1 != n) {
            return Err(bad(format!("row for step {m} is not a full site range")));
        }
        map.push_row(m, chunk.iter().map(|r| r.2));
    }
    Ok(map)
}

pub fn write_residuals(series: &[(u64, f64)], path: &Path) -> Result<()> {
    let mut text = String::from("m,r\n");
    for (m, r) in series {
        let _ = writeln!(text, "{m},{}", format_float(*r));
    }
    write_all(path, &text)
}

pub fn write_band_table(rows: &[BandRow], path: &Path) -> Result<()> {
    let mut text = String::from("q,eps_upper,eps_lower\n");
    for r in rows {
        let _ = writeln!(text, "{},{},{}", format_float(r.q), format_float(r.eps_upper), format_float(r.eps_lower));
    }
    write_all(path, &text)
}

pub fn write_spectrum(q: &[f64], values: &[Complex64], path: &Path) -> Result<()> {
    let mut text = String::from("q,re,im\n");
    for (q, v) in q.iter().zip(values) {
        let _ = writeln!(text, "{},{},{}", format_float(*q), format_float(v.re), format_float(v.im));
    }
    write_all(path, &text)
}

/// One row of the summary channel table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRow {
    pub alpha: i32,
    pub band: Band,
    pub q: f64,
    pub incident: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub born_abs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured_abs: Option<f64>,
}

pub fn channel_rows(
    set: &ChannelSet,
    born: Option<&BornPrediction>,
    measured: Option<&ChannelMeasurement>,
) -> Vec<ChannelRow> {
    set.channels
        .iter()
        .enumerate()
        .map(|(k, c)| ChannelRow {
            alpha: c.alpha,
            band: c.band,
            q: c.q,
            incident: c.is_incident(),
            born_abs: born.map(|b| b.channels[k].weight.norm()),
            measured_abs: measured.map(|m| m.channels[k].amplitude),
        })
        .collect()
}

pub fn write_channel_table(rows: &[ChannelRow], path: &Path) -> Result<()> {
    let opt = |x: Option<f64>| x.map(format_float).unwrap_or_default();
    let mut text = String::from("alpha,band,q,incident,born_abs,measured_abs\n");
    for r in rows {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{}",
            r.alpha,
            r.band,
            format_float(r.q),
            r.incident,
            opt(r.born_abs),
            opt(r.measured_abs)
        );
    }
    write_all(path, &text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub format: String,
    pub config: RunFile,
    pub final_residual: f64,
    pub residual_file: Option<String>,
    pub channel_q0: f64,
    pub channels: Vec<ChannelRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leakage_floor: Option<f64>,
    pub runtime_seconds: f64,
    pub artifacts: Vec<String>,
}

pub fn write_summary(summary: &Summary, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    text.push('\n');
    write_all(path, &text)
}

pub fn read_summary(path: &Path) -> Result<Summary> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), msg: e.to_string() })
}

/// Channels, Born weights and (for wave packets) measured amplitudes of a
/// finished run. Empty when the drift does not give monotone bands.
pub fn analyse_channels(
    experiment: &Experiment,
    result: &ExperimentResult,
) -> Result<(Option<ChannelSet>, Option<BornPrediction>, Option<ChannelMeasurement>)> {
    let config = &experiment.config;
    let params = MovingFrameParams { coin: config.coin, drift: config.potential.drift() };
    if !params.is_monotone() {
        log::warn!(
            "drift {} does not exceed cos(beta) = {}; skipping the channel table",
            params.drift,
            params.coin.cos()
        );
        return Ok((None, None, None));
    }
    let mut set = enumerate_channels(&params, experiment.q0, experiment.alphas.clone())?;
    let born = born_weights(&set, config.potential.shape())?;
    born.apply_to(&mut set);
    let measured = match config.excitation.carrier() {
        Some((q, Band::Upper)) if q == experiment.q0 && result.passage.cleared => {
            Some(transmitted_channel_analysis(result, &set)?)
        }
        _ => None,
    };
    Ok((Some(set), Some(born), measured))
}

/// Outcome of [`execute_run`].
#[derive(Debug)]
pub struct RunReport {
    pub result: ExperimentResult,
    pub summary: Summary,
    pub written: Vec<PathBuf>,
}

/// Run a config and write its maps, residuals, channel table and summary
/// into `out_dir`.
pub fn execute_run(run: &RunFile, out_dir: &Path) -> Result<RunReport> {
    let experiment = run.build()?;
    let result = run_pair(&experiment.config)?;
    let (set, born, measured) = analyse_channels(&experiment, &result)?;

    let mut written = Vec::new();
    let mut emit = |name: &str, f: &dyn Fn(&Path) -> Result<()>| -> Result<()> {
        let path = out_dir.join(name);
        f(&path)?;
        written.push(path);
        Ok(())
    };
    if let Some(map) = &result.power {
        emit("P.csv", &|p| write_field_map(map, p))?;
    }
    if let Some(map) = &result.difference {
        emit("Q.csv", &|p| write_field_map(map, p))?;
    }
    if let Some(map) = &result.u_field {
        emit("u.csv", &|p| write_field_map(map, p))?;
    }
    if let Some(map) = &result.v_field {
        emit("v.csv", &|p| write_field_map(map, p))?;
    }
    emit("residual.csv", &|p| write_residuals(&result.residuals, p))?;
    let rows = set.as_ref().map(|s| channel_rows(s, born.as_ref(), measured.as_ref())).unwrap_or_default();
    if !rows.is_empty() {
        emit("channels.csv", &|p| write_channel_table(&rows, p))?;
    }

    let summary_path = out_dir.join("summary.json");
    let mut artifacts: Vec<String> =
        written.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect();
    artifacts.push("summary.json".into());
    let summary = Summary {
        format: SUMMARY_FORMAT.into(),
        config: run.clone(),
        final_residual: result.final_residual,
        residual_file: Some("residual.csv".into()),
        channel_q0: experiment.q0,
        channels: rows,
        leakage_floor: measured.as_ref().map(|m| m.leakage_floor),
        runtime_seconds: result.runtime.as_secs_f64(),
        artifacts,
    };
    write_summary(&summary, &summary_path)?;
    written.push(summary_path);
    Ok(RunReport { result, summary, written })
}

/// Write `bands.csv` and `channels.csv` for a coin and drift.
pub fn execute_bands(
    beta: f64,
    drift: f64,
    points: usize,
    channels: Option<(f64, RangeInclusive<i32>)>,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let params = MovingFrameParams::new(beta, drift)?;
    if points == 0 {
        return Err(Error::InvalidParameter("band table needs at least one point".into()));
    }
    let path = out_dir.join("bands.csv");
    write_band_table(&band_table(&params, points), &path)?;
    let mut written = vec![path];
    if let Some((q0, alphas)) = channels {
        let set = enumerate_channels(&params, q0, alphas)?;
        let path = out_dir.join("channels.csv");
        write_channel_table(&channel_rows(&set, None, None), &path)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting() {
        assert_eq!(format_float(2.0), "2");
        assert_eq!(format_float(-0.5), "-0.5");
        assert_eq!(format_float(0.1), "0.10000000000000001");
        assert_eq!(format_float(1e-5), "1.0000000000000001e-05");
        assert_eq!(format_float(1e20), "1e+20");
        assert_eq!(format_float(123456.0), "123456");
        assert_eq!(format_float(0.0), "0");
        for x in [PI, -1.0 / 3.0, 6.02e23, 5e-324, f64::MAX, 1e16, 1e17] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn preset_constants() {
        let Preset::Run(run) = preset("fig3a").unwrap() else { panic!() };
        assert_eq!(run.coin.beta, 0.95 * PI / 2.0);
        assert_eq!(run.potential.drift, 0.2);
        assert_eq!(
            run.potential.shape,
            ShapeSpec::Multipole {
                poles: vec![PoleSpec {
                    amplitude: Complex64::new(0.0, -1.0),
                    position: Complex64::new(90.0, 1.0),
                    order: 2
                }]
            }
        );
        assert_eq!(run.excitation, ExcitationSpec::Delta { site: 0 });
        let Preset::Run(b) = preset("fig3b").unwrap() else { panic!() };
        assert_eq!(b.potential.drift, 0.8);
        let Preset::Run(c) = preset("fig3c").unwrap() else { panic!() };
        assert!(matches!(c.potential.shape, ShapeSpec::RealPart { .. }));
        let Preset::Run(f4) = preset("fig4").unwrap() else { panic!() };
        match &f4.potential.shape {
            ShapeSpec::RandomMultipole { count, base, amplitude_range, .. } => {
                assert_eq!(*count, 25);
                assert_eq!(*base, Complex64::new(90.0, 1.0));
                assert_eq!(*amplitude_range, [0.0, 0.5]);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(f4.potential.drift, 0.2);
        match preset("fig2").unwrap() {
            Preset::Bands { beta, drift, .. } => {
                assert_eq!(beta, PI / 3.0);
                assert_eq!(drift, 0.8);
            }
            other => panic!("{other:?}"),
        }
        assert!(preset("fig5").is_err());
    }

    #[test]
    fn every_preset_builds() {
        for name in presets::NAMES {
            if let Preset::Run(run) = preset(name).unwrap() {
                let exp = run.build().unwrap();
                assert!(exp.config.passage().cleared, "{name}");
            }
        }
    }

    #[test]
    fn toml_round_trip() {
        let Preset::Run(run) = preset("fig4").unwrap() else { panic!() };
        let text = run.to_toml();
        assert_eq!(RunFile::from_toml(&text).unwrap(), *run);
    }

    #[test]
    fn unknown_keys_rejected() {
        let base = r#"
            steps = 10
            [coin]
            beta = 1.0
            [potential]
            drift = 0.5
            [potential.shape]
            kind = "zero"
            [excitation]
            kind = "delta"
        "#;
        assert!(RunFile::from_toml(base).is_ok());
        assert!(RunFile::from_toml(&base.replace("beta = 1.0", "beta = 1.0\nbetta = 2.0")).is_err());
        assert!(RunFile::from_toml(&base.replace("kind = \"delta\"", "kind = \"delta\"\nsight = 3")).is_err());
        assert!(RunFile::from_toml(&format!("{base}\nextra = 1")).is_err());
    }

    #[test]
    fn invalid_physics_rejected_at_load() {
        let text = r#"
            steps = 10
            [coin]
            beta = 4.0
            [potential]
            drift = 0.5
            [potential.shape]
            kind = "zero"
            [excitation]
            kind = "delta"
        "#;
        let run = RunFile::from_toml(text).unwrap();
        assert!(matches!(run.build(), Err(Error::Config(_))));
    }
}
