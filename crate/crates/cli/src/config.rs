// SPDX-License-Identifier: Apache-2.0

//! Run configuration files.
//!
//! The format is a flat list of `key = value` lines. `#` starts a comment,
//! blank lines are ignored and `mode` is required. A bench is either a named
//! preset or an ordered list of `element = ...` lines:
//!
//! ```text
//! mode = sweep
//! preset = fig1
//! theta1 = 31.32
//! theta2_start = 0
//! theta2_stop = 45
//! theta2_step = 1
//! ```
//!
//! ```text
//! mode = simulate
//! element = crystal(1, 0)
//! element = hwp(22.5)
//! element = crystal(2, 90)
//! ```
//!
//! Angles are in degrees and lengths are positive rationals written `p` or
//! `p/q`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_rational::Rational64;
use polarchan::bench::OpticalElement;

/// What a run computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    /// Poincaré-sphere images of the six basis states through one bench.
    Simulate,
    /// Four-crystal bench radii, degree of polarization and χ eigenvalues over θ2.
    Sweep,
    /// Simulated process tomography of one bench.
    Tomo,
    /// Pauli-channel feasibility over an (R1, R2 = R3) grid.
    Feasibility,
    /// (R1, R2) points reachable with the four-crystal bench.
    Region,
}

impl Mode {
    pub const ALL: [Mode; 5] = [
        Mode::Simulate,
        Mode::Sweep,
        Mode::Tomo,
        Mode::Feasibility,
        Mode::Region,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Sweep => "sweep",
            Mode::Tomo => "tomo",
            Mode::Feasibility => "feasibility",
            Mode::Region => "region",
        }
    }
}

impl FromStr for Mode {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Mode::ALL.into_iter().find(|m| m.name() == s).ok_or(())
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Lyot,
    TwoCrystal,
    RotatedCrystals,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::Fig1,
        Preset::Lyot,
        Preset::TwoCrystal,
        Preset::RotatedCrystals,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Lyot => "lyot",
            Preset::TwoCrystal => "two_crystal",
            Preset::RotatedCrystals => "rotated_crystals",
        }
    }

    /// Keys that configure this preset.
    fn keys(self) -> &'static [&'static str] {
        match self {
            Preset::Fig1 => &[
                "theta1",
                "theta2",
                "theta2_start",
                "theta2_stop",
                "theta2_step",
                "l1",
                "l2",
                "compensate",
            ],
            Preset::Lyot => &["length"],
            Preset::TwoCrystal => &["angle"],
            Preset::RotatedCrystals => &["rotation"],
        }
    }
}

impl FromStr for Preset {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or(())
    }
}

/// Parameters of the four-crystal depolarizer (preset `fig1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Params {
    pub theta1: f64,
    /// θ2 values, ascending. A single value outside sweep mode.
    pub theta2: Vec<f64>,
    pub l1: Rational64,
    pub l2: Rational64,
    /// Append HWP(0) so that the map is diag(R1, R2, R3) rather than
    /// diag(R1, −R2, −R3).
    pub compensate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BenchSpec {
    Fig1(Fig1Params),
    Lyot { length: Rational64 },
    TwoCrystal { angle: f64 },
    RotatedCrystals { rotation: f64 },
    Inline(Vec<OpticalElement>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomoConfig {
    pub shots: u64,
    pub seed: Option<u64>,
    /// Optional path for the raw count table in tomo mode.
    pub counts_out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    /// `None` for the feasibility and region modes.
    pub bench: Option<BenchSpec>,
    /// Present when tomography is requested (always in tomo mode; in sweep
    /// mode when `shots` is set).
    pub tomography: Option<TomoConfig>,
    /// Grid points per axis for feasibility and region modes.
    pub grid: usize,
    /// Region-scan resolution used for the `reachable` column.
    pub region_grid: usize,
    pub out: Option<PathBuf>,
}

pub const DEFAULT_FEASIBILITY_GRID: usize = 301;
pub const DEFAULT_SHOTS: u64 = 10_000;
/// Largest number of grid points a feasibility or region run may evaluate.
pub const MAX_GRID_POINTS: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigErrorKind {
    UnknownKey,
    MalformedAngle,
    MalformedValue,
    DegenerateRange,
    MissingKey,
    DuplicateKey,
    UnknownMode,
    UnknownPreset,
    Conflict,
    GridTooLarge,
}

impl ConfigErrorKind {
    pub fn label(self) -> &'static str {
        match self {
            ConfigErrorKind::UnknownKey => "unknown key",
            ConfigErrorKind::MalformedAngle => "malformed angle",
            ConfigErrorKind::MalformedValue => "malformed value",
            ConfigErrorKind::DegenerateRange => "degenerate range",
            ConfigErrorKind::MissingKey => "missing required key",
            ConfigErrorKind::DuplicateKey => "duplicate key",
            ConfigErrorKind::UnknownMode => "unknown mode",
            ConfigErrorKind::UnknownPreset => "unknown preset",
            ConfigErrorKind::Conflict => "conflicting keys",
            ConfigErrorKind::GridTooLarge => "grid too large",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// 1-based line number, when the error belongs to a line.
    pub line: Option<usize>,
    pub kind: ConfigErrorKind,
    pub detail: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        write!(f, "{}: {}", self.kind.label(), self.detail)
    }
}

impl std::error::Error for ConfigError {}

const GLOBAL_KEYS: &[&str] = &[
    "mode",
    "preset",
    "element",
    "shots",
    "seed",
    "counts_out",
    "grid",
    "region_grid",
    "out",
];

struct Entry {
    line: usize,
    key: String,
    value: String,
}

struct Parser {
    entries: Vec<Entry>,
    errors: Vec<ConfigError>,
}

impl Parser {
    fn error(&mut self, line: Option<usize>, kind: ConfigErrorKind, detail: impl Into<String>) {
        self.errors.push(ConfigError {
            line,
            kind,
            detail: detail.into(),
        });
    }

    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    fn angle(&mut self, key: &str) -> Option<f64> {
        let (line, value) = self.get(key).map(|e| (e.line, e.value.clone()))?;
        match parse_angle(&value) {
            Some(a) => Some(a),
            None => {
                self.error(
                    Some(line),
                    ConfigErrorKind::MalformedAngle,
                    format!("{key} = {value}"),
                );
                None
            }
        }
    }

    fn length(&mut self, key: &str) -> Option<Rational64> {
        let (line, value) = self.get(key).map(|e| (e.line, e.value.clone()))?;
        match parse_length(&value) {
            Some(l) => Some(l),
            None => {
                self.error(
                    Some(line),
                    ConfigErrorKind::MalformedValue,
                    format!("{key} = {value} is not a positive rational p or p/q"),
                );
                None
            }
        }
    }

    fn parsed<T: FromStr>(&mut self, key: &str, what: &str) -> Option<T> {
        let (line, value) = self.get(key).map(|e| (e.line, e.value.clone()))?;
        match value.parse() {
            Ok(v) => Some(v),
            Err(_) => {
                self.error(
                    Some(line),
                    ConfigErrorKind::MalformedValue,
                    format!("{key} = {value} is not {what}"),
                );
                None
            }
        }
    }

    fn require_angle(&mut self, key: &str, preset: Preset) -> Option<f64> {
        if self.get(key).is_none() {
            self.error(
                None,
                ConfigErrorKind::MissingKey,
                format!("{key} (needed by preset {})", preset.name()),
            );
            return None;
        }
        self.angle(key)
    }
}

/// Parses and validates a configuration file. All problems found are
/// returned together, in line order where applicable.
pub fn parse_config(text: &str) -> Result<RunConfig, Vec<ConfigError>> {
    let mut p = Parser {
        entries: Vec::new(),
        errors: Vec::new(),
    };

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            p.error(
                Some(line),
                ConfigErrorKind::MalformedValue,
                format!("expected `key = value`, found `{content}`"),
            );
            continue;
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let known = GLOBAL_KEYS.contains(&key.as_str())
            || Preset::ALL
                .iter()
                .any(|pr| pr.keys().contains(&key.as_str()));
        if !known {
            p.error(Some(line), ConfigErrorKind::UnknownKey, format!("`{key}`"));
            continue;
        }
        if key != "element" {
            if let Some(first) = p.get(&key) {
                let detail = format!("`{key}` already set on line {}", first.line);
                p.error(Some(line), ConfigErrorKind::DuplicateKey, detail);
                continue;
            }
        }
        p.entries.push(Entry { line, key, value });
    }

    let mode = match p.get("mode").map(|e| (e.line, e.value.clone())) {
        None => {
            p.error(None, ConfigErrorKind::MissingKey, "mode");
            None
        }
        Some((line, value)) => match value.parse::<Mode>() {
            Ok(m) => Some(m),
            Err(()) => {
                let names: Vec<_> = Mode::ALL.iter().map(|m| m.name()).collect();
                p.error(
                    Some(line),
                    ConfigErrorKind::UnknownMode,
                    format!("`{value}` (expected one of {})", names.join(", ")),
                );
                None
            }
        },
    };

    let needs_bench = matches!(mode, Some(Mode::Simulate | Mode::Sweep | Mode::Tomo));
    let bench = parse_bench(&mut p, mode, needs_bench);

    let shots = p.parsed::<u64>("shots", "a non-negative integer");
    if let (Some(0), Some(e)) = (shots, p.get("shots")) {
        let line = e.line;
        p.error(
            Some(line),
            ConfigErrorKind::MalformedValue,
            "shots must be at least 1",
        );
    }
    let seed = p.parsed::<u64>("seed", "a non-negative integer");
    let counts_out = p.get("counts_out").map(|e| PathBuf::from(&e.value));
    let tomography = match mode {
        Some(Mode::Tomo) => Some(TomoConfig {
            shots: shots.unwrap_or(DEFAULT_SHOTS),
            seed,
            counts_out,
        }),
        Some(Mode::Sweep) if p.get("shots").is_some() => Some(TomoConfig {
            shots: shots.unwrap_or(DEFAULT_SHOTS),
            seed,
            counts_out: None,
        }),
        _ => None,
    };
    if mode.is_some() && mode != Some(Mode::Tomo) {
        if let Some(e) = p.get("counts_out") {
            let line = e.line;
            p.error(
                Some(line),
                ConfigErrorKind::Conflict,
                "counts_out applies to tomo mode only",
            );
        }
    }

    let grid_default = match mode {
        Some(Mode::Region) => polarchan::depolarizer::DEFAULT_REGION_GRID,
        _ => DEFAULT_FEASIBILITY_GRID,
    };
    let grid = p
        .parsed::<usize>("grid", "a positive integer")
        .unwrap_or(grid_default);
    let region_grid = p
        .parsed::<usize>("region_grid", "a positive integer")
        .unwrap_or(polarchan::depolarizer::DEFAULT_REGION_GRID);
    for (key, value) in [("grid", grid), ("region_grid", region_grid)] {
        let line = p.get(key).map(|e| e.line);
        if value < 2 {
            p.error(
                line,
                ConfigErrorKind::DegenerateRange,
                format!("{key} must be at least 2"),
            );
        } else if value.checked_mul(value).is_none_or(|n| n > MAX_GRID_POINTS) {
            p.error(
                line,
                ConfigErrorKind::GridTooLarge,
                format!("{key} = {value} gives more than {MAX_GRID_POINTS} points"),
            );
        }
    }

    let out = p.get("out").map(|e| PathBuf::from(&e.value));

    if !p.errors.is_empty() {
        p.errors.sort_by_key(|e| e.line.unwrap_or(usize::MAX));
        return Err(p.errors);
    }
    Ok(RunConfig {
        mode: mode.expect("mode checked above"),
        bench,
        tomography,
        grid,
        region_grid,
        out,
    })
}

fn parse_bench(p: &mut Parser, mode: Option<Mode>, needs_bench: bool) -> Option<BenchSpec> {
    let preset_entry = p.get("preset").map(|e| (e.line, e.value.clone()));
    let element_lines: Vec<(usize, String)> = p
        .entries
        .iter()
        .filter(|e| e.key == "element")
        .map(|e| (e.line, e.value.clone()))
        .collect();

    let preset = match &preset_entry {
        None => None,
        Some((line, value)) => match value.parse::<Preset>() {
            Ok(pr) => Some(pr),
            Err(()) => {
                let names: Vec<_> = Preset::ALL.iter().map(|pr| pr.name()).collect();
                p.error(
                    Some(*line),
                    ConfigErrorKind::UnknownPreset,
                    format!("`{value}` (expected one of {})", names.join(", ")),
                );
                return None;
            }
        },
    };

    // preset-specific keys must match the chosen preset
    let stray: Vec<(usize, String)> = p
        .entries
        .iter()
        .filter(|e| !GLOBAL_KEYS.contains(&e.key.as_str()))
        .filter(|e| preset.is_none_or(|pr| !pr.keys().contains(&e.key.as_str())))
        .map(|e| (e.line, e.key.clone()))
        .collect();
    for (line, key) in stray {
        let detail = match preset {
            Some(pr) => format!("`{key}` does not apply to preset {}", pr.name()),
            None => format!("`{key}` requires a preset"),
        };
        p.error(Some(line), ConfigErrorKind::Conflict, detail);
    }

    if !needs_bench {
        if let Some((line, _)) = preset_entry.or(element_lines.first().cloned()) {
            if let Some(m) = mode {
                p.error(
                    Some(line),
                    ConfigErrorKind::Conflict,
                    format!("{m} mode does not take a bench"),
                );
            }
        }
        return None;
    }

    match (preset, element_lines.is_empty()) {
        (Some(_), false) => {
            p.error(
                Some(element_lines[0].0),
                ConfigErrorKind::Conflict,
                "`element` lines cannot be combined with a preset",
            );
            None
        }
        (None, true) => {
            p.error(None, ConfigErrorKind::MissingKey, "preset or element");
            None
        }
        (None, false) => {
            if mode == Some(Mode::Sweep) {
                p.error(
                    Some(element_lines[0].0),
                    ConfigErrorKind::Conflict,
                    "sweep mode requires preset fig1",
                );
                return None;
            }
            let mut elements = Vec::new();
            for (line, value) in element_lines {
                match parse_element(&value) {
                    Ok(el) => elements.push(el),
                    Err((kind, detail)) => p.error(Some(line), kind, detail),
                }
            }
            Some(BenchSpec::Inline(elements))
        }
        (Some(preset), true) => {
            if mode == Some(Mode::Sweep) && preset != Preset::Fig1 {
                let line = preset_entry.map(|(l, _)| l);
                p.error(
                    line,
                    ConfigErrorKind::Conflict,
                    "sweep mode requires preset fig1",
                );
                return None;
            }
            match preset {
                Preset::Fig1 => parse_fig1(p, mode == Some(Mode::Sweep)).map(BenchSpec::Fig1),
                Preset::Lyot => {
                    let length = if p.get("length").is_some() {
                        p.length("length")?
                    } else {
                        Rational64::from_integer(1)
                    };
                    Some(BenchSpec::Lyot { length })
                }
                Preset::TwoCrystal => p
                    .require_angle("angle", preset)
                    .map(|angle| BenchSpec::TwoCrystal { angle }),
                Preset::RotatedCrystals => p
                    .require_angle("rotation", preset)
                    .map(|rotation| BenchSpec::RotatedCrystals { rotation }),
            }
        }
    }
}

fn parse_fig1(p: &mut Parser, sweep: bool) -> Option<Fig1Params> {
    let mut ok = true;
    let theta1 = match p.get("theta1") {
        Some(_) => p.angle("theta1"),
        None => Some(polarchan::depolarizer::isotropic_theta1_angles().1),
    };
    ok &= theta1.is_some();

    let range_keys = ["theta2_start", "theta2_stop", "theta2_step"];
    let has_range = range_keys.iter().any(|k| p.get(k).is_some());
    let theta2 = if let Some(e) = p.get("theta2") {
        let line = e.line;
        if has_range {
            p.error(
                Some(line),
                ConfigErrorKind::Conflict,
                "`theta2` cannot be combined with theta2_start/stop/step",
            );
            None
        } else {
            p.angle("theta2").map(|t| vec![t])
        }
    } else if has_range {
        if !sweep {
            let line = range_keys.iter().find_map(|k| p.get(k)).map(|e| e.line);
            p.error(
                line,
                ConfigErrorKind::Conflict,
                "θ2 ranges apply to sweep mode only",
            );
            None
        } else {
            parse_range(p)
        }
    } else if sweep {
        Some((0..=45).map(f64::from).collect())
    } else {
        Some(vec![0.0])
    };
    ok &= theta2.is_some();

    let l1 = match p.get("l1") {
        Some(_) => p.length("l1"),
        None => Some(Rational64::from_integer(1)),
    };
    let l2 = match p.get("l2") {
        Some(_) => p.length("l2"),
        None => Some(Rational64::from_integer(2)),
    };
    ok &= l1.is_some() && l2.is_some();
    let compensate = match p.get("compensate") {
        Some(_) => p.parsed::<bool>("compensate", "true or false"),
        None => Some(true),
    };
    ok &= compensate.is_some();

    ok.then(|| Fig1Params {
        theta1: theta1.unwrap(),
        theta2: theta2.unwrap(),
        l1: l1.unwrap(),
        l2: l2.unwrap(),
        compensate: compensate.unwrap(),
    })
}

fn parse_range(p: &mut Parser) -> Option<Vec<f64>> {
    let mut value = |key: &str, default: f64| match p.get(key) {
        Some(_) => p.angle(key),
        None => Some(default),
    };
    let start = value("theta2_start", 0.0);
    let stop = value("theta2_stop", 45.0);
    let step = value("theta2_step", 1.0);
    let (start, stop, step) = (start?, stop?, step?);
    let line = ["theta2_step", "theta2_stop", "theta2_start"]
        .iter()
        .find_map(|k| p.get(k))
        .map(|e| e.line);
    if !(step > 0.0) {
        p.error(
            line,
            ConfigErrorKind::DegenerateRange,
            format!("theta2_step = {step} must be positive"),
        );
        return None;
    }
    if stop < start {
        p.error(
            line,
            ConfigErrorKind::DegenerateRange,
            format!("theta2_stop = {stop} is below theta2_start = {start}"),
        );
        return None;
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Some((0..count).map(|i| start + i as f64 * step).collect())
}

fn parse_angle(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|a| a.is_finite())
}

/// Parses `p` or `p/q` as a positive rational.
pub fn parse_length(s: &str) -> Option<Rational64> {
    let s = s.trim();
    let r = match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().ok()?;
            let d: i64 = d.trim().parse().ok()?;
            if d == 0 {
                return None;
            }
            Rational64::new(n, d)
        }
        None => Rational64::from_integer(s.parse().ok()?),
    };
    (r > Rational64::from_integer(0)).then_some(r)
}

/// Parses `crystal(length, angle)`, `hwp(angle)` or `qwp(angle)`.
pub fn parse_element(s: &str) -> Result<OpticalElement, (ConfigErrorKind, String)> {
    let s = s.trim();
    let malformed = || {
        (
            ConfigErrorKind::MalformedValue,
            format!("`{s}` (expected crystal(length, angle), hwp(angle) or qwp(angle))"),
        )
    };
    let (name, rest) = s.split_once('(').ok_or_else(malformed)?;
    let args = rest.strip_suffix(')').ok_or_else(malformed)?;
    let args: Vec<&str> = args.split(',').map(str::trim).collect();
    let angle = |a: &str| {
        parse_angle(a).ok_or_else(|| (ConfigErrorKind::MalformedAngle, format!("`{a}` in `{s}`")))
    };
    match (name.trim(), args.as_slice()) {
        ("crystal", [length, a]) => {
            let length = parse_length(length).ok_or_else(|| {
                (
                    ConfigErrorKind::MalformedValue,
                    format!("crystal length `{length}` is not a positive rational"),
                )
            })?;
            Ok(OpticalElement::crystal(length, angle(a)?))
        }
        ("hwp", [a]) => Ok(OpticalElement::hwp(angle(a)?)),
        ("qwp", [a]) => Ok(OpticalElement::qwp(angle(a)?)),
        _ => Err(malformed()),
    }
}
