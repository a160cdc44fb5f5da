// SPDX-License-Identifier: Apache-2.0

//! Count tables, Poisson simulation and the count-record CSV format.
//!
//! ```text
//! # N=10000
//! # seed=42
//! input,projector,counts
//! H,H,10000
//! H,V,0
//! ...
//! ```
//!
//! Rows are ordered input-major, then projector, in the fixed `H, V, P, R`
//! and `H, V, P, M, R, L` orders. State-tomography records use the input
//! label `state`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::{InputStateSet, ProjectorSet, TomoSettings};
use crate::bench::KrausSet;
use crate::polar::{BasisState, DensityMatrix};
use crate::{Error, Result};

const STATE_LABEL: &str = "state";
const HEADER: &str = "input,projector,counts";

/// Observed (or expected) counts of a process-tomography run, indexed
/// `[input][projector]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessCounts {
    pub shots: f64,
    pub counts: [[f64; 6]; 4],
}

impl ProcessCounts {
    /// Noise-free counts `N · p`.
    pub fn expected(kraus: &KrausSet, shots: f64) -> Self {
        let inputs = InputStateSet::standard().densities();
        let projectors = ProjectorSet::standard().densities();
        let mut counts = [[0.0; 6]; 4];
        for (row, input) in counts.iter_mut().zip(inputs.iter()) {
            let out = kraus.apply(input);
            for (c, proj) in row.iter_mut().zip(projectors.iter()) {
                *c = shots * out.probability(proj).clamp(0.0, 1.0);
            }
        }
        Self { shots, counts }
    }
}

/// Counts of a state-tomography run, in projector order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateCounts {
    pub shots: f64,
    pub counts: [f64; 6],
}

impl StateCounts {
    pub fn expected(rho: &DensityMatrix, shots: f64) -> Self {
        let projectors = ProjectorSet::standard().densities();
        let mut counts = [0.0; 6];
        for (c, proj) in counts.iter_mut().zip(projectors.iter()) {
            *c = shots * rho.probability(proj).clamp(0.0, 1.0);
        }
        Self { shots, counts }
    }
}

/// Integer count table with its shot budget and seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountRecord {
    pub shots: u64,
    pub seed: u64,
    /// Row labels; `None` marks a state-tomography row.
    pub inputs: Vec<Option<BasisState>>,
    pub projectors: Vec<BasisState>,
    pub counts: Vec<Vec<u64>>,
}

impl CountRecord {
    pub fn is_process_record(&self) -> bool {
        self.inputs.len() == 4
            && self
                .inputs
                .iter()
                .zip(InputStateSet::standard().states())
                .all(|(a, b)| *a == Some(*b))
            && self.projectors == ProjectorSet::standard().states()
    }

    pub fn process_counts(&self) -> Result<ProcessCounts> {
        if !self.is_process_record() {
            return Err(self.shape_error("4 inputs (H,V,P,R) x 6 projectors"));
        }
        let mut counts = [[0.0; 6]; 4];
        for (dst, src) in counts.iter_mut().zip(&self.counts) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d = *s as f64;
            }
        }
        Ok(ProcessCounts {
            shots: self.shots as f64,
            counts,
        })
    }

    pub fn state_counts(&self) -> Result<StateCounts> {
        if self.inputs.len() != 1 || self.projectors != ProjectorSet::standard().states() {
            return Err(self.shape_error("1 row x 6 projectors"));
        }
        let mut counts = [0.0; 6];
        for (d, s) in counts.iter_mut().zip(&self.counts[0]) {
            *d = *s as f64;
        }
        Ok(StateCounts {
            shots: self.shots as f64,
            counts,
        })
    }

    fn shape_error(&self, expected: &str) -> Error {
        Error::CountShape {
            expected: expected.to_string(),
            found: format!("{} x {}", self.inputs.len(), self.projectors.len()),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# N={}\n# seed={}\n{HEADER}\n", self.shots, self.seed);
        for (input, row) in self.inputs.iter().zip(&self.counts) {
            let label = input.map_or(STATE_LABEL, BasisState::label);
            for (proj, n) in self.projectors.iter().zip(row) {
                out.push_str(&format!("{label},{},{n}\n", proj.label()));
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let fmt_err = |line: usize, msg: &str| Error::CountFormat(format!("line {line}: {msg}"));
        let mut shots = None;
        let mut seed = None;
        let mut header_seen = false;
        let mut inputs: Vec<Option<BasisState>> = Vec::new();
        let mut projectors: Vec<BasisState> = Vec::new();
        let mut counts: Vec<Vec<u64>> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((key, value)) = meta.trim().split_once('=') {
                    let value = value.trim();
                    match key.trim() {
                        "N" => {
                            shots = Some(
                                value
                                    .parse::<u64>()
                                    .map_err(|_| fmt_err(line_no, "bad N"))?,
                            )
                        }
                        "seed" => {
                            seed = Some(
                                value
                                    .parse::<u64>()
                                    .map_err(|_| fmt_err(line_no, "bad seed"))?,
                            )
                        }
                        _ => {}
                    }
                }
                continue;
            }
            if !header_seen {
                if line != HEADER {
                    return Err(fmt_err(line_no, "expected header `input,projector,counts`"));
                }
                header_seen = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(fmt_err(line_no, "expected 3 fields"));
            }
            let input = if fields[0] == STATE_LABEL {
                None
            } else {
                Some(
                    BasisState::from_label(fields[0])
                        .ok_or_else(|| fmt_err(line_no, "unknown input"))?,
                )
            };
            let proj = BasisState::from_label(fields[1])
                .ok_or_else(|| fmt_err(line_no, "unknown projector"))?;
            let n: u64 = fields[2]
                .parse()
                .map_err(|_| fmt_err(line_no, "bad count"))?;

            if inputs.last() != Some(&input) {
                if inputs.contains(&input) {
                    return Err(fmt_err(line_no, "rows of one input must be contiguous"));
                }
                inputs.push(input);
                counts.push(Vec::new());
            }
            let row = counts.last_mut().expect("row pushed above");
            if inputs.len() == 1 {
                projectors.push(proj);
            } else if projectors.get(row.len()) != Some(&proj) {
                return Err(fmt_err(line_no, "projector order differs between inputs"));
            }
            row.push(n);
        }
        let shots = shots.ok_or_else(|| Error::CountFormat("missing `# N=` metadata".into()))?;
        let seed = seed.ok_or_else(|| Error::CountFormat("missing `# seed=` metadata".into()))?;
        if !header_seen {
            return Err(Error::CountFormat("missing header row".into()));
        }
        if counts.iter().any(|r| r.len() != projectors.len()) {
            return Err(Error::CountFormat("incomplete table".into()));
        }
        Ok(Self {
            shots,
            seed,
            inputs,
            projectors,
            counts,
        })
    }
}

/// Draws `Poisson(mean)` from a generator keyed by `(seed, row, col)`.
///
/// Each table cell has its own ChaCha stream, so a cell's count depends only
/// on its key and not on evaluation order.
fn poisson_cell(seed: u64, row: usize, col: usize, mean: f64) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((row as u64) << 32) | col as u64);
    let dist = Poisson::new(mean).expect("positive finite mean");
    dist.sample(&mut rng) as u64
}

/// Process-tomography counts for the standard 4 × 6 settings.
pub fn simulate_counts(kraus: &KrausSet, settings: &TomoSettings) -> CountRecord {
    let expected = ProcessCounts::expected(kraus, settings.shots as f64);
    let counts = expected
        .counts
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, mean)| poisson_cell(settings.seed, i, j, *mean))
                .collect()
        })
        .collect();
    CountRecord {
        shots: settings.shots,
        seed: settings.seed,
        inputs: InputStateSet::standard()
            .states()
            .iter()
            .map(|s| Some(*s))
            .collect(),
        projectors: ProjectorSet::standard().states().to_vec(),
        counts,
    }
}

/// State-tomography counts of `rho` in the six projectors.
pub fn simulate_state_counts(rho: &DensityMatrix, settings: &TomoSettings) -> CountRecord {
    let expected = StateCounts::expected(rho, settings.shots as f64);
    let row = expected
        .counts
        .iter()
        .enumerate()
        .map(|(j, mean)| poisson_cell(settings.seed, 0, j, *mean))
        .collect();
    CountRecord {
        shots: settings.shots,
        seed: settings.seed,
        inputs: vec![None],
        projectors: ProjectorSet::standard().states().to_vec(),
        counts: vec![row],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_shots_give_zero_counts() {
        let rec = simulate_counts(&KrausSet::identity(), &TomoSettings::new(0, 3));
        assert!(rec.counts.iter().flatten().all(|&n| n == 0));
    }

    #[test]
    fn identity_hh_count_is_within_five_sigma() {
        let rec = simulate_counts(&KrausSet::identity(), &TomoSettings::new(1_000_000, 11));
        let n = rec.counts[0][0] as f64;
        assert!((n - 1e6).abs() <= 5.0 * 1e3, "{n}");
        // V projector on H input never clicks
        assert_eq!(rec.counts[0][1], 0);
    }

    #[test]
    fn same_seed_same_record() {
        let s = TomoSettings::new(5_000, 99);
        let a = simulate_counts(&KrausSet::identity(), &s);
        let b = simulate_counts(&KrausSet::identity(), &s);
        assert_eq!(a, b);
        let c = simulate_counts(&KrausSet::identity(), &TomoSettings::new(5_000, 100));
        assert_ne!(a, c);
    }

    #[test]
    fn cells_use_independent_streams() {
        // equal means in different cells should not produce identical draws
        let rec = simulate_counts(&KrausSet::identity(), &TomoSettings::new(10_000, 5));
        let halves: Vec<u64> = rec.counts[0][2..].to_vec();
        assert!(halves.windows(2).any(|w| w[0] != w[1]));
    }

    #[test]
    fn csv_round_trip_and_layout() {
        let rec = simulate_counts(&KrausSet::identity(), &TomoSettings::new(100, 42));
        let text = rec.to_csv();
        assert!(text.starts_with("# N=100\n# seed=42\ninput,projector,counts\nH,H,"));
        assert_eq!(text.lines().count(), 3 + 24);
        assert_eq!(CountRecord::from_csv(&text).unwrap(), rec);

        let st = simulate_state_counts(&BasisState::P.density(), &TomoSettings::new(100, 1));
        let text = st.to_csv();
        assert!(text.contains("\nstate,P,"));
        assert_eq!(CountRecord::from_csv(&text).unwrap(), st);
        assert!(st.state_counts().is_ok());
        assert!(st.process_counts().is_err());
    }

    #[test]
    fn csv_errors() {
        assert!(CountRecord::from_csv("input,projector,counts\nH,H,1\n").is_err());
        assert!(CountRecord::from_csv("# N=1\n# seed=1\nfoo\n").is_err());
        assert!(CountRecord::from_csv("# N=1\n# seed=1\ninput,projector,counts\nH,X,1\n").is_err());
        assert!(
            CountRecord::from_csv("# N=1\n# seed=1\ninput,projector,counts\nH,H,-1\n").is_err()
        );
    }

    proptest! {
        #[test]
        fn csv_round_trips_arbitrary_tables(
            shots in 0u64..1_000_000,
            seed in any::<u64>(),
            table in prop::collection::vec(prop::collection::vec(0u64..10_000_000, 6), 4),
        ) {
            let rec = CountRecord {
                shots,
                seed,
                inputs: InputStateSet::standard().states().iter().map(|s| Some(*s)).collect(),
                projectors: ProjectorSet::standard().states().to_vec(),
                counts: table,
            };
            prop_assert_eq!(CountRecord::from_csv(&rec.to_csv()).unwrap(), rec);
        }
    }
}
