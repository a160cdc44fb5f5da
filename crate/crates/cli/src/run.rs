// SPDX-License-Identifier: Apache-2.0

//! Execution of validated run configurations.

use std::path::PathBuf;

use rayon::prelude::*;

use polarchan::analysis::{pauli_feasible, polar_decompose, ProcessMatrix};
use polarchan::bench::{BenchConfig, KrausSet};
use polarchan::depolarizer::{
    build_bench_rotated_crystals, build_bench_with_lengths, build_lyot, build_two_crystal,
    convex_hull, dop_isotropic, inside_convex, isotropic_theta1_angles, radii_closed_form,
    reachable_region_scan, with_reflection_compensation,
};
use polarchan::polar::BasisState;
use polarchan::tomography::{qpt_mle, simulate_counts, TomoSettings};

use crate::config::{BenchSpec, Fig1Params, Mode, RunConfig};
use crate::table::{angle, rational, real, Table};

/// Distance in degrees from an isotropic θ1 root within which sweeps report
/// the closed-form degree of polarization.
pub const ISOTROPIC_THETA1_WINDOW: f64 = 0.01;
/// Tolerance of the point-in-hull test for the `reachable` column.
pub const REACHABLE_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Model(#[from] polarchan::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    /// Process exit code: 2 for I/O failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Io { .. } => 2,
            _ => 1,
        }
    }
}

/// Runtime options that do not belong in the configuration file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the rayon default.
    pub jobs: Option<usize>,
    /// Already resolved seed for tomography runs.
    pub seed: u64,
}

/// Runs `config` on a pool of `options.jobs` threads.
pub fn run(config: &RunConfig, options: &RunOptions) -> Result<Table, RunError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = options.jobs {
        if jobs == 0 {
            return Err(RunError::Validation("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(jobs);
    }
    let pool = builder
        .build()
        .map_err(|e| RunError::Validation(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match config.mode {
        Mode::Simulate => run_simulate(config),
        Mode::Sweep => run_sweep(config, options.seed),
        Mode::Tomo => run_tomo(config, options.seed),
        Mode::Feasibility => run_feasibility(config),
        Mode::Region => run_region(config),
    })
}

fn bench_spec(config: &RunConfig) -> Result<&BenchSpec, RunError> {
    config
        .bench
        .as_ref()
        .ok_or_else(|| RunError::Validation(format!("{} mode needs a bench", config.mode)))
}

fn fig1_bench(p: &Fig1Params, theta2: f64) -> Result<BenchConfig, RunError> {
    let bench = build_bench_with_lengths(p.theta1, theta2, [p.l1, p.l2, p.l2, p.l1])?;
    Ok(if p.compensate {
        with_reflection_compensation(bench)
    } else {
        bench
    })
}

/// The bench of a configuration; `fig1` presets use their first θ2 value.
pub fn build_spec(spec: &BenchSpec) -> Result<BenchConfig, RunError> {
    Ok(match spec {
        BenchSpec::Fig1(p) => fig1_bench(p, p.theta2[0])?,
        BenchSpec::Lyot { length } => build_lyot(*length)?,
        BenchSpec::TwoCrystal { angle } => build_two_crystal(*angle),
        BenchSpec::RotatedCrystals { rotation } => build_bench_rotated_crystals(*rotation),
        BenchSpec::Inline(elements) => BenchConfig::new(elements.clone())?,
    })
}

fn eigen_cells(e: [f64; 4]) -> impl Iterator<Item = String> {
    e.into_iter().map(real)
}

/// Images of the six basis states.
///
/// Columns: `input, s1_in, s2_in, s3_in, s1_out, s2_out, s3_out, dop_out`.
/// Comments carry the bench, the signed ellipsoid radii, the χ eigenvalues
/// and the isotropy deviation.
pub fn run_simulate(config: &RunConfig) -> Result<Table, RunError> {
    let bench = build_spec(bench_spec(config)?)?;
    let kraus = bench.channel()?;
    let map = kraus.affine_map();
    let report = polar_decompose(&map.matrix);
    let chi = ProcessMatrix::from_kraus(&kraus);

    let mut t = Table::new(&[
        "input", "s1_in", "s2_in", "s3_in", "s1_out", "s2_out", "s3_out", "dop_out",
    ]);
    t.comment("bench", &bench);
    t.comment("radii", report.radii.map(real).join(" "));
    t.comment("chi_eigenvalues", chi.eigenvalues().map(real).join(" "));
    t.comment("isotropy_deviation", real(chi.isotropy_deviation()));
    for state in BasisState::ALL {
        let input = state.density().stokes();
        let out = kraus.apply(&state.density()).stokes();
        let mut row = vec![state.label().to_string()];
        row.extend(input.to_array().map(real));
        row.extend(out.to_array().map(real));
        row.push(real(out.degree_of_polarization()));
        t.push(row);
    }
    Ok(t)
}

fn sweep_header(tomography: bool) -> Vec<&'static str> {
    let mut h = vec![
        "theta2",
        "r1_theory",
        "r2_theory",
        "r3_theory",
        "d_theory",
        "r1_sim",
        "r2_sim",
        "r3_sim",
        "lambda1",
        "lambda2",
        "lambda3",
        "lambda4",
    ];
    if tomography {
        h.extend([
            "seed",
            "lambda1_rec",
            "lambda2_rec",
            "lambda3_rec",
            "lambda4_rec",
            "tp_deviation",
            "converged",
        ]);
    }
    h
}

/// One row per θ2 of the four-crystal bench.
///
/// Columns: `theta2`, the closed-form radii, the closed-form degree of
/// polarization `d_theory` (empty unless θ1 is within
/// [`ISOTROPIC_THETA1_WINDOW`] of an isotropic root), the diagonal of the
/// simulated map, and the four ground-truth χ eigenvalues in descending
/// order. With tomography, each row also holds its seed (base seed plus row
/// index), the maximum-likelihood eigenvalues, the trace-preservation
/// deviation of the estimate and the optimizer convergence flag.
pub fn run_sweep(config: &RunConfig, seed: u64) -> Result<Table, RunError> {
    let BenchSpec::Fig1(p) = bench_spec(config)? else {
        return Err(RunError::Validation(
            "sweep mode requires preset fig1".into(),
        ));
    };
    let (a, b) = isotropic_theta1_angles();
    let on_line = [a, b]
        .iter()
        .any(|r| (p.theta1 - r).abs() <= ISOTROPIC_THETA1_WINDOW);
    let tomo = config.tomography.as_ref();

    let rows: Vec<Vec<String>> = p
        .theta2
        .par_iter()
        .enumerate()
        .map(|(i, &theta2)| -> Result<Vec<String>, RunError> {
            let theory = radii_closed_form(p.theta1, theta2);
            let kraus = fig1_bench(p, theta2)?.channel()?;
            let m = kraus.affine_map().matrix;
            let chi = ProcessMatrix::from_kraus(&kraus);

            let mut row = vec![angle(theta2)];
            row.extend(theory.map(real));
            row.push(if on_line {
                real(dop_isotropic(theta2))
            } else {
                String::new()
            });
            row.extend((0..3).map(|k| real(m[(k, k)])));
            row.extend(eigen_cells(chi.eigenvalues()));
            if let Some(t) = tomo {
                let row_seed = seed.wrapping_add(i as u64);
                let (est, converged) = reconstruct(&kraus, t.shots, row_seed)?;
                row.push(row_seed.to_string());
                row.extend(eigen_cells(est.eigenvalues()));
                row.push(real(est.trace_preservation_deviation()));
                row.push(converged.to_string());
            }
            Ok(row)
        })
        .collect::<Result<_, _>>()?;

    let mut t = Table::new(&sweep_header(tomo.is_some()));
    t.comment("theta1", angle(p.theta1));
    t.comment("lengths", [p.l1, p.l2, p.l2, p.l1].map(rational).join(" "));
    t.comment("compensate", p.compensate);
    if let Some(tc) = tomo {
        t.comment("N", tc.shots);
    }
    t.rows = rows;
    Ok(t)
}

fn reconstruct(kraus: &KrausSet, shots: u64, seed: u64) -> Result<(ProcessMatrix, bool), RunError> {
    let settings = TomoSettings::new(shots, seed);
    let record = simulate_counts(kraus, &settings);
    let out = qpt_mle(&record.process_counts()?, &settings)?;
    Ok((out.estimate, out.converged))
}

/// Simulated process tomography of one bench.
///
/// Columns: `index, lambda_true, lambda_mle` for the four χ eigenvalues in
/// descending order. Comments carry the fit diagnostics. The raw count table
/// is written to `counts_out` when set.
pub fn run_tomo(config: &RunConfig, seed: u64) -> Result<Table, RunError> {
    let tc = config
        .tomography
        .as_ref()
        .ok_or_else(|| RunError::Validation("tomo mode needs tomography settings".into()))?;
    let bench = build_spec(bench_spec(config)?)?;
    let kraus = bench.channel()?;
    let settings = TomoSettings::new(tc.shots, seed);
    let record = simulate_counts(&kraus, &settings);
    if let Some(path) = &tc.counts_out {
        write_file(path, &record.to_csv())?;
    }
    let fit = qpt_mle(&record.process_counts()?, &settings)?;
    let truth = ProcessMatrix::from_kraus(&kraus).eigenvalues();
    let est = fit.estimate.eigenvalues();

    let mut t = Table::new(&["index", "lambda_true", "lambda_mle"]);
    t.comment("bench", &bench);
    t.comment("N", tc.shots);
    t.comment("seed", seed);
    t.comment("nll", real(fit.nll));
    t.comment("iterations", fit.iterations);
    t.comment("converged", fit.converged);
    t.comment(
        "tp_deviation",
        real(fit.estimate.trace_preservation_deviation()),
    );
    for i in 0..4 {
        t.push(vec![(i + 1).to_string(), real(truth[i]), real(est[i])]);
    }
    Ok(t)
}

/// Evenly spaced points on [−1, 1] with both ends included.
fn axis(n: usize) -> Vec<f64> {
    let m = (n - 1) as f64;
    (0..n).map(|i| (2.0 * i as f64 - m) / m).collect()
}

/// Pauli feasibility of the channels diag(R1, R2, R2) on a grid.
///
/// Columns: `r1, r2, lambda0..lambda3, feasible, reachable`, R1-major.
/// `reachable` tests membership in the convex hull of the four-crystal region scan.
pub fn run_feasibility(config: &RunConfig) -> Result<Table, RunError> {
    let scan = reachable_region_scan(config.region_grid)?;
    let points: Vec<(f64, f64)> = scan.iter().map(|p| (p.r1, p.r2)).collect();
    let hull = convex_hull(&points);
    let grid = axis(config.grid);

    let rows: Vec<(Vec<String>, bool, bool)> = grid
        .par_iter()
        .flat_map_iter(|&r1| grid.iter().map(move |&r2| (r1, r2)))
        .map(|(r1, r2)| {
            let f = pauli_feasible([r1, r2, r2]);
            let reachable = inside_convex(&hull, (r1, r2), REACHABLE_TOL);
            let mut row = vec![real(r1), real(r2)];
            row.extend(f.lambda.map(real));
            row.push(f.feasible.to_string());
            row.push(reachable.to_string());
            (row, f.feasible, reachable)
        })
        .collect();

    if let Some((row, _, _)) = rows
        .iter()
        .find(|(_, feasible, reachable)| *reachable && !feasible)
    {
        return Err(RunError::Validation(format!(
            "reachable point ({}, {}) is not a feasible Pauli channel",
            row[0], row[1]
        )));
    }

    let mut t = Table::new(&[
        "r1",
        "r2",
        "lambda0",
        "lambda1",
        "lambda2",
        "lambda3",
        "feasible",
        "reachable",
    ]);
    t.comment("grid", config.grid);
    t.comment("region_grid", config.region_grid);
    t.rows = rows.into_iter().map(|(row, _, _)| row).collect();
    Ok(t)
}

/// Closed-form radii of the four-crystal bench over θ1, θ2 ∈ [0°, 45°].
///
/// Columns: `theta1, theta2, r1, r2`, θ1-major.
pub fn run_region(config: &RunConfig) -> Result<Table, RunError> {
    let scan = reachable_region_scan(config.grid)?;
    let mut t = Table::new(&["theta1", "theta2", "r1", "r2"]);
    t.comment("grid", config.grid);
    t.rows = scan
        .into_iter()
        .map(|p| {
            vec![
                angle(p.theta1_deg),
                angle(p.theta2_deg),
                real(p.r1),
                real(p.r2),
            ]
        })
        .collect();
    Ok(t)
}

pub fn write_file(path: &std::path::Path, contents: &str) -> Result<(), RunError> {
    std::fs::write(path, contents).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn table(text: &str) -> Table {
        run(
            &parse_config(text).unwrap(),
            &RunOptions {
                jobs: Some(2),
                seed: 5,
            },
        )
        .unwrap()
    }

    fn cell(t: &Table, row: usize, col: &str) -> f64 {
        t.rows[row][t.column(col).unwrap()].parse().unwrap()
    }

    #[test]
    fn sweep_degree_of_polarization_examples() {
        let t = table("mode = sweep\npreset = fig1\n");
        assert_eq!(t.rows.len(), 46);
        for (theta2, d) in [(4, 0.974), (15, 2.0 / 3.0), (22, 0.357), (30, 0.0)] {
            assert_eq!(cell(&t, theta2, "theta2"), theta2 as f64);
            assert!((cell(&t, theta2, "d_theory") - d).abs() < 5e-4);
            for k in 1..=3 {
                let sim = cell(&t, theta2, &format!("r{k}_sim"));
                assert!((sim - cell(&t, theta2, &format!("r{k}_theory"))).abs() < 1e-10);
            }
        }
        let first: Vec<f64> = (1..=4)
            .map(|k| cell(&t, 0, &format!("lambda{k}")))
            .collect();
        assert_eq!(first, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn sweep_is_monotone_in_cos4theta2() {
        let t = table("mode = sweep\npreset = fig1\n");
        let mut pairs: Vec<(f64, f64)> = (0..t.rows.len())
            .map(|i| {
                (
                    (4.0 * cell(&t, i, "theta2")).to_radians().cos(),
                    cell(&t, i, "d_theory"),
                )
            })
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        assert!(pairs.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-15));
    }

    #[test]
    fn sweep_off_line_leaves_d_empty() {
        let t = table("mode = sweep\npreset = fig1\ntheta1 = 20\ntheta2 = 10\n");
        assert_eq!(t.rows[0][t.column("d_theory").unwrap()], "");
    }

    #[test]
    fn sweep_with_tomography() {
        let t = table(
            "mode = sweep\npreset = fig1\ntheta2_start = 15\ntheta2_stop = 16\nshots = 10000\n",
        );
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[1][t.column("seed").unwrap()], "6");
        assert!((cell(&t, 0, "lambda1_rec") - 0.75).abs() < 0.03);
    }

    #[test]
    fn feasibility_examples() {
        let t = table("mode = feasibility\ngrid = 301\nregion_grid = 91\n");
        assert_eq!(t.rows.len(), 301 * 301);
        let find = |r1: f64, r2: f64| {
            t.rows
                .iter()
                .find(|row| {
                    (row[0].parse::<f64>().unwrap() - r1).abs() < 1e-9
                        && (row[1].parse::<f64>().unwrap() - r2).abs() < 1e-9
                })
                .unwrap()
                .clone()
        };
        let id = find(1.0, 1.0);
        assert_eq!((&id[6][..], &id[7][..]), ("true", "true"));
        // diag(1, -1, -1) is a rotation: feasible, but outside the bench's reach
        let rotation = find(1.0, -1.0);
        assert_eq!((&rotation[6][..], &rotation[7][..]), ("true", "false"));
        let bad = find(-1.0, 1.0);
        assert_eq!((&bad[6][..], &bad[7][..]), ("false", "false"));
        let edge = find(-1.0 / 3.0, -1.0 / 3.0);
        assert_eq!((&edge[6][..], &edge[7][..]), ("true", "true"));
    }

    #[test]
    fn simulate_lyot_depolarizes() {
        let t = table("mode = simulate\npreset = lyot\n");
        for i in 0..6 {
            assert!(cell(&t, i, "dop_out").abs() < 1e-12);
        }
    }

    #[test]
    fn tomo_reports_eigenvalues() {
        let t = table("mode = tomo\npreset = fig1\ntheta2 = 30\nshots = 10000\n");
        assert_eq!(t.rows.len(), 4);
        for i in 0..4 {
            assert!((cell(&t, i, "lambda_true") - 0.25).abs() < 1e-3);
            assert!((cell(&t, i, "lambda_mle") - 0.25).abs() < 0.03);
        }
        assert!(t.comments.contains(&"seed=5".to_string()));
    }

    #[test]
    fn zero_jobs_is_rejected() {
        let cfg = parse_config("mode = region\ngrid = 3\n").unwrap();
        assert!(matches!(
            run(
                &cfg,
                &RunOptions {
                    jobs: Some(0),
                    seed: 0
                }
            ),
            Err(RunError::Validation(_))
        ));
    }
}
