// SPDX-License-Identifier: Apache-2.0

//! The four-crystal variable isotropic depolarizer and related layouts.
//!
//! The main layout is
//!
//! ```text
//! C1(L1, fast 0°) · HWP(θ1) · C2(L2, fast 90°) · HWP(θ2) · C3(L2, fast 0°) · HWP(−θ1) · C4(L1, fast 90°)
//! ```
//!
//! Its Stokes map is `diag(R1, −R2, −R3)`; the sign flips on S2 and S3 are
//! removed by a half-wave plate at 0° (see [`with_reflection_compensation`]).
//! The closed forms in this module hold for any `L2/L1` except exactly 1 and
//! 1/2, where extra temporal modes coincide. The bench builders work for all
//! ratios and the temporal-mode simulator remains exact there.

use log::warn;
use num_rational::Rational64;
use num_traits::Signed;
use rayon::prelude::*;

use crate::bench::{BenchConfig, OpticalElement};
use crate::{Error, Result};

/// Default resolution of [`reachable_region_scan`] (0.1° steps over 0–45°).
pub const DEFAULT_REGION_GRID: usize = 451;

/// Settings of the four-crystal depolarizer. The third wave plate is fixed at
/// `−θ1`; crystal lengths are `(L1, L2, L2, L1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepolarizerSettings {
    pub theta1_deg: f64,
    pub theta2_deg: f64,
    pub l1: Rational64,
    pub l2: Rational64,
}

impl DepolarizerSettings {
    pub fn new(theta1_deg: f64, theta2_deg: f64, l1: Rational64, l2: Rational64) -> Result<Self> {
        for l in [l1, l2] {
            if !l.is_positive() {
                return Err(Error::NonPositiveLength(l.to_string()));
            }
        }
        Ok(Self {
            theta1_deg,
            theta2_deg,
            l1,
            l2,
        })
    }

    /// Lengths (1, 2, 2, 1) as in the reference build.
    pub fn standard(theta1_deg: f64, theta2_deg: f64) -> Self {
        Self {
            theta1_deg,
            theta2_deg,
            l1: Rational64::from_integer(1),
            l2: Rational64::from_integer(2),
        }
    }

    pub fn length_ratio(&self) -> Rational64 {
        self.l2 / self.l1
    }

    /// `L2/L1 ∈ {1, 1/2}`: the bench still simulates exactly, but the closed
    /// forms do not describe it.
    pub fn is_degenerate_ratio(&self) -> bool {
        let ratio = self.length_ratio();
        ratio == Rational64::from_integer(1) || ratio == Rational64::new(1, 2)
    }
}

/// Ellipsoid radii of the compensated map:
/// `R1 = cos²2θ2 − sin²2θ2·cos²4θ1`, `R2 = R3 = cos²2θ2 − ½ sin²2θ2·sin²4θ1`.
pub fn radii_closed_form(theta1_deg: f64, theta2_deg: f64) -> [f64; 3] {
    let t1 = theta1_deg.to_radians();
    let t2 = theta2_deg.to_radians();
    let c2 = (2.0 * t2).cos().powi(2);
    let s2 = (2.0 * t2).sin().powi(2);
    let r1 = c2 - s2 * (4.0 * t1).cos().powi(2);
    let r2 = c2 - 0.5 * s2 * (4.0 * t1).sin().powi(2);
    [r1, r2, r2]
}

/// Degree of polarization on the isotropic line: `D = 1/3 + (2/3)·cos 4θ2`.
pub fn dop_isotropic(theta2_deg: f64) -> f64 {
    1.0 / 3.0 + 2.0 / 3.0 * (4.0 * theta2_deg.to_radians()).cos()
}

/// The two first-plate angles giving an isotropic channel for every θ2:
/// `atan(√2)/4 ≈ 13.68°` and `45° − atan(√2)/4 ≈ 31.32°`.
pub fn isotropic_theta1_angles() -> (f64, f64) {
    let a = 2f64.sqrt().atan().to_degrees() / 4.0;
    (a, 45.0 - a)
}

/// The four-crystal bench for `settings`.
pub fn build_bench(settings: &DepolarizerSettings) -> BenchConfig {
    if settings.is_degenerate_ratio() {
        warn!(
            "length ratio L2/L1 = {} is degenerate; closed-form radii do not apply",
            settings.length_ratio()
        );
    }
    let l = [settings.l1, settings.l2, settings.l2, settings.l1];
    build_bench_with_lengths(settings.theta1_deg, settings.theta2_deg, l)
        .expect("settings lengths are validated positive")
}

/// Same layout with four independent lengths `(L1, L2, L3, L4)`.
pub fn build_bench_with_lengths(
    theta1_deg: f64,
    theta2_deg: f64,
    lengths: [Rational64; 4],
) -> Result<BenchConfig> {
    BenchConfig::new(vec![
        OpticalElement::crystal(lengths[0], 0.0),
        OpticalElement::hwp(theta1_deg),
        OpticalElement::crystal(lengths[1], 90.0),
        OpticalElement::hwp(theta2_deg),
        OpticalElement::crystal(lengths[2], 0.0),
        OpticalElement::hwp(-theta1_deg),
        OpticalElement::crystal(lengths[3], 90.0),
    ])
}

/// Appends a half-wave plate at 0°, which undoes the S2/S3 reflections of
/// the four-crystal layout.
pub fn with_reflection_compensation(bench: BenchConfig) -> BenchConfig {
    bench.then(OpticalElement::hwp(0.0))
}

/// Wave-plate-free variant. The middle crystals are turned by `2·θ1` (with
/// θ1 ≈ 31.32°) relative to the four-crystal layout, which reproduces the
/// zero-depolarization setting up to a polarization rotation; the output pair
/// C3, C4 is then turned by `relative_rotation_deg`, which plays the role of
/// `2θ2`.
pub fn build_bench_rotated_crystals(relative_rotation_deg: f64) -> BenchConfig {
    let offset = 2.0 * isotropic_theta1_angles().1;
    let rot = relative_rotation_deg;
    BenchConfig::new(vec![
        OpticalElement::crystal_int(1, 0.0),
        OpticalElement::crystal_int(2, 90.0 + offset),
        OpticalElement::crystal_int(2, offset + rot),
        OpticalElement::crystal_int(1, 90.0 + rot),
    ])
    .expect("static layout is valid")
}

/// Lyot depolarizer: crystals of length `L` and `2L` with axes at 45°.
pub fn build_lyot(length: Rational64) -> Result<BenchConfig> {
    BenchConfig::new(vec![
        OpticalElement::crystal(length, 0.0),
        OpticalElement::crystal(length * Rational64::from_integer(2), 45.0),
    ])
}

/// Two identical crystals. `angle_deg` is measured from the fast axis of the
/// first crystal to the slow axis of the second, so that 0° is the
/// compensating (identity) arrangement.
pub fn build_two_crystal(angle_deg: f64) -> BenchConfig {
    BenchConfig::new(vec![
        OpticalElement::crystal_int(1, 0.0),
        OpticalElement::crystal_int(1, 90.0 + angle_deg),
    ])
    .expect("static layout is valid")
}

/// One point of the reachable-region scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionPoint {
    pub theta1_deg: f64,
    pub theta2_deg: f64,
    pub r1: f64,
    pub r2: f64,
}

/// Evaluates the closed-form radii on a `grid_n × grid_n` grid over
/// `θ1, θ2 ∈ [0°, 45°]`. Points are ordered θ1-major.
pub fn reachable_region_scan(grid_n: usize) -> Result<Vec<RegionPoint>> {
    if grid_n < 2 {
        return Err(Error::InvalidSettings(format!(
            "region grid needs at least 2 points per axis, got {grid_n}"
        )));
    }
    let step = 45.0 / (grid_n - 1) as f64;
    let points = (0..grid_n * grid_n)
        .into_par_iter()
        .map(|idx| {
            let theta1_deg = (idx / grid_n) as f64 * step;
            let theta2_deg = (idx % grid_n) as f64 * step;
            let [r1, r2, _] = radii_closed_form(theta1_deg, theta2_deg);
            RegionPoint {
                theta1_deg,
                theta2_deg,
                r1,
                r2,
            }
        })
        .collect();
    Ok(points)
}

/// Convex hull (counter-clockwise, no collinear points) of `(R1, R2)`
/// pairs, by the monotone-chain algorithm.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Whether `p` lies inside (or within `tol` of) a counter-clockwise convex
/// polygon.
pub fn inside_convex(hull: &[(f64, f64)], p: (f64, f64), tol: f64) -> bool {
    if hull.len() < 3 {
        return hull
            .iter()
            .any(|q| (q.0 - p.0).abs() <= tol && (q.1 - p.1).abs() <= tol);
    }
    hull.iter().zip(hull.iter().cycle().skip(1)).all(|(a, b)| {
        let edge = ((b.0 - a.0), (b.1 - a.1));
        let len = (edge.0 * edge.0 + edge.1 * edge.1).sqrt();
        let cross = edge.0 * (p.1 - a.1) - edge.1 * (p.0 - a.0);
        cross / len >= -tol
    })
}
