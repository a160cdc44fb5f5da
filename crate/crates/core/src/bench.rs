// SPDX-License-Identifier: Apache-2.0

//! Temporal-mode model of a bench of birefringent crystals and wave plates.
//!
//! A photon entering the bench is tracked as a map from integer arrival
//! delay to a 2×2 transfer matrix. A wave plate acts on every delay bin. A
//! crystal projects each bin onto its fast and slow axes; the fast part keeps
//! its delay and the slow part is pushed back by the crystal length.
//! Contributions landing on the same delay are summed coherently. Detection
//! does not resolve delay, so the bins that survive are the Kraus operators
//! of the channel.
//!
//! Crystal lengths are exact rationals and are rescaled to coprime integers
//! before propagation so that coincidence of delays is decided exactly.
//! All crystals are taken to be the same material, hence paths with equal
//! total delay carry equal carrier phase and interfere without any extra
//! relative phase.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{Matrix3, Vector3};
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::Signed;

use crate::analysis::max_abs2;
use crate::polar::{
    c, pauli, rotation, stokes_matrix, stokes_of_matrix, CMatrix2, DensityMatrix, JonesMatrix,
    StokesVector, WaveplateKind,
};
use crate::{Error, Result};

/// Transfer matrices with every entry below this magnitude are dropped.
const PRUNE_TOL: f64 = 1e-15;
/// Completeness error accepted when a Kraus set is constructed.
const COMPLETENESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum OpticalElement {
    /// Birefringent crystal. `length` is in units of the base walk-off.
    Crystal {
        length: Rational64,
        fast_axis_deg: f64,
    },
    Waveplate {
        kind: WaveplateKind,
        angle_deg: f64,
    },
}

impl OpticalElement {
    pub fn crystal(length: Rational64, fast_axis_deg: f64) -> Self {
        OpticalElement::Crystal {
            length,
            fast_axis_deg,
        }
    }

    pub fn crystal_int(length: i64, fast_axis_deg: f64) -> Self {
        Self::crystal(Rational64::from_integer(length), fast_axis_deg)
    }

    pub fn hwp(angle_deg: f64) -> Self {
        OpticalElement::Waveplate {
            kind: WaveplateKind::Half,
            angle_deg,
        }
    }

    pub fn qwp(angle_deg: f64) -> Self {
        OpticalElement::Waveplate {
            kind: WaveplateKind::Quarter,
            angle_deg,
        }
    }
}

impl fmt::Display for OpticalElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpticalElement::Crystal {
                length,
                fast_axis_deg,
            } => write!(
                f,
                "crystal({}/{}, {:.6})",
                length.numer(),
                length.denom(),
                fast_axis_deg
            ),
            OpticalElement::Waveplate { kind, angle_deg } => {
                let name = match kind {
                    WaveplateKind::Half => "hwp",
                    WaveplateKind::Quarter => "qwp",
                };
                write!(f, "{name}({angle_deg:.6})")
            }
        }
    }
}

/// An ordered sequence of optical elements, in the order light meets them.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    elements: Vec<OpticalElement>,
}

impl BenchConfig {
    pub fn new(elements: Vec<OpticalElement>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::EmptyBench);
        }
        for el in &elements {
            if let OpticalElement::Crystal { length, .. } = el {
                if !length.is_positive() {
                    return Err(Error::NonPositiveLength(length.to_string()));
                }
            }
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[OpticalElement] {
        &self.elements
    }

    /// Appends `element` at the output end.
    pub fn then(mut self, element: OpticalElement) -> Self {
        if let OpticalElement::Crystal { length, .. } = &element {
            assert!(length.is_positive(), "crystal length must be positive");
        }
        self.elements.push(element);
        self
    }

    pub fn crystal_lengths(&self) -> Vec<Rational64> {
        self.elements
            .iter()
            .filter_map(|el| match el {
                OpticalElement::Crystal { length, .. } => Some(*length),
                _ => None,
            })
            .collect()
    }

    /// Rescales all crystal lengths by the smallest positive rational that
    /// makes every one of them an integer. Ratios are preserved exactly.
    pub fn normalize_delays(&self) -> Result<BenchConfig> {
        let lengths = self.crystal_lengths();
        if let Some(bad) = lengths.iter().find(|l| !l.is_positive()) {
            return Err(Error::NonPositiveLength(bad.to_string()));
        }
        if lengths.is_empty() {
            return Ok(self.clone());
        }
        let denom_lcm = lengths.iter().fold(1i64, |acc, l| acc.lcm(l.denom()));
        let scaled: Vec<i64> = lengths
            .iter()
            .map(|l| (l * Rational64::from_integer(denom_lcm)).to_integer())
            .collect();
        let common = scaled.iter().fold(0i64, |acc, n| acc.gcd(n));
        let factor = Rational64::new(denom_lcm, common);
        let elements = self
            .elements
            .iter()
            .map(|el| match el {
                OpticalElement::Crystal {
                    length,
                    fast_axis_deg,
                } => OpticalElement::Crystal {
                    length: length * factor,
                    fast_axis_deg: *fast_axis_deg,
                },
                other => other.clone(),
            })
            .collect();
        Ok(BenchConfig { elements })
    }

    /// Runs the temporal-mode propagation. Lengths must already be integers
    /// (see [`BenchConfig::normalize_delays`]).
    pub fn propagate(&self) -> Result<KrausSet> {
        let mut bins: BTreeMap<u64, CMatrix2> = BTreeMap::new();
        bins.insert(0, pauli(0));
        for el in &self.elements {
            match el {
                OpticalElement::Waveplate { kind, angle_deg } => {
                    let u = JonesMatrix::waveplate(*kind, *angle_deg).0;
                    for t in bins.values_mut() {
                        *t = u * *t;
                    }
                }
                OpticalElement::Crystal {
                    length,
                    fast_axis_deg,
                } => {
                    if !length.is_integer() || !length.is_positive() {
                        return Err(Error::NonIntegerLength(length.to_string()));
                    }
                    let shift = length.to_integer() as u64;
                    let (fast, slow) = axis_projectors(fast_axis_deg.to_radians());
                    let mut next: BTreeMap<u64, CMatrix2> = BTreeMap::new();
                    for (&delay, t) in &bins {
                        *next.entry(delay).or_insert_with(CMatrix2::zeros) += fast * t;
                        *next.entry(delay + shift).or_insert_with(CMatrix2::zeros) += slow * t;
                    }
                    next.retain(|_, t| max_abs2(t) > PRUNE_TOL);
                    bins = next;
                }
            }
        }
        Ok(KrausSet {
            operators: bins.into_iter().collect(),
        })
    }

    /// Normalizes and propagates in one step.
    pub fn channel(&self) -> Result<KrausSet> {
        self.normalize_delays()?.propagate()
    }
}

impl fmt::Display for BenchConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.elements.iter().map(|e| e.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Projectors onto the fast and slow axes of a crystal whose fast axis sits
/// at `alpha` radians.
fn axis_projectors(alpha: f64) -> (CMatrix2, CMatrix2) {
    let r = rotation(alpha);
    let rt = rotation(-alpha);
    let fast = CMatrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
    let slow = CMatrix2::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
    (r * fast * rt, r * slow * rt)
}

/// Kraus operators of a channel, one per resolved delay (strictly
/// increasing).
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    operators: Vec<(u64, CMatrix2)>,
}

impl KrausSet {
    /// Builds a Kraus set from explicit operators; delays are assigned
    /// `0, 1, 2, ...`.
    pub fn from_operators(ops: Vec<CMatrix2>) -> Result<Self> {
        let set = KrausSet {
            operators: ops
                .into_iter()
                .enumerate()
                .map(|(d, k)| (d as u64, k))
                .collect(),
        };
        let error = set.completeness_error();
        if !(error <= COMPLETENESS_TOL) {
            return Err(Error::IncompleteKraus { error });
        }
        Ok(set)
    }

    pub fn identity() -> Self {
        KrausSet {
            operators: vec![(0, pauli(0))],
        }
    }

    pub fn operators(&self) -> &[(u64, CMatrix2)] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn delays(&self) -> Vec<u64> {
        self.operators.iter().map(|(d, _)| *d).collect()
    }

    /// Largest entry of `Σ K†K − I`.
    pub fn completeness_error(&self) -> f64 {
        let sum = self
            .operators
            .iter()
            .fold(CMatrix2::zeros(), |acc, (_, k)| acc + k.adjoint() * k);
        max_abs2(&(sum - pauli(0)))
    }

    /// Applies the channel to an arbitrary 2×2 operator.
    pub(crate) fn apply_matrix(&self, m: &CMatrix2) -> CMatrix2 {
        self.operators
            .iter()
            .fold(CMatrix2::zeros(), |acc, (_, k)| acc + k * m * k.adjoint())
    }

    /// `ρ ↦ Σ_d K_d ρ K_d†`.
    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::from_physical(self.apply_matrix(rho.matrix()))
    }

    /// Post-composes a wave plate (or any unitary) at the output.
    pub fn then_unitary(&self, u: &JonesMatrix) -> KrausSet {
        KrausSet {
            operators: self.operators.iter().map(|(d, k)| (*d, u.0 * k)).collect(),
        }
    }

    /// Stokes-space action `s ↦ M s + t`.
    pub fn affine_map(&self) -> AffineMap {
        let image = |s: StokesVector| stokes_of_matrix(&self.apply_matrix(&stokes_matrix(s)));
        let t = Vector3::from(image(StokesVector::origin()).to_array());
        let mut m = Matrix3::zeros();
        for j in 0..3 {
            let mut axis = [0.0; 3];
            axis[j] = 1.0;
            let col = Vector3::from(image(StokesVector::from_array(axis)).to_array()) - t;
            m.set_column(j, &col);
        }
        AffineMap {
            matrix: m,
            translation: t,
        }
    }
}

/// Image of the Poincaré ball under a qubit channel: `s ↦ M s + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub matrix: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl AffineMap {
    pub fn identity() -> Self {
        AffineMap {
            matrix: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn apply(&self, s: StokesVector) -> StokesVector {
        let v = self.matrix * Vector3::from(s.to_array()) + self.translation;
        StokesVector::new(v[0], v[1], v[2])
    }

    /// Left-multiplies the linear part by `diag(1, -1, -1)`, undoing the
    /// reflections along S2 and S3 that a half-wave plate at 0° would add.
    pub fn reflection_compensated(&self) -> AffineMap {
        let flip = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0));
        AffineMap {
            matrix: flip * self.matrix,
            translation: flip * self.translation,
        }
    }

    pub fn largest_singular_value(&self) -> f64 {
        self.matrix.singular_values().max()
    }
}

impl Default for AffineMap {
    fn default() -> Self {
        Self::identity()
    }
}
