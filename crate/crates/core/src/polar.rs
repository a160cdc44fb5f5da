// SPDX-License-Identifier: Apache-2.0

//! Polarization-qubit conventions.
//!
//! States are written in the `{|H⟩, |V⟩}` basis. The Pauli basis is ordered
//! along the Stokes axes rather than the usual `(x, y, z)`:
//!
//! | index | operator | `+1` eigenstate |
//! |-------|----------|-----------------|
//! | 0     | `I`      | –               |
//! | 1     | `diag(1, -1)` | `|H⟩`      |
//! | 2     | `[[0, 1], [1, 0]]` | `|P⟩ = (|H⟩ + |V⟩)/√2` |
//! | 3     | `[[0, -i], [i, 0]]` | `|R⟩ = (|H⟩ + i|V⟩)/√2` |
//!
//! With this ordering a Stokes component `s_k` is simply `Tr(ρ E_k)`, and the
//! rows of a process matrix line up index-for-index with the ellipsoid radii.
//!
//! Angles are taken in degrees at every public entry point.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix2 = Matrix2<C64>;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const EIGEN_TOL: f64 = 1e-10;
/// Stokes vectors longer than `1 + STOKES_REJECT` are refused as inputs.
const STOKES_REJECT: f64 = 1e-9;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// The four basis operators `E_0..E_3`, Stokes-aligned.
pub fn pauli(index: usize) -> CMatrix2 {
    let o = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match index {
        0 => CMatrix2::new(one, o, o, one),
        1 => CMatrix2::new(one, o, o, -one),
        2 => CMatrix2::new(o, one, one, o),
        3 => CMatrix2::new(o, -i, i, o),
        _ => panic!("Pauli index {index} out of range"),
    }
}

/// All four basis operators in order.
pub fn pauli_basis() -> [CMatrix2; 4] {
    [pauli(0), pauli(1), pauli(2), pauli(3)]
}

/// A point in (or on) the Poincaré sphere; `S0 = 1` is implied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesVector {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesVector {
    pub const fn new(s1: f64, s2: f64, s3: f64) -> Self {
        Self { s1, s2, s3 }
    }

    pub const fn origin() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.s1, self.s2, self.s3]
    }

    /// Length of the vector, `D = √(S1² + S2² + S3²)`.
    pub fn degree_of_polarization(&self) -> f64 {
        (self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3).sqrt()
    }
}

/// A 2×2 Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix2,
}

impl DensityMatrix {
    /// Validates `matrix` against the density-matrix invariants.
    pub fn new(matrix: CMatrix2) -> Result<Self> {
        let herm = crate::analysis::max_abs2(&(matrix - matrix.adjoint()));
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian (deviation {herm:.3e})"
            )));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {trace} is not 1")));
        }
        let min_eig = hermitian2_eigenvalues(&matrix)[0];
        if min_eig < -EIGEN_TOL {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Symmetrizes and renormalizes a matrix that is already physical up to
    /// rounding. Used for outputs of trace-preserving maps.
    pub(crate) fn from_physical(matrix: CMatrix2) -> Self {
        let herm = (matrix + matrix.adjoint()) * c(0.5, 0.0);
        let tr = herm.trace().re;
        Self {
            matrix: herm / c(tr, 0.0),
        }
    }

    /// `ρ = (I + s1 E1 + s2 E2 + s3 E3) / 2`.
    pub fn from_stokes(s: StokesVector) -> Result<Self> {
        let length = s.degree_of_polarization();
        if length > 1.0 + STOKES_REJECT {
            return Err(Error::UnphysicalStokes { length });
        }
        Ok(Self {
            matrix: stokes_matrix(s),
        })
    }

    /// Pure state `|ψ⟩⟨ψ|`; the ket is normalized first.
    pub fn from_ket(ket: Vector2<C64>) -> Self {
        let k = ket / c(ket.norm(), 0.0);
        Self {
            matrix: k * k.adjoint(),
        }
    }

    pub fn maximally_mixed() -> Self {
        Self {
            matrix: pauli(0) * c(0.5, 0.0),
        }
    }

    pub fn matrix(&self) -> &CMatrix2 {
        &self.matrix
    }

    /// `s_k = Tr(ρ E_k)`.
    pub fn stokes(&self) -> StokesVector {
        stokes_of_matrix(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        (self.matrix * self.matrix).trace().re
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> [f64; 2] {
        hermitian2_eigenvalues(&self.matrix)
    }

    /// Probability of the outcome `projector` (a pure-state density matrix).
    pub fn probability(&self, projector: &DensityMatrix) -> f64 {
        (projector.matrix * self.matrix).trace().re
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let diff = self.matrix - other.matrix;
        let [a, b] = hermitian2_eigenvalues(&diff);
        0.5 * (a.abs() + b.abs())
    }
}

pub(crate) fn stokes_matrix(s: StokesVector) -> CMatrix2 {
    (pauli(0) + pauli(1) * c(s.s1, 0.0) + pauli(2) * c(s.s2, 0.0) + pauli(3) * c(s.s3, 0.0))
        * c(0.5, 0.0)
}

pub(crate) fn stokes_of_matrix(m: &CMatrix2) -> StokesVector {
    StokesVector::new(
        (m * pauli(1)).trace().re,
        (m * pauli(2)).trace().re,
        (m * pauli(3)).trace().re,
    )
}

/// Ascending eigenvalues of a Hermitian 2×2 matrix (closed form).
pub(crate) fn hermitian2_eigenvalues(m: &CMatrix2) -> [f64; 2] {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mean = 0.5 * (a + d);
    let half_gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    [mean - half_gap, mean + half_gap]
}

/// Squared (Uhlmann) fidelity between two qubit states:
/// `F = Tr(ρσ) + 2√(det ρ · det σ)`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let overlap = (rho.matrix * sigma.matrix).trace().re;
    let det = rho.matrix.determinant().re.max(0.0) * sigma.matrix.determinant().re.max(0.0);
    (overlap + 2.0 * det.sqrt()).clamp(0.0, 1.0)
}

/// The six polarization states on the Stokes axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisState {
    H,
    V,
    P,
    M,
    R,
    L,
}

impl BasisState {
    pub const ALL: [BasisState; 6] = [
        BasisState::H,
        BasisState::V,
        BasisState::P,
        BasisState::M,
        BasisState::R,
        BasisState::L,
    ];

    pub fn label(self) -> &'static str {
        match self {
            BasisState::H => "H",
            BasisState::V => "V",
            BasisState::P => "P",
            BasisState::M => "M",
            BasisState::R => "R",
            BasisState::L => "L",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.label() == label)
    }

    /// Kets as written in the `{|H⟩, |V⟩}` basis. `|M⟩ = (-|H⟩ + |V⟩)/√2`
    /// and `|L⟩ = (i|H⟩ + |V⟩)/√2` carry the global phases of the usual
    /// lab convention; projectors are unaffected.
    pub fn ket(self) -> Vector2<C64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            BasisState::H => Vector2::new(c(1.0, 0.0), c(0.0, 0.0)),
            BasisState::V => Vector2::new(c(0.0, 0.0), c(1.0, 0.0)),
            BasisState::P => Vector2::new(c(h, 0.0), c(h, 0.0)),
            BasisState::M => Vector2::new(c(-h, 0.0), c(h, 0.0)),
            BasisState::R => Vector2::new(c(h, 0.0), c(0.0, h)),
            BasisState::L => Vector2::new(c(0.0, h), c(h, 0.0)),
        }
    }

    pub fn density(self) -> DensityMatrix {
        DensityMatrix::from_ket(self.ket())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveplateKind {
    Half,
    Quarter,
}

/// A 2×2 unitary acting on `(H, V)` amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesMatrix(pub CMatrix2);

impl JonesMatrix {
    /// Ideal wave plate with its fast axis at `angle_deg` from horizontal.
    ///
    /// `HWP(θ) = [[cos 2θ, sin 2θ], [sin 2θ, -cos 2θ]]` and
    /// `QWP(θ) = R(θ) diag(1, i) R(-θ)`.
    pub fn waveplate(kind: WaveplateKind, angle_deg: f64) -> Self {
        let t = angle_deg.to_radians();
        match kind {
            WaveplateKind::Half => {
                let (s2, c2) = (2.0 * t).sin_cos();
                JonesMatrix(CMatrix2::new(
                    c(c2, 0.0),
                    c(s2, 0.0),
                    c(s2, 0.0),
                    c(-c2, 0.0),
                ))
            }
            WaveplateKind::Quarter => {
                let r = rotation(t);
                let d = CMatrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
                JonesMatrix(r * d * r.transpose())
            }
        }
    }

    pub fn matrix(&self) -> &CMatrix2 {
        &self.0
    }

    pub fn unitarity_error(&self) -> f64 {
        crate::analysis::max_abs2(&(self.0.adjoint() * self.0 - pauli(0)))
    }

    pub fn apply(&self, ket: &Vector2<C64>) -> Vector2<C64> {
        self.0 * ket
    }

    pub fn apply_density(&self, rho: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::from_physical(self.0 * rho.matrix * self.0.adjoint())
    }
}

/// Real rotation `R(θ) = [[cos θ, -sin θ], [sin θ, cos θ]]`, θ in radians.
pub(crate) fn rotation(theta: f64) -> CMatrix2 {
    let (s, co) = theta.sin_cos();
    CMatrix2::new(c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0))
}
