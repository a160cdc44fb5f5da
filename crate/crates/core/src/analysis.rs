// SPDX-License-Identifier: Apache-2.0

//! Process-matrix and Stokes-space diagnostics of qubit channels.

use nalgebra::{Matrix3, Matrix4};

use crate::bench::KrausSet;
use crate::polar::{c, pauli_basis, CMatrix2, DensityMatrix, C64};
use crate::{Error, Result};

pub type CMatrix4 = Matrix4<C64>;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
/// Eigenvalues in `[-EIGEN_CLIP, 0)` are treated as rounding noise.
pub const EIGEN_CLIP: f64 = 1e-10;
/// Tolerance of the Pauli-channel feasibility test on each `λ_i`.
pub const FEASIBILITY_TOL: f64 = 1e-12;
const DIAGONAL_TOL: f64 = 1e-10;

pub(crate) fn max_abs2(m: &CMatrix2) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub(crate) fn max_abs4(m: &CMatrix4) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// A qubit process matrix `χ` in the Stokes-aligned Pauli basis `E_0..E_3`:
/// `E(ρ) = Σ_mn χ_mn E_m ρ E_n†`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessMatrix {
    chi: CMatrix4,
}

impl ProcessMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(chi: CMatrix4) -> Result<Self> {
        let herm = max_abs4(&(chi - chi.adjoint()));
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidProcess(format!(
                "not Hermitian (deviation {herm:.3e})"
            )));
        }
        let trace = chi.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::InvalidProcess(format!("trace {trace} is not 1")));
        }
        let eig = chi_eigenvalues(&chi)?;
        if eig[3] < -EIGEN_CLIP {
            return Err(Error::InvalidProcess(format!(
                "negative eigenvalue {:.3e}",
                eig[3]
            )));
        }
        Ok(Self { chi })
    }

    /// Wraps a matrix known to be Hermitian PSD with unit trace.
    pub(crate) fn from_parts(chi: CMatrix4) -> Self {
        Self { chi }
    }

    /// Expands each Kraus operator as `K_d = Σ_m a_dm E_m` with
    /// `a_dm = Tr(E_m K_d) / 2`, then `χ_mn = Σ_d a_dm a*_dn`.
    pub fn from_kraus(kraus: &KrausSet) -> Self {
        let basis = pauli_basis();
        let mut chi = CMatrix4::zeros();
        for (_, k) in kraus.operators() {
            let coeffs: Vec<C64> = basis.iter().map(|e| (e * k).trace() * 0.5).collect();
            for m in 0..4 {
                for n in 0..4 {
                    chi[(m, n)] += coeffs[m] * coeffs[n].conj();
                }
            }
        }
        Self { chi }
    }

    pub fn matrix(&self) -> &CMatrix4 {
        &self.chi
    }

    pub(crate) fn apply_matrix(&self, rho: &CMatrix2) -> CMatrix2 {
        let basis = pauli_basis();
        let mut out = CMatrix2::zeros();
        for m in 0..4 {
            for n in 0..4 {
                let w = self.chi[(m, n)];
                if w != c(0.0, 0.0) {
                    out += basis[m] * rho * basis[n].adjoint() * w;
                }
            }
        }
        out
    }

    /// Applies the map; the result is a valid state only if the process is
    /// trace preserving.
    pub fn apply(&self, rho: &DensityMatrix) -> CMatrix2 {
        self.apply_matrix(rho.matrix())
    }

    /// Eigenvalues, descending, with noise-level negatives clipped to zero.
    pub fn eigenvalues(&self) -> [f64; 4] {
        chi_eigenvalues(&self.chi).expect("ProcessMatrix is Hermitian by construction")
    }

    /// Frobenius norm of `Σ_mn χ_mn E_n† E_m − I`.
    pub fn trace_preservation_deviation(&self) -> f64 {
        let basis = pauli_basis();
        let mut acc = CMatrix2::zeros();
        for m in 0..4 {
            for n in 0..4 {
                acc += basis[n].adjoint() * basis[m] * self.chi[(m, n)];
            }
        }
        (acc - basis[0]).norm()
    }

    /// Spread of the tightest cluster of three eigenvalues,
    /// `min(λ_1 − λ_3, λ_2 − λ_4)` in descending order. Zero exactly when
    /// three eigenvalues coincide, i.e. when the ball is mapped onto a sphere
    /// (possibly reflected, and including negative degrees of polarization).
    pub fn isotropy_deviation(&self) -> f64 {
        let eig = self.eigenvalues();
        (eig[0] - eig[2]).min(eig[1] - eig[3])
    }
}

/// Descending eigenvalues of a Hermitian 4×4 matrix. Values within
/// [`EIGEN_CLIP`] below zero are set to zero.
pub fn chi_eigenvalues(chi: &CMatrix4) -> Result<[f64; 4]> {
    let herm = max_abs4(&(chi - chi.adjoint()));
    if herm > HERMITIAN_TOL {
        return Err(Error::InvalidProcess(format!(
            "not Hermitian (deviation {herm:.3e})"
        )));
    }
    let sym = (chi + chi.adjoint()) * c(0.5, 0.0);
    let mut eig: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let mut out = [0.0; 4];
    for (o, e) in out.iter_mut().zip(eig) {
        *o = if (-EIGEN_CLIP..0.0).contains(&e) {
            0.0
        } else {
            e
        };
    }
    Ok(out)
}

/// Polar decomposition `M = O·S` of a Stokes-space map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidReport {
    /// Orthogonal factor `O`.
    pub orthogonal: Matrix3<f64>,
    /// Symmetric positive semidefinite factor `S`.
    pub stretch: Matrix3<f64>,
    /// Signed ellipsoid radii. When `O` is diagonal these are the diagonal of
    /// `M` along the Stokes axes; otherwise they are the singular values of
    /// `M` with the sign of `det M` carried by the smallest one.
    pub radii: [f64; 3],
    /// Radii with negative sign, i.e. a reflection along that radius.
    pub reflections: [bool; 3],
    /// Whether `O` is diagonal, so that the radii lie on the Stokes axes.
    pub axis_aligned: bool,
}

impl EllipsoidReport {
    pub fn abs_radii(&self) -> [f64; 3] {
        self.radii.map(f64::abs)
    }

    pub fn orthogonal_det(&self) -> f64 {
        self.orthogonal.determinant()
    }
}

fn is_diagonal(m: &Matrix3<f64>) -> bool {
    (0..3).all(|i| (0..3).all(|j| i == j || m[(i, j)].abs() <= DIAGONAL_TOL))
}

/// Decomposes `M = O·S`. For a rank-deficient `M` the orthogonal factor is
/// completed with `det O = sign(det M)` if `det M ≠ 0` and `+1` otherwise;
/// `M = 0` yields `O = I`.
pub fn polar_decompose(m: &Matrix3<f64>) -> EllipsoidReport {
    if is_diagonal(m) {
        let d = m.diagonal();
        let mut signs = d.map(|x| if x < 0.0 { -1.0 } else { 1.0 });
        let zeros: Vec<usize> = (0..3).filter(|&i| d[i].abs() <= DIAGONAL_TOL).collect();
        let det_sign: f64 = signs.iter().product();
        if det_sign < 0.0 {
            if let Some(&i) = zeros.first() {
                signs[i] = -signs[i];
            }
        }
        let orthogonal = Matrix3::from_diagonal(&signs);
        let stretch = Matrix3::from_diagonal(&d.map(f64::abs));
        let radii = [d[0], d[1], d[2]];
        return EllipsoidReport {
            orthogonal,
            stretch,
            radii,
            reflections: radii.map(|r| r < 0.0),
            axis_aligned: true,
        };
    }

    let svd = m.svd(true, true);
    let mut u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");
    let sigma = svd.singular_values;
    // order singular values descending to make the completion deterministic
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    let smallest = order[2];

    let det_m = m.determinant();
    let rank_deficient = sigma[smallest] <= DIAGONAL_TOL;
    let mut orthogonal = u * v_t;
    if rank_deficient && orthogonal.determinant() < 0.0 {
        // the column paired with a zero singular value is free
        let col = -u.column(smallest);
        u.set_column(smallest, &col);
        orthogonal = u * v_t;
    }
    let v = v_t.transpose();
    let stretch = v * Matrix3::from_diagonal(&sigma) * v_t;

    let sign = if rank_deficient || det_m >= 0.0 {
        1.0
    } else {
        -1.0
    };
    let radii = [sigma[order[0]], sigma[order[1]], sign * sigma[order[2]]];
    let axis_aligned = is_diagonal(&orthogonal);
    EllipsoidReport {
        orthogonal,
        stretch,
        radii,
        reflections: radii.map(|r| r < 0.0),
        axis_aligned,
    }
}

/// Feasibility of a unital Pauli-diagonal channel with signed radii `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    /// Eigenvalues of the channel's χ matrix, in Pauli order.
    pub lambda: [f64; 4],
}

/// `λ0 = (1+R1+R2+R3)/4`, `λ1 = (1+R1−R2−R3)/4`, `λ2 = (1−R1+R2−R3)/4`,
/// `λ3 = (1−R1−R2+R3)/4`; feasible iff every `λ_i ∈ [0, 1]`.
pub fn pauli_feasible(r: [f64; 3]) -> Feasibility {
    let [r1, r2, r3] = r;
    let lambda = [
        (1.0 + r1 + r2 + r3) / 4.0,
        (1.0 + r1 - r2 - r3) / 4.0,
        (1.0 - r1 + r2 - r3) / 4.0,
        (1.0 - r1 - r2 + r3) / 4.0,
    ];
    let feasible = lambda
        .iter()
        .all(|&l| (-FEASIBILITY_TOL..=1.0 + FEASIBILITY_TOL).contains(&l));
    Feasibility { feasible, lambda }
}
