// SPDX-License-Identifier: Apache-2.0

//! Linear-inversion and maximum-likelihood reconstruction.
//!
//! Both state and process fits minimize the Poisson negative log-likelihood
//!
//! ```text
//! NLL(ρ) = Σ_k [ N p_k(ρ) − n_k log(N p_k(ρ)) ],   p_k(ρ) = Re Tr(ρ B_k)
//! ```
//!
//! over `ρ = T†T / Tr(T†T)` with `T` lower triangular (real diagonal), so the
//! estimate is positive semidefinite with unit trace by construction. For a
//! state `B_k` is the projector; for a process `ρ` is the χ matrix and
//! `(B_k)_nm = Tr(E_n Π_j E_m ρ_i)` for the setting `k = (i, j)`.

use nalgebra::{DMatrix, DVector};

use super::counts::{ProcessCounts, StateCounts};
use super::lbfgs;
use super::{InputStateSet, ProjectorSet, TomoSettings};
use crate::analysis::{CMatrix4, ProcessMatrix};
use crate::polar::{
    c, hermitian2_eigenvalues, pauli_basis, stokes_matrix, CMatrix2, DensityMatrix, StokesVector,
    C64,
};
use crate::{Error, Result};

/// Weight of the maximally mixed component added to the linear estimate
/// before it seeds the optimizer, so that the Cholesky factor is full rank.
const SEED_MIXING: f64 = 1e-6;
const MIN_PROBABILITY: f64 = 1e-300;

/// Result of a maximum-likelihood fit.
#[derive(Debug, Clone, PartialEq)]
pub struct MleOutcome<T> {
    pub estimate: T,
    pub nll: f64,
    pub iterations: usize,
    /// `false` when the iteration cap was reached; `estimate` is then the best
    /// iterate found.
    pub converged: bool,
}

/// Linear-inversion state estimate. It is Hermitian with unit trace but may
/// have a negative eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearStateEstimate {
    pub matrix: CMatrix2,
    pub stokes: StokesVector,
    /// Axes with no counts in either projector; their Stokes component is 0.
    pub indeterminate: [bool; 3],
    pub min_eigenvalue: f64,
}

impl LinearStateEstimate {
    pub fn is_physical(&self) -> bool {
        self.min_eigenvalue >= -1e-12
    }

    /// Projects the estimate into the Poincaré ball.
    pub fn clipped(&self) -> DensityMatrix {
        let d = self.stokes.degree_of_polarization();
        let s = if d > 1.0 {
            StokesVector::from_array(self.stokes.to_array().map(|x| x / d))
        } else {
            self.stokes
        };
        DensityMatrix::from_stokes(s).expect("clipped into the unit ball")
    }
}

/// `s_i = (n_i+ − n_i−) / (n_i+ + n_i−)` on each axis.
pub fn qst_linear(counts: &StateCounts) -> LinearStateEstimate {
    let mut s = [0.0; 3];
    let mut indeterminate = [false; 3];
    for axis in 0..3 {
        let plus = counts.counts[2 * axis];
        let minus = counts.counts[2 * axis + 1];
        let total = plus + minus;
        if total > 0.0 {
            s[axis] = (plus - minus) / total;
        } else {
            indeterminate[axis] = true;
        }
    }
    let stokes = StokesVector::from_array(s);
    let matrix = stokes_matrix(stokes);
    LinearStateEstimate {
        matrix,
        stokes,
        indeterminate,
        min_eigenvalue: hermitian2_eigenvalues(&matrix)[0],
    }
}

/// A linear Poisson model `p_k = Re Tr(ρ B_k)` with observed counts.
struct Model {
    dim: usize,
    shots: f64,
    ops: Vec<DMatrix<C64>>,
    counts: Vec<f64>,
}

impl Model {
    fn state(counts: &StateCounts) -> Self {
        let ops = ProjectorSet::standard()
            .densities()
            .iter()
            .map(|p| to_dmatrix2(p.matrix()))
            .collect();
        Self {
            dim: 2,
            shots: counts.shots,
            ops,
            counts: counts.counts.to_vec(),
        }
    }

    fn process(counts: &ProcessCounts) -> Self {
        Self {
            dim: 4,
            shots: counts.shots,
            ops: process_operators(),
            counts: counts.counts.iter().flatten().copied().collect(),
        }
    }

    fn probabilities(&self, rho: &DMatrix<C64>) -> Vec<f64> {
        self.ops.iter().map(|b| trace_product(rho, b)).collect()
    }

    fn nll(&self, rho: &DMatrix<C64>) -> f64 {
        self.probabilities(rho)
            .iter()
            .zip(&self.counts)
            .map(|(&p, &n)| term(self.shots, p, n))
            .sum()
    }

    /// Value and gradient with respect to the packed Cholesky parameters.
    fn value_and_gradient(&self, params: &[f64]) -> (f64, Vec<f64>) {
        let d = self.dim;
        let t = unpack(params, d);
        let gram = t.adjoint() * &t;
        let norm = gram.trace().re;
        if !(norm > 0.0) {
            return (f64::INFINITY, vec![0.0; params.len()]);
        }
        let rho = &gram / c(norm, 0.0);
        let mut value = 0.0;
        let mut w = DMatrix::<C64>::zeros(d, d);
        for (b, &n) in self.ops.iter().zip(&self.counts) {
            let p = trace_product(&rho, b);
            value += term(self.shots, p, n);
            let weight = self.shots
                - if n > 0.0 {
                    n / p.max(MIN_PROBABILITY)
                } else {
                    0.0
                };
            w += b * c(weight, 0.0);
        }
        let shift = trace_product(&rho, &w);
        for i in 0..d {
            w[(i, i)] -= c(shift, 0.0);
        }
        // dNLL = (2 / norm) Re Σ_ab dT_ab (W T†)_ba
        let q = (&w * t.adjoint()).transpose();
        let scale = 2.0 / norm;
        let mut grad = Vec::with_capacity(params.len());
        for i in 0..d {
            grad.push(scale * q[(i, i)].re);
        }
        for i in 0..d {
            for j in 0..i {
                grad.push(scale * q[(i, j)].re);
                grad.push(-scale * q[(i, j)].im);
            }
        }
        (value, grad)
    }

    fn fit(
        &self,
        seed: &DMatrix<C64>,
        settings: &TomoSettings,
    ) -> Result<MleOutcome<DMatrix<C64>>> {
        if !(self.shots > 0.0) {
            return Err(Error::InvalidSettings("count table has zero shots".into()));
        }
        if !(settings.tolerance > 0.0) || settings.max_iterations == 0 {
            settings.validate()?;
        }
        let d = self.dim;
        let seed_nll = self.nll(seed);
        let mixed = seed * c(1.0 - SEED_MIXING, 0.0)
            + DMatrix::<C64>::identity(d, d) * c(SEED_MIXING / d as f64, 0.0);
        let x0 = pack(&cholesky_lower_reversed(&mixed), d);
        let min = lbfgs::minimize(
            |x| self.value_and_gradient(x),
            x0,
            settings.tolerance,
            settings.max_iterations,
        );
        let t = unpack(&min.x, d);
        let gram = t.adjoint() * &t;
        let mut rho = &gram / c(gram.trace().re, 0.0);
        rho = (&rho + rho.adjoint()) * c(0.5, 0.0);
        let mut nll = self.nll(&rho);
        if seed_nll <= nll {
            rho = seed.clone();
            nll = seed_nll;
        }
        Ok(MleOutcome {
            estimate: rho,
            nll,
            iterations: min.iterations,
            converged: min.converged,
        })
    }
}

/// One likelihood term with `0 · log 0 = 0`.
fn term(shots: f64, p: f64, n: f64) -> f64 {
    let mean = shots * p.max(0.0);
    if n > 0.0 {
        mean - n * (shots * p.max(MIN_PROBABILITY)).ln()
    } else {
        mean
    }
}

fn trace_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

fn to_dmatrix2(m: &CMatrix2) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |i, j| m[(i, j)])
}

/// `(B_ij)_nm = Tr(E_n Π_j E_m ρ_i)` for inputs `i` and projectors `j`,
/// input-major.
fn process_operators() -> Vec<DMatrix<C64>> {
    let basis = pauli_basis();
    let inputs = InputStateSet::standard().densities();
    let projectors = ProjectorSet::standard().densities();
    let mut ops = Vec::with_capacity(24);
    for input in &inputs {
        for proj in &projectors {
            ops.push(DMatrix::from_fn(4, 4, |n, m| {
                (basis[n] * proj.matrix() * basis[m] * input.matrix()).trace()
            }));
        }
    }
    ops
}

/// Packs a lower-triangular `T` as `[diag re..., (re, im) of T_ij for i > j]`.
fn pack(t: &DMatrix<C64>, d: usize) -> Vec<f64> {
    let mut x = Vec::with_capacity(d * d);
    for i in 0..d {
        x.push(t[(i, i)].re);
    }
    for i in 0..d {
        for j in 0..i {
            x.push(t[(i, j)].re);
            x.push(t[(i, j)].im);
        }
    }
    x
}

fn unpack(x: &[f64], d: usize) -> DMatrix<C64> {
    let mut t = DMatrix::<C64>::zeros(d, d);
    for i in 0..d {
        t[(i, i)] = c(x[i], 0.0);
    }
    let mut k = d;
    for i in 0..d {
        for j in 0..i {
            t[(i, j)] = c(x[k], x[k + 1]);
            k += 2;
        }
    }
    t
}

/// Lower-triangular `T` with `T†T = m` for a positive definite `m`.
///
/// With `J` the exchange matrix and `J m J = L L†`, `T = J L† J`.
fn cholesky_lower_reversed(m: &DMatrix<C64>) -> DMatrix<C64> {
    let d = m.nrows();
    let flipped = DMatrix::from_fn(d, d, |i, j| m[(d - 1 - i, d - 1 - j)]);
    let herm = (&flipped + flipped.adjoint()) * c(0.5, 0.0);
    let l = herm
        .cholesky()
        .expect("seed is positive definite after mixing")
        .unpack();
    let la = l.adjoint();
    DMatrix::from_fn(d, d, |i, j| la[(d - 1 - i, d - 1 - j)])
}

/// Hermitian PSD, unit-trace projection of a Hermitian matrix: negative
/// eigenvalues are set to zero and the trace renormalized.
fn clip_to_physical(m: &DMatrix<C64>) -> DMatrix<C64> {
    let d = m.nrows();
    let herm = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let vals: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = vals.iter().sum();
    if !(total > 0.0) {
        return DMatrix::identity(d, d) * c(1.0 / d as f64, 0.0);
    }
    let diag = DMatrix::from_diagonal(&DVector::from_iterator(
        d,
        vals.iter().map(|v| c(v / total, 0.0)),
    ));
    let out = &eig.eigenvectors * diag * eig.eigenvectors.adjoint();
    (&out + out.adjoint()) * c(0.5, 0.0)
}

/// Poisson negative log-likelihood of a state.
pub fn state_nll(rho: &DensityMatrix, counts: &StateCounts) -> f64 {
    Model::state(counts).nll(&to_dmatrix2(rho.matrix()))
}

/// Poisson negative log-likelihood of a process matrix.
pub fn process_nll(chi: &ProcessMatrix, counts: &ProcessCounts) -> f64 {
    let m = chi.matrix();
    Model::process(counts).nll(&DMatrix::from_fn(4, 4, |i, j| m[(i, j)]))
}

/// Maximum-likelihood state, seeded from the clipped linear estimate.
pub fn qst_mle(counts: &StateCounts, settings: &TomoSettings) -> Result<MleOutcome<DensityMatrix>> {
    let model = Model::state(counts);
    let seed = to_dmatrix2(qst_linear(counts).clipped().matrix());
    let out = model.fit(&seed, settings)?;
    let m = CMatrix2::from_fn(|i, j| out.estimate[(i, j)]);
    Ok(MleOutcome {
        estimate: DensityMatrix::from_physical(m),
        nll: out.nll,
        iterations: out.iterations,
        converged: out.converged,
    })
}

/// Least-squares linear inversion of the 24 frequencies for a Hermitian χ
/// (not necessarily positive).
pub fn qpt_linear(counts: &ProcessCounts) -> CMatrix4 {
    let ops = process_operators();
    let basis = hermitian_basis4();
    let freqs: Vec<f64> = counts
        .counts
        .iter()
        .flatten()
        .map(|n| {
            if counts.shots > 0.0 {
                n / counts.shots
            } else {
                0.0
            }
        })
        .collect();
    let a = DMatrix::<f64>::from_fn(ops.len(), basis.len(), |k, a| {
        trace_product(&basis[a], &ops[k])
    });
    let b = DVector::from_vec(freqs);
    let coeffs = a
        .svd(true, true)
        .solve(&b, 1e-12)
        .expect("SVD with U and V requested");
    let mut chi = DMatrix::<C64>::zeros(4, 4);
    for (g, x) in basis.iter().zip(coeffs.iter()) {
        chi += g * c(*x, 0.0);
    }
    CMatrix4::from_fn(|i, j| chi[(i, j)])
}

/// The 16 Hermitian matrices `E_ii`, `E_ij + E_ji`, `i(E_ij − E_ji)`.
fn hermitian_basis4() -> Vec<DMatrix<C64>> {
    let mut out = Vec::with_capacity(16);
    for i in 0..4 {
        let mut m = DMatrix::<C64>::zeros(4, 4);
        m[(i, i)] = c(1.0, 0.0);
        out.push(m);
    }
    for i in 0..4 {
        for j in 0..i {
            let mut re = DMatrix::<C64>::zeros(4, 4);
            re[(i, j)] = c(1.0, 0.0);
            re[(j, i)] = c(1.0, 0.0);
            out.push(re);
            let mut im = DMatrix::<C64>::zeros(4, 4);
            im[(i, j)] = c(0.0, 1.0);
            im[(j, i)] = c(0.0, -1.0);
            out.push(im);
        }
    }
    out
}

/// Maximum-likelihood process matrix over all 24 settings, seeded from the
/// clipped linear inversion. Trace preservation is not imposed; see
/// [`ProcessMatrix::trace_preservation_deviation`].
pub fn qpt_mle(
    counts: &ProcessCounts,
    settings: &TomoSettings,
) -> Result<MleOutcome<ProcessMatrix>> {
    let model = Model::process(counts);
    let linear = qpt_linear(counts);
    let seed = clip_to_physical(&DMatrix::from_fn(4, 4, |i, j| linear[(i, j)]));
    let out = model.fit(&seed, settings)?;
    let chi = CMatrix4::from_fn(|i, j| out.estimate[(i, j)]);
    let trace = chi.trace().re;
    Ok(MleOutcome {
        estimate: ProcessMatrix::from_parts(chi / c(trace, 0.0)),
        nll: out.nll,
        iterations: out.iterations,
        converged: out.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::KrausSet;
    use crate::depolarizer::{build_bench, isotropic_theta1_angles, DepolarizerSettings};
    use crate::polar::{fidelity, BasisState};
    use crate::tomography::{simulate_counts, simulate_state_counts};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn settings() -> TomoSettings {
        TomoSettings::new(10_000, 0)
    }

    fn numeric_gradient(model: &Model, x: &[f64]) -> Vec<f64> {
        let h = 1e-6;
        (0..x.len())
            .map(|i| {
                let mut up = x.to_vec();
                let mut dn = x.to_vec();
                up[i] += h;
                dn[i] -= h;
                (model.value_and_gradient(&up).0 - model.value_and_gradient(&dn).0) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let rho = DensityMatrix::from_stokes(StokesVector::new(0.3, -0.2, 0.5)).unwrap();
        let state = Model::state(&StateCounts {
            shots: 100.0,
            counts: [70.0, 30.0, 41.0, 59.0, 80.0, 20.0],
        });
        let x = pack(&cholesky_lower_reversed(&to_dmatrix2(rho.matrix())), 2);
        let (_, g) = state.value_and_gradient(&x);
        for (a, b) in g.iter().zip(numeric_gradient(&state, &x)) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-5);
        }

        let counts = ProcessCounts {
            shots: 50.0,
            counts: [
                [40.0, 10.0, 20.0, 30.0, 26.0, 24.0],
                [5.0, 45.0, 22.0, 28.0, 20.0, 30.0],
                [30.0, 20.0, 44.0, 6.0, 25.0, 25.0],
                [24.0, 26.0, 27.0, 23.0, 39.0, 11.0],
            ],
        };
        let process = Model::process(&counts);
        let x: Vec<f64> = (0..16)
            .map(|i| 0.3 + 0.1 * ((i * 7 % 5) as f64) - 0.05 * i as f64)
            .collect();
        let (_, g) = process.value_and_gradient(&x);
        for (a, b) in g.iter().zip(numeric_gradient(&process, &x)) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-4);
        }
    }

    #[test]
    fn cholesky_seed_reproduces_matrix() {
        let rho = DensityMatrix::from_stokes(StokesVector::new(0.1, 0.4, -0.3)).unwrap();
        let m = to_dmatrix2(rho.matrix());
        let t = cholesky_lower_reversed(&m);
        assert_eq!(t[(0, 1)], c(0.0, 0.0));
        let back = t.adjoint() * &t;
        assert!((back - m).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn qst_linear_exact_states() {
        let h = qst_linear(&StateCounts::expected(&BasisState::H.density(), 1000.0));
        assert!(crate::analysis::max_abs2(&(h.matrix - BasisState::H.density().matrix())) < 1e-15);
        let mixed = DensityMatrix::maximally_mixed();
        let m = qst_linear(&StateCounts::expected(&mixed, 1000.0));
        assert!(crate::analysis::max_abs2(&(m.matrix - mixed.matrix())) < 1e-15);
    }

    #[test]
    fn qst_linear_flags_empty_axes() {
        let est = qst_linear(&StateCounts {
            shots: 10.0,
            counts: [10.0, 0.0, 0.0, 0.0, 5.0, 5.0],
        });
        assert_eq!(est.indeterminate, [false, true, false]);
        assert_eq!(est.stokes.s2, 0.0);
    }

    #[test]
    fn qst_linear_reports_unphysical_estimates() {
        // a pure state measured with finite counts overshoots the sphere
        let rho = DensityMatrix::from_stokes(StokesVector::new(0.6, 0.8, 0.0)).unwrap();
        let found = (0..100).any(|seed| {
            let rec = simulate_state_counts(&rho, &TomoSettings::new(1_000, seed));
            let est = qst_linear(&rec.state_counts().unwrap());
            est.stokes.degree_of_polarization() > 1.0 && !est.is_physical()
        });
        assert!(found);
    }

    #[test]
    fn qst_mle_exact_states() {
        for rho in [BasisState::H.density(), DensityMatrix::maximally_mixed()] {
            let out = qst_mle(&StateCounts::expected(&rho, 1_000_000.0), &settings()).unwrap();
            assert!(out.converged);
            assert!(fidelity(&out.estimate, &rho) >= 1.0 - 1e-6);
        }
    }

    #[test]
    fn qst_mle_beats_clipped_linear() {
        let rho = DensityMatrix::from_stokes(StokesVector::new(0.6, 0.8, 0.0)).unwrap();
        for seed in 0..20 {
            let rec = simulate_state_counts(&rho, &TomoSettings::new(1_000, seed));
            let counts = rec.state_counts().unwrap();
            let out = qst_mle(&counts, &settings()).unwrap();
            let clipped = qst_linear(&counts).clipped();
            assert!(out.nll <= state_nll(&clipped, &counts) + 1e-9);
            assert!(DensityMatrix::new(*out.estimate.matrix()).is_ok());
        }
    }

    #[test]
    fn qst_mle_noisy_isotropic_output() {
        let (_, b) = isotropic_theta1_angles();
        let k = build_bench(&DepolarizerSettings::standard(b, 15.0))
            .channel()
            .unwrap();
        let truth = k.apply(&BasisState::P.density());
        for seed in 0..20 {
            let rec = simulate_state_counts(&truth, &TomoSettings::new(10_000, seed));
            let out = qst_mle(&rec.state_counts().unwrap(), &settings()).unwrap();
            assert!(out.estimate.trace_distance(&truth) <= 0.03);
        }
    }

    #[test]
    fn qpt_linear_is_exact_on_noise_free_data() {
        let k = build_bench(&DepolarizerSettings::standard(20.0, 17.0))
            .channel()
            .unwrap();
        let truth = ProcessMatrix::from_kraus(&k);
        let chi = qpt_linear(&ProcessCounts::expected(&k, 1.0));
        assert!(crate::analysis::max_abs4(&(chi - truth.matrix())) < 1e-12);
    }

    #[test]
    fn qpt_mle_identity_channel() {
        let out = qpt_mle(
            &ProcessCounts::expected(&KrausSet::identity(), 10_000.0),
            &settings(),
        )
        .unwrap();
        let eig = out.estimate.eigenvalues();
        for (e, x) in eig.iter().zip([1.0, 0.0, 0.0, 0.0]) {
            assert_abs_diff_eq!(*e, x, epsilon = 1e-6);
        }
    }

    #[test]
    fn qpt_mle_complete_depolarizer() {
        let (_, b) = isotropic_theta1_angles();
        let k = build_bench(&DepolarizerSettings::standard(b, 30.0))
            .channel()
            .unwrap();
        let out = qpt_mle(&ProcessCounts::expected(&k, 10_000.0), &settings()).unwrap();
        for e in out.estimate.eigenvalues() {
            assert_abs_diff_eq!(e, 0.25, epsilon = 1e-6);
        }
    }

    #[test]
    fn qpt_mle_exact_partial_depolarizer() {
        let (_, b) = isotropic_theta1_angles();
        let k = build_bench(&DepolarizerSettings::standard(b, 15.0))
            .channel()
            .unwrap();
        let out = qpt_mle(&ProcessCounts::expected(&k, 10_000.0), &settings()).unwrap();
        assert!(out.converged);
        let eig = out.estimate.eigenvalues();
        for (e, x) in eig.iter().zip([0.75, 1.0 / 12.0, 1.0 / 12.0, 1.0 / 12.0]) {
            assert_abs_diff_eq!(*e, x, epsilon = 1e-6);
        }
        assert!(out.estimate.trace_preservation_deviation() < 1e-5);
    }

    #[test]
    fn qpt_mle_noisy_fig_setting() {
        let (_, b) = isotropic_theta1_angles();
        let k = build_bench(&DepolarizerSettings::standard(b, 15.0))
            .channel()
            .unwrap();
        let rec = simulate_counts(&k, &TomoSettings::new(10_000, 7));
        let out = qpt_mle(&rec.process_counts().unwrap(), &settings()).unwrap();
        assert!(out.converged);
        let eig = out.estimate.eigenvalues();
        assert_abs_diff_eq!(eig[0], 0.75, epsilon = 0.02);
        for e in &eig[1..] {
            assert_abs_diff_eq!(*e, 1.0 / 12.0, epsilon = 0.02);
        }
        let clipped = ProcessMatrix::from_parts({
            let lin = qpt_linear(&rec.process_counts().unwrap());
            let m = clip_to_physical(&DMatrix::from_fn(4, 4, |i, j| lin[(i, j)]));
            CMatrix4::from_fn(|i, j| m[(i, j)])
        });
        assert!(out.nll <= process_nll(&clipped, &rec.process_counts().unwrap()) + 1e-9);
    }

    #[test]
    fn zero_shot_tables_are_rejected() {
        let counts = StateCounts {
            shots: 0.0,
            counts: [0.0; 6],
        };
        assert!(qst_mle(&counts, &settings()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn qst_mle_output_is_always_physical(
            counts in prop::array::uniform6(0u32..2_000),
        ) {
            let counts = StateCounts { shots: 1_000.0, counts: counts.map(f64::from) };
            let out = qst_mle(&counts, &settings()).unwrap();
            prop_assert!(DensityMatrix::new(*out.estimate.matrix()).is_ok());
        }

        #[test]
        fn qpt_mle_output_is_always_physical(
            rows in prop::array::uniform4(prop::array::uniform6(0u32..2_000)),
        ) {
            let counts = ProcessCounts { shots: 1_000.0, counts: rows.map(|r| r.map(f64::from)) };
            let out = qpt_mle(&counts, &settings()).unwrap();
            prop_assert!(ProcessMatrix::new(*out.estimate.matrix()).is_ok());
        }
    }
}
