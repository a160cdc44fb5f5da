// SPDX-License-Identifier: Apache-2.0

//! Simulated photon-counting tomography.
//!
//! Process tomography prepares the four inputs `{H, V, P, R}` and analyses
//! the output in the six projectors `{H, V, P, M, R, L}`; every one of the 24
//! settings is counted independently with Poisson statistics and the same
//! mean photon number `N`. States and processes are reconstructed either by
//! linear inversion or by maximizing the Poisson likelihood over a Cholesky
//! parameterization, which keeps the estimate positive with unit trace.

mod counts;
mod lbfgs;
mod mle;

pub use counts::{simulate_counts, simulate_state_counts, CountRecord, ProcessCounts, StateCounts};
pub use mle::{
    process_nll, qpt_linear, qpt_mle, qst_linear, qst_mle, state_nll, LinearStateEstimate,
    MleOutcome,
};

use crate::bench::KrausSet;
use crate::polar::{BasisState, DensityMatrix};
use crate::{Error, Result};

/// The six analysis projectors, in the order `H, V, P, M, R, L`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorSet {
    states: [BasisState; 6],
}

impl ProjectorSet {
    pub fn standard() -> Self {
        Self {
            states: BasisState::ALL,
        }
    }

    pub fn states(&self) -> &[BasisState; 6] {
        &self.states
    }

    pub fn densities(&self) -> [DensityMatrix; 6] {
        self.states.map(BasisState::density)
    }
}

impl Default for ProjectorSet {
    fn default() -> Self {
        Self::standard()
    }
}

/// The four preparation states, in the order `H, V, P, R`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputStateSet {
    states: [BasisState; 4],
}

impl InputStateSet {
    pub fn standard() -> Self {
        Self {
            states: [BasisState::H, BasisState::V, BasisState::P, BasisState::R],
        }
    }

    pub fn states(&self) -> &[BasisState; 4] {
        &self.states
    }

    pub fn densities(&self) -> [DensityMatrix; 4] {
        self.states.map(BasisState::density)
    }
}

impl Default for InputStateSet {
    fn default() -> Self {
        Self::standard()
    }
}

/// Shot budget, seed and optimizer limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TomoSettings {
    /// Mean photon number per measurement setting.
    pub shots: u64,
    pub seed: u64,
    /// Relative change of the negative log-likelihood that ends the fit.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl TomoSettings {
    pub fn new(shots: u64, seed: u64) -> Self {
        Self {
            shots,
            seed,
            tolerance: 1e-9,
            max_iterations: 100_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::InvalidSettings(
                "shots per setting must be at least 1".into(),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidSettings(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidSettings(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

impl Default for TomoSettings {
    fn default() -> Self {
        Self::new(10_000, 0)
    }
}

/// Born-rule probability `Tr(Π · E(ρ))`.
pub fn expected_probability(
    kraus: &KrausSet,
    input: &DensityMatrix,
    projector: &DensityMatrix,
) -> f64 {
    kraus.apply(input).probability(projector).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::max_abs2;
    use crate::bench::BenchConfig;
    use crate::depolarizer::{build_bench, isotropic_theta1_angles, DepolarizerSettings};
    use crate::polar::{pauli, StokesVector};
    use approx::assert_abs_diff_eq;

    #[test]
    fn projector_pairs_resolve_identity() {
        let p = ProjectorSet::standard().densities();
        for pair in p.chunks(2) {
            let sum = pair[0].matrix() + pair[1].matrix();
            assert!(max_abs2(&(sum - pauli(0))) < 1e-15);
        }
        // mutually unbiased
        for (i, a) in p.iter().enumerate() {
            for b in p.iter().skip(2 * (i / 2 + 1)) {
                assert_abs_diff_eq!(a.probability(b), 0.5, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn input_states_span_operator_space() {
        let inputs = InputStateSet::standard().densities();
        let mut m = nalgebra::Matrix4::<f64>::zeros();
        for (row, rho) in inputs.iter().enumerate() {
            let s = rho.stokes();
            m.set_row(row, &nalgebra::RowVector4::new(1.0, s.s1, s.s2, s.s3));
        }
        assert!(m.determinant().abs() > 0.1);
    }

    #[test]
    fn settings_validation() {
        assert!(TomoSettings::new(10, 1).validate().is_ok());
        assert!(TomoSettings::new(0, 1).validate().is_err());
        let mut s = TomoSettings::new(10, 1);
        s.tolerance = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn expected_probability_examples() {
        let h = BasisState::H.density();
        assert_abs_diff_eq!(
            expected_probability(&KrausSet::identity(), &h, &h),
            1.0,
            epsilon = 1e-15
        );

        let lyot = BenchConfig::new(vec![
            crate::bench::OpticalElement::crystal_int(1, 0.0),
            crate::bench::OpticalElement::crystal_int(2, 45.0),
        ])
        .unwrap()
        .channel()
        .unwrap();
        for input in BasisState::ALL {
            for proj in BasisState::ALL {
                let p = expected_probability(&lyot, &input.density(), &proj.density());
                assert_abs_diff_eq!(p, 0.5, epsilon = 1e-12);
            }
        }

        // D = 2/3 isotropic: Born rule on the shrunken Stokes vector
        let (_, b) = isotropic_theta1_angles();
        let bench = crate::depolarizer::with_reflection_compensation(build_bench(
            &DepolarizerSettings::standard(b, 15.0),
        ));
        let k = bench.channel().unwrap();
        let p = expected_probability(&k, &h, &h);
        assert_abs_diff_eq!(p, 5.0 / 6.0, epsilon = 1e-12);
        let shrunk = DensityMatrix::from_stokes(StokesVector::new(2.0 / 3.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(p, shrunk.probability(&h), epsilon = 1e-12);
    }
}
