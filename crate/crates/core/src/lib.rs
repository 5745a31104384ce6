//! Equilibrium states, modular cocycles and the homoclinic groupoid
//! algebra on the two-sided full shift.
//!
//! The crate computes equilibrium states for finite-range potentials via
//! the transfer matrix, evaluates the associated cocycle and conjugating
//! homeomorphisms exactly on cylinder sets, verifies the change-of-
//! variables (Gibbs) identity and Bowen's inequalities numerically, and
//! realizes the convolution *-algebra of finitely supported kernels on
//! the homoclinic groupoid together with its modular flow and KMS
//! condition.

pub mod algebra;
pub mod cocycle;
pub mod error;
pub mod gibbs;
pub mod report;
pub mod symbolic;
pub mod thermo;

pub use error::{Error, Result};

#[cfg(test)]
pub(crate) mod testutil {
    use crate::thermo::FiniteRangePotential;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    pub fn random_potential(
        d: u8,
        r: usize,
        amp: f64,
        rng: &mut ChaCha8Rng,
    ) -> FiniteRangePotential {
        let n = (d as usize).pow(r as u32);
        let values = (0..n).map(|_| rng.gen_range(-amp..amp)).collect();
        FiniteRangePotential::new(d, r, values).unwrap()
    }
}
