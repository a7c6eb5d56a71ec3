//! Hamiltonian, noise sampling and Lindblad time evolution.

mod density;
mod evolve;
mod master;
mod noise;
mod reduced;

pub use density::DensityMatrix;
pub use evolve::{evolve, evolve_with, integrate, Rk4, TimeGrid, DEFAULT_STEP_NS};
pub use master::{
    build_hamiltonian, collapse_operators, interaction_energies, lindblad_rhs, DenseLindblad, HamiltonianParams,
    LinearFlow, MasterEquation, RydbergLindblad,
};
pub use noise::{mhz, sample_fluctuation, sample_noise, NoiseParams, NoiseRealization};
pub use reduced::{interaction_symmetries, ReducedLindblad, SymmetryReduction};

use crate::basis::BasisCatalog;
use crate::error::Result;
use crate::geometry::AtomConfiguration;

/// Computes catalog probability profiles for one configuration. The orbit
/// structure is built once and reused for every noise realization.
#[derive(Debug, Clone)]
pub struct ProfileSimulator {
    reduction: SymmetryReduction,
    projectors: Vec<Vec<(u32, f64)>>,
    rabi: f64,
}

impl ProfileSimulator {
    pub fn new(config: &AtomConfiguration, catalog: &BasisCatalog, params: &HamiltonianParams) -> Result<Self> {
        let reduction = SymmetryReduction::new(config, params);
        let projectors = reduction.projectors(catalog)?;
        Ok(ProfileSimulator {
            reduction,
            projectors,
            rabi: params.rabi,
        })
    }

    pub fn reduction(&self) -> &SymmetryReduction {
        &self.reduction
    }

    /// Evolves from |00…0⟩ and returns `profiles[id][k]`, the probability of
    /// catalog state `id` at grid point `k`.
    pub fn profiles(&self, noise: &NoiseRealization, grid: TimeGrid, step_ns: f64) -> Result<Vec<Vec<f64>>> {
        let red = &self.reduction;
        let generator = red.generator(self.rabi, noise);
        let mut profiles = vec![Vec::with_capacity(grid.points()); self.projectors.len()];
        integrate(
            &generator,
            red.ground_state(),
            grid,
            step_ns,
            |x| red.trace(x),
            |_, x| {
                for (weights, profile) in self.projectors.iter().zip(profiles.iter_mut()) {
                    let p: f64 = weights.iter().map(|&(r, w)| w * x[r as usize].re).sum();
                    if !(-1e-9..=1.0 + 1e-9).contains(&p) {
                        return Err(crate::Error::ProbabilityRange(p));
                    }
                    profile.push(p.clamp(0.0, 1.0));
                }
                Ok(())
            },
        )?;
        Ok(profiles)
    }
}

/// One-shot form of [`ProfileSimulator::profiles`].
pub fn catalog_profiles(
    config: &AtomConfiguration,
    catalog: &BasisCatalog,
    params: &HamiltonianParams,
    noise: &NoiseRealization,
    grid: TimeGrid,
    step_ns: f64,
) -> Result<Vec<Vec<f64>>> {
    ProfileSimulator::new(config, catalog, params)?.profiles(noise, grid, step_ns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis_catalog, probability};
    use crate::geometry::{configuration_by_name, InteractionMode};

    #[test]
    fn reduced_profiles_match_full_density_matrix() {
        let noise = NoiseRealization {
            fluctuation: 0.03,
            rabi_multiplier: 0.98,
            dephasing_rate: 0.4,
            decay_rate: 0.06,
        };
        let grid = TimeGrid::new(400, 50).unwrap();
        for (name, mode) in [
            ("chain-5", InteractionMode::Nnn),
            ("T3", InteractionMode::Nn),
            ("K4e", InteractionMode::Full),
        ] {
            let config = configuration_by_name(name).unwrap();
            let params = HamiltonianParams {
                mode,
                ..HamiltonianParams::default()
            };
            let catalog = build_basis_catalog(&config, 9.7577);
            let fast = catalog_profiles(&config, &catalog, &params, &noise, grid, 1.0).unwrap();
            let states = evolve(
                &RydbergLindblad::new(&config, &params, &noise),
                DensityMatrix::ground(config.atom_count()),
                grid,
                1.0,
            )
            .unwrap();
            for (id, w) in catalog.states.iter().enumerate() {
                for (k, rho) in states.iter().enumerate() {
                    let p = probability(rho, w).unwrap();
                    assert!((p - fast[id][k]).abs() < 1e-12, "{name} {} k={k}", w.label);
                }
            }
        }
    }
}
