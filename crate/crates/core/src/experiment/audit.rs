use serde::{Deserialize, Serialize};

use crate::datagen::{sample_realization, TaskSpec};
use crate::dynamics::{evolve_with, DensityMatrix, ProfileSimulator, RydbergLindblad};
use crate::error::Result;

pub const TRACE_LIMIT: f64 = 1e-6;
pub const HERMITICITY_LIMIT: f64 = 1e-9;
pub const EIGENVALUE_LIMIT: f64 = -1e-7;
pub const STEP_HALVING_LIMIT: f64 = 1e-6;

/// Worst-case numerical diagnostics for one configuration of a task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationAudit {
    pub configuration: String,
    pub samples: usize,
    pub max_trace_drift: f64,
    pub max_hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    /// Largest probability change when the integration step is halved.
    pub max_step_halving_delta: f64,
    /// Largest difference between symmetry-reduced and full-matrix profiles.
    pub max_reduced_vs_full: f64,
}

impl ConfigurationAudit {
    pub fn passed(&self) -> bool {
        self.max_trace_drift <= TRACE_LIMIT
            && self.max_hermiticity_residual <= HERMITICITY_LIMIT
            && self.min_eigenvalue >= EIGENVALUE_LIMIT
            && self.max_step_halving_delta < STEP_HALVING_LIMIT
            && self.max_reduced_vs_full < STEP_HALVING_LIMIT
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantAudit {
    pub configurations: Vec<ConfigurationAudit>,
    pub passed: bool,
}

/// Re-simulates the first `samples` noise draws of every configuration in
/// `spec` with the full density matrix and checks trace, Hermiticity and
/// positivity at each grid point, plus step-halving convergence of the
/// profiles.
pub fn audit_invariants(spec: &TaskSpec, samples: usize) -> Result<InvariantAudit> {
    spec.validate()?;
    let classes = spec.classes()?;
    let hamiltonian = spec.physics.hamiltonian();
    let mut out = Vec::new();
    for (position, (config, catalog)) in spec.catalogs()?.into_iter().enumerate() {
        let class_index = classes
            .iter()
            .position(|c| c.configuration == position)
            .expect("every configuration contributes a class");
        let simulator = ProfileSimulator::new(&config, &catalog, &hamiltonian)?;
        let mut audit = ConfigurationAudit {
            configuration: config.name().to_string(),
            samples,
            max_trace_drift: 0.0,
            max_hermiticity_residual: 0.0,
            min_eigenvalue: f64::INFINITY,
            max_step_halving_delta: 0.0,
            max_reduced_vs_full: 0.0,
        };
        for s in 0..samples {
            let noise = sample_realization(spec, class_index, s)?;
            let coarse = simulator.profiles(&noise, spec.grid, spec.step_ns)?;
            let fine = simulator.profiles(&noise, spec.grid, spec.step_ns / 2.0)?;
            let equation = RydbergLindblad::new(&config, &hamiltonian, &noise);
            evolve_with(
                &equation,
                DensityMatrix::ground(config.atom_count()),
                spec.grid,
                spec.step_ns,
                |k, rho| {
                    audit.max_trace_drift = audit.max_trace_drift.max((rho.trace().re - 1.0).abs());
                    audit.max_hermiticity_residual = audit.max_hermiticity_residual.max(rho.hermiticity_residual());
                    audit.min_eigenvalue = audit.min_eigenvalue.min(rho.min_eigenvalue());
                    for (w, profile) in catalog.states.iter().zip(&coarse) {
                        let p = crate::basis::probability(rho, w)?;
                        audit.max_reduced_vs_full = audit.max_reduced_vs_full.max((p - profile[k]).abs());
                    }
                    Ok(())
                },
            )?;
            for (a, b) in coarse.iter().flatten().zip(fine.iter().flatten()) {
                audit.max_step_halving_delta = audit.max_step_halving_delta.max((a - b).abs());
            }
        }
        out.push(audit);
    }
    let passed = out.iter().all(ConfigurationAudit::passed);
    Ok(InvariantAudit {
        configurations: out,
        passed,
    })
}
