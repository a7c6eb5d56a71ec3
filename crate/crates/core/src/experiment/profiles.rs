use std::fmt::Write as _;
use std::path::Path;

use crate::basis::build_basis_catalog;
use crate::datagen::Physics;
use crate::dynamics::{catalog_profiles, NoiseParams, NoiseRealization, TimeGrid, DEFAULT_STEP_NS};
use crate::error::{Error, Result};
use crate::geometry::configuration_by_name;

/// Noise-free probability curves of every catalog state of a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub configuration: String,
    pub labels: Vec<String>,
    pub times_ns: Vec<u64>,
    /// `curves[id][k]`.
    pub curves: Vec<Vec<f64>>,
}

impl ProfileTable {
    /// `t_ns,W0,W1,…` with one row per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_ns");
        for l in &self.labels {
            let _ = write!(out, ",{l}");
        }
        out.push('\n');
        for (k, t) in self.times_ns.iter().enumerate() {
            let _ = write!(out, "{t}");
            for c in &self.curves {
                let _ = write!(out, ",{:.16e}", c[k]);
            }
            out.push('\n');
        }
        out
    }
}

/// Evolves `name` over 1 μs without fluctuation, dephasing or decay and
/// samples `points` equally spaced times, endpoints included.
pub fn profile_table(name: &str, points: usize, physics: &Physics) -> Result<ProfileTable> {
    let total = 1000;
    if points < 2 || total % (points as u64 - 1) != 0 {
        return Err(Error::InvalidParameter(format!(
            "{points} points do not divide 1000 ns evenly"
        )));
    }
    let grid = TimeGrid::new(total, total / (points as u64 - 1))?;
    let config = configuration_by_name(name)?;
    let catalog = build_basis_catalog(&config, physics.blockade_radius()?);
    let noise = NoiseRealization::from_params_without_fluctuation(&NoiseParams::noiseless());
    let curves = catalog_profiles(&config, &catalog, &physics.hamiltonian(), &noise, grid, DEFAULT_STEP_NS)?;
    Ok(ProfileTable {
        configuration: config.name().to_string(),
        labels: catalog.states.iter().map(|w| w.label.clone()).collect(),
        times_ns: grid.times_ns().collect(),
        curves,
    })
}

pub fn emit_profiles(name: &str, points: usize, physics: &Physics, path: &Path) -> Result<ProfileTable> {
    let table = profile_table(name, points, physics)?;
    std::fs::write(path, table.to_csv())?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_counts() {
        let p = Physics::default();
        assert_eq!(profile_table("H6", 201, &p).unwrap().curves.len(), 5);
        assert_eq!(profile_table("chain-6", 21, &p).unwrap().curves.len(), 12);
        assert!(profile_table("Q7", 21, &p).is_err());
        assert!(profile_table("S1", 8, &p).is_err());
    }

    #[test]
    fn single_atom_is_complete() {
        let t = profile_table("S1", 21, &Physics::default()).unwrap();
        for k in 0..21 {
            assert!((t.curves[0][k] + t.curves[1][k] - 1.0).abs() < 1e-9);
        }
        let csv = t.to_csv();
        assert!(csv.starts_with("t_ns,W0,W1\n0,"));
        assert_eq!(csv.lines().count(), 22);
    }
}
