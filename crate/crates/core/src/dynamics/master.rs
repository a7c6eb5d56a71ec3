//! Hamiltonian construction and the Lindblad right-hand side.
//!
//! Two implementations of [`MasterEquation`] exist: [`DenseLindblad`] works
//! from explicit operator matrices, and [`RydbergLindblad`] exploits the
//! structure of the Rydberg problem (σx flips one bit, interactions and
//! dephasing are diagonal, decay lowers one bit) to avoid dense products.
//! They must agree to rounding.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::noise::{mhz, NoiseRealization};
use super::DensityMatrix;
use crate::error::{Error, Result};
use crate::geometry::{interaction_pairs, AtomConfiguration, InteractionMode};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Coherent drive and interaction parameters, as angular frequencies in
/// rad/μs (`c6` in rad/μs·μm^6).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianParams {
    pub rabi: f64,
    pub c6: f64,
    pub mode: InteractionMode,
}

impl Default for HamiltonianParams {
    fn default() -> Self {
        HamiltonianParams {
            rabi: mhz(1.0),
            c6: mhz(863.0e3),
            mode: InteractionMode::Nnn,
        }
    }
}

impl HamiltonianParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rabi > 0.0 && self.c6 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Ω and C6 must be positive (got {}, {})",
                self.rabi, self.c6
            )));
        }
        Ok(())
    }
}

/// Diagonal van der Waals energy of every computational basis state.
pub fn interaction_energies(config: &AtomConfiguration, params: &HamiltonianParams) -> Vec<f64> {
    let n = config.atom_count();
    let pairs = interaction_pairs(config, params.mode);
    (0..1usize << n)
        .map(|s| {
            pairs
                .iter()
                .filter(|&&(j, k, _)| s & (1 << j) != 0 && s & (1 << k) != 0)
                .map(|&(_, _, r)| params.c6 / r.powi(6))
                .sum()
        })
        .collect()
}

/// H/ħ = (Ω/2) Σ_j σx_j + Σ_{pairs} C6/r^6 n_j n_k, in rad/μs.
pub fn build_hamiltonian(config: &AtomConfiguration, params: &HamiltonianParams) -> DMatrix<Complex64> {
    let n = config.atom_count();
    let dim = 1usize << n;
    let energies = interaction_energies(config, params);
    let mut h = DMatrix::from_element(dim, dim, ZERO);
    for s in 0..dim {
        h[(s, s)] = Complex64::new(energies[s], 0.0);
        for j in 0..n {
            h[(s ^ (1 << j), s)] += Complex64::new(params.rabi / 2.0, 0.0);
        }
    }
    h
}

/// √γφ n_j and √γd |0⟩⟨1|_j for every atom, skipping zero-rate channels.
pub fn collapse_operators(n: usize, noise: &NoiseRealization) -> Vec<DMatrix<Complex64>> {
    let dim = 1usize << n;
    let mut ops = Vec::new();
    for j in 0..n {
        let bit = 1usize << j;
        if noise.dephasing_rate > 0.0 {
            let amp = Complex64::new(noise.dephasing_rate.sqrt(), 0.0);
            let mut op = DMatrix::from_element(dim, dim, ZERO);
            for s in (0..dim).filter(|s| s & bit != 0) {
                op[(s, s)] = amp;
            }
            ops.push(op);
        }
        if noise.decay_rate > 0.0 {
            let amp = Complex64::new(noise.decay_rate.sqrt(), 0.0);
            let mut op = DMatrix::from_element(dim, dim, ZERO);
            for s in (0..dim).filter(|s| s & bit != 0) {
                op[(s ^ bit, s)] = amp;
            }
            ops.push(op);
        }
    }
    ops
}

/// A linear flow dx/dt = L(x) on a complex state vector.
pub trait LinearFlow {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes L(x) into `out`. Both slices have length [`LinearFlow::len`].
    fn rhs(&self, x: &[Complex64], out: &mut [Complex64]);
}

/// A flow on row-major `dim × dim` density-matrix storage.
pub trait MasterEquation: LinearFlow {
    fn dim(&self) -> usize;
}

/// Lindblad generator from explicit matrices.
pub struct DenseLindblad {
    hamiltonian: DMatrix<Complex64>,
    collapse: Vec<DMatrix<Complex64>>,
    collapse_adj: Vec<DMatrix<Complex64>>,
    /// Σ L†L
    damping: DMatrix<Complex64>,
}

impl DenseLindblad {
    pub fn new(hamiltonian: DMatrix<Complex64>, collapse: Vec<DMatrix<Complex64>>) -> Result<Self> {
        let dim = hamiltonian.nrows();
        if hamiltonian.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: hamiltonian.ncols(),
            });
        }
        if let Some(op) = collapse.iter().find(|op| op.nrows() != dim || op.ncols() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: op.nrows(),
            });
        }
        let collapse_adj: Vec<_> = collapse.iter().map(|l| l.adjoint()).collect();
        let mut damping = DMatrix::from_element(dim, dim, ZERO);
        for (l, ld) in collapse.iter().zip(&collapse_adj) {
            damping += ld * l;
        }
        Ok(DenseLindblad {
            hamiltonian,
            collapse,
            collapse_adj,
            damping,
        })
    }
}

impl MasterEquation for DenseLindblad {
    fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }
}

impl LinearFlow for DenseLindblad {
    fn len(&self) -> usize {
        self.dim() * self.dim()
    }

    fn rhs(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let dim = self.dim();
        let rho = DMatrix::from_row_slice(dim, dim, rho);
        let h = &self.hamiltonian;
        let mut result = (h * &rho - &rho * h) * (-I);
        for (l, ld) in self.collapse.iter().zip(&self.collapse_adj) {
            result += l * &rho * ld;
        }
        result -= (&self.damping * &rho + &rho * &self.damping) * Complex64::new(0.5, 0.0);
        for a in 0..dim {
            for b in 0..dim {
                out[a * dim + b] = result[(a, b)];
            }
        }
    }
}

/// −i[H, ρ] + Σ_L (LρL† − ½{L†L, ρ}).
pub fn lindblad_rhs(
    hamiltonian: &DMatrix<Complex64>,
    collapse: &[DMatrix<Complex64>],
    rho: &DensityMatrix,
) -> Result<DMatrix<Complex64>> {
    if hamiltonian.nrows() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: hamiltonian.nrows(),
            found: rho.dim(),
        });
    }
    let eq = DenseLindblad::new(hamiltonian.clone(), collapse.to_vec())?;
    let mut out = vec![ZERO; rho.dim() * rho.dim()];
    eq.rhs(rho.as_slice(), &mut out);
    Ok(DMatrix::from_row_slice(rho.dim(), rho.dim(), &out))
}

/// Structured generator for a driven Rydberg array with uniform per-atom
/// dephasing (√γφ n_j) and decay (√γd |0⟩⟨1|_j).
#[derive(Debug, Clone)]
pub struct RydbergLindblad {
    atoms: usize,
    dim: usize,
    half_rabi: f64,
    decay: f64,
    /// Elementwise factor for the diagonal part of the generator:
    /// −i(E_a − E_b) − γφ/2·|a ⊕ b| − γd/2·(|a| + |b|).
    diagonal: Vec<Complex64>,
}

impl RydbergLindblad {
    pub fn new(config: &AtomConfiguration, params: &HamiltonianParams, noise: &NoiseRealization) -> Self {
        let energies = interaction_energies(config, params);
        Self::from_energies(
            config.atom_count(),
            &energies,
            params.rabi * noise.rabi_multiplier,
            noise.dephasing_rate,
            noise.decay_rate,
        )
    }

    pub fn from_energies(atoms: usize, energies: &[f64], rabi: f64, dephasing: f64, decay: f64) -> Self {
        let dim = 1usize << atoms;
        assert_eq!(energies.len(), dim, "one energy per basis state");
        let mut diagonal = Vec::with_capacity(dim * dim);
        for a in 0..dim {
            for b in 0..dim {
                let flips = (a ^ b).count_ones() as f64;
                let excited = (a.count_ones() + b.count_ones()) as f64;
                diagonal.push(Complex64::new(
                    -0.5 * dephasing * flips - 0.5 * decay * excited,
                    -(energies[a] - energies[b]),
                ));
            }
        }
        RydbergLindblad {
            atoms,
            dim,
            half_rabi: rabi / 2.0,
            decay,
            diagonal,
        }
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }
}

impl MasterEquation for RydbergLindblad {
    fn dim(&self) -> usize {
        self.dim
    }
}

impl LinearFlow for RydbergLindblad {
    fn len(&self) -> usize {
        self.dim * self.dim
    }

    fn rhs(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let dim = self.dim;
        for ((o, r), f) in out.iter_mut().zip(rho).zip(&self.diagonal) {
            *o = r * f;
        }

        // Drive: −i(Ω/2) Σ_j (ρ[a⊕j][b] − ρ[a][b⊕j]).
        let drive = Complex64::new(0.0, -self.half_rabi);
        let mut acc = vec![ZERO; dim];
        for a in 0..dim {
            acc.iter_mut().for_each(|x| *x = ZERO);
            let row = &rho[a * dim..(a + 1) * dim];
            for j in 0..self.atoms {
                let bit = 1usize << j;
                let flipped = &rho[(a ^ bit) * dim..((a ^ bit) + 1) * dim];
                for (x, &v) in acc.iter_mut().zip(flipped) {
                    *x += v;
                }
                for block in (0..dim).step_by(bit << 1) {
                    for b in block..block + bit {
                        acc[b] -= row[b + bit];
                        acc[b + bit] -= row[b];
                    }
                }
            }
            for (o, x) in out[a * dim..(a + 1) * dim].iter_mut().zip(&acc) {
                *o += drive * x;
            }
        }

        // Decay refill: γd Σ_j ρ[a|j][b|j] for a_j = b_j = 0.
        if self.decay > 0.0 {
            for j in 0..self.atoms {
                let bit = 1usize << j;
                for a in (0..dim).filter(|a| a & bit == 0) {
                    let src = (a | bit) * dim;
                    let dst = a * dim;
                    for b in (0..dim).filter(|b| b & bit == 0) {
                        out[dst + b] += rho[src + (b | bit)] * self.decay;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::configuration_by_name;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_density(dim: usize, seed: u64) -> DensityMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let mut rho = &a * a.adjoint();
        let tr = rho.trace();
        rho /= tr;
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(rho[(r, c)]);
            }
        }
        DensityMatrix::from_data(dim, data).unwrap()
    }

    #[test]
    fn single_atom_hamiltonian() {
        let h = build_hamiltonian(&configuration_by_name("S1").unwrap(), &HamiltonianParams::default());
        let eig = h.symmetric_eigenvalues();
        let half = mhz(1.0) / 2.0;
        let mut e: Vec<f64> = eig.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        assert!((e[0] + half).abs() < 1e-12 && (e[1] - half).abs() < 1e-12);
    }

    #[test]
    fn pair_interaction_energy() {
        let params = HamiltonianParams {
            mode: InteractionMode::Full,
            ..HamiltonianParams::default()
        };
        let h = build_hamiltonian(&configuration_by_name("B2").unwrap(), &params);
        assert!((h[(3, 3)].re - params.c6 / 8f64.powi(6)).abs() < 1e-9);
        assert!((&h - h.adjoint()).camax() < 1e-15);
    }

    #[test]
    fn next_nearest_neighbour_scaling() {
        let config = configuration_by_name("chain-3").unwrap();
        let params = HamiltonianParams::default();
        let e = interaction_energies(&config, &params);
        // |101⟩ only feels the 16 μm pair.
        assert!((e[0b101] - e[0b011] / 64.0).abs() < 1e-9);
        let nn = interaction_energies(
            &config,
            &HamiltonianParams {
                mode: InteractionMode::Nn,
                ..params
            },
        );
        assert_eq!(nn[0b101], 0.0);
    }

    #[test]
    fn collapse_operator_counts() {
        let noise = NoiseRealization {
            fluctuation: 0.0,
            rabi_multiplier: 1.0,
            dephasing_rate: 0.3,
            decay_rate: 0.1,
        };
        let one = collapse_operators(1, &noise);
        assert_eq!(one.len(), 2);
        assert!(one.iter().all(|op| op.nrows() == 2));
        let three = collapse_operators(3, &noise);
        assert_eq!(three.len(), 6);
        assert!(three.iter().all(|op| op.nrows() == 8));
        let closed = NoiseRealization {
            dephasing_rate: 0.0,
            decay_rate: 0.0,
            ..noise
        };
        assert!(collapse_operators(3, &closed).is_empty());
    }

    #[test]
    fn structured_matches_dense() {
        let noise = NoiseRealization {
            fluctuation: 0.03,
            rabi_multiplier: 1.02,
            dephasing_rate: 0.6,
            decay_rate: 0.07,
        };
        for (name, mode) in [
            ("S1", InteractionMode::Nn),
            ("chain-3", InteractionMode::Nnn),
            ("C4", InteractionMode::Full),
            ("P5", InteractionMode::Nnn),
            ("K4e", InteractionMode::Nnn),
        ] {
            let config = configuration_by_name(name).unwrap();
            let params = HamiltonianParams {
                mode,
                ..HamiltonianParams::default()
            };
            // The structured form folds the multiplier into Ω.
            let scaled = HamiltonianParams {
                rabi: params.rabi * noise.rabi_multiplier,
                ..params
            };
            let h = build_hamiltonian(&config, &scaled);
            let dense = DenseLindblad::new(h, collapse_operators(config.atom_count(), &noise)).unwrap();
            let fast = RydbergLindblad::new(&config, &params, &noise);
            let rho = random_density(fast.dim(), 11);
            let mut a = vec![ZERO; fast.dim() * fast.dim()];
            let mut b = a.clone();
            dense.rhs(rho.as_slice(), &mut a);
            fast.rhs(rho.as_slice(), &mut b);
            let worst = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(worst < 1e-9, "{name}: {worst}");
        }
    }

    #[test]
    fn rhs_is_traceless_and_hermitian() {
        let config = configuration_by_name("chain-4").unwrap();
        let noise = NoiseRealization {
            fluctuation: 0.05,
            rabi_multiplier: 0.97,
            dephasing_rate: 0.4,
            decay_rate: 0.2,
        };
        let eq = RydbergLindblad::new(&config, &HamiltonianParams::default(), &noise);
        let rho = random_density(16, 5);
        let mut out = vec![ZERO; 256];
        eq.rhs(rho.as_slice(), &mut out);
        let d = DensityMatrix::from_data(16, out).unwrap();
        assert!(d.trace().norm() < 1e-12);
        assert!(d.hermiticity_residual() < 1e-12);
    }

    #[test]
    fn pure_dephasing_rate() {
        // H = 0 and L = √γ n on |+⟩⟨+|: coherence decays at γ/2.
        let gamma = 0.8;
        let noise = NoiseRealization {
            fluctuation: 0.0,
            rabi_multiplier: 1.0,
            dephasing_rate: gamma,
            decay_rate: 0.0,
        };
        let h = DMatrix::from_element(2, 2, ZERO);
        let rho = DensityMatrix::from_data(2, vec![Complex64::new(0.5, 0.0); 4]).unwrap();
        let rhs = lindblad_rhs(&h, &collapse_operators(1, &noise), &rho).unwrap();
        assert!((rhs[(0, 1)].re + gamma / 2.0 * 0.5).abs() < 1e-15);
        assert!(rhs[(0, 0)].norm() < 1e-15 && rhs[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn eigenstate_populations_are_stationary() {
        let h = build_hamiltonian(&configuration_by_name("B2").unwrap(), &HamiltonianParams::default());
        let eig = h.clone().symmetric_eigen();
        let v: Vec<Complex64> = eig.eigenvectors.column(0).iter().copied().collect();
        let rho = DensityMatrix::pure(&v);
        let rhs = lindblad_rhs(&h, &[], &rho).unwrap();
        for s in 0..4 {
            assert!(rhs[(s, s)].norm() < 1e-12);
        }
        assert!(lindblad_rhs(&h, &[], &DensityMatrix::ground(3)).is_err());
    }
}
