//! Symmetry-reduced Lindblad evolution from the all-ground state.
//!
//! Atom permutations that preserve every pair interaction commute with the
//! generator, because drive, dephasing and decay act identically on every
//! atom. Starting from |00…0⟩ the density matrix therefore satisfies
//! ρ[πa][πb] = ρ[a][b] for all such π, and Hermiticity adds
//! ρ[b][a] = ρ[a][b]*. Only one entry per orbit of (a, b) under both
//! relations is stored and integrated.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::master::{interaction_energies, HamiltonianParams, LinearFlow};
use super::noise::NoiseRealization;
use super::DensityMatrix;
use crate::basis::{automorphisms, BasisCatalog};
use crate::error::{Error, Result};
use crate::geometry::{interaction_pairs, AtomConfiguration, Graph};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Where a full-matrix entry lives in the reduced vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Slot {
    index: u32,
    conj: bool,
}

#[derive(Debug, Clone, Default)]
struct TermList {
    offsets: Vec<u32>,
    source: Vec<u32>,
    /// Signed count of drive contributions (coefficient −iΩ/2 each).
    drive: Vec<f64>,
    /// Count of decay refill contributions (coefficient γd each).
    decay: Vec<f64>,
}

impl TermList {
    fn push_row(&mut self, terms: &BTreeMap<u32, (f64, f64)>) {
        for (&src, &(drive, decay)) in terms {
            if drive != 0.0 || decay != 0.0 {
                self.source.push(src);
                self.drive.push(drive);
                self.decay.push(decay);
            }
        }
        self.offsets.push(self.source.len() as u32);
    }
}

/// Orbit structure of one configuration's density matrix.
#[derive(Debug, Clone)]
pub struct SymmetryReduction {
    atoms: usize,
    dim: usize,
    energies: Vec<f64>,
    symmetry_order: usize,
    representatives: Vec<(u32, u32)>,
    slots: Vec<Slot>,
    plain: TermList,
    conjugated: TermList,
}

impl SymmetryReduction {
    pub fn new(config: &AtomConfiguration, params: &HamiltonianParams) -> Self {
        let n = config.atom_count();
        let dim = 1usize << n;
        let energies = interaction_energies(config, params);
        let group = interaction_symmetries(config, params);

        let mut slots = vec![None; dim * dim];
        let mut representatives = Vec::new();
        let permute = |perm: &[usize], s: usize| -> usize {
            (0..n)
                .filter(|j| s & (1 << j) != 0)
                .fold(0, |acc, j| acc | (1 << perm[j]))
        };
        for a in 0..dim {
            for b in 0..dim {
                if slots[a * dim + b].is_some() {
                    continue;
                }
                let index = representatives.len() as u32;
                representatives.push((a as u32, b as u32));
                for perm in &group {
                    let (pa, pb) = (permute(perm, a), permute(perm, b));
                    slots[pa * dim + pb].get_or_insert(Slot { index, conj: false });
                    slots[pb * dim + pa].get_or_insert(Slot { index, conj: true });
                }
            }
        }
        let slots: Vec<Slot> = slots.into_iter().map(|s| s.expect("every entry is assigned")).collect();

        let mut plain = TermList {
            offsets: vec![0],
            ..TermList::default()
        };
        let mut conjugated = plain.clone();
        for &(a, b) in &representatives {
            let (a, b) = (a as usize, b as usize);
            let mut direct: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
            let mut mirrored: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
            let mut add = |p: usize, q: usize, drive: f64, decay: f64| {
                let slot = slots[p * dim + q];
                let target = if slot.conj { &mut mirrored } else { &mut direct };
                let entry = target.entry(slot.index).or_insert((0.0, 0.0));
                entry.0 += drive;
                entry.1 += decay;
            };
            for j in 0..n {
                let bit = 1usize << j;
                add(a ^ bit, b, 1.0, 0.0);
                add(a, b ^ bit, -1.0, 0.0);
                if a & bit == 0 && b & bit == 0 {
                    add(a | bit, b | bit, 0.0, 1.0);
                }
            }
            plain.push_row(&direct);
            conjugated.push_row(&mirrored);
        }

        SymmetryReduction {
            atoms: n,
            dim,
            energies,
            symmetry_order: group.len(),
            representatives,
            slots,
            plain,
            conjugated,
        }
    }

    /// Number of stored complex entries.
    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    /// Order of the interaction-preserving permutation group.
    pub fn symmetry_order(&self) -> usize {
        self.symmetry_order
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    /// Reduced image of |00…0⟩⟨00…0|.
    pub fn ground_state(&self) -> Vec<Complex64> {
        let mut x = vec![ZERO; self.len()];
        x[self.slots[0].index as usize] = Complex64::new(1.0, 0.0);
        x
    }

    pub fn entry(&self, x: &[Complex64], a: usize, b: usize) -> Complex64 {
        let slot = self.slots[a * self.dim + b];
        let v = x[slot.index as usize];
        if slot.conj {
            v.conj()
        } else {
            v
        }
    }

    pub fn trace(&self, x: &[Complex64]) -> f64 {
        (0..self.dim).map(|a| self.entry(x, a, a).re).sum()
    }

    pub fn expand(&self, x: &[Complex64]) -> DensityMatrix {
        let mut data = Vec::with_capacity(self.dim * self.dim);
        for a in 0..self.dim {
            for b in 0..self.dim {
                data.push(self.entry(x, a, b));
            }
        }
        DensityMatrix::from_data(self.dim, data).expect("dim² entries")
    }

    /// Weights `w` with ⟨W|ρ|W⟩ = Σ_r w[r]·Re x[r], one vector per catalog state.
    pub fn projectors(&self, catalog: &BasisCatalog) -> Result<Vec<Vec<(u32, f64)>>> {
        catalog
            .states
            .iter()
            .map(|w| {
                let mut weights: BTreeMap<u32, f64> = BTreeMap::new();
                let scale = 1.0 / w.orbit.len() as f64;
                for p in &w.orbit {
                    for q in &w.orbit {
                        let (a, b) = (p.bits() as usize, q.bits() as usize);
                        if a >= self.dim || b >= self.dim {
                            return Err(Error::DimensionMismatch {
                                expected: self.dim,
                                found: a.max(b) + 1,
                            });
                        }
                        *weights.entry(self.slots[a * self.dim + b].index).or_insert(0.0) += scale;
                    }
                }
                Ok(weights.into_iter().collect())
            })
            .collect()
    }

    /// Generator for one noise realization.
    pub fn generator(&self, rabi: f64, noise: &NoiseRealization) -> ReducedLindblad<'_> {
        let half_rabi = rabi * noise.rabi_multiplier / 2.0;
        let (gamma, kappa) = (noise.dephasing_rate, noise.decay_rate);
        let diagonal = self
            .representatives
            .iter()
            .map(|&(a, b)| {
                let flips = (a ^ b).count_ones() as f64;
                let excited = (a.count_ones() + b.count_ones()) as f64;
                Complex64::new(
                    -0.5 * gamma * flips - 0.5 * kappa * excited,
                    -(self.energies[a as usize] - self.energies[b as usize]),
                )
            })
            .collect();
        let coefficients = |terms: &TermList| {
            terms
                .drive
                .iter()
                .zip(&terms.decay)
                .map(|(&d, &k)| Complex64::new(kappa * k, -half_rabi * d))
                .collect()
        };
        ReducedLindblad {
            reduction: self,
            diagonal,
            plain: coefficients(&self.plain),
            conjugated: coefficients(&self.conjugated),
        }
    }
}

/// Atom permutations that leave every pair interaction energy unchanged.
pub fn interaction_symmetries(config: &AtomConfiguration, params: &HamiltonianParams) -> Vec<Vec<usize>> {
    let n = config.atom_count();
    let mut coupling = vec![vec![0.0f64; n]; n];
    for (j, k, r) in interaction_pairs(config, params.mode) {
        let u = params.c6 / r.powi(6);
        coupling[j][k] = u;
        coupling[k][j] = u;
    }
    let same = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1e-300);
    automorphisms(&Graph::complete(n))
        .into_iter()
        .filter(|perm| (0..n).all(|j| (0..n).all(|k| same(coupling[perm[j]][perm[k]], coupling[j][k]))))
        .collect()
}

/// The reduced generator with realization-specific coefficients.
pub struct ReducedLindblad<'a> {
    reduction: &'a SymmetryReduction,
    diagonal: Vec<Complex64>,
    plain: Vec<Complex64>,
    conjugated: Vec<Complex64>,
}

impl LinearFlow for ReducedLindblad<'_> {
    fn len(&self) -> usize {
        self.reduction.len()
    }

    fn rhs(&self, x: &[Complex64], out: &mut [Complex64]) {
        let red = self.reduction;
        let (p, c) = (&red.plain, &red.conjugated);
        for r in 0..x.len() {
            let mut acc = self.diagonal[r] * x[r];
            for t in p.offsets[r] as usize..p.offsets[r + 1] as usize {
                acc += self.plain[t] * x[p.source[t] as usize];
            }
            for t in c.offsets[r] as usize..c.offsets[r + 1] as usize {
                acc += self.conjugated[t] * x[c.source[t] as usize].conj();
            }
            out[r] = acc;
        }
    }
}
