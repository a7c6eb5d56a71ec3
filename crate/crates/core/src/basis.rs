//! Symmetrized base states: independent sets of the blockade graph grouped
//! into orbits of its automorphism group.
//!
//! Bit `j` of an [`ExcitationPattern`] is the `j`-th character of the ket, so
//! `|10000⟩` has bit 0 set.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::DensityMatrix;
use crate::error::{Error, Result};
use crate::geometry::{blockade_graph, AtomConfiguration, Graph, MAX_ATOMS};

const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// Set of atoms in the Rydberg state, as a bitmask over atom indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExcitationPattern(pub u32);

impl ExcitationPattern {
    pub fn bits(self) -> u32 {
        self.0
    }

    /// Number of excited atoms (N_Ryd).
    pub fn excitations(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn atoms(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |j| self.0 & (1 << j) != 0)
    }

    /// Ket string of length `n`, e.g. `10100`.
    pub fn ket(self, n: usize) -> String {
        (0..n).map(|j| if self.0 & (1 << j) != 0 { '1' } else { '0' }).collect()
    }

    fn permuted(self, perm: &[usize]) -> Self {
        ExcitationPattern(self.atoms().fold(0, |acc, j| acc | (1 << perm[j])))
    }
}

/// All subsets of vertices with no two adjacent, including the empty set,
/// in increasing bitmask order.
pub fn enumerate_independent_sets(graph: &Graph) -> Vec<ExcitationPattern> {
    let n = graph.vertex_count();
    assert!(
        n <= MAX_ATOMS,
        "independent-set enumeration is limited to {MAX_ATOMS} vertices"
    );
    let neighbours = graph.neighbour_masks();
    (0u32..1 << n)
        .filter(|&mask| (0..n).all(|j| mask & (1 << j) == 0 || mask & neighbours[j] == 0))
        .map(ExcitationPattern)
        .collect()
}

/// Every vertex permutation that maps the edge set onto itself; `perm[v]` is
/// the image of `v`. The identity comes first.
pub fn automorphisms(graph: &Graph) -> Vec<Vec<usize>> {
    let n = graph.vertex_count();
    assert!(n <= MAX_ATOMS, "automorphism search is limited to {MAX_ATOMS} vertices");
    let mut found = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    permute(&mut perm, 0, &mut |p| {
        if graph.edges().iter().all(|&(a, b)| graph.has_edge(p[a], p[b])) {
            found.push(p.to_vec());
        }
    });
    found.sort();
    found
}

fn permute(perm: &mut [usize], start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == perm.len() {
        visit(perm);
        return;
    }
    for i in start..perm.len() {
        perm.swap(start, i);
        permute(perm, start + 1, visit);
        perm.swap(start, i);
    }
}

/// Uniform superposition over one automorphism orbit of excitation patterns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizedState {
    pub id: usize,
    /// Label such as `W0`, `W1a` or `W3`.
    pub label: String,
    pub excitations: usize,
    /// Orbit members in increasing bitmask order.
    pub orbit: Vec<ExcitationPattern>,
}

impl SymmetrizedState {
    pub fn amplitude(&self) -> f64 {
        1.0 / (self.orbit.len() as f64).sqrt()
    }

    /// Ket-notation rendering, e.g. `(|10⟩+|01⟩)/√2`.
    pub fn display(&self, n: usize) -> String {
        let mut members: Vec<String> = self.orbit.iter().map(|p| p.ket(n)).collect();
        members.sort_by(|a, b| b.cmp(a));
        let kets: Vec<String> = members.iter().map(|k| format!("|{k}⟩")).collect();
        if kets.len() == 1 {
            kets[0].clone()
        } else {
            format!("({})/√{}", kets.join("+"), kets.len())
        }
    }
}

/// The ordered symmetrized basis of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisCatalog {
    pub configuration: String,
    pub atom_count: usize,
    pub states: Vec<SymmetrizedState>,
}

impl BasisCatalog {
    /// N_ID.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn ground(&self) -> &SymmetrizedState {
        &self.states[0]
    }
}

impl fmt::Display for BasisCatalog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} ({} states)", self.configuration, self.states.len())?;
        for w in &self.states {
            writeln!(f, "{:>3}: {:<4} = {}", w.id, w.label, w.display(self.atom_count))?;
        }
        Ok(())
    }
}

/// Groups the blockade graph's independent sets into automorphism orbits.
///
/// States are numbered by excitation count, then by the sorted pairwise
/// distances between excited atoms (closest first), then by the
/// lexicographically smallest index tuple in the orbit.
pub fn build_basis_catalog(config: &AtomConfiguration, radius: f64) -> BasisCatalog {
    let graph = blockade_graph(config, radius);
    let autos = automorphisms(&graph);
    let sets = enumerate_independent_sets(&graph);

    let mut assigned = vec![false; 1 << config.atom_count()];
    let mut orbits: Vec<Vec<ExcitationPattern>> = Vec::new();
    for &set in &sets {
        if assigned[set.0 as usize] {
            continue;
        }
        let mut orbit: Vec<ExcitationPattern> = autos.iter().map(|p| set.permuted(p)).collect();
        orbit.sort_unstable();
        orbit.dedup();
        for member in &orbit {
            assigned[member.0 as usize] = true;
        }
        orbits.push(orbit);
    }

    let keyed: Vec<(OrbitKey, Vec<ExcitationPattern>)> =
        orbits.into_iter().map(|o| (OrbitKey::new(config, &o), o)).collect();
    let mut keyed = keyed;
    keyed.sort_by(|a, b| a.0.cmp(&b.0));

    let mut states: Vec<SymmetrizedState> = Vec::with_capacity(keyed.len());
    for (id, (key, orbit)) in keyed.into_iter().enumerate() {
        states.push(SymmetrizedState {
            id,
            label: String::new(),
            excitations: key.excitations,
            orbit,
        });
    }
    for count in 0..=config.atom_count() {
        let group: Vec<usize> = states.iter().filter(|w| w.excitations == count).map(|w| w.id).collect();
        for (rank, &id) in group.iter().enumerate() {
            states[id].label = if group.len() == 1 {
                format!("W{count}")
            } else {
                format!("W{count}{}", (b'a' + rank as u8) as char)
            };
        }
    }

    BasisCatalog {
        configuration: config.name().to_string(),
        atom_count: config.atom_count(),
        states,
    }
}

struct OrbitKey {
    excitations: usize,
    distances: Vec<f64>,
    representative: Vec<usize>,
}

impl OrbitKey {
    fn new(config: &AtomConfiguration, orbit: &[ExcitationPattern]) -> Self {
        let representative = orbit
            .iter()
            .map(|p| p.atoms().collect::<Vec<_>>())
            .min()
            .expect("orbits are nonempty");
        let mut distances = Vec::new();
        for (i, &j) in representative.iter().enumerate() {
            for &k in &representative[i + 1..] {
                distances.push(config.pairwise_distance(j, k).expect("atoms are in range"));
            }
        }
        distances.sort_by(f64::total_cmp);
        OrbitKey {
            excitations: orbit[0].excitations(),
            distances,
            representative,
        }
    }

    fn cmp(&self, other: &Self) -> Ordering {
        self.excitations
            .cmp(&other.excitations)
            .then_with(|| {
                for (a, b) in self.distances.iter().zip(&other.distances) {
                    if (a - b).abs() > 1e-9 {
                        return a.total_cmp(b);
                    }
                }
                Ordering::Equal
            })
            .then_with(|| self.representative.cmp(&other.representative))
    }
}

/// Amplitude vector of `w` in the 2^n computational basis.
pub fn state_vector(w: &SymmetrizedState, n: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); 1 << n];
    let amp = w.amplitude();
    for p in &w.orbit {
        v[p.0 as usize] = Complex64::new(amp, 0.0);
    }
    v
}

/// ⟨W|ρ|W⟩, clamped to [0, 1] when within 1e-9 of the interval.
pub fn probability(rho: &DensityMatrix, w: &SymmetrizedState) -> Result<f64> {
    let dim = rho.dim();
    if let Some(p) = w.orbit.iter().find(|p| p.0 as usize >= dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: p.0 as usize + 1,
        });
    }
    let mut sum = 0.0;
    for a in &w.orbit {
        for b in &w.orbit {
            sum += rho.get(a.0 as usize, b.0 as usize).re;
        }
    }
    let value = sum / w.orbit.len() as f64;
    if !(-PROBABILITY_TOLERANCE..=1.0 + PROBABILITY_TOLERANCE).contains(&value) {
        return Err(Error::ProbabilityRange(value));
    }
    Ok(value.clamp(0.0, 1.0))
}
