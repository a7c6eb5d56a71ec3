//! Atom configurations, pairwise distances, blockade graphs and interaction
//! edge sets.
//!
//! All lengths are in micrometres. Every shipped configuration places its
//! declared (blockaded) edges at exactly [`EDGE_LENGTH_UM`].

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Length of every declared edge, in μm.
pub const EDGE_LENGTH_UM: f64 = 8.0;

/// Largest supported array.
pub const MAX_ATOMS: usize = 6;

const EDGE_TOLERANCE_UM: f64 = 1e-9;
const SHELL_TOLERANCE_UM: f64 = 1e-9;

pub type Position = [f64; 3];

/// Shape families understood by [`build_configuration`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConfigurationKind {
    Single,
    Pair,
    Chain,
    Triangle,
    Square,
    Pentagon,
    Hexagon,
    Star4,
    Complete4,
    Cycle4,
    K4MinusEdge,
}

impl FromStr for ConfigurationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use ConfigurationKind::*;
        Ok(match s.to_ascii_lowercase().as_str() {
            "single" => Single,
            "pair" => Pair,
            "chain" => Chain,
            "triangle" => Triangle,
            "square" => Square,
            "pentagon" => Pentagon,
            "hexagon" => Hexagon,
            "star4" => Star4,
            "complete4" => Complete4,
            "cycle4" => Cycle4,
            "k4-minus-edge" => K4MinusEdge,
            _ => return Err(Error::UnknownKind(s.to_string())),
        })
    }
}

/// Which pairs contribute a van der Waals term to the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionMode {
    /// Declared edges only.
    Nn,
    /// Declared edges plus each atom's second distance shell.
    #[default]
    Nnn,
    /// Every pair.
    Full,
}

impl FromStr for InteractionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nn" => Ok(InteractionMode::Nn),
            "nnn" => Ok(InteractionMode::Nnn),
            "full" => Ok(InteractionMode::Full),
            other => Err(Error::InvalidParameter(format!("unknown interaction mode `{other}`"))),
        }
    }
}

impl fmt::Display for InteractionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InteractionMode::Nn => "nn",
            InteractionMode::Nnn => "nnn",
            InteractionMode::Full => "full",
        })
    }
}

/// Undirected simple graph on `0..vertex_count` with canonically sorted edges
/// (`j < k`, lexicographic order).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut canonical = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::Geometry(format!("self-loop on vertex {a}")));
            }
            let len = vertex_count;
            for v in [a, b] {
                if v >= len {
                    return Err(Error::IndexOutOfRange { index: v, len });
                }
            }
            canonical.push((a.min(b), a.max(b)));
        }
        canonical.sort_unstable();
        canonical.dedup();
        Ok(Graph {
            vertex_count,
            edges: canonical,
        })
    }

    pub fn path(n: usize) -> Self {
        Graph::new(n, (1..n).map(|k| (k - 1, k))).expect("path edges are valid")
    }

    pub fn cycle(n: usize) -> Self {
        let mut edges: Vec<_> = (1..n).map(|k| (k - 1, k)).collect();
        if n > 2 {
            edges.push((0, n - 1));
        }
        Graph::new(n, edges).expect("cycle edges are valid")
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|j| (j + 1..n).map(move |k| (j, k)));
        Graph::new(n, edges).expect("complete edges are valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    /// Adjacency as one neighbour bitmask per vertex.
    pub fn neighbour_masks(&self) -> Vec<u32> {
        let mut masks = vec![0u32; self.vertex_count];
        for &(a, b) in &self.edges {
            masks[a] |= 1 << b;
            masks[b] |= 1 << a;
        }
        masks
    }
}

/// A named arrangement of atoms with its declared (drawn) edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomConfiguration {
    name: String,
    positions: Vec<Position>,
    edges: Vec<(usize, usize)>,
}

impl AtomConfiguration {
    /// Validates positions and declared edges.
    pub fn new(name: impl Into<String>, positions: Vec<Position>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let name = name.into();
        let n = positions.len();
        if n == 0 || n > MAX_ATOMS {
            return Err(Error::AtomCount { kind: name, count: n });
        }
        let graph = Graph::new(n, edges)?;
        let config = AtomConfiguration {
            name,
            positions,
            edges: graph.edges,
        };
        for j in 0..n {
            for k in j + 1..n {
                if config.distance(j, k) <= 0.0 {
                    return Err(Error::Geometry(format!(
                        "atoms {j} and {k} of `{}` coincide",
                        config.name
                    )));
                }
            }
        }
        for &(j, k) in &config.edges {
            let r = config.distance(j, k);
            if (r - EDGE_LENGTH_UM).abs() > EDGE_TOLERANCE_UM {
                return Err(Error::Geometry(format!(
                    "edge ({j},{k}) of `{}` has length {r} μm, expected {EDGE_LENGTH_UM}",
                    config.name
                )));
            }
        }
        Ok(config)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn atom_count(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn declared_edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn declared_graph(&self) -> Graph {
        Graph {
            vertex_count: self.atom_count(),
            edges: self.edges.clone(),
        }
    }

    fn distance(&self, j: usize, k: usize) -> f64 {
        let (a, b) = (self.positions[j], self.positions[k]);
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }

    /// Euclidean distance between atoms `j` and `k`, in μm.
    pub fn pairwise_distance(&self, j: usize, k: usize) -> Result<f64> {
        let len = self.atom_count();
        for index in [j, k] {
            if index >= len {
                return Err(Error::IndexOutOfRange { index, len });
            }
        }
        if j == k {
            return Err(Error::InvalidParameter(format!(
                "distance needs two distinct atoms, got ({j},{k})"
            )));
        }
        Ok(self.distance(j, k))
    }

    /// Reads a custom configuration from a plain-text file.
    ///
    /// ```text
    /// name = my-shape
    /// [atoms]
    /// 0 0 0
    /// 8 0 0
    /// [edges]
    /// 0 1
    /// ```
    ///
    /// `#` starts a comment. Coordinates are in μm.
    pub fn from_text(text: &str) -> Result<Self> {
        enum Section {
            Header,
            Atoms,
            Edges,
        }
        let mut section = Section::Header;
        let mut name = String::from("custom");
        let mut positions = Vec::new();
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Geometry(format!("line {}: {msg}", lineno + 1));
            match line {
                "[atoms]" => {
                    section = Section::Atoms;
                    continue;
                }
                "[edges]" => {
                    section = Section::Edges;
                    continue;
                }
                _ => {}
            }
            match section {
                Section::Header => {
                    let (key, value) = line.split_once('=').ok_or_else(|| bad("expected `name = ...`"))?;
                    if key.trim() != "name" {
                        return Err(bad("only `name` may precede [atoms]"));
                    }
                    name = value.trim().to_string();
                }
                Section::Atoms => {
                    let coords: Vec<f64> = line
                        .split_whitespace()
                        .map(str::parse)
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad("expected three numbers"))?;
                    let [x, y, z] = coords[..] else {
                        return Err(bad("expected three numbers"));
                    };
                    positions.push([x, y, z]);
                }
                Section::Edges => {
                    let ends: Vec<usize> = line
                        .split_whitespace()
                        .map(str::parse)
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad("expected two atom indices"))?;
                    let [a, b] = ends[..] else {
                        return Err(bad("expected two atom indices"));
                    };
                    edges.push((a, b));
                }
            }
        }
        AtomConfiguration::new(name, positions, edges)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        AtomConfiguration::from_text(&text)
    }
}

/// Builds a shape from its kind and atom count.
pub fn build_configuration(kind: ConfigurationKind, n: usize) -> Result<AtomConfiguration> {
    use ConfigurationKind::*;
    let d = EDGE_LENGTH_UM;
    let wrong_count = || Error::AtomCount {
        kind: format!("{kind:?}").to_lowercase(),
        count: n,
    };
    if n == 0 || n > MAX_ATOMS {
        return Err(wrong_count());
    }
    let expect = |expected: usize| {
        if n == expected {
            Ok(())
        } else {
            Err(wrong_count())
        }
    };

    let (name, positions, edges): (String, Vec<Position>, Vec<(usize, usize)>) = match kind {
        Single => {
            expect(1)?;
            ("S1".into(), vec![[0.0; 3]], vec![])
        }
        Pair => {
            expect(2)?;
            ("B2".into(), vec![[0.0; 3], [d, 0.0, 0.0]], vec![(0, 1)])
        }
        Chain => {
            let name = match n {
                1 => "S1".to_string(),
                2 => "B2".to_string(),
                _ => format!("chain-{n}"),
            };
            let positions = (0..n).map(|i| [d * i as f64, 0.0, 0.0]).collect();
            (name, positions, Graph::path(n).edges)
        }
        Triangle | Square | Cycle4 | Pentagon | Hexagon => {
            let sides = match kind {
                Triangle => 3,
                Square | Cycle4 => 4,
                Pentagon => 5,
                _ => 6,
            };
            expect(sides)?;
            let name = match sides {
                3 => "T3",
                4 => "C4",
                5 => "P5",
                _ => "H6",
            };
            (name.into(), regular_polygon(sides, d), Graph::cycle(sides).edges)
        }
        Star4 => {
            expect(4)?;
            let mut positions = vec![[0.0; 3]];
            for i in 0..3 {
                let theta = PI / 2.0 + 2.0 * PI * i as f64 / 3.0;
                positions.push([d * theta.cos(), d * theta.sin(), 0.0]);
            }
            ("S4".into(), positions, vec![(0, 1), (0, 2), (0, 3)])
        }
        Complete4 => {
            expect(4)?;
            let h = d * (2.0f64 / 3.0).sqrt();
            let positions = vec![
                [0.0, 0.0, 0.0],
                [d, 0.0, 0.0],
                [d / 2.0, d * 3f64.sqrt() / 2.0, 0.0],
                [d / 2.0, d * 3f64.sqrt() / 6.0, h],
            ];
            ("K4".into(), positions, Graph::complete(4).edges)
        }
        K4MinusEdge => {
            expect(4)?;
            let apex = d * 3f64.sqrt() / 2.0;
            let positions = vec![
                [0.0, 0.0, 0.0],
                [d, 0.0, 0.0],
                [d / 2.0, apex, 0.0],
                [d / 2.0, -apex, 0.0],
            ];
            ("K4e".into(), positions, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])
        }
    };
    AtomConfiguration::new(name, positions, edges)
}

/// Vertices of a regular polygon with side `side`, centred on the origin,
/// numbered counter-clockwise so consecutive indices are adjacent.
fn regular_polygon(sides: usize, side: f64) -> Vec<Position> {
    let radius = side / (2.0 * (PI / sides as f64).sin());
    (0..sides)
        .map(|i| {
            let theta = 2.0 * PI * i as f64 / sides as f64;
            [radius * theta.cos(), radius * theta.sin(), 0.0]
        })
        .collect()
}

/// Names accepted by [`configuration_by_name`], in catalog order.
pub const CATALOG: &[&str] = &[
    "S1", "B2", "T3", "C4", "P5", "H6", "chain-3", "chain-4", "chain-5", "chain-6", "S4", "K4", "K4e",
];

/// Looks up a shipped configuration by its short name.
pub fn configuration_by_name(name: &str) -> Result<AtomConfiguration> {
    use ConfigurationKind::*;
    let (kind, n) = match name {
        "S1" | "chain-1" => (Single, 1),
        "B2" | "chain-2" => (Pair, 2),
        "T3" => (Triangle, 3),
        "C4" => (Square, 4),
        "P5" => (Pentagon, 5),
        "H6" => (Hexagon, 6),
        "S4" => (Star4, 4),
        "K4" => (Complete4, 4),
        "K4e" => (K4MinusEdge, 4),
        other => match other.strip_prefix("chain-").and_then(|n| n.parse().ok()) {
            Some(n) if (1..=MAX_ATOMS).contains(&n) => (Chain, n),
            _ => return Err(Error::UnknownConfiguration(name.to_string())),
        },
    };
    build_configuration(kind, n)
}

/// r_b = (C6 / ħΩ)^(1/6). Both arguments are angular frequencies (C6 per μm^6).
pub fn blockade_radius(c6: f64, rabi: f64) -> Result<f64> {
    if !(c6 > 0.0 && rabi > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "blockade radius needs C6 > 0 and Ω > 0 (got {c6}, {rabi})"
        )));
    }
    Ok((c6 / rabi).powf(1.0 / 6.0))
}

/// Pairs within `radius` of each other.
pub fn blockade_graph(config: &AtomConfiguration, radius: f64) -> Graph {
    let n = config.atom_count();
    let edges = (0..n)
        .flat_map(|j| (j + 1..n).map(move |k| (j, k)))
        .filter(|&(j, k)| config.distance(j, k) <= radius);
    Graph::new(n, edges).expect("pairs are in range")
}

/// An interacting pair `(j, k, distance)` with `j < k`.
pub type InteractionPair = (usize, usize, f64);

/// Pairs that contribute a van der Waals term in `mode`, sorted by `(j, k)`.
pub fn interaction_pairs(config: &AtomConfiguration, mode: InteractionMode) -> Vec<InteractionPair> {
    let n = config.atom_count();
    let mut pairs: Vec<(usize, usize)> = match mode {
        InteractionMode::Nn => config.edges.clone(),
        InteractionMode::Full => (0..n).flat_map(|j| (j + 1..n).map(move |k| (j, k))).collect(),
        InteractionMode::Nnn => {
            let mut pairs = config.edges.clone();
            for v in 0..n {
                let mut shells: Vec<f64> = (0..n).filter(|&w| w != v).map(|w| config.distance(v, w)).collect();
                shells.sort_by(f64::total_cmp);
                shells.dedup_by(|a, b| (*a - *b).abs() <= SHELL_TOLERANCE_UM);
                let Some(&second) = shells.get(1) else {
                    continue;
                };
                for w in (0..n).filter(|&w| w != v) {
                    if (config.distance(v, w) - second).abs() <= SHELL_TOLERANCE_UM {
                        pairs.push((v.min(w), v.max(w)));
                    }
                }
            }
            pairs
        }
    };
    pairs.sort_unstable();
    pairs.dedup();
    pairs.into_iter().map(|(j, k)| (j, k, config.distance(j, k))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn config(name: &str) -> AtomConfiguration {
        configuration_by_name(name).unwrap()
    }

    #[test]
    fn chain_three_is_evenly_spaced() {
        let c = build_configuration(ConfigurationKind::Chain, 3).unwrap();
        assert_eq!(c.positions(), &[[0.0, 0.0, 0.0], [8.0, 0.0, 0.0], [16.0, 0.0, 0.0]]);
    }

    #[test]
    fn hexagon_opposite_vertices() {
        let c = build_configuration(ConfigurationKind::Hexagon, 6).unwrap();
        assert_abs_diff_eq!(c.pairwise_distance(0, 3).unwrap(), 16.0, epsilon = 1e-9);
    }

    #[test]
    fn tetrahedron_and_rhombus() {
        let k4 = config("K4");
        for j in 0..4 {
            for k in j + 1..4 {
                assert_abs_diff_eq!(k4.pairwise_distance(j, k).unwrap(), 8.0, epsilon = 1e-9);
            }
        }
        let k4e = config("K4e");
        let mut long = 0;
        for j in 0..4 {
            for k in j + 1..4 {
                let r = k4e.pairwise_distance(j, k).unwrap();
                if (r - 8.0).abs() > 1e-9 {
                    long += 1;
                    assert_abs_diff_eq!(r, 8.0 * 3f64.sqrt(), epsilon = 1e-9);
                }
            }
        }
        assert_eq!(long, 1);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            "octagon".parse::<ConfigurationKind>(),
            Err(Error::UnknownKind(_))
        ));
        assert!(build_configuration(ConfigurationKind::Chain, 7).is_err());
        assert!(build_configuration(ConfigurationKind::Chain, 0).is_err());
        assert!(build_configuration(ConfigurationKind::Hexagon, 5).is_err());
        assert!(configuration_by_name("chain-9").is_err());
    }

    #[test]
    fn distances() {
        assert_abs_diff_eq!(
            config("chain-4").pairwise_distance(0, 2).unwrap(),
            16.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            config("C4").pairwise_distance(0, 2).unwrap(),
            8.0 * 2f64.sqrt(),
            epsilon = 1e-9
        );
        assert!(matches!(
            config("C4").pairwise_distance(0, 4),
            Err(Error::IndexOutOfRange { index: 4, len: 4 })
        ));
    }

    #[test]
    fn blockade_radius_values() {
        let tau = 2.0 * PI;
        assert_abs_diff_eq!(blockade_radius(tau * 863e3, tau).unwrap(), 9.7577, epsilon = 1e-3);
        assert_abs_diff_eq!(blockade_radius(1.0, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(blockade_radius(64.0, 1.0).unwrap(), 2.0, epsilon = 1e-12);
        assert!(blockade_radius(0.0, 1.0).is_err());
        assert!(blockade_radius(1.0, -1.0).is_err());
    }

    #[test]
    fn blockade_graphs_at_default_radius() {
        let rb = 9.76;
        assert_eq!(
            blockade_graph(&config("chain-4"), rb).edges(),
            &[(0, 1), (1, 2), (2, 3)]
        );
        assert_eq!(blockade_graph(&config("C4"), rb), Graph::cycle(4));
        assert_eq!(blockade_graph(&config("K4"), rb), Graph::complete(4));
        for name in ["T3", "C4", "P5", "H6"] {
            let c = config(name);
            assert_eq!(blockade_graph(&c, rb), Graph::cycle(c.atom_count()), "{name}");
        }
        for name in ["S1", "B2", "chain-3", "chain-4", "chain-5", "chain-6"] {
            let c = config(name);
            assert_eq!(blockade_graph(&c, rb), Graph::path(c.atom_count()), "{name}");
        }
        for name in CATALOG {
            let c = config(name);
            assert_eq!(blockade_graph(&c, rb), c.declared_graph(), "{name}");
        }
    }

    #[test]
    fn interaction_shells() {
        let chain5 = config("chain-5");
        let nn = interaction_pairs(&chain5, InteractionMode::Nn);
        assert_eq!(nn.len(), 4);
        assert!(nn.iter().all(|p| (p.2 - 8.0).abs() < 1e-12));
        let nnn = interaction_pairs(&chain5, InteractionMode::Nnn);
        assert_eq!(nnn.len(), 7);
        assert_eq!(nnn.iter().filter(|p| (p.2 - 16.0).abs() < 1e-12).count(), 3);

        let square = interaction_pairs(&config("C4"), InteractionMode::Nnn);
        assert_eq!(square.len(), 6);
        assert_eq!(
            square.iter().filter(|p| (p.2 - 8.0 * 2f64.sqrt()).abs() < 1e-9).count(),
            2
        );
        // Opposite hexagon vertices sit on the third shell.
        let hex = interaction_pairs(&config("H6"), InteractionMode::Nnn);
        assert_eq!(hex.len(), 12);
        assert!(hex.iter().all(|p| p.2 < 15.0));
    }

    #[test]
    fn custom_configuration_text() {
        let text = "name = bent\n[atoms]\n0 0 0 # origin\n8 0 0\n8 8 0\n[edges]\n0 1\n1 2\n";
        let c = AtomConfiguration::from_text(text).unwrap();
        assert_eq!(c.name(), "bent");
        assert_eq!(c.atom_count(), 3);
        assert_eq!(c.declared_edges(), &[(0, 1), (1, 2)]);

        let stretched = "[atoms]\n0 0 0\n9 0 0\n[edges]\n0 1\n";
        assert!(AtomConfiguration::from_text(stretched).is_err());
        let coincident = "[atoms]\n0 0 0\n0 0 0\n";
        assert!(AtomConfiguration::from_text(coincident).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn blockade_graph_is_monotone(idx in 0..CATALOG.len(), r1 in 0.1f64..40.0, r2 in 0.1f64..40.0) {
                let c = config(CATALOG[idx]);
                let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
                let small = blockade_graph(&c, lo);
                let large = blockade_graph(&c, hi);
                prop_assert!(small.edges().iter().all(|&(a, b)| large.has_edge(a, b)));
            }
        }

        #[test]
        fn interaction_sets_nest() {
            for name in CATALOG {
                let c = config(name);
                let n = c.atom_count();
                let key = |p: &InteractionPair| (p.0, p.1);
                let nn: Vec<_> = interaction_pairs(&c, InteractionMode::Nn).iter().map(key).collect();
                let nnn: Vec<_> = interaction_pairs(&c, InteractionMode::Nnn).iter().map(key).collect();
                let full: Vec<_> = interaction_pairs(&c, InteractionMode::Full).iter().map(key).collect();
                assert!(nn.iter().all(|p| nnn.contains(p)), "{name}");
                assert!(nnn.iter().all(|p| full.contains(p)), "{name}");
                assert_eq!(full.len(), n * (n - 1) / 2);
                for &(j, k) in c.declared_edges() {
                    assert!((c.pairwise_distance(j, k).unwrap() - 8.0).abs() <= 1e-9);
                }
            }
        }
    }
}
