//! Marginal families as hypergraphs on the parties.
//!
//! A pure state that is entangled across every cut cannot be fixed by a
//! family whose hypergraph is disconnected: twisting Schmidt phases across a
//! cut that separates components leaves every marginal in the family intact.
//! Whether the state is entangled across every cut is left to the caller;
//! [`counterexample_from_disconnection`] checks the actual Schmidt rank instead.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marginal::{compute_deck, deck_distance, MarginalFamily, DEFAULT_DECK_TOL};
use crate::schmidt::{phase_twist, schmidt_decompose, Bipartition};
use crate::state::{fidelity_up_to_phase, PureState, Subset};

/// Witnesses must have fidelity up to phase below `1 - DISTINCT_TOL`.
const DISTINCT_TOL: f64 = 1e-6;
/// Cap on the number of separating cuts tried.
const MAX_CUTS: usize = 256;

#[derive(Clone, Debug)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }

    /// Component labels `0, 1, ...` in order of first appearance.
    pub(crate) fn labels(&mut self) -> Vec<usize> {
        let n = self.parent.len();
        let mut map = vec![usize::MAX; n];
        let mut next = 0;
        (0..n)
            .map(|x| {
                let r = self.find(x);
                if map[r] == usize::MAX {
                    map[r] = next;
                    next += 1;
                }
                map[r]
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeckHypergraph {
    num_vertices: usize,
    edges: Vec<Subset>,
}

impl DeckHypergraph {
    pub fn from_family(family: &MarginalFamily) -> Self {
        Self {
            num_vertices: family.num_parties(),
            edges: family.subsets().to_vec(),
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[Subset] {
        &self.edges
    }

    /// Edges of size 1. They cover their vertex but join nothing.
    pub fn singleton_edges(&self) -> Vec<Subset> {
        self.edges
            .iter()
            .filter(|e| e.len() == 1)
            .cloned()
            .collect()
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    /// Vertices in no edge form singleton components.
    pub fn components(&self) -> Vec<Subset> {
        let mut uf = UnionFind::new(self.num_vertices);
        for e in &self.edges {
            let p = e.parties();
            for w in p.windows(2) {
                uf.union(w[0] - 1, w[1] - 1);
            }
        }
        let labels = uf.labels();
        let count = labels.iter().max().map_or(0, |m| m + 1);
        let mut groups = vec![Vec::new(); count];
        for (v, &l) in labels.iter().enumerate() {
            groups[l].push(v + 1);
        }
        groups
            .into_iter()
            .map(|g| Subset::new(g, self.num_vertices).expect("vertices in range"))
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        if self.num_vertices == 0 {
            return false;
        }
        let covered = {
            let mut seen = vec![false; self.num_vertices];
            for e in &self.edges {
                for &p in e.parties() {
                    seen[p - 1] = true;
                }
            }
            seen.into_iter().all(|x| x)
        };
        covered && self.components().len() == 1
    }
}

pub fn is_connected(g: &DeckHypergraph) -> bool {
    g.is_connected()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NecessaryCheck {
    pub connected: bool,
    /// The family is disconnected, so no state entangled across every cut is
    /// determined by it among pure states.
    pub violation: bool,
    /// Size-1 edges, reported because they add no connectivity.
    pub singleton_edges: Vec<Subset>,
}

pub fn udp_necessary_check(family: &MarginalFamily) -> NecessaryCheck {
    let g = DeckHypergraph::from_family(family);
    let connected = g.is_connected();
    NecessaryCheck {
        connected,
        violation: !connected,
        singleton_edges: g.singleton_edges(),
    }
}

/// Fewest `k`-body marginals whose hypergraph can be connected on `n` vertices,
/// `ceil((n - 1) / (k - 1))`.
pub fn marginal_number_lower_bound(n: usize, k: usize) -> Result<usize> {
    if k < 2 || k > n {
        return Err(Error::InvalidConfig(format!(
            "lower bound needs 2 <= k <= n, got n = {n}, k = {k}"
        )));
    }
    Ok((n - 1).div_ceil(k - 1))
}

#[derive(Clone, Debug)]
pub struct Counterexample {
    pub state: PureState,
    /// The side of the separating cut that was twisted against its complement.
    pub cut: Subset,
    pub deck_distance: f64,
    pub fidelity: f64,
}

/// Splits indices of a decreasing sequence into two groups of near-equal sum;
/// returns `true` for members of the second group.
fn balanced_split(lambdas: &[f64]) -> Vec<bool> {
    let (mut s0, mut s1) = (0.0, 0.0);
    lambdas
        .iter()
        .map(|&l| {
            if s0 <= s1 {
                s0 += l;
                false
            } else {
                s1 += l;
                true
            }
        })
        .collect()
}

pub fn counterexample_from_disconnection(
    state: &PureState,
    family: &MarginalFamily,
) -> Result<Option<Counterexample>> {
    counterexample_from_disconnection_with_tol(state, family, DEFAULT_DECK_TOL)
}

/// Twists Schmidt phases across a cut that is a union of hypergraph
/// components. `None` when the family is connected or the state has rank 1
/// (or a near-trivial split) across every such cut tried.
pub fn counterexample_from_disconnection_with_tol(
    state: &PureState,
    family: &MarginalFamily,
    deck_tol: f64,
) -> Result<Option<Counterexample>> {
    let n = state.num_parties();
    if family.num_parties() != n {
        return Err(Error::FamilyMismatch);
    }
    let components = DeckHypergraph::from_family(family).components();
    if components.len() < 2 {
        return Ok(None);
    }
    let reference = compute_deck(state, family)?;
    let others = components.len() - 1;
    let masks = if others >= usize::BITS as usize {
        usize::MAX
    } else {
        (1usize << others) - 1
    };
    // Masks select which later components join the first; the full mask is the whole set.
    for mask in (0..masks).take(MAX_CUTS) {
        let mut side = components[0].clone();
        for (t, c) in components[1..].iter().enumerate() {
            if mask.checked_shr(t as u32).unwrap_or(0) & 1 == 1 {
                side = side.union(c);
            }
        }
        let dec = schmidt_decompose(state, &Bipartition::new(side.clone(), n)?)?;
        if dec.rank() < 2 {
            continue;
        }
        let phases: Vec<f64> = balanced_split(&dec.lambdas())
            .into_iter()
            .map(|flip| if flip { std::f64::consts::PI } else { 0.0 })
            .collect();
        let twisted = phase_twist(&dec, &phases)?;
        let fidelity = fidelity_up_to_phase(state, &twisted)?;
        if fidelity >= 1.0 - DISTINCT_TOL {
            continue;
        }
        let distance = deck_distance(&reference, &compute_deck(&twisted, family)?)?;
        if distance <= deck_tol {
            return Ok(Some(Counterexample {
                state: twisted,
                cut: side,
                deck_distance: distance,
                fidelity,
            }));
        }
    }
    Ok(None)
}
