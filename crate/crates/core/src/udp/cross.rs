use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{reduced_outer, CMatrix};
use crate::schmidt::{Bipartition, SchmidtDecomposition};
use crate::state::{PartyStructure, Subset};

/// Four disjoint blocks covering the parties. The primary cut is `AB|CD`,
/// the secondary cut `AC|BD`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossCutSpec {
    num_parties: usize,
    a: Subset,
    b: Subset,
    c: Subset,
    d: Subset,
}

impl CrossCutSpec {
    pub fn new(num_parties: usize, a: Subset, b: Subset, c: Subset, d: Subset) -> Result<Self> {
        let blocks = [&a, &b, &c, &d];
        for (i, x) in blocks.iter().enumerate() {
            if x.parties().iter().any(|&p| p == 0 || p > num_parties) {
                return Err(Error::InvalidBlocks(format!(
                    "block {x} not within 1..={num_parties}"
                )));
            }
            for y in &blocks[i + 1..] {
                if !x.is_disjoint(y) {
                    return Err(Error::InvalidBlocks(format!("blocks {x} and {y} overlap")));
                }
            }
        }
        let covered: usize = blocks.iter().map(|x| x.len()).sum();
        if covered != num_parties {
            return Err(Error::InvalidBlocks(format!(
                "blocks cover {covered} of {num_parties} parties"
            )));
        }
        let spec = Self {
            num_parties,
            a,
            b,
            c,
            d,
        };
        for (name, s) in [
            ("AB", spec.ab()),
            ("CD", spec.cd()),
            ("AC", spec.ac()),
            ("BD", spec.bd()),
        ] {
            if s.is_empty() {
                return Err(Error::InvalidBlocks(format!("{name} is empty")));
            }
        }
        Ok(spec)
    }

    /// Parses `A=1,2;B=3;C=4;D=5,6`. Omitted blocks are empty.
    pub fn parse(text: &str, num_parties: usize) -> Result<Self> {
        let mut blocks: [Option<Subset>; 4] = Default::default();
        for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, list) = part.split_once('=').ok_or_else(|| {
                Error::InvalidBlocks(format!("expected NAME=parties, got {part:?}"))
            })?;
            let slot = match name.trim() {
                "A" | "a" => 0,
                "B" | "b" => 1,
                "C" | "c" => 2,
                "D" | "d" => 3,
                other => return Err(Error::InvalidBlocks(format!("unknown block {other:?}"))),
            };
            if blocks[slot].is_some() {
                return Err(Error::InvalidBlocks(format!(
                    "block {} given twice",
                    name.trim()
                )));
            }
            blocks[slot] = Some(Subset::parse(list, num_parties)?);
        }
        let [a, b, c, d] = blocks.map(|x| x.unwrap_or_else(Subset::empty));
        Self::new(num_parties, a, b, c, d)
    }

    /// Consecutive blocks of the given sizes, in order `A, B, C, D`.
    pub fn from_sizes(sizes: [usize; 4]) -> Result<Self> {
        let n: usize = sizes.iter().sum();
        let mut next = 1;
        let mut blocks = Vec::with_capacity(4);
        for s in sizes {
            blocks.push(Subset::new((next..next + s).collect(), n)?);
            next += s;
        }
        let d = blocks.pop().unwrap();
        let c = blocks.pop().unwrap();
        let b = blocks.pop().unwrap();
        let a = blocks.pop().unwrap();
        Self::new(n, a, b, c, d)
    }

    /// Half-body cuts for even `n`: `|A| = |D| = ceil(n/4)`, `|B| = |C| = floor(n/4)`.
    /// For `n = 6` this is `A={1,2} B={3} C={4} D={5,6}`.
    pub fn balanced(n: usize) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidBlocks(format!(
                "balanced blocks need even n >= 4, got {n}"
            )));
        }
        let half = n / 2;
        let outer = half.div_ceil(2);
        let inner = half / 2;
        Self::from_sizes([outer, inner, inner, outer])
    }

    pub fn num_parties(&self) -> usize {
        self.num_parties
    }

    pub fn a(&self) -> &Subset {
        &self.a
    }

    pub fn b(&self) -> &Subset {
        &self.b
    }

    pub fn c(&self) -> &Subset {
        &self.c
    }

    pub fn d(&self) -> &Subset {
        &self.d
    }

    pub fn ab(&self) -> Subset {
        self.a.union(&self.b)
    }

    pub fn cd(&self) -> Subset {
        self.c.union(&self.d)
    }

    pub fn ac(&self) -> Subset {
        self.a.union(&self.c)
    }

    pub fn bd(&self) -> Subset {
        self.b.union(&self.d)
    }

    pub fn primary_cut(&self) -> Bipartition {
        Bipartition::new(self.ab(), self.num_parties).expect("validated on construction")
    }

    pub fn secondary_cut(&self) -> Bipartition {
        Bipartition::new(self.ac(), self.num_parties).expect("validated on construction")
    }

    /// Exchanges the roles of the two cuts (swaps `B` and `C`).
    pub fn swapped(&self) -> Self {
        Self {
            num_parties: self.num_parties,
            a: self.a.clone(),
            b: self.c.clone(),
            c: self.b.clone(),
            d: self.d.clone(),
        }
    }

    /// The four subsets `AB, CD, AC, BD`.
    pub fn cut_subsets(&self) -> [Subset; 4] {
        [self.ab(), self.cd(), self.ac(), self.bd()]
    }

    /// Block dimensions `(dA, dB, dC, dD)`.
    pub fn block_dims(&self, structure: &PartyStructure) -> (usize, usize, usize, usize) {
        (
            structure.dim_of(&self.a),
            structure.dim_of(&self.b),
            structure.dim_of(&self.c),
            structure.dim_of(&self.d),
        )
    }
}

impl std::fmt::Display for CrossCutSpec {
    /// The `A=..;B=..;C=..;D=..` form accepted by [`CrossCutSpec::parse`].
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        for (name, block) in [
            ("A", &self.a),
            ("B", &self.b),
            ("C", &self.c),
            ("D", &self.d),
        ] {
            if !block.is_empty() {
                let list: Vec<String> = block.parties().iter().map(usize::to_string).collect();
                parts.push(format!("{name}={}", list.join(",")));
            }
        }
        f.write_str(&parts.join(";"))
    }
}

/// `Q = Tr_B |i><j|_AB`, `L = Tr_A |i><j|_AB`, `P = Tr_D |i><j|_CD`,
/// `M = Tr_C |i><j|_CD` for one pair of Schmidt indices.
#[derive(Clone, Debug)]
pub struct CrossBlock {
    pub q: CMatrix,
    pub p: CMatrix,
    pub l: CMatrix,
    pub m: CMatrix,
}

/// Cross matrices for every pair `i < j` of Schmidt indices.
#[derive(Clone, Debug)]
pub struct CrossMatrices {
    pub rank: usize,
    /// `(dA, dB, dC, dD)`.
    pub block_dims: (usize, usize, usize, usize),
    pub pairs: Vec<(usize, usize)>,
    pub blocks: Vec<CrossBlock>,
}

/// Positions of `inner`'s parties within the ascending list of `outer`'s.
fn relative_positions(outer: &Subset, inner: &Subset) -> Vec<usize> {
    outer
        .parties()
        .iter()
        .enumerate()
        .filter(|(_, p)| inner.contains(**p))
        .map(|(i, _)| i)
        .collect()
}

fn check_cut(dec: &SchmidtDecomposition, spec: &CrossCutSpec) -> Result<()> {
    if dec.cut().left() != &spec.ab() || dec.structure().num_parties() != spec.num_parties() {
        return Err(Error::InvalidCut(format!(
            "decomposition is along {} but the primary cut is {}",
            dec.cut().left(),
            spec.ab()
        )));
    }
    Ok(())
}

/// Cross matrices for a single Schmidt index pair `(i, j)`, which may be equal.
pub fn cross_block(
    dec: &SchmidtDecomposition,
    spec: &CrossCutSpec,
    i: usize,
    j: usize,
) -> Result<CrossBlock> {
    check_cut(dec, spec)?;
    if i >= dec.rank() || j >= dec.rank() {
        return Err(Error::InvalidConfig(format!(
            "pair ({i}, {j}) out of range for Schmidt rank {}",
            dec.rank()
        )));
    }
    Ok(cross_block_unchecked(dec, spec, i, j))
}

fn cross_block_unchecked(
    dec: &SchmidtDecomposition,
    spec: &CrossCutSpec,
    i: usize,
    j: usize,
) -> CrossBlock {
    let (ab, cd) = (spec.ab(), spec.cd());
    let (ldims, rdims) = (dec.left_dims(), dec.right_dims());
    let (pos_a, pos_b) = (
        relative_positions(&ab, spec.a()),
        relative_positions(&ab, spec.b()),
    );
    let (pos_c, pos_d) = (
        relative_positions(&cd, spec.c()),
        relative_positions(&cd, spec.d()),
    );
    let (ui, uj) = (&dec.left_basis()[i], &dec.left_basis()[j]);
    let (vi, vj) = (&dec.right_basis()[i], &dec.right_basis()[j]);
    block_from_vectors(
        ui,
        uj,
        vi,
        vj,
        &ldims,
        &rdims,
        (&pos_a, &pos_b, &pos_c, &pos_d),
    )
}

pub(super) fn block_from_vectors(
    ui: &[Complex64],
    uj: &[Complex64],
    vi: &[Complex64],
    vj: &[Complex64],
    ldims: &[usize],
    rdims: &[usize],
    (pos_a, pos_b, pos_c, pos_d): (&[usize], &[usize], &[usize], &[usize]),
) -> CrossBlock {
    CrossBlock {
        q: reduced_outer(ui, uj, ldims, pos_a),
        l: reduced_outer(ui, uj, ldims, pos_b),
        p: reduced_outer(vi, vj, rdims, pos_c),
        m: reduced_outer(vi, vj, rdims, pos_d),
    }
}

pub fn build_cross_matrices(
    dec: &SchmidtDecomposition,
    spec: &CrossCutSpec,
) -> Result<CrossMatrices> {
    check_cut(dec, spec)?;
    let r = dec.rank();
    let pairs: Vec<(usize, usize)> = (0..r)
        .flat_map(|i| (i + 1..r).map(move |j| (i, j)))
        .collect();
    let blocks = pairs
        .iter()
        .map(|&(i, j)| cross_block_unchecked(dec, spec, i, j))
        .collect();
    Ok(CrossMatrices {
        rank: r,
        block_dims: spec.block_dims(dec.structure()),
        pairs,
        blocks,
    })
}
