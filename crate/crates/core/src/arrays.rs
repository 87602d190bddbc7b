//! Orthogonal and packing arrays over `d` symbols.
//!
//! Text format: a header line `OA r N d k` or `PA r N d k`, then `r` rows of
//! `N` symbols, either whitespace separated or as contiguous digits (`d <= 10`).
//! Blank lines and lines starting with `#` are ignored.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::marginal::k_subsets;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OaCheck {
    pub is_oa: bool,
    pub lambda: Option<usize>,
    /// Every `(N - k)`-column subarray has pairwise distinct rows.
    pub irredundant: bool,
}

fn validate_rows(rows: &[Vec<usize>], d: usize, k: usize) -> Result<usize> {
    let n = rows
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidArray("no rows".into()))?;
    if d < 2 {
        return Err(Error::InvalidArray(format!(
            "need at least 2 levels, got {d}"
        )));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArray(format!("strength {k} not in 1..={n}")));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidArray(format!(
                "row {} has {} entries, expected {n}",
                i + 1,
                row.len()
            )));
        }
        if let Some(&x) = row.iter().find(|&&x| x >= d) {
            return Err(Error::InvalidArray(format!(
                "row {} has entry {x} outside 0..{d}",
                i + 1
            )));
        }
    }
    Ok(n)
}

fn tuple_code(row: &[usize], cols: &[usize], d: usize) -> usize {
    cols.iter().fold(0, |acc, &c| acc * d + row[c - 1])
}

/// Per column subset, how often each tuple occurs.
fn histograms(
    rows: &[Vec<usize>],
    n: usize,
    d: usize,
    width: usize,
) -> impl Iterator<Item = Vec<usize>> + '_ {
    k_subsets(n, width).into_iter().map(move |cols| {
        let mut counts = vec![0usize; d.pow(width as u32)];
        for row in rows {
            counts[tuple_code(row, &cols, d)] += 1;
        }
        counts
    })
}

fn all_projections_distinct(rows: &[Vec<usize>], n: usize, width: usize) -> bool {
    if width == 0 {
        return rows.len() <= 1;
    }
    k_subsets(n, width).into_iter().all(|cols| {
        let mut seen = HashSet::with_capacity(rows.len());
        rows.iter()
            .all(|row| seen.insert(cols.iter().map(|&c| row[c - 1]).collect::<Vec<_>>()))
    })
}

pub fn verify_oa(rows: &[Vec<usize>], d: usize, k: usize) -> Result<OaCheck> {
    let n = validate_rows(rows, d, k)?;
    let cells = d.pow(k as u32);
    let lambda = rows
        .len()
        .is_multiple_of(cells)
        .then_some(rows.len() / cells);
    let is_oa = lambda
        .is_some_and(|l| l > 0 && histograms(rows, n, d, k).all(|h| h.iter().all(|&c| c == l)));
    Ok(OaCheck {
        is_oa,
        lambda: if is_oa { lambda } else { None },
        irredundant: all_projections_distinct(rows, n, n - k),
    })
}

/// Every `k`-column subarray has pairwise distinct rows.
pub fn verify_pa(rows: &[Vec<usize>], d: usize, k: usize) -> Result<bool> {
    let n = validate_rows(rows, d, k)?;
    Ok(all_projections_distinct(rows, n, k))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrthogonalArray {
    rows: Vec<Vec<usize>>,
    levels: usize,
    strength: usize,
    index_lambda: usize,
}

impl OrthogonalArray {
    pub fn new(rows: Vec<Vec<usize>>, levels: usize, strength: usize) -> Result<Self> {
        let check = verify_oa(&rows, levels, strength)?;
        let index_lambda = check.lambda.ok_or_else(|| {
            Error::InvalidArray(format!("not an orthogonal array of strength {strength}"))
        })?;
        Ok(Self {
            rows,
            levels,
            strength,
            index_lambda,
        })
    }

    /// Skips the tuple-count verification; shape and range are still checked.
    pub fn new_unverified(rows: Vec<Vec<usize>>, levels: usize, strength: usize) -> Result<Self> {
        validate_rows(&rows, levels, strength)?;
        let index_lambda = rows.len() / levels.pow(strength as u32);
        Ok(Self {
            rows,
            levels,
            strength,
            index_lambda,
        })
    }

    pub fn index_lambda(&self) -> usize {
        self.index_lambda
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackingArray {
    rows: Vec<Vec<usize>>,
    levels: usize,
    strength: usize,
}

impl PackingArray {
    pub fn new(rows: Vec<Vec<usize>>, levels: usize, strength: usize) -> Result<Self> {
        let pa = Self::new_unverified(rows, levels, strength)?;
        if !verify_pa(&pa.rows, levels, strength)? {
            return Err(Error::InvalidArray(format!(
                "some {strength}-tuple repeats in a column subarray"
            )));
        }
        Ok(pa)
    }

    pub fn new_unverified(rows: Vec<Vec<usize>>, levels: usize, strength: usize) -> Result<Self> {
        validate_rows(&rows, levels, strength)?;
        let max = levels.pow(strength as u32);
        if rows.len() < 2 || rows.len() > max {
            return Err(Error::InvalidArray(format!(
                "a packing array needs 2..={max} rows, got {}",
                rows.len()
            )));
        }
        Ok(Self {
            rows,
            levels,
            strength,
        })
    }
}

/// Either kind of array, as read from the text format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "UPPERCASE")]
pub enum CombinatorialArray {
    Oa(OrthogonalArray),
    Pa(PackingArray),
}

macro_rules! shared_accessors {
    ($($t:ty),*) => {$(
        impl $t {
            pub fn rows(&self) -> &[Vec<usize>] {
                &self.rows
            }

            pub fn num_rows(&self) -> usize {
                self.rows.len()
            }

            pub fn num_columns(&self) -> usize {
                self.rows[0].len()
            }

            pub fn levels(&self) -> usize {
                self.levels
            }

            pub fn strength(&self) -> usize {
                self.strength
            }
        }
    )*};
}

shared_accessors!(OrthogonalArray, PackingArray);

impl CombinatorialArray {
    pub fn rows(&self) -> &[Vec<usize>] {
        match self {
            Self::Oa(a) => a.rows(),
            Self::Pa(a) => a.rows(),
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rows().len()
    }

    pub fn num_columns(&self) -> usize {
        self.rows()[0].len()
    }

    pub fn levels(&self) -> usize {
        match self {
            Self::Oa(a) => a.levels(),
            Self::Pa(a) => a.levels(),
        }
    }

    pub fn strength(&self) -> usize {
        match self {
            Self::Oa(a) => a.strength(),
            Self::Pa(a) => a.strength(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_array(text, true)
    }

    pub fn parse_unverified(text: &str) -> Result<Self> {
        parse_array(text, false)
    }

    pub fn to_text(&self) -> String {
        let tag = match self {
            Self::Oa(_) => "OA",
            Self::Pa(_) => "PA",
        };
        let mut out = format!(
            "{tag} {} {} {} {}\n",
            self.num_rows(),
            self.num_columns(),
            self.levels(),
            self.strength()
        );
        let sep = if self.levels() <= 10 { "" } else { " " };
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(usize::to_string).collect();
            out.push_str(&cells.join(sep));
            out.push('\n');
        }
        out
    }
}

fn parse_row(line: &str, n: usize) -> Result<Vec<usize>> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    let bad = || Error::Parse(format!("cannot read row {line:?}"));
    if tokens.len() == 1 && n > 1 {
        tokens[0]
            .chars()
            .map(|c| c.to_digit(10).map(|x| x as usize).ok_or_else(bad))
            .collect()
    } else {
        tokens
            .iter()
            .map(|t| t.parse::<usize>().map_err(|_| bad()))
            .collect()
    }
}

fn parse_array(text: &str, verify: bool) -> Result<CombinatorialArray> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty array file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 {
        return Err(Error::Parse(format!(
            "header must be `OA|PA r N d k`, got {header:?}"
        )));
    }
    let nums = fields[1..]
        .iter()
        .map(|f| {
            f.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad header field {f:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let (r, n, d, k) = (nums[0], nums[1], nums[2], nums[3]);
    let rows = lines.map(|l| parse_row(l, n)).collect::<Result<Vec<_>>>()?;
    if rows.len() != r {
        return Err(Error::InvalidArray(format!(
            "header says {r} rows, found {}",
            rows.len()
        )));
    }
    if let Some(row) = rows.iter().find(|row| row.len() != n) {
        return Err(Error::InvalidArray(format!(
            "row {row:?} does not have {n} columns"
        )));
    }
    match (fields[0], verify) {
        ("OA", true) => OrthogonalArray::new(rows, d, k).map(CombinatorialArray::Oa),
        ("OA", false) => OrthogonalArray::new_unverified(rows, d, k).map(CombinatorialArray::Oa),
        ("PA", true) => PackingArray::new(rows, d, k).map(CombinatorialArray::Pa),
        ("PA", false) => PackingArray::new_unverified(rows, d, k).map(CombinatorialArray::Pa),
        (other, _) => Err(Error::Parse(format!("unknown array kind {other:?}"))),
    }
}

/// Greedy packing array: scans all `d^n` words in a seeded random order and
/// keeps a word when none of its `k`-column projections is already taken.
/// Stops at `max_rows` (capped at `d^k`).
pub fn greedy_packing_array(
    n: usize,
    d: usize,
    k: usize,
    max_rows: usize,
    seed: u64,
) -> Result<PackingArray> {
    if d < 2 || k == 0 || k > n {
        return Err(Error::InvalidArray(format!(
            "invalid parameters n={n} d={d} k={k}"
        )));
    }
    let total = d
        .checked_pow(n as u32)
        .filter(|&t| t <= 1 << 20)
        .ok_or_else(|| Error::InvalidArray(format!("{d}^{n} words is too many to scan")))?;
    let target = max_rows.min(d.pow(k as u32));
    let subsets = k_subsets(n, k);
    let mut used: Vec<HashSet<usize>> = vec![HashSet::new(); subsets.len()];
    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut rows = Vec::new();
    for w in order {
        if rows.len() >= target {
            break;
        }
        let word: Vec<usize> = (0..n).rev().map(|p| w / d.pow(p as u32) % d).collect();
        let codes: Vec<usize> = subsets
            .iter()
            .map(|cols| tuple_code(&word, cols, d))
            .collect();
        if codes.iter().zip(&used).all(|(c, u)| !u.contains(c)) {
            for (c, u) in codes.into_iter().zip(used.iter_mut()) {
                u.insert(c);
            }
            rows.push(word);
        }
    }
    PackingArray::new(rows, d, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashMap;

    const EXAMPLE_OA: &str = "OA 9 4 3 2\n0000\n0111\n0222\n1021\n1102\n1210\n2012\n2120\n2201\n";

    fn rows_of(words: &[&str]) -> Vec<Vec<usize>> {
        words
            .iter()
            .map(|w| {
                w.chars()
                    .map(|c| c.to_digit(10).unwrap() as usize)
                    .collect()
            })
            .collect()
    }

    /// Direct tuple histogram over every column subset.
    fn oracle_is_oa(rows: &[Vec<usize>], d: usize, k: usize) -> Option<usize> {
        let n = rows[0].len();
        let r = rows.len();
        let cells = d.pow(k as u32);
        if !r.is_multiple_of(cells) {
            return None;
        }
        let lambda = r / cells;
        for cols in k_subsets(n, k) {
            let mut hist: HashMap<Vec<usize>, usize> = HashMap::new();
            for row in rows {
                *hist
                    .entry(cols.iter().map(|&c| row[c - 1]).collect())
                    .or_default() += 1;
            }
            if hist.len() != cells || hist.values().any(|&c| c != lambda) {
                return None;
            }
        }
        Some(lambda)
    }

    #[test]
    fn example_oa() {
        let arr = CombinatorialArray::parse(EXAMPLE_OA).unwrap();
        let check = verify_oa(arr.rows(), 3, 2).unwrap();
        assert_eq!(
            check,
            OaCheck {
                is_oa: true,
                lambda: Some(1),
                irredundant: true
            }
        );
        assert_eq!(CombinatorialArray::parse(&arr.to_text()).unwrap(), arr);
    }

    #[test]
    fn duplicated_row_breaks_oa() {
        let mut rows = CombinatorialArray::parse(EXAMPLE_OA)
            .unwrap()
            .rows()
            .to_vec();
        rows.push(rows[3].clone());
        assert!(!verify_oa(&rows, 3, 2).unwrap().is_oa);
        assert!(OrthogonalArray::new(rows, 3, 2).is_err());
    }

    #[test]
    fn ghz_support() {
        let check = verify_oa(&rows_of(&["000", "111"]), 2, 1).unwrap();
        assert!(check.is_oa);
        assert_eq!(check.lambda, Some(1));
    }

    #[test]
    fn packing_examples() {
        assert!(verify_pa(&rows_of(&["00", "01"]), 2, 2).unwrap());
        assert!(!verify_pa(&rows_of(&["00", "00"]), 2, 2).unwrap());
        let oa = CombinatorialArray::parse(EXAMPLE_OA).unwrap();
        assert!(verify_pa(&oa.rows()[2..7], 3, 2).unwrap());
        assert!(PackingArray::new(rows_of(&["00"]), 2, 2).is_err());
    }

    #[test]
    fn errors() {
        assert!(verify_oa(&rows_of(&["03"]), 3, 1).is_err());
        assert!(verify_oa(&rows_of(&["01"]), 2, 3).is_err());
        assert!(CombinatorialArray::parse("OA 2 2 2 1\n00\n").is_err());
        assert!(CombinatorialArray::parse("XX 1 1 2 1\n0\n").is_err());
    }

    #[test]
    fn whitespace_rows() {
        let arr =
            CombinatorialArray::parse("PA 3 5 3 2\n0 0 0 0 0\n1 1 1 1 1\n2 2 2 2 2\n").unwrap();
        assert_eq!(arr.num_rows(), 3);
        assert_eq!(arr.num_columns(), 5);
        assert!(matches!(arr, CombinatorialArray::Pa(_)));
    }

    #[test]
    fn greedy_is_valid_and_deterministic() {
        let a = greedy_packing_array(5, 3, 2, 9, 7).unwrap();
        assert!(verify_pa(a.rows(), 3, 2).unwrap());
        assert!(a.num_rows() >= 2 && a.num_rows() <= 9);
        assert_eq!(a, greedy_packing_array(5, 3, 2, 9, 7).unwrap());
    }

    proptest! {
        #[test]
        fn oa_matches_histogram_oracle(
            d in 2usize..4,
            n in 2usize..5,
            k in 1usize..3,
            seed in any::<u64>(),
            r_mult in 1usize..3,
        ) {
            prop_assume!(k <= n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // Mix of genuine OAs (full factorial) and random arrays.
            let r = r_mult * d.pow(k as u32);
            let rows: Vec<Vec<usize>> = if seed % 3 == 0 {
                (0..d.pow(n as u32))
                    .map(|w| (0..n).rev().map(|p| w / d.pow(p as u32) % d).collect())
                    .collect()
            } else {
                use rand::Rng;
                (0..r).map(|_| (0..n).map(|_| rng.random_range(0..d)).collect()).collect()
            };
            let check = verify_oa(&rows, d, k).unwrap();
            let oracle = oracle_is_oa(&rows, d, k);
            prop_assert_eq!(check.is_oa, oracle.is_some());
            prop_assert_eq!(check.lambda, oracle);
        }
    }
}
