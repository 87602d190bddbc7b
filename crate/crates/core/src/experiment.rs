//! Seeded batch certification and the equation-counting table.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::state::{sample_haar_state, PartyStructure, DEFAULT_DIM_CAP};
use crate::tolerances::Tolerances;
use crate::udp::{
    certify_udp_with, complex_unknowns, predicted_equation_count, worst_case_surplus_closed_form,
    worst_case_surplus_direct, CertifyOptions, CrossCutSpec, UdpStatus,
};

fn default_dim_cap() -> usize {
    DEFAULT_DIM_CAP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_parties: usize,
    pub local_dim: usize,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// `A=..;B=..;C=..;D=..`. Balanced halves when absent.
    #[serde(default)]
    pub blocks: Option<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default = "default_dim_cap")]
    pub dim_cap: usize,
}

impl ExperimentConfig {
    pub fn new(n_parties: usize, local_dim: usize, trials: usize, seed: u64) -> Self {
        Self {
            n_parties,
            local_dim,
            trials,
            seed,
            blocks: None,
            tolerances: Tolerances::default(),
            output_path: None,
            dim_cap: DEFAULT_DIM_CAP,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn block_spec(&self) -> Result<CrossCutSpec> {
        match &self.blocks {
            Some(text) => CrossCutSpec::parse(text, self.n_parties),
            None => CrossCutSpec::balanced(self.n_parties),
        }
    }

    pub fn validate(&self) -> Result<(PartyStructure, CrossCutSpec)> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        self.tolerances.validate()?;
        let structure =
            PartyStructure::with_cap(vec![self.local_dim; self.n_parties], self.dim_cap)?;
        Ok((structure, self.block_spec()?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub seed: u64,
    pub status: UdpStatus,
    pub null_dim: usize,
    pub schmidt_rank: usize,
    pub min_gap: Option<f64>,
    pub min_singular_ratio: Option<f64>,
    pub equations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub n_parties: usize,
    pub local_dim: usize,
    pub seed: u64,
    pub blocks: String,
    pub tolerances: Tolerances,
    pub trials: usize,
    pub certified: usize,
    pub witnessed: usize,
    pub inconclusive: usize,
    /// Smallest gap between squared Schmidt coefficients over all trials.
    pub min_spectral_gap: Option<f64>,
    /// Smallest `sigma_min / sigma_max` of the phase system over all trials.
    pub min_singular_ratio: Option<f64>,
    /// Complex unknowns at full Schmidt rank.
    pub variables: usize,
    /// Complex equations predicted from the block dimensions.
    pub equations: usize,
    /// Every trial assembled exactly the predicted number of equations.
    pub equations_match: bool,
    pub per_trial: Vec<TrialRecord>,
    /// Wall-clock time; the only field that varies between identical runs.
    pub runtime_ms: u64,
}

impl ExperimentReport {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// A copy with `runtime_ms` zeroed, for reproducibility comparisons.
    pub fn without_runtime(&self) -> Self {
        Self {
            runtime_ms: 0,
            ..self.clone()
        }
    }
}

fn min_option(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    values.flatten().reduce(f64::min)
}

/// Trial `i` certifies the Haar state drawn with seed `seed + i`. The report
/// is written to `output_path` when one is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let (structure, spec) = config.validate()?;
    let options = CertifyOptions {
        tolerances: config.tolerances,
        ..Default::default()
    };
    let start = Instant::now();
    let per_trial = (0..config.trials)
        .into_par_iter()
        .map(|index| {
            let seed = config.seed.wrapping_add(index as u64);
            let psi = sample_haar_state(&structure, seed);
            let v = certify_udp_with(&psi, &spec, &options)?;
            Ok(TrialRecord {
                index,
                seed,
                status: v.status,
                null_dim: v.null_dim,
                schmidt_rank: v.schmidt_rank,
                min_gap: v.genericity.min_gap,
                min_singular_ratio: v.min_singular_ratio,
                equations: v.equation_counts.total(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let runtime_ms = start.elapsed().as_millis() as u64;

    let count = |s: UdpStatus| per_trial.iter().filter(|t| t.status == s).count();
    let (da, db, dc, dd) = spec.block_dims(&structure);
    let equations = predicted_equation_count(da, db, dc, dd);
    let full_rank = structure
        .dim_of(&spec.ab())
        .min(structure.dim_of(&spec.cd()));
    let report = ExperimentReport {
        n_parties: config.n_parties,
        local_dim: config.local_dim,
        seed: config.seed,
        blocks: spec.to_string(),
        tolerances: config.tolerances,
        trials: config.trials,
        certified: count(UdpStatus::CertifiedUdp),
        witnessed: count(UdpStatus::NotUdpWitnessed),
        inconclusive: count(UdpStatus::Inconclusive),
        min_spectral_gap: min_option(per_trial.iter().map(|t| t.min_gap)),
        min_singular_ratio: min_option(per_trial.iter().map(|t| t.min_singular_ratio)),
        variables: complex_unknowns(full_rank),
        equations,
        equations_match: per_trial.iter().all(|t| t.equations == equations),
        per_trial,
        runtime_ms,
    };
    if let Some(path) = &config.output_path {
        std::fs::write(path, report.to_json_pretty())?;
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountingRow {
    /// Parties on each side of the primary cut.
    pub n: u32,
    pub d: u32,
    /// `|A|`; then `|B| = |C| = n - |A|` and `|D| = |A|`.
    pub a: u32,
    pub variables: i128,
    pub equations: i128,
    pub surplus: i128,
    pub non_positive: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorstCase {
    pub n: u32,
    pub d: u32,
    pub direct: i128,
    pub closed_form: i128,
    pub agree: bool,
    /// Every `|A|` attaining the minimum surplus.
    pub argmin: Vec<u32>,
    pub argmin_at_extremes: bool,
    pub non_positive: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountingTable {
    pub rows: Vec<CountingRow>,
    pub worst_cases: Vec<WorstCase>,
}

impl CountingTable {
    pub fn all_agree(&self) -> bool {
        self.worst_cases
            .iter()
            .all(|w| w.agree && w.argmin_at_extremes)
    }

    /// Worst cases whose surplus is zero or negative.
    pub fn flagged(&self) -> Vec<&WorstCase> {
        self.worst_cases.iter().filter(|w| w.non_positive).collect()
    }

    pub fn rows_csv(&self) -> String {
        let mut out = String::from("n,d,a,variables,equations,surplus,non_positive\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.n, r.d, r.a, r.variables, r.equations, r.surplus, r.non_positive
            ));
        }
        out
    }

    pub fn worst_cases_csv(&self) -> String {
        let mut out =
            String::from("n,d,direct,closed_form,agree,argmin,argmin_at_extremes,non_positive\n");
        for w in &self.worst_cases {
            let argmin: Vec<String> = w.argmin.iter().map(u32::to_string).collect();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                w.n,
                w.d,
                w.direct,
                w.closed_form,
                w.agree,
                argmin.join(" "),
                w.argmin_at_extremes,
                w.non_positive
            ));
        }
        out
    }
}

/// Tabulates unknowns and equations for `2 <= n <= max_n`, `2 <= d <= max_d`
/// and every `1 <= |A| <= n - 1`, then compares the minimum surplus with the
/// closed-form expression.
pub fn check_counting_table(max_n: u32, max_d: u32) -> Result<CountingTable> {
    if max_n < 2 || max_d < 2 {
        return Err(Error::InvalidConfig(format!(
            "need max_n >= 2 and max_d >= 2, got {max_n}, {max_d}"
        )));
    }
    if (max_d as i128).checked_pow(2 * max_n + 2).is_none() {
        return Err(Error::InvalidConfig(format!(
            "{max_d}^(2*{max_n}) overflows the counting range"
        )));
    }
    let mut rows = Vec::new();
    let mut worst_cases = Vec::new();
    for n in 2..=max_n {
        for d in 2..=max_d {
            let di = d as i128;
            let r = di.pow(n);
            let variables = r * (r - 1) / 2;
            let mut surpluses = Vec::new();
            for a in 1..n {
                let surplus = crate::udp::surplus_at(n, di, a);
                rows.push(CountingRow {
                    n,
                    d,
                    a,
                    variables,
                    equations: surplus + variables,
                    surplus,
                    non_positive: surplus <= 0,
                });
                surpluses.push((a, surplus));
            }
            let direct = worst_case_surplus_direct(n, di);
            let closed_form = worst_case_surplus_closed_form(n, di);
            let argmin: Vec<u32> = surpluses
                .iter()
                .filter(|s| s.1 == direct)
                .map(|s| s.0)
                .collect();
            worst_cases.push(WorstCase {
                n,
                d,
                direct,
                closed_form,
                agree: direct == closed_form,
                argmin_at_extremes: argmin.iter().any(|&a| a == 1 || a == n - 1),
                argmin,
                non_positive: direct <= 0,
            });
        }
    }
    Ok(CountingTable { rows, worst_cases })
}
