use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use qmarg::arrays::{greedy_packing_array, verify_oa, verify_pa, CombinatorialArray};
use qmarg::experiment::{check_counting_table, run_experiment, ExperimentConfig};
use qmarg::hypergraph::{marginal_number_lower_bound, udp_necessary_check};
use qmarg::marginal::{compute_deck, deck_distance, deck_distance_unordered, Deck, MarginalFamily};
use qmarg::qoa::{non_udp_witness_with, qoa_state, WitnessPhases};
use qmarg::schmidt::{classify_genericity, schmidt_decompose, Bipartition};
use qmarg::state::{sample_haar_state, PartyStructure, PureState};
use qmarg::udp::{certify_udp_with, CertifyOptions, CrossCutSpec};
use qmarg::Tolerances;

#[derive(Parser)]
#[command(
    name = "qmarg",
    version,
    about = "Marginals, Schmidt phase systems and uniqueness checks for pure states"
)]
struct Cli {
    /// Emit machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct TolArgs {
    #[arg(long)]
    norm_tol: Option<f64>,
    #[arg(long)]
    gap_tol: Option<f64>,
    #[arg(long)]
    svd_tol: Option<f64>,
    #[arg(long)]
    deck_tol: Option<f64>,
}

impl TolArgs {
    fn apply(&self, mut t: Tolerances) -> Tolerances {
        t.norm_tol = self.norm_tol.unwrap_or(t.norm_tol);
        t.gap_tol = self.gap_tol.unwrap_or(t.gap_tol);
        t.svd_tol = self.svd_tol.unwrap_or(t.svd_tol);
        t.deck_tol = self.deck_tol.unwrap_or(t.deck_tol);
        t
    }
}

#[derive(Subcommand)]
enum Command {
    /// Certify a state from the four cut marginals AB, CD, AC, BD.
    Certify {
        state: PathBuf,
        /// Blocks, e.g. "A=1,2;B=3;C=4;D=5,6". Balanced halves when omitted.
        #[arg(long)]
        blocks: Option<String>,
        /// Extra marginals a witness must reproduce ("k=3" or "1,2;3,4").
        #[arg(long)]
        family: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the witness state here when one is found.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Certify a batch of Haar-random states.
    Experiment {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        blocks: Option<String>,
        /// JSON file with experiment settings; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Where to write the full report.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Export or compare marginal decks.
    #[command(subcommand)]
    Deck(DeckCommand),
    /// Schmidt decomposition across a cut.
    Schmidt {
        state: PathBuf,
        /// Parties on the left of the cut, e.g. "1,2".
        #[arg(long)]
        cut: String,
    },
    /// Connectivity of a marginal family.
    Hypergraph {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        family: String,
        /// Marginal size for the lower bound; defaults to the largest edge.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Orthogonal and packing arrays.
    #[command(subcommand)]
    Oa(OaCommand),
    /// Equation surplus table, closed form against direct counting.
    CountingTable {
        #[arg(long, default_value_t = 6)]
        max_n: u32,
        #[arg(long, default_value_t = 4)]
        max_d: u32,
        #[arg(long)]
        csv: bool,
    },
    /// Draw a Haar-random state.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DeckCommand {
    /// Marginals of a state over a family.
    Export {
        state: PathBuf,
        #[arg(long)]
        family: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Largest Frobenius distance between two decks (state or deck files).
    Diff {
        a: PathBuf,
        b: PathBuf,
        /// Required when comparing state files.
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        /// Pair marginals by party set instead of position.
        #[arg(long)]
        unordered: bool,
    },
}

#[derive(Subcommand)]
enum OaCommand {
    /// Check the array's defining property.
    Verify { file: PathBuf },
    /// Build the state supported on the array rows.
    State {
        file: PathBuf,
        /// JSON list of amplitudes (inline or a file), each a number or [re, im].
        #[arg(long)]
        amps: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Phase-flip witness sharing the complete (N-k)-deck.
    Witness {
        file: PathBuf,
        /// Row to negate, 1-based.
        #[arg(long, conflicts_with = "phases")]
        flip: Option<usize>,
        /// Comma-separated phase per row.
        #[arg(long)]
        phases: Option<String>,
        #[arg(long)]
        amps: Option<String>,
        #[arg(long)]
        allow_any_strength: bool,
        #[arg(long)]
        deck_tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Greedy packing array.
    GeneratePa {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    // Exit quietly when stdout is closed early, e.g. piped into `head`.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_state(path: &Path) -> Result<PureState> {
    PureState::read(path).with_context(|| format!("loading state {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn print_json(value: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("json value serializes")
    );
}

fn block_spec(text: Option<&str>, n: usize) -> Result<CrossCutSpec> {
    Ok(match text {
        Some(t) => CrossCutSpec::parse(t, n)?,
        None => CrossCutSpec::balanced(n)?,
    })
}

/// Inline JSON or a path to a JSON file.
fn parse_amps(text: &str) -> Result<Vec<num_complex::Complex64>> {
    let path = Path::new(text);
    let text = if path.is_file() {
        read_text(path)?
    } else {
        text.to_string()
    };
    let values: Vec<Value> =
        serde_json::from_str(&text).context("amplitudes must be a JSON list")?;
    values
        .iter()
        .map(|v| match v {
            Value::Number(x) => Ok(num_complex::Complex64::new(
                x.as_f64().unwrap_or(f64::NAN),
                0.0,
            )),
            Value::Array(p) if p.len() == 2 => match (p[0].as_f64(), p[1].as_f64()) {
                (Some(re), Some(im)) => Ok(num_complex::Complex64::new(re, im)),
                _ => bail!("bad amplitude {v}"),
            },
            _ => bail!("bad amplitude {v}"),
        })
        .collect()
}

fn load_array(path: &Path) -> Result<CombinatorialArray> {
    Ok(CombinatorialArray::parse(&read_text(path)?)?)
}

fn run(cli: Cli) -> Result<()> {
    let as_json = cli.json;
    match cli.command {
        Command::Certify {
            state,
            blocks,
            family,
            seed,
            out,
            tol,
        } => {
            let psi = read_state(&state)?;
            let n = psi.num_parties();
            let spec = block_spec(blocks.as_deref(), n)?;
            let options = CertifyOptions {
                tolerances: tol.apply(Tolerances::default()),
                extra_family: family.map(|f| MarginalFamily::parse(&f, n)).transpose()?,
                search_seed: seed,
                ..Default::default()
            };
            let verdict = certify_udp_with(&psi, &spec, &options)?;
            if let (Some(path), Some(w)) = (&out, &verdict.witness) {
                w.write(path)?;
            }
            if as_json {
                let mut v = serde_json::to_value(&verdict)?;
                v["blocks"] = json!(spec.to_string());
                print_json(&v);
            } else {
                println!("status: {}", verdict.status);
                println!("blocks: {spec}");
                println!("schmidt rank: {}", verdict.schmidt_rank);
                println!(
                    "unknowns: {}  equations: {} + {}",
                    verdict.variables,
                    verdict.equation_counts.from_qp,
                    verdict.equation_counts.from_lm
                );
                println!("null dim: {}", verdict.null_dim);
                println!(
                    "generic: full_rank={} distinct={} min_gap={}",
                    verdict.genericity.full_rank,
                    verdict.genericity.distinct_spectrum,
                    verdict
                        .genericity
                        .min_gap
                        .map_or("-".into(), |g| format!("{g:.3e}"))
                );
                if verdict.primary_cut_product {
                    println!("note: product across AB|CD, fixed by those two marginals alone");
                }
                if let (Some(d), Some(f)) =
                    (verdict.witness_deck_distance, verdict.witness_fidelity)
                {
                    println!("witness: deck distance {d:.3e}, fidelity {f:.12}");
                }
            }
        }
        Command::Experiment {
            n,
            d,
            trials,
            seed,
            blocks,
            config,
            out,
            tol,
        } => {
            let mut cfg = match &config {
                Some(path) => ExperimentConfig::from_json_str(&read_text(path)?)?,
                None => {
                    let (Some(n), Some(d), Some(trials)) = (n, d, trials) else {
                        bail!("--n, --d and --trials are required without --config");
                    };
                    ExperimentConfig::new(n, d, trials, 0)
                }
            };
            if config.is_some() {
                cfg.n_parties = n.unwrap_or(cfg.n_parties);
                cfg.local_dim = d.unwrap_or(cfg.local_dim);
                cfg.trials = trials.unwrap_or(cfg.trials);
            }
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.blocks = blocks.or(cfg.blocks);
            cfg.output_path = out.or(cfg.output_path);
            cfg.tolerances = tol.apply(cfg.tolerances);
            let report = run_experiment(&cfg)?;
            let summary = json!({
                "n_parties": report.n_parties,
                "local_dim": report.local_dim,
                "blocks": report.blocks,
                "trials": report.trials,
                "certified": report.certified,
                "witnessed": report.witnessed,
                "inconclusive": report.inconclusive,
                "min_spectral_gap": report.min_spectral_gap,
                "min_singular_ratio": report.min_singular_ratio,
                "variables": report.variables,
                "equations": report.equations,
                "equations_match": report.equations_match,
                "runtime_ms": report.runtime_ms,
            });
            if as_json {
                print_json(&summary);
            } else {
                println!(
                    "{} trials (n={}, d={}, blocks {}): certified {}, witnessed {}, inconclusive {}",
                    report.trials,
                    report.n_parties,
                    report.local_dim,
                    report.blocks,
                    report.certified,
                    report.witnessed,
                    report.inconclusive
                );
                println!(
                    "unknowns {}, equations {}",
                    report.variables, report.equations
                );
                if let Some(g) = report.min_spectral_gap {
                    println!("min spectral gap {g:.3e}");
                }
                println!("runtime {} ms", report.runtime_ms);
            }
        }
        Command::Deck(DeckCommand::Export { state, family, out }) => {
            let psi = read_state(&state)?;
            let fam = MarginalFamily::parse(&family, psi.num_parties())?;
            let deck = compute_deck(&psi, &fam)?.to_json();
            let text = serde_json::to_string_pretty(&deck)?;
            match out {
                Some(path) => write_text(&path, &text)?,
                None => println!("{text}"),
            }
        }
        Command::Deck(DeckCommand::Diff {
            a,
            b,
            family,
            tol,
            unordered,
        }) => {
            let (da, db) = load_decks(&a, &b, family.as_deref())?;
            let distance = if unordered {
                deck_distance_unordered(&da, &db)?
            } else {
                deck_distance(&da, &db)?
            };
            let tol = tol.unwrap_or(qmarg::marginal::DEFAULT_DECK_TOL);
            let equal = distance <= tol;
            if as_json {
                print_json(&json!({ "distance": distance, "tol": tol, "equal": equal }));
            } else {
                println!(
                    "distance {distance:.3e} ({})",
                    if equal { "equal" } else { "different" }
                );
            }
        }
        Command::Schmidt { state, cut } => {
            let psi = read_state(&state)?;
            let cut = Bipartition::parse(&cut, psi.num_parties())?;
            let dec = schmidt_decompose(&psi, &cut)?;
            let s = psi.structure();
            let ambient = s.dim_of(cut.left()).min(s.dim_of(cut.right()));
            let g = classify_genericity(&dec, ambient);
            if as_json {
                print_json(&json!({
                    "left": cut.left(),
                    "right": cut.right(),
                    "rank": dec.rank(),
                    "coefficients": dec.coefficients(),
                    "lambdas": dec.lambdas(),
                    "genericity": g,
                }));
            } else {
                println!("cut {} | {}", cut.left(), cut.right());
                println!("rank {} of {}", dec.rank(), ambient);
                for (i, c) in dec.coefficients().iter().enumerate() {
                    println!("  s{} = {c:.12}", i + 1);
                }
            }
        }
        Command::Hypergraph { n, family, k } => {
            let fam = MarginalFamily::parse(&family, n)?;
            let check = udp_necessary_check(&fam);
            let k = k.or_else(|| fam.subsets().iter().map(|s| s.len()).max());
            let bound = k.and_then(|k| marginal_number_lower_bound(n, k).ok());
            let value = json!({
                "connected": check.connected,
                "violation": check.violation,
                "lower_bound_for_k": bound,
                "k": k,
                "family_size": fam.len(),
                "singleton_edges": check.singleton_edges,
            });
            if as_json {
                print_json(&value);
            } else {
                println!("connected: {}", check.connected);
                println!("violation: {}", check.violation);
                if let (Some(k), Some(b)) = (k, bound) {
                    println!(
                        "at least {b} marginals of size {k} are needed to connect {n} parties"
                    );
                }
                for e in &check.singleton_edges {
                    println!("note: edge {e} has one party and joins nothing");
                }
            }
        }
        Command::Oa(cmd) => run_oa(cmd, as_json)?,
        Command::CountingTable { max_n, max_d, csv } => {
            let table = check_counting_table(max_n, max_d)?;
            if csv {
                print!("{}", table.rows_csv());
                println!();
                print!("{}", table.worst_cases_csv());
            } else if as_json {
                print_json(&json!({
                    "rows": table.rows,
                    "worst_cases": table.worst_cases,
                    "all_agree": table.all_agree(),
                    "flagged": table.flagged(),
                }));
            } else {
                println!(
                    "{:>3} {:>3} {:>14} {:>14} {:>6} {:>8}",
                    "n", "d", "direct", "closed_form", "agree", "argmin"
                );
                for w in &table.worst_cases {
                    let argmin: Vec<String> = w.argmin.iter().map(u32::to_string).collect();
                    println!(
                        "{:>3} {:>3} {:>14} {:>14} {:>6} {:>8}{}",
                        w.n,
                        w.d,
                        w.direct,
                        w.closed_form,
                        w.agree,
                        argmin.join(","),
                        if w.non_positive { "  non-positive" } else { "" }
                    );
                }
            }
        }
        Command::Sample { n, d, seed, out } => {
            let psi = sample_haar_state(&PartyStructure::uniform(n, d)?, seed);
            match out {
                Some(path) => psi.write(&path)?,
                None => println!("{}", psi.to_json_string()),
            }
        }
    }
    Ok(())
}

fn load_decks(a: &Path, b: &Path, family: Option<&str>) -> Result<(Deck, Deck)> {
    let va: Value = serde_json::from_str(&read_text(a)?)?;
    let vb: Value = serde_json::from_str(&read_text(b)?)?;
    if va.is_array() && vb.is_array() {
        let max_party = |v: &Value| -> usize {
            v.as_array()
                .into_iter()
                .flatten()
                .filter_map(|r| r["parties"].as_array())
                .flatten()
                .filter_map(Value::as_u64)
                .max()
                .unwrap_or(0) as usize
        };
        let n = max_party(&va).max(max_party(&vb));
        return Ok((Deck::from_json(va, n)?, Deck::from_json(vb, n)?));
    }
    let sa = PureState::from_json_str(&serde_json::to_string(&va)?)?;
    let sb = PureState::from_json_str(&serde_json::to_string(&vb)?)?;
    let Some(family) = family else {
        bail!("--family is required when comparing state files");
    };
    let fam = MarginalFamily::parse(family, sa.num_parties())?;
    Ok((compute_deck(&sa, &fam)?, compute_deck(&sb, &fam)?))
}

fn run_oa(cmd: OaCommand, as_json: bool) -> Result<()> {
    match cmd {
        OaCommand::Verify { file } => {
            let arr = CombinatorialArray::parse_unverified(&read_text(&file)?)?;
            let (d, k) = (arr.levels(), arr.strength());
            let oa = verify_oa(arr.rows(), d, k)?;
            let pa = verify_pa(arr.rows(), d, k)?;
            let kind = match arr {
                CombinatorialArray::Oa(_) => "OA",
                CombinatorialArray::Pa(_) => "PA",
            };
            let valid = if kind == "OA" { oa.is_oa } else { pa };
            if as_json {
                print_json(&json!({
                    "kind": kind,
                    "rows": arr.num_rows(),
                    "columns": arr.num_columns(),
                    "levels": d,
                    "strength": k,
                    "valid": valid,
                    "is_oa": oa.is_oa,
                    "lambda": oa.lambda,
                    "irredundant": oa.irredundant,
                    "is_pa": pa,
                }));
            } else {
                println!(
                    "{kind}({}, {}, {d}, {k}): {}",
                    arr.num_rows(),
                    arr.num_columns(),
                    if valid { "valid" } else { "INVALID" }
                );
                println!(
                    "orthogonal: {}  lambda: {:?}  irredundant: {}  packing: {pa}",
                    oa.is_oa, oa.lambda, oa.irredundant
                );
            }
            if !valid {
                bail!("array does not have its declared property");
            }
        }
        OaCommand::State { file, amps, out } => {
            let amps = amps.as_deref().map(parse_amps).transpose()?;
            let g = qoa_state(load_array(&file)?, amps)?;
            match out {
                Some(path) => g.state().write(&path)?,
                None => println!("{}", g.state().to_json_string()),
            }
        }
        OaCommand::Witness {
            file,
            flip,
            phases,
            amps,
            allow_any_strength,
            deck_tol,
            out,
        } => {
            let amps = amps.as_deref().map(parse_amps).transpose()?;
            let g = qoa_state(load_array(&file)?, amps)?;
            let choice = match (flip, phases) {
                (Some(0), _) => bail!("--flip is 1-based"),
                (Some(i), _) => WitnessPhases::Flip(i - 1),
                (None, Some(p)) => WitnessPhases::Phases(
                    p.split(',')
                        .map(|x| {
                            x.trim()
                                .parse::<f64>()
                                .with_context(|| format!("bad phase {x:?}"))
                        })
                        .collect::<Result<_>>()?,
                ),
                (None, None) => WitnessPhases::Flip(0),
            };
            let tol = deck_tol.unwrap_or(qmarg::marginal::DEFAULT_DECK_TOL);
            let w = non_udp_witness_with(&g, &choice, allow_any_strength, tol)?;
            if let Some(path) = out {
                w.witness.write(&path)?;
            }
            if as_json {
                print_json(&json!({
                    "verified": w.verified,
                    "deck_distance": w.deck_distance,
                    "fidelity": w.fidelity,
                    "marginal_size": w.marginal_size,
                }));
            } else {
                println!(
                    "witness {}: complete {}-deck distance {:.3e}, fidelity {:.12}",
                    if w.verified {
                        "verified"
                    } else {
                        "NOT verified"
                    },
                    w.marginal_size,
                    w.deck_distance,
                    w.fidelity
                );
            }
        }
        OaCommand::GeneratePa {
            n,
            d,
            k,
            rows,
            seed,
            out,
        } => {
            let pa = greedy_packing_array(n, d, k, rows.unwrap_or(usize::MAX), seed)?;
            let text = CombinatorialArray::Pa(pa).to_text();
            match out {
                Some(path) => write_text(&path, &text)?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}
