//! `strata`: certified bounds, classification, verification, and numerical
//! evidence for secant degeneracy indices of strata of binary forms.
//!
//! Every subcommand emits one JSON report (or a text summary with `--text`):
//! the command outputs at the top level together with `command`, `inputs`,
//! `certificates` (used/produced), and `timing`, so replaying the recorded
//! inputs reproduces the outputs (numerical commands echo their seed).
//!
//! Exit codes: 0 success, 1 invalid input (including files that fail
//! verification), 2 internal inconsistency (a certified lower bound above a
//! certified upper bound, which signals a bug and must never happen).

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use strata_core::bounds::{bracket, lower_bound_closure, BoundsError};
use strata_core::exactalg::NumberField;
use strata_core::forms::ProjRoot;
use strata_core::numsearch::{exactify, search_relation_with, DEFAULT_ACCEPT_TOL};
use strata_core::orbits::{
    classify_index, count_permutations_geq, multinomial, orbit_matrix, orbit_rank, parking_search,
    Classification,
};
use strata_core::partitions::Partition;
use strata_core::relations::{verify_relation, CertificateLibrary};
use strata_core::wire::{
    library_from_json, library_to_wire, relation_from_json, relation_to_json, relation_to_wire,
};

#[derive(Parser)]
#[command(
    name = "strata",
    version,
    about = "Certified bounds and exact relations for strata of binary forms"
)]
struct Cli {
    /// Certificate library file to load on top of the built-in certificates
    /// (default: the STRATA_CERTS environment variable, when set).
    #[arg(long, global = true, value_name = "FILE")]
    certs: Option<PathBuf>,

    /// Emit the JSON report (the default).
    #[arg(long, global = true, conflicts_with = "text")]
    json: bool,

    /// Emit a one-line human-readable summary instead of JSON.
    #[arg(long, global = true)]
    text: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certified bracket lower <= l_mu <= upper for a stratum.
    Bounds {
        /// Partition, comma-separated with exponent shorthand: 3,2^2 means (3,2,2).
        partition: String,
    },
    /// Growing/stabilising classification of the shifted family mu^{+t}.
    Classify {
        partition: String,
        /// Root-set trials for the rank search stage (deterministic,
        /// partition-seeded).
        #[arg(long, default_value_t = 64)]
        budget: u64,
    },
    /// Verify a relation file or a certificate library file.
    Verify {
        file: PathBuf,
    },
    /// Print the built-in certificate library.
    Examples,
    /// Exact rank of the orbit matrix of a partition at given roots.
    OrbitRank {
        partition: String,
        /// Comma-separated distinct integer roots, one per part.
        #[arg(long, value_name = "R1,R2,...")]
        roots: String,
    },
    /// Search for a parking tuple (Theorem-5 style upper bound).
    Parking {
        partition: String,
        /// Constraint tuples tested before giving up.
        #[arg(long, default_value_t = 20_000)]
        budget: u64,
    },
    /// Floating-point relation search; exactifies and writes a relation file
    /// when a candidate snaps to an exact relation.
    Numsearch {
        partition: String,
        /// Number of terms to search for (at least 3).
        #[arg(long, value_name = "N")]
        len: usize,
        /// Random restarts.
        #[arg(long, default_value_t = 1024)]
        budget: u64,
        /// Seed for the restart stream (echoed in the report).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Acceptance threshold on the sup-norm residual.
        #[arg(long, default_value_t = DEFAULT_ACCEPT_TOL)]
        tol: f64,
        /// Path for the exactified relation file (default relation-<mu>.json).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Bracket table over all partitions of a degree.
    Table {
        degree: u64,
        /// Row cap; the table is truncated (and flagged) beyond it.
        #[arg(long, default_value_t = 1000)]
        max_rows: usize,
    },
}

enum CliError {
    /// Invalid input: exit 1.
    Input(String),
    /// Internal inconsistency: exit 2.
    Internal(String),
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

/// One finished subcommand: outputs, certificates used/produced, and whether
/// the run counts as a success for the exit code.
struct Outcome {
    outputs: Value,
    text: String,
    certs_used: Vec<String>,
    certs_produced: Vec<String>,
    success: bool,
}

impl Outcome {
    fn ok(outputs: Value, text: String) -> Outcome {
        Outcome {
            outputs,
            text,
            certs_used: Vec::new(),
            certs_produced: Vec::new(),
            success: true,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let started = Instant::now();
    let (name, inputs) = describe(&cli.command, &cli.certs);
    match run(&cli) {
        Ok(outcome) => {
            if cli.text {
                println!("{}", outcome.text);
            } else {
                let mut map = match outcome.outputs {
                    Value::Object(m) => m,
                    other => {
                        let mut m = Map::new();
                        m.insert("value".into(), other);
                        m
                    }
                };
                map.insert("command".into(), json!(name));
                map.insert("inputs".into(), inputs);
                map.insert(
                    "certificates".into(),
                    json!({"used": outcome.certs_used, "produced": outcome.certs_produced}),
                );
                map.insert(
                    "timing".into(),
                    json!({"seconds": started.elapsed().as_secs_f64()}),
                );
                println!("{}", serde_json::to_string_pretty(&Value::Object(map)).unwrap());
            }
            if outcome.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal inconsistency: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Command name and replayable inputs for the report envelope.
fn describe(cmd: &Command, certs: &Option<PathBuf>) -> (&'static str, Value) {
    let certs = json!(certs.as_ref().map(|p| p.display().to_string()));
    match cmd {
        Command::Bounds { partition } => ("bounds", json!({"partition": partition, "certs": certs})),
        Command::Classify { partition, budget } => (
            "classify",
            json!({"partition": partition, "budget": budget, "seeding": "derived from partition"}),
        ),
        Command::Verify { file } => ("verify", json!({"file": file.display().to_string()})),
        Command::Examples => ("examples", json!({})),
        Command::OrbitRank { partition, roots } => {
            ("orbit-rank", json!({"partition": partition, "roots": roots}))
        }
        Command::Parking { partition, budget } => {
            ("parking", json!({"partition": partition, "budget": budget}))
        }
        Command::Numsearch {
            partition,
            len,
            budget,
            seed,
            tol,
            out,
        } => (
            "numsearch",
            json!({
                "partition": partition,
                "len": len,
                "budget": budget,
                "seed": seed,
                "tol": tol,
                "out": out.as_ref().map(|p| p.display().to_string()),
            }),
        ),
        Command::Table { degree, max_rows } => (
            "table",
            json!({"degree": degree, "max_rows": max_rows, "certs": certs}),
        ),
    }
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Bounds { partition } => cmd_bounds(partition, &cli.certs),
        Command::Classify { partition, budget } => cmd_classify(partition, *budget),
        Command::Verify { file } => cmd_verify(file),
        Command::Examples => cmd_examples(),
        Command::OrbitRank { partition, roots } => cmd_orbit_rank(partition, roots),
        Command::Parking { partition, budget } => cmd_parking(partition, *budget),
        Command::Numsearch {
            partition,
            len,
            budget,
            seed,
            tol,
            out,
        } => cmd_numsearch(partition, *len, *budget, *seed, *tol, out),
        Command::Table { degree, max_rows } => cmd_table(*degree, *max_rows, &cli.certs),
    }
}

/// Parses `3,2^2` style partition syntax; the canonical descending form is
/// echoed in every report.
fn parse_partition(s: &str) -> Result<Partition, CliError> {
    let mut parts: Vec<u64> = Vec::new();
    for token in s.split(',') {
        let token = token.trim();
        let (base, count) = match token.split_once('^') {
            Some((b, e)) => {
                let e: u64 = e
                    .trim()
                    .parse()
                    .map_err(|_| input(format!("bad exponent in {token:?}")))?;
                if e == 0 {
                    return Err(input(format!("zero exponent in {token:?}")));
                }
                (b.trim(), e)
            }
            None => (token, 1),
        };
        let v: u64 = base
            .parse()
            .map_err(|_| input(format!("bad part {token:?} (expected e.g. 3,2^2)")))?;
        if v == 0 {
            return Err(input("partition parts must be positive".to_string()));
        }
        if parts.len() as u64 + count > 128 {
            return Err(input("partition has more than 128 parts".to_string()));
        }
        parts.extend(std::iter::repeat(v).take(count as usize));
    }
    if parts.is_empty() {
        return Err(input("empty partition".to_string()));
    }
    Ok(Partition::new(parts))
}

/// Built-in certificates plus the optional library file (flag, then the
/// STRATA_CERTS environment variable). Returns the library and the
/// provenances loaded from the file.
fn load_library(certs: &Option<PathBuf>) -> Result<(CertificateLibrary, Vec<String>), CliError> {
    let mut lib = CertificateLibrary::builtin();
    let path = certs
        .clone()
        .or_else(|| std::env::var_os("STRATA_CERTS").map(PathBuf::from));
    let mut loaded = Vec::new();
    if let Some(path) = path {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
        let extra = library_from_json(&text)
            .map_err(|e| input(format!("{}: {e}", path.display())))?;
        for entry in extra.entries() {
            loaded.push(entry.provenance.clone());
            lib.add(entry.provenance.clone(), entry.relation.clone())
                .map_err(input)?;
        }
    }
    Ok((lib, loaded))
}

fn cmd_bounds(partition: &str, certs: &Option<PathBuf>) -> Result<Outcome, CliError> {
    let mu = parse_partition(partition)?;
    let (lib, loaded) = load_library(certs)?;
    let b = bracket(&mu, &lib).map_err(|e| match e {
        BoundsError::Inconsistent { .. } => CliError::Internal(e.to_string()),
        other => input(other),
    })?;
    let closure = lower_bound_closure(&mu).ok();
    let outputs = json!({
        "partition": mu.parts(),
        "canonical": mu.to_string(),
        "lower": b.lower,
        "upper": b.upper,
        "lower_cert": b.lower_cert,
        "upper_cert": b.upper_cert,
        "paper_stated_lower": b.paper_stated_lower,
        "lower_closure": closure,
    });
    let text = format!(
        "l_({}) in [{}, {}]  lower: {}  upper: {}",
        mu, b.lower, b.upper, b.lower_cert, b.upper_cert
    );
    let mut outcome = Outcome::ok(outputs, text);
    outcome.certs_used = loaded;
    if b.upper_cert.starts_with("R5") {
        outcome.certs_used.push(b.upper_cert.clone());
    }
    Ok(outcome)
}

fn cmd_classify(partition: &str, budget: u64) -> Result<Outcome, CliError> {
    let mu = parse_partition(partition)?;
    let verdict = classify_index(&mu, budget);
    let (outputs, text, produced) = match verdict {
        Classification::Growing { rule } => (
            json!({
                "partition": mu.parts(),
                "canonical": mu.to_string(),
                "verdict": "Growing",
                "rule": rule,
            }),
            format!("{mu}: Growing ({rule})"),
            Vec::new(),
        ),
        Classification::Stabilising { relation } => {
            let wire = serde_json::to_value(relation_to_wire(&relation)).unwrap();
            (
                json!({
                    "partition": mu.parts(),
                    "canonical": mu.to_string(),
                    "verdict": "Stabilising",
                    "certificate": wire,
                }),
                format!(
                    "{mu}: Stabilising (verified common-radical relation of length {})",
                    relation.len()
                ),
                vec![format!("common-radical relation of length {}", relation.len())],
            )
        }
        Classification::Unknown { report } => (
            json!({
                "partition": mu.parts(),
                "canonical": mu.to_string(),
                "verdict": "Unknown",
                "report": {
                    "budget": report.budget,
                    "trials": report.trials,
                    "full_rank_witnesses": report.full_rank_witnesses,
                    "notes": report.notes,
                },
            }),
            format!(
                "{mu}: Unknown after {} trials ({} full-rank witnesses)",
                report.trials,
                report.full_rank_witnesses.len()
            ),
            Vec::new(),
        ),
    };
    let mut outcome = Outcome::ok(outputs, text);
    outcome.certs_produced = produced;
    Ok(outcome)
}

fn cmd_verify(file: &PathBuf) -> Result<Outcome, CliError> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| input(format!("cannot read {}: {e}", file.display())))?;
    // A file is either a single relation or a library; try both shapes.
    match relation_from_json(&text) {
        Ok(rel) => {
            let verdict = verify_relation(&rel);
            let ok = verdict.is_ok();
            let outputs = json!({
                "file": file.display().to_string(),
                "kind": "relation",
                "partition": rel.mu().parts(),
                "length": rel.len(),
                "field_degree": rel.field().degree(),
                "verified": ok,
                "defect": verdict.as_ref().err().map(|d| d.to_string()),
            });
            let summary = format!(
                "{}: relation for ({}) with {} terms: {}",
                file.display(),
                rel.mu(),
                rel.len(),
                match &verdict {
                    Ok(()) => "VERIFIED".to_string(),
                    Err(d) => format!("FAILED ({d})"),
                }
            );
            let mut outcome = Outcome::ok(outputs, summary);
            outcome.success = ok;
            Ok(outcome)
        }
        Err(rel_err) => match library_from_json(&text) {
            Ok(lib) => {
                // library_from_json re-verifies every entry on insertion.
                let entries: Vec<Value> = lib
                    .entries()
                    .iter()
                    .map(|e| {
                        json!({
                            "provenance": e.provenance,
                            "partition": e.relation.mu().parts(),
                            "length": e.relation.len(),
                            "verified": true,
                        })
                    })
                    .collect();
                let outputs = json!({
                    "file": file.display().to_string(),
                    "kind": "library",
                    "count": lib.len(),
                    "verified": true,
                    "entries": entries,
                });
                let summary = format!(
                    "{}: library with {} certificates: all VERIFIED",
                    file.display(),
                    lib.len()
                );
                let mut outcome = Outcome::ok(outputs, summary);
                outcome.certs_used = lib
                    .entries()
                    .iter()
                    .map(|e| e.provenance.clone())
                    .collect();
                Ok(outcome)
            }
            Err(lib_err) => Err(input(format!(
                "{} parses neither as a relation ({rel_err}) nor as a library ({lib_err})",
                file.display()
            ))),
        },
    }
}

fn cmd_examples() -> Result<Outcome, CliError> {
    let lib = CertificateLibrary::builtin();
    let wire = serde_json::to_value(library_to_wire(&lib)).unwrap();
    let strata: Vec<String> = lib
        .entries()
        .iter()
        .map(|e| e.relation.mu().to_string())
        .collect();
    let outputs = json!({
        "count": lib.len(),
        "strata": strata,
        "library": wire,
    });
    let text = format!(
        "built-in library: {} certificates for strata [{}]",
        lib.len(),
        strata.join("; ")
    );
    let mut outcome = Outcome::ok(outputs, text);
    outcome.certs_used = lib.entries().iter().map(|e| e.provenance.clone()).collect();
    Ok(outcome)
}

fn cmd_orbit_rank(partition: &str, roots: &str) -> Result<Outcome, CliError> {
    let mu = parse_partition(partition)?;
    let q = NumberField::q();
    let values: Vec<i64> = roots
        .split(',')
        .map(|t| t.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|_| input(format!("bad root list {roots:?} (expected e.g. 0,1,-2)")))?;
    if values.len() != mu.len() {
        return Err(input(format!(
            "{} roots given but the partition has {} parts",
            values.len(),
            mu.len()
        )));
    }
    let proj: Vec<ProjRoot> = values.iter().map(|&v| ProjRoot::finite_int(&q, v)).collect();
    let om = orbit_matrix(&mu, &proj).map_err(input)?;
    let rank = orbit_rank(&om).map_err(input)?;
    let n = om.arrangements().len();
    let outputs = json!({
        "partition": mu.parts(),
        "canonical": mu.to_string(),
        "roots": values,
        "arrangements": n,
        "multinomial": multinomial(&mu).to_string(),
        "rank": rank,
        "full_rank": rank == n,
    });
    let text = format!(
        "orbit of ({mu}) at {values:?}: rank {rank} of {n} arrangements{}",
        if rank == n { " (full)" } else { " (deficient)" }
    );
    Ok(Outcome::ok(outputs, text))
}

fn cmd_parking(partition: &str, budget: u64) -> Result<Outcome, CliError> {
    let mu = parse_partition(partition)?;
    let cert = parking_search(&mu, budget);
    let outputs = match &cert {
        Some(c) => json!({
            "partition": mu.parts(),
            "canonical": mu.to_string(),
            "found": true,
            "a": c.a,
            "bound": c.bound,
            "count": count_permutations_geq(&mu, &c.a).to_string(),
        }),
        None => json!({
            "partition": mu.parts(),
            "canonical": mu.to_string(),
            "found": false,
        }),
    };
    let text = match &cert {
        Some(c) => format!("({mu}): parking tuple a={:?} certifies l <= {}", c.a, c.bound),
        None => format!("({mu}): no parking tuple within budget {budget}"),
    };
    let mut outcome = Outcome::ok(outputs, text);
    if let Some(c) = cert {
        outcome.certs_produced = vec![format!("parking tuple a={:?} (bound {})", c.a, c.bound)];
    }
    Ok(outcome)
}

fn cmd_numsearch(
    partition: &str,
    len: usize,
    budget: u64,
    seed: u64,
    tol: f64,
    out: &Option<PathBuf>,
) -> Result<Outcome, CliError> {
    let mu = parse_partition(partition)?;
    if len < 3 {
        return Err(input("a relation needs at least 3 terms".to_string()));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(input("tolerance must lie in (0, 1)".to_string()));
    }
    let outcome = search_relation_with(&mu, len, budget, seed, tol);
    let mut relation_file: Option<String> = None;
    let mut exactified: Option<Value> = None;
    if let Some(cand) = &outcome.accepted {
        if let Some(rel) = exactify(cand) {
            let path = out.clone().unwrap_or_else(|| {
                let tag: Vec<String> = mu.parts().iter().map(u64::to_string).collect();
                PathBuf::from(format!("relation-{}.json", tag.join("-")))
            });
            std::fs::write(&path, relation_to_json(&rel))
                .map_err(|e| input(format!("cannot write {}: {e}", path.display())))?;
            relation_file = Some(path.display().to_string());
            exactified = Some(serde_json::to_value(relation_to_wire(&rel)).unwrap());
        }
    }
    let outputs = json!({
        "partition": mu.parts(),
        "canonical": mu.to_string(),
        "length": len,
        "budget": budget,
        "seed": seed,
        "tol": tol,
        "restarts_run": outcome.restarts_run,
        "accepted": outcome.accepted.as_ref().map(|c| serde_json::to_value(c).unwrap()),
        "best_residual": outcome.best_valid.as_ref().map(|c| c.residual),
        "exactified": exactified,
        "relation_file": relation_file,
    });
    let text = match (&outcome.accepted, &relation_file) {
        (Some(c), Some(f)) => format!(
            "({mu}) length {len}: residual {:.3e} at restart {}; exactified to {f}",
            c.residual, c.restart
        ),
        (Some(c), None) => format!(
            "({mu}) length {len}: residual {:.3e} at restart {} (no exact snap)",
            c.residual, c.restart
        ),
        (None, _) => format!(
            "({mu}) length {len}: nothing below {tol:.1e} in {} restarts (best {:.3e})",
            outcome.restarts_run,
            outcome.best_valid.as_ref().map(|c| c.residual).unwrap_or(f64::NAN)
        ),
    };
    let mut result = Outcome::ok(outputs, text);
    if let Some(f) = relation_file {
        result.certs_produced = vec![f];
    }
    Ok(result)
}

/// All partitions of `d` in descending lexicographic order, capped.
fn partitions_of(d: u64, cap: usize) -> (Vec<Vec<u64>>, bool) {
    fn rec(remaining: u64, max: u64, acc: &mut Vec<u64>, out: &mut Vec<Vec<u64>>, cap: usize) -> bool {
        if out.len() >= cap {
            return true;
        }
        if remaining == 0 {
            out.push(acc.clone());
            return out.len() >= cap;
        }
        let mut v = max.min(remaining);
        while v >= 1 {
            acc.push(v);
            let truncated = rec(remaining - v, v, acc, out, cap);
            acc.pop();
            if truncated {
                return true;
            }
            v -= 1;
        }
        false
    }
    let mut out = Vec::new();
    let truncated = rec(d, d, &mut Vec::new(), &mut out, cap);
    (out, truncated)
}

fn cmd_table(degree: u64, max_rows: usize, certs: &Option<PathBuf>) -> Result<Outcome, CliError> {
    if degree == 0 {
        return Err(input("degree must be positive".to_string()));
    }
    let (lib, loaded) = load_library(certs)?;
    let (family, truncated) = partitions_of(degree, max_rows);
    let mut rows = Vec::with_capacity(family.len());
    let mut text_rows = Vec::new();
    for parts in family {
        let mu = Partition::new(parts);
        let b = bracket(&mu, &lib).map_err(|e| match e {
            BoundsError::Inconsistent { .. } => CliError::Internal(format!("mu = {mu}: {e}")),
            other => input(format!("mu = {mu}: {other}")),
        })?;
        text_rows.push(format!("  {mu}: [{}, {}]  {}", b.lower, b.upper, b.upper_cert));
        rows.push(json!({
            "partition": mu.parts(),
            "canonical": mu.to_string(),
            "lower": b.lower,
            "upper": b.upper,
            "upper_cert": b.upper_cert,
        }));
    }
    let outputs = json!({
        "degree": degree,
        "rows": rows,
        "truncated": truncated,
    });
    let text = format!(
        "partitions of {degree}{}:\n{}",
        if truncated { " (truncated)" } else { "" },
        text_rows.join("\n")
    );
    let mut outcome = Outcome::ok(outputs, text);
    outcome.certs_used = loaded;
    Ok(outcome)
}
