//! Acceptance suite: runs every shipped experiment spec in thread pools of 1, 4 and 8
//! workers, checks every row verdict and wall-clock budget, and compares the CSV reports
//! byte for byte across pool sizes.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use grassradon_cli::{csv_string, run_experiment, ExperimentSpec};

const POOLS: [usize; 3] = [1, 4, 8];
/// Pool whose wall-clock time is held against the budget.
const TIMED_POOL: usize = 8;

struct Criterion {
    id: usize,
    title: &'static str,
    specs: &'static [&'static str],
    budget: Option<Duration>,
}

const CRITERIA: [Criterion; 8] = [
    Criterion { id: 1, title: "witness values 1/2 and 1/π", specs: &["c1_remark"], budget: Some(Duration::from_secs(1)) },
    Criterion { id: 2, title: "Erdélyi–Kober identities", specs: &["c2_ek_identity"], budget: Some(Duration::from_secs(1)) },
    Criterion {
        id: 3,
        title: "radial reduction (3,1), (3,2), (4,2)",
        specs: &["c3_radial_31", "c3_radial_32", "c3_radial_42"],
        budget: Some(Duration::from_secs(10)),
    },
    Criterion { id: 4, title: "Funk band-8 round trip", specs: &["c4_funk"], budget: Some(Duration::from_secs(30)) },
    Criterion {
        id: 5,
        title: "quasi-radial inversion, n = 3",
        specs: &["c5_invert_qr"],
        budget: Some(Duration::from_secs(120)),
    },
    Criterion {
        id: 6,
        title: "general inversion, n = 4, ϰ = 1",
        specs: &["c6_general_gaussian", "c6_general_shifted"],
        budget: Some(Duration::from_secs(600)),
    },
    Criterion {
        id: 7,
        title: "dual identity and dual inversion",
        specs: &["c7_dual_general"],
        budget: Some(Duration::from_secs(120)),
    },
    Criterion {
        id: 8,
        title: "Monte Carlo duality pairing",
        specs: &["c8_duality"],
        budget: Some(Duration::from_secs(60)),
    },
];

struct Outcome {
    rows_pass: bool,
    elapsed: Duration,
    csv: Vec<String>,
    note: String,
}

fn load(name: &str) -> ExperimentSpec {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("specs").join(format!("{name}.toml"));
    ExperimentSpec::from_file(&path).unwrap_or_else(|e| panic!("{name}: {e:#}"))
}

fn run_in_pool(spec: &ExperimentSpec, threads: usize) -> (Result<String, String>, bool, Duration) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
    let start = Instant::now();
    let rows = pool.install(|| run_experiment(spec));
    let elapsed = start.elapsed();
    match rows {
        Ok(rows) => {
            let pass = rows.iter().all(|r| r.pass());
            for r in rows.iter().filter(|r| !r.pass()) {
                eprintln!("  {}: failing row {} at {}: rel_err {}", spec.name, r.check, r.point, r.rel_err());
            }
            (csv_string(&rows).map_err(|e| format!("{e:#}")), pass, elapsed)
        }
        Err(e) => (Err(format!("{e:#}")), false, elapsed),
    }
}

fn run_criterion(c: &Criterion) -> Vec<Outcome> {
    POOLS
        .iter()
        .map(|&threads| {
            let mut outcome =
                Outcome { rows_pass: true, elapsed: Duration::ZERO, csv: Vec::new(), note: String::new() };
            for name in c.specs {
                let spec = load(name);
                let (csv, pass, elapsed) = run_in_pool(&spec, threads);
                outcome.rows_pass &= pass;
                outcome.elapsed += elapsed;
                match csv {
                    Ok(text) => outcome.csv.push(text),
                    Err(e) => {
                        outcome.note = format!("{name}: {e}");
                        outcome.csv.push(String::new());
                    }
                }
            }
            eprintln!("  criterion {} with {threads} thread(s): {:.1?}", c.id, outcome.elapsed);
            outcome
        })
        .collect()
}

// Runs without the libtest harness so the per-criterion lines are always printed.
fn main() {
    let mut verdicts = Vec::new();
    let mut identical = true;
    for c in &CRITERIA {
        let outcomes = run_criterion(c);
        let timed = &outcomes[POOLS.iter().position(|&t| t == TIMED_POOL).unwrap()];
        let within_budget = c.budget.is_none_or(|b| timed.elapsed < b);
        let pass = outcomes.iter().all(|o| o.rows_pass && o.note.is_empty()) && within_budget;
        let budget = c.budget.map_or(String::new(), |b| format!(", budget {b:?}"));
        let note = outcomes.iter().find(|o| !o.note.is_empty()).map_or(String::new(), |o| format!(" [{}]", o.note));
        println!(
            "criterion {}: {} — {} ({:.1?}{budget}){note}",
            c.id,
            if pass { "PASS" } else { "FAIL" },
            c.title,
            timed.elapsed
        );
        let same = outcomes.windows(2).all(|w| w[0].csv == w[1].csv);
        if !same {
            eprintln!("  criterion {}: reports differ between thread counts", c.id);
        }
        identical &= same;
        verdicts.push(pass);
    }
    println!(
        "criterion 9: {} — reports byte-identical across {POOLS:?} threads",
        if identical { "PASS" } else { "FAIL" }
    );
    verdicts.push(identical);
    let failed: Vec<usize> = verdicts.iter().enumerate().filter(|(_, p)| !**p).map(|(i, _)| i + 1).collect();
    if !failed.is_empty() {
        eprintln!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
