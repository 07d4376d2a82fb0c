//! Benchmark harness: run solvers over a suite of instances and emit a CSV
//! report.

use std::time::Instant;

use crate::model::Instance;
use crate::solvers::{solve, Algo, SolveOptions};

#[derive(Debug, Clone)]
pub struct BenchEntry {
    pub id: String,
    pub instance: Instance,
    pub algo: Algo,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRow {
    pub id: String,
    pub n: usize,
    pub m: usize,
    pub t: usize,
    pub algo: String,
    /// "true", "false", or "error:<code>".
    pub feasible: String,
    pub cost: Option<u64>,
    pub redirections: Option<usize>,
    pub wall_time_ms: u128,
    pub guesses: u64,
}

/// Runs every entry in order. Failures become report rows, not errors.
pub fn bench(entries: &[BenchEntry], step_limit: u64) -> Vec<BenchRow> {
    entries
        .iter()
        .map(|entry| {
            let stats = *entry.instance.stats();
            let started = Instant::now();
            let options = SolveOptions {
                algo: entry.algo,
                epsilon: entry.epsilon,
                step_limit,
                target_whitelist: None,
            };
            let (feasible, cost, redirections, guesses, algo) =
                match solve(&entry.instance, &options) {
                    Ok(outcome) => {
                        let algo = outcome.report.algo_used.to_owned();
                        match outcome.solution {
                            Some(sol) => (
                                "true".to_owned(),
                                Some(sol.total_cost),
                                Some(sol.num_redirections()),
                                outcome.report.guesses_explored,
                                algo,
                            ),
                            None => (
                                "false".to_owned(),
                                None,
                                None,
                                outcome.report.guesses_explored,
                                algo,
                            ),
                        }
                    }
                    Err(e) => (format!("error:{}", e.code()), None, None, 0, entry.algo.name().to_owned()),
                };
            BenchRow {
                id: entry.id.clone(),
                n: stats.n,
                m: stats.m,
                t: stats.t,
                algo,
                feasible,
                cost,
                redirections,
                wall_time_ms: started.elapsed().as_millis(),
                guesses,
            }
        })
        .collect()
}

/// RFC-4180 CSV encoding of a report, header included, rows in input order.
pub fn rows_to_csv(rows: &[BenchRow]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "id",
            "n",
            "m",
            "t",
            "algo",
            "feasible",
            "cost",
            "redirections",
            "wall_time_ms",
            "guesses",
        ])
        .expect("in-memory write");
    for row in rows {
        writer
            .write_record([
                row.id.as_str(),
                &row.n.to_string(),
                &row.m.to_string(),
                &row.t.to_string(),
                &row.algo,
                &row.feasible,
                &row.cost.map(|c| c.to_string()).unwrap_or_default(),
                &row.redirections.map(|r| r.to_string()).unwrap_or_default(),
                &row.wall_time_ms.to_string(),
                &row.guesses.to_string(),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}
