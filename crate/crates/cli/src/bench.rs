use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub const REPORT_VERSION: u32 = 1;

/// What one episode contributed to the report.
#[derive(Debug, Clone, PartialEq)]
pub enum EpisodeRecord {
    Finished { outcome: String, mutations: usize, oracle_steps: usize, plan_steps: Option<usize> },
    Failed { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRow {
    pub id: String,
    pub case: Option<u32>,
    pub task: String,
    pub repetitions: usize,
    pub successes: usize,
    pub exhausted: usize,
    pub budget: usize,
    /// Episodes that stopped on a backend or scenario error.
    pub errors: usize,
    pub success_rate: f64,
    pub mean_refinements: f64,
    pub mean_oracle_steps: f64,
    /// Length of the last successful plan.
    pub plan_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub error_messages: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRow {
    pub task: String,
    pub cases: Vec<String>,
    pub episodes: usize,
    pub successes: usize,
    pub success_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub report_version: u32,
    pub backend: String,
    pub repetitions: usize,
    pub cases: Vec<CaseRow>,
    pub tasks: Vec<TaskRow>,
    /// Only filled when timings are requested, so reports stay byte-stable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

fn mean(xs: impl Iterator<Item = usize>) -> f64 {
    let v: Vec<usize> = xs.collect();
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<usize>() as f64 / v.len() as f64
    }
}

/// Summarises `(scenario id, case number, task)` rows and their episodes.
pub fn build_report(
    backend: &str,
    repetitions: usize,
    rows: Vec<((String, Option<u32>, String), Vec<EpisodeRecord>)>,
) -> BenchReport {
    let mut cases = Vec::new();
    for ((id, case, task), episodes) in rows {
        let finished: Vec<(&String, usize, usize, Option<usize>)> = episodes
            .iter()
            .filter_map(|e| match e {
                EpisodeRecord::Finished { outcome, mutations, oracle_steps, plan_steps } => {
                    Some((outcome, *mutations, *oracle_steps, *plan_steps))
                }
                EpisodeRecord::Failed { .. } => None,
            })
            .collect();
        let count = |o: &str| finished.iter().filter(|f| f.0 == o).count();
        let successes = count("success");
        let error_messages: Vec<String> = episodes
            .iter()
            .filter_map(|e| match e {
                EpisodeRecord::Failed { message } => Some(message.clone()),
                EpisodeRecord::Finished { .. } => None,
            })
            .collect();
        cases.push(CaseRow {
            id,
            case,
            task,
            repetitions: episodes.len(),
            successes,
            exhausted: count("exhausted"),
            budget: count("budget"),
            errors: error_messages.len(),
            success_rate: if episodes.is_empty() { 0.0 } else { successes as f64 / episodes.len() as f64 },
            mean_refinements: mean(finished.iter().map(|f| f.1)),
            mean_oracle_steps: mean(finished.iter().map(|f| f.2)),
            plan_steps: finished.iter().rev().find(|f| f.0 == "success").and_then(|f| f.3),
            error_messages,
        });
    }
    let mut by_task: BTreeMap<String, TaskRow> = BTreeMap::new();
    for c in &cases {
        let t = by_task.entry(c.task.clone()).or_insert_with(|| TaskRow {
            task: c.task.clone(),
            cases: Vec::new(),
            episodes: 0,
            successes: 0,
            success_rate: 0.0,
        });
        t.cases.push(c.id.clone());
        t.episodes += c.repetitions;
        t.successes += c.successes;
    }
    let tasks = by_task
        .into_values()
        .map(|mut t| {
            t.success_rate = if t.episodes == 0 { 0.0 } else { t.successes as f64 / t.episodes as f64 };
            t
        })
        .collect();
    BenchReport { report_version: REPORT_VERSION, backend: backend.to_string(), repetitions, cases, tasks, wall_time_ms: None }
}

impl BenchReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "backend: {}   repetitions: {}", self.backend, self.repetitions);
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "{:<14} {:<14} {:>9} {:>8} {:>12} {:>13} {:>10}",
            "case", "task", "success", "rate", "refinements", "oracle steps", "plan steps"
        );
        for c in &self.cases {
            let plan = c.plan_steps.map(|n| n.to_string()).unwrap_or_else(|| "-".to_string());
            let _ = writeln!(
                s,
                "{:<14} {:<14} {:>9} {:>7.0}% {:>12.2} {:>13.2} {:>10}",
                c.id,
                c.task,
                format!("{}/{}", c.successes, c.repetitions),
                c.success_rate * 100.0,
                c.mean_refinements,
                c.mean_oracle_steps,
                plan
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<14} {:<24} {:>9} {:>8}", "task", "cases", "success", "rate");
        for t in &self.tasks {
            let _ = writeln!(
                s,
                "{:<14} {:<24} {:>9} {:>7.1}%",
                t.task,
                t.cases.join(","),
                format!("{}/{}", t.successes, t.episodes),
                t.success_rate * 100.0
            );
        }
        let errors: Vec<&CaseRow> = self.cases.iter().filter(|c| c.errors > 0).collect();
        if !errors.is_empty() {
            let _ = writeln!(s);
            for c in errors {
                let _ = writeln!(s, "{}: {} episode error(s): {}", c.id, c.errors, c.error_messages[0]);
            }
        }
        if let Some(ms) = self.wall_time_ms {
            let _ = writeln!(s, "\nwall time: {:.1} s", ms as f64 / 1000.0);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fin(outcome: &str, m: usize) -> EpisodeRecord {
        EpisodeRecord::Finished { outcome: outcome.into(), mutations: m, oracle_steps: 10, plan_steps: Some(3) }
    }

    #[test]
    fn rates_are_successes_over_repetitions() {
        let r = build_report(
            "scripted",
            4,
            vec![
                (("case2".into(), Some(2), "store fruit".into()), vec![fin("success", 1); 4]),
                (
                    ("case3".into(), Some(3), "heat sandwich".into()),
                    vec![fin("success", 4), fin("exhausted", 2), EpisodeRecord::Failed { message: "x".into() }, fin("success", 4)],
                ),
                (("case4".into(), Some(4), "heat sandwich".into()), vec![fin("budget", 0); 4]),
            ],
        );
        assert_eq!(r.cases[0].success_rate, 1.0);
        assert_eq!(r.cases[1].success_rate, 0.5);
        assert_eq!(r.cases[1].errors, 1);
        assert!((r.cases[1].mean_refinements - 10.0 / 3.0).abs() < 1e-12);
        let heat = r.tasks.iter().find(|t| t.task == "heat sandwich").unwrap();
        assert_eq!((heat.successes, heat.episodes), (2, 8));
        assert!(r.to_text().contains("case3"));
    }
}
