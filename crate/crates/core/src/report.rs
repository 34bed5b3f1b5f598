use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Only for statistical checks that lack power; deterministic checks never
    /// produce this.
    Inconclusive,
}

impl Verdict {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 3,
            Verdict::Inconclusive => 4,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub label: String,
    pub value: f64,
    pub std_error: f64,
}

impl Statistic {
    pub fn new(label: impl Into<String>, value: f64, std_error: f64) -> Self {
        Statistic {
            label: label.into(),
            value,
            std_error,
        }
    }

    pub fn exact(label: impl Into<String>, value: f64) -> Self {
        Self::new(label, value, 0.0)
    }
}

/// Outcome of one experiment: verdict, every number that went into it, and the
/// inputs needed to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub verdict: Verdict,
    pub statistics: Vec<Statistic>,
    pub inputs: serde_json::Value,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>, inputs: serde_json::Value, seed: Option<u64>) -> Self {
        ExperimentReport {
            name: name.into(),
            verdict: Verdict::Pass,
            statistics: Vec::new(),
            inputs,
            seed,
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, stat: Statistic) {
        self.statistics.push(stat);
    }

    pub fn stat(&self, label: &str) -> Option<&Statistic> {
        self.statistics.iter().find(|s| s.label == label)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialisation cannot fail")
    }

    /// Plain-text table for terminals.
    pub fn render_table(&self) -> String {
        let width = self
            .statistics
            .iter()
            .map(|s| s.label.len())
            .max()
            .unwrap_or(0)
            .max(9);
        let mut out = format!("{}: {}\n", self.name, self.verdict);
        out.push_str(&format!(
            "  {:<width$}  {:>22}  {:>12}\n",
            "statistic", "value", "std_error"
        ));
        for s in &self.statistics {
            out.push_str(&format!(
                "  {:<width$}  {:>22.12e}  {:>12.4e}\n",
                s.label, s.value, s.std_error
            ));
        }
        for n in &self.notes {
            out.push_str(&format!("  note: {n}\n"));
        }
        out
    }
}
