//! Key-value records and numeric tables emitted by experiments.

use crate::dynamics::EvolutionTrace;

/// Numeric table written as CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Lossless decimal rendering of a float (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:.16e}")
    }
}

/// Ordered `key = value` entries.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Record(pub Vec<(String, String)>);

impl Record {
    pub fn new() -> Self {
        Record(Vec::new())
    }

    pub fn num(&mut self, key: &str, x: f64) -> &mut Self {
        self.0.push((key.to_string(), fmt_f64(x)));
        self
    }

    pub fn int(&mut self, key: &str, x: usize) -> &mut Self {
        self.0.push((key.to_string(), x.to_string()));
        self
    }

    pub fn flag(&mut self, key: &str, b: bool) -> &mut Self {
        self.0.push((key.to_string(), b.to_string()));
        self
    }

    pub fn text(&mut self, key: &str, s: &str) -> &mut Self {
        self.0.push((key.to_string(), s.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.0 {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(v);
            s.push('\n');
        }
        s
    }
}

/// Anything an experiment returns: a summary record plus tables.
pub trait Report {
    fn record(&self) -> Record;
    fn tables(&self) -> Vec<Table> {
        Vec::new()
    }
}

/// Trace table with the columns `t,mass,energy,bilap,grad,Q,virial`.
pub fn trace_table(trace: &EvolutionTrace) -> Table {
    let mut t = Table::new("trace", &["t", "mass", "energy", "bilap", "grad", "Q", "virial"]);
    for i in 0..trace.len() {
        t.push(vec![
            trace.times[i],
            trace.mass_series[i],
            trace.energy_series[i],
            trace.bilap_norm_series[i],
            trace.grad_norm_series[i],
            trace.q_series[i],
            trace.virial_series[i],
        ]);
    }
    t
}

pub fn trace_record(trace: &EvolutionTrace) -> Record {
    let mut r = Record::new();
    r.text("verdict", trace.verdict.as_str())
        .int("outputs", trace.len())
        .int("steps", trace.steps)
        .int("halvings", trace.halvings as usize)
        .num("final_tau", trace.tau)
        .num("final_time", trace.times.last().copied().unwrap_or(0.0))
        .num("mass_deviation", trace.mass_deviation())
        .num("energy_deviation", trace.energy_deviation())
        .num("bilap_growth", trace.bilap_growth());
    r
}

impl Report for EvolutionTrace {
    fn record(&self) -> Record {
        trace_record(self)
    }

    fn tables(&self) -> Vec<Table> {
        vec![trace_table(self)]
    }
}
