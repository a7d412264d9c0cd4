//! Time-stamped state sequences with named per-step diagnostic channels.

use alloc::string::String;
use alloc::vec::Vec;

/// A trajectory: one labelled state row per time knot, plus named diagnostic
/// channels (energy, dissipation residual, ...) of the same length.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub labels: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub diagnostics: Vec<(String, Vec<f64>)>,
}

impl Trajectory {
    pub fn new(labels: Vec<String>) -> Self {
        Self { labels, times: Vec::new(), states: Vec::new(), diagnostics: Vec::new() }
    }

    pub fn push(&mut self, t: f64, state: Vec<f64>) {
        debug_assert_eq!(state.len(), self.labels.len());
        self.times.push(t);
        self.states.push(state);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of a state column by label.
    pub fn column(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// All values of one state column.
    pub fn column_values(&self, idx: usize) -> Vec<f64> {
        self.states.iter().map(|row| row[idx]).collect()
    }

    pub fn diagnostic(&self, name: &str) -> Option<&[f64]> {
        self.diagnostics
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn set_diagnostic(&mut self, name: &str, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.times.len());
        if let Some(entry) = self.diagnostics.iter_mut().find(|(n, _)| n == name) {
            entry.1 = values;
        } else {
            self.diagnostics.push((String::from(name), values));
        }
    }

    /// Largest absolute difference over shared knots of shared state columns.
    pub fn sup_deviation(&self, other: &Trajectory, columns: &[&str]) -> f64 {
        let mut sup = 0.0_f64;
        let knots = self.len().min(other.len());
        for label in columns {
            let (Some(i), Some(j)) = (self.column(label), other.column(label)) else {
                continue;
            };
            for k in 0..knots {
                sup = sup.max((self.states[k][i] - other.states[k][j]).abs());
            }
        }
        sup
    }
}
