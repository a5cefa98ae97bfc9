use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::cascade::{cascade_predict, Cascade};
use super::model::ScenarioModel;
use super::scenario::Scenario;
use crate::error::{Error, Result};
use crate::scene::{LinkStatus, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub iteration: usize,
    pub accuracy: f64,
}

/// `confusion[true][predicted]`, classes in the order absent, unblocked,
/// blocked.
pub type Confusion = [[usize; 3]; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub scenario: Scenario,
    pub accuracy: f64,
    pub n_test: usize,
    pub confusion: Confusion,
    /// Set for the cascade (both) scenario.
    pub rate_threshold: Option<f64>,
    /// Kept out of the report file so reruns stay byte-identical; written
    /// to `timing.json` instead.
    #[serde(skip_serializing, default)]
    pub wall_time_s: f64,
    pub curve: Vec<CurvePoint>,
}

impl EvalReport {
    pub fn curve_csv(&self) -> String {
        let mut s = String::from("iteration,accuracy\n");
        for p in &self.curve {
            let _ = writeln!(s, "{},{}", p.iteration, p.accuracy);
        }
        s
    }

    pub fn confusion_csv(&self) -> String {
        let mut s = String::from("true\\predicted,absent,unblocked,blocked\n");
        for (l, row) in LinkStatus::ALL.iter().zip(&self.confusion) {
            let _ = writeln!(s, "{},{},{},{}", l.name(), row[0], row[1], row[2]);
        }
        s
    }
}

pub fn confusion_matrix(pairs: impl IntoIterator<Item = (LinkStatus, LinkStatus)>) -> Confusion {
    let mut m = [[0usize; 3]; 3];
    for (truth, pred) in pairs {
        m[truth.class_index()][pred.class_index()] += 1;
    }
    m
}

pub fn accuracy_of(m: &Confusion) -> f64 {
    let total: usize = m.iter().flatten().sum();
    let trace: usize = (0..3).map(|i| m[i][i]).sum();
    trace as f64 / total.max(1) as f64
}

/// Training-history accuracy curve (per-iteration batch accuracy).
pub fn training_curve(model: &ScenarioModel) -> Vec<CurvePoint> {
    model
        .history
        .iter()
        .map(|r| CurvePoint {
            iteration: r.iteration,
            accuracy: r.train_accuracy,
        })
        .collect()
}

/// Scores one scenario on the test set. The cascade scenario predicts with
/// `cascade` and reports the curve of its jointly trained model; the other
/// scenarios predict with their own model. `wall_time_s` covers prediction
/// only.
pub fn evaluate_scenario(
    test_set: &[&Sample],
    scenario: Scenario,
    model: &ScenarioModel,
    cascade: &Cascade,
    pooled_size: usize,
) -> Result<EvalReport> {
    if test_set.is_empty() {
        return Err(Error::InvalidParameter("test set is empty".into()));
    }
    if model.scenario != scenario {
        return Err(Error::InvalidParameter(format!(
            "model was trained for scenario {} but {} was requested",
            model.scenario, scenario
        )));
    }
    let start = Instant::now();
    let mut pairs = Vec::with_capacity(test_set.len());
    for s in test_set {
        let pred = match scenario {
            Scenario::Both => cascade_predict(&s.image, s.ris_rate, cascade),
            _ => model.predict(s, pooled_size)?,
        };
        pairs.push((s.label, pred));
    }
    let confusion = confusion_matrix(pairs);
    Ok(EvalReport {
        scenario,
        accuracy: accuracy_of(&confusion),
        n_test: test_set.len(),
        confusion,
        rate_threshold: (scenario == Scenario::Both).then_some(cascade.rate_threshold),
        wall_time_s: start.elapsed().as_secs_f64(),
        curve: training_curve(model),
    })
}
