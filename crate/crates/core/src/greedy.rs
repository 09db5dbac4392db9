//! Greedy forward selection: at each step add the sensor with the largest
//! increase of `f`, for exactly `s` steps.
//!
//! The objective is not submodular, so there is no lazy evaluation here;
//! every remaining candidate is scored at every step. Ties go to the
//! smallest sensor index.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{SensorSet, StackedModel};
use crate::objective::{clamp_gain, info_sum, score_from_info, ScoreValue};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreedyStep {
    /// Sensor added at this step (1-based).
    pub chosen: usize,
    /// `f(S_i) - f(S_{i-1})`.
    pub gain: f64,
    pub f_after: f64,
    pub j_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub steps: Vec<GreedyStep>,
    pub selected: SensorSet,
    pub s: usize,
}

impl SelectionResult {
    pub fn score(&self) -> ScoreValue {
        let last = self.steps.last().expect("at least one greedy step");
        ScoreValue {
            j: last.j_after,
            f: last.f_after,
        }
    }
}

/// How the candidates of one step are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scan {
    #[default]
    Parallel,
    Sequential,
}

pub fn greedy_select(stacked: &StackedModel, s: usize) -> Result<SelectionResult> {
    greedy_select_with(stacked, s, Scan::Parallel)
}

pub fn greedy_select_with(stacked: &StackedModel, s: usize, scan: Scan) -> Result<SelectionResult> {
    let p = stacked.p();
    if s == 0 || s > p {
        return Err(Error::validation(format!("cardinality bound s = {s} outside 1..={p}")));
    }
    let mut selected = SensorSet::empty();
    let mut current = ScoreValue {
        j: stacked.j_empty(),
        f: 0.0,
    };
    let mut running = info_sum(stacked, &selected);
    let mut steps = Vec::with_capacity(s);

    for _ in 0..s {
        let candidates: Vec<usize> = (1..=p).filter(|&w| !selected.contains(w)).collect();
        let score = |&w: &usize| score_from_info(stacked, &(&running + stacked.sensor_info(w)));
        let scores: Vec<Result<ScoreValue>> = match scan {
            Scan::Parallel => candidates.par_iter().map(score).collect(),
            Scan::Sequential => candidates.iter().map(score).collect(),
        };

        // Sequential argmax over the ordered scores keeps the smallest-index tie rule.
        let mut best: Option<(usize, ScoreValue, f64)> = None;
        for (&w, sc) in candidates.iter().zip(scores) {
            let sc = sc?;
            let gain = sc.f - current.f;
            if best.is_none_or(|(_, _, g)| gain > g) {
                best = Some((w, sc, gain));
            }
        }
        let (chosen, after, gain) = best.expect("s <= p leaves a candidate");
        steps.push(GreedyStep {
            chosen,
            gain: clamp_gain(gain)?,
            f_after: after.f,
            j_after: after.j,
        });
        running += stacked.sensor_info(chosen);
        selected = selected.with(chosen);
        current = after;
    }

    Ok(SelectionResult { steps, selected, s })
}
