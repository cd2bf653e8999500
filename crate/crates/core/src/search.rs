//! Correlating AMRIS with externally measured robustness metrics, and the
//! `(a, b, c)` grid search.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::pearson;
use crate::strength::{amris, AmrisParams, StrengthProfile};

/// Models at or below this count get a low-confidence flag.
pub const LOW_CONFIDENCE_MODELS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    /// Accuracies: larger values mean a more robust model.
    Higher,
    /// Error rates (corruption error, calibration error): smaller is better.
    Lower,
}

impl Polarity {
    fn orient(self, v: f64) -> f64 {
        match self {
            Polarity::Higher => v,
            Polarity::Lower => -v,
        }
    }
}

/// model → metric → value, plus a polarity per metric.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricTable {
    values: BTreeMap<String, BTreeMap<String, f64>>,
    polarity: BTreeMap<String, Polarity>,
}

impl MetricTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, model: &str, metric: &str, value: f64, polarity: Polarity) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::InvalidConfig(format!("metric {metric} of {model} is not finite")));
        }
        if let Some(&p) = self.polarity.get(metric) {
            if p != polarity {
                return Err(Error::InvalidConfig(format!("metric {metric} has conflicting polarities")));
            }
        }
        self.polarity.insert(metric.to_string(), polarity);
        self.values.entry(model.to_string()).or_default().insert(metric.to_string(), value);
        Ok(())
    }

    pub fn metrics(&self) -> impl Iterator<Item = (&str, Polarity)> {
        self.polarity.iter().map(|(k, &p)| (k.as_str(), p))
    }

    pub fn get(&self, model: &str, metric: &str) -> Result<f64> {
        self.values
            .get(model)
            .and_then(|m| m.get(metric))
            .copied()
            .ok_or_else(|| Error::MissingMetric { model: model.into(), metric: metric.into() })
    }

    pub fn rows(&self) -> impl Iterator<Item = (&str, &str, f64, Polarity)> {
        self.values.iter().flat_map(move |(model, row)| {
            row.iter().map(move |(metric, &v)| (model.as_str(), metric.as_str(), v, self.polarity[metric]))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricCorrelation {
    pub metric: String,
    pub polarity: Polarity,
    /// Pearson r between AMRIS and the metric oriented so that higher = more robust.
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub params: AmrisParams,
    pub models: Vec<String>,
    pub amris: Vec<f64>,
    pub correlations: Vec<MetricCorrelation>,
    pub mean_abs_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub best: CorrelationReport,
    pub step: f64,
    pub candidates: usize,
    pub degenerate_candidates: usize,
    pub low_confidence: bool,
}

struct Prepared<'p> {
    profiles: Vec<&'p StrengthProfile>,
    metrics: Vec<(String, Polarity, Vec<f64>)>,
}

fn prepare<'p>(profiles: &'p [StrengthProfile], table: &MetricTable, min_models: usize) -> Result<Prepared<'p>> {
    if profiles.len() < min_models {
        return Err(Error::InsufficientModels(profiles.len()));
    }
    // sorted by id so the result does not depend on input order
    let mut sorted: Vec<&StrengthProfile> = profiles.iter().collect();
    sorted.sort_by(|a, b| a.model_id.cmp(&b.model_id));
    if let Some(w) = sorted.windows(2).find(|w| w[0].model_id == w[1].model_id) {
        return Err(Error::InvalidConfig(format!("duplicate model id `{}`", w[0].model_id)));
    }
    let first = sorted[0];
    if let Some(p) = sorted.iter().find(|p| p.n != first.n || p.orders != first.orders) {
        return Err(Error::InvalidConfig(format!(
            "profile `{}` does not share n and order grid with `{}`",
            p.model_id, first.model_id
        )));
    }
    let mut metrics = Vec::new();
    for (name, pol) in table.metrics() {
        let series = sorted
            .iter()
            .map(|p| table.get(&p.model_id, name).map(|v| pol.orient(v)))
            .collect::<Result<Vec<_>>>()?;
        if series.iter().all(|&v| v == series[0]) {
            return Err(Error::ConstantSeries(name.to_string()));
        }
        metrics.push((name.to_string(), pol, series));
    }
    if metrics.is_empty() {
        return Err(Error::InvalidConfig("metric table is empty".into()));
    }
    Ok(Prepared { profiles: sorted, metrics })
}

fn evaluate(prep: &Prepared<'_>, params: AmrisParams) -> Result<CorrelationReport> {
    let values = prep.profiles.iter().map(|p| amris(p, &params)).collect::<Result<Vec<_>>>()?;
    let mut correlations = Vec::with_capacity(prep.metrics.len());
    for (name, pol, series) in &prep.metrics {
        let r = pearson(&values, series).map_err(|e| match e {
            Error::ConstantSeries(_) => Error::ConstantSeries("amris".into()),
            other => other,
        })?;
        correlations.push(MetricCorrelation { metric: name.clone(), polarity: *pol, r });
    }
    let mean_abs_r = correlations.iter().map(|c| c.r.abs()).sum::<f64>() / correlations.len() as f64;
    Ok(CorrelationReport {
        params,
        models: prep.profiles.iter().map(|p| p.model_id.clone()).collect(),
        amris: values,
        correlations,
        mean_abs_r,
    })
}

/// Pearson r of AMRIS against every metric for one fixed parameter triple.
pub fn correlate(profiles: &[StrengthProfile], table: &MetricTable, params: AmrisParams) -> Result<CorrelationReport> {
    let prep = prepare(profiles, table, 2)?;
    evaluate(&prep, params)
}

/// All triples `a <= b <= c` on the lattice `{0, step, 2 step, .., 1}`, in lexicographic order.
pub fn candidate_grid(step: f64) -> Result<Vec<AmrisParams>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidConfig(format!("grid step {step} must lie in (0, 1]")));
    }
    let ticks = (1.0 / step).round() as usize;
    if ((ticks as f64) * step - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!("grid step {step} does not divide 1")));
    }
    let at = |k: usize| k as f64 / ticks as f64;
    let mut out = Vec::new();
    for a in 0..=ticks {
        for b in a..=ticks {
            for c in b..=ticks {
                out.push(AmrisParams { a: at(a), b: at(b), c: at(c) });
            }
        }
    }
    Ok(out)
}

/// Finds the `(a, b, c)` maximizing the mean |r| between AMRIS and the metrics.
///
/// Candidates that are undefined on any model (flat profile, empty band, zero
/// denominator, constant AMRIS across models) are skipped. Ties keep the
/// lexicographically smallest triple.
pub fn grid_search(profiles: &[StrengthProfile], table: &MetricTable, step: f64) -> Result<SearchReport> {
    let prep = prepare(profiles, table, 3)?;
    let grid = candidate_grid(step)?;
    let results: Vec<Option<CorrelationReport>> = grid.par_iter().map(|&p| evaluate(&prep, p).ok()).collect();

    let mut best: Option<CorrelationReport> = None;
    let mut degenerate = 0;
    for r in results {
        match r {
            None => degenerate += 1,
            Some(r) => {
                if best.as_ref().is_none_or(|b| r.mean_abs_r > b.mean_abs_r) {
                    best = Some(r);
                }
            }
        }
    }
    let best = best.ok_or(Error::AllCandidatesDegenerate)?;
    Ok(SearchReport {
        best,
        step,
        candidates: grid.len(),
        degenerate_candidates: degenerate,
        low_confidence: prep.profiles.len() <= LOW_CONFIDENCE_MODELS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(id: &str, j: Vec<f64>) -> StrengthProfile {
        StrengthProfile::new(id, 10, (0..=8).collect(), j).unwrap()
    }

    #[test]
    fn grid_has_expected_size() {
        // triples from 21 ticks with repetition: C(23, 3)
        assert_eq!(candidate_grid(0.05).unwrap().len(), 1771);
        assert!(candidate_grid(0.3).is_err());
        assert!(candidate_grid(0.0).is_err());
    }

    #[test]
    fn too_few_models() {
        let mut t = MetricTable::new();
        t.insert("a", "acc", 1.0, Polarity::Higher).unwrap();
        let ps = vec![profile("a", vec![2.0, 1.0, 1.0, 0.5, 0.5, 1.0, 1.0, 1.0, 1.0])];
        assert_eq!(grid_search(&ps, &t, 0.05).unwrap_err(), Error::InsufficientModels(1));
    }

    #[test]
    fn all_flat_profiles_are_degenerate() {
        let mut t = MetricTable::new();
        for (k, id) in ["a", "b", "c"].iter().enumerate() {
            t.insert(id, "acc", k as f64, Polarity::Higher).unwrap();
        }
        let ps: Vec<_> = ["a", "b", "c"].iter().map(|id| profile(id, vec![1.0; 9])).collect();
        assert_eq!(grid_search(&ps, &t, 0.25).unwrap_err(), Error::AllCandidatesDegenerate);
    }

    #[test]
    fn missing_metric_is_reported() {
        let mut t = MetricTable::new();
        t.insert("a", "acc", 1.0, Polarity::Higher).unwrap();
        t.insert("b", "acc", 2.0, Polarity::Higher).unwrap();
        let ps: Vec<_> = ["a", "b", "c"]
            .iter()
            .map(|id| profile(id, vec![2.0, 1.0, 1.0, 0.5, 0.5, 1.0, 1.0, 1.0, 1.0]))
            .collect();
        assert!(matches!(grid_search(&ps, &t, 0.05), Err(Error::MissingMetric { .. })));
    }

    #[test]
    fn polarity_flips_sign_of_r() {
        let ps = vec![
            profile("a", vec![2.0, 1.0, 1.0, 0.5, 0.5, 1.0, 1.0, 1.0, 1.0]),
            profile("b", vec![1.8, 1.0, 1.0, 0.6, 0.8, 1.0, 1.0, 1.0, 0.8]),
            profile("c", vec![1.2, 0.9, 1.0, 0.9, 1.2, 1.1, 1.0, 0.9, 0.8]),
        ];
        let params = AmrisParams::new(0.2, 0.4, 0.6).unwrap();
        let vals: Vec<f64> = ps.iter().map(|p| amris(p, &params).unwrap()).collect();
        let mut t = MetricTable::new();
        for (p, v) in ps.iter().zip(&vals) {
            t.insert(&p.model_id, "err", -3.0 * v + 10.0, Polarity::Lower).unwrap();
        }
        let r = correlate(&ps, &t, params).unwrap();
        assert!((r.correlations[0].r - 1.0).abs() < 1e-12);
    }
}
