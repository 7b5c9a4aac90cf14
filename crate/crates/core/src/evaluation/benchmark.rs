use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::correlation::{plcc, srocc};
use super::manifest::StimulusRecord;
use super::regression::{fit_regression_form, RegressionForm};
use super::EvalError;
use crate::metrics::{evaluate, MetricOptions, MetricVariant, PreparedCloud};
use crate::ply::read_ply;

/// Name of the report computed over every stimulus.
pub const POOLED_GROUP: &str = "All";

const MIN_GROUP_SIZE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BenchmarkSettings {
    pub options: MetricOptions,
    pub form: RegressionForm,
}

/// Pooled objective score of one stimulus under one variant; `None` is
/// infinite quality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimulusScore {
    pub stimulus_id: String,
    pub group: String,
    pub variant: MetricVariant,
    pub score: Option<f64>,
    pub mos: f64,
}

/// Regression and correlation results for one variant over one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub group: String,
    pub variant: MetricVariant,
    pub n: usize,
    /// Stimuli left out because their score is infinite.
    pub excluded_infinite: usize,
    pub coefficients: [f64; 4],
    pub stimulus_ids: Vec<String>,
    pub predicted_mos: Vec<f64>,
    pub plcc: f64,
    pub srocc: f64,
    pub monotone_fit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkOutcome {
    pub reports: Vec<CorrelationReport>,
    pub scores: Vec<StimulusScore>,
    pub warnings: Vec<String>,
}

fn load(
    path: &Path,
    stimulus_id: &str,
    options: &MetricOptions,
) -> Result<PreparedCloud, EvalError> {
    let fail = |message: String| EvalError::Load {
        stimulus_id: stimulus_id.to_string(),
        path: path.display().to_string(),
        message,
    };
    let file = std::fs::File::open(path).map_err(|e| fail(e.to_string()))?;
    let cloud = read_ply(std::io::BufReader::new(file)).map_err(|e| fail(e.to_string()))?;
    PreparedCloud::new(cloud, options.normal_k, options.execution).map_err(|e| fail(e.to_string()))
}

/// Scores every stimulus with every variant, then fits and correlates per
/// group and over the pooled set. Clouds are loaded once per path and
/// reference-side estimates are shared across variants.
pub fn run_benchmark(
    manifest: &[StimulusRecord],
    variants: &[MetricVariant],
    settings: &BenchmarkSettings,
) -> Result<BenchmarkOutcome, EvalError> {
    if variants.is_empty() {
        return Err(EvalError::NoVariants);
    }
    for v in variants {
        v.peak.validate().map_err(|source| EvalError::Metric {
            stimulus_id: "-".into(),
            variant: v.label(),
            source,
        })?;
    }
    for rec in manifest {
        for p in [&rec.reference, &rec.degraded] {
            if !p.is_file() {
                return Err(EvalError::MissingFile {
                    stimulus_id: rec.stimulus_id.clone(),
                    path: p.display().to_string(),
                });
            }
        }
    }

    let options = &settings.options;
    let mut paths: Vec<(&PathBuf, &str)> = Vec::new();
    let mut slot: HashMap<&PathBuf, usize> = HashMap::new();
    for rec in manifest {
        for p in [&rec.reference, &rec.degraded] {
            slot.entry(p).or_insert_with(|| {
                paths.push((p, rec.stimulus_id.as_str()));
                paths.len() - 1
            });
        }
    }
    let clouds: Vec<Arc<PreparedCloud>> = options.execution.try_map(paths.len(), |i| {
        load(paths[i].0, paths[i].1, options).map(Arc::new)
    })?;

    let jobs: Vec<(usize, usize)> = (0..manifest.len())
        .flat_map(|s| (0..variants.len()).map(move |v| (s, v)))
        .collect();
    let values = options.execution.try_map(jobs.len(), |j| {
        let (s, v) = jobs[j];
        let rec = &manifest[s];
        let reference = &clouds[slot[&rec.reference]];
        let degraded = &clouds[slot[&rec.degraded]];
        evaluate(reference, degraded, &variants[v], options)
            .map(|r| r.psnr_pooled)
            .map_err(|source| EvalError::Metric {
                stimulus_id: rec.stimulus_id.clone(),
                variant: variants[v].label(),
                source,
            })
    })?;
    let scores: Vec<StimulusScore> = jobs
        .iter()
        .zip(values)
        .map(|(&(s, v), score)| StimulusScore {
            stimulus_id: manifest[s].stimulus_id.clone(),
            group: manifest[s].group.clone(),
            variant: variants[v],
            score,
            mos: manifest[s].mos,
        })
        .collect();

    let mut groups: Vec<String> = manifest
        .iter()
        .map(|r| r.group.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    groups.push(POOLED_GROUP.to_string());

    let mut reports = Vec::new();
    let mut warnings = Vec::new();
    for (vi, variant) in variants.iter().enumerate() {
        for group in &groups {
            let members: Vec<&StimulusScore> = scores
                .iter()
                .skip(vi)
                .step_by(variants.len())
                .filter(|s| group == POOLED_GROUP || &s.group == group)
                .collect();
            match correlate(group, variant, &members, settings.form) {
                Ok(report) => reports.push(report),
                Err(e) => warnings.push(format!("{} / {group}: skipped ({e})", variant.label())),
            }
        }
    }
    Ok(BenchmarkOutcome {
        reports,
        scores,
        warnings,
    })
}

fn correlate(
    group: &str,
    variant: &MetricVariant,
    members: &[&StimulusScore],
    form: RegressionForm,
) -> Result<CorrelationReport, EvalError> {
    let finite: Vec<&StimulusScore> = members
        .iter()
        .copied()
        .filter(|s| s.score.is_some())
        .collect();
    if finite.len() < MIN_GROUP_SIZE {
        return Err(EvalError::TooFewSamples {
            needed: MIN_GROUP_SIZE,
            actual: finite.len(),
        });
    }
    let x: Vec<f64> = finite.iter().map(|s| s.score.expect("filtered")).collect();
    let mos: Vec<f64> = finite.iter().map(|s| s.mos).collect();
    let fit = fit_regression_form(&x, &mos, form)?;
    let predicted: Vec<f64> = x.iter().map(|&v| fit.predict(v)).collect();
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    Ok(CorrelationReport {
        group: group.to_string(),
        variant: *variant,
        n: finite.len(),
        excluded_infinite: members.len() - finite.len(),
        coefficients: fit.coefficients,
        stimulus_ids: finite.iter().map(|s| s.stimulus_id.clone()).collect(),
        plcc: plcc(&predicted, &mos)?,
        srocc: srocc(&predicted, &mos)?,
        predicted_mos: predicted,
        monotone_fit: fit.is_monotone_on(lo, hi),
    })
}
