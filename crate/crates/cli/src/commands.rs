use std::path::{Path, PathBuf};

use pas::bench::{method_mean, rows_to_csv, run_seed, sort_rows, Method, Suite, DEFAULT_SHIFT};
use pas::data::{
    encode_csv, encode_labels, load_features, load_labeled, load_raw_labels, LabelMapping,
};
use pas::diagnostics::{anchoring_report, kliep_fit, KliepOptions};
use pas::persist::{model_from_json, model_to_json};
use pas::synth::{synth_shifted_pair, Shift, SynthConfig};
use pas::{fit_progressive, predict as predict_labels, PasConfig, PasError, Result};
use rayon::prelude::*;

use crate::output::write_atomic;
use crate::{BenchArgs, DiagnoseArgs, FitArgs, PredictArgs, SynthArgs};

pub fn fit(a: &FitArgs) -> Result<()> {
    let (source, mapping) = load_labeled(&a.source, &a.labels)?;
    let target = load_features(&a.target, None)?;
    let eval = match &a.eval_labels {
        Some(p) => Some(mapping.encode(&load_raw_labels(p)?)?),
        None => None,
    };
    let config = PasConfig {
        dim: a.dim,
        schedule_step: a.step,
        ..PasConfig::default()
    };
    let fit = fit_progressive(
        &source.features,
        &source.labels,
        &target,
        &config,
        eval.as_deref(),
    )?;
    let json = model_to_json(&fit.model, Some(&mapping.values));
    write_atomic(&a.out_model, json.as_bytes())?;
    write_atomic(&a.trace_csv, fit.trace.to_csv().as_bytes())
}

pub fn predict(a: &PredictArgs) -> Result<()> {
    let stored = model_from_json(&std::fs::read_to_string(&a.model)?)?;
    let x = load_features(&a.features, None)?;
    let pred = predict_labels(&stored.model, &x)?;
    let text = match &stored.class_labels {
        Some(values) => {
            let map = LabelMapping {
                values: values.clone(),
            };
            encode_labels(&pred.iter().map(|&k| map.decode(k)).collect::<Vec<_>>())
        }
        None => encode_labels(&pred),
    };
    write_atomic(&a.out, text.as_bytes())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn synth(a: &SynthArgs) -> Result<()> {
    let cfg = SynthConfig {
        num_classes: a.classes,
        dim: a.dim,
        per_class: a.per_class,
        shift: Shift {
            rotation: a.rotation,
            translation: a.translation,
            noise: a.noise,
        },
        pda_keep: a.pda_keep.clone(),
        seed: a.seed,
        separation: a.separation,
        spread: a.spread,
        thickness: a.thickness,
    };
    let (source, target) = synth_shifted_pair(&cfg)?;
    let truth = target.true_labels.expect("generator records ground truth");
    let files = [
        ("_source.csv", encode_csv(&source.features)),
        ("_source_labels.txt", encode_labels(source.labels.labels())),
        ("_target.csv", encode_csv(&target.features)),
        ("_target_labels.txt", encode_labels(&truth)),
    ];
    for (suffix, body) in files {
        write_atomic(&with_suffix(&a.out_prefix, suffix), body.as_bytes())?;
    }
    Ok(())
}

fn thread_cap() -> Result<Option<usize>> {
    match std::env::var("PAS_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(PasError::Config(format!(
                "PAS_THREADS must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

pub fn bench(a: &BenchArgs) -> Result<()> {
    let suite: Suite = a.suite.parse().map_err(PasError::Config)?;
    if a.seeds == 0 {
        return Err(PasError::Config("--seeds must be at least 1".into()));
    }
    let shift = Shift {
        rotation: a.rotation.unwrap_or(DEFAULT_SHIFT.rotation),
        translation: a.translation.unwrap_or(DEFAULT_SHIFT.translation),
        noise: a.noise.unwrap_or(DEFAULT_SHIFT.noise),
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| PasError::Config(e.to_string()))?;
    let outcomes: Vec<_> = pool.install(|| {
        (0..a.seeds)
            .into_par_iter()
            .map(|s| run_seed(suite, s, shift))
            .collect()
    });
    let mut rows = Vec::new();
    for o in outcomes {
        rows.extend(o?.rows);
    }
    sort_rows(&mut rows);
    write_atomic(&a.out_csv, rows_to_csv(&rows).as_bytes())?;
    for m in Method::ALL {
        println!("{:<6} {:.4}", m.name(), method_mean(&rows, m));
    }
    Ok(())
}

pub fn diagnose(a: &DiagnoseArgs) -> Result<()> {
    let stored = model_from_json(&std::fs::read_to_string(&a.model)?)?;
    let source = load_features(&a.source, None)?;
    let target = load_features(&a.target, None)?;
    for x in [&source, &target] {
        if x.ncols() != stored.model.feature_dim() {
            return Err(PasError::DimensionMismatch {
                expected: stored.model.feature_dim(),
                found: x.ncols(),
            });
        }
    }
    let raw = load_raw_labels(&a.true_labels)?;
    let truth = match &stored.class_labels {
        Some(values) => LabelMapping {
            values: values.clone(),
        }
        .encode(&raw)?,
        None => raw
            .iter()
            .map(|&v| {
                usize::try_from(v)
                    .ok()
                    .filter(|&k| k < stored.model.num_classes())
                    .ok_or_else(|| PasError::Range(format!("label {v} has no class")))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let opts = KliepOptions {
        num_centers: a.centers,
        bandwidth: a.bandwidth,
        seed: a.seed,
        ..KliepOptions::default()
    };
    let kliep = kliep_fit(&source, &target, &opts)?;
    let report = anchoring_report(&stored.model, &target, &truth, &kliep.model, a.fraction)?;
    let last = kliep.steps.last();
    let doc = serde_json::json!({
        "fraction": report.fraction,
        "top": report.top,
        "bottom": report.bottom,
        "kliep": {
            "num_centers": kliep.model.alphas.len(),
            "bandwidth": kliep.model.bandwidth,
            "steps": kliep.steps.len(),
            "objective": last.map(|s| s.objective),
            "target_mean": last.map(|s| s.target_mean),
        },
    });
    let mut text =
        serde_json::to_string_pretty(&doc).map_err(|e| PasError::Parse(e.to_string()))?;
    text.push('\n');
    let csv = a.out_csv.as_ref().map(|_| {
        format!(
            "method,seed,accuracy,adr\nanchor_top,{s},{},{}\nanchor_bottom,{s},{},{}\n",
            report.top.accuracy,
            report.top.adr,
            report.bottom.accuracy,
            report.bottom.adr,
            s = a.seed
        )
    });
    write_atomic(&a.out, text.as_bytes())?;
    if let (Some(path), Some(body)) = (&a.out_csv, csv) {
        write_atomic(path, body.as_bytes())?;
    }
    Ok(())
}
