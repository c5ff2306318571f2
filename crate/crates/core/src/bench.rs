//! Synthetic benchmark suites comparing 1-NN, source-only subspaces and
//! progressive adaptation.

use serde::Serialize;

use crate::baselines::{accuracy, nn1_classify, pas_c};
use crate::error::Result;
use crate::model::{predict, PasConfig};
use crate::solver::{fit_progressive, FitTrace};
use crate::synth::{synth_shifted_pair, Shift, SynthConfig};

pub const DEFAULT_SHIFT: Shift = Shift {
    rotation: 0.8,
    translation: 1.0,
    noise: 0.5,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Three classes shared by both domains.
    Closed,
    /// Six source classes, target keeps classes 0..3.
    Pda,
}

impl Suite {
    pub fn synth_config(self, seed: u64, shift: Shift) -> SynthConfig {
        match self {
            Suite::Closed => SynthConfig {
                num_classes: 3,
                seed,
                shift,
                ..Default::default()
            },
            Suite::Pda => SynthConfig {
                num_classes: 6,
                pda_keep: Some(vec![0, 1, 2]),
                seed,
                shift,
                ..Default::default()
            },
        }
    }

    pub fn pas_config(self) -> PasConfig {
        PasConfig::with_dim(1)
    }
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "closed" => Ok(Suite::Closed),
            "pda" => Ok(Suite::Pda),
            other => Err(format!("unknown suite {other:?} (expected closed or pda)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Method {
    #[serde(rename = "1nn")]
    Nn1,
    #[serde(rename = "pas")]
    Pas,
    #[serde(rename = "pas_c")]
    PasC,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Nn1, Method::Pas, Method::PasC];

    pub fn name(self) -> &'static str {
        match self {
            Method::Nn1 => "1nn",
            Method::Pas => "pas",
            Method::PasC => "pas_c",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub method: Method,
    pub seed: u64,
    pub accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub rows: Vec<BenchRow>,
    pub trace: FitTrace,
}

/// Generates the suite's pair for `seed` and scores every method on it.
pub fn run_seed(suite: Suite, seed: u64, shift: Shift) -> Result<SeedOutcome> {
    let (source, target) = synth_shifted_pair(&suite.synth_config(seed, shift))?;
    let truth = target
        .true_labels
        .as_deref()
        .expect("synthetic targets carry labels");
    let config = suite.pas_config();

    let nn = accuracy(&nn1_classify(&source, &target.features)?, truth);
    let init = accuracy(
        &predict(&pas_c(&source, &config)?, &target.features)?,
        truth,
    );
    let fit = fit_progressive(
        &source.features,
        &source.labels,
        &target.features,
        &config,
        Some(truth),
    )?;
    let adapted = accuracy(&predict(&fit.model, &target.features)?, truth);

    let rows = [
        (Method::Nn1, nn),
        (Method::PasC, init),
        (Method::Pas, adapted),
    ]
    .into_iter()
    .map(|(method, accuracy)| BenchRow {
        method,
        seed,
        accuracy,
    })
    .collect();
    Ok(SeedOutcome {
        rows,
        trace: fit.trace,
    })
}

/// Rows ordered by `(method, seed)`.
pub fn sort_rows(rows: &mut [BenchRow]) {
    rows.sort_by(|a, b| a.method.cmp(&b.method).then(a.seed.cmp(&b.seed)));
}

pub fn rows_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("method,seed,accuracy\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.method.name(), r.seed, r.accuracy));
    }
    out
}

pub fn method_mean(rows: &[BenchRow], method: Method) -> f64 {
    let picked: Vec<f64> = rows
        .iter()
        .filter(|r| r.method == method)
        .map(|r| r.accuracy)
        .collect();
    picked.iter().sum::<f64>() / picked.len().max(1) as f64
}
