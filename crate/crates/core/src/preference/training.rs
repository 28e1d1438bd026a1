//! Training data: recording golden comparisons and CSV persistence.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{features, Choice, FeatureVector, Measurement, Prefer, RecordMode, Recorder};
use crate::error::{Error, Result};
use crate::model::Tgd;
use crate::repair::{repair, RepairConfig};
use crate::scenario::Scenario;

/// Comparisons of a preference function over the candidate sets that arise
/// during repair runs: every pair of every set of two or more candidates.
#[derive(Clone, Debug, Default)]
pub struct ComparisonLog {
    pub entries: Vec<(Tgd, Tgd, Choice)>,
}

impl ComparisonLog {
    /// Runs the repair pipeline with `prf` on each scenario and records its
    /// judgement of every candidate pair, stopping once `limit` entries are
    /// collected.
    pub fn record(scenarios: &[Scenario], prf: &dyn Prefer, limit: Option<usize>, config: RepairConfig) -> Self {
        let mut entries = Vec::new();
        for s in scenarios {
            if limit.is_some_and(|l| entries.len() >= l) {
                break;
            }
            let recorder = Recorder::with_mode(prf, RecordMode::AllPairs);
            repair(&s.tgds, &s.policy(), &recorder, config);
            entries.extend(recorder.into_log());
        }
        if let Some(l) = limit {
            entries.truncate(l);
        }
        ComparisonLog { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn measurements(&self) -> Vec<Measurement> {
        self.entries
            .iter()
            .map(|(a, b, c)| Measurement {
                features: features(a, b),
                choice: *c,
            })
            .collect()
    }

    /// The compared pairs without their outcome.
    pub fn pairs(&self) -> Vec<(Tgd, Tgd)> {
        self.entries.iter().map(|(a, b, _)| (a.clone(), b.clone())).collect()
    }
}

/// Runs the repair pipeline with `golden` on each scenario and returns at
/// most `size` measurements of its comparisons.
pub fn generate_training_set(
    scenarios: &[Scenario],
    golden: &dyn Prefer,
    size: usize,
    config: RepairConfig,
) -> Vec<Measurement> {
    ComparisonLog::record(scenarios, golden, Some(size), config).measurements()
}

#[derive(Serialize, Deserialize)]
struct Row {
    delta_fv: i64,
    delta_j: i64,
    choice: u8,
}

/// Writes `delta_fv,delta_j,choice` rows with a header; `choice` is 1 or 2.
pub fn write_training_csv<W: Write>(out: W, data: &[Measurement]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["delta_fv", "delta_j", "choice"])?;
    for m in data {
        w.serialize(Row {
            delta_fv: m.features.delta_fv,
            delta_j: m.features.delta_j,
            choice: m.choice.label(),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the format of [`write_training_csv`].
pub fn read_training_csv<R: Read>(input: R) -> Result<Vec<Measurement>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<Row>().enumerate() {
        let row = row?;
        let choice = Choice::from_label(row.choice)
            .ok_or_else(|| Error::Training(format!("row {}: choice must be 1 or 2, found {}", i + 1, row.choice)))?;
        out.push(Measurement {
            features: FeatureVector::new(row.delta_fv, row.delta_j),
            choice,
        });
    }
    Ok(out)
}
