use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::ansatz::ParamVector;
use crate::error::{Error, Result};

pub const TRACE_SCHEMA: &str = "# schema: twostage.trace v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Convex,
    Refine,
}

impl Stage {
    pub fn id(self) -> u8 {
        match self {
            Stage::Convex => 1,
            Stage::Refine => 2,
        }
    }

    pub(crate) fn name(self) -> &'static str {
        match self {
            Stage::Convex => "stage1",
            Stage::Refine => "stage2",
        }
    }
}

/// State at the start of one iteration: θ_k, L(θ_k), ‖∇L(θ_k)‖.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub stage: Stage,
    pub iter: usize,
    pub loss: f64,
    pub grad_norm: f64,
    pub params_hash: u64,
    /// ‖∇L(θ_k) − ∇L(θ_{k−1})‖ / ‖θ_k − θ_{k−1}‖ against the previous record
    /// of the same stage.
    pub curvature: Option<f64>,
    /// L(θ_k) − c‖∇L(θ_k)‖² − L(θ_{k+1}); filled once the stage ends.
    pub slack: Option<f64>,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingTrace {
    records: Vec<IterRecord>,
    snapshots: Vec<ParamVector>,
}

impl TrainingTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: IterRecord, params: ParamVector) -> Result<()> {
        if let Some(last) = self.records.last() {
            if last.stage > record.stage {
                return Err(Error::InvalidConfig {
                    key: "trace".into(),
                    reason: "stage-1 records must precede stage-2 records".into(),
                });
            }
        }
        if !record.loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                stage: record.stage.name(),
                iter: record.iter,
            });
        }
        self.records.push(record);
        self.snapshots.push(params);
        Ok(())
    }

    pub fn extend(&mut self, other: TrainingTrace) -> Result<()> {
        for (r, p) in other.records.into_iter().zip(other.snapshots) {
            self.push(r, p)?;
        }
        Ok(())
    }

    pub fn records(&self) -> &[IterRecord] {
        &self.records
    }

    pub(crate) fn records_mut(&mut self) -> &mut [IterRecord] {
        &mut self.records
    }

    /// Parameter vector of each record, same order.
    pub fn snapshots(&self) -> &[ParamVector] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Index of the first stage-2 record, if both stages are present.
    pub fn switch_index(&self) -> Option<usize> {
        let i = self.records.iter().position(|r| r.stage == Stage::Refine)?;
        (i > 0).then_some(i)
    }

    pub fn stage_records(&self, stage: Stage) -> impl Iterator<Item = &IterRecord> {
        self.records.iter().filter(move |r| r.stage == stage)
    }

    pub fn filter_stage(&self, stage: Stage) -> TrainingTrace {
        let (records, snapshots) = self
            .records
            .iter()
            .zip(&self.snapshots)
            .filter(|(r, _)| r.stage == stage)
            .map(|(r, p)| (r.clone(), p.clone()))
            .unzip();
        TrainingTrace { records, snapshots }
    }

    /// Schema line, then `stage,iter,loss,grad_norm,params_hash,slack,elapsed_ms`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut out = out;
        writeln!(out, "{TRACE_SCHEMA}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["stage", "iter", "loss", "grad_norm", "params_hash", "slack", "elapsed_ms"])?;
        for r in &self.records {
            w.write_record([
                r.stage.id().to_string(),
                r.iter.to_string(),
                r.loss.to_string(),
                r.grad_norm.to_string(),
                format!("{:016x}", r.params_hash),
                r.slack.map(|s| s.to_string()).unwrap_or_default(),
                r.elapsed_ms.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
