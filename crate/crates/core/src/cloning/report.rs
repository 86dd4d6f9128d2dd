use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{fidelity_from_z, l_cx, l_nc, CloningSetup, SignalState};
use crate::error::Result;
use crate::qsim::ChannelMode;

/// First line of every report CSV.
pub const REPORT_SCHEMA: &str = "# schema: twostage.fidelity_report v1";

/// Training strategy that produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    /// Convex warm start followed by nonconvex refinement.
    TwoStage,
    /// Nonconvex refinement only, from the random initializer, over the full
    /// epoch budget.
    RandomInitNonconvex,
    /// The convex surrogate alone.
    ConvexOnly,
}

impl Baseline {
    pub const ALL: [Baseline; 3] = [Baseline::TwoStage, Baseline::RandomInitNonconvex, Baseline::ConvexOnly];

    pub fn label(self) -> &'static str {
        match self {
            Baseline::TwoStage => "two_stage",
            Baseline::RandomInitNonconvex => "random_init_nonconvex",
            Baseline::ConvexOnly => "convex_only",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateFidelity {
    pub state: SignalState,
    pub f_bob: f64,
    pub f_eve: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub per_state: Vec<StateFidelity>,
    pub average_fidelity: f64,
    pub l_nc: f64,
    pub l_cx: f64,
    pub channel: ChannelMode,
    pub layers: usize,
    pub seed: u64,
    pub baseline: Option<Baseline>,
}

impl FidelityReport {
    pub(crate) fn from_expectations(setup: &CloningSetup, z: &[f64]) -> Self {
        let w = setup.row_weights();
        let per_state: Vec<StateFidelity> = SignalState::ALL
            .iter()
            .zip(z.chunks(2))
            .map(|(&state, zs)| StateFidelity {
                state,
                f_bob: fidelity_from_z(zs[0]),
                f_eve: fidelity_from_z(zs[1]),
            })
            .collect();
        let mut report = Self {
            average_fidelity: 0.0,
            per_state,
            l_nc: l_nc(&w, z),
            l_cx: l_cx(&w, z),
            channel: setup.channel().clone(),
            layers: setup.ansatz().n_layers,
            seed: setup.seed(),
            baseline: None,
        };
        report.average_fidelity = report.recompute_average();
        report
    }

    /// (1/(2|S|)) Σ (F_B + F_E) over the per-state fields.
    pub fn recompute_average(&self) -> f64 {
        let sum: f64 = self.per_state.iter().map(|s| s.f_bob + s.f_eve).sum();
        sum / (2 * self.per_state.len()) as f64
    }

    pub fn mean_bob(&self) -> f64 {
        self.per_state.iter().map(|s| s.f_bob).sum::<f64>() / self.per_state.len() as f64
    }

    pub fn mean_eve(&self) -> f64 {
        self.per_state.iter().map(|s| s.f_eve).sum::<f64>() / self.per_state.len() as f64
    }

    /// Mean over S of |F_B − F_E|.
    pub fn asymmetry(&self) -> f64 {
        self.per_state.iter().map(|s| (s.f_bob - s.f_eve).abs()).sum::<f64>() / self.per_state.len() as f64
    }

    pub fn with_baseline(mut self, baseline: Baseline) -> Self {
        self.baseline = Some(baseline);
        self
    }
}

/// Writes reports under a schema line and the fixed header
/// `state,F_B,F_E,avg,L_nc,L_cx,channel,layers,seed,baseline`. Each report
/// gives one `all` row holding the S-averaged clone fidelities, preceded by
/// one row per signal state when `per_state` is set.
pub fn write_reports_csv<W: Write>(out: W, reports: &[FidelityReport], per_state: bool) -> Result<()> {
    let mut out = out;
    writeln!(out, "{REPORT_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["state", "F_B", "F_E", "avg", "L_nc", "L_cx", "channel", "layers", "seed", "baseline"])?;
    for r in reports {
        let tail = |w: &mut csv::Writer<W>, state: &str, fb: f64, fe: f64| {
            w.write_record([
                state.to_string(),
                fb.to_string(),
                fe.to_string(),
                r.average_fidelity.to_string(),
                r.l_nc.to_string(),
                r.l_cx.to_string(),
                r.channel.label().to_string(),
                r.layers.to_string(),
                r.seed.to_string(),
                r.baseline.map(Baseline::label).unwrap_or("none").to_string(),
            ])
        };
        if per_state {
            for s in &r.per_state {
                tail(&mut w, s.state.label(), s.f_bob, s.f_eve)?;
            }
        }
        tail(&mut w, "all", r.mean_bob(), r.mean_eve())?;
    }
    w.flush()?;
    Ok(())
}
