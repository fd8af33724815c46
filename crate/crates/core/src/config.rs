//! Pipeline constants and the thresholds derived from them.
//!
//! In paper mode every threshold is derived from Δ by the asymptotic formulas; at any Δ
//! that fits in memory several of them are vacuous (the Y-sampling probability exceeds 1,
//! for instance) and the configuration is flagged infeasible. Scaled mode takes explicit
//! absolute values for each derived threshold instead.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Paper,
    Scaled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub mode: Mode,
    /// Δ used for every threshold; must bound the input's maximum degree.
    pub delta: usize,
    /// Degree bound for the shared-neighbour witness in N* (20).
    pub small_deg: usize,
    /// H'-neighbour bound used by merging, S_v, nearby and the A_v events of the partition (50).
    pub few_h_neighbours: usize,
    /// Shared-neighbour count that makes two H' vertices nearby (100).
    pub nearby_common: usize,
    /// Y-sampling probability numerator: p = y_prob_num · log Δ / Δ^{1/3} (800).
    pub y_prob_num: f64,
    /// Lower bound on |N(v) ∩ Y| in units of log Δ (360).
    pub y_min: f64,
    /// Upper bound on |N*(v) ∩ Y| in units of Δ^{2/3} log Δ (25000).
    pub nstar_cap_coeff: f64,
    /// Mid palette size c = ⌈coeff · Δ^{2/3} log Δ⌉ (10^5).
    pub mid_palette_coeff: f64,
    /// Part count t = ⌈t_coeff · Δ^{1/3}⌉ (18).
    pub t_coeff: f64,

    // scaled-mode absolute values
    pub low_deg_threshold: Option<f64>,
    pub merge_threshold: Option<f64>,
    pub y_prob: Option<f64>,
    pub y_min_abs: Option<f64>,
    pub nstar_cap_abs: Option<f64>,
    pub mid_palette: Option<usize>,
    pub parts: Option<usize>,
    pub slack: Option<f64>,

    /// Resampler budget per stage; `None` means 100 × (number of events).
    pub max_rounds: Option<u64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mode: Mode::Paper,
            delta: 0,
            small_deg: 20,
            few_h_neighbours: 50,
            nearby_common: 100,
            y_prob_num: 800.0,
            y_min: 360.0,
            nstar_cap_coeff: 25000.0,
            mid_palette_coeff: 1e5,
            t_coeff: 18.0,
            low_deg_threshold: None,
            merge_threshold: None,
            y_prob: None,
            y_min_abs: None,
            nstar_cap_abs: None,
            mid_palette: None,
            parts: None,
            slack: None,
            max_rounds: None,
        }
    }
}

/// How L is separated from H.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LowDegreeRule {
    /// deg(v)³ ≤ Δ, an exact integer form of deg(v) ≤ Δ^{1/3}.
    CubeAtMost(usize),
    AtMost(f64),
}

impl LowDegreeRule {
    pub fn is_low(&self, degree: usize) -> bool {
        match *self {
            LowDegreeRule::CubeAtMost(delta) => (degree as u128).pow(3) <= delta as u128,
            LowDegreeRule::AtMost(tau) => degree as f64 <= tau,
        }
    }

    /// ⌈τ_L⌉.
    pub fn ceiling(&self) -> usize {
        match *self {
            LowDegreeRule::CubeAtMost(delta) => {
                let mut k = (delta as f64).cbrt().floor() as usize;
                while (k as u128).pow(3) < delta as u128 {
                    k += 1;
                }
                while k > 0 && ((k - 1) as u128).pow(3) >= delta as u128 {
                    k -= 1;
                }
                k
            }
            LowDegreeRule::AtMost(tau) => tau.max(0.0).ceil() as usize,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    #[serde(skip)]
    pub low_rule: LowDegreeRule,
    /// 2⌈τ_L⌉ + 1.
    pub low_palette_size: usize,
    pub y_prob: f64,
    pub y_min: f64,
    pub nstar_cap: f64,
    pub mid_palette: usize,
    pub merge_threshold: f64,
    pub parts: usize,
    pub slack: f64,
    /// Degree cap of G'[H']: Δ + few_h · Δ / merge_threshold (Δ + 50Δ^{2/3}log Δ in paper mode).
    pub hprime_degree_cap: f64,
    /// Reasons the configuration cannot drive the randomized stages; empty when feasible.
    pub infeasible: Vec<String>,
}

impl Thresholds {
    pub fn is_feasible(&self) -> bool {
        self.infeasible.is_empty()
    }
}

/// Resampler budget per stage in [`PipelineConfig::desk`].
pub const DESK_MAX_ROUNDS: u64 = 20_000;

impl PipelineConfig {
    pub fn paper(delta: usize) -> Self {
        PipelineConfig { delta, ..Default::default() }
    }

    /// Scaled configuration with every absolute threshold supplied.
    #[allow(clippy::too_many_arguments)]
    pub fn scaled(
        delta: usize,
        low_deg_threshold: f64,
        merge_threshold: f64,
        y_prob: f64,
        y_min_abs: f64,
        nstar_cap_abs: f64,
        mid_palette: usize,
        parts: usize,
        slack: f64,
    ) -> Self {
        PipelineConfig {
            mode: Mode::Scaled,
            delta,
            low_deg_threshold: Some(low_deg_threshold),
            merge_threshold: Some(merge_threshold),
            y_prob: Some(y_prob),
            y_min_abs: Some(y_min_abs),
            nstar_cap_abs: Some(nstar_cap_abs),
            mid_palette: Some(mid_palette),
            parts: Some(parts),
            slack: Some(slack),
            ..Default::default()
        }
    }

    /// Scaled configuration for desk-size graphs of maximum degree at most `delta`.
    ///
    /// - τ_L = Δ/2, and few_h_neighbours = ⌊τ_L⌋ + 1. Every L vertex then has at most
    ///   few_h_neighbours − 1 neighbours, so every L' vertex lies in S_v of its neighbours.
    /// - small_deg = max(1, ⌊τ_L/2⌋), so the N* witnesses stay well inside L as they do for
    ///   large Δ; a fixed 20 would make N* the whole 2-ball once Δ ≤ 20.
    /// - The Y probability is 1/2, with y_min_abs = 1 and an N* cap of (small_deg + 1)Δ.
    /// - The mid palette has ⌈Δ^{2/3} log Δ⌉ colours.
    /// - merge_threshold = nearby_common = 2.
    /// - t = 4 parts, and slack = Δ^{1/3} log Δ.
    /// - A fixed resampler budget of [`DESK_MAX_ROUNDS`] per stage. Clean desk runs need far
    ///   fewer rounds; where the local-lemma condition fails outright (small-degree regular
    ///   graphs, for instance) the default 100 × events budget only delays the fallback.
    pub fn desk(delta: usize) -> Self {
        let d = delta.max(2) as f64;
        let tau = delta as f64 / 2.0;
        let small_deg = ((tau / 2.0).floor() as usize).max(1);
        let mut cfg = PipelineConfig::scaled(
            delta,
            tau,
            2.0,
            0.5,
            1.0,
            ((small_deg + 1) * delta.max(1)) as f64,
            (d.powf(2.0 / 3.0) * d.ln()).ceil() as usize,
            4,
            d.cbrt() * d.ln(),
        );
        cfg.small_deg = small_deg;
        cfg.max_rounds = Some(DESK_MAX_ROUNDS);
        cfg.few_h_neighbours = tau.floor() as usize + 1;
        cfg.nearby_common = 2;
        cfg
    }

    pub fn thresholds(&self) -> Result<Thresholds, ConfigError> {
        if self.small_deg == 0 || self.few_h_neighbours == 0 || self.nearby_common == 0 {
            return Err(ConfigError::InvalidValue {
                field: "small_deg/few_h_neighbours/nearby_common",
                reason: "counts must be positive".into(),
            });
        }
        let delta = self.delta as f64;
        match self.mode {
            Mode::Paper => {
                let mut infeasible = Vec::new();
                if self.delta < 2 {
                    infeasible.push(format!("delta = {} makes log Δ nonpositive", self.delta));
                }
                let log = delta.max(1.0).ln();
                let cbrt = delta.cbrt();
                let low_rule = LowDegreeRule::CubeAtMost(self.delta);
                let y_prob = if log > 0.0 { self.y_prob_num * log / cbrt } else { f64::INFINITY };
                if y_prob > 1.0 {
                    infeasible.push(format!("Y-sampling probability {y_prob:.3e} exceeds 1"));
                }
                let y_min = self.y_min * log;
                let merge_threshold = if log > 0.0 { cbrt / log } else { f64::INFINITY };
                let mid = (self.mid_palette_coeff * delta.powf(2.0 / 3.0) * log).ceil().max(1.0);
                let parts = (self.t_coeff * cbrt).ceil().max(1.0) as usize;
                if parts < 2 {
                    infeasible.push(format!("part count {parts} is below 2"));
                }
                Ok(Thresholds {
                    low_rule,
                    low_palette_size: 2 * low_rule.ceiling() + 1,
                    y_prob,
                    y_min,
                    nstar_cap: self.nstar_cap_coeff * delta.powf(2.0 / 3.0) * log,
                    mid_palette: mid as usize,
                    merge_threshold,
                    parts,
                    slack: cbrt * log,
                    hprime_degree_cap: delta
                        + self.few_h_neighbours as f64 * delta.powf(2.0 / 3.0) * log,
                    infeasible,
                })
            }
            Mode::Scaled => {
                let need = |v: Option<f64>, name| v.ok_or(ConfigError::MissingScaledValue(name));
                let tau = need(self.low_deg_threshold, "low_deg_threshold")?;
                let merge_threshold = need(self.merge_threshold, "merge_threshold")?;
                let y_prob = need(self.y_prob, "y_prob")?;
                let y_min = need(self.y_min_abs, "y_min_abs")?;
                let nstar_cap = need(self.nstar_cap_abs, "nstar_cap_abs")?;
                let slack = need(self.slack, "slack")?;
                let mid_palette = self.mid_palette.ok_or(ConfigError::MissingScaledValue("mid_palette"))?;
                let parts = self.parts.ok_or(ConfigError::MissingScaledValue("parts"))?;
                if !(y_prob > 0.0 && y_prob <= 1.0) {
                    return Err(ConfigError::InvalidValue {
                        field: "y_prob",
                        reason: format!("{y_prob} is not in (0, 1]"),
                    });
                }
                if merge_threshold <= 0.0 {
                    return Err(ConfigError::InvalidValue {
                        field: "merge_threshold",
                        reason: "must be positive".into(),
                    });
                }
                if mid_palette == 0 || parts < 2 {
                    return Err(ConfigError::InvalidValue {
                        field: "mid_palette/parts",
                        reason: "need mid_palette ≥ 1 and parts ≥ 2".into(),
                    });
                }
                let low_rule = LowDegreeRule::AtMost(tau);
                Ok(Thresholds {
                    low_rule,
                    low_palette_size: 2 * low_rule.ceiling() + 1,
                    y_prob,
                    y_min,
                    nstar_cap,
                    mid_palette,
                    merge_threshold,
                    parts,
                    slack,
                    hprime_degree_cap: delta
                        + self.few_h_neighbours as f64 * delta / merge_threshold,
                    infeasible: Vec::new(),
                })
            }
        }
    }

    pub fn max_rounds_for(&self, events: usize) -> u64 {
        self.max_rounds.unwrap_or_else(|| crate::lll::default_max_rounds(events))
    }
}
