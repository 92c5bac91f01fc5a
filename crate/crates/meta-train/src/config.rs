//! Pipeline configuration: literal sample budgets plus the scaling
//! calculator that derives them from problem dimensions.

use crate::error::MetaTrainError;

/// Sample budgets and detection parameters for the three-phase pipeline.
///
/// All budgets are literal episode/sample counts. The theoretical scalings
/// carry unspecified constants, so runnable numbers either come straight from
/// configuration or from [`scaled_budgets`], which applies the theoretical
/// shapes times a user-chosen scale factor.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaTrainConfig {
    /// Optimistic-learner episodes per task in the task-learning phase.
    pub n_ucbvi: usize,
    /// Mixture-policy rollouts per task that harvest transitions and returns.
    pub n_ts: usize,
    /// Minimum per-pair count for a task-model row to be kept.
    pub n_ts_thresh: u64,
    /// Goal-reaching learner episodes per goal in the reward-free phase.
    pub n_rf_euler: usize,
    /// Pooled-policy draws, each contributing one uniformly-timed transition.
    pub n_rf: usize,
    /// Greedy-policy rollouts after an imagined-value trigger.
    pub n_ed: usize,
    /// Minimum per-pair count for a trigger rollout row to be compared.
    pub n_ed_thresh: u64,
    /// Goal-reaching learner episodes inside each exit-learning call.
    pub n_el_euler: usize,
    /// Pooled-policy rollouts per exit-learning call.
    pub n_el: usize,
    /// Minimum sample count an exit-learning call must collect.
    pub n_el_thresh: u64,
    /// Minimum total-variation distance between differing exit rows.
    pub beta: f64,
    /// Value gap that borrowed dynamics must open for undetected exits.
    pub zeta: f64,
    /// Importance level: reward mass lost when an exit pair is removed.
    pub alpha: f64,
    /// Failure probability budget for the learners' confidence terms.
    pub confidence: f64,
    /// Reachability floor for states that the reward-free phase must cover.
    pub rf_significance: f64,
    /// Exploration-bonus multiplier for the reward-driven task learner.
    pub bonus_scale: f64,
    /// Exploration-bonus multiplier for the goal-reaching learners. Their
    /// returns cap at one, so a smaller multiplier lets visited pairs drop
    /// off the optimistic ceiling sooner without losing optimism.
    pub goal_bonus_scale: f64,
    /// 1-based task numbers whose dynamics anchor the reward-free phase.
    /// With several entries the reference keeps, per row, the counts from
    /// whichever listed task observed that row most.
    pub designated_tasks: Vec<usize>,
    /// Also run the pairwise task-model comparison before the main loop.
    pub preliminary_pass: bool,
}

impl Default for MetaTrainConfig {
    fn default() -> Self {
        Self {
            n_ucbvi: 300,
            n_ts: 250,
            n_ts_thresh: 20,
            n_rf_euler: 80,
            n_rf: 4000,
            n_ed: 400,
            n_ed_thresh: 10,
            n_el_euler: 120,
            n_el: 200,
            n_el_thresh: 20,
            beta: 1.0,
            zeta: 1.0,
            alpha: 0.5,
            confidence: 0.1,
            rf_significance: 0.05,
            bonus_scale: 0.3,
            goal_bonus_scale: 0.1,
            designated_tasks: vec![1],
            preliminary_pass: false,
        }
    }
}

impl MetaTrainConfig {
    /// Checks every field against its declared range.
    ///
    /// # Errors
    /// Counts must be at least one, thresholds must not exceed their sample
    /// budgets, `beta` and `zeta` must lie in `(0, 1]`, `alpha` must be
    /// positive, and probabilities must lie in `(0, 1)`.
    pub fn validate(&self) -> Result<(), MetaTrainError> {
        let counts = [
            ("n_ucbvi", self.n_ucbvi),
            ("n_ts", self.n_ts),
            ("n_rf_euler", self.n_rf_euler),
            ("n_rf", self.n_rf),
            ("n_ed", self.n_ed),
            ("n_el_euler", self.n_el_euler),
            ("n_el", self.n_el),
        ];
        for (name, value) in counts {
            if value == 0 {
                return Err(MetaTrainError::BadConfig(format!("{name} must be at least 1")));
            }
        }
        let gates = [
            ("n_ts_thresh", self.n_ts_thresh, "n_ts", self.n_ts as u64),
            ("n_ed_thresh", self.n_ed_thresh, "n_ed", self.n_ed as u64),
            ("n_el_thresh", self.n_el_thresh, "n_el", self.n_el as u64),
        ];
        for (name, thresh, budget_name, budget) in gates {
            if thresh == 0 {
                return Err(MetaTrainError::BadConfig(format!("{name} must be at least 1")));
            }
            if thresh > budget {
                return Err(MetaTrainError::BadConfig(format!(
                    "{name} = {thresh} exceeds {budget_name} = {budget}"
                )));
            }
        }
        for (name, value) in [("beta", self.beta), ("zeta", self.zeta)] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(MetaTrainError::BadConfig(format!("{name} must lie in (0, 1], got {value}")));
            }
        }
        if !(self.alpha > 0.0) {
            return Err(MetaTrainError::BadConfig(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(MetaTrainError::BadConfig(format!(
                "confidence must lie in (0, 1), got {}",
                self.confidence
            )));
        }
        if !(self.rf_significance >= 0.0 && self.rf_significance <= 1.0) {
            return Err(MetaTrainError::BadConfig(format!(
                "rf_significance must lie in [0, 1], got {}",
                self.rf_significance
            )));
        }
        for (name, value) in [("bonus_scale", self.bonus_scale), ("goal_bonus_scale", self.goal_bonus_scale)] {
            if !(value > 0.0) {
                return Err(MetaTrainError::BadConfig(format!("{name} must be positive, got {value}")));
            }
        }
        if self.designated_tasks.is_empty() {
            return Err(MetaTrainError::BadConfig("designated_tasks must name at least one task".to_string()));
        }
        if self.designated_tasks.contains(&0) {
            return Err(MetaTrainError::BadConfig(
                "designated_tasks entries are 1-based and must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// Problem dimensions that the budget shapes depend on.
#[derive(Debug, Clone, Copy)]
pub struct ProblemDims {
    pub num_states: usize,
    pub num_actions: usize,
    pub horizon: usize,
    pub num_tasks: usize,
}

impl ProblemDims {
    /// Reads the dimensions off a task family.
    pub fn of_family(family: &env_suite::TaskFamily) -> Self {
        Self {
            num_states: family.num_states(),
            num_actions: family.num_actions(),
            horizon: family.horizon(),
            num_tasks: family.num_tasks(),
        }
    }
}

/// Knobs for the budget calculator beyond the detection parameters.
#[derive(Debug, Clone, Copy)]
pub struct ScaleParams {
    /// Multiplier applied to every theoretical shape before rounding up.
    pub scale: f64,
    /// Mixture-coverage constant relating pooled and single-policy reach.
    pub mixture_bound: f64,
    /// Entrance-reachability floor under optimal play.
    pub entrance_significance: f64,
    /// Policy-suboptimality slack available to the visitation argument.
    pub policy_slack: f64,
    /// In-cluster exit-reachability floor.
    pub exit_floor: f64,
    /// Bound on the number of exits; defaults to S·A when absent.
    pub num_exits_bound: Option<usize>,
    /// Bound on the number of entrances; defaults to S when absent.
    pub num_entrances_bound: Option<usize>,
}

impl Default for ScaleParams {
    fn default() -> Self {
        Self {
            scale: 1.0,
            mixture_bound: 4.0,
            entrance_significance: 0.5,
            policy_slack: 0.25,
            exit_floor: 0.5,
            num_exits_bound: None,
            num_entrances_bound: None,
        }
    }
}

fn shaped(value: f64, scale: f64) -> u64 {
    (value.max(0.0) * scale).ceil().clamp(1.0, 1e12) as u64
}

/// Derives sample budgets from the theoretical shapes times `scale`.
///
/// Every budget keeps its dependence on the dimensions and the detection
/// parameters; the user-chosen scale stands in for the unspecified constant
/// factors. Thresholds are clamped to their sample budgets so the result
/// always validates.
///
/// # Errors
/// Rejects non-positive dimensions or detection parameters out of range.
pub fn scaled_budgets(
    dims: ProblemDims,
    alpha: f64,
    beta: f64,
    zeta: f64,
    confidence: f64,
    params: &ScaleParams,
) -> Result<MetaTrainConfig, MetaTrainError> {
    if dims.num_states == 0 || dims.num_actions == 0 || dims.horizon == 0 || dims.num_tasks == 0 {
        return Err(MetaTrainError::BadConfig("all problem dimensions must be positive".to_string()));
    }
    if !(params.scale > 0.0) {
        return Err(MetaTrainError::BadConfig(format!("scale must be positive, got {}", params.scale)));
    }
    let s = dims.num_states as f64;
    let a = dims.num_actions as f64;
    let h = dims.horizon as f64;
    let t = dims.num_tasks as f64;
    let k = params.num_exits_bound.unwrap_or(dims.num_states * dims.num_actions) as f64;
    let l = params.num_entrances_bound.unwrap_or(dims.num_states) as f64;
    let c = params.mixture_bound.max(1.0);
    let rho = params.entrance_significance;
    let eps = params.policy_slack;
    let eps0 = params.exit_floor;
    let p = confidence;
    for (name, value) in [
        ("alpha", alpha),
        ("beta", beta),
        ("zeta", zeta),
        ("confidence", p),
        ("entrance_significance", rho),
        ("policy_slack", eps),
        ("exit_floor", eps0),
    ] {
        if !(value > 0.0) {
            return Err(MetaTrainError::BadConfig(format!("{name} must be positive, got {value}")));
        }
    }

    let min_ab_z = alpha.min(zeta);
    let min_bz = beta.min(zeta);
    let log_hsat = (h * s * a * t / p).ln().max(1.0);
    let log_task = (s * a * h * t / (p * alpha * min_bz)).ln().max(1.0);
    let log_sat = (s * a * t / p).ln().max(1.0);
    let log_rf = (h * s * a / p).ln().max(1.0);
    let log_ed = (s * a * h / (p * zeta * beta)).ln().max(1.0);
    let log_el = (c * s * a * h * t / (p * alpha * min_bz)).ln().max(1.0);

    let n_ucbvi = h.powi(2) * s * a / min_ab_z.powi(2) * log_hsat.powi(2);
    let n_ts_thresh = s * (h.powi(4) / zeta.powi(2)).max(1.0 / beta.powi(2)) * log_task;
    let n_ts = s * (h.powi(5) / (alpha * zeta.powi(2))).max(h / (alpha * beta.powi(2))) * log_task
        + h.powi(2) / min_ab_z.powi(2) * log_sat;
    let reach = rho * eps.min(eps0);
    let n_rf_euler = h.powi(2) * s.powi(4) * a / reach.min(zeta / c) * log_rf.powi(3);
    let n_rf = h.powi(5) * s.powi(2) * a / (rho * eps.min(eps0).powi(2)).min(zeta.powi(2) / c) * (a / p).ln().max(1.0);
    let n_ed_thresh = s / beta.powi(2) * log_ed;
    let n_ed = h * k * s / (zeta * beta.powi(2)) * log_ed + h.powi(2) * k.powi(2) / zeta.powi(2) * (k / p).ln().max(1.0);
    let n_el_thresh = l * (h.powi(4) / zeta.powi(2)).max(1.0 / beta.powi(2)) * log_el;
    let n_el_euler = c * h.powi(3) * s.powi(2) * a / alpha * log_hsat.powi(3);
    let n_el = l * (c * h.powi(5) / (alpha * zeta.powi(2))).max(c * h / (alpha * beta.powi(2))) * log_el
        + c.powi(2) * h.powi(2) / alpha.powi(2) * log_sat;

    let cfg = MetaTrainConfig {
        n_ucbvi: shaped(n_ucbvi, params.scale) as usize,
        n_ts: shaped(n_ts, params.scale) as usize,
        n_ts_thresh: shaped(n_ts_thresh, params.scale).min(shaped(n_ts, params.scale)),
        n_rf_euler: shaped(n_rf_euler, params.scale) as usize,
        n_rf: shaped(n_rf, params.scale) as usize,
        n_ed: shaped(n_ed, params.scale) as usize,
        n_ed_thresh: shaped(n_ed_thresh, params.scale).min(shaped(n_ed, params.scale)),
        n_el_euler: shaped(n_el_euler, params.scale) as usize,
        n_el: shaped(n_el, params.scale) as usize,
        n_el_thresh: shaped(n_el_thresh, params.scale).min(shaped(n_el, params.scale)),
        beta,
        zeta,
        alpha,
        confidence,
        ..MetaTrainConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}
