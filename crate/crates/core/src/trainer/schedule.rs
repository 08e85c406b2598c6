use super::TrainError;
use crate::model::GroupFreezeState;

pub const DEFAULT_STAGE_LENGTH: usize = 100;
pub const DEFAULT_BASE_LR: f64 = 4e-3;
pub const DEFAULT_DISCRIMINATIVE_FACTOR: f64 = 2.6;
pub const DEFAULT_CUT_FRAC: f64 = 0.1;
pub const DEFAULT_RATIO: f64 = 32.0;

/// Gradual unfreezing from the head (last group) toward the embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageSchedule {
    pub num_groups: usize,
    pub stage_length_batches: usize,
}

impl StageSchedule {
    pub fn new(num_groups: usize, stage_length_batches: usize) -> Result<Self, TrainError> {
        if num_groups == 0 || stage_length_batches == 0 {
            return Err(TrainError::InvalidConfig("num_groups and stage_length must be >= 1".into()));
        }
        Ok(StageSchedule { num_groups, stage_length_batches })
    }

    pub fn stage(&self, t: usize) -> usize {
        t / self.stage_length_batches
    }

    /// `min(1 + floor(t / stage_length), num_groups)`.
    pub fn unfrozen_groups(&self, t: usize) -> usize {
        (1 + self.stage(t)).min(self.num_groups)
    }

    pub fn freeze_state(&self, t: usize) -> GroupFreezeState {
        GroupFreezeState::top_unfrozen(self.num_groups, self.unfrozen_groups(t))
    }

    /// Batches at which the unfrozen count increases, within `0..total`.
    pub fn unfreeze_events(&self, total: usize) -> Vec<usize> {
        (1..self.num_groups)
            .map(|k| k * self.stage_length_batches)
            .take_while(|&b| b < total)
            .collect()
    }
}

/// Slanted-triangular learning rate with a discriminative per-group divisor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LRPolicy {
    pub base_lr: f64,
    pub discriminative_factor: f64,
    pub cut_frac: f64,
    pub ratio: f64,
    pub total_batches: usize,
}

impl LRPolicy {
    pub fn new(total_batches: usize) -> Self {
        LRPolicy {
            base_lr: DEFAULT_BASE_LR,
            discriminative_factor: DEFAULT_DISCRIMINATIVE_FACTOR,
            cut_frac: DEFAULT_CUT_FRAC,
            ratio: DEFAULT_RATIO,
            total_batches,
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidConfig(m.into()));
        if !(self.base_lr > 0.0 && self.base_lr.is_finite()) {
            return bad("base_lr must be positive");
        }
        if !(self.discriminative_factor >= 1.0 && self.discriminative_factor.is_finite()) {
            return bad("discriminative_factor must be >= 1");
        }
        if !(self.cut_frac > 0.0 && self.cut_frac < 1.0) {
            return bad("cut_frac must lie in (0, 1)");
        }
        if !(self.ratio > 1.0 && self.ratio.is_finite()) {
            return bad("ratio must be > 1");
        }
        if self.total_batches == 0 {
            return bad("total_batches must be >= 1");
        }
        Ok(())
    }

    pub fn cut(&self) -> usize {
        (self.cut_frac * self.total_batches as f64).floor() as usize
    }

    /// Rate for the top group at batch `t`.
    pub fn schedule(&self, t: usize) -> Result<f64, TrainError> {
        if t >= self.total_batches {
            return Err(TrainError::BatchOutOfRange { t, total: self.total_batches });
        }
        let cut = self.cut();
        let p = if t < cut {
            t as f64 / cut as f64
        } else {
            1.0 - (t - cut) as f64 / (self.total_batches - cut) as f64
        };
        Ok(self.base_lr * (1.0 + p * (self.ratio - 1.0)) / self.ratio)
    }

    /// Rate for a group `depth` levels below the top group.
    pub fn lr_at(&self, t: usize, depth: usize) -> Result<f64, TrainError> {
        Ok(self.schedule(t)? / self.discriminative_factor.powi(depth as i32))
    }

    pub fn group_lr(&self, t: usize, group: usize, num_groups: usize) -> Result<f64, TrainError> {
        self.lr_at(t, num_groups - 1 - group)
    }
}
