//! Cosine-annealed flip probability with warm restarts, in integers only.

use crate::bitcore::FixedProb;
use crate::error::{Error, Result};

const TABLE_STEPS: usize = 256;
const ONE_Q30: i64 = 1 << 30;
/// round(pi / 2 * 2^60)
const HALF_PI_Q60: i128 = 1_811_004_864_519_280_711;

/// Taylor series of cos in Q60, rounded to Q30.
const fn cos_q30(theta_q60: i128) -> i64 {
    let x2 = (theta_q60 * theta_q60) >> 60;
    let mut term: i128 = 1 << 60;
    let mut sum = term;
    let mut k = 1;
    while k <= 16 {
        term = -((term * x2) >> 60) / ((2 * k - 1) * (2 * k));
        sum += term;
        k += 1;
    }
    ((sum + (1 << 29)) >> 30) as i64
}

const fn quarter_table() -> [i64; TABLE_STEPS + 1] {
    let mut t = [0i64; TABLE_STEPS + 1];
    let mut i = 0;
    while i <= TABLE_STEPS {
        t[i] = cos_q30(HALF_PI_Q60 * i as i128 / TABLE_STEPS as i128);
        i += 1;
    }
    t[0] = ONE_Q30;
    t[TABLE_STEPS] = 0;
    t
}

/// `cos(i * pi / 2 / 256)` in Q30 for `i` in `0..=256`.
pub(crate) static QUARTER_COS: [i64; TABLE_STEPS + 1] = quarter_table();

/// Quarter cosine at `q / period` table steps, linearly interpolated.
fn quarter_at(q: u128, period: u128) -> i64 {
    let idx = (q / period) as usize;
    let frac = q % period;
    if idx >= TABLE_STEPS {
        return QUARTER_COS[TABLE_STEPS];
    }
    let hi = QUARTER_COS[idx];
    let drop = (hi - QUARTER_COS[idx + 1]) as u128;
    hi - (drop * frac / period) as i64
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct CosineSchedule {
    pub p_min: FixedProb,
    pub p_max: FixedProb,
    pub period: u64,
}

impl CosineSchedule {
    pub fn new(p_min: FixedProb, p_max: FixedProb, period: u64) -> Result<Self> {
        let s = Self {
            p_min,
            p_max,
            period,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.period == 0 {
            return Err(Error::InvalidConfig("schedule period must be >= 1".into()));
        }
        if self.p_min > self.p_max {
            return Err(Error::InvalidConfig("schedule p_min exceeds p_max".into()));
        }
        Ok(())
    }

    /// Probability `t_cur` steps after a restart, for `t_cur` in
    /// `0..=period`: `p_min + (p_max - p_min) * (1 + cos(pi t_cur / period)) / 2`.
    pub fn at(&self, t_cur: u64) -> FixedProb {
        let t = t_cur.min(self.period) as u128;
        let period = self.period as u128;
        let n = TABLE_STEPS as u128;
        // position along [0, 2] quarter turns, in units of 1/period table steps
        let pos = 2 * n * t;
        let cos = if pos <= n * period {
            quarter_at(pos, period)
        } else {
            -quarter_at(2 * n * period - pos, period)
        };
        let factor = ((ONE_Q30 + cos) / 2) as u64;
        let span = (self.p_max.threshold() - self.p_min.threshold()) as u64;
        FixedProb::from_threshold(self.p_min.threshold() + ((span * factor) >> 30) as u32)
    }

    /// Probability at a global step, restarting every `period` steps.
    pub fn at_step(&self, step: u64) -> FixedProb {
        self.at(step % self.period)
    }
}

pub fn flip_schedule(step: u64, schedule: &CosineSchedule) -> Result<FixedProb> {
    schedule.validate()?;
    Ok(schedule.at_step(step))
}
