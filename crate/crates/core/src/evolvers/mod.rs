//! Derivative-free training steps for binary networks.
//!
//! Every step takes a step-level random stream; child `i` of a step draws
//! from `rng.derive(i)`, so children can be built in any order or in
//! parallel and still come out identical.

mod schedule;
mod wrong;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bitcore::{DeterministicRng, FixedProb};
use crate::error::{Error, Result};
use crate::network::BinaryNetwork;
use crate::objective::{blend_score, evaluate_accuracy, Fitness, LabelCodec, Sample, ScoredNetwork};

pub use schedule::{flip_schedule, CosineSchedule};
pub use wrong::{mark_wrong, WrongMask};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Algorithm {
    Naive,
    Elite,
    Counting,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Naive => "naive",
            Algorithm::Elite => "elite",
            Algorithm::Counting => "counting",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "naive" => Ok(Algorithm::Naive),
            "elite" => Ok(Algorithm::Elite),
            "counting" => Ok(Algorithm::Counting),
            other => Err(format!("unknown algorithm {other:?} (naive|elite|counting)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvolverConfig {
    pub algorithm: Algorithm,
    pub p: FixedProb,
    pub children: usize,
    pub elite_size: usize,
    /// Weight of the ancestor score in the elite blend.
    pub lambda: FixedProb,
    /// Samples per counting-error step. Small batches work best: with ten
    /// classes a target-1 output bit is rarely wrong on half of a large batch.
    pub batch_size: usize,
    pub keep_parent: bool,
    pub schedule: Option<CosineSchedule>,
}

impl Default for EvolverConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Counting,
            p: FixedProb::from_ratio(1, 100).unwrap(),
            children: 8,
            elite_size: 4,
            lambda: FixedProb::from_ratio(1, 4).unwrap(),
            batch_size: 4,
            keep_parent: false,
            schedule: None,
        }
    }
}

impl EvolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.children == 0 {
            return Err(Error::InvalidConfig("children must be >= 1".into()));
        }
        if self.elite_size == 0 {
            return Err(Error::InvalidConfig("elite_size must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
        }
        if let Some(s) = &self.schedule {
            s.validate()?;
        }
        Ok(())
    }

    /// Flip probability in effect at `step`.
    pub fn p_at(&self, step: u64) -> FixedProb {
        match &self.schedule {
            Some(s) => s.at_step(step),
            None => self.p,
        }
    }
}

/// One mutant of `parent`; keeps the parent only if it is strictly fitter.
pub fn naive_step(
    parent: &ScoredNetwork,
    rng: &DeterministicRng,
    p: FixedProb,
    fitness_set: &[Sample<'_>],
    codec: &LabelCodec,
) -> Result<ScoredNetwork> {
    let mutant = parent.net.clone_and_flip(&mut rng.derive(0), p, None)?;
    let fit = evaluate_accuracy(&mutant, fitness_set, codec)?.ppm();
    if parent.current_ppm > fit {
        Ok(parent.clone())
    } else {
        Ok(ScoredNetwork::founder(mutant, fit))
    }
}

/// Spawns `children` mutants per elite member and keeps the best
/// `elite_size` by lineage score. Ties keep pool order: by parent, then by
/// child index, with a kept parent after its own children.
pub fn elite_step(
    elite: &[ScoredNetwork],
    rng: &DeterministicRng,
    config: &EvolverConfig,
    p: FixedProb,
    fitness_set: &[Sample<'_>],
    codec: &LabelCodec,
) -> Result<Vec<ScoredNetwork>> {
    if elite.is_empty() {
        return Err(Error::EmptyElite);
    }
    config.validate()?;
    let per_parent = config.children + config.keep_parent as usize;
    let pool = (0..elite.len() * per_parent)
        .into_par_iter()
        .map(|slot| -> Result<ScoredNetwork> {
            let (m, c) = (slot / per_parent, slot % per_parent);
            let parent = &elite[m];
            if c == config.children {
                return Ok(parent.clone());
            }
            let mut child_rng = rng.derive((m * config.children + c) as u64);
            let net = parent.net.clone_and_flip(&mut child_rng, p, None)?;
            let current = evaluate_accuracy(&net, fitness_set, codec)?.ppm();
            Ok(ScoredNetwork {
                net,
                current_ppm: current,
                lineage_ppm: blend_score(current, parent.lineage_ppm, config.lambda),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pool: Vec<(usize, ScoredNetwork)> = pool.into_iter().enumerate().collect();
    pool.sort_by(|(ia, a), (ib, b)| b.lineage_ppm.cmp(&a.lineage_ppm).then(ia.cmp(ib)));
    Ok(pool
        .into_iter()
        .take(config.elite_size)
        .map(|(_, s)| s)
        .collect())
}

/// Result of a counting-error step.
#[derive(Clone, Debug)]
pub struct CountingOutcome {
    pub net: BinaryNetwork,
    /// Fitness of `net` on the step's batch.
    pub batch_fitness: Fitness,
    /// Number of weights the step was allowed to flip.
    pub candidates: usize,
}

/// Marks wrong weights on `batch`, spawns `children` mutants that flip only
/// those, and returns the child with the best batch accuracy (lowest index
/// on ties; the parent, when kept, ranks after every child).
pub fn counting_error_step(
    net: &BinaryNetwork,
    rng: &DeterministicRng,
    config: &EvolverConfig,
    p: FixedProb,
    batch: &[Sample<'_>],
    codec: &LabelCodec,
) -> Result<CountingOutcome> {
    config.validate()?;
    let mask = mark_wrong(net, batch, codec)?;
    let slots = config.children + config.keep_parent as usize;
    let pool = (0..slots)
        .into_par_iter()
        .map(|c| -> Result<(BinaryNetwork, Fitness)> {
            let candidate = if c == config.children {
                net.clone()
            } else {
                net.clone_and_flip(&mut rng.derive(c as u64), p, Some(&mask.weights))?
            };
            let fit = evaluate_accuracy(&candidate, batch, codec)?;
            Ok((candidate, fit))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, (_, fit)) in pool.iter().enumerate().skip(1) {
        if fit.correct > pool[best].1.correct {
            best = i;
        }
    }
    let (net, batch_fitness) = pool.into_iter().nth(best).unwrap();
    Ok(CountingOutcome {
        net,
        batch_fitness,
        candidates: mask.weight_count(),
    })
}
