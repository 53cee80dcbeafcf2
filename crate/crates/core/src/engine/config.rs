use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Game, GameConfig, Mode, Protocol, Transcript};
use crate::adversaries::{build_adversary, AdversarySpec, LieSpec, LyingWrapper};
use crate::error::{Error, Result};
use crate::families::{Family, Hidden};
use crate::learners::{build_learner, LearnerSpec};
use crate::reductions::{build_reduction, ReductionSpec};

fn default_rounds() -> usize {
    100
}

/// One game, as read from an experiment file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Family,
    #[serde(default)]
    pub hidden: Option<Hidden>,
    pub learner: LearnerSpec,
    #[serde(default)]
    pub reduction: Option<ReductionSpec>,
    pub adversary: AdversarySpec,
    #[serde(default)]
    pub lies: Option<LieSpec>,
    pub protocol: Protocol,
    /// Per-round operation cap; absent means unlimited.
    #[serde(default)]
    pub cap: Option<u64>,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
}

impl ExperimentConfig {
    /// Parses JSON, reporting the path of the offending field on failure.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig =
            serde_path_to_error::deserialize(de).map_err(|e| Error::Config { path: e.path().to_string(), msg: e.inner().to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |path: &str, msg: String| Err(Error::Config { path: path.into(), msg });
        if let Err(e) = self.family.validate() {
            return fail("family", e.to_string());
        }
        if let Some(h) = &self.hidden {
            let base = match &self.family {
                Family::Cart { base, .. } => base.as_ref(),
                f => f,
            };
            if let Err(e) = base.check_member(h) {
                return fail("hidden", e.to_string());
            }
        }
        if self.rounds == 0 {
            return fail("rounds", "must be at least 1".into());
        }
        if let Some(l) = &self.lies {
            if l.schedule.len() > l.eta {
                return fail("lies.schedule", format!("{} lies exceed the budget {}", l.schedule.len(), l.eta));
            }
            if l.eta > self.protocol.eta() {
                return fail("lies.eta", format!("protocol allows at most {} lies", self.protocol.eta()));
            }
        }
        Ok(())
    }

    /// Builds the game without playing it.
    pub fn build(&self) -> Result<Game> {
        self.validate()?;
        let learner_family = match &self.reduction {
            Some(ReductionSpec::OrderReduction { target, .. }) => target.clone(),
            _ => match &self.family {
                Family::Cart { base, .. } => base.as_ref().clone(),
                f => f.clone(),
            },
        };
        let mut learner = build_learner(&self.learner, &learner_family)?;
        if let Some(red) = &self.reduction {
            learner = build_reduction(red, learner, &self.family, self.protocol.delay())?;
        }
        let mut adversary = build_adversary(&self.adversary, &self.family, self.hidden.as_ref(), self.seed)?;
        if let Some(l) = &self.lies {
            let coordinate = match &self.family {
                Family::Cart { base, .. } => base.as_ref().clone(),
                f => f.clone(),
            };
            adversary = Box::new(LyingWrapper::new(adversary, coordinate, l.eta, &l.schedule, l.weak)?);
        }
        let config = GameConfig { cap: self.cap, max_rounds: self.rounds, mode: self.mode };
        Game::new(self.family.clone(), learner, adversary, self.protocol.clone(), config)
    }

    pub fn run(&self) -> Result<Transcript> {
        self.build()?.finish()
    }
}

/// Runs every configuration in parallel; results keep the input order.
pub fn sweep(configs: &[ExperimentConfig]) -> Vec<Result<Transcript>> {
    configs.par_iter().map(ExperimentConfig::run).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPAN: &str = r#"{
        "family": {"variant": "linear_real", "n": 3},
        "learner": {"kind": "span"},
        "adversary": {"kind": "basis"},
        "protocol": {"kind": "standard"},
        "rounds": 10
    }"#;

    #[test]
    fn parses_and_runs() {
        let cfg = ExperimentConfig::from_json(SPAN).unwrap();
        let t = cfg.run().unwrap();
        assert_eq!(t.mistakes, 3);
    }

    #[test]
    fn reports_field_paths() {
        let bad = SPAN.replace(r#""rounds": 10"#, r#""rounds": "ten""#);
        match ExperimentConfig::from_json(&bad) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "rounds"),
            other => panic!("{other:?}"),
        }
        // Tagged enums are buffered, so the path stops at the enum itself.
        let bad = SPAN.replace(r#""n": 3"#, r#""n": "three""#);
        match ExperimentConfig::from_json(&bad) {
            Err(Error::Config { path, msg }) => assert_eq!((path.as_str(), msg.contains("invalid type")), ("family", true)),
            other => panic!("{other:?}"),
        }
        let bad = SPAN.replace(r#""kind": "span""#, r#""kind": "spam""#);
        match ExperimentConfig::from_json(&bad) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "learner.kind"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sweep_matches_sequential_runs() {
        let configs: Vec<ExperimentConfig> = (1..=5)
            .map(|n| {
                let mut c = ExperimentConfig::from_json(SPAN).unwrap();
                c.family = Family::LinearReal { n };
                c
            })
            .collect();
        let mistakes: Vec<usize> = sweep(&configs).into_iter().map(|t| t.unwrap().mistakes).collect();
        assert_eq!(mistakes, vec![1, 2, 3, 4, 5]);
        assert!(sweep(&[]).is_empty());
    }
}
