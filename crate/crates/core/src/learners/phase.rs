use super::{Feedback, Learner};
use crate::error::Result;
use crate::families::{Input, OutputValue};
use crate::numerics::OpMeter;

/// A learner split into a cheap hypothesis evaluation and a resumable update.
pub trait SimpleOnline: Clone + Send + Sync + 'static {
    fn name(&self) -> String;
    /// Evaluates the current hypothesis.
    fn guess(&mut self, x: &Input, meter: &mut OpMeter) -> Result<OutputValue>;
    /// Queues a correction for the input just answered. No arithmetic.
    fn start_update(&mut self, x: &Input, y: &OutputValue) -> Result<()>;
    /// Advances queued work by at most `budget` operations; `true` once idle.
    fn work(&mut self, meter: &mut OpMeter, budget: Option<u64>) -> Result<bool>;
    fn is_idle(&self) -> bool;
    fn default_output(&self, x: &Input) -> OutputValue;
    fn codomain(&self) -> Option<Vec<OutputValue>>;
}

fn truth_of<S: SimpleOnline>(base: &S, guess: &OutputValue, fb: Feedback) -> Option<OutputValue> {
    match fb {
        Feedback::Reveal(y) => Some(y),
        Feedback::Verdict(false) => base.codomain().filter(|c| c.len() == 2).and_then(|c| c.into_iter().find(|v| v != guess)),
        Feedback::Verdict(true) | Feedback::Skip => None,
    }
}

/// Finishes every update at the start of the next round.
#[derive(Clone, Debug)]
pub struct Eager<S> {
    base: S,
    last: Option<(Input, OutputValue)>,
}

impl<S: SimpleOnline> Eager<S> {
    pub fn new(base: S) -> Self {
        Eager { base, last: None }
    }

    pub fn base(&self) -> &S {
        &self.base
    }
}

impl<S: SimpleOnline> Learner for Eager<S> {
    fn name(&self) -> String {
        self.base.name()
    }

    fn predict(&mut self, x: &Input, meter: &mut OpMeter) -> Result<OutputValue> {
        self.base.work(meter, None)?;
        let g = self.base.guess(x, meter)?;
        self.last = Some((x.clone(), g.clone()));
        Ok(g)
    }

    fn feedback(&mut self, fb: Feedback) -> Result<()> {
        let Some((x, guess)) = self.last.take() else { return Ok(()) };
        match truth_of(&self.base, &guess, fb) {
            Some(y) if y != guess => self.base.start_update(&x, &y),
            _ => Ok(()),
        }
    }

    fn box_clone(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }
}

/// Two-phase schedule under a per-round budget `w`: answer with the current
/// hypothesis until a mistake, then spend up to `w` operations per round on
/// the update while answering the default output, then resume.
#[derive(Clone, Debug)]
pub struct Phased<S> {
    base: S,
    w: u64,
    last: Option<(Input, OutputValue)>,
    busy: bool,
    task_ops: u64,
    updates: u64,
    max_update_ops: u64,
    update_rounds: u64,
}

impl<S: SimpleOnline> Phased<S> {
    pub fn new(base: S, w: u64) -> Self {
        Phased { base, w, last: None, busy: false, task_ops: 0, updates: 0, max_update_ops: 0, update_rounds: 0 }
    }

    /// Number of corrections started so far.
    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Largest total cost of a single update, counting one still in progress.
    pub fn max_update_ops(&self) -> u64 {
        self.max_update_ops
    }

    /// Rounds spent in the update phase.
    pub fn update_rounds(&self) -> u64 {
        self.update_rounds
    }
}

impl<S: SimpleOnline> Learner for Phased<S> {
    fn name(&self) -> String {
        format!("phased(w={})[{}]", self.w, self.base.name())
    }

    fn predict(&mut self, x: &Input, meter: &mut OpMeter) -> Result<OutputValue> {
        if self.busy {
            self.update_rounds += 1;
            let before = meter.used();
            let done = self.base.work(meter, Some(self.w))?;
            self.task_ops += meter.used() - before;
            self.max_update_ops = self.max_update_ops.max(self.task_ops);
            if done {
                self.busy = false;
            }
            self.last = None;
            return Ok(self.base.default_output(x));
        }
        assert!(self.base.is_idle(), "work queued outside the update phase");
        let g = self.base.guess(x, meter)?;
        self.last = Some((x.clone(), g.clone()));
        Ok(g)
    }

    fn feedback(&mut self, fb: Feedback) -> Result<()> {
        let Some((x, guess)) = self.last.take() else { return Ok(()) };
        match truth_of(&self.base, &guess, fb) {
            Some(y) if y != guess => {
                self.base.start_update(&x, &y)?;
                self.busy = true;
                self.task_ops = 0;
                self.updates += 1;
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn box_clone(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }

    fn diagnostics(&self) -> serde_json::Value {
        serde_json::json!({
            "updates": self.updates,
            "max_update_ops": self.max_update_ops,
            "update_rounds": self.update_rounds,
        })
    }
}
