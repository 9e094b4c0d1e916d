//! Tangle growth under random tip selection.
//!
//! Two simulators share one event-driven driver:
//!
//! * [`agent::AgentTangle`] keeps every site, its parents and the full DAG.
//! * [`reduced::ReducedModel`] keeps only the per-type counters
//!   `(N_i, L_i, W_i, X_i)`.
//!
//! Both implement [`TipDynamics`], so [`simulate`] drives them from the same
//! arrival stream, injection schedule and output grid. Type indices are
//! zero-based in the Rust API; type `0` is the honest ledger that genesis
//! belongs to. CSV output labels types from 1.

pub mod agent;
pub mod events;
pub mod reduced;

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::SimRng;
use events::{EventClass, EventQueue};

/// How creation times are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ArrivalKind {
    #[default]
    Poisson,
    Deterministic,
}

/// Transaction creation process with rate `rate` per time unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalProcess {
    pub rate: f64,
    pub kind: ArrivalKind,
}

impl ArrivalProcess {
    pub fn new(rate: f64, kind: ArrivalKind) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(invalid(format!("arrival rate must be positive, got {rate}")));
        }
        Ok(Self { rate, kind })
    }

    /// Next creation time strictly after `t`.
    pub fn next_after(&self, t: f64, rng: &mut SimRng) -> f64 {
        let gap = match self.kind {
            ArrivalKind::Poisson => Exp::new(self.rate).expect("rate checked").sample(rng),
            ArrivalKind::Deterministic => 1.0 / self.rate,
        };
        let next = t + gap;
        if next > t {
            next
        } else {
            t.next_up()
        }
    }
}

/// A burst of conflicting transactions: at `time` one seed site of
/// `type_index` enters the ledger, followed by `count - 1` creations that
/// select tips of that type only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Injection {
    pub time: f64,
    pub count: usize,
    pub type_index: usize,
}

/// Parameters shared by both tip-dynamics simulators.
#[derive(Debug, Clone, PartialEq)]
pub struct TangleConfig {
    pub lambda: f64,
    pub h: f64,
    pub types: usize,
    pub horizon: f64,
    pub arrival: ArrivalKind,
    /// Output grid spacing.
    pub dt_out: f64,
    pub injections: Vec<Injection>,
    /// Honest arrivals stop after this time, if set.
    pub honest_until: Option<f64>,
}

impl TangleConfig {
    pub fn new(lambda: f64, h: f64, types: usize, horizon: f64) -> Self {
        Self {
            lambda,
            h,
            types,
            horizon,
            arrival: ArrivalKind::Poisson,
            dt_out: 0.5,
            injections: Vec::new(),
            honest_until: None,
        }
    }

    pub fn with_injection(mut self, time: f64, count: usize, type_index: usize) -> Self {
        self.injections.push(Injection {
            time,
            count,
            type_index,
        });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(invalid("lambda must be positive"));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(invalid("delay h must be positive"));
        }
        if self.types < 1 {
            return Err(invalid("type count must be at least 1"));
        }
        if !(self.horizon > self.h) {
            return Err(invalid("horizon must exceed the delay h"));
        }
        if !(self.dt_out.is_finite() && self.dt_out > 0.0) {
            return Err(invalid("dt_out must be positive"));
        }
        for inj in &self.injections {
            if inj.type_index == 0 || inj.type_index >= self.types {
                return Err(invalid(format!(
                    "injection type {} must be in 1..{}",
                    inj.type_index, self.types
                )));
            }
            if inj.count == 0 || !(inj.time >= 0.0) {
                return Err(invalid("injection needs count >= 1 and time >= 0"));
            }
        }
        Ok(())
    }

    pub fn arrival_process(&self) -> Result<ArrivalProcess> {
        ArrivalProcess::new(self.lambda, self.arrival)
    }

    pub fn grid_len(&self) -> usize {
        (self.horizon / self.dt_out + 1e-9).floor() as usize + 1
    }
}

/// Counter values for one type at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TypeCounts {
    /// Transactions of this type created so far (genesis and seeds included).
    pub n: u64,
    /// Tips.
    pub l: u64,
    /// Pending tips.
    pub w: u64,
    /// Free tips.
    pub x: u64,
}

/// Common interface of the agent-based and reduced simulators.
pub trait TipDynamics {
    /// Bookkeeping carried from a creation to its attachment.
    type Pending;

    fn type_count(&self) -> usize;

    /// Create a transaction at `t`. With `forced = Some(i)` the transaction is
    /// of type `i` and selects among type-`i` tips only.
    fn create(&mut self, t: f64, forced: Option<usize>, rng: &mut SimRng) -> Result<Self::Pending>;

    /// Attach a previously created transaction; `t` is its creation time plus `h`.
    fn attach(&mut self, t: f64, pending: Self::Pending) -> Result<()>;

    /// Insert the first site of a conflicting type at `t`.
    fn seed_conflict(&mut self, t: f64, type_index: usize, rng: &mut SimRng) -> Result<()>;

    fn counts(&self) -> Vec<TypeCounts>;
}

/// Per-type counters sampled on a uniform grid (step interpolation).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    /// `samples[k][i]` is type `i` at `times[k]`.
    pub samples: Vec<Vec<TypeCounts>>,
}

impl Trajectory {
    pub fn types(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    /// Series of one counter for one type.
    pub fn series(&self, type_index: usize, field: impl Fn(&TypeCounts) -> u64) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| field(&s[type_index]) as f64)
            .collect()
    }

    /// Rows `time,type,L,X,W,N` with types labelled from 1.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "time,type,L,X,W,N")?;
        for (t, row) in self.times.iter().zip(&self.samples) {
            for (i, c) in row.iter().enumerate() {
                writeln!(out, "{},{},{},{},{},{}", t, i + 1, c.l, c.x, c.w, c.n)?;
            }
        }
        Ok(())
    }
}

enum Event<P> {
    Arrival,
    Forced(usize),
    Seed(usize),
    Attach(P),
}

/// Run `model` through the arrival stream and injection schedule of `cfg`.
///
/// RNG draws happen in a fixed order: the first arrival gap, then for every
/// creation the model's selection draws followed (for honest arrivals) by
/// the next gap.
pub fn simulate<M: TipDynamics>(model: &mut M, cfg: &TangleConfig, rng: &mut SimRng) -> Result<Trajectory> {
    cfg.validate()?;
    if model.type_count() != cfg.types {
        return Err(invalid("model type count does not match configuration"));
    }
    let arrivals = cfg.arrival_process()?;
    let honest_until = cfg.honest_until.unwrap_or(f64::INFINITY);

    let mut queue: EventQueue<Event<M::Pending>> = EventQueue::new();
    let first = arrivals.next_after(0.0, rng);
    if first <= honest_until {
        queue.push(first, EventClass::Create, Event::Arrival);
    }
    for inj in &cfg.injections {
        queue.push(inj.time, EventClass::Seed, Event::Seed(inj.type_index));
        for _ in 1..inj.count {
            queue.push(inj.time, EventClass::Create, Event::Forced(inj.type_index));
        }
    }

    let grid = cfg.grid_len();
    let mut traj = Trajectory {
        dt: cfg.dt_out,
        times: Vec::with_capacity(grid),
        samples: Vec::with_capacity(grid),
    };
    let emit_until = |traj: &mut Trajectory, limit: f64, inclusive: bool, counts: &dyn Fn() -> Vec<TypeCounts>| {
        while traj.times.len() < grid {
            let tk = traj.times.len() as f64 * cfg.dt_out;
            let due = if inclusive { tk <= limit } else { tk < limit };
            if !due {
                break;
            }
            traj.times.push(tk);
            traj.samples.push(counts());
        }
    };

    while let Some(te) = queue.peek_time() {
        if te > cfg.horizon {
            break;
        }
        emit_until(&mut traj, te, false, &|| model.counts());
        let (t, _, ev) = queue.pop().expect("peeked");
        match ev {
            Event::Arrival => {
                let p = model.create(t, None, rng)?;
                queue.push(t + cfg.h, EventClass::Attach, Event::Attach(p));
                let next = arrivals.next_after(t, rng);
                if next <= honest_until {
                    queue.push(next, EventClass::Create, Event::Arrival);
                }
            }
            Event::Forced(i) => {
                let p = model.create(t, Some(i), rng)?;
                queue.push(t + cfg.h, EventClass::Attach, Event::Attach(p));
            }
            Event::Seed(i) => model.seed_conflict(t, i, rng)?,
            Event::Attach(p) => model.attach(t, p)?,
        }
    }
    emit_until(&mut traj, cfg.horizon, true, &|| model.counts());
    Ok(traj)
}

/// Draw a uniform index in `0..n` (`n > 0`).
pub(crate) fn uniform_index(n: u64, rng: &mut SimRng) -> u64 {
    rng.random_range(0..n)
}
