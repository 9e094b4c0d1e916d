//! Reduced stochastic model: per-type tip counters driven by the exact
//! selection distributions of random tip selection.
//!
//! Updates happen at creation times (type and free-tip draw) and at
//! creation time plus `h` (attachment). Between events every counter is
//! constant.

use num_rational::Ratio;

use super::{uniform_index, TangleConfig, TipDynamics, Trajectory, TypeCounts};
use crate::error::{invalid, Error, Result};
use crate::rng::SimRng;

/// Per-type counters `(N_i, L_i, W_i, X_i)` with `X_i = L_i - W_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedCounters {
    n: Vec<u64>,
    l: Vec<u64>,
    w: Vec<u64>,
    x: Vec<u64>,
}

impl TypedCounters {
    /// Genesis-only ledger: one free tip of type 0.
    pub fn genesis(types: usize) -> Result<Self> {
        if types < 1 {
            return Err(invalid("type count must be at least 1"));
        }
        let mut c = Self {
            n: vec![0; types],
            l: vec![0; types],
            w: vec![0; types],
            x: vec![0; types],
        };
        c.n[0] = 1;
        c.l[0] = 1;
        c.x[0] = 1;
        Ok(c)
    }

    /// Counters from explicit per-type `(L, W)` pairs; `N` is set to `L`.
    pub fn from_tips(tips: &[(u64, u64)]) -> Result<Self> {
        if tips.is_empty() {
            return Err(invalid("type count must be at least 1"));
        }
        let mut c = Self {
            n: Vec::new(),
            l: Vec::new(),
            w: Vec::new(),
            x: Vec::new(),
        };
        for &(l, w) in tips {
            let x = l
                .checked_sub(w)
                .ok_or_else(|| invalid(format!("pending tips {w} exceed tips {l}")))?;
            c.n.push(l);
            c.l.push(l);
            c.w.push(w);
            c.x.push(x);
        }
        Ok(c)
    }

    pub fn types(&self) -> usize {
        self.l.len()
    }

    pub fn tips(&self) -> &[u64] {
        &self.l
    }

    pub fn get(&self, i: usize) -> TypeCounts {
        TypeCounts {
            n: self.n[i],
            l: self.l[i],
            w: self.w[i],
            x: self.x[i],
        }
    }

    pub fn all(&self) -> Vec<TypeCounts> {
        (0..self.types()).map(|i| self.get(i)).collect()
    }

    /// `X_i + W_i = L_i` for every type.
    pub fn check(&self) -> Result<()> {
        for i in 0..self.types() {
            if self.x[i] + self.w[i] != self.l[i] {
                return Err(Error::Invariant(format!(
                    "type {i}: X={} W={} L={}",
                    self.x[i], self.w[i], self.l[i]
                )));
            }
        }
        Ok(())
    }

    /// Creation update: `N_i += 1`, `U` free tips become pending.
    pub fn apply_create(&mut self, i: usize, u: u8) -> Result<()> {
        let u = u as u64;
        self.x[i] = self.x[i]
            .checked_sub(u)
            .ok_or_else(|| Error::Invariant(format!("type {i}: free tips would go negative")))?;
        self.w[i] += u;
        self.n[i] += 1;
        Ok(())
    }

    /// Attachment update: `L_i += 1 - U`, `X_i += 1`, `W_i -= U`.
    pub fn apply_attach(&mut self, i: usize, u: u8) -> Result<()> {
        let u = u as u64;
        let w = self.w[i]
            .checked_sub(u)
            .ok_or_else(|| Error::Invariant(format!("type {i}: pending tips would go negative")))?;
        let l = (self.l[i] + 1)
            .checked_sub(u)
            .ok_or_else(|| Error::Invariant(format!("type {i}: tips would go negative")))?;
        self.w[i] = w;
        self.l[i] = l;
        self.x[i] += 1;
        Ok(())
    }

    fn add_free_tip(&mut self, i: usize) {
        self.n[i] += 1;
        self.l[i] += 1;
        self.x[i] += 1;
    }
}

/// A created, not yet attached transaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendingRecord {
    pub created_at: f64,
    pub type_index: usize,
    /// Number of free tips it selected, `U(T_a)`.
    pub free_taken: u8,
}

/// Draw a transaction type with probability `L_i^2 / sum_j L_j^2`.
///
/// When a single type has tips no randomness is consumed.
pub fn sample_type(tips: &[u64], rng: &mut SimRng) -> Result<usize> {
    let mut nonzero = tips.iter().enumerate().filter(|(_, &l)| l > 0);
    let first = nonzero.next().ok_or(Error::LedgerExtinct)?.0;
    if nonzero.next().is_none() {
        return Ok(first);
    }
    let total: u64 = tips.iter().map(|&l| l * l).sum();
    let mut r = uniform_index(total, rng);
    for (i, &l) in tips.iter().enumerate() {
        let weight = l * l;
        if r < weight {
            return Ok(i);
        }
        r -= weight;
    }
    unreachable!("draw below total weight")
}

/// Exact distribution of the number of free tips `U` taken by a creation
/// that sees `x` free and `w` pending tips of its type.
pub fn u_distribution(x: u64, w: u64) -> Result<[Ratio<u64>; 3]> {
    let l = x + w;
    if l == 0 {
        return Err(invalid("type has no tips"));
    }
    let l2 = l * l;
    Ok([
        Ratio::new(w * w, l2),
        Ratio::new((2 * w + 1) * x, l2),
        Ratio::new(x * x - x, l2),
    ])
}

/// `E[U] = 2 X / L - X / L^2`.
pub fn expected_u(x: u64, w: u64) -> f64 {
    let l = (x + w) as f64;
    2.0 * x as f64 / l - x as f64 / (l * l)
}

/// Draw `U` with `P(0) = W^2/L^2`, `P(1) = (2W+1)X/L^2`, `P(2) = (X^2-X)/L^2`.
pub fn sample_u(x: u64, w: u64, l: u64, rng: &mut SimRng) -> Result<u8> {
    if l == 0 || x + w != l {
        return Err(invalid(format!("invalid counters X={x} W={w} L={l}")));
    }
    let r = uniform_index(l * l, rng);
    let zero = w * w;
    let one = zero + (2 * w + 1) * x;
    Ok(if r < zero {
        0
    } else if r < one {
        1
    } else {
        2
    })
}

/// Reduced stochastic model state.
#[derive(Debug, Clone)]
pub struct ReducedModel {
    counters: TypedCounters,
}

impl ReducedModel {
    pub fn new(types: usize) -> Result<Self> {
        Ok(Self {
            counters: TypedCounters::genesis(types)?,
        })
    }

    pub fn from_counters(counters: TypedCounters) -> Self {
        Self { counters }
    }

    pub fn counters(&self) -> &TypedCounters {
        &self.counters
    }

    /// Creation at `t`: sample the type from the left-limit counters, then `U`.
    pub fn on_create(&mut self, t: f64, rng: &mut SimRng) -> Result<PendingRecord> {
        let i = sample_type(&self.counters.l, rng)?;
        self.create_of_type(t, i, rng)
    }

    fn create_of_type(&mut self, t: f64, i: usize, rng: &mut SimRng) -> Result<PendingRecord> {
        let c = &self.counters;
        let u = sample_u(c.x[i], c.w[i], c.l[i], rng)?;
        self.counters.apply_create(i, u)?;
        Ok(PendingRecord {
            created_at: t,
            type_index: i,
            free_taken: u,
        })
    }

    pub fn on_attach(&mut self, record: &PendingRecord) -> Result<()> {
        self.counters
            .apply_attach(record.type_index, record.free_taken)
    }
}

impl TipDynamics for ReducedModel {
    type Pending = PendingRecord;

    fn type_count(&self) -> usize {
        self.counters.types()
    }

    fn create(&mut self, t: f64, forced: Option<usize>, rng: &mut SimRng) -> Result<PendingRecord> {
        match forced {
            None => self.on_create(t, rng),
            Some(i) => self.create_of_type(t, i, rng),
        }
    }

    fn attach(&mut self, _t: f64, pending: PendingRecord) -> Result<()> {
        self.on_attach(&pending)
    }

    fn seed_conflict(&mut self, _t: f64, type_index: usize, _rng: &mut SimRng) -> Result<()> {
        if type_index == 0 || type_index >= self.counters.types() {
            return Err(invalid(format!("conflict type {type_index} out of range")));
        }
        self.counters.add_free_tip(type_index);
        Ok(())
    }

    fn counts(&self) -> Vec<TypeCounts> {
        self.counters.all()
    }
}

/// Run the reduced model for `cfg` on the stream `rng`.
pub fn run(cfg: &TangleConfig, rng: &mut SimRng) -> Result<Trajectory> {
    let mut model = ReducedModel::new(cfg.types)?;
    super::simulate(&mut model, cfg, rng)
}

/// Single-type model evaluated directly from the sum form
///
/// ```text
/// N(t) = #{a : T_a <= t}
/// W(t) = sum_{t-h < T_a <= t} U(T_a)
/// X(t) = N(t-h) - sum_{T_a <= t} U(T_a)
/// L(t) = N(t-h) - sum_{T_a <= t-h} U(T_a)
/// ```
///
/// Genesis is treated as a transaction created at `-h` with `U = 0`.
/// With `types = 1` and no injections it consumes randomness in the same
/// order as [`run`], so both produce identical trajectories for one seed.
pub fn run_untyped(cfg: &TangleConfig, rng: &mut SimRng) -> Result<Trajectory> {
    cfg.validate()?;
    if cfg.types != 1 || !cfg.injections.is_empty() {
        return Err(invalid("the untyped model has one type and no injections"));
    }
    let h = cfg.h;
    let arrivals = cfg.arrival_process()?;
    let honest_until = cfg.honest_until.unwrap_or(f64::INFINITY);

    let mut created: Vec<f64> = vec![-h];
    let mut taken: Vec<u64> = vec![0];
    // prefix[k] = sum of U over the first k records
    let mut prefix: Vec<u64> = vec![0, 0];

    let mut t = arrivals.next_after(0.0, rng);
    while t <= cfg.horizon && t <= honest_until {
        // records are sorted, so attached ones form a prefix
        let attached = created.partition_point(|&tb| tb + h <= t);
        let before = created.len();
        let n_lag = attached as u64;
        let x = n_lag - prefix[before];
        let l = n_lag - prefix[attached];
        let w = prefix[before] - prefix[attached];
        let u = sample_u(x, w, l, rng)?;
        created.push(t);
        taken.push(u as u64);
        prefix.push(prefix[before] + u as u64);
        t = arrivals.next_after(t, rng);
    }

    let grid = cfg.grid_len();
    let mut traj = Trajectory {
        dt: cfg.dt_out,
        times: Vec::with_capacity(grid),
        samples: Vec::with_capacity(grid),
    };
    for k in 0..grid {
        let tk = k as f64 * cfg.dt_out;
        let n_now = created.partition_point(|&tb| tb <= tk);
        let attached = created.partition_point(|&tb| tb + h <= tk);
        let l = attached as u64 - prefix[attached];
        let x = attached as u64 - prefix[n_now];
        let w = prefix[n_now] - prefix[attached];
        traj.times.push(tk);
        traj.samples.push(vec![TypeCounts {
            n: n_now as u64,
            l,
            w,
            x,
        }]);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seed_stream;

    fn frequencies(trials: usize, mut f: impl FnMut(&mut SimRng) -> usize, k: usize) -> Vec<f64> {
        let mut rng = seed_stream(11, 0);
        let mut counts = vec![0usize; k];
        for _ in 0..trials {
            counts[f(&mut rng)] += 1;
        }
        counts.iter().map(|&c| c as f64 / trials as f64).collect()
    }

    #[test]
    fn sample_type_single_nonzero() {
        let mut rng = seed_stream(1, 0);
        for _ in 0..100 {
            assert_eq!(sample_type(&[5, 0], &mut rng).unwrap(), 0);
            assert_eq!(sample_type(&[0, 3], &mut rng).unwrap(), 1);
        }
    }

    #[test]
    fn sample_type_all_zero_is_extinct() {
        let mut rng = seed_stream(1, 0);
        assert!(matches!(sample_type(&[0, 0], &mut rng), Err(Error::LedgerExtinct)));
    }

    #[test]
    fn sample_type_frequencies() {
        let f = frequencies(60_000, |r| sample_type(&[3, 3, 3], r).unwrap(), 3);
        for p in f {
            assert!((p - 1.0 / 3.0).abs() < 0.01, "{p}");
        }
        let f = frequencies(60_000, |r| sample_type(&[1, 2], r).unwrap(), 2);
        assert!((f[1] - 0.8).abs() < 0.01, "{f:?}");
        let f = frequencies(60_000, |r| sample_type(&[2, 2], r).unwrap(), 2);
        assert!((f[0] - 0.5).abs() < 0.01, "{f:?}");
    }

    #[test]
    fn u_forced_cases() {
        let mut rng = seed_stream(2, 0);
        for _ in 0..200 {
            assert_eq!(sample_u(0, 4, 4, &mut rng).unwrap(), 0);
            assert_eq!(sample_u(1, 0, 1, &mut rng).unwrap(), 1);
        }
    }

    #[test]
    fn u_two_free_tips() {
        let d = u_distribution(2, 0).unwrap();
        assert_eq!(d[0], Ratio::new(0, 1));
        assert_eq!(d[1], Ratio::new(1, 2));
        assert_eq!(d[2], Ratio::new(1, 2));
        assert_eq!(expected_u(2, 0), 1.5);
        let mean = d[1] + d[2] * 2;
        assert_eq!(mean, Ratio::new(3, 2));
    }

    #[test]
    fn u_rejects_empty_type() {
        let mut rng = seed_stream(2, 0);
        assert!(sample_u(0, 0, 0, &mut rng).is_err());
        assert!(u_distribution(0, 0).is_err());
    }

    #[test]
    fn u_frequencies_match_distribution() {
        let (x, w) = (5u64, 3u64);
        let f = frequencies(80_000, |r| sample_u(x, w, x + w, r).unwrap() as usize, 3);
        let d = u_distribution(x, w).unwrap();
        for k in 0..3 {
            let p = *d[k].numer() as f64 / *d[k].denom() as f64;
            assert!((f[k] - p).abs() < 0.01, "U={k}: {} vs {p}", f[k]);
        }
    }

    #[test]
    fn single_transaction_lifecycle() {
        let mut m = ReducedModel::new(1).unwrap();
        let mut rng = seed_stream(3, 0);
        let rec = m.on_create(0.0, &mut rng).unwrap();
        assert_eq!(rec.free_taken, 1);
        let c = m.counters().get(0);
        assert_eq!((c.l, c.x, c.w, c.n), (1, 0, 1, 2));
        m.on_attach(&rec).unwrap();
        let c = m.counters().get(0);
        assert_eq!((c.l, c.x, c.w), (1, 1, 0));
    }

    #[test]
    fn attach_changes_tip_count_by_one_minus_u() {
        let mut c = TypedCounters::from_tips(&[(4, 2)]).unwrap();
        c.apply_create(0, 0).unwrap();
        c.apply_attach(0, 0).unwrap();
        assert_eq!(c.get(0).l, 5);
        let mut c = TypedCounters::from_tips(&[(4, 0)]).unwrap();
        c.apply_create(0, 2).unwrap();
        c.apply_attach(0, 2).unwrap();
        assert_eq!(c.get(0).l, 3);
        c.check().unwrap();
    }

    #[test]
    fn negative_counter_is_an_error() {
        let mut c = TypedCounters::from_tips(&[(1, 1)]).unwrap();
        assert!(c.apply_create(0, 1).is_err());
        assert!(c.apply_attach(0, 2).is_err());
    }

    #[test]
    fn created_type_follows_only_nonzero_type() {
        let counters = TypedCounters::from_tips(&[(7, 2), (0, 0)]).unwrap();
        let mut m = ReducedModel::from_counters(counters);
        let mut rng = seed_stream(4, 0);
        for k in 0..20 {
            let rec = m.on_create(k as f64, &mut rng).unwrap();
            assert_eq!(rec.type_index, 0);
            m.on_attach(&rec).unwrap();
        }
    }

    #[test]
    fn typed_and_untyped_agree_exactly() {
        for kind in [super::super::ArrivalKind::Poisson, super::super::ArrivalKind::Deterministic] {
            let mut cfg = TangleConfig::new(20.0, 2.0, 1, 30.0);
            cfg.arrival = kind;
            let a = run(&cfg, &mut seed_stream(5, 1)).unwrap();
            let b = run_untyped(&cfg, &mut seed_stream(5, 1)).unwrap();
            assert_eq!(a, b, "{kind:?}");
        }
    }
}
