//! Event-driven Monte Carlo of the synchronization system.
//!
//! Components are advanced lazily. Each one remembers the time of its last
//! update and receives a single Levy increment covering the gap when it
//! next matters: when it sends, or at an observation time. A recipient's
//! pending motion is discarded because the copy overwrites it. Since
//! increments over disjoint intervals are independent, this has the same
//! law as moving every component at every epoch, but costs one increment
//! per event instead of N.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::{Read, Write};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::levy::LevySpec;
use crate::me_dist::MeDistribution;
use crate::rng::ReplicaRng;
use crate::{k_n, Error, Result};

/// Who receives a sender's state.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Routing {
    /// Uniform over the other `N - 1` components.
    #[default]
    Symmetric,
    /// Row `k` is the recipient law of sender `k`.
    Matrix { matrix: Vec<Vec<f64>> },
    /// Clocks run but nothing is copied.
    Disabled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialLaw {
    Gaussian { sd: f64 },
    Uniform { half_width: f64 },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialState {
    #[default]
    Zero,
    /// Every coordinate of every component drawn independently.
    Iid { law: InitialLaw },
    /// An explicit `N x d` configuration.
    Fixed { x: Vec<Vec<f64>> },
}

/// Which component sends at an epoch of the merged clock flow.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SenderRule {
    /// The component whose clock rang.
    #[default]
    ClockOwner,
    /// A component drawn uniformly, independently of which clock rang.
    /// Identical in law to `ClockOwner` for exponential clocks.
    UniformPair,
}

/// Epochs injected by hand, for testing the one-step recurrence.
#[derive(Clone, Debug, PartialEq)]
pub struct ScriptedClock {
    pub epochs: Vec<f64>,
    /// Sender per epoch; uniform over components when absent.
    pub senders: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ClockMode {
    Renewal,
    Scripted(ScriptedClock),
}

#[derive(Clone, Debug)]
pub struct SyncSystemConfig {
    pub n: usize,
    pub levy: LevySpec,
    pub inter_event: MeDistribution,
    pub routing: Routing,
    pub initial: InitialState,
    pub horizon: f64,
    pub clock: ClockMode,
    pub sender: SenderRule,
}

impl SyncSystemConfig {
    /// Symmetric routing, all components at the origin, renewal clocks.
    pub fn new(n: usize, levy: LevySpec, inter_event: MeDistribution, horizon: f64) -> Self {
        Self {
            n,
            levy,
            inter_event,
            routing: Routing::Symmetric,
            initial: InitialState::Zero,
            horizon,
            clock: ClockMode::Renewal,
            sender: SenderRule::ClockOwner,
        }
    }

    pub fn with_sender(mut self, sender: SenderRule) -> Self {
        self.sender = sender;
        self
    }

    pub fn with_routing(mut self, routing: Routing) -> Self {
        self.routing = routing;
        self
    }

    pub fn with_initial(mut self, initial: InitialState) -> Self {
        self.initial = initial;
        self
    }

    pub fn with_clock(mut self, clock: ClockMode) -> Self {
        self.clock = clock;
        self
    }

    pub fn dim(&self) -> usize {
        self.levy.dim()
    }

    /// Errors carry the offending field path, e.g. `routing.matrix[2]`.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n < 2 {
            return Err(Error::config("n", format!("need at least 2 components, got {n}")));
        }
        self.levy.validate().map_err(|e| Error::config("levy", e.to_string()))?;
        if self.inter_event.sampler_form().is_none() && self.clock == ClockMode::Renewal {
            return Err(Error::config("inter_event", "analytics-only distribution cannot drive a simulation"));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::config("horizon", "must be finite and nonnegative"));
        }
        if let Routing::Matrix { matrix } = &self.routing {
            if matrix.len() != n {
                return Err(Error::config("routing.matrix", format!("expected {n} rows, got {}", matrix.len())));
            }
            for (i, row) in matrix.iter().enumerate() {
                let path = format!("routing.matrix[{i}]");
                if row.len() != n {
                    return Err(Error::config(path, format!("expected {n} entries, got {}", row.len())));
                }
                if row[i] != 0.0 {
                    return Err(Error::config(path, "diagonal entry must be exactly 0"));
                }
                if row.iter().any(|r| !(*r >= 0.0)) {
                    return Err(Error::config(path, "entries must be nonnegative"));
                }
                let s: f64 = row.iter().sum();
                if (s - 1.0).abs() > 1e-12 {
                    return Err(Error::config(path, format!("row sums to {s}, expected 1")));
                }
            }
        }
        let d = self.dim();
        match &self.initial {
            InitialState::Fixed { x } => {
                if x.len() != n || x.iter().any(|r| r.len() != d) {
                    return Err(Error::config("initial.x", format!("expected an {n} x {d} matrix")));
                }
            }
            InitialState::Iid { law } => {
                let ok = match law {
                    InitialLaw::Gaussian { sd } => *sd >= 0.0,
                    InitialLaw::Uniform { half_width } => *half_width >= 0.0,
                };
                if !ok {
                    return Err(Error::config("initial.law", "scale must be nonnegative"));
                }
            }
            InitialState::Zero => {}
        }
        if let ClockMode::Scripted(s) = &self.clock {
            if s.epochs.windows(2).any(|w| w[1] < w[0]) || s.epochs.iter().any(|t| !(*t >= 0.0)) {
                return Err(Error::config("clock.epochs", "must be nonnegative and sorted"));
            }
            if let Some(snd) = &s.senders {
                if snd.len() != s.epochs.len() || snd.iter().any(|&k| k >= n) {
                    return Err(Error::config("clock.senders", "one valid sender index per epoch"));
                }
            }
        }
        Ok(())
    }

    /// Symmetric routing with an exchangeable initial law.
    pub fn is_symmetric(&self) -> bool {
        self.routing == Routing::Symmetric && !matches!(self.initial, InitialState::Fixed { .. })
    }

    /// Hash of the full configuration, used to label samples.
    pub fn fingerprint(&self) -> String {
        let text = format!(
            "{}|{:?}|{:?}|{:?}|{:?}|{:?}|{:?}|{:?}",
            self.n,
            self.levy,
            self.inter_event.p_star(),
            self.routing,
            self.initial,
            self.horizon,
            self.clock,
            self.sender
        );
        crate::sha256_hex(text.as_bytes())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Fire {
    t: f64,
    k: usize,
}

impl Eq for Fire {}

impl Ord for Fire {
    // BinaryHeap is a max-heap: earliest time, then lowest index, wins
    fn cmp(&self, o: &Self) -> Ordering {
        o.t.total_cmp(&self.t).then(o.k.cmp(&self.k))
    }
}

impl PartialOrd for Fire {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// One processed epoch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub time: f64,
    pub sender: usize,
    pub recipient: Option<usize>,
}

pub struct SimulationState<'a> {
    config: &'a SyncSystemConfig,
    pub t: f64,
    x: Vec<f64>,
    last: Vec<f64>,
    heap: BinaryHeap<Fire>,
    script_pos: usize,
    rng: ReplicaRng,
    pub event_count: u64,
}

impl<'a> SimulationState<'a> {
    pub fn new(config: &'a SyncSystemConfig, base_seed: u64, replica: u64) -> Result<Self> {
        let n = config.n;
        let d = config.dim();
        let mut rng = ReplicaRng::new(base_seed, replica);
        let mut x = vec![0.0; n * d];
        match &config.initial {
            InitialState::Zero => {}
            InitialState::Fixed { x: rows } => {
                for (j, r) in rows.iter().enumerate() {
                    x[j * d..(j + 1) * d].copy_from_slice(r);
                }
            }
            InitialState::Iid { law } => {
                for v in x.iter_mut() {
                    *v = match law {
                        InitialLaw::Gaussian { sd } => {
                            let g: f64 = StandardNormal.sample(&mut rng.initial);
                            sd * g
                        },
                        InitialLaw::Uniform { half_width } => half_width * (2.0 * rng.initial.random::<f64>() - 1.0),
                    };
                }
            }
        }
        let mut heap = BinaryHeap::with_capacity(n);
        if config.clock == ClockMode::Renewal {
            for k in 0..n {
                let t = config.inter_event.sample(&mut rng.clock)?;
                heap.push(Fire { t, k });
            }
        }
        Ok(Self { config, t: 0.0, x, last: vec![0.0; n], heap, script_pos: 0, rng, event_count: 0 })
    }

    pub fn next_epoch(&self) -> Option<f64> {
        match &self.config.clock {
            ClockMode::Renewal => self.heap.peek().map(|f| f.t),
            ClockMode::Scripted(s) => s.epochs.get(self.script_pos).copied(),
        }
    }

    fn advance(&mut self, k: usize, to: f64) {
        let d = self.config.dim();
        let dt = to - self.last[k];
        if dt > 0.0 {
            self.config.levy.sample_increment(dt, &mut self.rng.levy, &mut self.x[k * d..(k + 1) * d]);
        }
        self.last[k] = to;
    }

    fn recipient(&mut self, k: usize) -> Option<usize> {
        let n = self.config.n;
        match &self.config.routing {
            Routing::Disabled => None,
            Routing::Symmetric => {
                let j = self.rng.routing.random_range(0..n - 1);
                Some(if j >= k { j + 1 } else { j })
            }
            Routing::Matrix { matrix } => {
                let u: f64 = self.rng.routing.random();
                let row = &matrix[k];
                let mut acc = 0.0;
                let mut last = None;
                for (j, &p) in row.iter().enumerate() {
                    if p > 0.0 {
                        acc += p;
                        last = Some(j);
                        if u < acc {
                            return Some(j);
                        }
                    }
                }
                last
            }
        }
    }

    /// Processes the next epoch; `None` when a scripted clock is exhausted.
    pub fn step(&mut self) -> Option<Event> {
        let (time, owner) = match &self.config.clock {
            ClockMode::Renewal => {
                let f = self.heap.pop()?;
                (f.t, f.k)
            }
            ClockMode::Scripted(s) => {
                let t = *s.epochs.get(self.script_pos)?;
                let k = match &s.senders {
                    Some(v) => v[self.script_pos],
                    None => self.rng.routing.random_range(0..self.config.n),
                };
                self.script_pos += 1;
                (t, k)
            }
        };
        self.t = time;
        let sender = match self.config.sender {
            SenderRule::UniformPair if self.config.clock == ClockMode::Renewal => {
                self.rng.routing.random_range(0..self.config.n)
            }
            _ => owner,
        };
        let recipient = self.recipient(sender);
        if let Some(j) = recipient {
            self.advance(sender, time);
            let d = self.config.dim();
            let (src, dst) = (sender * d, j * d);
            for i in 0..d {
                self.x[dst + i] = self.x[src + i];
            }
            self.last[j] = time;
        }
        if self.config.clock == ClockMode::Renewal {
            // sampler presence is checked by validate and SimulationState::new
            let gap = self.config.inter_event.sample(&mut self.rng.clock).unwrap_or(f64::INFINITY);
            self.heap.push(Fire { t: time + gap, k: owner });
        }
        self.event_count += 1;
        Some(Event { time, sender, recipient })
    }

    /// Processes every epoch up to and including `t`, then brings all
    /// components to time `t`.
    pub fn run_until(&mut self, t: f64) {
        while let Some(next) = self.next_epoch() {
            if next > t {
                break;
            }
            self.step();
        }
        self.t = self.t.max(t);
        self.sync_all();
    }

    /// Brings every component to the current time.
    pub fn sync_all(&mut self) {
        let t = self.t;
        for k in 0..self.config.n {
            self.advance(k, t);
        }
    }

    /// Row-major `N x d` positions; current only after [`Self::sync_all`]
    /// or [`Self::run_until`].
    pub fn positions(&self) -> &[f64] {
        &self.x
    }

    pub fn component(&self, j: usize) -> &[f64] {
        let d = self.config.dim();
        &self.x[j * d..(j + 1) * d]
    }

    pub fn v_statistic(&self, lambda: &[f64]) -> f64 {
        v_statistic(&self.x, self.config.n, self.config.dim(), lambda)
    }
}

/// `(2/((N-1)N)) sum_{i<j} cos <lambda, x_i - x_j>` over row-major positions.
pub fn v_statistic(x: &[f64], n: usize, d: usize, lambda: &[f64]) -> f64 {
    // cos(a - b) = cos a cos b + sin a sin b, so the pair sum is
    // (|sum e^{i a}|^2 - n) / 2
    let (mut c, mut s) = (0.0, 0.0);
    for j in 0..n {
        let a: f64 = (0..d).map(|i| lambda[i] * x[j * d + i]).sum();
        c += a.cos();
        s += a.sin();
    }
    let pairs = 0.5 * (c * c + s * s - n as f64);
    2.0 * pairs / ((n as f64 - 1.0) * n as f64)
}

/// Pairwise form of [`v_statistic`], kept as an independent check.
pub fn v_statistic_pairwise(x: &[f64], n: usize, d: usize, lambda: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let a: f64 = (0..d).map(|k| lambda[k] * (x[i * d + k] - x[j * d + k])).sum();
            s += a.cos();
        }
    }
    2.0 * s / ((n as f64 - 1.0) * n as f64)
}

/// Exhaustive check of `E V0(Sx) = k_N V0(x)`, where `V0 = V - 1` and `S`
/// ranges uniformly over the `(N-1)N` copy maps. Returns (average, prediction).
pub fn contraction_oracle(x: &[Vec<f64>], lambda: &[f64]) -> Result<(f64, f64)> {
    let n = x.len();
    if n < 2 {
        return Err(Error::arg("need at least two components"));
    }
    if n > 8 {
        return Err(Error::EnumerationTooLarge);
    }
    let d = lambda.len();
    let flat: Vec<f64> = x.iter().flatten().copied().collect();
    let v0 = v_statistic_pairwise(&flat, n, d, lambda) - 1.0;
    let mut total = 0.0;
    let mut y = flat.clone();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            y.copy_from_slice(&flat);
            for k in 0..d {
                y[j * d + k] = flat[i * d + k];
            }
            total += v_statistic_pairwise(&y, n, d, lambda) - 1.0;
        }
    }
    let avg = total / ((n - 1) * n) as f64;
    Ok((avg, k_n(n) * v0))
}

/// Differences `x_j(T) - x_k(T)` over independent replicas.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferenceSample {
    /// Row-major `replicas x d`.
    pub values: Vec<f64>,
    pub dim: usize,
    pub meta: SampleMeta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub digest: String,
    pub n: usize,
    pub pair: (usize, usize),
    pub horizon: f64,
    pub replicas: usize,
    pub base_seed: u64,
}

pub const BIN_MAGIC: [u8; 8] = *b"LVSYNC01";

impl DifferenceSample {
    /// Wraps plain values, e.g. for tests or externally produced draws.
    pub fn from_values(values: Vec<f64>, dim: usize) -> Self {
        let replicas = values.len() / dim.max(1);
        let meta = SampleMeta { digest: String::new(), n: 0, pair: (0, 0), horizon: 0.0, replicas, base_seed: 0 };
        Self { values, dim, meta }
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coordinate(&self, c: usize) -> Vec<f64> {
        self.values.iter().skip(c).step_by(self.dim).copied().collect()
    }

    /// 32-byte header (magic, N, d, replica count as little-endian u64),
    /// then the values as little-endian f64, row-major.
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(&BIN_MAGIC)?;
        w.write_all(&(self.meta.n as u64).to_le_bytes())?;
        w.write_all(&(self.dim as u64).to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads what [`Self::write_binary`] wrote; trailing bytes are ignored.
    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self> {
        let mut head = [0u8; 32];
        r.read_exact(&mut head)?;
        if head[..8] != BIN_MAGIC {
            return Err(Error::arg("not a levysync sample file"));
        }
        let word = |i: usize| u64::from_le_bytes(head[i..i + 8].try_into().unwrap()) as usize;
        let (n, dim, reps) = (word(8), word(16), word(24));
        let mut buf = vec![0u8; dim * reps * 8];
        r.read_exact(&mut buf)?;
        let values = buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        let mut s = Self::from_values(values, dim);
        s.meta.n = n;
        Ok(s)
    }
}

pub fn sample_differences(
    config: &SyncSystemConfig,
    pair: (usize, usize),
    replicas: usize,
    base_seed: u64,
) -> Result<DifferenceSample> {
    config.validate()?;
    if replicas == 0 {
        return Err(Error::arg("replicas must be at least 1"));
    }
    let (j, k) = pair;
    if j >= config.n || k >= config.n || j == k {
        return Err(Error::arg(format!("pair ({j}, {k}) must name two distinct components")));
    }
    let d = config.dim();
    let rows: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|r| -> Result<Vec<f64>> {
            let mut s = SimulationState::new(config, base_seed, r as u64)?;
            s.run_until(config.horizon);
            Ok((0..d).map(|i| s.component(j)[i] - s.component(k)[i]).collect())
        })
        .collect::<Result<_>>()?;
    Ok(DifferenceSample {
        values: rows.into_iter().flatten().collect(),
        dim: d,
        meta: SampleMeta {
            digest: config.fingerprint(),
            n: config.n,
            pair,
            horizon: config.horizon,
            replicas,
            base_seed,
        },
    })
}

/// One row of a V-statistic table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiRow {
    pub t: f64,
    pub lambda: Vec<f64>,
    pub estimate: f64,
    pub se: f64,
}

const BLOCK: usize = 64;

/// Mean and standard error of `V(x(t))` over replicas at each `(t, lambda)`.
///
/// Works for any configuration; its mean equals the difference
/// characteristic function only in the symmetric model (see [`chi_mc`]).
pub fn v_trajectory(
    config: &SyncSystemConfig,
    lambdas: &[Vec<f64>],
    times: &[f64],
    replicas: usize,
    base_seed: u64,
) -> Result<Vec<ChiRow>> {
    config.validate()?;
    if replicas == 0 {
        return Err(Error::arg("replicas must be at least 1"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::arg("time points must be nonnegative and sorted"));
    }
    let (n, d) = (config.n, config.dim());
    if lambdas.iter().any(|l| l.len() != d) {
        return Err(Error::arg(format!("every lambda must have {d} components")));
    }
    let cells = times.len() * lambdas.len();
    let blocks = replicas.div_ceil(BLOCK);
    // per block, summed in replica order; blocks are then summed in block order
    let partial: Vec<Vec<(f64, f64)>> = (0..blocks)
        .into_par_iter()
        .map(|b| -> Result<Vec<(f64, f64)>> {
            let mut acc = vec![(0.0, 0.0); cells];
            for r in b * BLOCK..((b + 1) * BLOCK).min(replicas) {
                let mut s = SimulationState::new(config, base_seed, r as u64)?;
                for (ti, &t) in times.iter().enumerate() {
                    s.run_until(t);
                    for (li, lam) in lambdas.iter().enumerate() {
                        let v = v_statistic(s.positions(), n, d, lam);
                        let a = &mut acc[ti * lambdas.len() + li];
                        a.0 += v;
                        a.1 += v * v;
                    }
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = vec![(0.0, 0.0); cells];
    for p in partial {
        for (t, q) in total.iter_mut().zip(p) {
            t.0 += q.0;
            t.1 += q.1;
        }
    }
    let r = replicas as f64;
    let mut rows = Vec::with_capacity(cells);
    for (ti, &t) in times.iter().enumerate() {
        for (li, lam) in lambdas.iter().enumerate() {
            let (s, s2) = total[ti * lambdas.len() + li];
            let mean = s / r;
            let var = if replicas > 1 { ((s2 - r * mean * mean) / (r - 1.0)).max(0.0) } else { 0.0 };
            rows.push(ChiRow { t, lambda: lam.clone(), estimate: mean, se: (var / r).sqrt() });
        }
    }
    Ok(rows)
}

/// Variance-reduced estimate of the difference characteristic function.
pub fn chi_mc(
    config: &SyncSystemConfig,
    lambdas: &[Vec<f64>],
    replicas: usize,
    base_seed: u64,
    times: &[f64],
) -> Result<Vec<ChiRow>> {
    if !config.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    v_trajectory(config, lambdas, times, replicas, base_seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn markov(n: usize, horizon: f64) -> SyncSystemConfig {
        SyncSystemConfig::new(n, LevySpec::brownian(1.0), MeDistribution::exponential(1.0).unwrap(), horizon)
    }

    #[test]
    fn v_statistic_examples() {
        let lam = 0.7;
        let x = [0.0, std::f64::consts::PI / (2.0 * lam), std::f64::consts::PI / lam];
        assert!((v_statistic(&x, 3, 1, &[lam]) + 1.0 / 3.0).abs() < 1e-14);
        assert!((v_statistic(&x, 3, 1, &[0.0]) - 1.0).abs() < 1e-15);
        assert!((v_statistic(&[2.0; 4], 4, 1, &[1.3]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn contraction_examples() {
        let (a, p) = contraction_oracle(&[vec![1.0], vec![1.0], vec![1.0]], &[0.4]).unwrap();
        assert!(a.abs() < 1e-15 && p.abs() < 1e-15);
        let (a, p) = contraction_oracle(&[vec![0.3], vec![-2.0]], &[1.1]).unwrap();
        assert!(a.abs() < 1e-15 && p.abs() < 1e-15);
        let (a, p) = contraction_oracle(&[vec![0.0], vec![1.0], vec![2.0]], &[1.0]).unwrap();
        let v0 = v_statistic_pairwise(&[0.0, 1.0, 2.0], 3, 1, &[1.0]) - 1.0;
        assert!((a - 2.0 / 3.0 * v0).abs() < 1e-14 && (a - p).abs() < 1e-14);
        assert!(matches!(contraction_oracle(&vec![vec![0.0]; 9], &[1.0]), Err(Error::EnumerationTooLarge)));
    }

    #[test]
    fn noiseless_pair_locks_together() {
        let cfg = SyncSystemConfig::new(
            2,
            LevySpec::BrownianDrift { sigma: vec![vec![0.0]], drift: vec![0.0] },
            MeDistribution::exponential(1.0).unwrap(),
            10.0,
        )
        .with_initial(InitialState::Fixed { x: vec![vec![1.0], vec![-1.0]] });
        let mut s = SimulationState::new(&cfg, 1, 0).unwrap();
        s.step();
        s.sync_all();
        assert_eq!(s.component(0), s.component(1));
        s.run_until(10.0);
        assert_eq!(s.component(0), s.component(1));
    }

    #[test]
    fn bad_routing_row_names_the_row() {
        let m = vec![vec![0.0, 0.5, 0.5], vec![0.5, 0.0, 0.4], vec![0.5, 0.5, 0.0]];
        let cfg = markov(3, 1.0).with_routing(Routing::Matrix { matrix: m });
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("routing.matrix[1]"), "{err}");
    }

    #[test]
    fn zero_horizon_gives_zero_differences() {
        let s = sample_differences(&markov(4, 0.0), (0, 1), 50, 9).unwrap();
        assert!(s.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn chi_at_time_zero_is_one() {
        let rows = chi_mc(&markov(5, 1.0), &[vec![1.0]], 20, 3, &[0.0]).unwrap();
        assert_eq!(rows[0].estimate, 1.0);
        assert_eq!(rows[0].se, 0.0);
    }

    #[test]
    fn chi_rejects_fixed_start() {
        let cfg = markov(3, 1.0).with_initial(InitialState::Fixed { x: vec![vec![0.0], vec![1.0], vec![2.0]] });
        assert!(matches!(chi_mc(&cfg, &[vec![1.0]], 10, 1, &[1.0]), Err(Error::NotSymmetric)));
    }

    #[test]
    fn binary_round_trip() {
        let mut s = DifferenceSample::from_values(vec![1.0, -2.5, 3.25, 0.0], 2);
        s.meta.n = 7;
        let mut buf = Vec::new();
        s.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 32 + 4 * 8);
        let back = DifferenceSample::read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(back.values, s.values);
        assert_eq!(back.meta.n, 7);
        assert_eq!(back.dim, 2);
    }
}
