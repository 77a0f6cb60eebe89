//! Discrete-time SIS and SIR contagion with Monte Carlo averaging.
//!
//! Each step, susceptible nodes are exposed to the infected set of the
//! previous step, one independent Bernoulli(beta) trial per infected
//! neighbour; then each previously infected node recovers (SIS) or is
//! removed (SIR). Nodes infected during a step transmit from the next step on.
//!
//! Randomness for transmissions and recoveries is a pure function of
//! (seed, trial, node or edge, infection episode, infection age). Runs that
//! differ only in `beta` therefore share every uniform draw, which makes the
//! set of ever-infected nodes in SIR monotone in `beta`.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    /// Infected nodes return to susceptible with probability `delta` per step.
    Sis { delta: f64 },
    /// Infected nodes are removed with probability `gamma` per step.
    Sir { gamma: f64 },
}

impl Model {
    fn exit_probability(&self) -> f64 {
        match *self {
            Model::Sis { delta } => delta,
            Model::Sir { gamma } => gamma,
        }
    }

    pub fn is_sir(&self) -> bool {
        matches!(self, Model::Sir { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialInfected {
    /// Fixed node ids (0-based).
    Nodes(Vec<usize>),
    /// This fraction of nodes, at least one, drawn uniformly per trial.
    Fraction(f64),
    Count(usize),
}

impl Default for InitialInfected {
    fn default() -> Self {
        InitialInfected::Fraction(0.01)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpidemicConfig {
    pub model: Model,
    pub beta: f64,
    pub initial: InitialInfected,
    pub steps: usize,
    pub trials: usize,
    pub seed: u64,
}

impl EpidemicConfig {
    pub fn new(model: Model, beta: f64, steps: usize, trials: usize, seed: u64) -> Self {
        EpidemicConfig {
            model,
            beta,
            initial: InitialInfected::default(),
            steps,
            trials,
            seed,
        }
    }

    pub fn with_initial(mut self, initial: InitialInfected) -> Self {
        self.initial = initial;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be in [0, 1], got {p}")))
            }
        };
        unit("beta", self.beta)?;
        match self.model {
            Model::Sis { delta } => unit("delta", delta)?,
            Model::Sir { gamma } => unit("gamma", gamma)?,
        }
        if self.steps < 1 {
            return Err(Error::config("steps must be >= 1"));
        }
        if self.trials < 1 {
            return Err(Error::config("trials must be >= 1"));
        }
        match &self.initial {
            InitialInfected::Fraction(f) if !(*f > 0.0 && *f <= 1.0) => {
                Err(Error::config("initial fraction must be in (0, 1]"))
            }
            InitialInfected::Count(0) => Err(Error::config("initial count must be >= 1")),
            _ => Ok(()),
        }
    }
}

/// Counts per step (index 0 is the initial state) for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub susceptible: Vec<u32>,
    pub infected: Vec<u32>,
    pub removed: Vec<u32>,
    pub ever_infected: Vec<bool>,
}

/// Trial-averaged counts per step; index 0 is the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct EpidemicTrace {
    pub node_count: usize,
    pub trials: usize,
    pub susceptible_mean: Vec<f64>,
    pub infected_mean: Vec<f64>,
    pub removed_mean: Vec<f64>,
    pub infected_std: Vec<f64>,
}

impl EpidemicTrace {
    /// Number of simulated steps (entries minus the initial state).
    pub fn steps(&self) -> usize {
        self.infected_mean.len() - 1
    }

    pub fn infected_fraction(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.node_count as f64;
        self.infected_mean.iter().map(move |&i| i / n)
    }

    /// Standard error of the infected mean at each step.
    pub fn infected_stderr(&self) -> Vec<f64> {
        let root = (self.trials as f64).sqrt();
        self.infected_std.iter().map(|s| s / root).collect()
    }
}

const SUSCEPTIBLE: u8 = 0;
const INFECTED: u8 = 1;
const REMOVED: u8 = 2;

const TAG_TRANSMIT: u64 = 0x7472_616e_736d_6974;
const TAG_RECOVER: u64 = 0x7265_636f_7665_7221;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform in [0, 1) determined by the key words.
fn unit_draw(words: [u64; 4]) -> f64 {
    let mut h = 0x9e37_79b9_7f4a_7c15u64;
    for w in words {
        h = mix64(h ^ w).wrapping_add(0x9e37_79b9_7f4a_7c15);
    }
    (mix64(h) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn trial_key(seed: u64, trial: usize) -> u64 {
    mix64(seed ^ mix64(trial as u64 + 1))
}

fn initial_set(g: &Graph, cfg: &EpidemicConfig, trial: usize) -> Result<Vec<usize>> {
    let n = g.node_count();
    let random = |count: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(trial as u64);
        let mut nodes = index::sample(&mut rng, n, count.min(n)).into_vec();
        nodes.sort_unstable();
        nodes
    };
    match &cfg.initial {
        InitialInfected::Nodes(nodes) => {
            if let Some(&bad) = nodes.iter().find(|&&u| u >= n) {
                return Err(Error::UnknownNode {
                    node: bad,
                    node_count: n,
                });
            }
            let mut nodes = nodes.clone();
            nodes.sort_unstable();
            nodes.dedup();
            Ok(nodes)
        }
        InitialInfected::Fraction(f) => Ok(random(((f * n as f64).round() as usize).max(1))),
        InitialInfected::Count(c) => Ok(random(*c)),
    }
}

/// Runs a single trial.
pub fn simulate_trial(g: &Graph, cfg: &EpidemicConfig, trial: usize) -> Result<TrialOutcome> {
    cfg.validate()?;
    let n = g.node_count();
    let key = trial_key(cfg.seed, trial);
    let exit_p = cfg.model.exit_probability();
    let sir = cfg.model.is_sir();

    let mut state = vec![SUSCEPTIBLE; n];
    let mut episode = vec![0u32; n];
    let mut age = vec![0u32; n];
    let mut ever = vec![false; n];
    let mut infected = initial_set(g, cfg, trial)?;
    for &u in &infected {
        state[u] = INFECTED;
        episode[u] = 1;
        ever[u] = true;
    }
    let mut removed = 0u32;
    let mut out = TrialOutcome {
        susceptible: Vec::with_capacity(cfg.steps + 1),
        infected: Vec::with_capacity(cfg.steps + 1),
        removed: Vec::with_capacity(cfg.steps + 1),
        ever_infected: Vec::new(),
    };
    let record = |out: &mut TrialOutcome, inf: usize, removed: u32| {
        out.infected.push(inf as u32);
        out.removed.push(removed);
        out.susceptible.push(n as u32 - inf as u32 - removed);
    };
    record(&mut out, infected.len(), removed);

    let mut fresh = Vec::new();
    let mut next = Vec::with_capacity(infected.len());
    for _ in 0..cfg.steps {
        if infected.is_empty() {
            record(&mut out, 0, removed);
            continue;
        }
        fresh.clear();
        for &i in &infected {
            let stamp = (u64::from(episode[i]) << 32) | u64::from(age[i] + 1);
            for &j in g.neighbors(i) {
                if state[j] != SUSCEPTIBLE {
                    continue;
                }
                let edge = ((i as u64) << 32) | j as u64;
                if unit_draw([key, TAG_TRANSMIT, edge, stamp]) < cfg.beta {
                    // claimed now so later neighbours skip it
                    state[j] = INFECTED;
                    fresh.push(j);
                }
            }
        }
        next.clear();
        for &i in &infected {
            age[i] += 1;
            let stamp = (u64::from(episode[i]) << 32) | u64::from(age[i]);
            if unit_draw([key, TAG_RECOVER, i as u64, stamp]) < exit_p {
                if sir {
                    state[i] = REMOVED;
                    removed += 1;
                } else {
                    state[i] = SUSCEPTIBLE;
                }
            } else {
                next.push(i);
            }
        }
        for &j in &fresh {
            episode[j] += 1;
            age[j] = 0;
            ever[j] = true;
            next.push(j);
        }
        std::mem::swap(&mut infected, &mut next);
        record(&mut out, infected.len(), removed);
    }
    out.ever_infected = ever;
    Ok(out)
}

/// Averages `cfg.trials` independent trials. Trial `t` is seeded from
/// `(cfg.seed, t)`, so the result is independent of scheduling.
pub fn simulate(g: &Graph, cfg: &EpidemicConfig) -> Result<EpidemicTrace> {
    cfg.validate()?;
    let len = cfg.steps + 1;
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| simulate_trial(g, cfg, t))
        .collect::<Result<_>>()?;
    // integer sums are exact, so the reduction order cannot matter
    let mut s_sum = vec![0u64; len];
    let mut i_sum = vec![0u64; len];
    let mut r_sum = vec![0u64; len];
    let mut i_sq = vec![0u128; len];
    for o in &outcomes {
        for step in 0..len {
            s_sum[step] += u64::from(o.susceptible[step]);
            i_sum[step] += u64::from(o.infected[step]);
            r_sum[step] += u64::from(o.removed[step]);
            i_sq[step] += u128::from(o.infected[step]).pow(2);
        }
    }
    let trials = cfg.trials as f64;
    let mean = |v: &[u64]| v.iter().map(|&x| x as f64 / trials).collect::<Vec<f64>>();
    let infected_std = (0..len)
        .map(|step| {
            if cfg.trials < 2 {
                return 0.0;
            }
            let s = i_sum[step] as f64;
            let ss = i_sq[step] as f64;
            ((ss - s * s / trials) / (trials - 1.0)).max(0.0).sqrt()
        })
        .collect();
    Ok(EpidemicTrace {
        node_count: g.node_count(),
        trials: cfg.trials,
        susceptible_mean: mean(&s_sum),
        infected_mean: mean(&i_sum),
        removed_mean: mean(&r_sum),
        infected_std,
    })
}

/// Per-step absolute gap between infected fractions of two traces.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceComparison {
    pub per_step: Vec<f64>,
    pub max: f64,
    pub mean: f64,
}

pub fn compare_traces(a: &EpidemicTrace, b: &EpidemicTrace) -> Result<TraceComparison> {
    if a.steps() != b.steps() {
        return Err(Error::HorizonMismatch {
            left: a.steps(),
            right: b.steps(),
        });
    }
    let per_step: Vec<f64> = a
        .infected_fraction()
        .zip(b.infected_fraction())
        .map(|(x, y)| (x - y).abs())
        .collect();
    let max = per_step.iter().copied().fold(0.0, f64::max);
    let mean = per_step.iter().sum::<f64>() / per_step.len() as f64;
    Ok(TraceComparison { per_step, max, mean })
}
