//! Stochastic integrate-and-fire dynamics on a lattice.
//!
//! Each neuron accumulates amplitude: a background ramp `v0` plus `v/width`
//! for every neighbor whose latest pulse is active. A pulse lasts `width`
//! after the emitting fire unless the source fires again first, which starts
//! a fresh pulse and truncates the old one; a source therefore has at most
//! one active pulse and nothing needs pruning. Firing is a Poisson process
//! with rate `k_rate * A^2`, thinned per step as
//! `p = 1 - exp(-k_rate A^2 dt)`. A fire resets the neuron's accumulated
//! amplitude, permanently erases whatever initial amplitude it still carried,
//! and stamps the event at the end of the step.
//!
//! All fire times sit on step boundaries, so the windowed integral over the
//! pulse history reduces exactly to per-step accumulation:
//! `A += (v0 + (v/width) * coverage) * dt`, with per-neighbor coverage decided
//! by the age of its latest fire. The engine uses that incremental form; the
//! explicit windowed form is kept as [`accumulate_amplitude`] and the two are
//! cross-checked in tests.
//!
//! Determinism: one uniform draw per neuron per step, row-major order, drawn
//! whether or not the neuron can fire, from a ChaCha8 stream seeded with
//! `params.seed`. Identical inputs give bit-identical spike logs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, Node};

/// Boundary-index sentinel for "never fired".
const NEVER: u64 = u64::MAX;

/// Physical and numerical parameters of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    /// Background drive rate.
    pub v0: f64,
    /// Amplitude delivered by one neighbor pulse, spread over `width`.
    pub v: f64,
    /// Pulse duration.
    pub width: f64,
    /// Firing-rate constant: rate = `k_rate * A^2`.
    pub k_rate: f64,
    /// Step size.
    pub dt: f64,
    /// Simulated time span.
    pub t_total: f64,
    /// Analysis routines discard events at or before this time.
    pub burn_in: f64,
    /// Scale of the initial amplitude handed to input patterns.
    pub a_init: f64,
    /// Master RNG seed.
    pub seed: u64,
    /// Budget on total work, counted in neuron-step updates
    /// (steps x lattice size). Runs that would exceed it are refused.
    pub max_steps: u64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            v0: 1.0,
            v: 0.2,
            width: 0.2,
            k_rate: 2000.0,
            dt: 1e-4,
            t_total: 0.5,
            burn_in: 0.1,
            a_init: 1.0,
            seed: 0,
            max_steps: 50_000_000,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("v0", self.v0),
            ("v", self.v),
            ("width", self.width),
            ("k_rate", self.k_rate),
            ("dt", self.dt),
            ("t_total", self.t_total),
            ("burn_in", self.burn_in),
            ("a_init", self.a_init),
        ] {
            if !value.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite, got {value}")));
            }
        }
        if self.v0 < 0.0 {
            return Err(Error::invalid(format!("v0 must be nonnegative, got {}", self.v0)));
        }
        if self.v < 0.0 {
            return Err(Error::invalid(format!("v must be nonnegative, got {}", self.v)));
        }
        if self.width <= 0.0 {
            return Err(Error::invalid(format!("width must be positive, got {}", self.width)));
        }
        if self.k_rate <= 0.0 {
            return Err(Error::invalid(format!("k_rate must be positive, got {}", self.k_rate)));
        }
        if self.dt <= 0.0 {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if self.dt >= self.width {
            return Err(Error::invalid(format!(
                "dt must be smaller than width, got dt = {} width = {}",
                self.dt, self.width
            )));
        }
        if self.t_total < 0.0 {
            return Err(Error::invalid(format!(
                "t_total must be nonnegative, got {}",
                self.t_total
            )));
        }
        if self.burn_in < 0.0 {
            return Err(Error::invalid(format!(
                "burn_in must be nonnegative, got {}",
                self.burn_in
            )));
        }
        // t_total = 0 with burn_in = 0 is allowed and produces an empty log.
        if self.burn_in >= self.t_total && !(self.t_total == 0.0 && self.burn_in == 0.0) {
            return Err(Error::invalid(format!(
                "burn_in must be smaller than t_total, got burn_in = {} t_total = {}",
                self.burn_in, self.t_total
            )));
        }
        if self.a_init < 0.0 {
            return Err(Error::invalid(format!(
                "a_init must be nonnegative, got {}",
                self.a_init
            )));
        }
        Ok(())
    }

    /// Number of steps: `t_total / dt` rounded to the nearest integer.
    pub fn n_steps(&self) -> u64 {
        (self.t_total / self.dt).round() as u64
    }
}

/// Per-neuron bookkeeping exposed for the windowed amplitude form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronState {
    /// Time of the last fire, or 0.0 if the neuron has not fired yet.
    pub last_reset: f64,
    /// Remaining initial amplitude; erased by the first fire.
    pub initial_amp: f64,
}

/// One emitted pulse: active on `[start, end)`. `end` is `start + width`
/// unless the source fired again earlier, which truncates the pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub source: Node,
    pub start: f64,
    pub end: f64,
}

impl Pulse {
    /// Pulse emitted at `start` with the full `width` window.
    pub fn emitted(source: Node, start: f64, width: f64) -> Self {
        Pulse { source, start, end: start + width }
    }

    /// Truncate the pulse at `t` (a later fire of the same source).
    pub fn truncated(self, t: f64) -> Self {
        Pulse { end: self.end.min(t), ..self }
    }

    fn overlap(&self, from: f64, to: f64) -> f64 {
        (self.end.min(to) - self.start.max(from)).max(0.0)
    }
}

/// Windowed amplitude of one neuron at time `t`: background ramp since the
/// last reset, plus `v/width` times each pulse's overlap with the window
/// `[last_reset, t]`, plus the remaining initial amplitude. `pulses` should
/// be the pulses of the neuron's neighbors; the neuron's own emissions do
/// not drive it.
pub fn accumulate_amplitude(
    neuron: &NeuronState,
    pulses: &[Pulse],
    params: &SimParams,
    t: f64,
) -> Result<f64> {
    if t < neuron.last_reset {
        return Err(Error::invalid(format!(
            "evaluation time {t} precedes last reset {}",
            neuron.last_reset
        )));
    }
    let mut a = params.v0 * (t - neuron.last_reset);
    let gain = params.v / params.width;
    for p in pulses {
        a += gain * p.overlap(neuron.last_reset, t);
    }
    Ok(a + neuron.initial_amp)
}

/// Per-step firing probability at amplitude `a`:
/// `1 - exp(-k_rate a^2 dt)`, the exact thinning of a rate `k_rate a^2`
/// Poisson process over one step.
pub fn firing_probability(a: f64, params: &SimParams) -> f64 {
    1.0 - (-params.k_rate * a * a * params.dt).exp()
}

/// One spike: the emitting node and the step-boundary time it was recorded
/// at. Times are exact multiples of `dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikeEvent {
    pub t: f64,
    pub node: Node,
}

/// Complete record of one run: every spike in time order (ties broken by
/// flat node index), with the parameters and lattice that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeLog {
    pub spec: LatticeSpec,
    pub params: SimParams,
    pub run_id: u64,
    pub events: Vec<SpikeEvent>,
}

impl SpikeLog {
    /// Fire times grouped by flat node index.
    pub fn per_node_times(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new(); self.spec.len()];
        for e in &self.events {
            out[self.spec.flat_index(e.node)].push(e.t);
        }
        out
    }

    /// Fire times of a single node, in order.
    pub fn times_for(&self, node: Node) -> Vec<f64> {
        self.events.iter().filter(|e| e.node == node).map(|e| e.t).collect()
    }
}

/// Live simulation state. Advance it with [`LatticeState::step`]; [`run`]
/// wraps the whole loop.
#[derive(Debug, Clone)]
pub struct LatticeState {
    spec: LatticeSpec,
    params: SimParams,
    /// Completed steps; current time is `step * dt`.
    step: u64,
    /// Accumulated amplitude since the last reset, excluding initial credit.
    amp: Vec<f64>,
    /// Remaining initial amplitude per neuron.
    credit: Vec<f64>,
    /// Step-boundary index of the latest fire per neuron, `NEVER` if none.
    last_fire: Vec<u64>,
    /// Flat neighbor indices, padded; `nbr_n` holds the live count.
    nbr: Vec<[u32; 4]>,
    nbr_n: Vec<u8>,
    /// Steps fully covered by a pulse, and the fractional coverage of the
    /// step after those (0 when `width` is a multiple of `dt`).
    w_full: u64,
    w_frac: f64,
}

impl LatticeState {
    /// Fresh state at `t = 0` with the given per-node initial amplitudes
    /// (row-major, one entry per node).
    pub fn new(spec: LatticeSpec, params: SimParams, initial: &[f64]) -> Result<Self> {
        params.validate()?;
        let n = spec.len();
        if initial.len() != n {
            return Err(Error::invalid(format!(
                "initial amplitudes: expected {} entries, got {}",
                n,
                initial.len()
            )));
        }
        for (i, &a) in initial.iter().enumerate() {
            if !a.is_finite() || a < 0.0 {
                return Err(Error::invalid(format!(
                    "initial amplitude at node {} must be finite and nonnegative, got {a}",
                    spec.node_at(i)
                )));
            }
        }
        let mut nbr = vec![[0u32; 4]; n];
        let mut nbr_n = vec![0u8; n];
        for i in 0..n {
            let list = spec.neighbors(spec.node_at(i))?;
            nbr_n[i] = list.len() as u8;
            for (t, node) in list.iter().enumerate() {
                nbr[i][t] = spec.flat_index(*node) as u32;
            }
        }
        let ratio = params.width / params.dt;
        let w_full = (ratio + 1e-9).floor();
        let w_frac = {
            let f = (ratio - w_full).max(0.0);
            if f < 1e-9 {
                0.0
            } else {
                f
            }
        };
        Ok(LatticeState {
            spec,
            params,
            step: 0,
            amp: vec![0.0; n],
            credit: initial.to_vec(),
            last_fire: vec![NEVER; n],
            nbr,
            nbr_n,
            w_full: w_full as u64,
            w_frac,
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    /// Current time, `completed steps * dt`.
    pub fn time(&self) -> f64 {
        self.step as f64 * self.params.dt
    }

    /// Total amplitude of a node right now (accumulated plus initial credit).
    pub fn amplitude(&self, node: Node) -> f64 {
        let i = self.spec.flat_index(node);
        self.amp[i] + self.credit[i]
    }

    /// Snapshot of a node's reset bookkeeping.
    pub fn neuron(&self, node: Node) -> NeuronState {
        let i = self.spec.flat_index(node);
        let last_reset = match self.last_fire[i] {
            NEVER => 0.0,
            b => b as f64 * self.params.dt,
        };
        NeuronState { last_reset, initial_amp: self.credit[i] }
    }

    /// The latest pulse emitted by a node, if it has fired. The window is
    /// the full `width`; it would only be truncated by a future fire.
    pub fn pulse_of(&self, node: Node) -> Option<Pulse> {
        let i = self.spec.flat_index(node);
        match self.last_fire[i] {
            NEVER => None,
            b => Some(Pulse::emitted(node, b as f64 * self.params.dt, self.params.width)),
        }
    }

    /// Coverage of the step starting at boundary `s` by a pulse emitted at
    /// boundary `b` (age `s - b`): 1 while fully inside the window, the
    /// fractional remainder on the boundary step, 0 after.
    #[inline]
    fn coverage(&self, age: u64) -> f64 {
        if age < self.w_full {
            1.0
        } else if age == self.w_full {
            self.w_frac
        } else {
            0.0
        }
    }

    /// Advance one step. Every neuron accrues drive, then fires with
    /// probability `1 - exp(-k_rate A^2 dt)` evaluated at the end-of-step
    /// amplitude, using one uniform draw per neuron in row-major order.
    /// Fire decisions read the firing history as of the step start, so the
    /// update is synchronous. Returns the nodes that fired, stamped at the
    /// new boundary time.
    pub fn step<R: Rng>(&mut self, rng: &mut R) -> Vec<Node> {
        let s = self.step;
        let dt = self.params.dt;
        let base = self.params.v0 * dt;
        let gain_dt = self.params.v / self.params.width * dt;
        let k_dt = self.params.k_rate * dt;
        let n = self.spec.len();
        let mut fired: Vec<usize> = Vec::new();
        for i in 0..n {
            let mut cov = 0.0;
            for t in 0..self.nbr_n[i] as usize {
                let j = self.nbr[i][t] as usize;
                let b = self.last_fire[j];
                if b != NEVER {
                    cov += self.coverage(s - b);
                }
            }
            self.amp[i] += base + gain_dt * cov;
            let a = self.amp[i] + self.credit[i];
            let p = 1.0 - (-k_dt * a * a).exp();
            let u: f64 = rng.random();
            if u < p {
                fired.push(i);
            }
        }
        for &i in &fired {
            self.amp[i] = 0.0;
            self.credit[i] = 0.0;
            self.last_fire[i] = s + 1;
        }
        self.step = s + 1;
        fired.into_iter().map(|i| self.spec.node_at(i)).collect()
    }
}

/// Simulate a full run and return its spike log. `initial` gives the
/// starting amplitude of every node in row-major order (see
/// [`crate::experiments::InputPattern::assign`]). The log's `run_id` is 0;
/// multi-run experiments relabel it.
pub fn run(params: &SimParams, spec: &LatticeSpec, initial: &[f64]) -> Result<SpikeLog> {
    params.validate()?;
    let n_steps = params.n_steps();
    let work = n_steps.saturating_mul(spec.len() as u64);
    if work > params.max_steps {
        return Err(Error::ResourceLimit(format!(
            "step budget exceeded: {n_steps} steps x {} nodes = {work} neuron-steps > max_steps = {}",
            spec.len(),
            params.max_steps
        )));
    }
    let mut state = LatticeState::new(*spec, *params, initial)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut events = Vec::new();
    for s in 0..n_steps {
        let t = (s + 1) as f64 * params.dt;
        for node in state.step(&mut rng) {
            events.push(SpikeEvent { t, node });
        }
    }
    Ok(SpikeLog { spec: *spec, params: *params, run_id: 0, events })
}

/// Derive a child seed from a master seed and a tag path, so every
/// (experiment, parameter point, run) tuple gets an independent ChaCha8
/// stream. Splitmix64-based; stable across platforms and releases.
pub fn substream_seed(master: u64, tags: &[u64]) -> u64 {
    let mut s = splitmix64(master ^ 0x6A09_E667_F3BC_C908);
    for &t in tags {
        s = splitmix64(s ^ splitmix64(t));
    }
    s
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
