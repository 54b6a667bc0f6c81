//! Monte Carlo wavefunction trajectory sampling with photon click records.
//!
//! Each trajectory evolves a pure state under the non-Hermitian drift
//! H_eff = H − (i/2)ΣL†L without renormalisation; a quantum jump fires when
//! the squared norm crosses a uniform random threshold, with the channel
//! chosen proportionally to ⟨L†L⟩. Jumps through the emissive channels append
//! time-tagged clicks. Reset events scramble the ground spin with probability
//! `p_rand`. In quasi-static mode each trajectory draws a static ground-
//! splitting detuning δ ~ Normal(0, σ).
//!
//! Reproducibility: trajectory `i` uses a ChaCha8 generator seeded with the
//! master seed on stream `i + 1`, so records are bit-identical for a given
//! master seed regardless of how trajectories are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::basis::Level;
use crate::density::DensityMatrix;
use crate::error::{QdError, Result};
use crate::grid::TimeGrid;
use crate::lindblad::Channel;
use crate::linalg::{norm_sq, outer, Mat4, Vec4, C64};
use crate::master::{EventKind, Propagator, PulseMode, TimedEvent, EPS_T};
use crate::params::{Dephasing, SystemParams};
use crate::pulse::PulseSequence;

/// Time-tagged detection events of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickRecord {
    /// Trajectory index, also the RNG stream of this trajectory.
    pub traj: u64,
    /// Master seed the run was started with.
    pub seed: u64,
    /// Simulated span of the trajectory, ns (used to undo the finite-record
    /// bias of pair correlations).
    pub duration: f64,
    /// Strictly increasing (time ns, channel) pairs.
    pub clicks: Vec<(f64, Channel)>,
}

/// Sample `n_traj` trajectories and return their click records.
pub fn sample_trajectories(
    rho0: &DensityMatrix,
    seq: &PulseSequence,
    params: &SystemParams,
    grid: &TimeGrid,
    mode: PulseMode,
    n_traj: usize,
    master_seed: u64,
) -> Result<Vec<ClickRecord>> {
    let (records, _) = sample_with_snapshots(rho0, seq, params, grid, mode, n_traj, master_seed, &[])?;
    Ok(records)
}

/// As [`sample_trajectories`], additionally averaging |ψ⟩⟨ψ| over trajectories
/// at the requested snapshot times (sorted, within the grid).
pub fn sample_with_snapshots(
    rho0: &DensityMatrix,
    seq: &PulseSequence,
    params: &SystemParams,
    grid: &TimeGrid,
    mode: PulseMode,
    n_traj: usize,
    master_seed: u64,
    snap_times: &[f64],
) -> Result<(Vec<ClickRecord>, Vec<Mat4>)> {
    if n_traj == 0 {
        return Err(QdError::InvalidInput("n_traj must be >= 1".into()));
    }
    grid.validate()?;
    rho0.validate()?;
    // dry-run construction validates params, sequence and step size
    Propagator::new(params, seq, mode, grid.dt, 0.0)?;
    let init = InitialState::classify(rho0)?;
    for w in snap_times.windows(2) {
        if w[1] <= w[0] {
            return Err(QdError::InvalidInput("snapshot times must be strictly increasing".into()));
        }
    }
    if let (Some(&first), Some(&last)) = (snap_times.first(), snap_times.last()) {
        if first < grid.t_start - EPS_T || last > grid.t_end + EPS_T {
            return Err(QdError::InvalidInput("snapshot times outside the grid".into()));
        }
    }

    let outputs: Result<Vec<(ClickRecord, Vec<Vec4>)>> = (0..n_traj as u64)
        .into_par_iter()
        .map(|i| run_single(i, &init, seq, params, grid, mode, master_seed, snap_times))
        .collect();
    let outputs = outputs?;

    let mut mean = vec![Mat4::zeros(); snap_times.len()];
    let scale = C64::new(1.0 / n_traj as f64, 0.0);
    for (_, snaps) in &outputs {
        for (k, psi) in snaps.iter().enumerate() {
            mean[k] += outer(psi) * scale;
        }
    }
    let records = outputs.into_iter().map(|(r, _)| r).collect();
    Ok((records, mean))
}

/// How the initial density matrix is unravelled into pure states.
enum InitialState {
    Pure(Vec4),
    /// Diagonal weights, sampled per trajectory.
    Diagonal([f64; 4]),
}

impl InitialState {
    fn classify(rho0: &DensityMatrix) -> Result<Self> {
        if let Some(psi) = rho0.as_pure(1e-9) {
            return Ok(InitialState::Pure(psi));
        }
        if rho0.is_diagonal(1e-12) {
            return Ok(InitialState::Diagonal(rho0.populations()));
        }
        Err(QdError::InvalidInput(
            "trajectory sampling requires a pure or diagonal initial state".into(),
        ))
    }
}

#[allow(clippy::too_many_arguments)]
fn run_single(
    traj: u64,
    init: &InitialState,
    seq: &PulseSequence,
    params: &SystemParams,
    grid: &TimeGrid,
    mode: PulseMode,
    master_seed: u64,
    snap_times: &[f64],
) -> Result<(ClickRecord, Vec<Vec4>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(traj + 1);

    // draw order is fixed: (1) quasi-static detuning, (2) initial level, (3) first threshold
    let shift = match params.dephasing {
        Dephasing::QuasiStatic { sigma } => sigma * rng.sample::<f64, _>(StandardNormal),
        Dephasing::Markovian { .. } => 0.0,
    };
    let prop = Propagator::new(params, seq, mode, grid.dt, shift)?;

    let mut psi = match init {
        InitialState::Pure(v) => *v,
        InitialState::Diagonal(p) => {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut level = 3;
            for (i, w) in p.iter().enumerate() {
                acc += w;
                if u < acc {
                    level = i;
                    break;
                }
            }
            let mut v = Vec4::zeros();
            v[level] = C64::new(1.0, 0.0);
            v
        }
    };

    let mut walker = Walker {
        prop: &prop,
        rng,
        psi: &mut psi,
        threshold: 0.0,
        clicks: Vec::new(),
    };
    walker.threshold = walker.rng.gen();

    // boundaries: events in (t_start, t_end], events exactly at t_start, snapshots
    let mut snaps = Vec::with_capacity(snap_times.len());
    let start_events: Vec<TimedEvent> = {
        let mut evs = prop.schedule(grid.t_start - 2.0 * EPS_T, grid.t_start + EPS_T);
        evs.retain(|e| (e.t - grid.t_start).abs() <= EPS_T);
        evs
    };
    for e in &start_events {
        walker.apply_event(e);
    }
    let mut snap_iter = snap_times.iter().peekable();
    while let Some(&&st) = snap_iter.peek() {
        if st <= grid.t_start + EPS_T {
            snaps.push(normalised(walker.psi));
            snap_iter.next();
        } else {
            break;
        }
    }

    let events = prop.schedule(grid.t_start, grid.t_end);
    let mut t = grid.t_start;
    let mut idx = 0;
    loop {
        let next_event = if idx < events.len() { events[idx].t } else { f64::INFINITY };
        let next_snap = snap_iter.peek().map(|&&s| s).unwrap_or(f64::INFINITY);
        let seg_end = next_event.min(next_snap).min(grid.t_end);
        if seg_end > t + EPS_T {
            walker.evolve(t, seg_end);
        }
        t = seg_end;
        while idx < events.len() && events[idx].t <= t + EPS_T {
            walker.apply_event(&events[idx]);
            idx += 1;
        }
        while let Some(&&st) = snap_iter.peek() {
            if st <= t + EPS_T {
                snaps.push(normalised(walker.psi));
                snap_iter.next();
            } else {
                break;
            }
        }
        if t >= grid.t_end - EPS_T {
            break;
        }
    }

    let record = ClickRecord {
        traj,
        seed: master_seed,
        duration: grid.span(),
        clicks: walker.clicks,
    };
    Ok((record, snaps))
}

fn normalised(psi: &Vec4) -> Vec4 {
    let n = norm_sq(psi).sqrt();
    if n > 0.0 {
        psi / C64::new(n, 0.0)
    } else {
        *psi
    }
}

/// Single-trajectory state machine: unnormalised ψ plus the jump threshold.
struct Walker<'a, 'b> {
    prop: &'a Propagator<'a>,
    rng: ChaCha8Rng,
    psi: &'b mut Vec4,
    threshold: f64,
    clicks: Vec<(f64, Channel)>,
}

impl Walker<'_, '_> {
    fn apply_event(&mut self, e: &TimedEvent) {
        match e.kind {
            EventKind::Edge => {}
            EventKind::DeltaPulse { area, phase } => {
                let u = crate::master::delta_pulse_unitary(area, phase);
                *self.psi = u * *self.psi;
            }
            EventKind::Reset { p_rand } => {
                let u: f64 = self.rng.gen();
                if u < p_rand {
                    let n2 = norm_sq(self.psi);
                    let pg = (self.psi[0].norm_sqr() + self.psi[1].norm_sqr()) / n2;
                    let branch: f64 = self.rng.gen();
                    if branch < pg {
                        let coin: f64 = self.rng.gen();
                        let level = if coin < 0.5 { Level::H } else { Level::HBar };
                        *self.psi = Vec4::zeros();
                        self.psi[level.index()] = C64::new(1.0, 0.0);
                    } else {
                        self.psi[0] = C64::new(0.0, 0.0);
                        self.psi[1] = C64::new(0.0, 0.0);
                        *self.psi = normalised(self.psi);
                    }
                    self.threshold = self.rng.gen();
                }
            }
        }
    }

    fn evolve(&mut self, t0: f64, t1: f64) {
        match self.prop.mode {
            PulseMode::Delta => self.evolve_analytic(t0, t1),
            PulseMode::Full => self.evolve_rk4(t0, t1),
        }
    }

    /// Between delta pulses the effective Hamiltonian is diagonal:
    /// ψ_i(s) = ψ_i e^{−iφ_i s − λ_i s/2}, with closed-form norm decay.
    fn evolve_analytic(&mut self, t0: f64, t1: f64) {
        let rates = self.prop.jump_rates();
        let phases = self.prop.static_phases();
        let mut remaining = t1 - t0;
        let mut t = t0;
        loop {
            let a = [0, 1, 2, 3].map(|i| self.psi[i].norm_sqr());
            let norm_end: f64 =
                (0..4).map(|i| a[i] * (-rates[i] * remaining).exp()).sum();
            if norm_end >= self.threshold || self.threshold <= 0.0 {
                for i in 0..4 {
                    self.psi[i] *=
                        C64::from_polar((-rates[i] * remaining / 2.0).exp(), -phases[i] * remaining);
                }
                return;
            }
            let s = solve_jump_time(&a, &rates, self.threshold, remaining);
            for i in 0..4 {
                self.psi[i] *= C64::from_polar((-rates[i] * s / 2.0).exp(), -phases[i] * s);
            }
            t += s;
            remaining -= s;
            self.do_jump(t);
        }
    }

    fn evolve_rk4(&mut self, t0: f64, t1: f64) {
        let mut t = t0;
        loop {
            let span = t1 - t;
            if span <= EPS_T {
                return;
            }
            let n = (span / self.prop.dt).ceil().max(1.0) as usize;
            let h = span / n as f64;
            let mut jumped = false;
            for i in 0..n {
                let ts = t + i as f64 * h;
                let start = *self.psi;
                let next = rk4_psi(self.prop, &start, ts, h);
                if norm_sq(&next) < self.threshold {
                    // bracket the crossing inside [0, h] by re-integrating from `start`
                    let mut lo = 0.0;
                    let mut hi = h;
                    let mut mid_psi = next;
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        mid_psi = rk4_psi(self.prop, &start, ts, mid);
                        if norm_sq(&mid_psi) < self.threshold {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                        if hi - lo < 1e-13 {
                            break;
                        }
                    }
                    *self.psi = mid_psi;
                    let t_jump = ts + 0.5 * (lo + hi);
                    self.do_jump(t_jump);
                    t = t_jump;
                    jumped = true;
                    break;
                }
                *self.psi = next;
            }
            if !jumped {
                return;
            }
        }
    }

    fn do_jump(&mut self, t: f64) {
        let collapse = &self.prop.collapse;
        let mut weights = Vec::with_capacity(collapse.len());
        let mut total = 0.0;
        for c in collapse {
            let lp = c.op * *self.psi;
            let w = norm_sq(&lp);
            total += w;
            weights.push((w, lp, c.channel));
        }
        if total <= 0.0 {
            // no channel can fire; keep evolving (threshold can never be met)
            self.threshold = 0.0;
            return;
        }
        let u: f64 = self.rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = weights.len() - 1;
        for (k, (w, _, _)) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                chosen = k;
                break;
            }
        }
        let (_, lp, channel) = &weights[chosen];
        *self.psi = normalised(lp);
        if channel.is_emissive() {
            self.clicks.push((t, *channel));
        }
        self.threshold = self.rng.gen();
    }
}

fn rk4_psi(prop: &Propagator, psi: &Vec4, t: f64, h: f64) -> Vec4 {
    let f = |time: f64, v: &Vec4| -> Vec4 {
        let heff = prop.h_effective_at(time);
        heff * v * C64::new(0.0, -1.0)
    };
    let k1 = f(t, psi);
    let k2 = f(t + h / 2.0, &(psi + k1 * C64::new(h / 2.0, 0.0)));
    let k3 = f(t + h / 2.0, &(psi + k2 * C64::new(h / 2.0, 0.0)));
    let k4 = f(t + h, &(psi + k3 * C64::new(h, 0.0)));
    psi + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * C64::new(h / 6.0, 0.0)
}

/// Solve Σ a_i e^{−λ_i s} = r on (0, hi) by safeguarded Newton iteration.
/// The left side is monotone decreasing with value ≥ r at 0 and < r at hi.
fn solve_jump_time(a: &[f64; 4], rates: &[f64; 4], r: f64, hi: f64) -> f64 {
    let f = |s: f64| -> (f64, f64) {
        let mut v = -r;
        let mut dv = 0.0;
        for i in 0..4 {
            let e = a[i] * (-rates[i] * s).exp();
            v += e;
            dv -= rates[i] * e;
        }
        (v, dv)
    };
    let mut lo = 0.0;
    let mut hi = hi;
    let mut s = 0.5 * hi;
    for _ in 0..80 {
        let (v, dv) = f(s);
        if v.abs() < 1e-15 {
            return s;
        }
        if v > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let newton = if dv < 0.0 { s - v / dv } else { f64::NAN };
        s = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-14 {
            break;
        }
    }
    s
}

/// Per-channel click counts across a set of records.
pub fn channel_counts(records: &[ClickRecord]) -> Vec<(Channel, usize)> {
    let mut counts: Vec<(Channel, usize)> = Vec::new();
    for r in records {
        for (_, c) in &r.clicks {
            match counts.iter_mut().find(|(ch, _)| ch == c) {
                Some((_, n)) => *n += 1,
                None => counts.push((*c, 1)),
            }
        }
    }
    counts
}
