//! Reach-iLQR: iterative optimization of the hypercontrol schedule.
//!
//! Each iteration linearizes the embedding system along the current rollout,
//! sweeps the Riccati equations backward from the closed-form expansion of the
//! final volume cost, and rolls out the affinely corrected schedule. Rollouts
//! stop as soon as the volume cost exceeds `phi_max`, so early iterations
//! mostly extend the horizon reached and later ones shrink the final volume.

mod linearize;
mod passes;

pub use linearize::{frozen_rhs, linearize, linearize_with_ldi, Linearization};
pub use passes::{
    backward_pass, backward_pass_linearized, forward_pass, terminal_conditions, GainSchedule, ValueExpansion,
};

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dynamics::VectorField;
use crate::embedding::{Embedding, EmbeddingState, HypercontrolSchedule, Policy, TimeGrid, Trajectory};
use crate::error::{Error, Result};

/// A block of iterations sharing one regularization weight `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phase {
    pub iterations: usize,
    pub regularization: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IlqrConfig {
    pub phases: Vec<Phase>,
    /// Feed-forward step size γ.
    pub step_size: f64,
    /// Truncation threshold on Φ; `null` in JSON means no threshold.
    #[serde(with = "unbounded")]
    pub phi_max: f64,
    pub policy: Policy,
    /// A phase ends early once the horizon is reached and the best terminal
    /// cost has not improved by `stall_tolerance` for `stall_window` iterations.
    pub stall_tolerance: f64,
    pub stall_window: usize,
    /// Smallest γ the non-finite fallback may halve down to.
    pub min_step_size: f64,
    /// Record elapsed seconds per iterate; when false they are logged as 0.
    pub record_wall_time: bool,
    /// Iterations whose full trajectory is kept in the log.
    pub snapshot_iterations: Vec<usize>,
}

mod unbounded {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        (*v != f64::INFINITY).then_some(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl Default for IlqrConfig {
    fn default() -> Self {
        Self {
            phases: vec![Phase {
                iterations: 20,
                regularization: 20.0,
            }],
            step_size: 1.0,
            phi_max: f64::INFINITY,
            policy: Policy::Adjoint,
            stall_tolerance: 1e-4,
            stall_window: 50,
            min_step_size: 1e-6,
            record_wall_time: true,
            snapshot_iterations: Vec::new(),
        }
    }
}

impl IlqrConfig {
    pub fn robot_arm() -> Self {
        Self {
            phi_max: -0.1,
            ..Self::default()
        }
    }

    pub fn vanderpol() -> Self {
        Self {
            phases: vec![
                Phase {
                    iterations: 750,
                    regularization: 0.5,
                },
                Phase {
                    iterations: 750,
                    regularization: 5.0,
                },
            ],
            phi_max: -1.75,
            ..Self::default()
        }
    }

    pub fn total_iterations(&self) -> usize {
        self.phases.iter().map(|p| p.iterations).sum()
    }

    /// Replaces the phases with a single phase of `iterations` at weight `r`.
    pub fn single_phase(mut self, iterations: usize, r: f64) -> Self {
        self.phases = vec![Phase {
            iterations,
            regularization: r,
        }];
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.phases.is_empty() || self.phases.iter().any(|p| p.iterations == 0 || !(p.regularization > 0.0)) {
            return Err(Error::Config(
                "phases must be non-empty with positive iteration counts and regularization".into(),
            ));
        }
        if !(self.step_size > 0.0) || !(self.min_step_size > 0.0) {
            return Err(Error::Config("step sizes must be positive".into()));
        }
        if self.phi_max.is_nan() {
            return Err(Error::Config("phi_max is NaN".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateSummary {
    pub iteration: usize,
    pub phase: usize,
    pub regularization: f64,
    pub step_size: f64,
    pub t_end: f64,
    pub phi_terminal: f64,
    pub truncated: bool,
    pub cumulative_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub iteration: usize,
    pub trajectory: Trajectory,
}

/// Everything a run produces: per-iterate summaries, the initial (pure
/// adjoint) rollout and the best iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateLog {
    pub iterates: Vec<IterateSummary>,
    pub best_iteration: usize,
    pub initial_trajectory: Trajectory,
    pub best_trajectory: Trajectory,
    pub best_schedule: HypercontrolSchedule,
    pub snapshots: Vec<Snapshot>,
    pub stop_reason: String,
}

impl IterateLog {
    pub fn best(&self) -> &IterateSummary {
        self.iterates
            .iter()
            .find(|it| it.iteration == self.best_iteration)
            .expect("best iterate is always logged")
    }

    /// `iteration,t_end,phi_terminal,cumulative_seconds`, one row per iterate.
    pub fn write_cost_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["iteration", "t_end", "phi_terminal", "cumulative_seconds"])?;
        for it in &self.iterates {
            wtr.write_record([
                it.iteration.to_string(),
                it.t_end.to_string(),
                it.phi_terminal.to_string(),
                it.cumulative_seconds.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// `a` is preferable to `b`: it reaches further, or as far with lower cost.
fn improves(a: &Trajectory, b: &Trajectory) -> bool {
    a.len() > b.len() || (a.len() == b.len() && a.terminal_cost() < b.terminal_cost())
}

struct Iterate {
    iteration: usize,
    schedule: HypercontrolSchedule,
    trajectory: Trajectory,
}

/// Runs Reach-iLQR from `x0` over `grid`.
///
/// Iteration 1 is the rollout of the zero feed-forward schedule. A single
/// iteration therefore returns the policy's baseline tube unchanged.
pub fn run<S: VectorField>(
    emb: &Embedding<'_, S>,
    x0: &EmbeddingState,
    grid: TimeGrid,
    config: &IlqrConfig,
) -> Result<IterateLog> {
    config.validate()?;
    let start = Instant::now();
    let elapsed = || {
        if config.record_wall_time {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        }
    };
    let policy = config.policy;
    let n = emb.state_dim();

    let schedule = HypercontrolSchedule::zeros(grid, n);
    let trajectory = emb.simulate(x0, &schedule, policy, config.phi_max)?;
    let initial_trajectory = trajectory.clone();

    let summary = |iteration: usize, phase: usize, gamma: f64, t: &Trajectory, secs: f64| IterateSummary {
        iteration,
        phase,
        regularization: config.phases[phase].regularization,
        step_size: gamma,
        t_end: t.t_end,
        phi_terminal: t.terminal_cost(),
        truncated: t.truncated,
        cumulative_seconds: secs,
    };

    let mut iterates = vec![summary(1, 0, config.step_size, &trajectory, elapsed())];
    let mut snapshots = Vec::new();
    if config.snapshot_iterations.contains(&1) {
        snapshots.push(Snapshot {
            iteration: 1,
            trajectory: trajectory.clone(),
        });
    }
    let mut best = Iterate {
        iteration: 1,
        schedule: schedule.clone(),
        trajectory: trajectory.clone(),
    };
    let mut current = (schedule, trajectory);

    let mut phase = 0;
    let mut in_phase = 1;
    let mut iteration = 1;
    let mut stall_ref: Option<(f64, usize)> = None;
    let mut stop_reason = String::from("iteration budget exhausted");
    let mut gamma = config.step_size;

    loop {
        let stalled = stall_ref.is_some_and(|(_, since)| iteration - since >= config.stall_window);
        if in_phase >= config.phases[phase].iterations || stalled {
            phase += 1;
            if phase == config.phases.len() {
                if stalled {
                    stop_reason = "stalled in the final phase".into();
                }
                break;
            }
            in_phase = 0;
            stall_ref = None;
            gamma = config.step_size;
            current = (best.schedule.clone(), best.trajectory.clone());
        }
        iteration += 1;
        in_phase += 1;
        let r = config.phases[phase].regularization;

        let gains = match backward_pass(emb, policy, &current.1, &current.0, r) {
            Ok(g) => g,
            Err(_) => {
                // Revert to the best iterate and retry with a shorter step.
                gamma /= 2.0;
                if gamma < config.min_step_size {
                    stop_reason = "step size fell below its minimum after repeated backward failures".into();
                    break;
                }
                current = (best.schedule.clone(), best.trajectory.clone());
                match backward_pass(emb, policy, &current.1, &current.0, r) {
                    Ok(g) => g,
                    Err(e) => {
                        stop_reason = format!("backward pass failed at the best iterate: {e}");
                        break;
                    }
                }
            }
        };

        let mut step = gamma;
        let next = loop {
            let (sched, traj) =
                forward_pass(emb, policy, x0, &current.0, &current.1, &gains, step, config.phi_max)?;
            if traj.numerical_failure && traj.len() < current.1.len() && step / 2.0 >= config.min_step_size {
                step /= 2.0;
                continue;
            }
            break (sched, traj);
        };
        current = next;

        iterates.push(summary(iteration, phase, step, &current.1, elapsed()));
        if config.snapshot_iterations.contains(&iteration) {
            snapshots.push(Snapshot {
                iteration,
                trajectory: current.1.clone(),
            });
        }
        if improves(&current.1, &best.trajectory) {
            gamma = config.step_size;
            best = Iterate {
                iteration,
                schedule: current.0.clone(),
                trajectory: current.1.clone(),
            };
        }
        if best.trajectory.len() == grid.len() {
            let phi = best.trajectory.terminal_cost();
            match stall_ref {
                Some((reference, _)) if phi >= reference - config.stall_tolerance => {}
                _ => stall_ref = Some((phi, iteration)),
            }
        }
    }

    Ok(IterateLog {
        iterates,
        best_iteration: best.iteration,
        initial_trajectory,
        best_trajectory: best.trajectory,
        best_schedule: best.schedule,
        snapshots,
        stop_reason,
    })
}
