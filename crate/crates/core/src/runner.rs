//! Scenario orchestration: trace every AP→branch channel, allocate, and
//! collect per-user reports for one or both receiver kinds.

use rayon::prelude::*;

use crate::alloc::{Allocation, AllocationProblem, Assignment, SearchMethod};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::noma::LinkReport;
use crate::raytrace::{impulse_response, ChannelSummary, ImpulseResponse, TraceScene};
use crate::receiver::{self, BranchChannelSet, ReceiverKind, ReceiverModel, UserChannels};
use crate::scene::{cell_edges, AccessPoint, Room, Vec3};

/// Which receiver kinds a run covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Single(ReceiverKind),
    Compare,
}

impl RunMode {
    pub fn kinds(self) -> Vec<ReceiverKind> {
        match self {
            RunMode::Single(k) => vec![k],
            RunMode::Compare => vec![ReceiverKind::Adr, ReceiverKind::Wide],
        }
    }
}

/// A traced impulse response kept for dumping.
#[derive(Debug, Clone, PartialEq)]
pub struct TracedResponse {
    pub user: usize,
    pub ap: usize,
    pub branch: usize,
    pub response: ImpulseResponse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub kind: ReceiverKind,
    pub allocation: Allocation,
    pub channels: BranchChannelSet,
    /// Empty unless responses were requested.
    pub responses: Vec<TracedResponse>,
}

impl RunResult {
    pub fn links(&self) -> &[LinkReport] {
        &self.allocation.evaluation.links
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImprovementRow {
    pub user: usize,
    pub rate_adr: f64,
    pub rate_wide: f64,
    /// `100 (rate_adr − rate_wide) / rate_wide`.
    pub improvement_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<ImprovementRow>,
    /// Unweighted mean of the per-user percentages.
    pub mean_improvement_pct: f64,
}

impl Comparison {
    pub fn from_runs(adr: &RunResult, wide: &RunResult) -> Comparison {
        let rows: Vec<ImprovementRow> = adr
            .links()
            .iter()
            .zip(wide.links())
            .map(|(a, w)| ImprovementRow {
                user: a.user,
                rate_adr: a.data_rate,
                rate_wide: w.data_rate,
                improvement_pct: 100.0 * (a.data_rate - w.data_rate) / w.data_rate,
            })
            .collect();
        let mean_improvement_pct = rows.iter().map(|r| r.improvement_pct).sum::<f64>() / rows.len() as f64;
        Comparison { rows, mean_improvement_pct }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub config_hash: String,
    pub tool_version: String,
    pub timestamp: String,
}

impl Provenance {
    pub fn new(config: &ScenarioConfig) -> Provenance {
        Provenance {
            config_hash: config.hash(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultBundle {
    pub runs: Vec<RunResult>,
    pub comparison: Option<Comparison>,
    pub provenance: Provenance,
}

impl ResultBundle {
    pub fn run(&self, kind: ReceiverKind) -> Option<&RunResult> {
        self.runs.iter().find(|r| r.kind == kind)
    }
}

/// One receiver-plane grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRow {
    pub kind: ReceiverKind,
    pub position: Vec3,
    /// `None` when no AP reaches the point.
    pub link: Option<LinkReport>,
}

/// Prepared room, APs and surface elements for a validated scenario.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub config: ScenarioConfig,
    pub room: Room,
    pub aps: Vec<AccessPoint>,
    pub scene: TraceScene,
}

impl Simulation {
    pub fn new(config: ScenarioConfig) -> Result<Simulation> {
        config.validate()?;
        Ok(Simulation {
            room: config.room(),
            aps: config.access_points()?,
            scene: config.trace_scene()?,
            config,
        })
    }

    pub fn receiver_at(&self, kind: ReceiverKind, position: Vec3) -> Result<ReceiverModel> {
        receiver::build(kind, &self.room, position, &self.config.receiver)
    }

    pub fn receivers(&self, kind: ReceiverKind) -> Result<Vec<ReceiverModel>> {
        self.config
            .user_positions()
            .into_iter()
            .map(|p| self.receiver_at(kind, p))
            .collect()
    }

    fn trace_one(&self, rx: &ReceiverModel, ap: usize, branch: usize) -> Result<(ChannelSummary, ImpulseResponse)> {
        let t = &self.config.tracing;
        let ir = impulse_response(&self.aps[ap], &rx.branches[branch], &self.scene, t.max_order, t.bin_width)?;
        let summary = ChannelSummary::from_response(&ir, t.scan_limit)?;
        Ok((summary, ir))
    }

    /// Traces every (user, AP, branch) channel. Each channel is accumulated
    /// by a single worker, so results do not depend on the thread count.
    pub fn trace(&self, receivers: Vec<ReceiverModel>, keep_responses: bool) -> Result<(BranchChannelSet, Vec<TracedResponse>)> {
        let jobs: Vec<(usize, usize, usize)> = receivers
            .iter()
            .enumerate()
            .flat_map(|(u, rx)| {
                (0..self.aps.len()).flat_map(move |a| (0..rx.branches.len()).map(move |b| (u, a, b)))
            })
            .collect();
        let traced: Vec<(ChannelSummary, ImpulseResponse)> = jobs
            .par_iter()
            .map(|&(u, a, b)| self.trace_one(&receivers[u], a, b))
            .collect::<Result<_>>()?;

        let mut responses = Vec::new();
        let mut it = jobs.iter().zip(traced);
        let mut users = Vec::with_capacity(receivers.len());
        for rx in receivers {
            let mut per_ap = Vec::with_capacity(self.aps.len());
            for _ in 0..self.aps.len() {
                let mut row = Vec::with_capacity(rx.branches.len());
                for _ in 0..rx.branches.len() {
                    let (&(user, ap, branch), (summary, response)) = it.next().expect("one result per job");
                    row.push(summary);
                    if keep_responses {
                        responses.push(TracedResponse { user, ap, branch, response });
                    }
                }
                per_ap.push(row);
            }
            users.push(UserChannels { receiver: rx, per_ap });
        }
        Ok((BranchChannelSet { users }, responses))
    }

    fn problem<'a>(&'a self, channels: &'a BranchChannelSet) -> AllocationProblem<'a> {
        AllocationProblem {
            aps: &self.aps,
            channels,
            noise: &self.config.noise,
            mode: self.config.noma.mode,
            objective: self.config.noma.objective,
            inter_ap_interference: self.config.noma.inter_ap_interference,
        }
    }

    /// Traces and allocates for one receiver kind.
    pub fn run(&self, kind: ReceiverKind, fixed: Option<&Assignment>, keep_responses: bool) -> Result<RunResult> {
        let (channels, responses) = self.trace(self.receivers(kind)?, keep_responses)?;
        let allocation = {
            let problem = self.problem(&channels);
            match fixed {
                Some(a) => problem.fixed(a.clone())?,
                None => problem.optimize_or_greedy(self.config.noma.enumeration_cap)?,
            }
        };
        if allocation.search == SearchMethod::Greedy {
            log::warn!("{kind}: assignment found by greedy search is not guaranteed optimal");
        }
        Ok(RunResult { kind, allocation, channels, responses })
    }

    pub fn run_mode(&self, mode: RunMode, fixed: Option<&Assignment>, keep_responses: bool) -> Result<ResultBundle> {
        let runs = mode
            .kinds()
            .into_iter()
            .map(|k| self.run(k, fixed, keep_responses))
            .collect::<Result<Vec<_>>>()?;
        let comparison = match (runs.iter().find(|r| r.kind == ReceiverKind::Adr), runs.iter().find(|r| r.kind == ReceiverKind::Wide)) {
            (Some(a), Some(w)) => Some(Comparison::from_runs(a, w)),
            _ => None,
        };
        Ok(ResultBundle { runs, comparison, provenance: Provenance::new(&self.config) })
    }

    /// Grid points at the centers of the (edge-clipped) `step × step` cells
    /// covering the floor plan, at the configured sweep height.
    pub fn grid_points(&self, step: f64) -> Result<Vec<Vec3>> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::domain(format!("grid step must be positive, got {step}")));
        }
        let z = self.config.sweep.height;
        let xs = cell_edges(self.room.length, step);
        let ys = cell_edges(self.room.width, step);
        Ok(xs
            .iter()
            .flat_map(|&(x0, x1)| ys.iter().map(move |&(y0, y1)| Vec3::new(0.5 * (x0 + x1), 0.5 * (y0 + y1), z)))
            .collect())
    }

    /// Evaluates a lone roaming user at every grid point, served by its best AP.
    pub fn sweep_grid(&self, kind: ReceiverKind, step: f64) -> Result<Vec<GridRow>> {
        let points = self.grid_points(step)?;
        points
            .par_iter()
            .map(|&p| {
                let rx = self.receiver_at(kind, p)?;
                let channels = self.trace_single_threaded(rx)?;
                let link = match self.problem(&channels).optimize(self.config.noma.enumeration_cap) {
                    Ok(a) => Some(a.evaluation.links[0]),
                    Err(Error::NoFeasibleAssignment) => None,
                    Err(e) => return Err(e),
                };
                Ok(GridRow { kind, position: p, link })
            })
            .collect()
    }

    fn trace_single_threaded(&self, rx: ReceiverModel) -> Result<BranchChannelSet> {
        let mut per_ap = Vec::with_capacity(self.aps.len());
        for a in 0..self.aps.len() {
            per_ap.push(
                (0..rx.branches.len())
                    .map(|b| self.trace_one(&rx, a, b).map(|(s, _)| s))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(BranchChannelSet { users: vec![UserChannels { receiver: rx, per_ap }] })
    }
}

/// Convenience wrapper: validate, trace and allocate, honoring `noma.serving_ap`.
pub fn run_scenario(config: &ScenarioConfig, mode: RunMode) -> Result<ResultBundle> {
    let sim = Simulation::new(config.clone())?;
    let fixed = sim.config.fixed_assignment();
    sim.run_mode(mode, fixed.as_ref(), false)
}
