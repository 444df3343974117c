//! User-to-AP assignment maximizing the sum of user SINRs.
//!
//! Every user joins exactly one AP's NOMA group. Each group's coefficients
//! are recomputed from its members' best-branch gains, then every member
//! picks the branch with the highest SINR. Small instances are searched
//! exhaustively; a greedy pass handles anything past the enumeration cap.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noma::{data_rate, to_db, LinkReport, NoiseParams, NomaGroup, NomaMode};
use crate::receiver::{select_best_branch, BranchChannelSet, NomaContext};
use crate::scene::AccessPoint;

pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

/// Serving AP index per user.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(pub Vec<usize>);

impl Assignment {
    pub fn serving_ap(&self, user: usize) -> usize {
        self.0[user]
    }

    pub fn users_of(&self, ap: usize) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(move |&(_, &a)| a == ap).map(|(u, _)| u)
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    #[default]
    SumSinr,
    SumRate,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::SumSinr => "sum-sinr",
            Objective::SumRate => "sum-rate",
        })
    }
}

impl FromStr for Objective {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sum-sinr" => Ok(Objective::SumSinr),
            "sum-rate" => Ok(Objective::SumRate),
            _ => Err(format!("unknown objective `{s}` (expected sum-sinr or sum-rate)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    Exhaustive,
    /// Beyond the enumeration cap; not guaranteed optimal.
    Greedy,
    /// Supplied by the caller.
    Fixed,
}

impl fmt::Display for SearchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchMethod::Exhaustive => "exhaustive",
            SearchMethod::Greedy => "greedy (non-optimal)",
            SearchMethod::Fixed => "fixed",
        })
    }
}

/// Number of assignments, or `None` on overflow.
pub fn assignment_count(n_users: usize, n_aps: usize) -> Option<u64> {
    (n_aps as u64).checked_pow(u32::try_from(n_users).ok()?)
}

/// Decodes the `index`-th assignment in lexicographic order (user 0 most significant).
pub fn assignment_from_index(mut index: u64, n_users: usize, n_aps: usize) -> Assignment {
    let mut v = vec![0; n_users];
    for slot in v.iter_mut().rev() {
        *slot = (index % n_aps as u64) as usize;
        index /= n_aps as u64;
    }
    Assignment(v)
}

/// All `n_aps^n_users` assignments in lexicographic order.
pub fn enumerate_assignments(
    n_users: usize,
    n_aps: usize,
    cap: u64,
) -> Result<impl ExactSizeIterator<Item = Assignment>> {
    if n_users == 0 || n_aps == 0 {
        return Err(Error::domain("enumeration needs at least one user and one access point"));
    }
    let count = match assignment_count(n_users, n_aps) {
        Some(c) if c <= cap => c,
        _ => {
            return Err(Error::EnumerationCap {
                requested: (n_aps as f64).powf(n_users as f64),
                cap,
            })
        }
    };
    Ok((0..count as usize).map(move |i| assignment_from_index(i as u64, n_users, n_aps)))
}

/// Per-user links and aggregates for one assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub sum_sinr: f64,
    pub sum_rate: f64,
    /// Sorted by user index.
    pub links: Vec<LinkReport>,
}

impl Evaluation {
    pub fn score(&self, objective: Objective) -> f64 {
        match objective {
            Objective::SumSinr => self.sum_sinr,
            Objective::SumRate => self.sum_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub assignment: Assignment,
    pub score: f64,
    pub evaluation: Evaluation,
    pub search: SearchMethod,
}

/// A fully traced scenario ready for assignment search.
#[derive(Debug, Clone, Copy)]
pub struct AllocationProblem<'a> {
    pub aps: &'a [AccessPoint],
    pub channels: &'a BranchChannelSet,
    pub noise: &'a NoiseParams,
    pub mode: NomaMode,
    pub objective: Objective,
    /// Count other active APs' signals as interference.
    pub inter_ap_interference: bool,
}

impl AllocationProblem<'_> {
    pub fn n_users(&self) -> usize {
        self.channels.n_users()
    }

    fn evaluate_partial(&self, assignment: &[Option<usize>]) -> Result<Evaluation> {
        let n_aps = self.aps.len();
        let mut groups: Vec<Option<NomaGroup>> = Vec::with_capacity(n_aps);
        for ap in 0..n_aps {
            let mut members = Vec::new();
            for (u, _) in assignment.iter().enumerate().filter(|&(_, &a)| a == Some(ap)) {
                let g = self.channels.users[u].best_gain(ap);
                if g <= 0.0 {
                    return Err(Error::NoCoverage { user: u, ap });
                }
                members.push((u, g));
            }
            groups.push(if members.is_empty() { None } else { Some(NomaGroup::new(ap, &members)?) });
        }

        let mut links = Vec::new();
        for group in groups.iter().flatten() {
            let ap = group.serving_ap;
            for member in &group.members {
                let u = member.user;
                let ch = &self.channels.users[u];
                let co_channel: Vec<f64> = if self.inter_ap_interference {
                    ch.receiver
                        .branches
                        .iter()
                        .enumerate()
                        .map(|(b, branch)| {
                            groups
                                .iter()
                                .flatten()
                                .filter(|g| g.serving_ap != ap)
                                .map(|g| {
                                    let other = &self.aps[g.serving_ap];
                                    let i = other.transmit_power
                                        * branch.responsivity
                                        * ch.per_ap[g.serving_ap][b].dc_gain
                                        * other.efficiency;
                                    i * i
                                })
                                .sum()
                        })
                        .collect()
                } else {
                    Vec::new()
                };
                let ctx = NomaContext {
                    group,
                    serving_ap: &self.aps[ap],
                    noise: self.noise,
                    mode: self.mode,
                    co_channel: &co_channel,
                };
                let (branch, sinr) = select_best_branch(u, ch, &ctx)?;
                let summary = ch.per_ap[ap][branch];
                let alt = ctx.branch_sinr(u, &ch.receiver.branches[branch], branch, summary.dc_gain, self.mode.other());
                let (sinr_literal, sinr_sic) = match self.mode {
                    NomaMode::Literal => (sinr, alt),
                    NomaMode::Sic => (alt, sinr),
                };
                let rate_bandwidth = self.noise.receiver_bandwidth.min(summary.bandwidth_3db);
                links.push(LinkReport {
                    user: u,
                    serving_ap: ap,
                    branch,
                    dc_gain: summary.dc_gain,
                    channel_bandwidth: summary.bandwidth_3db,
                    bandwidth_limited: summary.bandwidth_limited,
                    rate_bandwidth,
                    sinr,
                    sinr_db: to_db(sinr),
                    data_rate: data_rate(sinr, rate_bandwidth),
                    sinr_literal,
                    sinr_sic,
                });
            }
        }
        links.sort_by_key(|l| l.user);
        let sum_sinr = links.iter().map(|l| l.sinr).sum();
        let sum_rate = links.iter().map(|l| l.data_rate).sum();
        Ok(Evaluation { sum_sinr, sum_rate, links })
    }

    /// Links for a complete assignment; fails if any user lacks coverage from its AP.
    pub fn evaluate(&self, assignment: &Assignment) -> Result<Evaluation> {
        if assignment.0.len() != self.n_users() {
            return Err(Error::invalid(
                "assignment",
                format!("has {} entries for {} users", assignment.0.len(), self.n_users()),
            ));
        }
        if let Some(&bad) = assignment.0.iter().find(|&&a| a >= self.aps.len()) {
            return Err(Error::invalid("assignment", format!("access point {bad} does not exist")));
        }
        let partial: Vec<Option<usize>> = assignment.0.iter().map(|&a| Some(a)).collect();
        self.evaluate_partial(&partial)
    }

    /// Sum of user SINRs; `-∞` when the assignment is infeasible.
    pub fn sum_sinr(&self, assignment: &Assignment) -> f64 {
        self.evaluate(assignment).map_or(f64::NEG_INFINITY, |e| e.sum_sinr)
    }

    /// Objective value; `-∞` when the assignment is infeasible.
    pub fn score(&self, assignment: &Assignment) -> f64 {
        self.evaluate(assignment).map_or(f64::NEG_INFINITY, |e| e.score(self.objective))
    }

    /// Exhaustive search. Ties resolve to the lexicographically smallest assignment.
    pub fn optimize(&self, cap: u64) -> Result<Allocation> {
        let (n_users, n_aps) = (self.n_users(), self.aps.len());
        let count = enumerate_assignments(n_users, n_aps, cap)?.len() as u64;
        let scores: Vec<f64> = (0..count)
            .into_par_iter()
            .map(|i| self.score(&assignment_from_index(i, n_users, n_aps)))
            .collect();
        let mut best: Option<(u64, f64)> = None;
        for (i, &s) in scores.iter().enumerate() {
            if s > f64::NEG_INFINITY && best.map_or(true, |(_, b)| s > b) {
                best = Some((i as u64, s));
            }
        }
        let (index, score) = best.ok_or(Error::NoFeasibleAssignment)?;
        let assignment = assignment_from_index(index, n_users, n_aps);
        let evaluation = self.evaluate(&assignment)?;
        Ok(Allocation { assignment, score, evaluation, search: SearchMethod::Exhaustive })
    }

    /// Places users one at a time, strongest first, on the AP that maximizes
    /// the objective over the users placed so far.
    pub fn greedy(&self) -> Result<Allocation> {
        let (n_users, n_aps) = (self.n_users(), self.aps.len());
        let strength = |u: usize| (0..n_aps).map(|a| self.channels.users[u].best_gain(a)).fold(0.0, f64::max);
        let mut order: Vec<usize> = (0..n_users).collect();
        order.sort_by(|&a, &b| strength(b).total_cmp(&strength(a)).then(a.cmp(&b)));

        let mut partial: Vec<Option<usize>> = vec![None; n_users];
        for u in order {
            let mut best: Option<(usize, f64)> = None;
            for ap in 0..n_aps {
                partial[u] = Some(ap);
                let s = self
                    .evaluate_partial(&partial)
                    .map_or(f64::NEG_INFINITY, |e| e.score(self.objective));
                if s > f64::NEG_INFINITY && best.map_or(true, |(_, b)| s > b) {
                    best = Some((ap, s));
                }
            }
            let (ap, _) = best.ok_or(Error::NoCoverage { user: u, ap: 0 })?;
            partial[u] = Some(ap);
        }
        let assignment = Assignment(partial.into_iter().map(|a| a.expect("every user placed")).collect());
        let evaluation = self.evaluate(&assignment)?;
        Ok(Allocation {
            score: evaluation.score(self.objective),
            assignment,
            evaluation,
            search: SearchMethod::Greedy,
        })
    }

    /// Exhaustive when within `cap`, greedy otherwise.
    pub fn optimize_or_greedy(&self, cap: u64) -> Result<Allocation> {
        match self.optimize(cap) {
            Err(Error::EnumerationCap { requested, cap }) => {
                log::warn!("{requested} assignments exceed the cap of {cap}; falling back to greedy search");
                self.greedy()
            }
            other => other,
        }
    }

    pub fn fixed(&self, assignment: Assignment) -> Result<Allocation> {
        let evaluation = self.evaluate(&assignment)?;
        Ok(Allocation {
            score: evaluation.score(self.objective),
            assignment,
            evaluation,
            search: SearchMethod::Fixed,
        })
    }
}
