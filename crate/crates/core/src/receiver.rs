//! Angle diversity and wide-FOV receivers, and select-best branch combining.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noma::{noise_power, sinr_eq1, LinkConstants, NoiseParams, NomaGroup, NomaMode};
use crate::raytrace::{ChannelSummary, DetectorBranch};
use crate::scene::{orientation_from_angles, AccessPoint, Room, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReceiverKind {
    Adr,
    Wide,
}

impl fmt::Display for ReceiverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReceiverKind::Adr => "adr",
            ReceiverKind::Wide => "wide",
        })
    }
}

impl FromStr for ReceiverKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "adr" => Ok(ReceiverKind::Adr),
            "wide" => Ok(ReceiverKind::Wide),
            _ => Err(format!("unknown receiver kind `{s}` (expected adr or wide)")),
        }
    }
}

/// Detector parameters shared by both receiver kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReceiverParams {
    /// Branch elevation above the horizontal [deg].
    pub adr_elevation: f64,
    /// Branch azimuths from +x, counterclockwise [deg].
    pub adr_azimuths: Vec<f64>,
    /// Branch field-of-view half angle [deg].
    pub adr_fov: f64,
    /// Detector area [m²], per branch.
    pub area: f64,
    /// Responsivity [A/W].
    pub responsivity: f64,
    /// Field-of-view half angle of the wide-FOV baseline [deg].
    pub wide_fov: f64,
}

impl Default for ReceiverParams {
    fn default() -> Self {
        ReceiverParams {
            adr_elevation: 70.0,
            adr_azimuths: vec![45.0, 135.0, 225.0, 315.0],
            adr_fov: 25.0,
            area: 20e-6,
            responsivity: 0.4,
            wide_fov: 85.0,
        }
    }
}

impl ReceiverParams {
    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.adr_elevation) {
            return Err(Error::invalid(
                "receiver.adr_elevation",
                format!("must lie in [-90, 90] degrees, got {}", self.adr_elevation),
            ));
        }
        if self.adr_azimuths.is_empty() {
            return Err(Error::invalid("receiver.adr_azimuths", "needs at least one branch"));
        }
        if let Some(az) = self.adr_azimuths.iter().find(|a| !(0.0..360.0).contains(*a)) {
            return Err(Error::invalid(
                "receiver.adr_azimuths",
                format!("azimuths must lie in [0, 360) degrees, got {az}"),
            ));
        }
        for (name, fov) in [("receiver.adr_fov", self.adr_fov), ("receiver.wide_fov", self.wide_fov)] {
            if !(fov > 0.0 && fov <= 90.0) {
                return Err(Error::invalid(name, format!("must lie in (0, 90] degrees, got {fov}")));
            }
        }
        if !(self.area > 0.0 && self.area.is_finite()) {
            return Err(Error::invalid("receiver.area", format!("must be positive, got {}", self.area)));
        }
        if !(self.responsivity > 0.0 && self.responsivity.is_finite()) {
            return Err(Error::invalid(
                "receiver.responsivity",
                format!("must be positive, got {}", self.responsivity),
            ));
        }
        Ok(())
    }
}

/// A user terminal: co-located detector branches at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverModel {
    pub kind: ReceiverKind,
    pub position: Vec3,
    pub branches: Vec<DetectorBranch>,
}

fn check_inside(room: &Room, position: Vec3) -> Result<()> {
    if room.contains(position) {
        Ok(())
    } else {
        Err(Error::domain(format!("receiver position {position} lies outside the room")))
    }
}

/// Angle diversity receiver with one branch per configured azimuth.
pub fn build_adr(room: &Room, position: Vec3, params: &ReceiverParams) -> Result<ReceiverModel> {
    check_inside(room, position)?;
    let branches = params
        .adr_azimuths
        .iter()
        .map(|&az| DetectorBranch {
            position,
            normal: orientation_from_angles(params.adr_elevation, az),
            fov_half_angle: params.adr_fov,
            area: params.area,
            responsivity: params.responsivity,
        })
        .collect();
    Ok(ReceiverModel { kind: ReceiverKind::Adr, position, branches })
}

/// Single upward-facing detector with the given half angle.
pub fn build_wide_fov(
    room: &Room,
    position: Vec3,
    fov_half_angle: f64,
    params: &ReceiverParams,
) -> Result<ReceiverModel> {
    check_inside(room, position)?;
    if !(fov_half_angle > 0.0 && fov_half_angle <= 90.0) {
        return Err(Error::domain(format!(
            "field of view must lie in (0, 90] degrees, got {fov_half_angle}"
        )));
    }
    Ok(ReceiverModel {
        kind: ReceiverKind::Wide,
        position,
        branches: vec![DetectorBranch {
            position,
            normal: Vec3::UP,
            fov_half_angle,
            area: params.area,
            responsivity: params.responsivity,
        }],
    })
}

pub fn build(kind: ReceiverKind, room: &Room, position: Vec3, params: &ReceiverParams) -> Result<ReceiverModel> {
    match kind {
        ReceiverKind::Adr => build_adr(room, position, params),
        ReceiverKind::Wide => build_wide_fov(room, position, params.wide_fov, params),
    }
}

/// Ambient optical power admitted by a detector, proportional to the solid
/// angle of its acceptance cone `2π(1 − cos FOV)`.
pub fn background_power(reference_power: f64, fov: f64, reference_fov: f64) -> f64 {
    let cone = |deg: f64| 1.0 - deg.to_radians().cos();
    reference_power * cone(fov) / cone(reference_fov)
}

/// Channels from every AP to every branch of one user, indexed `[ap][branch]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UserChannels {
    pub receiver: ReceiverModel,
    pub per_ap: Vec<Vec<ChannelSummary>>,
}

impl UserChannels {
    /// Largest branch gain toward `ap`.
    pub fn best_gain(&self, ap: usize) -> f64 {
        self.per_ap[ap].iter().map(|c| c.dc_gain).fold(0.0, f64::max)
    }
}

/// Channels for every user of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchChannelSet {
    pub users: Vec<UserChannels>,
}

impl BranchChannelSet {
    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_aps(&self) -> usize {
        self.users.first().map_or(0, |u| u.per_ap.len())
    }
}

/// Everything besides the channel needed to score a branch.
#[derive(Debug, Clone, Copy)]
pub struct NomaContext<'a> {
    pub group: &'a NomaGroup,
    pub serving_ap: &'a AccessPoint,
    pub noise: &'a NoiseParams,
    pub mode: NomaMode,
    /// Extra interference per branch [A²] from other APs; empty when ignored.
    pub co_channel: &'a [f64],
}

impl NomaContext<'_> {
    /// SINR of `user` on `branch` with gain `gain`.
    pub fn branch_sinr(&self, user: usize, branch: &DetectorBranch, branch_index: usize, gain: f64, mode: NomaMode) -> f64 {
        let position = self.group.position_of(user).expect("user belongs to the group");
        let sigma2 = noise_power(self.noise, branch.responsivity, branch.fov_half_angle)
            + self.co_channel.get(branch_index).copied().unwrap_or(0.0);
        let link = LinkConstants {
            transmit_power: self.serving_ap.transmit_power,
            responsivity: branch.responsivity,
            efficiency: self.serving_ap.efficiency,
        };
        sinr_eq1(position, self.group, gain, link, sigma2, mode)
    }
}

/// Branch maximizing the user's SINR toward the serving AP; ties go to the lowest index.
pub fn select_best_branch(
    user: usize,
    channels: &UserChannels,
    ctx: &NomaContext<'_>,
) -> Result<(usize, f64)> {
    let ap = ctx.group.serving_ap;
    let mut best: Option<(usize, f64)> = None;
    for (b, (branch, ch)) in channels.receiver.branches.iter().zip(&channels.per_ap[ap]).enumerate() {
        if ch.dc_gain <= 0.0 {
            continue;
        }
        let sinr = ctx.branch_sinr(user, branch, b, ch.dc_gain, ctx.mode);
        if best.map_or(true, |(_, s)| sinr > s) {
            best = Some((b, sinr));
        }
    }
    best.ok_or(Error::NoCoverage { user, ap })
}
