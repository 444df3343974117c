//! TOML scenario files.
//!
//! Every field except the AP and user lists has a default reproducing the
//! reference setup (8 m × 4 m × 3 m room, reflectivities 0.8/0.3, 1.9 W
//! APs). Unknown keys are rejected. See `docs/scenario-format.md`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::alloc::{Assignment, Objective, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::noma::{NoiseParams, NomaMode};
use crate::raytrace::TraceScene;
use crate::receiver::ReceiverParams;
use crate::scene::{discretize, lambertian_order_from_semiangle, AccessPoint, Room, Surface, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub room: RoomConfig,
    #[serde(default)]
    pub tracing: TracingConfig,
    #[serde(default)]
    pub receiver: ReceiverParams,
    #[serde(default)]
    pub noise: NoiseParams,
    #[serde(default)]
    pub noma: NomaConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub access_points: Vec<AccessPointConfig>,
    #[serde(default)]
    pub users: Vec<UserConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoomConfig {
    pub length: f64,
    pub width: f64,
    pub height: f64,
    pub wall_reflectivity: f64,
    pub ceiling_reflectivity: f64,
    pub floor_reflectivity: f64,
    /// Trace reflections off the floor.
    pub include_floor: bool,
}

impl Default for RoomConfig {
    fn default() -> Self {
        let r = Room::default();
        RoomConfig {
            length: r.length,
            width: r.width,
            height: r.height,
            wall_reflectivity: r.wall_reflectivity,
            ceiling_reflectivity: r.ceiling_reflectivity,
            floor_reflectivity: r.floor_reflectivity,
            include_floor: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TracingConfig {
    /// Element side for single-bounce paths [m].
    pub first_order_element: f64,
    /// Element side for two-bounce paths [m].
    pub second_order_element: f64,
    /// Highest reflection order traced (0, 1 or 2).
    pub max_order: u8,
    /// Impulse-response bin width [s].
    pub bin_width: f64,
    /// Upper frequency of the 3-dB bandwidth scan [Hz].
    pub scan_limit: f64,
    /// Half-power semiangle of reflecting elements [deg].
    pub element_semiangle: f64,
}

impl Default for TracingConfig {
    fn default() -> Self {
        TracingConfig {
            first_order_element: 0.05,
            second_order_element: 0.20,
            max_order: 2,
            bin_width: 0.1e-9,
            scan_limit: 5e9,
            element_semiangle: 60.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerBudget {
    /// Each AP transmits `transmit_power`.
    #[default]
    PerAp,
    /// `transmit_power` of every AP is divided evenly across all APs.
    Shared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NomaConfig {
    pub mode: NomaMode,
    pub objective: Objective,
    pub inter_ap_interference: bool,
    pub power_budget: PowerBudget,
    pub enumeration_cap: u64,
    /// Fixed serving AP per user; the assignment search is skipped when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub serving_ap: Option<Vec<usize>>,
}

impl Default for NomaConfig {
    fn default() -> Self {
        NomaConfig {
            mode: NomaMode::Literal,
            objective: Objective::SumSinr,
            inter_ap_interference: false,
            power_budget: PowerBudget::PerAp,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            serving_ap: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Receiver-plane height for grid sweeps [m].
    pub height: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { height: 1.0 }
    }
}

fn default_transmit_power() -> f64 {
    1.9
}
fn default_semiangle() -> f64 {
    60.0
}
fn default_efficiency() -> f64 {
    1.0
}
fn default_orientation() -> Vec3 {
    Vec3::DOWN
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccessPointConfig {
    pub position: Vec3,
    #[serde(default = "default_transmit_power")]
    pub transmit_power: f64,
    #[serde(default = "default_semiangle")]
    pub semiangle: f64,
    #[serde(default = "default_efficiency")]
    pub efficiency: f64,
    #[serde(default = "default_orientation")]
    pub orientation: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserConfig {
    pub position: Vec3,
}

impl ScenarioConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, path)
    }

    /// Parses and validates; `origin` only labels error messages.
    pub fn from_toml_str(text: &str, origin: impl Into<PathBuf>) -> Result<ScenarioConfig> {
        let origin = origin.into();
        if text.trim().is_empty() {
            return Err(Error::Parse { path: origin, message: "scenario file is empty".into() });
        }
        let cfg: ScenarioConfig = toml::from_str(text)
            .map_err(|e| Error::Parse { path: origin, message: e.to_string().trim_end().to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config is always representable as TOML")
    }

    /// SHA-256 of the canonical TOML serialization.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn room(&self) -> Room {
        let r = &self.room;
        Room {
            length: r.length,
            width: r.width,
            height: r.height,
            wall_reflectivity: r.wall_reflectivity,
            ceiling_reflectivity: r.ceiling_reflectivity,
            floor_reflectivity: r.floor_reflectivity,
        }
    }

    pub fn surfaces(&self) -> &'static [Surface] {
        if self.room.include_floor {
            &Surface::ALL
        } else {
            &Surface::WITHOUT_FLOOR
        }
    }

    pub fn access_points(&self) -> Result<Vec<AccessPoint>> {
        let share = match self.noma.power_budget {
            PowerBudget::PerAp => 1.0,
            PowerBudget::Shared => 1.0 / self.access_points.len().max(1) as f64,
        };
        self.access_points
            .iter()
            .enumerate()
            .map(|(i, ap)| {
                let field = format!("access_points[{i}]");
                let lambertian_order = lambertian_order_from_semiangle(ap.semiangle)
                    .map_err(|e| Error::invalid(format!("{field}.semiangle"), e.to_string()))?;
                let orientation = ap
                    .orientation
                    .normalized()
                    .ok_or_else(|| Error::invalid(format!("{field}.orientation"), "must be non-zero"))?;
                Ok(AccessPoint {
                    position: ap.position,
                    orientation,
                    lambertian_order,
                    transmit_power: ap.transmit_power * share,
                    efficiency: ap.efficiency,
                })
            })
            .collect()
    }

    /// The scenario's fixed assignment, if any.
    pub fn fixed_assignment(&self) -> Option<Assignment> {
        self.noma.serving_ap.clone().map(Assignment)
    }

    pub fn user_positions(&self) -> Vec<Vec3> {
        self.users.iter().map(|u| u.position).collect()
    }

    pub fn element_order(&self) -> Result<f64> {
        lambertian_order_from_semiangle(self.tracing.element_semiangle)
            .map_err(|e| Error::invalid("tracing.element_semiangle", e.to_string()))
    }

    /// Surface elements for the configured reflection orders.
    pub fn trace_scene(&self) -> Result<TraceScene> {
        let room = self.room();
        let order = self.element_order()?;
        let t = &self.tracing;
        Ok(TraceScene {
            first_order: if t.max_order >= 1 {
                discretize(&room, t.first_order_element, self.surfaces(), order)?
            } else {
                Vec::new()
            },
            second_order: if t.max_order >= 2 {
                discretize(&room, t.second_order_element, self.surfaces(), order)?
            } else {
                Vec::new()
            },
        })
    }

    pub fn validate(&self) -> Result<()> {
        let room = self.room();
        room.validate()?;

        let t = &self.tracing;
        for (name, v) in [
            ("tracing.first_order_element", t.first_order_element),
            ("tracing.second_order_element", t.second_order_element),
            ("tracing.bin_width", t.bin_width),
            ("tracing.scan_limit", t.scan_limit),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        if t.max_order > 2 {
            return Err(Error::invalid("tracing.max_order", format!("must be 0, 1 or 2, got {}", t.max_order)));
        }
        self.element_order()?;

        self.receiver.validate()?;
        self.noise.validate()?;
        if self.noma.enumeration_cap == 0 {
            return Err(Error::invalid("noma.enumeration_cap", "must be at least 1"));
        }
        if !(self.sweep.height >= 0.0 && self.sweep.height < room.height) {
            return Err(Error::invalid(
                "sweep.height",
                format!("must lie in [0, {}), got {}", room.height, self.sweep.height),
            ));
        }

        if self.access_points.is_empty() {
            return Err(Error::invalid("access_points", "at least one access point is required"));
        }
        for (i, ap) in self.access_points.iter().enumerate() {
            if !room.contains(ap.position) {
                return Err(Error::invalid(
                    format!("access_points[{i}].position"),
                    format!("{} lies outside the room", ap.position),
                ));
            }
        }
        for (i, ap) in self.access_points()?.iter().enumerate() {
            ap.validate(&format!("access_points[{i}]"))?;
        }

        if self.users.is_empty() {
            return Err(Error::invalid("users", "at least one user is required"));
        }
        for (i, u) in self.users.iter().enumerate() {
            if !room.contains(u.position) {
                return Err(Error::invalid(
                    format!("users[{i}].position"),
                    format!("{} lies outside the room", u.position),
                ));
            }
            for (j, ap) in self.access_points.iter().enumerate() {
                if ap.position == u.position {
                    return Err(Error::invalid(
                        format!("users[{i}].position"),
                        format!("coincides with access_points[{j}]"),
                    ));
                }
            }
        }
        if let Some(s) = &self.noma.serving_ap {
            check_assignment("noma.serving_ap", s, self.users.len(), self.access_points.len())?;
        }
        Ok(())
    }
}

fn check_assignment(field: &str, serving: &[usize], n_users: usize, n_aps: usize) -> Result<()> {
    if serving.len() != n_users {
        return Err(Error::invalid(
            field,
            format!("has {} entries but the scenario has {n_users} users", serving.len()),
        ));
    }
    if let Some((u, &ap)) = serving.iter().enumerate().find(|(_, &ap)| ap >= n_aps) {
        return Err(Error::invalid(format!("{field}[{u}]"), format!("access point {ap} does not exist")));
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FixedAssignmentFile {
    serving_ap: Vec<usize>,
}

/// Reads a `serving_ap = [..]` file holding one AP index per user.
pub fn load_fixed_assignment(path: impl AsRef<Path>, n_users: usize, n_aps: usize) -> Result<Assignment> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: FixedAssignmentFile = toml::from_str(&text)
        .map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string().trim_end().to_string() })?;
    check_assignment("serving_ap", &file.serving_ap, n_users, n_aps)?;
    Ok(Assignment(file.serving_ap))
}
