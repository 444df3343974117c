//! Deterministic diffuse-channel tracer.
//!
//! A path's optical gain is the product of point-to-patch hops. Each hop from
//! a Lambertian emitter of order `m` at distance `d` onto a patch of area `A`
//! contributes `(m+1)/(2π d²) · cosᵐ(emission) · cos(incidence) · A`. The
//! receiving branch applies a hard field-of-view gate; surface elements
//! accept light from their whole front hemisphere. Orders above two are not
//! traced.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::scene::{AccessPoint, SurfaceElement, Vec3, SPEED_OF_LIGHT};
use crate::spectrum::{self, Bandwidth};

/// One photodetector of a receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorBranch {
    pub position: Vec3,
    pub normal: Vec3,
    /// Field-of-view half angle in degrees.
    pub fov_half_angle: f64,
    /// Detector area in m².
    pub area: f64,
    /// Responsivity in A/W.
    pub responsivity: f64,
}

impl DetectorBranch {
    pub fn validate(&self) -> Result<()> {
        if !(self.area > 0.0) {
            return Err(Error::domain(format!("detector area must be positive, got {}", self.area)));
        }
        if !(self.fov_half_angle > 0.0 && self.fov_half_angle <= 90.0) {
            return Err(Error::domain(format!(
                "field of view must lie in (0, 90] degrees, got {}",
                self.fov_half_angle
            )));
        }
        if !(self.responsivity > 0.0) {
            return Err(Error::domain(format!(
                "responsivity must be positive, got {}",
                self.responsivity
            )));
        }
        if (self.normal.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::domain("detector normal must be a unit vector"));
        }
        Ok(())
    }

    #[inline]
    fn cos_fov(&self) -> f64 {
        self.fov_half_angle.to_radians().cos()
    }

    /// Incidence-angle cosine of light arriving from `source`, or `None`
    /// when it falls outside the field of view.
    #[inline]
    fn gated_incidence(&self, cos_fov: f64, source: Vec3) -> Option<(f64, f64)> {
        let v = source - self.position;
        let d = v.norm();
        if d == 0.0 {
            return None;
        }
        let cos_inc = self.normal.dot(v) / d;
        if cos_inc > 0.0 && cos_inc >= cos_fov {
            Some((cos_inc, d))
        } else {
            None
        }
    }
}

/// Optical gain and propagation delay of one traced path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathContribution {
    pub gain: f64,
    pub delay: f64,
}

/// Surface elements used for each reflection order.
#[derive(Debug, Clone, Default)]
pub struct TraceScene {
    pub first_order: Vec<SurfaceElement>,
    pub second_order: Vec<SurfaceElement>,
}

#[inline]
fn pow_order(x: f64, m: f64) -> f64 {
    if m == 1.0 {
        x
    } else {
        x.powf(m)
    }
}

/// Fraction of the AP's power landing on a patch (area `area`, normal `normal`) at `p`.
#[inline]
fn ap_to_patch(ap: &AccessPoint, p: Vec3, normal: Vec3, area: f64) -> Option<(f64, f64)> {
    let v = p - ap.position;
    let d2 = v.norm_squared();
    if d2 == 0.0 {
        return None;
    }
    let d = d2.sqrt();
    let cos_emit = ap.orientation.dot(v) / d;
    let cos_inc = -normal.dot(v) / d;
    if cos_emit <= 0.0 || cos_inc <= 0.0 {
        return None;
    }
    let m = ap.lambertian_order;
    Some(((m + 1.0) / (2.0 * PI * d2) * pow_order(cos_emit, m) * cos_inc * area, d))
}

/// Gain of an element reradiating onto the branch (per unit reradiated power), FOV-gated.
#[inline]
fn element_to_branch(e: &SurfaceElement, branch: &DetectorBranch, cos_fov: f64) -> Option<(f64, f64)> {
    let (cos_inc, d) = branch.gated_incidence(cos_fov, e.center)?;
    let cos_emit = e.normal.dot(branch.position - e.center) / d;
    if cos_emit <= 0.0 {
        return None;
    }
    let m = e.lambertian_order;
    Some(((m + 1.0) / (2.0 * PI * d * d) * pow_order(cos_emit, m) * cos_inc * branch.area, d))
}

/// Closed-form line-of-sight gain and delay.
///
/// Returns zero gain when the branch is behind the AP, the AP is behind the
/// branch, or the incidence angle exceeds the field of view.
pub fn los_contribution(ap: &AccessPoint, branch: &DetectorBranch) -> Result<PathContribution> {
    let v = branch.position - ap.position;
    let d = v.norm();
    if d == 0.0 {
        return Err(Error::domain("access point and detector are coincident"));
    }
    let delay = d / SPEED_OF_LIGHT;
    let cos_emit = ap.orientation.dot(v) / d;
    let gain = match branch.gated_incidence(branch.cos_fov(), ap.position) {
        Some((cos_inc, _)) if cos_emit > 0.0 => {
            let m = ap.lambertian_order;
            branch.area * (m + 1.0) / (2.0 * PI * d * d) * pow_order(cos_emit, m) * cos_inc
        }
        _ => 0.0,
    };
    Ok(PathContribution { gain, delay })
}

fn for_each_first_order(
    ap: &AccessPoint,
    branch: &DetectorBranch,
    elements: &[SurfaceElement],
    mut visit: impl FnMut(f64, f64),
) {
    let cos_fov = branch.cos_fov();
    for e in elements {
        if e.reflectivity == 0.0 {
            continue;
        }
        let Some((to_branch, d2)) = element_to_branch(e, branch, cos_fov) else { continue };
        let Some((incident, d1)) = ap_to_patch(ap, e.center, e.normal, e.area) else { continue };
        let gain = incident * e.reflectivity * to_branch;
        if gain > 0.0 {
            visit(gain, (d1 + d2) / SPEED_OF_LIGHT);
        }
    }
}

fn for_each_second_order(
    ap: &AccessPoint,
    branch: &DetectorBranch,
    elements: &[SurfaceElement],
    mut visit: impl FnMut(f64, f64),
) {
    let cos_fov = branch.cos_fov();

    // Elements lit by the AP: reflected power per steradian factor and first-hop distance.
    let lit: Vec<(usize, f64, f64)> = elements
        .iter()
        .enumerate()
        .filter(|(_, e)| e.reflectivity > 0.0)
        .filter_map(|(i, e)| {
            let (p, d1) = ap_to_patch(ap, e.center, e.normal, e.area)?;
            let w = p * e.reflectivity * (e.lambertian_order + 1.0) / (2.0 * PI);
            (w > 0.0).then_some((i, w, d1))
        })
        .collect();

    // Elements seen by the branch: the last hop including the receiving patch's area.
    let seen: Vec<(usize, f64, f64)> = elements
        .iter()
        .enumerate()
        .filter(|(_, e)| e.reflectivity > 0.0)
        .filter_map(|(j, e)| {
            let (g, d3) = element_to_branch(e, branch, cos_fov)?;
            let w = g * e.reflectivity * e.area;
            (w > 0.0).then_some((j, w, d3))
        })
        .collect();

    for &(i, w1, d1) in &lit {
        let e1 = &elements[i];
        for &(j, w2, d3) in &seen {
            if i == j {
                continue;
            }
            let e2 = &elements[j];
            let v = e2.center - e1.center;
            let c1 = e1.normal.dot(v);
            if c1 <= 0.0 {
                continue;
            }
            let c2 = -e2.normal.dot(v);
            if c2 <= 0.0 {
                continue;
            }
            let dd = v.norm_squared();
            let d12 = dd.sqrt();
            let kernel = pow_order(c1 / d12, e1.lambertian_order) * (c2 / d12) / dd;
            let gain = w1 * kernel * w2;
            if gain > 0.0 {
                visit(gain, (d1 + d12 + d3) / SPEED_OF_LIGHT);
            }
        }
    }
}

/// Single-bounce paths, one per element that is lit by the AP and seen by the branch.
pub fn first_order_contributions(
    ap: &AccessPoint,
    branch: &DetectorBranch,
    elements: &[SurfaceElement],
) -> Vec<PathContribution> {
    let mut out = Vec::new();
    for_each_first_order(ap, branch, elements, |gain, delay| out.push(PathContribution { gain, delay }));
    out
}

/// Two-bounce paths over ordered pairs of distinct, mutually facing elements.
pub fn second_order_contributions(
    ap: &AccessPoint,
    branch: &DetectorBranch,
    elements: &[SurfaceElement],
) -> Vec<PathContribution> {
    let mut out = Vec::new();
    for_each_second_order(ap, branch, elements, |gain, delay| out.push(PathContribution { gain, delay }));
    out
}

/// Compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Received optical gain binned by arrival time.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse {
    /// Bin width in seconds.
    pub bin_width: f64,
    /// Start time of the first bin in seconds.
    pub t0: f64,
    pub bins: Vec<f64>,
}

impl ImpulseResponse {
    pub fn dc_gain(&self) -> f64 {
        dc_gain(self)
    }

    /// Returns a copy with every bin multiplied by `k`.
    pub fn scaled(&self, k: f64) -> ImpulseResponse {
        ImpulseResponse {
            bin_width: self.bin_width,
            t0: self.t0,
            bins: self.bins.iter().map(|b| b * k).collect(),
        }
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        self.t0 + (i as f64 + 0.5) * self.bin_width
    }

    /// Power-weighted RMS delay spread over bin centers; zero for an empty response.
    pub fn rms_delay_spread(&self) -> f64 {
        let total = self.dc_gain();
        if total <= 0.0 {
            return 0.0;
        }
        let mean = self
            .bins
            .iter()
            .enumerate()
            .map(|(i, b)| (i as f64 + 0.5) * self.bin_width * b)
            .sum::<f64>()
            / total;
        let var = self
            .bins
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let dt = (i as f64 + 0.5) * self.bin_width - mean;
                dt * dt * b
            })
            .sum::<f64>()
            / total;
        var.max(0.0).sqrt()
    }

    /// Rows of `(time_s, gain)` at bin start times.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.bins
            .iter()
            .enumerate()
            .map(|(i, &g)| (self.t0 + i as f64 * self.bin_width, g))
    }
}

/// Sum of all bins.
pub fn dc_gain(ir: &ImpulseResponse) -> f64 {
    let mut acc = NeumaierSum::default();
    for &b in &ir.bins {
        acc.add(b);
    }
    acc.value()
}

struct Binner {
    anchor: f64,
    bin_width: f64,
    bins: Vec<NeumaierSum>,
}

impl Binner {
    fn push(&mut self, gain: f64, delay: f64) {
        let idx = ((delay - self.anchor) / self.bin_width).floor().max(0.0) as usize;
        if idx >= self.bins.len() {
            self.bins.resize(idx + 1, NeumaierSum::default());
        }
        self.bins[idx].add(gain);
    }
}

/// Traces every path of order `<= max_order` and bins it by delay.
///
/// The bin grid is anchored at the straight-line delay between AP and
/// branch, which lower-bounds every path delay. When line of sight is
/// blocked, leading empty bins are trimmed so `t0` is the start of the bin
/// holding the earliest arrival.
pub fn impulse_response(
    ap: &AccessPoint,
    branch: &DetectorBranch,
    scene: &TraceScene,
    max_order: u8,
    bin_width: f64,
) -> Result<ImpulseResponse> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::domain(format!("bin width must be positive, got {bin_width}")));
    }
    if max_order > 2 {
        return Err(Error::domain(format!("reflection order must be 0, 1 or 2, got {max_order}")));
    }
    let los = los_contribution(ap, branch)?;
    let mut binner = Binner { anchor: los.delay, bin_width, bins: Vec::new() };
    if los.gain > 0.0 {
        binner.push(los.gain, los.delay);
    }
    if max_order >= 1 {
        for_each_first_order(ap, branch, &scene.first_order, |g, t| binner.push(g, t));
    }
    if max_order >= 2 {
        for_each_second_order(ap, branch, &scene.second_order, |g, t| binner.push(g, t));
    }

    let mut bins: Vec<f64> = binner.bins.iter().map(NeumaierSum::value).collect();
    let mut t0 = los.delay;
    if los.gain == 0.0 {
        let lead = bins.iter().take_while(|&&b| b == 0.0).count();
        if lead == bins.len() {
            bins.clear();
        } else {
            bins.drain(..lead);
            t0 += lead as f64 * bin_width;
        }
    }
    Ok(ImpulseResponse { bin_width, t0, bins })
}

/// DC gain, 3-dB bandwidth and RMS delay spread of one AP→branch channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSummary {
    pub dc_gain: f64,
    /// Hz; zero when the channel carries no power.
    pub bandwidth_3db: f64,
    /// True when no 3-dB crossing exists below the scan limit and
    /// `bandwidth_3db` holds the scan limit.
    pub bandwidth_limited: bool,
    pub rms_delay_spread: f64,
}

impl ChannelSummary {
    pub const EMPTY: ChannelSummary = ChannelSummary {
        dc_gain: 0.0,
        bandwidth_3db: 0.0,
        bandwidth_limited: false,
        rms_delay_spread: 0.0,
    };

    pub fn from_response(ir: &ImpulseResponse, scan_limit: f64) -> Result<ChannelSummary> {
        let dc = ir.dc_gain();
        if dc <= 0.0 {
            return Ok(ChannelSummary::EMPTY);
        }
        let Bandwidth { hz, limited } = spectrum::bandwidth_3db(ir, scan_limit)?;
        Ok(ChannelSummary {
            dc_gain: dc,
            bandwidth_3db: hz,
            bandwidth_limited: limited,
            rms_delay_spread: ir.rms_delay_spread(),
        })
    }
}
