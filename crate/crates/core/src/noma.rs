//! Power-domain NOMA: gain-ratio power allocation, receiver noise, the
//! per-user SINR and the Shannon rate mapping.
//!
//! For user `k` of a group served by one AP, with `S = Pt·R·h_k·η`,
//!
//! ```text
//! SINR_k = (a_k S)² / ( (Σ_{i≠k} a_i S)² + σ² )
//! σ²     = B N₀ + 2q (I_d + R P_bn) B
//! ```
//!
//! [`NomaMode::Literal`] sums the interference over every other member of
//! the group. [`NomaMode::Sic`] keeps only members with a stronger channel,
//! i.e. the lower-power signals left after successive cancellation.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Elementary charge [C].
pub const ELECTRON_CHARGE: f64 = 1.602176634e-19;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NomaMode {
    #[default]
    Literal,
    Sic,
}

impl NomaMode {
    pub fn other(self) -> NomaMode {
        match self {
            NomaMode::Literal => NomaMode::Sic,
            NomaMode::Sic => NomaMode::Literal,
        }
    }
}

impl fmt::Display for NomaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NomaMode::Literal => "literal",
            NomaMode::Sic => "sic",
        })
    }
}

impl FromStr for NomaMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "literal" => Ok(NomaMode::Literal),
            "sic" => Ok(NomaMode::Sic),
            _ => Err(format!("unknown NOMA mode `{s}` (expected literal or sic)")),
        }
    }
}

/// Receiver noise parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseParams {
    /// Thermal noise current density N₀ [A²/Hz].
    pub noise_power_density: f64,
    /// Receiver bandwidth B [Hz]; also caps the per-user rate bandwidth.
    pub receiver_bandwidth: f64,
    /// Dark current I_d [A].
    pub dark_current: f64,
    /// Background optical power P_bn [W] seen by a detector with `reference_fov`.
    pub background_power: f64,
    /// Field of view [deg] at which `background_power` applies.
    pub reference_fov: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            noise_power_density: 4.7e-28,
            receiver_bandwidth: 100e6,
            dark_current: 1e-9,
            background_power: 1e-6,
            reference_fov: 85.0,
        }
    }
}

impl NoiseParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("noise.noise_power_density", self.noise_power_density),
            ("noise.dark_current", self.dark_current),
            ("noise.background_power", self.background_power),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be non-negative, got {v}")));
            }
        }
        if !(self.receiver_bandwidth > 0.0 && self.receiver_bandwidth.is_finite()) {
            return Err(Error::invalid(
                "noise.receiver_bandwidth",
                format!("must be positive, got {}", self.receiver_bandwidth),
            ));
        }
        if !(self.reference_fov > 0.0 && self.reference_fov <= 90.0) {
            return Err(Error::invalid(
                "noise.reference_fov",
                format!("must lie in (0, 90] degrees, got {}", self.reference_fov),
            ));
        }
        Ok(())
    }
}

/// Noise variance σ² [A²] of a branch with the given responsivity and field of view.
pub fn noise_power(np: &NoiseParams, responsivity: f64, branch_fov: f64) -> f64 {
    let p_bn = crate::receiver::background_power(np.background_power, branch_fov, np.reference_fov);
    let b = np.receiver_bandwidth;
    b * np.noise_power_density + 2.0 * ELECTRON_CHARGE * (np.dark_current + responsivity * p_bn) * b
}

/// Gain-ratio power allocation.
///
/// Users are ranked by descending gain; the user at 1-based rank `k` gets
/// weight `(h₁/h_k)^k`, normalized to sum to one. Coefficients come back in
/// the caller's order.
pub fn allocate_power_grpa(gains: &[f64]) -> Result<Vec<f64>> {
    if gains.is_empty() {
        return Err(Error::domain("power allocation needs at least one user"));
    }
    if let Some((user, &gain)) = gains.iter().enumerate().find(|(_, &g)| !(g > 0.0 && g.is_finite())) {
        return Err(Error::ExcludedUser { user, gain });
    }
    let order = descending_order(gains);
    let strongest = gains[order[0]];
    // log-domain weights keep large ratios from overflowing
    let log_w: Vec<f64> = order
        .iter()
        .enumerate()
        .map(|(rank, &u)| (rank + 1) as f64 * (strongest / gains[u]).ln())
        .collect();
    let max = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    let mut out = vec![0.0; gains.len()];
    for (rank, &u) in order.iter().enumerate() {
        out[u] = w[rank] / total;
    }
    Ok(out)
}

/// Indices sorted by descending gain, ties by ascending index.
fn descending_order(gains: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..gains.len()).collect();
    order.sort_by(|&a, &b| gains[b].partial_cmp(&gains[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    order
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupMember {
    pub user: usize,
    /// Channel gain used to rank the member and derive its coefficient.
    pub gain: f64,
    pub coefficient: f64,
}

/// Users sharing one AP, strongest channel first.
#[derive(Debug, Clone, PartialEq)]
pub struct NomaGroup {
    pub serving_ap: usize,
    pub members: Vec<GroupMember>,
}

impl NomaGroup {
    /// Builds a group from `(user, gain)` pairs with GRPA coefficients.
    pub fn new(serving_ap: usize, users: &[(usize, f64)]) -> Result<NomaGroup> {
        let gains: Vec<f64> = users.iter().map(|&(_, g)| g).collect();
        let coeffs = allocate_power_grpa(&gains).map_err(|e| match e {
            Error::ExcludedUser { user, gain } => Error::ExcludedUser { user: users[user].0, gain },
            other => other,
        })?;
        let members = descending_order(&gains)
            .into_iter()
            .map(|i| GroupMember { user: users[i].0, gain: users[i].1, coefficient: coeffs[i] })
            .collect();
        Ok(NomaGroup { serving_ap, members })
    }

    /// Group with explicitly supplied coefficients, sorted by descending gain.
    pub fn with_coefficients(serving_ap: usize, members: Vec<GroupMember>) -> NomaGroup {
        let gains: Vec<f64> = members.iter().map(|m| m.gain).collect();
        let members = descending_order(&gains).into_iter().map(|i| members[i]).collect();
        NomaGroup { serving_ap, members }
    }

    pub fn position_of(&self, user: usize) -> Option<usize> {
        self.members.iter().position(|m| m.user == user)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Electrical link constants for one serving AP and branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkConstants {
    /// Transmit optical power Pt [W].
    pub transmit_power: f64,
    /// Responsivity R [A/W].
    pub responsivity: f64,
    /// Source efficiency η.
    pub efficiency: f64,
}

/// SINR of the member at `position` (rank in `group`) on a branch with gain `gain`.
///
/// `sigma2` is the total additive noise plus any co-channel term [A²].
/// Returns `f64::INFINITY` when both interference and noise vanish.
pub fn sinr_eq1(
    position: usize,
    group: &NomaGroup,
    gain: f64,
    link: LinkConstants,
    sigma2: f64,
    mode: NomaMode,
) -> f64 {
    let s = link.transmit_power * link.responsivity * gain * link.efficiency;
    let a_k = group.members[position].coefficient;
    let interferers: f64 = group
        .members
        .iter()
        .enumerate()
        .filter(|&(i, _)| match mode {
            NomaMode::Literal => i != position,
            NomaMode::Sic => i < position,
        })
        .map(|(_, m)| m.coefficient)
        .sum();
    let signal = (a_k * s).powi(2);
    let denom = (interferers * s).powi(2) + sigma2;
    if denom > 0.0 {
        signal / denom
    } else if signal > 0.0 {
        log::warn!(
            "user {} has neither noise nor interference; SINR is unbounded",
            group.members[position].user
        );
        f64::INFINITY
    } else {
        0.0
    }
}

/// Shannon rate `B log₂(1 + SINR)` [bit/s].
pub fn data_rate(sinr: f64, bandwidth: f64) -> f64 {
    bandwidth * sinr.ln_1p() / std::f64::consts::LN_2
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Per-user outcome of one allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkReport {
    pub user: usize,
    pub serving_ap: usize,
    pub branch: usize,
    pub dc_gain: f64,
    /// 3-dB bandwidth of the selected channel [Hz].
    pub channel_bandwidth: f64,
    pub bandwidth_limited: bool,
    /// Bandwidth used for the rate: `min(receiver bandwidth, channel bandwidth)`.
    pub rate_bandwidth: f64,
    pub sinr: f64,
    pub sinr_db: f64,
    pub data_rate: f64,
    pub sinr_literal: f64,
    pub sinr_sic: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn link() -> LinkConstants {
        LinkConstants { transmit_power: 1.9, responsivity: 0.4, efficiency: 1.0 }
    }

    #[test]
    fn grpa_small_cases() {
        assert_eq!(allocate_power_grpa(&[3e-6]).unwrap(), vec![1.0]);
        assert_eq!(allocate_power_grpa(&[1e-6, 1e-6]).unwrap(), vec![0.5, 0.5]);
        let a = allocate_power_grpa(&[2e-6, 1e-6]).unwrap();
        assert!((a[0] - 0.2).abs() < 1e-15 && (a[1] - 0.8).abs() < 1e-15);
        // caller order preserved
        let a = allocate_power_grpa(&[1e-6, 2e-6]).unwrap();
        assert!((a[0] - 0.8).abs() < 1e-15 && (a[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn grpa_three_users_by_hand() {
        // sorted h = {4, 2, 1}: w = {1, (2)², (4)³} = {1, 4, 64}
        let a = allocate_power_grpa(&[2.0, 1.0, 4.0]).unwrap();
        let want = [4.0 / 69.0, 64.0 / 69.0, 1.0 / 69.0];
        for (x, y) in a.iter().zip(want) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn grpa_rejects_non_positive_gain() {
        match allocate_power_grpa(&[1.0, 0.0, 2.0]) {
            Err(Error::ExcludedUser { user: 1, gain }) => assert_eq!(gain, 0.0),
            other => panic!("{other:?}"),
        }
        assert!(allocate_power_grpa(&[]).is_err());
    }

    #[test]
    fn grpa_extreme_ratios_stay_finite() {
        let gains: Vec<f64> = (0..16).map(|i| 10f64.powi(-(i as i32) * 3)).collect();
        let a = allocate_power_grpa(&gains).unwrap();
        assert!(a.iter().all(|x| x.is_finite() && *x >= 0.0));
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noise_limits() {
        let mut np = NoiseParams { noise_power_density: 0.0, dark_current: 0.0, background_power: 0.0, ..Default::default() };
        assert_eq!(noise_power(&np, 0.4, 25.0), 0.0);
        np = NoiseParams::default();
        let s1 = noise_power(&np, 0.4, 40.0);
        np.receiver_bandwidth *= 2.0;
        assert!((noise_power(&np, 0.4, 40.0) - 2.0 * s1).abs() <= 1e-15 * s1);
    }

    #[test]
    fn noise_representative_values() {
        let np = NoiseParams::default();
        // 1e8·4.7e-28 + 2·1.602176634e-19·(1e-9 + 0.4·1e-6)·1e8
        let want = 4.7e-20 + 3.204353268e-19 * 4.01e-7 * 1e8;
        let got = noise_power(&np, 0.4, 85.0);
        assert!((got - want).abs() / want < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn sinr_single_user() {
        let g = NomaGroup::new(0, &[(0, 1e-6)]).unwrap();
        let s = 1.9 * 0.4 * 1e-6;
        let got = sinr_eq1(0, &g, 1e-6, link(), 1e-17, NomaMode::Literal);
        assert!((got - s * s / 1e-17).abs() / got < 1e-12);
    }

    #[test]
    fn sinr_zero_coefficient() {
        let g = NomaGroup::with_coefficients(
            0,
            vec![
                GroupMember { user: 0, gain: 2e-6, coefficient: 0.0 },
                GroupMember { user: 1, gain: 1e-6, coefficient: 1.0 },
            ],
        );
        assert_eq!(sinr_eq1(0, &g, 2e-6, link(), 1e-17, NomaMode::Literal), 0.0);
    }

    #[test]
    fn sinr_two_users_literal_and_sic() {
        let g = NomaGroup::new(0, &[(7, 2e-6), (9, 1e-6)]).unwrap();
        let sigma2 = 3e-17;
        let s: f64 = 1.9 * 0.4 * 2e-6;
        let want = (0.2 * s).powi(2) / ((0.8 * s).powi(2) + sigma2);
        let got = sinr_eq1(0, &g, 2e-6, link(), sigma2, NomaMode::Literal);
        assert!((got - want).abs() / want < 1e-12);
        // strongest user cancels everyone else under SIC
        let sic = sinr_eq1(0, &g, 2e-6, link(), sigma2, NomaMode::Sic);
        assert!((sic - (0.2 * s).powi(2) / sigma2).abs() / sic < 1e-12);
        let s2: f64 = 1.9 * 0.4 * 1e-6;
        let weak = sinr_eq1(1, &g, 1e-6, link(), sigma2, NomaMode::Sic);
        let want = (0.8 * s2).powi(2) / ((0.2 * s2).powi(2) + sigma2);
        assert!((weak - want).abs() / want < 1e-12);
    }

    #[test]
    fn sinr_noiseless_single_user_is_unbounded() {
        let g = NomaGroup::new(0, &[(0, 1e-6)]).unwrap();
        assert_eq!(sinr_eq1(0, &g, 1e-6, link(), 0.0, NomaMode::Literal), f64::INFINITY);
    }

    #[test]
    fn rate_mapping() {
        assert_eq!(data_rate(0.0, 1e8), 0.0);
        assert!((data_rate(1.0, 1e6) - 1e6).abs() < 1e-6);
        assert!((data_rate(15.0, 1e8) - 4e8).abs() < 1e-4);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("sic".parse::<NomaMode>().unwrap(), NomaMode::Sic);
        assert_eq!(NomaMode::Literal.to_string(), "literal");
        assert!("foo".parse::<NomaMode>().is_err());
    }
}
