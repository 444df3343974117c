//! Indoor visible-light downlink simulator.
//!
//! Traces diffuse (Lambertian) multipath channels in an empty rectangular
//! room up to second-order reflections, models angle diversity and wide-FOV
//! receivers, evaluates power-domain NOMA SINR and Shannon rates, and
//! searches user-to-AP assignments for the best sum SINR.
//!
//! ```no_run
//! use vlc_noma::config::ScenarioConfig;
//! use vlc_noma::runner::{run_scenario, RunMode};
//!
//! let cfg = ScenarioConfig::load("crates/core/scenarios/paper_scenario.toml")?;
//! let bundle = run_scenario(&cfg, RunMode::Compare)?;
//! println!("{:.1}%", bundle.comparison.unwrap().mean_improvement_pct);
//! # Ok::<(), vlc_noma::Error>(())
//! ```

pub mod alloc;
pub mod config;
mod error;
pub mod noma;
pub mod output;
pub mod raytrace;
pub mod receiver;
pub mod runner;
pub mod scene;
pub mod spectrum;

pub use error::{Error, Result};
