//! Declarative run configuration: kernels, potentials and per-subcommand
//! scenario tables.

use std::sync::Arc;

use nlpt::kernel::KernelSpec;
use nlpt::potential::{make_quartic_moving, PotentialSpec, WellPair};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub kernel: KernelConfig,
    pub potential: PotentialConfig,
    #[serde(default)]
    pub profile: Option<ProfileConfig>,
    #[serde(default)]
    pub tension: Option<TensionConfig>,
    #[serde(default)]
    pub holder_scan: Option<HolderScanConfig>,
    #[serde(default)]
    pub contdep: Option<ContdepConfig>,
    #[serde(default)]
    pub gamma_sweep: Option<GammaSweepConfig>,
    #[serde(default)]
    pub defect: Option<DefectConfig>,
    #[serde(default)]
    pub trace_gap: Option<TraceGapConfig>,
    #[serde(default)]
    pub extract_phase: Option<ExtractPhaseConfig>,
    #[serde(default)]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub acceptance: Vec<AcceptanceCheck>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub family: String,
    pub dim: usize,
    pub sigma: Option<f64>,
    pub rate: Option<f64>,
    pub eta: Option<f64>,
    pub lambda: Option<f64>,
    pub rho: Option<f64>,
    pub tail_rate: Option<f64>,
    /// truncation cap applied on top of the family
    pub cap: Option<f64>,
    pub grid_half_width: Option<f64>,
    pub spacing: Option<f64>,
}

impl KernelConfig {
    pub fn build(&self) -> Result<KernelSpec, String> {
        let base = match self.family.as_str() {
            "gaussian" => KernelSpec::gaussian(self.dim, self.sigma.unwrap_or(1.0)),
            "exponential" => KernelSpec::exponential(self.dim, self.rate.unwrap_or(1.0)),
            "fractional" => KernelSpec::fractional(
                self.dim,
                self.eta.ok_or("kernel.eta required for the fractional family")?,
                self.lambda.unwrap_or(1.0),
                self.rho.unwrap_or(1.0),
                self.tail_rate.unwrap_or(2.0),
            ),
            other => return Err(format!("unknown kernel family {other:?}")),
        };
        match self.cap {
            Some(cap) => base.truncate(cap).map_err(|e| e.to_string()),
            None => Ok(base),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub family: String,
    #[serde(default = "default_wells")]
    pub wells: String,
    pub z1: Option<f64>,
    pub z2: Option<f64>,
    pub scale: Option<f64>,
    /// Hölder wells: exponent, coefficient and anchor point.
    pub alpha: Option<f64>,
    pub coef: Option<f64>,
    pub x0: Option<Vec<f64>>,
    /// affine wells: gradients of z1, z2
    pub g1: Option<Vec<f64>>,
    pub g2: Option<Vec<f64>>,
    pub delta: Option<f64>,
}

fn default_wells() -> String {
    "constant".to_string()
}

impl PotentialConfig {
    pub fn build(&self) -> Result<PotentialSpec, String> {
        let z1 = self.z1.unwrap_or(-1.0);
        let z2 = self.z2.unwrap_or(1.0);
        let delta = self.delta.unwrap_or(((z2 - z1) / 8.0 * 0.9).min(1.0));
        let wells = match self.wells.as_str() {
            "constant" => WellPair::constant(z1, z2),
            "affine" => WellPair::affine(
                z1,
                self.g1.clone().unwrap_or_else(|| vec![0.0]),
                z2,
                self.g2.clone().unwrap_or_else(|| vec![0.0]),
                delta,
            ),
            "holder_point" => WellPair::holder_point(
                z1,
                z2,
                self.coef.unwrap_or(0.25),
                self.alpha.ok_or("potential.alpha required for holder_point wells")?,
                self.x0.clone().unwrap_or_else(|| vec![0.0]),
                delta,
            ),
            other => return Err(format!("unknown wells {other:?}")),
        };
        match self.family.as_str() {
            "quartic" => {
                let c = self.scale.unwrap_or(0.25);
                Ok(make_quartic_moving(wells, Arc::new(move |_| c)))
            }
            other => Err(format!("unknown potential family {other:?}")),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub r: Option<f64>,
    pub n: Option<usize>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub certify_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensionConfig {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    #[serde(default)]
    pub truncations: Vec<f64>,
    pub r: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolderScanConfig {
    pub xi: Vec<f64>,
    pub segment_start: Vec<f64>,
    pub segment_end: Vec<f64>,
    pub points: usize,
    #[serde(default)]
    pub geometric: bool,
    pub r: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContdepConfig {
    pub rhos: Vec<f64>,
    pub r: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaSweepConfig {
    pub eps: Vec<f64>,
    pub grid_n: usize,
    pub face_p0: Vec<f64>,
    pub face_p1: Vec<f64>,
    #[serde(default)]
    pub rect_lo: Option<Vec<f64>>,
    #[serde(default)]
    pub rect_hi: Option<Vec<f64>>,
    pub profile_n: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectConfig {
    pub eps: Vec<f64>,
    pub grid_n: usize,
    /// vertical split line dividing A from B
    pub split_x: f64,
    /// width of an excluded strip between A and B (0 = divided sets)
    #[serde(default)]
    pub gap: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceGapConfig {
    pub eps: Vec<f64>,
    pub grid_n: usize,
    pub face_p0: Vec<f64>,
    pub face_p1: Vec<f64>,
    /// constant offset added to the field relative to the trace
    #[serde(default)]
    pub offset: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractPhaseConfig {
    pub grid_n: usize,
    pub delta: f64,
    pub eps: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub nodes: usize,
    pub levels: usize,
    pub r: f64,
}

/// Declared pass/fail bound on a summary metric; the run exits nonzero
/// when any check fails.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptanceCheck {
    pub metric: String,
    pub max: Option<f64>,
    pub min: Option<f64>,
}
