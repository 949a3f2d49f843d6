use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use waveguide_core::backflow::CrossSectionGrid;
use waveguide_core::kernels::{KernelFamily, KernelSpec, WaveguideGeometry};
use waveguide_core::oracle::QuadratureSettings;
use waveguide_core::wavepacket::SpinState;

use crate::failure::Failure;

/// Reduced Compton wavelength in metres.
pub const COMPTON_LENGTH_M: f64 = 3.8616e-13;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub spin: SpinConfig,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub plane: PlaneConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Multiply lengths in tabular output by the Compton length.
    #[serde(default)]
    pub si_scale: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub a: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig { a: 5.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpinConfig {
    pub theta: f64,
    pub phi_spin: f64,
}

impl Default for SpinConfig {
    fn default() -> Self {
        SpinConfig {
            theta: FRAC_PI_2,
            phi_spin: FRAC_PI_2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub family: KernelFamily,
    pub tau0: f64,
    pub z0: f64,
    /// `[re, im]`; when absent the packet is normalized.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<[f64; 2]>,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            family: KernelFamily::K1Ratio,
            tau0: 1.0,
            z0: 2.0,
            a0: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PlaneConfig {
    #[serde(rename = "L")]
    pub distance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_list: Option<Vec<f64>>,
}

impl Default for PlaneConfig {
    fn default() -> Self {
        PlaneConfig {
            distance: 200.0,
            t: Some(400.0),
            t_list: None,
        }
    }
}

impl PlaneConfig {
    pub fn times(&self) -> Vec<f64> {
        match (&self.t, &self.t_list) {
            (_, Some(list)) => list.clone(),
            (Some(t), None) => vec![*t],
            (None, None) => vec![2.0 * self.distance],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_n_rho")]
    pub n_rho: usize,
    #[serde(default = "default_n_phi")]
    pub n_phi: usize,
    #[serde(default = "default_n_z")]
    pub n_z: usize,
    #[serde(default = "default_z_max")]
    pub z_max: f64,
}

fn default_n_rho() -> usize {
    200
}
fn default_n_phi() -> usize {
    256
}
fn default_n_z() -> usize {
    41
}
fn default_z_max() -> f64 {
    20.0
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n_rho: default_n_rho(),
            n_phi: default_n_phi(),
            n_z: default_n_z(),
            z_max: default_z_max(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_subdivisions: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Tsv,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Everything a command needs, built from a validated config.
pub struct Resolved {
    pub geom: WaveguideGeometry,
    pub spin: SpinState,
    pub unit_spec: KernelSpec,
    pub settings: QuadratureSettings,
    pub grid: CrossSectionGrid,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn resolve(&self) -> Result<Resolved, Failure> {
        let geom = WaveguideGeometry::new(self.geometry.a).map_err(Failure::from_core)?;
        let spin =
            SpinState::new(self.spin.theta, self.spin.phi_spin).map_err(Failure::from_core)?;
        let unit_spec = KernelSpec::new(self.kernel.family, self.kernel.tau0, self.kernel.z0)
            .map_err(Failure::from_core)?;
        if let Some([re, im]) = self.kernel.a0 {
            if !(re.is_finite() && im.is_finite()) {
                return Err(Failure::config("kernel.a0 must be finite"));
            }
        }
        let defaults = QuadratureSettings::default();
        let q = &self.quadrature;
        let settings = QuadratureSettings {
            rel_tol: q.rel_tol.unwrap_or(defaults.rel_tol),
            abs_tol: q.abs_tol.unwrap_or(defaults.abs_tol),
            k_max: q.k_max.or(defaults.k_max),
            max_subdivisions: q.max_subdivisions.unwrap_or(defaults.max_subdivisions),
        };
        settings.validate().map_err(Failure::from_core)?;
        let grid =
            CrossSectionGrid::new(self.grid.n_rho, self.grid.n_phi).map_err(Failure::from_core)?;
        if self.grid.n_z == 0 {
            return Err(Failure::config("grid.n_z must be positive"));
        }
        if !(self.grid.z_max >= 0.0 && self.grid.z_max.is_finite()) {
            return Err(Failure::config("grid.z_max must be a non-negative number"));
        }
        if !(self.plane.distance > 0.0 && self.plane.distance.is_finite()) {
            return Err(Failure::config("plane.L must be positive"));
        }
        if self.plane.t.is_some() && self.plane.t_list.is_some() {
            return Err(Failure::config("plane: give either t or t_list, not both"));
        }
        let times = self.plane.times();
        if times.is_empty() || times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Failure::config("plane: times must be non-negative numbers"));
        }
        Ok(Resolved {
            geom,
            spin,
            unit_spec,
            settings,
            grid,
        })
    }

    pub fn a0_override(&self) -> Option<Complex64> {
        self.kernel.a0.map(|[re, im]| Complex64::new(re, im))
    }

    pub fn length_scale(&self) -> f64 {
        if self.si_scale {
            COMPTON_LENGTH_M
        } else {
            1.0
        }
    }
}
