//! Experiment configuration, read from TOML or JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CurveParams, Hypersurface};
use crate::incidence::{ClassifyConfig, PlaneMode, SuiteConfig};
use crate::transforms::SupLineConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    /// "paraboloid", "sphere" or "quadratic" (with `form`).
    pub surface: String,
    pub form: Option<Vec<Vec<f64>>>,
    /// None runs the automated search over `c_candidates`.
    pub c: Option<f64>,
    pub c_candidates: Vec<f64>,
    pub b: f64,
    pub stride: usize,
    pub base: f64,
    pub n0: usize,
    /// N values; R is derived from each.
    pub schedule: Vec<usize>,
    /// Random directions for the sup-line and mixed-norm sweeps.
    pub dir_samples: usize,
    pub seed: u64,
    pub quad_order: usize,
    /// Pairs closer than this (units of 1/R) are integrated exactly in the energy.
    pub near_radius: f64,
    pub incidence_dirs: usize,
    pub plane_budget: usize,
    pub resolution_dirs: usize,
    pub sup_line: SupLineConfig,
    /// Abort on an incidence failure.
    pub gate: bool,
    pub out_dir: String,
    pub csv_name: String,
    pub json_name: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            d: 2,
            surface: "paraboloid".into(),
            form: None,
            c: None,
            c_candidates: vec![2.0, 4.0, 8.0, 16.0],
            b: 2.0,
            stride: 1,
            base: 2.0,
            n0: 2,
            schedule: vec![4, 6, 8, 10, 12],
            dir_samples: 256,
            seed: 11,
            quad_order: 8,
            near_radius: 10.0,
            incidence_dirs: 10_000,
            plane_budget: 20_000,
            resolution_dirs: 512,
            sup_line: SupLineConfig::default(),
            gate: true,
            out_dir: "out".into(),
            csv_name: "ratio.csv".into(),
            json_name: "ratio.json".into(),
        }
    }
}

impl ExperimentConfig {
    /// Reads `.json` files as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schedule.is_empty() {
            return Err(Error::Config("schedule is empty".into()));
        }
        if self.schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("schedule must be strictly increasing".into()));
        }
        if self.schedule[0] == 0 {
            return Err(Error::Config("N must be at least 1".into()));
        }
        if self.stride == 0 || !(self.base > 1.0) {
            return Err(Error::Config("stride >= 1 and base > 1 required".into()));
        }
        if self.dir_samples == 0 || self.quad_order == 0 || !(self.near_radius > 0.0) {
            return Err(Error::Config("dir_samples, quad_order and near_radius must be positive".into()));
        }
        if self.c.is_none() && self.c_candidates.is_empty() {
            return Err(Error::Config("no c given and no candidates to search".into()));
        }
        self.surface()?;
        let nmax = *self.schedule.last().expect("nonempty");
        if let Some(c) = self.c {
            CurveParams::new(self.d, c, self.b, nmax)?;
        }
        Ok(())
    }

    pub fn surface(&self) -> Result<Hypersurface> {
        match (self.surface.as_str(), &self.form) {
            ("quadratic", Some(form)) => Hypersurface::quadratic(form.clone()),
            ("quadratic", None) => Err(Error::Config("quadratic surface needs `form`".into())),
            (name, _) => Hypersurface::by_name(name, self.d),
        }
    }

    pub fn classify(&self) -> ClassifyConfig {
        ClassifyConfig { base: self.base, stride: self.stride }
    }

    pub fn suite(&self) -> SuiteConfig {
        SuiteConfig {
            dirs: self.incidence_dirs,
            seed: self.seed,
            classify: self.classify(),
            planes: PlaneMode::Auto,
            plane_budget: self.plane_budget,
            resolution_dirs: self.resolution_dirs,
        }
    }
}
