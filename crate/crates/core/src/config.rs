//! Flat TOML configuration shared by the command-line tool.
//!
//! Every key is top level. Schedule overrides use the names of
//! [`Overrides`] (`eta`, `eta_prime`, `t_prime`, `f_prime`, `r0`, `M`,
//! `kappa`, `theta`, `gamma`, `s`, `script_t`, `script_e`, `delta0`, `T`,
//! `C_r`, `C0`, `c_A`, `alpha`); everything else is listed on [`Config`].
//! Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::Deserialize;

use crate::bench::{ExperimentKind, ExperimentSpec};
use crate::error::{Error, Result};
use crate::landscapes::{self, Landscape};
use crate::optim::{Algorithm, NoisyGradientModel, RunOptions};
use crate::perturb::{schedule_from, Backend, BackendKind, Overrides, PdeSettings, ScheduleParams};
use crate::wavesim::{Boundary, TimeStep};

const OVERRIDE_KEYS: &[&str] = &[
    "eta", "eta_prime", "t_prime", "f_prime", "r0", "M", "kappa", "theta", "gamma", "s", "script_t",
    "script_e", "delta0", "T", "C_r", "C0", "c_A", "alpha",
];

/// Default grid size and sample count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Profile {
    /// mesh 256, 200 samples.
    #[default]
    Ci,
    /// mesh 512, 1000 samples.
    Paper,
}

impl Profile {
    pub fn mesh(self) -> usize {
        match self {
            Profile::Ci => 256,
            Profile::Paper => 512,
        }
    }

    pub fn samples(self) -> usize {
        match self {
            Profile::Ci => 200,
            Profile::Paper => 1000,
        }
    }
}

impl FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ci" => Ok(Profile::Ci),
            "paper" => Ok(Profile::Paper),
            other => Err(Error::Config(format!("unknown profile `{other}` (expected ci or paper)"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub seed: Option<u64>,

    pub landscape: Option<String>,
    /// Landscape parameters (`diagquad`: n, eps; `shifted_quad1d`: lambda, d).
    pub landscape_n: Option<f64>,
    pub landscape_eps: Option<f64>,
    pub landscape_lambda: Option<f64>,
    pub landscape_d: Option<f64>,

    pub algorithm: Option<Algorithm>,
    /// Start point; the origin when absent.
    pub x0: Option<Vec<f64>>,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub f_gap: Option<f64>,
    /// Replace the landscape's constants.
    pub rho: Option<f64>,
    pub ell: Option<f64>,
    /// Certify and stop at the first perturbation that fails to decrease
    /// `f` by `F'` (default on).
    pub early_stop: Option<bool>,
    /// Ball radius of classical perturbations (default `eps`).
    pub radius: Option<f64>,
    /// Gradient evaluation accuracy of `pgd_jordan`; defaults to the
    /// accuracy required by the robustness analysis.
    pub delta_q: Option<f64>,
    pub omega0: Option<f64>,

    pub backend: Option<BackendKind>,
    pub mesh: Option<usize>,
    pub half_width: Option<f64>,
    pub boundary: Option<Boundary>,
    /// Fixed solver step; automatic when absent.
    pub dt: Option<f64>,
    /// Evolution time per simulation (experiments; replaces `T'` for the
    /// optimizers).
    pub t_e: Option<f64>,

    pub experiment: Option<ExperimentKind>,
    pub samples: Option<usize>,
    /// Packet spread and classical ball radius of the experiments.
    pub r: Option<f64>,
    pub times: Option<Vec<f64>>,
    pub snapshots: Option<bool>,
    pub t_classical: Option<usize>,
    pub t_quantum: Option<usize>,
    pub threshold: Option<f64>,
    pub powers: Option<Vec<u32>>,
    pub sweep_eps: Option<f64>,
    pub sweep_t_e: Option<f64>,

    #[serde(skip)]
    pub overrides: Overrides,
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let (over, rest): (toml::Table, toml::Table) =
            table.into_iter().partition(|(k, _)| OVERRIDE_KEYS.contains(&k.as_str()));
        let mut cfg: Config = rest.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.overrides = over.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn landscape_name(&self) -> &str {
        self.landscape.as_deref().unwrap_or("quartic2d")
    }

    pub fn landscape_params(&self) -> BTreeMap<String, f64> {
        [
            ("n", self.landscape_n),
            ("eps", self.landscape_eps),
            ("lambda", self.landscape_lambda),
            ("d", self.landscape_d),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
        .collect()
    }

    pub fn build_landscape(&self) -> Result<Arc<dyn Landscape<f64>>> {
        landscapes::by_name(self.landscape_name(), &self.landscape_params())
    }

    pub fn start_point(&self, dim: usize) -> Result<Vec<f64>> {
        match &self.x0 {
            None => Ok(vec![0.0; dim]),
            Some(x) if x.len() == dim => Ok(x.clone()),
            Some(x) => Err(Error::Config(format!("x0 has {} entries, landscape dimension is {dim}", x.len()))),
        }
    }

    /// Schedule for `landscape`; `rho` and `ell` default to its constants.
    pub fn schedule(&self, landscape: &dyn Landscape<f64>) -> Result<ScheduleParams<f64>> {
        let rho = self.rho.unwrap_or_else(|| landscape.rho());
        if !(rho > 0.0) {
            return Err(Error::Config(format!(
                "landscape `{}` has rho = {rho}; set `rho` to a positive value",
                landscape.name()
            )));
        }
        schedule_from(
            self.ell.unwrap_or_else(|| landscape.ell()),
            rho,
            self.eps.unwrap_or(0.01),
            self.delta.unwrap_or(0.1),
            self.f_gap.unwrap_or(1.0),
            landscape.dim(),
            landscape.domain_radius(),
            &self.overrides,
        )
        .map_err(|e| match e {
            Error::InvalidArgument(m) => Error::Config(m),
            other => other,
        })
    }

    fn pde_settings(&self, profile: Profile) -> PdeSettings<f64> {
        PdeSettings {
            mesh: self.mesh.unwrap_or(profile.mesh()),
            half_width: self.half_width,
            boundary: self.boundary.unwrap_or_default(),
            dt: self.dt.map_or(TimeStep::Auto, TimeStep::Fixed),
        }
    }

    pub fn backend(&self, profile: Profile) -> Backend<f64> {
        match self.backend.unwrap_or(BackendKind::Analytic) {
            BackendKind::Analytic => Backend::Analytic,
            BackendKind::Pde => Backend::Pde(self.pde_settings(profile)),
        }
    }

    pub fn run_options(&self, profile: Profile) -> RunOptions<f64> {
        RunOptions {
            backend: self.backend(profile),
            t_e: self.t_e,
            early_stop: self.early_stop.unwrap_or(true),
            iterations: self.overrides.iterations.map(|t| t as usize),
        }
    }

    pub fn noise_model(&self, params: &ScheduleParams<f64>) -> NoisyGradientModel<f64> {
        let omega0 = self.omega0.unwrap_or(1.0);
        match self.delta_q {
            Some(dq) => NoisyGradientModel::new(dq, params.ell, params.n, omega0),
            None => NoisyGradientModel::for_schedule(params, omega0),
        }
    }

    pub fn seed_or(&self, cli: Option<u64>) -> u64 {
        cli.or(self.seed).unwrap_or(0)
    }

    /// Experiment description; `kind` applies when the file names none.
    /// The landscape defaults to quartic2d for mini-batch comparisons and
    /// quad2d otherwise.
    pub fn experiment_spec(
        &self,
        kind: ExperimentKind,
        profile: Profile,
        seed: u64,
        out_dir: Option<PathBuf>,
    ) -> Result<ExperimentSpec> {
        let d = ExperimentSpec::default();
        let kind = self.experiment.unwrap_or(kind);
        let default_landscape = match kind {
            ExperimentKind::MinibatchCompare => "quartic2d",
            _ => d.landscape.as_str(),
        };
        let spec = ExperimentSpec {
            kind,
            landscape: self.landscape.clone().unwrap_or_else(|| default_landscape.to_string()),
            landscape_params: self.landscape_params(),
            samples: self.samples.unwrap_or(profile.samples()),
            seed,
            out_dir,
            r: self.r.unwrap_or(d.r),
            half_width: self.half_width.unwrap_or(d.half_width),
            mesh: self.mesh.unwrap_or(profile.mesh()),
            boundary: self.boundary.unwrap_or(d.boundary),
            dt: self.dt.map_or(TimeStep::Auto, TimeStep::Fixed),
            times: self.times.clone().unwrap_or(d.times),
            snapshots: self.snapshots.unwrap_or(false),
            eta: self.overrides.eta.unwrap_or(d.eta),
            t_classical: self.t_classical.unwrap_or(d.t_classical),
            t_quantum: self.t_quantum.unwrap_or(d.t_quantum),
            t_e: self.t_e.unwrap_or(d.t_e),
            threshold: self.threshold,
            backend: self.backend.unwrap_or(d.backend),
            powers: self.powers.clone().unwrap_or(d.powers),
            sweep_eps: self.sweep_eps.unwrap_or(d.sweep_eps),
            sweep_t_e: self.sweep_t_e,
            sweep_steps: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Algorithm, defaulting to `pgd_qs`.
    pub fn algorithm(&self) -> Algorithm {
        self.algorithm.unwrap_or(Algorithm::PgdQs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_keys_and_overrides() {
        let cfg = Config::from_toml_str(
            r#"
            landscape = "diagquad"
            landscape_n = 10
            landscape_eps = 0.01
            algorithm = "pagd_qs"
            rho = 1.0
            eps = 1e-4
            T = 50
            eta = 0.5
            M = 0.3
            backend = "pde"
            boundary = "periodic"
            experiment = "dimension_sweep"
            powers = [1, 2]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.algorithm(), Algorithm::PagdQs);
        assert_eq!(cfg.overrides.iterations, Some(50));
        assert_eq!(cfg.overrides.m, Some(0.3));
        assert_eq!(cfg.boundary, Some(Boundary::Periodic));
        let f = cfg.build_landscape().unwrap();
        assert_eq!(f.dim(), 10);
        let p = cfg.schedule(f.as_ref()).unwrap();
        assert_eq!((p.eta, p.pagd_iterations()), (0.5, 50));
        let spec = cfg.experiment_spec(ExperimentKind::Dispersion, Profile::Paper, 3, None).unwrap();
        assert_eq!((spec.kind, spec.samples, spec.mesh, spec.eta), (ExperimentKind::DimensionSweep, 1000, 512, 0.5));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Config::from_toml_str("nonsense = 1"), Err(Error::Config(_))));
        assert!(matches!(Config::from_toml_str("T = -3"), Err(Error::Config(_))));
        assert!(matches!(Config::from_toml_str("algorithm = \"sgd\""), Err(Error::Config(_))));
        assert!(matches!(Config::from_toml_str("eps = ["), Err(Error::Config(_))));
        let cfg = Config::from_toml_str("landscape = \"quad2d\"").unwrap();
        let f = cfg.build_landscape().unwrap();
        assert!(matches!(cfg.schedule(f.as_ref()), Err(Error::Config(_))));
        assert!(Config { x0: Some(vec![0.0, 0.0]), ..Config::default() }.start_point(3).is_err());
        let cfg = Config::from_toml_str("eps = -1.0").unwrap();
        let f = cfg.build_landscape().unwrap();
        assert!(matches!(cfg.schedule(f.as_ref()), Err(Error::Config(_))));
    }

    #[test]
    fn defaults() {
        let cfg = Config::default();
        assert_eq!(cfg.landscape_name(), "quartic2d");
        assert_eq!(cfg.seed_or(None), 0);
        assert_eq!(Config { seed: Some(4), ..Config::default() }.seed_or(Some(9)), 9);
        let o = cfg.run_options(Profile::Ci);
        assert!(o.early_stop && matches!(o.backend, Backend::Analytic));
        assert_eq!("paper".parse::<Profile>().unwrap(), Profile::Paper);
    }
}
