//! Versioned JSON model configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::ModeSet;
use crate::hamiltonian::{build_nelson, complex_deform, GHHamiltonian, Kappa, ParticleModel};
use crate::linalg::{re, OperatorMatrix};
use crate::models::two_level_form_factor;
use crate::C64;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ParticleConfig {
    Trivial,
    TwoLevel { gap: f64 },
    Levels { levels: Vec<f64> },
    /// Real symmetric matrix, row by row.
    Matrix { rows: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    #[serde(rename = "type")]
    pub kind: String,
    pub kappa: Kappa,
    pub g: f64,
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form_factor: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_max: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesConfig {
    /// Radial Gauss grid with this many modes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momenta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// Occupation cutoff of the reference diagonalization.
    pub n_max: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformConfig {
    #[serde(default)]
    pub theta_re: f64,
    #[serde(default)]
    pub theta_im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub j: usize,
    pub rho: Option<f64>,
    pub l_max: usize,
    pub max_mn: usize,
    pub kernel_n_max: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub flow_steps: usize,
    pub flow_l_max: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            j: 0,
            rho: None,
            l_max: 4,
            max_mn: 2,
            kernel_n_max: 2,
            tol: 1e-10,
            max_iter: 50,
            flow_steps: 5,
            flow_l_max: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub schema: u32,
    pub particle: ParticleConfig,
    pub coupling: CouplingConfig,
    pub modes: ModesConfig,
    #[serde(default)]
    pub deform: DeformConfig,
    #[serde(default)]
    pub solver: SolverSection,
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<OperatorMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Config("matrix must be square and nonempty".into()));
    }
    let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|&x| re(x)).collect()).collect();
    Ok(OperatorMatrix::from_rows(&rows))
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ModelConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!("unsupported schema {}", self.schema)));
        }
        if self.coupling.kind != "nelson" {
            return Err(Error::Config(format!("unknown coupling type {:?}", self.coupling.kind)));
        }
        let m = &self.modes;
        match (m.count, &m.momenta, &m.weights) {
            (Some(_), None, None) | (None, Some(_), Some(_)) => {}
            _ => return Err(Error::Config("modes need either count or momenta + weights".into())),
        }
        if self.solver.l_max == 0 || self.solver.tol <= 0.0 {
            return Err(Error::Config("solver section out of range".into()));
        }
        Ok(())
    }

    pub fn theta(&self) -> C64 {
        C64::new(self.deform.theta_re, self.deform.theta_im)
    }

    pub fn particle(&self) -> Result<ParticleModel> {
        match &self.particle {
            ParticleConfig::Trivial => Ok(ParticleModel::trivial()),
            ParticleConfig::TwoLevel { gap } => ParticleModel::diagonal(&[0.0, *gap]),
            ParticleConfig::Levels { levels } => ParticleModel::diagonal(levels),
            ParticleConfig::Matrix { rows } => {
                let m = matrix_from_rows(rows)?;
                if !m.is_hermitian(1e-14) {
                    return Err(Error::Config("particle matrix must be symmetric".into()));
                }
                ParticleModel::new(m)
            }
        }
    }

    pub fn modes(&self) -> Result<ModeSet> {
        match (self.modes.count, &self.modes.momenta, &self.modes.weights) {
            (Some(n), _, _) => ModeSet::gauss_radial(n),
            (None, Some(k), Some(w)) => ModeSet::new(k.clone(), w.clone()),
            _ => Err(Error::Config("modes need either count or momenta + weights".into())),
        }
    }

    /// The undeformed Hamiltonian.
    pub fn hamiltonian(&self) -> Result<GHHamiltonian> {
        let particle = self.particle()?;
        let ff = match (&self.coupling.form_factor, &self.particle) {
            (Some(rows), _) => matrix_from_rows(rows)?,
            (None, ParticleConfig::TwoLevel { .. }) => two_level_form_factor(),
            (None, _) => OperatorMatrix::identity(particle.dim()),
        };
        let c = &self.coupling;
        build_nelson(particle, c.kappa, ff, c.g, c.mu, self.modes()?, c.c_max.unwrap_or(10.0))
    }

    /// The Hamiltonian dilated by `theta`.
    pub fn deformed(&self, theta: C64) -> Result<GHHamiltonian> {
        let h = self.hamiltonian()?;
        if theta == C64::new(0.0, 0.0) {
            return Ok(h);
        }
        complex_deform(&h, theta)
    }
}
