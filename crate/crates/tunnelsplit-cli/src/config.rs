use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use tunnelsplit::homology::{DEFAULT_TOL, RELATION_THRESHOLD};
use tunnelsplit::model::Model;
use tunnelsplit::semicl::{HbarGrid, Source, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    DoubleWell,
    TripleWell,
    NormalForm,
    CustomPolynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Geometric,
}

/// Grid in 1/ħ: `min` and `max` are values of 1/ħ.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default = "default_spacing")]
    pub spacing: Spacing,
}

fn default_spacing() -> Spacing {
    Spacing::Linear
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_quadrature")]
    pub quadrature: f64,
    #[serde(default = "default_relation")]
    pub relation: f64,
}

fn default_quadrature() -> f64 {
    DEFAULT_TOL
}

fn default_relation() -> f64 {
    RELATION_THRESHOLD
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { quadrature: DEFAULT_TOL, relation: RELATION_THRESHOLD }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    /// Turning points of the multi-well models at their reference energy.
    #[serde(default)]
    pub roots: Option<Vec<f64>>,
    /// Custom H = Σ c p^i q^j as [i, j, c] triples.
    #[serde(default)]
    pub terms: Option<Vec<(usize, usize, f64)>>,
    #[serde(default)]
    pub energy: Option<f64>,
    /// Bohr–Sommerfeld level N in the leftmost well, instead of an energy.
    #[serde(default)]
    pub level: Option<usize>,
    #[serde(default)]
    pub hbar_grid: Option<GridConfig>,
    /// Single ħ for the quantum spectrum and quantization reports.
    #[serde(default)]
    pub hbar: Option<f64>,
    #[serde(default)]
    pub sources: Vec<Source>,
    #[serde(default)]
    pub variants: Vec<Variant>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Real time T in the ħ/2T prefactor.
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub cutoff: Option<usize>,
    #[serde(default)]
    pub basis_size: Option<usize>,
}

pub const DEFAULT_CUTOFF: usize = 200;
pub const DEFAULT_BASIS: usize = 1024;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Where the energy comes from.
#[derive(Debug, Clone, Copy)]
pub enum EnergyChoice {
    Energy(f64),
    Level(usize),
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model()?;
        self.energy_choice()?;
        if let Some(g) = &self.hbar_grid {
            self.grid_from(g)?;
        }
        if let Some(h) = self.hbar {
            if !(h > 0.0 && h.is_finite()) {
                return bad("hbar must be positive");
            }
        }
        let t = &self.tolerances;
        if !(t.quadrature > 0.0 && t.relation > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.cutoff == Some(0) {
            return bad("cutoff must be at least 1");
        }
        Ok(())
    }

    pub fn model(&self) -> Result<Model, ConfigError> {
        let roots = |n: usize| -> Result<Vec<f64>, ConfigError> {
            if self.terms.is_some() {
                return bad("terms are only read for custom_polynomial");
            }
            match &self.roots {
                Some(r) if r.len() == n && r.iter().all(|x| x.is_finite()) => {
                    let mut r = r.clone();
                    r.sort_by(|a, b| a.total_cmp(b));
                    if r.windows(2).any(|w| w[1] - w[0] <= 0.0) {
                        return bad("roots must be distinct");
                    }
                    Ok(r)
                }
                Some(r) => bad(format!("expected {n} finite roots, got {}", r.len())),
                None => bad("roots are required for this model"),
            }
        };
        match self.model {
            ModelKind::DoubleWell => Ok(Model::MultiWell { roots: roots(4)?, e_ref: 0.0 }),
            ModelKind::TripleWell => Ok(Model::MultiWell { roots: roots(6)?, e_ref: 0.0 }),
            ModelKind::NormalForm => {
                if self.roots.is_some() || self.terms.is_some() {
                    return bad("the normal form takes no roots or terms");
                }
                Ok(Model::NormalForm)
            }
            ModelKind::CustomPolynomial => {
                if self.roots.is_some() {
                    return bad("roots are only read for the multi-well models");
                }
                match &self.terms {
                    Some(t) if !t.is_empty() && t.iter().all(|x| x.2.is_finite()) => Ok(Model::Custom { terms: t.clone() }),
                    _ => bad("custom_polynomial needs a non-empty list of [p_power, q_power, coefficient] terms"),
                }
            }
        }
    }

    pub fn energy_choice(&self) -> Result<EnergyChoice, ConfigError> {
        match (self.energy, self.level) {
            (Some(e), None) if e.is_finite() => Ok(EnergyChoice::Energy(e)),
            (None, Some(n)) => Ok(EnergyChoice::Level(n)),
            (Some(_), None) => bad("energy must be finite"),
            _ => bad("give exactly one of energy and level"),
        }
    }

    fn grid_from(&self, g: &GridConfig) -> Result<HbarGrid, ConfigError> {
        if g.points == 0 {
            return bad("hbar_grid.points must be positive");
        }
        if !(g.min > 0.0 && g.max.is_finite()) || (g.points > 1 && g.max <= g.min) {
            return bad("hbar_grid needs 0 < min < max (values of 1/hbar)");
        }
        let grid = match g.spacing {
            Spacing::Linear => HbarGrid::linear(g.min, g.max, g.points),
            Spacing::Geometric => HbarGrid::geometric(g.min, g.max, g.points),
        };
        grid.validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(grid)
    }

    pub fn grid(&self) -> Result<HbarGrid, ConfigError> {
        match &self.hbar_grid {
            Some(g) => self.grid_from(g),
            None => bad("hbar_grid is required for this command"),
        }
    }

    /// ħ for single-point reports: `hbar`, else the first grid point.
    pub fn single_hbar(&self) -> Option<f64> {
        self.hbar.or_else(|| self.grid().ok().map(|g| 1.0 / g.inv_hbar[0]))
    }
}
