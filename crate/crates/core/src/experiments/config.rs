use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ensembles::{log_moment_finite, CoefficientLaw};
use crate::error::{Error, Result};
use crate::extremal::RegionSpec;
use crate::stahltotik::{PlanarRegion, RegularMeasureSpec};
use crate::weights::{make_weight, WeightHandle, WeightKind, WeightSpec};

/// Weights that can be named in a config file: `"weyl"`, `"fubini_study"` or
/// `{"power": {"p": [..]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightConfig {
    Weyl,
    FubiniStudy,
    Power { p: Vec<f64> },
}

impl WeightConfig {
    pub fn build(&self, dimension: usize) -> Result<WeightHandle> {
        let kind = match self {
            WeightConfig::Weyl => WeightKind::Weyl,
            WeightConfig::FubiniStudy => WeightKind::FubiniStudy,
            WeightConfig::Power { p } => WeightKind::Power(p.clone()),
        };
        make_weight(WeightSpec::new(kind, dimension))
    }
}

/// Which family of random polynomials a run draws from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleConfig {
    /// Orthonormal monomials for `e^{−2nQ}`.
    Weighted { weight: WeightConfig, dimension: usize },
    /// `binomial(n; J)^{1/2} z^J`.
    Elliptic { dimension: usize },
    /// Orthonormal polynomials of a regular measure (one variable).
    Regular { measure: RegularMeasureSpec },
}

impl EnsembleConfig {
    pub fn dimension(&self) -> usize {
        match self {
            EnsembleConfig::Weighted { dimension, .. } | EnsembleConfig::Elliptic { dimension } => *dimension,
            EnsembleConfig::Regular { .. } => 1,
        }
    }
}

/// A region as written in a config: an annulus product, or a planar set for regular measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegionConfig {
    Product(RegionSpec),
    Planar(PlanarRegion),
}

impl RegionConfig {
    pub fn id(&self) -> String {
        match self {
            RegionConfig::Product(r) => r.id(),
            RegionConfig::Planar(p) => p.id(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RegionConfig::Product(r) => r.validate(),
            RegionConfig::Planar(p) => p.validate(),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            RegionConfig::Product(r) => r.dimension(),
            RegionConfig::Planar(_) => 1,
        }
    }

    pub fn as_product(&self) -> Option<&RegionSpec> {
        match self {
            RegionConfig::Product(r) => Some(r),
            RegionConfig::Planar(PlanarRegion::Region(r)) => Some(r),
            RegionConfig::Planar(_) => None,
        }
    }

    pub fn as_planar(&self) -> PlanarRegion {
        match self {
            RegionConfig::Product(r) => PlanarRegion::Region(r.clone()),
            RegionConfig::Planar(p) => p.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Equidistribution,
    ProbabilityConvergence,
    PointwiseTail,
    Necessity,
    Bergman,
    OnpCheck,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Equidistribution => "equidistribution",
            ExperimentKind::ProbabilityConvergence => "probability_convergence",
            ExperimentKind::PointwiseTail => "pointwise_tail",
            ExperimentKind::Necessity => "necessity",
            ExperimentKind::Bergman => "bergman",
            ExperimentKind::OnpCheck => "onp_check",
        }
    }
}

/// Resource limits and optional outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Caps {
    /// Largest degree allowed when `m ≥ 3`.
    pub max_degree_m3: usize,
    /// Base points per axis for slice volumes.
    pub base_samples: usize,
    /// Polar cells per direction for L¹ field records; off when absent.
    pub l1_resolution: Option<usize>,
    /// Let the necessity scan run with a finite-moment law.
    pub allow_finite_moment: bool,
    /// Law for the necessity control run.
    pub control: Option<CoefficientLaw>,
    /// Write per-trial root files.
    pub root_dump: bool,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_degree_m3: 30,
            base_samples: 64,
            l1_resolution: None,
            allow_finite_moment: false,
            control: Some(CoefficientLaw::GaussianComplex),
            root_dump: false,
        }
    }
}

fn default_epsilons() -> Vec<f64> {
    vec![0.05, 0.1, 0.2]
}

/// One experiment, self-describing enough to rerun from the file alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub ensemble: EnsembleConfig,
    pub coefficients: CoefficientLaw,
    pub degrees: Vec<usize>,
    pub trials: usize,
    #[serde(default)]
    pub regions: Vec<RegionConfig>,
    /// Points in `ℂ^m`, each coordinate as `[re, im]`.
    #[serde(default)]
    pub probes: Vec<Vec<[f64; 2]>>,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    pub experiment_kind: ExperimentKind,
    pub seed: u64,
    #[serde(default)]
    pub caps: Caps,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    pub fn dimension(&self) -> usize {
        self.ensemble.dimension()
    }

    pub fn probe_points(&self) -> Vec<Vec<Complex64>> {
        self.probes
            .iter()
            .map(|p| p.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
            .collect()
    }

    /// Checks everything that can be checked before any computation.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let m = self.dimension();
        if m == 0 {
            return bad("ensemble dimension must be at least 1".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.degrees.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("degrees must be strictly increasing, got {:?}", self.degrees));
        }
        if self.degrees.first() == Some(&0) {
            return bad("degrees must be positive".into());
        }
        if m >= 3 {
            if let Some(&top) = self.degrees.last() {
                if top > self.caps.max_degree_m3 {
                    return bad(format!(
                        "degree {top} exceeds the cap {} for m = {m}; raise caps.max_degree_m3",
                        self.caps.max_degree_m3
                    ));
                }
            }
        }
        self.coefficients.validate().map_err(|e| Error::Config(e.to_string()))?;
        if let Some(c) = &self.caps.control {
            c.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        for eps in &self.epsilons {
            if !(*eps > 0.0 && eps.is_finite()) {
                return bad(format!("epsilon {eps} must be positive"));
            }
        }
        if let EnsembleConfig::Regular { measure } = &self.ensemble {
            measure.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if let EnsembleConfig::Weighted { weight, dimension } = &self.ensemble {
            weight.build(*dimension).map_err(|e| Error::Config(e.to_string()))?;
        }
        for r in &self.regions {
            r.validate().map_err(|e| Error::Config(format!("region {}: {e}", r.id())))?;
            if r.dimension() != m {
                return bad(format!("region {} has dimension {}, ensemble {m}", r.id(), r.dimension()));
            }
            let regular = matches!(self.ensemble, EnsembleConfig::Regular { .. });
            if !regular && r.as_product().is_none() {
                return bad(format!("region {} needs an annulus product for this ensemble", r.id()));
            }
        }
        for p in &self.probes {
            if p.len() != m {
                return bad(format!("probe {p:?} has {} coordinates, expected {m}", p.len()));
            }
        }
        match self.experiment_kind {
            ExperimentKind::Equidistribution | ExperimentKind::ProbabilityConvergence => {
                if self.regions.is_empty() {
                    return bad("this experiment needs at least one region".into());
                }
            }
            ExperimentKind::PointwiseTail => {
                if self.probes.is_empty() {
                    return bad("pointwise_tail needs probes".into());
                }
                if self.probes.iter().flatten().any(|[re, im]| *re == 0.0 && *im == 0.0) {
                    return bad("probes must avoid the coordinate axes".into());
                }
            }
            ExperimentKind::Necessity => {
                if m != 1 {
                    return bad("necessity scans are one-variable".into());
                }
                if self.regions.is_empty() {
                    return bad("necessity needs at least one region".into());
                }
                for r in &self.regions {
                    if !r.as_product().is_some_and(RegionSpec::avoids_axes) {
                        return bad(format!("region {} must have a positive inner radius", r.id()));
                    }
                }
                let finite = log_moment_finite(&self.coefficients, m as u32).map_err(|e| Error::Config(e.to_string()))?;
                if finite && !self.caps.allow_finite_moment {
                    return bad(format!(
                        "{} has a finite log-moment of order {m}; set caps.allow_finite_moment to run anyway",
                        self.coefficients.name()
                    ));
                }
                if matches!(self.ensemble, EnsembleConfig::Regular { .. }) {
                    return bad("necessity needs a monomial ensemble".into());
                }
            }
            ExperimentKind::Bergman => {
                if matches!(self.ensemble, EnsembleConfig::Regular { .. }) {
                    return bad("bergman needs a weighted or elliptic ensemble".into());
                }
                if self.regions.is_empty() {
                    return bad("bergman needs a region to place its grid".into());
                }
            }
            ExperimentKind::OnpCheck => {
                if !matches!(self.ensemble, EnsembleConfig::Regular { .. }) {
                    return bad("onp_check needs a regular-measure ensemble".into());
                }
                if self.probes.is_empty() {
                    return bad("onp_check needs probes off the support".into());
                }
            }
        }
        Ok(())
    }
}
