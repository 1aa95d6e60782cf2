//! Experiment configuration loaded from TOML.

use std::path::{Path, PathBuf};

use qglab_core::coset::Profile;
use qglab_core::perron::GapMethod;
use qglab_core::scattering::VertexKind;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Complete graph `K_V`.
    Complete,
    /// Random `degree`-regular graph on `V` vertices.
    Regular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphConfig {
    pub family: Family,
    pub sizes: Vec<usize>,
    pub degree: usize,
    pub vertex: VertexKind,
    /// Bond lengths are drawn uniformly from `[lengths[0], lengths[1])`.
    pub lengths: [f64; 2],
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            family: Family::Complete,
            sizes: vec![8, 12, 16, 24, 32, 40],
            degree: 3,
            vertex: VertexKind::Dft,
            lengths: [1.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Unitarity of `Σ`, `𝓑`, `U` and bistochasticity of `𝓕`.
    pub structural: f64,
    /// Perron pair residual.
    pub perron: f64,
    /// Trace identities of `W` and `W²` against the spectrum.
    pub resolvent: f64,
    /// Smallest gap accepted by the resolvent.
    pub gap_floor: f64,
    /// Smallest gap accepted anywhere in the sweep.
    pub gap_threshold: f64,
    /// Contraction evaluator against direct and brute-force sums.
    pub evaluator: f64,
    /// Coset identities, per exterior-algebra coefficient.
    pub identity: f64,
    /// Mean absolute deviation of the form factor from the reference.
    pub universality: f64,
    /// Allowed distance of the source-term slope from `−1`.
    pub slope: f64,
    /// Allowed distance of the first higher-order slope from `−1`.
    pub term_slope: f64,
    /// Standard errors allowed for the first form-factor point.
    pub first_point_sigmas: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structural: 1e-12,
            perron: 1e-10,
            resolvent: 1e-8,
            gap_floor: 1e-6,
            gap_threshold: 0.85,
            evaluator: 1e-10,
            identity: 1e-9,
            universality: 0.1,
            slope: 0.15,
            term_slope: 0.2,
            first_point_sigmas: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GapConfig {
    pub method: GapMethod,
    /// Overrides `graph.sizes` when present.
    pub sizes: Option<Vec<usize>>,
}

impl Default for GapConfig {
    fn default() -> Self {
        Self { method: GapMethod::DeflatedPower, sizes: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WStatsConfig {
    pub sizes: Vec<usize>,
    /// Chain order sampled against the chain estimate.
    pub chain_order: usize,
    pub chain_samples: usize,
}

impl Default for WStatsConfig {
    fn default() -> Self {
        Self { sizes: vec![8, 16], chain_order: 3, chain_samples: 64 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceConfig {
    /// Overrides `graph.sizes` when present.
    pub sizes: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContractionConfig {
    /// Complete graph used for the direct-formula comparison.
    pub vertices: usize,
    /// Complete graph used for the brute-force comparison.
    pub brute_force_vertices: usize,
}

impl Default for ContractionConfig {
    fn default() -> Self {
        Self { vertices: 8, brute_force_vertices: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CosetConfig {
    pub generators: Vec<usize>,
    pub points: usize,
    pub profile: Profile,
}

impl Default for CosetConfig {
    fn default() -> Self {
        Self { generators: vec![2, 4, 6], points: 20, profile: Profile::Generic }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FormFactorConfig {
    pub vertices: usize,
    pub samples: usize,
    /// Largest `n`; `0` means `4B`.
    pub n_max: usize,
    /// Averaging window `[lo, hi]`; `hi = 0` means `n_max`.
    pub window: [usize; 2],
}

impl Default for FormFactorConfig {
    fn default() -> Self {
        Self { vertices: 16, samples: 200, n_max: 0, window: [1, 0] }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub seed: Option<u64>,
    /// Worker threads; `0` lets rayon decide. Not echoed in reports.
    #[serde(skip_serializing)]
    pub threads: usize,
    #[serde(skip_serializing)]
    pub out_dir: Option<PathBuf>,
    pub graph: GraphConfig,
    pub tolerances: Tolerances,
    pub gap: GapConfig,
    pub w_stats: WStatsConfig,
    pub source: SourceConfig,
    pub contraction: ContractionConfig,
    pub coset: CosetConfig,
    pub form_factor: FormFactorConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Seed after overrides; errors when none was given.
    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::Config("no seed: set `seed` or pass --seed".into()))
    }

    pub fn gap_sizes(&self) -> &[usize] {
        self.gap.sizes.as_deref().unwrap_or(&self.graph.sizes)
    }

    pub fn source_sizes(&self) -> &[usize] {
        self.source.sizes.as_deref().unwrap_or(&self.graph.sizes)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        self.seed()?;
        let all_sizes = self
            .graph
            .sizes
            .iter()
            .chain(self.gap_sizes())
            .chain(self.source_sizes())
            .chain(&self.w_stats.sizes)
            .chain([&self.contraction.vertices, &self.contraction.brute_force_vertices, &self.form_factor.vertices]);
        for &v in all_sizes {
            if v < 2 {
                return bad(format!("graph size {v} is below 2"));
            }
        }
        if self.graph.family == Family::Regular {
            if self.graph.degree < 1 {
                return bad("regular family needs degree >= 1".into());
            }
            for &v in self.graph.sizes.iter().chain(self.gap_sizes()).chain(self.source_sizes()) {
                if v <= self.graph.degree || (v * self.graph.degree) % 2 == 1 {
                    return bad(format!("no {}-regular graph on {v} vertices", self.graph.degree));
                }
            }
        }
        let [lo, hi] = self.graph.lengths;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return bad(format!("bond length range [{lo}, {hi}) must satisfy 0 < lo < hi"));
        }
        let t = &self.tolerances;
        let named = [
            ("structural", t.structural),
            ("perron", t.perron),
            ("resolvent", t.resolvent),
            ("gap_floor", t.gap_floor),
            ("gap_threshold", t.gap_threshold),
            ("evaluator", t.evaluator),
            ("identity", t.identity),
            ("universality", t.universality),
            ("slope", t.slope),
            ("term_slope", t.term_slope),
            ("first_point_sigmas", t.first_point_sigmas),
        ];
        for (name, v) in named {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("tolerance `{name}` must be positive, got {v}"));
            }
        }
        if self.w_stats.chain_order < 2 || self.w_stats.chain_samples == 0 {
            return bad("w_stats needs chain_order >= 2 and chain_samples >= 1".into());
        }
        if self.coset.points == 0 || self.coset.generators.is_empty() {
            return bad("coset needs at least one point and one generator count".into());
        }
        if self.form_factor.samples == 0 {
            return bad("form_factor.samples must be >= 1".into());
        }
        let [wlo, whi] = self.form_factor.window;
        if wlo == 0 || (whi != 0 && whi < wlo) {
            return bad(format!("form_factor.window [{wlo}, {whi}] is empty"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_file_parses_and_validates() {
        let text = include_str!("../config/reference.toml");
        let cfg = Config::from_toml(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.graph.sizes, vec![8, 12, 16, 24, 32, 40]);
        assert_eq!(cfg.tolerances, Tolerances::default());
        assert_eq!(cfg.coset, CosetConfig::default());
    }

    #[test]
    fn empty_config_needs_seed() {
        let cfg = Config::from_toml("").unwrap();
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        let cfg = Config::from_toml("seed = 3").unwrap();
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(Config::from_toml("seed = 1\nbogus = 2").is_err());
        assert!(Config::from_toml("seed = 1\n[graph]\nsizes = [8]\ncolour = 1").is_err());
        let small = Config::from_toml("seed = 1\n[graph]\nsizes = [1, 8]").unwrap();
        assert!(small.validate().is_err());
        let neg = Config::from_toml("seed = 1\n[tolerances]\nslope = -0.1").unwrap();
        assert!(neg.validate().is_err());
        let odd = Config::from_toml("seed = 1\n[graph]\nfamily = \"regular\"\ndegree = 3\nsizes = [7]").unwrap();
        assert!(odd.validate().is_err());
    }
}
