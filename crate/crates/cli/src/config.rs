//! The JSON experiment description.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use torsionlab::asymptotics::Setup;
use torsionlab::bundle::CutSpec;
use torsionlab::continuum::ContinuumKind;
use torsionlab::io::{HolonomyJson, SurfaceJson};
use torsionlab::mesh_spectra::ProfileJson;
use torsionlab::surface::{build_surface, SurfaceSpec};
use torsionlab::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Spectrum,
    Logdet,
    RenormSeries,
    Ratio,
    CrsfVerify,
    Szego,
    HeatTrace,
    Zeta0,
    Torsion,
    WeylCheck,
    EmbeddingCheck,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Spectrum => "spectrum",
            Kind::Logdet => "logdet",
            Kind::RenormSeries => "renorm-series",
            Kind::Ratio => "ratio",
            Kind::CrsfVerify => "crsf-verify",
            Kind::Szego => "szego",
            Kind::HeatTrace => "heat-trace",
            Kind::Zeta0 => "zeta0",
            Kind::Torsion => "torsion",
            Kind::WeylCheck => "weyl-check",
            Kind::EmbeddingCheck => "embedding-check",
        }
    }

    fn needs_n_list(self) -> bool {
        !matches!(self, Kind::HeatTrace | Kind::Zeta0 | Kind::Torsion)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative error allowed in the CRSF identity.
    pub crsf: Option<f64>,
    /// Allowed `|ratio - 1|` in the embedding identities.
    pub embedding: Option<f64>,
    /// Allowed `|slope - 1|` in the Weyl slope band.
    pub weyl_band: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default)]
    pub surface: Option<SurfaceJson>,
    #[serde(default)]
    pub bundle: Option<HolonomyJson>,
    /// Second surface and bundle of a ratio experiment.
    #[serde(default)]
    pub surface_b: Option<SurfaceJson>,
    #[serde(default)]
    pub bundle_b: Option<HolonomyJson>,
    /// Draw random rank-2 bundles in SU(2); defaults to true in rank 2.
    #[serde(default)]
    pub special: Option<bool>,
    #[serde(default)]
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub t_list: Vec<f64>,
    #[serde(default)]
    pub profile: Option<ProfileJson>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub weyl_range: Option<[usize; 2]>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Field checks that do not need any computation.
    pub fn validate(&self) -> Result<()> {
        if self.kind.needs_n_list() {
            if self.n_list.is_empty() {
                return Err(invalid(format!(
                    "`{}` needs a non-empty n_list",
                    self.kind.name()
                )));
            }
            if self.n_list[0] == 0 || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid("n_list must be positive and strictly increasing"));
            }
        }
        let need_surface = !matches!(self.kind, Kind::Szego);
        if need_surface && self.surface.is_none() {
            return Err(invalid(format!("`{}` needs a surface", self.kind.name())));
        }
        match self.kind {
            Kind::Szego if self.profile.is_none() => {
                return Err(invalid("`szego` needs a profile"))
            }
            Kind::Ratio if self.bundle_b.is_none() && self.surface_b.is_none() => {
                return Err(invalid("`ratio` needs surface_b or bundle_b"))
            }
            Kind::HeatTrace
                if self.t_list.is_empty()
                    || self.t_list.iter().any(|t| !(t.is_finite() && *t > 0.0)) =>
            {
                return Err(invalid(
                    "`heat-trace` needs a non-empty t_list of positive times",
                ));
            }
            _ => {}
        }
        if let Some([lo, hi]) = self.weyl_range {
            if lo == 0 || lo > hi {
                return Err(invalid("weyl_range must satisfy 1 <= lo <= hi"));
            }
        }
        if self.samples == Some(0) {
            return Err(invalid("samples must be positive"));
        }
        let tols = [
            self.tolerances.crsf,
            self.tolerances.embedding,
            self.tolerances.weyl_band,
        ];
        if tols.iter().flatten().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(invalid("tolerances must be positive"));
        }
        Ok(())
    }

    pub fn surface_spec(&self) -> Result<SurfaceSpec> {
        self.surface
            .as_ref()
            .ok_or_else(|| invalid("missing surface"))?
            .to_spec()
    }

    /// Bundle over the main surface; `seed` replaces the bundle's own seed
    /// for random representations.
    pub fn setup(&self, seed: Option<u64>) -> Result<Setup> {
        self.build(self.surface.as_ref(), self.bundle.as_ref(), seed)
    }

    /// The second bundle of a ratio experiment. Missing parts are taken from
    /// the main one.
    pub fn setup_b(&self, seed: Option<u64>) -> Result<Setup> {
        let surface = self.surface_b.as_ref().or(self.surface.as_ref());
        let bundle = self.bundle_b.as_ref().or(self.bundle.as_ref());
        self.build(surface, bundle, seed.map(|s| s ^ 0x9e37_79b9_7f4a_7c15))
    }

    fn build(
        &self,
        surface: Option<&SurfaceJson>,
        bundle: Option<&HolonomyJson>,
        seed: Option<u64>,
    ) -> Result<Setup> {
        let spec = surface
            .ok_or_else(|| invalid("missing surface"))?
            .to_spec()?;
        let Some(bundle) = bundle else {
            return Setup::trivial(spec, 1);
        };
        let count = CutSpec::standard(&build_surface(&spec)?).cuts.len();
        let mut json = bundle.clone();
        if json.generators.is_empty() && json.seed.is_some() {
            json.seed = seed.or(json.seed);
        }
        let special = self.special.unwrap_or(bundle.rank == 2);
        Setup::new(spec, json.to_representation(count, special)?)
    }
}

/// `(kind, a, b)` for the surfaces with a closed-form continuum spectrum.
pub fn continuum_kind(spec: &SurfaceSpec) -> Option<(ContinuumKind, usize, usize)> {
    match *spec {
        SurfaceSpec::Rectangle { a, b } => Some((ContinuumKind::Rectangle, a, b)),
        SurfaceSpec::Torus { a, b } => Some((ContinuumKind::Torus, a, b)),
        SurfaceSpec::Cylinder { a, b } => Some((ContinuumKind::Cylinder, a, b)),
        _ => None,
    }
}
