//! JSON input formats and deterministic number formatting.

use serde::{Deserialize, Serialize};

use crate::bundle::HolonomyRepresentation;
use crate::error::{Error, Result};
use crate::linalg;
use crate::surface::{Pairing, SurfaceSpec};

/// Shortest string that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceJson {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tiles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairings: Option<Vec<Pairing>>,
}

impl SurfaceJson {
    pub fn to_spec(&self) -> Result<SurfaceSpec> {
        let need = |v: Option<usize>, f: &str| -> Result<usize> {
            match v {
                Some(x) if x > 0 => Ok(x),
                Some(_) => Err(Error::InvalidInput(format!(
                    "surface field `{f}` must be positive"
                ))),
                None => Err(Error::InvalidInput(format!(
                    "surface kind `{}` needs field `{f}`",
                    self.kind
                ))),
            }
        };
        Ok(match self.kind.as_str() {
            "rectangle" => SurfaceSpec::Rectangle {
                a: need(self.a, "a")?,
                b: need(self.b, "b")?,
            },
            "torus" => SurfaceSpec::Torus {
                a: need(self.a, "a")?,
                b: need(self.b, "b")?,
            },
            "cylinder" => SurfaceSpec::Cylinder {
                a: need(self.a, "a")?,
                b: need(self.b, "b")?,
            },
            "lshape" => SurfaceSpec::LShape,
            "slit" => SurfaceSpec::Slit,
            "cone" => SurfaceSpec::Cone {
                k: need(self.k, "k")?,
            },
            "angle" => SurfaceSpec::Angle {
                k: need(self.k, "k")?,
            },
            "raw" => SurfaceSpec::Raw {
                tiles: need(self.tiles, "tiles")?,
                pairings: self.pairings.clone().unwrap_or_default(),
            },
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown surface kind `{other}`"
                )))
            }
        })
    }

    pub fn from_spec(spec: &SurfaceSpec) -> Self {
        let base = |kind: &str| SurfaceJson {
            kind: kind.into(),
            ..Default::default()
        };
        match spec {
            SurfaceSpec::Rectangle { a, b } => SurfaceJson {
                a: Some(*a),
                b: Some(*b),
                ..base("rectangle")
            },
            SurfaceSpec::Torus { a, b } => SurfaceJson {
                a: Some(*a),
                b: Some(*b),
                ..base("torus")
            },
            SurfaceSpec::Cylinder { a, b } => SurfaceJson {
                a: Some(*a),
                b: Some(*b),
                ..base("cylinder")
            },
            SurfaceSpec::LShape => base("lshape"),
            SurfaceSpec::Slit => base("slit"),
            SurfaceSpec::Cone { k } => SurfaceJson {
                k: Some(*k),
                ..base("cone")
            },
            SurfaceSpec::Angle { k } => SurfaceJson {
                k: Some(*k),
                ..base("angle")
            },
            SurfaceSpec::Raw { tiles, pairings } => SurfaceJson {
                tiles: Some(*tiles),
                pairings: Some(pairings.clone()),
                ..base("raw")
            },
        }
    }
}

/// `{"rank", "generators": [[re, im], ...], "seed"}`. Without explicit
/// generators, `seed` draws a random commuting representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolonomyJson {
    pub rank: usize,
    #[serde(default)]
    pub generators: Vec<[Vec<Vec<f64>>; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl HolonomyJson {
    /// Builds the representation; `count` is the number of generators the
    /// surface needs and is used when drawing a random one.
    pub fn to_representation(&self, count: usize, special: bool) -> Result<HolonomyRepresentation> {
        if self.generators.is_empty() {
            return Ok(match self.seed {
                Some(seed) => {
                    HolonomyRepresentation::random_commuting(self.rank, count, special, seed)
                }
                None => HolonomyRepresentation::trivial(self.rank, count),
            });
        }
        let mats = self
            .generators
            .iter()
            .enumerate()
            .map(|(k, [re, im])| {
                linalg::from_re_im(re, im).ok_or_else(|| {
                    Error::InvalidInput(format!("generator {k} is not a square matrix pair"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        HolonomyRepresentation::new(self.rank, mats)
    }

    pub fn from_representation(rep: &HolonomyRepresentation) -> Self {
        Self {
            rank: rep.rank(),
            generators: rep.generators().iter().map(linalg::to_re_im).collect(),
            seed: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -1.0546883, 1e-300, 6.02e23, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn surface_json_round_trip() {
        for spec in [
            SurfaceSpec::Torus { a: 2, b: 3 },
            SurfaceSpec::LShape,
            SurfaceSpec::Cone { k: 3 },
        ] {
            let j = serde_json::to_string(&SurfaceJson::from_spec(&spec)).unwrap();
            let back: SurfaceJson = serde_json::from_str(&j).unwrap();
            assert_eq!(back.to_spec().unwrap(), spec);
        }
        let raw: SurfaceJson = serde_json::from_str(
            r#"{"kind":"raw","tiles":2,"pairings":[{"a":{"tile":0,"side":"E"},"b":{"tile":1,"side":"W"},"kind":"translation"}]}"#,
        )
        .unwrap();
        let s = crate::surface::build_surface(&raw.to_spec().unwrap()).unwrap();
        assert_eq!(s.geometry_summary().perimeter, 6);
    }

    #[test]
    fn surface_json_errors() {
        let missing: SurfaceJson = serde_json::from_str(r#"{"kind":"torus","a":1}"#).unwrap();
        assert!(missing.to_spec().is_err());
        let unknown: SurfaceJson = serde_json::from_str(r#"{"kind":"sphere"}"#).unwrap();
        assert!(unknown.to_spec().is_err());
        assert!(serde_json::from_str::<SurfaceJson>(r#"{"kind":"torus","c":1}"#).is_err());
    }

    #[test]
    fn holonomy_json() {
        let j: HolonomyJson =
            serde_json::from_str(r#"{"rank":1,"generators":[[[[-1.0]],[[0.0]]]]}"#).unwrap();
        let rep = j.to_representation(1, false).unwrap();
        assert_eq!(rep.generators()[0][(0, 0)].re, -1.0);
        let back = HolonomyJson::from_representation(&rep);
        assert_eq!(back.to_representation(1, false).unwrap(), rep);
        let seeded = HolonomyJson {
            rank: 2,
            generators: vec![],
            seed: Some(4),
        };
        let r = seeded.to_representation(2, true).unwrap();
        assert_eq!(r.generators().len(), 2);
        assert!(r.is_special(1e-12));
        let bad: HolonomyJson =
            serde_json::from_str(r#"{"rank":1,"generators":[[[[2.0]],[[0.0]]]]}"#).unwrap();
        assert!(bad.to_representation(1, false).is_err());
    }
}
