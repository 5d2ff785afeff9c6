//! JSON model specifications.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::model1d::{build_hermite_profile, Profile1D};
use crate::model3d::{build_profile3d, Channel, Profile3D};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub points: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<UniformGrid> {
        UniformGrid::new(self.half_width, self.points)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        let g = UniformGrid::default();
        Self { half_width: g.half_width(), points: g.len() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spec1D {
    pub family: String,
    pub lambda0: f64,
    pub n: u32,
    pub center: f64,
    #[serde(default)]
    pub grid: GridSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spec3D {
    pub lambda0: f64,
    pub active_lm: Vec<(u32, i32)>,
    pub lmax: u32,
    #[serde(default)]
    pub grid: GridSpec,
    /// Vanishing order at `λ₀`; defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    OneD(Spec1D),
    ThreeD(Spec3D),
}

#[derive(Debug, Clone)]
pub enum Model {
    OneD(Profile1D),
    ThreeD(Profile3D),
}

impl Spec1D {
    /// `λ₀ = 1`, `n = 1`, `center = 0` on the default grid.
    pub fn p1() -> Self {
        Self { family: "hermite".into(), lambda0: 1.0, n: 1, center: 0.0, grid: GridSpec::default() }
    }

    pub fn build(&self) -> Result<Profile1D> {
        if self.family != "hermite" {
            return Err(Error::Config(format!("unknown profile family {:?}", self.family)));
        }
        build_hermite_profile(self.lambda0, self.n, self.center, self.grid.build()?)
    }
}

impl Spec3D {
    /// Channels `(0,0)` and `(1,0)` vanishing simply at `λ₀ = 2`.
    pub fn default_two_channel() -> Self {
        Self {
            lambda0: 2.0,
            active_lm: vec![(0, 0), (1, 0)],
            lmax: 4,
            grid: GridSpec::default(),
            order: None,
            weights: None,
            scales: None,
        }
    }

    pub fn channels(&self) -> Result<Vec<Channel>> {
        let n = self.active_lm.len();
        for (what, v) in [("weights", &self.weights), ("scales", &self.scales)] {
            if let Some(v) = v {
                if v.len() != n {
                    return Err(Error::Config(format!("{what} has {} entries for {n} channels", v.len())));
                }
            }
        }
        Ok(self
            .active_lm
            .iter()
            .enumerate()
            .map(|(k, &(l, m))| {
                let mut c = Channel::default_for(l, m, k);
                if let Some(w) = &self.weights {
                    c.weight = w[k];
                }
                if let Some(s) = &self.scales {
                    c.scale = s[k];
                }
                c
            })
            .collect())
    }

    pub fn build(&self) -> Result<Profile3D> {
        build_profile3d(self.lambda0, self.lmax, self.order.unwrap_or(1), &self.channels()?, self.grid.build()?)
    }
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("model spec: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read model spec {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn grid_mut(&mut self) -> &mut GridSpec {
        match self {
            ModelSpec::OneD(s) => &mut s.grid,
            ModelSpec::ThreeD(s) => &mut s.grid,
        }
    }

    pub fn build(&self) -> Result<Model> {
        Ok(match self {
            ModelSpec::OneD(s) => Model::OneD(s.build()?),
            ModelSpec::ThreeD(s) => Model::ThreeD(s.build()?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RankOneModel;

    #[test]
    fn parses_both_shapes() {
        let one =
            ModelSpec::from_json(r#"{"family":"hermite","lambda0":1,"n":1,"center":0,"grid":{"L":40,"N":32768}}"#)
                .unwrap();
        assert_eq!(one, ModelSpec::OneD(Spec1D::p1()));
        let three =
            ModelSpec::from_json(r#"{"lambda0":2,"active_lm":[[0,0],[1,0]],"lmax":4,"grid":{"L":40,"N":32768}}"#)
                .unwrap();
        assert_eq!(three, ModelSpec::ThreeD(Spec3D::default_two_channel()));
        let text = serde_json::to_string(&three).unwrap();
        assert_eq!(ModelSpec::from_json(&text).unwrap(), three);
    }

    #[test]
    fn rejects_malformed_specs() {
        assert!(matches!(ModelSpec::from_json("{"), Err(Error::Parse(_))));
        assert!(ModelSpec::from_json(r#"{"family":"hermite","lambda0":1}"#).is_err());
        assert!(ModelSpec::from_json(r#"{"family":"hermite","lambda0":1,"n":1,"center":0,"typo":1}"#).is_err());
        let bad = ModelSpec::from_json(r#"{"family":"laguerre","lambda0":1,"n":1,"center":0}"#).unwrap();
        assert!(matches!(bad.build(), Err(Error::Config(_))));
        let bad_grid =
            ModelSpec::from_json(r#"{"family":"hermite","lambda0":1,"n":1,"center":0,"grid":{"L":40,"N":1000}}"#)
                .unwrap();
        assert!(bad_grid.build().is_err());
        let mut s = Spec3D::default_two_channel();
        s.weights = Some(vec![1.0]);
        assert!(s.build().is_err());
        assert!(ModelSpec::from_path(Path::new("/nonexistent/spec.json")).is_err());
    }

    #[test]
    fn builds_p1() {
        match ModelSpec::OneD(Spec1D::p1()).build().unwrap() {
            Model::OneD(p) => assert!((p.alpha0() - 1.5).abs() < 1e-9),
            Model::ThreeD(_) => panic!("wrong dimension"),
        }
    }
}
