//! JSON scene description and its translation into a meshed [`Problem`].

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::admittance::{Core, Scatterer};
use crate::assembly::QuadratureSettings;
use crate::error::{Error, Result};
use crate::geometry::{discretize_circle, discretize_polygon, Boundary, Point2};
use crate::media::{Medium, PlaneWave};
use crate::solver::{LayeredCylinder, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PecKeyword {
    #[serde(rename = "PEC")]
    Pec,
}

/// A dielectric medium or the keyword `"PEC"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LayerMedium {
    Material(Medium),
    Conductor(PecKeyword),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Shape {
    Circle {
        #[serde(default)]
        center: Point2,
        radius: f64,
    },
    Polygon {
        vertices: Vec<Point2>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub shape: Shape,
    pub medium: LayerMedium,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScattererSpec {
    #[serde(default)]
    pub position: Point2,
    /// Innermost first; shapes are relative to `position`.
    pub layers: Vec<LayerSpec>,
}

/// Which wavelength a contour's segment length is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WavelengthMedium {
    /// The medium inside the contour (outside, for a conductor).
    #[default]
    Inner,
    Background,
    /// The optically densest medium of the whole scatterer, for every contour.
    Densest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshSpec {
    pub segments_per_wavelength: f64,
    pub wavelength_medium: WavelengthMedium,
}

impl Default for MeshSpec {
    fn default() -> Self {
        MeshSpec { segments_per_wavelength: 10.0, wavelength_medium: WavelengthMedium::Inner }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidenceSpec {
    pub direction: Point2,
    #[serde(default = "unit_amplitude")]
    pub amplitude: f64,
}

fn unit_amplitude() -> f64 {
    1.0
}

impl Default for IncidenceSpec {
    fn default() -> Self {
        IncidenceSpec { direction: Point2::new(1.0, 0.0), amplitude: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub frequency: f64,
    #[serde(default = "vacuum")]
    pub background: Medium,
    #[serde(default)]
    pub incidence: IncidenceSpec,
    pub scatterers: Vec<ScattererSpec>,
    #[serde(default)]
    pub mesh: MeshSpec,
    #[serde(default)]
    pub quadrature: QuadratureSettings,
}

fn vacuum() -> Medium {
    Medium::VACUUM
}

pub fn parse_scene(path: &Path) -> Result<Scene> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    Scene::from_json(&text)
}

impl Scene {
    pub fn from_json(text: &str) -> Result<Scene> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scene: Scene = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::scene(if path == "." { "<root>".to_string() } else { path }, e.into_inner().to_string())
        })?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    /// Hex sha256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let compact = serde_json::to_string(self).expect("scene serializes");
        hex::encode(Sha256::digest(compact.as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frequency > 0.0) || !self.frequency.is_finite() {
            return Err(Error::scene("frequency", format!("must be positive, got {}", self.frequency)));
        }
        self.background.validate().map_err(|e| Error::scene("background", e.to_string()))?;
        self.quadrature.validate().map_err(|e| Error::scene("quadrature", e.to_string()))?;
        let spw = self.mesh.segments_per_wavelength;
        if !(spw > 0.0) || !spw.is_finite() {
            return Err(Error::scene("mesh.segments_per_wavelength", format!("must be positive, got {spw}")));
        }
        self.wave().map_err(|e| Error::scene("incidence", e.to_string()))?;
        for (s, sc) in self.scatterers.iter().enumerate() {
            if sc.layers.is_empty() {
                return Err(Error::scene(format!("scatterers[{s}].layers"), "at least one layer is required"));
            }
            for (l, layer) in sc.layers.iter().enumerate() {
                let at = format!("scatterers[{s}].layers[{l}]");
                match layer.medium {
                    LayerMedium::Conductor(_) if l > 0 => {
                        return Err(Error::scene(
                            format!("{at}.medium"),
                            format!("PEC is only allowed in the innermost layer, found in layer {l}"),
                        ))
                    }
                    LayerMedium::Conductor(_) if sc.layers.len() == 1 => {
                        return Err(Error::scene(
                            format!("{at}.medium"),
                            "a PEC core needs at least one enclosing dielectric layer",
                        ))
                    }
                    LayerMedium::Material(m) => m.validate().map_err(|e| Error::scene(format!("{at}.medium"), e.to_string()))?,
                    LayerMedium::Conductor(_) => {}
                }
                match &layer.shape {
                    Shape::Circle { radius, center } => {
                        if !(*radius > 0.0) || !radius.is_finite() || !center.is_finite() {
                            return Err(Error::scene(format!("{at}.shape"), "circle needs a finite centre and positive radius"));
                        }
                    }
                    Shape::Polygon { vertices } => {
                        if vertices.len() < 3 || vertices.iter().any(|v| !v.is_finite()) {
                            return Err(Error::scene(format!("{at}.shape"), "polygon needs at least 3 finite vertices"));
                        }
                    }
                }
            }
        }
        // meshing checks nesting, simplicity and overlap
        self.to_problem().map(|_| ())
    }

    pub fn wave(&self) -> Result<PlaneWave> {
        PlaneWave::along(self.frequency, self.incidence.direction, self.incidence.amplitude)
    }

    fn core(sc: &ScattererSpec) -> Core {
        match sc.layers[0].medium {
            LayerMedium::Conductor(_) => Core::Pec,
            LayerMedium::Material(_) => Core::Penetrable,
        }
    }

    /// Media inside each contour; a conductor core is given the medium around it.
    fn media(&self, sc: &ScattererSpec) -> Vec<Medium> {
        let mut media: Vec<Medium> = sc
            .layers
            .iter()
            .map(|l| match l.medium {
                LayerMedium::Material(m) => m,
                LayerMedium::Conductor(_) => Medium::VACUUM,
            })
            .collect();
        if Self::core(sc) == Core::Pec {
            media[0] = media[1];
        }
        media
    }

    fn segment_length(&self, media: &[Medium], i: usize) -> f64 {
        let f = self.frequency;
        let lam = match self.mesh.wavelength_medium {
            WavelengthMedium::Inner => media[i].wavelength(f),
            WavelengthMedium::Background => self.background.wavelength(f),
            WavelengthMedium::Densest => media
                .iter()
                .chain(std::iter::once(&self.background))
                .map(|m| m.wavelength(f))
                .fold(f64::INFINITY, f64::min),
        };
        lam / self.mesh.segments_per_wavelength
    }

    /// Meshes every contour and assembles the solver input.
    pub fn to_problem(&self) -> Result<Problem> {
        let mut next_id = 0;
        let mut scatterers = Vec::with_capacity(self.scatterers.len());
        for (s, sc) in self.scatterers.iter().enumerate() {
            let media = self.media(sc);
            let mut local: Vec<Boundary> = Vec::with_capacity(sc.layers.len());
            for (l, layer) in sc.layers.iter().enumerate() {
                let target = self.segment_length(&media, l);
                let b = match &layer.shape {
                    Shape::Circle { center, radius } => discretize_circle(*center, *radius, target),
                    Shape::Polygon { vertices } => discretize_polygon(vertices, target),
                }
                .map_err(|e| Error::scene(format!("scatterers[{s}].layers[{l}].shape"), e.to_string()))?;
                local.push(b.with_id(next_id));
                next_id += 1;
            }
            let scatterer = Scatterer::new(sc.position, local, media, Self::core(sc))
                .map_err(|e| Error::scene(format!("scatterers[{s}]"), e.to_string()))?;
            scatterers.push(scatterer);
        }
        let problem = Problem {
            frequency: self.frequency,
            background: self.background,
            wave: self.wave()?,
            scatterers,
            quadrature: self.quadrature,
        };
        problem.validate().map_err(|e| Error::scene("scatterers", e.to_string()))?;
        Ok(problem)
    }

    /// Concentric-circle description of a single-scatterer scene, for the
    /// series solution.
    pub fn layered_cylinder(&self) -> Result<LayeredCylinder> {
        if self.scatterers.len() != 1 {
            return Err(Error::invalid(format!(
                "series solution needs exactly one scatterer, scene has {}",
                self.scatterers.len()
            )));
        }
        let sc = &self.scatterers[0];
        let mut radii = Vec::new();
        let mut center0 = None;
        for (l, layer) in sc.layers.iter().enumerate() {
            match &layer.shape {
                Shape::Circle { center, radius } => {
                    let c0 = *center0.get_or_insert(*center);
                    if c0.distance(*center) > 1e-12 * radius {
                        return Err(Error::invalid(format!("layer {l} is not concentric with layer 0")));
                    }
                    radii.push(*radius);
                }
                Shape::Polygon { .. } => {
                    return Err(Error::invalid(format!("layer {l} is not a circle; the series solution needs circles")))
                }
            }
        }
        let cyl = LayeredCylinder {
            radii,
            media: self.media(sc),
            pec_core: Self::core(sc) == Core::Pec,
            background: self.background,
        };
        cyl.validate()?;
        Ok(cyl)
    }
}
