//! Run configuration: TOML schema, validation, canonicalization, and the
//! run manifest.
//!
//! A configuration fully determines a run.  The canonical form (defaults
//! filled in, fields in schema order) is what gets hashed, so two configs
//! that mean the same run share a hash even if the files differ textually.

use crate::cq::{radau_tableau, CQGrid, RKTableau};
use crate::error::{Error, Result};
use crate::materials::{MaterialPair, MaterialSymbol, Side};
use crate::mesh::{icosphere, load_mesh, two_cubes, MeshFormat, Point, SurfaceMesh};
use crate::ops::QuadConfig;
use crate::scattering::IncidentWave;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

/// Obstacle geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Geometry {
    Sphere {
        level: usize,
        #[serde(default = "default_radius")]
        radius: f64,
    },
    TwoCubes {
        gap: f64,
        divisions: usize,
    },
    MeshFile {
        path: String,
        format: String,
    },
}

fn default_radius() -> f64 {
    1.0
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry::Sphere { level: 1, radius: 1.0 }
    }
}

/// Material laws of one side (the side tag is implied by the section name).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    pub epsilon: MaterialSymbol,
    pub mu: MaterialSymbol,
}

impl MaterialSection {
    fn pair(&self, side: Side) -> MaterialPair {
        MaterialPair { epsilon: self.epsilon.clone(), mu: self.mu.clone(), side }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialsSection {
    #[serde(default = "default_interior")]
    pub interior: MaterialSection,
    #[serde(default = "default_exterior")]
    pub exterior: MaterialSection,
}

fn default_interior() -> MaterialSection {
    let p = MaterialPair::fractional_interior();
    MaterialSection { epsilon: p.epsilon, mu: p.mu }
}

fn default_exterior() -> MaterialSection {
    let p = MaterialPair::vacuum(Side::Exterior);
    MaterialSection { epsilon: p.epsilon, mu: p.mu }
}

impl Default for MaterialsSection {
    fn default() -> Self {
        Self { interior: default_interior(), exterior: default_exterior() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RkSection {
    /// Runge-Kutta stage count (1, 2, or 3).
    #[serde(default = "default_stages")]
    pub stages: usize,
}

fn default_stages() -> usize {
    2
}

impl Default for RkSection {
    fn default() -> Self {
        Self { stages: default_stages() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default = "default_n_steps")]
    pub n_steps: usize,
}

fn default_t_final() -> f64 {
    8.0
}

fn default_n_steps() -> usize {
    64
}

impl Default for TimeSection {
    fn default() -> Self {
        Self { t_final: default_t_final(), n_steps: default_n_steps() }
    }
}

/// Optional overrides of the frequency contour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ContourSection {
    /// Contour radius override; defaults to the accuracy-balanced choice.
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidentSection {
    #[serde(default = "default_polarization")]
    pub polarization: [f64; 3],
    #[serde(default = "default_direction")]
    pub direction: [f64; 3],
    /// Envelope sharpness `c`.
    #[serde(default = "default_sharpness")]
    pub sharpness: f64,
    /// Envelope peak time `t0`.
    #[serde(default = "default_delay")]
    pub delay: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

fn default_polarization() -> [f64; 3] {
    let r = 1.0 / 2.0f64.sqrt();
    [-r, 0.0, -r]
}

fn default_direction() -> [f64; 3] {
    let r = 1.0 / 2.0f64.sqrt();
    [-r, 0.0, r]
}

fn default_sharpness() -> f64 {
    10.0
}

fn default_delay() -> f64 {
    4.0
}

fn default_amplitude() -> f64 {
    1.0
}

impl Default for IncidentSection {
    fn default() -> Self {
        Self {
            polarization: default_polarization(),
            direction: default_direction(),
            sharpness: default_sharpness(),
            delay: default_delay(),
            amplitude: default_amplitude(),
        }
    }
}

/// Field evaluation targets: explicit points or a regular plane grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetsSection {
    Points {
        points: Vec<[f64; 3]>,
        /// One of "interior" / "exterior" per point.
        sides: Vec<Side>,
    },
    Plane {
        /// Coordinate axis normal to the plane: "x", "y", or "z".
        #[serde(default = "default_plane_axis")]
        axis: String,
        #[serde(default = "default_plane_offset")]
        offset: f64,
        /// Grid covers `[-half_extent, half_extent]^2` in the plane.
        #[serde(default = "default_half_extent")]
        half_extent: f64,
        /// Points per direction.
        #[serde(default = "default_resolution")]
        resolution: usize,
    },
}

fn default_plane_axis() -> String {
    "y".into()
}

fn default_plane_offset() -> f64 {
    0.5
}

fn default_half_extent() -> f64 {
    3.0
}

fn default_resolution() -> usize {
    21
}

impl Default for TargetsSection {
    fn default() -> Self {
        TargetsSection::Points {
            points: vec![[0.0, 2.0, 0.0]],
            sides: vec![Side::Exterior],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_output_dir")]
    pub dir: String,
    /// Write the field time series CSV.
    #[serde(default = "default_true")]
    pub fields: bool,
    /// Write the density coefficient dump (binary) with its CSV index.
    #[serde(default)]
    pub densities: bool,
}

fn default_output_dir() -> String {
    "out".into()
}

fn default_true() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_output_dir(), fields: true, densities: false }
    }
}

/// A complete run description.  Defaults reproduce the bundled sphere
/// benchmark (unit sphere, fractional interior, Gaussian pulse with c = 10
/// peaking at t0 = 4, window T = 8).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: Geometry,
    pub materials: MaterialsSection,
    pub rk: RkSection,
    pub time: TimeSection,
    pub contour: ContourSection,
    pub incident: IncidentSection,
    pub targets: TargetsSection,
    pub output: OutputSection,
    /// Seed for randomized diagnostics; solver output does not depend on it.
    pub seed: u64,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml_str(&text)
    }

    /// The two-obstacle demonstration setup: two unit cubes separated by a
    /// gap of 0.5 and a sharper pulse (c = 100), fields on the y = 0.5 plane.
    pub fn two_cubes_demo() -> Self {
        Self {
            geometry: Geometry::TwoCubes { gap: 0.5, divisions: 4 },
            incident: IncidentSection { sharpness: 100.0, ..Default::default() },
            targets: TargetsSection::Plane {
                axis: default_plane_axis(),
                offset: default_plane_offset(),
                half_extent: default_half_extent(),
                resolution: default_resolution(),
            },
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.geometry {
            Geometry::Sphere { level, radius } => {
                if *level > 7 {
                    return Err(Error::Config(format!(
                        "geometry.level {level} exceeds the supported range 0..=7"
                    )));
                }
                if !(*radius > 0.0) {
                    return Err(Error::Config("geometry.radius must be positive".into()));
                }
            }
            Geometry::TwoCubes { gap, divisions } => {
                if !(*gap > 0.0) {
                    return Err(Error::Config("geometry.gap must be positive".into()));
                }
                if *divisions == 0 {
                    return Err(Error::Config(
                        "geometry.divisions must be at least 1".into(),
                    ));
                }
            }
            Geometry::MeshFile { format, .. } => {
                parse_mesh_format(format)?;
            }
        }
        self.materials.interior.epsilon.validate()?;
        self.materials.interior.mu.validate()?;
        self.materials.exterior.epsilon.validate()?;
        self.materials.exterior.mu.validate()?;
        if !(1..=3).contains(&self.rk.stages) {
            return Err(Error::Config(format!(
                "rk.stages must be 1, 2, or 3, got {}",
                self.rk.stages
            )));
        }
        if !(self.time.t_final > 0.0) || self.time.n_steps == 0 {
            return Err(Error::Config(
                "time.t_final must be positive and time.n_steps at least 1".into(),
            ));
        }
        if let Some(rho) = self.contour.rho {
            if !(rho > 0.0 && rho < 1.0) {
                return Err(Error::Config(format!(
                    "contour.rho must lie in (0, 1), got {rho}"
                )));
            }
        }
        // geometric wave checks are delegated to the wave constructor
        self.build_wave()?;
        match &self.targets {
            TargetsSection::Points { points, sides } => {
                if points.is_empty() || points.len() != sides.len() {
                    return Err(Error::Config(
                        "targets.points and targets.sides must be non-empty and equally long"
                            .into(),
                    ));
                }
            }
            TargetsSection::Plane { axis, resolution, half_extent, .. } => {
                plane_axis_index(axis)?;
                if *resolution < 2 || !(*half_extent > 0.0) {
                    return Err(Error::Config(
                        "targets.resolution must be >= 2 and targets.half_extent positive".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn build_mesh(&self) -> Result<SurfaceMesh> {
        match &self.geometry {
            Geometry::Sphere { level, radius } => icosphere(*level, *radius),
            Geometry::TwoCubes { gap, divisions } => two_cubes(*gap, *divisions),
            Geometry::MeshFile { path, format } => load_mesh(path, parse_mesh_format(format)?),
        }
    }

    pub fn build_wave(&self) -> Result<IncidentWave> {
        let p = Point::new(
            self.incident.polarization[0],
            self.incident.polarization[1],
            self.incident.polarization[2],
        );
        let d = Point::new(
            self.incident.direction[0],
            self.incident.direction[1],
            self.incident.direction[2],
        );
        Ok(IncidentWave::new(p, d, self.incident.sharpness, self.incident.delay)?
            .with_amplitude(self.incident.amplitude))
    }

    pub fn build_grid(&self) -> Result<CQGrid> {
        let grid = CQGrid::new(self.time.t_final, self.time.n_steps)?;
        match self.contour.rho {
            Some(rho) => grid.with_rho(rho),
            None => Ok(grid),
        }
    }

    pub fn build_tableau(&self) -> Result<RKTableau> {
        radau_tableau(self.rk.stages)
    }

    pub fn interior_pair(&self) -> MaterialPair {
        self.materials.interior.pair(Side::Interior)
    }

    pub fn exterior_pair(&self) -> MaterialPair {
        self.materials.exterior.pair(Side::Exterior)
    }

    pub fn quad(&self) -> QuadConfig {
        QuadConfig::default()
    }

    /// Explicit target points with side tags.  Plane grids tag every point
    /// exterior and drop points closer to the surface than `min_gap`.
    pub fn target_points(&self, mesh: &SurfaceMesh, min_gap: f64) -> Result<(Vec<Point>, Vec<Side>)> {
        match &self.targets {
            TargetsSection::Points { points, sides } => Ok((
                points.iter().map(|p| Point::new(p[0], p[1], p[2])).collect(),
                sides.clone(),
            )),
            TargetsSection::Plane { axis, offset, half_extent, resolution } => {
                let k = plane_axis_index(axis)?;
                let (u, v) = ((k + 1) % 3, (k + 2) % 3);
                let mut pts = Vec::new();
                for i in 0..*resolution {
                    for j in 0..*resolution {
                        let a = -half_extent
                            + 2.0 * half_extent * i as f64 / (*resolution - 1) as f64;
                        let b = -half_extent
                            + 2.0 * half_extent * j as f64 / (*resolution - 1) as f64;
                        let mut p = Point::zeros();
                        p[k] = *offset;
                        p[u] = a;
                        p[v] = b;
                        if crate::ops::distance_to_surface(mesh, &p) > min_gap {
                            pts.push(p);
                        }
                    }
                }
                if pts.is_empty() {
                    return Err(Error::Config(
                        "plane grid has no points away from the surface".into(),
                    ));
                }
                let sides = vec![Side::Exterior; pts.len()];
                Ok((pts, sides))
            }
        }
    }

    /// Canonical TOML form: defaults filled in, fields in schema order.
    pub fn canonical_toml(&self) -> Result<String> {
        toml::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("config serialization: {e}")))
    }

    /// SHA-256 over the canonical form, hex-encoded.
    pub fn hash(&self) -> Result<String> {
        let canonical = self.canonical_toml()?;
        let digest = Sha256::digest(canonical.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}

fn parse_mesh_format(format: &str) -> Result<MeshFormat> {
    match format {
        "off" => Ok(MeshFormat::Off),
        "gmsh_v2" => Ok(MeshFormat::GmshV2),
        other => Err(Error::Config(format!(
            "geometry.format must be \"off\" or \"gmsh_v2\", got \"{other}\""
        ))),
    }
}

fn plane_axis_index(axis: &str) -> Result<usize> {
    match axis {
        "x" => Ok(0),
        "y" => Ok(1),
        "z" => Ok(2),
        other => Err(Error::Config(format!(
            "targets.axis must be \"x\", \"y\", or \"z\", got \"{other}\""
        ))),
    }
}

/// Written next to the run outputs; reproducing the run needs nothing else.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub canonical_config: String,
    pub n_dofs: usize,
    pub n_steps: usize,
    pub stages: usize,
    /// Distinct frequency nodes actually solved (lower contour half).
    pub frequency_solves: usize,
    pub wall_seconds: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_reproduce_the_sphere_benchmark() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.time.t_final, 8.0);
        assert_eq!(cfg.incident.delay, 4.0);
        assert_eq!(cfg.incident.sharpness, 10.0);
        assert!(matches!(cfg.geometry, Geometry::Sphere { level: 1, .. }));
        let wave = cfg.build_wave().unwrap();
        assert!((wave.polarization.cross(&wave.direction) - Point::new(0.0, 1.0, 0.0)).norm() < 1e-15);
        assert_eq!(cfg.interior_pair(), MaterialPair::fractional_interior());
        assert_eq!(cfg.exterior_pair(), MaterialPair::vacuum(Side::Exterior));
    }

    #[test]
    fn two_cubes_demo_matches_the_second_benchmark() {
        let cfg = RunConfig::two_cubes_demo();
        cfg.validate().unwrap();
        assert_eq!(cfg.incident.sharpness, 100.0);
        assert!(matches!(cfg.geometry, Geometry::TwoCubes { gap, divisions: 4 } if gap == 0.5));
        match &cfg.targets {
            TargetsSection::Plane { axis, offset, .. } => {
                assert_eq!(axis, "y");
                assert_eq!(*offset, 0.5);
            }
            _ => panic!("expected plane targets"),
        }
    }

    #[test]
    fn empty_config_parses_to_defaults() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn roundtrip_through_canonical_form() {
        let cfg = RunConfig::two_cubes_demo();
        let canonical = cfg.canonical_toml().unwrap();
        let back = RunConfig::from_toml_str(&canonical).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.hash().unwrap(), back.hash().unwrap());
    }

    #[test]
    fn hash_distinguishes_configs_and_ignores_formatting() {
        let a = RunConfig::from_toml_str("[time]\nn_steps = 32\n").unwrap();
        let b = RunConfig::from_toml_str("[ time ]\n n_steps   = 32\n").unwrap();
        let c = RunConfig::from_toml_str("[time]\nn_steps = 64\n").unwrap();
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        assert_ne!(a.hash().unwrap(), c.hash().unwrap());
    }

    #[test]
    fn schema_errors_name_the_key() {
        let err = RunConfig::from_toml_str("[materials.interior.epsilon]\nkind = \"plasma\"\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("plasma") || err.contains("kind"), "{err}");
        let err = RunConfig::from_toml_str("[rk]\nstages = 5\n").unwrap_err().to_string();
        assert!(err.contains("stages"), "{err}");
        let err = RunConfig::from_toml_str("unknown_section = 3\n").unwrap_err().to_string();
        assert!(err.contains("unknown_section"), "{err}");
    }

    #[test]
    fn material_sections_parse_dispersive_laws() {
        let text = r#"
            [materials.interior.epsilon]
            kind = "debye"
            beta = 1.5
            lambda = 2.0
            [materials.interior.mu]
            kind = "vacuum"
            base_constant = 0.5
        "#;
        let cfg = RunConfig::from_toml_str(text).unwrap();
        let pair = cfg.interior_pair();
        assert!(matches!(
            pair.epsilon.kind,
            crate::materials::MaterialKind::Debye { beta, lambda } if beta == 1.5 && lambda == 2.0
        ));
        assert_eq!(pair.mu.base_constant, 0.5);
    }

    #[test]
    fn plane_targets_skip_points_near_the_surface() {
        let cfg = RunConfig::two_cubes_demo();
        let mesh = cfg.build_mesh().unwrap();
        let (pts, sides) = cfg.target_points(&mesh, 0.05).unwrap();
        assert_eq!(pts.len(), sides.len());
        assert!(!pts.is_empty());
        for p in &pts {
            assert!(crate::ops::distance_to_surface(&mesh, p) > 0.05);
        }
        // the grid has fewer points than the full resolution^2 because the
        // cubes intersect the plane
        match cfg.targets {
            TargetsSection::Plane { resolution, .. } => {
                assert!(pts.len() < resolution * resolution);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(RunConfig::from_toml_str("[time]\nt_final = -1.0\n").is_err());
        assert!(RunConfig::from_toml_str("[contour]\nrho = 1.5\n").is_err());
        assert!(
            RunConfig::from_toml_str("[targets]\nmode = \"plane\"\naxis = \"w\"\n").is_err()
        );
        assert!(RunConfig::from_toml_str(
            "[incident]\npolarization = [1.0, 0.0, 0.0]\ndirection = [1.0, 0.0, 0.0]\n"
        )
        .is_err());
    }
}
