//! Scene model and JSON ingestion.
//!
//! Scene files are JSON:
//!
//! ```json
//! {
//!   "origin": {"lat": 22.54, "lon": 114.05},
//!   "up_axis": "z",
//!   "buildings": [
//!     {"id": "tower", "role": "landmark",
//!      "cuboids": [{"center": [0, 0, 20], "half_extents": [5, 5, 20], "yaw": 0}]},
//!     {"id": "mall", "role": "static", "mesh_file": "mall.obj"}
//!   ],
//!   "path": [[-40, -30, 0], [-20, -30, 0]]
//! }
//! ```
//!
//! With `"up_axis": "y"` the input is taken to be left-handed y-up (as
//! exported by common game engines) and every point `(x, y, z)` is mapped to
//! `(x, z, y)`; cuboid yaw changes sign. Buildings without cuboids are
//! abstracted from their mesh at load time.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    abstract_to_cuboids, cuboids_bounds, cuboids_centroid, mesh_bounding_diagonal, Cuboid, Point3, Triangle,
    DEFAULT_MAX_BOXES,
};

/// Mesh vertices must lie within the cuboid union inflated by this fraction
/// of the mesh bounding diagonal.
pub const CONTAINMENT_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuildingRole {
    Static,
    Candidate,
    Landmark,
    Site,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeoOrigin {
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Building {
    pub id: String,
    pub role: BuildingRole,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<Vec<Triangle>>,
    pub cuboids: Vec<Cuboid>,
}

impl Building {
    pub fn new(id: impl Into<String>, role: BuildingRole, cuboids: Vec<Cuboid>) -> Result<Self> {
        let b = Building {
            id: id.into(),
            role,
            mesh: None,
            cuboids,
        };
        b.validate()?;
        Ok(b)
    }

    /// Builds from a mesh, abstracting it into at most five cuboids.
    pub fn from_mesh(id: impl Into<String>, role: BuildingRole, mesh: Vec<Triangle>) -> Result<Self> {
        let cuboids = abstract_to_cuboids(&mesh, DEFAULT_MAX_BOXES)?;
        let b = Building {
            id: id.into(),
            role,
            mesh: Some(mesh),
            cuboids,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cuboids.is_empty() || self.cuboids.len() > DEFAULT_MAX_BOXES {
            return Err(Error::Validation(format!(
                "building {:?} has {} cuboids, expected 1..={}",
                self.id,
                self.cuboids.len(),
                DEFAULT_MAX_BOXES
            )));
        }
        if let Some(mesh) = &self.mesh {
            if mesh.is_empty() {
                return Err(Error::Validation(format!("building {:?} has an empty mesh", self.id)));
            }
            let tol = CONTAINMENT_TOLERANCE * mesh_bounding_diagonal(mesh);
            if let Some(p) = mesh
                .iter()
                .flatten()
                .find(|p| !self.cuboids.iter().any(|c| c.contains_within(**p, tol)))
            {
                return Err(Error::Validation(format!(
                    "building {:?}: mesh vertex {:?} lies outside its cuboids",
                    self.id,
                    p.to_array()
                )));
            }
        }
        Ok(())
    }

    pub fn centroid(&self) -> Point3 {
        cuboids_centroid(&self.cuboids).expect("validated building has cuboids")
    }

    pub fn bounds(&self) -> (Point3, Point3) {
        cuboids_bounds(&self.cuboids).expect("validated building has cuboids")
    }

    /// Applies `point` to every mesh vertex and `part` to every cuboid.
    pub(crate) fn remapped(
        &self,
        point: impl Fn(Point3) -> Point3,
        part: impl Fn(&Cuboid) -> Result<Cuboid>,
    ) -> Result<Building> {
        let b = Building {
            id: self.id.clone(),
            role: self.role,
            mesh: self.mesh.as_ref().map(|m| m.iter().map(|t| t.map(&point)).collect()),
            cuboids: self.cuboids.iter().map(part).collect::<Result<_>>()?,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn translated(&self, v: Point3) -> Result<Building> {
        self.remapped(|p| p + v, |c| Ok(c.with_center(c.center() + v)))
    }

    /// Rotates about the vertical axis through `pivot`, counterclockwise
    /// seen from above.
    pub fn rotated_about(&self, pivot: Point3, angle: f64) -> Result<Building> {
        let (s, co) = angle.sin_cos();
        let turn = move |p: Point3| {
            let d = p - pivot;
            Point3::new(pivot.x + co * d.x - s * d.y, pivot.y + s * d.x + co * d.y, p.z)
        };
        self.remapped(turn, |c| Ok(c.with_center(turn(c.center())).with_yaw(c.yaw() + angle)))
    }

    /// Scales world coordinates about `pivot` by per-axis `factors`. A yawed
    /// cuboid keeps its yaw; each local half extent is scaled by the stretch
    /// of its axis direction.
    pub fn scaled_about(&self, pivot: Point3, factors: [f64; 3]) -> Result<Building> {
        if factors.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::Validation(format!(
                "scale factors must be positive, got {factors:?}"
            )));
        }
        let [fx, fy, fz] = factors;
        let stretch = move |p: Point3| {
            let d = p - pivot;
            Point3::new(pivot.x + fx * d.x, pivot.y + fy * d.y, pivot.z + fz * d.z)
        };
        self.remapped(stretch, |c| {
            let (s, co) = c.yaw().sin_cos();
            let [hx, hy, hz] = c.half_extents();
            let along_x = (fx * co).hypot(fy * s);
            let along_y = (fx * s).hypot(fy * co);
            Cuboid::new(stretch(c.center()), [hx * along_x, hy * along_y, hz * fz], c.yaw())
        })
    }

    /// Triangles used for rendering: the mesh when present, else cuboid faces.
    pub fn render_triangles(&self) -> Vec<Triangle> {
        match &self.mesh {
            Some(m) => m.clone(),
            None => self.cuboids.iter().flat_map(|c| c.triangles()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub origin: GeoOrigin,
    pub buildings: Vec<Building>,
    #[serde(default)]
    pub path: Vec<Point3>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
enum UpAxis {
    #[default]
    Z,
    Y,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    origin: GeoOrigin,
    #[serde(default)]
    up_axis: UpAxis,
    buildings: Vec<BuildingFile>,
    #[serde(default)]
    path: Vec<Point3>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BuildingFile {
    id: String,
    role: BuildingRole,
    #[serde(default)]
    mesh: Option<Vec<Triangle>>,
    #[serde(default)]
    mesh_file: Option<String>,
    #[serde(default)]
    cuboids: Option<Vec<Cuboid>>,
}

impl UpAxis {
    fn point(self, p: Point3) -> Point3 {
        match self {
            UpAxis::Z => p,
            UpAxis::Y => Point3::new(p.x, p.z, p.y),
        }
    }

    fn cuboid(self, c: Cuboid) -> Result<Cuboid> {
        match self {
            UpAxis::Z => Ok(c),
            UpAxis::Y => {
                let h = c.half_extents();
                Cuboid::new(self.point(c.center()), [h[0], h[2], h[1]], -c.yaw())
            }
        }
    }
}

impl Scene {
    pub fn new(origin: GeoOrigin, buildings: Vec<Building>, path: Vec<Point3>) -> Result<Self> {
        let s = Scene {
            origin,
            buildings,
            path,
        };
        s.validate()?;
        Ok(s)
    }

    /// Parses a scene document; relative `mesh_file` references resolve
    /// against `base_dir`.
    pub fn from_json_str(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let file: SceneFile = serde_json::from_str(text)?;
        let up = file.up_axis;
        let mut buildings = Vec::with_capacity(file.buildings.len());
        for b in file.buildings {
            let mut mesh = b.mesh;
            if let Some(name) = &b.mesh_file {
                if mesh.is_some() {
                    return Err(Error::Validation(format!(
                        "building {:?} has both mesh and mesh_file",
                        b.id
                    )));
                }
                let path = match base_dir {
                    Some(dir) => dir.join(name),
                    None => Path::new(name).to_path_buf(),
                };
                mesh = Some(load_obj(&path)?);
            }
            let mesh = mesh.map(|m| m.into_iter().map(|t| t.map(|p| up.point(p))).collect::<Vec<Triangle>>());
            let building = match (b.cuboids, mesh) {
                (Some(cs), mesh) => {
                    let cuboids = cs.into_iter().map(|c| up.cuboid(c)).collect::<Result<Vec<_>>>()?;
                    let b = Building {
                        id: b.id,
                        role: b.role,
                        mesh,
                        cuboids,
                    };
                    b.validate()?;
                    b
                }
                (None, Some(mesh)) => Building::from_mesh(b.id, b.role, mesh)?,
                (None, None) => {
                    return Err(Error::Validation(format!(
                        "building {:?} needs cuboids or a mesh",
                        b.id
                    )))
                }
            };
            buildings.push(building);
        }
        let path = file.path.into_iter().map(|p| up.point(p)).collect();
        Scene::new(file.origin, buildings, path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Scene::from_json_str(&text, path.parent())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let o = self.origin;
        if !(o.lat.abs() <= 90.0 && o.lon.abs() <= 180.0) {
            return Err(Error::Validation(format!(
                "origin ({}, {}) is not a WGS-84 position",
                o.lat, o.lon
            )));
        }
        let mut seen = HashSet::new();
        for b in &self.buildings {
            if !seen.insert(b.id.as_str()) {
                return Err(Error::Validation(format!("duplicate building id {:?}", b.id)));
            }
            b.validate()?;
        }
        if self.path.iter().any(|p| !p.is_finite()) {
            return Err(Error::Validation("path has non-finite points".into()));
        }
        Ok(())
    }

    pub fn building(&self, id: &str) -> Result<&Building> {
        self.buildings
            .iter()
            .find(|b| b.id == id)
            .ok_or_else(|| Error::NotFound(format!("building {id:?}")))
    }

    pub fn building_mut(&mut self, id: &str) -> Result<&mut Building> {
        self.buildings
            .iter_mut()
            .find(|b| b.id == id)
            .ok_or_else(|| Error::NotFound(format!("building {id:?}")))
    }

    /// The single landmark; visibility analysis needs exactly one.
    pub fn landmark(&self) -> Result<&Building> {
        let mut it = self.buildings.iter().filter(|b| b.role == BuildingRole::Landmark);
        match (it.next(), it.next()) {
            (Some(b), None) => Ok(b),
            (None, _) => Err(Error::NotFound("landmark building".into())),
            (Some(_), Some(_)) => Err(Error::Validation("scene has more than one landmark".into())),
        }
    }

    pub fn ids_with_role(&self, role: BuildingRole) -> Vec<String> {
        self.buildings
            .iter()
            .filter(|b| b.role == role)
            .map(|b| b.id.clone())
            .collect()
    }

    /// Diagonal of the axis-aligned bounds of every cuboid in the scene.
    pub fn bounding_diagonal(&self) -> f64 {
        let all: Vec<Cuboid> = self.buildings.iter().flat_map(|b| b.cuboids.iter().copied()).collect();
        cuboids_bounds(&all).map_or(0.0, |(lo, hi)| (hi - lo).norm())
    }
}

/// Reads the `v` and `f` records of a Wavefront OBJ file as a triangle soup.
/// Polygonal faces are fan-triangulated; other records are ignored.
pub fn load_obj(path: &Path) -> Result<Vec<Triangle>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_obj(&text)
}

pub fn parse_obj(text: &str) -> Result<Vec<Triangle>> {
    let mut verts: Vec<Point3> = Vec::new();
    let mut tris = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        let bad = |what: &str| Error::Validation(format!("obj line {}: {what}", lineno + 1));
        match it.next() {
            Some("v") => {
                let mut c = [0.0; 3];
                for slot in &mut c {
                    *slot = it
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| bad("malformed vertex"))?;
                }
                verts.push(c.into());
            }
            Some("f") => {
                let idx = it
                    .map(|tok| {
                        let first = tok.split('/').next().unwrap_or("");
                        let i: i64 = first.parse().map_err(|_| bad("malformed face index"))?;
                        let resolved = if i < 0 { verts.len() as i64 + i } else { i - 1 };
                        usize::try_from(resolved)
                            .ok()
                            .filter(|&r| r < verts.len())
                            .ok_or_else(|| bad("face index out of range"))
                    })
                    .collect::<Result<Vec<usize>>>()?;
                if idx.len() < 3 {
                    return Err(bad("face with fewer than 3 vertices"));
                }
                for k in 1..idx.len() - 1 {
                    tris.push([verts[idx[0]], verts[idx[k]], verts[idx[k + 1]]]);
                }
            }
            _ => {}
        }
    }
    if tris.is_empty() {
        return Err(Error::EmptyInput("obj file has no faces"));
    }
    Ok(tris)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
        "origin": {"lat": 22.5, "lon": 114.0},
        "buildings": [
            {"id": "a", "role": "landmark",
             "cuboids": [{"center": [0, 0, 5], "half_extents": [2, 2, 5], "yaw": 0}]},
            {"id": "b", "role": "static",
             "cuboids": [{"center": [10, 0, 3], "half_extents": [1, 1, 3]}]}
        ],
        "path": [[0, -20, 0], [10, -20, 0]]
    }"#;

    #[test]
    fn parses_cuboid_scene() {
        let s = Scene::from_json_str(DOC, None).unwrap();
        assert_eq!(s.buildings.len(), 2);
        assert_eq!(s.landmark().unwrap().id, "a");
        assert_eq!(s.path.len(), 2);
    }

    #[test]
    fn rejects_duplicate_ids_and_unknown_keys() {
        let dup = DOC.replace("\"id\": \"b\"", "\"id\": \"a\"");
        assert!(matches!(Scene::from_json_str(&dup, None), Err(Error::Validation(_))));
        let extra = DOC.replace("\"path\"", "\"colour\": 1, \"path\"");
        assert!(Scene::from_json_str(&extra, None).is_err());
    }

    #[test]
    fn y_up_input_is_remapped() {
        let doc = r#"{"origin": {"lat": 0, "lon": 0}, "up_axis": "y",
            "buildings": [{"id": "a", "role": "static",
              "cuboids": [{"center": [1, 5, 2], "half_extents": [1, 5, 2], "yaw": 0.5}]}]}"#;
        let s = Scene::from_json_str(doc, None).unwrap();
        let c = s.buildings[0].cuboids[0];
        assert_eq!(c.center(), Point3::new(1.0, 2.0, 5.0));
        assert_eq!(c.half_extents(), [1.0, 2.0, 5.0]);
        assert!((c.yaw() - (std::f64::consts::TAU - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn mesh_only_building_is_abstracted() {
        let c = Cuboid::from_bounds(Point3::new(0.0, 0.0, 0.0), Point3::new(2.0, 1.0, 3.0)).unwrap();
        let mesh = serde_json::to_string(&c.triangles().to_vec()).unwrap();
        let doc = format!(
            r#"{{"origin": {{"lat": 0, "lon": 0}}, "buildings": [{{"id": "m", "role": "static", "mesh": {mesh}}}]}}"#
        );
        let s = Scene::from_json_str(&doc, None).unwrap();
        assert_eq!(s.buildings[0].cuboids.len(), 1);
    }

    #[test]
    fn mesh_outside_cuboids_is_rejected() {
        let c = Cuboid::from_bounds(Point3::new(0.0, 0.0, 0.0), Point3::new(2.0, 1.0, 3.0)).unwrap();
        let small = Cuboid::from_bounds(Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 1.0, 1.0)).unwrap();
        let b = Building {
            id: "x".into(),
            role: BuildingRole::Static,
            mesh: Some(c.triangles().to_vec()),
            cuboids: vec![small],
        };
        assert!(b.validate().is_err());
    }

    #[test]
    fn obj_faces_are_triangulated() {
        let obj = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\nf -4/1/1 -3 -2\n";
        let tris = parse_obj(obj).unwrap();
        assert_eq!(tris.len(), 3);
        assert!(parse_obj("v 0 0 0\nf 1 2 3\n").is_err());
    }

    #[test]
    fn landmark_must_be_unique() {
        let two = DOC.replace("\"static\"", "\"landmark\"");
        let s = Scene::from_json_str(&two, None).unwrap();
        assert!(s.landmark().is_err());
    }
}
