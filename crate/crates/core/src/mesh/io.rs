//! Surface mesh file I/O: OFF (read/write) and Gmsh `.msh` v2 ASCII (read,
//! triangle elements only).

use super::{Point, SurfaceMesh};
use crate::error::{Error, Result};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    GmshV2,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("off") => Ok(Self::Off),
            Some("msh") => Ok(Self::GmshV2),
            other => Err(Error::Config(format!(
                "cannot infer mesh format from extension {other:?} (expected .off or .msh)"
            ))),
        }
    }
}

pub fn load_mesh(path: impl AsRef<Path>, format: MeshFormat) -> Result<SurfaceMesh> {
    let file = std::fs::File::open(path.as_ref())?;
    let reader = BufReader::new(file);
    match format {
        MeshFormat::Off => read_off(reader),
        MeshFormat::GmshV2 => read_gmsh_v2(reader),
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn read_off(reader: impl BufRead) -> Result<SurfaceMesh> {
    let mut lines = reader
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| match l {
            Ok(s) => {
                let t = s.trim();
                !t.is_empty() && !t.starts_with('#')
            }
            Err(_) => true,
        });
    let (ln, first) = lines.next().ok_or_else(|| parse_err(1, "empty OFF file"))?;
    let first = first?;
    if first.trim() != "OFF" {
        return Err(parse_err(ln, "expected OFF header"));
    }
    let (ln, counts) = lines.next().ok_or_else(|| parse_err(ln, "missing count line"))?;
    let counts = counts?;
    let nums: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad count '{t}'"))))
        .collect::<Result<_>>()?;
    if nums.len() < 2 {
        return Err(parse_err(ln, "count line needs at least nv nf"));
    }
    let (nv, nf) = (nums[0], nums[1]);
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, line) = lines.next().ok_or_else(|| parse_err(ln, "unexpected end of vertices"))?;
        let line = line?;
        let xs: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad coordinate '{t}'"))))
            .collect::<Result<_>>()?;
        if xs.len() < 3 {
            return Err(parse_err(ln, "vertex line needs 3 coordinates"));
        }
        vertices.push(Point::new(xs[0], xs[1], xs[2]));
    }
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, line) = lines.next().ok_or_else(|| parse_err(ln, "unexpected end of faces"))?;
        let line = line?;
        let xs: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad face index '{t}'"))))
            .collect::<Result<_>>()?;
        if xs.is_empty() || xs[0] != 3 || xs.len() < 4 {
            return Err(parse_err(ln, "only triangular faces are supported"));
        }
        triangles.push([xs[1], xs[2], xs[3]]);
    }
    SurfaceMesh::new(vertices, triangles)
}

fn read_gmsh_v2(reader: impl BufRead) -> Result<SurfaceMesh> {
    let mut vertices = Vec::new();
    let mut id_map = std::collections::HashMap::new();
    let mut triangles = Vec::new();
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    while let Some((ln, line)) = lines.next() {
        let line = line?;
        match line.trim() {
            "$Nodes" => {
                let (ln2, count) =
                    lines.next().ok_or_else(|| parse_err(ln, "missing node count"))?;
                let n: usize = count?
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(ln2, "bad node count"))?;
                for _ in 0..n {
                    let (ln3, l) = lines.next().ok_or_else(|| parse_err(ln2, "truncated nodes"))?;
                    let l = l?;
                    let xs: Vec<&str> = l.split_whitespace().collect();
                    if xs.len() < 4 {
                        return Err(parse_err(ln3, "node line needs 'id x y z'"));
                    }
                    let id: usize =
                        xs[0].parse().map_err(|_| parse_err(ln3, "bad node id"))?;
                    let coord: Vec<f64> = xs[1..4]
                        .iter()
                        .map(|t| t.parse().map_err(|_| parse_err(ln3, "bad coordinate")))
                        .collect::<Result<_>>()?;
                    id_map.insert(id, vertices.len());
                    vertices.push(Point::new(coord[0], coord[1], coord[2]));
                }
            }
            "$Elements" => {
                let (ln2, count) =
                    lines.next().ok_or_else(|| parse_err(ln, "missing element count"))?;
                let n: usize = count?
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(ln2, "bad element count"))?;
                for _ in 0..n {
                    let (ln3, l) =
                        lines.next().ok_or_else(|| parse_err(ln2, "truncated elements"))?;
                    let l = l?;
                    let xs: Vec<usize> = l
                        .split_whitespace()
                        .map(|t| t.parse().map_err(|_| parse_err(ln3, "bad element field")))
                        .collect::<Result<_>>()?;
                    // id type ntags tags... nodes...
                    if xs.len() < 3 {
                        return Err(parse_err(ln3, "short element line"));
                    }
                    let etype = xs[1];
                    if etype != 2 {
                        continue; // only surface triangles
                    }
                    let ntags = xs[2];
                    let nodes = &xs[3 + ntags..];
                    if nodes.len() != 3 {
                        return Err(parse_err(ln3, "triangle element needs 3 nodes"));
                    }
                    let mut tri = [0usize; 3];
                    for (k, id) in nodes.iter().enumerate() {
                        tri[k] = *id_map
                            .get(id)
                            .ok_or_else(|| parse_err(ln3, format!("unknown node id {id}")))?;
                    }
                    triangles.push(tri);
                }
            }
            _ => {}
        }
    }
    SurfaceMesh::new(vertices, triangles)
}

pub fn write_off(mesh: &SurfaceMesh, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "OFF")?;
    writeln!(f, "{} {} {}", mesh.n_vertices(), mesh.n_triangles(), mesh.n_edges())?;
    for v in &mesh.vertices {
        writeln!(f, "{:.17} {:.17} {:.17}", v.x, v.y, v.z)?;
    }
    for tri in &mesh.triangles {
        writeln!(f, "3 {} {} {}", tri[0], tri[1], tri[2])?;
    }
    Ok(())
}
