//! Mesh generators: icosphere and the two-cube configuration.

use super::{Point, SurfaceMesh};
use crate::error::{Error, Result};
use std::collections::HashMap;

/// Recursively subdivided icosahedron projected onto the sphere of the given
/// radius.  Level 0 is the icosahedron itself (12 vertices, 20 faces); each
/// level quadruples the face count.
pub fn icosphere(level: usize, radius: f64) -> Result<SurfaceMesh> {
    if level > 7 {
        return Err(Error::InvalidParameter(format!("icosphere level {level} > 7")));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut vertices: Vec<Point> = vec![
        Point::new(-1.0, phi, 0.0),
        Point::new(1.0, phi, 0.0),
        Point::new(-1.0, -phi, 0.0),
        Point::new(1.0, -phi, 0.0),
        Point::new(0.0, -1.0, phi),
        Point::new(0.0, 1.0, phi),
        Point::new(0.0, -1.0, -phi),
        Point::new(0.0, 1.0, -phi),
        Point::new(phi, 0.0, -1.0),
        Point::new(phi, 0.0, 1.0),
        Point::new(-phi, 0.0, -1.0),
        Point::new(-phi, 0.0, 1.0),
    ];
    let mut triangles: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for v in &mut vertices {
        *v = v.normalize();
    }
    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for tri in &triangles {
            let mut mid = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                mid[k] = *midpoint.entry(key).or_insert_with(|| {
                    vertices.push((vertices[a] + vertices[b]).normalize());
                    vertices.len() - 1
                });
            }
            next.push([tri[0], mid[0], mid[2]]);
            next.push([tri[1], mid[1], mid[0]]);
            next.push([tri[2], mid[2], mid[1]]);
            next.push([mid[0], mid[1], mid[2]]);
        }
        triangles = next;
    }
    for v in &mut vertices {
        *v *= radius;
    }
    SurfaceMesh::new(vertices, triangles)
}

/// Two axis-aligned unit cubes separated by `gap` along the x axis, both
/// spanning `[0, 1]` in y and z (so the y = 0.5 plane cuts through both).
/// Each cube face is a structured `divisions x divisions` grid of quad cells
/// split into two triangles.
pub fn two_cubes(gap: f64, divisions: usize) -> Result<SurfaceMesh> {
    if !(gap > 0.0) {
        return Err(Error::InvalidParameter(format!("gap must be positive, got {gap}")));
    }
    if divisions == 0 || divisions > 64 {
        return Err(Error::InvalidParameter(format!("divisions must lie in 1..=64, got {divisions}")));
    }
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for cube in 0..2 {
        let x0 = if cube == 0 { -(gap / 2.0) - 1.0 } else { gap / 2.0 };
        append_cube(&mut vertices, &mut triangles, Point::new(x0, 0.0, 0.0), divisions);
    }
    SurfaceMesh::new(vertices, triangles)
}

/// One unit cube with its lower corner at `origin`, surface lattice indexed
/// so shared face/edge vertices deduplicate.
fn append_cube(
    vertices: &mut Vec<Point>,
    triangles: &mut Vec<[usize; 3]>,
    origin: Point,
    d: usize,
) {
    let mut index: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut vid = |i: usize, j: usize, k: usize, vertices: &mut Vec<Point>| -> usize {
        *index.entry((i, j, k)).or_insert_with(|| {
            let p = origin
                + Point::new(i as f64 / d as f64, j as f64 / d as f64, k as f64 / d as f64);
            vertices.push(p);
            vertices.len() - 1
        })
    };
    // each face: (fixed axis, fixed value 0|d); iterate over the two free axes
    for axis in 0..3usize {
        for &side in &[0usize, 1] {
            let fixed = side * d;
            for a in 0..d {
                for b in 0..d {
                    let cell = |da: usize, db: usize| {
                        let (u, v) = (a + da, b + db);
                        match axis {
                            0 => (fixed, u, v),
                            1 => (u, fixed, v),
                            _ => (u, v, fixed),
                        }
                    };
                    let (i0, j0, k0) = cell(0, 0);
                    let (i1, j1, k1) = cell(1, 0);
                    let (i2, j2, k2) = cell(1, 1);
                    let (i3, j3, k3) = cell(0, 1);
                    let q = [
                        vid(i0, j0, k0, vertices),
                        vid(i1, j1, k1, vertices),
                        vid(i2, j2, k2, vertices),
                        vid(i3, j3, k3, vertices),
                    ];
                    // winding is normalized later by the orientation pass
                    triangles.push([q[0], q[1], q[2]]);
                    triangles.push([q[0], q[2], q[3]]);
                }
            }
        }
    }
}
