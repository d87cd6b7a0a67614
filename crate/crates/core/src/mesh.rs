//! Meshes and polylines produced by sampling surfaces, with OBJ/PLY/JSON export.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vertex coordinates: ℝ³ for stereographic images, homogeneous ℝ⁴ for central ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Vertices {
    R3(Vec<[f64; 3]>),
    R4(Vec<[f64; 4]>),
}

impl Vertices {
    pub fn len(&self) -> usize {
        match self {
            Vertices::R3(v) => v.len(),
            Vertices::R4(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_r3(&self) -> Option<&[[f64; 3]]> {
        match self {
            Vertices::R3(v) => Some(v),
            Vertices::R4(_) => None,
        }
    }

    fn row(&self, i: usize) -> Vec<f64> {
        match self {
            Vertices::R3(v) => v[i].to_vec(),
            Vertices::R4(v) => v[i].to_vec(),
        }
    }
}

/// Polygon mesh with per-vertex parameter provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub vertices: Vertices,
    pub faces: Vec<Vec<usize>>,
    /// `(u, v)` angles of each vertex; empty for meshes not sampled from a surface.
    pub params: Vec<(f64, f64)>,
    /// Closed torus connectivity.
    pub closed: bool,
}

impl Mesh {
    /// `nu × nv` quad grid with wrap-around in both directions, vertices row-major in `u`.
    pub fn torus_grid(nu: usize, nv: usize, vertices: Vertices, params: Vec<(f64, f64)>) -> Self {
        assert_eq!(vertices.len(), nu * nv);
        let id = |i: usize, j: usize| (i % nu) * nv + (j % nv);
        let faces = (0..nu)
            .flat_map(|i| (0..nv).map(move |j| vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]))
            .collect();
        Self { vertices, faces, params, closed: true }
    }

    /// Octahedron, the smallest closed sphere mesh.
    pub fn octahedron() -> Self {
        let v = vec![
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ];
        let faces = [[0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4], [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5]];
        Self {
            vertices: Vertices::R3(v),
            faces: faces.iter().map(|f| f.to_vec()).collect(),
            params: Vec::new(),
            closed: true,
        }
    }

    pub fn write_obj<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# {} vertices, {} faces", self.vertices.len(), self.faces.len())?;
        for i in 0..self.vertices.len() {
            let row: Vec<String> = self.vertices.row(i).iter().map(|x| format!("{x:.12}")).collect();
            writeln!(out, "v {}", row.join(" "))?;
        }
        for f in &self.faces {
            let idx: Vec<String> = f.iter().map(|i| (i + 1).to_string()).collect();
            writeln!(out, "f {}", idx.join(" "))?;
        }
        Ok(())
    }

    pub fn write_ply<W: Write>(&self, mut out: W) -> io::Result<()> {
        let names: &[&str] = match self.vertices {
            Vertices::R3(_) => &["x", "y", "z"],
            Vertices::R4(_) => &["x", "y", "z", "w"],
        };
        writeln!(out, "ply\nformat ascii 1.0")?;
        writeln!(out, "element vertex {}", self.vertices.len())?;
        for n in names {
            writeln!(out, "property double {n}")?;
        }
        writeln!(out, "element face {}", self.faces.len())?;
        writeln!(out, "property list uchar int vertex_indices\nend_header")?;
        for i in 0..self.vertices.len() {
            let row: Vec<String> = self.vertices.row(i).iter().map(|x| format!("{x:.12}")).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        for f in &self.faces {
            let idx: Vec<String> = f.iter().map(|i| i.to_string()).collect();
            writeln!(out, "{} {}", f.len(), idx.join(" "))?;
        }
        Ok(())
    }
}

/// Ordered ℝ³ points; closed curves repeat no vertex and have at least 8 of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolylineCurve {
    pub points: Vec<[f64; 3]>,
    pub closed: bool,
}

impl PolylineCurve {
    /// Drops exact repeats of consecutive points, then validates.
    pub fn new(mut points: Vec<[f64; 3]>, closed: bool) -> Result<Self> {
        points.dedup();
        if closed && points.len() > 1 && points.first() == points.last() {
            points.pop();
        }
        if closed && points.len() < 8 {
            return Err(Error::Degenerate(format!("closed curve with {} vertices", points.len())));
        }
        if points.len() < 2 {
            return Err(Error::Degenerate("curve needs two points".into()));
        }
        Ok(Self { points, closed })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Segments `(p_k, p_{k+1})`, including the closing one.
    pub fn segments(&self) -> impl Iterator<Item = ([f64; 3], [f64; 3])> + '_ {
        let n = self.points.len();
        let m = if self.closed { n } else { n - 1 };
        (0..m).map(move |k| (self.points[k], self.points[(k + 1) % n]))
    }

    pub fn max_segment_length(&self) -> f64 {
        self.segments().map(|(a, b)| dist3(&a, &b)).fold(0.0, f64::max)
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        Self { points, closed: self.closed }
    }

    /// Inserts `k − 1` evenly spaced points on every segment.
    pub fn subdivided(&self, k: usize) -> Self {
        let mut points = Vec::with_capacity(self.points.len() * k);
        for (a, b) in self.segments() {
            for s in 0..k {
                let t = s as f64 / k as f64;
                points.push(std::array::from_fn(|i| a[i] + t * (b[i] - a[i])));
            }
        }
        if !self.closed {
            points.push(*self.points.last().expect("non-empty"));
        }
        Self { points, closed: self.closed }
    }
}

pub fn dist3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// `[{"closed": bool, "points": [[x, y, z], ...]}, ...]`.
pub fn curves_to_json(curves: &[PolylineCurve]) -> serde_json::Value {
    serde_json::to_value(curves).expect("curves serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Mesh {
        let pts: Vec<[f64; 3]> = (0..8 * 9).map(|k| [k as f64, 0.0, 0.0]).collect();
        let params = (0..8 * 9).map(|k| ((k / 9) as f64, (k % 9) as f64)).collect();
        Mesh::torus_grid(8, 9, Vertices::R3(pts), params)
    }

    #[test]
    fn grid_connectivity() {
        let m = grid();
        assert_eq!(m.faces.len(), 72);
        assert_eq!(m.faces[8], vec![8, 17, 9, 0]);
        assert!(m.faces.iter().flatten().all(|&i| i < 72));
    }

    #[test]
    fn obj_and_ply_output() {
        let m = grid();
        let mut obj = Vec::new();
        m.write_obj(&mut obj).unwrap();
        let text = String::from_utf8(obj).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 72);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 72);
        assert!(text.contains("\nf 1 10 11 2\n"));
        let mut ply = Vec::new();
        m.write_ply(&mut ply).unwrap();
        let text = String::from_utf8(ply).unwrap();
        assert!(text.contains("element vertex 72") && text.contains("end_header"));
        assert!(text.trim_end().ends_with("4 71 8 0 63"));
    }

    #[test]
    fn polyline_validation() {
        assert!(PolylineCurve::new(vec![[0.0; 3]; 8], true).is_err());
        let ring: Vec<[f64; 3]> = (0..8).map(|k| [(k as f64).cos(), (k as f64).sin(), 0.0]).collect();
        let c = PolylineCurve::new(ring, true).unwrap();
        assert_eq!(c.segments().count(), 8);
        assert_eq!(c.subdivided(3).len(), 24);
        let json = curves_to_json(&[c]);
        assert_eq!(json[0]["points"].as_array().unwrap().len(), 8);
    }
}
