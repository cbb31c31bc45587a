use std::f64::consts::PI;
use std::io::Write;

use super::HelmholtzConfig;
use crate::error::{Error, Result};

/// Structured polar triangulation of `{ r_in ≤ |x| ≤ r_out }`.
#[derive(Debug, Clone)]
pub struct AnnulusMesh {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub inner_boundary: Vec<usize>,
    pub outer_boundary: Vec<usize>,
    /// Outer boundary edges, counterclockwise.
    pub outer_edges: Vec<[usize; 2]>,
    pub h: f64,
    pub n_radial: usize,
    pub n_angular: usize,
}

impl AnnulusMesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn max_edge(&self) -> f64 {
        let d = |a: usize, b: usize| {
            let (p, q) = (self.nodes[a], self.nodes[b]);
            (p[0] - q[0]).hypot(p[1] - q[1])
        };
        self.triangles
            .iter()
            .map(|t| d(t[0], t[1]).max(d(t[1], t[2])).max(d(t[2], t[0])))
            .fold(0.0, f64::max)
    }

    /// Plain-text export: node block, triangle block and boundary node lists.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "nodes {}", self.nodes.len())?;
        for p in &self.nodes {
            writeln!(out, "{:.17e} {:.17e}", p[0], p[1])?;
        }
        writeln!(out, "triangles {}", self.triangles.len())?;
        for t in &self.triangles {
            writeln!(out, "{} {} {}", t[0], t[1], t[2])?;
        }
        for (name, ids) in [("inner", &self.inner_boundary), ("outer", &self.outer_boundary)] {
            writeln!(out, "{name} {}", ids.len())?;
            let line: Vec<String> = ids.iter().map(usize::to_string).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Mesh with target size `h = mesh_factor · k0^{-3/2}`.
pub fn build_annulus_mesh(cfg: &HelmholtzConfig) -> Result<AnnulusMesh> {
    build_annulus_mesh_with(cfg.r_in, cfg.r_out, cfg.mesh_size())
}

/// `n_r × n_θ` polar grid with radial spacing and outer chord at most `h`;
/// each cell is split into two positively oriented triangles.
pub fn build_annulus_mesh_with(r_in: f64, r_out: f64, h: f64) -> Result<AnnulusMesh> {
    if !(r_in > 0.0 && r_in < r_out) || !(h > 0.0) {
        return Err(Error::InvalidArgument("need 0 < r_in < r_out and h > 0".into()));
    }
    let n_r = ((r_out - r_in) / h).ceil() as usize;
    if n_r < 2 {
        return Err(Error::MeshTooCoarse(format!("h = {h} gives {n_r} radial layers")));
    }
    let n_t = ((2.0 * PI * r_out / h).ceil() as usize).max(8);
    let dr = (r_out - r_in) / n_r as f64;
    let mut nodes = Vec::with_capacity((n_r + 1) * n_t);
    for i in 0..=n_r {
        let r = if i == n_r { r_out } else { r_in + i as f64 * dr };
        for j in 0..n_t {
            let t = 2.0 * PI * j as f64 / n_t as f64;
            nodes.push([r * t.cos(), r * t.sin()]);
        }
    }
    let id = |i: usize, j: usize| i * n_t + (j % n_t);
    let mut triangles = Vec::with_capacity(2 * n_r * n_t);
    for i in 0..n_r {
        for j in 0..n_t {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    let outer_edges = (0..n_t).map(|j| [id(n_r, j), id(n_r, j + 1)]).collect();
    Ok(AnnulusMesh {
        nodes,
        triangles,
        inner_boundary: (0..n_t).map(|j| id(0, j)).collect(),
        outer_boundary: (0..n_t).map(|j| id(n_r, j)).collect(),
        outer_edges,
        h,
        n_radial: n_r,
        n_angular: n_t,
    })
}
