use num_complex::Complex64;

use super::family::{Mat2, ProblemFamily};
use super::mesh::AnnulusMesh;
use super::HelmholtzConfig;
use crate::error::{Error, Result};
use crate::krylov::CsrMatrix;

/// Dirichlet values on the inner circle and Robin data `∂_n u − i k0 u` on
/// the outer circle (second argument is the outward unit normal).
pub struct BoundaryData<'a> {
    pub dirichlet: &'a dyn Fn([f64; 2]) -> Complex64,
    pub robin: &'a dyn Fn([f64; 2], [f64; 2]) -> Complex64,
}

/// `exp(i k0 d·x)`.
pub fn plane_wave(k0: f64, d: [f64; 2], x: [f64; 2]) -> Complex64 {
    Complex64::from_polar(1.0, k0 * (d[0] * x[0] + d[1] * x[1]))
}

/// System and right-hand side for the sound-soft scattering problem at `y`.
pub fn assemble(
    y: &[f64],
    family: &ProblemFamily,
    mesh: &AnnulusMesh,
    cfg: &HelmholtzConfig,
) -> Result<(CsrMatrix<f64>, Vec<Complex64>)> {
    if y.len() != family.dims() {
        return Err(Error::DimensionMismatch { expected: family.dims(), got: y.len() });
    }
    let (k0, d) = (cfg.k0, cfg.incident_direction);
    let dirichlet = |_: [f64; 2]| Complex64::new(0.0, 0.0);
    let robin = |x: [f64; 2], n: [f64; 2]| {
        Complex64::new(0.0, k0 * (d[0] * n[0] + d[1] * n[1] - 1.0)) * plane_wave(k0, d, x)
    };
    let data = BoundaryData { dirichlet: &dirichlet, robin: &robin };
    assemble_with(mesh, k0, |x| family.coefficients(y, x), &data)
}

/// `K[A] − k0² M[n] − i k0 M_Γout` with Dirichlet rows and columns eliminated.
pub fn assemble_with<F>(
    mesh: &AnnulusMesh,
    k0: f64,
    coeffs: F,
    data: &BoundaryData<'_>,
) -> Result<(CsrMatrix<f64>, Vec<Complex64>)>
where
    F: Fn([f64; 2]) -> Result<(Mat2, f64)>,
{
    let n = mesh.n_nodes();
    let mut is_dirichlet = vec![false; n];
    let mut u_d = vec![Complex64::new(0.0, 0.0); n];
    for &i in &mesh.inner_boundary {
        is_dirichlet[i] = true;
        u_d[i] = (data.dirichlet)(mesh.nodes[i]);
    }
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    let mut triplets: Vec<(usize, usize, Complex64)> = Vec::with_capacity(9 * mesh.triangles.len() + 4 * mesh.outer_edges.len() + n);
    let mut push = |i: usize, j: usize, v: Complex64, rhs: &mut Vec<Complex64>| {
        if is_dirichlet[i] {
            return;
        }
        if is_dirichlet[j] {
            rhs[i] -= v * u_d[j];
            return;
        }
        triplets.push((i, j, v));
    };

    let k2 = k0 * k0;
    for (e, tri) in mesh.triangles.iter().enumerate() {
        let p = tri.map(|i| mesh.nodes[i]);
        let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        if !(det > 0.0) {
            return Err(Error::DegenerateElement(e));
        }
        let area = 0.5 * det;
        // ∇λ_i for the barycentric coordinates
        let grad = [
            [(p[1][1] - p[2][1]) / det, (p[2][0] - p[1][0]) / det],
            [(p[2][1] - p[0][1]) / det, (p[0][0] - p[2][0]) / det],
            [(p[0][1] - p[1][1]) / det, (p[1][0] - p[0][0]) / det],
        ];
        let mut stiff = [[0.0; 3]; 3];
        let mut mass = [[0.0; 3]; 3];
        for q in 0..3 {
            let (a, b) = (q, (q + 1) % 3);
            let x = [0.5 * (p[a][0] + p[b][0]), 0.5 * (p[a][1] + p[b][1])];
            let (coef, nq) = coeffs(x)?;
            let w = area / 3.0;
            let mut lam = [0.0; 3];
            lam[a] = 0.5;
            lam[b] = 0.5;
            for i in 0..3 {
                let ag = [
                    coef[0][0] * grad[i][0] + coef[0][1] * grad[i][1],
                    coef[1][0] * grad[i][0] + coef[1][1] * grad[i][1],
                ];
                for j in 0..3 {
                    stiff[j][i] += w * (ag[0] * grad[j][0] + ag[1] * grad[j][1]);
                    mass[i][j] += w * nq * lam[i] * lam[j];
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                push(tri[i], tri[j], Complex64::new(stiff[i][j] - k2 * mass[i][j], 0.0), &mut rhs);
            }
        }
    }

    let gauss = [0.5 - 0.5 / 3f64.sqrt(), 0.5 + 0.5 / 3f64.sqrt()];
    for edge in &mesh.outer_edges {
        let (pa, pb) = (mesh.nodes[edge[0]], mesh.nodes[edge[1]]);
        let t = [pb[0] - pa[0], pb[1] - pa[1]];
        let len = t[0].hypot(t[1]);
        let normal = [t[1] / len, -t[0] / len];
        let mut local = [[0.0; 2]; 2];
        let mut load = [Complex64::new(0.0, 0.0); 2];
        for &s in &gauss {
            let phi = [1.0 - s, s];
            let x = [pa[0] + s * t[0], pa[1] + s * t[1]];
            let g = (data.robin)(x, normal);
            for i in 0..2 {
                load[i] += 0.5 * len * g * phi[i];
                for j in 0..2 {
                    local[i][j] += 0.5 * len * phi[i] * phi[j];
                }
            }
        }
        for i in 0..2 {
            if !is_dirichlet[edge[i]] {
                rhs[edge[i]] += load[i];
            }
            for j in 0..2 {
                push(edge[i], edge[j], Complex64::new(0.0, -k0 * local[i][j]), &mut rhs);
            }
        }
    }

    for i in 0..n {
        if is_dirichlet[i] {
            triplets.push((i, i, Complex64::new(1.0, 0.0)));
            rhs[i] = u_d[i];
        }
    }
    Ok((CsrMatrix::from_triplets(n, &triplets)?, rhs))
}

/// `‖u_h − u‖_{L²}` of the P1 interpolant of nodal values `u_h`, by a
/// degree-5 seven-point rule on every triangle.
pub fn l2_error<F: Fn([f64; 2]) -> Complex64>(mesh: &AnnulusMesh, u_h: &[Complex64], exact: F) -> f64 {
    const A1: f64 = 0.059_715_871_789_770;
    const B1: f64 = 0.470_142_064_105_115;
    const A2: f64 = 0.797_426_985_353_087;
    const B2: f64 = 0.101_286_507_323_456;
    const W0: f64 = 0.225;
    const W1: f64 = 0.132_394_152_788_506;
    const W2: f64 = 0.125_939_180_544_827;
    let rule: [([f64; 3], f64); 7] = [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], W0),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ];
    let mut sum = 0.0;
    for tri in &mesh.triangles {
        let p = tri.map(|i| mesh.nodes[i]);
        let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1])).abs();
        for (lam, w) in &rule {
            let x = [
                lam[0] * p[0][0] + lam[1] * p[1][0] + lam[2] * p[2][0],
                lam[0] * p[0][1] + lam[1] * p[1][1] + lam[2] * p[2][1],
            ];
            let uh = u_h[tri[0]] * lam[0] + u_h[tri[1]] * lam[1] + u_h[tri[2]] * lam[2];
            sum += w * area * (uh - exact(x)).norm_sqr();
        }
    }
    sum.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::helmholtz::build_annulus_mesh_with;
    use crate::krylov::{gmres_left, lu_factor};
    use std::f64::consts::PI;

    #[test]
    fn full_mass_matrix_integrates_one() {
        let mesh = build_annulus_mesh_with(0.25, 1.0, 0.05).unwrap();
        let mut no_dirichlet = mesh.clone();
        no_dirichlet.inner_boundary.clear();
        let zero = |_: [f64; 2]| Complex64::new(0.0, 0.0);
        let zero_r = |_: [f64; 2], _: [f64; 2]| Complex64::new(0.0, 0.0);
        let data = BoundaryData { dirichlet: &zero, robin: &zero_r };
        let (a, _) = assemble_with(&no_dirichlet, 1.0, |_| Ok(([[0.0; 2]; 2], 1.0)), &data).unwrap();
        let mass_total: f64 = a.values().iter().map(|v| -v.re).sum();
        let exact = PI * (1.0 - 1.0 / 16.0);
        assert!((mass_total - exact).abs() < 2.0 * mesh.h * mesh.h, "{mass_total} vs {exact}");
        // constants are in the stiffness kernel
        let (k, _) = assemble_with(&no_dirichlet, 0.0, |_| Ok(([[1.0, 0.0], [0.0, 1.0]], 1.0)), &data).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); k.n()];
        assert!(k.mul_vec(&ones).iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn zero_incident_field_gives_zero_rhs() {
        let mesh = build_annulus_mesh_with(0.25, 1.0, 0.1).unwrap();
        let zero = |_: [f64; 2]| Complex64::new(0.0, 0.0);
        let zero_r = |_: [f64; 2], _: [f64; 2]| Complex64::new(0.0, 0.0);
        let data = BoundaryData { dirichlet: &zero, robin: &zero_r };
        let (_, b) = assemble_with(&mesh, 5.0, |_| Ok(([[1.0, 0.0], [0.0, 1.0]], 1.0)), &data).unwrap();
        assert!(b.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn assembled_matrix_is_complex_symmetric() {
        let cfg = HelmholtzConfig::with_wavenumber(6.0);
        let mesh = crate::helmholtz::build_annulus_mesh(&cfg).unwrap();
        let fam = ProblemFamily::shape(3, 0.08, 2.0, &cfg).unwrap();
        let (a, _) = assemble(&[0.5, -0.7, 0.9], &fam, &mesh, &cfg).unwrap();
        for i in 0..a.n() {
            for (j, v) in a.row(i) {
                assert!((a.get(j, i) - v).norm() < 1e-12 * (1.0 + v.norm()));
            }
        }
    }

    #[test]
    fn manufactured_plane_wave_converges() {
        let k0 = 5.0;
        let d = [1.0, 0.0];
        let dirichlet = |x: [f64; 2]| plane_wave(k0, d, x);
        let robin = |x: [f64; 2], n: [f64; 2]| Complex64::new(0.0, k0 * (d[0] * n[0] + d[1] * n[1] - 1.0)) * plane_wave(k0, d, x);
        let data = BoundaryData { dirichlet: &dirichlet, robin: &robin };
        let mut errs = Vec::new();
        for h in [0.1, 0.05] {
            let mesh = build_annulus_mesh_with(0.25, 1.0, h).unwrap();
            let (a, b) = assemble_with(&mesh, k0, |_| Ok(([[1.0, 0.0], [0.0, 1.0]], 1.0)), &data).unwrap();
            let p = lu_factor(&a).unwrap();
            let r = gmres_left(&p, &a, &b, 1e-10, 10).unwrap();
            errs.push(l2_error(&mesh, &r.solution, |x| plane_wave(k0, d, x)));
        }
        let rate = (errs[0] / errs[1]).log2();
        assert!(rate > 1.7, "{errs:?}");
    }
}
