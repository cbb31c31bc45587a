use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::param_space::ParamBox;
use crate::scalar::Real;

/// Result of a single-facility relocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Located<T> {
    pub point: Vec<T>,
    pub objective: T,
    /// False when no start improved on the incumbent.
    pub improved: bool,
}

/// `Σ_j m(y_j − ŷ)`.
pub fn cell_objective<T: Real, M>(cell: &[&[T]], m: &M, center: &[T]) -> Result<T>
where
    M: Fn(&[T]) -> Result<T> + ?Sized,
{
    let mut shift = vec![T::zero(); center.len()];
    let mut acc = T::zero();
    for y in cell {
        for ((s, &a), &c) in shift.iter_mut().zip(y.iter()).zip(center) {
            *s = a - c;
        }
        acc += m(&shift)?;
    }
    Ok(acc)
}

/// Minimizes the cell objective over the box: projected BFGS with central
/// difference gradients, started from the incumbent, the centroid and
/// random cell members (`starts` in total). Never returns a point worse than
/// the incumbent or the centroid.
pub fn locate<T: Real, M>(
    cell: &[&[T]],
    m: &M,
    bounds: &ParamBox<T>,
    incumbent: &[T],
    starts: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Located<T>>
where
    M: Fn(&[T]) -> Result<T> + ?Sized,
{
    if cell.is_empty() {
        return Err(Error::InvalidArgument("cannot locate a facility for an empty cell".into()));
    }
    let n = bounds.dims();
    if incumbent.len() != n || cell.iter().any(|y| y.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: incumbent.len() });
    }
    let f = |x: &[T]| cell_objective(cell, m, x);

    let mut inc = incumbent.to_vec();
    bounds.project(&mut inc);
    let inc_val = f(&inc)?;
    let mut centroid = vec![T::zero(); n];
    for y in cell {
        for (c, &v) in centroid.iter_mut().zip(y.iter()) {
            *c += v;
        }
    }
    let inv = T::one() / T::from_usize_lossy(cell.len());
    centroid.iter_mut().for_each(|c| *c *= inv);
    bounds.project(&mut centroid);

    let mut seeds = vec![inc.clone(), centroid];
    while seeds.len() < starts.max(2) {
        seeds.push(cell[rng.gen_range(0..cell.len())].to_vec());
    }

    let mut best = inc.clone();
    let mut best_val = inc_val;
    for seed in seeds {
        let (x, v) = minimize(&f, seed, bounds)?;
        if v < best_val {
            best = x;
            best_val = v;
        }
    }
    Ok(Located { improved: best_val < inc_val, point: best, objective: best_val })
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn gradient<T: Real, F>(f: &F, x: &[T], bounds: &ParamBox<T>) -> Result<Vec<T>>
where
    F: Fn(&[T]) -> Result<T>,
{
    let mut g = vec![T::zero(); x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let (lo, hi) = (bounds.lower()[i], bounds.upper()[i]);
        let h = T::lit(1e-6) * (hi - lo);
        let xp = (x[i] + h).min(hi);
        let xm = (x[i] - h).max(lo);
        probe[i] = xp;
        let fp = f(&probe)?;
        probe[i] = xm;
        let fm = f(&probe)?;
        probe[i] = x[i];
        g[i] = (fp - fm) / (xp - xm);
    }
    Ok(g)
}

fn minimize<T: Real, F>(f: &F, mut x: Vec<T>, bounds: &ParamBox<T>) -> Result<(Vec<T>, T)>
where
    F: Fn(&[T]) -> Result<T>,
{
    const MAX_ITER: usize = 100;
    const MAX_HALVINGS: usize = 40;
    let n = x.len();
    bounds.project(&mut x);
    let mut fx = f(&x)?;
    let mut g = gradient(f, &x, bounds)?;
    let identity = |h: &mut Vec<T>| {
        h.iter_mut().for_each(|v| *v = T::zero());
        for i in 0..n {
            h[i * n + i] = T::one();
        }
    };
    let mut h = vec![T::zero(); n * n];
    identity(&mut h);
    let width = bounds
        .lower()
        .iter()
        .zip(bounds.upper())
        .map(|(&a, &b)| b - a)
        .fold(T::zero(), T::max);
    let tiny = T::lit(1e-12) * width;

    for _ in 0..MAX_ITER {
        let mut dir: Vec<T> = (0..n).map(|i| -dot(&h[i * n..(i + 1) * n], &g)).collect();
        if !(dot(&dir, &g) < T::zero()) {
            identity(&mut h);
            dir = g.iter().map(|&v| -v).collect();
        }
        let mut t = T::one();
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let mut xn: Vec<T> = x.iter().zip(&dir).map(|(&a, &d)| a + t * d).collect();
            bounds.project(&mut xn);
            let step: Vec<T> = xn.iter().zip(&x).map(|(&a, &b)| a - b).collect();
            let fn_ = f(&xn)?;
            if fn_ <= fx + T::lit(1e-4) * dot(&g, &step) && fn_ < fx {
                accepted = Some((xn, fn_, step));
                break;
            }
            t *= T::lit(0.5);
        }
        let Some((xn, fn_, s)) = accepted else { break };
        if dot(&s, &s).sqrt() < tiny {
            x = xn;
            fx = fn_;
            break;
        }
        let gn = gradient(f, &xn, bounds)?;
        let yv: Vec<T> = gn.iter().zip(&g).map(|(&a, &b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > T::lit(1e-12) * dot(&s, &s).sqrt() * dot(&yv, &yv).sqrt() {
            // H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ
            let rho = T::one() / sy;
            let hy: Vec<T> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], &yv)).collect();
            let yhy = dot(&yv, &hy);
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
        }
        let done = fx - fn_ <= T::lit(1e-12) * (T::one() + fx.abs());
        x = xn;
        fx = fn_;
        g = gn;
        if done {
            break;
        }
    }
    Ok((x, fx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn abs1(d: &[f64]) -> Result<f64> {
        Ok(d[0].abs())
    }

    fn euclid(d: &[f64]) -> Result<f64> {
        Ok(d.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    #[test]
    fn single_point_cell() {
        let bx = ParamBox::symmetric_unit(2).unwrap();
        let p = [0.3, -0.6];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = locate(&[&p[..]], &euclid, &bx, &[0.0, 0.0], 5, &mut rng).unwrap();
        assert!((r.point[0] - 0.3).abs() < 1e-9 && (r.point[1] + 0.6).abs() < 1e-9, "{:?}", r.point);
    }

    #[test]
    fn geometric_median_in_one_dimension() {
        let bx = ParamBox::new(vec![-1.0], vec![4.0]).unwrap();
        let pts = [[0.0], [0.0], [3.0]];
        let cell: Vec<&[f64]> = pts.iter().map(|p| &p[..]).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = locate(&cell, &abs1, &bx, &[1.5], 5, &mut rng).unwrap();
        // grid search oracle
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=500 {
            let x = -1.0 + 0.01 * k as f64;
            let v = cell_objective(&cell, &abs1, &[x]).unwrap();
            if v < best.0 {
                best = (v, x);
            }
        }
        assert!((r.point[0] - best.1).abs() < 1e-6, "{:?} vs {}", r.point, best.1);
        assert!(r.improved);
    }

    #[test]
    fn symmetric_pair_locates_off_the_data() {
        let bx = ParamBox::symmetric_unit(1).unwrap();
        let pts = [[-1.0], [1.0]];
        let cell: Vec<&[f64]> = pts.iter().map(|p| &p[..]).collect();
        let sq = |d: &[f64]| -> Result<f64> { Ok(1.0 + d[0] * d[0]) };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = locate(&cell, &sq, &bx, &[1.0], 5, &mut rng).unwrap();
        assert!(r.point[0].abs() < 1e-6);
    }

    #[test]
    fn never_worse_than_centroid_or_incumbent() {
        let bx = ParamBox::symmetric_unit(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let skew = |d: &[f64]| -> Result<f64> { Ok(1.0 + (d[0].abs() * 3.0 + d[1] * d[1] + 0.2 * d[2].abs()).sqrt()) };
        for _ in 0..50 {
            let k = rng.gen_range(1..12);
            let pts: Vec<Vec<f64>> = (0..k).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let cell: Vec<&[f64]> = pts.iter().map(|p| &p[..]).collect();
            let inc: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = locate(&cell, &skew, &bx, &inc, 5, &mut rng).unwrap();
            let mut centroid = vec![0.0; 3];
            for p in &pts {
                for i in 0..3 {
                    centroid[i] += p[i] / k as f64;
                }
            }
            assert!(r.objective <= cell_objective(&cell, &skew, &centroid).unwrap() + 1e-12);
            assert!(r.objective <= cell_objective(&cell, &skew, &inc).unwrap() + 1e-12);
            assert!(bx.contains(&r.point));
        }
    }
}
