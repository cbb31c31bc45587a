use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{grid_side, Sampling};
use crate::error::{Error, Result};
use crate::param_space::{ParamBox, ParamSet};

/// Halton bases must fit in a `u8`; there are 54 primes below 256.
pub const HALTON_MAX_DIMS: usize = 54;

fn primes(count: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(count);
    let mut p = 2u16;
    while out.len() < count {
        if (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0) {
            out.push(p as u8);
        }
        p += 1;
    }
    out
}

/// `n` points in `[−1, 1]^dims`, deterministic in `seed`.
pub fn sample_points(n: usize, dims: usize, sampling: Sampling, seed: u64) -> Result<Vec<Vec<f64>>> {
    if dims == 0 {
        return Err(Error::InvalidArgument("need at least one dimension".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = match sampling {
        Sampling::Uniform => (0..n).map(|_| (0..dims).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect(),
        Sampling::Halton => {
            if dims > HALTON_MAX_DIMS {
                return Err(Error::InvalidArgument(format!("halton sampling supports at most {HALTON_MAX_DIMS} dimensions")));
            }
            let bases = primes(dims);
            // random shift modulo one keeps the low discrepancy and decorrelates seeds
            let shift: Vec<f64> = (0..dims).map(|_| rng.gen::<f64>()).collect();
            (1..=n)
                .map(|i| {
                    bases
                        .iter()
                        .zip(&shift)
                        .map(|(&b, &s)| 2.0 * (halton::number(b, i) + s).fract() - 1.0)
                        .collect()
                })
                .collect()
        }
        Sampling::Grid => {
            let side = grid_side(n, dims)?;
            let coord = |k: usize| -1.0 + (2 * k + 1) as f64 / side as f64;
            (0..n)
                .map(|mut i| {
                    (0..dims)
                        .map(|_| {
                            let c = coord(i % side);
                            i /= side;
                            c
                        })
                        .collect()
                })
                .collect()
        }
    };
    Ok(points)
}

pub fn sample_w(n: usize, dims: usize, sampling: Sampling, seed: u64) -> Result<ParamSet<f64>> {
    ParamSet::new(ParamBox::symmetric_unit(dims)?, sample_points(n, dims, sampling, seed)?)
}
