//! The random hashing transform H(ξ) = h(ξ) + (0,…,0,b/T)* and its bucket
//! geometry.
//!
//! h is the shear [[I_{d-1}, 0], [V_h, h_d]] with each h_i an odd integer
//! drawn uniformly from [0, ⌊F/η⌋], and b an integer drawn uniformly from
//! [0, TF/s). Distinct tone frequencies land in well-separated last
//! coordinates with high probability, which is what buckets exploit.

use crate::error::{Error, Result};
use crate::model::{AlgorithmParams, SignalSpec};
use crate::util::fold_into;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Sign convention for the b-translation, frozen by the dense-DFT argmax pin:
/// the modulated signal f_H(x) = f(h*x)·e^{2πi·SIGMA_B·b·x_d/T} concentrates
/// its spectrum at fold_F(h(w) + SIGMA_B·(0,…,0,b/T)).
pub const SIGMA_B: i8 = -1;

/// One draw of the hashing randomness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashDraw {
    /// Odd integers h_1..h_d, each in [0, ⌊F/η⌋].
    pub h: Vec<i64>,
    /// Translation numerator, integer in [0, TF/s).
    pub b: i64,
    /// The frozen sign convention; recorded in run documents.
    pub sigma_b: i8,
}

impl HashDraw {
    pub fn dim(&self) -> usize {
        self.h.len()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma_b as f64
    }

    pub fn validate(&self, params: &AlgorithmParams) -> Result<()> {
        let bound = (params.f_band / params.eta).floor() as i64;
        if self.h.is_empty() {
            return Err(Error::InvalidArgument("empty hash vector".into()));
        }
        for &hi in &self.h {
            if hi < 1 || hi > bound || hi % 2 == 0 {
                return Err(Error::InvalidArgument(format!(
                    "hash entry {hi} is not an odd integer in [0, {bound}]"
                )));
            }
        }
        let b_range = params.tf_i() / params.s as i64;
        if self.b < 0 || self.b >= b_range {
            return Err(Error::InvalidArgument(format!(
                "translation b = {} outside [0, {b_range})",
                self.b
            )));
        }
        if self.sigma_b != 1 && self.sigma_b != -1 {
            return Err(Error::InvalidArgument("sigma_b must be ±1".into()));
        }
        Ok(())
    }
}

/// Index of one of the s frequency slabs, 1-based as in bucket B_j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BucketIndex(pub u32);

impl BucketIndex {
    pub fn new(j: u32, s: u32) -> Result<Self> {
        if j < 1 || j > s {
            return Err(Error::InvalidArgument(format!(
                "bucket index {j} outside [1, {s}]"
            )));
        }
        Ok(BucketIndex(j))
    }
}

/// Draws h_1..h_d uniformly from the odd integers of [0, ⌊F/η⌋] and b
/// uniformly from the integers of [0, TF/s).
pub fn draw_hash<R: Rng>(rng: &mut R, d: usize, params: &AlgorithmParams) -> Result<HashDraw> {
    let bound = (params.f_band / params.eta).floor() as i64;
    if bound < 1 {
        return Err(Error::InfeasibleParameters(format!(
            "no odd integers in [0, floor(F/eta)] = [0, {bound}]"
        )));
    }
    // Odd integers in [0, bound]: 1, 3, …; there are (bound + 1) / 2 of them.
    let odd_count = (bound + 1) / 2;
    let h = (0..d)
        .map(|_| 2 * rng.gen_range(0..odd_count) + 1)
        .collect();
    let b_range = params.tf_i() / params.s as i64;
    let b = rng.gen_range(0..b_range);
    Ok(HashDraw {
        h,
        b,
        sigma_b: SIGMA_B,
    })
}

fn check_dim(hash: &HashDraw, v: &[f64]) -> Result<()> {
    if v.len() != hash.h.len() {
        return Err(Error::DimensionMismatch {
            expected: hash.h.len(),
            got: v.len(),
        });
    }
    Ok(())
}

/// h(ξ): identity on the first d-1 coordinates, last coordinate Σ_i h_i·ξ_i.
pub fn apply_h(hash: &HashDraw, xi: &[f64]) -> Result<Vec<f64>> {
    check_dim(hash, xi)?;
    let mut out = xi.to_vec();
    out[xi.len() - 1] = hash.h.iter().zip(xi).map(|(&hi, &x)| hi as f64 * x).sum();
    Ok(out)
}

/// h⁻¹(ξ) via the closed form [[I, 0], [-V_h/h_d, 1/h_d]].
pub fn apply_h_inv(hash: &HashDraw, xi: &[f64]) -> Result<Vec<f64>> {
    check_dim(hash, xi)?;
    let d = xi.len();
    let h_d = hash.h[d - 1] as f64;
    let mut out = xi.to_vec();
    let partial: f64 = hash.h[..d - 1]
        .iter()
        .zip(xi)
        .map(|(&hi, &x)| hi as f64 * x)
        .sum();
    out[d - 1] = (xi[d - 1] - partial) / h_d;
    Ok(out)
}

/// h* x = (x_1 + h_1·x_d, …, x_{d-1} + h_{d-1}·x_d, h_d·x_d).
pub fn apply_h_star(hash: &HashDraw, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(hash, x)?;
    let d = x.len();
    let x_d = x[d - 1];
    let mut out: Vec<f64> = (0..d - 1).map(|i| x[i] + hash.h[i] as f64 * x_d).collect();
    out.push(hash.h[d - 1] as f64 * x_d);
    Ok(out)
}

/// (h⁻¹)* x, the exact inverse of h*: first coordinates x_i - h_i·x_d/h_d,
/// last coordinate x_d/h_d.
pub fn apply_h_inv_star(hash: &HashDraw, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(hash, x)?;
    let d = x.len();
    let h_d = hash.h[d - 1] as f64;
    let x_d = x[d - 1];
    let mut out: Vec<f64> = (0..d - 1)
        .map(|i| x[i] - hash.h[i] as f64 * x_d / h_d)
        .collect();
    out.push(x_d / h_d);
    Ok(out)
}

/// Where the hashed spectrum of a tone at `w` lands: each coordinate of
/// h(w) + σ_b·(0,…,0,b/T) folded into [-F/2, F/2).
pub fn hashed_frequency(hash: &HashDraw, params: &AlgorithmParams, w: &[f64]) -> Result<Vec<f64>> {
    let mut out = apply_h(hash, w)?;
    let d = out.len();
    out[d - 1] += hash.sigma() * hash.b as f64 / params.t_span;
    for c in out.iter_mut() {
        *c = fold_into(*c, params.f_band);
    }
    Ok(out)
}

/// The unique j with TF(j-1)/s - TF/2 <= index < TFj/s - TF/2.
pub fn bucket_of(xi_d_index: i64, params: &AlgorithmParams) -> Result<BucketIndex> {
    let half = params.half_tf_i();
    if xi_d_index < -half || xi_d_index >= half {
        return Err(Error::InvalidArgument(format!(
            "grid index {xi_d_index} outside [-TF/2, TF/2) = [{}, {})",
            -half, half
        )));
    }
    let width = params.bucket_width_i();
    let j = ((xi_d_index + half) / width) as u32 + 1;
    Ok(BucketIndex(j))
}

/// Half-open integer index range [lo, hi) of bucket j on the last coordinate.
pub fn bucket_index_range(j: BucketIndex, params: &AlgorithmParams) -> (i64, i64) {
    let half = params.half_tf_i();
    let width = params.bucket_width_i();
    let lo = (j.0 as i64 - 1) * width - half;
    (lo, lo + width)
}

/// min over tone pairs of |fold_F((h(w_i - w_j))_d)|; +∞ when k < 2.
pub fn min_last_coord_gap(
    hash: &HashDraw,
    spec: &SignalSpec,
    params: &AlgorithmParams,
) -> Result<f64> {
    let mut min_gap = f64::INFINITY;
    for i in 0..spec.tones.len() {
        for j in (i + 1)..spec.tones.len() {
            let diff: Vec<f64> = spec.tones[i]
                .frequency
                .iter()
                .zip(&spec.tones[j].frequency)
                .map(|(a, b)| a - b)
                .collect();
            let hashed = apply_h(hash, &diff)?;
            let gap = fold_into(hashed[hashed.len() - 1], params.f_band).abs();
            min_gap = min_gap.min(gap);
        }
    }
    Ok(min_gap)
}
