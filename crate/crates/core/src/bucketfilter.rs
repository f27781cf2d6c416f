//! Bucket-restricted convolution F⁻¹[X_j·F[f_H]] evaluated at arbitrary
//! points: an exact direct sum over all TF lattice shifts as the oracle path,
//! and the log-scale importance-sampled estimator as the production path.
//!
//! The direct sum collapses, because X_j depends only on the last coordinate,
//! to Σ_z f_H(x - (0,…,0,z/F)) v₂(z) with v₂ the bucket's Dirichlet weight.
//! The sampled path replaces the sum by an expectation over t ~ U(-1/2, 1/2)
//! with z(t) = ⌊sgn(t)((TF/2+1)^{2|t|} - 1)⌋ and weight
//! v(t) = 2·ln(TF/2+1)·(TF/2+1)^{2|t|}·v₂(z(t)).

use crate::error::{Error, Result};
use crate::hashing::{apply_h_star, BucketIndex, HashDraw};
use crate::model::{AlgorithmParams, SignalOracle};
use crate::seeding::{rng_for, Stream};
use crate::util::{sgn, unit_phase};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::atomic::{AtomicU64, Ordering};

/// f_H(x) = f(h*x)·e^{2πi·σ_b·b·x_d/T}.
pub fn fh_eval(
    oracle: &dyn SignalOracle,
    hash: &HashDraw,
    params: &AlgorithmParams,
    x: &[f64],
) -> Result<Complex64> {
    let hashed = apply_h_star(hash, x)?;
    let cycles = hash.sigma() * hash.b as f64 * x[x.len() - 1] / params.t_span;
    Ok(oracle.eval(&hashed) * unit_phase(cycles))
}

/// Closed-form bucket weight v₂(y, j); the y = 0 branch returns 1/s.
///
/// Equals (1/TF)·Σ e^{2πi·y·r/TF} over the integer indices r of bucket j.
pub fn v2_weight(y: i64, j: BucketIndex, params: &AlgorithmParams) -> Complex64 {
    let s = params.s as f64;
    if y == 0 {
        return Complex64::new(1.0 / s, 0.0);
    }
    let tf = params.tf();
    debug_assert!(y >= -params.half_tf_i() && y < params.half_tf_i());
    let yf = y as f64;
    // e^{-πi·y} = (-1)^y exactly for integer y.
    let alt = if y % 2 == 0 { 1.0 } else { -1.0 };
    let numerator =
        alt * (unit_phase(yf * (j.0 as f64 - 1.0) / s) - unit_phase(yf * j.0 as f64 / s));
    let denominator = tf * (Complex64::new(1.0, 0.0) - unit_phase(yf / tf));
    if denominator.norm() < 1e-9 {
        // Only y ≡ 0 (mod TF) degenerates, and the range excludes it.
        panic!("internal error: v2 denominator underflow at y = {y}, TF = {tf}");
    }
    numerator / denominator
}

/// Log-scale grid point z(t) = ⌊sgn(t)·((TF/2+1)^{2|t|} - 1)⌋ with
/// sgn(0) = +1. A floating-point landing on +TF/2 wraps to -TF/2, consistent
/// with mod-TF index arithmetic.
pub fn z_of_t(t: f64, params: &AlgorithmParams) -> i64 {
    let half = params.half_tf_i();
    let grown = (params.tf() / 2.0 + 1.0).powf(2.0 * t.abs()) - 1.0;
    let mut z = (sgn(t) * grown).floor() as i64;
    if z >= half {
        z = -half;
    }
    if z < -half {
        z = -half;
    }
    z
}

/// The density-compensation factor 2·ln(TF/2+1)·(TF/2+1)^{2|t|}.
pub fn importance_scale(t: f64, params: &AlgorithmParams) -> f64 {
    let base = params.tf() / 2.0 + 1.0;
    2.0 * base.ln() * base.powf(2.0 * t.abs())
}

/// v(t) = importance_scale(t)·v₂(z(t), j).
pub fn importance_weight(t: f64, j: BucketIndex, params: &AlgorithmParams) -> Complex64 {
    importance_scale(t, params) * v2_weight(z_of_t(t, params), j, params)
}

/// The shared sample set 𝒯: N independent draws from U(-1/2, 1/2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceSampleSet {
    pub t_points: Vec<f64>,
    pub seed: u64,
}

/// Draws 𝒯 from the run's dedicated stream.
pub fn draw_importance_samples(seed: u64, params: &AlgorithmParams) -> ImportanceSampleSet {
    let mut rng = rng_for(seed, Stream::ImportanceSamples);
    draw_importance_samples_with(&mut rng, seed, params)
}

pub fn draw_importance_samples_with<R: Rng>(
    rng: &mut R,
    seed: u64,
    params: &AlgorithmParams,
) -> ImportanceSampleSet {
    let t_points = (0..params.n_conv)
        .map(|_| loop {
            let t = rng.gen::<f64>() - 0.5;
            if t > -0.5 {
                break t;
            }
        })
        .collect();
    ImportanceSampleSet { t_points, seed }
}

static PREPARED_IDS: AtomicU64 = AtomicU64::new(0);

/// 𝒯 with its per-sample grid points and scale factors precomputed.
pub struct PreparedSamples {
    pub t: Vec<f64>,
    pub z: Vec<i64>,
    pub scale: Vec<f64>,
    pub seed: u64,
    id: u64,
}

impl ImportanceSampleSet {
    pub fn validate(&self, params: &AlgorithmParams) -> Result<()> {
        if self.t_points.len() != params.n_conv {
            return Err(Error::InvalidArgument(format!(
                "sample set has {} points, N = {}",
                self.t_points.len(),
                params.n_conv
            )));
        }
        if self.t_points.iter().any(|t| t.abs() >= 0.5) {
            return Err(Error::InvalidArgument(
                "sample points must lie in (-1/2, 1/2)".into(),
            ));
        }
        Ok(())
    }

    pub fn prepare(&self, params: &AlgorithmParams) -> PreparedSamples {
        PreparedSamples {
            t: self.t_points.clone(),
            z: self.t_points.iter().map(|&t| z_of_t(t, params)).collect(),
            scale: self
                .t_points
                .iter()
                .map(|&t| importance_scale(t, params))
                .collect(),
            seed: self.seed,
            id: PREPARED_IDS.fetch_add(1, Ordering::Relaxed),
        }
    }
}

/// Grid guard for the O(TF)-per-point direct sum.
pub const DIRECT_CONV_MAX_TF: i64 = 1 << 18;

type WeightCache<K> = HashMap<K, Rc<Vec<Complex64>>>;

/// Convolution evaluator bound to one (oracle, hash draw, parameter set).
///
/// All signal access goes through `SignalOracle::eval_line` along the fixed
/// direction -h/F forced by the last-coordinate shifts; per-bucket weight
/// tables fold v₂ together with the b-modulation of the shifted argument.
pub struct BucketFilter<'a> {
    oracle: &'a dyn SignalOracle,
    pub hash: &'a HashDraw,
    pub params: &'a AlgorithmParams,
    dir: Vec<f64>,
    direct_offsets: RefCell<Option<Rc<Vec<i64>>>>,
    direct_weights: RefCell<WeightCache<u32>>,
    sampled_weights: RefCell<WeightCache<(u32, u64)>>,
    scratch: RefCell<Vec<Complex64>>,
}

impl<'a> BucketFilter<'a> {
    pub fn new(
        oracle: &'a dyn SignalOracle,
        hash: &'a HashDraw,
        params: &'a AlgorithmParams,
    ) -> Result<Self> {
        hash.validate(params)?;
        if oracle.dim() != hash.dim() {
            return Err(Error::DimensionMismatch {
                expected: hash.dim(),
                got: oracle.dim(),
            });
        }
        let dir = hash
            .h
            .iter()
            .map(|&hi| -(hi as f64) / params.f_band)
            .collect();
        Ok(BucketFilter {
            oracle,
            hash,
            params,
            dir,
            direct_offsets: RefCell::new(None),
            direct_weights: RefCell::new(HashMap::new()),
            sampled_weights: RefCell::new(HashMap::new()),
            scratch: RefCell::new(Vec::new()),
        })
    }

    pub fn fh(&self, x: &[f64]) -> Result<Complex64> {
        fh_eval(self.oracle, self.hash, self.params, x)
    }

    /// e^{2πi·σ_b·b·x_d/T}: the modulation of f_H at the unshifted point.
    #[inline]
    fn outer_modulation(&self, x_d: f64) -> Complex64 {
        unit_phase(self.hash.sigma() * self.hash.b as f64 * x_d / self.params.t_span)
    }

    /// Per-shift weight v₂(z, j)·e^{-2πi·σ_b·b·z/(TF)}: the z-dependent part
    /// of the shifted modulation folded into the bucket weight.
    #[inline]
    fn fused_weight(&self, z: i64, j: BucketIndex) -> Complex64 {
        let shift_cycles = -self.hash.sigma() * self.hash.b as f64 * z as f64 / self.params.tf();
        v2_weight(z, j, self.params) * unit_phase(shift_cycles)
    }

    fn direct_offsets(&self) -> Rc<Vec<i64>> {
        let mut slot = self.direct_offsets.borrow_mut();
        slot.get_or_insert_with(|| {
            let half = self.params.half_tf_i();
            Rc::new((-half..half).collect())
        })
        .clone()
    }

    fn direct_weights(&self, j: BucketIndex) -> Rc<Vec<Complex64>> {
        let mut map = self.direct_weights.borrow_mut();
        map.entry(j.0)
            .or_insert_with(|| {
                let half = self.params.half_tf_i();
                Rc::new((-half..half).map(|z| self.fused_weight(z, j)).collect())
            })
            .clone()
    }

    fn sampled_weights(&self, j: BucketIndex, samples: &PreparedSamples) -> Rc<Vec<Complex64>> {
        let mut map = self.sampled_weights.borrow_mut();
        map.entry((j.0, samples.id))
            .or_insert_with(|| {
                let inv_n = 1.0 / samples.z.len() as f64;
                Rc::new(
                    samples
                        .z
                        .iter()
                        .zip(&samples.scale)
                        .map(|(&z, &scale)| self.fused_weight(z, j) * (scale * inv_n))
                        .collect(),
                )
            })
            .clone()
    }

    /// Exact direct sum Σ_z f_H(x - (0,…,0,z/F))·v₂(z) over all TF shifts.
    /// Oracle path: O(TF·k) per point, desk-scale grids only.
    pub fn conv_direct(&self, x: &[f64], j: BucketIndex) -> Result<Complex64> {
        let base = apply_h_star(self.hash, x)?;
        self.conv_direct_prehashed(&base, x[x.len() - 1], j)
    }

    /// Direct sum given base = h*x and the original last coordinate x_d.
    pub fn conv_direct_prehashed(
        &self,
        base: &[f64],
        x_d: f64,
        j: BucketIndex,
    ) -> Result<Complex64> {
        if self.params.tf_i() > DIRECT_CONV_MAX_TF {
            return Err(Error::GridTooLarge(format!(
                "direct convolution needs TF <= {DIRECT_CONV_MAX_TF}, got {}",
                self.params.tf_i()
            )));
        }
        let offsets = self.direct_offsets();
        let weights = self.direct_weights(j);
        let mut vals = self.scratch.borrow_mut();
        self.oracle.eval_line(base, &self.dir, &offsets, &mut vals);
        let acc = dot(&vals, &weights);
        Ok(self.outer_modulation(x_d) * acc)
    }

    /// Direct sums for several buckets at one point, sharing the single
    /// oracle pass over the TF shifts (the f_H values do not depend on j).
    pub fn conv_direct_prehashed_multi(
        &self,
        base: &[f64],
        x_d: f64,
        buckets: &[BucketIndex],
        out: &mut Vec<Complex64>,
    ) -> Result<()> {
        if self.params.tf_i() > DIRECT_CONV_MAX_TF {
            return Err(Error::GridTooLarge(format!(
                "direct convolution needs TF <= {DIRECT_CONV_MAX_TF}, got {}",
                self.params.tf_i()
            )));
        }
        let offsets = self.direct_offsets();
        let weights: Vec<Rc<Vec<Complex64>>> =
            buckets.iter().map(|&j| self.direct_weights(j)).collect();
        let mut vals = self.scratch.borrow_mut();
        self.oracle.eval_line(base, &self.dir, &offsets, &mut vals);
        let outer = self.outer_modulation(x_d);
        out.clear();
        match weights.as_slice() {
            [w1, w2] => {
                let (a, b) = dot2(&vals, w1, w2);
                out.push(outer * a);
                out.push(outer * b);
            }
            ws => {
                for w in ws {
                    out.push(outer * dot(&vals, w));
                }
            }
        }
        Ok(())
    }

    /// (1/N)·Σ_i f_H(x - (0,…,0,z(t_i)/F))·v(t_i).
    pub fn conv_sampled(
        &self,
        x: &[f64],
        j: BucketIndex,
        samples: &PreparedSamples,
    ) -> Result<Complex64> {
        let base = apply_h_star(self.hash, x)?;
        Ok(self.conv_sampled_prehashed(&base, x[x.len() - 1], j, samples))
    }

    /// Sampled estimator given base = h*x and the original last coordinate.
    pub fn conv_sampled_prehashed(
        &self,
        base: &[f64],
        x_d: f64,
        j: BucketIndex,
        samples: &PreparedSamples,
    ) -> Complex64 {
        let weights = self.sampled_weights(j, samples);
        let mut vals = self.scratch.borrow_mut();
        self.oracle
            .eval_line(base, &self.dir, &samples.z, &mut vals);
        let acc = dot(&vals, &weights);
        self.outer_modulation(x_d) * acc
    }
}

#[inline]
fn dot(vals: &[Complex64], weights: &[Complex64]) -> Complex64 {
    debug_assert_eq!(vals.len(), weights.len());
    let mut re = 0.0;
    let mut im = 0.0;
    for (v, w) in vals.iter().zip(weights) {
        re += v.re * w.re - v.im * w.im;
        im += v.re * w.im + v.im * w.re;
    }
    Complex64::new(re, im)
}

/// Two weighted sums over one pass of the values.
#[inline]
fn dot2(vals: &[Complex64], w1: &[Complex64], w2: &[Complex64]) -> (Complex64, Complex64) {
    debug_assert_eq!(vals.len(), w1.len());
    debug_assert_eq!(vals.len(), w2.len());
    let mut re1 = 0.0;
    let mut im1 = 0.0;
    let mut re2 = 0.0;
    let mut im2 = 0.0;
    for ((v, a), b) in vals.iter().zip(w1).zip(w2) {
        re1 += v.re * a.re - v.im * a.im;
        im1 += v.re * a.im + v.im * a.re;
        re2 += v.re * b.re - v.im * b.im;
        im2 += v.re * b.im + v.im * b.re;
    }
    (Complex64::new(re1, im1), Complex64::new(re2, im2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashing::SIGMA_B;
    use crate::model::{SignalSpec, Tone, ToneOracle};
    use crate::testutil::{desk_params, one_tone_spec, spec_from_tones};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn hash2(h: [i64; 2], b: i64) -> HashDraw {
        HashDraw {
            h: h.to_vec(),
            b,
            sigma_b: SIGMA_B,
        }
    }

    #[test]
    fn v2_zero_branch() {
        let params = desk_params(2.0, 8.0, 4);
        let j = BucketIndex(2);
        let v = v2_weight(0, j, &params);
        assert_eq!(v, Complex64::new(0.25, 0.0));
    }

    #[test]
    fn v2_full_spectrum_sum() {
        // Σ_j v₂(y, j) telescopes to the full-grid Dirichlet sum:
        // 0 for y ≠ 0, 1 for y = 0.
        let params = desk_params(2.0, 16.0, 8);
        let half = params.half_tf_i();
        for y in -half..half {
            let total: Complex64 = (1..=params.s)
                .map(|j| v2_weight(y, BucketIndex(j), &params))
                .sum();
            let expect = if y == 0 { 1.0 } else { 0.0 };
            assert!(
                (total - Complex64::new(expect, 0.0)).norm() < 1e-12,
                "y = {y}: {total}"
            );
        }
    }

    #[test]
    fn v2_matches_geometric_sum_oracle() {
        let params = desk_params(2.0, 16.0, 4);
        let half = params.half_tf_i();
        let tf = params.tf();
        for j in 1..=params.s {
            let (lo, hi) = crate::hashing::bucket_index_range(BucketIndex(j), &params);
            for y in -half..half {
                let direct: Complex64 = (lo..hi)
                    .map(|r| unit_phase(y as f64 * r as f64 / tf))
                    .sum::<Complex64>()
                    / tf;
                let closed = v2_weight(y, BucketIndex(j), &params);
                assert!(
                    (closed - direct).norm() < 1e-12,
                    "j = {j}, y = {y}: closed {closed} vs direct {direct}"
                );
            }
        }
    }

    #[test]
    fn z_of_t_examples() {
        let params = desk_params(2.0, 8.0, 4); // TF = 16
        assert_eq!(z_of_t(0.0, &params), 0);
        // t = -1/4: ⌊-(9^{1/2} - 1)⌋ = -2.
        assert_eq!(z_of_t(-0.25, &params), -2);
        // Wrap of the measure-zero endpoint per mod-TF arithmetic.
        assert_eq!(z_of_t(0.5, &params), -8);
        assert_eq!(z_of_t(-0.5, &params), -8);
        // All outputs stay on the grid.
        for i in 0..1000 {
            let t = -0.4999 + 0.9998 * i as f64 / 999.0;
            let z = z_of_t(t, &params);
            assert!((-8..8).contains(&z), "t = {t} gave z = {z}");
        }
    }

    #[test]
    fn importance_weight_at_zero() {
        let params = desk_params(2.0, 8.0, 4);
        let v = importance_weight(0.0, BucketIndex(1), &params);
        let expect = 2.0 * (params.tf() / 2.0 + 1.0).ln() / params.s as f64;
        assert!((v - Complex64::new(expect, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn importance_scale_integrates_to_unit_mass_per_grid_point() {
        // On each interval {t : z(t) = z} the scale integrates to exactly 1,
        // which is what makes E[v(t)·g(z(t))] = Σ_z v₂(z)·g(z).
        let params = desk_params(2.0, 16.0, 4); // TF = 32
        let big_l = (params.tf() / 2.0 + 1.0).ln();
        for z in [0i64, 1, 2, 7, 14] {
            let t_lo = ((z as f64 + 1.0).ln()) / (2.0 * big_l);
            let t_hi = ((z as f64 + 2.0).ln()) / (2.0 * big_l);
            // Simpson's rule on the scale factor.
            let n = 2000;
            let h = (t_hi - t_lo) / n as f64;
            let mut sum = importance_scale(t_lo, &params) + importance_scale(t_hi, &params);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                sum += w * importance_scale(t_lo + i as f64 * h, &params);
            }
            let integral = sum * h / 3.0;
            assert!(
                (integral - 1.0).abs() < 1e-9,
                "z = {z}: interval mass {integral}"
            );
            // And the interval indeed maps to z.
            assert_eq!(z_of_t(0.5 * (t_lo + t_hi), &params), z);
        }
    }

    #[test]
    fn sup_v_bounded_by_three_log_tf() {
        // sup_t |v(t)| <= 3·ln(TF/2+1): frozen form of the O(ln TF) bound.
        for (t_span, f_band, s) in [(2.0, 8.0, 4u32), (2.0, 32.0, 2), (2.0, 128.0, 8)] {
            let params = desk_params(t_span, f_band, s);
            let cap = 3.0 * (params.tf() / 2.0 + 1.0).ln();
            for j in [1, params.s / 2 + 1, params.s] {
                let mut sup: f64 = 0.0;
                for i in 0..20_000 {
                    let t = -0.49999 + 0.99998 * i as f64 / 19_999.0;
                    sup = sup.max(importance_weight(t, BucketIndex(j), &params).norm());
                }
                assert!(
                    sup <= cap,
                    "TF = {}, j = {j}: sup |v| = {sup} > {cap}",
                    params.tf()
                );
            }
        }
    }

    #[test]
    fn fh_zero_modulation_and_origin() {
        let params = desk_params(2.0, 8.0, 4);
        let spec = spec_from_tones(
            vec![
                Tone::new(Complex64::new(0.4, 0.3), vec![0.25, -0.5]),
                Tone::new(Complex64::new(-0.2, 0.6), vec![-0.75, 0.5]),
            ],
            1.0,
            0.6,
        );
        let oracle = ToneOracle::new(&spec);
        let h0 = hash2([3, 5], 0);
        // b = 0: f_H(x) = f(h*x) exactly.
        for x in [[0.3, -0.7], [0.0, 0.9]] {
            let lhs = fh_eval(&oracle, &h0, &params, &x).unwrap();
            let hx = apply_h_star(&h0, &x).unwrap();
            assert_eq!(lhs, oracle.eval(&hx));
        }
        // x = 0: Σ_j a_j regardless of b.
        let hb = hash2([3, 5], 3);
        let at0 = fh_eval(&oracle, &hb, &params, &[0.0, 0.0]).unwrap();
        let total: Complex64 = spec.tones.iter().map(|t| t.amplitude).sum();
        assert!((at0 - total).norm() < 1e-15);
    }

    #[test]
    fn conv_direct_matches_definitional_sum() {
        let params = desk_params(2.0, 16.0, 4);
        let spec = spec_from_tones(
            vec![
                Tone::new(Complex64::new(0.8, 0.1), vec![0.3, 0.7]),
                Tone::new(Complex64::new(0.2, -0.5), vec![-0.4, -0.9]),
            ],
            1.0,
            0.6,
        );
        let oracle = ToneOracle::new(&spec);
        let hash = hash2([5, 3], 6);
        let filter = BucketFilter::new(&oracle, &hash, &params).unwrap();
        let half = params.half_tf_i();
        for x in [[0.21, -0.67], [-0.93, 0.05]] {
            for j in 1..=params.s {
                let fused = filter.conv_direct(&x, BucketIndex(j)).unwrap();
                let mut naive = Complex64::new(0.0, 0.0);
                for z in -half..half {
                    let shifted = [x[0], x[1] - z as f64 / params.f_band];
                    naive += fh_eval(&oracle, &hash, &params, &shifted).unwrap()
                        * v2_weight(z, BucketIndex(j), &params);
                }
                assert!(
                    (fused - naive).norm() < 1e-9,
                    "j = {j}, x = {x:?}: {fused} vs {naive}"
                );
            }
        }
    }

    #[test]
    fn conv_partition_of_unity() {
        // Σ_j conv_direct(x, j) = f_H(x): the X_j sum to the identity.
        let params = desk_params(2.0, 16.0, 8);
        let spec = spec_from_tones(
            vec![
                Tone::new(Complex64::new(0.8, 0.1), vec![0.3, 0.7]),
                Tone::new(Complex64::new(0.2, -0.5), vec![-0.4, -0.9]),
            ],
            1.0,
            0.6,
        );
        let oracle = ToneOracle::new(&spec);
        let hash = hash2([7, 9], 2);
        let filter = BucketFilter::new(&oracle, &hash, &params).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..8 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let total: Complex64 = (1..=params.s)
                .map(|j| filter.conv_direct(&x, BucketIndex(j)).unwrap())
                .sum();
            let fh = filter.fh(&x).unwrap();
            assert!((total - fh).norm() < 1e-10, "{total} vs {fh}");
        }
    }

    #[test]
    fn conv_on_grid_tone_isolates_exactly() {
        // Choose w, h, b so the hashed frequency sits on the grid: the bucket
        // holding it reproduces f_H exactly and every other bucket is 0.
        let params = desk_params(4.0, 16.0, 4); // TF = 64
        let hash = hash2([3, 1], 8);
        // Hashed last coordinate: 3·w_1 + w_2 - b/T = 0.75 + w_2 - 2.0.
        // Pick w_2 = 0.5: value -0.75, grid index -0.75·T = -3.
        let spec = one_tone_spec(Complex64::new(0.9, -0.4), vec![0.25, 0.5]);
        let oracle = ToneOracle::new(&spec);
        let filter = BucketFilter::new(&oracle, &hash, &params).unwrap();
        let j_star = crate::hashing::bucket_of(-3, &params).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for _ in 0..6 {
            let x = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let fh = filter.fh(&x).unwrap();
            for j in 1..=params.s {
                let c = filter.conv_direct(&x, BucketIndex(j)).unwrap();
                let expect = if j == j_star.0 {
                    fh
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!((c - expect).norm() < 1e-10, "bucket {j}: {c} vs {expect}");
            }
        }
    }

    #[test]
    fn conv_sampled_zero_signal_is_zero() {
        let params = desk_params(2.0, 16.0, 4);
        let spec = SignalSpec {
            d: 2,
            m: 1.0,
            eta: 0.6,
            a: 1.0,
            a_prime: 0.5,
            tones: vec![],
        };
        let oracle = ToneOracle::new(&spec);
        let hash = hash2([3, 5], 1);
        let filter = BucketFilter::new(&oracle, &hash, &params).unwrap();
        let samples = draw_importance_samples(7, &params).prepare(&params);
        let v = filter
            .conv_sampled(&[0.4, -0.2], BucketIndex(2), &samples)
            .unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn sample_set_validation() {
        let params = desk_params(2.0, 16.0, 4);
        let set = draw_importance_samples(3, &params);
        set.validate(&params).unwrap();
        assert_eq!(set.t_points.len(), params.n_conv);
        let bad = ImportanceSampleSet {
            t_points: vec![0.0; params.n_conv - 1],
            seed: 0,
        };
        assert!(bad.validate(&params).is_err());
    }

    #[test]
    fn sampled_weights_match_pointwise_definition() {
        // conv_sampled must equal (1/N)·Σ f_H(x - z(t_i)e_d/F)·v(t_i).
        let params = desk_params(2.0, 16.0, 4);
        let spec = spec_from_tones(
            vec![Tone::new(Complex64::new(0.7, 0.2), vec![0.3, -0.6])],
            1.0,
            0.6,
        );
        let oracle = ToneOracle::new(&spec);
        let hash = hash2([5, 7], 4);
        let filter = BucketFilter::new(&oracle, &hash, &params).unwrap();
        let mut params_small = params.clone();
        params_small.n_conv = 250;
        let set = draw_importance_samples(11, &params_small);
        let samples = set.prepare(&params_small);
        let j = BucketIndex(3);
        let x = [0.37, -0.81];
        let fast = filter.conv_sampled(&x, j, &samples).unwrap();
        let mut naive = Complex64::new(0.0, 0.0);
        for &t in &set.t_points {
            let shifted = [x[0], x[1] - z_of_t(t, &params_small) as f64 / params.f_band];
            naive += fh_eval(&oracle, &hash, &params, &shifted).unwrap()
                * importance_weight(t, j, &params_small);
        }
        naive /= set.t_points.len() as f64;
        assert!((fast - naive).norm() < 1e-10, "{fast} vs {naive}");
    }
}
