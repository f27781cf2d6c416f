//! Brute-force oracles and statistical verifiers: dense multidimensional DFT
//! at desk scale, spectral-concentration and isolation probes, recovery
//! scoring, and the dimension-scaling sweep.
//!
//! Grid conventions: Γ1 = {x/F : x ∈ Z^d ∩ [-TF/2, TF/2)^d} in time,
//! Γ2 = {ξ/T : ξ ∈ Z^d ∩ [-TF/2, TF/2)^d} in frequency;
//! forward normalization 1/(√T·F)^d, inverse 1/(√T)^d.

use crate::error::{Error, Result};
use crate::model::{
    derive_params, AlgorithmParams, GeneratorSettings, ModelConstants, ParamOverrides, SignalSpec,
    ToneOracle,
};
use crate::pipeline::{recover_with_restarts, RecoveryResult};
use crate::seeding::{rng_for, Stream};
use crate::util::{euclid_dist, fold_into, unit_phase};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Hard cap on dense-grid cells: desk-scale oracles only.
pub const DENSE_GRID_MAX_CELLS: u128 = 1 << 22;

/// A complex field on the d-dimensional integer grid [-TF/2, TF/2)^d,
/// row-major with the first coordinate slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrid {
    pub d: usize,
    pub tf: i64,
    pub values: Vec<Complex64>,
}

impl DenseGrid {
    pub fn cells(d: usize, tf: i64) -> u128 {
        (tf as u128).pow(d as u32)
    }

    pub fn zeros(d: usize, tf: i64) -> Result<Self> {
        let cells = Self::cells(d, tf);
        if cells > DENSE_GRID_MAX_CELLS {
            return Err(Error::GridTooLarge(format!(
                "(TF)^d = {tf}^{d} = {cells} cells exceeds the desk-scale guard of {DENSE_GRID_MAX_CELLS}"
            )));
        }
        Ok(DenseGrid {
            d,
            tf,
            values: vec![Complex64::new(0.0, 0.0); cells as usize],
        })
    }

    /// Flat index of the signed multi-index (entries in [-TF/2, TF/2)).
    pub fn flat(&self, idx: &[i64]) -> usize {
        let half = self.tf / 2;
        let mut flat = 0usize;
        for &m in idx {
            debug_assert!((-half..half).contains(&m));
            flat = flat * self.tf as usize + (m + half) as usize;
        }
        flat
    }

    /// Signed multi-index of a flat position.
    pub fn unflat(&self, mut flat: usize) -> Vec<i64> {
        let half = self.tf / 2;
        let mut idx = vec![0i64; self.d];
        for slot in idx.iter_mut().rev() {
            *slot = (flat % self.tf as usize) as i64 - half;
            flat /= self.tf as usize;
        }
        idx
    }

    /// Fills the grid from a function of the signed multi-index.
    pub fn fill(d: usize, tf: i64, mut f: impl FnMut(&[i64]) -> Complex64) -> Result<Self> {
        let mut grid = Self::zeros(d, tf)?;
        let mut idx = vec![-tf / 2; d];
        for flat in 0..grid.values.len() {
            grid.values[flat] = f(&idx);
            // Odometer increment, last coordinate fastest.
            for c in (0..d).rev() {
                idx[c] += 1;
                if idx[c] < tf / 2 {
                    break;
                }
                idx[c] = -tf / 2;
            }
        }
        Ok(grid)
    }

    pub fn argmax_norm(&self) -> Vec<i64> {
        let mut best = 0usize;
        let mut best_val = -1.0;
        for (i, v) in self.values.iter().enumerate() {
            let n = v.norm_sqr();
            if n > best_val {
                best_val = n;
                best = i;
            }
        }
        self.unflat(best)
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    /// One separable pass: out[r] = Σ_m in[m]·ω^{m·r} along `axis`, where
    /// ω = e^{sign·2πi/TF}, scaled by `norm`.
    fn axis_transform(&mut self, axis: usize, sign: f64, norm: f64) {
        let tf = self.tf as usize;
        let half = self.tf / 2;
        // Twiddle table ω^p for p ∈ [0, TF).
        let twiddle: Vec<Complex64> = (0..tf)
            .map(|p| unit_phase(sign * p as f64 / tf as f64))
            .collect();
        let stride: usize = tf.pow((self.d - 1 - axis) as u32);
        let mut line_in = vec![Complex64::new(0.0, 0.0); tf];
        let outer = self.values.len() / tf;
        for block in 0..outer {
            // Starting flat offset of this line.
            let hi = block / stride;
            let lo = block % stride;
            let base = hi * stride * tf + lo;
            for (m, slot) in line_in.iter_mut().enumerate() {
                *slot = self.values[base + m * stride];
            }
            for r in 0..tf {
                let r_signed = r as i64 - half;
                let mut acc = Complex64::new(0.0, 0.0);
                for (m, &val) in line_in.iter().enumerate() {
                    let m_signed = m as i64 - half;
                    let p = (m_signed * r_signed).rem_euclid(self.tf) as usize;
                    acc += val * twiddle[p];
                }
                self.values[base + r * stride] = acc * norm;
            }
        }
    }
}

/// Forward DFT Γ1 → Γ2 with normalization 1/(√T·F)^d.
pub fn dense_dft(time_grid: &DenseGrid, params: &AlgorithmParams) -> Result<DenseGrid> {
    let mut out = time_grid.clone();
    let norm = 1.0 / (params.t_span.sqrt() * params.f_band);
    for axis in 0..out.d {
        out.axis_transform(axis, -1.0, norm);
    }
    Ok(out)
}

/// Inverse DFT Γ2 → Γ1 with normalization 1/(√T)^d.
pub fn dense_idft(spectrum: &DenseGrid, params: &AlgorithmParams) -> Result<DenseGrid> {
    let mut out = spectrum.clone();
    let norm = 1.0 / params.t_span.sqrt();
    for axis in 0..out.d {
        out.axis_transform(axis, 1.0, norm);
    }
    Ok(out)
}

/// Samples an arbitrary function of the Γ1 point x = m/F onto a dense grid.
pub fn sample_time_grid(
    d: usize,
    params: &AlgorithmParams,
    mut f: impl FnMut(&[f64]) -> Complex64,
) -> Result<DenseGrid> {
    let mut point = vec![0.0; d];
    DenseGrid::fill(d, params.tf_i(), |idx| {
        for (p, &m) in point.iter_mut().zip(idx) {
            *p = m as f64 / params.f_band;
        }
        f(&point)
    })
}

/// Fraction of a single tone's spectral energy OUTSIDE the Euclidean ball of
/// radius β/2 around its frequency, measured on the dense Γ2 grid.
pub fn concentration_probe(spec: &SignalSpec, params: &AlgorithmParams, beta: f64) -> Result<f64> {
    if spec.tones.len() != 1 {
        return Err(Error::InvalidArgument(
            "concentration probe takes a single-tone spec".into(),
        ));
    }
    if !(beta > 0.0 && beta < params.f_band / 2.0) {
        return Err(Error::InvalidArgument(format!(
            "beta = {beta} outside (0, F/2)"
        )));
    }
    let w = &spec.tones[0].frequency;
    let oracle = ToneOracle::new(spec);
    let time = sample_time_grid(spec.d, params, |x| {
        crate::model::SignalOracle::eval(&oracle, x)
    })?;
    let spectrum = dense_dft(&time, params)?;
    let total = spectrum.energy();
    if total == 0.0 {
        return Ok(0.0);
    }
    let mut inside = 0.0;
    let radius_sq = (beta / 2.0) * (beta / 2.0);
    let mut idx;
    for flat in 0..spectrum.values.len() {
        idx = spectrum.unflat(flat);
        let dist_sq: f64 = idx
            .iter()
            .zip(w)
            .map(|(&r, &wi)| {
                let diff = fold_into(r as f64 / params.t_span - wi, params.f_band);
                diff * diff
            })
            .sum();
        if dist_sq <= radius_sq {
            inside += spectrum.values[flat].norm_sqr();
        }
    }
    Ok(1.0 - inside / total)
}

/// Monte-Carlo estimates of the isolation events over repeated hash draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationReport {
    pub trials: u32,
    pub seed: u64,
    /// Fraction with min pair gap ≤ 2F/s (the collision event).
    pub p_collision: f64,
    /// Fraction where some tone's hashed β-ball straddles a bucket boundary.
    pub p_boundary: f64,
    /// Fraction where every ball sits strictly inside its own bucket.
    pub p_isolated: f64,
    pub collision_count: u32,
    pub boundary_count: u32,
    pub isolated_count: u32,
}

/// Buckets touched by the hashed β-ball of one tone. Cells are treated as
/// the width-1/T intervals around Γ2 points, matching how leakage lands.
fn ball_buckets(
    hash: &crate::hashing::HashDraw,
    params: &AlgorithmParams,
    w: &[f64],
    beta: f64,
) -> Result<Vec<u32>> {
    let hashed = crate::hashing::apply_h(hash, w)?;
    let center = hashed[w.len() - 1] + hash.sigma() * hash.b as f64 / params.t_span;
    let norm_h: f64 = hash
        .h
        .iter()
        .map(|&hi| (hi * hi) as f64)
        .sum::<f64>()
        .sqrt();
    let radius = beta / 2.0 * norm_h;
    let lo = ((center - radius) * params.t_span + 0.5).floor() as i64;
    let hi = ((center + radius) * params.t_span + 0.5).floor() as i64;
    let half = params.half_tf_i();
    let mut buckets: Vec<u32> = Vec::new();
    for n in lo..=hi {
        let folded = n.rem_euclid(params.tf_i()) - half;
        let folded = if folded >= half {
            folded - params.tf_i()
        } else {
            folded
        };
        let j = crate::hashing::bucket_of(folded, params)?.0;
        if !buckets.contains(&j) {
            buckets.push(j);
        }
    }
    Ok(buckets)
}

/// Runs `trials` hash draws and tallies collision / boundary / isolation
/// frequencies for the instance's tones.
pub fn isolation_probe(
    spec: &SignalSpec,
    params: &AlgorithmParams,
    trials: u32,
    seed: u64,
) -> Result<IsolationReport> {
    let threshold = 2.0 * params.f_band / params.s as f64;
    let mut collision_count = 0;
    let mut boundary_count = 0;
    let mut isolated_count = 0;
    for trial in 0..trials {
        let mut rng = rng_for(seed, Stream::Probe(trial));
        let hash = crate::hashing::draw_hash(&mut rng, spec.d, params)?;
        let gap = crate::hashing::min_last_coord_gap(&hash, spec, params)?;
        if gap <= threshold {
            collision_count += 1;
        }
        let mut any_straddle = false;
        let mut landed: Vec<u32> = Vec::new();
        for tone in &spec.tones {
            let buckets = ball_buckets(&hash, params, &tone.frequency, params.beta)?;
            if buckets.len() > 1 {
                any_straddle = true;
            }
            landed.push(buckets[0]);
        }
        if any_straddle {
            boundary_count += 1;
        } else {
            landed.sort_unstable();
            landed.dedup();
            if landed.len() == spec.tones.len() {
                isolated_count += 1;
            }
        }
    }
    let n = trials as f64;
    Ok(IsolationReport {
        trials,
        seed,
        p_collision: collision_count as f64 / n,
        p_boundary: boundary_count as f64 / n,
        p_isolated: isolated_count as f64 / n,
        collision_count,
        boundary_count,
        isolated_count,
    })
}

/// One matched (truth, recovered) pair with its errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub truth: usize,
    pub recovered: usize,
    pub freq_error: f64,
    pub freq_error_inf: f64,
    pub amp_error: f64,
}

/// Greedy nearest-pair matching between ground truth and a recovery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub matched: Vec<MatchedPair>,
    pub recall: f64,
    pub max_freq_error: f64,
    pub max_freq_error_inf: f64,
    pub max_amp_error: f64,
}

/// Greedily pairs recovered tones to ground-truth tones by ascending
/// frequency distance, accepting pairs below `threshold`.
pub fn match_score(truth: &SignalSpec, result: &RecoveryResult, threshold: f64) -> MatchReport {
    let k = truth.tones.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (ti, t) in truth.tones.iter().enumerate() {
        for (ri, r) in result.recovered.iter().enumerate() {
            let dist = euclid_dist(&t.frequency, &r.frequency);
            if dist <= threshold {
                pairs.push((dist, ti, ri));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut truth_used = vec![false; k];
    let mut rec_used = vec![false; result.recovered.len()];
    let mut matched = Vec::new();
    for (dist, ti, ri) in pairs {
        if truth_used[ti] || rec_used[ri] {
            continue;
        }
        truth_used[ti] = true;
        rec_used[ri] = true;
        let t = &truth.tones[ti];
        let r = &result.recovered[ri];
        let inf = t
            .frequency
            .iter()
            .zip(&r.frequency)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        matched.push(MatchedPair {
            truth: ti,
            recovered: ri,
            freq_error: dist,
            freq_error_inf: inf,
            amp_error: (t.amplitude - r.amplitude).norm(),
        });
    }
    let recall = if k == 0 {
        1.0
    } else {
        matched.len() as f64 / k as f64
    };
    MatchReport {
        recall,
        max_freq_error: matched.iter().map(|m| m.freq_error).fold(0.0, f64::max),
        max_freq_error_inf: matched.iter().map(|m| m.freq_error_inf).fold(0.0, f64::max),
        max_amp_error: matched.iter().map(|m| m.amp_error).fold(0.0, f64::max),
        matched,
    }
}

/// Fixed-ratio policy for the dimension sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPolicy {
    pub k: usize,
    #[serde(rename = "M")]
    pub m: f64,
    pub eta: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "Aprime")]
    pub a_prime: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub overrides: ParamOverrides,
    pub restarts: u32,
}

impl SweepPolicy {
    /// Desk-scale defaults: T = 64, F = 256, s = 16, N frozen per the
    /// importance-sampler calibration.
    pub fn desk_scale(k: usize) -> Self {
        SweepPolicy {
            k,
            m: 1.0,
            eta: 0.5,
            a: 1.0,
            a_prime: 0.5,
            epsilon: 0.1,
            delta: 0.1,
            overrides: ParamOverrides {
                t_span: Some(64.0),
                f_band: Some(256.0),
                s: Some(16),
                n_conv: Some(crate::verify::thresholds::CONV_SAMPLE_COUNT_DESK),
                ..Default::default()
            },
            restarts: 4,
        }
    }

    pub fn constants(&self, d: usize) -> ModelConstants {
        ModelConstants {
            k: self.k,
            d,
            m: self.m,
            eta: self.eta,
            a: self.a,
            a_prime: self.a_prime,
        }
    }
}

/// One sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub d: usize,
    pub k: usize,
    pub seed: u64,
    pub samples: u64,
    pub wall_time_ms: f64,
    pub recall: f64,
    pub max_freq_error: f64,
    pub failed: bool,
}

/// Runs recover_with_restarts on a fresh instance per (d, seed).
pub fn sweep(dims: &[usize], policy: &SweepPolicy, seeds: &[u64]) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(dims.len() * seeds.len());
    for &d in dims {
        let constants = policy.constants(d);
        let params = derive_params(&constants, policy.epsilon, policy.delta, &policy.overrides)?;
        for &seed in seeds {
            let settings = GeneratorSettings {
                k: policy.k,
                d,
                m: policy.m,
                eta: policy.eta,
                a: policy.a,
                a_prime: policy.a_prime,
            };
            let mut gen_rng = rng_for(seed, Stream::Generator);
            let spec = generate_for_sweep(&settings, &mut gen_rng)?;
            let oracle = ToneOracle::new(&spec);
            let row =
                match recover_with_restarts(&oracle, &constants, &params, seed, policy.restarts) {
                    Ok(result) => {
                        let report = match_score(&spec, &result, policy.eta / 4.0);
                        SweepRow {
                            d,
                            k: policy.k,
                            seed,
                            samples: result.total_signal_samples,
                            wall_time_ms: result.wall_time_ms,
                            recall: report.recall,
                            max_freq_error: report.max_freq_error,
                            failed: report.recall < 1.0,
                        }
                    }
                    Err(_) => SweepRow {
                        d,
                        k: policy.k,
                        seed,
                        samples: 0,
                        wall_time_ms: 0.0,
                        recall: 0.0,
                        max_freq_error: f64::NAN,
                        failed: true,
                    },
                };
            rows.push(row);
        }
    }
    Ok(rows)
}

fn generate_for_sweep(
    settings: &GeneratorSettings,
    rng: &mut impl rand::Rng,
) -> Result<SignalSpec> {
    crate::model::generate_spec(settings, rng)
}

/// CSV with the fixed header d,k,seed,samples,wall_time_ms,recall,max_freq_error,failed.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("d,k,seed,samples,wall_time_ms,recall,max_freq_error,failed\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.d, r.k, r.seed, r.samples, r.wall_time_ms, r.recall, r.max_freq_error, r.failed
        ));
    }
    out
}

/// Least-squares slope of ln(samples) against ln(d) over the rows.
pub fn fit_loglog_slope(rows: &[SweepRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.samples > 0)
        .map(|r| ((r.d as f64).ln(), (r.samples as f64).ln()))
        .collect();
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let var: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    cov / var
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Tone;
    use crate::testutil::{desk_params, one_tone_spec};
    use rand::Rng;

    #[test]
    fn dft_of_delta_is_flat() {
        let params = desk_params(2.0, 8.0, 4); // TF = 16
        let tf = params.tf_i();
        let mut grid = DenseGrid::zeros(2, tf).unwrap();
        let origin = grid.flat(&[0, 0]);
        grid.values[origin] = Complex64::new(1.0, 0.0);
        let spec = dense_dft(&grid, &params).unwrap();
        let expect = 1.0 / (params.t_span.sqrt() * params.f_band).powi(2);
        for v in &spec.values {
            assert!((v - Complex64::new(expect, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_of_forward_is_identity() {
        let params = desk_params(2.0, 8.0, 4);
        let mut rng = rng_for(3, Stream::Probe(0));
        let grid = DenseGrid::fill(2, params.tf_i(), |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
        .unwrap();
        let spec = dense_dft(&grid, &params).unwrap();
        let back = dense_idft(&spec, &params).unwrap();
        let worst = grid
            .values
            .iter()
            .zip(&back.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-10, "round trip error {worst}");
    }

    #[test]
    fn dft_matches_definitional_double_sum() {
        // Tiny grid: compare the separable path against the O((TF)^{2d})
        // definition directly.
        let params = desk_params(2.0, 4.0, 2); // TF = 8
        let tf = params.tf_i();
        let mut rng = rng_for(4, Stream::Probe(0));
        let grid = DenseGrid::fill(2, tf, |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
        .unwrap();
        let fast = dense_dft(&grid, &params).unwrap();
        let norm = 1.0 / (params.t_span.sqrt() * params.f_band).powi(2);
        for flat_out in 0..fast.values.len() {
            let r = fast.unflat(flat_out);
            let mut acc = Complex64::new(0.0, 0.0);
            for flat_in in 0..grid.values.len() {
                let m = grid.unflat(flat_in);
                let cycles = -(m[0] * r[0] + m[1] * r[1]) as f64 / params.tf();
                acc += grid.values[flat_in] * unit_phase(cycles);
            }
            acc *= norm;
            assert!(
                (acc - fast.values[flat_out]).norm() < 1e-12,
                "mismatch at {r:?}"
            );
        }
    }

    #[test]
    fn parseval_identity() {
        let params = desk_params(2.0, 8.0, 4);
        let mut rng = rng_for(5, Stream::Probe(0));
        let grid = DenseGrid::fill(2, params.tf_i(), |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
        .unwrap();
        let spec = dense_dft(&grid, &params).unwrap();
        let time_side = grid.energy() / params.tf().powi(2);
        let freq_side = spec.energy() / params.t_span.powi(2);
        assert!(
            (time_side - freq_side).abs() <= 1e-9 * time_side.max(1.0),
            "{time_side} vs {freq_side}"
        );
    }

    #[test]
    fn grid_guard_refuses_oversized() {
        let err = DenseGrid::zeros(2, 1 << 12).unwrap_err();
        assert!(matches!(err, Error::GridTooLarge(_)));
    }

    #[test]
    fn concentration_on_grid_tone_is_zero() {
        let params = desk_params(2.0, 8.0, 4);
        // Frequency exactly on Γ2: w = (1/T, 3/T) = (0.5, 1.5).
        let spec = one_tone_spec(Complex64::new(1.0, 0.0), vec![0.5, -1.5]);
        let frac = concentration_probe(&spec, &params, 2.0 / params.t_span + 1e-9).unwrap();
        assert!(frac.abs() < 1e-12, "on-grid fraction {frac}");
    }

    #[test]
    fn concentration_amplitude_invariant() {
        let params = desk_params(2.0, 8.0, 4);
        let w = vec![0.53, -1.21];
        let f1 = concentration_probe(
            &one_tone_spec(Complex64::new(0.2, 0.1), w.clone()),
            &params,
            1.0,
        )
        .unwrap();
        let f2 =
            concentration_probe(&one_tone_spec(Complex64::new(2.0, 1.0), w), &params, 1.0).unwrap();
        assert!((f1 - f2).abs() < 1e-12);
    }

    #[test]
    fn isolation_single_tone_never_collides() {
        let params = desk_params(4.0, 64.0, 8);
        let spec = one_tone_spec(Complex64::new(1.0, 0.0), vec![0.3, 0.8]);
        let report = isolation_probe(&spec, &params, 200, 9).unwrap();
        assert_eq!(report.p_collision, 0.0);
        assert!(report.p_isolated > 0.9);
        // Reproducibility: identical seed, identical counts.
        let again = isolation_probe(&spec, &params, 200, 9).unwrap();
        assert_eq!(report, again);
    }

    #[test]
    fn match_score_cases() {
        let spec = crate::testutil::spec_from_tones(
            vec![
                Tone::new(Complex64::new(1.0, 0.0), vec![0.3, 0.4]),
                Tone::new(Complex64::new(0.8, 0.0), vec![-0.5, 0.9]),
            ],
            1.0,
            0.6,
        );
        let exact = RecoveryResult {
            params: desk_params(2.0, 8.0, 4),
            hash: crate::hashing::HashDraw {
                h: vec![1, 1],
                b: 0,
                sigma_b: crate::hashing::SIGMA_B,
            },
            recovered: spec.tones.clone(),
            diagnostics: crate::pipeline::RunDiagnostics {
                per_bucket: vec![],
                attempts: 1,
            },
            wall_time_ms: 0.0,
            total_signal_samples: 0,
            seed: 0,
        };
        let report = match_score(&spec, &exact, 0.15);
        assert_eq!(report.recall, 1.0);
        assert_eq!(report.max_freq_error, 0.0);
        assert_eq!(report.max_amp_error, 0.0);

        let mut empty = exact.clone();
        empty.recovered.clear();
        assert_eq!(match_score(&spec, &empty, 0.15).recall, 0.0);

        let mut perturbed = exact;
        perturbed.recovered[1].frequency[0] += 0.01;
        let report = match_score(&spec, &perturbed, 0.15);
        assert_eq!(report.recall, 1.0);
        assert!((report.max_freq_error - 0.01).abs() < 1e-12);
        assert!((report.max_freq_error_inf - 0.01).abs() < 1e-12);
    }

    #[test]
    fn csv_header_is_pinned() {
        let rows = vec![SweepRow {
            d: 2,
            k: 2,
            seed: 1,
            samples: 100,
            wall_time_ms: 1.5,
            recall: 1.0,
            max_freq_error: 0.001,
            failed: false,
        }];
        let csv = sweep_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "d,k,seed,samples,wall_time_ms,recall,max_freq_error,failed"
        );
        assert_eq!(lines.next().unwrap(), "2,2,1,100,1.5,1,0.001,false");
    }

    #[test]
    fn loglog_slope_of_power_law() {
        let rows: Vec<SweepRow> = [2usize, 4, 8, 16]
            .iter()
            .map(|&d| SweepRow {
                d,
                k: 2,
                seed: 0,
                samples: (d as u64).pow(3) * 1000,
                wall_time_ms: 0.0,
                recall: 1.0,
                max_freq_error: 0.0,
                failed: false,
            })
            .collect();
        let slope = fit_loglog_slope(&rows);
        assert!((slope - 3.0).abs() < 1e-9);
    }
}
