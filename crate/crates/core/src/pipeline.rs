//! End-to-end recovery: loop over buckets, gate on the line-1 amplitude,
//! estimate each coordinate on a fresh random line, Monte-Carlo integrate
//! amplitudes at the recovered frequencies, and deduplicate.
//!
//! All randomness is drawn from per-purpose streams of the master seed, so
//! recovered tones and the signal-sample count are bit-reproducible.

use crate::bucketfilter::{draw_importance_samples_with, BucketFilter, PreparedSamples};
use crate::error::{Error, Result};
use crate::hashing::{draw_hash, BucketIndex, HashDraw};
use crate::linesampler::{draw_line, ConvMode, LineContext, LineSampler};
use crate::model::{AlgorithmParams, CountingOracle, ModelConstants, SignalOracle, Tone};
use crate::seeding::{rng_for_restart, Stream};
use crate::toneest::{detect_active, estimate_tone, EstimatorConfig, ToneEstimate};
use crate::util::{euclid_dist, unit_phase};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Outcome of one bucket's line readouts.
#[derive(Debug, Clone, PartialEq)]
pub enum BucketOutcome {
    /// Gate amplitude below A'/2: nothing (significant) hashed here.
    Inactive,
    /// A line truncated or a coordinate landed outside [-M-η, M+η].
    Failed(String),
    /// Assembled frequency vector plus the gate amplitude from line 1.
    Recovered {
        w: Vec<f64>,
        gate_amplitude: Complex64,
    },
}

/// Per-bucket diagnostics recorded in the run document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketDiag {
    pub bucket: u32,
    pub active: bool,
    pub failed: Option<String>,
    /// g-samples drawn across this bucket's lines.
    pub samples_used: u64,
    /// RNG stream ids of the lines, for replay.
    pub line_seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub per_bucket: Vec<BucketDiag>,
    /// Attempts consumed (1 = no restart needed).
    pub attempts: u32,
}

/// Everything a run reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub params: AlgorithmParams,
    pub hash: HashDraw,
    pub recovered: Vec<Tone>,
    pub diagnostics: RunDiagnostics,
    /// Wall time is inherently nondeterministic; byte-level comparisons of
    /// run documents zero it first.
    pub wall_time_ms: f64,
    pub total_signal_samples: u64,
    pub seed: u64,
}

impl RecoveryResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    /// Canonical form for determinism comparisons: wall time zeroed.
    pub fn to_json_canonical(&self) -> String {
        let mut clone = self.clone();
        clone.wall_time_ms = 0.0;
        clone.to_json()
    }
}

/// Reads one bucket: gate line l = 1 first, then one line per remaining
/// coordinate, each with freshly drawn frozen coordinates.
pub fn recover_bucket<R: Rng>(
    j: BucketIndex,
    filter: &BucketFilter,
    samples: &PreparedSamples,
    constants: &ModelConstants,
    est_cfg: &EstimatorConfig,
    rng: &mut R,
) -> Result<(BucketOutcome, u64)> {
    let d = constants.d;
    let mut samples_used = 0u64;
    let mut freqs = vec![0.0; d];
    let mut gate_amplitude = Complex64::new(0.0, 0.0);

    for l in 1..=d {
        let frozen = draw_line(rng, l, d, filter.params)?;
        let ctx = LineContext { l, frozen, j };
        let line = LineSampler::new(ctx, filter, ConvMode::Sampled(samples))?;
        let est: ToneEstimate = estimate_tone(|t| line.g(t), est_cfg, rng)?;
        samples_used += est.samples_used;
        if est.truncated {
            return Ok((
                BucketOutcome::Failed(format!("line {l} truncated by sample budget")),
                samples_used,
            ));
        }
        if l == 1 {
            if !detect_active(&est, constants.a_prime) {
                return Ok((BucketOutcome::Inactive, samples_used));
            }
            gate_amplitude = est.amplitude;
        }
        freqs[l - 1] = est.frequency;
    }

    // The estimator range [-F/2, F/2) already contains [-M, M]; anything
    // outside the model band marks the bucket failed rather than folding.
    let bound = constants.m + constants.eta;
    if freqs.iter().any(|w| w.abs() > bound) {
        return Ok((
            BucketOutcome::Failed(format!(
                "coordinate outside [-M-eta, M+eta] = [-{bound}, {bound}]"
            )),
            samples_used,
        ));
    }
    Ok((
        BucketOutcome::Recovered {
            w: freqs,
            gate_amplitude,
        },
        samples_used,
    ))
}

/// Amplitude via Monte-Carlo integration of f(t)·e^{-2πi w_o·t} over the box
/// [0, k/ε²]^d with N_a = ⌈c_a·ln(1/δ)·k²A²/ε²⌉ points.
pub fn amplitude_mc<R: Rng>(
    oracle: &dyn SignalOracle,
    constants: &ModelConstants,
    w_o: &[f64],
    params: &AlgorithmParams,
    rng: &mut R,
) -> Result<Complex64> {
    if w_o.len() != constants.d {
        return Err(Error::DimensionMismatch {
            expected: constants.d,
            got: w_o.len(),
        });
    }
    let n_a = amplitude_sample_count(constants, params);
    let side = constants.k as f64 / (params.epsilon * params.epsilon);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut point = vec![0.0; constants.d];
    for _ in 0..n_a {
        let mut cycles = 0.0;
        for (p, w) in point.iter_mut().zip(w_o) {
            *p = rng.gen_range(0.0..=1.0) * side;
            cycles -= w * *p;
        }
        acc += oracle.eval(&point) * unit_phase(cycles);
    }
    Ok(acc / n_a as f64)
}

/// N_a = ⌈c_a·ln(1/δ)·k²A²/ε²⌉. (A², not the printed A'²: Hoeffding on a
/// variable bounded by kA forces the numerator.)
pub fn amplitude_sample_count(constants: &ModelConstants, params: &AlgorithmParams) -> usize {
    let k = constants.k as f64;
    let raw = params.c_a * (1.0 / params.delta).ln() * k * k * constants.a * constants.a
        / (params.epsilon * params.epsilon);
    (raw.ceil() as usize).max(1)
}

/// Greedy clustering: strongest amplitude first, keep a candidate iff its
/// frequency is > η/2 from everything already kept.
pub fn dedupe(candidates: &[(Vec<f64>, Complex64)], eta: f64) -> Vec<Tone> {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        candidates[b]
            .1
            .norm()
            .partial_cmp(&candidates[a].1.norm())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut kept: Vec<Tone> = Vec::new();
    for idx in order {
        let (w, a) = &candidates[idx];
        if kept
            .iter()
            .all(|t| euclid_dist(&t.frequency, w) > eta / 2.0)
        {
            kept.push(Tone::new(*a, w.clone()));
        }
    }
    kept
}

/// One full pass: hash draw, shared sample set, all buckets, amplitude
/// integration, dedupe.
fn run_attempt(
    counted: &CountingOracle,
    constants: &ModelConstants,
    params: &AlgorithmParams,
    seed: u64,
    attempt: u32,
) -> Result<(Vec<Tone>, Vec<BucketDiag>, HashDraw)> {
    let mut hash_rng = rng_for_restart(seed, attempt, Stream::Hash);
    let hash = draw_hash(&mut hash_rng, constants.d, params)?;
    let mut t_rng = rng_for_restart(seed, attempt, Stream::ImportanceSamples);
    let samples = draw_importance_samples_with(&mut t_rng, seed, params).prepare(params);
    let filter = BucketFilter::new(counted, &hash, params)?;
    let est_cfg = EstimatorConfig::from_params(params, constants);

    let mut candidates: Vec<(Vec<f64>, Complex64)> = Vec::new();
    let mut per_bucket = Vec::with_capacity(params.s as usize);
    for j in 1..=params.s {
        let stream = Stream::Bucket(j);
        let mut rng = rng_for_restart(seed, attempt, stream);
        let (outcome, samples_used) = recover_bucket(
            BucketIndex(j),
            &filter,
            &samples,
            constants,
            &est_cfg,
            &mut rng,
        )?;
        let line_seeds: Vec<u64> = (0..constants.d as u64)
            .map(|l| ((attempt as u64) << 40) | (0x1_0000 + j as u64) | (l << 32))
            .collect();
        let (active, failed) = match &outcome {
            BucketOutcome::Inactive => (false, None),
            BucketOutcome::Failed(reason) => (false, Some(reason.clone())),
            BucketOutcome::Recovered { .. } => (true, None),
        };
        per_bucket.push(BucketDiag {
            bucket: j,
            active,
            failed,
            samples_used,
            line_seeds,
        });
        if let BucketOutcome::Recovered { w, gate_amplitude } = outcome {
            candidates.push((w, gate_amplitude));
        }
    }

    // Amplitudes per surviving candidate, then dedupe on the refined values.
    let mut refined: Vec<(Vec<f64>, Complex64)> = Vec::with_capacity(candidates.len());
    for (i, (w, _gate)) in candidates.into_iter().enumerate() {
        let mut rng = rng_for_restart(seed, attempt, Stream::Amplitude(i as u32));
        let a = amplitude_mc(counted, constants, &w, params, &mut rng)?;
        refined.push((w, a));
    }
    let recovered = dedupe(&refined, constants.eta);
    Ok((recovered, per_bucket, hash))
}

/// Single-draw recovery (the plain algorithm: one hash, one pass).
pub fn recover_all(
    oracle: &dyn SignalOracle,
    constants: &ModelConstants,
    params: &AlgorithmParams,
    seed: u64,
) -> Result<RecoveryResult> {
    recover_with_restarts(oracle, constants, params, seed, 1)
}

/// Runs up to `max_attempts` independent passes, keeping the first whose
/// recovered count reaches k (k is a model constant, so failure is
/// detectable without ground truth). Success amplifies as 1-(failure)^r.
pub fn recover_with_restarts(
    oracle: &dyn SignalOracle,
    constants: &ModelConstants,
    params: &AlgorithmParams,
    seed: u64,
    max_attempts: u32,
) -> Result<RecoveryResult> {
    params.validate()?;
    if oracle.dim() != constants.d {
        return Err(Error::DimensionMismatch {
            expected: constants.d,
            got: oracle.dim(),
        });
    }
    let started = std::time::Instant::now();
    let counted = CountingOracle::new(oracle);
    let attempts = max_attempts.max(1);
    let mut last: Option<(Vec<Tone>, Vec<BucketDiag>, HashDraw)> = None;
    let mut used = 0;
    for attempt in 0..attempts {
        used = attempt + 1;
        let outcome = run_attempt(&counted, constants, params, seed, attempt)?;
        let done = outcome.0.len() == constants.k;
        last = Some(outcome);
        if done {
            break;
        }
    }
    let (recovered, per_bucket, hash) = last.expect("at least one attempt runs");
    Ok(RecoveryResult {
        params: params.clone(),
        hash,
        recovered,
        diagnostics: RunDiagnostics {
            per_bucket,
            attempts: used,
        },
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        total_signal_samples: counted.samples_taken(),
        seed,
    })
}
