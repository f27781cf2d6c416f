//! One-tone frequency and amplitude estimation from black-box samples of a
//! line function g on [-T/2, T/2).
//!
//! After hashing, each bucket line carries (approximately) a single tone
//! a·e^{2πi w t} with |w| ≤ F/2, so a multi-scale lag ladder suffices: the
//! phase of E[g(t+τ)·conj(g(t))] at lag τ is 2πwτ. Stage 0 uses τ = 1/F,
//! where no wrap is possible; each later stage doubles the lag and keeps the
//! unwrap candidate nearest the running estimate, halving the uncertainty,
//! down to a final lag of T/4.

use crate::error::Result;
use crate::model::{AlgorithmParams, ModelConstants};
use crate::util::{fold_into, unit_phase};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// One recovered (frequency, amplitude) readout from a bucket line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToneEstimate {
    /// Folded into [-F/2, F/2).
    pub frequency: f64,
    #[serde(with = "complex_doc")]
    pub amplitude: Complex64,
    /// |amplitude| ≥ gate (the A'/2 rule).
    pub active: bool,
    /// The sample budget ran out before the ladder finished.
    pub truncated: bool,
    pub samples_used: u64,
}

mod complex_doc {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Doc {
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        Doc { re: c.re, im: c.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let doc = Doc::deserialize(d)?;
        Ok(Complex64::new(doc.re, doc.im))
    }
}

/// Estimator knobs. `gate` is the activity threshold (A'/2 in the pipeline).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub t_span: f64,
    pub f_band: f64,
    pub r_per_stage: usize,
    /// Max sampler calls; exceeding it truncates the ladder.
    pub budget: u64,
    pub gate: f64,
}

impl EstimatorConfig {
    /// Number of lag stages: m = 0 ..= ⌈log₂(TF)⌉ - 2.
    pub fn stage_count(&self) -> usize {
        let tf = self.t_span * self.f_band;
        ((tf.log2().ceil() as isize) - 1).max(1) as usize
    }

    /// Sampler calls a full run makes: 2R per lag stage plus R for the
    /// amplitude readout.
    pub fn full_cost(&self) -> u64 {
        (self.stage_count() as u64 * 2 + 1) * self.r_per_stage as u64
    }

    pub fn from_params(params: &AlgorithmParams, constants: &ModelConstants) -> Self {
        let r = r_per_stage(params, constants);
        let mut cfg = EstimatorConfig {
            t_span: params.t_span,
            f_band: params.f_band,
            r_per_stage: r,
            budget: 0,
            gate: constants.a_prime / 2.0,
        };
        cfg.budget = cfg.full_cost();
        cfg
    }
}

/// Per-stage correlation count R = ⌈c_R·ln(ds/δ)/max(0.01, (1-2ε'/A')²)⌉,
/// with ε' = A·ε·√(δ/(ds))/3, the per-line perturbation an isolated bucket
/// is budgeted for.
pub fn r_per_stage(params: &AlgorithmParams, constants: &ModelConstants) -> usize {
    let ds = (constants.d as f64) * params.s as f64;
    let eps_prime = constants.a * params.epsilon * (params.delta / ds).sqrt() / 3.0;
    let guard = (1.0 - 2.0 * eps_prime / constants.a_prime)
        .powi(2)
        .max(0.01);
    let raw = params.c_r * (ds / params.delta).ln() / guard;
    (raw.ceil() as usize).max(1)
}

/// |amplitude| ≥ A'/2. The boundary itself counts as active: the inactive
/// condition is stated strictly.
pub fn detect_active(estimate: &ToneEstimate, a_prime: f64) -> bool {
    estimate.amplitude.norm() >= a_prime / 2.0
}

/// Runs the lag ladder against a black-box sampler defined on [-T/2, T/2).
pub fn estimate_tone<S, R>(
    mut sampler: S,
    cfg: &EstimatorConfig,
    rng: &mut R,
) -> Result<ToneEstimate>
where
    S: FnMut(f64) -> Result<Complex64>,
    R: Rng,
{
    let half_t = cfg.t_span / 2.0;
    let r = cfg.r_per_stage.max(1);
    let stages = cfg.stage_count();
    let mut samples_used = 0u64;
    let mut freq = 0.0f64;

    for m in 0..stages {
        if samples_used + 2 * r as u64 > cfg.budget {
            return Ok(ToneEstimate {
                frequency: fold_into(freq, cfg.f_band),
                amplitude: Complex64::new(0.0, 0.0),
                active: false,
                truncated: true,
                samples_used,
            });
        }
        let lag = 2f64.powi(m as i32) / cfg.f_band;
        let mut corr = Complex64::new(0.0, 0.0);
        for _ in 0..r {
            let t = rng.gen_range(-half_t..half_t - lag);
            corr += sampler(t + lag)? * sampler(t)?.conj();
            samples_used += 2;
        }
        let phase_cycles = corr.arg() / std::f64::consts::TAU;
        if m == 0 {
            // |w| ≤ F/2 keeps |phase| ≤ π at lag 1/F: no wrap possible.
            freq = phase_cycles * cfg.f_band;
        } else {
            // The candidates consistent with this phase are spaced 1/lag
            // apart; keep the one nearest the running estimate.
            let n = (freq * lag - phase_cycles).round();
            freq = (phase_cycles + n) / lag;
        }
    }

    if samples_used + r as u64 > cfg.budget {
        return Ok(ToneEstimate {
            frequency: fold_into(freq, cfg.f_band),
            amplitude: Complex64::new(0.0, 0.0),
            active: false,
            truncated: true,
            samples_used,
        });
    }
    let mut amp = Complex64::new(0.0, 0.0);
    for _ in 0..r {
        let t = rng.gen_range(-half_t..half_t);
        amp += sampler(t)? * unit_phase(-freq * t);
        samples_used += 1;
    }
    amp /= r as f64;

    let frequency = fold_into(freq, cfg.f_band);
    Ok(ToneEstimate {
        frequency,
        amplitude: amp,
        active: amp.norm() >= cfg.gate,
        truncated: false,
        samples_used,
    })
}
