//! Signal model: tones, instance specs, derived algorithm parameters, and the
//! black-box oracle interface the recovery pipeline samples through.
//!
//! The signal is f(t) = Σ_j a_j · e^{2πi w_j·t} with t ∈ R^d, each frequency
//! w_j ∈ [-M, M]^d, amplitudes A' ≤ |a_j| ≤ A, and pairwise Euclidean
//! frequency gap > η.

use crate::error::{Error, Result};
use crate::util::{
    euclid_dist, finite_positive, is_pow2_f64, next_pow2_f64, next_pow2_u64, unit_phase,
};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

/// One complex exponential a·e^{2πi w·t}.
#[derive(Debug, Clone, PartialEq)]
pub struct Tone {
    pub amplitude: Complex64,
    /// Frequency vector, length d, each coordinate in [-M, M].
    pub frequency: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ToneDoc {
    re: f64,
    im: f64,
    w: Vec<f64>,
}

impl Serialize for Tone {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ToneDoc {
            re: self.amplitude.re,
            im: self.amplitude.im,
            w: self.frequency.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tone {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = ToneDoc::deserialize(d)?;
        Ok(Tone {
            amplitude: Complex64::new(doc.re, doc.im),
            frequency: doc.w,
        })
    }
}

impl Tone {
    pub fn new(amplitude: Complex64, frequency: Vec<f64>) -> Self {
        Tone {
            amplitude,
            frequency,
        }
    }
}

/// Ground-truth instance: the tone list plus the model constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub d: usize,
    #[serde(rename = "M")]
    pub m: f64,
    pub eta: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "Aprime")]
    pub a_prime: f64,
    pub tones: Vec<Tone>,
}

/// The model constants an algorithm run is allowed to know: everything about
/// the instance except the tones themselves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    pub k: usize,
    pub d: usize,
    pub m: f64,
    pub eta: f64,
    pub a: f64,
    pub a_prime: f64,
}

impl SignalSpec {
    pub fn k(&self) -> usize {
        self.tones.len()
    }

    pub fn constants(&self) -> ModelConstants {
        ModelConstants {
            k: self.tones.len(),
            d: self.d,
            m: self.m,
            eta: self.eta,
            a: self.a,
            a_prime: self.a_prime,
        }
    }

    /// Checks every documented invariant of the instance.
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidArgument(format!(
                "d must be >= 2 (the hashing block structure needs it), got {}",
                self.d
            )));
        }
        if self.tones.is_empty() {
            return Err(Error::InvalidArgument("spec has no tones (k >= 1)".into()));
        }
        if !finite_positive(self.m) || !finite_positive(self.eta) {
            return Err(Error::InvalidArgument("M and eta must be positive".into()));
        }
        if !(0.0 < self.a_prime && self.a_prime <= self.a) {
            return Err(Error::InvalidArgument(
                "amplitude bounds must satisfy 0 < Aprime <= A".into(),
            ));
        }
        for (i, tone) in self.tones.iter().enumerate() {
            if tone.frequency.len() != self.d {
                return Err(Error::DimensionMismatch {
                    expected: self.d,
                    got: tone.frequency.len(),
                });
            }
            if tone.frequency.iter().any(|w| w.abs() > self.m) {
                return Err(Error::InvalidArgument(format!(
                    "tone {i} has a frequency coordinate outside [-M, M]"
                )));
            }
            let mag = tone.amplitude.norm();
            if mag < self.a_prime - 1e-9 || mag > self.a + 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "tone {i} amplitude magnitude {mag} outside [Aprime, A]"
                )));
            }
        }
        for i in 0..self.tones.len() {
            for j in (i + 1)..self.tones.len() {
                let dist = euclid_dist(&self.tones[i].frequency, &self.tones[j].frequency);
                if dist <= self.eta {
                    return Err(Error::InvalidArgument(format!(
                        "tones {i} and {j} are {dist} apart, need > eta = {}",
                        self.eta
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("bad signal spec document: {e}")))
    }
}

/// Σ_j a_j·e^{2πi w_j·t}, exact to machine precision.
pub fn eval_signal(spec: &SignalSpec, t: &[f64]) -> Result<Complex64> {
    if t.len() != spec.d {
        return Err(Error::DimensionMismatch {
            expected: spec.d,
            got: t.len(),
        });
    }
    Ok(eval_tones(&spec.tones, t))
}

#[inline]
fn eval_tones(tones: &[Tone], t: &[f64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for tone in tones {
        let cycles: f64 = tone.frequency.iter().zip(t).map(|(w, x)| w * x).sum();
        acc += tone.amplitude * unit_phase(cycles);
    }
    acc
}

/// Discretization parameters driving a run: time span T, grid bandwidth F,
/// bucket count s, concentration radius β, and the importance-sample count N,
/// together with the tunable constant multipliers in front of each formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmParams {
    #[serde(rename = "T")]
    pub t_span: f64,
    #[serde(rename = "F")]
    pub f_band: f64,
    pub s: u32,
    pub beta: f64,
    #[serde(rename = "N")]
    pub n_conv: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub eta: f64,
    pub c_s: f64,
    #[serde(rename = "c_T")]
    pub c_t: f64,
    #[serde(rename = "c_F")]
    pub c_f: f64,
    #[serde(rename = "c_N")]
    pub c_n: f64,
    pub c_a: f64,
    #[serde(rename = "c_R")]
    pub c_r: f64,
}

impl AlgorithmParams {
    /// T·F: points per grid axis. Always an even positive integer.
    pub fn tf(&self) -> f64 {
        self.t_span * self.f_band
    }

    pub fn tf_i(&self) -> i64 {
        self.tf() as i64
    }

    pub fn half_tf_i(&self) -> i64 {
        self.tf_i() / 2
    }

    /// Bucket width in integer grid units, TF/s.
    pub fn bucket_width_i(&self) -> i64 {
        self.tf_i() / self.s as i64
    }

    pub fn validate(&self) -> Result<()> {
        if !is_pow2_f64(self.t_span) || !is_pow2_f64(self.f_band) {
            return Err(Error::InfeasibleParameters(format!(
                "T = {} and F = {} must be powers of two",
                self.t_span, self.f_band
            )));
        }
        if !(self.s > 1) || !self.s.is_power_of_two() {
            return Err(Error::InfeasibleParameters(format!(
                "s = {} must be a power of two with s > 1",
                self.s
            )));
        }
        if (self.s as f64) >= self.f_band {
            return Err(Error::InfeasibleParameters(format!(
                "need s < F, got s = {}, F = {}",
                self.s, self.f_band
            )));
        }
        if !finite_positive(self.eta) || self.t_span <= 1.0 / self.eta {
            return Err(Error::InfeasibleParameters(format!(
                "need T > 1/eta, got T = {}, eta = {}",
                self.t_span, self.eta
            )));
        }
        let tf = self.tf();
        if tf < 2.0 || tf.fract() != 0.0 {
            return Err(Error::InfeasibleParameters(format!(
                "T*F = {tf} must be an even integer >= 2"
            )));
        }
        // Grid indices must stay exactly representable in f64.
        if tf > 2f64.powi(52) {
            return Err(Error::InfeasibleParameters(format!(
                "T*F = {tf} exceeds the 2^52 grid-index range"
            )));
        }
        if self.n_conv == 0 {
            return Err(Error::InfeasibleParameters("N must be >= 1".into()));
        }
        if !finite_positive(self.beta) || self.beta >= self.f_band / 2.0 {
            return Err(Error::InfeasibleParameters(format!(
                "beta = {} must lie in (0, F/2)",
                self.beta
            )));
        }
        if !(0.0 < self.delta && self.delta < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "delta = {} must lie in (0, 1/2)",
                self.delta
            )));
        }
        if !(0.0 < self.epsilon && self.epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon = {} must lie in (0, 1)",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// The epsilon upper bound min{1, η, A'/4, 1/(4A²)}, enforced literally.
    pub fn epsilon_bound(constants: &ModelConstants) -> f64 {
        1f64.min(constants.eta)
            .min(constants.a_prime / 4.0)
            .min(1.0 / (4.0 * constants.a * constants.a))
    }
}

/// Optional replacements for derived parameter values. Desk-scale runs rely
/// on these: the full T formula is astronomically large.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamOverrides {
    #[serde(rename = "T")]
    pub t_span: Option<f64>,
    #[serde(rename = "F")]
    pub f_band: Option<f64>,
    pub s: Option<u32>,
    pub beta: Option<f64>,
    #[serde(rename = "N")]
    pub n_conv: Option<usize>,
    pub c_s: Option<f64>,
    #[serde(rename = "c_T")]
    pub c_t: Option<f64>,
    #[serde(rename = "c_F")]
    pub c_f: Option<f64>,
    #[serde(rename = "c_N")]
    pub c_n: Option<f64>,
    pub c_a: Option<f64>,
    #[serde(rename = "c_R")]
    pub c_r: Option<f64>,
}

/// Derives (T, F, s, β, N) from the model constants:
///   s = next_pow2(c_s·√d·k²/δ)
///   F = next_pow2(c_F·max(k²M/δ, √d·M/ε))
///   T = next_pow2(c_T·k⁴·d^{5/2}·(ds/(εδ))²/(η·δ²))
///   β = η·δ/(√d·k·s)
///   N = ⌈c_N·k²A²·ln²(TF)·ln²(1/δ)/ε²⌉
/// Every field is individually overridable.
pub fn derive_params(
    constants: &ModelConstants,
    epsilon: f64,
    delta: f64,
    overrides: &ParamOverrides,
) -> Result<AlgorithmParams> {
    if !(0.0 < delta && delta < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "delta = {delta} must lie in (0, 1/2)"
        )));
    }
    let eps_max = AlgorithmParams::epsilon_bound(constants);
    if !(0.0 < epsilon && epsilon < eps_max) {
        return Err(Error::InvalidArgument(format!(
            "epsilon = {epsilon} must lie in (0, {eps_max}) = (0, min{{1, eta, A'/4, 1/(4A^2)}})"
        )));
    }
    let (k, d) = (constants.k as f64, constants.d as f64);
    let sqrt_d = d.sqrt();

    let c_s = overrides.c_s.unwrap_or(1.0);
    let c_t = overrides.c_t.unwrap_or(1.0);
    let c_f = overrides.c_f.unwrap_or(1.0);
    let c_n = overrides.c_n.unwrap_or(1.0);
    let c_a = overrides.c_a.unwrap_or(1.0);
    let c_r = overrides.c_r.unwrap_or(1.0);

    let s = match overrides.s {
        Some(s) => s,
        None => {
            let raw = c_s * sqrt_d * k * k / delta;
            next_pow2_u64(raw.max(2.0)) as u32
        }
    };
    let f_band = match overrides.f_band {
        Some(f) => f,
        None => {
            let raw = c_f * (k * k * constants.m / delta).max(sqrt_d * constants.m / epsilon);
            next_pow2_f64(raw)
        }
    };
    let t_span = match overrides.t_span {
        Some(t) => t,
        None => {
            let ratio = d * s as f64 / (epsilon * delta);
            let raw =
                c_t * k.powi(4) * d.powf(2.5) * ratio * ratio / (constants.eta * delta * delta);
            next_pow2_f64(raw.max(2.0 / constants.eta))
        }
    };
    let beta = match overrides.beta {
        Some(b) => b,
        // k = 0 only arises for empty-signal probes; keep β finite.
        None => constants.eta * delta / (sqrt_d * k.max(1.0) * s as f64),
    };
    let tf = t_span * f_band;
    let n_conv = match overrides.n_conv {
        Some(n) => n,
        None => {
            let ln_tf = tf.ln();
            let ln_inv_delta = (1.0 / delta).ln();
            let raw = c_n
                * k
                * k
                * constants.a
                * constants.a
                * ln_tf
                * ln_tf
                * ln_inv_delta
                * ln_inv_delta
                / (epsilon * epsilon);
            (raw.ceil() as usize).max(1)
        }
    };

    let params = AlgorithmParams {
        t_span,
        f_band,
        s,
        beta,
        n_conv,
        epsilon,
        delta,
        eta: constants.eta,
        c_s,
        c_t,
        c_f,
        c_n,
        c_a,
        c_r,
    };
    params.validate()?;
    Ok(params)
}

/// Black-box access to the signal. The recovery pipeline only ever sees a
/// signal through this trait; `eval_line` exists so synthetic signals can
/// serve arithmetic progressions of sample points efficiently.
pub trait SignalOracle: Sync {
    fn dim(&self) -> usize;

    /// One sample f(t).
    fn eval(&self, t: &[f64]) -> Complex64;

    /// Samples f(base + offset·step) for each offset, appended to `out`
    /// (which is cleared first). Default: pointwise.
    fn eval_line(&self, base: &[f64], step: &[f64], offsets: &[i64], out: &mut Vec<Complex64>) {
        out.clear();
        let mut point = vec![0.0; base.len()];
        for &z in offsets {
            for (p, (b, s)) in point.iter_mut().zip(base.iter().zip(step)) {
                *p = b + z as f64 * s;
            }
            out.push(self.eval(&point));
        }
    }
}

/// Per-tone phase table for one line direction: e^{2πi·z·(w·step)} over a
/// contiguous range of integer offsets.
struct LineTable {
    step_bits: Vec<u64>,
    zmin: i64,
    /// per_tone[j][ (z - zmin) as usize ]
    per_tone: Vec<Vec<Complex64>>,
}

/// Max table span; beyond this `eval_line` falls back to pointwise phases.
const LINE_TABLE_MAX_SPAN: i64 = 1 << 24;

/// Oracle backed by an explicit tone list. Repeated line evaluations along a
/// fixed direction reuse a cached per-tone phase table.
pub struct ToneOracle<'a> {
    spec: &'a SignalSpec,
    table: Mutex<Option<LineTable>>,
}

impl<'a> ToneOracle<'a> {
    pub fn new(spec: &'a SignalSpec) -> Self {
        ToneOracle {
            spec,
            table: Mutex::new(None),
        }
    }
}

impl SignalOracle for ToneOracle<'_> {
    fn dim(&self) -> usize {
        self.spec.d
    }

    fn eval(&self, t: &[f64]) -> Complex64 {
        eval_tones(&self.spec.tones, t)
    }

    fn eval_line(&self, base: &[f64], step: &[f64], offsets: &[i64], out: &mut Vec<Complex64>) {
        out.clear();
        out.resize(offsets.len(), Complex64::new(0.0, 0.0));
        if offsets.is_empty() || self.spec.tones.is_empty() {
            return;
        }
        let (&zmin_req, &zmax_req) = (offsets.iter().min().unwrap(), offsets.iter().max().unwrap());
        if zmax_req - zmin_req >= LINE_TABLE_MAX_SPAN {
            // Too wide for a table; per-point phases.
            for tone in &self.spec.tones {
                let base_cycles: f64 = tone.frequency.iter().zip(base).map(|(w, x)| w * x).sum();
                let step_cycles: f64 = tone.frequency.iter().zip(step).map(|(w, x)| w * x).sum();
                let base_val = tone.amplitude * unit_phase(base_cycles);
                for (o, &z) in out.iter_mut().zip(offsets) {
                    *o += base_val * unit_phase(z as f64 * step_cycles);
                }
            }
            return;
        }

        let step_bits: Vec<u64> = step.iter().map(|x| x.to_bits()).collect();
        let mut guard = self.table.lock().unwrap();
        let rebuild = match guard.as_ref() {
            Some(t) => {
                t.step_bits != step_bits
                    || zmin_req < t.zmin
                    || zmax_req >= t.zmin + t.per_tone[0].len() as i64
            }
            None => true,
        };
        if rebuild {
            let (lo, hi) = match guard.as_ref() {
                Some(t) if t.step_bits == step_bits => (
                    zmin_req.min(t.zmin),
                    zmax_req.max(t.zmin + t.per_tone[0].len() as i64 - 1),
                ),
                _ => (zmin_req, zmax_req),
            };
            let per_tone = self
                .spec
                .tones
                .iter()
                .map(|tone| {
                    let step_cycles: f64 =
                        tone.frequency.iter().zip(step).map(|(w, x)| w * x).sum();
                    (lo..=hi)
                        .map(|z| unit_phase(z as f64 * step_cycles))
                        .collect()
                })
                .collect();
            *guard = Some(LineTable {
                step_bits,
                zmin: lo,
                per_tone,
            });
        }
        let table = guard.as_ref().unwrap();
        let consecutive = offsets.windows(2).all(|w| w[1] == w[0] + 1);
        for (tone, phases) in self.spec.tones.iter().zip(&table.per_tone) {
            let base_cycles: f64 = tone.frequency.iter().zip(base).map(|(w, x)| w * x).sum();
            let base_val = tone.amplitude * unit_phase(base_cycles);
            if consecutive {
                let start = (offsets[0] - table.zmin) as usize;
                let run = &phases[start..start + offsets.len()];
                for (o, p) in out.iter_mut().zip(run) {
                    *o += base_val * p;
                }
            } else {
                for (o, &z) in out.iter_mut().zip(offsets) {
                    *o += base_val * phases[(z - table.zmin) as usize];
                }
            }
        }
    }
}

/// Wraps another oracle and counts how many signal samples were requested.
pub struct CountingOracle<'a> {
    inner: &'a dyn SignalOracle,
    count: AtomicU64,
}

impl<'a> CountingOracle<'a> {
    pub fn new(inner: &'a dyn SignalOracle) -> Self {
        CountingOracle {
            inner,
            count: AtomicU64::new(0),
        }
    }

    pub fn samples_taken(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }
}

impl SignalOracle for CountingOracle<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, t: &[f64]) -> Complex64 {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.eval(t)
    }

    fn eval_line(&self, base: &[f64], step: &[f64], offsets: &[i64], out: &mut Vec<Complex64>) {
        self.count
            .fetch_add(offsets.len() as u64, Ordering::Relaxed);
        self.inner.eval_line(base, step, offsets, out);
    }
}

/// Settings for random instance generation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorSettings {
    pub k: usize,
    pub d: usize,
    #[serde(rename = "M")]
    pub m: f64,
    pub eta: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "Aprime")]
    pub a_prime: f64,
}

/// Total frequency-rejection attempts before an instance is declared
/// infeasible.
pub const GENERATOR_ATTEMPT_BUDGET: usize = 10_000;

/// Draws k tones with frequencies uniform on [-M, M]^d rejection-sampled to
/// pairwise Euclidean distance > η, amplitude magnitudes uniform on [A', A],
/// and uniform phases.
pub fn generate_spec<R: Rng>(settings: &GeneratorSettings, rng: &mut R) -> Result<SignalSpec> {
    if settings.k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    if settings.d < 2 {
        return Err(Error::InvalidArgument("d must be >= 2".into()));
    }
    if !finite_positive(settings.m) || !finite_positive(settings.eta) {
        return Err(Error::InvalidArgument("M and eta must be positive".into()));
    }
    if !(0.0 < settings.a_prime && settings.a_prime <= settings.a) {
        return Err(Error::InvalidArgument(
            "need 0 < Aprime <= A for amplitude draws".into(),
        ));
    }

    let mut freqs: Vec<Vec<f64>> = Vec::with_capacity(settings.k);
    let mut attempts = 0usize;
    while freqs.len() < settings.k {
        if attempts >= GENERATOR_ATTEMPT_BUDGET {
            return Err(Error::InfeasibleInstance(format!(
                "placed only {} of {} tones after {} attempts; eta = {} may exceed what \
                 [-M, M]^d with M = {}, d = {} can pack",
                freqs.len(),
                settings.k,
                attempts,
                settings.eta,
                settings.m,
                settings.d
            )));
        }
        attempts += 1;
        let cand: Vec<f64> = (0..settings.d)
            .map(|_| rng.gen_range(-settings.m..settings.m))
            .collect();
        if freqs.iter().all(|f| euclid_dist(f, &cand) > settings.eta) {
            freqs.push(cand);
        }
    }

    let tones = freqs
        .into_iter()
        .map(|frequency| {
            let mag = rng.gen_range(settings.a_prime..=settings.a);
            let phase = rng.gen_range(0.0..1.0);
            Tone {
                amplitude: mag * unit_phase(phase),
                frequency,
            }
        })
        .collect();

    let spec = SignalSpec {
        d: settings.d,
        m: settings.m,
        eta: settings.eta,
        a: settings.a,
        a_prime: settings.a_prime,
        tones,
    };
    spec.validate()?;
    Ok(spec)
}
