//! One-dimensional readouts g_{j,l}(t): the bucket-filtered signal on a
//! random axis-parallel lattice line, dehashed through (h⁻¹)* and
//! demodulated so an isolated tone appears as a_{j_k}·θ·e^{2πi w_{j_k,l} t}
//! (θ an unknown unit-modulus phase from the frozen coordinates).
//!
//! Dehashing uses (h⁻¹)*, and the demodulation exponent is taken at the
//! dehashed point (((h⁻¹)*y)_d·b/T, which carries the 1/h_d the shear
//! introduces); the single-tone exactness test below pins both choices.

use crate::bucketfilter::{BucketFilter, PreparedSamples};
use crate::error::{Error, Result};
use crate::hashing::BucketIndex;
use crate::model::AlgorithmParams;
use crate::util::unit_phase;
use num_complex::Complex64;
use rand::Rng;

/// One line: the varying coordinate l (1-based), the frozen lattice
/// numerators of the other d-1 coordinates, and the bucket being read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineContext {
    /// Varying coordinate, 1-based in [1, d].
    pub l: usize,
    /// Frozen integer coordinates x_1..x_{l-1}, x_{l+1}..x_d, each in
    /// [-TF/2, TF/2).
    pub frozen: Vec<i64>,
    pub j: BucketIndex,
}

impl LineContext {
    pub fn dim(&self) -> usize {
        self.frozen.len() + 1
    }

    pub fn validate(&self, params: &AlgorithmParams) -> Result<()> {
        let d = self.dim();
        if self.l < 1 || self.l > d {
            return Err(Error::InvalidArgument(format!(
                "line coordinate l = {} outside [1, {d}]",
                self.l
            )));
        }
        let half = params.half_tf_i();
        if self.frozen.iter().any(|&x| x < -half || x >= half) {
            return Err(Error::InvalidArgument(
                "frozen coordinate outside [-TF/2, TF/2)".into(),
            ));
        }
        Ok(())
    }
}

/// Draws the d-1 frozen coordinates uniformly from Z ∩ [-TF/2, TF/2).
pub fn draw_line<R: Rng>(
    rng: &mut R,
    l: usize,
    d: usize,
    params: &AlgorithmParams,
) -> Result<Vec<i64>> {
    if l < 1 || l > d {
        return Err(Error::InvalidArgument(format!(
            "line coordinate l = {l} outside [1, {d}]"
        )));
    }
    let half = params.half_tf_i();
    Ok((0..d - 1).map(|_| rng.gen_range(-half..half)).collect())
}

/// Which convolution path backs the line.
#[derive(Clone, Copy)]
pub enum ConvMode<'a> {
    /// Exact direct sum; oracle-grade, desk-scale grids only.
    Direct,
    /// Importance-sampled estimator with a shared sample set.
    Sampled(&'a PreparedSamples),
}

/// Sampler for one g_{j,l}, bound to a filter and a convolution mode.
pub struct LineSampler<'a> {
    pub ctx: LineContext,
    filter: &'a BucketFilter<'a>,
    mode: ConvMode<'a>,
    /// Lattice point x_{l,t} in real coordinates; entry l-1 is rewritten per
    /// sample.
    template: Vec<f64>,
}

impl<'a> LineSampler<'a> {
    pub fn new(ctx: LineContext, filter: &'a BucketFilter<'a>, mode: ConvMode<'a>) -> Result<Self> {
        ctx.validate(filter.params)?;
        if ctx.dim() != filter.hash.dim() {
            return Err(Error::DimensionMismatch {
                expected: filter.hash.dim(),
                got: ctx.dim(),
            });
        }
        let d = ctx.dim();
        let f_band = filter.params.f_band;
        let mut template = vec![0.0; d];
        let mut it = ctx.frozen.iter();
        for (c, slot) in template.iter_mut().enumerate() {
            if c + 1 != ctx.l {
                *slot = *it.next().unwrap() as f64 / f_band;
            }
        }
        Ok(LineSampler {
            ctx,
            filter,
            mode,
            template,
        })
    }

    /// g(t) for t ∈ [-T/2, T/2). Piecewise constant on cells of width 1/F.
    pub fn g(&self, t: f64) -> Result<Complex64> {
        let params = self.filter.params;
        let half_t = params.t_span / 2.0;
        if !(-half_t..half_t).contains(&t) {
            return Err(Error::InvalidArgument(format!(
                "t = {t} outside [-T/2, T/2) = [{}, {})",
                -half_t, half_t
            )));
        }
        let mut y = self.template.clone();
        y[self.ctx.l - 1] = (t * params.f_band).floor() / params.f_band;

        // Dehashed point p = (h⁻¹)*y has p_d = y_d/h_d; conv only needs the
        // hashed base (= y, exactly) and p_d for its modulation.
        let d = y.len();
        let p_d = y[d - 1] / self.filter.hash.h[d - 1] as f64;
        let demod =
            unit_phase(-self.filter.hash.sigma() * self.filter.hash.b as f64 * p_d / params.t_span);
        let conv = match self.mode {
            ConvMode::Direct => self.filter.conv_direct_prehashed(&y, p_d, self.ctx.j)?,
            ConvMode::Sampled(samples) => self
                .filter
                .conv_sampled_prehashed(&y, p_d, self.ctx.j, samples),
        };
        Ok(demod * conv)
    }
}

/// Sibling lines: one (l, frozen-coordinates) readout over several buckets
/// at once. The f_H values along the shift direction are bucket-independent,
/// so each t costs a single oracle pass. Direct-convolution path only.
pub struct MultiBucketLine<'a> {
    pub l: usize,
    pub buckets: Vec<BucketIndex>,
    filter: &'a BucketFilter<'a>,
    template: Vec<f64>,
    conv_out: std::cell::RefCell<Vec<Complex64>>,
}

impl<'a> MultiBucketLine<'a> {
    pub fn new(
        l: usize,
        frozen: Vec<i64>,
        buckets: Vec<BucketIndex>,
        filter: &'a BucketFilter<'a>,
    ) -> Result<Self> {
        let probe = LineContext {
            l,
            frozen,
            j: buckets[0],
        };
        let sampler = LineSampler::new(probe, filter, ConvMode::Direct)?;
        Ok(MultiBucketLine {
            l,
            buckets,
            filter,
            template: sampler.template,
            conv_out: std::cell::RefCell::new(Vec::new()),
        })
    }

    /// g_{j,l}(t) for every bucket j in `buckets`, in order.
    pub fn g_all(&self, t: f64, out: &mut Vec<Complex64>) -> Result<()> {
        let params = self.filter.params;
        let mut y = self.template.clone();
        y[self.l - 1] = (t * params.f_band).floor() / params.f_band;
        let d = y.len();
        let p_d = y[d - 1] / self.filter.hash.h[d - 1] as f64;
        let demod =
            unit_phase(-self.filter.hash.sigma() * self.filter.hash.b as f64 * p_d / params.t_span);
        let mut conv = self.conv_out.borrow_mut();
        self.filter
            .conv_direct_prehashed_multi(&y, p_d, &self.buckets, &mut conv)?;
        out.clear();
        out.extend(conv.iter().map(|c| demod * c));
        Ok(())
    }
}
