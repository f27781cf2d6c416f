//! Property tests for the model, hashing, and filter invariants.

use hdsft_core::bucketfilter::{v2_weight, z_of_t};
use hdsft_core::hashing::{
    apply_h, apply_h_inv, apply_h_inv_star, apply_h_star, bucket_of, BucketIndex, HashDraw, SIGMA_B,
};
use hdsft_core::model::{
    derive_params, eval_signal, AlgorithmParams, ModelConstants, ParamOverrides, SignalSpec, Tone,
};
use hdsft_core::pipeline::dedupe;
use hdsft_core::util::{euclid_dist, fold_into};
use num_complex::Complex64;
use proptest::prelude::*;

fn desk_params(t: f64, f: f64, s: u32) -> AlgorithmParams {
    derive_params(
        &ModelConstants {
            k: 2,
            d: 2,
            m: 1.0,
            eta: 0.6,
            a: 1.0,
            a_prime: 0.5,
        },
        0.1,
        0.1,
        &ParamOverrides {
            t_span: Some(t),
            f_band: Some(f),
            s: Some(s),
            n_conv: Some(64),
            ..Default::default()
        },
    )
    .unwrap()
}

fn tone_strategy(d: usize) -> impl Strategy<Value = Tone> {
    (
        -2.0..2.0f64,
        -2.0..2.0f64,
        proptest::collection::vec(-4.0..4.0f64, d),
    )
        .prop_map(|(re, im, w)| Tone::new(Complex64::new(re, im), w))
}

proptest! {
    /// eval is linear in the tone list.
    #[test]
    fn eval_linear_in_tones(
        tones1 in proptest::collection::vec(tone_strategy(2), 1..4),
        tones2 in proptest::collection::vec(tone_strategy(2), 1..4),
        t in proptest::collection::vec(-8.0..8.0f64, 2),
    ) {
        let mk = |tones: Vec<Tone>| SignalSpec {
            d: 2, m: 4.0, eta: 0.1, a: 4.0, a_prime: 0.01, tones,
        };
        let joint = mk([tones1.clone(), tones2.clone()].concat());
        let a = eval_signal(&mk(tones1), &t).unwrap();
        let b = eval_signal(&mk(tones2), &t).unwrap();
        let both = eval_signal(&joint, &t).unwrap();
        let scale = both.norm().max(1.0);
        prop_assert!((both - (a + b)).norm() <= 1e-12 * scale);
    }

    /// |f(t)| never exceeds k·A for spec-conforming amplitudes.
    #[test]
    fn eval_bounded_by_k_a(
        mags in proptest::collection::vec(0.1..1.0f64, 1..5),
        phases in proptest::collection::vec(0.0..1.0f64, 5),
        ws in proptest::collection::vec(proptest::collection::vec(-4.0..4.0f64, 2), 5),
        t in proptest::collection::vec(-8.0..8.0f64, 2),
    ) {
        let tones: Vec<Tone> = mags
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                Tone::new(m * hdsft_core::util::unit_phase(phases[i]), ws[i].clone())
            })
            .collect();
        let k = tones.len();
        let spec = SignalSpec { d: 2, m: 4.0, eta: 0.1, a: 1.0, a_prime: 0.1, tones };
        let v = eval_signal(&spec, &t).unwrap();
        prop_assert!(v.norm() <= k as f64 * spec.a + 1e-12);
    }

    /// The closed-form shear inverses undo the forward maps.
    #[test]
    fn hash_inverse_identities(
        hs in proptest::collection::vec(0i64..64, 2..5),
        x in proptest::collection::vec(-16.0..16.0f64, 5),
    ) {
        let h: Vec<i64> = hs.iter().map(|v| 2 * v + 1).collect();
        let d = h.len();
        let x = x[..d].to_vec();
        let hash = HashDraw { h, b: 0, sigma_b: SIGMA_B };
        let fwd = apply_h(&hash, &x).unwrap();
        let back = apply_h_inv(&hash, &fwd).unwrap();
        let star = apply_h_star(&hash, &x).unwrap();
        let unstar = apply_h_inv_star(&hash, &star).unwrap();
        for i in 0..d {
            prop_assert!((back[i] - x[i]).abs() < 1e-9);
            prop_assert!((unstar[i] - x[i]).abs() < 1e-9);
        }
    }

    /// fold_into always lands in [-w/2, w/2) and preserves value mod width.
    #[test]
    fn fold_into_half_open_interval(x in -1e4..1e4f64, w in 1.0..512.0f64) {
        let y = fold_into(x, w);
        prop_assert!((-w / 2.0..w / 2.0).contains(&y));
        let residue = (x - y) / w;
        prop_assert!((residue - residue.round()).abs() < 1e-6);
    }

    /// Every grid index belongs to exactly one bucket, and the buckets tile
    /// the grid.
    #[test]
    fn buckets_partition(log_tf in 2u32..10, log_s in 1u32..4) {
        let tf = 1i64 << log_tf;
        let s = 1u32 << log_s.min(log_tf - 1);
        let f = (tf / 2) as f64;
        let params = if (s as f64) < f {
            desk_params(2.0, f, s)
        } else {
            return Ok(());
        };
        let width = params.bucket_width_i();
        let mut counts = vec![0i64; params.s as usize];
        for n in -params.half_tf_i()..params.half_tf_i() {
            let j = bucket_of(n, &params).unwrap();
            prop_assert!(j.0 >= 1 && j.0 <= params.s);
            counts[(j.0 - 1) as usize] += 1;
        }
        prop_assert!(counts.iter().all(|&c| c == width));
    }

    /// z_of_t stays on the integer grid for any admissible t.
    #[test]
    fn z_of_t_in_range(t in -0.4999..0.4999f64, log_f in 2u32..9) {
        let params = desk_params(2.0, (1u64 << log_f) as f64, 2);
        let z = z_of_t(t, &params);
        prop_assert!(z >= -params.half_tf_i() && z < params.half_tf_i());
    }

    /// Σ_j v₂(y, j) = δ_{y,0} for random grid sizes.
    #[test]
    fn v2_bucket_sum_telescopes(y_frac in -0.499..0.499f64, log_s in 1u32..4) {
        let params = desk_params(2.0, 32.0, 1 << log_s);
        let y = (y_frac * params.tf()) as i64;
        let total: Complex64 = (1..=params.s)
            .map(|j| v2_weight(y, BucketIndex(j), &params))
            .sum();
        let expect = if y == 0 { 1.0 } else { 0.0 };
        prop_assert!((total - Complex64::new(expect, 0.0)).norm() < 1e-12);
    }

    /// dedupe output is pairwise separated by more than η/2 and never grows.
    #[test]
    fn dedupe_separation(
        ws in proptest::collection::vec(proptest::collection::vec(-2.0..2.0f64, 2), 0..12),
        mags in proptest::collection::vec(0.01..2.0f64, 12),
        eta in 0.1..1.0f64,
    ) {
        let candidates: Vec<(Vec<f64>, Complex64)> = ws
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), Complex64::new(mags[i], 0.0)))
            .collect();
        let kept = dedupe(&candidates, eta);
        prop_assert!(kept.len() <= candidates.len());
        for i in 0..kept.len() {
            for j in (i + 1)..kept.len() {
                prop_assert!(euclid_dist(&kept[i].frequency, &kept[j].frequency) > eta / 2.0);
            }
        }
        // Every dropped candidate is within η/2 of something kept.
        for (w, _) in &candidates {
            prop_assert!(kept
                .iter()
                .any(|t| euclid_dist(&t.frequency, w) <= eta / 2.0 + 1e-12)
                || kept.iter().any(|t| &t.frequency == w));
        }
    }

    /// derive_params either returns a self-consistent parameter set or an
    /// explicit error, never silently inconsistent values.
    #[test]
    fn derive_params_consistent_or_rejected(
        k in 1usize..5,
        d in 2usize..5,
        m in 0.5..8.0f64,
        eta in 0.1..1.0f64,
        epsilon in 0.01..0.3f64,
        delta in 0.05..0.45f64,
    ) {
        let constants = ModelConstants { k, d, m, eta, a: 1.0, a_prime: 0.5 };
        match derive_params(&constants, epsilon, delta, &Default::default()) {
            Ok(p) => {
                p.validate().unwrap();
                prop_assert!(p.s as f64 >= (d as f64).sqrt() * (k * k) as f64 / delta);
                prop_assert!(p.t_span > 1.0 / eta);
                prop_assert!((p.s as f64) < p.f_band);
            }
            Err(e) => {
                let msg = e.to_string();
                prop_assert!(
                    msg.contains("infeasible") || msg.contains("invalid"),
                    "unexpected error class: {msg}"
                );
            }
        }
    }
}
