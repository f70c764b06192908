//! Maximal Overlap Discrete Wavelet Transform (Haar) with multiresolution
//! components.
//!
//! The pyramid runs with circular (periodic) boundary handling and works for
//! any series length: no dyadic constraint. Coefficients preserve energy and
//! the multiresolution components sum back to the input exactly, which is the
//! identity the forecasting pipeline relies on when it aggregates
//! per-component predictions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Boundary handling for the convolution. Only periodic extension is
/// supported; it is what makes the transform circular-shift equivariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Circular,
}

/// Wavelet/scaling filter pair in MODWT normalization (DWT taps divided by
/// sqrt(2)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec<T> {
    pub name: String,
    /// Low-pass (father-wavelet side) taps; sum to 1, squared-sum 1/2.
    pub scaling_taps: Vec<T>,
    /// High-pass (mother-wavelet side) taps; sum to 0, squared-sum 1/2.
    pub wavelet_taps: Vec<T>,
}

impl<T: Scalar> FilterSpec<T> {
    /// The two-tap Haar pair: scaling (1/2, 1/2), wavelet (1/2, -1/2).
    pub fn haar() -> Self {
        let half = T::from_f64_lit(0.5);
        FilterSpec {
            name: "haar".into(),
            scaling_taps: vec![half, half],
            wavelet_taps: vec![half, -half],
        }
    }

    /// Accepts `haar` only; other families are not implemented.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "haar" => Ok(Self::haar()),
            other => Err(Error::InvalidParameter {
                name: "filter",
                reason: format!("unsupported wavelet filter `{other}` (only `haar`)"),
            }),
        }
    }

    /// Checks the MODWT tap identities: wavelet taps sum to 0, scaling taps
    /// sum to 1, each squared-sum equals 1/2.
    pub fn validate(&self) -> Result<()> {
        let tol = T::from_f64_lit(1e-10);
        let half = T::from_f64_lit(0.5);
        if self.scaling_taps.len() != self.wavelet_taps.len() || self.scaling_taps.is_empty() {
            return Err(Error::Validation(
                "filter taps must be non-empty and of equal length".into(),
            ));
        }
        let wsum: T = self.wavelet_taps.iter().copied().sum();
        let gsum: T = self.scaling_taps.iter().copied().sum();
        let wsq: T = self.wavelet_taps.iter().map(|&t| t * t).sum();
        let gsq: T = self.scaling_taps.iter().map(|&t| t * t).sum();
        if wsum.abs() > tol
            || (gsum - T::one()).abs() > tol
            || (wsq - half).abs() > tol
            || (gsq - half).abs() > tol
        {
            return Err(Error::Validation(format!(
                "filter `{}` violates the MODWT tap identities",
                self.name
            )));
        }
        Ok(())
    }

    /// Level-`j` wavelet taps with `2^(j-1) - 1` zeros inserted between the
    /// base taps.
    pub fn wavelet_taps_at(&self, level: usize) -> Vec<T> {
        upsample(&self.wavelet_taps, level)
    }

    /// Level-`j` scaling taps with `2^(j-1) - 1` zeros inserted between the
    /// base taps.
    pub fn scaling_taps_at(&self, level: usize) -> Vec<T> {
        upsample(&self.scaling_taps, level)
    }
}

fn upsample<T: Scalar>(taps: &[T], level: usize) -> Vec<T> {
    let stride = 1usize << (level - 1);
    let mut out = vec![T::zero(); (taps.len() - 1) * stride + 1];
    for (l, &t) in taps.iter().enumerate() {
        out[l * stride] = t;
    }
    out
}

/// Decomposition settings: level count, filter, boundary rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeConfig<T> {
    pub level: usize,
    pub filter: FilterSpec<T>,
    pub boundary: Boundary,
}

impl<T: Scalar> Default for DecomposeConfig<T> {
    fn default() -> Self {
        DecomposeConfig {
            level: 3,
            filter: FilterSpec::haar(),
            boundary: Boundary::Circular,
        }
    }
}

impl<T: Scalar> DecomposeConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(1..=6).contains(&self.level) {
            return Err(Error::InvalidParameter {
                name: "level",
                reason: format!("{} is outside 1..=6", self.level),
            });
        }
        self.filter.validate()
    }
}

/// Additive multiresolution components: one detail series per level plus the
/// final smooth, each of the source length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MraComponents<T> {
    pub details: Vec<Vec<T>>,
    pub smooth: Vec<T>,
}

/// Full transform output: per-level coefficient arrays and their additive
/// multiresolution components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletDecomposition<T> {
    pub levels: usize,
    /// Wavelet coefficients per level, each of the source length.
    pub wavelet_coeffs: Vec<Vec<T>>,
    /// Scaling coefficients at the deepest level.
    pub scaling_coeffs: Vec<T>,
    pub mra: MraComponents<T>,
    pub source_length: usize,
}

impl<T: Scalar> WaveletDecomposition<T> {
    /// Detail component for level `j` (1-based).
    pub fn detail(&self, j: usize) -> &[T] {
        &self.mra.details[j - 1]
    }

    /// Smooth component at the deepest level.
    pub fn smooth(&self) -> &[T] {
        &self.mra.smooth
    }
}

/// One analysis stage: filters `input` at the given level's stride, producing
/// (wavelet, scaling) outputs of the same length.
fn analysis_stage<T: Scalar>(input: &[T], filter: &FilterSpec<T>, level: usize) -> (Vec<T>, Vec<T>) {
    let n = input.len();
    let stride = 1usize << (level - 1);
    let mut w = vec![T::zero(); n];
    let mut v = vec![T::zero(); n];
    for t in 0..n {
        let mut acc_w = T::zero();
        let mut acc_v = T::zero();
        for (l, (&h, &g)) in filter
            .wavelet_taps
            .iter()
            .zip(&filter.scaling_taps)
            .enumerate()
        {
            let shift = (stride * l) % n;
            let idx = (t + n - shift) % n;
            acc_w = acc_w + h * input[idx];
            acc_v = acc_v + g * input[idx];
        }
        w[t] = acc_w;
        v[t] = acc_v;
    }
    (w, v)
}

/// One synthesis stage: inverts [`analysis_stage`], reconstructing the
/// coarser-by-one scaling series from (wavelet, scaling) at this level.
fn synthesis_stage<T: Scalar>(
    wavelet: &[T],
    scaling: &[T],
    filter: &FilterSpec<T>,
    level: usize,
) -> Vec<T> {
    let n = wavelet.len();
    let stride = 1usize << (level - 1);
    let mut out = vec![T::zero(); n];
    for t in 0..n {
        let mut acc = T::zero();
        for (l, (&h, &g)) in filter
            .wavelet_taps
            .iter()
            .zip(&filter.scaling_taps)
            .enumerate()
        {
            let idx = (t + stride * l) % n;
            acc = acc + h * wavelet[idx] + g * scaling[idx];
        }
        out[t] = acc;
    }
    out
}

/// Runs the pyramid algorithm to the configured level and derives the
/// multiresolution components.
pub fn modwt_decompose<T: Scalar>(
    x: &[T],
    cfg: &DecomposeConfig<T>,
) -> Result<WaveletDecomposition<T>> {
    cfg.validate()?;
    let n = x.len();
    let min_len = 1usize << cfg.level;
    if n < min_len {
        return Err(Error::SeriesTooShort {
            need: min_len,
            got: n,
        });
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: i });
    }

    let mut wavelet_coeffs = Vec::with_capacity(cfg.level);
    let mut current = x.to_vec();
    for j in 1..=cfg.level {
        let (w, v) = analysis_stage(&current, &cfg.filter, j);
        wavelet_coeffs.push(w);
        current = v;
    }
    let scaling_coeffs = current;
    let mra = modwt_mra(&wavelet_coeffs, &scaling_coeffs, cfg)?;
    Ok(WaveletDecomposition {
        levels: cfg.level,
        wavelet_coeffs,
        scaling_coeffs,
        mra,
        source_length: n,
    })
}

/// Inverse-transforms each level in isolation (all other levels zeroed),
/// yielding components that sum to the original series.
pub fn modwt_mra<T: Scalar>(
    wavelet_coeffs: &[Vec<T>],
    scaling_coeffs: &[T],
    cfg: &DecomposeConfig<T>,
) -> Result<MraComponents<T>> {
    cfg.validate()?;
    let levels = cfg.level;
    if wavelet_coeffs.len() != levels {
        return Err(Error::Validation(format!(
            "expected {} wavelet coefficient arrays, got {}",
            levels,
            wavelet_coeffs.len()
        )));
    }
    let n = scaling_coeffs.len();
    if n == 0 || wavelet_coeffs.iter().any(|w| w.len() != n) {
        return Err(Error::Validation(
            "coefficient arrays must all share the source length".into(),
        ));
    }

    let zeros = vec![T::zero(); n];
    let mut details = Vec::with_capacity(levels);
    for j in (1..=levels).rev() {
        // start at level j with only W_j populated, cascade down to level 0
        let mut acc = synthesis_stage(&wavelet_coeffs[j - 1], &zeros, &cfg.filter, j);
        for jj in (1..j).rev() {
            acc = synthesis_stage(&zeros, &acc, &cfg.filter, jj);
        }
        details.push(acc);
    }
    details.reverse();

    let mut smooth = synthesis_stage(&zeros, scaling_coeffs, &cfg.filter, levels);
    for jj in (1..levels).rev() {
        smooth = synthesis_stage(&zeros, &smooth, &cfg.filter, jj);
    }

    Ok(MraComponents { details, smooth })
}

/// Element-wise sum of all multiresolution components; equals the original
/// series up to rounding.
pub fn reconstruct<T: Scalar>(dec: &WaveletDecomposition<T>) -> Vec<T> {
    let mut out = dec.mra.smooth.clone();
    for d in &dec.mra.details {
        for (o, &v) in out.iter_mut().zip(d) {
            *o = *o + v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: convolves with explicitly upsampled taps and
    /// wrap-around indexing, no shared code with the pyramid above.
    mod oracle {
        pub fn upsampled(base: &[f64], level: usize) -> Vec<f64> {
            let gap = (1usize << (level - 1)) - 1;
            let mut taps = Vec::new();
            for (i, &t) in base.iter().enumerate() {
                taps.push(t);
                if i + 1 < base.len() {
                    taps.extend(std::iter::repeat(0.0).take(gap));
                }
            }
            taps
        }

        pub fn forward(input: &[f64], taps: &[f64]) -> Vec<f64> {
            let n = input.len();
            (0..n)
                .map(|t| {
                    taps.iter()
                        .enumerate()
                        .map(|(l, &h)| h * input[(t + n - (l % n)) % n])
                        .sum()
                })
                .collect()
        }

        pub fn inverse(w: &[f64], v: &[f64], h_taps: &[f64], g_taps: &[f64]) -> Vec<f64> {
            let n = w.len();
            (0..n)
                .map(|t| {
                    let mut acc = 0.0;
                    for (l, &h) in h_taps.iter().enumerate() {
                        acc += h * w[(t + l) % n];
                    }
                    for (l, &g) in g_taps.iter().enumerate() {
                        acc += g * v[(t + l) % n];
                    }
                    acc
                })
                .collect()
        }
    }

    fn haar_cfg(level: usize) -> DecomposeConfig<f64> {
        DecomposeConfig {
            level,
            ..DecomposeConfig::default()
        }
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    fn rel_recon_err(x: &[f64], dec: &WaveletDecomposition<f64>) -> f64 {
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-30);
        max_abs_diff(x, &reconstruct(dec)) / scale
    }

    fn lcg_series(seed: u64, n: usize) -> Vec<f64> {
        // deterministic pseudo-random values in [-1, 1)
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        (0..n)
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            })
            .collect()
    }

    #[test]
    fn haar_taps_satisfy_identities() {
        FilterSpec::<f64>::haar().validate().unwrap();
        assert_eq!(FilterSpec::<f64>::haar().scaling_taps, vec![0.5, 0.5]);
        assert_eq!(FilterSpec::<f64>::haar().wavelet_taps, vec![0.5, -0.5]);
    }

    #[test]
    fn upsampled_taps_insert_zero_gaps() {
        let f = FilterSpec::<f64>::haar();
        assert_eq!(f.wavelet_taps_at(1), vec![0.5, -0.5]);
        assert_eq!(f.wavelet_taps_at(3), vec![0.5, 0.0, 0.0, 0.0, -0.5]);
    }

    #[test]
    fn constant_series_has_zero_details() {
        let x = vec![5.0; 4];
        let dec = modwt_decompose(&x, &haar_cfg(2)).unwrap();
        for w in &dec.wavelet_coeffs {
            assert!(w.iter().all(|&v| v.abs() < 1e-12));
        }
        for d in &dec.mra.details {
            assert!(d.iter().all(|&v| v.abs() < 1e-12));
        }
        assert!(max_abs_diff(&dec.mra.smooth, &x) < 1e-12);
    }

    #[test]
    fn level_one_coefficients_of_1234() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let dec = modwt_decompose(&x, &haar_cfg(1)).unwrap();
        assert!(max_abs_diff(&dec.wavelet_coeffs[0], &[-1.5, 0.5, 0.5, 0.5]) < 1e-12);
        assert!(max_abs_diff(&dec.scaling_coeffs, &[2.5, 1.5, 2.5, 3.5]) < 1e-12);
        let energy_w: f64 = dec.wavelet_coeffs[0].iter().map(|v| v * v).sum();
        let energy_v: f64 = dec.scaling_coeffs.iter().map(|v| v * v).sum();
        assert!((energy_w - 3.0).abs() < 1e-12);
        assert!((energy_v - 27.0).abs() < 1e-12);
        assert!((energy_w + energy_v - 30.0).abs() < 1e-12);
    }

    #[test]
    fn level_one_mra_of_1234_matches_oracle() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let dec = modwt_decompose(&x, &haar_cfg(1)).unwrap();
        assert!(max_abs_diff(&dec.mra.details[0], &[-1.0, 0.0, 0.0, 1.0]) < 1e-12);
        assert!(max_abs_diff(&dec.mra.smooth, &[2.0, 2.0, 3.0, 3.0]) < 1e-12);
        assert!(rel_recon_err(&x, &dec) < 1e-12);
    }

    #[test]
    fn two_level_fixture_matches_independent_convolution_oracle() {
        // expected values computed with a standalone pyramid before this
        // module was written
        let x = [2.0, 4.0, 1.0, 7.0, 3.0, 8.0, 5.0, 6.0];
        let dec = modwt_decompose(&x, &haar_cfg(2)).unwrap();
        assert!(max_abs_diff(
            &dec.wavelet_coeffs[0],
            &[-2.0, 1.0, -1.5, 3.0, -2.0, 2.5, -1.5, 0.5]
        ) < 1e-12);
        assert!(max_abs_diff(
            &dec.wavelet_coeffs[1],
            &[-1.25, -1.25, -0.75, 0.5, 1.25, 0.75, 0.75, 0.0]
        ) < 1e-12);
        assert!(max_abs_diff(
            &dec.scaling_coeffs,
            &[5.25, 4.25, 3.25, 3.5, 3.75, 4.75, 5.75, 5.5]
        ) < 1e-12);
        assert!(max_abs_diff(
            &dec.mra.details[0],
            &[-1.5, 1.25, -2.25, 2.5, -2.25, 2.0, -1.0, 1.25]
        ) < 1e-12);
        assert!(max_abs_diff(
            &dec.mra.details[1],
            &[-0.5625, -0.9375, -0.5625, 0.0625, 0.3125, 0.6875, 0.8125, 0.1875]
        ) < 1e-12);
        assert!(max_abs_diff(
            &dec.mra.smooth,
            &[4.0625, 3.6875, 3.8125, 4.4375, 4.9375, 5.3125, 5.1875, 4.5625]
        ) < 1e-12);

        // and the in-test oracle agrees stage by stage
        let h1 = oracle::upsampled(&[0.5, -0.5], 1);
        let g1 = oracle::upsampled(&[0.5, 0.5], 1);
        assert!(max_abs_diff(&oracle::forward(&x, &h1), &dec.wavelet_coeffs[0]) < 1e-12);
        let v1 = oracle::forward(&x, &g1);
        let h2 = oracle::upsampled(&[0.5, -0.5], 2);
        let g2 = oracle::upsampled(&[0.5, 0.5], 2);
        assert!(max_abs_diff(&oracle::forward(&v1, &h2), &dec.wavelet_coeffs[1]) < 1e-12);
        assert!(max_abs_diff(&oracle::forward(&v1, &g2), &dec.scaling_coeffs) < 1e-12);
        // one synthesis stage inverts the analysis stage
        let back = oracle::inverse(&oracle::forward(&x, &h1), &v1, &h1, &g1);
        assert!(max_abs_diff(&back, &x) < 1e-12);
    }

    #[test]
    fn zero_coefficients_give_zero_components() {
        let zeros = vec![vec![0.0; 8], vec![0.0; 8]];
        let mra = modwt_mra(&zeros, &vec![0.0; 8], &haar_cfg(2)).unwrap();
        assert!(mra.details.iter().flatten().all(|&v| v == 0.0));
        assert!(mra.smooth.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn impulse_components_sum_to_impulse() {
        let mut x = vec![0.0; 16];
        x[0] = 1.0;
        let dec = modwt_decompose(&x, &haar_cfg(3)).unwrap();
        assert!(rel_recon_err(&x, &dec) < 1e-12);
        // each detail is the cascade response to the impulse: nonzero
        assert!(dec
            .mra
            .details
            .iter()
            .all(|d| d.iter().any(|&v| v.abs() > 1e-15)));
    }

    #[test]
    fn additive_reconstruction_and_energy_for_random_series() {
        for &n in &[16usize, 100, 409] {
            for level in 1..=3 {
                let x = lcg_series(n as u64 * 31 + level as u64, n);
                let dec = modwt_decompose(&x, &haar_cfg(level)).unwrap();
                assert!(
                    rel_recon_err(&x, &dec) < 1e-9,
                    "reconstruction failed n={n} J={level}"
                );
                let coeff_energy: f64 = dec
                    .wavelet_coeffs
                    .iter()
                    .flatten()
                    .chain(dec.scaling_coeffs.iter())
                    .map(|v| v * v)
                    .sum();
                let input_energy: f64 = x.iter().map(|v| v * v).sum();
                assert!(
                    (coeff_energy - input_energy).abs() / input_energy < 1e-9,
                    "energy failed n={n} J={level}"
                );
            }
        }
    }

    #[test]
    fn circular_shift_equivariance_is_exact() {
        let n = 50;
        let x = lcg_series(7, n);
        let dec = modwt_decompose(&x, &haar_cfg(3)).unwrap();
        for k in [1usize, 5, 17] {
            let mut rotated = x.clone();
            rotated.rotate_right(k);
            let dec_rot = modwt_decompose(&rotated, &haar_cfg(3)).unwrap();
            for j in 0..3 {
                let mut expect = dec.mra.details[j].clone();
                expect.rotate_right(k);
                assert!(max_abs_diff(&dec_rot.mra.details[j], &expect) <= 1e-12);
                let mut expect_w = dec.wavelet_coeffs[j].clone();
                expect_w.rotate_right(k);
                assert!(max_abs_diff(&dec_rot.wavelet_coeffs[j], &expect_w) <= 1e-12);
            }
            let mut expect_s = dec.mra.smooth.clone();
            expect_s.rotate_right(k);
            assert!(max_abs_diff(&dec_rot.mra.smooth, &expect_s) <= 1e-12);
        }
    }

    #[test]
    fn decomposition_is_linear() {
        let n = 64;
        let x = lcg_series(11, n);
        let y = lcg_series(13, n);
        let (a, b) = (2.5f64, -1.25f64);
        let combo: Vec<f64> = x.iter().zip(&y).map(|(&xv, &yv)| a * xv + b * yv).collect();
        let dx = modwt_decompose(&x, &haar_cfg(3)).unwrap();
        let dy = modwt_decompose(&y, &haar_cfg(3)).unwrap();
        let dc = modwt_decompose(&combo, &haar_cfg(3)).unwrap();
        for j in 0..3 {
            let expect: Vec<f64> = dx.mra.details[j]
                .iter()
                .zip(&dy.mra.details[j])
                .map(|(&xv, &yv)| a * xv + b * yv)
                .collect();
            assert!(max_abs_diff(&dc.mra.details[j], &expect) < 1e-12);
        }
    }

    #[test]
    fn detail_components_sum_to_zero() {
        let x = lcg_series(23, 100);
        let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dec = modwt_decompose(&x, &haar_cfg(3)).unwrap();
        for d in &dec.mra.details {
            let total: f64 = d.iter().sum();
            assert!(total.abs() / norm < 1e-8);
        }
    }

    #[test]
    fn zeroing_a_detail_removes_exactly_that_component() {
        let x = lcg_series(3, 32);
        let mut dec = modwt_decompose(&x, &haar_cfg(3)).unwrap();
        let d2 = dec.mra.details[1].clone();
        dec.mra.details[1] = vec![0.0; 32];
        let partial = reconstruct(&dec);
        for i in 0..32 {
            assert!((partial[i] - (x[i] - d2[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_short_series_and_bad_level() {
        let x = vec![1.0; 7];
        assert!(matches!(
            modwt_decompose(&x, &haar_cfg(3)).unwrap_err(),
            Error::SeriesTooShort { need: 8, got: 7 }
        ));
        assert!(modwt_decompose(&x, &haar_cfg(0)).is_err());
        assert!(modwt_decompose(&x, &haar_cfg(7)).is_err());
        let bad = vec![1.0, f64::NAN, 2.0, 3.0];
        assert!(matches!(
            modwt_decompose(&bad, &haar_cfg(1)).unwrap_err(),
            Error::NonFinite { index: 1 }
        ));
    }

    #[test]
    fn mra_rejects_mismatched_coefficients() {
        let w = vec![vec![0.0; 8]];
        assert!(modwt_mra(&w, &vec![0.0; 8], &haar_cfg(2)).is_err());
        let w2 = vec![vec![0.0; 8], vec![0.0; 4]];
        assert!(modwt_mra(&w2, &vec![0.0; 8], &haar_cfg(2)).is_err());
    }
}
