//! Separable Gaussian smoothing with half-sample reflective boundaries.
//!
//! The image is extended as `… c b a | a b c … | … c b a`, i.e. an even,
//! `2n`-periodic signal. Convolving with a symmetric unit-sum kernel then
//! preserves the mean exactly, for any kernel width.

/// Kernel support: samples with `|t| ≤ 4σ`.
pub const TRUNCATION_SIGMAS: f64 = 4.0;

/// Unit-sum sampled Gaussian of std `sigma_px`, centered, length `2R + 1`.
pub fn gaussian_kernel(sigma_px: f64) -> Vec<f64> {
    if sigma_px <= 0.0 {
        return vec![1.0];
    }
    let radius = (TRUNCATION_SIGMAS * sigma_px + 1e-9).floor() as i64;
    let two_var = 2.0 * sigma_px * sigma_px;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|t| (-((t * t) as f64) / two_var).exp())
        .collect();
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|w| *w /= total);
    k
}

/// Half-sample symmetric reflection of `i` into `0..n`.
pub fn reflect(i: i64, n: usize) -> usize {
    let n = n as i64;
    let period = 2 * n;
    let m = i.rem_euclid(period);
    (if m >= n { period - 1 - m } else { m }) as usize
}

fn convolve_rows(src: &[f64], width: usize, height: usize, kernel: &[f64]) -> Vec<f64> {
    let r = (kernel.len() / 2) as i64;
    let mut out = vec![0.0; src.len()];
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        for x in 0..width {
            let mut acc = 0.0;
            for (t, w) in kernel.iter().enumerate() {
                acc += w * row[reflect(x as i64 + t as i64 - r, width)];
            }
            out[y * width + x] = acc;
        }
    }
    out
}

fn convolve_cols(src: &[f64], width: usize, height: usize, kernel: &[f64]) -> Vec<f64> {
    let r = (kernel.len() / 2) as i64;
    let mut out = vec![0.0; src.len()];
    for y in 0..height {
        for (t, w) in kernel.iter().enumerate() {
            let sy = reflect(y as i64 + t as i64 - r, height);
            let src_row = &src[sy * width..(sy + 1) * width];
            let dst_row = &mut out[y * width..(y + 1) * width];
            for (d, s) in dst_row.iter_mut().zip(src_row) {
                *d += w * s;
            }
        }
    }
    out
}

/// 2-D Gaussian blur of a row-major grid; `sigma_px` in pixels.
pub fn gaussian_blur(values: &[f64], width: usize, height: usize, sigma_px: f64) -> Vec<f64> {
    assert_eq!(values.len(), width * height, "grid size mismatch");
    if sigma_px <= 0.0 {
        return values.to_vec();
    }
    let kernel = gaussian_kernel(sigma_px);
    let rows = convolve_rows(values, width, height, &kernel);
    convolve_cols(&rows, width, height, &kernel)
}

/// `blur(fine) − blur(coarse)`, sigmas in pixels.
pub fn difference_of_gaussians(
    values: &[f64],
    width: usize,
    height: usize,
    fine_px: f64,
    coarse_px: f64,
) -> Vec<f64> {
    let fine = gaussian_blur(values, width, height, fine_px);
    let coarse = gaussian_blur(values, width, height, coarse_px);
    fine.iter().zip(&coarse).map(|(a, b)| a - b).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflection_indices() {
        let got: Vec<usize> = (-3..7).map(|i| reflect(i, 4)).collect();
        assert_eq!(got, vec![2, 1, 0, 0, 1, 2, 3, 3, 2, 1]);
        assert_eq!(reflect(-9, 4), 0);
        assert_eq!(reflect(0, 1), 0);
        assert_eq!(reflect(5, 1), 0);
    }

    #[test]
    fn kernel_is_normalized_and_symmetric() {
        for s in [0.3, 1.0, 2.5, 5.0] {
            let k = gaussian_kernel(s);
            assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            let n = k.len();
            for i in 0..n / 2 {
                assert_eq!(k[i], k[n - 1 - i]);
            }
        }
        assert_eq!(gaussian_kernel(0.0), vec![1.0]);
    }

    #[test]
    fn zero_sigma_is_identity() {
        let v: Vec<f64> = (0..12).map(|i| i as f64 * 0.7).collect();
        assert_eq!(gaussian_blur(&v, 4, 3, 0.0), v);
    }

    #[test]
    fn impulse_response_is_the_kernel() {
        let (w, h) = (31, 31);
        let mut v = vec![0.0; w * h];
        v[15 * w + 15] = 1.0;
        let out = gaussian_blur(&v, w, h, 2.0);
        let k = gaussian_kernel(2.0);
        let r = k.len() / 2;
        for dy in 0..k.len() {
            for dx in 0..k.len() {
                let got = out[(15 + dy - r) * w + (15 + dx - r)];
                assert!((got - k[dy] * k[dx]).abs() < 1e-16);
            }
        }
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        // Second moment along x recovers σ² up to truncation at 4σ.
        let var: f64 = (0..w)
            .map(|x| {
                let col: f64 = (0..h).map(|y| out[y * w + x]).sum();
                col * (x as f64 - 15.0).powi(2)
            })
            .sum();
        assert!((var - 4.0).abs() < 0.01, "{var}");
    }

    #[test]
    fn wide_kernel_on_small_grid_keeps_mean() {
        let v: Vec<f64> = (0..15).map(|i| ((i * 7) % 5) as f64).collect();
        let out = gaussian_blur(&v, 5, 3, 6.0);
        let m0 = v.iter().sum::<f64>() / 15.0;
        let m1 = out.iter().sum::<f64>() / 15.0;
        assert!((m0 - m1).abs() < 1e-12 * m0.abs().max(1.0));
    }
}
