//! Finite-difference stencils.

/// Central-difference step for first derivatives of tensor components:
/// `eps^(1/3) * max(1, |x|)`.
pub fn step_for(coordinate: f64) -> f64 {
    f64::EPSILON.cbrt() * coordinate.abs().max(1.0)
}

/// Fourth-order first-derivative weights for a five-point window.
///
/// `offset` is the position of the evaluation sample inside the window
/// (0..=4); offset 2 is the centered stencil, the others are one-sided.
const FIRST_DERIVATIVE_5: [[f64; 5]; 5] = [
    [-25.0, 48.0, -36.0, 16.0, -3.0],
    [-3.0, -10.0, 18.0, -6.0, 1.0],
    [1.0, -8.0, 0.0, 8.0, -1.0],
    [-1.0, 6.0, -18.0, 10.0, 3.0],
    [3.0, -16.0, 36.0, -48.0, 25.0],
];

/// Returns `(window_start, weights)` for the fourth-order derivative at
/// sample `index` of a uniformly spaced series of length `len >= 5`.
/// Weights are already divided by `12 h`.
pub fn five_point_weights(index: usize, len: usize, h: f64) -> (usize, [f64; 5]) {
    debug_assert!(len >= 5);
    let start = index.saturating_sub(2).min(len - 5);
    let offset = index - start;
    let mut w = FIRST_DERIVATIVE_5[offset];
    for c in w.iter_mut() {
        *c /= 12.0 * h;
    }
    (start, w)
}

/// Strided variant of [`five_point_weights`]: the window uses every
/// `stride`-th sample around `index`. Near the ends of the series the
/// stride shrinks until a five-sample window fits. Requires `len >= 5`.
pub fn strided_weights(index: usize, len: usize, h: f64, stride: usize) -> ([usize; 5], [f64; 5]) {
    debug_assert!(len >= 5 && index < len);
    let mut s = stride.max(1);
    let (step, offset) = loop {
        let before = (index / s).min(4);
        let after = ((len - 1 - index) / s).min(4);
        if before + after >= 4 {
            break (s, before.min(2).max(4 - after));
        }
        s -= 1;
    };
    let mut idx = [0usize; 5];
    for (j, slot) in idx.iter_mut().enumerate() {
        *slot = index + j * step - offset * step;
    }
    let mut w = FIRST_DERIVATIVE_5[offset];
    let span = 12.0 * h * step as f64;
    for c in w.iter_mut() {
        *c /= span;
    }
    (idx, w)
}

/// Fourth-order derivative of a uniformly sampled scalar series.
pub fn derivative_series(values: &[f64], h: f64) -> Vec<f64> {
    let len = values.len();
    if len < 5 {
        return vec![f64::NAN; len];
    }
    (0..len)
        .map(|i| {
            let (start, w) = five_point_weights(i, len, h);
            w.iter().zip(&values[start..start + 5]).map(|(c, v)| c * v).sum()
        })
        .collect()
}

/// Derivative of a scalar series on the strided five-point stencil.
pub fn strided_derivative_series(values: &[f64], h: f64, stride: usize) -> Vec<f64> {
    let len = values.len();
    if len < 5 {
        return vec![f64::NAN; len];
    }
    (0..len)
        .map(|i| {
            let (idx, w) = strided_weights(i, len, h, stride);
            idx.iter().zip(&w).map(|(&j, c)| c * values[j]).sum()
        })
        .collect()
}

/// Second derivative by centered differences (one-sided at the two ends).
pub fn second_derivative_series(values: &[f64], h: f64) -> Vec<f64> {
    let len = values.len();
    if len < 4 {
        return vec![f64::NAN; len];
    }
    let h2 = h * h;
    (0..len)
        .map(|i| {
            if i == 0 {
                (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) / h2
            } else if i == len - 1 {
                let j = len - 1;
                (2.0 * values[j] - 5.0 * values[j - 1] + 4.0 * values[j - 2] - values[j - 3]) / h2
            } else {
                (values[i + 1] - 2.0 * values[i] + values[i - 1]) / h2
            }
        })
        .collect()
}
