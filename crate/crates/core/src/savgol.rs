//! Savitzky-Golay smoothing.
//!
//! Interior samples use the centred least-squares polynomial of the window.
//! The first and last `window / 2` samples are evaluated from the polynomial
//! fitted to the first (last) full window, so polynomials of degree up to
//! `order` pass through unchanged everywhere, including the ends.

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SavGolError {
    #[error("bad filter parameters: window {window}, order {order} (window must be odd and > order)")]
    BadFilterParams { window: usize, order: usize },
    #[error("signal of length {len} is shorter than the window {window}")]
    TooShort { len: usize, window: usize },
}

#[derive(Debug, Clone)]
pub struct SavitzkyGolay<T> {
    window: usize,
    order: usize,
    /// `rows[s]` holds the weights that evaluate the window fit at offset
    /// `s - half` from the window centre.
    rows: Vec<Vec<T>>,
}

impl<T: Real> SavitzkyGolay<T> {
    pub fn new(window: usize, order: usize) -> Result<Self, SavGolError> {
        if window % 2 == 0 || window < 3 || order >= window {
            return Err(SavGolError::BadFilterParams { window, order });
        }
        let half = (window / 2) as i64;
        let fit = fit_operator::<T>(window, order);
        let rows = (-half..=half)
            .map(|s| {
                let s = T::lit(s as f64);
                (0..window)
                    .map(|k| {
                        let mut acc = T::zero();
                        let mut pow = T::one();
                        for coeffs in fit.iter() {
                            acc = acc + pow * coeffs[k];
                            pow = pow * s;
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        Ok(Self { window, order, rows })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Weights of the centred (interior) smoother.
    pub fn center_weights(&self) -> &[T] {
        &self.rows[self.window / 2]
    }

    pub fn apply(&self, data: &[T]) -> Result<Vec<T>, SavGolError> {
        let n = data.len();
        let w = self.window;
        if n < w {
            return Err(SavGolError::TooShort { len: n, window: w });
        }
        let half = w / 2;
        let dot = |row: &[T], start: usize| -> T {
            row.iter().zip(&data[start..start + w]).map(|(a, b)| *a * *b).sum()
        };
        let mut out = vec![T::zero(); n];
        for (i, o) in out.iter_mut().enumerate().take(half) {
            *o = dot(&self.rows[i], 0);
        }
        let center = self.center_weights();
        for i in half..n - half {
            out[i] = dot(center, i - half);
        }
        for i in n - half..n {
            out[i] = dot(&self.rows[i - (n - w)], n - w);
        }
        Ok(out)
    }
}

/// Rows `i = 0..=order` of `(AᵀA)⁻¹Aᵀ` for the Vandermonde matrix `A` over
/// offsets `-half..=half`: polynomial coefficient `i` is `row_i · window`.
fn fit_operator<T: Real>(window: usize, order: usize) -> Vec<Vec<T>> {
    let half = (window / 2) as i64;
    let m = order + 1;
    let xs: Vec<T> = (-half..=half).map(|k| T::lit(k as f64)).collect();
    let vander: Vec<Vec<T>> = xs
        .iter()
        .map(|&x| {
            let mut row = Vec::with_capacity(m);
            let mut p = T::one();
            for _ in 0..m {
                row.push(p);
                p = p * x;
            }
            row
        })
        .collect();
    // augmented [AᵀA | Aᵀ]
    let mut aug: Vec<Vec<T>> = (0..m)
        .map(|i| {
            let mut row: Vec<T> = (0..m).map(|j| vander.iter().map(|r| r[i] * r[j]).sum()).collect();
            row.extend(vander.iter().map(|r| r[i]));
            row
        })
        .collect();
    gauss_jordan(&mut aug, m);
    aug.into_iter().map(|row| row[m..].to_vec()).collect()
}

/// In-place Gauss-Jordan elimination with partial pivoting on an `m`-row
/// augmented matrix; leaves the solution in the columns right of `m`.
fn gauss_jordan<T: Real>(aug: &mut [Vec<T>], m: usize) {
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&a, &b| aug[a][col].abs().partial_cmp(&aug[b][col].abs()).unwrap())
            .unwrap();
        aug.swap(col, pivot);
        let p = aug[col][col];
        for v in aug[col].iter_mut() {
            *v = *v / p;
        }
        for r in 0..m {
            if r != col {
                let f = aug[r][col];
                if f != T::zero() {
                    let (src, dst) = if r < col {
                        let (a, b) = aug.split_at_mut(col);
                        (&b[0], &mut a[r])
                    } else {
                        let (a, b) = aug.split_at_mut(r);
                        (&a[col], &mut b[0])
                    };
                    for (d, s) in dst.iter_mut().zip(src.iter()) {
                        *d = *d - f * *s;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_params() {
        assert!(SavitzkyGolay::<f64>::new(14, 3).is_err());
        assert!(SavitzkyGolay::<f64>::new(5, 5).is_err());
        assert!(SavitzkyGolay::<f64>::new(1, 0).is_err());
        assert!(SavitzkyGolay::<f64>::new(15, 3).is_ok());
    }

    #[test]
    fn known_5_point_quadratic_weights() {
        // classic table: (-3, 12, 17, 12, -3) / 35
        let f = SavitzkyGolay::<f64>::new(5, 2).unwrap();
        let expect = [-3.0, 12.0, 17.0, 12.0, -3.0].map(|v| v / 35.0);
        for (a, b) in f.center_weights().iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn weights_sum_to_one() {
        let f = SavitzkyGolay::<f64>::new(15, 3).unwrap();
        for row in &f.rows {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn too_short_is_an_error() {
        let f = SavitzkyGolay::<f64>::new(15, 3).unwrap();
        assert_eq!(f.apply(&[0.0; 10]), Err(SavGolError::TooShort { len: 10, window: 15 }));
    }

    #[test]
    fn cubic_passes_through_f32() {
        let f = SavitzkyGolay::<f32>::new(7, 3).unwrap();
        let xs: Vec<f32> = (0..20).map(|t| { let t = t as f32 * 0.1; t * t * t - t }).collect();
        let ys = f.apply(&xs).unwrap();
        for (a, b) in xs.iter().zip(&ys) {
            assert!((a - b).abs() < 1e-4);
        }
    }
}
