//! Globally adaptive Gauss-Kronrod (7/15 point) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

// Kronrod abscissae on [0, 1]; odd positions are the Gauss-7 nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature did not reach tolerance {tolerance:e}: value {value}, error estimate {abs_error:e} after {evaluations} evaluations")]
    NotConverged {
        value: f64,
        abs_error: f64,
        evaluations: usize,
        tolerance: f64,
    },
    #[error("integrand returned a non-finite value at x = {0}")]
    NonFinite(f64),
}

/// One 15-point Kronrod estimate on `[a, b]` and `|K15 - G7|`.
pub fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[a, b]`, bisecting the interval with the largest
/// error estimate until the summed estimate is below `abs_tol` or
/// `max_evaluations` is exhausted.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_evaluations: usize,
) -> Result<Quadrature, QuadratureError> {
    let checked = |x: f64| f(x);
    let (value, error) = gauss_kronrod_15(&checked, a, b);
    let mut evaluations = 15;
    if !value.is_finite() {
        return Err(QuadratureError::NonFinite(0.5 * (a + b)));
    }
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value, error });
    let mut total = value;
    let mut total_error = error;
    while total_error > abs_tol {
        if evaluations + 30 > max_evaluations {
            return Err(QuadratureError::NotConverged {
                value: total,
                abs_error: total_error,
                evaluations,
                tolerance: abs_tol,
            });
        }
        let worst = heap.pop().expect("heap holds at least one piece");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at double precision
            return Err(QuadratureError::NotConverged {
                value: total,
                abs_error: total_error,
                evaluations,
                tolerance: abs_tol,
            });
        }
        let (lv, le) = gauss_kronrod_15(&checked, worst.a, mid);
        let (rv, re) = gauss_kronrod_15(&checked, mid, worst.b);
        evaluations += 30;
        if !(lv.is_finite() && rv.is_finite()) {
            return Err(QuadratureError::NonFinite(mid));
        }
        total += lv + rv - worst.value;
        total_error += le + re - worst.error;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
        });
    }
    // re-sum to shed the drift of the running updates
    let value = heap.iter().map(|p| p.value).sum();
    let abs_error = heap.iter().map(|p| p.error).sum();
    Ok(Quadrature {
        value,
        abs_error,
        evaluations,
    })
}
