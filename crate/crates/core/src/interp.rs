//! Monotone cubic (PCHIP) interpolation of complex samples and
//! finite-difference derivatives on non-uniform grids.
//!
//! Real and imaginary parts are interpolated independently. Evaluation at a
//! node returns the stored sample exactly. Beyond the last node the
//! interpolant continues affinely with the last secant.

use crate::C64;

#[derive(Clone, Debug)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<C64>,
    d: Vec<C64>,
}

impl Pchip {
    /// `x` must be strictly increasing.
    pub fn new(x: &[f64], y: &[C64]) -> Self {
        assert_eq!(x.len(), y.len());
        assert!(!x.is_empty());
        let re: Vec<f64> = y.iter().map(|z| z.re).collect();
        let im: Vec<f64> = y.iter().map(|z| z.im).collect();
        let dr = pchip_slopes(x, &re);
        let di = pchip_slopes(x, &im);
        Self {
            x: x.to_vec(),
            y: y.to_vec(),
            d: dr.iter().zip(&di).map(|(&a, &b)| C64::new(a, b)).collect(),
        }
    }

    pub fn eval(&self, t: f64) -> C64 {
        hermite_eval(&self.x, &self.y, &self.d, t)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }
}

/// Evaluate a piecewise cubic Hermite interpolant with given node slopes.
pub fn hermite_eval(x: &[f64], y: &[C64], d: &[C64], t: f64) -> C64 {
    let n = x.len();
    if n == 1 {
        return y[0];
    }
    if t >= x[n - 1] {
        if t == x[n - 1] {
            return y[n - 1];
        }
        let s = (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
        return y[n - 1] + s * (t - x[n - 1]);
    }
    if t <= x[0] {
        if t == x[0] {
            return y[0];
        }
        let s = (y[1] - y[0]) / (x[1] - x[0]);
        return y[0] + s * (t - x[0]);
    }
    // partition_point gives the first node > t
    let k = x.partition_point(|&v| v <= t) - 1;
    if t == x[k] {
        return y[k];
    }
    let h = x[k + 1] - x[k];
    let s = (t - x[k]) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    y[k] * h00 + d[k] * (h10 * h) + y[k + 1] * h01 + d[k + 1] * (h11 * h)
}

/// Fritsch-Carlson slopes with the usual shape-preserving end conditions.
pub fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 1 {
        return vec![0.0];
    }
    let h: Vec<f64> = (0..n - 1).map(|k| x[k + 1] - x[k]).collect();
    let del: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![del[0], del[0]];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if del[k - 1] * del[k] <= 0.0 {
            d[k] = 0.0;
        } else if del[k - 1] == del[k] {
            d[k] = del[k];
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
        }
    }
    d[0] = edge_slope(h[0], h[1], del[0], del[1]);
    d[n - 1] = edge_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    d
}

fn edge_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() || m0 == 0.0 {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

/// Second-order finite-difference derivative of samples on a non-uniform grid.
pub fn fd_derivative(x: &[f64], y: &[C64]) -> Vec<C64> {
    let n = x.len();
    match n {
        0 => vec![],
        1 => vec![C64::new(0.0, 0.0)],
        2 => {
            let s = (y[1] - y[0]) / (x[1] - x[0]);
            vec![s, s]
        }
        _ => {
            let mut d = vec![C64::new(0.0, 0.0); n];
            for i in 1..n - 1 {
                let h1 = x[i] - x[i - 1];
                let h2 = x[i + 1] - x[i];
                d[i] = y[i - 1] * (-h2 / (h1 * (h1 + h2)))
                    + y[i] * ((h2 - h1) / (h1 * h2))
                    + y[i + 1] * (h1 / (h2 * (h1 + h2)));
            }
            d[0] = three_point_end(x[0], x[1], x[2], y[0], y[1], y[2]);
            d[n - 1] = three_point_end(
                x[n - 1],
                x[n - 2],
                x[n - 3],
                y[n - 1],
                y[n - 2],
                y[n - 3],
            );
            d
        }
    }
}

// Derivative at x0 of the parabola through three points.
fn three_point_end(x0: f64, x1: f64, x2: f64, y0: C64, y1: C64, y2: C64) -> C64 {
    let a = x1 - x0;
    let b = x2 - x0;
    y0 * (-(a + b) / (a * b)) + y1 * (b / (a * (b - a))) + y2 * (-a / (b * (b - a)))
}
