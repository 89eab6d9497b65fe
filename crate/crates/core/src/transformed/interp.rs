//! Lagrange interpolation on equally spaced levels, in level units.

/// Weights of the polynomial through nodes `first, first+1, …` evaluated at `x`.
pub(crate) fn lagrange_weights<const N: usize>(first: f64, x: f64) -> [f64; N] {
    let mut w = [1.0; N];
    for (j, wj) in w.iter_mut().enumerate() {
        let xj = first + j as f64;
        for m in 0..N {
            if m != j {
                let xm = first + m as f64;
                *wj *= (x - xm) / (xj - xm);
            }
        }
    }
    w
}

/// Weights of the derivative (per level unit) of the same polynomial.
pub(crate) fn lagrange_derivative_weights<const N: usize>(first: f64, x: f64) -> [f64; N] {
    let mut w = [0.0; N];
    for (j, wj) in w.iter_mut().enumerate() {
        let xj = first + j as f64;
        let mut denom = 1.0;
        for m in 0..N {
            if m != j {
                denom *= xj - (first + m as f64);
            }
        }
        let mut num = 0.0;
        for skip in 0..N {
            if skip == j {
                continue;
            }
            let mut prod = 1.0;
            for m in 0..N {
                if m != j && m != skip {
                    prod *= x - (first + m as f64);
                }
            }
            num += prod;
        }
        *wj = num / denom;
    }
    w
}
