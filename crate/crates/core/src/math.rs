//! Thin wrappers over `libm` so the numerical code reads like ordinary
//! `f64` arithmetic without pulling in `std`.

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn ln1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub(crate) fn tan(x: f64) -> f64 {
    libm::tan(x)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub(crate) fn powi(x: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    let mut base = x;
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            acc *= base;
        }
        base *= base;
        k >>= 1;
    }
    acc
}

/// `(e^{-x} - 1 + x) / x^2`, accurate for small `x`.
pub(crate) fn exp_defect_ratio(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        // Taylor series: 1/2 - x/6 + x^2/24 - x^3/120 + x^4/720
        0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0 + x * x * x * x / 720.0
    } else {
        (x + expm1(-x)) / (x * x)
    }
}

/// `(1 - e^{-x}) / x` for `x >= 0`, equal to 1 at the origin.
pub(crate) fn one_minus_exp_ratio(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        -expm1(-x) / x
    }
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defect_ratio_is_continuous_across_series_switch() {
        for &x in &[9.99e-4, 1.001e-3, 0.5, 3.0] {
            let direct = (x - 1.0 + libm::exp(-x)) / (x * x);
            assert!((exp_defect_ratio(x) - direct).abs() < 1e-9);
        }
        assert!((exp_defect_ratio(0.0) - 0.5).abs() < 1e-16);
    }

    #[test]
    fn integer_powers_and_binomials() {
        assert_eq!(powi(0.5, 4), 0.0625);
        assert_eq!(powi(3.0, 0), 1.0);
        assert_eq!(binomial(6, 2), 15.0);
        assert_eq!(binomial(5, 5), 1.0);
    }
}
