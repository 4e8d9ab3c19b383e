use crate::measure::{MeasureFunction, Side};
use crate::{Error, Result};

/// Below this variance the kernel is treated as a point mass.
pub const DEGENERATE_VARIANCE: f64 = 1e-14;
/// Half-width of the quadrature window in standard deviations.
pub const TRUNCATION_SIGMAS: f64 = 8.0;

fn variance(w: &MeasureFunction, s: f64, t: f64) -> Result<f64> {
    if !(s <= t) {
        return Err(Error::InvalidArgument(format!("need s ≤ t, got s = {s}, t = {t}")));
    }
    Ok(w.eval(t, Side::Right) - w.eval(s, Side::Right))
}

/// `p_{s,t}(x, y)`: Gaussian density in `y` with mean `x` and variance
/// `W(t) − W(s)`.
pub fn transition_density(w: &MeasureFunction, s: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    let var = variance(w, s, t)?;
    if var < DEGENERATE_VARIANCE {
        return Err(Error::DegenerateKernel(var));
    }
    Ok((-(y - x).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt())
}

/// Trapezoid rule for `∫ p(x, y) f(y) dy` over `x ± 8σ` with `points` nodes.
fn gaussian_average(f: &dyn Fn(f64) -> f64, x: f64, var: f64, points: usize) -> f64 {
    let sd = var.sqrt();
    let half = TRUNCATION_SIGMAS * sd;
    let m = points.max(3) - 1;
    let h = 2.0 * half / m as f64;
    let norm = 1.0 / (2.0 * std::f64::consts::PI * var).sqrt();
    let mut acc = 0.0;
    for k in 0..=m {
        let z = -half + k as f64 * h;
        let wgt = if k == 0 || k == m { 0.5 } else { 1.0 };
        acc += wgt * (-z * z / (2.0 * var)).exp() * f(x + z);
    }
    acc * h * norm
}

/// `(T_{s,t} f)(x)` for every `x` in `xs`. For `W(t) − W(s)` below the
/// degeneracy threshold this is `f` itself (`T_{s,s} = I`).
pub fn semigroup_apply(
    w: &MeasureFunction,
    s: f64,
    t: f64,
    f: &dyn Fn(f64) -> f64,
    xs: &[f64],
    points: usize,
) -> Result<Vec<f64>> {
    let var = variance(w, s, t)?;
    if var < DEGENERATE_VARIANCE {
        return Ok(xs.iter().map(|&x| f(x)).collect());
    }
    Ok(xs.iter().map(|&x| gaussian_average(f, x, var, points)).collect())
}

/// `sup_x |T_{s,t} f(x) − T_{s,u}(T_{u,t} f)(x)|` over `xs`.
pub fn chapman_kolmogorov_residual(
    w: &MeasureFunction,
    s: f64,
    u: f64,
    t: f64,
    f: &dyn Fn(f64) -> f64,
    xs: &[f64],
    points: usize,
) -> Result<f64> {
    if !(s <= u && u <= t) {
        return Err(Error::InvalidArgument(format!("need s ≤ u ≤ t, got {s}, {u}, {t}")));
    }
    let direct = semigroup_apply(w, s, t, f, xs, points)?;
    let var_ut = variance(w, u, t)?;
    let inner = move |y: f64| {
        if var_ut < DEGENERATE_VARIANCE {
            f(y)
        } else {
            gaussian_average(f, y, var_ut, points)
        }
    };
    let composed = semigroup_apply(w, s, u, &inner, xs, points)?;
    Ok(direct.iter().zip(&composed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// `|T_{s,t} 1 − 1|` at `x`.
pub fn normalization_error(w: &MeasureFunction, s: f64, t: f64, x: f64, points: usize) -> Result<f64> {
    let one = |_: f64| 1.0;
    Ok((semigroup_apply(w, s, t, &one, &[x], points)?[0] - 1.0).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Continuity;

    #[test]
    fn heat_kernel_of_gaussian_bump() {
        let w = MeasureFunction::identity(Continuity::Cadlag);
        let f = |y: f64| (-y * y / 0.02).exp();
        let t: f64 = 0.3;
        let xs: Vec<f64> = (-10..=10).map(|k| k as f64 * 0.1).collect();
        let got = semigroup_apply(&w, 0.0, t, &f, &xs, 801).unwrap();
        // bump with variance 0.01 convolved with variance t
        for (x, g) in xs.iter().zip(&got) {
            let var = 0.01 + t;
            let exact = (0.01 / var).sqrt() * (-x * x / (2.0 * var)).exp();
            assert!((g - exact).abs() < 1e-6);
        }
    }

    #[test]
    fn degenerate_kernel() {
        let w = MeasureFunction::identity(Continuity::Cadlag);
        assert!(matches!(transition_density(&w, 0.4, 0.4, 0.0, 0.0), Err(Error::DegenerateKernel(_))));
        let id = semigroup_apply(&w, 0.4, 0.4, &|y| y * y, &[0.5], 101).unwrap();
        assert_eq!(id, vec![0.25]);
    }

    #[test]
    fn normalized() {
        let w = crate::measure::two_atom_w(16);
        assert!(normalization_error(&w, 0.1, 0.7, 0.3, 801).unwrap() < 1e-8);
    }
}
