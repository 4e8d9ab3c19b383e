//! `W`-Brownian motion and bridge on mesh nodes, stochastic integrals,
//! pathwise white noise, the Gaussian transition semigroup, and Monte-Carlo
//! statistics.

mod integrals;
mod path;
mod semigroup;

use std::io::Write;

pub use integrals::{
    simple_form,stoch_integral_ibp, stoch_integral_simple, white_noise_apply, white_noise_checked, white_noise_load, WhiteNoiseValue};
pub use path::{sample_bm, sample_bm_from, sample_bridge, sample_bridge_from, PathKind, SamplePath};
pub use semigroup::{
    chapman_kolmogorov_residual, normalization_error, semigroup_apply, transition_density, DEGENERATE_VARIANCE,
    TRUNCATION_SIGMAS,
};

use crate::calculus::reproducing_kernel;
use crate::measure::{MeasureFunction, Side};
use crate::Result;

/// `Cov(B(t), B(s)) = W(t∧s)`.
pub fn cov_bm(w: &MeasureFunction, t: f64, s: f64) -> f64 {
    w.eval(t.min(s), Side::Right)
}

/// `W(t∧s) − W(t)W(s)/W(1)`.
pub fn cov_bridge(w: &MeasureFunction, t: f64, s: f64) -> f64 {
    reproducing_kernel(w, t, s)
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    /// `|value − target| ≤ k·se`. A zero standard error demands equality.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.se
    }
}

/// Unbiased sample covariance with a jackknife standard error.
pub fn sample_cov(xs: &[f64], ys: &[f64]) -> Estimate {
    let n = xs.len();
    assert_eq!(n, ys.len(), "paired samples");
    assert!(n >= 3, "need at least three samples");
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let cx: Vec<f64> = xs.iter().map(|x| x - mx).collect();
    let cy: Vec<f64> = ys.iter().map(|y| y - my).collect();
    let sxy: f64 = cx.iter().zip(&cy).map(|(a, b)| a * b).sum();
    // centred data: the sums of cx and cy vanish up to rounding, keep them anyway
    let sx: f64 = cx.iter().sum();
    let sy: f64 = cy.iter().sum();
    let value = (sxy - sx * sy / nf) / (nf - 1.0);
    let loo: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = (cx[i], cy[i]);
            ((sxy - a * b) - (sx - a) * (sy - b) / (nf - 1.0)) / (nf - 2.0)
        })
        .collect();
    let mean = loo.iter().sum::<f64>() / nf;
    let var = loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>() * (nf - 1.0) / nf;
    Estimate { value, se: var.sqrt() }
}

/// `Cov(B(t), B(s))` over a path ensemble (`t`, `s` mesh nodes).
pub fn empirical_cov(paths: &[SamplePath], t: f64, s: f64) -> Result<Estimate> {
    let xs = paths.iter().map(|p| p.at(t, Side::Right)).collect::<Result<Vec<_>>>()?;
    let ys = paths.iter().map(|p| p.at(s, Side::Right)).collect::<Result<Vec<_>>>()?;
    Ok(sample_cov(&xs, &ys))
}

/// `Var(B(d) − B(d−))` over a path ensemble.
pub fn empirical_jump_variance(paths: &[SamplePath], d: f64) -> Result<Estimate> {
    let js = paths
        .iter()
        .map(|p| Ok(p.at(d, Side::Right)? - p.at(d, Side::Left)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(sample_cov(&js, &js))
}

/// Ensemble summary `t,s,emp_cov,se,exact_cov`.
pub fn write_cov_summary(rows: &[(f64, f64, Estimate, f64)], out: &mut impl Write) -> Result<()> {
    writeln!(out, "t,s,emp_cov,se,exact_cov")?;
    for (t, s, e, exact) in rows {
        writeln!(out, "{t},{s},{},{},{exact}", e.value, e.se)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Continuity;

    #[test]
    fn covariance_values() {
        let id = MeasureFunction::identity(Continuity::Cadlag);
        assert!((cov_bm(&id, 0.3, 0.7) - 0.3).abs() < 1e-15);
        assert!((cov_bridge(&id, 0.4, 0.4) - 0.24).abs() < 1e-15);
        let w = crate::measure::two_atom_w(16);
        assert!((cov_bm(&w, 0.25, 0.5) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn jackknife_matches_textbook_on_small_sample() {
        let xs = [1.0, 2.0, 4.0, 7.0];
        let ys = [2.0, 1.0, 5.0, 6.0];
        let e = sample_cov(&xs, &ys);
        // oracle: explicit leave-one-out recomputation
        let cov = |a: &[f64], b: &[f64]| {
            let n = a.len() as f64;
            let ma = a.iter().sum::<f64>() / n;
            let mb = b.iter().sum::<f64>() / n;
            a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (n - 1.0)
        };
        assert!((e.value - cov(&xs, &ys)).abs() < 1e-14);
        let loo: Vec<f64> = (0..4)
            .map(|i| {
                let a: Vec<f64> = xs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect();
                let b: Vec<f64> = ys.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect();
                cov(&a, &b)
            })
            .collect();
        let m = loo.iter().sum::<f64>() / 4.0;
        let se = (loo.iter().map(|v| (v - m).powi(2)).sum::<f64>() * 3.0 / 4.0).sqrt();
        assert!((e.se - se).abs() < 1e-13);
    }
}
