//! One-sample Kolmogorov–Smirnov statistic against a distribution function
//! that may have atoms.

/// Asymptotic 1% critical value of `sqrt(n) * D_n` (Kolmogorov distribution).
pub const KS_CRIT_1PCT: f64 = 1.627_624;

/// Critical value of `D_n` at the 1% level for `n` samples.
pub fn critical_value_1pct(n: usize) -> f64 {
    KS_CRIT_1PCT / (n as f64).sqrt()
}

/// `sup_x |F_n(x) - F(x)|` for the empirical distribution of `samples`.
///
/// `cdf` must be right-continuous; `cdf_left(x)` is the left limit `F(x-)`,
/// which differs from `cdf(x)` only at atoms. Ties in the sample are grouped
/// so an atom of `F` matched by repeated sample values contributes no
/// spurious distance.
pub fn ks_statistic<F, L>(samples: &[f64], cdf: F, cdf_left: L) -> f64
where
    F: Fn(f64) -> f64,
    L: Fn(f64) -> f64,
{
    let mut xs: Vec<f64> = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        let below = i as f64 / n;
        let upto = j as f64 / n;
        d = d.max((cdf_left(x) - below).abs()).max((upto - cdf(x)).abs());
        i = j;
    }
    d
}
