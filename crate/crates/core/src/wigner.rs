//! Discrete Wigner functions on the ring.
//!
//! For a pure state started at node `j`,
//!
//! ```text
//! W_j(x, kappa; t) = 1/N sum_y exp(i 2 pi kappa y / N) <x-y|j;t> <j;t|x+y>
//! ```
//!
//! with all positions taken modulo `N`. Grids are stored with rows indexed by
//! the position `x` and columns by the momentum index `kappa`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{DisorderKind, RingSize};
use crate::spectral::{propagate, AmplitudeVector, EigenSystem};

/// Largest discarded imaginary part tolerated when taking the real part.
pub const REALNESS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeLabel {
    At(f64),
    /// Finite-window average over `[0, T]`.
    Average(f64),
    LongTime,
}

impl fmt::Display for TimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeLabel::At(t) => write!(f, "{t}"),
            TimeLabel::Average(t) => write!(f, "avg{t}"),
            TimeLabel::LongTime => f.write_str("longtime"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMeta {
    pub n: usize,
    pub j: usize,
    pub time: TimeLabel,
    pub kind: DisorderKind,
    pub delta: f64,
    /// Realization seed, or the base seed of an ensemble.
    pub seed: u64,
    /// Number of realizations averaged into the grid.
    pub r: usize,
}

impl GridMeta {
    pub fn new(n: usize, j: usize, time: TimeLabel) -> Self {
        Self {
            n,
            j,
            time,
            kind: DisorderKind::None,
            delta: 0.0,
            seed: 0,
            r: 1,
        }
    }
}

/// Real `N x N` phase-space array.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid {
    pub meta: GridMeta,
    w: Vec<f64>,
}

impl PhaseSpaceGrid {
    pub fn from_values(meta: GridMeta, w: Vec<f64>) -> Result<Self> {
        let n = meta.n;
        if w.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: w.len(),
            });
        }
        Ok(Self { meta, w })
    }

    pub fn zeros(meta: GridMeta) -> Self {
        let n = meta.n;
        Self {
            meta,
            w: vec![0.0; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.meta.n
    }

    #[inline]
    pub fn get(&self, x: usize, kappa: usize) -> f64 {
        self.w[x * self.meta.n + kappa]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        let n = self.meta.n;
        &self.w[x * n..(x + 1) * n]
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.w
    }

    pub fn total(&self) -> f64 {
        self.w.iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.w.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &PhaseSpaceGrid) -> f64 {
        assert_eq!(self.n(), other.n(), "grid sizes differ");
        self.w
            .iter()
            .zip(&other.w)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// `exp(i 2 pi m / N)` for `m = 0..N`.
fn unit_roots(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|m| Complex64::from_polar(1.0, std::f64::consts::TAU * m as f64 / n as f64))
        .collect()
}

/// Evaluates `1/N sum_y exp(i 2 pi kappa y / N) f(x, y)` on the grid, where
/// `corr(x, out)` fills `out[y] = f(x, y)`.
fn transform_rows<F>(meta: GridMeta, mut corr: F) -> Result<PhaseSpaceGrid>
where
    F: FnMut(usize, &mut [Complex64]),
{
    let n = meta.n;
    let roots = unit_roots(n);
    let inv_n = 1.0 / n as f64;
    let mut w = vec![0.0; n * n];
    let mut f = vec![Complex64::new(0.0, 0.0); n];
    let mut residue = 0.0f64;
    for x in 0..n {
        corr(x, &mut f);
        for kappa in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut idx = 0;
            for fy in &f {
                acc += roots[idx] * fy;
                idx += kappa;
                if idx >= n {
                    idx -= n;
                }
            }
            residue = residue.max((acc.im * inv_n).abs());
            w[x * n + kappa] = acc.re * inv_n;
        }
    }
    if residue > REALNESS_TOL {
        return Err(Error::NotReal {
            residue,
            tolerance: REALNESS_TOL,
        });
    }
    PhaseSpaceGrid::from_values(meta, w)
}

/// Wigner function of the pure state `a`.
pub fn wigner_snapshot(a: &AmplitudeVector) -> Result<PhaseSpaceGrid> {
    let n = a.n();
    let ring = RingSize::new(n)?;
    let amps = &a.amps;
    transform_rows(GridMeta::new(n, a.j, TimeLabel::At(a.t)), |x, f| {
        for (y, fy) in f.iter_mut().enumerate() {
            let lo = ring.wrap(x as isize - y as isize);
            let hi = ring.wrap((x + y) as isize);
            *fy = amps[lo] * amps[hi].conj();
        }
    })
}

/// Closed-form Wigner function of the unperturbed ring (Bloch ansatz).
pub fn wigner_bloch(n: RingSize, j: usize, t: f64) -> Result<PhaseSpaceGrid> {
    n.check_node(j)?;
    let len = n.get();
    let roots = unit_roots(len);
    let cosines: Vec<f64> = roots.iter().map(|z| z.re).collect();
    let inv = 1.0 / (len * len) as f64;
    let mut w = vec![0.0; len * len];
    for x in 0..len {
        let dx = n.wrap(x as isize - j as isize);
        for kappa in 0..len {
            let mut acc = 0.0;
            for m in 0..len {
                let spatial = ((2 * m + kappa) * dx) % len;
                let energy = cosines[(kappa + m) % len] - cosines[m];
                // Re{ exp(-i a) exp(-i b) } = cos(a + b)
                let phase = std::f64::consts::TAU * spatial as f64 / len as f64 + 2.0 * t * energy;
                acc += phase.cos();
            }
            w[x * len + kappa] = acc * inv;
        }
    }
    PhaseSpaceGrid::from_values(GridMeta::new(len, j, TimeLabel::At(t)), w)
}

/// Convenience: `wigner_snapshot(propagate(es, j, t))`.
pub fn wigner_at(es: &EigenSystem, j: usize, t: f64) -> Result<PhaseSpaceGrid> {
    wigner_snapshot(&propagate(es, j, t)?)
}

/// Exact infinite-time average. Only pairs of eigenstates inside one
/// degenerate group survive the average, so with
/// `A_g(z) = sum_{theta in g} <z|Phi_theta><Phi_theta|j>` the correlation
/// reduces to `sum_g A_g(x-y) A_g(x+y)`.
pub fn wigner_longtime(es: &EigenSystem, j: usize) -> Result<PhaseSpaceGrid> {
    let ring = es.ring_size();
    ring.check_node(j)?;
    let n = ring.get();
    let projected: Vec<Vec<f64>> = es
        .groups()
        .iter()
        .map(|g| {
            (0..n)
                .map(|z| g.clone().map(|t| es.component(z, t) * es.component(j, t)).sum())
                .collect()
        })
        .collect();
    transform_rows(GridMeta::new(n, j, TimeLabel::LongTime), |x, f| {
        for (y, fy) in f.iter_mut().enumerate() {
            let lo = ring.wrap(x as isize - y as isize);
            let hi = ring.wrap((x + y) as isize);
            let c: f64 = projected.iter().map(|a| a[lo] * a[hi]).sum();
            *fy = Complex64::new(c, 0.0);
        }
    })
}

/// Sample times and trapezoid weights for the average over `[0, t_max]`.
/// Weights sum to one.
pub fn trapezoid_schedule(t_max: f64, n_samples: usize) -> Vec<(f64, f64)> {
    assert!(n_samples >= 2, "need at least two samples");
    let intervals = (n_samples - 1) as f64;
    (0..n_samples)
        .map(|i| {
            let t = t_max * i as f64 / intervals;
            let w = if i == 0 || i == n_samples - 1 { 0.5 } else { 1.0 } / intervals;
            (t, w)
        })
        .collect()
}

/// Trapezoidal time average of snapshots over `[0, t_max]`. Converges to
/// [`wigner_longtime`] as `t_max` grows.
pub fn finite_time_average(
    es: &EigenSystem,
    j: usize,
    t_max: f64,
    n_samples: usize,
) -> Result<PhaseSpaceGrid> {
    if !(t_max >= 0.0 && t_max.is_finite()) || n_samples < 2 {
        return Err(Error::InvalidSpec(format!(
            "time average needs t_max >= 0 and at least 2 samples (got {t_max}, {n_samples})"
        )));
    }
    let n = es.n();
    let mut out = PhaseSpaceGrid::zeros(GridMeta::new(n, j, TimeLabel::Average(t_max)));
    for (t, weight) in trapezoid_schedule(t_max, n_samples) {
        let g = wigner_at(es, j, t)?;
        for (o, v) in out.w.iter_mut().zip(&g.w) {
            *o += weight * v;
        }
    }
    Ok(out)
}

/// `sum_kappa W(x, kappa)` for each `x`.
pub fn marginal_position(g: &PhaseSpaceGrid) -> Vec<f64> {
    (0..g.n()).map(|x| g.row(x).iter().sum()).collect()
}

/// `sum_x W(x, kappa)` for each `kappa`.
pub fn marginal_momentum(g: &PhaseSpaceGrid) -> Vec<f64> {
    let n = g.n();
    let mut out = vec![0.0; n];
    for x in 0..n {
        for (o, v) in out.iter_mut().zip(g.row(x)) {
            *o += v;
        }
    }
    out
}

/// Literal eigen double sum for the snapshot, `O(N^5)`. Cross-check path for
/// small rings only.
pub fn wigner_eigen_direct(es: &EigenSystem, j: usize, t: f64) -> Result<PhaseSpaceGrid> {
    direct_double_sum(es, j, TimeLabel::At(t), |_, _| true)
}

/// Literal restricted double sum for the long-time average, with the
/// degeneracy selector evaluated pairwise. Cross-check path for small rings.
pub fn wigner_longtime_direct(es: &EigenSystem, j: usize) -> Result<PhaseSpaceGrid> {
    let mut group_of = vec![0; es.n()];
    for (gi, g) in es.groups().iter().enumerate() {
        for t in g.clone() {
            group_of[t] = gi;
        }
    }
    direct_double_sum(es, j, TimeLabel::LongTime, |a, b| group_of[a] == group_of[b])
}

fn direct_double_sum<S>(
    es: &EigenSystem,
    j: usize,
    time: TimeLabel,
    keep: S,
) -> Result<PhaseSpaceGrid>
where
    S: Fn(usize, usize) -> bool,
{
    let ring = es.ring_size();
    ring.check_node(j)?;
    let n = ring.get();
    let t = match time {
        TimeLabel::At(t) => t,
        _ => 0.0,
    };
    let e = es.values();
    transform_rows(GridMeta::new(n, j, time), |x, f| {
        for (y, fy) in f.iter_mut().enumerate() {
            let lo = ring.wrap(x as isize - y as isize);
            let hi = ring.wrap((x + y) as isize);
            let mut acc = Complex64::new(0.0, 0.0);
            for tp in 0..n {
                let left = es.component(lo, tp) * es.component(j, tp);
                for th in 0..n {
                    if !keep(th, tp) {
                        continue;
                    }
                    let right = es.component(j, th) * es.component(hi, th);
                    acc += Complex64::from_polar(left * right, -(e[tp] - e[th]) * t);
                }
            }
            *fy = acc;
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_h0, realize};
    use crate::spectral::{eigendecompose, transition_probability};

    fn ring(n: usize) -> RingSize {
        RingSize::new(n).unwrap()
    }

    fn h0_es(n: usize) -> EigenSystem {
        eigendecompose(&build_h0(ring(n)), None).unwrap()
    }

    #[test]
    fn t0_signature_odd_and_even() {
        for n in [5usize, 6, 20, 21] {
            let j = n / 2;
            let g = wigner_at(&h0_es(n), j, 0.0).unwrap();
            for x in 0..n {
                for k in 0..n {
                    let want = if x == j {
                        1.0 / n as f64
                    } else if n % 2 == 0 && x == (j + n / 2) % n {
                        (if k % 2 == 0 { 1.0 } else { -1.0 }) / n as f64
                    } else {
                        0.0
                    };
                    assert!((g.get(x, k) - want).abs() < 1e-12, "N={n} x={x} k={k}");
                }
            }
        }
    }

    #[test]
    fn bloch_t0_equals_snapshot() {
        for n in [7usize, 8] {
            let b = wigner_bloch(ring(n), 2, 0.0).unwrap();
            let s = wigner_at(&h0_es(n), 2, 0.0).unwrap();
            assert!(b.max_abs_diff(&s) < 1e-12);
        }
    }

    #[test]
    fn bloch_reflection_about_source_flips_momentum() {
        for (n, j, t) in [(11usize, 3usize, 2.5), (12, 7, 13.0), (5, 0, 0.7)] {
            let g = wigner_bloch(ring(n), j, t).unwrap();
            let r = ring(n);
            for x in 0..n {
                let xr = r.wrap(2 * j as isize - x as isize);
                for k in 0..n {
                    let kr = (n - k) % n;
                    assert!((g.get(xr, k) - g.get(x, kr)).abs() < 1e-12, "N={n} j={j} t={t} x={x} k={k}");
                }
            }
        }
    }

    #[test]
    fn direct_double_sum_matches_amplitude_path() {
        let h = realize(ring(9), DisorderKind::Dod, 0.5, 4, false).unwrap();
        let es = eigendecompose(&h, None).unwrap();
        let fast = wigner_at(&es, 4, 3.3).unwrap();
        let slow = wigner_eigen_direct(&es, 4, 3.3).unwrap();
        assert!(fast.max_abs_diff(&slow) < 1e-13);
    }

    #[test]
    fn grouped_longtime_matches_literal_sum() {
        for n in [9usize, 10] {
            let es = h0_es(n);
            let a = wigner_longtime(&es, 3).unwrap();
            let b = wigner_longtime_direct(&es, 3).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-13);
        }
        let h = realize(ring(12), DisorderKind::Dd, 0.3, 1, false).unwrap();
        let es = eigendecompose(&h, None).unwrap();
        let a = wigner_longtime(&es, 5).unwrap();
        let b = wigner_longtime_direct(&es, 5).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-13);
    }

    #[test]
    fn longtime_odd_oracle() {
        let n = 21;
        let j = 10;
        let g = wigner_longtime(&h0_es(n), j).unwrap();
        let nf = n as f64;
        for x in 0..n {
            for k in 0..n {
                let want = match (k, x == j) {
                    (0, true) => 1.0 / nf,
                    (0, false) => 0.0,
                    _ => 1.0 / (nf * nf),
                };
                assert!((g.get(x, k) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn longtime_even_oracle() {
        let n = 20;
        let j = 10;
        let g = wigner_longtime(&h0_es(n), j).unwrap();
        let nf = n as f64;
        for x in 0..n {
            for k in 0..n {
                let want = if k == 0 {
                    if x == j || x == (j + n / 2) % n { 1.0 / nf } else { 0.0 }
                } else if k % 2 == 0 {
                    2.0 / (nf * nf)
                } else {
                    0.0
                };
                assert!((g.get(x, k) - want).abs() < 1e-12, "x={x} k={k}");
            }
        }
    }

    #[test]
    fn marginals_of_t0() {
        let g = wigner_at(&h0_es(7), 3, 0.0).unwrap();
        assert!(marginal_momentum(&g).iter().all(|v| (v - 1.0 / 7.0).abs() < 1e-12));
        let g = wigner_at(&h0_es(8), 3, 0.0).unwrap();
        for (k, v) in marginal_momentum(&g).iter().enumerate() {
            let want = if k % 2 == 0 { 2.0 / 8.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn snapshot_marginal_is_transition_probability() {
        let h = realize(ring(15), DisorderKind::ConstrainedDod, 0.4, 2, false).unwrap();
        let es = eigendecompose(&h, None).unwrap();
        let a = propagate(&es, 6, 7.5).unwrap();
        let g = wigner_snapshot(&a).unwrap();
        for (m, p) in marginal_position(&g).iter().zip(transition_probability(&a)) {
            assert!((m - p).abs() < 1e-10);
        }
        assert!((g.total() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn time_average_degenerate_window_is_t0() {
        let es = h0_es(6);
        let avg = finite_time_average(&es, 2, 0.0, 2).unwrap();
        let snap = wigner_at(&es, 2, 0.0).unwrap();
        assert!(avg.max_abs_diff(&snap) < 1e-15);
        assert!(finite_time_average(&es, 2, 1.0, 1).is_err());
        assert!(finite_time_average(&es, 2, -1.0, 5).is_err());
    }

    #[test]
    fn trapezoid_weights_sum_to_one() {
        let s = trapezoid_schedule(10.0, 11);
        assert_eq!(s.len(), 11);
        assert!((s.iter().map(|p| p.1).sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(s[10].0, 10.0);
    }

    #[test]
    fn non_real_input_is_rejected() {
        // f(y) != conj(f(N - y)), so the y-sum keeps an imaginary part.
        let meta = GridMeta::new(3, 0, TimeLabel::At(0.0));
        let err = transform_rows(meta, |_, f| {
            for fy in f.iter_mut() {
                *fy = Complex64::new(0.0, 1.0);
            }
            f[1] = Complex64::new(0.0, 0.0);
        });
        assert!(matches!(err, Err(Error::NotReal { .. })));
    }
}
