//! Symmetric eigendecomposition and time propagation of localized states.

use std::ops::Range;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{HamiltonianMatrix, RingSize};

/// Relative degeneracy tolerance, multiplied by the spectral range.
pub const DEFAULT_REL_EPS_DEG: f64 = 1e-9;

/// Eigenpairs of one Hamiltonian, eigenvalues ascending, with the
/// eigenvalues partitioned into degenerate groups.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    n: RingSize,
    values: Vec<f64>,
    /// Column `theta` is the eigenvector of `values[theta]`.
    vectors: DMatrix<f64>,
    groups: Vec<Range<usize>>,
    eps_deg: f64,
}

impl EigenSystem {
    pub fn ring_size(&self) -> RingSize {
        self.n
    }

    pub fn n(&self) -> usize {
        self.n.get()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// `<x|Phi_theta>`.
    #[inline]
    pub fn component(&self, x: usize, theta: usize) -> f64 {
        self.vectors[(x, theta)]
    }

    /// Degenerate groups as contiguous index ranges into the sorted spectrum.
    pub fn groups(&self) -> &[Range<usize>] {
        &self.groups
    }

    pub fn eps_deg(&self) -> f64 {
        self.eps_deg
    }

    /// `max_theta |H Phi_theta - E_theta Phi_theta|_2`.
    pub fn max_residual(&self, h: &HamiltonianMatrix) -> f64 {
        let hv = h.entries() * &self.vectors;
        (0..self.n())
            .map(|t| (hv.column(t) - self.vectors.column(t) * self.values[t]).norm())
            .fold(0.0, f64::max)
    }

    /// `max |Phi^T Phi - 1|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self.vectors.transpose() * &self.vectors;
        let n = self.n();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((gram[(a, b)] - target).abs());
            }
        }
        worst
    }

    /// `sum_theta E_theta Phi_theta Phi_theta^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let scaled = DMatrix::from_fn(self.n(), self.n(), |x, t| {
            self.vectors[(x, t)] * self.values[t]
        });
        scaled * self.vectors.transpose()
    }
}

/// Groups a sorted spectrum: neighbours share a group iff their gap is at
/// most `eps_deg`.
pub fn group_degenerate(sorted: &[f64], eps_deg: f64) -> Vec<Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for t in 1..=sorted.len() {
        if t == sorted.len() || sorted[t] - sorted[t - 1] > eps_deg {
            groups.push(start..t);
            start = t;
        }
    }
    groups
}

/// Eigendecomposes `h`. With `eps_deg = None` the degeneracy tolerance is
/// `1e-9` times the spectral range.
pub fn eigendecompose(h: &HamiltonianMatrix, eps_deg: Option<f64>) -> Result<EigenSystem> {
    let n = h.n();
    let eig = SymmetricEigen::try_new(h.entries().clone(), f64::EPSILON, 1000 * n)
        .ok_or(Error::EigenNoConvergence(n))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&t| eig.eigenvalues[t]).collect();
    let vectors = DMatrix::from_fn(n, n, |x, t| eig.eigenvectors[(x, order[t])]);

    let eps_deg = eps_deg.unwrap_or_else(|| {
        let range = values[n - 1] - values[0];
        DEFAULT_REL_EPS_DEG * if range > 0.0 { range } else { 1.0 }
    });
    let groups = group_degenerate(&values, eps_deg);
    Ok(EigenSystem {
        n: h.ring_size(),
        values,
        vectors,
        groups,
        eps_deg,
    })
}

/// Amplitudes `<x|j;t>` of a state started at node `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeVector {
    pub amps: Vec<Complex64>,
    pub j: usize,
    pub t: f64,
}

impl AmplitudeVector {
    pub fn n(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// `<x|exp(-iHt)|j> = sum_theta exp(-i E_theta t) <x|Phi_theta><Phi_theta|j>`.
pub fn propagate(es: &EigenSystem, j: usize, t: f64) -> Result<AmplitudeVector> {
    es.ring_size().check_node(j)?;
    let n = es.n();
    let coeffs: Vec<Complex64> = (0..n)
        .map(|theta| Complex64::from_polar(es.component(j, theta), -es.values[theta] * t))
        .collect();
    let amps = (0..n)
        .map(|x| {
            coeffs
                .iter()
                .enumerate()
                .map(|(theta, c)| c * es.component(x, theta))
                .sum()
        })
        .collect();
    Ok(AmplitudeVector { amps, j, t })
}

/// `pi_{x,j}(t) = |<x|j;t>|^2`.
pub fn transition_probability(a: &AmplitudeVector) -> Vec<f64> {
    a.amps.iter().map(|z| z.norm_sqr()).collect()
}
