//! Ring Hamiltonians and static disorder.
//!
//! The unperturbed operator is minus the transfer matrix of a ring with unit
//! transmission rate: `H0 = 2 on the diagonal, -1 between neighbours`.
//! Disorder perturbs only existing matrix elements, so no new bonds appear:
//!
//! ```text
//! H|j> = 2|j> - |j-1> - |j+1> + 2 D_jj |j> - D_j,j-1 |j-1> - D_j,j+1 |j+1>
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest disorder strength of the studied regime.
pub const MAX_DELTA: f64 = 0.5;

/// Number of nodes of a ring, labelled `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RingSize(usize);

impl RingSize {
    /// Rings with fewer than three sites would duplicate a bond.
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::RingTooSmall(n));
        }
        Ok(Self(n))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// Index reduced modulo the ring size, for any signed offset.
    #[inline]
    pub fn wrap(self, i: isize) -> usize {
        i.rem_euclid(self.0 as isize) as usize
    }

    pub(crate) fn check_node(self, node: usize) -> Result<()> {
        if node >= self.0 {
            return Err(Error::NodeOutOfRange { node, n: self.0 });
        }
        Ok(())
    }
}

impl fmt::Display for RingSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DisorderKind {
    /// Unperturbed ring; the strength is ignored.
    #[default]
    None,
    /// Diagonal (site) disorder only.
    Dd,
    /// Independent diagonal and off-diagonal (transfer) disorder.
    Dod,
    /// Off-diagonal disorder with `2 D_jj = D_j,j-1 + D_j,j+1`, which keeps
    /// every row sum zero like a classical transfer matrix.
    ConstrainedDod,
}

impl DisorderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DisorderKind::None => "none",
            DisorderKind::Dd => "dd",
            DisorderKind::Dod => "dod",
            DisorderKind::ConstrainedDod => "cdod",
        }
    }
}

impl fmt::Display for DisorderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DisorderKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(DisorderKind::None),
            "dd" => Ok(DisorderKind::Dd),
            "dod" => Ok(DisorderKind::Dod),
            "cdod" | "constrained-dod" | "constrained" => Ok(DisorderKind::ConstrainedDod),
            other => Err(format!(
                "unknown disorder kind `{other}` (expected none, dd, dod or cdod)"
            )),
        }
    }
}

/// One draw of the disorder operator. Stored values already carry the
/// strength factor.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderRealization {
    /// `D_jj`.
    pub diag: Vec<f64>,
    /// `offdiag[j] = D_j,j-1`, the bond between `j-1` and `j` (mod N).
    pub offdiag: Vec<f64>,
    pub kind: DisorderKind,
    pub delta: f64,
    pub seed: u64,
}

impl DisorderRealization {
    /// The all-zero realization.
    pub fn zero(n: RingSize) -> Self {
        Self {
            diag: vec![0.0; n.get()],
            offdiag: vec![0.0; n.get()],
            kind: DisorderKind::None,
            delta: 0.0,
            seed: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }
}

/// Standard normals by the Box-Muller transform over a seeded ChaCha8 stream.
/// Both variates of each pair are consumed in order.
struct NormalStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalStream {
    fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = 1.0 - self.rng.random::<f64>();
        let u2 = self.rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    fn fill(&mut self, out: &mut [f64], scale: f64) {
        for v in out {
            *v = scale * self.next();
        }
    }
}

/// Draws a disorder realization.
///
/// Draw order is fixed: DD fills `diag`; DOD fills `diag` then `offdiag`;
/// the constrained model fills `offdiag` and derives `diag` from it.
pub fn sample_disorder(
    n: RingSize,
    kind: DisorderKind,
    delta: f64,
    seed: u64,
) -> Result<DisorderRealization> {
    if !(0.0..=MAX_DELTA).contains(&delta) {
        return Err(Error::DeltaOutOfRange(delta));
    }
    sample_disorder_uncapped(n, kind, delta, seed)
}

/// Like [`sample_disorder`] but accepts any finite non-negative strength.
pub fn sample_disorder_uncapped(
    n: RingSize,
    kind: DisorderKind,
    delta: f64,
    seed: u64,
) -> Result<DisorderRealization> {
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::InvalidDelta(delta));
    }
    let len = n.get();
    let mut diag = vec![0.0; len];
    let mut offdiag = vec![0.0; len];
    let mut normals = NormalStream::new(seed);
    match kind {
        DisorderKind::None => return Err(Error::NoDisorderKind),
        DisorderKind::Dd => normals.fill(&mut diag, delta),
        DisorderKind::Dod => {
            normals.fill(&mut diag, delta);
            normals.fill(&mut offdiag, delta);
        }
        DisorderKind::ConstrainedDod => {
            normals.fill(&mut offdiag, delta);
            for j in 0..len {
                diag[j] = 0.5 * (offdiag[j] + offdiag[(j + 1) % len]);
            }
        }
    }
    Ok(DisorderRealization {
        diag,
        offdiag,
        kind,
        delta,
        seed,
    })
}

/// Dense real symmetric Hamiltonian of a ring.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    n: RingSize,
    entries: DMatrix<f64>,
}

impl HamiltonianMatrix {
    pub fn ring_size(&self) -> RingSize {
        self.n
    }

    pub fn n(&self) -> usize {
        self.n.get()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[(row, col)]
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn row(&self, row: usize) -> Vec<f64> {
        self.entries.row(row).iter().copied().collect()
    }
}

/// Unperturbed ring with unit transmission rate.
pub fn build_h0(n: RingSize) -> HamiltonianMatrix {
    let len = n.get();
    let mut entries = DMatrix::zeros(len, len);
    for j in 0..len {
        let prev = n.wrap(j as isize - 1);
        entries[(j, j)] = 2.0;
        entries[(j, prev)] = -1.0;
        entries[(prev, j)] = -1.0;
    }
    HamiltonianMatrix { n, entries }
}

/// `H = H0 + D`. `None` returns `h0` unchanged.
pub fn build_hamiltonian(
    h0: &HamiltonianMatrix,
    disorder: Option<&DisorderRealization>,
) -> Result<HamiltonianMatrix> {
    let Some(d) = disorder else {
        return Ok(h0.clone());
    };
    let n = h0.ring_size();
    let len = n.get();
    for got in [d.diag.len(), d.offdiag.len()] {
        if got != len {
            return Err(Error::DimensionMismatch { expected: len, got });
        }
    }
    let mut h = h0.clone();
    for j in 0..len {
        let prev = n.wrap(j as isize - 1);
        h.entries[(j, j)] += 2.0 * d.diag[j];
        let bond = h0.entries[(j, prev)] - d.offdiag[j];
        h.entries[(j, prev)] = bond;
        h.entries[(prev, j)] = bond;
    }
    Ok(h)
}

/// Convenience: the Hamiltonian of realization `seed`, or `H0` when the
/// disorder is trivial.
pub fn realize(
    n: RingSize,
    kind: DisorderKind,
    delta: f64,
    seed: u64,
    uncapped: bool,
) -> Result<HamiltonianMatrix> {
    let h0 = build_h0(n);
    if kind == DisorderKind::None {
        return Ok(h0);
    }
    let d = if uncapped {
        sample_disorder_uncapped(n, kind, delta, seed)?
    } else {
        sample_disorder(n, kind, delta, seed)?
    };
    build_hamiltonian(&h0, Some(&d))
}
