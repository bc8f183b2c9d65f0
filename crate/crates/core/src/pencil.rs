//! Hankel pencils `U(z) = U_1 - z U_0` for poles and zeros, the squared
//! QR diagonal of `U(z)`, and generalized eigenvalues.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::measure::MomentSequence;
use crate::transform;

/// Largest acceptable 2-norm condition number of `U_0`.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PencilKind {
    /// Built from the raw moments; eigenvalues are the nodes.
    Pole,
    /// Built from the transformed moments starting at index 2; eigenvalues
    /// are the zeros of the Cauchy transform.
    Zero,
}

impl PencilKind {
    /// Index of the sequence entry in the top-left corner of `U_0`.
    fn offset(self) -> usize {
        match self {
            PencilKind::Pole => 0,
            PencilKind::Zero => 2,
        }
    }

    /// Sequence length needed for a pencil of order `q`.
    pub fn required_len(self, q: usize) -> usize {
        2 * q + self.offset()
    }
}

impl fmt::Display for PencilKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PencilKind::Pole => "pole",
            PencilKind::Zero => "zero",
        })
    }
}

impl FromStr for PencilKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pole" | "poles" => Ok(PencilKind::Pole),
            "zero" | "zeros" => Ok(PencilKind::Zero),
            other => Err(Error::Config(format!("unknown pencil kind {other:?}"))),
        }
    }
}

/// Default zero-pencil order for `n` moments, `n/2 - 2`.
pub fn default_zero_order(n: usize) -> usize {
    (n / 2).saturating_sub(2).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HankelPencil {
    kind: PencilKind,
    u0: CMatrix,
    u1: CMatrix,
}

impl HankelPencil {
    pub fn kind(&self) -> PencilKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.u0.nrows()
    }

    pub fn u0(&self) -> &CMatrix {
        &self.u0
    }

    pub fn u1(&self) -> &CMatrix {
        &self.u1
    }

    /// `U_1 - z U_0`.
    pub fn at(&self, z: Complex64) -> CMatrix {
        &self.u1 - &self.u0 * z
    }

    /// The pencil `(U_1 - z_0 U_0, U_0)`, whose value at `z - z_0` equals
    /// this pencil's value at `z`.
    pub fn shifted(&self, z0: Complex64) -> HankelPencil {
        HankelPencil { kind: self.kind, u0: self.u0.clone(), u1: self.at(z0) }
    }
}

/// Fills the Hankel pair from `seq`: raw moments for [`PencilKind::Pole`],
/// already transformed moments for [`PencilKind::Zero`].
pub fn build_pencil(seq: &MomentSequence, q: usize, kind: PencilKind) -> Result<HankelPencil> {
    if q == 0 {
        return Err(Error::Domain("pencil order must be positive".into()));
    }
    let required = kind.required_len(q);
    if seq.len() < required {
        return Err(Error::Length { required, got: seq.len() });
    }
    let off = kind.offset();
    let v = seq.values();
    let u0 = CMatrix::from_fn(q, q, |i, j| v[off + i + j]);
    let u1 = CMatrix::from_fn(q, q, |i, j| v[off + i + j + 1]);
    Ok(HankelPencil { kind, u0, u1 })
}

/// Builds the pencil from raw moments, applying `Φ` first for zero pencils.
pub fn pencil_from_moments(moments: &MomentSequence, q: usize, kind: PencilKind) -> Result<HankelPencil> {
    match kind {
        PencilKind::Pole => build_pencil(moments, q, kind),
        PencilKind::Zero => {
            let required = kind.required_len(q);
            if moments.len() < required {
                return Err(Error::Length { required, got: moments.len() });
            }
            build_pencil(&transform::phi(moments)?, q, kind)
        }
    }
}

/// Squared magnitudes of the diagonal of `R` in `U_1 - z U_0 = QR`.
#[derive(Debug, Clone, PartialEq)]
pub struct QRDiagonal {
    pub z: Complex64,
    pub values: Vec<f64>,
}

impl QRDiagonal {
    /// `Σ_k ln R²_kk = ln |det(U_1 - z U_0)|²`.
    pub fn log_abs_det_sq(&self) -> f64 {
        self.values.iter().map(|r| r.ln()).sum()
    }
}

/// Modified Gram–Schmidt on the columns of `U_1 - z U_0`.
///
/// A column that is exactly dependent on its predecessors leaves a zero
/// residual; its `R²` entry is 0 and it contributes nothing to later columns.
pub fn qr_diagonal(pencil: &HankelPencil, z: Complex64) -> QRDiagonal {
    let q = pencil.order();
    let mut cols: Vec<Vec<Complex64>> = (0..q)
        .map(|j| (0..q).map(|i| pencil.u1[(i, j)] - z * pencil.u0[(i, j)]).collect())
        .collect();
    let mut values = Vec::with_capacity(q);
    for k in 0..q {
        let norm_sq: f64 = cols[k].iter().map(|c| c.norm_sqr()).sum();
        values.push(norm_sq);
        if norm_sq == 0.0 {
            continue;
        }
        let inv = 1.0 / norm_sq.sqrt();
        let (done, rest) = cols.split_at_mut(k + 1);
        let qk = &mut done[k];
        for c in qk.iter_mut() {
            *c *= inv;
        }
        for col in rest.iter_mut() {
            let r: Complex64 = qk.iter().zip(col.iter()).map(|(a, b)| a.conj() * b).sum();
            for (c, a) in col.iter_mut().zip(qk.iter()) {
                *c -= r * a;
            }
        }
    }
    QRDiagonal { z, values }
}

/// Eigenvalues of `U_0^{-1} U_1`.
pub fn generalized_eigenvalues(pencil: &HankelPencil) -> Result<Vec<Complex64>> {
    let condition = linalg::condition_number(&pencil.u0);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularPencil { condition });
    }
    let product = pencil
        .u0
        .clone()
        .lu()
        .solve(&pencil.u1)
        .ok_or(Error::SingularPencil { condition })?;
    linalg::eigenvalues(&product)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{exact_moments, zeros_oracle, AtomicMeasure};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn seq(v: &[Complex64]) -> MomentSequence {
        MomentSequence::new(v.to_vec()).unwrap()
    }

    #[test]
    fn scalar_pencils() {
        let d = seq(&[c(2.0, 1.0), c(0.5, -1.0)]);
        let p = build_pencil(&d, 1, PencilKind::Pole).unwrap();
        assert_eq!(p.u0()[(0, 0)], d[0]);
        assert_eq!(p.u1()[(0, 0)], d[1]);
        let z = c(0.3, 0.4);
        let r = qr_diagonal(&p, z);
        assert!((r.values[0] - (d[1] - z * d[0]).norm_sqr()).abs() < 1e-15);

        let dt = seq(&[c(9.0, 0.0), c(8.0, 0.0), c(1.0, 2.0), c(3.0, 4.0)]);
        let p = build_pencil(&dt, 1, PencilKind::Zero).unwrap();
        assert_eq!(p.u0()[(0, 0)], dt[2]);
        assert_eq!(p.u1()[(0, 0)], dt[3]);
    }

    #[test]
    fn hankel_structure_and_length_errors() {
        let v: Vec<Complex64> = (0..12).map(|k| c(k as f64, -(k as f64) * 0.5)).collect();
        let d = seq(&v);
        for kind in [PencilKind::Pole, PencilKind::Zero] {
            let p = build_pencil(&d, 5, kind).unwrap();
            for i in 0..5 {
                for j in 0..5 {
                    if i + 1 < 5 && j > 0 {
                        assert_eq!(p.u0()[(i, j)], p.u0()[(i + 1, j - 1)]);
                    }
                }
            }
        }
        assert!(matches!(
            build_pencil(&d, 6, PencilKind::Zero),
            Err(Error::Length { required: 14, got: 12 })
        ));
        assert!(build_pencil(&d, 6, PencilKind::Pole).is_ok());
        assert!(build_pencil(&d, 0, PencilKind::Pole).is_err());
    }

    #[test]
    fn single_atom_pole() {
        let m = AtomicMeasure::new(vec![c(1.5, -0.5)], vec![c(0.2, 0.6)]).unwrap();
        let d = exact_moments(&m, 2).unwrap();
        let p = build_pencil(&d, 1, PencilKind::Pole).unwrap();
        let ev = generalized_eigenvalues(&p).unwrap();
        assert!((ev[0] - c(0.2, 0.6)).norm() < 1e-15);
    }

    #[test]
    fn two_atom_poles_and_zero() {
        let m = AtomicMeasure::new(vec![c(1.0, 0.0), c(3.0, 0.0)], vec![c(-0.4, 0.1), c(0.5, 0.3)]).unwrap();
        let d = exact_moments(&m, 8).unwrap();
        let poles = generalized_eigenvalues(&build_pencil(&d, 2, PencilKind::Pole).unwrap()).unwrap();
        for xi in m.nodes() {
            assert!(poles.iter().any(|e| (e - xi).norm() < 1e-10));
        }
        let zp = pencil_from_moments(&d, 1, PencilKind::Zero).unwrap();
        let zero = generalized_eigenvalues(&zp).unwrap()[0];
        let (c1, c2) = (m.weights()[0], m.weights()[1]);
        let (x1, x2) = (m.nodes()[0], m.nodes()[1]);
        let barycenter = (c1 * x2 + c2 * x1) / (c1 + c2);
        assert!((zero - barycenter).norm() < 1e-12);
        assert!((zeros_oracle(&m).unwrap().roots[0] - barycenter).norm() < 1e-12);
    }

    #[test]
    fn rank_deficient_column_gives_zero() {
        // U_1 - z U_0 with two identical columns
        let u = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0)]);
        let p = HankelPencil { kind: PencilKind::Pole, u0: CMatrix::zeros(2, 2), u1: u };
        let r = qr_diagonal(&p, c(0.0, 0.0));
        assert!((r.values[0] - 5.0).abs() < 1e-14);
        assert!(r.values[1] < 1e-28);
    }

    #[test]
    fn singular_u0_is_reported() {
        let d = seq(&[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        let p = build_pencil(&d, 2, PencilKind::Pole).unwrap();
        assert!(matches!(generalized_eigenvalues(&p), Err(Error::SingularPencil { .. })));
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("zero".parse::<PencilKind>().unwrap(), PencilKind::Zero);
        assert_eq!("Poles".parse::<PencilKind>().unwrap(), PencilKind::Pole);
        assert!("other".parse::<PencilKind>().is_err());
        assert_eq!(default_zero_order(74), 35);
    }
}
