//! Pauli labels and strings, unit directions and measurement frames.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::linalg::{c, CMatrix, ONE, ZERO};
use crate::{Error, Result};

pub const UNIT_TOLERANCE: f64 = 1e-12;
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliLabel {
    I,
    X,
    Y,
    Z,
}

impl PauliLabel {
    pub const ALL: [PauliLabel; 4] = [PauliLabel::I, PauliLabel::X, PauliLabel::Y, PauliLabel::Z];
    pub const XYZ: [PauliLabel; 3] = [PauliLabel::X, PauliLabel::Y, PauliLabel::Z];

    pub fn is_identity(self) -> bool {
        self == PauliLabel::I
    }

    pub fn matrix(self) -> CMatrix {
        pauli_matrix(self)
    }

    /// Axis index 0, 1, 2 for X, Y, Z.
    pub fn axis(self) -> Option<usize> {
        match self {
            PauliLabel::I => None,
            PauliLabel::X => Some(0),
            PauliLabel::Y => Some(1),
            PauliLabel::Z => Some(2),
        }
    }

    pub fn from_axis(axis: usize) -> Option<PauliLabel> {
        PauliLabel::XYZ.get(axis).copied()
    }

    pub fn as_char(self) -> char {
        match self {
            PauliLabel::I => 'I',
            PauliLabel::X => 'X',
            PauliLabel::Y => 'Y',
            PauliLabel::Z => 'Z',
        }
    }
}

impl fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// The standard 2x2 representation.
pub fn pauli_matrix(p: PauliLabel) -> CMatrix {
    let entries = match p {
        PauliLabel::I => [ONE, ZERO, ZERO, ONE],
        PauliLabel::X => [ZERO, ONE, ONE, ZERO],
        PauliLabel::Y => [ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO],
        PauliLabel::Z => [ONE, ZERO, ZERO, -ONE],
    };
    CMatrix::from_row_slice(2, 2, &entries)
}

/// Tensor product of Pauli labels, one per qubit. Phases of products are not
/// tracked here.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    labels: Vec<PauliLabel>,
}

impl PauliString {
    pub fn new(labels: Vec<PauliLabel>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidArgument("Pauli string needs at least one qubit".into()));
        }
        Ok(PauliString { labels })
    }

    pub fn identity(qubits: usize) -> Self {
        PauliString {
            labels: alloc::vec![PauliLabel::I; qubits.max(1)],
        }
    }

    /// Identity everywhere except the given `(qubit, label)` placements.
    pub fn with_support(qubits: usize, support: &[(usize, PauliLabel)]) -> Result<Self> {
        let mut s = PauliString::identity(qubits);
        for &(q, p) in support {
            if q >= qubits {
                return Err(Error::InvalidQubits(alloc::format!(
                    "qubit {q} outside a {qubits}-qubit string"
                )));
            }
            s.labels[q] = p;
        }
        Ok(s)
    }

    pub fn qubit_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[PauliLabel] {
        &self.labels
    }

    pub fn weight(&self) -> usize {
        self.labels.iter().filter(|p| !p.is_identity()).count()
    }

    /// Bit-vector form: (x-part, z-part) masks with qubit 0 as the most
    /// significant bit, as used for sign-free Pauli action on basis states.
    pub fn xz_masks(&self) -> (usize, usize) {
        let n = self.labels.len();
        let mut x = 0usize;
        let mut z = 0usize;
        for (q, p) in self.labels.iter().enumerate() {
            let b = 1usize << (n - 1 - q);
            match p {
                PauliLabel::X => x |= b,
                PauliLabel::Y => {
                    x |= b;
                    z |= b
                }
                PauliLabel::Z => z |= b,
                PauliLabel::I => {}
            }
        }
        (x, z)
    }

    /// True iff `self * other == -other * self`: odd number of positions where
    /// both labels are non-identity and differ.
    pub fn anticommutes(&self, other: &PauliString) -> Result<bool> {
        if self.labels.len() != other.labels.len() {
            return Err(Error::LengthMismatch {
                left: self.labels.len(),
                right: other.labels.len(),
            });
        }
        let clashes = self
            .labels
            .iter()
            .zip(&other.labels)
            .filter(|(a, b)| !a.is_identity() && !b.is_identity() && a != b)
            .count();
        Ok(clashes % 2 == 1)
    }

    /// Dense matrix. Only sensible for a handful of qubits.
    pub fn to_matrix(&self) -> CMatrix {
        let factors: Vec<CMatrix> = self.labels.iter().map(|&p| pauli_matrix(p)).collect();
        crate::linalg::kron_all(&factors)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.labels {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let labels = s
            .chars()
            .map(|ch| match ch.to_ascii_uppercase() {
                'I' => Ok(PauliLabel::I),
                'X' => Ok(PauliLabel::X),
                'Y' => Ok(PauliLabel::Y),
                'Z' => Ok(PauliLabel::Z),
                other => Err(Error::InvalidArgument(alloc::format!("`{other}` is not a Pauli label"))),
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(labels)
    }
}

/// Anti-commutation test for two strings; see [`PauliString::anticommutes`].
pub fn anticommutes(p: &PauliString, q: &PauliString) -> Result<bool> {
    p.anticommutes(q)
}

/// A unit 3-vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction([f64; 3]);

fn norm3(v: [f64; 3]) -> f64 {
    libm::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
}

impl Direction {
    pub const X: Direction = Direction([1.0, 0.0, 0.0]);
    pub const Y: Direction = Direction([0.0, 1.0, 0.0]);
    pub const Z: Direction = Direction([0.0, 0.0, 1.0]);

    /// Accepts only vectors whose norm is 1 within `1e-12`.
    pub fn new(components: [f64; 3]) -> Result<Self> {
        let norm = norm3(components);
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::InvalidDirection { norm });
        }
        Ok(Direction(components))
    }

    /// Rescales a nonzero vector to unit length.
    pub fn normalized(v: [f64; 3]) -> Result<Self> {
        let norm = norm3(v);
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::InvalidDirection { norm });
        }
        Ok(Direction([v[0] / norm, v[1] / norm, v[2] / norm]))
    }

    /// Spherical angles: polar `theta` from +z, azimuth `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let st = libm::sin(theta);
        Direction([st * libm::cos(phi), st * libm::sin(phi), libm::cos(theta)])
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn negated(&self) -> Direction {
        Direction([-self.0[0], -self.0[1], -self.0[2]])
    }

    /// `a . sigma`.
    pub fn observable(&self) -> CMatrix {
        direction_observable(self)
    }
}

/// `a . sigma` for a unit direction; eigenvalues are +1 and -1.
pub fn direction_observable(a: &Direction) -> CMatrix {
    let [x, y, z] = a.0;
    CMatrix::from_row_slice(2, 2, &[c(z, 0.0), c(x, -y), c(x, y), c(-z, 0.0)])
}

/// Orthogonal pair of local axes used by the two-setting criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementFrame {
    x_axis: Direction,
    y_axis: Direction,
}

impl MeasurementFrame {
    pub fn new(x_axis: Direction, y_axis: Direction) -> Result<Self> {
        let dot = x_axis.dot(&y_axis);
        if dot.abs() > ORTHOGONALITY_TOLERANCE {
            return Err(Error::NonOrthogonalFrame { dot });
        }
        Ok(MeasurementFrame { x_axis, y_axis })
    }

    /// The lab x/y axes.
    pub fn standard() -> Self {
        MeasurementFrame {
            x_axis: Direction::X,
            y_axis: Direction::Y,
        }
    }

    pub fn from_settings(a1: &Direction, a2: &Direction) -> Result<Self> {
        frame_from_settings(a1, a2)
    }

    pub fn x_axis(&self) -> &Direction {
        &self.x_axis
    }

    pub fn y_axis(&self) -> &Direction {
        &self.y_axis
    }

    /// Axis 0 is x, axis 1 is y.
    pub fn axis(&self, which: usize) -> &Direction {
        if which == 0 {
            &self.x_axis
        } else {
            &self.y_axis
        }
    }
}

/// Frame with x along `a1 + a2` and y along `a1 - a2`.
pub fn frame_from_settings(a1: &Direction, a2: &Direction) -> Result<MeasurementFrame> {
    let [p, q, r] = a1.0;
    let [s, t, u] = a2.0;
    let sum = [p + s, q + t, r + u];
    let diff = [p - s, q - t, r - u];
    if norm3(sum) < 1e-9 || norm3(diff) < 1e-9 {
        return Err(Error::DegenerateSettings);
    }
    let x_axis = Direction::normalized(sum)?;
    let y_axis = Direction::normalized(diff)?;
    MeasurementFrame::new(x_axis, y_axis)
}

/// Label used in serialized tensors: `x` or `y` per region.
pub fn frame_index_label(digits: &[usize]) -> String {
    digits.iter().map(|&d| if d == 0 { 'x' } else { 'y' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, max_abs_diff};
    use alloc::vec;

    fn dense_anticommutes(p: &PauliString, q: &PauliString) -> bool {
        let a = p.to_matrix();
        let b = q.to_matrix();
        let anti = &a * &b + &b * &a;
        anti.iter().all(|z| z.norm() < 1e-12)
    }

    #[test]
    fn pauli_matrices_standard_form() {
        assert_eq!(pauli_matrix(PauliLabel::I), CMatrix::identity(2, 2));
        let z = pauli_matrix(PauliLabel::Z);
        assert_eq!(z[(0, 0)], ONE);
        assert_eq!(z[(1, 1)], -ONE);
        let x = pauli_matrix(PauliLabel::X);
        assert_eq!(x[(0, 1)], ONE);
        assert_eq!(x[(1, 0)], ONE);
        assert_eq!(x[(0, 0)], ZERO);
        for p in PauliLabel::XYZ {
            let m = pauli_matrix(p);
            assert!((m.trace()).norm() < 1e-15);
            let ev = hermitian_eigenvalues(&m);
            assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn direction_observable_axes() {
        assert!(max_abs_diff(&direction_observable(&Direction::Z), &pauli_matrix(PauliLabel::Z)) < 1e-15);
        assert!(max_abs_diff(&direction_observable(&Direction::X), &pauli_matrix(PauliLabel::X)) < 1e-15);
        let a = Direction::normalized([0.3, -0.4, 0.5]).unwrap();
        let ev = hermitian_eigenvalues(&direction_observable(&a));
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_unit_direction_rejected() {
        assert!(matches!(
            Direction::new([1.0, 1.0, 0.0]),
            Err(Error::InvalidDirection { .. })
        ));
        assert!(Direction::new([0.6, 0.8, 0.0]).is_ok());
    }

    #[test]
    fn anticommutation_examples() {
        let x: PauliString = "X".parse().unwrap();
        let y: PauliString = "Y".parse().unwrap();
        assert!(x.anticommutes(&y).unwrap());
        let xx: PauliString = "XX".parse().unwrap();
        let yy: PauliString = "YY".parse().unwrap();
        assert!(!xx.anticommutes(&yy).unwrap());
        assert!(!dense_anticommutes(&xx, &yy));
        let xi: PauliString = "XI".parse().unwrap();
        let iy: PauliString = "IY".parse().unwrap();
        assert!(!xi.anticommutes(&iy).unwrap());
        assert!(matches!(x.anticommutes(&xx), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn single_qubit_pairs_exhaustive() {
        for p in PauliLabel::XYZ {
            for q in PauliLabel::XYZ {
                let a = PauliString::new(vec![p]).unwrap();
                let b = PauliString::new(vec![q]).unwrap();
                assert_eq!(a.anticommutes(&b).unwrap(), p != q);
            }
        }
    }

    #[test]
    fn parity_rule_matches_dense_products_up_to_four_qubits() {
        let labels = [PauliLabel::I, PauliLabel::X, PauliLabel::Y];
        let strings: Vec<PauliString> = (0..81)
            .map(|mut i| {
                let mut v = Vec::new();
                for _ in 0..4 {
                    v.push(labels[i % 3]);
                    i /= 3;
                }
                PauliString::new(v).unwrap()
            })
            .collect();
        let mats: Vec<CMatrix> = strings.iter().map(|s| s.to_matrix()).collect();
        for (i, p) in strings.iter().enumerate() {
            for (j, q) in strings.iter().enumerate() {
                let anti = &mats[i] * &mats[j] + &mats[j] * &mats[i];
                let dense = anti.iter().all(|z| z.norm() < 1e-12);
                assert_eq!(p.anticommutes(q).unwrap(), dense, "{p} vs {q}");
            }
        }
    }

    #[test]
    fn frame_from_orthogonal_settings() {
        let f = frame_from_settings(&Direction::X, &Direction::Y).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let [a, b, c0] = f.x_axis().components();
        assert!((a - h).abs() < 1e-15 && (b - h).abs() < 1e-15 && c0 == 0.0);
        let [a, b, _] = f.y_axis().components();
        assert!((a - h).abs() < 1e-15 && (b + h).abs() < 1e-15);
    }

    #[test]
    fn degenerate_settings_rejected() {
        assert_eq!(
            frame_from_settings(&Direction::Z, &Direction::Z),
            Err(Error::DegenerateSettings)
        );
        assert_eq!(
            frame_from_settings(&Direction::Z, &Direction::Z.negated()),
            Err(Error::DegenerateSettings)
        );
    }

    #[test]
    fn string_roundtrip_and_masks() {
        let s: PauliString = "XYZI".parse().unwrap();
        assert_eq!(alloc::format!("{s}"), "XYZI");
        assert_eq!(s.weight(), 3);
        assert_eq!(s.xz_masks(), (0b1100, 0b0110));
        assert!("XQ".parse::<PauliString>().is_err());
    }
}
