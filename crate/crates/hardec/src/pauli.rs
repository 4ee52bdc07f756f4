//! Symplectic arithmetic for n-qubit Pauli operators.
//!
//! A Pauli is stored as `i^phase_exp * Z(z) X(x)` with the z/x supports
//! packed into machine words, so products and commutation checks are a
//! handful of bit operations regardless of weight. The canonical tensor
//! form (products of I, X, Y, Z with a real sign) is recovered through
//! `mu_j = (-i)^{z_j x_j} Z^{z_j} X^{x_j}` per factor.

use crate::error::{Error, Result};
use std::fmt;

/// Single-qubit Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PauliKind {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl PauliKind {
    pub const ALL: [PauliKind; 4] = [PauliKind::I, PauliKind::X, PauliKind::Y, PauliKind::Z];

    pub fn from_index(i: usize) -> PauliKind {
        PauliKind::ALL[i]
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_bits(z: bool, x: bool) -> PauliKind {
        match (z, x) {
            (false, false) => PauliKind::I,
            (false, true) => PauliKind::X,
            (true, true) => PauliKind::Y,
            (true, false) => PauliKind::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            PauliKind::I => 'I',
            PauliKind::X => 'X',
            PauliKind::Y => 'Y',
            PauliKind::Z => 'Z',
        }
    }
}

/// An n-qubit Pauli operator `i^phase_exp * Z(z) X(x)`.
///
/// Bit `i` of `z`/`x` refers to qubit `i` (leftmost character of a Pauli
/// string). `phase_exp` is the exponent of `i`, kept mod 4, so products are
/// phase-exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliOp {
    n: usize,
    z: u64,
    x: u64,
    phase_exp: u8,
}

impl PauliOp {
    pub const MAX_QUBITS: usize = 64;

    pub fn new(n: usize, z: u64, x: u64, phase_exp: u8) -> PauliOp {
        assert!(n <= Self::MAX_QUBITS);
        let mask = bitmask(n);
        PauliOp {
            n,
            z: z & mask,
            x: x & mask,
            phase_exp: phase_exp % 4,
        }
    }

    pub fn identity(n: usize) -> PauliOp {
        PauliOp::new(n, 0, 0, 0)
    }

    /// The canonical Pauli `kind` acting on `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, kind: PauliKind) -> PauliOp {
        assert!(qubit < n);
        let bit = 1u64 << qubit;
        match kind {
            PauliKind::I => PauliOp::identity(n),
            PauliKind::X => PauliOp::new(n, 0, bit, 0),
            PauliKind::Z => PauliOp::new(n, bit, 0, 0),
            // Y = (-i) Z X, so i^3 * Z(bit)X(bit)
            PauliKind::Y => PauliOp::new(n, bit, bit, 3),
        }
    }

    /// Parse a Pauli string such as "XZZXI" into the canonical (+1 sign)
    /// tensor of single-qubit Paulis.
    pub fn from_label(label: &str) -> Result<PauliOp> {
        let mut z = 0u64;
        let mut x = 0u64;
        let mut phase = 0u32;
        let mut n = 0usize;
        for (i, c) in label.chars().enumerate() {
            if i >= Self::MAX_QUBITS {
                return Err(Error::CodeParse {
                    line: 0,
                    reason: format!("Pauli string longer than {} qubits", Self::MAX_QUBITS),
                });
            }
            match c {
                'I' => {}
                'X' => x |= 1 << i,
                'Z' => z |= 1 << i,
                'Y' => {
                    z |= 1 << i;
                    x |= 1 << i;
                    phase += 3; // per-factor (-i) = i^3
                }
                other => {
                    return Err(Error::CodeParse {
                        line: 0,
                        reason: format!("invalid Pauli character '{other}'"),
                    })
                }
            }
            n = i + 1;
        }
        Ok(PauliOp::new(n, z, x, (phase % 4) as u8))
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn phase_exp(&self) -> u8 {
        self.phase_exp
    }

    /// Exact product with phase tracking: `X(x1) Z(z2) = (-1)^{x1.z2} Z(z2) X(x1)`.
    pub fn mul(&self, rhs: &PauliOp) -> Result<PauliOp> {
        if self.n != rhs.n {
            return Err(Error::DimensionMismatch(self.n, rhs.n));
        }
        let reorder = parity(self.x & rhs.z);
        Ok(PauliOp {
            n: self.n,
            z: self.z ^ rhs.z,
            x: self.x ^ rhs.x,
            phase_exp: (self.phase_exp + rhs.phase_exp + 2 * reorder) % 4,
        })
    }

    /// Multiply by a power of i.
    pub fn times_i(&self, exp: u8) -> PauliOp {
        PauliOp {
            phase_exp: (self.phase_exp + exp) % 4,
            ..*self
        }
    }

    pub fn adjoint(&self) -> PauliOp {
        // (i^p Z X)^† = i^{-p} X Z = i^{-p} (-1)^{z.x} Z X
        let zx = parity(self.z & self.x);
        PauliOp {
            phase_exp: ((4 - self.phase_exp) + 2 * zx) % 4,
            ..*self
        }
    }

    /// `+1` if the operators commute, `-1` otherwise.
    pub fn commutes(&self, rhs: &PauliOp) -> Result<i8> {
        if self.n != rhs.n {
            return Err(Error::DimensionMismatch(self.n, rhs.n));
        }
        let anti = parity(self.z & rhs.x) ^ parity(self.x & rhs.z);
        Ok(if anti == 0 { 1 } else { -1 })
    }

    /// Number of qubits on which the operator acts non-trivially.
    pub fn weight(&self) -> usize {
        (self.z | self.x).count_ones() as usize
    }

    pub fn is_identity_support(&self) -> bool {
        self.z == 0 && self.x == 0
    }

    /// Phase exponent of `i` relative to the canonical Pauli tensor
    /// `mu_1 x ... x mu_n`: `self = i^{canonical_phase} * mu`.
    pub fn canonical_phase(&self) -> u8 {
        ((self.phase_exp as u32 + (self.z & self.x).count_ones()) % 4) as u8
    }

    /// Sign exponent `a(U)` for operators of the form `+/- mu_1 x ... x mu_n`.
    ///
    /// Panics if the operator carries an imaginary phase.
    pub fn sign_exponent(&self) -> u8 {
        let c = self.canonical_phase();
        assert!(c % 2 == 0, "operator is not a real-signed Pauli tensor");
        c / 2
    }

    pub fn kind_at(&self, qubit: usize) -> PauliKind {
        PauliKind::from_bits(self.z >> qubit & 1 == 1, self.x >> qubit & 1 == 1)
    }

    /// Canonical Pauli label string (sign/phase not included).
    pub fn label(&self) -> String {
        (0..self.n).map(|i| self.kind_at(i).as_char()).collect()
    }
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.canonical_phase() {
            0 => "+",
            1 => "+i",
            2 => "-",
            3 => "-i",
            _ => unreachable!(),
        };
        write!(f, "{}{}", prefix, self.label())
    }
}

/// A stabilizer-group element together with the generator subset producing it.
#[derive(Debug, Clone)]
pub struct SignedStabilizerElement {
    pub element: PauliOp,
    pub generator_mask: u64,
}

impl SignedStabilizerElement {
    /// `+1` or `-1`.
    pub fn sign(&self) -> i8 {
        if self.element.sign_exponent() == 0 {
            1
        } else {
            -1
        }
    }
}

/// All `2^m` signed products of `m` mutually commuting generators,
/// ordered by generator mask ascending (identity first).
pub fn stabilizer_group(generators: &[PauliOp]) -> Result<Vec<SignedStabilizerElement>> {
    let m = generators.len();
    assert!(m < 32, "too many generators");
    for i in 0..m {
        for j in (i + 1)..m {
            if generators[i].commutes(&generators[j])? != 1 {
                return Err(Error::NonCommutingGenerators(i, j));
            }
        }
    }
    let n = generators.first().map_or(0, |g| g.num_qubits());
    let mut out = Vec::with_capacity(1 << m);
    for mask in 0..(1u64 << m) {
        let mut prod = PauliOp::identity(n);
        for (j, g) in generators.iter().enumerate() {
            if mask >> j & 1 == 1 {
                prod = prod.mul(g)?;
            }
        }
        if prod.is_identity_support() && prod.canonical_phase() != 0 {
            return Err(Error::MinusIdentity(mask));
        }
        // products of commuting Hermitian Paulis carry a real sign
        let _ = prod.sign_exponent();
        out.push(SignedStabilizerElement {
            element: prod,
            generator_mask: mask,
        });
    }
    Ok(out)
}

/// Reordering sign exponent `f` from commuting all Z factors left in the
/// product of the masked generators (ascending index order).
pub fn f_exponent(generators: &[PauliOp], mask: u64) -> u8 {
    // f = sum_{l < t} b_{j_l} . a_{j_t} over selected generators
    let mut f = 0u8;
    let mut x_acc = 0u64;
    for (j, g) in generators.iter().enumerate() {
        if mask >> j & 1 == 1 {
            f ^= parity(x_acc & g.z_bits());
            x_acc ^= g.x_bits();
        }
    }
    f
}

pub(crate) fn parity(bits: u64) -> u8 {
    (bits.count_ones() & 1) as u8
}

pub(crate) fn bitmask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(label: &str) -> PauliOp {
        PauliOp::from_label(label).unwrap()
    }

    #[test]
    fn xx_times_zz_is_minus_yy() {
        let prod = p("XX").mul(&p("ZZ")).unwrap();
        assert_eq!(prod.label(), "YY");
        assert_eq!(prod.canonical_phase(), 2); // -YY
    }

    #[test]
    fn identity_is_neutral() {
        for label in ["XZZXI", "YIYXZ", "IIIII"] {
            let q = p(label);
            let id = PauliOp::identity(5);
            assert_eq!(id.mul(&q).unwrap(), q);
            assert_eq!(q.mul(&id).unwrap(), q);
        }
    }

    #[test]
    fn z_times_x_is_i_y() {
        let prod = p("Z").mul(&p("X")).unwrap();
        // ZX = iY: canonical phase 1 over the Pauli Y
        assert_eq!(prod.label(), "Y");
        assert_eq!(prod.canonical_phase(), 1);
    }

    #[test]
    fn associativity_with_phases() {
        let ops = [p("XY"), p("ZZ"), p("YX"), p("IZ")];
        for a in &ops {
            for b in &ops {
                for c in &ops {
                    let left = a.mul(b).unwrap().mul(c).unwrap();
                    let right = a.mul(&b.mul(c).unwrap()).unwrap();
                    assert_eq!(left, right);
                }
            }
        }
    }

    #[test]
    fn commutation_signs() {
        assert_eq!(p("X").commutes(&p("Z")).unwrap(), -1);
        assert_eq!(p("XZZXI").commutes(&p("IIIII")).unwrap(), 1);
        assert_eq!(p("XZZXI").commutes(&p("IXZZX")).unwrap(), 1);
    }

    #[test]
    fn weights() {
        assert_eq!(PauliOp::identity(7).weight(), 0);
        assert_eq!(PauliOp::single(5, 0, PauliKind::X).weight(), 1);
        assert_eq!(p("IXX").weight(), 2);
    }

    #[test]
    fn mismatched_sizes_error() {
        assert!(p("XX").mul(&p("X")).is_err());
        assert!(p("XX").commutes(&p("X")).is_err());
    }

    #[test]
    fn bitflip_group_all_positive() {
        let gens = [p("ZZI"), p("IZZ")];
        let group = stabilizer_group(&gens).unwrap();
        assert_eq!(group.len(), 4);
        let labels: Vec<String> = group.iter().map(|e| e.element.label()).collect();
        assert_eq!(labels, ["III", "ZZI", "IZZ", "ZIZ"]);
        assert!(group.iter().all(|e| e.sign() == 1));
    }

    #[test]
    fn xx_zz_group_contains_minus_yy() {
        let gens = [p("XX"), p("ZZ")];
        let group = stabilizer_group(&gens).unwrap();
        let yy = group.iter().find(|e| e.element.label() == "YY").unwrap();
        assert_eq!(yy.sign(), -1);
    }

    #[test]
    fn rejects_non_commuting_generators() {
        let gens = [p("XI"), p("ZI")];
        assert!(matches!(
            stabilizer_group(&gens),
            Err(Error::NonCommutingGenerators(0, 1))
        ));
    }

    #[test]
    fn rejects_minus_identity() {
        // XX, ZZ, YY pairwise commute but XX.ZZ.YY = -II
        let gens = [p("XX"), p("ZZ"), p("YY")];
        assert!(matches!(
            stabilizer_group(&gens),
            Err(Error::MinusIdentity(_))
        ));
    }

    #[test]
    fn f_exponent_matches_group_sign_for_zx_generators() {
        // generators free of Y factors are plain Z(a)X(b) products; the
        // product's i-exponent is then 2f, f the Z-left-commutation parity
        let gens = [p("XZZXI"), p("IXZZX"), p("XIXZZ"), p("ZXIXZ")];
        let group = stabilizer_group(&gens).unwrap();
        for e in &group {
            let f = f_exponent(&gens, e.generator_mask);
            assert_eq!(e.element.phase_exp(), 2 * f, "mask {}", e.generator_mask);
        }
    }
}
