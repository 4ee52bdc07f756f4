//! Single-qubit channel representations and the noise-model constructors.
//!
//! Channels live in two forms: Kraus operator sets, and 4x4 real process
//! matrices over the normalized Pauli basis (I, X, Y, Z)/sqrt(2), with entry
//! (sigma, tau) = Tr[sigma N(tau)]. Every map handled here is
//! Hermiticity-preserving, so process matrices are stored as real.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul};

pub type C64 = Complex64;

/// Complex 2x2 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub fn zero() -> Mat2 {
        Mat2([[C64::new(0.0, 0.0); 2]; 2])
    }

    pub fn identity() -> Mat2 {
        let mut m = Mat2::zero();
        m.0[0][0] = C64::new(1.0, 0.0);
        m.0[1][1] = C64::new(1.0, 0.0);
        m
    }

    pub fn adjoint(&self) -> Mat2 {
        let mut out = Mat2::zero();
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] = self.0[c][r].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, s: C64) -> Mat2 {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        out
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let mut out = Mat2::zero();
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] = self.0[r][0] * rhs.0[0][c] + self.0[r][1] * rhs.0[1][c];
            }
        }
        out
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] += rhs.0[r][c];
            }
        }
        out
    }
}

/// The single-qubit Paulis as dense matrices, in basis order I, X, Y, Z.
pub fn pauli_mat(i: usize) -> Mat2 {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let im = C64::new(0.0, 1.0);
    match i {
        0 => Mat2([[one, o], [o, one]]),
        1 => Mat2([[o, one], [one, o]]),
        2 => Mat2([[o, -im], [im, o]]),
        3 => Mat2([[one, o], [o, -one]]),
        _ => panic!("pauli index out of range"),
    }
}

/// Real 4x4 process matrix in the normalized Pauli basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessMatrix(pub [[f64; 4]; 4]);

impl ProcessMatrix {
    pub fn zero() -> ProcessMatrix {
        ProcessMatrix([[0.0; 4]; 4])
    }

    pub fn identity() -> ProcessMatrix {
        let mut m = ProcessMatrix::zero();
        for i in 0..4 {
            m.0[i][i] = 1.0;
        }
        m
    }

    pub fn diagonal(d: [f64; 4]) -> ProcessMatrix {
        let mut m = ProcessMatrix::zero();
        for i in 0..4 {
            m.0[i][i] = d[i];
        }
        m
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn matmul(&self, rhs: &ProcessMatrix) -> ProcessMatrix {
        let mut out = ProcessMatrix::zero();
        for r in 0..4 {
            for c in 0..4 {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += self.0[r][k] * rhs.0[k][c];
                }
                out.0[r][c] = acc;
            }
        }
        out
    }

    pub fn add(&self, rhs: &ProcessMatrix) -> ProcessMatrix {
        let mut out = *self;
        for r in 0..4 {
            for c in 0..4 {
                out.0[r][c] += rhs.0[r][c];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> ProcessMatrix {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    /// Max absolute entrywise difference.
    pub fn linf_distance(&self, rhs: &ProcessMatrix) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..4 {
            for c in 0..4 {
                d = d.max((self.0[r][c] - rhs.0[r][c]).abs());
            }
        }
        d
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        (self.0[0][0] - 1.0).abs() <= tol
            && self.0[0][1].abs() <= tol
            && self.0[0][2].abs() <= tol
            && self.0[0][3].abs() <= tol
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        for r in 0..4 {
            for c in 0..4 {
                if r != c && self.0[r][c].abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Process matrix of the unitary conjugation rho -> U rho U^dag.
    pub fn from_unitary(u: &Mat2) -> ProcessMatrix {
        let ud = u.adjoint();
        let mut out = ProcessMatrix::zero();
        for s in 0..4 {
            for t in 0..4 {
                let m = pauli_mat(s) * *u * pauli_mat(t) * ud;
                let tr = m.trace() * 0.5;
                debug_assert!(tr.im.abs() < 1e-12);
                out.0[s][t] = tr.re;
            }
        }
        out
    }
}

impl fmt::Display for ProcessMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..4 {
            writeln!(
                f,
                "[{:>12.8} {:>12.8} {:>12.8} {:>12.8}]",
                self.0[r][0], self.0[r][1], self.0[r][2], self.0[r][3]
            )?;
        }
        Ok(())
    }
}

/// Average gate infidelity to the identity, r = (4 - Tr) / 6.
pub fn infidelity(m: &ProcessMatrix) -> f64 {
    (4.0 - m.trace()) / 6.0
}

/// Zero the off-diagonal entries; the Pauli-twirled channel.
pub fn pauli_twirl(m: &ProcessMatrix) -> ProcessMatrix {
    ProcessMatrix::diagonal([m.0[0][0], m.0[1][1], m.0[2][2], m.0[3][3]])
}

/// A Kraus-operator set for a single-qubit channel.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    pub ops: Vec<Mat2>,
}

impl KrausChannel {
    pub fn new(ops: Vec<Mat2>) -> Result<KrausChannel> {
        let ch = KrausChannel { ops };
        let res = ch.tp_residual();
        if res > 1e-12 {
            return Err(Error::NotTracePreserving(res));
        }
        Ok(ch)
    }

    pub fn identity() -> KrausChannel {
        KrausChannel {
            ops: vec![Mat2::identity()],
        }
    }

    pub fn from_unitary(u: Mat2) -> KrausChannel {
        KrausChannel { ops: vec![u] }
    }

    /// Max-entry residual of sum A^dag A - I.
    pub fn tp_residual(&self) -> f64 {
        let mut s = Mat2::zero();
        for a in &self.ops {
            s = s + a.adjoint() * *a;
        }
        let id = Mat2::identity();
        let mut res: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                res = res.max((s.0[r][c] - id.0[r][c]).norm());
            }
        }
        res
    }

    /// Sequential composition: self after `inner`.
    pub fn compose(&self, inner: &KrausChannel) -> KrausChannel {
        let mut ops = Vec::with_capacity(self.ops.len() * inner.ops.len());
        for a in &self.ops {
            for b in &inner.ops {
                ops.push(*a * *b);
            }
        }
        KrausChannel { ops }
    }
}

/// Convert a (trace-preserving) Kraus set to its process matrix.
pub fn kraus_to_process(k: &KrausChannel) -> Result<ProcessMatrix> {
    let res = k.tp_residual();
    if res > 1e-10 {
        return Err(Error::NotTracePreserving(res));
    }
    let mut out = ProcessMatrix::zero();
    for s in 0..4 {
        for t in 0..4 {
            let mut acc = C64::new(0.0, 0.0);
            for a in &k.ops {
                acc += (pauli_mat(s) * *a * pauli_mat(t) * a.adjoint()).trace();
            }
            acc *= 0.5;
            debug_assert!(acc.im.abs() < 1e-12, "imaginary residue {}", acc.im);
            out.0[s][t] = acc.re;
        }
    }
    Ok(out)
}

fn check_unit(name: &'static str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParameter {
            name,
            value: v,
            range: "[0, 1]",
        });
    }
    Ok(())
}

/// Kraus set of the zero-temperature amplitude damping channel.
pub fn amplitude_damping_kraus(p: f64) -> Result<KrausChannel> {
    check_unit("p", p)?;
    let o = C64::new(0.0, 0.0);
    let a0 = Mat2([
        [C64::new(1.0, 0.0), o],
        [o, C64::new((1.0 - p).sqrt(), 0.0)],
    ]);
    let a1 = Mat2([[o, C64::new(p.sqrt(), 0.0)], [o, o]]);
    KrausChannel::new(vec![a0, a1])
}

/// Kraus set of the phase damping channel.
pub fn phase_damping_kraus(lambda: f64) -> Result<KrausChannel> {
    check_unit("lambda", lambda)?;
    let o = C64::new(0.0, 0.0);
    let a0 = Mat2([
        [C64::new(1.0, 0.0), o],
        [o, C64::new((1.0 - lambda).sqrt(), 0.0)],
    ]);
    let a1 = Mat2([[o, o], [o, C64::new(lambda.sqrt(), 0.0)]]);
    KrausChannel::new(vec![a0, a1])
}

/// Process matrix of the amplitude-phase damping channel (phase damping
/// after amplitude damping; the two orders commute).
pub fn amplitude_phase_damping(p: f64, lambda: f64) -> Result<ProcessMatrix> {
    let k = phase_damping_kraus(lambda)?.compose(&amplitude_damping_kraus(p)?);
    kraus_to_process(&k)
}

pub fn amplitude_phase_damping_kraus(p: f64, lambda: f64) -> Result<KrausChannel> {
    Ok(phase_damping_kraus(lambda)?.compose(&amplitude_damping_kraus(p)?))
}

/// The rotation unitary exp(i theta n.sigma) with
/// n = (sin phi cos gamma, sin phi sin gamma, cos phi).
pub fn rotation_unitary(theta: f64, phi: f64, gamma: f64) -> Mat2 {
    let n = [
        phi.sin() * gamma.cos(),
        phi.sin() * gamma.sin(),
        phi.cos(),
    ];
    rotation_unitary_axis(theta, n)
}

pub fn rotation_unitary_axis(theta: f64, n: [f64; 3]) -> Mat2 {
    let c = C64::new(theta.cos(), 0.0);
    let is = C64::new(0.0, theta.sin());
    let mut u = Mat2::identity().scale(c);
    for (k, nk) in n.iter().enumerate() {
        u = u + pauli_mat(k + 1).scale(is * C64::new(*nk, 0.0));
    }
    u
}

/// Process matrix of the coherent rotation channel.
pub fn coherent_rotation(theta: f64, phi: f64, gamma: f64) -> ProcessMatrix {
    ProcessMatrix::from_unitary(&rotation_unitary(theta, phi, gamma))
}

/// Process matrix of the depolarizing channel, diag(1, c, c, c) with
/// c = 1 - 4p/3.
pub fn depolarizing(p: f64) -> Result<ProcessMatrix> {
    if !(0.0..=0.75).contains(&p) {
        return Err(Error::InvalidParameter {
            name: "p",
            value: p,
            range: "[0, 3/4]",
        });
    }
    let c = 1.0 - 4.0 * p / 3.0;
    Ok(ProcessMatrix::diagonal([1.0, c, c, c]))
}

pub fn depolarizing_kraus(p: f64) -> Result<KrausChannel> {
    if !(0.0..=0.75).contains(&p) {
        return Err(Error::InvalidParameter {
            name: "p",
            value: p,
            range: "[0, 3/4]",
        });
    }
    let mut ops = vec![pauli_mat(0).scale(C64::new((1.0 - p).sqrt(), 0.0))];
    for k in 1..4 {
        ops.push(pauli_mat(k).scale(C64::new((p / 3.0).sqrt(), 0.0)));
    }
    KrausChannel::new(ops)
}

/// Convex perturbation (1 - w) base + w (u . u^dag).
pub fn perturb(base: &ProcessMatrix, u: &Mat2, weight: f64) -> Result<ProcessMatrix> {
    check_unit("weight", weight)?;
    let up = ProcessMatrix::from_unitary(u);
    Ok(base.scale(1.0 - weight).add(&up.scale(weight)))
}

/// Haar-distributed 2x2 unitary, deterministic per RNG state
/// (QR of a complex Ginibre sample with phase-corrected diagonal).
pub fn haar_random_unitary<R: Rng>(rng: &mut R) -> Mat2 {
    use rand_distr::StandardNormal;
    let mut g = [[C64::new(0.0, 0.0); 2]; 2];
    for row in g.iter_mut() {
        for v in row.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v = C64::new(re, im);
        }
    }
    // Gram-Schmidt on columns
    let mut c0 = [g[0][0], g[1][0]];
    let n0 = (c0[0].norm_sqr() + c0[1].norm_sqr()).sqrt();
    c0[0] /= n0;
    c0[1] /= n0;
    let mut c1 = [g[0][1], g[1][1]];
    let ip = c0[0].conj() * c1[0] + c0[1].conj() * c1[1];
    c1[0] -= ip * c0[0];
    c1[1] -= ip * c0[1];
    let n1 = (c1[0].norm_sqr() + c1[1].norm_sqr()).sqrt();
    c1[0] /= n1;
    c1[1] /= n1;
    Mat2([[c0[0], c1[0]], [c0[1], c1[1]]])
}

/// Counter-based stream: sample `index` of the run keyed by `seed`.
pub fn seeded_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn haar_unitary_seeded(seed: u64, index: u64) -> Mat2 {
    haar_random_unitary(&mut seeded_rng(seed, index))
}

/// Random CPTP channel with `num_ops` Kraus operators: Ginibre samples
/// normalized by the inverse square root of sum A^dag A.
pub fn random_kraus_channel<R: Rng>(rng: &mut R, num_ops: usize) -> KrausChannel {
    use rand_distr::StandardNormal;
    let mut ops = Vec::with_capacity(num_ops);
    for _ in 0..num_ops {
        let mut m = Mat2::zero();
        for row in m.0.iter_mut() {
            for v in row.iter_mut() {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *v = C64::new(re, im);
            }
        }
        ops.push(m);
    }
    let mut s = Mat2::zero();
    for a in &ops {
        s = s + a.adjoint() * *a;
    }
    let si = hermitian_inv_sqrt(&s);
    for a in ops.iter_mut() {
        *a = *a * si;
    }
    KrausChannel { ops }
}

/// Inverse square root of a positive-definite Hermitian 2x2 matrix.
fn hermitian_inv_sqrt(m: &Mat2) -> Mat2 {
    // eigendecomposition via trace/determinant
    let a = m.0[0][0].re;
    let d = m.0[1][1].re;
    let b = m.0[0][1];
    let tr = a + d;
    let det = a * d - b.norm_sqr();
    let disc = ((tr * tr) / 4.0 - det).max(0.0).sqrt();
    let l1 = tr / 2.0 + disc;
    let l2 = tr / 2.0 - disc;
    // eigenvector for l1
    let (v1, v2);
    if b.norm() > 1e-300 {
        v1 = [b, C64::new(l1 - a, 0.0)];
        v2 = [b, C64::new(l2 - a, 0.0)];
    } else {
        v1 = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        v2 = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    }
    let norm = |v: &[C64; 2]| (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let (n1, n2) = (norm(&v1), norm(&v2));
    let u1 = [v1[0] / n1, v1[1] / n1];
    let u2 = [v2[0] / n2, v2[1] / n2];
    let (s1, s2) = (1.0 / l1.sqrt(), 1.0 / l2.sqrt());
    let mut out = Mat2::zero();
    for r in 0..2 {
        for c in 0..2 {
            out.0[r][c] =
                u1[r] * u1[c].conj() * C64::new(s1, 0.0) + u2[r] * u2[c].conj() * C64::new(s2, 0.0);
        }
    }
    out
}

/// Named noise families from the experiment configuration.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseFamily {
    AmplitudePhaseDamping {
        p: f64,
        lambda: f64,
    },
    Coherent {
        theta: f64,
        phi: f64,
        gamma: f64,
    },
    Depolarizing {
        p: f64,
    },
    CorrelatedDephasingMix {
        p: f64,
        q: f64,
    },
    Perturbed {
        base: Box<NoiseFamily>,
        weight: f64,
        unitary_seed: u64,
        #[serde(default)]
        unitary_index: u64,
    },
}

impl NoiseFamily {
    /// Process matrix of the local (uncorrelated) channel.
    ///
    /// Errors for the correlated mixture, which has no single-qubit form.
    pub fn process(&self) -> Result<ProcessMatrix> {
        match self {
            NoiseFamily::AmplitudePhaseDamping { p, lambda } => {
                amplitude_phase_damping(*p, *lambda)
            }
            NoiseFamily::Coherent { theta, phi, gamma } => {
                Ok(coherent_rotation(*theta, *phi, *gamma))
            }
            NoiseFamily::Depolarizing { p } => depolarizing(*p),
            NoiseFamily::CorrelatedDephasingMix { .. } => Err(Error::Config {
                field: "noise".into(),
                reason: "correlated mixture is not a single-qubit channel".into(),
            }),
            NoiseFamily::Perturbed {
                base,
                weight,
                unitary_seed,
                unitary_index,
            } => {
                let u = haar_unitary_seeded(*unitary_seed, *unitary_index);
                perturb(&base.process()?, &u, *weight)
            }
        }
    }

    /// Kraus form of the local channel, used by the dense oracle.
    pub fn kraus(&self) -> Result<KrausChannel> {
        match self {
            NoiseFamily::AmplitudePhaseDamping { p, lambda } => {
                amplitude_phase_damping_kraus(*p, *lambda)
            }
            NoiseFamily::Coherent { theta, phi, gamma } => Ok(KrausChannel::from_unitary(
                rotation_unitary(*theta, *phi, *gamma),
            )),
            NoiseFamily::Depolarizing { p } => depolarizing_kraus(*p),
            NoiseFamily::CorrelatedDephasingMix { .. } => Err(Error::Config {
                field: "noise".into(),
                reason: "correlated mixture is not a single-qubit channel".into(),
            }),
            NoiseFamily::Perturbed {
                base,
                weight,
                unitary_seed,
                unitary_index,
            } => {
                check_unit("weight", *weight)?;
                let u = haar_unitary_seeded(*unitary_seed, *unitary_index);
                let base_k = base.kraus()?;
                let mut ops: Vec<Mat2> = base_k
                    .ops
                    .iter()
                    .map(|a| a.scale(C64::new((1.0 - weight).sqrt(), 0.0)))
                    .collect();
                ops.push(u.scale(C64::new(weight.sqrt(), 0.0)));
                KrausChannel::new(ops)
            }
        }
    }
}
