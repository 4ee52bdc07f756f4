//! Brute-force density-matrix reference implementation.
//!
//! Builds explicit codewords on the 2^n-dimensional space, applies noise in
//! Kraus form, projects syndromes by Luders update, and reads off the
//! logical process-matrix entries directly. Slow but assumption-free; the
//! coefficient engine is validated against it entrywise.

use crate::channel::{KrausChannel, Mat2, ProcessMatrix, C64};
use crate::code::{StabilizerCode, SyndromeTable};
use crate::error::{Error, Result};
use crate::pauli::PauliOp;
use rayon::prelude::*;

pub const ORACLE_MAX_QUBITS: usize = 9;

/// Dense square matrix on the 2^n-dimensional state space, row major.
#[derive(Clone)]
struct DMat {
    dim: usize,
    data: Vec<C64>,
}

impl DMat {
    fn zero(dim: usize) -> DMat {
        DMat {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }
}

/// Pauli operator with index bits pre-mapped to state-space bit positions
/// (qubit i of the label <-> bit n-1-i of a basis index).
#[derive(Clone, Copy)]
struct StatePauli {
    zs: u64,
    xs: u64,
    phase: C64,
}

fn rev_bits(bits: u64, n: usize) -> u64 {
    let mut out = 0u64;
    for i in 0..n {
        if bits >> i & 1 == 1 {
            out |= 1 << (n - 1 - i);
        }
    }
    out
}

impl StatePauli {
    fn from_op(op: &PauliOp) -> StatePauli {
        let n = op.num_qubits();
        StatePauli {
            zs: rev_bits(op.z_bits(), n),
            xs: rev_bits(op.x_bits(), n),
            phase: C64::new(0.0, 1.0).powu(op.phase_exp() as u32),
        }
    }

    fn sign(&self, index: usize) -> f64 {
        if (self.zs & index as u64).count_ones() & 1 == 1 {
            -1.0
        } else {
            1.0
        }
    }

    /// out = P v
    fn apply_vec(&self, v: &[C64]) -> Vec<C64> {
        let dim = v.len();
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for b in 0..dim {
            let r = b ^ self.xs as usize;
            out[r] = self.phase * self.sign(r) * v[b];
        }
        out
    }

    /// out = P m
    fn apply_left(&self, m: &DMat) -> DMat {
        let dim = m.dim;
        let mut out = DMat::zero(dim);
        for r in 0..dim {
            let src = r ^ self.xs as usize;
            let f = self.phase * self.sign(r);
            let dst_row = &mut out.data[r * dim..(r + 1) * dim];
            let src_row = &m.data[src * dim..(src + 1) * dim];
            for (d, s) in dst_row.iter_mut().zip(src_row) {
                *d = f * s;
            }
        }
        out
    }

    /// out = m P
    fn apply_right(&self, m: &DMat) -> DMat {
        let dim = m.dim;
        let mut out = DMat::zero(dim);
        for c in 0..dim {
            let src = c ^ self.xs as usize;
            let f = self.phase * self.sign(src);
            for r in 0..dim {
                out.data[r * dim + c] = f * m.data[r * dim + src];
            }
        }
        out
    }
}

/// m <- A m with A acting on `qubit` only.
fn apply_single_left(a: &Mat2, qubit: usize, n: usize, m: &DMat) -> DMat {
    let bit = 1usize << (n - 1 - qubit);
    let dim = m.dim;
    let mut out = DMat::zero(dim);
    for r in 0..dim {
        let rb = (r & bit != 0) as usize;
        let (s0, s1) = (r & !bit, r | bit);
        for c in 0..dim {
            out.data[r * dim + c] =
                a.0[rb][0] * m.data[s0 * dim + c] + a.0[rb][1] * m.data[s1 * dim + c];
        }
    }
    out
}

/// m <- m A^dag with A acting on `qubit` only.
fn apply_single_right_dag(a: &Mat2, qubit: usize, n: usize, m: &DMat) -> DMat {
    let bit = 1usize << (n - 1 - qubit);
    let dim = m.dim;
    let mut out = DMat::zero(dim);
    for r in 0..dim {
        for c in 0..dim {
            let cb = (c & bit != 0) as usize;
            let (s0, s1) = (c & !bit, c | bit);
            out.data[r * dim + c] = m.data[r * dim + s0] * a.0[cb][0].conj()
                + m.data[r * dim + s1] * a.0[cb][1].conj();
        }
    }
    out
}

/// rho <- channel applied on `qubit`.
fn apply_channel(k: &KrausChannel, qubit: usize, n: usize, m: &DMat) -> DMat {
    let mut out = DMat::zero(m.dim);
    for a in &k.ops {
        let t = apply_single_right_dag(a, qubit, n, &apply_single_left(a, qubit, n, m));
        for (o, v) in out.data.iter_mut().zip(&t.data) {
            *o += v;
        }
    }
    out
}

/// n-qubit noise in Kraus form for the oracle: a tensor product of local
/// channels, or a probabilistic mixture of such products.
#[derive(Debug, Clone)]
pub enum OracleNoise {
    Tensor(Vec<KrausChannel>),
    Mixture(Vec<(f64, Vec<KrausChannel>)>),
}

impl OracleNoise {
    fn apply(&self, n: usize, m: &DMat) -> DMat {
        match self {
            OracleNoise::Tensor(channels) => {
                assert_eq!(channels.len(), n);
                let mut cur = m.clone();
                for (q, k) in channels.iter().enumerate() {
                    cur = apply_channel(k, q, n, &cur);
                }
                cur
            }
            OracleNoise::Mixture(terms) => {
                let mut out = DMat::zero(m.dim);
                for (w, channels) in terms {
                    let t = OracleNoise::Tensor(channels.clone()).apply(n, m);
                    for (o, v) in out.data.iter_mut().zip(&t.data) {
                        *o += C64::new(*w, 0.0) * v;
                    }
                }
                out
            }
        }
    }
}

/// Explicit codewords and generator data on the full state space.
pub struct DenseCode {
    pub n: usize,
    pub dim: usize,
    /// |0bar>, |1bar>
    pub codewords: [Vec<C64>; 2],
    generators: Vec<StatePauli>,
    num_generators: usize,
}

impl DenseCode {
    pub fn build(code: &StabilizerCode) -> Result<DenseCode> {
        let n = code.n;
        if n > ORACLE_MAX_QUBITS {
            return Err(Error::OracleTooLarge {
                n,
                limit: ORACLE_MAX_QUBITS,
            });
        }
        let dim = 1usize << n;
        let generators: Vec<StatePauli> =
            code.generators.iter().map(StatePauli::from_op).collect();
        let logical_z = StatePauli::from_op(&code.logical_z);
        let logical_x = StatePauli::from_op(&code.logical_x);

        // |0bar> = normalized P0 (I + Zbar)/2 |b*>, b* the basis vector with
        // the largest surviving norm (lowest index on ties)
        let project = |v: Vec<C64>| -> Vec<C64> {
            let mut cur = v;
            let zl = logical_z.apply_vec(&cur);
            for (c, z) in cur.iter_mut().zip(&zl) {
                *c = (*c + z) * 0.5;
            }
            for g in &generators {
                let gv = g.apply_vec(&cur);
                for (c, z) in cur.iter_mut().zip(&gv) {
                    *c = (*c + z) * 0.5;
                }
            }
            cur
        };
        let norm2 = |v: &[C64]| -> f64 { v.iter().map(|c| c.norm_sqr()).sum() };
        let mut best: Option<(f64, Vec<C64>)> = None;
        for b in 0..dim {
            let mut v = vec![C64::new(0.0, 0.0); dim];
            v[b] = C64::new(1.0, 0.0);
            let w = project(v);
            let nw = norm2(&w);
            if best.as_ref().map_or(true, |(bn, _)| nw > bn + 1e-9) {
                best = Some((nw, w));
            }
        }
        let (nw, mut zero) = best.ok_or(Error::BadCodespaceRank(0))?;
        if nw < 1e-12 {
            return Err(Error::BadCodespaceRank(0));
        }
        let scale = 1.0 / nw.sqrt();
        for c in zero.iter_mut() {
            *c *= scale;
        }
        // fix global phase: largest-magnitude entry made real positive
        let pivot = (0..dim)
            .max_by(|&a, &b| {
                zero[a]
                    .norm_sqr()
                    .partial_cmp(&zero[b].norm_sqr())
                    .unwrap()
                    .then(b.cmp(&a))
            })
            .unwrap();
        let phase = zero[pivot] / zero[pivot].norm();
        for c in zero.iter_mut() {
            *c /= phase;
        }
        let one = logical_x.apply_vec(&zero);
        let dense = DenseCode {
            n,
            dim,
            codewords: [zero, one],
            generators,
            num_generators: code.generators.len(),
        };
        dense.check_codewords()?;
        Ok(dense)
    }

    fn check_codewords(&self) -> Result<()> {
        let dot = |a: &[C64], b: &[C64]| -> C64 {
            a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
        };
        for w in &self.codewords {
            if (dot(w, w).re - 1.0).abs() > 1e-10 {
                return Err(Error::BadCodespaceRank(1));
            }
            for g in &self.generators {
                let gw = g.apply_vec(w);
                let fid = dot(w, &gw);
                if (fid.re - 1.0).abs() > 1e-10 || fid.im.abs() > 1e-10 {
                    return Err(Error::BadCodespaceRank(1));
                }
            }
        }
        if dot(&self.codewords[0], &self.codewords[1]).norm() > 1e-10 {
            return Err(Error::BadCodespaceRank(1));
        }
        Ok(())
    }

    pub fn num_syndromes(&self) -> usize {
        1 << self.num_generators
    }

    /// E_tau = B (tau / sqrt(2)) B^dag as a dense matrix.
    fn logical_basis_op(&self, tau: usize) -> DMat {
        let sigma = crate::channel::pauli_mat(tau);
        let s = C64::new(1.0 / 2.0f64.sqrt(), 0.0);
        let mut out = DMat::zero(self.dim);
        for c in 0..2 {
            for d in 0..2 {
                let coeff = s * sigma.0[c][d];
                if coeff.norm_sqr() == 0.0 {
                    continue;
                }
                let (u, v) = (&self.codewords[c], &self.codewords[d]);
                for r in 0..self.dim {
                    if u[r].norm_sqr() == 0.0 {
                        continue;
                    }
                    for cc in 0..self.dim {
                        out.data[r * self.dim + cc] += coeff * u[r] * v[cc].conj();
                    }
                }
            }
        }
        out
    }

    /// The 4 process-matrix column entries for one projected-and-recovered
    /// matrix: G[sigma] = (1/sqrt 2) sum_ab sigma_ab <b| R m R^dag |a>.
    fn logical_readout(&self, m: &DMat, recovery: &PauliOp) -> [f64; 4] {
        let r_dag = StatePauli::from_op(&recovery.adjoint());
        let u: Vec<Vec<C64>> = self
            .codewords
            .iter()
            .map(|w| r_dag.apply_vec(w))
            .collect();
        // t[b][a] = u_b^dag m u_a
        let mut t = [[C64::new(0.0, 0.0); 2]; 2];
        for a in 0..2 {
            let mut mv = vec![C64::new(0.0, 0.0); self.dim];
            for r in 0..self.dim {
                let row = &m.data[r * self.dim..(r + 1) * self.dim];
                let mut acc = C64::new(0.0, 0.0);
                for (x, y) in row.iter().zip(&u[a]) {
                    acc += x * y;
                }
                mv[r] = acc;
            }
            for b in 0..2 {
                t[b][a] = u[b].iter().zip(&mv).map(|(x, y)| x.conj() * y).sum();
            }
        }
        let s = 1.0 / 2.0f64.sqrt();
        let mut out = [0.0; 4];
        for (sig, o) in out.iter_mut().enumerate() {
            let sm = crate::channel::pauli_mat(sig);
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..2 {
                for b in 0..2 {
                    acc += sm.0[a][b] * t[b][a];
                }
            }
            acc *= s;
            debug_assert!(acc.im.abs() < 1e-9, "imaginary entry {}", acc.im);
            *o = acc.re;
        }
        out
    }
}

/// All 2^{n-1} unnormalized conditional channels, one per syndrome, by a
/// depth-first projector split (I +/- g)/2 over the generators.
pub fn oracle_all_conditionals(
    dense: &DenseCode,
    noise: &OracleNoise,
    table: &SyndromeTable,
) -> Result<Vec<ProcessMatrix>> {
    let columns: Vec<Vec<[f64; 4]>> = (0..4usize)
        .into_par_iter()
        .map(|tau| {
            let noisy = noise.apply(dense.n, &dense.logical_basis_op(tau));
            let mut leaves = vec![[0.0; 4]; dense.num_syndromes()];
            dfs_project(dense, table, &noisy, 0, 0, &mut leaves);
            leaves
        })
        .collect();
    let mut out = vec![ProcessMatrix::zero(); dense.num_syndromes()];
    for (tau, col) in columns.iter().enumerate() {
        for (l, entries) in col.iter().enumerate() {
            for sigma in 0..4 {
                out[l].0[sigma][tau] = entries[sigma];
            }
        }
    }
    Ok(out)
}

fn dfs_project(
    dense: &DenseCode,
    table: &SyndromeTable,
    m: &DMat,
    depth: usize,
    syndrome: usize,
    leaves: &mut Vec<[f64; 4]>,
) {
    if depth == dense.num_generators {
        leaves[syndrome] = dense.logical_readout(m, table.representative(syndrome));
        return;
    }
    let g = &dense.generators[depth];
    let gm = g.apply_left(m);
    // plus branch: (h + h g)/2 with h = (m + g m)/2; minus analogous
    for (bit, sign) in [(0usize, 1.0), (1usize, -1.0)] {
        let mut h = DMat::zero(m.dim);
        for ((o, a), b) in h.data.iter_mut().zip(&m.data).zip(&gm.data) {
            *o = (a + C64::new(sign, 0.0) * b) * 0.5;
        }
        let hg = g.apply_right(&h);
        let mut branch = DMat::zero(m.dim);
        for ((o, a), b) in branch.data.iter_mut().zip(&h.data).zip(&hg.data) {
            *o = (a + C64::new(sign, 0.0) * b) * 0.5;
        }
        dfs_project(
            dense,
            table,
            &branch,
            depth + 1,
            syndrome | (bit << depth),
            leaves,
        );
    }
}

/// Single-syndrome conditional channel.
pub fn oracle_conditional(
    dense: &DenseCode,
    noise: &OracleNoise,
    table: &SyndromeTable,
    syndrome: usize,
) -> Result<ProcessMatrix> {
    Ok(oracle_all_conditionals(dense, noise, table)?[syndrome])
}

/// Syndrome-averaged effective channel (sum of unnormalized conditionals).
pub fn oracle_effective(
    dense: &DenseCode,
    noise: &OracleNoise,
    table: &SyndromeTable,
) -> Result<ProcessMatrix> {
    let conditionals = oracle_all_conditionals(dense, noise, table)?;
    let mut out = ProcessMatrix::zero();
    for c in &conditionals {
        out = out.add(c);
    }
    Ok(out)
}

/// Uniform single-qubit noise on every qubit.
pub fn uniform_noise(n: usize, k: &KrausChannel) -> OracleNoise {
    OracleNoise::Tensor(vec![k.clone(); n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{
        amplitude_phase_damping_kraus, pauli_mat, random_kraus_channel, seeded_rng,
    };
    use crate::code::{builtin_code, symmetric_decoder};

    #[test]
    fn bitflip_codewords_are_ghz_basis() {
        let code = builtin_code("bitflip-3").unwrap();
        let dense = DenseCode::build(&code).unwrap();
        // |000> and |111>
        assert!((dense.codewords[0][0].re - 1.0).abs() < 1e-12);
        assert!((dense.codewords[1][7].re - 1.0).abs() < 1e-12);
        for i in 1..8 {
            assert!(dense.codewords[0][i].norm() < 1e-12);
        }
    }

    #[test]
    fn codewords_valid_for_all_builtin_codes() {
        for name in crate::code::BUILTIN_CODE_NAMES {
            let code = builtin_code(name).unwrap();
            // build() runs the orthonormality and stabilization checks
            DenseCode::build(&code).unwrap();
        }
    }

    #[test]
    fn identity_noise_conditionals() {
        let code = builtin_code("five-qubit").unwrap();
        let dense = DenseCode::build(&code).unwrap();
        let table = symmetric_decoder(&code).unwrap();
        let noise = uniform_noise(5, &KrausChannel::identity());
        let conds = oracle_all_conditionals(&dense, &noise, &table).unwrap();
        assert!(conds[0].linf_distance(&ProcessMatrix::identity()) < 1e-12);
        for c in &conds[1..] {
            assert!(c.linf_distance(&ProcessMatrix::zero()) < 1e-12);
        }
    }

    #[test]
    fn bitflip_x_noise_syndrome_probability() {
        let p: f64 = 0.13;
        let code = builtin_code("bitflip-3").unwrap();
        let dense = DenseCode::build(&code).unwrap();
        let table = symmetric_decoder(&code).unwrap();
        let flip = KrausChannel::new(vec![
            Mat2::identity().scale(C64::new((1.0 - p).sqrt(), 0.0)),
            pauli_mat(1).scale(C64::new(p.sqrt(), 0.0)),
        ])
        .unwrap();
        let conds =
            oracle_all_conditionals(&dense, &uniform_noise(3, &flip), &table).unwrap();
        // syndrome 1 <- X1 (prob p(1-p)^2) or X2 X3 (prob p^2(1-p))
        let expect = p * (1.0 - p) * (1.0 - p) + p * p * (1.0 - p);
        assert!((conds[1].0[0][0] - expect).abs() < 1e-12);
        // recovery X1 corrects X1 but X2X3 becomes logical X: Z component flips
        let zz = (p * (1.0 - p) * (1.0 - p) - p * p * (1.0 - p)) / expect;
        assert!((conds[1].0[3][3] / conds[1].0[0][0] - zz).abs() < 1e-12);
        // probabilities over all syndromes sum to 1
        let total: f64 = conds.iter().map(|c| c.0[0][0]).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn effective_channel_trace_preserving_random_noise() {
        let code = builtin_code("five-qubit").unwrap();
        let dense = DenseCode::build(&code).unwrap();
        let table = symmetric_decoder(&code).unwrap();
        let mut rng = seeded_rng(3, 0);
        let k = random_kraus_channel(&mut rng, 2);
        let eff = oracle_effective(&dense, &uniform_noise(5, &k), &table).unwrap();
        assert!(eff.is_trace_preserving(1e-10), "first row {:?}", eff.0[0]);
    }

    #[test]
    fn conditional_matches_all_conditionals() {
        let code = builtin_code("bitflip-3").unwrap();
        let dense = DenseCode::build(&code).unwrap();
        let table = symmetric_decoder(&code).unwrap();
        let k = amplitude_phase_damping_kraus(0.2, 0.1).unwrap();
        let noise = uniform_noise(3, &k);
        let all = oracle_all_conditionals(&dense, &noise, &table).unwrap();
        for l in 0..4 {
            let single = oracle_conditional(&dense, &noise, &table, l).unwrap();
            assert!(single.linf_distance(&all[l]) < 1e-14);
        }
    }

    #[test]
    fn mixture_noise_is_convex() {
        let code = builtin_code("bitflip-3").unwrap();
        let dense = DenseCode::build(&code).unwrap();
        let table = symmetric_decoder(&code).unwrap();
        let a = amplitude_phase_damping_kraus(0.15, 0.0).unwrap();
        let b = amplitude_phase_damping_kraus(0.0, 0.3).unwrap();
        let w = 0.37;
        let mixed = OracleNoise::Mixture(vec![
            (w, vec![a.clone(); 3]),
            (1.0 - w, vec![b.clone(); 3]),
        ]);
        let eff_mixed = oracle_effective(&dense, &mixed, &table).unwrap();
        let eff_a = oracle_effective(&dense, &uniform_noise(3, &a), &table).unwrap();
        let eff_b = oracle_effective(&dense, &uniform_noise(3, &b), &table).unwrap();
        let expect = eff_a.scale(w).add(&eff_b.scale(1.0 - w));
        assert!(eff_mixed.linf_distance(&expect) < 1e-12);
    }

    #[test]
    fn rejects_large_codes() {
        let code = builtin_code("five-qubit").unwrap();
        let mut big = code.clone();
        big.n = 10;
        assert!(matches!(
            DenseCode::build(&big),
            Err(Error::OracleTooLarge { n: 10, limit: 9 })
        ));
    }
}
