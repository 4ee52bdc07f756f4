//! The coefficient engine: stabilizer expansion coefficients, per-syndrome
//! conditional logical channels, syndrome-averaged effective channels,
//! correlated block noise, and concatenation.
//!
//! A logical basis operator expands over the stabilizer group as
//! E_tau = sum_k alpha^tau(S_k) S_k taubar / 2^{n/2-1}-normalized terms;
//! conditional channels are then double sums over the group with per-qubit
//! noise matrix elements picked out by the tensor factors of S_k sigmabar.

use crate::channel::{NoiseFamily, ProcessMatrix};
use crate::code::{StabilizerCode, SyndromeTable};
use crate::error::{Error, Result};
use crate::pauli::{PauliKind, PauliOp};

/// Stable pairwise summation; the conditional sums have 2^{2(n-1)} terms
/// with heavy cancellation.
pub fn pairwise_sum(terms: &[f64]) -> f64 {
    match terms.len() {
        0 => 0.0,
        1 => terms[0],
        2 => terms[0] + terms[1],
        len => {
            let mid = len / 2;
            pairwise_sum(&terms[..mid]) + pairwise_sum(&terms[mid..])
        }
    }
}

fn eta(a: &PauliOp, b: &PauliOp) -> f64 {
    a.commutes(b).expect("same size") as f64
}

/// Expansion coefficients alpha^tau(S_k), indexed `values[k][tau]`.
#[derive(Debug, Clone)]
pub struct AlphaTable {
    /// 1/2^{n/2-1}; every entry has this magnitude.
    pub normalization: f64,
    pub values: Vec<[f64; 4]>,
}

/// Per-syndrome coefficients beta^sigma(S_k, R_l), indexed
/// `per_syndrome[l][k][sigma]`.
#[derive(Debug, Clone)]
pub struct BetaTables {
    pub per_syndrome: Vec<Vec<[f64; 4]>>,
}

/// Precomputed per-code data for the conditional-channel sums.
pub struct LogicalEngine {
    pub code: StabilizerCode,
    /// Stabilizer elements in generator-mask order.
    pub elements: Vec<PauliOp>,
    logicals: [PauliOp; 4],
    /// alpha[t][k], normalization included.
    alpha: [Vec<f64>; 4],
    /// kinds[t][k*n + i] = Pauli kind of qubit i in S_k . logical(t).
    kinds: [Vec<u8>; 4],
}

impl LogicalEngine {
    pub fn new(code: &StabilizerCode) -> Result<LogicalEngine> {
        let elements: Vec<PauliOp> = code
            .stabilizer_elements()?
            .into_iter()
            .map(|e| e.element)
            .collect();
        let logicals = [
            code.logical(PauliKind::I),
            code.logical(PauliKind::X),
            code.logical(PauliKind::Y),
            code.logical(PauliKind::Z),
        ];
        let n = code.n;
        let norm = 0.5f64.powf(n as f64 / 2.0 - 1.0);
        let mut alpha: [Vec<f64>; 4] = Default::default();
        let mut kinds: [Vec<u8>; 4] = Default::default();
        for t in 0..4 {
            alpha[t] = Vec::with_capacity(elements.len());
            kinds[t] = Vec::with_capacity(elements.len() * n);
            for s in &elements {
                let prod = s.mul(&logicals[t])?;
                let sign = if prod.sign_exponent() == 0 { 1.0 } else { -1.0 };
                alpha[t].push(sign * norm);
                for i in 0..n {
                    kinds[t].push(prod.kind_at(i).index() as u8);
                }
            }
        }
        Ok(LogicalEngine {
            code: code.clone(),
            elements,
            logicals,
            alpha,
            kinds,
        })
    }

    pub fn alpha_table(&self) -> AlphaTable {
        let n = self.code.n;
        let values = (0..self.elements.len())
            .map(|k| {
                let mut row = [0.0; 4];
                for (t, a) in self.alpha.iter().enumerate() {
                    row[t] = a[k];
                }
                row
            })
            .collect();
        AlphaTable {
            normalization: 0.5f64.powf(n as f64 / 2.0 - 1.0),
            values,
        }
    }

    /// Beta tables by both routes — the commutation-sign product
    /// beta = alpha . eta(R,S_k) . eta(R,sigmabar) and the closed symplectic
    /// form — asserted equal entrywise.
    pub fn beta_tables(&self, table: &SyndromeTable) -> Result<BetaTables> {
        let mut per_syndrome = Vec::with_capacity(table.reps.len());
        for (l, rep) in table.reps.iter().enumerate() {
            let mut entries = Vec::with_capacity(self.elements.len());
            for (k, s) in self.elements.iter().enumerate() {
                let mut row = [0.0; 4];
                for sigma in 0..4 {
                    let a = self.alpha[sigma][k];
                    let via_eta = a * eta(rep, s) * eta(rep, &self.logicals[sigma]);
                    // closed form: (-1)^{a_l.(bbar + sigma_x) + b_l.(abar + sigma_z)}
                    let zx = s.x_bits() ^ self.logicals[sigma].x_bits();
                    let zz = s.z_bits() ^ self.logicals[sigma].z_bits();
                    let exp = crate::pauli::parity(rep.z_bits() & zx)
                        ^ crate::pauli::parity(rep.x_bits() & zz);
                    let via_symplectic = if exp == 0 { a } else { -a };
                    if via_eta != via_symplectic {
                        return Err(Error::BetaInconsistency {
                            syndrome: l,
                            element: k,
                            sigma,
                        });
                    }
                    row[sigma] = via_eta;
                }
                entries.push(row);
            }
            per_syndrome.push(entries);
        }
        Ok(BetaTables { per_syndrome })
    }

    /// The syndrome-independent double-sum tables
    /// W[sigma][tau][k] = alpha^sigma(S_k) sum_k' alpha^tau(S_k')
    ///                    prod_i N_i[kind_i(S_k sigmabar)][kind_i(S_k' taubar)].
    fn w_tables(&self, noise: &[ProcessMatrix]) -> Result<[[Vec<f64>; 4]; 4]> {
        let n = self.code.n;
        if noise.len() != n {
            return Err(Error::DimensionMismatch(noise.len(), n));
        }
        let kk = self.elements.len();
        let mut w: [[Vec<f64>; 4]; 4] = Default::default();
        let mut terms = vec![0.0; kk];
        for sigma in 0..4 {
            for tau in 0..4 {
                let mut out = Vec::with_capacity(kk);
                for k in 0..kk {
                    let row = &self.kinds[sigma][k * n..(k + 1) * n];
                    for (kp, term) in terms.iter_mut().enumerate() {
                        let col = &self.kinds[tau][kp * n..(kp + 1) * n];
                        let mut prod = self.alpha[tau][kp];
                        for i in 0..n {
                            prod *= noise[i].0[row[i] as usize][col[i] as usize];
                        }
                        *term = prod;
                    }
                    out.push(self.alpha[sigma][k] * pairwise_sum(&terms));
                }
                w[sigma][tau] = out;
            }
        }
        Ok(w)
    }

    fn w_tables_block(&self, noise: &BlockNoise) -> Result<[[Vec<f64>; 4]; 4]> {
        match noise {
            BlockNoise::Tensor(per_qubit) => self.w_tables(per_qubit),
            BlockNoise::Mixture(blend) => {
                let kk = self.elements.len();
                let mut acc: [[Vec<f64>; 4]; 4] =
                    std::array::from_fn(|_| std::array::from_fn(|_| vec![0.0; kk]));
                for (weight, per_qubit) in blend {
                    let w = self.w_tables(per_qubit)?;
                    for s in 0..4 {
                        for t in 0..4 {
                            for (a, v) in acc[s][t].iter_mut().zip(&w[s][t]) {
                                *a += weight * v;
                            }
                        }
                    }
                }
                Ok(acc)
            }
        }
    }

    /// Unnormalized conditional channels for every syndrome; entry (I,I) is
    /// the syndrome probability for a maximally mixed logical input.
    pub fn conditional_channels(
        &self,
        noise: &BlockNoise,
        table: &SyndromeTable,
    ) -> Result<Vec<ProcessMatrix>> {
        let w = self.w_tables_block(noise)?;
        let kk = self.elements.len();
        let mut out = Vec::with_capacity(table.reps.len());
        let mut terms = vec![0.0; kk];
        for rep in &table.reps {
            let eta_s: Vec<f64> = self.elements.iter().map(|s| eta(rep, s)).collect();
            let mut g = ProcessMatrix::zero();
            for sigma in 0..4 {
                let e_sig = eta(rep, &self.logicals[sigma]);
                for tau in 0..4 {
                    for ((term, es), wv) in
                        terms.iter_mut().zip(&eta_s).zip(&w[sigma][tau])
                    {
                        *term = es * wv;
                    }
                    g.0[sigma][tau] = 0.5 * e_sig * pairwise_sum(&terms);
                }
            }
            out.push(g);
        }
        Ok(out)
    }

    /// Syndrome-averaged effective channel: the sum of the unnormalized
    /// conditionals (the per-syndrome 1/p(l) normalizations cancel).
    pub fn effective_channel(
        &self,
        noise: &BlockNoise,
        table: &SyndromeTable,
    ) -> Result<ProcessMatrix> {
        let conditionals = self.conditional_channels(noise, table)?;
        let mut out = ProcessMatrix::zero();
        for c in &conditionals {
            out = out.add(c);
        }
        Ok(out)
    }

    /// Effective channels for `levels` rounds of concatenation with a fixed
    /// decoder table; element t-1 is the level-t channel. Block-correlated
    /// noise applies at level 1 only.
    pub fn concatenate(
        &self,
        noise: &BlockNoise,
        table: &SyndromeTable,
        levels: usize,
    ) -> Result<Vec<ProcessMatrix>> {
        if levels == 0 {
            return Err(Error::BadMaxLevels);
        }
        if levels > 1 && !self.code.concatenable {
            return Err(Error::NotConcatenable(self.code.name.clone()));
        }
        let mut out = Vec::with_capacity(levels);
        let mut cur = self.effective_channel(noise, table)?;
        out.push(cur);
        for _ in 1..levels {
            cur = self.effective_channel(&BlockNoise::uniform(self.code.n, cur), table)?;
            out.push(cur);
        }
        Ok(out)
    }
}

pub fn build_alpha(code: &StabilizerCode) -> Result<AlphaTable> {
    Ok(LogicalEngine::new(code)?.alpha_table())
}

pub fn build_beta(code: &StabilizerCode, table: &SyndromeTable) -> Result<BetaTables> {
    LogicalEngine::new(code)?.beta_tables(table)
}

/// Noise on one code block: independent per-qubit channels or a mixture of
/// such tensor products (correlated noise).
#[derive(Debug, Clone)]
pub enum BlockNoise {
    Tensor(Vec<ProcessMatrix>),
    Mixture(Vec<(f64, Vec<ProcessMatrix>)>),
}

impl BlockNoise {
    pub fn uniform(n: usize, m: ProcessMatrix) -> BlockNoise {
        BlockNoise::Tensor(vec![m; n])
    }

    pub fn from_family(family: &NoiseFamily, n: usize) -> Result<BlockNoise> {
        match family {
            NoiseFamily::CorrelatedDephasingMix { p, q } => {
                correlated_dephasing_mix(n, *p, *q)
            }
            other => Ok(BlockNoise::uniform(n, other.process()?)),
        }
    }
}

/// Depolarizing noise with ring-correlated two-qubit dephasing:
/// (1-q) D_p^{(x)n} + (q/n) sum_j Z_j Z_{j+1} conjugation (indices mod n),
/// identity channels on the remaining slots.
pub fn correlated_dephasing_mix(n: usize, p: f64, q: f64) -> Result<BlockNoise> {
    correlated_dephasing_with(n, crate::channel::depolarizing(p)?, q)
}

/// Ring-correlated dephasing around an arbitrary local channel; used both
/// for the physical noise and to rebuild the block noise at each
/// concatenation level (fresh intra-block correlations per level).
pub fn correlated_dephasing_with(
    n: usize,
    local: ProcessMatrix,
    q: f64,
) -> Result<BlockNoise> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter {
            name: "q",
            value: q,
            range: "[0, 1]",
        });
    }
    let z_conj = ProcessMatrix::diagonal([1.0, -1.0, -1.0, 1.0]);
    let mut terms = vec![(1.0 - q, vec![local; n])];
    for j in 0..n {
        let mut slots = vec![ProcessMatrix::identity(); n];
        slots[j] = z_conj;
        slots[(j + 1) % n] = z_conj;
        terms.push((q / n as f64, slots));
    }
    Ok(BlockNoise::Mixture(terms))
}
