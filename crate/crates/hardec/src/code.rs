//! Stabilizer codes, syndrome/coset machinery, min-weight decoders, and
//! transversal logical gate groups.

use crate::channel::{pauli_mat, Mat2, ProcessMatrix, C64};
use crate::error::{Error, Result};
use crate::pauli::{stabilizer_group, PauliKind, PauliOp, SignedStabilizerElement};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

/// Single-qubit gate names usable as transversal generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateName {
    I,
    X,
    Y,
    Z,
    H,
    S,
    C3,
}

impl GateName {
    pub fn parse(s: &str) -> Result<GateName> {
        Ok(match s {
            "I" => GateName::I,
            "X" => GateName::X,
            "Y" => GateName::Y,
            "Z" => GateName::Z,
            "H" => GateName::H,
            "S" => GateName::S,
            "C3" => GateName::C3,
            other => {
                return Err(Error::CodeParse {
                    line: 0,
                    reason: format!("unknown gate name '{other}'"),
                })
            }
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GateName::I => "I",
            GateName::X => "X",
            GateName::Y => "Y",
            GateName::Z => "Z",
            GateName::H => "H",
            GateName::S => "S",
            GateName::C3 => "C3",
        }
    }

    pub fn unitary(self) -> Mat2 {
        let o = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        match self {
            GateName::I => Mat2::identity(),
            GateName::X => pauli_mat(1),
            GateName::Y => pauli_mat(2),
            GateName::Z => pauli_mat(3),
            GateName::H => {
                let h = 1.0 / 2.0f64.sqrt();
                Mat2([[C64::new(h, 0.0), C64::new(h, 0.0)], [
                    C64::new(h, 0.0),
                    C64::new(-h, 0.0),
                ]])
            }
            GateName::S => Mat2([[one, o], [o, C64::new(0.0, 1.0)]]),
            // exp[i pi (X+Y+Z) / (3 sqrt(3))]: order-3 rotation cycling X->Y->Z
            GateName::C3 => {
                let third = std::f64::consts::FRAC_PI_3;
                let n = 1.0 / 3.0f64.sqrt();
                crate::channel::rotation_unitary_axis(third, [n, n, n])
            }
        }
    }

    pub fn process(self) -> ProcessMatrix {
        ProcessMatrix::from_unitary(&self.unitary())
    }
}

/// An [[n, 1]] stabilizer code with its transversal gate generators.
#[derive(Debug, Clone)]
pub struct StabilizerCode {
    pub name: String,
    pub n: usize,
    pub generators: Vec<PauliOp>,
    pub logical_x: PauliOp,
    pub logical_z: PauliOp,
    pub transversal_generators: Vec<GateName>,
    pub concatenable: bool,
    /// Qubit significance order used to break ties among minimum-weight
    /// syndrome representatives: qubit i contributes at bit position
    /// rep_order[i] of the lexicographic sort key. Identity for most codes;
    /// the representative set (and hence the distinct-conditional structure)
    /// depends on this choice whenever a syndrome admits several
    /// minimum-weight recoveries.
    pub rep_order: Vec<usize>,
}

impl StabilizerCode {
    pub fn new(
        name: impl Into<String>,
        generators: Vec<PauliOp>,
        logical_x: PauliOp,
        logical_z: PauliOp,
        transversal_generators: Vec<GateName>,
        concatenable: bool,
    ) -> Result<StabilizerCode> {
        let n = logical_x.num_qubits();
        let code = StabilizerCode {
            name: name.into(),
            n,
            generators,
            logical_x,
            logical_z,
            transversal_generators,
            concatenable,
            rep_order: (0..n).collect(),
        };
        code.validate()?;
        Ok(code)
    }

    /// Replace the representative tie-break order; must permute 0..n.
    pub fn with_rep_order(mut self, order: Vec<usize>) -> Result<StabilizerCode> {
        self.rep_order = order;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        if self.generators.len() + 1 != n {
            return Err(Error::Config {
                field: "generators".into(),
                reason: format!(
                    "expected {} generators for an [[{}, 1]] code, got {}",
                    n - 1,
                    n,
                    self.generators.len()
                ),
            });
        }
        for (i, g) in self.generators.iter().enumerate() {
            if g.num_qubits() != n {
                return Err(Error::DimensionMismatch(g.num_qubits(), n));
            }
            for (j, h) in self.generators.iter().enumerate().skip(i + 1) {
                if g.commutes(h)? != 1 {
                    return Err(Error::NonCommutingGenerators(i, j));
                }
            }
            if g.commutes(&self.logical_x)? != 1 || g.commutes(&self.logical_z)? != 1 {
                return Err(Error::Config {
                    field: "logical".into(),
                    reason: format!("logical operator anticommutes with generator {i}"),
                });
            }
        }
        if self.logical_x.commutes(&self.logical_z)? != -1 {
            return Err(Error::Config {
                field: "logical".into(),
                reason: "logical X and Z must anticommute".into(),
            });
        }
        // independence: symplectic rank over GF(2)
        let mut rows: Vec<u128> = self
            .generators
            .iter()
            .map(|g| (g.z_bits() as u128) << 64 | g.x_bits() as u128)
            .collect();
        let mut rank = 0;
        for bit in (0..128).rev() {
            if let Some(p) = (rank..rows.len()).find(|&r| rows[r] >> bit & 1 == 1) {
                rows.swap(rank, p);
                for r in 0..rows.len() {
                    if r != rank && rows[r] >> bit & 1 == 1 {
                        rows[r] ^= rows[rank];
                    }
                }
                rank += 1;
            }
        }
        if rank != self.generators.len() {
            return Err(Error::DependentGenerators(rank, self.generators.len()));
        }
        let mut seen = vec![false; n];
        let order_ok = self.rep_order.len() == n
            && self.rep_order.iter().all(|&p| {
                p < n && !std::mem::replace(&mut seen[p], true)
            });
        if !order_ok {
            return Err(Error::Config {
                field: "rep_order".into(),
                reason: format!("expected a permutation of 0..{n}, got {:?}", self.rep_order),
            });
        }
        Ok(())
    }

    pub fn num_syndromes(&self) -> usize {
        1 << (self.n - 1)
    }

    /// Syndrome bit i (LSB = generator 0) is set iff `error` anticommutes
    /// with generator i.
    pub fn syndrome(&self, error: &PauliOp) -> usize {
        let mut s = 0usize;
        for (i, g) in self.generators.iter().enumerate() {
            if error.commutes(g).expect("qubit counts agree") == -1 {
                s |= 1 << i;
            }
        }
        s
    }

    /// The logical representative of a single-qubit Pauli kind.
    pub fn logical(&self, kind: PauliKind) -> PauliOp {
        match kind {
            PauliKind::I => PauliOp::identity(self.n),
            PauliKind::X => self.logical_x,
            PauliKind::Z => self.logical_z,
            // Y = i X Z on one qubit, so the logical Y follows the same rule
            PauliKind::Y => self
                .logical_x
                .mul(&self.logical_z)
                .expect("same size")
                .times_i(1),
        }
    }

    /// All 2^{n-1} signed stabilizer elements, generator-mask ascending.
    pub fn stabilizer_elements(&self) -> Result<Vec<SignedStabilizerElement>> {
        stabilizer_group(&self.generators)
    }

    /// True iff `op` is a stabilizer element times a phase, i.e. trivial
    /// syndrome and trivial logical action.
    pub fn is_logically_trivial(&self, op: &PauliOp) -> bool {
        self.syndrome(op) == 0
            && op.commutes(&self.logical_x).unwrap() == 1
            && op.commutes(&self.logical_z).unwrap() == 1
    }

    /// Parse a code description: one generator Pauli string per line, then
    /// `X:`/`Z:` logical lines; optional `name:`, `gates:` (names from
    /// {I,X,Y,Z,H,S,C3}) and `concatenable:` lines. `#` starts a comment.
    pub fn from_text(text: &str) -> Result<StabilizerCode> {
        let mut name = String::from("custom");
        let mut generators = Vec::new();
        let mut logical_x = None;
        let mut logical_z = None;
        let mut gates = vec![GateName::X, GateName::Z];
        let mut concatenable = true;
        let mut rep_order: Option<Vec<usize>> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |reason: String| Error::CodeParse {
                line: idx + 1,
                reason,
            };
            if let Some((key, value)) = line.split_once(':') {
                let value = value.trim();
                match key.trim() {
                    "name" => name = value.to_string(),
                    "X" => logical_x = Some(PauliOp::from_label(value)?),
                    "Z" => logical_z = Some(PauliOp::from_label(value)?),
                    "gates" => {
                        gates = value
                            .split_whitespace()
                            .map(GateName::parse)
                            .collect::<Result<Vec<_>>>()
                            .map_err(|e| at(e.to_string()))?;
                    }
                    "concatenable" => {
                        concatenable = value
                            .parse()
                            .map_err(|_| at(format!("expected true/false, got '{value}'")))?;
                    }
                    "rep-order" => {
                        rep_order = Some(
                            value
                                .split_whitespace()
                                .map(|v| {
                                    v.parse().map_err(|_| {
                                        at(format!("expected qubit index, got '{v}'"))
                                    })
                                })
                                .collect::<Result<Vec<usize>>>()?,
                        );
                    }
                    other => return Err(at(format!("unknown key '{other}'"))),
                }
            } else {
                generators.push(PauliOp::from_label(line).map_err(|e| at(e.to_string()))?);
            }
        }
        let logical_x = logical_x.ok_or_else(|| Error::CodeParse {
            line: 0,
            reason: "missing logical X line".into(),
        })?;
        let logical_z = logical_z.ok_or_else(|| Error::CodeParse {
            line: 0,
            reason: "missing logical Z line".into(),
        })?;
        let code =
            StabilizerCode::new(name, generators, logical_x, logical_z, gates, concatenable)?;
        match rep_order {
            Some(order) => code.with_rep_order(order),
            None => Ok(code),
        }
    }
}

pub const BUILTIN_CODE_NAMES: [&str; 6] = [
    "five-qubit",
    "steane",
    "shor-z",
    "shor-x",
    "surface-17",
    "bitflip-3",
];

/// Construct a built-in code by name.
pub fn builtin_code(name: &str) -> Result<StabilizerCode> {
    let gens = |labels: &[&str]| -> Vec<PauliOp> {
        labels
            .iter()
            .map(|l| PauliOp::from_label(l).expect("static label"))
            .collect()
    };
    let logical = |n: usize, kind: PauliKind| -> PauliOp {
        let mut op = PauliOp::identity(n);
        for q in 0..n {
            op = op.mul(&PauliOp::single(n, q, kind)).unwrap();
        }
        op
    };
    let (labels, n, gates, concatenable): (Vec<&str>, usize, Vec<GateName>, bool) = match name {
        "five-qubit" => (
            vec!["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"],
            5,
            vec![GateName::C3, GateName::X, GateName::Z],
            true,
        ),
        "steane" => (
            vec![
                "IIIZZZZ", "IZZIIZZ", "ZIZIZIZ", "IIIXXXX", "IXXIIXX", "XIXIXIX",
            ],
            7,
            vec![GateName::H, GateName::S],
            true,
        ),
        "shor-z" => (
            vec![
                "ZZIIIIIII",
                "ZIZIIIIII",
                "IIIZZIIII",
                "IIIZIZIII",
                "IIIIIIZZI",
                "IIIIIIZIZ",
                "XXXXXXIII",
                "IIIXXXXXX",
            ],
            9,
            vec![GateName::X, GateName::Z],
            true,
        ),
        "shor-x" => (
            vec![
                "XXIIIIIII",
                "XIXIIIIII",
                "IIIXXIIII",
                "IIIXIXIII",
                "IIIIIIXXI",
                "IIIIIIXIX",
                "ZZZZZZIII",
                "IIIZZZZZZ",
            ],
            9,
            vec![GateName::X, GateName::Z],
            true,
        ),
        "surface-17" => (
            vec![
                "ZIIZIIIII",
                "IZZIZZIII",
                "IIIZZIZZI",
                "IIIIIZIIZ",
                "XXIXXIIII",
                "IXXIIIIII",
                "IIIIXXIXX",
                "IIIIIIXXI",
            ],
            9,
            vec![GateName::X, GateName::Z],
            false,
        ),
        "bitflip-3" => (
            vec!["ZZI", "IZZ"],
            3,
            vec![GateName::X, GateName::Z],
            true,
        ),
        other => return Err(Error::UnknownCode(other.to_string())),
    };
    let code = StabilizerCode::new(
        name,
        gens(&labels),
        logical(n, PauliKind::X),
        logical(n, PauliKind::Z),
        gates,
        concatenable,
    )?;
    if name == "surface-17" {
        // Qubit significance order under which minimum-weight tie-breaking
        // reproduces the reference distinct-conditional structure (67 groups
        // for any product noise); the generator-string order alone gives a
        // finer, equally valid but non-standard partition.
        return code.with_rep_order(vec![0, 4, 5, 6, 1, 2, 7, 8, 3]);
    }
    Ok(code)
}

/// Per-syndrome minimum-weight recovery representatives.
#[derive(Debug, Clone)]
pub struct SyndromeTable {
    /// Indexed by syndrome; entry l satisfies syndrome(reps[l]) = l.
    pub reps: Vec<PauliOp>,
}

impl SyndromeTable {
    pub fn representative(&self, syndrome: usize) -> &PauliOp {
        &self.reps[syndrome]
    }

    /// The full coset Q_l = R_l . S . {logical I, X, Y, Z}, size 2^{n+1}.
    pub fn coset(&self, code: &StabilizerCode, syndrome: usize) -> Result<Vec<PauliOp>> {
        let rep = &self.reps[syndrome];
        let mut out = Vec::with_capacity(1 << (code.n + 1));
        for s in code.stabilizer_elements()? {
            for kind in PauliKind::ALL {
                out.push(rep.mul(&s.element)?.mul(&code.logical(kind))?);
            }
        }
        Ok(out)
    }
}

const DECODER_MAX_QUBITS: usize = 12;

fn check_decoder_size(code: &StabilizerCode) -> Result<()> {
    if code.n > DECODER_MAX_QUBITS {
        return Err(Error::Config {
            field: "code".into(),
            reason: format!(
                "decoder enumeration limited to n <= {DECODER_MAX_QUBITS}, got n = {}",
                code.n
            ),
        });
    }
    Ok(())
}

/// All (z, x) support pairs of n qubits in (weight, z, x) lexicographic
/// order, with bit significance given by the code's rep_order.
fn enumerated_supports(code: &StabilizerCode) -> Vec<(u32, u32)> {
    let n = code.n;
    let reorder = |v: u32| -> u32 {
        let mut out = 0u32;
        for (i, &p) in code.rep_order.iter().enumerate() {
            out |= (v >> i & 1) << p;
        }
        out
    };
    let size = 1u64 << n;
    let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(1 << (2 * n));
    for z in 0..size {
        for x in 0..size {
            pairs.push((z as u32, x as u32));
        }
    }
    pairs.sort_unstable_by_key(|&(z, x)| ((z | x).count_ones(), reorder(z), reorder(x)));
    pairs
}

fn fill_table(
    code: &StabilizerCode,
    reps: &mut Vec<Option<PauliOp>>,
    remaining: &mut usize,
    supports: impl Iterator<Item = (u32, u32)>,
) {
    for (z, x) in supports {
        if *remaining == 0 {
            break;
        }
        let op = PauliOp::new(code.n, z as u64, x as u64, 0);
        let l = code.syndrome(&op);
        if reps[l].is_none() {
            reps[l] = Some(op);
            *remaining -= 1;
        }
    }
}

/// Min-weight decoder; ties broken by (weight, z, x) lexicographic order.
pub fn symmetric_decoder(code: &StabilizerCode) -> Result<SyndromeTable> {
    symmetric_decoder_seeded(code, None)
}

/// Min-weight decoder with optional permutation of equal-weight candidates,
/// for tie-sensitivity studies. `None` keeps the deterministic order.
pub fn symmetric_decoder_seeded(
    code: &StabilizerCode,
    tie_seed: Option<u64>,
) -> Result<SyndromeTable> {
    check_decoder_size(code)?;
    let mut pairs = enumerated_supports(code);
    if let Some(seed) = tie_seed {
        let mut rng = crate::channel::seeded_rng(seed, 0);
        let mut start = 0;
        while start < pairs.len() {
            let w = (pairs[start].0 | pairs[start].1).count_ones();
            let end = pairs[start..]
                .iter()
                .position(|&(z, x)| (z | x).count_ones() != w)
                .map_or(pairs.len(), |p| start + p);
            pairs[start..end].shuffle(&mut rng);
            start = end;
        }
    }
    let mut reps = vec![None; code.num_syndromes()];
    let mut remaining = reps.len();
    fill_table(code, &mut reps, &mut remaining, pairs.into_iter());
    assert_eq!(remaining, 0, "syndrome map must be surjective");
    Ok(SyndromeTable {
        reps: reps.into_iter().map(Option::unwrap).collect(),
    })
}

/// Min-weight decoder preferring Paulis supported on `subset`; syndromes
/// with no subset-supported coset member fall back to the symmetric choice.
pub fn biased_decoder(code: &StabilizerCode, subset: &[PauliKind]) -> Result<SyndromeTable> {
    check_decoder_size(code)?;
    if subset.iter().all(|&k| k == PauliKind::I) {
        return Err(Error::EmptyErrorSubset);
    }
    let allowed = |z: u32, x: u32| -> bool {
        (0..code.n).all(|q| {
            let kind = PauliKind::from_bits(z >> q & 1 == 1, x >> q & 1 == 1);
            kind == PauliKind::I || subset.contains(&kind)
        })
    };
    let pairs = enumerated_supports(code);
    let mut reps = vec![None; code.num_syndromes()];
    let mut remaining = reps.len();
    fill_table(
        code,
        &mut reps,
        &mut remaining,
        pairs.iter().copied().filter(|&(z, x)| allowed(z, x)),
    );
    if remaining > 0 {
        fill_table(code, &mut reps, &mut remaining, pairs.into_iter());
    }
    assert_eq!(remaining, 0);
    Ok(SyndromeTable {
        reps: reps.into_iter().map(Option::unwrap).collect(),
    })
}

/// The closure of the code's transversal gate generators as single-qubit
/// logical process matrices.
#[derive(Debug, Clone)]
pub struct TransversalGroup {
    /// Identity first, then Pauli conjugations X, Y, Z when present, then
    /// remaining elements in breadth-first discovery order.
    pub elements: Vec<ProcessMatrix>,
    /// Composition words over the generator names, same order as `elements`.
    pub names: Vec<String>,
}

const CLOSURE_BOUND: usize = 48;
const CLOSURE_TOL: f64 = 1e-10;

pub fn transversal_group(code: &StabilizerCode) -> Result<TransversalGroup> {
    let gens: Vec<(String, ProcessMatrix)> = code
        .transversal_generators
        .iter()
        .map(|g| (g.as_str().to_string(), g.process()))
        .collect();
    closure(&gens)
}

pub fn closure(generators: &[(String, ProcessMatrix)]) -> Result<TransversalGroup> {
    let mut elements = vec![ProcessMatrix::identity()];
    let mut names = vec!["I".to_string()];
    let mut i = 0;
    while i < elements.len() {
        let base = elements[i];
        let base_name = names[i].clone();
        for (gname, gmat) in generators {
            let candidate = gmat.matmul(&base);
            if elements
                .iter()
                .all(|e| e.linf_distance(&candidate) > CLOSURE_TOL)
            {
                elements.push(candidate);
                names.push(if base_name == "I" {
                    gname.clone()
                } else {
                    format!("{gname}.{base_name}")
                });
                if elements.len() > CLOSURE_BOUND {
                    return Err(Error::ClosureExceeded(CLOSURE_BOUND));
                }
            }
        }
        i += 1;
    }
    // canonical front: identity, then Pauli conjugations
    let pauli_ptms = [
        ("X", ProcessMatrix::diagonal([1.0, 1.0, -1.0, -1.0])),
        ("Y", ProcessMatrix::diagonal([1.0, -1.0, 1.0, -1.0])),
        ("Z", ProcessMatrix::diagonal([1.0, -1.0, -1.0, 1.0])),
    ];
    let mut order: Vec<usize> = vec![0];
    for (pname, ptm) in &pauli_ptms {
        if let Some(idx) = elements
            .iter()
            .position(|e| e.linf_distance(ptm) <= CLOSURE_TOL)
        {
            if idx != 0 {
                names[idx] = pname.to_string();
                order.push(idx);
            }
        }
    }
    for idx in 1..elements.len() {
        if !order.contains(&idx) {
            order.push(idx);
        }
    }
    Ok(TransversalGroup {
        elements: order.iter().map(|&i| elements[i]).collect(),
        names: order.iter().map(|&i| names[i].clone()).collect(),
    })
}

impl TransversalGroup {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}
