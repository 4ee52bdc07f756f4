//! Hard-decoding recovery optimization: group the distinct conditional
//! channels of a level, pick per-group transversal logical corrections that
//! maximize the corrected trace, iterate over concatenation levels, and
//! track correctability.

use crate::channel::{kraus_to_process, random_kraus_channel, seeded_rng, ProcessMatrix};
use crate::code::{SyndromeTable, TransversalGroup};
use crate::error::{Error, Result};
use crate::logical::{BlockNoise, LogicalEngine};
use serde::{Deserialize, Serialize};

pub const GROUPING_TOL: f64 = 1e-9;
pub const TIE_TOL: f64 = 1e-9;
pub const TIE_TUPLE_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderMode {
    /// Base syndrome table only; no logical corrections.
    Symmetric,
    /// Corrections from the full transversal group.
    OptimizedAll,
    /// Corrections restricted to the Pauli subgroup.
    OptimizedPauli,
}

impl DecoderMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DecoderMode::Symmetric => "symmetric",
            DecoderMode::OptimizedAll => "optimized-all",
            DecoderMode::OptimizedPauli => "optimized-pauli",
        }
    }

    pub fn parse(s: &str) -> Result<DecoderMode> {
        Ok(match s {
            "symmetric" => DecoderMode::Symmetric,
            "optimized-all" | "opt-all" => DecoderMode::OptimizedAll,
            "optimized-pauli" | "opt-pauli" => DecoderMode::OptimizedPauli,
            other => {
                return Err(Error::Config {
                    field: "mode".into(),
                    reason: format!("unknown decoder mode '{other}'"),
                })
            }
        })
    }
}

/// A set of syndromes whose conditional channels coincide.
#[derive(Debug, Clone)]
pub struct DistinctGroup {
    pub representative: ProcessMatrix,
    pub member_syndromes: Vec<usize>,
}

impl DistinctGroup {
    pub fn multiplicity(&self) -> usize {
        self.member_syndromes.len()
    }
}

/// Group conditionals by entrywise closeness; representative is the member
/// with the lowest syndrome index, groups ordered by that index.
pub fn group_conditionals(conditionals: &[ProcessMatrix]) -> Vec<DistinctGroup> {
    let mut groups: Vec<DistinctGroup> = Vec::new();
    for (l, c) in conditionals.iter().enumerate() {
        if let Some(g) = groups
            .iter_mut()
            .find(|g| g.representative.linf_distance(c) <= GROUPING_TOL)
        {
            g.member_syndromes.push(l);
        } else {
            groups.push(DistinctGroup {
                representative: *c,
                member_syndromes: vec![l],
            });
        }
    }
    groups
}

const PROBE_SEED: u64 = 0x9e3779b97f4a7c15;

/// Fixed full-rank probe channels with no algebraic symmetries.
fn probe_channel(index: u64) -> ProcessMatrix {
    let mut rng = seeded_rng(PROBE_SEED, index);
    kraus_to_process(&random_kraus_channel(&mut rng, 4)).expect("probe is CPTP")
}

/// Replace each distinct channel slot of `noise` by a distinct generic probe
/// channel (and each mixture weight by a distinct generic weight), keeping
/// the equality pattern. Conditionals that agree under the probe agree as
/// algebraic functions of the slot entries, hence for every noise sharing
/// this block structure.
fn probe_like(noise: &BlockNoise) -> BlockNoise {
    let mut slots: Vec<ProcessMatrix> = Vec::new();
    let mut probes: Vec<ProcessMatrix> = Vec::new();
    let mut probe_for = |m: &ProcessMatrix| -> ProcessMatrix {
        match slots.iter().position(|s| s.0 == m.0) {
            Some(i) => probes[i],
            None => {
                let p = probe_channel(slots.len() as u64);
                slots.push(*m);
                probes.push(p);
                p
            }
        }
    };
    match noise {
        BlockNoise::Tensor(per_qubit) => {
            BlockNoise::Tensor(per_qubit.iter().map(|m| probe_for(m)).collect())
        }
        BlockNoise::Mixture(blend) => BlockNoise::Mixture(
            blend
                .iter()
                .enumerate()
                .map(|(i, (_, per_qubit))| {
                    // generic positive weights, pairwise distinct
                    let w = 0.5 + 0.31 * ((i + 1) as f64).sqrt().fract();
                    (w, per_qubit.iter().map(|m| probe_for(m)).collect())
                })
                .collect(),
        ),
    }
}

/// Noise-independent syndrome partition: syndromes share a part iff their
/// conditional channels coincide for every noise with the block structure of
/// `noise`. Parts are ordered and listed by ascending syndrome index.
pub fn structural_partition(
    engine: &LogicalEngine,
    noise: &BlockNoise,
    table: &SyndromeTable,
) -> Result<Vec<Vec<usize>>> {
    let conds = engine.conditional_channels(&probe_like(noise), table)?;
    Ok(group_conditionals(&conds)
        .into_iter()
        .map(|g| g.member_syndromes)
        .collect())
}

/// Assemble groups for actual conditionals from a precomputed partition; the
/// representative is the lowest-syndrome member.
pub fn group_by_partition(
    conditionals: &[ProcessMatrix],
    partition: &[Vec<usize>],
) -> Vec<DistinctGroup> {
    partition
        .iter()
        .map(|members| DistinctGroup {
            representative: conditionals[members[0]],
            member_syndromes: members.clone(),
        })
        .collect()
}

fn trace_product(l: &ProcessMatrix, g: &ProcessMatrix) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            acc += l.0[i][j] * g.0[j][i];
        }
    }
    acc
}

/// Per-group gate selection: the chosen gate plus all tied maximizers.
#[derive(Debug, Clone)]
pub struct GateChoice {
    pub gate: usize,
    pub trace: f64,
    /// Every index whose trace ties the maximum (includes `gate`).
    pub tied: Vec<usize>,
}

fn pauli_gate_indices(gates: &TransversalGroup) -> Vec<usize> {
    let paulis = [
        ProcessMatrix::identity(),
        ProcessMatrix::diagonal([1.0, 1.0, -1.0, -1.0]),
        ProcessMatrix::diagonal([1.0, -1.0, 1.0, -1.0]),
        ProcessMatrix::diagonal([1.0, -1.0, -1.0, 1.0]),
    ];
    (0..gates.len())
        .filter(|&i| {
            paulis
                .iter()
                .any(|p| gates.elements[i].linf_distance(p) <= 1e-10)
        })
        .collect()
}

/// Gate indices the given mode may choose from, in enumeration order.
pub fn allowed_gates(gates: &TransversalGroup, mode: DecoderMode) -> Vec<usize> {
    match mode {
        DecoderMode::Symmetric => vec![0],
        DecoderMode::OptimizedAll => (0..gates.len()).collect(),
        DecoderMode::OptimizedPauli => pauli_gate_indices(gates),
    }
}

/// For each group, the gate maximizing Tr(L . g); the first maximizer in
/// enumeration order wins ties.
pub fn optimize_level(
    groups: &[DistinctGroup],
    gates: &TransversalGroup,
    mode: DecoderMode,
) -> Result<Vec<GateChoice>> {
    let allowed = allowed_gates(gates, mode);
    if allowed.is_empty() {
        return Err(Error::Config {
            field: "gates".into(),
            reason: "empty gate group".into(),
        });
    }
    let mut out = Vec::with_capacity(groups.len());
    for g in groups {
        let traces: Vec<f64> = allowed
            .iter()
            .map(|&i| trace_product(&gates.elements[i], &g.representative))
            .collect();
        let best = traces.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let tol = TIE_TOL * best.abs().max(1.0);
        let tied: Vec<usize> = allowed
            .iter()
            .zip(&traces)
            .filter(|(_, &t)| best - t <= tol)
            .map(|(&i, _)| i)
            .collect();
        out.push(GateChoice {
            gate: tied[0],
            trace: best,
            tied,
        });
    }
    Ok(out)
}

/// All tuples of tied choices (Cartesian product over groups), capped.
pub fn enumerate_tie_tuples(choices: &[GateChoice], cap: usize) -> Result<Vec<Vec<usize>>> {
    let mut count: usize = 1;
    for c in choices {
        count = count.saturating_mul(c.tied.len());
        if count > cap {
            return Err(Error::TieCapExceeded(count, cap));
        }
    }
    let mut tuples = vec![Vec::new()];
    for c in choices {
        let mut next = Vec::with_capacity(tuples.len() * c.tied.len());
        for t in &tuples {
            for &g in &c.tied {
                let mut t2 = t.clone();
                t2.push(g);
                next.push(t2);
            }
        }
        tuples = next;
    }
    Ok(tuples)
}

/// Recovery schedule: per level, per syndrome, the chosen logical gate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecoderSchedule {
    pub mode: DecoderMode,
    /// levels[t][l] = (gate index, gate name) for syndrome l at level t+1.
    pub levels: Vec<Vec<(usize, String)>>,
}

impl DecoderSchedule {
    /// Plain-text form: per level, one `syndrome recovery gate` line.
    pub fn to_text(&self, table: &SyndromeTable) -> String {
        let mut out = format!("mode {}\nlevels {}\n", self.mode.as_str(), self.levels.len());
        for (t, level) in self.levels.iter().enumerate() {
            out.push_str(&format!("level {}\n", t + 1));
            for (l, (_, name)) in level.iter().enumerate() {
                out.push_str(&format!("{} {} {}\n", l, table.reps[l].label(), name));
            }
        }
        out
    }

    pub fn from_text(text: &str, gates: &TransversalGroup) -> Result<DecoderSchedule> {
        let mut mode = DecoderMode::OptimizedAll;
        let mut levels: Vec<Vec<(usize, String)>> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let at = |reason: String| Error::CodeParse {
                line: idx + 1,
                reason,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields[0] {
                "mode" => mode = DecoderMode::parse(fields[1])?,
                "levels" => {}
                "level" => levels.push(Vec::new()),
                _ => {
                    if fields.len() != 3 {
                        return Err(at(format!("expected 3 fields, got {}", fields.len())));
                    }
                    let name = fields[2];
                    let gate = gates
                        .names
                        .iter()
                        .position(|n| n == name)
                        .ok_or_else(|| at(format!("unknown gate '{name}'")))?;
                    levels
                        .last_mut()
                        .ok_or_else(|| at("entry before any level line".into()))?
                        .push((gate, name.to_string()));
                }
            }
        }
        Ok(DecoderSchedule { mode, levels })
    }
}

/// How the block noise for the next concatenation level is rebuilt from the
/// corrected level channel.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseRecursion {
    /// Independent copies of the level channel on every qubit.
    #[default]
    Uniform,
    /// Fresh intra-block ring-correlated dephasing at every level: the level
    /// channel becomes the local channel of a new correlated mixture
    /// (inter-block correlations are assumed absent).
    CorrelatedDephasing { q: f64 },
}

impl NoiseRecursion {
    fn next_level(&self, n: usize, corrected: &ProcessMatrix) -> Result<BlockNoise> {
        match *self {
            NoiseRecursion::Uniform => Ok(BlockNoise::uniform(n, *corrected)),
            NoiseRecursion::CorrelatedDephasing { q } => {
                crate::logical::correlated_dephasing_with(n, *corrected, q)
            }
        }
    }
}

/// Tunables of the hard-decoding iteration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub mode: DecoderMode,
    pub max_levels: usize,
    /// Correctable iff the corrected trace reaches 4 - xi at some level.
    pub xi: f64,
    /// l-infinity fixed-point tolerance between consecutive level channels.
    pub convergence_tol: f64,
    #[serde(default)]
    pub recursion: NoiseRecursion,
}

impl DecoderConfig {
    pub fn new(mode: DecoderMode) -> DecoderConfig {
        DecoderConfig {
            mode,
            max_levels: 25,
            xi: 0.01,
            convergence_tol: 1e-8,
            recursion: NoiseRecursion::Uniform,
        }
    }
}

/// Result of running the iterative decoder.
#[derive(Debug, Clone)]
pub struct DecodingOutcome {
    pub schedule: DecoderSchedule,
    /// Corrected effective channel per computed level.
    pub level_channels: Vec<ProcessMatrix>,
    pub correctable: bool,
    /// First level (1-based) reaching trace >= 4 - xi.
    pub success_level: Option<usize>,
    /// Stopped on the fixed-point test rather than max_levels.
    pub converged: bool,
}

impl DecodingOutcome {
    pub fn final_channel(&self) -> &ProcessMatrix {
        self.level_channels.last().expect("at least one level")
    }
}

// consecutive trace decreases before declaring divergence
const DIVERGENCE_PATIENCE: usize = 5;
/// Traces this low never recover under any recursion; used in place of the
/// patience guard when noise is re-injected each level, where approaching a
/// fixed point from above is ordinary convergence, not divergence.
const COLLAPSE_FLOOR: f64 = 1.5;

fn corrected_channel(
    conditionals: &[ProcessMatrix],
    groups: &[DistinctGroup],
    group_gate: &[usize],
    gates: &TransversalGroup,
) -> ProcessMatrix {
    let mut out = ProcessMatrix::zero();
    for (g, &gate) in groups.iter().zip(group_gate) {
        let mut sum = ProcessMatrix::zero();
        for &l in &g.member_syndromes {
            sum = sum.add(&conditionals[l]);
        }
        out = out.add(&gates.elements[gate].matmul(&sum));
    }
    out
}

/// Trace preservation is exact in exact arithmetic (unital first rows sum to
/// the identity's); snap the first row so roundoff cannot compound through
/// concatenation levels. A first row off by more than the tolerance, or any
/// non-finite entry, marks a numerically degenerate deep-collapse remnant
/// that must not be propagated further.
fn snap_trace_preserving(m: &mut ProcessMatrix) -> bool {
    let finite = m.0.iter().flatten().all(|e| e.is_finite());
    if !finite || !m.is_trace_preserving(1e-9) {
        return false;
    }
    m.0[0] = [1.0, 0.0, 0.0, 0.0];
    true
}

/// Run the iterative hard decoder. `forced_level1` overrides the per-group
/// gate tuple at level 1 (tie exploration); deeper levels are greedy.
pub fn run_hard_decoder_forced(
    engine: &LogicalEngine,
    noise: &BlockNoise,
    table: &SyndromeTable,
    gates: &TransversalGroup,
    cfg: &DecoderConfig,
    forced_level1: Option<&[usize]>,
) -> Result<DecodingOutcome> {
    if cfg.max_levels < 1 {
        return Err(Error::BadMaxLevels);
    }
    if cfg.max_levels > 1 && !engine.code.concatenable {
        return Err(Error::NotConcatenable(engine.code.name.clone()));
    }
    let mut schedule = DecoderSchedule {
        mode: cfg.mode,
        levels: Vec::new(),
    };
    let mut level_channels: Vec<ProcessMatrix> = Vec::new();
    let mut correctable = false;
    let mut success_level = None;
    let mut converged = false;
    let mut decreases = 0usize;
    let mut current = noise.clone();
    // the partition is a property of (code, table, block structure): level 1
    // may be correlated, every deeper level is a uniform tensor noise
    let mut partition = structural_partition(engine, &current, table)?;
    for t in 1..=cfg.max_levels {
        if t == 2 {
            partition = structural_partition(engine, &current, table)?;
        }
        let conditionals = engine.conditional_channels(&current, table)?;
        let groups = group_by_partition(&conditionals, &partition);
        let choices = optimize_level(&groups, gates, cfg.mode)?;
        let group_gate: Vec<usize> = match (t, forced_level1) {
            (1, Some(forced)) => forced.to_vec(),
            _ => choices.iter().map(|c| c.gate).collect(),
        };
        let mut corrected = corrected_channel(&conditionals, &groups, &group_gate, gates);
        if !snap_trace_preserving(&mut corrected) {
            // degenerate collapse remnant: stop here, keeping earlier levels
            break;
        }
        let mut per_syndrome = vec![(0usize, String::new()); conditionals.len()];
        for (g, &gate) in groups.iter().zip(&group_gate) {
            for &l in &g.member_syndromes {
                per_syndrome[l] = (gate, gates.names[gate].clone());
            }
        }
        schedule.levels.push(per_syndrome);
        let prev = level_channels.last().copied();
        level_channels.push(corrected);
        if corrected.trace() >= 4.0 - cfg.xi {
            correctable = true;
            success_level = Some(t);
            break;
        }
        if let Some(prev) = prev {
            if corrected.linf_distance(&prev) < cfg.convergence_tol {
                converged = true;
                break;
            }
            if corrected.trace() < prev.trace() {
                decreases += 1;
                let diverged = match cfg.recursion {
                    // monotone trace decrease under uniform recursion only
                    // happens above threshold
                    NoiseRecursion::Uniform => decreases >= DIVERGENCE_PATIENCE,
                    _ => corrected.trace() < COLLAPSE_FLOOR,
                };
                if diverged {
                    break;
                }
            } else {
                decreases = 0;
            }
        }
        current = cfg.recursion.next_level(engine.code.n, &corrected)?;
    }
    Ok(DecodingOutcome {
        schedule,
        level_channels,
        correctable,
        success_level,
        converged,
    })
}

pub fn run_hard_decoder(
    engine: &LogicalEngine,
    noise: &BlockNoise,
    table: &SyndromeTable,
    gates: &TransversalGroup,
    cfg: &DecoderConfig,
) -> Result<DecodingOutcome> {
    run_hard_decoder_forced(engine, noise, table, gates, cfg, None)
}

/// Outcome of exploring all level-1 tie tuples.
#[derive(Debug)]
pub struct ExhaustiveOutcome {
    /// The best run: correctable at the shallowest level, then highest
    /// final trace; ties broken by tuple enumeration order.
    pub best: DecodingOutcome,
    pub any_correctable: bool,
    pub tuples_explored: usize,
}

/// Explore every tuple of tied level-1 gate choices (degeneracy is a
/// level-1 phenomenon for the codes considered) and keep the best verdict.
pub fn run_hard_decoder_exhaustive(
    engine: &LogicalEngine,
    noise: &BlockNoise,
    table: &SyndromeTable,
    gates: &TransversalGroup,
    cfg: &DecoderConfig,
    cap: usize,
) -> Result<ExhaustiveOutcome> {
    let conditionals = engine.conditional_channels(noise, table)?;
    let partition = structural_partition(engine, noise, table)?;
    let groups = group_by_partition(&conditionals, &partition);
    let choices = optimize_level(&groups, gates, cfg.mode)?;
    let tuples = enumerate_tie_tuples(&choices, cap)?;
    let mut best: Option<DecodingOutcome> = None;
    let mut any_correctable = false;
    let explored = tuples.len();
    for tuple in &tuples {
        let outcome =
            run_hard_decoder_forced(engine, noise, table, gates, cfg, Some(tuple))?;
        any_correctable |= outcome.correctable;
        let better = match &best {
            None => true,
            Some(b) => {
                let key = |o: &DecodingOutcome| {
                    (
                        o.correctable,
                        std::cmp::Reverse(o.success_level.unwrap_or(usize::MAX)),
                    )
                };
                key(&outcome) > key(b)
                    || (key(&outcome) == key(b)
                        && outcome.final_channel().trace() > b.final_channel().trace() + 1e-15)
            }
        };
        if better {
            best = Some(outcome);
        }
    }
    Ok(ExhaustiveOutcome {
        best: best.expect("at least one tuple"),
        any_correctable,
        tuples_explored: explored,
    })
}

/// Replay a fixed schedule against (possibly different) noise: per level,
/// apply the recorded per-syndrome gates instead of re-optimizing.
pub fn apply_schedule(
    engine: &LogicalEngine,
    noise: &BlockNoise,
    table: &SyndromeTable,
    gates: &TransversalGroup,
    schedule: &DecoderSchedule,
    recursion: NoiseRecursion,
) -> Result<Vec<ProcessMatrix>> {
    let mut out = Vec::with_capacity(schedule.levels.len());
    let mut current = noise.clone();
    for level in &schedule.levels {
        let conditionals = engine.conditional_channels(&current, table)?;
        if level.len() != conditionals.len() {
            return Err(Error::Config {
                field: "schedule".into(),
                reason: format!(
                    "level has {} syndromes, code has {}",
                    level.len(),
                    conditionals.len()
                ),
            });
        }
        let mut corrected = ProcessMatrix::zero();
        for (c, (gate, _)) in conditionals.iter().zip(level) {
            corrected = corrected.add(&gates.elements[*gate].matmul(c));
        }
        if !snap_trace_preserving(&mut corrected) {
            break;
        }
        out.push(corrected);
        current = recursion.next_level(engine.code.n, &corrected)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{
        amplitude_phase_damping, coherent_rotation, depolarizing, infidelity, pauli_twirl,
    };
    use crate::code::{builtin_code, symmetric_decoder, transversal_group};

    fn setup(name: &str) -> (LogicalEngine, SyndromeTable, TransversalGroup) {
        let code = builtin_code(name).unwrap();
        let engine = LogicalEngine::new(&code).unwrap();
        let table = symmetric_decoder(&code).unwrap();
        let gates = transversal_group(&code).unwrap();
        (engine, table, gates)
    }

    #[test]
    fn distinct_group_counts_apd() {
        let noise_ptm = amplitude_phase_damping(0.17, 0.1).unwrap();
        for (name, count) in [
            ("five-qubit", 4),
            ("steane", 7),
            ("shor-z", 12),
            ("surface-17", 67),
        ] {
            let (engine, table, _) = setup(name);
            let noise = BlockNoise::uniform(engine.code.n, noise_ptm);
            let conds = engine.conditional_channels(&noise, &table).unwrap();
            let partition = structural_partition(&engine, &noise, &table).unwrap();
            let groups = group_by_partition(&conds, &partition);
            assert_eq!(groups.len(), count, "{name}");
            let total: usize = groups.iter().map(|g| g.multiplicity()).sum();
            assert_eq!(total, engine.code.num_syndromes());
        }
    }

    #[test]
    fn identity_noise_decodes_trivially() {
        let (engine, table, gates) = setup("five-qubit");
        let cfg = DecoderConfig::new(DecoderMode::OptimizedAll);
        let noise = BlockNoise::uniform(5, ProcessMatrix::identity());
        let out = run_hard_decoder(&engine, &noise, &table, &gates, &cfg).unwrap();
        assert!(out.correctable);
        assert_eq!(out.success_level, Some(1));
        assert!(out.level_channels[0].linf_distance(&ProcessMatrix::identity()) < 1e-12);
        for (gate, name) in &out.schedule.levels[0] {
            assert_eq!(*gate, 0);
            assert_eq!(name, "I");
        }
    }

    #[test]
    fn argmax_scale_invariance() {
        let (engine, table, gates) = setup("steane");
        let noise = BlockNoise::uniform(7, amplitude_phase_damping(0.2, 0.15).unwrap());
        let conds = engine.conditional_channels(&noise, &table).unwrap();
        let groups = group_conditionals(&conds);
        let base = optimize_level(&groups, &gates, DecoderMode::OptimizedAll).unwrap();
        let scaled: Vec<DistinctGroup> = groups
            .iter()
            .map(|g| DistinctGroup {
                representative: g.representative.scale(g.multiplicity() as f64),
                member_syndromes: g.member_syndromes.clone(),
            })
            .collect();
        let after = optimize_level(&scaled, &gates, DecoderMode::OptimizedAll).unwrap();
        for (a, b) in base.iter().zip(&after) {
            assert_eq!(a.gate, b.gate);
        }
    }

    /// Rotations about (1,1,1)/sqrt(3) leave every conditional an exact
    /// rotation about that axis; the order-3 transversal rotation shrinks
    /// the residual angle each level, so every angle is correctable even
    /// though no finite level cancels it exactly.
    #[test]
    fn five_qubit_diagonal_rotation_recovers() {
        let (engine, table, gates) = setup("five-qubit");
        let phi = (1.0f64 / 3.0f64.sqrt()).acos();
        for theta in [0.1, 0.3, 0.5, 0.7] {
            let noise = BlockNoise::uniform(
                5,
                coherent_rotation(theta, phi, std::f64::consts::FRAC_PI_4),
            );
            let partition = structural_partition(&engine, &noise, &table).unwrap();
            let conds = engine.conditional_channels(&noise, &table).unwrap();
            for g in group_by_partition(&conds, &partition) {
                // unitary conditional: the Bloch block is orthogonal
                let m = g.representative.scale(1.0 / g.representative.0[0][0]);
                for i in 1..4 {
                    for j in 1..4 {
                        let dot: f64 = (1..4).map(|k| m.0[k][i] * m.0[k][j]).sum();
                        let want = if i == j { 1.0 } else { 0.0 };
                        assert!((dot - want).abs() < 1e-12, "theta {theta}");
                    }
                }
            }
            let cfg = DecoderConfig::new(DecoderMode::OptimizedAll);
            let out = run_hard_decoder(&engine, &noise, &table, &gates, &cfg).unwrap();
            assert!(out.correctable, "theta {theta}");
            assert!(out.success_level.unwrap() <= 8, "theta {theta}");
        }
    }

    #[test]
    fn steane_depolarizing_verdicts() {
        let (engine, table, gates) = setup("steane");
        let cfg = DecoderConfig::new(DecoderMode::Symmetric);
        let low = BlockNoise::uniform(7, depolarizing(0.05).unwrap());
        let out = run_hard_decoder(&engine, &low, &table, &gates, &cfg).unwrap();
        assert!(out.correctable);
        let high = BlockNoise::uniform(7, depolarizing(0.12).unwrap());
        let out = run_hard_decoder(&engine, &high, &table, &gates, &cfg).unwrap();
        assert!(!out.correctable);
    }

    #[test]
    fn optimized_never_worse_than_symmetric() {
        let (engine, table, gates) = setup("steane");
        for noise_ptm in [
            amplitude_phase_damping(0.15, 0.1).unwrap(),
            coherent_rotation(0.25, 0.9, 0.3),
            depolarizing(0.06).unwrap(),
        ] {
            let noise = BlockNoise::uniform(7, noise_ptm);
            let sym_cfg = DecoderConfig {
                max_levels: 3,
                xi: 1e-30,
                ..DecoderConfig::new(DecoderMode::Symmetric)
            };
            let opt_cfg = DecoderConfig {
                mode: DecoderMode::OptimizedAll,
                ..sym_cfg.clone()
            };
            let sym = run_hard_decoder(&engine, &noise, &table, &gates, &sym_cfg).unwrap();
            let opt = run_hard_decoder(&engine, &noise, &table, &gates, &opt_cfg).unwrap();
            for (s, o) in sym.level_channels.iter().zip(&opt.level_channels) {
                assert!(infidelity(o) <= infidelity(s) + 1e-12);
            }
        }
    }

    #[test]
    fn pauli_only_on_twirled_noise_stays_diagonal() {
        let (engine, table, gates) = setup("steane");
        let bare = coherent_rotation(0.3, 1.1, 0.2);
        let noise = BlockNoise::uniform(7, pauli_twirl(&bare));
        let cfg = DecoderConfig {
            max_levels: 3,
            xi: 1e-30,
            ..DecoderConfig::new(DecoderMode::OptimizedPauli)
        };
        let out = run_hard_decoder(&engine, &noise, &table, &gates, &cfg).unwrap();
        for level in &out.level_channels {
            assert!(level.is_diagonal(1e-10));
        }
    }

    #[test]
    fn pauli_gate_subset() {
        let (_, _, gates) = setup("steane");
        let idx = allowed_gates(&gates, DecoderMode::OptimizedPauli);
        assert_eq!(idx, vec![0, 1, 2, 3]);
        assert_eq!(allowed_gates(&gates, DecoderMode::Symmetric), vec![0]);
    }

    #[test]
    fn tie_enumeration() {
        let g = DistinctGroup {
            representative: ProcessMatrix::identity(),
            member_syndromes: vec![0],
        };
        let choices = vec![
            GateChoice {
                gate: 0,
                trace: 4.0,
                tied: vec![0, 2],
            },
            GateChoice {
                gate: 1,
                trace: 1.0,
                tied: vec![1],
            },
        ];
        let tuples = enumerate_tie_tuples(&choices, 16).unwrap();
        assert_eq!(tuples, vec![vec![0, 1], vec![2, 1]]);
        let many = vec![
            GateChoice {
                gate: 0,
                trace: 0.0,
                tied: vec![0, 1, 2, 3]
            };
            8
        ];
        assert!(matches!(
            enumerate_tie_tuples(&many, TIE_TUPLE_CAP),
            Err(Error::TieCapExceeded(_, TIE_TUPLE_CAP))
        ));
        drop(g);
    }

    #[test]
    fn exhaustive_matches_greedy_without_ties() {
        let (engine, table, gates) = setup("five-qubit");
        let noise = BlockNoise::uniform(5, amplitude_phase_damping(0.1, 0.05).unwrap());
        let cfg = DecoderConfig::new(DecoderMode::OptimizedAll);
        let greedy = run_hard_decoder(&engine, &noise, &table, &gates, &cfg).unwrap();
        let ex = run_hard_decoder_exhaustive(
            &engine,
            &noise,
            &table,
            &gates,
            &cfg,
            TIE_TUPLE_CAP,
        )
        .unwrap();
        assert_eq!(ex.best.correctable, greedy.correctable);
        assert!(ex
            .best
            .final_channel()
            .linf_distance(greedy.final_channel())
            < 1e-12
            || ex.best.final_channel().trace() >= greedy.final_channel().trace());
    }

    #[test]
    fn schedule_text_round_trip_and_replay() {
        let (engine, table, gates) = setup("five-qubit");
        let noise = BlockNoise::uniform(5, coherent_rotation(0.2, 0.7, 0.1));
        let cfg = DecoderConfig {
            max_levels: 2,
            xi: 1e-30,
            ..DecoderConfig::new(DecoderMode::OptimizedAll)
        };
        let out = run_hard_decoder(&engine, &noise, &table, &gates, &cfg).unwrap();
        let text = out.schedule.to_text(&table);
        let parsed = DecoderSchedule::from_text(&text, &gates).unwrap();
        assert_eq!(parsed.levels, out.schedule.levels);
        let replayed =
            apply_schedule(&engine, &noise, &table, &gates, &parsed, NoiseRecursion::Uniform)
                .unwrap();
        for (a, b) in replayed.iter().zip(&out.level_channels) {
            assert!(a.linf_distance(b) < 1e-12);
        }
    }

    #[test]
    fn surface_17_single_level_only() {
        let (engine, table, gates) = setup("surface-17");
        let noise = BlockNoise::uniform(9, depolarizing(0.05).unwrap());
        let cfg = DecoderConfig::new(DecoderMode::OptimizedAll);
        assert!(matches!(
            run_hard_decoder(&engine, &noise, &table, &gates, &cfg),
            Err(Error::NotConcatenable(_))
        ));
        let single = DecoderConfig {
            max_levels: 1,
            ..cfg
        };
        run_hard_decoder(&engine, &noise, &table, &gates, &single).unwrap();
    }
}
