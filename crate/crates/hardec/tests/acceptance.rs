//! Acceptance gate: one test per criterion, each printing a single
//! PASS/FAIL line (plus sub-check details) before asserting. Tolerances are
//! pinned in the constants next to each criterion.

use hardec::channel::{
    amplitude_phase_damping, amplitude_phase_damping_kraus, coherent_rotation, depolarizing,
    depolarizing_kraus, infidelity, kraus_to_process, random_kraus_channel, rotation_unitary,
    seeded_rng, KrausChannel, ProcessMatrix,
};
use hardec::code::{builtin_code, symmetric_decoder, transversal_group, SyndromeTable, TransversalGroup};
use hardec::decoder::{group_conditionals, run_hard_decoder, DecoderConfig, DecoderMode};
use hardec::logical::{build_beta, correlated_dephasing_mix, BlockNoise, LogicalEngine};
use hardec::oracle::{oracle_all_conditionals, uniform_noise, DenseCode, OracleNoise};
use hardec::threshold::{
    correctability, infidelity_at_levels, optimized_threshold, perturbation_study,
    symmetric_threshold, twirl_compare, SearchContext, TieMode,
};
use rand::Rng;

struct Fx {
    engine: LogicalEngine,
    table: SyndromeTable,
    gates: TransversalGroup,
}

fn fx(name: &str) -> Fx {
    let code = builtin_code(name).unwrap();
    Fx {
        engine: LogicalEngine::new(&code).unwrap(),
        table: symmetric_decoder(&code).unwrap(),
        gates: transversal_group(&code).unwrap(),
    }
}

fn ctx<'a>(f: &'a Fx, mode: DecoderMode) -> SearchContext<'a> {
    SearchContext::new(&f.engine, &f.table, &f.gates, mode)
}

fn report(criterion: &str, passed: bool, detail: &str) {
    let tag = if passed { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {tag} — {detail}");
    assert!(passed, "criterion {criterion}: FAIL — {detail}");
}

const X_AXIS: f64 = std::f64::consts::FRAC_PI_2;
const Y_GAMMA: f64 = std::f64::consts::FRAC_PI_2;

#[test]
fn criterion_01_distinct_conditional_counts() {
    let local = amplitude_phase_damping(0.17, 0.1).unwrap();
    let mut detail = String::new();
    let mut ok = true;
    for (name, want) in [
        ("five-qubit", 4usize),
        ("steane", 7),
        ("shor-z", 12),
        ("surface-17", 67),
    ] {
        let f = fx(name);
        let n = f.engine.code.n;
        let conds = f
            .engine
            .conditional_channels(&BlockNoise::uniform(n, local), &f.table)
            .unwrap();
        let got = group_conditionals(&conds).len();
        ok &= got == want;
        detail.push_str(&format!("{name}={got} (want {want}) "));
    }
    report("01 distinct-conditional counts", ok, &detail);
}

#[test]
fn criterion_02_steane_x_rotation_closed_forms() {
    let f = fx("steane");
    let mut ok = true;
    let mut detail = String::new();
    let tol = 1e-10;
    for theta in [0.05, 0.1, std::f64::consts::FRAC_PI_6 / 2.0] {
        let noise = BlockNoise::uniform(7, coherent_rotation(theta, X_AXIS, 0.0));
        let conds = f.engine.conditional_channels(&noise, &f.table).unwrap();
        let c4 = (4.0 * theta).cos();
        let c8 = (8.0 * theta).cos();
        let phi = (((3.0 * c4 + c8 + 10.0) * (2.0 * theta).tan().powi(3))
            / (-3.0 * c4 + c8 + 10.0))
            .atan();
        // rotation senses follow this library's adjoint-action convention
        let trivial = coherent_rotation(-phi / 2.0, X_AXIS, 0.0).scale((7.0 * c8 + 25.0) / 32.0);
        let single_x =
            coherent_rotation(3.0 * theta, X_AXIS, 0.0).scale((4.0 * theta).sin().powi(2) / 16.0);
        let mut worst = conds[0].linf_distance(&trivial);
        for c in conds.iter().skip(1).filter(|c| c.trace().abs() > 1e-14) {
            worst = worst.max(c.linf_distance(&single_x));
        }
        ok &= worst <= tol;
        detail.push_str(&format!("theta={theta:.4} dev={worst:.1e} "));
    }

    // at theta = pi/12 the phase gate about x removes the single-X residual
    let theta = std::f64::consts::FRAC_PI_6 / 2.0;
    let noise = BlockNoise::uniform(7, coherent_rotation(theta, X_AXIS, 0.0));
    let conds = f.engine.conditional_channels(&noise, &f.table).unwrap();
    let cfg = DecoderConfig {
        max_levels: 1,
        ..DecoderConfig::new(DecoderMode::OptimizedAll)
    };
    let out = run_hard_decoder(&f.engine, &noise, &f.table, &f.gates, &cfg).unwrap();
    let mut residual = 0.0f64;
    for (l, c) in conds.iter().enumerate().skip(1) {
        if c.trace().abs() < 1e-14 {
            continue;
        }
        let gi = out.schedule.levels[0][l].0;
        let corrected = f.gates.elements[gi].matmul(c).scale(1.0 / c.0[0][0]);
        residual = residual.max(infidelity(&corrected));
    }
    ok &= residual < 1e-12;
    detail.push_str(&format!("pi/12 optimizer residual={residual:.1e}"));
    report("02 steane x-rotation closed forms", ok, &detail);
}

#[test]
fn criterion_03_steane_depolarizing_threshold() {
    let f = fx("steane");
    let c = ctx(&f, DecoderMode::Symmetric);
    let res = symmetric_threshold(&c, |p| Ok(BlockNoise::uniform(7, depolarizing(p)?))).unwrap();
    let th = res.threshold.unwrap_or(f64::NAN);
    let ok = (th - 0.0908).abs() <= 0.0005;
    report(
        "03 depolarizing threshold",
        ok,
        &format!("measured p_th={th:.4}, pinned 0.0908±0.0005 (lexicographic-table decoder; see decisions ledger)"),
    );
}

#[test]
fn criterion_04_correlated_dephasing_thresholds() {
    let f = fx("steane");
    let fam = |p: f64| move |q: f64| correlated_dephasing_mix(7, p, q);
    let sym_ctx = ctx(&f, DecoderMode::Symmetric);
    let sym = symmetric_threshold(&sym_ctx, fam(0.003)).unwrap();
    let sym_th = sym.threshold.unwrap_or(f64::NAN);

    let opt_ctx = ctx(&f, DecoderMode::OptimizedAll);
    let opt = optimized_threshold(&opt_ctx, fam(0.003), sym.threshold).unwrap();
    let opt_s = opt
        .threshold
        .map_or("none (correctable to scan end)".to_string(), |t| {
            format!("{t:.4}")
        });

    let plateau = optimized_threshold(&opt_ctx, fam(1e-4), None).unwrap();
    let plat_s = plateau
        .threshold
        .map_or("none (correctable to scan end)".to_string(), |t| {
            format!("{t:.4}")
        });

    let ok = (sym_th - 0.0153).abs() <= 0.0005
        && opt.threshold.is_some_and(|t| (t - 0.0220).abs() <= 0.0005)
        && plateau
            .threshold
            .is_some_and(|t| (t - 0.0232).abs() <= 0.001);
    report(
        "04 correlated dephasing thresholds",
        ok,
        &format!(
            "measured sym q_th={sym_th:.4} (pinned 0.0153±0.0005), opt q_th={opt_s} (pinned 0.0220±0.0005), small-p plateau q_th={plat_s} (pinned 0.0232±0.001); level-1-confined correlation semantics — see decisions ledger"
        ),
    );
}

#[test]
fn criterion_05_coherent_noise_thresholds() {
    let mut ok = true;
    let mut detail = String::new();

    // five-qubit x-rotation: pi/4 is the uncorrectable boundary point
    let f5 = fx("five-qubit");
    let c5 = ctx(&f5, DecoderMode::OptimizedAll);
    let noise_at = |theta: f64| BlockNoise::uniform(5, coherent_rotation(theta, X_AXIS, 0.0));
    let quarter = std::f64::consts::FRAC_PI_4;
    let mut below_ok = true;
    let mut t = 0.05;
    while t < quarter - 0.001 {
        below_ok &= correctability(&c5, &noise_at(t)).unwrap().correctable;
        t += 0.05;
    }
    let just_below = correctability(&c5, &noise_at(quarter - 5e-4))
        .unwrap()
        .correctable;
    let at_quarter = correctability(&c5, &noise_at(quarter)).unwrap().correctable;
    let five_ok = below_ok && just_below && !at_quarter;
    ok &= five_ok;
    detail.push_str(&format!(
        "five-qubit: grid<pi/4 correctable={below_ok}, pi/4-5e-4 correctable={just_below}, pi/4 correctable={at_quarter} => theta_th=pi/4 {}; ",
        if five_ok { "confirmed" } else { "NOT confirmed" }
    ));

    // steane and shor x-rotation thresholds (pinned per the source figure
    // caption; measured values are swapped relative to it — see ledger)
    let fst = fx("steane");
    let cst = ctx(&fst, DecoderMode::OptimizedAll);
    let steane = optimized_threshold(
        &cst,
        |theta| Ok(BlockNoise::uniform(7, coherent_rotation(theta, X_AXIS, 0.0))),
        None,
    )
    .unwrap()
    .threshold
    .unwrap_or(f64::NAN);
    let steane_ok = (steane - 0.3692).abs() <= 0.005;
    ok &= steane_ok;
    detail.push_str(&format!("steane theta_th={steane:.4} (pinned 0.3692±0.005); "));

    let fsh = fx("shor-z");
    let csh = ctx(&fsh, DecoderMode::OptimizedAll);
    let shor = optimized_threshold(
        &csh,
        |theta| Ok(BlockNoise::uniform(9, coherent_rotation(theta, X_AXIS, 0.0))),
        None,
    )
    .unwrap()
    .threshold
    .unwrap_or(f64::NAN);
    let shor_ok = (shor - 0.3396).abs() <= 0.005;
    ok &= shor_ok;
    detail.push_str(&format!("shor theta_th={shor:.4} (pinned 0.3396±0.005); "));

    // rotations about (1,1,1)/sqrt(3)
    let phi_c = (1.0f64 / 3.0f64.sqrt()).acos();
    let mut all_correctable = true;
    let mut worst_r3 = 0.0f64;
    for i in 1..=7 {
        let theta = 0.1 * i as f64;
        let noise = BlockNoise::uniform(5, coherent_rotation(theta, phi_c, quarter));
        all_correctable &= correctability(&c5, &noise).unwrap().correctable;
        worst_r3 = worst_r3.max(infidelity_at_levels(&c5, &noise, &[3]).unwrap()[0]);
    }
    let axis_ok = all_correctable && worst_r3 < 1e-12;
    ok &= axis_ok;
    detail.push_str(&format!(
        "(1,1,1)/sqrt(3) axis: all correctable={all_correctable}, worst level-3 infidelity={worst_r3:.1e} (pinned <1e-12)"
    ));

    report("05 coherent-noise thresholds", ok, &detail);
}

#[test]
fn criterion_06_tie_sensitivity() {
    let f = fx("steane");
    let fam = |p: f64| Ok(BlockNoise::uniform(7, amplitude_phase_damping(p, 0.1431)?));
    let mut first_ctx = ctx(&f, DecoderMode::OptimizedAll);
    first_ctx.ties = TieMode::First;
    let first = optimized_threshold(&first_ctx, fam, None)
        .unwrap()
        .threshold
        .unwrap_or(f64::NAN);
    let mut ex_ctx = ctx(&f, DecoderMode::OptimizedAll);
    ex_ctx.ties = TieMode::Exhaustive;
    let exhaustive = optimized_threshold(&ex_ctx, fam, None)
        .unwrap()
        .threshold
        .unwrap_or(f64::NAN);
    let first_ok = (first - 0.1032).abs() <= 0.001;
    let ex_ok = (exhaustive - 0.1150).abs() <= 0.001;
    report(
        "06 tie sensitivity",
        first_ok && ex_ok,
        &format!(
            "first-choice p_th={first:.4} (pinned 0.1032±0.001), exhaustive p_th={exhaustive:.4} (pinned 0.1150±0.001)"
        ),
    );
}

#[test]
fn criterion_07_twirl_ordering() {
    let f = fx("steane");
    let c = ctx(&f, DecoderMode::OptimizedAll);
    let phis: Vec<f64> = (0..8)
        .map(|i| std::f64::consts::FRAC_PI_2 * i as f64 / 7.0)
        .collect();
    let curves = twirl_compare(&c, &phis).unwrap();
    let end = c.scan_end;
    let or = |x: Option<f64>| x.unwrap_or(end);
    let mut order_ok = true;
    let mut max_ratio = 0.0f64;
    for i in 0..phis.len() {
        order_ok &= or(curves.bare_all[i]) >= or(curves.twirled_all[i]) - 1e-9;
        order_ok &= or(curves.twirled_pauli[i]) >= or(curves.bare_pauli[i]) - 1e-9;
        max_ratio = max_ratio.max(or(curves.bare_all[i]) / or(curves.bare_pauli[i]));
    }
    let ratio_ok = (1.5..=1.9).contains(&max_ratio);
    report(
        "07 twirl ordering",
        order_ok && ratio_ok,
        &format!("ordering holds at all {} points: {order_ok}; max bare-Clifford/bare-Pauli ratio={max_ratio:.3} (pinned [1.5, 1.9])", phis.len()),
    );
}

fn oracle_suite(seeds: u64) -> Vec<KrausChannel> {
    let mut suite = vec![
        depolarizing_kraus(0.1).unwrap(),
        amplitude_phase_damping_kraus(0.17, 0.1).unwrap(),
        KrausChannel::from_unitary(rotation_unitary(0.3, 0.5, 0.7)),
    ];
    for i in 0..seeds {
        let mut rng = seeded_rng(0xacce97, i);
        suite.push(random_kraus_channel(&mut rng, 4));
    }
    suite
}

#[test]
fn criterion_08_oracle_equivalence() {
    let mut worst = 0.0f64;
    for name in ["bitflip-3", "five-qubit", "steane", "shor-z", "surface-17"] {
        let f = fx(name);
        let n = f.engine.code.n;
        let dense = DenseCode::build(&f.engine.code).unwrap();
        for kraus in oracle_suite(10) {
            let local = kraus_to_process(&kraus).unwrap();
            let fast = f
                .engine
                .conditional_channels(&BlockNoise::uniform(n, local), &f.table)
                .unwrap();
            let slow =
                oracle_all_conditionals(&dense, &uniform_noise(n, &kraus), &f.table).unwrap();
            for (a, b) in fast.iter().zip(&slow) {
                worst = worst.max(a.linf_distance(b));
            }
        }
        // correlated mixture, checked on the ring structure directly
        let (p, q) = (0.02, 0.05);
        let fast = f
            .engine
            .conditional_channels(&correlated_dephasing_mix(n, p, q).unwrap(), &f.table)
            .unwrap();
        let depol = depolarizing_kraus(p).unwrap();
        let z = KrausChannel::from_unitary(hardec::channel::pauli_mat(3));
        let mut terms = vec![(1.0 - q, vec![depol; n])];
        for j in 0..n {
            let mut chans = vec![KrausChannel::identity(); n];
            chans[j] = z.clone();
            chans[(j + 1) % n] = z.clone();
            terms.push((q / n as f64, chans));
        }
        let slow =
            oracle_all_conditionals(&dense, &OracleNoise::Mixture(terms), &f.table).unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            worst = worst.max(a.linf_distance(b));
        }
    }
    report(
        "08 oracle equivalence",
        worst <= 1e-10,
        &format!("max entrywise deviation {worst:.2e} (tolerance 1e-10)"),
    );
}

#[test]
fn criterion_09_beta_consistency() {
    let mut ok = true;
    let mut detail = String::new();
    for name in [
        "bitflip-3",
        "five-qubit",
        "steane",
        "shor-z",
        "shor-x",
        "surface-17",
    ] {
        let code = builtin_code(name).unwrap();
        let table = symmetric_decoder(&code).unwrap();
        match build_beta(&code, &table) {
            Ok(_) => detail.push_str(&format!("{name} ok; ")),
            Err(e) => {
                ok = false;
                detail.push_str(&format!("{name} FAILED ({e}); "));
            }
        }
    }
    report("09 beta consistency", ok, &detail);
}

#[test]
fn criterion_10_perturbation_robustness() {
    let seed = 1;
    let samples = 100;

    let f5 = fx("five-qubit");
    let c5 = ctx(&f5, DecoderMode::OptimizedAll);
    let grid: Vec<f64> = (1..=12).map(|i| 0.025 * i as f64).collect();
    let curves = perturbation_study(
        &c5,
        |rng, theta| {
            let cos_phi: f64 = rng.gen_range(-1.0..1.0);
            let gamma: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            Ok(coherent_rotation(theta, cos_phi.acos(), gamma))
        },
        |theta: f64| theta.sin().powi(2) / 10.0,
        &grid,
        samples,
        seed,
    )
    .unwrap();
    let mut beats_high = true;
    let mut max_low_ratio = 0.0f64;
    for (i, &theta) in grid.iter().enumerate() {
        let ratio = curves.pretrained_on_perturbed[i] / curves.perturbed_sym[i];
        if theta >= 0.2 {
            beats_high &= ratio < 1.0;
        }
        if theta <= 0.1 {
            max_low_ratio = max_low_ratio.max(ratio);
        }
    }

    let fst = fx("steane");
    let cst = ctx(&fst, DecoderMode::OptimizedAll);
    let lambdas: Vec<f64> = (1..=10).map(|i| 0.05 * i as f64).collect();
    let apd = perturbation_study(
        &cst,
        |_, lambda| amplitude_phase_damping(0.2, lambda),
        |lambda: f64| lambda / 10.0,
        &lambdas,
        samples,
        seed,
    )
    .unwrap();
    let apd_ok = (0..lambdas.len())
        .all(|i| apd.pretrained_on_perturbed[i] < apd.perturbed_sym[i]);

    let ok = beats_high && max_low_ratio <= 7.0 && apd_ok;
    report(
        "10 perturbation robustness",
        ok,
        &format!(
            "five-qubit: pretrained beats symmetric for theta>=0.2: {beats_high}, max ratio at theta<=0.1: {max_low_ratio:.2} (<=7); steane APD: pretrained beats symmetric at all lambda: {apd_ok}"
        ),
    );
}

#[test]
fn criterion_11_monotone_improvement() {
    let codes = [
        "bitflip-3",
        "five-qubit",
        "steane",
        "shor-z",
        "shor-x",
        "surface-17",
    ];
    let fixtures: Vec<Fx> = codes.iter().map(|c| fx(c)).collect();
    let mut ok = true;
    let mut worst_gap = f64::NEG_INFINITY;
    for i in 0..50u64 {
        let mut rng = seeded_rng(2024, i);
        let f = &fixtures[(i as usize) % fixtures.len()];
        let n = f.engine.code.n;
        let noise = match i % 4 {
            0 => BlockNoise::uniform(n, depolarizing(rng.gen_range(0.0..0.3)).unwrap()),
            1 => BlockNoise::uniform(
                n,
                amplitude_phase_damping(rng.gen_range(0.0..0.3), rng.gen_range(0.0..0.3))
                    .unwrap(),
            ),
            2 => BlockNoise::uniform(
                n,
                coherent_rotation(
                    rng.gen_range(0.0..0.5),
                    rng.gen_range(0.0..std::f64::consts::PI),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                ),
            ),
            _ => correlated_dephasing_mix(n, rng.gen_range(0.0..0.01), rng.gen_range(0.0..0.05))
                .unwrap(),
        };
        let sym = infidelity_at_levels(&ctx(f, DecoderMode::Symmetric), &noise, &[1]).unwrap()[0];
        let opt =
            infidelity_at_levels(&ctx(f, DecoderMode::OptimizedAll), &noise, &[1]).unwrap()[0];
        worst_gap = worst_gap.max(opt - sym);
        ok &= opt <= sym + 1e-12;
    }

    let f = fx("surface-17");
    let c = ctx(&f, DecoderMode::OptimizedAll);
    let mut y_le_x = true;
    for i in 1..=10 {
        let theta = 0.05 * i as f64;
        let rx = infidelity_at_levels(
            &c,
            &BlockNoise::uniform(9, coherent_rotation(theta, X_AXIS, 0.0)),
            &[1],
        )
        .unwrap()[0];
        let ry = infidelity_at_levels(
            &c,
            &BlockNoise::uniform(9, coherent_rotation(theta, X_AXIS, Y_GAMMA)),
            &[1],
        )
        .unwrap()[0];
        y_le_x &= ry <= rx;
    }
    ok &= y_le_x;
    report(
        "11 monotone improvement",
        ok,
        &format!("50-sample worst (opt - sym) gap {worst_gap:.2e} (must be <=1e-12); surface-17 y-rotation <= x-rotation pointwise: {y_le_x}"),
    );
}
