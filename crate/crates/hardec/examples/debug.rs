use hardec::channel::coherent_rotation;
use hardec::code::{builtin_code, symmetric_decoder, transversal_group};
use hardec::decoder::DecoderMode;
use hardec::logical::{BlockNoise, LogicalEngine};
use hardec::threshold::{correctability, infidelity_at_levels, SearchContext};

fn main() -> hardec::Result<()> {
    let code = builtin_code("five-qubit")?;
    let engine = LogicalEngine::new(&code)?;
    let table = symmetric_decoder(&code)?;
    let gates = transversal_group(&code)?;
    let ctx = SearchContext::new(&engine, &table, &gates, DecoderMode::OptimizedAll);
    let fp3 = std::f64::consts::FRAC_PI_3;
    let fp4 = std::f64::consts::FRAC_PI_4;
    let nc = (1.0f64 / 3.0f64.sqrt()).acos();
    for (label, phi, gamma) in [("phi=pi/3,g=pi/4", fp3, fp4), ("phi=pi/4,g=pi/3", fp4, fp3), ("nC", nc, fp4)] {
        for theta in [0.1, 0.3, 0.5, 0.7] {
            let m = coherent_rotation(theta, phi, gamma);
            let noise = BlockNoise::uniform(5, m);
            let rs = infidelity_at_levels(&ctx, &noise, &[1, 2, 3])?;
            let v = correctability(&ctx, &noise)?;
            println!("{label} theta={theta:.1} r1={:.2e} r2={:.2e} r3={:.2e} correctable={} lvl={:?}", rs[0], rs[1], rs[2], v.correctable, v.success_level);
        }
    }
    Ok(())
}
