//! Finite-`N` bifurcation curves and their threshold-crossing estimates.

use lmg_sim::analytic::{finite_size_critical_point, SystemSize};
use lmg_sim::model::{linspace, ModelParams, ProtocolKind, ProtocolSpec};
use lmg_sim::protocols::{extract_critical_point, run_bifurcation};

fn main() -> lmg_sim::Result<()> {
    let n = 100;
    let params = ModelParams::clean(0.5, n)?;
    let grid = linspace(0.4, 0.9, 101);
    for kind in [ProtocolKind::Gsqpt, ProtocolKind::Dqpt] {
        let spec = ProtocolSpec::quantum(kind);
        let curve = run_bifurcation(&spec, params, &grid)?;
        let est = extract_critical_point(&curve, spec.delta, params.j())?;
        println!("{kind:?}: s_hat = {:.4} (threshold {:.4})", est.s_hat, est.threshold);
        for p in curve.points().iter().step_by(10) {
            println!("  s = {:.3}  xbar = {:+.4}", p.s, p.xbar);
        }
    }
    println!(
        "closed-form finite-size critical point: {:.4}",
        finite_size_critical_point(SystemSize::Finite(n))?
    );
    Ok(())
}
