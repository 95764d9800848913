//! Critical-point estimate against drive amplitude, next to the raw
//! order parameter at one `s`.

use lmg_sim::model::{linspace, ModelParams, ProtocolKind, ProtocolSpec};
use lmg_sim::protocols::{critical_point_vs_perturbation, perturbation_sweep};

fn main() -> lmg_sim::Result<()> {
    let spec = ProtocolSpec::quantum(ProtocolKind::Gsqpt);
    let params = ModelParams::new(0.5, 100, 0.0, 1.0)?;
    let eps0 = [0.0, 0.025, 0.05];
    let est = critical_point_vs_perturbation(&spec, params, &linspace(0.45, 0.75, 31), &eps0)?;
    let raw = perturbation_sweep(&spec, params, &[0.7], &eps0)?;
    let s_hat = est.series("s_hat").expect("s_hat series");
    let xbar = &raw.series[0];
    println!("{:>6} {:>8} {:>10}", "eps0", "s_hat", xbar.label);
    for (i, e) in eps0.iter().enumerate() {
        println!("{e:>6.3} {:>8.4} {:>10.4}", s_hat.values[i], xbar.values[i]);
    }
    Ok(())
}
