//! `s_hat(N) - 1/2` against `N` on a log-log fit.

use lmg_sim::analytic::{finite_size_critical_point, SystemSize};
use lmg_sim::model::{linspace, ModelParams, ProtocolKind, ProtocolSpec};
use lmg_sim::protocols::finite_size_scaling_study;

fn main() -> lmg_sim::Result<()> {
    let spec = ProtocolSpec::quantum(ProtocolKind::Gsqpt);
    let n_list = [50, 100, 200];
    let study = finite_size_scaling_study(&n_list, &spec, ModelParams::clean(0.5, 50)?, &linspace(0.45, 0.75, 61))?;
    let s_hat = study.series("s_hat").expect("s_hat series");
    for (n, s) in n_list.iter().zip(&s_hat.values) {
        println!(
            "N = {n:4}: s_hat = {s:.4}, closed form {:.4}",
            finite_size_critical_point(SystemSize::Finite(*n))?
        );
    }
    let fit = study.fit.expect("scaling fit");
    println!("exponent {:.3} (rms residual {:.2e})", fit.slope, fit.rms_residual);
    Ok(())
}
