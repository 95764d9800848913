//! Low-lying spectrum by parity and the closing parity gap.

use lmg_sim::model::ModelParams;
use lmg_sim::quantum::{eigendecompose, HamiltonianSpec};

fn main() -> lmg_sim::Result<()> {
    for s in [0.2, 0.5, 0.7, 0.9] {
        let sp = eigendecompose(&HamiltonianSpec::new(ModelParams::clean(s, 40)?)?)?;
        let low: Vec<String> = (0..6)
            .map(|l| format!("{:+.3}({:+})", sp.energy(l), sp.parity(l)))
            .collect();
        println!("s = {s}: {}  gap = {:.3e}", low.join(" "), sp.parity_gap());
    }
    Ok(())
}
