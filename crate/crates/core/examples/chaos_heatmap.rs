//! Coarse chaotic-fraction map over `(ω, s)` at `ε0 = 0.05`.

use lmg_sim::classical::chaos_map;
use lmg_sim::model::{linspace, ChaosDetection};

fn main() -> lmg_sim::Result<()> {
    let detection = ChaosDetection {
        ic_count: 50,
        horizon: 1000.0,
        ..Default::default()
    };
    let s_grid = linspace(0.1, 1.0, 10);
    let omega_grid = linspace(0.25, 2.0, 8);
    let map = chaos_map(&s_grid, &omega_grid, 0.05, &detection)?;
    print!("omega\\s");
    for s in &s_grid {
        print!(" {s:5.2}");
    }
    println!();
    for (i, w) in omega_grid.iter().enumerate() {
        print!("{w:7.2}");
        for f in &map.fraction[i] {
            print!(" {f:5.2}");
        }
        println!();
    }
    let (f, w, s) = map.max_cell();
    println!("largest fraction {f:.2} at omega = {w:.2}, s = {s:.2}");
    Ok(())
}
