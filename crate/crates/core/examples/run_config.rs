//! Library use of the runner: one TOML document in, CSV plus manifest out.

use lmg_sim::runner::{run, CommandKind, CsvTable, Invocation, OverwritePolicy, RunConfig};
use std::path::PathBuf;

const CONFIG: &str = r#"
s_grid = { start = 0.0, stop = 1.0, count = 41 }

[model]
n = 200

[protocol]
kind = "dqpt"
regime = "classical"
t_avg = 300.0
"#;

fn main() {
    RunConfig::from_toml(CONFIG).expect("valid config");
    let dir = std::env::temp_dir().join("lmg-run-config-example");
    let path = dir.join("run.toml");
    std::fs::create_dir_all(&dir).expect("temp dir");
    std::fs::write(&path, CONFIG).expect("write config");
    let inv = Invocation {
        command: CommandKind::Bifurcation,
        config: Some(path),
        out_dir: PathBuf::from(&dir).join("out"),
        workers: Some(2),
        overwrite: OverwritePolicy::Replace,
    };
    match run(&inv) {
        Ok(m) => {
            m.verify(&inv.out_dir).expect("hashes match");
            let table = CsvTable::read(&inv.out_dir.join(&m.files[0].name)).expect("readable");
            println!("{} rows in {}", table.rows.len(), m.files[0].name);
            println!("{}", serde_json::to_string_pretty(&m.results).unwrap());
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
