//! Regenerates the trajectory benchmark files under `problems/`.
//!
//! The four SSMT files are small and hand-written; the trajectory
//! instances are big enough that we render them from their constructors
//! instead. A test pins the files to the constructors, so rerun this
//! after changing the trajectory encoding:
//!
//!     cargo run -p stochsat --example gen_problems

use std::fs;
use std::path::PathBuf;

use stochsat::{make_trajectory_named, to_dsl, trajectory_instances};

fn main() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems");
    fs::create_dir_all(&dir).expect("create problems dir");
    for (name, cfg) in trajectory_instances() {
        let problem = make_trajectory_named(&name, &cfg).expect("valid instance");
        let mut text = format!(
            "# Trajectory instance {name}: {} steps, {} obstacle(s).\n\
             # Generated by `cargo run -p stochsat --example gen_problems`; do not edit.\n",
            cfg.steps,
            cfg.obstacles.len()
        );
        text.push_str(&to_dsl(&problem));
        let path = dir.join(format!("{name}.ssc"));
        fs::write(&path, text).expect("write instance file");
        println!("wrote {}", path.display());
    }
}
