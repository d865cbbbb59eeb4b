//! Runs one experiment through the report layer with a small configuration.

use kan3::config::ExperimentConfig;
use kan3::report::{run, Experiment};

fn main() -> kan3::Result<()> {
    let mut cfg = ExperimentConfig::parse_str(
        "t = 0.1\nseed = 7\n[blender]\ndichotomy_samples = 2000\nconsistency_samples = 200\n",
    )?;
    cfg.out = std::env::temp_dir().join("kan3_blender_run");
    let m = run(&cfg, Experiment::Blender)?;
    for c in &m.criteria {
        println!(
            "{} {}: {}",
            if c.pass { "pass" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    for o in &m.outputs {
        println!("{} {} bytes {}", o.name, o.bytes, &o.sha256[..16]);
    }
    Ok(())
}
