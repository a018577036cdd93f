//! Small replication study with summary and boxplot output.

use extremal_whittle::experiment::{run_experiment, ExperimentConfig};

const CONFIG: &str = r#"
model = "br-truncated"
n = 20
replications = 10
m_values = [3, 5]
family = "br"
seed = 2024
hurst = 0.5
scale = 2.0
mode = "isotropic"
terms = 1000
"#;

fn main() -> extremal_whittle::Result<()> {
    let config = ExperimentConfig::from_toml(CONFIG)?;
    let summary = run_experiment(&config, 2)?;
    let dir = std::env::temp_dir().join("replication_study");
    summary.write(&dir, &config)?;
    print!("{}", summary.summary_csv());
    print!("{}", summary.boxplot_csv());
    println!("raw rows in {}", dir.display());
    Ok(())
}
