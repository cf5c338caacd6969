// Running an experiment from a config string and writing its CSV files.

use semisup_robust::experiments::{run, summary_path, write_outputs, ConfigFile, ExperimentKind, ExperimentSpec};

const CONFIG: &str = "
# shared by every experiment
seed = 7
trials = 4

[sweep-unlabeled]
d = 5000
unlabeled_grid = 0, 100, 400, 1600, 6400
";

fn main() -> semisup_robust::Result<()> {
    let mut spec = ExperimentSpec::defaults(ExperimentKind::UnlabeledSweep);
    ConfigFile::parse(CONFIG)?.apply(&mut spec)?;
    spec.workers = 2;
    let out = run(&spec)?;

    let dir = std::env::temp_dir().join("semisup-robust-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("sweep.csv");
    write_outputs(&path, &out)?;
    println!("{} rows -> {}", out.rows.len(), path.display());
    print!("{}", std::fs::read_to_string(summary_path(&path))?);
    Ok(())
}
