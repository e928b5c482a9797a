// The command-line interface driven in-process.

use sgvi::cli::run;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("sgvi-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let model = dir.join("game.json");
    let generated = run(["sgvi", "generate", "--seed", "3", "--max-states", "4"]);
    std::fs::write(&model, &generated.stdout)?;
    let model = model.to_str().ok_or("temp path is not UTF-8")?;

    let out = run([
        "sgvi",
        "solve",
        "--model",
        model,
        "--objective",
        "mean-payoff",
        "--algorithm",
        "global",
        "--format",
        "text",
    ]);
    print!("{}", out.stdout);
    let out = run(["sgvi", "oracle", "--model", model, "--objective", "mean-payoff", "--format", "text"]);
    print!("{}", out.stdout);
    std::fs::remove_dir_all(&dir)?;
    if out.code != 0 {
        return Err(out.stderr.into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
