//! Drives the command-line front end in process: write a channel file,
//! decompose it, verify the emitted file and dilate it.
//!
//! cargo run --example file_pipeline

use sebkit::cli::run;
use sebkit::io::write_channel_file;
use sebkit::random::{random_commutative_holevo, rng};
use sebkit::Channel;

fn main() -> sebkit::Result<()> {
    let dir = std::env::temp_dir().join(format!("sebkit-pipeline-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let input = dir.join("channel.json");
    let derived = dir.join("derived.json");

    let mut r = rng(5);
    write_channel_file(
        &input,
        &Channel::Holevo(random_commutative_holevo(&mut r, 3, 4)?),
    )?;

    let steps: [Vec<String>; 4] = [
        vec!["verify".into(), input.display().to_string()],
        vec!["range-comm".into(), input.display().to_string()],
        vec![
            "decompose".into(),
            input.display().to_string(),
            "--seed".into(),
            "7".into(),
            "-o".into(),
            derived.display().to_string(),
        ],
        vec![
            "dilate".into(),
            derived.display().to_string(),
            "--report".into(),
            "text".into(),
        ],
    ];
    for args in steps {
        let out = run(args.iter());
        println!("$ sebkit {}  -> exit {}", args.join(" "), out.code);
        if args.iter().any(|a| a == "text") {
            for line in out
                .stdout
                .lines()
                .filter(|l| l.starts_with("payload.verification") || l.starts_with("ok"))
            {
                println!("    {line}");
            }
        }
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
