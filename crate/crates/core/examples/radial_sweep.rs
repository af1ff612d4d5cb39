//! Hybrid-to-direct spectral peak ratio as the dangling bond moves sideways.

use nvdb::experiment::{preset, sweep, ModeName};

pub fn run_example() -> Result<String, nvdb::Error> {
    let mut cfg = preset("fig4-radial")?;
    cfg.sequence.mode = ModeName::Ideal;
    Ok(sweep(&cfg)?.to_csv())
}

fn main() {
    match run_example() {
        Ok(s) => print!("{s}"),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
