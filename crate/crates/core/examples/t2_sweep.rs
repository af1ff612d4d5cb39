//! Coupling uncertainty as the dangling-bond dephasing time varies.

use nvdb::experiment::{preset, sweep, ModeName};

pub fn run_example() -> Result<String, nvdb::Error> {
    let mut cfg = preset("fig3-t2sweep")?;
    cfg.sequence.mode = ModeName::Ideal;
    cfg.sampling.repeats = 4;
    let table = sweep(&cfg)?;
    Ok(table.medians(1).to_csv())
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
