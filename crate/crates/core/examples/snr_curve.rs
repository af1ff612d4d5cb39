//! Spectral SNR of both protocols against the number of shots.

use nvdb::experiment::{preset, snr_curve, ModeName};

pub fn run_example() -> Result<String, nvdb::Error> {
    let mut cfg = preset("fig2-hybrid")?;
    cfg.sequence.mode = ModeName::Ideal;
    let table = snr_curve(&cfg, &[1_000, 10_000, 100_000], &[1, 2, 3])?;
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
