//! Sampled NV signal and spectrum of both protocols at the reference geometry.

use nvdb::experiment::{preset, run, ModeName};

pub fn run_example() -> Result<String, nvdb::Error> {
    let mut out = String::new();
    for name in ["fig2-hybrid", "fig2-direct"] {
        let mut cfg = preset(name)?;
        cfg.sequence.mode = ModeName::Ideal;
        let a = run(&cfg)?;
        let s = &a.signals[0];
        out.push_str(&format!(
            "# {name}: {} points, P0 range [{:.4}, {:.4}], spectral peak {:.3} MHz\n",
            s.len(),
            s.values.iter().cloned().fold(f64::INFINITY, f64::min),
            s.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            a.spectrum.peak_frequency(),
        ));
        out.push_str(&s.to_table());
    }
    Ok(out)
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
