//! Pairwise secular couplings of the two shipped geometries.

use nvdb::experiment::{couplings, couplings_table, preset};

pub fn run_example() -> Result<String, nvdb::Error> {
    let mut out = String::new();
    for name in ["fig2-hybrid", "fig4-radial"] {
        let rows = couplings(&preset(name)?)?;
        out.push_str(&format!("# {name}\n{}", couplings_table(&rows)));
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
