//! Compiled pulse schedules of both protocols with automatic timings.

use nvdb::experiment::preset;
use nvdb::sequence::{auto_timings, compile, validate_timeline, Protocol};

pub fn run_example() -> Result<String, nvdb::Error> {
    let cfg = preset("fig2-hybrid")?;
    let sys = cfg.build_system()?;
    let mut out = String::new();
    for (protocol, sys) in [(Protocol::Hybrid, sys.clone()), (Protocol::Direct, sys.without_db())] {
        let timings = auto_timings(&sys, protocol)?;
        let tl = compile(&timings, 1.0, cfg.pulse_mode(), &sys)?;
        let report = validate_timeline(&tl);
        out.push_str(&format!(
            "# {protocol}: {} pulses, total {:.4} µs, overhead {:.4} µs, {} violations\n{}",
            tl.pulses.len(),
            tl.total_duration,
            tl.pulse_overhead(),
            report.violations.len(),
            tl.schedule_text()
        ));
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
