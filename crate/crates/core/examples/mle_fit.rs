//! Maximum-likelihood estimate of the label coupling from a sampled record.

use nvdb::analysis::{mle_fit, MleOptions};
use nvdb::experiment::{clean_trace, preset, ModeName};
use nvdb::sequence::Protocol;
use nvdb::shots::sample_trace;

pub fn run_example() -> Result<String, nvdb::Error> {
    let mut cfg = preset("fig2-hybrid")?;
    cfg.sequence.mode = ModeName::Ideal;
    let mut out = String::from("protocol,seed,g_est_MHz,sigma_g_MHz,decay_per_us,loglik\n");
    for protocol in [Protocol::Hybrid, Protocol::Direct] {
        let clean = clean_trace(&cfg, protocol)?.clean;
        for seed in 1..=3 {
            let record = sample_trace(&clean, 50_000, seed)?;
            let fit = mle_fit(&record, None, &MleOptions::default())?;
            out.push_str(&format!(
                "{protocol},{seed},{:.4},{:.4},{:.4},{:.3}\n",
                fit.g(),
                fit.sigma_g(),
                fit.p2,
                fit.loglik
            ));
        }
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
