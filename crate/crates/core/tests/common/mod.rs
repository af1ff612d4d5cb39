#![allow(dead_code)]

use nvdb::spinsys::{build_system, CouplingOverride, SiteSpec, SpinKind, SpinSystem, SystemConfig};

pub const REFERENCE_MHZ: [(&str, &str, f64); 6] = [
    ("nv", "db", 0.550),
    ("nv", "l1", 0.066),
    ("nv", "l2", 0.032),
    ("db", "l1", 0.511),
    ("db", "l2", 0.130),
    ("l1", "l2", 1.734),
];

pub const AXIAL_MHZ: [(&str, &str, f64); 6] = [
    ("nv", "db", 0.203),
    ("nv", "l1", 0.047),
    ("nv", "l2", 0.023),
    ("db", "l1", 0.831),
    ("db", "l2", 0.169),
    ("l1", "l2", 2.423),
];

/// Four-site register with the reference couplings set verbatim.
pub fn reference_overrides() -> SpinSystem {
    let site =
        |name: &str, kind, f, t1, t2| SiteSpec { name: name.into(), kind, position: None, larmor_mhz: f, t1, t2 };
    build_system(&SystemConfig {
        sites: vec![
            site("nv", SpinKind::Nv, 3290.0, 20.0, 5.0),
            site("db", SpinKind::Db, 826.0, 29.4, 1.0),
            site("l1", SpinKind::Label, 1240.0, 4.0, 1.0),
            site("l2", SpinKind::Label, 1550.0, 4.0, 1.0),
        ],
        field_direction: [0.0, 0.0, 1.0],
        overrides: REFERENCE_MHZ
            .iter()
            .map(|&(a, b, mhz)| CouplingOverride { a: a.into(), b: b.into(), mhz: -mhz })
            .collect(),
    })
    .unwrap()
}
