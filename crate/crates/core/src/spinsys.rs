//! Spin sites, their geometry, and the secular dipolar coupling table.
//!
//! Every spin is treated as a two-level system with `S_z = σ_z / 2`. After
//! the rotating-wave approximation only the `Z_i Z_j` part of the dipolar
//! interaction survives, with amplitude
//!
//! ```text
//! A_ij = k_dd / d³ · (1 − 3 cos² θ)
//! ```
//!
//! where `θ` is the angle between the joining vector and the static field.

use std::collections::HashSet;
use std::fmt;

use nalgebra::{DMatrix, Unit, Vector3};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::{self, Op};
use crate::units::{angular_to_mhz, mhz_to_angular, DipolarConstant};

/// Magic angle `arccos(1/√3)` in degrees.
pub const MAGIC_ANGLE_DEG: f64 = 54.735_610_317_245_34;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinError {
    #[error("distance must be positive, got {0} nm")]
    NonPositiveDistance(f64),
    #[error("sites `{0}` and `{1}` occupy the same position")]
    CoincidentPositions(String, String),
    #[error("duplicate site name `{0}`")]
    DuplicateName(String),
    #[error("site `{site}`: {reason}")]
    InvalidRelaxation { site: String, reason: String },
    #[error("a system needs exactly one NV site, found {0}")]
    NvCount(usize),
    #[error("a system needs 3 or 4 sites, found {0}")]
    SiteCount(usize),
    #[error("unknown site `{0}`")]
    UnknownSite(String),
    #[error("no position for `{0}` and no explicit coupling override for pair `{0}`-`{1}`")]
    MissingGeometry(String, String),
    #[error("field direction must be a non-zero vector")]
    ZeroField,
    #[error("coupling override for `{0}`-`{1}` is invalid: {2}")]
    InvalidOverride(String, String, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinKind {
    Nv,
    Db,
    Label,
}

impl fmt::Display for SpinKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpinKind::Nv => "NV",
            SpinKind::Db => "DB",
            SpinKind::Label => "LABEL",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinSite {
    pub name: String,
    pub kind: SpinKind,
    /// nm; `None` when every coupling of the site is given explicitly.
    pub position: Option<Vector3<f64>>,
    /// Transition frequency in the lab frame, rad/µs. Only the cross-talk
    /// model looks at it.
    pub larmor: f64,
    /// µs
    pub t1: f64,
    /// µs
    pub t2: f64,
}

impl SpinSite {
    fn check_relaxation(&self) -> Result<(), SpinError> {
        let bad = |reason: &str| SpinError::InvalidRelaxation { site: self.name.clone(), reason: reason.to_string() };
        if !(self.t1 > 0.0) {
            return Err(bad("T1 must be positive"));
        }
        if !(self.t2 > 0.0) {
            return Err(bad("T2 must be positive"));
        }
        if self.t2 > 2.0 * self.t1 {
            return Err(bad("T2 cannot exceed 2·T1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingSource {
    Geometry,
    Override,
}

/// Input description for [`build_system`]. Frequencies in MHz, lengths in nm,
/// times in µs.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub sites: Vec<SiteSpec>,
    pub field_direction: [f64; 3],
    pub overrides: Vec<CouplingOverride>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiteSpec {
    pub name: String,
    pub kind: SpinKind,
    pub position: Option<[f64; 3]>,
    pub larmor_mhz: f64,
    pub t1: f64,
    pub t2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingOverride {
    pub a: String,
    pub b: String,
    /// Signed ZZ amplitude in MHz (ordinary frequency).
    pub mhz: f64,
}

/// Named roles of the sites taking part in the sensing protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Roles {
    pub nv: usize,
    pub db: Option<usize>,
    pub l1: usize,
    pub l2: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    sites: Vec<SpinSite>,
    field_direction: Unit<Vector3<f64>>,
    couplings: DMatrix<f64>,
    sources: DMatrix<u8>,
    k_dd: DipolarConstant,
}

/// Secular ZZ amplitude for two spins a distance `d` (nm) apart whose joining
/// vector makes angle `theta_deg` with the field. Returns rad/µs; negative
/// below the magic angle.
pub fn dipolar_coupling(d: f64, theta_deg: f64) -> Result<f64, SpinError> {
    dipolar_coupling_with(DipolarConstant::codata(), d, theta_deg.to_radians().cos())
}

fn dipolar_coupling_with(k: DipolarConstant, d: f64, cos_theta: f64) -> Result<f64, SpinError> {
    if !(d > 0.0) {
        return Err(SpinError::NonPositiveDistance(d));
    }
    Ok(k.value() / (d * d * d) * (1.0 - 3.0 * cos_theta * cos_theta))
}

/// Secular ZZ amplitude between two positions (nm) for a static field along
/// `field_direction`.
pub fn coupling_from_positions(
    p_i: &Vector3<f64>,
    p_j: &Vector3<f64>,
    field_direction: &Unit<Vector3<f64>>,
) -> Result<f64, SpinError> {
    let (d, cos_theta) = separation(p_i, p_j, field_direction);
    if d == 0.0 {
        return Err(SpinError::NonPositiveDistance(0.0));
    }
    dipolar_coupling_with(DipolarConstant::codata(), d, cos_theta)
}

/// Distance (nm) and cos θ of the joining vector.
pub fn separation(p_i: &Vector3<f64>, p_j: &Vector3<f64>, field: &Unit<Vector3<f64>>) -> (f64, f64) {
    let r = p_i - p_j;
    let d = r.norm();
    if d == 0.0 {
        return (0.0, 1.0);
    }
    (d, r.dot(field) / d)
}

pub fn build_system(config: &SystemConfig) -> Result<SpinSystem, SpinError> {
    let n = config.sites.len();
    if !(3..=4).contains(&n) {
        return Err(SpinError::SiteCount(n));
    }
    let mut seen = HashSet::new();
    for s in &config.sites {
        if !seen.insert(s.name.as_str()) {
            return Err(SpinError::DuplicateName(s.name.clone()));
        }
    }
    let nv_count = config.sites.iter().filter(|s| s.kind == SpinKind::Nv).count();
    if nv_count != 1 {
        return Err(SpinError::NvCount(nv_count));
    }
    let field = Vector3::from(config.field_direction);
    if field.norm() == 0.0 || !field.iter().all(|x| x.is_finite()) {
        return Err(SpinError::ZeroField);
    }

    let sites: Vec<SpinSite> = config
        .sites
        .iter()
        .map(|s| SpinSite {
            name: s.name.clone(),
            kind: s.kind,
            position: s.position.map(Vector3::from),
            larmor: mhz_to_angular(s.larmor_mhz),
            t1: s.t1,
            t2: s.t2,
        })
        .collect();
    for s in &sites {
        s.check_relaxation()?;
    }

    let mut sys = SpinSystem {
        sites,
        field_direction: Unit::new_normalize(field),
        couplings: DMatrix::zeros(n, n),
        sources: DMatrix::zeros(n, n),
        k_dd: DipolarConstant::codata(),
    };

    for o in &config.overrides {
        let i = sys.index_of(&o.a)?;
        let j = sys.index_of(&o.b)?;
        if i == j {
            return Err(SpinError::InvalidOverride(o.a.clone(), o.b.clone(), "self coupling".into()));
        }
        if !o.mhz.is_finite() {
            return Err(SpinError::InvalidOverride(o.a.clone(), o.b.clone(), "not finite".into()));
        }
        let a = mhz_to_angular(o.mhz);
        sys.couplings[(i, j)] = a;
        sys.couplings[(j, i)] = a;
        sys.sources[(i, j)] = 1;
        sys.sources[(j, i)] = 1;
    }
    sys.fill_geometry()?;
    Ok(sys)
}

impl SpinSystem {
    fn fill_geometry(&mut self) -> Result<(), SpinError> {
        let n = self.sites.len();
        for i in 0..n {
            for j in (i + 1)..n {
                if self.sources[(i, j)] == 1 {
                    continue;
                }
                let a = self.geometry_coupling(i, j)?;
                self.couplings[(i, j)] = a;
                self.couplings[(j, i)] = a;
            }
        }
        Ok(())
    }

    /// Coupling recomputed from the stored positions, ignoring overrides.
    pub fn geometry_coupling(&self, i: usize, j: usize) -> Result<f64, SpinError> {
        let (si, sj) = (&self.sites[i], &self.sites[j]);
        let (pi, pj) = match (&si.position, &sj.position) {
            (Some(a), Some(b)) => (a, b),
            (None, _) => return Err(SpinError::MissingGeometry(si.name.clone(), sj.name.clone())),
            (_, None) => return Err(SpinError::MissingGeometry(sj.name.clone(), si.name.clone())),
        };
        let (d, cos_theta) = separation(pi, pj, &self.field_direction);
        if d == 0.0 {
            return Err(SpinError::CoincidentPositions(si.name.clone(), sj.name.clone()));
        }
        dipolar_coupling_with(self.k_dd, d, cos_theta)
    }

    pub fn sites(&self) -> &[SpinSite] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Hilbert-space dimension `2^n`.
    pub fn dim(&self) -> usize {
        1 << self.sites.len()
    }

    pub fn field_direction(&self) -> &Unit<Vector3<f64>> {
        &self.field_direction
    }

    /// Coupling table in rad/µs.
    pub fn couplings(&self) -> &DMatrix<f64> {
        &self.couplings
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[(i, j)]
    }

    pub fn coupling_source(&self, i: usize, j: usize) -> CouplingSource {
        if self.sources[(i, j)] == 1 {
            CouplingSource::Override
        } else {
            CouplingSource::Geometry
        }
    }

    pub fn index_of(&self, name: &str) -> Result<usize, SpinError> {
        self.sites.iter().position(|s| s.name == name).ok_or_else(|| SpinError::UnknownSite(name.to_string()))
    }

    /// NV, optional DB, and the first two labels in site order.
    pub fn roles(&self) -> Result<Roles, SpinError> {
        let nv = self.sites.iter().position(|s| s.kind == SpinKind::Nv).ok_or(SpinError::NvCount(0))?;
        let db = self.sites.iter().position(|s| s.kind == SpinKind::Db);
        let labels: Vec<usize> = (0..self.len()).filter(|&i| self.sites[i].kind == SpinKind::Label).collect();
        if labels.len() < 2 {
            return Err(SpinError::SiteCount(self.len()));
        }
        Ok(Roles { nv, db, l1: labels[0], l2: labels[1] })
    }

    /// The same system with every DB site removed (the no-mediator scenario).
    pub fn without_db(&self) -> SpinSystem {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.sites[i].kind != SpinKind::Db).collect();
        let n = keep.len();
        SpinSystem {
            sites: keep.iter().map(|&i| self.sites[i].clone()).collect(),
            field_direction: self.field_direction,
            couplings: DMatrix::from_fn(n, n, |r, c| self.couplings[(keep[r], keep[c])]),
            sources: DMatrix::from_fn(n, n, |r, c| self.sources[(keep[r], keep[c])]),
            k_dd: self.k_dd,
        }
    }

    /// Move one site and recompute every geometry-derived coupling touching it.
    pub fn with_position(&self, name: &str, position: Vector3<f64>) -> Result<SpinSystem, SpinError> {
        let k = self.index_of(name)?;
        let mut sys = self.clone();
        sys.sites[k].position = Some(position);
        sys.fill_geometry()?;
        Ok(sys)
    }

    /// Replace T1/T2 of a site, re-checking the relaxation invariants.
    pub fn with_relaxation(&self, name: &str, t1: f64, t2: f64) -> Result<SpinSystem, SpinError> {
        let k = self.index_of(name)?;
        let mut sys = self.clone();
        sys.sites[k].t1 = t1;
        sys.sites[k].t2 = t2;
        sys.sites[k].check_relaxation()?;
        Ok(sys)
    }

    /// Replace the coupling of a pair (rad/µs), marking it as overridden.
    /// Diagonal entries are ignored.
    pub fn with_coupling(&self, i: usize, j: usize, value: f64) -> SpinSystem {
        let mut sys = self.clone();
        if i != j {
            for (a, b) in [(i, j), (j, i)] {
                sys.couplings[(a, b)] = value;
                sys.sources[(a, b)] = 1;
            }
        }
        sys
    }

    /// Rows of the printable coupling table, one per unordered pair.
    pub fn coupling_rows(&self) -> Vec<CouplingRow> {
        let n = self.len();
        let mut rows = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                let geometry = match (&self.sites[i].position, &self.sites[j].position) {
                    (Some(a), Some(b)) => {
                        let (d, c) = separation(a, b, &self.field_direction);
                        Some((d, c.abs().min(1.0).acos().to_degrees()))
                    }
                    _ => None,
                };
                let near_magic = geometry.is_some_and(|(_, th)| (th - MAGIC_ANGLE_DEG).abs() < 1.0);
                rows.push(CouplingRow {
                    a: self.sites[i].name.clone(),
                    b: self.sites[j].name.clone(),
                    distance_nm: geometry.map(|g| g.0),
                    angle_deg: geometry.map(|g| g.1),
                    coupling_mhz: angular_to_mhz(self.couplings[(i, j)]),
                    source: self.coupling_source(i, j),
                    near_magic_angle: near_magic,
                });
            }
        }
        rows
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingRow {
    pub a: String,
    pub b: String,
    pub distance_nm: Option<f64>,
    /// Angle to the field folded into [0°, 90°].
    pub angle_deg: Option<f64>,
    pub coupling_mhz: f64,
    pub source: CouplingSource,
    /// Within 1° of the magic angle.
    pub near_magic_angle: bool,
}

/// Diagonal of `Σ_{i<j} A_ij Z_i Z_j` in the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SecularHamiltonian {
    pub n_sites: usize,
    /// Energies (rad/µs) indexed by basis state.
    pub diagonal: Vec<f64>,
}

impl SecularHamiltonian {
    pub fn to_matrix(&self) -> Op {
        let d = self.diagonal.len();
        Op::from_fn(d, d, |r, c| if r == c { C64::new(self.diagonal[r], 0.0) } else { C64::new(0.0, 0.0) })
    }
}

pub fn secular_hamiltonian(sys: &SpinSystem) -> SecularHamiltonian {
    let n = sys.len();
    let diagonal = (0..sys.dim())
        .map(|idx| {
            let mut e = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    e += sys.couplings[(i, j)] * hilbert::sz_value(idx, n, i) * hilbert::sz_value(idx, n, j);
                }
            }
            e
        })
        .collect();
    SecularHamiltonian { n_sites: n, diagonal }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::mhz_to_angular;
    use approx::assert_relative_eq;

    fn site(name: &str, kind: SpinKind, z: f64) -> SiteSpec {
        SiteSpec { name: name.into(), kind, position: Some([0.0, 0.0, z]), larmor_mhz: 1000.0, t1: 10.0, t2: 1.0 }
    }

    fn axial_config() -> SystemConfig {
        SystemConfig {
            sites: vec![
                site("nv", SpinKind::Nv, 0.0),
                site("db", SpinKind::Db, 8.0),
                site("l1", SpinKind::Label, 13.0),
                site("l2", SpinKind::Label, 16.5),
            ],
            field_direction: [0.0, 0.0, 1.0],
            overrides: vec![],
        }
    }

    #[test]
    fn label_pair_coupling_matches_reference_value() {
        let a = dipolar_coupling(3.8, 13.5).unwrap();
        assert!((angular_to_mhz(a).abs() - 1.734).abs() / 1.734 < 0.03);
        assert!(a < 0.0);
    }

    #[test]
    fn collinear_pair_is_minus_two_prefactor() {
        let a = dipolar_coupling(8.0, 0.0).unwrap();
        let k = DipolarConstant::codata().value();
        assert_relative_eq!(a, -2.0 * k / 512.0, max_relative = 1e-14);
        assert!((angular_to_mhz(a) + 0.203).abs() / 0.203 < 0.01);
    }

    #[test]
    fn magic_angle_is_null() {
        let k = DipolarConstant::codata().value();
        let a = dipolar_coupling(5.0, MAGIC_ANGLE_DEG).unwrap();
        assert!(a.abs() < 1e-3 * k / 125.0);
    }

    #[test]
    fn non_positive_distance_is_rejected() {
        assert_eq!(dipolar_coupling(0.0, 10.0), Err(SpinError::NonPositiveDistance(0.0)));
        assert!(dipolar_coupling(-1.0, 10.0).is_err());
        let p = Vector3::new(1.0, 2.0, 3.0);
        assert!(coupling_from_positions(&p, &p, &Vector3::z_axis()).is_err());
    }

    #[test]
    fn displaced_pair_bare_prefactor() {
        let nv = Vector3::zeros();
        let db = Vector3::new(3.5, 0.0, 8.0);
        let d: f64 = (nv - db).norm();
        assert_relative_eq!(d, 8.732, epsilon = 1e-3);
        let bare = angular_to_mhz(DipolarConstant::codata().value() / d.powi(3));
        assert!((bare - 0.078).abs() / 0.078 < 0.03);
        let a = coupling_from_positions(&nv, &db, &Vector3::z_axis()).unwrap();
        let b = coupling_from_positions(&db, &nv, &Vector3::z_axis()).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            coupling_from_positions(&nv, &Vector3::new(0.0, 0.0, 8.0), &Vector3::z_axis()).unwrap(),
            dipolar_coupling(8.0, 0.0).unwrap()
        );
    }

    #[test]
    fn axial_geometry_reproduces_reference_table() {
        let sys = build_system(&axial_config()).unwrap();
        let expected = [
            ("nv", "db", 0.203),
            ("nv", "l1", 0.047),
            ("nv", "l2", 0.023),
            ("db", "l1", 0.831),
            ("db", "l2", 0.169),
            ("l1", "l2", 2.423),
        ];
        for (a, b, mhz) in expected {
            let i = sys.index_of(a).unwrap();
            let j = sys.index_of(b).unwrap();
            let got = angular_to_mhz(sys.coupling(i, j)).abs();
            assert!((got - mhz).abs() / mhz < 0.01, "{a}-{b}: {got} vs {mhz}");
        }
    }

    #[test]
    fn overrides_win_over_geometry() {
        let mut cfg = axial_config();
        cfg.overrides.push(CouplingOverride { a: "l2".into(), b: "l1".into(), mhz: 1.734 });
        let sys = build_system(&cfg).unwrap();
        assert_eq!(sys.coupling(2, 3), mhz_to_angular(1.734));
        assert_eq!(sys.coupling(3, 2), mhz_to_angular(1.734));
        assert_eq!(sys.coupling_source(2, 3), CouplingSource::Override);
        assert_eq!(sys.coupling_source(0, 1), CouplingSource::Geometry);
    }

    #[test]
    fn all_zero_overrides_give_free_system() {
        let mut cfg = axial_config();
        for s in cfg.sites.iter_mut() {
            s.position = None;
        }
        let names = ["nv", "db", "l1", "l2"];
        for i in 0..4 {
            for j in (i + 1)..4 {
                cfg.overrides.push(CouplingOverride { a: names[i].into(), b: names[j].into(), mhz: 0.0 });
            }
        }
        let sys = build_system(&cfg).unwrap();
        assert!(sys.couplings().iter().all(|&a| a == 0.0));
        assert!(secular_hamiltonian(&sys).diagonal.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn build_errors() {
        let mut dup = axial_config();
        dup.sites[2].name = "db".into();
        assert_eq!(build_system(&dup), Err(SpinError::DuplicateName("db".into())));

        let mut two_nv = axial_config();
        two_nv.sites[1].kind = SpinKind::Nv;
        assert_eq!(build_system(&two_nv), Err(SpinError::NvCount(2)));

        let mut bad_t1 = axial_config();
        bad_t1.sites[3].t1 = 0.0;
        assert!(matches!(build_system(&bad_t1), Err(SpinError::InvalidRelaxation { .. })));

        let mut bad_t2 = axial_config();
        bad_t2.sites[3].t2 = -1.0;
        assert!(matches!(build_system(&bad_t2), Err(SpinError::InvalidRelaxation { .. })));

        let mut too_long = axial_config();
        too_long.sites[0].t2 = 25.0;
        assert!(matches!(build_system(&too_long), Err(SpinError::InvalidRelaxation { .. })));

        let mut missing = axial_config();
        missing.sites[1].position = None;
        assert!(matches!(build_system(&missing), Err(SpinError::MissingGeometry(..))));

        let mut coincident = axial_config();
        coincident.sites[2].position = Some([0.0, 0.0, 8.0]);
        assert!(matches!(build_system(&coincident), Err(SpinError::CoincidentPositions(..))));
    }

    #[test]
    fn two_spin_hamiltonian_expansion() {
        let cfg = SystemConfig {
            sites: vec![
                site("nv", SpinKind::Nv, 0.0),
                site("l1", SpinKind::Label, 1.0),
                site("l2", SpinKind::Label, 2.0),
            ],
            field_direction: [0.0, 0.0, 1.0],
            overrides: vec![
                CouplingOverride { a: "nv".into(), b: "l1".into(), mhz: 0.0 },
                CouplingOverride { a: "nv".into(), b: "l2".into(), mhz: 0.0 },
                CouplingOverride { a: "l1".into(), b: "l2".into(), mhz: 1.0 },
            ],
        };
        let sys = build_system(&cfg).unwrap();
        let h = secular_hamiltonian(&sys);
        let q = mhz_to_angular(1.0) / 4.0;
        // l1, l2 are the two least significant bits
        for (idx, e) in h.diagonal.iter().enumerate() {
            let expected = match idx & 0b11 {
                0b00 | 0b11 => q,
                _ => -q,
            };
            assert_relative_eq!(*e, expected, max_relative = 1e-15);
        }
    }

    #[test]
    fn without_db_keeps_label_couplings() {
        let sys = build_system(&axial_config()).unwrap();
        let direct = sys.without_db();
        assert_eq!(direct.len(), 3);
        assert_eq!(direct.coupling(1, 2), sys.coupling(2, 3));
        assert_eq!(direct.roles().unwrap().db, None);
    }

    #[test]
    fn moving_a_site_touches_only_its_couplings() {
        let sys = build_system(&axial_config()).unwrap();
        let moved = sys.with_position("db", Vector3::new(2.0, 0.0, 8.0)).unwrap();
        for (i, j) in [(0, 2), (0, 3), (2, 3)] {
            assert_eq!(moved.coupling(i, j), sys.coupling(i, j));
        }
        for (i, j) in [(0, 1), (1, 2), (1, 3)] {
            assert!(moved.coupling(i, j).abs() < sys.coupling(i, j).abs());
        }
    }

    #[test]
    fn magic_pair_is_flagged() {
        let mut cfg = axial_config();
        let r = 5.0 * MAGIC_ANGLE_DEG.to_radians().tan();
        cfg.sites[1].position = Some([r, 0.0, 8.0]);
        cfg.sites[2].position = Some([0.0, 0.0, 13.0]);
        let sys = build_system(&cfg).unwrap();
        let rows = sys.coupling_rows();
        let row = rows.iter().find(|r| r.a == "db" && r.b == "l1").unwrap();
        assert!(row.near_magic_angle);
        assert!(row.coupling_mhz.abs() < 1e-9);
    }
}
