//! Lindblad generator.
//!
//! [`Liouvillian`] exploits the structure of the problem: the secular
//! Hamiltonian is diagonal, every jump operator acts on one site, and the
//! drive is a sum of single-site transverse fields. The action on a row-major
//! vectorised ρ is then a handful of bit operations per entry. The dense
//! [`lindblad_rhs`] is the textbook form and serves as a reference.

use num_complex::Complex64 as C64;

use crate::hilbert::{embed, pauli_z, site_mask, Op};
use crate::spinsys::{SecularHamiltonian, SpinSystem};

use super::{DynamicsError, NoiseParams, SiteRates};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// A jump operator with its rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub op: Op,
    pub rate: f64,
}

/// Jump operators of every site: `σz` at `1/(2 T2)`, `|0⟩⟨1|` at the
/// downward rate and `|1⟩⟨0|` at the upward rate.
pub fn dissipator_channels(sys: &SpinSystem, noise: &NoiseParams) -> Result<Vec<Channel>, DynamicsError> {
    let n = sys.len();
    let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    let lower = [[z, o], [z, z]];
    let raise = [[z, z], [o, z]];
    let mut out = Vec::new();
    for (k, r) in noise.rates(sys)?.into_iter().enumerate() {
        out.push(Channel { op: embed(&pauli_z(), n, k), rate: r.dephasing / 2.0 });
        out.push(Channel { op: embed(&lower, n, k), rate: r.down });
        out.push(Channel { op: embed(&raise, n, k), rate: r.up });
    }
    Ok(out)
}

/// `−i[H, ρ] + Σ γ (L ρ L† − ½{L†L, ρ})`.
pub fn lindblad_rhs(rho: &Op, h: &Op, channels: &[Channel]) -> Result<Op, DynamicsError> {
    let d = rho.nrows();
    let check = |m: &Op| {
        if m.nrows() != d || m.ncols() != d {
            Err(DynamicsError::DimensionMismatch { expected: d, found: m.nrows() })
        } else {
            Ok(())
        }
    };
    check(rho)?;
    check(h)?;
    let mut out = (h * rho - rho * h) * (-I);
    for ch in channels {
        check(&ch.op)?;
        if ch.rate == 0.0 {
            continue;
        }
        let ld = ch.op.adjoint();
        let ldl = &ld * &ch.op;
        out += (&ch.op * rho * &ld - (&ldl * rho + rho * &ldl) * C64::new(0.5, 0.0)) * C64::new(ch.rate, 0.0);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Liouvillian {
    n_sites: usize,
    dim: usize,
    masks: Vec<usize>,
    /// Diagonal part of the generator, row-major over (r, c).
    coef: Vec<C64>,
    down: Vec<f64>,
    up: Vec<f64>,
}

impl Liouvillian {
    pub fn new(h: &SecularHamiltonian, rates: &[SiteRates]) -> Result<Self, DynamicsError> {
        let n = h.n_sites;
        if rates.len() != n {
            return Err(DynamicsError::DimensionMismatch { expected: n, found: rates.len() });
        }
        let dim = 1usize << n;
        let masks: Vec<usize> = (0..n).map(|k| site_mask(n, k)).collect();
        let mut coef = vec![C64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                let mut decay = 0.0;
                for (k, &b) in masks.iter().enumerate() {
                    let (rb, cb) = (r & b != 0, c & b != 0);
                    if rb != cb {
                        decay += rates[k].dephasing;
                    }
                    let excited = f64::from(u8::from(rb) + u8::from(cb));
                    decay += 0.5 * rates[k].down * excited + 0.5 * rates[k].up * (2.0 - excited);
                }
                coef[r * dim + c] = C64::new(-decay, -(h.diagonal[r] - h.diagonal[c]));
            }
        }
        Ok(Self {
            n_sites: n,
            dim,
            masks,
            coef,
            down: rates.iter().map(|r| r.down).collect(),
            up: rates.iter().map(|r| r.up).collect(),
        })
    }

    pub fn from_system(sys: &SpinSystem, noise: &NoiseParams) -> Result<Self, DynamicsError> {
        Self::new(&crate::spinsys::secular_hamiltonian(sys), &noise.rates(sys)?)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest modulus of the diagonal generator, a stiffness scale.
    pub fn spectral_scale(&self) -> f64 {
        self.coef.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `out = L(ρ)` for row-major `rho`. `drive[k]` is the coefficient of
    /// `|1⟩⟨0|` on site `k` in the drive Hamiltonian (its conjugate multiplies
    /// `|0⟩⟨1|`).
    pub fn apply(&self, rho: &[C64], drive: Option<&[C64]>, out: &mut [C64]) {
        let d = self.dim;
        for (o, (c, x)) in out.iter_mut().zip(self.coef.iter().zip(rho)) {
            *o = c * x;
        }
        for (k, &b) in self.masks.iter().enumerate() {
            let (gd, gu) = (self.down[k], self.up[k]);
            if gd == 0.0 && gu == 0.0 {
                continue;
            }
            for r in 0..d {
                let rb = r & b != 0;
                for c in 0..d {
                    let cb = c & b != 0;
                    if !rb && !cb {
                        out[r * d + c] += gd * rho[(r | b) * d + (c | b)];
                    } else if rb && cb {
                        out[r * d + c] += gu * rho[(r ^ b) * d + (c ^ b)];
                    }
                }
            }
        }
        if let Some(h) = drive {
            for (k, &b) in self.masks.iter().enumerate() {
                let hk = h[k];
                if hk == C64::new(0.0, 0.0) {
                    continue;
                }
                let hc = hk.conj();
                for r in 0..d {
                    let left = if r & b != 0 { hk } else { hc };
                    let row = r * d;
                    let flipped = (r ^ b) * d;
                    for c in 0..d {
                        let right = if c & b == 0 { hk } else { hc };
                        let comm = left * rho[flipped + c] - right * rho[row + (c ^ b)];
                        out[row + c] += -I * comm;
                    }
                }
            }
        }
    }
}
