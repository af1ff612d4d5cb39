//! Basis conventions for the joint Hilbert space.
//!
//! Sites are combined by ordered tensor product with site 0 as the most
//! significant factor, so site `k` of `n` lives on bit `n - 1 - k` of a basis
//! index. Bit value 0 is the `|0⟩` state with `S_z = +1/2`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub type Op = DMatrix<C64>;

/// Bit mask selecting site `k` in an `n`-site basis index.
#[inline]
pub fn site_mask(n_sites: usize, k: usize) -> usize {
    1 << (n_sites - 1 - k)
}

/// `S_z` eigenvalue (±1/2) of site `k` in basis state `index`.
#[inline]
pub fn sz_value(index: usize, n_sites: usize, k: usize) -> f64 {
    if index & site_mask(n_sites, k) == 0 {
        0.5
    } else {
        -0.5
    }
}

pub fn pauli_x() -> [[C64; 2]; 2] {
    let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    [[z, o], [o, z]]
}

pub fn pauli_y() -> [[C64; 2]; 2] {
    let (i, z) = (C64::new(0.0, 1.0), C64::new(0.0, 0.0));
    [[z, -i], [i, z]]
}

pub fn pauli_z() -> [[C64; 2]; 2] {
    let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    [[o, z], [z, -o]]
}

/// Embed a single-site operator at site `k` of an `n`-site register.
pub fn embed(local: &[[C64; 2]; 2], n_sites: usize, k: usize) -> Op {
    let dim = 1 << n_sites;
    let mask = site_mask(n_sites, k);
    Op::from_fn(dim, dim, |r, c| {
        if (r & !mask) != (c & !mask) {
            return C64::new(0.0, 0.0);
        }
        let br = usize::from(r & mask != 0);
        let bc = usize::from(c & mask != 0);
        local[br][bc]
    })
}

/// Apply `U_k ρ U_k†` in place for a single-site unitary on site `k`.
pub fn conjugate_site(rho: &mut Op, u: &[[C64; 2]; 2], n_sites: usize, k: usize) {
    let dim = rho.nrows();
    let mask = site_mask(n_sites, k);
    // rows: ρ ← U ρ
    for c in 0..dim {
        for r0 in (0..dim).filter(|r| r & mask == 0) {
            let r1 = r0 | mask;
            let (a, b) = (rho[(r0, c)], rho[(r1, c)]);
            rho[(r0, c)] = u[0][0] * a + u[0][1] * b;
            rho[(r1, c)] = u[1][0] * a + u[1][1] * b;
        }
    }
    // columns: ρ ← ρ U†
    for r in 0..dim {
        for c0 in (0..dim).filter(|c| c & mask == 0) {
            let c1 = c0 | mask;
            let (a, b) = (rho[(r, c0)], rho[(r, c1)]);
            rho[(r, c0)] = a * u[0][0].conj() + b * u[0][1].conj();
            rho[(r, c1)] = a * u[1][0].conj() + b * u[1][1].conj();
        }
    }
}

/// Kronecker product of single-site density matrices, site 0 first.
pub fn product_state(factors: &[[[C64; 2]; 2]]) -> Op {
    let mut out = Op::from_element(1, 1, C64::new(1.0, 0.0));
    for f in factors {
        let local = Op::from_fn(2, 2, |r, c| f[r][c]);
        out = out.kronecker(&local);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embed_matches_kronecker_product() {
        let z = pauli_z();
        let zl = Op::from_fn(2, 2, |r, c| z[r][c]);
        let id = Op::identity(2, 2);
        let expected = id.kronecker(&zl).kronecker(&id);
        assert_eq!(embed(&z, 3, 1), expected);
    }

    #[test]
    fn conjugate_site_matches_dense_product() {
        let x = pauli_x();
        let rho = Op::from_fn(8, 8, |r, c| C64::new((r * 8 + c) as f64, (r as f64) - (c as f64)));
        let u = embed(&x, 3, 2);
        let expected = &u * &rho * u.adjoint();
        let mut got = rho.clone();
        conjugate_site(&mut got, &x, 3, 2);
        assert!((got - expected).norm() < 1e-12);
    }

    #[test]
    fn site_zero_is_most_significant() {
        assert_eq!(site_mask(4, 0), 8);
        assert_eq!(sz_value(0b1000, 4, 0), -0.5);
        assert_eq!(sz_value(0b1000, 4, 3), 0.5);
    }
}
