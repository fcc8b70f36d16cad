//! Seeded random inputs for property suites.

use rand::Rng;

use crate::coeff::{rat, HPoly, Monomial, Poly};

/// Up to `terms` monomials of degree `<= degree` with integer coefficients
/// in `[-c, c]`; h-free.
pub fn random_poly<R: Rng>(rng: &mut R, nvars: usize, degree: u32, terms: usize, c: i64) -> Poly {
    let monos = Monomial::all_up_to_degree(nvars, degree);
    let mut p = Poly::zero(nvars);
    for _ in 0..terms {
        let m = monos[rng.gen_range(0..monos.len())].clone();
        let k = rng.gen_range(-c..=c);
        p.add_term(m, &HPoly::constant(rat(k)));
    }
    p
}

/// A random poly that is not zero.
pub fn random_nonzero_poly<R: Rng>(rng: &mut R, nvars: usize, degree: u32, terms: usize, c: i64) -> Poly {
    loop {
        let p = random_poly(rng, nvars, degree, terms, c);
        if !p.is_zero() {
            return p;
        }
    }
}
