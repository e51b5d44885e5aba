//! Shared fixtures for unit tests, mostly thin re-exports of the public
//! sampling helpers with a pinned seeded generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::forms6::KForm;

pub use crate::samples::{j_standard, phi_canonical, phi_hat_canonical, random_symplectic};

pub fn random_form(k: usize, rng: &mut ChaCha8Rng) -> KForm {
    let mut f = KForm::zero(k);
    for c in f.coeffs_mut() {
        *c = rng.gen_range(-1.0..1.0);
    }
    f
}

pub fn random_stable_phi(rng: &mut ChaCha8Rng, perturb: f64) -> KForm {
    crate::samples::random_stable_phi(rng, perturb)
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
