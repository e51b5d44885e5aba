//! Canonical reference data and seeded random sampling of Type IIA points,
//! shared by the verification commands and the test suites.

use rand::Rng;

use crate::forms6::{KForm, Mat6, SymplecticContext};

/// `φ_can = Re(e¹+ie²)∧(e³+ie⁴)∧(e⁵+ie⁶) = e^{135} − e^{146} − e^{245} − e^{236}`.
pub fn phi_canonical() -> KForm {
    KForm::from_terms(
        3,
        &[
            (&[1, 3, 5], 1.0),
            (&[1, 4, 6], -1.0),
            (&[2, 4, 5], -1.0),
            (&[2, 3, 6], -1.0),
        ],
    )
}

/// `φ̂_can = Im(e¹+ie²)∧(e³+ie⁴)∧(e⁵+ie⁶) = e^{136} + e^{145} + e^{235} − e^{246}`.
pub fn phi_hat_canonical() -> KForm {
    KForm::from_terms(
        3,
        &[
            (&[1, 3, 6], 1.0),
            (&[1, 4, 5], 1.0),
            (&[2, 3, 5], 1.0),
            (&[2, 4, 6], -1.0),
        ],
    )
}

/// `J e_{2k−1} = e_{2k}`, `J e_{2k} = −e_{2k−1}`.
pub fn j_standard() -> Mat6 {
    let mut j = Mat6::zeros();
    for k in 0..3 {
        j[(2 * k + 1, 2 * k)] = 1.0;
        j[(2 * k, 2 * k + 1)] = -1.0;
    }
    j
}

/// Matrix exponential by scaling and squaring with a Taylor series.
pub fn expm(x: &Mat6) -> Mat6 {
    let norm = x.abs().max();
    let s = (norm.log2().ceil().max(0.0) as i32 + 4) as u32;
    let y = x / 2f64.powi(s as i32);
    let mut term = Mat6::identity();
    let mut sum = Mat6::identity();
    for n in 1..20 {
        term = term * y / n as f64;
        sum += term;
    }
    for _ in 0..s {
        sum = sum * sum;
    }
    sum
}

/// Random element of `Sp(6, R)` for the standard `ω`, as `exp(Ω S)` with `S`
/// symmetric; pullback by it preserves `ω_std`.
pub fn random_symplectic<R: Rng>(rng: &mut R, scale: f64) -> Mat6 {
    let omega = SymplecticContext::standard().matrix().clone_owned();
    let mut s = Mat6::zeros();
    for i in 0..6 {
        for j in i..6 {
            let v = rng.gen_range(-scale..scale);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    expm(&(omega * s))
}

/// Random positive primitive stable 3-form for `ω_std`: a random symplectic
/// frame of `φ_can`, rescaled, plus an optional primitive perturbation of
/// relative size `perturb`. Not every sample is guaranteed positive when
/// `perturb` is large; callers re-draw on gate failures.
pub fn random_stable_phi<R: Rng>(rng: &mut R, perturb: f64) -> KForm {
    let ctx = SymplecticContext::standard();
    let p = random_symplectic(rng, 0.15);
    let scale = rng.gen_range(0.6..1.6);
    let mut phi = phi_canonical().transform(&p).scaled(scale);
    if perturb > 0.0 {
        let mut mu = KForm::zero(3);
        for c in mu.coeffs_mut() {
            *c = rng.gen_range(-1.0..1.0);
        }
        let mu = ctx.primitive_project(&mu);
        phi.axpy(perturb * rng.gen_range(0.0..1.0), &mu);
    }
    phi
}
