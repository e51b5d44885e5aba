//! Pointwise Hitchin construction and Type IIA linear algebra.
//!
//! From a stable 3-form `φ` and a compatible symplectic form `ω` this module
//! produces the derived bundle `(λ_φ, J_φ, φ̂, |φ|², g, g̃)`, the normal form
//! of `φ`, the first variation of `φ̂`, and the principal-symbol spectrum of
//! the flow operator.
//!
//! The construction order is `λ → |φ|² → g̃ → g`: the norm is defined through
//! `√(−λ_φ) = ½|φ|² ω³/3!` before any metric exists, which resolves the
//! apparent circularity in `g = |φ|⁻² g̃`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::forms6::{FormError, KForm, Mat6, Metric, SymplecticContext, Vec6, DIM};

/// Stability margin: `λ` must lie below `−STABILITY_MARGIN · scale⁴`.
pub const STABILITY_MARGIN: f64 = 1e-12;
/// Primitivity gate on `‖ω ∧ φ‖ / scale`.
pub const PRIMITIVITY_TOL: f64 = 1e-10;
/// Positivity margin on the eigenvalues of `g`.
pub const POSITIVITY_MARGIN: f64 = 1e-10;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum HitchinError {
    #[error("φ is not primitive: ‖ω∧φ‖/scale = {residual:.3e}")]
    NotPrimitive { residual: f64 },
    #[error("φ is not stable: λ = {lambda:.3e} (needs λ < 0)")]
    NotStable { lambda: f64 },
    #[error("induced metric is not positive: min eigenvalue {min_eig:.3e}")]
    NotPositive { min_eig: f64 },
    #[error("zero covector passed to the symbol")]
    ZeroCovector,
    #[error("normal form residual {residual:.3e} exceeds tolerance")]
    NormalForm { residual: f64 },
    #[error(transparent)]
    Form(#[from] FormError),
}

/// The derived bundle of a positive primitive 3-form.
#[derive(Clone, Debug)]
pub struct HitchinData {
    phi: KForm,
    omega: SymplecticContext,
    lambda: f64,
    j: Mat6,
    phi_hat: KForm,
    norm_sq: f64,
    g: Metric,
    g_tilde: Mat6,
    u: f64,
}

impl HitchinData {
    pub fn phi(&self) -> &KForm {
        &self.phi
    }
    pub fn omega(&self) -> &SymplecticContext {
        &self.omega
    }
    /// `λ_φ` as a multiple of `(ω³/3!)²`; negative for stable forms.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn j(&self) -> &Mat6 {
        &self.j
    }
    /// `φ̂ = J_φ φ = ⋆φ`.
    pub fn phi_hat(&self) -> &KForm {
        &self.phi_hat
    }
    /// `|φ|² = 2√(−λ_φ)` in units of `ω³/3!`.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }
    pub fn g(&self) -> &Metric {
        &self.g
    }
    /// `g̃ = |φ|² g`, algebraic in `φ`.
    pub fn g_tilde(&self) -> &Mat6 {
        &self.g_tilde
    }
    /// `u = log |φ|²`.
    pub fn u(&self) -> f64 {
        self.u
    }

    /// Complex volume form `Ω = φ + iφ̂` evaluated on a triple of vectors.
    pub fn omega_complex(&self, x: &Vec6, y: &Vec6, z: &Vec6) -> (f64, f64) {
        (eval3(&self.phi, x, y, z), eval3(&self.phi_hat, x, y, z))
    }
}

/// Evaluates a 3-form on three vectors.
fn eval3(a: &KForm, x: &Vec6, y: &Vec6, z: &Vec6) -> f64 {
    let t = a.tensor3();
    let mut s = 0.0;
    for i in 0..DIM {
        if x[i] == 0.0 {
            continue;
        }
        for j in 0..DIM {
            for k in 0..DIM {
                s += t[i][j][k] * x[i] * y[j] * z[k];
            }
        }
    }
    s
}

/// The map `K_φ(v) = −ι_v φ ∧ φ`, returned as the matrix `K` with
/// `K_φ(v) = (K v) ⊗ ε` for the orientation 6-form `ε`.
///
/// Entries are quadratic in `φ`; `tr K = 0` for every `φ`.
pub fn k_map(phi: &KForm, orientation: &KForm) -> Mat6 {
    assert_eq!(phi.degree(), 3);
    let eps = orientation.coeffs()[0];
    assert!(eps != 0.0, "orientation must be nonzero");
    let mut k = Mat6::zeros();
    for jcol in 0..DIM {
        let mut v = Vec6::zeros();
        v[jcol] = 1.0;
        let five = phi.interior(&v).wedge(phi).expect("2+3<=6");
        // K^i_j ε = −e^i ∧ ι_{e_j}φ ∧ φ
        for i in 0..DIM {
            let w = KForm::basis(&[i + 1]).wedge(&five).expect("1+5<=6");
            k[(i, jcol)] = -w.coeffs()[0] / eps;
        }
    }
    k
}

/// Hitchin's quartic invariant `λ_φ = (1/6) tr K_φ²` in units of `ε²`.
pub fn lambda_invariant(phi: &KForm, orientation: &KForm) -> f64 {
    let k = k_map(phi, orientation);
    (k * k).trace() / 6.0
}

/// Runs the full construction, gating primitivity, stability and positivity.
pub fn build(phi: &KForm, omega: &SymplecticContext) -> Result<HitchinData, HitchinError> {
    assert_eq!(phi.degree(), 3);
    let scale = phi.norm_inf().max(f64::MIN_POSITIVE);
    let prim_residual = omega.form().wedge(phi)?.norm_inf() / scale;
    if prim_residual > PRIMITIVITY_TOL {
        return Err(HitchinError::NotPrimitive {
            residual: prim_residual,
        });
    }
    let k = k_map(phi, omega.volume());
    let lambda = (k * k).trace() / 6.0;
    if !(lambda < -STABILITY_MARGIN * scale.powi(4)) {
        return Err(HitchinError::NotStable { lambda });
    }
    let sqrt_neg = (-lambda).sqrt();
    let norm_sq = 2.0 * sqrt_neg;
    let j = k / sqrt_neg;
    // J² = −Id is implied by stability; numerical failure means a degenerate φ
    let jj = j * j + Mat6::identity();
    if jj.abs().max() > 1e-8 {
        return Err(HitchinError::NotStable { lambda });
    }
    // g̃_{ij} = −φ_{iab} φ_{jcd} ω^{ac} ω^{bd}
    let t = phi.tensor3();
    let winv = omega.inverse();
    let mut g_tilde = Mat6::zeros();
    for i in 0..DIM {
        for jx in i..DIM {
            let mut s = 0.0;
            for a in 0..DIM {
                for b in 0..DIM {
                    if t[i][a][b] == 0.0 {
                        continue;
                    }
                    for c in 0..DIM {
                        for d in 0..DIM {
                            s -= t[i][a][b] * t[jx][c][d] * winv[(a, c)] * winv[(b, d)];
                        }
                    }
                }
            }
            g_tilde[(i, jx)] = s;
            g_tilde[(jx, i)] = s;
        }
    }
    let g_mat = g_tilde / norm_sq;
    let g = Metric::try_new(g_mat).map_err(|e| match e {
        FormError::NonPositiveMetric(m) => HitchinError::NotPositive { min_eig: m },
        other => HitchinError::Form(other),
    })?;
    if g.min_eigenvalue() <= POSITIVITY_MARGIN {
        return Err(HitchinError::NotPositive {
            min_eig: g.min_eigenvalue(),
        });
    }
    let phi_hat = phi.j_act(&j);
    Ok(HitchinData {
        phi: phi.clone(),
        omega: omega.clone(),
        lambda,
        j,
        phi_hat,
        norm_sq,
        g,
        g_tilde,
        u: norm_sq.ln(),
    })
}

/// Basis in which `(ω, φ)` take the normal form: returns `B` whose columns
/// are the new basis vectors, so that `φ.transform(B) = M(e^{135} − e^{146}
/// − e^{245} − e^{236})` with `M = ½|φ|` and `ω.transform(B) = ω_std`.
///
/// The basis is `g`-orthonormal and `J`-adapted: Gram–Schmidt on pairs
/// `(v, Jv)` followed by a phase rotation in the first complex line that
/// makes `Ω(f₁,f₃,f₅)` real and positive.
pub fn normal_form(data: &HitchinData) -> Result<Mat6, HitchinError> {
    let g = data.g().matrix();
    let j = data.j();
    let ip = |x: &Vec6, y: &Vec6| (g * y).dot(x);
    let mut basis: Vec<Vec6> = Vec::with_capacity(6);
    for _pair in 0..3 {
        // candidate with the largest residual after projecting off the span
        let mut best: Option<(f64, Vec6)> = None;
        for c in 0..DIM {
            let mut v = Vec6::zeros();
            v[c] = 1.0;
            for b in &basis {
                v -= b * ip(&v, b);
            }
            let n = ip(&v, &v);
            if best.as_ref().map_or(true, |(bn, _)| n > *bn) {
                best = Some((n, v));
            }
        }
        let (n, v) = best.expect("candidates exist");
        let f = v / n.sqrt();
        let jf = j * f;
        basis.push(f);
        basis.push(jf);
    }
    // phase rotation of the first pair so that Ω(f₁,f₃,f₅) = M > 0
    let (re, im) = data.omega_complex(&basis[0], &basis[2], &basis[4]);
    let theta = -im.atan2(re);
    let (c, s) = (theta.cos(), theta.sin());
    let f1 = basis[0] * c + basis[1] * s;
    basis[1] = j * f1;
    basis[0] = f1;
    let mut b = Mat6::zeros();
    for (col, f) in basis.iter().enumerate() {
        b.set_column(col, f);
    }
    // internal verification against the normal form
    let m = 0.5 * data.norm_sq().sqrt();
    let phi_ref = KForm::from_terms(
        3,
        &[
            (&[1, 3, 5], m),
            (&[1, 4, 6], -m),
            (&[2, 4, 5], -m),
            (&[2, 3, 6], -m),
        ],
    );
    let omega_ref = SymplecticContext::standard();
    let resid = data
        .phi()
        .transform(&b)
        .max_abs_diff(&phi_ref)
        .max(
            data.omega()
                .form()
                .transform(&b)
                .max_abs_diff(omega_ref.form()),
        );
    if resid > 1e-9 * m.max(1.0) {
        return Err(HitchinError::NormalForm { residual: resid });
    }
    Ok(b)
}

/// First variation of `φ̂` under `φ → φ + t δφ` at `t = 0`:
/// `δφ̂ = −J(δφ) + 2 (δφ∧φ / φ∧φ̂) φ + 2 (δφ∧φ̂ / φ∧φ̂) φ̂`.
pub fn variation_hat(data: &HitchinData, dphi: &KForm) -> KForm {
    assert_eq!(dphi.degree(), 3);
    let denom = data.phi().wedge(data.phi_hat()).expect("3+3<=6").coeffs()[0];
    let r_phi = dphi.wedge(data.phi()).expect("3+3<=6").coeffs()[0] / denom;
    let r_hat = dphi.wedge(data.phi_hat()).expect("3+3<=6").coeffs()[0] / denom;
    let mut out = dphi.j_act(data.j()).scaled(-1.0);
    out.axpy(2.0 * r_phi, data.phi());
    out.axpy(2.0 * r_hat, data.phi_hat());
    out
}

/// Spectrum of the flow's principal symbol on the constrained space
/// `W = {δφ : ξ∧δφ = 0, Λδφ = 0}`, rescaled to drop the positive factors
/// `|ξ|²_g` and `|φ|²`.
#[derive(Clone, Debug)]
pub struct SymbolReport {
    /// Five eigenvalues sorted descending; `(1,1,1,1,0)` for the flow.
    pub eigenvalues: [f64; 5],
}

pub fn symbol_spectrum(data: &HitchinData, xi: &Vec6) -> Result<SymbolReport, HitchinError> {
    let ginv = data.g().inverse();
    let xi_norm_sq = (ginv * xi).dot(xi);
    if xi_norm_sq <= 1e-30 {
        return Err(HitchinError::ZeroCovector);
    }
    let xi1 = {
        let mut f = KForm::zero(1);
        for i in 0..DIM {
            f.coeffs_mut()[i] = xi[i] / xi_norm_sq.sqrt();
        }
        f
    };
    let dim3 = 20;
    // constraint matrix: rows are the coefficients of ξ∧δφ (15) and Λδφ (6)
    let mut cons = DMatrix::<f64>::zeros(21, dim3);
    let mut sym = DMatrix::<f64>::zeros(dim3, dim3);
    let mut basis3 = Vec::with_capacity(dim3);
    for p in 0..dim3 {
        let mut e = KForm::zero(3);
        e.coeffs_mut()[p] = 1.0;
        basis3.push(e);
    }
    for (p, e) in basis3.iter().enumerate() {
        let w = xi1.wedge(e).expect("1+3<=6");
        for (r, &c) in w.coeffs().iter().enumerate() {
            cons[(r, p)] = c;
        }
        let l = data.omega().lambda(e);
        for (r, &c) in l.coeffs().iter().enumerate() {
            cons[(15 + r, p)] = c;
        }
        // symbol image: ξ∧Λ(ξ∧ δ(|φ|²φ̂)[e]) / |φ|², with the linearization
        // δ(|φ|²φ̂) = −|φ|² J(δφ) − 2(δφ,φ̂)φ + 4(δφ,φ)φ̂ on primitive variations
        let mut lin = e.j_act(data.j()).scaled(-data.norm_sq());
        lin.axpy(-2.0 * data.g().inner(e, data.phi_hat()), data.phi());
        lin.axpy(4.0 * data.g().inner(e, data.phi()), data.phi_hat());
        let img = xi1
            .wedge(&data.omega().lambda(&xi1.wedge(&lin).expect("1+3<=6")))
            .expect("1+2<=6")
            .scaled(1.0 / data.norm_sq());
        for (r, &c) in img.coeffs().iter().enumerate() {
            sym[(r, p)] = c;
        }
    }
    // nullspace of the constraints = W; expect dimension 5
    let svd = cons.svd(false, true);
    let vt = svd.v_t.as_ref().expect("requested V^T");
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let mut w_basis: Vec<DVector<f64>> = Vec::new();
    for r in 0..vt.nrows() {
        let sv = if r < svd.singular_values.len() {
            svd.singular_values[r]
        } else {
            0.0
        };
        if sv <= 1e-9 * smax {
            w_basis.push(vt.row(r).transpose());
        }
    }
    if w_basis.len() != 5 {
        return Err(HitchinError::ZeroCovector);
    }
    // g-orthonormalize W and assemble the restricted operator (symmetric)
    let to_form = |v: &DVector<f64>| {
        let mut f = KForm::zero(3);
        for p in 0..dim3 {
            f.coeffs_mut()[p] = v[p];
        }
        f
    };
    let mut w_forms: Vec<KForm> = Vec::new();
    for v in &w_basis {
        let mut f = to_form(v);
        for w in &w_forms {
            let c = data.g().inner(&f, w);
            f.axpy(-c, w);
        }
        let n = data.g().norm_sq(&f).sqrt();
        w_forms.push(f.scaled(1.0 / n));
    }
    let mut a = nalgebra::Matrix5::<f64>::zeros();
    for (bq, wq) in w_forms.iter().enumerate() {
        let mut img = KForm::zero(3);
        for r in 0..dim3 {
            img.coeffs_mut()[r] = (0..dim3).map(|p| sym[(r, p)] * wq.coeffs()[p]).sum();
        }
        for (bp, wp) in w_forms.iter().enumerate() {
            a[(bp, bq)] = data.g().inner(wp, &img);
        }
    }
    let a = (a + a.transpose()) * 0.5;
    let mut ev: Vec<f64> = a.symmetric_eigenvalues().iter().cloned().collect();
    ev.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(SymbolReport {
        eigenvalues: [ev[0], ev[1], ev[2], ev[3], ev[4]],
    })
}
