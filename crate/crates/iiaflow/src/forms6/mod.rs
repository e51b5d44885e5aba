//! Exact multilinear algebra on a fixed oriented 6-dimensional vector space.
//!
//! Everything downstream (the Hitchin construction, the Lie models, the flow)
//! is built on the types here: alternating forms of degree 0..=6 with dense
//! coefficient storage, the symplectic contraction `Λ`, the Hodge star of a
//! positive metric, and the action of an endomorphism on all slots of a form.
//!
//! Conventions are pinned in `docs/conventions.md` and enforced by the tests
//! in this module. The two that matter most:
//!
//! * a k-form stores one coefficient per strictly increasing index tuple, and
//!   the full tensor component at a sorted tuple equals that coefficient
//!   (the `1/k!` normalization `φ = (1/k!) φ_I e^I` is implicit);
//! * `(Λa)_{i₃…i_k} = ½ ω^{ji} a_{i j i₃…i_k}` where `ω^{jk}` is the inverse
//!   matrix of `ω_{jk}`, not the `g`-raised tensor.

mod tm;

pub use tm::TmValued2Form;

use std::sync::OnceLock;

use nalgebra::{Matrix6, Vector6};
use thiserror::Error;

/// Dimension of the underlying vector space.
pub const DIM: usize = 6;

/// 6×6 real matrix, the workhorse for metrics, symplectic forms and `J`.
pub type Mat6 = Matrix6<f64>;

/// Vector in the 6-dimensional model space.
pub type Vec6 = Vector6<f64>;

/// Errors raised by the exterior-algebra kernel.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum FormError {
    #[error("wedge product overflows top degree: {0} + {1} > 6")]
    DegreeOverflow(usize, usize),
    #[error("symplectic matrix is singular or not a 2-form")]
    SingularSymplectic,
    #[error("metric is not symmetric positive definite (min eigenvalue {0:.3e})")]
    NonPositiveMetric(f64),
    #[error("orientation 6-form vanishes")]
    ZeroOrientation,
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut r = 1usize;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Basis tables: for each degree k, the strictly increasing index tuples in
/// lexicographic order (as 6-bit masks), plus the inverse mask → position map.
struct BasisTables {
    masks: [Vec<u8>; 7],
    pos: [[usize; 64]; 7],
}

fn tables() -> &'static BasisTables {
    static TABLES: OnceLock<BasisTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut masks: [Vec<u8>; 7] = Default::default();
        let mut pos = [[usize::MAX; 64]; 7];
        // lexicographic enumeration of k-subsets of {0,..,5}
        fn rec(start: usize, left: usize, acc: u8, out: &mut Vec<u8>) {
            if left == 0 {
                out.push(acc);
                return;
            }
            for i in start..DIM {
                rec(i + 1, left - 1, acc | (1 << i), out);
            }
        }
        for k in 0..=DIM {
            let mut v = Vec::with_capacity(binomial(DIM, k));
            rec(0, k, 0, &mut v);
            for (p, &m) in v.iter().enumerate() {
                pos[k][m as usize] = p;
            }
            masks[k] = v;
        }
        BasisTables { masks, pos }
    })
}

/// Sign of merging the sorted index set `a` with the sorted set `b`
/// (disjoint), i.e. the parity of the shuffle putting `a ∪ b` in order.
fn merge_sign(a: u8, b: u8) -> f64 {
    let mut swaps = 0u32;
    for i in 0..DIM {
        if b & (1 << i) != 0 {
            // indices of `a` strictly above i must jump over this index
            swaps += (a >> (i + 1)).count_ones();
        }
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn mask_indices(mask: u8) -> impl Iterator<Item = usize> {
    (0..DIM).filter(move |i| mask & (1 << i) != 0)
}

/// Alternating k-form on the 6-dimensional model space.
///
/// Coefficients are stored densely, one per strictly increasing index tuple
/// in lexicographic order. Public index arguments are 1-based (`e^1 … e^6`)
/// to match the usual frame notation.
#[derive(Clone, Debug, PartialEq)]
pub struct KForm {
    degree: usize,
    coeffs: Vec<f64>,
}

impl KForm {
    pub fn zero(degree: usize) -> Self {
        assert!(degree <= DIM, "degree out of range");
        KForm {
            degree,
            coeffs: vec![0.0; binomial(DIM, degree)],
        }
    }

    /// Constant (degree 0) form.
    pub fn scalar(c: f64) -> Self {
        KForm {
            degree: 0,
            coeffs: vec![c],
        }
    }

    /// Basis monomial `e^{i₁…i_k}` for strictly increasing 1-based indices.
    pub fn basis(indices: &[usize]) -> Self {
        Self::from_terms(indices.len(), &[(indices, 1.0)])
    }

    /// Builds a form from `(indices, coefficient)` terms. Indices are 1-based
    /// and need not be sorted; the permutation sign is applied. Repeated
    /// indices in a term are rejected.
    pub fn from_terms(degree: usize, terms: &[(&[usize], f64)]) -> Self {
        let mut f = Self::zero(degree);
        for (idx, c) in terms {
            assert_eq!(idx.len(), degree, "term degree mismatch");
            let (mask, sign) = sort_sign(idx).expect("repeated index in term");
            f.coeffs[tables().pos[degree][mask as usize]] += sign * c;
        }
        f
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Iterates over `(sorted 1-based indices, coefficient)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        let t = tables();
        t.masks[self.degree]
            .iter()
            .zip(self.coeffs.iter())
            .map(|(&m, &c)| (mask_indices(m).map(|i| i + 1).collect(), c))
    }

    /// Tensor component for an arbitrary 1-based index tuple: applies the
    /// permutation sign, returns 0 on repeated indices.
    pub fn component(&self, indices: &[usize]) -> f64 {
        assert_eq!(indices.len(), self.degree);
        match sort_sign(indices) {
            Some((mask, sign)) => sign * self.coeffs[tables().pos[self.degree][mask as usize]],
            None => 0.0,
        }
    }

    /// Coefficient at a strictly increasing 1-based tuple.
    pub fn coeff(&self, indices: &[usize]) -> f64 {
        self.component(indices)
    }

    pub fn set_coeff(&mut self, indices: &[usize], v: f64) {
        let (mask, sign) = sort_sign(indices).expect("repeated index");
        self.coeffs[tables().pos[self.degree][mask as usize]] = sign * v;
    }

    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Euclidean norm of the coefficient vector (used for residual gates).
    pub fn norm_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn add(&self, other: &KForm) -> KForm {
        assert_eq!(self.degree, other.degree);
        let mut r = self.clone();
        for (a, b) in r.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        r
    }

    pub fn sub(&self, other: &KForm) -> KForm {
        assert_eq!(self.degree, other.degree);
        let mut r = self.clone();
        for (a, b) in r.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        r
    }

    pub fn scaled(&self, s: f64) -> KForm {
        let mut r = self.clone();
        for a in r.coeffs.iter_mut() {
            *a *= s;
        }
        r
    }

    pub fn axpy(&mut self, s: f64, other: &KForm) {
        assert_eq!(self.degree, other.degree);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    pub fn max_abs_diff(&self, other: &KForm) -> f64 {
        assert_eq!(self.degree, other.degree);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Exterior product. Errors when the degrees add up past 6.
    pub fn wedge(&self, other: &KForm) -> Result<KForm, FormError> {
        let k = self.degree + other.degree;
        if k > DIM {
            return Err(FormError::DegreeOverflow(self.degree, other.degree));
        }
        let t = tables();
        let mut out = KForm::zero(k);
        for (pa, &ca) in self.coeffs.iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            let ma = t.masks[self.degree][pa];
            for (pb, &cb) in other.coeffs.iter().enumerate() {
                if cb == 0.0 {
                    continue;
                }
                let mb = t.masks[other.degree][pb];
                if ma & mb != 0 {
                    continue;
                }
                let sign = merge_sign(ma, mb);
                out.coeffs[t.pos[k][(ma | mb) as usize]] += sign * ca * cb;
            }
        }
        Ok(out)
    }

    /// Interior product `ι_v a`, an anti-derivation of degree −1:
    /// `(ι_v a)_{i₂…i_k} = v^{i₁} a_{i₁ i₂ … i_k}`.
    pub fn interior(&self, v: &Vec6) -> KForm {
        assert!(self.degree >= 1, "interior product needs degree >= 1");
        let t = tables();
        let k = self.degree;
        let mut out = KForm::zero(k - 1);
        for (pa, &ca) in self.coeffs.iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            let ma = t.masks[k][pa];
            for j in mask_indices(ma) {
                let below = (ma & ((1u8 << j) - 1)).count_ones();
                let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
                out.coeffs[t.pos[k - 1][(ma & !(1 << j)) as usize]] += sign * v[j] * ca;
            }
        }
        out
    }

    /// Pullback along the endomorphism `m`: the form `a(m·, …, m·)`.
    ///
    /// Component form: `(Ta)_{b₁…b_k} = a_{j₁…j_k} m^{j₁}{}_{b₁} ⋯ m^{j_k}{}_{b_k}`.
    pub fn transform(&self, m: &Mat6) -> KForm {
        let t = tables();
        let k = self.degree;
        if k == 0 {
            return self.clone();
        }
        let mut out = KForm::zero(k);
        // image of each source monomial: wedge of transformed covectors
        for (pa, &ca) in self.coeffs.iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            let ma = t.masks[k][pa];
            let mut acc = KForm::scalar(ca);
            for j in mask_indices(ma) {
                let mut one = KForm::zero(1);
                for b in 0..DIM {
                    one.coeffs[b] = m[(j, b)];
                }
                acc = acc.wedge(&one).expect("degree bounded by construction");
            }
            for (o, a) in out.coeffs.iter_mut().zip(&acc.coeffs) {
                *o += a;
            }
        }
        out
    }

    /// Action of an almost-complex structure on all slots: `(Ja)(X,…) = a(JX,…)`.
    /// On compatible 2-forms this fixes `ω`; it sends `φ` to `φ̂`.
    pub fn j_act(&self, j: &Mat6) -> KForm {
        self.transform(j)
    }

    /// Full 3-index tensor of a 3-form, `t[i][j][k] = a_{i+1,j+1,k+1}` (0-based storage).
    pub fn tensor3(&self) -> Box<[[[f64; 6]; 6]; 6]> {
        assert_eq!(self.degree, 3);
        let mut t = Box::new([[[0.0; 6]; 6]; 6]);
        for (idx, c) in self.terms() {
            if c == 0.0 {
                continue;
            }
            let (i, j, k) = (idx[0] - 1, idx[1] - 1, idx[2] - 1);
            // all 6 permutations with signs
            t[i][j][k] = c;
            t[j][k][i] = c;
            t[k][i][j] = c;
            t[j][i][k] = -c;
            t[i][k][j] = -c;
            t[k][j][i] = -c;
        }
        t
    }

    /// Full 2-index tensor of a 2-form.
    pub fn tensor2(&self) -> Mat6 {
        assert_eq!(self.degree, 2);
        let mut m = Mat6::zeros();
        for (idx, c) in self.terms() {
            let (i, j) = (idx[0] - 1, idx[1] - 1);
            m[(i, j)] = c;
            m[(j, i)] = -c;
        }
        m
    }

    /// 2-form from an antisymmetric matrix (antisymmetry is asserted).
    pub fn from_matrix2(m: &Mat6) -> KForm {
        let mut f = KForm::zero(2);
        for i in 0..DIM {
            for j in (i + 1)..DIM {
                debug_assert!((m[(i, j)] + m[(j, i)]).abs() <= 1e-12 * (1.0 + m.abs().max()));
                f.set_coeff(&[i + 1, j + 1], m[(i, j)]);
            }
        }
        f
    }
}

/// Sorts a 1-based index tuple; returns the 6-bit mask and permutation sign,
/// or `None` on a repeated index.
fn sort_sign(indices: &[usize]) -> Option<(u8, f64)> {
    let mut mask = 0u8;
    let mut swaps = 0usize;
    for (n, &i) in indices.iter().enumerate() {
        assert!((1..=DIM).contains(&i), "index out of range 1..=6");
        let bit = 1u8 << (i - 1);
        if mask & bit != 0 {
            return None;
        }
        // count previously inserted indices greater than i
        swaps += indices[..n].iter().filter(|&&p| p > i).count();
        mask |= bit;
    }
    Some((mask, if swaps % 2 == 0 { 1.0 } else { -1.0 }))
}

/// A symplectic form together with cached inverse matrix and volume `ω³/3!`.
///
/// The inverse matrix `ω^{jk}` (with `ω^{jk}ω_{kl} = δ^j_l`) is computed once
/// here; it is not the `g`-raised tensor.
#[derive(Clone, Debug)]
pub struct SymplecticContext {
    form: KForm,
    mat: Mat6,
    inv: Mat6,
    volume: KForm,
}

impl SymplecticContext {
    pub fn try_new(form: &KForm) -> Result<Self, FormError> {
        if form.degree() != 2 {
            return Err(FormError::SingularSymplectic);
        }
        let mat = form.tensor2();
        let inv = mat.try_inverse().ok_or(FormError::SingularSymplectic)?;
        let w2 = form.wedge(form).expect("2+2<=6");
        let volume = w2.wedge(form).expect("4+2<=6").scaled(1.0 / 6.0);
        if volume.norm_inf() == 0.0 {
            return Err(FormError::SingularSymplectic);
        }
        Ok(SymplecticContext {
            form: form.clone(),
            mat,
            inv,
            volume,
        })
    }

    /// The standard form `ω = e^{12} + e^{34} + e^{56}`.
    pub fn standard() -> Self {
        let omega = KForm::from_terms(2, &[(&[1, 2], 1.0), (&[3, 4], 1.0), (&[5, 6], 1.0)]);
        Self::try_new(&omega).expect("standard form is symplectic")
    }

    pub fn form(&self) -> &KForm {
        &self.form
    }

    pub fn matrix(&self) -> &Mat6 {
        &self.mat
    }

    pub fn inverse(&self) -> &Mat6 {
        &self.inv
    }

    /// Orientation 6-form `ε = ω³/3!`.
    pub fn volume(&self) -> &KForm {
        &self.volume
    }

    /// Coefficient of `e^{123456}` in `ω³/3!`.
    pub fn volume_coeff(&self) -> f64 {
        self.volume.coeffs()[0]
    }

    /// Symplectic contraction `(Λa)_{i₃…i_k} = ½ ω^{ji} a_{i j i₃…i_k}`.
    pub fn lambda(&self, a: &KForm) -> KForm {
        assert!(a.degree() >= 2, "lambda contraction needs degree >= 2");
        let t = tables();
        let k = a.degree();
        let mut out = KForm::zero(k - 2);
        for (pa, &ca) in a.coeffs.iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            let ma = t.masks[k][pa];
            let idx: Vec<usize> = mask_indices(ma).collect();
            // pick the two leading slots out of the sorted tuple
            for (n, &i) in idx.iter().enumerate() {
                for (m2, &j) in idx.iter().enumerate() {
                    if m2 == n {
                        continue;
                    }
                    // a_{i j rest}: move i, then j, to the front of the sorted tuple
                    let below_i = (ma & ((1u8 << i) - 1)).count_ones();
                    let rest = ma & !(1 << i);
                    let below_j = (rest & ((1u8 << j) - 1)).count_ones();
                    let sign = if (below_i + below_j) % 2 == 0 { 1.0 } else { -1.0 };
                    let rest2 = rest & !(1 << j);
                    out.coeffs[t.pos[k - 2][rest2 as usize]] +=
                        0.5 * self.inv[(j, i)] * sign * ca;
                }
            }
        }
        out
    }

    /// Projects a k-form (k = 1, 2 or 3) onto the kernel of `Λ`.
    /// For 3-forms this is `a − ω ∧ Λa / 2` (Lefschetz: `Λ(ω∧ν) = 2ν` on 1-forms).
    pub fn primitive_project(&self, a: &KForm) -> KForm {
        match a.degree() {
            0 | 1 => a.clone(),
            2 => {
                // Λ(ω) = 3
                let tr = self.lambda(a).coeffs()[0];
                a.sub(&self.form.scaled(tr / 3.0))
            }
            3 => {
                let nu = self.lambda(a).scaled(0.5);
                a.sub(&self.form.wedge(&nu).expect("2+1<=6"))
            }
            _ => panic!("primitive projection implemented for degrees <= 3"),
        }
    }
}

/// Positive-definite metric with cached inverse, Cholesky frame and margin.
#[derive(Clone, Debug)]
pub struct Metric {
    m: Mat6,
    inv: Mat6,
    /// Coframe matrix `U` with `UᵀU = g`; rows express the orthonormal
    /// coframe in the ambient one, `f^a = U^a{}_j e^j`.
    onb: Mat6,
    onb_inv: Mat6,
    min_eig: f64,
}

impl Metric {
    pub fn try_new(m: Mat6) -> Result<Self, FormError> {
        let sym = (m + m.transpose()) * 0.5;
        let eig = sym.symmetric_eigenvalues();
        let min_eig = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        let chol = nalgebra::Cholesky::new(sym).ok_or(FormError::NonPositiveMetric(min_eig))?;
        let onb = chol.l().transpose();
        let onb_inv = onb
            .try_inverse()
            .ok_or(FormError::NonPositiveMetric(min_eig))?;
        let inv = chol.inverse();
        Ok(Metric {
            m: sym,
            inv,
            onb,
            onb_inv,
            min_eig,
        })
    }

    pub fn identity() -> Self {
        Self::try_new(Mat6::identity()).expect("identity is positive")
    }

    pub fn matrix(&self) -> &Mat6 {
        &self.m
    }

    pub fn inverse(&self) -> &Mat6 {
        &self.inv
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eig
    }

    /// Coordinates of a form in a `g`-orthonormal coframe.
    pub fn to_onb(&self, a: &KForm) -> KForm {
        a.transform(&self.onb_inv)
    }

    pub fn from_onb(&self, a: &KForm) -> KForm {
        a.transform(&self.onb)
    }

    /// Inner product of two k-forms, `⟨a,b⟩ = (1/k!) a_{I} b_{J} g^{..}⋯`.
    pub fn inner(&self, a: &KForm, b: &KForm) -> f64 {
        assert_eq!(a.degree(), b.degree());
        let af = self.to_onb(a);
        let bf = self.to_onb(b);
        af.coeffs().iter().zip(bf.coeffs()).map(|(x, y)| x * y).sum()
    }

    pub fn norm_sq(&self, a: &KForm) -> f64 {
        self.inner(a, a)
    }

    /// Hodge star for this metric and the orientation class of `orientation`.
    ///
    /// Satisfies `⋆⋆ = (−1)^{k(6−k)}` and `⟨a,a⟩ vol_g = a ∧ ⋆a`, where
    /// `vol_g` is the metric volume form in the given orientation.
    pub fn hodge(&self, a: &KForm, orientation: &KForm) -> Result<KForm, FormError> {
        assert_eq!(orientation.degree(), DIM);
        let oc = orientation.coeffs()[0];
        if oc == 0.0 {
            return Err(FormError::ZeroOrientation);
        }
        let t = tables();
        let k = a.degree();
        let af = self.to_onb(a);
        let mut sf = KForm::zero(DIM - k);
        for (pa, &ca) in af.coeffs().iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            let ma = t.masks[k][pa];
            let mc = !ma & 0b11_1111;
            let sign = merge_sign(ma, mc);
            sf.coeffs[t.pos[DIM - k][mc as usize]] += sign * ca;
        }
        let out = self.from_onb(&sf);
        Ok(if oc > 0.0 { out } else { out.scaled(-1.0) })
    }
}
