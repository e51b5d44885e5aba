//! Left-invariant differential geometry on 6-dimensional Lie models.
//!
//! A [`LieModel`] is a Lie algebra given by its structure constants together
//! with an invariant symplectic form. The module provides the invariant
//! (Chevalley–Eilenberg) exterior derivative, the Levi-Civita connection of
//! an invariant metric via the Koszul formula, curvature, the Nijenhuis
//! tensor of an invariant almost-complex structure, the projected
//! Levi-Civita connection, and the identity suite certifying the structural
//! identities of Type IIA geometry on these models.
//!
//! Sign convention linking the differential and the bracket:
//! `(de^k)(e_i, e_j) = −e^k([e_i, e_j]) = −c^k{}_{ij}`.

mod identities;
mod model_file;

pub use identities::{
    boxtimes_2, boxtimes_3, codifferential_3form, codifferential_star_route, identity_suite,
    n_dagger_dot, IdentityCheck, IdentityReport,
};
pub use model_file::parse_model;

use thiserror::Error;

use crate::forms6::{FormError, KForm, Mat6, Metric, SymplecticContext, TmValued2Form, Vec6, DIM};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LieModelError {
    #[error("structure constants violate the Jacobi identity (residual {0:.3e})")]
    Jacobi(f64),
    #[error("d² ≠ 0 on generator e{0} (residual {1:.3e})")]
    NotADifferential(usize, f64),
    #[error("ω is not closed under the invariant differential (residual {0:.3e})")]
    OmegaNotClosed(f64),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("model file, line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Invariant geometry of a 6-dimensional Lie group: structure constants
/// `[e_i, e_j] = c^k{}_{ij} e_k` and an invariant symplectic form.
#[derive(Clone, Debug)]
pub struct LieModel {
    name: String,
    c: Box<[[[f64; DIM]; DIM]; DIM]>,
    dgen: Vec<KForm>,
    omega: SymplecticContext,
    /// `d` of every basis monomial, indexed by degree − 1, then position.
    dtable: Vec<Vec<KForm>>,
}

impl LieModel {
    /// Builds a model from the differentials of the generators,
    /// `dgen[k] = de^{k+1}`, and an invariant symplectic 2-form.
    /// Validates the Jacobi identity (as `d² = 0`) and `dω = 0`.
    pub fn from_differentials(
        name: &str,
        dgen: [KForm; DIM],
        omega: &KForm,
    ) -> Result<Self, LieModelError> {
        Self::from_differentials_with_convention(name, dgen, omega, -1.0)
    }

    /// As [`from_differentials`](Self::from_differentials) with an explicit
    /// sign linking the d-table to the brackets, `c^k{}_{ij} = sign ·
    /// (de^k)_{ij}`. The default convention is `sign = −1`.
    pub fn from_differentials_with_convention(
        name: &str,
        dgen: [KForm; DIM],
        omega: &KForm,
        bracket_sign: f64,
    ) -> Result<Self, LieModelError> {
        let mut c = Box::new([[[0.0; DIM]; DIM]; DIM]);
        for (k, dk) in dgen.iter().enumerate() {
            assert_eq!(dk.degree(), 2);
            let m = dk.tensor2();
            for i in 0..DIM {
                for j in 0..DIM {
                    c[k][i][j] = bracket_sign * m[(i, j)];
                }
            }
        }
        let ctx = SymplecticContext::try_new(omega)?;
        let mut model = LieModel {
            name: name.to_string(),
            c,
            dgen: dgen.to_vec(),
            omega: ctx,
            dtable: Vec::new(),
        };
        model.build_dtable();
        // gates: d² = 0 on every generator, Jacobi on the brackets, dω = 0
        for k in 0..DIM {
            let r = model.d(&model.dgen[k].clone()).norm_inf();
            if r > 1e-12 * (1.0 + model.dgen[k].norm_inf()) {
                return Err(LieModelError::NotADifferential(k + 1, r));
            }
        }
        let jr = model.jacobi_residual();
        if jr > 1e-12 {
            return Err(LieModelError::Jacobi(jr));
        }
        let domega = model.d(&model.omega.form().clone()).norm_inf();
        if domega > 1e-12 {
            return Err(LieModelError::OmegaNotClosed(domega));
        }
        Ok(model)
    }

    /// The abelian model: all brackets vanish, `ω = e^{12} + e^{34} + e^{56}`.
    pub fn torus() -> Self {
        let dgen: [KForm; DIM] = std::array::from_fn(|_| KForm::zero(2));
        Self::from_differentials("torus", dgen, SymplecticContext::standard().form())
            .expect("torus model is consistent")
    }

    /// Nilpotent model with `de⁴ = e^{15}`, `de⁶ = e^{13}`, other `de^k = 0`.
    pub fn nil() -> Self {
        let mut dgen: [KForm; DIM] = std::array::from_fn(|_| KForm::zero(2));
        dgen[3] = KForm::basis(&[1, 5]);
        dgen[5] = KForm::basis(&[1, 3]);
        Self::from_differentials("nil", dgen, SymplecticContext::standard().form())
            .expect("nil model is consistent")
    }

    /// Completely solvable model with `de¹ = −λe^{15}`, `de² = λe^{25}`,
    /// `de³ = −λe^{36}`, `de⁴ = λe^{46}` and `λ = log((3+√5)/2)`.
    pub fn solv() -> Self {
        let l = Self::solv_lambda();
        let mut dgen: [KForm; DIM] = std::array::from_fn(|_| KForm::zero(2));
        dgen[0] = KForm::basis(&[1, 5]).scaled(-l);
        dgen[1] = KForm::basis(&[2, 5]).scaled(l);
        dgen[2] = KForm::basis(&[3, 6]).scaled(-l);
        dgen[3] = KForm::basis(&[4, 6]).scaled(l);
        Self::from_differentials("solv", dgen, SymplecticContext::standard().form())
            .expect("solv model is consistent")
    }

    /// `λ = log((3+√5)/2)` of the solvable model.
    pub fn solv_lambda() -> f64 {
        ((3.0 + 5.0f64.sqrt()) / 2.0).ln()
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "torus" => Some(Self::torus()),
            "nil" => Some(Self::nil()),
            "solv" => Some(Self::solv()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn omega(&self) -> &SymplecticContext {
        &self.omega
    }

    pub fn structure(&self) -> &[[[f64; DIM]; DIM]; DIM] {
        &self.c
    }

    pub fn d_generator(&self, k: usize) -> &KForm {
        &self.dgen[k]
    }

    /// Lie bracket of two invariant vectors.
    pub fn bracket(&self, x: &Vec6, y: &Vec6) -> Vec6 {
        let mut out = Vec6::zeros();
        for k in 0..DIM {
            let mut s = 0.0;
            for a in 0..DIM {
                if x[a] == 0.0 {
                    continue;
                }
                for b in 0..DIM {
                    s += self.c[k][a][b] * x[a] * y[b];
                }
            }
            out[k] = s;
        }
        out
    }

    fn build_dtable(&mut self) {
        let mut dtable: Vec<Vec<KForm>> = Vec::with_capacity(5);
        dtable.push(self.dgen.clone());
        for k in 2..=5usize {
            let n = binomials(k);
            let mut level = Vec::with_capacity(n);
            for p in 0..n {
                let mut mono = KForm::zero(k);
                mono.coeffs_mut()[p] = 1.0;
                let idx = mono.terms().find(|(_, c)| *c != 0.0).map(|(i, _)| i).unwrap();
                // d(e^{i₁} ∧ rest) = de^{i₁} ∧ rest − e^{i₁} ∧ d(rest)
                let head = idx[0];
                let rest: Vec<usize> = idx[1..].to_vec();
                let rest_form = KForm::basis(&rest);
                let term1 = self.dgen[head - 1].wedge(&rest_form).expect("degree ok");
                let drest = if rest.len() == 1 {
                    dtable[0][rest[0] - 1].clone()
                } else {
                    dtable[rest.len() - 1][monomial_position(&rest)].clone()
                };
                let term2 = KForm::basis(&[head]).wedge(&drest).expect("degree ok");
                level.push(term1.sub(&term2));
            }
            dtable.push(level);
        }
        self.dtable = dtable;
    }

    /// Invariant exterior derivative (Chevalley–Eilenberg differential).
    /// Satisfies `d² = 0` and the graded Leibniz rule.
    pub fn d(&self, a: &KForm) -> KForm {
        let k = a.degree();
        if k == 0 || k == DIM {
            return KForm::zero((k + 1).min(DIM));
        }
        let mut out = KForm::zero(k + 1);
        for (p, &coef) in a.coeffs().iter().enumerate() {
            if coef != 0.0 {
                out.axpy(coef, &self.dtable[k - 1][p]);
            }
        }
        out
    }

    fn jacobi_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for m in 0..DIM {
            for i in 0..DIM {
                for j in 0..DIM {
                    for k in 0..DIM {
                        let mut s = 0.0;
                        for p in 0..DIM {
                            s += self.c[m][i][p] * self.c[p][j][k]
                                + self.c[m][j][p] * self.c[p][k][i]
                                + self.c[m][k][p] * self.c[p][i][j];
                        }
                        r = r.max(s.abs());
                    }
                }
            }
        }
        r
    }
}

fn binomials(k: usize) -> usize {
    [1usize, 6, 15, 20, 15, 6, 1][k]
}

/// Position of a sorted 1-based monomial in the lexicographic enumeration.
fn monomial_position(indices: &[usize]) -> usize {
    KForm::basis(indices)
        .coeffs()
        .iter()
        .position(|&c| c != 0.0)
        .expect("basis monomial has one nonzero coefficient")
}

/// Connection coefficients `Γ^m{}_{ij}` with `∇_{e_i} e_j = Γ^m{}_{ij} e_m`.
#[derive(Clone, Debug)]
pub struct Connection {
    gamma: Box<[[[f64; DIM]; DIM]; DIM]>,
}

impl Connection {
    pub fn coeff(&self, m: usize, i: usize, j: usize) -> f64 {
        self.gamma[m][i][j]
    }

    /// Covariant derivative of an invariant (0,3)-tensor:
    /// `(∇_a T)_{ijk} = −Γ^p_{ai} T_{pjk} − Γ^p_{aj} T_{ipk} − Γ^p_{ak} T_{ijp}`.
    pub fn cov_tensor3(
        &self,
        t: &[[[f64; DIM]; DIM]; DIM],
    ) -> Box<[[[[f64; DIM]; DIM]; DIM]; DIM]> {
        let mut out = Box::new([[[[0.0; DIM]; DIM]; DIM]; DIM]);
        for a in 0..DIM {
            for i in 0..DIM {
                for j in 0..DIM {
                    for k in 0..DIM {
                        let mut s = 0.0;
                        for p in 0..DIM {
                            s -= self.gamma[p][a][i] * t[p][j][k]
                                + self.gamma[p][a][j] * t[i][p][k]
                                + self.gamma[p][a][k] * t[i][j][p];
                        }
                        out[a][i][j][k] = s;
                    }
                }
            }
        }
        out
    }

    /// Covariant derivative of an invariant (1,1)-tensor (e.g. `J`):
    /// `(∇_a J)^m{}_b = Γ^m_{ap} J^p_b − Γ^p_{ab} J^m_p`.
    pub fn cov_endo(&self, j: &Mat6) -> Box<[[[f64; DIM]; DIM]; DIM]> {
        let mut out = Box::new([[[0.0; DIM]; DIM]; DIM]);
        for a in 0..DIM {
            for m in 0..DIM {
                for b in 0..DIM {
                    let mut s = 0.0;
                    for p in 0..DIM {
                        s += self.gamma[m][a][p] * j[(p, b)] - self.gamma[p][a][b] * j[(m, p)];
                    }
                    out[a][m][b] = s;
                }
            }
        }
        out
    }

    /// Covariant derivative of an invariant (0,2)-tensor.
    pub fn cov_2tensor(&self, g: &Mat6) -> Box<[[[f64; DIM]; DIM]; DIM]> {
        let mut out = Box::new([[[0.0; DIM]; DIM]; DIM]);
        for a in 0..DIM {
            for i in 0..DIM {
                for j in 0..DIM {
                    let mut s = 0.0;
                    for p in 0..DIM {
                        s -= self.gamma[p][a][i] * g[(p, j)] + self.gamma[p][a][j] * g[(i, p)];
                    }
                    out[a][i][j] = s;
                }
            }
        }
        out
    }

    /// Frame torsion `T^m{}_{ij} = Γ^m_{ij} − Γ^m_{ji} − c^m_{ij}`.
    pub fn torsion(&self, model: &LieModel) -> TmValued2Form {
        TmValued2Form::from_fn(|m, i, j| {
            self.gamma[m][i][j] - self.gamma[m][j][i] - model.c[m][i][j]
        })
    }
}

/// Levi-Civita connection of an invariant metric by the Koszul formula:
/// `2g(∇_X Y, Z) = g([X,Y],Z) − g([Y,Z],X) + g([Z,X],Y)`.
pub fn levi_civita(g: &Metric, model: &LieModel) -> Connection {
    let gm = g.matrix();
    let ginv = g.inverse();
    let c = &model.c;
    let mut lowered = [[[0.0; DIM]; DIM]; DIM]; // 2·g(∇_i e_j, e_k)
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                let mut s = 0.0;
                for p in 0..DIM {
                    s += c[p][i][j] * gm[(p, k)] - c[p][j][k] * gm[(p, i)]
                        + c[p][k][i] * gm[(p, j)];
                }
                lowered[i][j][k] = s;
            }
        }
    }
    let mut gamma = Box::new([[[0.0; DIM]; DIM]; DIM]);
    for m in 0..DIM {
        for i in 0..DIM {
            for j in 0..DIM {
                let mut s = 0.0;
                for k in 0..DIM {
                    s += 0.5 * ginv[(m, k)] * lowered[i][j][k];
                }
                gamma[m][i][j] = s;
            }
        }
    }
    Connection { gamma }
}

/// Curvature data of a connection on a Lie model, in the conventions
/// `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_{[X,Y]} Z`,
/// `R_{ijkl} = R_{ij}{}^p{}_l g_{pk}`, `R_{ik} = g^{jl} R_{ijkl}`.
#[derive(Clone, Debug)]
pub struct CurvatureData {
    pub riemann: Box<[[[[f64; DIM]; DIM]; DIM]; DIM]>,
    pub ricci: Mat6,
    pub scalar: f64,
}

pub fn curvature(conn: &Connection, g: &Metric, model: &LieModel) -> CurvatureData {
    let gm = g.matrix();
    let ginv = g.inverse();
    let ga = &conn.gamma;
    let c = &model.c;
    let mut rm_ul = [[[[0.0; DIM]; DIM]; DIM]; DIM]; // R_{ij}{}^m{}_l
    for i in 0..DIM {
        for j in 0..DIM {
            for m in 0..DIM {
                for l in 0..DIM {
                    let mut s = 0.0;
                    for a in 0..DIM {
                        s += ga[m][i][a] * ga[a][j][l] - ga[m][j][a] * ga[a][i][l]
                            - c[a][i][j] * ga[m][a][l];
                    }
                    rm_ul[i][j][m][l] = s;
                }
            }
        }
    }
    let mut riemann = Box::new([[[[0.0; DIM]; DIM]; DIM]; DIM]);
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                for l in 0..DIM {
                    let mut s = 0.0;
                    for p in 0..DIM {
                        s += rm_ul[i][j][p][l] * gm[(p, k)];
                    }
                    riemann[i][j][k][l] = s;
                }
            }
        }
    }
    let mut ricci = Mat6::zeros();
    for i in 0..DIM {
        for k in 0..DIM {
            let mut s = 0.0;
            for j in 0..DIM {
                for l in 0..DIM {
                    s += ginv[(j, l)] * riemann[i][j][k][l];
                }
            }
            ricci[(i, k)] = s;
        }
    }
    let mut scalar = 0.0;
    for i in 0..DIM {
        for k in 0..DIM {
            scalar += ginv[(i, k)] * ricci[(i, k)];
        }
    }
    CurvatureData {
        riemann,
        ricci,
        scalar,
    }
}

/// Nijenhuis tensor of an invariant almost-complex structure, stored both as
/// the natural `N^m{}_{jk}` and lowered to the first slot, `N_{ijk} =
/// g(e_i, N(e_j, e_k))`, together with `|N|²` (all indices raised with `g`).
#[derive(Clone, Debug)]
pub struct NijTensor {
    up: TmValued2Form,
    low: Box<[[[f64; DIM]; DIM]; DIM]>,
    norm_sq: f64,
}

impl NijTensor {
    pub fn up(&self) -> &TmValued2Form {
        &self.up
    }
    pub fn low(&self) -> &[[[f64; DIM]; DIM]; DIM] {
        &self.low
    }
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }
}

/// `N(X,Y) = ¼([JX,JY] − J[JX,Y] − J[X,JY] − [X,Y])` on invariant fields.
pub fn nijenhuis(j: &Mat6, g: &Metric, model: &LieModel) -> NijTensor {
    let mut raw = [[[0.0; DIM]; DIM]; DIM];
    for b in 0..DIM {
        let mut eb = Vec6::zeros();
        eb[b] = 1.0;
        let jeb = j * eb;
        for c in (b + 1)..DIM {
            let mut ec = Vec6::zeros();
            ec[c] = 1.0;
            let jec = j * ec;
            let term = (model.bracket(&jeb, &jec) - j * model.bracket(&jeb, &ec)
                - j * model.bracket(&eb, &jec)
                - model.bracket(&eb, &ec))
                * 0.25;
            for m in 0..DIM {
                raw[m][b][c] = term[m];
                raw[m][c][b] = -term[m];
            }
        }
    }
    let up = TmValued2Form::from_fn(|m, b, c| raw[m][b][c]);
    let gm = g.matrix();
    let ginv = g.inverse();
    let mut low = Box::new([[[0.0; DIM]; DIM]; DIM]);
    for i in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                let mut s = 0.0;
                for m in 0..DIM {
                    s += gm[(i, m)] * raw[m][b][c];
                }
                low[i][b][c] = s;
            }
        }
    }
    let mut norm_sq = 0.0;
    for i in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                if low[i][b][c] == 0.0 {
                    continue;
                }
                for p in 0..DIM {
                    for q in 0..DIM {
                        for r in 0..DIM {
                            norm_sq += low[i][b][c]
                                * low[p][q][r]
                                * ginv[(i, p)]
                                * ginv[(b, q)]
                                * ginv[(c, r)];
                        }
                    }
                }
            }
        }
    }
    NijTensor { up, low, norm_sq }
}

/// The projected Levi-Civita (Gauduchon `t = 0`) connection for `dω = 0`:
/// `𝔇_i X^m = ∇_i X^m − g^{mk} N_{ijk} X^j`. Preserves `g`, `ω` and `J`;
/// its torsion equals the Nijenhuis tensor.
pub fn projected_connection(conn: &Connection, n: &NijTensor, g: &Metric) -> Connection {
    let ginv = g.inverse();
    let mut gamma = Box::new([[[0.0; DIM]; DIM]; DIM]);
    for m in 0..DIM {
        for i in 0..DIM {
            for j in 0..DIM {
                let mut s = conn.gamma[m][i][j];
                for k in 0..DIM {
                    s -= ginv[(m, k)] * n.low[i][j][k];
                }
                gamma[m][i][j] = s;
            }
        }
    }
    Connection { gamma }
}

/// `J`-invariant and `J`-anti-invariant parts of a symmetric 2-tensor,
/// `(A^{±J})_{ij} = ½(A_{ij} ± A_{Ji,Jj})`.
pub fn j_split_sym2(a: &Mat6, j: &Mat6) -> (Mat6, Mat6) {
    let twisted = j.transpose() * a * j;
    (0.5 * (a + twisted), 0.5 * (a - twisted))
}

/// The symmetric quadratics `(N²₊)_{ij} = N^{pk}{}_i N_{pkj}` and
/// `(N²₋)_{ij} = N^{kp}{}_i N_{pkj}`.
pub fn n_squared(n: &NijTensor, g: &Metric) -> (Mat6, Mat6) {
    let ginv = g.inverse();
    let low = &n.low;
    // raise the first two slots once
    let mut raised = [[[0.0; DIM]; DIM]; DIM]; // N^{pk}_i
    for p in 0..DIM {
        for k in 0..DIM {
            for i in 0..DIM {
                let mut s = 0.0;
                for a in 0..DIM {
                    for b in 0..DIM {
                        s += ginv[(p, a)] * ginv[(k, b)] * low[a][b][i];
                    }
                }
                raised[p][k][i] = s;
            }
        }
    }
    let mut plus = Mat6::zeros();
    let mut minus = Mat6::zeros();
    for i in 0..DIM {
        for j in 0..DIM {
            let mut sp = 0.0;
            let mut sm = 0.0;
            for p in 0..DIM {
                for k in 0..DIM {
                    sp += raised[p][k][i] * low[p][k][j];
                    sm += raised[k][p][i] * low[p][k][j];
                }
            }
            plus[(i, j)] = sp;
            minus[(i, j)] = sm;
        }
    }
    (plus, minus)
}
