//! Tangent-valued 2-forms `T^m{}_{jk}` and their type decomposition under an
//! almost-complex structure, `A²(TM) = A^{1,1} ⊕ A^{2,0} ⊕ A^{0,2}`.

use super::{Mat6, DIM};

/// Rank-3 array `T^m{}_{jk}`, antisymmetric in `(j,k)`. Houses the Nijenhuis
/// tensor, torsions and the Gauduchon tensors as roles.
#[derive(Clone, Debug)]
pub struct TmValued2Form {
    c: Box<[[[f64; DIM]; DIM]; DIM]>,
}

impl TmValued2Form {
    pub fn zero() -> Self {
        TmValued2Form {
            c: Box::new([[[0.0; DIM]; DIM]; DIM]),
        }
    }

    /// Builds from `f(m, j, k)` evaluated on `j < k`; the `(j,k)` antisymmetry
    /// is imposed.
    pub fn from_fn(mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zero();
        for m in 0..DIM {
            for j in 0..DIM {
                for k in (j + 1)..DIM {
                    let v = f(m, j, k);
                    t.c[m][j][k] = v;
                    t.c[m][k][j] = -v;
                }
            }
        }
        t
    }

    pub fn get(&self, m: usize, j: usize, k: usize) -> f64 {
        self.c[m][j][k]
    }

    pub fn comps(&self) -> &[[[f64; DIM]; DIM]; DIM] {
        &self.c
    }

    pub fn norm_inf(&self) -> f64 {
        let mut r: f64 = 0.0;
        for m in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    r = r.max(self.c[m][j][k].abs());
                }
            }
        }
        r
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut t = self.clone();
        for m in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    t.c[m][j][k] += o.c[m][j][k];
                }
            }
        }
        t
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut t = self.clone();
        for m in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    t.c[m][j][k] *= s;
                }
            }
        }
        t
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        let mut r: f64 = 0.0;
        for m in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    r = r.max((self.c[m][j][k] - o.c[m][j][k]).abs());
                }
            }
        }
        r
    }

    /// The involution `(MΨ)^m{}_{jk} = Ψ^m{}_{Jj,Jk}`.
    pub fn m_involution(&self, j: &Mat6) -> Self {
        Self::from_fn(|m, b, c| {
            let mut s = 0.0;
            for p in 0..DIM {
                for q in 0..DIM {
                    s += self.c[m][p][q] * j[(p, b)] * j[(q, c)];
                }
            }
            s
        })
    }

    /// The map `(TΨ)(X,Y) = −J Ψ(JX,Y)`; an involution on the `M = −1`
    /// eigenspace separating `A^{2,0}` (fixed) from `A^{0,2}` (negated).
    fn t_involution(&self, j: &Mat6) -> Self {
        let mut t = Self::zero();
        for m in 0..DIM {
            for b in 0..DIM {
                for c in 0..DIM {
                    let mut s = 0.0;
                    for p in 0..DIM {
                        for q in 0..DIM {
                            s -= j[(m, p)] * self.c[p][q][c] * j[(q, b)];
                        }
                    }
                    t.c[m][b][c] = s;
                }
            }
        }
        t
    }

    /// Splits into `(T^{1,1}, T^{2,0}, T^{0,2})` relative to `J`.
    ///
    /// The split is metric-independent; the three projectors are idempotent,
    /// mutually annihilating, and sum to the identity.
    pub fn type_split(&self, j: &Mat6) -> (Self, Self, Self) {
        let mj = self.m_involution(j);
        let plus = self.add(&mj).scaled(0.5);
        let minus = self.add(&mj.scaled(-1.0)).scaled(0.5);
        let tm = minus.t_involution(j);
        let t20 = minus.add(&tm).scaled(0.5);
        let t02 = minus.add(&tm.scaled(-1.0)).scaled(0.5);
        (plus, t20, t02)
    }
}
