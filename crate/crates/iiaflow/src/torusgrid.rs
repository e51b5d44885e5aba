//! The torus reduction of the flow as a genuine 1-D periodic PDE.
//!
//! Fields `α, β, γ, δ` of `x¹` enter through the closed primitive ansatz
//! `φ = e^α dx^{135} − e^β dx^{146} − dx^{245} − dx^{236} + γ dx^{136} + δ dx^{145}`,
//! stored as `a = 2e^α`, `b = 2e^β`, `c = γ−δ`, `d = γ+δ` on a uniform
//! periodic grid. Two right-hand-side evaluators are provided:
//!
//! * [`rhs_reduced`] — the matrix heat law `∂_t [[a,c],[c,b]] = 4[[a,c],[c,b]]″`
//!   with centered second differences (`d` is constant in time);
//! * [`rhs_general`] — the flow composite `dΛd(|φ|²φ̂)` evaluated by building
//!   the full 6-dimensional Hitchin data at every node and differencing only
//!   the `x¹` dependence.
//!
//! The two agree to `O(h²)`; the general evaluator exercises the
//! exterior-calculus kernel end-to-end on spatially varying data.

use serde::Serialize;
use thiserror::Error;

use crate::forms6::{KForm, Vec6, DIM};
use crate::hitchin;
use crate::liegeom::LieModel;

#[derive(Debug, Clone, Error)]
pub enum GridError {
    #[error("positivity lost at node {node}: ab − c² = {value:.3e} at t = {t:.6e}")]
    PositivityLoss { node: usize, value: f64, t: f64 },
    #[error("grid needs at least 8 nodes, got {0}")]
    TooCoarse(usize),
    #[error("general evaluator failed at node {node}: {msg}")]
    NodeFailure { node: usize, msg: String },
}

/// Fourier specification of one initial field: mean plus
/// `Σ (cos-coeff · cos 2πkx + sin-coeff · sin 2πkx)`.
#[derive(Clone, Debug, Serialize)]
pub struct FieldSpec {
    pub mean: f64,
    /// `(mode, cosine coefficient, sine coefficient)` triplets.
    pub modes: Vec<(usize, f64, f64)>,
}

impl FieldSpec {
    pub fn constant(mean: f64) -> Self {
        FieldSpec {
            mean,
            modes: Vec::new(),
        }
    }

    pub fn sample(&self, x: f64) -> f64 {
        let mut v = self.mean;
        for &(k, ck, sk) in &self.modes {
            let arg = 2.0 * std::f64::consts::PI * k as f64 * x;
            v += ck * arg.cos() + sk * arg.sin();
        }
        v
    }
}

/// Periodic samples of the four ansatz fields at time `t`.
#[derive(Clone, Debug)]
pub struct GridState {
    pub t: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

impl GridState {
    pub fn from_fourier(
        n: usize,
        a: &FieldSpec,
        b: &FieldSpec,
        c: &FieldSpec,
        d: &FieldSpec,
    ) -> Result<Self, GridError> {
        if n < 8 {
            return Err(GridError::TooCoarse(n));
        }
        let sample = |s: &FieldSpec| (0..n).map(|i| s.sample(i as f64 / n as f64)).collect();
        let state = GridState {
            t: 0.0,
            a: sample(a),
            b: sample(b),
            c: sample(c),
            d: sample(d),
        };
        state.validate()?;
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n() as f64
    }

    /// The positivity field `ab − c²` (equals `|φ|⁴/4`).
    pub fn det_field(&self) -> Vec<f64> {
        (0..self.n())
            .map(|i| self.a[i] * self.b[i] - self.c[i] * self.c[i])
            .collect()
    }

    pub fn min_det(&self) -> f64 {
        self.det_field().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// `u = log|φ|² = log(2√(ab − c²))` per node.
    pub fn u_field(&self) -> Vec<f64> {
        self.det_field()
            .into_iter()
            .map(|v| (2.0 * v.sqrt()).ln())
            .collect()
    }

    pub fn validate(&self) -> Result<(), GridError> {
        for (i, v) in self.det_field().into_iter().enumerate() {
            if !(v > 0.0) {
                return Err(GridError::PositivityLoss {
                    node: i,
                    value: v,
                    t: self.t,
                });
            }
        }
        Ok(())
    }

    /// The ansatz 3-form at node `i`:
    /// `(a/2)e^{135} − (b/2)e^{146} − e^{245} − e^{236} + γe^{136} + δe^{145}`
    /// with `γ = (c+d)/2`, `δ = (d−c)/2`.
    pub fn phi_at(&self, i: usize) -> KForm {
        let gamma = 0.5 * (self.c[i] + self.d[i]);
        let delta = 0.5 * (self.d[i] - self.c[i]);
        KForm::from_terms(
            3,
            &[
                (&[1, 3, 5], 0.5 * self.a[i]),
                (&[1, 4, 6], -0.5 * self.b[i]),
                (&[2, 4, 5], -1.0),
                (&[2, 3, 6], -1.0),
                (&[1, 3, 6], gamma),
                (&[1, 4, 5], delta),
            ],
        )
    }
}

fn second_diff(f: &[f64], i: usize, h: f64) -> f64 {
    let n = f.len();
    (f[(i + 1) % n] - 2.0 * f[i] + f[(i + n - 1) % n]) / (h * h)
}

fn first_diff(f: &[f64], i: usize, h: f64) -> f64 {
    let n = f.len();
    (f[(i + 1) % n] - f[(i + n - 1) % n]) / (2.0 * h)
}

/// The reduced evaluator: `∂_t a = 4a″`, `∂_t b = 4b″`, `∂_t c = 4c″`,
/// `∂_t d = 0`, with centered second differences.
pub fn rhs_reduced(s: &GridState) -> [Vec<f64>; 3] {
    let n = s.n();
    let h = s.h();
    let mut da = vec![0.0; n];
    let mut db = vec![0.0; n];
    let mut dc = vec![0.0; n];
    for i in 0..n {
        da[i] = 4.0 * second_diff(&s.a, i, h);
        db[i] = 4.0 * second_diff(&s.b, i, h);
        dc[i] = 4.0 * second_diff(&s.c, i, h);
    }
    [da, db, dc]
}

/// The general evaluator: builds `|φ|²φ̂` through the Hitchin construction at
/// every node, applies `d` (finite difference in `x¹` on the coefficient
/// fields), the contraction `Λ`, and `d` again, then reads the result back
/// through the ansatz. Returns `(ȧ, ḃ, ċ, ḋ)`; `ḋ` vanishes identically.
pub fn rhs_general(s: &GridState) -> Result<[Vec<f64>; 4], GridError> {
    let n = s.n();
    let h = s.h();
    let omega = LieModel::torus();
    let ctx = omega.omega();
    // W = |φ|²φ̂ per node
    let mut w_field: Vec<KForm> = Vec::with_capacity(n);
    for i in 0..n {
        let phi = s.phi_at(i);
        let data = hitchin::build(&phi, ctx).map_err(|e| GridError::NodeFailure {
            node: i,
            msg: e.to_string(),
        })?;
        w_field.push(data.phi_hat().scaled(data.norm_sq()));
    }
    let e1 = KForm::basis(&[1]);
    // dW = dx¹ ∧ ∂₁W, then Λ, then d again
    let mut lam_dw: Vec<KForm> = Vec::with_capacity(n);
    for i in 0..n {
        let mut dw_di = KForm::zero(3);
        for p in 0..w_field[i].coeffs().len() {
            let deriv = (w_field[(i + 1) % n].coeffs()[p] - w_field[(i + n - 1) % n].coeffs()[p])
                / (2.0 * h);
            dw_di.coeffs_mut()[p] = deriv;
        }
        let dw = e1.wedge(&dw_di).expect("1+3<=6");
        lam_dw.push(ctx.lambda(&dw));
    }
    let mut da = vec![0.0; n];
    let mut db = vec![0.0; n];
    let mut dc = vec![0.0; n];
    let mut dd = vec![0.0; n];
    for i in 0..n {
        let mut mu_di = KForm::zero(2);
        for p in 0..lam_dw[i].coeffs().len() {
            let deriv = (lam_dw[(i + 1) % n].coeffs()[p] - lam_dw[(i + n - 1) % n].coeffs()[p])
                / (2.0 * h);
            mu_di.coeffs_mut()[p] = deriv;
        }
        let rhs = e1.wedge(&mu_di).expect("1+2<=6");
        // read back: ∂_tφ = ∂_t(a/2)e^{135} − ∂_t(b/2)e^{146} + γ̇e^{136} + δ̇e^{145}
        let gamma_dot = rhs.coeff(&[1, 3, 6]);
        let delta_dot = rhs.coeff(&[1, 4, 5]);
        da[i] = 2.0 * rhs.coeff(&[1, 3, 5]);
        db[i] = -2.0 * rhs.coeff(&[1, 4, 6]);
        dc[i] = gamma_dot - delta_dot;
        dd[i] = gamma_dot + delta_dot;
        // the evaluator must stay in the ansatz span exactly
        let mut residual = rhs.clone();
        for (idx, v) in [
            ([1usize, 3, 5], rhs.coeff(&[1, 3, 5])),
            ([1, 4, 6], rhs.coeff(&[1, 4, 6])),
            ([1, 3, 6], gamma_dot),
            ([1, 4, 5], delta_dot),
        ] {
            let mut m = KForm::zero(3);
            m.set_coeff(&idx, v);
            residual = residual.sub(&m);
        }
        if residual.norm_inf() > 1e-10 * rhs.norm_inf().max(1.0) {
            return Err(GridError::NodeFailure {
                node: i,
                msg: format!("rhs left the ansatz span ({:.3e})", residual.norm_inf()),
            });
        }
    }
    Ok([da, db, dc, dd])
}

/// One RK4 step of the reduced system; `d` is carried over bit-identically.
/// The step is validated for positivity before being returned.
pub fn step_rk4(s: &GridState, dt: f64) -> Result<GridState, GridError> {
    let n = s.n();
    let stage = |base: &GridState, k: &[Vec<f64>; 3], w: f64| -> GridState {
        let mut out = base.clone();
        for i in 0..n {
            out.a[i] = s.a[i] + w * k[0][i];
            out.b[i] = s.b[i] + w * k[1][i];
            out.c[i] = s.c[i] + w * k[2][i];
        }
        out
    };
    let k1 = rhs_reduced(s);
    let s2 = stage(s, &k1, dt / 2.0);
    let k2 = rhs_reduced(&s2);
    let s3 = stage(s, &k2, dt / 2.0);
    let k3 = rhs_reduced(&s3);
    let s4 = stage(s, &k3, dt);
    let k4 = rhs_reduced(&s4);
    let mut out = s.clone();
    out.t = s.t + dt;
    for i in 0..n {
        out.a[i] = s.a[i] + dt / 6.0 * (k1[0][i] + 2.0 * k2[0][i] + 2.0 * k3[0][i] + k4[0][i]);
        out.b[i] = s.b[i] + dt / 6.0 * (k1[1][i] + 2.0 * k2[1][i] + 2.0 * k3[1][i] + k4[1][i]);
        out.c[i] = s.c[i] + dt / 6.0 * (k1[2][i] + 2.0 * k2[2][i] + 2.0 * k3[2][i] + k4[2][i]);
    }
    out.validate()?;
    Ok(out)
}

/// Pointwise `|N|²` from the closed-form reduction:
/// `16e^{−5u}(ab(2c′ − cb′/b − ca′/a)² + ((ab−c²)/ab)(ab′ − a′b)²)`,
/// with centered first differences. Zero exactly when `a`, `b`, `c` are
/// pointwise proportional.
pub fn nijenhuis_norm(s: &GridState) -> Vec<f64> {
    let n = s.n();
    let h = s.h();
    let u = s.u_field();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let (a, b, c) = (s.a[i], s.b[i], s.c[i]);
        let ap = first_diff(&s.a, i, h);
        let bp = first_diff(&s.b, i, h);
        let cp = first_diff(&s.c, i, h);
        let term1 = a * b * (2.0 * cp - c * bp / b - c * ap / a).powi(2);
        let term2 = (a * b - c * c) / (a * b) * (a * bp - ap * b).powi(2);
        out[i] = 16.0 * (-5.0 * u[i]).exp() * (term1 + term2);
    }
    out
}

/// Frame-based oracle for `|N|²` at one node: the Nijenhuis tensor of the
/// coordinate frame computed from the finite-difference derivative of the
/// pointwise `J` field, lowered with the pointwise metric.
pub fn nijenhuis_norm_frame_oracle(s: &GridState, i: usize) -> Result<f64, GridError> {
    let n = s.n();
    let h = s.h();
    let ctx = LieModel::torus();
    let build = |k: usize| {
        hitchin::build(&s.phi_at(k % n), ctx.omega()).map_err(|e| GridError::NodeFailure {
            node: k % n,
            msg: e.to_string(),
        })
    };
    let dm = build(i + n - 1)?;
    let d0 = build(i)?;
    let dp = build(i + 1)?;
    let j = d0.j();
    let jprime = (dp.j() - dm.j()) / (2.0 * h);
    // N(∂_j, ∂_k) for coordinate fields with x¹-dependent J:
    // N^m_{jk} = ¼(J¹_j (J^m_k)′ − J¹_k (J^m_j)′ + δ¹_k J^m_p (J^p_j)′ − δ¹_j J^m_p (J^p_k)′)
    let mut low = [[[0.0; DIM]; DIM]; DIM];
    for jx in 0..DIM {
        for kx in 0..DIM {
            let mut nv = Vec6::zeros();
            for m in 0..DIM {
                let mut v = j[(0, jx)] * jprime[(m, kx)] - j[(0, kx)] * jprime[(m, jx)];
                if kx == 0 {
                    for p in 0..DIM {
                        v += j[(m, p)] * jprime[(p, jx)];
                    }
                }
                if jx == 0 {
                    for p in 0..DIM {
                        v -= j[(m, p)] * jprime[(p, kx)];
                    }
                }
                nv[m] = 0.25 * v;
            }
            let lowered = d0.g().matrix() * nv;
            for m in 0..DIM {
                low[m][jx][kx] = lowered[m];
            }
        }
    }
    let ginv = d0.g().inverse();
    let mut nsq = 0.0;
    for x in 0..DIM {
        for y in 0..DIM {
            for z in 0..DIM {
                if low[x][y][z] == 0.0 {
                    continue;
                }
                for p in 0..DIM {
                    for q in 0..DIM {
                        for r in 0..DIM {
                            nsq += low[x][y][z]
                                * low[p][q][r]
                                * ginv[(x, p)]
                                * ginv[(y, q)]
                                * ginv[(z, r)];
                        }
                    }
                }
            }
        }
    }
    Ok(nsq)
}

/// One recorded row of a grid run.
#[derive(Clone, Debug, Serialize)]
pub struct GridRow {
    pub t: f64,
    pub sup_nsq: f64,
    pub min_det: f64,
    /// Spatial means of `a`, `b`, `c`.
    pub means: [f64; 3],
    /// Grid sums `h·Σ e^{p·u}` for the configured `p` values.
    pub e_p: Vec<f64>,
    /// First Fourier mode amplitude of `a`.
    pub mode1_amp_a: f64,
    /// `sup |a − ā|`.
    pub sup_dev_a: f64,
}

/// Decay certificate for the first Fourier mode of `a` under the discrete
/// heat flow. The per-unit-time log slope is measured in a window where the
/// amplitude is far above rounding noise, then extrapolated over the whole
/// run; for the continuum law the reference exponent is `−16π² t_max`.
#[derive(Clone, Debug, Serialize)]
pub struct DecayCertificate {
    pub window: (f64, f64),
    pub measured_slope: f64,
    pub extrapolated_log_decay: f64,
    pub reference_log_decay: f64,
    /// `|extrapolated − reference|` in log space.
    pub log_discrepancy: f64,
}

#[derive(Clone, Debug)]
pub struct GridRunResult {
    pub rows: Vec<GridRow>,
    pub final_state: GridState,
    pub decay: Option<DecayCertificate>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridControls {
    /// Time step; defaults to `h²/16` when `None` (stability for
    /// diffusivity 4 with margin).
    pub dt: Option<f64>,
    pub t_max: f64,
    pub p_values: Vec<f64>,
    pub record_every: usize,
}

fn mode1_amplitude(f: &[f64]) -> f64 {
    let n = f.len() as f64;
    let mut re = 0.0;
    let mut im = 0.0;
    for (i, v) in f.iter().enumerate() {
        let arg = 2.0 * std::f64::consts::PI * i as f64 / n;
        re += v * arg.cos();
        im += v * arg.sin();
    }
    2.0 * (re * re + im * im).sqrt() / n
}

fn observe(s: &GridState, p_values: &[f64]) -> GridRow {
    let n = s.n();
    let h = s.h();
    let u = s.u_field();
    let nsq = nijenhuis_norm(s);
    let mean = |f: &[f64]| f.iter().sum::<f64>() / n as f64;
    let abar = mean(&s.a);
    GridRow {
        t: s.t,
        sup_nsq: nsq.into_iter().fold(0.0, f64::max),
        min_det: s.min_det(),
        means: [abar, mean(&s.b), mean(&s.c)],
        e_p: p_values
            .iter()
            .map(|p| u.iter().map(|ui| (p * ui).exp()).sum::<f64>() * h)
            .collect(),
        mode1_amp_a: mode1_amplitude(&s.a),
        sup_dev_a: s
            .a
            .iter()
            .map(|v| (v - abar).abs())
            .fold(0.0, f64::max),
    }
}

/// Integrates the reduced system to `t_max`, recording observables and the
/// decay certificate of the first Fourier mode of `a`.
pub fn run_to_equilibrium(
    s0: &GridState,
    controls: &GridControls,
) -> Result<GridRunResult, GridError> {
    let h = s0.h();
    let dt = controls.dt.unwrap_or(h * h / 16.0);
    let mut state = s0.clone();
    let mut rows = vec![observe(&state, &controls.p_values)];
    // decay window: amplitudes well above noise, well below the initial
    let win = (0.01f64.min(controls.t_max / 4.0), 0.05f64.min(controls.t_max / 2.0));
    let mut win_samples: Vec<(f64, f64)> = Vec::new();
    let mut step_count = 0usize;
    while state.t < controls.t_max - 0.5 * dt {
        state = step_rk4(&state, dt)?;
        step_count += 1;
        if step_count % controls.record_every.max(1) == 0 {
            rows.push(observe(&state, &controls.p_values));
        }
        if state.t >= win.0 && state.t <= win.1 {
            win_samples.push((state.t, mode1_amplitude(&state.a)));
        }
    }
    if rows.last().map(|r| r.t) != Some(state.t) {
        rows.push(observe(&state, &controls.p_values));
    }
    let decay = if win_samples.len() >= 2 {
        let (t1, a1) = win_samples[0];
        let (t2, a2) = *win_samples.last().unwrap();
        if a1 > 0.0 && a2 > 1e-300 && t2 > t1 {
            let slope = (a2.ln() - a1.ln()) / (t2 - t1);
            let extrapolated = slope * controls.t_max;
            let reference = -16.0 * std::f64::consts::PI.powi(2) * controls.t_max;
            Some(DecayCertificate {
                window: win,
                measured_slope: slope,
                extrapolated_log_decay: extrapolated,
                reference_log_decay: reference,
                log_discrepancy: (extrapolated - reference).abs(),
            })
        } else {
            None
        }
    } else {
        None
    };
    Ok(GridRunResult {
        rows,
        final_state: state,
        decay,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_mode_state(n: usize) -> GridState {
        GridState::from_fourier(
            n,
            &FieldSpec {
                mean: 2.0,
                modes: vec![(1, 0.0, 0.2)],
            },
            &FieldSpec::constant(2.0),
            &FieldSpec::constant(0.0),
            &FieldSpec::constant(0.3),
        )
        .unwrap()
    }

    #[test]
    fn eigenfunction_rhs() {
        // a(x) = 2 + sin 2πx: ∂_t a = −16π² sin 2πx up to O(h²)
        let n = 256;
        let s = GridState::from_fourier(
            n,
            &FieldSpec {
                mean: 2.0,
                modes: vec![(1, 0.0, 1.0)],
            },
            &FieldSpec::constant(2.0),
            &FieldSpec::constant(0.0),
            &FieldSpec::constant(0.0),
        )
        .unwrap();
        let [da, _, _] = rhs_reduced(&s);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let x = i as f64 / n as f64;
            let want = -16.0 * std::f64::consts::PI.powi(2) * (2.0 * std::f64::consts::PI * x).sin();
            worst = worst.max((da[i] - want).abs());
        }
        // centered second difference of the k = 1 mode: relative error (2πh)²/12
        let h = s.h();
        let rel = (2.0 * std::f64::consts::PI * h).powi(2) / 12.0;
        assert!(worst < 1.2 * rel * 16.0 * std::f64::consts::PI.powi(2));
        // constant fields are stationary
        let sc = GridState::from_fourier(
            32,
            &FieldSpec::constant(2.0),
            &FieldSpec::constant(1.5),
            &FieldSpec::constant(0.2),
            &FieldSpec::constant(-0.4),
        )
        .unwrap();
        let [da, db, dc] = rhs_reduced(&sc);
        assert!(da.iter().chain(&db).chain(&dc).all(|v| v.abs() < 1e-12));
        let g = rhs_general(&sc).unwrap();
        for f in &g {
            assert!(f.iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn general_matches_reduced_to_second_order() {
        // Richardson: error ratio ≈ 4 when n doubles
        let disc = |n: usize| -> f64 {
            let s = GridState::from_fourier(
                n,
                &FieldSpec {
                    mean: 2.0,
                    modes: vec![(1, 0.1, 0.2), (2, 0.0, 0.05)],
                },
                &FieldSpec {
                    mean: 2.2,
                    modes: vec![(1, -0.15, 0.0)],
                },
                &FieldSpec {
                    mean: 0.1,
                    modes: vec![(1, 0.05, 0.02)],
                },
                &FieldSpec::constant(0.25),
            )
            .unwrap();
            let [da, db, dc] = rhs_reduced(&s);
            let [ga, gb, gc, gd] = rhs_general(&s).unwrap();
            let mut worst: f64 = 0.0;
            for i in 0..n {
                worst = worst.max((da[i] - ga[i]).abs());
                worst = worst.max((db[i] - gb[i]).abs());
                worst = worst.max((dc[i] - gc[i]).abs());
                worst = worst.max(gd[i].abs());
            }
            worst
        };
        let e64 = disc(64);
        let e128 = disc(128);
        let ratio = e64 / e128;
        assert!(
            (3.5..=4.5).contains(&ratio),
            "grid-refinement ratio {ratio} (e64 = {e64:.3e}, e128 = {e128:.3e})"
        );
    }

    #[test]
    fn intermediate_four_form_matches_displayed_shape() {
        // d(|φ|²φ̂) = 2dx^{12}∧(2(e^α)′dx^{35} + (γ−δ)′(dx^{36}−dx^{45}) − 2(e^β)′dx^{46})
        let n = 64;
        let s = GridState::from_fourier(
            n,
            &FieldSpec {
                mean: 2.0,
                modes: vec![(1, 0.1, 0.2)],
            },
            &FieldSpec {
                mean: 2.0,
                modes: vec![(2, 0.05, 0.0)],
            },
            &FieldSpec {
                mean: 0.2,
                modes: vec![(1, 0.0, 0.1)],
            },
            &FieldSpec::constant(0.1),
        )
        .unwrap();
        let ctx = LieModel::torus();
        let h = s.h();
        let i = 17;
        let build = |k: usize| hitchin::build(&s.phi_at(k % n), ctx.omega()).unwrap();
        let w = |k: usize| {
            let d = build(k);
            d.phi_hat().scaled(d.norm_sq())
        };
        let mut dw_di = KForm::zero(3);
        let (wp, wm) = (w(i + 1), w(i + n - 1));
        for p in 0..20 {
            dw_di.coeffs_mut()[p] = (wp.coeffs()[p] - wm.coeffs()[p]) / (2.0 * h);
        }
        let four = KForm::basis(&[1]).wedge(&dw_di).unwrap();
        // only the dx^{12}∧{35,36,45,46} components survive
        for (idx, v) in four.terms() {
            if !(idx[0] == 1 && idx[1] == 2) {
                assert!(v.abs() < 1e-12, "unexpected component {idx:?} = {v}");
            }
        }
        let ap = first_diff(&s.a, i, h);
        let bp = first_diff(&s.b, i, h);
        let cp = first_diff(&s.c, i, h);
        // a = 2e^α: 2·2(e^α)′ = 2a′... displayed coefficient of dx^{1235} is
        // 2·2(e^α)′ = 2·a′; of dx^{1236} is (γ−δ)′ = c′ times 2/2… fixed by
        // W_{236} = |φ|²φ̂_{236} = 2(γ−δ)
        assert!((four.coeff(&[1, 2, 3, 5]) - 2.0 * ap).abs() < 1e-10);
        assert!((four.coeff(&[1, 2, 4, 6]) + 2.0 * bp).abs() < 1e-10);
        assert!((four.coeff(&[1, 2, 3, 6]) - 2.0 * cp).abs() < 1e-10);
        assert!((four.coeff(&[1, 2, 4, 5]) + 2.0 * cp).abs() < 1e-10);
    }

    #[test]
    fn pointwise_hitchin_data_matches_ansatz_closed_forms() {
        // |φ|² = 2√(ab − c²); φ̂ and g have closed forms in (e^α, e^β, γ, δ)
        let n = 32;
        let s = GridState::from_fourier(
            n,
            &FieldSpec {
                mean: 2.2,
                modes: vec![(1, 0.15, 0.1)],
            },
            &FieldSpec {
                mean: 1.9,
                modes: vec![(2, 0.0, -0.1)],
            },
            &FieldSpec {
                mean: 0.25,
                modes: vec![(1, 0.05, 0.0)],
            },
            &FieldSpec::constant(0.4),
        )
        .unwrap();
        let ctx = LieModel::torus();
        for i in [0usize, 5, 19] {
            let data = hitchin::build(&s.phi_at(i), ctx.omega()).unwrap();
            let (av, bv, cv, dvv) = (s.a[i], s.b[i], s.c[i], s.d[i]);
            let det = av * bv - cv * cv;
            assert!((data.norm_sq() - 2.0 * det.sqrt()).abs() < 1e-12);
            // φ̂ = (2/|φ|²)(−e^α(γ+δ)e^{135} + (2e^{α+β} − γ(γ−δ))e^{136}
            //      + (2e^{α+β} + δ(γ−δ))e^{145} + e^β(γ+δ)e^{146} + 2e^α e^{235}
            //      + (γ−δ)e^{236} − (γ−δ)e^{245} − 2e^β e^{246})
            let ea = 0.5 * av;
            let eb = 0.5 * bv;
            let ga = 0.5 * (cv + dvv);
            let de = 0.5 * (dvv - cv);
            let k = 2.0 / data.norm_sq();
            let want = KForm::from_terms(
                3,
                &[
                    (&[1, 3, 5], -k * ea * (ga + de)),
                    (&[1, 3, 6], k * (2.0 * ea * eb - ga * (ga - de))),
                    (&[1, 4, 5], k * (2.0 * ea * eb + de * (ga - de))),
                    (&[1, 4, 6], k * eb * (ga + de)),
                    (&[2, 3, 5], k * 2.0 * ea),
                    (&[2, 3, 6], k * (ga - de)),
                    (&[2, 4, 5], -k * (ga - de)),
                    (&[2, 4, 6], -k * 2.0 * eb),
                ],
            );
            assert!(
                data.phi_hat().max_abs_diff(&want) < 1e-12 * want.norm_inf(),
                "node {i}"
            );
            // metric block form: g = e^{−u}·diag([ab+d²−c², −2d; −2d, 4],
            // [2a, −2c; −2c, 2b], [2a, 2c; 2c, 2b])
            let eu = data.norm_sq();
            let gm = data.g().matrix();
            let blocks = [
                (0, 0, av * bv + dvv * dvv - cv * cv),
                (0, 1, -2.0 * dvv),
                (1, 1, 4.0),
                (2, 2, 2.0 * av),
                (2, 3, -2.0 * cv),
                (3, 3, 2.0 * bv),
                (4, 4, 2.0 * av),
                (4, 5, 2.0 * cv),
                (5, 5, 2.0 * bv),
            ];
            for (r, c, v) in blocks {
                assert!(
                    (gm[(r, c)] - v / eu).abs() < 1e-12,
                    "node {i}: g[{r}{c}]"
                );
            }
            // off-block entries vanish
            for r in 0..2 {
                for c in 2..6 {
                    assert!(gm[(r, c)].abs() < 1e-12);
                }
            }
            for r in 2..4 {
                for c in 4..6 {
                    assert!(gm[(r, c)].abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn nijenhuis_field_zero_iff_proportional_and_matches_oracle() {
        let n = 128;
        // proportional fields: a = b = 2(1+0.1 sin), c = 0.2(1+0.1 sin)
        let prop = GridState {
            t: 0.0,
            a: (0..n)
                .map(|i| {
                    2.0 * (1.0
                        + 0.1 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).sin())
                })
                .collect(),
            b: (0..n)
                .map(|i| {
                    2.0 * (1.0
                        + 0.1 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).sin())
                })
                .collect(),
            c: (0..n)
                .map(|i| {
                    0.2 * (1.0
                        + 0.1 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).sin())
                })
                .collect(),
            d: vec![0.1; n],
        };
        let nf = nijenhuis_norm(&prop);
        assert!(nf.into_iter().fold(0.0f64, f64::max) < 1e-10);
        // constant fields: exactly zero
        let flat = GridState {
            t: 0.0,
            a: vec![2.0; n],
            b: vec![1.5; n],
            c: vec![0.2; n],
            d: vec![0.0; n],
        };
        assert_eq!(nijenhuis_norm(&flat).into_iter().fold(0.0f64, f64::max), 0.0);
        // sine bump against the frame oracle at x = 0.25 under refinement
        let state = |n: usize| {
            GridState::from_fourier(
                n,
                &FieldSpec {
                    mean: 2.0,
                    modes: vec![(1, 0.0, 1.0)],
                },
                &FieldSpec::constant(2.0),
                &FieldSpec::constant(0.0),
                &FieldSpec::constant(0.0),
            )
            .unwrap()
        };
        let diff_at = |n: usize| {
            let s = state(n);
            let i = n / 4;
            let formula = nijenhuis_norm(&s)[i];
            let oracle = nijenhuis_norm_frame_oracle(&s, i).unwrap();
            (formula - oracle).abs()
        };
        let d64 = diff_at(64);
        let d128 = diff_at(128);
        assert!(d128 < d64 / 3.0, "frame oracle not converging: {d64:.3e} → {d128:.3e}");
        // and the values agree to O(h²) scale at n = 128
        let s = state(128);
        let i = 32;
        let formula = nijenhuis_norm(&s)[i];
        let oracle = nijenhuis_norm_frame_oracle(&s, i).unwrap();
        assert!((formula - oracle).abs() < 0.05 * formula.abs().max(0.01));
    }

    #[test]
    fn heat_run_conserves_means_and_decays() {
        let n = 64;
        let s0 = single_mode_state(n);
        let controls = GridControls {
            dt: None,
            t_max: 0.1,
            p_values: vec![1.0, -1.0, 0.5],
            record_every: 64,
        };
        let run = run_to_equilibrium(&s0, &controls).unwrap();
        let first = &run.rows[0];
        let last = run.rows.last().unwrap();
        // mass conservation
        for k in 0..3 {
            assert!(
                (first.means[k] - last.means[k]).abs() < 1e-10,
                "mean {k} drifted"
            );
        }
        // d bit-identical
        assert_eq!(s0.d, run.final_state.d);
        // min positivity nondecreasing (up to rounding)
        let mut prev = run.rows[0].min_det;
        for row in &run.rows {
            assert!(row.min_det >= prev - 1e-9);
            prev = prev.max(row.min_det);
        }
        // E_p monotone: p ∈ (0,1] nondecreasing, p = −1 nonincreasing
        for w in run.rows.windows(2) {
            assert!(w[1].e_p[0] >= w[0].e_p[0] - 1e-10);
            assert!(w[1].e_p[1] <= w[0].e_p[1] + 1e-10);
            assert!(w[1].e_p[2] >= w[0].e_p[2] - 1e-10);
        }
        // decay certificate close to the continuum rate
        let cert = run.decay.expect("window sampled");
        let rel = (cert.measured_slope + 16.0 * std::f64::consts::PI.powi(2)).abs()
            / (16.0 * std::f64::consts::PI.powi(2));
        assert!(rel < 2e-3, "decay slope off by {rel:.3e}");
        // amplitude decayed by the measured window factor
        assert!(last.mode1_amp_a < first.mode1_amp_a);
    }

    #[test]
    fn positivity_loss_is_reported() {
        let n = 16;
        let bad = GridState {
            t: 0.0,
            a: vec![1.0; n],
            b: vec![1.0; n],
            c: vec![1.5; n], // ab − c² < 0
            d: vec![0.0; n],
        };
        assert!(matches!(
            bad.validate(),
            Err(GridError::PositivityLoss { .. })
        ));
    }
}
