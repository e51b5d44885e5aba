//! Acceptance suite: every criterion of the engine, run end to end at its
//! stated tolerance, one pass/fail line per criterion.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::Instant;

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use iiaflow::flow::{
    self, monotonicity_verdicts, oracle_compare, run_flow, FlowModel, FlowOutcome, ObsRow,
    RunControls,
};
use iiaflow::forms6::{KForm, SymplecticContext, Vec6};
use iiaflow::hitchin::{self, variation_hat};
use iiaflow::liegeom::{identity_suite, LieModel};
use iiaflow::torusgrid::{self, FieldSpec, GridControls, GridState};

fn dv(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

fn seeded(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

fn verdict(name: &str, pass: bool, detail: &str) {
    println!(
        "[{}] criterion {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {name} failed: {detail}");
}

/// Criterion 1: nilmanifold exact solution. From (a₀, b₀) = (0, 0.3) with
/// RK4 at dt = 1e−3 to t = 1: a(1) = 8.0 within 1e−8, b(1) = 0.3 within
/// 1e−12, |N|²(t) matches (1 + a − b²)^{−3/2} within 1e−6 at 10 checkpoints,
/// in under a second.
#[test]
fn criterion_1_nilmanifold_exact_solution() {
    let start = Instant::now();
    let fm = FlowModel::builtin("nil").unwrap();
    let controls = RunControls {
        dt: 1e-3,
        t_max: 1.0,
        p_values: vec![1.0, -1.0],
        record_every: 100, // 10 checkpoints over 1000 steps
    };
    let run = run_flow(&fm, &dv(&[0.0, 0.3]), &controls).unwrap();
    let elapsed = start.elapsed();
    let last = run.rows.last().unwrap();
    let a_err = (last.params[0] - 8.0).abs();
    let b_err = (last.params[1] - 0.3).abs();
    let mut nsq_err = 0.0f64;
    let mut checkpoints = 0;
    for row in run.rows.iter().skip(1) {
        let want = flow::oracle::nil_nsq(&[0.0, 0.3], row.t);
        nsq_err = nsq_err.max((row.norm_n_sq - want).abs());
        checkpoints += 1;
    }
    let pass = a_err < 1e-8
        && b_err < 1e-12
        && nsq_err < 1e-6
        && checkpoints >= 10
        && elapsed.as_secs_f64() < 1.0;
    verdict(
        "1 (nil exact solution)",
        pass,
        &format!(
            "a(1) err {a_err:.2e}, b err {b_err:.2e}, |N|^2 err {nsq_err:.2e} over {checkpoints} checkpoints, {:.2} s",
            elapsed.as_secs_f64()
        ),
    );
}

/// Criterion 2: solvmanifold singularity for (1, 1, 0.5, 0.4): the detected
/// bracket contains T = (1/32λ²)(log α₀δ₀ − log β₀γ₀)/(α₀δ₀ − β₀γ₀) with
/// width < 1% of T; state matches closed forms within 1e−6 up to 0.9T;
/// |N|² ≥ 4λ² − 1e−8 throughout; ‖R^{−J}‖ < 1e−3 at 0.999T. Under 5 s.
#[test]
fn criterion_2_solvmanifold_singularity() {
    let start = Instant::now();
    let fm = FlowModel::builtin("solv").unwrap();
    let p0 = [1.0, 1.0, 0.5, 0.4];
    let t_blow = flow::oracle::solv_blowup_time(&p0);
    let controls = RunControls {
        dt: 1e-3,
        t_max: 10.0 * t_blow,
        p_values: vec![1.0, -1.0],
        record_every: 1,
    };
    let run = run_flow(&fm, &dv(&p0), &controls).unwrap();
    let rep = oracle_compare(&fm, &p0, &run, 0.9 * t_blow).unwrap();
    let bracket_ok = rep.bracket_contains_prediction == Some(true)
        && rep.bracket_width_rel.map_or(false, |w| w < 0.01);
    let state_ok = rep.max_param_dev < 1e-6;
    let l2 = LieModel::solv_lambda().powi(2);
    let nsq_ok = run.rows.iter().all(|r| r.norm_n_sq >= 4.0 * l2 - 1e-8);
    // harmonic limit: ‖R^{−J}‖ at 0.999T along the trajectory
    let t_probe = 0.999 * t_blow;
    let probe_controls = RunControls {
        dt: 1e-3,
        t_max: t_probe,
        p_values: vec![],
        record_every: usize::MAX,
    };
    let probe = run_flow(&fm, &dv(&p0), &probe_controls).unwrap();
    let state = &probe.final_state;
    let g = state.data.g();
    let lc = iiaflow::liegeom::levi_civita(g, fm.model());
    let cur = iiaflow::liegeom::curvature(&lc, g, fm.model());
    let (_, rmj) = iiaflow::liegeom::j_split_sym2(&cur.ricci, state.data.j());
    let ginv = g.inverse();
    let mut rmj_norm = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            for a in 0..6 {
                for b in 0..6 {
                    rmj_norm += rmj[(i, j)] * rmj[(a, b)] * ginv[(i, a)] * ginv[(j, b)];
                }
            }
        }
    }
    let rmj_norm = rmj_norm.sqrt();
    let elapsed = start.elapsed();
    let pass = bracket_ok
        && state_ok
        && nsq_ok
        && rmj_norm < 1e-3
        && matches!(probe.outcome, FlowOutcome::Completed)
        && elapsed.as_secs_f64() < 5.0;
    verdict(
        "2 (solv singularity)",
        pass,
        &format!(
            "bracket {:?} vs T = {t_blow:.6}, width/T = {:.2e}, state dev {:.2e}, |N|^2 bound {}, ‖R^-J‖(0.999T) = {rmj_norm:.2e}, {:.2} s",
            rep.detected_bracket,
            rep.bracket_width_rel.unwrap_or(f64::NAN),
            rep.max_param_dev,
            nsq_ok,
            elapsed.as_secs_f64()
        ),
    );
}

/// Criterion 3: solvmanifold self-expander at α₀=β₀=γ₀=δ₀=√2/2:
/// ‖J(t) − J(0)‖ < 1e−8 and ||N|² − 4λ²| < 1e−8 for all t ≤ 0.9T.
#[test]
fn criterion_3_solv_self_expander() {
    let fm = FlowModel::builtin("solv").unwrap();
    let s = 0.5f64.sqrt();
    let p0 = [s, s, s, s];
    let t_blow = flow::oracle::solv_blowup_time(&p0);
    let l2 = LieModel::solv_lambda().powi(2);
    assert!((4.0 * l2 - 3.7049).abs() < 1e-3, "4λ² ≈ 3.7049 sanity");
    let controls = RunControls {
        dt: 1e-3,
        t_max: 0.9 * t_blow,
        p_values: vec![1.0],
        record_every: 1,
    };
    let run = run_flow(&fm, &dv(&p0), &controls).unwrap();
    let j0 = *fm.make_state(0.0, &dv(&p0)).unwrap().data.j();
    let mut j_dev = 0.0f64;
    let mut nsq_dev = 0.0f64;
    for row in &run.rows {
        nsq_dev = nsq_dev.max((row.norm_n_sq - 4.0 * l2).abs());
        let st = fm.make_state(row.t, &dv(&row.params)).unwrap();
        j_dev = j_dev.max((st.data.j() - j0).abs().max());
    }
    let pass = j_dev < 1e-8 && nsq_dev < 1e-8 && matches!(run.outcome, FlowOutcome::Completed);
    verdict(
        "3 (solv self-expander)",
        pass,
        &format!("max ‖J(t)−J(0)‖ = {j_dev:.2e}, max ||N|^2 − 4λ²| = {nsq_dev:.2e} up to 0.9T"),
    );
}

/// Criterion 4: torus convergence at n = 128 with 0.1-amplitude single-mode
/// data: evaluator discrepancy shrinks by a factor in [3.5, 4.5] from
/// n = 64 to n = 128; the first Fourier mode of `a` decays by e^{−16π²}
/// within 5% relative over t = 1 (certified through the measured discrete
/// decay rate — the amplitude itself is far below f64 resolution);
/// terminal sup|N|² < 1e−4; `d` constant to 1e−12. Under 30 s.
#[test]
fn criterion_4_torus_convergence() {
    let start = Instant::now();
    let init = |n: usize| {
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
    };
    // two-evaluator Richardson between n = 64 and n = 128
    let disc = |n: usize| -> f64 {
        let s = init(n);
        let [da, db, dc] = torusgrid::rhs_reduced(&s);
        let [ga, gb, gc, _] = torusgrid::rhs_general(&s).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            worst = worst
                .max((da[i] - ga[i]).abs())
                .max((db[i] - gb[i]).abs())
                .max((dc[i] - gc[i]).abs());
        }
        worst
    };
    let ratio = disc(64) / disc(128);
    let ratio_ok = (3.5..=4.5).contains(&ratio);
    // the n = 128 run to t = 1
    let s0 = init(128);
    let d0 = s0.d.clone();
    let controls = GridControls {
        dt: None, // h²/16
        t_max: 1.0,
        p_values: vec![1.0, -1.0],
        record_every: 1024,
    };
    let run = torusgrid::run_to_equilibrium(&s0, &controls).unwrap();
    let cert = run.decay.as_ref().expect("decay certificate");
    // e^{−16π²} within 5%: |Δlog| ≤ log(1.05)
    let decay_ok = cert.log_discrepancy <= 1.05f64.ln();
    // measured amplitude at t = 1 is at the rounding floor, consistent with
    // the certified total decay
    let final_amp = run.rows.last().unwrap().mode1_amp_a;
    let amp_floor_ok = final_amp < 1e-10;
    let nsq_ok = run.rows.last().unwrap().sup_nsq < 1e-4;
    let d_ok = run.final_state.d == d0
        && run
            .final_state
            .d
            .iter()
            .zip(&d0)
            .all(|(x, y)| (x - y).abs() < 1e-12);
    let elapsed = start.elapsed();
    let pass = ratio_ok && decay_ok && amp_floor_ok && nsq_ok && d_ok && elapsed.as_secs_f64() < 30.0;
    verdict(
        "4 (torus convergence)",
        pass,
        &format!(
            "refinement ratio {ratio:.3}, decay log-discrepancy {:.3e} (allowed {:.3e}), final amp {final_amp:.2e}, sup|N|^2 {:.2e}, d constant {d_ok}, {:.1} s",
            cert.log_discrepancy,
            1.05f64.ln(),
            run.rows.last().unwrap().sup_nsq,
            elapsed.as_secs_f64()
        ),
    );
}

/// Criterion 5: identity suite on 100 seeded random points per model family;
/// every identity passes with relative residual < 1e−9.
#[test]
fn criterion_5_identity_suite() {
    let mut rng = seeded(7);
    let mut worst_by_model = Vec::new();
    for name in ["torus", "nil", "solv"] {
        let model = LieModel::by_name(name).unwrap();
        let fm = FlowModel::builtin(name).unwrap();
        let mut merged: Option<iiaflow::liegeom::IdentityReport> = None;
        let mut done = 0;
        while done < 100 {
            let params: DVector<f64> = match name {
                "nil" => dv(&[rng.gen_range(-0.5..2.0), rng.gen_range(-0.8..0.8)]),
                "solv" => dv(&[
                    rng.gen_range(0.3..2.0),
                    rng.gen_range(0.3..2.0),
                    rng.gen_range(0.3..2.0),
                    rng.gen_range(0.3..2.0),
                ]),
                _ => dv(&[
                    rng.gen_range(0.5..3.0),
                    rng.gen_range(0.5..3.0),
                    rng.gen_range(-0.7..0.7),
                    rng.gen_range(-1.0..1.0),
                ]),
            };
            let st = match fm.make_state(0.0, &params) {
                Ok(s) => s,
                Err(_) => continue,
            };
            done += 1;
            let rep = identity_suite(&st.data, &model, 1e-9);
            match merged.as_mut() {
                None => merged = Some(rep),
                Some(m) => m.merge_max(&rep),
            }
        }
        let rep = merged.unwrap();
        for e in &rep.entries {
            assert!(
                e.pass,
                "[FAIL] criterion 5: {name}/{} residual {:.3e}",
                e.name, e.residual
            );
        }
        worst_by_model.push(format!("{name}: {:.2e}", rep.max_residual()));
    }
    verdict(
        "5 (identity suite, 100 points x 3 models)",
        true,
        &format!("max residuals {}", worst_by_model.join(", ")),
    );
}

/// Criterion 6: the Laplacian rewrite, rhs_primary = rhs_laplacian within
/// 1e−9 on 100 random states across all three models.
#[test]
fn criterion_6_laplacian_equivalence() {
    let mut rng = seeded(11);
    let mut worst = 0.0f64;
    for name in ["torus", "nil", "solv"] {
        let fm = FlowModel::builtin(name).unwrap();
        let mut done = 0;
        while done < 100 {
            let params: DVector<f64> = match name {
                "nil" => dv(&[rng.gen_range(-0.5..2.0), rng.gen_range(-0.8..0.8)]),
                "solv" => dv(&[
                    rng.gen_range(0.3..2.0),
                    rng.gen_range(0.3..2.0),
                    rng.gen_range(0.3..2.0),
                    rng.gen_range(0.3..2.0),
                ]),
                _ => dv(&[
                    rng.gen_range(0.5..3.0),
                    rng.gen_range(0.5..3.0),
                    rng.gen_range(-0.7..0.7),
                    rng.gen_range(-1.0..1.0),
                ]),
            };
            let s = match fm.make_state(0.0, &params) {
                Ok(s) => s,
                Err(_) => continue,
            };
            done += 1;
            let a = flow::rhs_primary(&fm, &s);
            let b = flow::rhs_laplacian(&fm, &s);
            worst = worst.max(a.max_abs_diff(&b) / a.norm_inf().max(1.0));
        }
    }
    verdict(
        "6 (laplacian-form equivalence)",
        worst < 1e-9,
        &format!("max relative residual {worst:.2e} over 300 states"),
    );
}

/// Criterion 7: variation of φ̂ against central finite differences
/// (h = 1e−5), relative error < 1e−6 on 100 random primitive perturbations.
#[test]
fn criterion_7_variation_formula() {
    let mut rng = seeded(13);
    let ctx = SymplecticContext::standard();
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < 100 {
        let phi = iiaflow::samples::random_stable_phi(&mut rng, 0.25);
        let data = match hitchin::build(&phi, &ctx) {
            Ok(d) => d,
            Err(_) => continue,
        };
        done += 1;
        let mut dphi = KForm::zero(3);
        for c in dphi.coeffs_mut() {
            *c = rng.gen_range(-1.0..1.0);
        }
        let dphi = ctx.primitive_project(&dphi);
        let got = variation_hat(&data, &dphi);
        // central finite difference of the full construction
        let h = 1e-5;
        let mut plus = phi.clone();
        plus.axpy(h, &dphi);
        let mut minus = phi.clone();
        minus.axpy(-h, &dphi);
        let fd = hitchin::build(&plus, &ctx)
            .unwrap()
            .phi_hat()
            .sub(hitchin::build(&minus, &ctx).unwrap().phi_hat())
            .scaled(0.5 / h);
        worst = worst.max(got.max_abs_diff(&fd) / fd.norm_inf().max(1e-6));
    }
    verdict(
        "7 (variation formula vs finite differences)",
        worst < 1e-6,
        &format!("max relative error {worst:.2e} over 100 perturbations"),
    );
}

/// Criterion 8: principal-symbol spectrum (1,1,1,1,0) within 1e−10, in the
/// canonical frame and in random symplectic frames.
#[test]
fn criterion_8_symbol_spectrum() {
    let ctx = SymplecticContext::standard();
    let mut rng = seeded(17);
    let mut worst = 0.0f64;
    let check = |data: &hitchin::HitchinData, xi: &Vec6, worst: &mut f64| {
        let rep = hitchin::symbol_spectrum(data, xi).unwrap();
        let want = [1.0, 1.0, 1.0, 1.0, 0.0];
        for (a, b) in rep.eigenvalues.iter().zip(want.iter()) {
            *worst = worst.max((a - b).abs());
        }
    };
    let canonical = hitchin::build(&iiaflow::samples::phi_canonical(), &ctx).unwrap();
    check(&canonical, &Vec6::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0), &mut worst);
    check(&canonical, &Vec6::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0), &mut worst);
    for _ in 0..20 {
        let phi = iiaflow::samples::random_stable_phi(&mut rng, 0.25);
        let data = match hitchin::build(&phi, &ctx) {
            Ok(d) => d,
            Err(_) => continue,
        };
        let xi = Vec6::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        check(&data, &xi, &mut worst);
    }
    verdict(
        "8 (symbol spectrum)",
        worst < 1e-10,
        &format!("max eigenvalue deviation {worst:.2e}"),
    );
}

/// Criterion 9: monotonicity on the runs of criteria 1–4: u nondecreasing,
/// homogeneous |N|² nonincreasing, E₁ nondecreasing, E₋₁ nonincreasing,
/// min |φ|² bounded below by its initial value; discrete du/dt matches
/// e^u|N|² within the second-order tolerance plus 1e−8.
#[test]
fn criterion_9_monotonicity() {
    let p_values = vec![1.0, -1.0];
    let mut details = Vec::new();
    // homogeneous runs: nil from criterion 1, solv from criteria 2-3
    let runs: Vec<(&str, Vec<ObsRow>)> = vec![
        (
            "nil",
            run_flow(
                &FlowModel::builtin("nil").unwrap(),
                &dv(&[0.0, 0.3]),
                &RunControls {
                    dt: 1e-3,
                    t_max: 1.0,
                    p_values: p_values.clone(),
                    record_every: 1,
                },
            )
            .unwrap()
            .rows,
        ),
        (
            "solv",
            run_flow(
                &FlowModel::builtin("solv").unwrap(),
                &dv(&[1.0, 1.0, 0.5, 0.4]),
                &RunControls {
                    dt: 1e-3,
                    t_max: 0.9 * flow::oracle::solv_blowup_time(&[1.0, 1.0, 0.5, 0.4]),
                    p_values: p_values.clone(),
                    record_every: 1,
                },
            )
            .unwrap()
            .rows,
        ),
        (
            "solv-critical",
            run_flow(
                &FlowModel::builtin("solv").unwrap(),
                &dv(&[0.5f64.sqrt(); 4]),
                &RunControls {
                    dt: 1e-3,
                    t_max: 0.9 * flow::oracle::solv_blowup_time(&[0.5f64.sqrt(); 4]),
                    p_values: p_values.clone(),
                    record_every: 1,
                },
            )
            .unwrap()
            .rows,
        ),
    ];
    for (name, rows) in &runs {
        let v = monotonicity_verdicts(rows, &p_values);
        let ok = v.u_nondecreasing
            && v.nsq_nonincreasing
            && v.e1_nondecreasing
            && v.eminus1_nonincreasing
            && v.min_norm_bound
            && v.du_dt_ok
            && v.dnsq_dt_ok;
        assert!(
            ok,
            "[FAIL] criterion 9 on {name}: {v:?}"
        );
        details.push(format!(
            "{name}: du/dt dev {:.1e}, d|N|^2/dt dev {:.1e}",
            v.du_dt_residual, v.dnsq_dt_residual
        ));
    }
    // torus grid run: E_p monotonicity and the minimum-norm bound
    let s0 = GridState::from_fourier(
        64,
        &FieldSpec {
            mean: 2.0,
            modes: vec![(1, 0.0, 0.2)],
        },
        &FieldSpec::constant(2.0),
        &FieldSpec::constant(0.0),
        &FieldSpec::constant(0.3),
    )
    .unwrap();
    let run = torusgrid::run_to_equilibrium(
        &s0,
        &GridControls {
            dt: None,
            t_max: 0.25,
            p_values: vec![1.0, -1.0],
            record_every: 64,
        },
    )
    .unwrap();
    let min0 = 2.0 * run.rows[0].min_det.sqrt();
    for w in run.rows.windows(2) {
        assert!(w[1].e_p[0] >= w[0].e_p[0] - 1e-10, "grid E1 must not decrease");
        assert!(w[1].e_p[1] <= w[0].e_p[1] + 1e-10, "grid E-1 must not increase");
        assert!(
            2.0 * w[1].min_det.sqrt() >= min0 - 1e-9,
            "grid min |φ|² dropped below initial"
        );
    }
    details.push("grid: E_p monotone, min-norm bound".into());
    verdict("9 (monotonicity)", true, &details.join("; "));
}
