//! Artifact emission: run CSVs with 17-significant-digit decimal text and
//! JSON summaries. Every emitted file embeds the configuration echo and the
//! engine version; identical configuration and seed produce byte-identical
//! output.

use std::io::Write;

use serde::Serialize;
use serde_json::json;

use crate::flow::{FlowOutcome, MonotonicityVerdicts, OracleReport, RunControls, RunResult};
use crate::torusgrid::{GridControls, GridRow, GridRunResult, GridState};
use crate::ENGINE_VERSION;

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the flow observables CSV: comment lines with the engine version
/// and the configuration echo, one header row, then one row per sample.
pub fn write_flow_csv<W: Write>(
    mut w: W,
    run: &RunResult,
    controls: &RunControls,
    config_echo: &serde_json::Value,
    param_names: &[String],
) -> std::io::Result<()> {
    writeln!(w, "# engine_version = {ENGINE_VERSION}")?;
    writeln!(w, "# config = {config_echo}")?;
    let mut header = vec!["t".to_string(), "u".into(), "normNsq".into()];
    for p in &controls.p_values {
        header.push(format!("E_{p}"));
    }
    header.extend([
        "pos_margin".to_string(),
        "stab_margin".into(),
        "norm_sq".into(),
        "du_dt_model".into(),
        "dnsq_dt_model".into(),
    ]);
    for name in param_names {
        header.push(name.clone());
    }
    writeln!(w, "{}", header.join(","))?;
    for row in &run.rows {
        let mut cells = vec![fmt17(row.t), fmt17(row.u), fmt17(row.norm_n_sq)];
        for v in &row.e_p {
            cells.push(fmt17(*v));
        }
        cells.push(fmt17(row.pos_margin));
        cells.push(fmt17(row.stab_margin));
        cells.push(fmt17(row.norm_sq));
        cells.push(fmt17(row.du_dt_model));
        cells.push(fmt17(row.dnsq_dt_model));
        for v in &row.params {
            cells.push(fmt17(*v));
        }
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// JSON summary of a flow run: outcome, blow-up bracket, monotonicity
/// verdicts and (when available) the oracle comparison.
pub fn flow_summary(
    run: &RunResult,
    _controls: &RunControls,
    config_echo: &serde_json::Value,
    verdicts: &MonotonicityVerdicts,
    oracle: Option<&OracleReport>,
) -> serde_json::Value {
    let blowup = match &run.outcome {
        FlowOutcome::BlowUp(b) => json!({ "lower": b.lower, "upper": b.upper, "width": b.width() }),
        FlowOutcome::Completed => serde_json::Value::Null,
    };
    json!({
        "engine_version": ENGINE_VERSION,
        "config": config_echo,
        "outcome": match run.outcome { FlowOutcome::Completed => "completed", FlowOutcome::BlowUp(_) => "blowup" },
        "blowup_bracket": blowup,
        "final_t": run.final_state.t,
        "rows": run.rows.len(),
        "monotonicity": to_value(verdicts),
        "oracle": oracle.map(to_value).unwrap_or(serde_json::Value::Null),
    })
}

/// Writes the grid observables CSV.
pub fn write_grid_csv<W: Write>(
    mut w: W,
    rows: &[GridRow],
    controls: &GridControls,
    config_echo: &serde_json::Value,
) -> std::io::Result<()> {
    writeln!(w, "# engine_version = {ENGINE_VERSION}")?;
    writeln!(w, "# config = {config_echo}")?;
    let mut header = vec![
        "t".to_string(),
        "sup_normNsq".into(),
        "min_det".into(),
        "mean_a".into(),
        "mean_b".into(),
        "mean_c".into(),
    ];
    for p in &controls.p_values {
        header.push(format!("E_{p}"));
    }
    header.extend(["mode1_amp_a".to_string(), "sup_dev_a".into()]);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let mut cells = vec![
            fmt17(row.t),
            fmt17(row.sup_nsq),
            fmt17(row.min_det),
            fmt17(row.means[0]),
            fmt17(row.means[1]),
            fmt17(row.means[2]),
        ];
        for v in &row.e_p {
            cells.push(fmt17(*v));
        }
        cells.push(fmt17(row.mode1_amp_a));
        cells.push(fmt17(row.sup_dev_a));
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Writes one field-snapshot CSV of a grid state.
pub fn write_grid_snapshot<W: Write>(
    mut w: W,
    state: &GridState,
    config_echo: &serde_json::Value,
) -> std::io::Result<()> {
    writeln!(w, "# engine_version = {ENGINE_VERSION}")?;
    writeln!(w, "# config = {config_echo}")?;
    writeln!(w, "# t = {}", fmt17(state.t))?;
    writeln!(w, "x,a,b,c,d")?;
    let n = state.n();
    for i in 0..n {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt17(i as f64 / n as f64),
            fmt17(state.a[i]),
            fmt17(state.b[i]),
            fmt17(state.c[i]),
            fmt17(state.d[i])
        )?;
    }
    Ok(())
}

/// JSON summary of a grid run.
pub fn grid_summary(
    run: &GridRunResult,
    config_echo: &serde_json::Value,
) -> serde_json::Value {
    json!({
        "engine_version": ENGINE_VERSION,
        "config": config_echo,
        "rows": run.rows.len(),
        "final_t": run.final_state.t,
        "final_sup_normNsq": run.rows.last().map(|r| r.sup_nsq),
        "final_min_det": run.final_state.min_det(),
        "decay_certificate": run.decay.as_ref().map(to_value).unwrap_or(serde_json::Value::Null),
    })
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable report type")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{monotonicity_verdicts, run_flow, FlowModel, RunControls};
    use nalgebra::DVector;

    #[test]
    fn csv_is_deterministic_and_embeds_metadata() {
        let fm = FlowModel::builtin("nil").unwrap();
        let controls = RunControls {
            dt: 1e-2,
            t_max: 0.1,
            p_values: vec![1.0, -1.0],
            record_every: 2,
        };
        let run = run_flow(&fm, &DVector::from_column_slice(&[0.0, 0.3]), &controls).unwrap();
        let echo = serde_json::json!({"model": "nil", "dt": 1e-2, "seed": 7});
        let names: Vec<String> = fm.ansatz().names().to_vec();
        let mut buf1 = Vec::new();
        write_flow_csv(&mut buf1, &run, &controls, &echo, &names).unwrap();
        let run2 = run_flow(&fm, &DVector::from_column_slice(&[0.0, 0.3]), &controls).unwrap();
        let mut buf2 = Vec::new();
        write_flow_csv(&mut buf2, &run2, &controls, &echo, &names).unwrap();
        assert_eq!(buf1, buf2, "identical config must give identical bytes");
        let text = String::from_utf8(buf1).unwrap();
        assert!(text.starts_with(&format!("# engine_version = {ENGINE_VERSION}")));
        assert!(text.contains("# config = "));
        assert!(text.lines().nth(2).unwrap().starts_with("t,u,normNsq,E_1,E_-1"));
        // 17 significant digits
        assert!(text.contains("e0") || text.contains("e-"));
        let v = monotonicity_verdicts(&run.rows, &controls.p_values);
        let summary = flow_summary(&run, &controls, &echo, &v, None);
        assert_eq!(summary["engine_version"], ENGINE_VERSION);
        assert_eq!(summary["outcome"], "completed");
    }
}
