//! Plot-ready CSV output of a sweep and its figures of merit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::design::{relative_db, BandMetrics, SweepResult, RL_CAP_DB};
use crate::error::Result;
use crate::netcore::wrap_deg;

fn reflection_db(mag: f64) -> f64 {
    if mag <= 0.0 {
        return -RL_CAP_DB;
    }
    (20.0 * mag.log10()).max(-RL_CAP_DB)
}

/// One row per state and frequency, state-major. Attenuation and phase are
/// relative to the reference state, so its rows read zero in both.
pub fn states_csv(sweep: &SweepResult) -> Result<String> {
    let r = sweep.reference_index()?;
    let mut out = String::from("f_ghz,state,att_db,phase_deg,s11_db,s22_db\n");
    for (si, st) in sweep.states.iter().enumerate() {
        let label = st.label();
        for (fi, f) in sweep.grid.points().iter().enumerate() {
            let base = sweep.get(r, fi);
            let s = sweep.get(si, fi);
            let (att, phase) = if si == r {
                (0.0, 0.0)
            } else {
                (relative_db(base, s)?, wrap_deg((s.s21 / base.s21).arg().to_degrees()))
            };
            let _ = writeln!(
                out,
                "{:.6},{label},{att:.9},{phase:.9},{:.9},{:.9}",
                f / 1e9,
                reflection_db(s.s11.norm()),
                reflection_db(s.s22.norm()),
            );
        }
    }
    Ok(out)
}

pub fn metrics_csv(m: &BandMetrics) -> String {
    let mut out = String::from("f_ghz,il_db,rms_amp_db,rms_phase_deg,rl_worst_db\n");
    for (i, f) in m.freqs_hz.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:.6},{:.9},{:.9},{:.9},{:.9}",
            f / 1e9,
            m.il_db[i],
            m.rms_amp_err_db[i],
            m.rms_phase_err_deg[i],
            m.rl_worst_at(i)
        );
    }
    out
}

pub fn write_states_csv(sweep: &SweepResult, path: &Path) -> Result<()> {
    fs::write(path, states_csv(sweep)?)?;
    Ok(())
}

pub fn write_metrics_csv(m: &BandMetrics, path: &Path) -> Result<()> {
    fs::write(path, metrics_csv(m))?;
    Ok(())
}

/// Writes the state file and the metrics file.
pub fn write_report_csv(sweep: &SweepResult, m: &BandMetrics, states_path: &Path, metrics_path: &Path) -> Result<()> {
    write_states_csv(sweep, states_path)?;
    write_metrics_csv(m, metrics_path)
}
