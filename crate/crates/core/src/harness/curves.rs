//! Forward marginal curves `q(x_t = 1 | x_0)` for a list of schedules.

use std::path::Path;

use crate::error::Result;
use crate::kernel::{KernelTables, NoiseSchedule};

pub const CURVES_HEADER: &str = "schedule_id,t,beta0,beta1,q_from0,q_from1";

/// Writes one CSV with rows `t = 0..=T` for each schedule, identified by its
/// position in `schedules`. Row `t = 0` has zero flip probabilities and the
/// identity marginals `(0, 1)`.
pub fn emit_forward_curves(schedules: &[NoiseSchedule], path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from(CURVES_HEADER);
    out.push('\n');
    for (id, schedule) in schedules.iter().enumerate() {
        let tables = KernelTables::new(schedule);
        for t in 0..=schedule.steps() {
            let (b0, b1) = if t == 0 { (0.0, 0.0) } else { (schedule.beta0(t), schedule.beta1(t)) };
            out.push_str(&format!("{id},{t},{b0},{b1},{},{}\n", tables.q_from0()[t], tables.q_from1()[t]));
        }
    }
    super::atomic_write(path, out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::build_schedule;

    fn rows(text: &str) -> Vec<Vec<f64>> {
        text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
    }

    #[test]
    fn curves_start_at_identity_and_end_at_prior() {
        let schedules: Vec<_> = [0.0, 0.5, 0.8].iter().map(|&p| build_schedule(p, 0.5, 100, 0.8).unwrap()).collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curves.csv");
        emit_forward_curves(&schedules, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), CURVES_HEADER);
        let rows = rows(&text);
        assert_eq!(rows.len(), 3 * 101);
        for (id, schedule) in schedules.iter().enumerate() {
            let curve: Vec<_> = rows.iter().filter(|r| r[0] == id as f64).collect();
            assert_eq!((curve[0][4], curve[0][5]), (0.0, 1.0));
            let prior = schedule.prior_prob().unwrap();
            let last = curve.last().unwrap();
            assert!((last[4] - prior).abs() < 1e-3 && (last[5] - prior).abs() < 1e-3);
        }
        // p = 0 never turns a 0 into a 1.
        assert!(rows.iter().filter(|r| r[0] == 0.0).all(|r| r[4] == 0.0));
        let symmetric = rows.iter().rfind(|r| r[0] == 1.0).unwrap();
        assert!((symmetric[4] - 0.5).abs() < 1e-3 && (symmetric[5] - 0.5).abs() < 1e-3);
    }
}
