//! Plain CSV writers. Numbers use the shortest decimal that parses back to
//! the same `f64`; lines end with LF.

use std::io::{self, Write};

use crate::analysis::StabilityGrid;
use crate::lanchester::LanchesterRun;
use crate::trajectory::Trajectory;

pub fn fmt_f64(value: f64) -> String {
    if value.is_finite() {
        ryu::Buffer::new().format_finite(value).to_owned()
    } else {
        // unreachable for values produced by this crate; kept parseable
        format!("{value}")
    }
}

/// Header `n,x,y,v,w`, one row per stage, and a trailing
/// `# truncated: overflow at n=<stage>` line for runs cut short.
pub fn write_trajectory_csv<W: Write>(trajectory: &Trajectory, mut sink: W) -> io::Result<()> {
    let mut out = String::with_capacity(32 * (trajectory.len() + 1));
    out.push_str("n,x,y,v,w\n");
    for r in trajectory.records() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.stage,
            fmt_f64(r.x),
            fmt_f64(r.y),
            fmt_f64(r.v),
            fmt_f64(r.w)
        ));
    }
    if let Some(stage) = trajectory.overflow_at() {
        out.push_str(&format!("# truncated: overflow at n={stage}\n"));
    }
    sink.write_all(out.as_bytes())?;
    sink.flush()
}

pub fn write_lanchester_csv<W: Write>(run: &LanchesterRun, mut sink: W) -> io::Result<()> {
    let mut out = String::from("n,r,g\n");
    for (n, s) in run.states.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", n, fmt_f64(s.r), fmt_f64(s.g)));
    }
    if let Some(stage) = run.overflow_at {
        out.push_str(&format!("# truncated: overflow at n={stage}\n"));
    }
    sink.write_all(out.as_bytes())?;
    sink.flush()
}

/// Header `alpha,beta,gain,verdict`; rows in row-major `(alpha, beta)` order.
pub fn write_grid_csv<W: Write>(grid: &StabilityGrid, mut sink: W) -> io::Result<()> {
    let mut out = String::from("alpha,beta,gain,verdict\n");
    for c in grid.cells() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(c.alpha),
            fmt_f64(c.beta),
            fmt_f64(c.gain),
            c.verdict.class
        ));
    }
    sink.write_all(out.as_bytes())?;
    sink.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate_deterministic, ModelParams, PressureState};
    use proptest::prelude::*;

    #[test]
    fn zero_trajectory_layout() {
        let init = PressureState::initial(0.0, 0.0, 0.0, 0.0).unwrap();
        let t = simulate_deterministic(&init, &ModelParams::new(0.5, 0.5).unwrap(), 1);
        let mut buf = Vec::new();
        write_trajectory_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "n,x,y,v,w\n1,0.0,0.0,0.0,0.0\n2,0.0,0.0,0.0,0.0\n");
    }

    #[test]
    fn overflow_marker_is_last_line() {
        let init = PressureState::initial(0.0, 1.0, 0.0, 1.0).unwrap();
        let t = simulate_deterministic(&init, &ModelParams::new(1e20, 1e20).unwrap(), 50);
        let mut buf = Vec::new();
        write_trajectory_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let last = text.lines().last().unwrap();
        assert_eq!(last, format!("# truncated: overflow at n={}", t.overflow_at().unwrap()));
        assert!(text.ends_with('\n'));
    }

    proptest! {
        #[test]
        fn numbers_parse_back_exactly(x in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
            prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
