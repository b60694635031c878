use std::fmt::Write as _;

use dlsched::{LpStatus, SpeedupPoint, SweepPoint};

pub const SWEEP_HEADER: &str = "n_sources,m_processors,job,t_f,cost,status";
pub const SPEEDUP_HEADER: &str = "p_sources,n_processors,t_baseline,t_multi,speedup";

/// Twelve significant digits, trailing zeros trimmed; scientific notation
/// outside `[1e-5, 1e12)`, like C's `%.12g`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}{:02}", trim(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn status(s: LpStatus) -> &'static str {
    match s {
        LpStatus::Optimal => "optimal",
        LpStatus::Infeasible => "infeasible",
        LpStatus::Unbounded => "unbounded",
    }
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            p.n_sources,
            p.m_processors,
            fmt_num(p.job),
            fmt_opt(p.t_f),
            fmt_opt(p.cost),
            status(p.status)
        )
        .unwrap();
    }
    out
}

pub fn speedup_csv(points: &[SpeedupPoint]) -> String {
    let mut out = format!("{SPEEDUP_HEADER}\n");
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{}",
            p.p_sources,
            p.n_processors,
            fmt_num(p.t_baseline),
            fmt_num(p.t_multi),
            fmt_num(p.speedup)
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(100.0), "100");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(3433.77912345678), "3433.77912346");
        assert_eq!(fmt_num(-2.5), "-2.5");
        assert_eq!(fmt_num(1.5e-7), "1.5e-07");
        assert_eq!(fmt_num(2.0e15), "2e+15");
        assert_eq!(fmt_num(0.0001), "0.0001");
    }

    #[test]
    fn rounding_carries_into_exponent() {
        assert_eq!(fmt_num(9.9999999999999), "10");
        assert_eq!(fmt_num(999999999999.9), "1e+12");
    }

    #[test]
    fn infeasible_rows_leave_values_empty() {
        let p = SweepPoint {
            n_sources: 2,
            m_processors: 1,
            job: 1.0,
            t_f: None,
            cost: None,
            status: LpStatus::Infeasible,
        };
        assert_eq!(sweep_csv(&[p]), format!("{SWEEP_HEADER}\n2,1,1,,,infeasible\n"));
    }
}
