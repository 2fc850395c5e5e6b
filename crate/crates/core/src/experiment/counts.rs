use super::scan::DelayScan;
use crate::error::{Error, Result};

/// Expected counts with a Poisson error bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Count {
    pub value: f64,
    /// `√value`, or 1 for an expected count of zero.
    pub error: f64,
}

impl Count {
    pub fn from_probability(p: f64, pulses: f64) -> Self {
        let value = p * pulses;
        Count { value, error: if value > 0.0 { value.sqrt() } else { 1.0 } }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountRow {
    pub tau: f64,
    pub fourfold: Count,
    pub twofold: Count,
    pub accidental: Count,
    pub singles: [Count; 4],
}

pub fn expected_counts(scan: &DelayScan, pulses: f64) -> Result<Vec<CountRow>> {
    if !(pulses > 0.0) || !pulses.is_finite() {
        return Err(Error::param("pulses", format!("{pulses} is not positive")));
    }
    Ok(scan
        .rows
        .iter()
        .map(|r| CountRow {
            tau: r.tau,
            fourfold: Count::from_probability(r.p4, pulses),
            twofold: Count::from_probability(r.p2_ab, pulses),
            accidental: Count::from_probability(r.p2_acc, pulses),
            singles: r.singles.map(|p| Count::from_probability(p, pulses)),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_error_bars() {
        let c = Count::from_probability(1e-9, 2e10);
        assert!((c.value - 20.0).abs() < 1e-9);
        assert!((c.error - 4.4721).abs() < 1e-4);
        let z = Count::from_probability(0.0, 2e10);
        assert_eq!((z.value, z.error), (0.0, 1.0));
    }

    #[test]
    fn rejects_non_positive_pulses() {
        let s = DelayScan { label: "x".into(), rows: vec![], dip_width: None };
        assert!(expected_counts(&s, 0.0).is_err());
    }
}
