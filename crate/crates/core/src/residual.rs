//! Residual scans: evaluate identities slot-by-slot over a sample set and
//! keep the worst deviation.

use num_complex::Complex64;

use crate::expr::{ChartPoint, EvalError, Evaluator, ScalarExpr};
use crate::sampling::SampleSet;

/// Tolerance for identities between constants and directly supplied data.
pub const TOL_CONSTANT: f64 = 1e-10;
/// Tolerance for identities involving derived (differentiated) fields.
pub const TOL_DERIVED: f64 = 1e-9;

/// How a slot's deviation is measured at one point.
#[derive(Debug, Clone)]
pub enum Probe {
    /// `|e|`
    Value(ScalarExpr),
    /// `|Im e|`
    Imag(ScalarExpr),
    /// `|a - b|`, both sides evaluated separately.
    Diff(ScalarExpr, ScalarExpr),
    /// `|a - conj(b)|`, conjugation applied to the evaluated number.
    ConjDiff(ScalarExpr, ScalarExpr),
    /// `|Re a - b|`
    RealDiff(ScalarExpr, ScalarExpr),
    /// `|a - b| / |b|` (absolute when `b` vanishes).
    Relative(ScalarExpr, ScalarExpr),
}

impl Probe {
    fn measure(&self, ev: &mut Evaluator) -> Result<f64, EvalError> {
        Ok(match self {
            Probe::Value(e) => ev.eval(e)?.norm(),
            Probe::Imag(e) => ev.eval(e)?.im.abs(),
            Probe::Diff(a, b) => (ev.eval(a)? - ev.eval(b)?).norm(),
            Probe::ConjDiff(a, b) => (ev.eval(a)? - ev.eval(b)?.conj()).norm(),
            Probe::RealDiff(a, b) => (Complex64::new(ev.eval(a)?.re, 0.0) - ev.eval(b)?).norm(),
            Probe::Relative(a, b) => {
                let want = ev.eval(b)?;
                let diff = (ev.eval(a)? - want).norm();
                if want.norm() > 0.0 {
                    diff / want.norm()
                } else {
                    diff
                }
            }
        })
    }
}

#[derive(Debug, Clone)]
pub struct Slot {
    pub label: String,
    pub probe: Probe,
}

impl Slot {
    pub fn new(label: impl Into<String>, probe: Probe) -> Self {
        Self {
            label: label.into(),
            probe,
        }
    }
}

/// Worst deviation of a family of slots over a sample set.
#[derive(Debug, Clone)]
pub struct Residual {
    pub name: String,
    /// Tag of the identity the check implements, as printed in reports.
    pub tag: &'static str,
    pub max: f64,
    pub worst_point: Option<ChartPoint>,
    pub worst_slot: Option<String>,
    /// Per-slot maxima in slot order.
    pub slots: Vec<(String, f64)>,
    /// Default acceptance threshold for this check.
    pub tolerance: f64,
}

impl Residual {
    pub fn passes(&self, tol: f64) -> bool {
        self.max <= tol
    }

    /// Verdict against the check's own tolerance.
    pub fn passed(&self) -> bool {
        self.passes(self.tolerance)
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn slot(&self, label: &str) -> Option<f64> {
        self.slots.iter().find(|(l, _)| l == label).map(|(_, v)| *v)
    }
}

pub fn scan(
    name: impl Into<String>,
    tag: &'static str,
    samples: &SampleSet,
    slots: Vec<Slot>,
) -> Result<Residual, EvalError> {
    let mut slot_max = vec![0.0f64; slots.len()];
    let mut max = 0.0f64;
    let mut worst: Option<(ChartPoint, usize)> = None;
    for p in samples {
        let mut ev = Evaluator::new(*p);
        for (k, slot) in slots.iter().enumerate() {
            let r = slot.probe.measure(&mut ev)?;
            // NaN must register as a failure, not vanish in a comparison.
            let r = if r.is_nan() { f64::INFINITY } else { r };
            if r > slot_max[k] {
                slot_max[k] = r;
            }
            if r > max || worst.is_none() {
                if r > max {
                    max = r;
                }
                worst = Some((*p, k));
            }
        }
    }
    Ok(Residual {
        name: name.into(),
        tag,
        max,
        worst_point: worst.map(|(p, _)| p),
        worst_slot: worst.map(|(_, k)| slots[k].label.clone()),
        slots: slots
            .into_iter()
            .zip(slot_max)
            .map(|(s, m)| (s.label, m))
            .collect(),
        tolerance: TOL_DERIVED,
    })
}

/// Convenience for slots that should vanish: `|e|` for each labelled value.
pub fn scan_values(
    name: impl Into<String>,
    tag: &'static str,
    samples: &SampleSet,
    values: impl IntoIterator<Item = (String, ScalarExpr)>,
) -> Result<Residual, EvalError> {
    let slots = values
        .into_iter()
        .map(|(label, e)| Slot::new(label, Probe::Value(e)))
        .collect();
    scan(name, tag, samples, slots)
}

/// 1-based label for bundle indices, 0-based for tangent indices.
pub(crate) fn label(prefix: &str, idx: &[usize]) -> String {
    let parts: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
    format!("{prefix}[{}]", parts.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::sampling::{SampleBox, SampleSet};

    #[test]
    fn scan_tracks_worst_slot_and_point() {
        let samples = SampleSet::in_box(SampleBox::cube(0.0, 1.0), 20, 3);
        let r = scan(
            "demo",
            "eq0",
            &samples,
            vec![
                Slot::new("a", Probe::Value(parse_expr("0").unwrap())),
                Slot::new("b", Probe::Value(parse_expr("x1").unwrap())),
            ],
        )
        .unwrap();
        assert_eq!(r.worst_slot.as_deref(), Some("b"));
        let best = samples.iter().map(|p| p.coord(1)).fold(0.0, f64::max);
        assert_eq!(r.max, best);
        assert_eq!(r.slot("a"), Some(0.0));
        assert!(r.passes(1.0) && !r.passes(0.5));
    }

    #[test]
    fn conj_diff_evaluates_both_sides() {
        let samples = SampleSet::in_box(SampleBox::cube(0.0, 1.0), 5, 3);
        let a = parse_expr("-i*x2").unwrap();
        let b = parse_expr("i*x2").unwrap();
        let r = scan(
            "c",
            "eq0",
            &samples,
            vec![Slot::new("s", Probe::ConjDiff(a, b))],
        )
        .unwrap();
        assert_eq!(r.max, 0.0);
    }
}
