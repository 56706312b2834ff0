//! Report records and their line format.
//!
//! ```text
//! # gck torsion
//! # scenario polar.scn seed=2 samples=100 signature=+,-,-,-
//! # chart t,r,phi,z
//! # require x1 > 0.2
//! check torsion eq=def2.2,eq2.8 residual=0.00000e0 tol=1.0e-9 verdict=PASS worst=T[0,0,0]@(-0.237319,1.527057,6.215646,-0.999604)
//! component T[0,0,0] = 0
//! summary checks=1 pass=1 fail=0 skip=0
//! ```
//!
//! Records with verdict `SKIP` either lack the scenario block they need
//! (`residual=-`) or measure a property the scenario does not claim, such
//! as orthonormality of an undeclared frame.
//!
//! ```text
//! check unavailable eq=eps5.1 residual=- tol=- verdict=SKIP note="requires an [su3] block"
//! ```

use std::fmt::{self, Write as _};

use gck_core::residual::Residual;
use gck_core::ChartPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Skip,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skip => "SKIP",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Record {
    pub name: String,
    /// Comma-separated equation tags.
    pub tag: String,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub verdict: Verdict,
    pub worst: Option<(String, ChartPoint)>,
    pub note: Option<String>,
}

impl Record {
    /// Verdict against `tolerance`, or the residual's own threshold.
    pub fn from_residual(r: &Residual, tolerance: Option<f64>) -> Self {
        Self::tagged(r, r.tag, tolerance)
    }

    pub fn tagged(r: &Residual, tag: &str, tolerance: Option<f64>) -> Self {
        let tol = tolerance.unwrap_or(r.tolerance);
        Self {
            name: r.name.clone(),
            tag: tag.to_string(),
            residual: Some(r.max),
            tolerance: Some(tol),
            verdict: if r.passes(tol) {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            worst: r.worst_slot.clone().zip(r.worst_point),
            note: None,
        }
    }

    pub fn skip(name: impl Into<String>, tag: impl Into<String>, note: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            tag: tag.into(),
            residual: None,
            tolerance: None,
            verdict: Verdict::Skip,
            worst: None,
            note: Some(note.into()),
        }
    }

    /// Keeps the measured residual but withholds the verdict.
    pub fn demote(mut self, note: impl Into<String>) -> Self {
        self.verdict = Verdict::Skip;
        self.note = Some(note.into());
        self
    }

    /// Prepends `prefix` unless the name already starts with it.
    pub fn prefixed(mut self, prefix: &str) -> Self {
        if !self.name.starts_with(prefix) {
            self.name = format!("{prefix}{}", self.name);
        }
        self
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.tag.split(',')
    }
}

fn sci(v: Option<f64>, precision: usize) -> String {
    match v {
        Some(v) => format!("{v:.precision$e}"),
        None => "-".into(),
    }
}

fn point(p: &ChartPoint) -> String {
    let c: Vec<String> = p.coords().iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", c.join(","))
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "check {} eq={} residual={} tol={} verdict={}",
            self.name,
            self.tag,
            sci(self.residual, 5),
            sci(self.tolerance, 1),
            self.verdict
        )?;
        if let Some((slot, p)) = &self.worst {
            write!(f, " worst={slot}@{}", point(p))?;
        }
        if let Some(note) = &self.note {
            write!(f, " note=\"{note}\"")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub header: Vec<String>,
    pub records: Vec<Record>,
    /// `(label, expression)` pairs in emission order.
    pub components: Vec<(String, String)>,
}

impl Report {
    pub fn push(&mut self, r: Record) {
        self.records.push(r);
    }

    pub fn extend(&mut self, rs: impl IntoIterator<Item = Record>) {
        self.records.extend(rs);
    }

    pub fn component(&mut self, label: String, value: String) {
        self.components.push((label, value));
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.records.iter().filter(|r| r.verdict == v).count()
    }

    pub fn failed(&self) -> bool {
        self.count(Verdict::Fail) > 0
    }

    pub fn find(&self, name: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.name == name)
    }

    /// Every equation tag carried by a record, in first-seen order.
    pub fn tags(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for t in self.records.iter().flat_map(Record::tags) {
            if !out.contains(&t) {
                out.push(t);
            }
        }
        out
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for h in &self.header {
            let _ = writeln!(s, "# {h}");
        }
        for r in &self.records {
            let _ = writeln!(s, "{r}");
        }
        for (label, value) in &self.components {
            let _ = writeln!(s, "component {label} = {value}");
        }
        let _ = writeln!(
            s,
            "summary checks={} pass={} fail={} skip={}",
            self.records.len(),
            self.count(Verdict::Pass),
            self.count(Verdict::Fail),
            self.count(Verdict::Skip)
        );
        s
    }
}
