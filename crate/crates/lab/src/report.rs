//! Scenario reports: canonical JSON and plot-ready CSV.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: &str = "proxgeo-lab/report/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        })
    }
}

/// One sampled value of a check, for the CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub params: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// Module whose property the check exercises.
    pub module: &'static str,
    pub status: Status,
    #[serde(serialize_with = "finite_or_null")]
    pub measured: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub tolerance: f64,
    /// What `measured` is compared against, in words.
    pub criterion: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(skip)]
    pub samples: Vec<Sample>,
}

impl Check {
    pub fn new(name: &str, module: &'static str, ok: bool, measured: f64, tolerance: f64, criterion: &str) -> Self {
        Self {
            name: name.into(),
            module,
            status: Status::from_bool(ok),
            measured,
            tolerance,
            criterion: criterion.into(),
            witness: None,
            samples: Vec::new(),
        }
    }

    pub fn with_witness(mut self, w: Value) -> Self {
        self.witness = Some(w);
        self
    }

    pub fn with_samples(mut self, samples: Vec<Sample>) -> Self {
        self.samples = samples;
        self
    }

    /// A check that could not be evaluated.
    pub fn errored(name: &str, module: &'static str, err: impl std::fmt::Display) -> Self {
        Check::new(name, module, false, f64::NAN, f64::NAN, "evaluation error")
            .with_witness(serde_json::json!({ "error": err.to_string() }))
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

fn finite_or_null<S: serde::Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub scenario: String,
    pub seed: u64,
    pub setup: Value,
    pub pass: bool,
    pub checks: Vec<Check>,
    /// Modules exercised by this scenario.
    pub coverage: Vec<&'static str>,
}

impl Report {
    pub fn new(scenario: &str, seed: u64, setup: Value, checks: Vec<Check>) -> Self {
        // Every failing check carries a witness payload.
        let checks: Vec<Check> = checks
            .into_iter()
            .map(|c| {
                if !c.passed() && c.witness.is_none() {
                    let w = serde_json::json!({ "measured": c.measured, "tolerance": c.tolerance });
                    c.with_witness(w)
                } else {
                    c
                }
            })
            .collect();
        let mut coverage: Vec<&'static str> = checks.iter().map(|c| c.module).collect();
        coverage.sort_unstable();
        coverage.dedup();
        Self {
            schema: SCHEMA,
            scenario: scenario.into(),
            seed,
            setup,
            pass: checks.iter().all(Check::passed),
            checks,
            coverage,
        }
    }

    /// Byte-stable JSON: fixed field order, no timing data, trailing newline.
    pub fn canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Rows `scenario, check, param_1..param_k, value, tolerance, status`:
    /// one summary row per check, then one row per sample.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let k = self.checks.iter().flat_map(|c| c.samples.iter().map(|s| s.params.len())).max().unwrap_or(0).max(1);
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["scenario".to_string(), "check".to_string()];
        header.extend((1..=k).map(|i| format!("param_{i}")));
        header.extend(["value", "tolerance", "status"].map(String::from));
        out.write_record(&header)?;
        for c in &self.checks {
            let mut row = vec![self.scenario.clone(), c.name.clone()];
            row.extend((0..k).map(|_| String::new()));
            row.extend([fmt_num(c.measured), fmt_num(c.tolerance), c.status.to_string()]);
            out.write_record(&row)?;
            for s in &c.samples {
                let mut row = vec![self.scenario.clone(), c.name.clone()];
                row.extend((0..k).map(|i| s.params.get(i).map(|p| fmt_num(*p)).unwrap_or_default()));
                row.extend([fmt_num(s.value), fmt_num(c.tolerance), String::new()]);
                out.write_record(&row)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Writes `<scenario>.json` and `<scenario>.csv` into `dir`.
    pub fn write_artifacts(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{}.json", self.scenario)), self.canonical_json())?;
        let f = std::fs::File::create(dir.join(format!("{}.csv", self.scenario)))?;
        self.write_csv(std::io::BufWriter::new(f)).map_err(std::io::Error::other)
    }
}

fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        String::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failing_checks_get_a_witness_and_csv_is_rectangular() {
        let ok = Check::new("a", "manifold_core", true, 1e-9, 1e-6, "≤ tolerance")
            .with_samples(vec![Sample { params: vec![0.1, 0.2], value: 1e-9 }]);
        let bad = Check::new("b", "tubular", false, 2.0, 1.0, "≤ tolerance");
        let r = Report::new("demo", 7, Value::Null, vec![ok, bad]);
        assert!(!r.pass);
        assert!(r.checks[1].witness.is_some());
        assert_eq!(r.coverage, vec!["manifold_core", "tubular"]);

        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "scenario,check,param_1,param_2,value,tolerance,status");
        assert_eq!(lines.len(), 4);
        assert!(lines.iter().all(|l| l.split(',').count() == 7));
        assert_eq!(r.canonical_json(), r.canonical_json());
    }

    #[test]
    fn non_finite_numbers_serialize_as_null() {
        let c = Check::errored("x", "harness", "boom");
        let v: Value = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert!(v["measured"].is_null());
    }
}
