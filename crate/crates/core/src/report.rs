//! Pass/fail records shared by the property validators.

use std::fmt;

/// Outcome of one checked property. `margin` is signed: non-negative means
/// the property held with that much room on every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub name: String,
    pub pass: bool,
    pub margin: f64,
    /// Worst sample, as torus coordinates, when the check is sampled.
    pub witness: Option<[f64; 3]>,
    pub observed: Vec<(String, f64)>,
    pub detail: String,
}

impl PropertyCheck {
    pub fn new(name: impl Into<String>, margin: f64) -> Self {
        Self {
            name: name.into(),
            pass: margin >= 0.0,
            margin,
            witness: None,
            observed: Vec::new(),
            detail: String::new(),
        }
    }

    pub fn with_witness(mut self, w: Option<[f64; 3]>) -> Self {
        self.witness = w;
        self
    }

    pub fn observe(mut self, key: impl Into<String>, value: f64) -> Self {
        self.observed.push((key.into(), value));
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.observed.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PropertyReport {
    pub checks: Vec<PropertyCheck>,
}

impl PropertyReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(
                f,
                "{} {} margin={:.3e}",
                c.name,
                if c.pass { "pass" } else { "FAIL" },
                c.margin
            )?;
            for (k, v) in &c.observed {
                write!(f, " {k}={v:.6}")?;
            }
            if let Some(w) = c.witness {
                if !c.pass {
                    write!(f, " witness=({:.9}, {:.9}, {:.9})", w[0], w[1], w[2])?;
                }
            }
            if !c.detail.is_empty() {
                write!(f, " ({})", c.detail)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Running worst-case tracker: keeps the smallest margin and where it occurred.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Worst {
    pub margin: f64,
    pub at: Option<[f64; 3]>,
}

impl Worst {
    pub fn new() -> Self {
        Self {
            margin: f64::INFINITY,
            at: None,
        }
    }

    pub fn push(&mut self, margin: f64, at: [f64; 3]) {
        if margin < self.margin || margin.is_nan() {
            self.margin = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
            self.at = Some(at);
        }
    }

    /// Associative and tie-stable, so parallel reductions are reproducible.
    pub fn merge(self, other: Self) -> Self {
        let take_other = match other.margin.partial_cmp(&self.margin) {
            Some(std::cmp::Ordering::Less) => true,
            Some(std::cmp::Ordering::Equal) => match (other.at, self.at) {
                (Some(a), Some(b)) => a.partial_cmp(&b) == Some(std::cmp::Ordering::Less),
                (Some(_), None) => true,
                _ => false,
            },
            _ => false,
        };
        if take_other {
            other
        } else {
            self
        }
    }
}
