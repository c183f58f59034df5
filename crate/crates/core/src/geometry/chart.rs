use crate::error::{Error, Result};

/// Ordered coordinate names of a `d = n + 2` dimensional chart, optionally
/// restricted to a box of valid sample points.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateChart {
    coords: Vec<String>,
    bounds: Option<Vec<(f64, f64)>>,
}

impl CoordinateChart {
    pub fn new<S: AsRef<str>>(coords: &[S]) -> Result<Self> {
        let coords: Vec<String> = coords.iter().map(|s| s.as_ref().to_string()).collect();
        if coords.len() < 3 {
            return Err(Error::Chart(format!("dimension must be at least 3, got {}", coords.len())));
        }
        for (i, c) in coords.iter().enumerate() {
            if coords[..i].contains(c) {
                return Err(Error::Chart(format!("duplicate coordinate '{c}'")));
            }
            if c.is_empty() {
                return Err(Error::Chart("empty coordinate name".into()));
            }
        }
        Ok(CoordinateChart { coords, bounds: None })
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.len() != self.coords.len() {
            return Err(Error::Chart("box must give one interval per coordinate".into()));
        }
        if let Some((lo, hi)) = bounds.iter().find(|(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite()) {
            return Err(Error::Chart(format!("invalid interval [{lo}, {hi}]")));
        }
        self.bounds = Some(bounds);
        Ok(self)
    }

    /// `d`, the chart dimension.
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// `n = d - 2`.
    pub fn n(&self) -> usize {
        self.coords.len() - 2
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &str {
        &self.coords[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    pub fn bounds(&self) -> Option<&[(f64, f64)]> {
        self.bounds.as_deref()
    }
}
