//! Problem files: parsing, validation and resolution into core types.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use qe_core::ode::OdeSolution;
use qe_core::warped::{FiberModel, WarpedSpec};
use qe_core::{
    CoordinateChart, Expr, MetricField, PotentialData, PpWaveSpec, SamplePlan, SymbolTable, Thresholds,
};

use crate::InputError;

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<Vec<String>>,
    /// Named constants usable in every expression.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, f64>,
    /// Rows of expression strings; entries below the diagonal may be `null`
    /// or left out entirely (row `i` then starts at column `i`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<Option<String>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construct: Option<Construct>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<SamplesSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<ThresholdSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ode: Option<OdeSection>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub f: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Bakry–Emery dimension, `μ = −1/m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Construct {
    Ppwave(PpWaveSection),
    CahenWallach { a: Vec<f64> },
    TwoSymmetric {
        a_diag: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<Vec<Vec<f64>>>,
    },
    Warped { epsilon: i8, psi: String, fiber: String, fiber_dim: usize },
}

/// Either a full profile `H` or the conformally flat coefficients `a, b, c` (functions of `u`).
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PpWaveSection {
    pub n: usize,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SamplesSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Per-coordinate sampling interval `[lo, hi]`.
    #[serde(default, rename = "box", skip_serializing_if = "BTreeMap::is_empty")]
    pub bounds: BTreeMap<String, [f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qe: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lcf: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OdeSection {
    /// Coefficient `a(u)`.
    pub a: String,
    pub n: usize,
    pub mu: f64,
    /// `(f₀, f₀')` at the start of the interval.
    pub init: [f64; 2],
    pub interval: [f64; 2],
    pub h: f64,
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct OdeProblem {
    pub a: Expr,
    pub n: usize,
    pub mu: f64,
    pub init: (f64, f64),
    pub interval: (f64, f64),
    pub h: f64,
}

impl OdeProblem {
    pub fn integrate(&self) -> qe_core::Result<OdeSolution> {
        qe_core::ode::integrate_f0(&self.a, self.n, self.mu, self.init, self.interval, self.h)
    }
}

/// A validated problem.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub metric: Option<MetricField>,
    pub potential: Option<PotentialData>,
    pub plan: SamplePlan,
    pub seed: u64,
    pub thresholds: Thresholds,
    pub ode: Option<OdeProblem>,
}

fn bad(pointer: impl Into<String>, message: impl std::fmt::Display) -> InputError {
    InputError { pointer: pointer.into(), message: message.to_string() }
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<Self, InputError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad("", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, InputError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let pointer = json_pointer(&e.path().to_string());
            bad(pointer, e.into_inner())
        })
    }

    fn coordinate_names(&self) -> Result<Vec<String>, InputError> {
        self.coordinates.clone().ok_or_else(|| bad("/coordinates", "missing coordinates"))
    }

    fn symbols(&self, coords: &[String]) -> SymbolTable {
        let params: Vec<&str> = self.parameters.keys().map(String::as_str).collect();
        let coords: Vec<&str> = coords.iter().map(String::as_str).collect();
        SymbolTable::new(&coords, &params)
    }

    /// The metric, from explicit components or by expanding `construct`.
    pub fn build_metric(&self) -> Result<MetricField, InputError> {
        match (&self.metric, &self.construct) {
            (Some(_), Some(_)) => Err(bad("", "give exactly one of \"metric\" or \"construct\", not both")),
            (None, None) => Err(bad("", "give exactly one of \"metric\" or \"construct\"")),
            (None, Some(c)) => {
                if let Some(declared) = &self.coordinates {
                    let g = construct_metric(c)?;
                    if declared.as_slice() != g.chart().coords() {
                        return Err(bad("/coordinates", format!("construct implies coordinates {:?}", g.chart().coords())));
                    }
                    return Ok(g);
                }
                construct_metric(c)
            }
            (Some(rows), None) => {
                let coords = self.coordinate_names()?;
                for (i, name) in coords.iter().enumerate() {
                    if self.parameters.contains_key(name) {
                        return Err(bad(format!("/coordinates/{i}"), format!("'{name}' is also a parameter")));
                    }
                }
                let chart = CoordinateChart::new(&coords).map_err(|e| bad("/coordinates", e))?;
                let symbols = self.symbols(&coords);
                explicit_metric(chart, rows, &symbols)
            }
        }
    }

    pub fn resolve(&self, overrides: Overrides) -> Result<Resolved, InputError> {
        let metric = match (&self.metric, &self.construct) {
            (None, None) if self.ode.is_some() => None,
            _ => Some(self.build_metric()?),
        };
        let coords = match &metric {
            Some(g) => g.chart().coords().to_vec(),
            None => Vec::new(),
        };
        let symbols = self.symbols(&coords);

        let potential = match &self.potential {
            None => None,
            Some(p) => Some(resolve_potential(p, &symbols)?),
        };

        let samples = self.samples.clone().unwrap_or_default();
        let seed = overrides.seed.or(samples.seed).unwrap_or(qe_core::geometry::DEFAULT_SEED);
        let mut plan = SamplePlan::new().with_seed(seed);
        if let Some(k) = overrides.samples.or(samples.count) {
            if k == 0 {
                return Err(bad("/samples/count", "must be positive"));
            }
            plan = plan.with_count(k);
        }
        let tolerance = overrides.tolerance.or(samples.tolerance);
        if let Some(t) = tolerance {
            if !(t > 0.0) {
                return Err(bad("/samples/tolerance", "must be positive"));
            }
            plan = plan.with_tolerance(t);
        }
        for (name, [lo, hi]) in &samples.bounds {
            if !coords.contains(name) {
                return Err(bad(format!("/samples/box/{name}"), "not a coordinate"));
            }
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(bad(format!("/samples/box/{name}"), "need finite lo < hi"));
            }
            plan = plan.with_interval(name, *lo, *hi);
        }
        for (name, v) in &self.parameters {
            if !v.is_finite() {
                return Err(bad(format!("/parameters/{name}"), "must be finite"));
            }
            plan = plan.with_param(name, *v);
        }

        let mut thresholds = Thresholds::default();
        if let Some(t) = &self.thresholds {
            for (key, given, slot) in [
                ("qe", t.qe, &mut thresholds.qe),
                ("lcf", t.lcf, &mut thresholds.lcf),
                ("identity", t.identity, &mut thresholds.identity),
            ] {
                if let Some(v) = given {
                    if !(v > 0.0) {
                        return Err(bad(format!("/thresholds/{key}"), "must be positive"));
                    }
                    *slot = v;
                }
            }
        }
        if let Some(t) = tolerance {
            thresholds.qe = t;
        }

        let ode = match &self.ode {
            None => None,
            Some(o) => Some(self.resolve_ode(o)?),
        };
        Ok(Resolved { metric, potential, plan, seed, thresholds, ode })
    }

    fn resolve_ode(&self, o: &OdeSection) -> Result<OdeProblem, InputError> {
        let params: Vec<&str> = self.parameters.keys().map(String::as_str).collect();
        let a = qe_core::parse(&o.a, &SymbolTable::new(&["u"], &params)).map_err(|e| bad("/ode/a", e))?;
        let values: HashMap<&str, Expr> = self.parameters.iter().map(|(k, v)| (k.as_str(), Expr::real(*v))).collect();
        let a = a.substitute(&values);
        if o.n == 0 {
            return Err(bad("/ode/n", "must be positive"));
        }
        if o.mu == 0.0 || !o.mu.is_finite() {
            return Err(bad("/ode/mu", "the linearising transform needs a finite mu != 0"));
        }
        if !(o.h > 0.0) {
            return Err(bad("/ode/h", "step must be positive"));
        }
        if !(o.interval[0] < o.interval[1]) {
            return Err(bad("/ode/interval", "need start < end"));
        }
        Ok(OdeProblem {
            a,
            n: o.n,
            mu: o.mu,
            init: (o.init[0], o.init[1]),
            interval: (o.interval[0], o.interval[1]),
            h: o.h,
        })
    }

    /// The same problem with `construct` replaced by explicit coordinates,
    /// components and sampling box.
    pub fn expanded(&self) -> Result<ProblemFile, InputError> {
        let Some(c) = &self.construct else {
            return Err(bad("/construct", "missing construct section"));
        };
        let g = construct_metric(c)?;
        let d = g.dim();
        let rows = (0..d)
            .map(|i| (0..d).map(|j| (j >= i).then(|| g.component(i, j).to_string())).collect())
            .collect();
        let mut samples = self.samples.clone().unwrap_or_default();
        if let Some(bounds) = g.chart().bounds() {
            for (name, (lo, hi)) in g.chart().coords().iter().zip(bounds) {
                let entry = samples.bounds.entry(name.clone()).or_insert([*lo, *hi]);
                entry[0] = entry[0].max(*lo);
                entry[1] = entry[1].min(*hi);
            }
        }
        Ok(ProblemFile {
            coordinates: Some(g.chart().coords().to_vec()),
            metric: Some(rows),
            construct: None,
            samples: Some(samples),
            ..self.clone()
        })
    }
}

fn resolve_potential(p: &PotentialSection, symbols: &SymbolTable) -> Result<PotentialData, InputError> {
    let f = qe_core::parse(&p.f, symbols).map_err(|e| bad("/potential/f", e))?;
    let data = match (p.mu, p.m) {
        (Some(mu), m) => {
            if !mu.is_finite() {
                return Err(bad("/potential/mu", "must be finite"));
            }
            let d = PotentialData::new(f, mu);
            match m {
                Some(m) => d.with_m(m).map_err(|e| bad("/potential/m", e))?,
                None => d,
            }
        }
        (None, Some(m)) => PotentialData::from_m(f, m).map_err(|e| bad("/potential/m", e))?,
        (None, None) => return Err(bad("/potential/mu", "missing mu (or m)")),
    };
    Ok(match p.lambda {
        Some(l) if !l.is_finite() => return Err(bad("/potential/lambda", "must be finite")),
        Some(l) => data.with_lambda(l),
        None => data,
    })
}

fn explicit_metric(
    chart: CoordinateChart,
    rows: &[Vec<Option<String>>],
    symbols: &SymbolTable,
) -> Result<MetricField, InputError> {
    let d = chart.dim();
    if rows.len() != d {
        return Err(bad("/metric", format!("expected {d} rows for {d} coordinates, got {}", rows.len())));
    }
    let mut comps: Vec<Vec<Option<Expr>>> = vec![vec![None; d]; d];
    for (i, row) in rows.iter().enumerate() {
        let offset = match row.len() {
            n if n == d => 0,
            n if n == d - i => i,
            n => return Err(bad(format!("/metric/{i}"), format!("row has {n} entries; expected {d} or {}", d - i))),
        };
        for (k, entry) in row.iter().enumerate() {
            let j = k + offset;
            let Some(src) = entry else {
                if j >= i {
                    return Err(bad(format!("/metric/{i}/{k}"), "entries on or above the diagonal are required"));
                }
                continue;
            };
            let e = qe_core::parse(src, symbols).map_err(|e| bad(format!("/metric/{i}/{k}"), e))?;
            comps[i][j] = Some(e);
        }
    }
    let mut full = vec![vec![Expr::zero(); d]; d];
    for i in 0..d {
        for j in i..d {
            let upper = comps[i][j].clone().expect("checked above");
            if let Some(lower) = &comps[j][i] {
                if lower != &upper && i != j {
                    // lower entries only exist in full-length rows
                    return Err(bad(
                        format!("/metric/{j}/{i}"),
                        format!("`{lower}` differs from its mirror `{upper}`; the metric must be symmetric"),
                    ));
                }
            }
            full[i][j] = upper.clone();
            full[j][i] = upper;
        }
    }
    MetricField::new(chart, full).map_err(|e| bad("/metric", e))
}

fn construct_metric(c: &Construct) -> Result<MetricField, InputError> {
    match c {
        Construct::Ppwave(p) => {
            let ptr = "/construct/ppwave";
            let spec = match (&p.h, &p.a) {
                (Some(h), None) if p.b.is_none() && p.c.is_none() => {
                    PpWaveSpec::parse(p.n, h).map_err(|e| bad(format!("{ptr}/H"), e))?
                }
                (None, Some(a)) => {
                    let u = |s: &str, at: String| qe_core::parse_with(s, &["u"]).map_err(|e| bad(at, e));
                    let a = u(a, format!("{ptr}/a"))?;
                    let b = match &p.b {
                        Some(b) => b.iter().enumerate().map(|(i, s)| u(s, format!("{ptr}/b/{i}"))).collect::<Result<_, _>>()?,
                        None => vec![Expr::zero(); p.n],
                    };
                    let c = match &p.c {
                        Some(c) => u(c, format!("{ptr}/c"))?,
                        None => Expr::zero(),
                    };
                    PpWaveSpec::conformally_flat(p.n, a, b, c).map_err(|e| bad(ptr, e))?
                }
                _ => return Err(bad(ptr, "give either \"H\" or the coefficients \"a\" (with optional \"b\", \"c\")")),
            };
            Ok(spec.metric())
        }
        Construct::CahenWallach { a } => {
            Ok(PpWaveSpec::cahen_wallach(a).map_err(|e| bad("/construct/cahen_wallach/a", e))?.metric())
        }
        Construct::TwoSymmetric { a_diag, b } => {
            let n = a_diag.len();
            let b = b.clone().unwrap_or_else(|| vec![vec![0.0; n]; n]);
            Ok(PpWaveSpec::two_symmetric(a_diag, &b).map_err(|e| bad("/construct/two_symmetric", e))?.metric())
        }
        Construct::Warped { epsilon, psi, fiber, fiber_dim } => {
            let ptr = "/construct/warped";
            let model = FiberModel::from_name(fiber).ok_or_else(|| {
                let names: Vec<_> = FiberModel::ALL.iter().map(|m| m.name()).collect();
                bad(format!("{ptr}/fiber"), format!("unknown fiber '{fiber}'; expected one of {names:?}"))
            })?;
            let psi = qe_core::parse_with(psi, &["t"]).map_err(|e| bad(format!("{ptr}/psi"), e))?;
            let spec = WarpedSpec::new(*epsilon, psi, model, *fiber_dim).map_err(|e| bad(ptr, e))?;
            spec.metric().map_err(|e| bad(ptr, e))
        }
    }
}

/// `a.b[2].c` → `/a/b/2/c`.
fn json_pointer(path: &str) -> String {
    if path == "." || path.is_empty() {
        return String::new();
    }
    let mut out = String::new();
    for part in path.split('.') {
        let mut rest = part;
        while let Some(open) = rest.find('[') {
            if open > 0 {
                out.push('/');
                out.push_str(&rest[..open]);
            }
            let close = rest[open..].find(']').map(|c| c + open).unwrap_or(rest.len());
            out.push('/');
            out.push_str(&rest[open + 1..close]);
            rest = rest.get(close + 1..).unwrap_or("");
        }
        if !rest.is_empty() {
            out.push('/');
            out.push_str(rest);
        }
    }
    out
}
