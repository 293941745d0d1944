//! Problem files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use monobvp_core::boundary::{parse_multivector, SampledTable};
use monobvp_core::{BoundaryFunction, HilbertProblem, MultiIndex, Multivector, Paravector, QuadratureScheme, Signature};
use serde::Deserialize;

use crate::CliError;

/// The document as written on disk.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub m: i32,
    #[serde(default = "one")]
    pub lambda: String,
    pub c: DatumSpec,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub queries: QuerySpec,
    #[serde(default)]
    pub free_constants: BTreeMap<String, String>,
    #[serde(default = "yes")]
    pub verify: bool,
}

fn one() -> String {
    "1".into()
}

fn yes() -> bool {
    true
}

/// Either an expression or a table of samples.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum DatumSpec {
    Expression(String),
    Samples(SamplesSpec),
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SamplesSpec {
    /// CSV path, relative to the problem file.
    pub samples: PathBuf,
    pub support_radius: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    #[serde(rename = "R")]
    pub truncation_radius: Option<f64>,
    pub base_grid: Option<usize>,
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct QuerySpec {
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
    pub grid: Option<GridSpec>,
}

/// A tensor grid on the hyperplane, repeated at each height.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// `[lo, hi]` for each hyperplane axis `x0 … x_{n−1}`.
    pub ranges: Vec<[f64; 2]>,
    pub counts: Vec<usize>,
    pub heights: Vec<f64>,
}

/// A problem ready to solve.
#[derive(Clone, Debug)]
pub struct Problem {
    pub hilbert: HilbertProblem,
    pub queries: Vec<Paravector>,
    pub free_constants: Vec<(MultiIndex, Multivector)>,
    pub verify: bool,
}

impl FromStr for ProblemFile {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Problem(e.message().to_string()))
    }
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        text.parse()
    }

    /// Resolves literals, data and queries. `base` is the directory that
    /// sample paths are relative to.
    pub fn resolve(&self, base: &Path, scheme: QuadratureScheme) -> Result<Problem, CliError> {
        let sig = Signature::new(self.n).map_err(|e| CliError::Problem(format!("n: {e}")))?;
        let lambda = parse_multivector(&self.lambda, sig).map_err(|e| CliError::Problem(format!("lambda: {e}")))?;
        let c = match &self.c {
            DatumSpec::Expression(text) => {
                BoundaryFunction::parse(text, sig).map_err(|e| CliError::Problem(format!("c: {e}")))?
            }
            DatumSpec::Samples(spec) => load_samples(&base.join(&spec.samples), sig, spec.support_radius)?,
        };
        let mut free_constants = Vec::new();
        for (key, value) in &self.free_constants {
            let alpha = parse_alpha(key, sig)?;
            let v = parse_multivector(value, sig)
                .map_err(|e| CliError::Problem(format!("free constant {key}: {e}")))?;
            free_constants.push((alpha, v));
        }
        let hilbert = HilbertProblem::new(self.m, lambda, c, scheme)?;
        Ok(Problem {
            hilbert,
            queries: self.queries.expand(sig)?,
            free_constants,
            verify: self.verify,
        })
    }
}

impl QuadratureSpec {
    /// Fills unset fields from `base`.
    pub fn apply(&self, mut base: QuadratureScheme) -> QuadratureScheme {
        if let Some(r) = self.truncation_radius {
            base.truncation_radius = r;
        }
        if let Some(g) = self.base_grid {
            base.base_grid = g;
        }
        if let Some(t) = self.tol {
            base.tolerance = t;
        }
        base
    }
}

impl QuerySpec {
    /// Listed points first, then the grid: heights outermost, then `x0`
    /// slowest to `x_{n−1}` fastest.
    pub fn expand(&self, sig: Signature) -> Result<Vec<Paravector>, CliError> {
        let n = sig.n();
        let mut out = Vec::new();
        for p in &self.points {
            out.push(upper_point(sig, p)?);
        }
        if let Some(g) = &self.grid {
            if g.ranges.len() != n || g.counts.len() != n {
                return Err(CliError::Problem(format!("grid needs {n} ranges and {n} counts")));
            }
            if g.counts.contains(&0) {
                return Err(CliError::Problem("grid counts must be positive".into()));
            }
            let axes: Vec<Vec<f64>> = g
                .ranges
                .iter()
                .zip(&g.counts)
                .map(|(&[lo, hi], &k)| {
                    if k == 1 {
                        vec![lo]
                    } else {
                        (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect()
                    }
                })
                .collect();
            let total: usize = g.counts.iter().product();
            for &h in &g.heights {
                for flat in 0..total {
                    let mut rest = flat;
                    let mut p = vec![0.0; n + 1];
                    for axis in (0..n).rev() {
                        p[axis] = axes[axis][rest % g.counts[axis]];
                        rest /= g.counts[axis];
                    }
                    p[n] = h;
                    out.push(upper_point(sig, &p)?);
                }
            }
        }
        Ok(out)
    }
}

fn upper_point(sig: Signature, p: &[f64]) -> Result<Paravector, CliError> {
    let w = Paravector::new(sig, p).map_err(|e| CliError::Problem(format!("query point {p:?}: {e}")))?;
    if w.height() <= 0.0 {
        return Err(CliError::Problem(format!(
            "query point {p:?} is not in the upper half space (last coordinate must be positive)"
        )));
    }
    Ok(w)
}

/// Accepts `[1,0]`, `1,0` or `1 0`.
pub fn parse_alpha(text: &str, sig: Signature) -> Result<MultiIndex, CliError> {
    let bad = || CliError::Problem(format!("free constant key {text:?} is not a multi-index"));
    let inner = text.trim().trim_start_matches('[').trim_end_matches(']');
    let alpha: Vec<u32> = inner
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    MultiIndex::new(sig, &alpha).map_err(|e| CliError::Problem(format!("free constant key {text:?}: {e}")))
}

/// Sample CSV: a header `x0,…,x{n−1},<blade>,…` and one row per point.
pub fn load_samples(path: &Path, sig: Signature, support_radius: Option<f64>) -> Result<BoundaryFunction, CliError> {
    let n = sig.n();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::csv(path, e))?;
    let headers = reader.headers().map_err(|e| CliError::csv(path, e))?.clone();
    if headers.len() <= n {
        return Err(CliError::Problem(format!(
            "{}: need {n} coordinate columns and at least one blade column",
            path.display()
        )));
    }
    let mut blades = Vec::new();
    for name in headers.iter().skip(n) {
        let b = parse_multivector(name, sig)
            .map_err(|e| CliError::Problem(format!("{}: column {name:?}: {e}", path.display())))?;
        blades.push(b);
    }
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::csv(path, e))?;
        let nums: Vec<f64> = record
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::Problem(format!("{}: row {} has a non-numeric entry", path.display(), row + 2)))?;
        points.push(nums[..n].to_vec());
        let mut v = Multivector::zero(sig);
        for (b, x) in blades.iter().zip(&nums[n..]) {
            v = v + b.scale(*x);
        }
        values.push(v);
    }
    let table = SampledTable::new(sig, &points, &values, support_radius)
        .map_err(|e| CliError::Problem(format!("{}: {e}", path.display())))?;
    Ok(BoundaryFunction::sampled(table))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file() {
        let f = ProblemFile::from_str("n = 1\nm = -1\nc = \"gauss(x)\"\n").unwrap();
        assert_eq!(f.lambda, "1");
        assert!(f.verify);
        assert_eq!(f.c, DatumSpec::Expression("gauss(x)".into()));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ProblemFile::from_str("n = 1\nm = -1\nc = \"0\"\nlamda = \"2\"\n").unwrap_err();
        assert!(err.to_string().contains("lamda"), "{err}");
        let err = ProblemFile::from_str("n = 1\nm = 0\nc = \"0\"\n[quadrature]\nr = 3.0\n").unwrap_err();
        assert!(err.to_string().contains("unknown field"), "{err}");
    }

    #[test]
    fn grid_order() {
        let f = ProblemFile::from_str(
            "n = 2\nm = 0\nc = \"0\"\n[queries]\npoints = [[0.0, 0.0, 1.0]]\n[queries.grid]\nranges = [[0.0, 1.0], [-1.0, 1.0]]\ncounts = [2, 3]\nheights = [0.5]\n",
        )
        .unwrap();
        let pts = f.queries.expand(Signature::new(2).unwrap()).unwrap();
        assert_eq!(pts.len(), 7);
        assert_eq!(pts[1].components(), &[0.0, -1.0, 0.5]);
        assert_eq!(pts[2].components(), &[0.0, 0.0, 0.5]);
        assert_eq!(pts[4].components(), &[1.0, -1.0, 0.5]);
    }

    #[test]
    fn points_must_be_above_the_hyperplane() {
        let f = ProblemFile::from_str("n = 1\nm = 0\nc = \"0\"\n[queries]\npoints = [[0.0, 0.0]]\n").unwrap();
        assert!(f.queries.expand(Signature::new(1).unwrap()).is_err());
    }

    #[test]
    fn multi_index_keys() {
        let s = Signature::new(2).unwrap();
        assert_eq!(parse_alpha("[1,0]", s).unwrap(), MultiIndex::new(s, &[1, 0]).unwrap());
        assert_eq!(parse_alpha("0 2", s).unwrap(), MultiIndex::new(s, &[0, 2]).unwrap());
        assert!(parse_alpha("[1]", s).is_err());
        assert!(parse_alpha("a,b", s).is_err());
    }
}
