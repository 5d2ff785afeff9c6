use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::interp;

/// Closed-form evaluator attached to a sampled function.
pub type Evaluator = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Complex function sampled on a [`UniformGrid`].
///
/// When the function is known in closed form an evaluator is kept alongside
/// the samples and used for off-grid evaluation; otherwise off-grid values come
/// from cubic interpolation.
#[derive(Clone)]
pub struct SampledFunction {
    grid: UniformGrid,
    values: Vec<Complex64>,
    decay_certificate: f64,
    exact: Option<Evaluator>,
}

impl fmt::Debug for SampledFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledFunction")
            .field("grid", &self.grid)
            .field("decay_certificate", &self.decay_certificate)
            .field("closed_form", &self.exact.is_some())
            .finish_non_exhaustive()
    }
}

fn decay_certificate(values: &[Complex64]) -> f64 {
    let n = values.len();
    let edge = (n / 40).max(1); // 2.5% on each side
    values[..edge].iter().chain(&values[n - edge..]).map(|v| v.norm()).fold(0.0, f64::max)
}

impl SampledFunction {
    pub fn from_samples(grid: UniformGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!("expected {} samples, got {}", grid.len(), values.len())));
        }
        if let Some(k) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Numeric(format!("non-finite sample at node {k}")));
        }
        let decay_certificate = decay_certificate(&values);
        Ok(Self { grid, values, decay_certificate, exact: None })
    }

    pub fn from_real_samples(grid: UniformGrid, values: &[f64]) -> Result<Self> {
        Self::from_samples(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Samples a closed-form function and keeps it for off-grid evaluation.
    pub fn from_fn<F>(grid: UniformGrid, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        let values = grid.nodes().map(&f).collect();
        let mut s = Self::from_samples(grid, values)?;
        s.exact = Some(Arc::new(f));
        Ok(s)
    }

    pub fn from_real_fn<F>(grid: UniformGrid, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_fn(grid, move |x| Complex64::new(f(x), 0.0))
    }

    pub fn zeros(grid: UniformGrid) -> Self {
        Self::from_fn(grid, |_| Complex64::new(0.0, 0.0)).expect("zero is finite")
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn decay_certificate(&self) -> f64 {
        self.decay_certificate
    }

    pub fn has_closed_form(&self) -> bool {
        self.exact.is_some()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// True when the outer samples are below `1e-10 * max|f|`.
    pub fn is_well_decayed(&self) -> bool {
        self.decay_certificate <= 1e-10 * self.max_abs()
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        match &self.exact {
            Some(f) => f(x),
            None => interp::cubic(&self.grid, &self.values, x),
        }
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// Trapezoidal `∫ f dx` (spectrally accurate for decaying smooth data).
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.grid.spacing()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `⟨self, other⟩ = ∫ self · conj(other)`.
    pub fn inner(&self, other: &SampledFunction) -> Complex64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum::<Complex64>() * self.grid.spacing()
    }

    pub fn conj(&self) -> Self {
        let exact = self.exact.clone().map(|f| -> Evaluator { Arc::new(move |x| f(x).conj()) });
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v.conj()).collect(),
            decay_certificate: self.decay_certificate,
            exact,
        }
    }

    /// Pointwise `self · conj(other)`.
    pub fn mul_conj(&self, other: &SampledFunction) -> Self {
        let values: Vec<Complex64> = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).collect();
        let exact = match (&self.exact, &other.exact) {
            (Some(f), Some(g)) => {
                let (f, g) = (f.clone(), g.clone());
                Some(Arc::new(move |x| f(x) * g(x).conj()) as Evaluator)
            }
            _ => None,
        };
        let decay_certificate = decay_certificate(&values);
        Self { grid: self.grid, values, decay_certificate, exact }
    }

    /// `a·self + other`.
    pub fn axpy(&self, a: Complex64, other: &SampledFunction) -> Self {
        let values: Vec<Complex64> = self.values.iter().zip(&other.values).map(|(x, y)| a * x + y).collect();
        let exact = match (&self.exact, &other.exact) {
            (Some(f), Some(g)) => {
                let (f, g) = (f.clone(), g.clone());
                Some(Arc::new(move |x| a * f(x) + g(x)) as Evaluator)
            }
            _ => None,
        };
        let decay_certificate = decay_certificate(&values);
        Self { grid: self.grid, values, decay_certificate, exact }
    }

    /// Writes `x,re,im` rows with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,re,im")?;
        for (x, v) in self.grid.nodes().zip(&self.values) {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", x, v.re, v.im)?;
        }
        Ok(())
    }

    /// Reads the layout produced by [`write_csv`](Self::write_csv). The abscissae
    /// must form a power-of-two uniform grid symmetric about the origin.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut xs = Vec::new();
        let mut vals = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected 3 columns", i + 1)));
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)));
            xs.push(parse(cols[0])?);
            vals.push(Complex64::new(parse(cols[1])?, parse(cols[2])?));
        }
        if xs.len() < 2 {
            return Err(Error::Parse("too few rows".into()));
        }
        let spacing = xs[1] - xs[0];
        let grid = UniformGrid::new(spacing * xs.len() as f64 / 2.0, xs.len())?;
        for (k, &x) in xs.iter().enumerate() {
            if (x - grid.node(k)).abs() > 1e-9 * grid.half_width() {
                return Err(Error::Parse(format!("row {k}: abscissa {x} is off the uniform grid")));
            }
        }
        Self::from_samples(grid, vals)
    }
}
