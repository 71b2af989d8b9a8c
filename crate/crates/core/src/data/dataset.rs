use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Raw predictors and response.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        let (n, p) = x.dim();
        if n == 0 || p == 0 {
            return Err(Error::Dimension(format!("dataset is {n}x{p}")));
        }
        if y.len() != n {
            return Err(Error::Dimension(format!(
                "{n} rows of predictors but {} responses",
                y.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("predictors"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("response"));
        }
        Ok(Self {
            x,
            y,
            feature_names: None,
        })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.p() {
            return Err(Error::Dimension(format!(
                "{} feature names for {} columns",
                names.len(),
                self.p()
            )));
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn standardize(&self) -> Result<StandardizedDesign> {
        standardize(self)
    }
}

/// Predictors centered to mean zero and scaled to unit variance (denominator
/// `N`), together with the statistics needed to undo the transformation.
#[derive(Debug, Clone)]
pub struct StandardizedDesign {
    xs: Array2<f64>,
    centers: Array1<f64>,
    scales: Array1<f64>,
    y: Array1<f64>,
    y_centered: Array1<f64>,
    y_mean: f64,
    gram: Array2<f64>,
    feature_names: Option<Vec<String>>,
}

pub fn standardize(d: &Dataset) -> Result<StandardizedDesign> {
    let n = d.n() as f64;
    let centers = d.x.mean_axis(Axis(0)).expect("non-empty");
    let mut xs = &d.x - &centers;
    let mut scales = Array1::zeros(d.p());
    for (j, mut col) in xs.axis_iter_mut(Axis(1)).enumerate() {
        let var = col.iter().map(|v| v * v).sum::<f64>() / n;
        let magnitude = d.x.column(j).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(var.sqrt() > 1e-12 * magnitude.max(f64::MIN_POSITIVE)) {
            return Err(Error::ZeroVariance { column: j });
        }
        let s = var.sqrt();
        col.mapv_inplace(|v| v / s);
        scales[j] = s;
    }
    // Second centering pass removes the rounding left by the first.
    for mut col in xs.axis_iter_mut(Axis(1)) {
        let m = col.sum() / n;
        col.mapv_inplace(|v| v - m);
    }
    let y_mean = d.y.sum() / n;
    let y_centered = d.y.mapv(|v| v - y_mean);
    let gram = xs.t().dot(&xs);
    Ok(StandardizedDesign {
        xs,
        centers,
        scales,
        y: d.y.clone(),
        y_centered,
        y_mean,
        gram,
        feature_names: d.feature_names.clone(),
    })
}

impl StandardizedDesign {
    pub fn n(&self) -> usize {
        self.xs.nrows()
    }

    pub fn p(&self) -> usize {
        self.xs.ncols()
    }

    pub fn xs(&self) -> ArrayView2<'_, f64> {
        self.xs.view()
    }

    pub fn centers(&self) -> ArrayView1<'_, f64> {
        self.centers.view()
    }

    pub fn scales(&self) -> ArrayView1<'_, f64> {
        self.scales.view()
    }

    /// Response as supplied (needed by losses that are not location invariant).
    pub fn y(&self) -> ArrayView1<'_, f64> {
        self.y.view()
    }

    pub fn y_centered(&self) -> ArrayView1<'_, f64> {
        self.y_centered.view()
    }

    pub fn y_mean(&self) -> f64 {
        self.y_mean
    }

    /// `XsᵀXs`, computed once.
    pub fn gram(&self) -> ArrayView2<'_, f64> {
        self.gram.view()
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// `Xsᵀ r`.
    pub fn correlations(&self, r: ArrayView1<f64>) -> Array1<f64> {
        self.xs.t().dot(&r)
    }

    /// `Xs β` for a collapsed coefficient vector.
    pub fn fitted(&self, beta: ArrayView1<f64>) -> Array1<f64> {
        self.xs.dot(&beta)
    }

    /// Centered response minus the fit.
    pub fn residual(&self, beta: ArrayView1<f64>) -> Array1<f64> {
        &self.y_centered - &self.fitted(beta)
    }

    pub fn rss(&self, beta: ArrayView1<f64>) -> f64 {
        let r = self.residual(beta);
        r.dot(&r)
    }

    /// Coefficients on the original predictor scale, with the intercept that
    /// reproduces the standardized fit.
    pub fn to_original_scale(&self, beta: ArrayView1<f64>) -> (f64, Array1<f64>) {
        let coefs = &beta / &self.scales;
        let intercept = self.y_mean - coefs.dot(&self.centers);
        (intercept, coefs)
    }

    /// Predictions for raw predictor rows using standardized coefficients.
    pub fn predict(&self, x_raw: ArrayView2<f64>, beta: ArrayView1<f64>) -> Array1<f64> {
        let (intercept, coefs) = self.to_original_scale(beta);
        x_raw.dot(&coefs) + intercept
    }
}
