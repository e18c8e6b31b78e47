//! Meromorphic metrics, their Christoffel symbols, and degeneracy tests.
//!
//! Coordinates are `u1..uN` in expression text and `0..N-1` in this API.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::expr::{DualValue, EvalError, Expr};

/// Relative determinant threshold for [`is_metrically_ordinary`].
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("dimension must be at least 1")]
    EmptyDimension,
    #[error("expected {expected} entries, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("coefficient ({i}, {j}) differs from ({j}, {i})")]
    Asymmetric { i: usize, j: usize },
    #[error("coefficient {name} references u{var}, outside its allowed variables")]
    Variable { name: String, var: usize },
    #[error("coefficient {0} is identically zero")]
    ZeroCoefficient(String),
    #[error("point dimension {got} does not match metric dimension {expected}")]
    PointDimension { expected: usize, got: usize },
    #[error("point is not metrically ordinary")]
    NotOrdinary,
    #[error("coefficient {name} has a pole: {source}")]
    CoefficientPole { name: String, source: EvalError },
}

/// Symmetric coefficient matrix; only `i ≤ j` is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    dim: usize,
    upper: Vec<Expr>,
}

fn upper_index(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * dim - i * (i + 1) / 2 + j
}

impl MetricSpec {
    /// From the row-major upper triangle `g_00, g_01, .., g_0N, g_11, ..`.
    pub fn from_upper(dim: usize, upper: Vec<Expr>) -> Result<Self, MetricError> {
        if dim == 0 {
            return Err(MetricError::EmptyDimension);
        }
        let expected = dim * (dim + 1) / 2;
        if upper.len() != expected {
            return Err(MetricError::Shape {
                expected,
                got: upper.len(),
            });
        }
        for (n, e) in upper.iter().enumerate() {
            if let Some(v) = e.max_var().filter(|v| *v >= dim) {
                return Err(MetricError::Variable {
                    name: format!("g[{n}]"),
                    var: v + 1,
                });
            }
        }
        Ok(Self { dim, upper })
    }

    /// From a full matrix, which must be structurally symmetric.
    pub fn from_matrix(rows: Vec<Vec<Expr>>) -> Result<Self, MetricError> {
        let dim = rows.len();
        if dim == 0 {
            return Err(MetricError::EmptyDimension);
        }
        for r in &rows {
            if r.len() != dim {
                return Err(MetricError::Shape {
                    expected: dim,
                    got: r.len(),
                });
            }
        }
        let mut upper = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in i..dim {
                if rows[i][j] != rows[j][i] {
                    return Err(MetricError::Asymmetric { i, j });
                }
                upper.push(rows[i][j].clone());
            }
        }
        Self::from_upper(dim, upper)
    }

    pub fn diagonal(entries: Vec<Expr>) -> Result<Self, MetricError> {
        let dim = entries.len();
        let mut upper = vec![Expr::real(0.0); dim * (dim + 1) / 2];
        for (i, e) in entries.into_iter().enumerate() {
            upper[upper_index(dim, i, i)] = e;
        }
        Self::from_upper(dim, upper)
    }

    /// Identity metric on ℂᴺ.
    pub fn euclidean(dim: usize) -> Result<Self, MetricError> {
        Self::diagonal(vec![Expr::real(1.0); dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.upper[upper_index(self.dim, i, j)]
    }

    /// Every coefficient multiplied by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            dim: self.dim,
            upper: self
                .upper
                .iter()
                .map(|e| Expr::constant(c) * e.clone())
                .collect(),
        }
    }

    fn check_point(&self, p: &[Complex64]) -> Result<(), MetricError> {
        if p.len() != self.dim {
            return Err(MetricError::PointDimension {
                expected: self.dim,
                got: p.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, p: &[Complex64]) -> Result<DMatrix<Complex64>, MetricError> {
        self.check_point(p)?;
        let n = self.dim;
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self
                    .get(i, j)
                    .eval(p)
                    .map_err(|source| MetricError::CoefficientPole {
                        name: format!("g{}{}", i + 1, j + 1),
                        source,
                    })?;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Ok(g)
    }

    /// Values and `dg[m][(i, j)] = ∂g_ij/∂u^m`.
    pub fn eval_with_partials(
        &self,
        p: &[Complex64],
    ) -> Result<(DMatrix<Complex64>, Vec<DMatrix<Complex64>>), MetricError> {
        self.check_point(p)?;
        let n = self.dim;
        let mut g = DMatrix::zeros(n, n);
        let mut dg = vec![DMatrix::zeros(n, n); n];
        for i in 0..n {
            for j in i..n {
                let d: DualValue = self.get(i, j).eval_with_partials(p).map_err(|source| {
                    MetricError::CoefficientPole {
                        name: format!("g{}{}", i + 1, j + 1),
                        source,
                    }
                })?;
                g[(i, j)] = d.value;
                g[(j, i)] = d.value;
                for (m, dm) in dg.iter_mut().enumerate() {
                    dm[(i, j)] = d.partials[m];
                    dm[(j, i)] = d.partials[m];
                }
            }
        }
        Ok((g, dg))
    }
}

fn nondegenerate(g: &DMatrix<Complex64>) -> bool {
    let n = g.nrows() as i32;
    let scale = g.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(scale > 0.0) || !scale.is_finite() {
        return false;
    }
    let det = g.clone().lu().determinant();
    det.norm() > DEGENERACY_TOL * scale.powi(n)
}

/// True iff every coefficient is finite at `p` and `|det g| > 1e−12·(max|g_ij|)^N`.
pub fn is_metrically_ordinary(m: &MetricSpec, p: &[Complex64]) -> bool {
    m.eval(p).is_ok_and(|g| nondegenerate(&g))
}

/// `Γ^k_ij`, symmetric in `(i, j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChristoffelTensor {
    dim: usize,
    /// Indexed `[k][i][j]`, flattened.
    data: Vec<Complex64>,
}

impl ChristoffelTensor {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> Complex64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    /// Sets `Γ^k_ij` and `Γ^k_ji`.
    pub fn set(&mut self, k: usize, i: usize, j: usize, v: Complex64) {
        let n = self.dim;
        self.data[(k * n + i) * n + j] = v;
        self.data[(k * n + j) * n + i] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |Γ − Γ'| / max(|Γ|, |Γ'|)`, or the absolute difference when both vanish.
    pub fn relative_difference(&self, other: &Self) -> f64 {
        let diff = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let scale = self.max_abs().max(other.max_abs());
        if scale > 0.0 {
            diff / scale
        } else {
            diff
        }
    }

    /// Nested `[k][i][j]` view.
    pub fn to_nested(&self) -> Vec<Vec<Vec<Complex64>>> {
        let n = self.dim;
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| (0..n).map(|j| self.get(k, i, j)).collect())
                    .collect()
            })
            .collect()
    }
}

/// `Γ^k_ij = ½ Σ_m g^{km}(g_{im,j} + g_{jm,i} − g_{ij,m})`.
pub fn christoffel_general(
    m: &MetricSpec,
    p: &[Complex64],
) -> Result<ChristoffelTensor, MetricError> {
    let (g, dg) = m.eval_with_partials(p)?;
    if !nondegenerate(&g) {
        return Err(MetricError::NotOrdinary);
    }
    let ginv = g.lu().try_inverse().ok_or(MetricError::NotOrdinary)?;
    let n = m.dim();
    let mut out = ChristoffelTensor::zeros(n);
    for i in 0..n {
        for j in i..n {
            for k in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for l in 0..n {
                    let ginv_kl = ginv[(k, l)];
                    if ginv_kl == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    acc += ginv_kl * (dg[j][(i, l)] + dg[i][(j, l)] - dg[l][(i, j)]);
                }
                out.set(k, i, j, 0.5 * acc);
            }
        }
    }
    Ok(out)
}

/// Warped product `b₁(u¹)du¹² + Σ_k a_k(u¹) f_k(u^k) (du^k)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedSpec {
    dim: usize,
    b1: Expr,
    /// `a[k-2]` is `a_k`.
    a: Vec<Expr>,
    /// `f[k-2]` is `f_k`.
    f: Vec<Expr>,
}

impl WarpedSpec {
    pub fn new(b1: Expr, a: Vec<Expr>, f: Vec<Expr>) -> Result<Self, MetricError> {
        if a.len() != f.len() {
            return Err(MetricError::Shape {
                expected: a.len(),
                got: f.len(),
            });
        }
        let dim = a.len() + 1;
        let only = |e: &Expr, name: String, var: usize| -> Result<(), MetricError> {
            if e.is_zero() {
                return Err(MetricError::ZeroCoefficient(name));
            }
            if let Some(v) = e.variables().into_iter().find(|v| *v != var) {
                return Err(MetricError::Variable { name, var: v + 1 });
            }
            Ok(())
        };
        only(&b1, "b1".into(), 0)?;
        for (k, (ak, fk)) in a.iter().zip(&f).enumerate() {
            only(ak, format!("a{}", k + 2), 0)?;
            only(fk, format!("f{}", k + 2), k + 1)?;
        }
        Ok(Self { dim, b1, a, f })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn b1(&self) -> &Expr {
        &self.b1
    }

    /// `a_k` for `k` in `2..=N`.
    pub fn a(&self, k: usize) -> &Expr {
        &self.a[k - 2]
    }

    /// `f_k` for `k` in `2..=N`.
    pub fn f(&self, k: usize) -> &Expr {
        &self.f[k - 2]
    }

    pub fn to_metric(&self) -> MetricSpec {
        let mut diag = vec![self.b1.clone()];
        diag.extend(
            self.a
                .iter()
                .zip(&self.f)
                .map(|(a, f)| a.clone() * f.clone()),
        );
        MetricSpec::diagonal(diag).expect("warped specs induce valid diagonal metrics")
    }

    /// Values and first derivatives of `b₁`, `a_k` in `u¹` and `f_k` in `u^k`.
    pub fn eval_coefficients(&self, p: &[Complex64]) -> Result<WarpedValues, MetricError> {
        if p.len() != self.dim {
            return Err(MetricError::PointDimension {
                expected: self.dim,
                got: p.len(),
            });
        }
        let pole = |name: String| move |source| MetricError::CoefficientPole { name, source };
        let b = self.b1.eval_with_partials(p).map_err(pole("b1".into()))?;
        let mut a = Vec::with_capacity(self.dim - 1);
        let mut f = Vec::with_capacity(self.dim - 1);
        for k in 2..=self.dim {
            let ak = self
                .a(k)
                .eval_with_partials(p)
                .map_err(pole(format!("a{k}")))?;
            let fk = self
                .f(k)
                .eval_with_partials(p)
                .map_err(pole(format!("f{k}")))?;
            a.push((ak.value, ak.partials[0]));
            f.push((fk.value, fk.partials[k - 1]));
        }
        Ok(WarpedValues {
            b1: (b.value, b.partials[0]),
            a,
            f,
        })
    }
}

/// `(value, derivative)` pairs of warped coefficients at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedValues {
    pub b1: (Complex64, Complex64),
    /// Index `k-2` for `a_k`.
    pub a: Vec<(Complex64, Complex64)>,
    /// Index `k-2` for `f_k`.
    pub f: Vec<(Complex64, Complex64)>,
}

/// Closed-form symbols of a warped product:
/// `Γ¹₁₁ = b₁′/2b₁`, `Γ¹_kk = −a_k′f_k/2b₁`, `Γ^k_kk = f_k′/2f_k`,
/// `Γ^k_1k = a_k′/2a_k`, all others zero.
pub fn christoffel_warped(
    w: &WarpedSpec,
    p: &[Complex64],
) -> Result<ChristoffelTensor, MetricError> {
    let v = w.eval_coefficients(p)?;
    let zero = Complex64::new(0.0, 0.0);
    if v.b1.0 == zero || v.a.iter().chain(&v.f).any(|(x, _)| *x == zero) {
        return Err(MetricError::NotOrdinary);
    }
    if !is_metrically_ordinary(&w.to_metric(), p) {
        return Err(MetricError::NotOrdinary);
    }
    let n = w.dim();
    let mut out = ChristoffelTensor::zeros(n);
    let (b, db) = v.b1;
    out.set(0, 0, 0, db / (2.0 * b));
    for k in 1..n {
        let (a, da) = v.a[k - 1];
        let (f, df) = v.f[k - 1];
        out.set(0, k, k, -da * f / (2.0 * b));
        out.set(k, k, k, df / (2.0 * f));
        out.set(k, 0, k, da / (2.0 * a));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn e(text: &str) -> Expr {
        Expr::parse(text).unwrap()
    }

    fn clifton_pohl() -> MetricSpec {
        let g = e("1/(2*(u1^2 + u2^2))");
        MetricSpec::from_matrix(vec![
            vec![Expr::real(0.0), g.clone()],
            vec![g, Expr::real(0.0)],
        ])
        .unwrap()
    }

    #[test]
    fn ordinariness() {
        let id = MetricSpec::euclidean(2).unwrap();
        assert!(is_metrically_ordinary(&id, &[c(3.0, 1.0), c(-2.0, 0.5)]));
        assert!(!is_metrically_ordinary(
            &clifton_pohl(),
            &[c(1.0, 0.0), c(0.0, 1.0)]
        ));
        assert!(is_metrically_ordinary(
            &clifton_pohl(),
            &[c(1.0, 0.0), c(1.0, 0.0)]
        ));
        let degenerate = MetricSpec::diagonal(vec![e("u1"), Expr::real(1.0)]).unwrap();
        assert!(!is_metrically_ordinary(
            &degenerate,
            &[c(0.0, 0.0), c(5.0, 0.0)]
        ));
    }

    #[test]
    fn flat_symbols_vanish() {
        let id = MetricSpec::euclidean(3).unwrap();
        let g = christoffel_general(&id, &[c(1.0, 2.0), c(0.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert_eq!(g.max_abs(), 0.0);
        let w = WarpedSpec::new(
            Expr::real(1.0),
            vec![Expr::real(1.0)],
            vec![Expr::real(1.0)],
        )
        .unwrap();
        assert_eq!(
            christoffel_warped(&w, &[c(0.3, 0.0), c(0.1, 0.0)])
                .unwrap()
                .max_abs(),
            0.0
        );
    }

    #[test]
    fn clifton_pohl_symbols() {
        let g = christoffel_general(&clifton_pohl(), &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let expected = if k == i && i == j { -1.0 } else { 0.0 };
                    assert!((g.get(k, i, j) - expected).norm() < 1e-14, "{k}{i}{j}");
                }
            }
        }
    }

    #[test]
    fn exponential_warp_by_hand() {
        let w =
            WarpedSpec::new(Expr::real(1.0), vec![e("exp(2*u1)")], vec![Expr::real(1.0)]).unwrap();
        let p = [c(0.0, 0.0), c(0.7, 0.0)];
        let t = christoffel_warped(&w, &p).unwrap();
        assert!((t.get(0, 1, 1) + 1.0).norm() < 1e-15);
        assert!((t.get(1, 0, 1) - 1.0).norm() < 1e-15);
        assert!((t.get(1, 1, 0) - 1.0).norm() < 1e-15);
        let g = christoffel_general(&w.to_metric(), &p).unwrap();
        assert!(t.relative_difference(&g) < 1e-14);
    }

    #[test]
    fn warped_variable_rules() {
        assert!(WarpedSpec::new(e("u2"), vec![Expr::real(1.0)], vec![Expr::real(1.0)]).is_err());
        assert!(WarpedSpec::new(Expr::real(1.0), vec![Expr::real(1.0)], vec![e("u1")]).is_err());
        assert!(WarpedSpec::new(
            Expr::real(0.0),
            vec![Expr::real(1.0)],
            vec![Expr::real(1.0)]
        )
        .is_err());
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let r = MetricSpec::from_matrix(vec![
            vec![Expr::real(1.0), e("u1")],
            vec![e("u2"), Expr::real(1.0)],
        ]);
        assert_eq!(r, Err(MetricError::Asymmetric { i: 0, j: 1 }));
    }

    #[test]
    fn upper_indexing() {
        let n = 4;
        let mut seen = Vec::new();
        for i in 0..n {
            for j in i..n {
                seen.push(upper_index(n, i, j));
            }
        }
        assert_eq!(seen, (0..10).collect::<Vec<_>>());
        assert_eq!(upper_index(n, 3, 1), upper_index(n, 1, 3));
    }
}
