//! Trigonometric coefficient model on `[0, 1]`.
//!
//! Coefficient layout: index 0 is the constant, `2k − 1` is `cos(k t)` and
//! `2k` is `sin(k t)` for `k = 1..=modes`. Differentiation acts exactly on
//! coefficients; sup norms are taken over a uniform grid and then sharpened
//! by locating the critical points of the trigonometric polynomial.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct TrigBasis {
    modes: usize,
    grid: Vec<f64>,
    /// `grid.len() × dim` basis values.
    table: DMatrix<f64>,
}

impl TrigBasis {
    pub fn new(modes: usize, grid_size: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidParameter("trig model needs at least one mode".into()));
        }
        if grid_size < 4 * modes {
            return Err(Error::InvalidParameter(format!(
                "grid size {grid_size} below 4·modes = {}",
                4 * modes
            )));
        }
        let grid: Vec<f64> = (0..grid_size).map(|i| i as f64 / (grid_size - 1) as f64).collect();
        let dim = 2 * modes + 1;
        let mut table = DMatrix::zeros(grid_size, dim);
        for (i, &t) in grid.iter().enumerate() {
            let row = basis_values(modes, t);
            for j in 0..dim {
                table[(i, j)] = row[j];
            }
        }
        Ok(Self { modes, grid, table })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        2 * self.modes + 1
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Coefficient index of `cos(k t)`.
    pub fn cos_index(k: usize) -> usize {
        2 * k - 1
    }

    /// Coefficient index of `sin(k t)`.
    pub fn sin_index(k: usize) -> usize {
        2 * k
    }

    pub fn frequency(index: usize) -> usize {
        index.div_ceil(2)
    }

    pub fn pure_sin(&self, k: usize) -> DVector<f64> {
        let mut c = DVector::zeros(self.dim());
        c[Self::sin_index(k)] = 1.0;
        c
    }

    pub fn pure_cos(&self, k: usize) -> DVector<f64> {
        let mut c = DVector::zeros(self.dim());
        if k == 0 {
            c[0] = 1.0;
        } else {
            c[Self::cos_index(k)] = 1.0;
        }
        c
    }

    pub fn differentiate(&self, c: &DVector<f64>) -> DVector<f64> {
        let mut d = DVector::zeros(c.len());
        for k in 1..=self.modes {
            let kf = k as f64;
            d[Self::cos_index(k)] = kf * c[Self::sin_index(k)];
            d[Self::sin_index(k)] = -kf * c[Self::cos_index(k)];
        }
        d
    }

    pub fn differentiation_matrix(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for k in 1..=self.modes {
            let kf = k as f64;
            m[(Self::cos_index(k), Self::sin_index(k))] = kf;
            m[(Self::sin_index(k), Self::cos_index(k))] = -kf;
        }
        m
    }

    pub fn eval(&self, c: &DVector<f64>, t: f64) -> f64 {
        let row = basis_values(self.modes, t);
        row.iter().zip(c.iter()).map(|(a, b)| a * b).sum()
    }

    /// Row vector of the point-evaluation functional at `t`.
    pub fn evaluation_functional(&self, t: f64) -> DVector<f64> {
        DVector::from_vec(basis_values(self.modes, t))
    }

    pub fn grid_values(&self, c: &DVector<f64>) -> DVector<f64> {
        &self.table * c
    }

    pub fn grid_table(&self) -> &DMatrix<f64> {
        &self.table
    }

    /// `sup_{[0,1]} |f|` for the coefficient vector `c`. `derivative` must be
    /// the coefficients of `f'`; it is used to refine grid maxima at interior
    /// critical points.
    pub fn sup_abs(&self, c: &DVector<f64>, derivative: &DVector<f64>) -> f64 {
        let vals = self.grid_values(c);
        let g = vals.len();
        let best = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if best == 0.0 {
            return 0.0;
        }
        // A trig polynomial of top frequency M deviates from its grid samples
        // by at most h²M²/8 relative to its sup; only cells within that band
        // can hold the true maximum.
        let h = 1.0 / (g - 1) as f64;
        let m = self.modes as f64;
        let band = (2.0 * h * h * m * m / 8.0).min(0.5);
        let threshold = best * (1.0 - band);
        let mut sup = best;
        let mut slopes: Option<DVector<f64>> = None;
        for i in 0..g {
            if vals[i].abs() < threshold {
                continue;
            }
            let dv = slopes.get_or_insert_with(|| self.grid_values(derivative));
            for (lo, hi) in [(i.saturating_sub(1), i), (i, (i + 1).min(g - 1))] {
                if lo == hi {
                    continue;
                }
                if let Some(t) = self.critical_point(derivative, (self.grid[lo], dv[lo]), (self.grid[hi], dv[hi])) {
                    sup = sup.max(self.eval_recurrence(c, t).abs());
                }
            }
        }
        sup
    }

    /// `eval` by the angle-addition recurrence, one `sin_cos` per call.
    fn eval_recurrence(&self, c: &DVector<f64>, t: f64) -> f64 {
        let (s1, c1) = t.sin_cos();
        let (mut s, mut co) = (0.0, 1.0);
        let mut acc = c[0];
        for k in 1..=self.modes {
            (s, co) = (s * c1 + co * s1, co * c1 - s * s1);
            acc += c[2 * k - 1] * co + c[2 * k] * s;
        }
        acc
    }

    /// Root of `f'` in `[a, b]` when `f'` changes sign there, by the Illinois
    /// variant of regula falsi.
    fn critical_point(&self, derivative: &DVector<f64>, (a, fa): (f64, f64), (b, fb): (f64, f64)) -> Option<f64> {
        if fa == 0.0 {
            return Some(a);
        }
        if fb == 0.0 {
            return Some(b);
        }
        if fa.signum() == fb.signum() {
            return None;
        }
        let ((mut lo, mut flo), (mut hi, mut fhi)) = ((a, fa), (b, fb));
        let tol = 1e-12 * (b - a);
        let mut side = 0i8;
        let mut last = 0.5 * (a + b);
        for _ in 0..60 {
            let mid = (lo * fhi - hi * flo) / (fhi - flo);
            let mid = if mid > lo && mid < hi { mid } else { 0.5 * (lo + hi) };
            last = mid;
            let fm = self.eval_recurrence(derivative, mid);
            if fm == 0.0 {
                return Some(mid);
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
                if side == -1 {
                    fhi *= 0.5;
                }
                side = -1;
            } else {
                hi = mid;
                fhi = fm;
                if side == 1 {
                    flo *= 0.5;
                }
                side = 1;
            }
            if hi - lo < tol {
                break;
            }
        }
        Some(last)
    }
}

fn basis_values(modes: usize, t: f64) -> Vec<f64> {
    let mut row = vec![0.0; 2 * modes + 1];
    row[0] = 1.0;
    for k in 1..=modes {
        let (s, c) = (k as f64 * t).sin_cos();
        row[2 * k - 1] = c;
        row[2 * k] = s;
    }
    row
}
