//! Discrete Legendre–Fenchel transforms.
//!
//! The 1-d transform runs in linear time over a lower convex hull (the
//! discrete sup only sees the hull). Tensor grids are transformed one axis
//! at a time: `f*(t_1, t_2) = sup_{s_2} (s_2 t_2 − (−sup_{s_1}(s_1 t_1 − f)))`.

/// `out[j] = max_i (xs[i] * slopes[j] − fs[i])`.
///
/// `xs` and `slopes` must be sorted ascending. Points with `fs[i] = +∞` are
/// ignored; with no finite point every output is `−∞`.
pub fn conjugate_1d(xs: &[f64], fs: &[f64], slopes: &[f64]) -> Vec<f64> {
    let mut out = vec![f64::NEG_INFINITY; slopes.len()];
    conjugate_1d_into(xs, fs, slopes, &mut out, &mut Vec::new());
    out
}

fn conjugate_1d_into(
    xs: &[f64],
    fs: &[f64],
    slopes: &[f64],
    out: &mut [f64],
    hull: &mut Vec<usize>,
) {
    hull.clear();
    for i in 0..xs.len() {
        if !(fs[i] < f64::INFINITY) {
            continue;
        }
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // drop b when it lies on or above the chord a→i
            let lhs = (fs[b] - fs[a]) * (xs[i] - xs[a]);
            let rhs = (fs[i] - fs[a]) * (xs[b] - xs[a]);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    if hull.is_empty() {
        out.iter_mut().for_each(|v| *v = f64::NEG_INFINITY);
        return;
    }
    let mut k = 0usize;
    for (j, &t) in slopes.iter().enumerate() {
        while k + 1 < hull.len() {
            let cur = xs[hull[k]] * t - fs[hull[k]];
            let nxt = xs[hull[k + 1]] * t - fs[hull[k + 1]];
            if nxt > cur {
                k += 1;
            } else {
                break;
            }
        }
        out[j] = xs[hull[k]] * t - fs[hull[k]];
    }
}

/// Row-major tensor of values on a product grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridValues {
    pub dims: Vec<usize>,
    pub values: Vec<f64>,
}

impl GridValues {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            idx[k] = flat % self.dims[k];
            flat /= self.dims[k];
        }
        idx
    }
}

/// Conjugate along one axis: replaces axis `axis` (coordinates `xs`) by `slopes`.
pub fn conjugate_axis(grid: &GridValues, axis: usize, xs: &[f64], slopes: &[f64]) -> GridValues {
    let dims = &grid.dims;
    assert_eq!(dims[axis], xs.len());
    let outer: usize = dims[..axis].iter().product();
    let inner: usize = dims[axis + 1..].iter().product();
    let n = dims[axis];
    let q = slopes.len();
    let mut out_dims = dims.clone();
    out_dims[axis] = q;
    let mut out = vec![0.0; outer * q * inner];
    let mut line = vec![0.0; n];
    let mut res = vec![0.0; q];
    let mut hull = Vec::with_capacity(n);
    for o in 0..outer {
        for i in 0..inner {
            for k in 0..n {
                line[k] = grid.values[(o * n + k) * inner + i];
            }
            conjugate_1d_into(xs, &line, slopes, &mut res, &mut hull);
            for j in 0..q {
                out[(o * q + j) * inner + i] = res[j];
            }
        }
    }
    GridValues {
        dims: out_dims,
        values: out,
    }
}

/// Full discrete conjugate `sup_{x ∈ grid}(⟨x, t⟩ − f(x))` on the product of `slopes`.
pub fn conjugate_nd(grid: &GridValues, xs: &[Vec<f64>], slopes: &[Vec<f64>]) -> GridValues {
    let m = grid.dims.len();
    let mut cur = grid.clone();
    for axis in 0..m {
        cur = conjugate_axis(&cur, axis, &xs[axis], &slopes[axis]);
        if axis + 1 < m {
            for v in cur.values.iter_mut() {
                *v = -*v;
            }
        }
    }
    cur
}
