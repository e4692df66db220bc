//! Small dense complex matrices in f64, row-major.

use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let data: Vec<Complex64> = rows.into_iter().flatten().collect();
        assert_eq!(data.len(), r * c, "ragged rows");
        CMat { rows: r, cols: c, data }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    /// self += a * other
    pub fn axpy(&mut self, a: f64, other: &CMat) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += y * a;
        }
    }

    pub fn scale(&self, a: Complex64) -> CMat {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * a).collect() }
    }

    pub fn mul(&self, o: &CMat) -> CMat {
        assert_eq!(self.cols, o.rows);
        let mut out = CMat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..o.cols {
                    out.data[i * o.cols + j] += a * o.data[k * o.cols + j];
                }
            }
        }
        out
    }

    pub fn sub(&self, o: &CMat) -> CMat {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() }
    }

    /// Squared Frobenius norm.
    pub fn frob2(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> Complex64 {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for c in 0..n {
            let p = (c..n)
                .max_by(|&x, &y| a[x * n + c].norm().partial_cmp(&a[y * n + c].norm()).unwrap())
                .unwrap();
            if a[p * n + c].norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            if p != c {
                for j in 0..n {
                    a.swap(p * n + j, c * n + j);
                }
                det = -det;
            }
            let piv = a[c * n + c];
            det *= piv;
            for r in c + 1..n {
                let f = a[r * n + c] / piv;
                if f == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in c..n {
                    let t = a[c * n + j];
                    a[r * n + j] -= f * t;
                }
            }
        }
        det
    }

    /// Real inner product Re Tr(A B^H).
    pub fn real_inner(&self, o: &CMat) -> f64 {
        self.data.iter().zip(&o.data).map(|(a, b)| a.re * b.re + a.im * b.im).sum()
    }
}
