//! Dense matrices over a [`Field`](super::Field) with exact Gaussian
//! elimination: solve, inverse, rank. Desk-scale sizes, no pivot scaling.

use super::{Field, FieldElement, FieldError};

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl std::fmt::Debug for Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "Matrix {}x{} over {:?}",
            self.rows, self.cols, self.field
        )?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn new(
        field: Field,
        rows: usize,
        cols: usize,
        data: Vec<FieldElement>,
    ) -> Result<Matrix, FieldError> {
        if data.len() != rows * cols {
            return Err(FieldError::Shape(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        for e in &data {
            if !field.contains(e) {
                return Err(FieldError::FieldMismatch);
            }
        }
        Ok(Matrix {
            field,
            rows,
            cols,
            data,
        })
    }

    pub fn zeros(field: Field, rows: usize, cols: usize) -> Matrix {
        let data = vec![field.zero(); rows * cols];
        Matrix {
            field,
            rows,
            cols,
            data,
        }
    }

    pub fn identity(field: Field, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field.clone(), n, n);
        for i in 0..n {
            *m.get_mut(i, i) = field.one();
        }
        m
    }

    /// Rows (1, x_i, x_i^2, ..., x_i^(cols-1)) for each point.
    pub fn vandermonde(
        field: Field,
        points: &[FieldElement],
        cols: usize,
    ) -> Result<Matrix, FieldError> {
        let mut data = Vec::with_capacity(points.len() * cols);
        for p in points {
            let mut cur = field.one();
            for _ in 0..cols {
                data.push(cur.clone());
                cur = field.mul(&cur, p)?;
            }
        }
        Matrix::new(field, points.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn get(&self, r: usize, c: usize) -> &FieldElement {
        &self.data[r * self.cols + c]
    }

    pub fn get_mut(&mut self, r: usize, c: usize) -> &mut FieldElement {
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Matrix from the half-open column range [from, to).
    pub fn select_cols(&self, from: usize, to: usize) -> Matrix {
        let cols = to - from;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            for c in from..to {
                data.push(self.get(r, c).clone());
            }
        }
        Matrix {
            field: self.field.clone(),
            rows: self.rows,
            cols,
            data,
        }
    }

    /// Matrix from a subset of this matrix's rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            field: self.field.clone(),
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c).clone());
            }
        }
        Matrix {
            field: self.field.clone(),
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix, FieldError> {
        if self.field != rhs.field {
            return Err(FieldError::FieldMismatch);
        }
        if self.cols != rhs.rows {
            return Err(FieldError::Shape(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let f = &self.field;
        let mut out = Matrix::zeros(f.clone(), self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let p = f.mul(a, rhs.get(k, j))?;
                    *out.get_mut(i, j) = f.add(out.get(i, j), &p)?;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[FieldElement]) -> Result<Vec<FieldElement>, FieldError> {
        if v.len() != self.cols {
            return Err(FieldError::Shape(format!(
                "matrix has {} cols, vector has {} entries",
                self.cols,
                v.len()
            )));
        }
        let f = &self.field;
        let mut out = vec![f.zero(); self.rows];
        for i in 0..self.rows {
            let mut acc = f.zero();
            for (j, x) in v.iter().enumerate() {
                let a = self.get(i, j);
                if a.is_zero() || x.is_zero() {
                    continue;
                }
                acc = f.add(&acc, &f.mul(a, x)?)?;
            }
            out[i] = acc;
        }
        Ok(out)
    }

    /// Solve A x = y. A must be square invertible or an overdetermined
    /// consistent system with full column rank. Singular and inconsistent
    /// systems produce distinct errors.
    pub fn solve(&self, rhs: &[FieldElement]) -> Result<Vec<FieldElement>, FieldError> {
        if rhs.len() != self.rows {
            return Err(FieldError::Shape(format!(
                "matrix has {} rows, rhs has {} entries",
                self.rows,
                rhs.len()
            )));
        }
        for e in rhs {
            if !self.field.contains(e) {
                return Err(FieldError::FieldMismatch);
            }
        }
        if self.rows < self.cols {
            return Err(FieldError::Singular);
        }
        let f = self.field.clone();
        let mut a = self.clone();
        let mut y = rhs.to_vec();
        let mut pivot_row = 0;
        for col in 0..a.cols {
            let Some(p) = (pivot_row..a.rows).find(|&r| !a.get(r, col).is_zero()) else {
                return Err(FieldError::Singular);
            };
            a.swap_rows(pivot_row, p);
            y.swap(pivot_row, p);
            let inv = f.inv(a.get(pivot_row, col))?;
            for c in col..a.cols {
                *a.get_mut(pivot_row, c) = f.mul(a.get(pivot_row, c), &inv)?;
            }
            y[pivot_row] = f.mul(&y[pivot_row], &inv)?;
            for r in 0..a.rows {
                if r == pivot_row || a.get(r, col).is_zero() {
                    continue;
                }
                let factor = a.get(r, col).clone();
                for c in col..a.cols {
                    let t = f.mul(&factor, a.get(pivot_row, c))?;
                    *a.get_mut(r, c) = f.add(a.get(r, c), &t)?;
                }
                let t = f.mul(&factor, &y[pivot_row])?;
                y[r] = f.add(&y[r], &t)?;
            }
            pivot_row += 1;
        }
        // leftover rows must have zero rhs or the system is inconsistent
        for r in pivot_row..a.rows {
            if !y[r].is_zero() {
                return Err(FieldError::Inconsistent);
            }
        }
        y.truncate(self.cols);
        Ok(y)
    }

    pub fn inverse(&self) -> Result<Matrix, FieldError> {
        if self.rows != self.cols {
            return Err(FieldError::Shape("inverse of non-square matrix".into()));
        }
        let f = self.field.clone();
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(f.clone(), n);
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !a.get(r, col).is_zero()) else {
                return Err(FieldError::Singular);
            };
            a.swap_rows(col, p);
            inv.swap_rows(col, p);
            let piv_inv = f.inv(a.get(col, col))?;
            for c in 0..n {
                *a.get_mut(col, c) = f.mul(a.get(col, c), &piv_inv)?;
                *inv.get_mut(col, c) = f.mul(inv.get(col, c), &piv_inv)?;
            }
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let factor = a.get(r, col).clone();
                for c in 0..n {
                    let t = f.mul(&factor, a.get(col, c))?;
                    *a.get_mut(r, c) = f.add(a.get(r, c), &t)?;
                    let t = f.mul(&factor, inv.get(col, c))?;
                    *inv.get_mut(r, c) = f.add(inv.get(r, c), &t)?;
                }
            }
        }
        Ok(inv)
    }

    pub fn rank(&self) -> usize {
        let f = self.field.clone();
        let mut a = self.clone();
        let mut rank = 0;
        for col in 0..a.cols {
            let Some(p) = (rank..a.rows).find(|&r| !a.get(r, col).is_zero()) else {
                continue;
            };
            a.swap_rows(rank, p);
            let inv = f.inv(a.get(rank, col)).expect("nonzero pivot");
            for c in col..a.cols {
                *a.get_mut(rank, c) = f.mul(a.get(rank, c), &inv).expect("same field");
            }
            for r in 0..a.rows {
                if r == rank || a.get(r, col).is_zero() {
                    continue;
                }
                let factor = a.get(r, col).clone();
                for c in col..a.cols {
                    let t = f.mul(&factor, a.get(rank, c)).expect("same field");
                    *a.get_mut(r, c) = f.add(a.get(r, c), &t).expect("same field");
                }
            }
            rank += 1;
            if rank == a.rows {
                break;
            }
        }
        rank
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf256() -> Field {
        Field::gf_default(8).unwrap()
    }

    fn fe(f: &Field, v: u64) -> FieldElement {
        f.element(v).unwrap()
    }

    #[test]
    fn solve_identity_returns_rhs() {
        let f = gf256();
        let a = Matrix::identity(f.clone(), 4);
        let y: Vec<_> = [3u64, 9, 0, 200].iter().map(|&v| fe(&f, v)).collect();
        assert_eq!(a.solve(&y).unwrap(), y);
    }

    #[test]
    fn solve_vandermonde_recovers_coefficients() {
        // forward-evaluate a known polynomial, then solve for it
        let f = gf256();
        let coeffs: Vec<_> = [7u64, 13, 101].iter().map(|&v| fe(&f, v)).collect();
        let points: Vec<_> = [1u64, 2, 4].iter().map(|&v| fe(&f, v)).collect();
        let v = Matrix::vandermonde(f.clone(), &points, 3).unwrap();
        let y = v.mul_vec(&coeffs).unwrap();
        assert_eq!(v.solve(&y).unwrap(), coeffs);
    }

    #[test]
    fn singular_matrix_rejected() {
        let f = gf256();
        let a = Matrix::zeros(f.clone(), 3, 3);
        let y = vec![f.zero(); 3];
        assert_eq!(a.solve(&y), Err(FieldError::Singular));
    }

    #[test]
    fn inconsistent_overdetermined_rejected() {
        let f = gf256();
        // rows: (1,0), (0,1), (1,1) — rhs breaking the xor relation
        let data = vec![
            fe(&f, 1),
            fe(&f, 0),
            fe(&f, 0),
            fe(&f, 1),
            fe(&f, 1),
            fe(&f, 1),
        ];
        let a = Matrix::new(f.clone(), 3, 2, data).unwrap();
        let bad = vec![fe(&f, 1), fe(&f, 2), fe(&f, 7)];
        assert_eq!(a.solve(&bad), Err(FieldError::Inconsistent));
        let good = vec![fe(&f, 1), fe(&f, 2), fe(&f, 3)];
        assert_eq!(a.solve(&good).unwrap(), vec![fe(&f, 1), fe(&f, 2)]);
    }

    #[test]
    fn solve_error_distinct_from_field_mismatch() {
        let f = gf256();
        let g = Field::gf_default(4).unwrap();
        let a = Matrix::identity(f.clone(), 2);
        let y = vec![g.element(1).unwrap(), g.element(2).unwrap()];
        assert_eq!(a.solve(&y), Err(FieldError::FieldMismatch));
    }

    #[test]
    fn solve_after_matmul_is_identity() {
        // randomized, 100 trials per size up to 12x12
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let f = gf256();
        for n in 1..=12 {
            let mut done = 0;
            while done < 100 {
                let data: Vec<_> = (0..n * n).map(|_| fe(&f, rng.gen_range(0..256))).collect();
                let a = Matrix::new(f.clone(), n, n, data).unwrap();
                if a.rank() < n {
                    continue;
                }
                let x: Vec<_> = (0..n).map(|_| fe(&f, rng.gen_range(0..256))).collect();
                let y = a.mul_vec(&x).unwrap();
                assert_eq!(a.solve(&y).unwrap(), x);
                done += 1;
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let f = gf256();
        let points: Vec<_> = [1u64, 2, 4, 8].iter().map(|&v| fe(&f, v)).collect();
        let v = Matrix::vandermonde(f.clone(), &points, 4).unwrap();
        let inv = v.inverse().unwrap();
        assert_eq!(v.mul(&inv).unwrap(), Matrix::identity(f, 4));
    }

    #[test]
    fn rank_bounds() {
        let f = gf256();
        let points: Vec<_> = [1u64, 2, 4].iter().map(|&v| fe(&f, v)).collect();
        let v = Matrix::vandermonde(f.clone(), &points, 5).unwrap();
        assert_eq!(v.rank(), 3);
        assert_eq!(Matrix::zeros(f, 4, 2).rank(), 0);
    }
}
