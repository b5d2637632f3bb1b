//! Banded LU factorization with partial pivoting.

use crate::error::{Error, Result};

/// Square matrix with `kl` sub- and `ku` super-diagonals, stored by rows.
///
/// Row `i` keeps columns `i − kl ..= i + kl + ku`; the extra `kl` columns hold
/// the fill-in created by row interchanges.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku {
            return 0.0;
        }
        self.data[self.slot(i, j)]
    }

    /// Adds `v` to entry `(i, j)`, which must lie inside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "({i}, {j}) outside the band");
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.data[self.slot(i, j)] * x[j]).sum()
            })
            .collect()
    }

    /// In-place factorization `PA = LU`.
    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl, w) = (self.n, self.kl, self.width);
        let span = kl + self.ku;
        let mut piv = vec![0usize; n];
        let mut lower = vec![0.0; n * kl.max(1)];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.slot(k, k)].abs();
            for r in k + 1..=last_row {
                let v = self.data[self.slot(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularJacobian(k));
            }
            piv[k] = p;
            let last_col = (k + span).min(n - 1);
            if p != k {
                for c in k..=last_col {
                    let (a, b) = (self.slot(k, c), self.slot(p, c));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.slot(k, k)];
            let (head, tail) = self.data.split_at_mut((k + 1) * w);
            let krow_start = k * w + kl; // column k of row k
            let krow = &head[krow_start..krow_start + (last_col - k + 1)];
            for r in k + 1..=last_row {
                let base = (r - k - 1) * w + (k + kl - r);
                let row = &mut tail[base..base + (last_col - k + 1)];
                let m = row[0] / pivot;
                lower[k * kl + (r - k - 1)] = m;
                row[0] = 0.0;
                if m != 0.0 {
                    for (x, y) in row[1..].iter_mut().zip(&krow[1..]) {
                        *x -= m * y;
                    }
                }
            }
        }
        Ok(BandLu {
            a: self,
            piv,
            lower,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    a: BandMatrix,
    piv: Vec<usize>,
    lower: Vec<f64>,
}

impl BandLu {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let a = &self.a;
        let (n, kl) = (a.n, a.kl);
        let span = kl + a.ku;
        let mut x = rhs.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for r in k + 1..=(k + kl).min(n - 1) {
                x[r] -= self.lower[k * kl + (r - k - 1)] * xk;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for c in k + 1..=(k + span).min(n - 1) {
                s -= a.data[a.slot(k, c)] * x[c];
            }
            x[k] = s / a.data[a.slot(k, k)];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_band_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (n, kl, ku) in [(1, 0, 0), (5, 1, 1), (40, 3, 2), (60, 6, 6), (30, 0, 4)] {
            let mut m = BandMatrix::zeros(n, kl, ku);
            for i in 0..n {
                for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                    // weak diagonal so that pivoting is exercised
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    let diag = if kl > 0 { 0.1 * v } else { 2.0 + v };
                    m.add(i, j, if i == j { diag } else { v });
                }
            }
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b = m.mul_vec(&x);
            let lu = m.factor().unwrap();
            let y = lu.solve(&b);
            for (u, v) in x.iter().zip(&y) {
                assert!((u - v).abs() < 1e-8, "n={n} kl={kl} ku={ku}");
            }
        }
    }

    #[test]
    fn singular_reported() {
        let mut m = BandMatrix::zeros(3, 1, 1);
        m.add(0, 0, 1.0);
        m.add(1, 1, 1.0);
        assert!(matches!(m.factor(), Err(Error::SingularJacobian(2))));
    }

    #[test]
    fn out_of_band_reads_zero() {
        let m = BandMatrix::zeros(10, 1, 2);
        assert_eq!(m.get(9, 0), 0.0);
        assert_eq!(m.get(0, 9), 0.0);
    }
}
