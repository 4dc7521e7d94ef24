//! Smith normal form over the integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Nonzero invariant factors `d₁ | d₂ | …` (positive, including ones) and rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub factors: Vec<BigInt>,
    pub rank: usize,
}

/// Diagonalize `m` by unimodular row and column operations.
pub fn smith_normal_form(m: &[Vec<BigInt>]) -> SmithForm {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // pivot: smallest nonzero magnitude in the remaining block
        let pivot = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| !a[i][j].is_zero())
            .min_by(|&(i, j), &(k, l)| a[i][j].abs().cmp(&a[k][l].abs()));
        let Some((pi, pj)) = pivot else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                for j in t..cols {
                    let v = &a[t][j] * &q;
                    a[i][j] -= v;
                }
                if !a[i][t].is_zero() {
                    clean = false;
                    if a[i][t].abs() < a[t][t].abs() {
                        a.swap(t, i);
                    }
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                for row in a.iter_mut().skip(t) {
                    let v = &row[t] * &q;
                    row[j] -= v;
                }
                if !a[t][j].is_zero() {
                    clean = false;
                    if a[t][j].abs() < a[t][t].abs() {
                        for row in a.iter_mut() {
                            row.swap(t, j);
                        }
                    }
                }
            }
            if clean {
                break;
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    // diag(a, b) is equivalent to diag(gcd, lcm); sweep until the chain divides
    let k = diag.len();
    for i in 0..k {
        for j in i + 1..k {
            let g = diag[i].gcd(&diag[j]);
            if g != diag[i] {
                let l = diag[i].lcm(&diag[j]);
                diag[i] = g;
                diag[j] = l;
            }
        }
    }
    SmithForm { rank: k, factors: diag }
}

impl SmithForm {
    /// Factors greater than one.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.factors.iter().filter(|d| !d.is_one()).cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn ints(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn small_examples() {
        assert_eq!(smith_normal_form(&mat(&[&[-1]])), SmithForm { factors: ints(&[1]), rank: 1 });
        assert_eq!(
            smith_normal_form(&mat(&[&[0, -1], &[-1, 0]])),
            SmithForm { factors: ints(&[1, 1]), rank: 2 }
        );
        assert_eq!(
            smith_normal_form(&mat(&[&[2, 0], &[0, 0]])),
            SmithForm { factors: ints(&[2]), rank: 1 }
        );
        assert_eq!(smith_normal_form(&mat(&[&[0]])).rank, 0);
        assert_eq!(
            smith_normal_form(&mat(&[&[2, 0], &[0, 3]])).factors,
            ints(&[1, 6])
        );
        assert_eq!(
            smith_normal_form(&mat(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]])).factors,
            ints(&[2, 6, 12])
        );
    }
}
