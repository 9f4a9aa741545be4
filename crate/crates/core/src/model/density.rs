use super::{Kind, Partition, PenaltyConfig};
use crate::error::{Error, Result};
use crate::pdcore::{is_pd, SymMatrix};

/// Entrywise rates: `λ_D` on the diagonal, `λ_1` within groups, `λ_0` between.
pub fn entry_penalties(p: &Partition, c: &PenaltyConfig) -> SymMatrix {
    SymMatrix::from_upper_fn(p.dim(), |i, j| {
        if i == j {
            c.lambda_d
        } else if p.same_group(i, j) {
            c.lambda_1
        } else {
            c.lambda_0
        }
    })
}

fn check(x: &SymMatrix, p: &Partition) -> Result<()> {
    if x.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: x.dim(),
        });
    }
    Ok(())
}

/// Unnormalized group ℓ1 log density; `-inf` outside the PD cone.
pub fn logdens_gl1(x: &SymMatrix, p: &Partition, c: &PenaltyConfig) -> Result<f64> {
    check(x, p)?;
    if !is_pd(x) {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(-penalty_gl1(x, p, c))
}

/// Unnormalized group ℓ1,2 log density; `-inf` outside the PD cone.
pub fn logdens_gl12(x: &SymMatrix, p: &Partition, c: &PenaltyConfig) -> Result<f64> {
    check(x, p)?;
    if !is_pd(x) {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(-penalty_gl12(x, p, c))
}

pub fn logdens(kind: Kind, x: &SymMatrix, p: &Partition, c: &PenaltyConfig) -> Result<f64> {
    match kind {
        Kind::Gl1 => logdens_gl1(x, p, c),
        Kind::Gl12 => logdens_gl12(x, p, c),
    }
}

pub(crate) fn penalty_gl1(x: &SymMatrix, p: &Partition, c: &PenaltyConfig) -> f64 {
    let d = x.dim();
    let mut s = 0.0;
    for i in 0..d {
        s += c.lambda_d * x.get(i, i).abs();
        for j in (i + 1)..d {
            let rate = if p.same_group(i, j) { c.lambda_1 } else { c.lambda_0 };
            s += rate * x.get(i, j).abs();
        }
    }
    s
}

pub(crate) fn penalty_gl12(x: &SymMatrix, p: &Partition, c: &PenaltyConfig) -> f64 {
    let d = x.dim();
    let k = p.k();
    let mut s = 0.0;
    let mut block_sq = vec![0.0; k * k];
    for i in 0..d {
        s += c.lambda_d * x.get(i, i).abs();
        for j in (i + 1)..d {
            let (a, b) = (p.group_of(i), p.group_of(j));
            if a == b {
                s += c.lambda_1 * x.get(i, j).abs();
            } else if p.sizes()[a] * p.sizes()[b] == 1 {
                // a one-entry block is a plain ℓ1 term; adding it in place
                // keeps the sum identical to the group ℓ1 one
                s += c.lambda_0 * x.get(i, j).abs();
            } else {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                block_sq[lo * k + hi] += x.get(i, j).powi(2);
            }
        }
    }
    for a in 0..k {
        for b in (a + 1)..k {
            if p.c_kl(a, b) == 1 {
                continue;
            }
            s += c.lambda_0 * p.c_kl(a, b) as f64 * block_sq[a * k + b].sqrt();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PenaltyConfig {
        PenaltyConfig::new(0.1, 0.1, 1.0, 1.0).unwrap()
    }

    #[test]
    fn penalty_matrix_rules() {
        let same = Partition::from_labels(&[1, 1]).unwrap();
        let diff = Partition::from_labels(&[1, 2]).unwrap();
        assert_eq!(entry_penalties(&same, &cfg()).to_rows(), vec![vec![0.1, 0.1], vec![0.1, 0.1]]);
        assert_eq!(entry_penalties(&diff, &cfg()).to_rows(), vec![vec![0.1, 1.0], vec![1.0, 0.1]]);
        let p4 = Partition::from_labels(&[1, 1, 2, 2]).unwrap();
        let l = entry_penalties(&p4, &cfg());
        assert_eq!(l.get(0, 1), 0.1);
        assert_eq!(l.get(2, 3), 0.1);
        for (i, j) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
            assert_eq!(l.get(i, j), 1.0);
        }
    }

    #[test]
    fn gl1_values() {
        let p = Partition::from_labels(&[1, 2, 3]).unwrap();
        assert!((logdens_gl1(&SymMatrix::identity(3), &p, &cfg()).unwrap() + 0.3).abs() < 1e-15);
        let bad = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let p2 = Partition::from_labels(&[1, 2]).unwrap();
        assert_eq!(logdens_gl1(&bad, &p2, &cfg()).unwrap(), f64::NEG_INFINITY);
        let x = SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        assert!((logdens_gl1(&x, &p2, &cfg()).unwrap() + 0.7).abs() < 1e-15);
        assert!(logdens_gl1(&x, &p, &cfg()).is_err());
    }

    #[test]
    fn gl12_collapses_to_gl1() {
        let x = SymMatrix::from_rows(&[
            vec![3.0, 0.5, -0.7],
            vec![0.5, 2.0, 0.2],
            vec![-0.7, 0.2, 4.0],
        ])
        .unwrap();
        for p in [Partition::single_group(3), Partition::singletons(3)] {
            assert_eq!(
                logdens_gl12(&x, &p, &cfg()).unwrap(),
                logdens_gl1(&x, &p, &cfg()).unwrap()
            );
        }
        let p2 = Partition::from_labels(&[1, 2]).unwrap();
        let x2 = SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        assert!((logdens_gl12(&x2, &p2, &cfg()).unwrap() + 0.2 + 0.5).abs() < 1e-15);
    }

    #[test]
    fn gl12_block_norm() {
        // groups {0,1} and {2}: block entries (0,2), (1,2); C = 2
        let p = Partition::from_labels(&[1, 1, 2]).unwrap();
        let x = SymMatrix::from_rows(&[
            vec![5.0, 0.1, 0.3],
            vec![0.1, 5.0, 0.4],
            vec![0.3, 0.4, 5.0],
        ])
        .unwrap();
        let expected = -(0.1 * 15.0) - 0.1 * 0.1 - 1.0 * 2.0 * 0.5;
        assert!((logdens_gl12(&x, &p, &cfg()).unwrap() - expected).abs() < 1e-14);
    }
}
