//! Labelled dense tensors over qubit indices and pairwise contraction.
//!
//! The first label is the most significant bit of the flat index.

use crate::error::{check_dense, Result};
use crate::C64;

pub type Label = usize;

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    pub labels: Vec<Label>,
    pub data: Vec<C64>,
}

/// Offsets into a tensor for every assignment of `subset`, ordered with the
/// first subset label most significant.
fn offsets(labels: &[Label], subset: &[Label]) -> Vec<usize> {
    let rank = labels.len();
    let strides: Vec<usize> = subset
        .iter()
        .map(|l| {
            let k = labels.iter().position(|x| x == l).expect("label present");
            1usize << (rank - 1 - k)
        })
        .collect();
    let k = subset.len();
    (0..1usize << k)
        .map(|a| {
            strides
                .iter()
                .enumerate()
                .filter(|(i, _)| (a >> (k - 1 - i)) & 1 == 1)
                .map(|(_, s)| s)
                .sum()
        })
        .collect()
}

impl Tensor {
    pub fn scalar(z: C64) -> Self {
        Tensor {
            labels: vec![],
            data: vec![z],
        }
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    /// Build from a leg list that may repeat labels; repeated legs are traced.
    pub fn from_legs(legs: Vec<Label>, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), 1 << legs.len());
        let mut uniq: Vec<Label> = Vec::new();
        for l in &legs {
            if !uniq.contains(l) {
                uniq.push(*l);
            }
        }
        if uniq.len() == legs.len() {
            return Tensor { labels: legs, data };
        }
        let rank = legs.len();
        let k = uniq.len();
        let mut out = vec![C64::new(0.0, 0.0); 1 << k];
        for (a, slot) in out.iter_mut().enumerate() {
            let mut idx = 0usize;
            for (p, l) in legs.iter().enumerate() {
                let u = uniq.iter().position(|x| x == l).unwrap();
                let bit = (a >> (k - 1 - u)) & 1;
                idx |= bit << (rank - 1 - p);
            }
            *slot = data[idx];
        }
        // repeated labels in `legs` read the same bit, i.e. the diagonal
        Tensor {
            labels: uniq,
            data: out,
        }
    }

    /// Labels of the result of contracting with `other`.
    pub fn result_labels(&self, other: &Tensor) -> Vec<Label> {
        let mut out: Vec<Label> = self
            .labels
            .iter()
            .filter(|l| !other.labels.contains(l))
            .copied()
            .collect();
        out.extend(other.labels.iter().filter(|l| !self.labels.contains(l)));
        out
    }

    pub fn shares_label(&self, other: &Tensor) -> bool {
        self.labels.iter().any(|l| other.labels.contains(l))
    }

    /// Sum over all shared labels.
    pub fn contract(&self, other: &Tensor) -> Result<Tensor> {
        let shared: Vec<Label> = self
            .labels
            .iter()
            .filter(|l| other.labels.contains(l))
            .copied()
            .collect();
        let fa: Vec<Label> = self
            .labels
            .iter()
            .filter(|l| !shared.contains(l))
            .copied()
            .collect();
        let fb: Vec<Label> = other
            .labels
            .iter()
            .filter(|l| !shared.contains(l))
            .copied()
            .collect();
        let rank = fa.len() + fb.len();
        check_dense("zx intermediate tensor", (16u128) << rank)?;
        let (af, asd) = (offsets(&self.labels, &fa), offsets(&self.labels, &shared));
        let (bf, bsd) = (offsets(&other.labels, &fb), offsets(&other.labels, &shared));
        let mut data = vec![C64::new(0.0, 0.0); 1 << rank];
        let nb = bf.len();
        for (i, &oa) in af.iter().enumerate() {
            for (j, &ob) in bf.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (sa, sb) in asd.iter().zip(&bsd) {
                    acc += self.data[oa + sa] * other.data[ob + sb];
                }
                data[i * nb + j] = acc;
            }
        }
        let mut labels = fa;
        labels.extend(fb);
        Ok(Tensor { labels, data })
    }

    /// Reorder indices so that labels appear as in `order`.
    pub fn permuted(&self, order: &[Label]) -> Tensor {
        debug_assert_eq!(order.len(), self.labels.len());
        let offs = offsets(&self.labels, order);
        Tensor {
            labels: order.to_vec(),
            data: offs.iter().map(|&o| self.data[o]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(labels: Vec<Label>, re: Vec<f64>) -> Tensor {
        Tensor {
            labels,
            data: re.into_iter().map(|x| C64::new(x, 0.0)).collect(),
        }
    }

    #[test]
    fn matrix_product() {
        // A[i,j] B[j,k]
        let a = t(vec![0, 1], vec![1.0, 2.0, 3.0, 4.0]);
        let b = t(vec![1, 2], vec![5.0, 6.0, 7.0, 8.0]);
        let c = a.contract(&b).unwrap();
        assert_eq!(c.labels, vec![0, 2]);
        let re: Vec<f64> = c.data.iter().map(|z| z.re).collect();
        assert_eq!(re, vec![19.0, 22.0, 43.0, 50.0]);
    }

    #[test]
    fn outer_product_and_permute() {
        let a = t(vec![0], vec![1.0, 2.0]);
        let b = t(vec![1], vec![3.0, 5.0]);
        let c = a.contract(&b).unwrap();
        assert_eq!(c.data[1].re, 5.0);
        let p = c.permuted(&[1, 0]);
        assert_eq!(p.data[1].re, 6.0);
    }

    #[test]
    fn repeated_legs_take_diagonal() {
        let m = t(vec![7, 7], vec![1.0, 2.0, 3.0, 4.0]);
        let d = Tensor::from_legs(m.labels.clone(), m.data.clone());
        assert_eq!(d.labels, vec![7]);
        assert_eq!(d.data[0].re, 1.0);
        assert_eq!(d.data[1].re, 4.0);
    }
}
