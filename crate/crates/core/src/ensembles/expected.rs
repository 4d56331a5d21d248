//! Ensemble expectations of the observed metrics.
//!
//! Each metric is a ratio; its expected value is taken as the ratio of the
//! expected numerator to the expected denominator. Products over distinct
//! pairs factorize, and the one repeated pair in the nearest-neighbor sums
//! (`l = i` in `sum_j a_ij k_j`) contributes `<a_ij> = p_ij` for ANND and
//! `<a_ij w_ij> = <w_ij>` for ANNS.

use super::Ensemble;
use crate::error::{Error, Result};

/// Expected per-node metrics. Degrees and strengths are ensemble means.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedProperties {
    pub k: f64,
    pub s: f64,
    pub annd: Option<f64>,
    pub clustering: Option<f64>,
    pub anns: Option<f64>,
    pub wclustering: Option<f64>,
}

/// Dense `N x N` matrices of `p_ij`, `<w_ij>` and `<w_ij^{1/3}>`, computed
/// once per model.
#[derive(Debug, Clone)]
pub struct ExpectedMetrics {
    n: usize,
    weighted: bool,
    p: Vec<f64>,
    w: Vec<f64>,
    w_third: Vec<f64>,
    k: Vec<f64>,
    s: Vec<f64>,
}

impl ExpectedMetrics {
    pub fn new<M: Ensemble + ?Sized>(model: &M) -> Result<Self> {
        let n = model.n();
        let mut p = vec![0.0; n * n];
        let mut w = vec![0.0; n * n];
        let mut w_third = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let pair = model.pair(i, j);
                let third = if model.is_weighted() {
                    model.weight_moment(i, j, 1.0 / 3.0)?
                } else {
                    pair.p
                };
                for (a, b) in [(i, j), (j, i)] {
                    p[a * n + b] = pair.p;
                    w[a * n + b] = pair.expected_w;
                    w_third[a * n + b] = third;
                }
            }
        }
        let row_sum = |m: &[f64], i: usize| m[i * n..(i + 1) * n].iter().sum::<f64>();
        let k = (0..n).map(|i| row_sum(&p, i)).collect();
        let s = (0..n).map(|i| row_sum(&w, i)).collect();
        Ok(Self {
            n,
            weighted: model.is_weighted(),
            p,
            w,
            w_third,
            k,
            s,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::NodeOutOfRange { node: i, n: self.n });
        }
        Ok(())
    }

    #[inline]
    fn at(m: &[f64], n: usize, i: usize, j: usize) -> f64 {
        m[i * n + j]
    }

    pub fn p(&self, i: usize, j: usize) -> f64 {
        Self::at(&self.p, self.n, i, j)
    }

    pub fn expected_w(&self, i: usize, j: usize) -> f64 {
        Self::at(&self.w, self.n, i, j)
    }

    pub fn expected_w_third(&self, i: usize, j: usize) -> f64 {
        Self::at(&self.w_third, self.n, i, j)
    }

    /// `<k_i> = sum_j p_ij`.
    pub fn degree(&self, i: usize) -> f64 {
        self.k[i]
    }

    /// `<s_i> = sum_j <w_ij>`.
    pub fn strength(&self, i: usize) -> f64 {
        self.s[i]
    }

    pub fn annd(&self, i: usize) -> Result<Option<f64>> {
        self.check(i)?;
        let k = self.k[i];
        if k <= 0.0 {
            return Ok(None);
        }
        let mut num = 0.0;
        for j in 0..self.n {
            let p = self.p(i, j);
            if j != i && p > 0.0 {
                num += p + p * (self.k[j] - p);
            }
        }
        Ok(Some(num / k))
    }

    pub fn anns(&self, i: usize) -> Result<Option<f64>> {
        self.check(i)?;
        if !self.weighted {
            return Ok(None);
        }
        let k = self.k[i];
        if k <= 0.0 {
            return Ok(None);
        }
        let mut num = 0.0;
        for j in 0..self.n {
            let p = self.p(i, j);
            if j != i && p > 0.0 {
                let w = self.expected_w(i, j);
                num += w + p * (self.s[j] - w);
            }
        }
        Ok(Some(num / k))
    }

    /// `sum_{j != l} p_ij p_il`, the expected number of ordered neighbor
    /// pairs of `i`.
    fn wedges(&self, i: usize) -> f64 {
        (0..self.n)
            .filter(|&j| j != i)
            .map(|j| {
                let p = self.p(i, j);
                p * (self.k[i] - p)
            })
            .sum()
    }

    fn triangle_sum(&self, m: &[f64], i: usize) -> f64 {
        let n = self.n;
        let row_i = &m[i * n..(i + 1) * n];
        let mut total = 0.0;
        for j in 0..n {
            let m_ij = row_i[j];
            if j == i || m_ij == 0.0 {
                continue;
            }
            let row_j = &m[j * n..(j + 1) * n];
            let mut inner = 0.0;
            for l in 0..n {
                if l != i && l != j {
                    inner += row_j[l] * row_i[l];
                }
            }
            total += m_ij * inner;
        }
        total
    }

    pub fn clustering(&self, i: usize) -> Result<Option<f64>> {
        self.check(i)?;
        let den = self.wedges(i);
        if den <= 0.0 {
            return Ok(None);
        }
        Ok(Some(self.triangle_sum(&self.p, i) / den))
    }

    pub fn wclustering(&self, i: usize) -> Result<Option<f64>> {
        self.check(i)?;
        if !self.weighted {
            return Ok(None);
        }
        let den = self.wedges(i);
        if den <= 0.0 {
            return Ok(None);
        }
        Ok(Some(self.triangle_sum(&self.w_third, i) / den))
    }

    pub fn node(&self, i: usize) -> Result<ExpectedProperties> {
        Ok(ExpectedProperties {
            k: self.k.get(i).copied().ok_or(Error::NodeOutOfRange { node: i, n: self.n })?,
            s: if self.weighted { self.s[i] } else { self.k[i] },
            annd: self.annd(i)?,
            clustering: self.clustering(i)?,
            anns: self.anns(i)?,
            wclustering: self.wclustering(i)?,
        })
    }

    pub fn table(&self) -> Vec<ExpectedProperties> {
        (0..self.n).map(|i| self.node(i).unwrap()).collect()
    }
}

pub fn expected_annd<M: Ensemble + ?Sized>(model: &M, i: usize) -> Result<Option<f64>> {
    ExpectedMetrics::new(model)?.annd(i)
}

pub fn expected_clustering<M: Ensemble + ?Sized>(model: &M, i: usize) -> Result<Option<f64>> {
    ExpectedMetrics::new(model)?.clustering(i)
}

pub fn expected_anns<M: Ensemble + ?Sized>(model: &M, i: usize) -> Result<Option<f64>> {
    ExpectedMetrics::new(model)?.anns(i)
}

pub fn expected_wclustering<M: Ensemble + ?Sized>(model: &M, i: usize) -> Result<Option<f64>> {
    ExpectedMetrics::new(model)?.wclustering(i)
}
