//! Unresolved tail of the modified equation.
//!
//! With `u = sum_{k<=K} eps^k u^{(k)}` and `eta = sum_{k<=K} eps^k eta^{(k)}` inserted, the
//! left-hand side is a polynomial in `eps`. Its coefficients of order `<= K` vanish identically
//! by construction of the recursion; the coefficient of order `m > K` is
//!
//! ```text
//! R^{(m)}_{j,nu} = P^{(m-1)}_{j,nu} + sum_{a} eta^{(a)}_j u^{(m-a)}_{j,nu},   1 <= a, m - a <= K
//! ```
//!
//! Working with these coefficients directly keeps the tail out of the cancellation noise of
//! the assembled sums, which sits near `1e-16` while the tail at `eps = 1e-3` is far smaller.

use num_complex::Complex;
use rustc_hash::FxHashMap;

use super::lattice::Packed;
use super::{lookup, TorusExpansion};
use crate::error::Result;
use crate::scalar::{czero, Real};
use crate::seqspace::MultiIndex;

/// Coefficients `R^{(m)}_{j,nu}` for `m = K+1, ..., K+1+tail`.
#[derive(Clone, Debug)]
pub struct ResidualPolynomial<R> {
    first_order: usize,
    rows: Vec<(i32, MultiIndex, Vec<Complex<R>>)>,
}

impl<R: Real> ResidualPolynomial<R> {
    /// Lowest order kept, `K + 1`.
    pub fn first_order(&self) -> usize {
        self.first_order
    }

    pub fn orders(&self) -> usize {
        self.rows.first().map(|r| r.2.len()).unwrap_or(0)
    }

    /// Number of `(j, nu)` entries with a nonzero tail coefficient.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `sup_{j,nu} |sum_m eps^m R^{(m)}_{j,nu}|`.
    pub fn eval(&self, eps: R) -> R {
        let base = eps.powi(self.first_order as i32);
        self.rows
            .iter()
            .map(|(_, _, coeffs)| {
                // Horner in eps starting from the highest kept order.
                let mut acc = czero::<R>();
                for c in coeffs.iter().rev() {
                    acc = acc * eps + *c;
                }
                (acc * base).norm()
            })
            .fold(R::zero(), R::max)
    }

    /// `sup |R^{(m)}|` for each kept order.
    pub fn order_sups(&self) -> Vec<R> {
        (0..self.orders())
            .map(|i| self.rows.iter().map(|r| r.2[i].norm()).fold(R::zero(), R::max))
            .collect()
    }

    pub fn rows(&self) -> &[(i32, MultiIndex, Vec<Complex<R>>)] {
        &self.rows
    }
}

impl<R: Real> TorusExpansion<R> {
    /// Tail coefficients of the modified-equation residual over the retained harmonics.
    pub fn residual_polynomial(&self) -> Result<ResidualPolynomial<R>> {
        let k_max = self.order();
        let first = k_max + 1;
        let last = first + self.params.residual_tail;
        let p_layers = self.continued_quintic(last - 1);
        let window = self.params.window;
        let eta: Vec<Vec<R>> = (1..=k_max).map(|k| self.eta_real(k)).collect::<Result<_>>()?;
        let n = last - first + 1;

        let mut acc: FxHashMap<Packed, (i32, Vec<Complex<R>>)> = FxHashMap::default();
        for (i, m) in (first..=last).enumerate() {
            for t in &p_layers[m - 1] {
                acc.entry(t.key).or_insert_with(|| (t.mom, vec![czero(); n])).1[i] += t.val;
            }
            let lo = m.saturating_sub(k_max).max(1);
            for a in lo..=k_max.min(m - 1) {
                for t in &self.prod.u[m - a] {
                    let e = eta[a - 1][window.slot(t.mom)];
                    acc.entry(t.key).or_insert_with(|| (t.mom, vec![czero(); n])).1[i] += t.val * e;
                }
            }
        }
        let mut rows: Vec<_> = acc
            .into_iter()
            .map(|(key, (mom, c))| (mom, self.lattice.unpack(key), c))
            .collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        Ok(ResidualPolynomial { first_order: first, rows })
    }

    /// `sup_{j,nu}` of the modified-equation residual at `eps`, over in-window harmonics
    /// reachable beyond order `K` (and inside the cap when one is set).
    pub fn residual_modified(&self, eps: R) -> Result<R> {
        if eps == R::zero() {
            return Ok(R::zero());
        }
        Ok(self.residual_polynomial()?.eval(eps))
    }

    /// Coefficient of `eps^m` in the residual for `m <= K`, which the recursion makes zero up to
    /// rounding. Used as a self-check of the solver.
    pub fn resolved_order_defect(&self, m: usize) -> Result<R> {
        assert!(m >= 1 && m <= self.order());
        let mut worst = R::zero();
        let mut keys: Vec<(Packed, i32)> = self.prod.p[m - 1].iter().map(|t| (t.key, t.mom)).collect();
        for k in 1..=m {
            keys.extend(self.prod.u[k].iter().map(|t| (t.key, t.mom)));
        }
        keys.sort_unstable();
        keys.dedup();
        for (key, j) in keys {
            let div = self.omega.get(j) - self.lattice.dot(key, &self.omega_lane);
            let mut v = lookup(&self.prod.p[m - 1], key).unwrap_or_else(czero);
            v += lookup(&self.prod.u[m], key).unwrap_or_else(czero) * div;
            for a in 1..=m {
                if let Some(u) = lookup(&self.prod.u[m - a], key) {
                    v += u * self.eta_coefficient(a, j);
                }
            }
            worst = worst.max(v.norm());
        }
        Ok(worst)
    }
}
