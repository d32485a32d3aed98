//! Sparse Laurent-polynomial products over packed harmonic keys.

use num_complex::Complex;
use rayon::prelude::*;
use rustc_hash::FxHashMap;

use super::lattice::{add, neg, Packed};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Term<R> {
    pub key: Packed,
    pub mom: i32,
    pub val: Complex<R>,
}

/// Terms sorted by key, no duplicates.
pub(crate) type Layer<R> = Vec<Term<R>>;

pub(crate) fn conj_layer<R: Real>(layer: &Layer<R>) -> Layer<R> {
    let mut out: Layer<R> = layer
        .iter()
        .map(|t| Term { key: neg(t.key), mom: -t.mom, val: t.val.conj() })
        .collect();
    out.sort_unstable_by_key(|t| t.key);
    out
}

pub(crate) fn from_map<R: Real>(map: FxHashMap<Packed, (i32, Complex<R>)>) -> Layer<R> {
    let mut out: Layer<R> = map.into_iter().map(|(key, (mom, val))| Term { key, mom, val }).collect();
    out.sort_unstable_by_key(|t| t.key);
    out
}

/// One summand `scale * x * y` of a product.
pub(crate) struct Pair<'a, R> {
    pub x: &'a Layer<R>,
    pub y: &'a Layer<R>,
    pub scale: R,
}

// Chunking depends only on the input sizes, never on the thread count, so the merged sums are
// bit-identical however many workers run.
const MIN_CHUNK: usize = 32;
const MAX_TASKS_PER_PAIR: usize = 48;

/// `sum_pairs scale * x * y`, keeping only output keys accepted by `keep(momentum, key)`.
pub(crate) fn product<R, F>(pairs: &[Pair<'_, R>], keep: F) -> Layer<R>
where
    R: Real,
    F: Fn(i32, Packed) -> bool + Sync,
{
    let mut tasks: Vec<(usize, std::ops::Range<usize>)> = Vec::new();
    for (p, pair) in pairs.iter().enumerate() {
        if pair.x.is_empty() || pair.y.is_empty() {
            continue;
        }
        let n = pair.x.len();
        let chunk = MIN_CHUNK.max(n.div_ceil(MAX_TASKS_PER_PAIR));
        let mut s = 0;
        while s < n {
            tasks.push((p, s..(s + chunk).min(n)));
            s += chunk;
        }
    }

    let partial: Vec<FxHashMap<Packed, (i32, Complex<R>)>> = tasks
        .par_iter()
        .map(|(p, range)| {
            let pair = &pairs[*p];
            let mut acc: FxHashMap<Packed, (i32, Complex<R>)> = FxHashMap::default();
            for tx in &pair.x[range.clone()] {
                let xv = tx.val * pair.scale;
                for ty in pair.y.iter() {
                    let mom = tx.mom + ty.mom;
                    let key = add(tx.key, ty.key);
                    if !keep(mom, key) {
                        continue;
                    }
                    let e = acc.entry(key).or_insert((mom, Complex::new(R::zero(), R::zero())));
                    e.1 += xv * ty.val;
                }
            }
            acc
        })
        .collect();

    let mut it = partial.into_iter();
    let Some(mut total) = it.next() else {
        return Vec::new();
    };
    for part in it {
        // Sorted traversal keeps the merge independent of hash-map layout.
        let mut part: Vec<_> = part.into_iter().collect();
        part.sort_unstable_by_key(|(k, _)| *k);
        for (k, (mom, v)) in part {
            total.entry(k).or_insert((mom, Complex::new(R::zero(), R::zero()))).1 += v;
        }
    }
    from_map(total)
}

#[cfg(test)]
mod tests {
    use super::super::lattice::Lattice;
    use super::*;
    use crate::seqspace::{ModeWindow, MultiIndex};

    #[test]
    fn product_matches_naive() {
        let lat = Lattice::new(ModeWindow::new(3).unwrap(), vec![-1, 0, 1]).unwrap();
        let mk = |pairs: &[(i32, i32)], v: f64| {
            let nu = MultiIndex::from_pairs(pairs.iter().copied());
            Term { key: lat.pack(&nu).unwrap(), mom: nu.momentum() as i32, val: Complex::new(v, 0.5 * v) }
        };
        let mut x = vec![mk(&[(0, 1)], 1.0), mk(&[(1, 2), (-1, -1)], 2.0), mk(&[(-1, 1)], -0.5)];
        let mut y = vec![mk(&[(0, -1)], 3.0), mk(&[(1, -1)], 0.25)];
        x.sort_by_key(|t| t.key);
        y.sort_by_key(|t| t.key);
        let out = product(&[Pair { x: &x, y: &y, scale: 1.0 }], |_, _| true);
        let mut naive: std::collections::BTreeMap<MultiIndex, Complex<f64>> = Default::default();
        for a in &x {
            for b in &y {
                *naive.entry(lat.unpack(a.key).add(&lat.unpack(b.key))).or_default() += a.val * b.val;
            }
        }
        assert_eq!(out.len(), naive.len());
        for t in &out {
            let nu = lat.unpack(t.key);
            assert_eq!(t.mom as i64, nu.momentum());
            assert!((t.val - naive[&nu]).norm() < 1e-15);
        }
    }
}
