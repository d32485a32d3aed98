//! Packed harmonic labels.
//!
//! A harmonic `nu` supported on the active modes is stored as sixteen signed 8-bit lanes in a
//! `u128`, lane `i` holding the coefficient of the `i`-th active mode. Lane-wise addition is
//! a SWAR add; lanes never overflow because `||nu||_1` stays below `4K + 6` for every product
//! the recursion forms.

use crate::error::{Error, Result};
use crate::scalar::{bracket, Real};
use crate::seqspace::{ModeWindow, MultiIndex};

pub(crate) type Packed = u128;

pub(crate) const MAX_LANES: usize = 16;
const LO7: u128 = 0x7f7f_7f7f_7f7f_7f7f_7f7f_7f7f_7f7f_7f7f;
const HI: u128 = 0x8080_8080_8080_8080_8080_8080_8080_8080;
const ONES: u128 = 0x0101_0101_0101_0101_0101_0101_0101_0101;

#[inline(always)]
pub(crate) fn add(a: Packed, b: Packed) -> Packed {
    ((a & LO7).wrapping_add(b & LO7)) ^ ((a ^ b) & HI)
}

#[inline(always)]
pub(crate) fn neg(a: Packed) -> Packed {
    add(!a, ONES)
}

#[inline(always)]
pub(crate) fn lane(a: Packed, i: usize) -> i32 {
    ((a >> (8 * i)) as u8 as i8) as i32
}

/// Active modes and the per-lane data needed to read packed keys.
#[derive(Clone, Debug)]
pub(crate) struct Lattice {
    window: ModeWindow,
    modes: Vec<i32>,
    // window slot -> lane
    lane_of: Vec<Option<u8>>,
}

impl Lattice {
    pub fn new(window: ModeWindow, mut modes: Vec<i32>) -> Result<Self> {
        modes.sort_unstable();
        modes.dedup();
        if modes.len() > MAX_LANES {
            return Err(Error::LatticeOverflow(format!(
                "{} active modes, at most {MAX_LANES} supported",
                modes.len()
            )));
        }
        if let Some(m) = modes.iter().find(|m| !window.contains(**m)) {
            return Err(Error::InvalidParameter(format!("active mode {m} outside the window")));
        }
        let mut lane_of = vec![None; window.len()];
        for (i, &m) in modes.iter().enumerate() {
            lane_of[window.slot(m)] = Some(i as u8);
        }
        Ok(Self { window, modes, lane_of })
    }

    pub fn modes(&self) -> &[i32] {
        &self.modes
    }

    pub fn is_active(&self, j: i32) -> bool {
        self.window.contains(j) && self.lane_of[self.window.slot(j)].is_some()
    }

    pub fn unit(&self, j: i32) -> Option<Packed> {
        if !self.window.contains(j) {
            return None;
        }
        self.lane_of[self.window.slot(j)].map(|l| 1u128 << (8 * l as u32))
    }

    pub fn pack(&self, nu: &MultiIndex) -> Option<Packed> {
        let mut key = 0u128;
        for (m, v) in nu.iter() {
            if !self.window.contains(m) || !(-128..=127).contains(&v) {
                return None;
            }
            let l = self.lane_of[self.window.slot(m)]?;
            key |= ((v as i8 as u8) as u128) << (8 * l as u32);
        }
        Some(key)
    }

    pub fn unpack(&self, key: Packed) -> MultiIndex {
        let entries = (0..self.modes.len())
            .filter_map(|i| {
                let v = lane(key, i);
                (v != 0).then_some((self.modes[i], v))
            })
            .collect();
        MultiIndex::from_sorted_unchecked(entries)
    }

    #[inline]
    pub fn momentum(&self, key: Packed) -> i32 {
        (0..self.modes.len()).map(|i| self.modes[i] * lane(key, i)).sum()
    }

    /// `sum_i w_i nu_i` for per-lane weights.
    #[inline]
    pub fn dot<R: Real>(&self, key: Packed, per_lane: &[R]) -> R {
        let mut s = R::zero();
        for (i, w) in per_lane.iter().enumerate() {
            let v = lane(key, i);
            if v != 0 {
                s += *w * R::from_int(v as i64);
            }
        }
        s
    }

    /// `<mode_i>^alpha` per lane.
    pub fn alpha_weights<R: Real>(&self, alpha: R) -> Vec<R> {
        self.modes.iter().map(|&m| bracket::<R>(m).powf(alpha)).collect()
    }

    /// `|nu|_alpha` with precomputed lane weights.
    #[inline]
    pub fn alpha_norm<R: Real>(&self, key: Packed, weights: &[R]) -> R {
        let mut s = R::zero();
        for (i, w) in weights.iter().enumerate() {
            let v = lane(key, i);
            if v != 0 {
                s += *w * R::from_int(v.abs() as i64);
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pack_roundtrip() {
        let lat = Lattice::new(ModeWindow::new(6).unwrap(), vec![-2, -1, 0, 1, 2]).unwrap();
        let nu = MultiIndex::from_pairs([(-2, 3), (1, -5), (2, 1)]);
        let k = lat.pack(&nu).unwrap();
        assert_eq!(lat.unpack(k), nu);
        assert_eq!(lat.momentum(k) as i64, nu.momentum());
        assert!(lat.pack(&MultiIndex::unit(3)).is_none());
        assert_eq!(lat.unit(1), lat.pack(&MultiIndex::unit(1)));
    }

    proptest! {
        #[test]
        fn swar_matches_lanewise(a in proptest::collection::vec(-60i32..60, 16),
                                 b in proptest::collection::vec(-60i32..60, 16)) {
            let modes: Vec<i32> = (-8..8).collect();
            let lat = Lattice::new(ModeWindow::new(8).unwrap(), modes.clone()).unwrap();
            let na = MultiIndex::from_pairs(modes.iter().copied().zip(a.iter().copied()));
            let nb = MultiIndex::from_pairs(modes.iter().copied().zip(b.iter().copied()));
            let ka = lat.pack(&na).unwrap();
            let kb = lat.pack(&nb).unwrap();
            prop_assert_eq!(lat.unpack(add(ka, kb)), na.add(&nb));
            prop_assert_eq!(lat.unpack(neg(ka)), na.neg());
            prop_assert_eq!(add(ka, neg(ka)), 0);
        }
    }
}
