//! Window-projected quintic convolution `(|u|^4 u)_j` on a single Fourier vector.
//!
//! Shared by the torus residual and the time integrator so that both see the same Galerkin
//! truncation: all five modes of `j1 - j2 + j3 - j4 + j5 = j` lie in the window.

use num_complex::Complex;

use crate::scalar::{czero, Real};

/// Scratch buffers for repeated evaluations on one window.
#[derive(Clone, Debug)]
pub struct QuinticWorkspace<R> {
    half: i32,
    a: Vec<Complex<R>>,
    b: Vec<Complex<R>>,
}

impl<R: Real> QuinticWorkspace<R> {
    pub fn new(half: i32) -> Self {
        let n = (4 * half + 1) as usize;
        Self { half, a: vec![czero(); n], b: vec![czero(); n] }
    }

    /// Writes `(|u|^4 u)_j` for `|j| <= J` into `out`; `u` and `out` are laid out `-J..=J`.
    pub fn apply(&mut self, u: &[Complex<R>], out: &mut [Complex<R>]) {
        let j = self.half;
        let n = (2 * j + 1) as usize;
        debug_assert_eq!(u.len(), n);
        debug_assert_eq!(out.len(), n);
        let off = 2 * j;

        // A[d] = sum_{a - b = d} u_a conj(u_b)
        for d in -2 * j..=2 * j {
            let lo = (-j).max(d - j);
            let hi = j.min(d + j);
            let mut s = czero();
            for a in lo..=hi {
                s += u[(a + j) as usize] * u[(a - d + j) as usize].conj();
            }
            self.a[(d + off) as usize] = s;
        }
        // B[e] = sum_{d1 + d2 = e} A[d1] A[d2], only |e| <= 2J can reach the window.
        for e in -2 * j..=2 * j {
            let lo = (-2 * j).max(e - 2 * j);
            let hi = (2 * j).min(e + 2 * j);
            let mut s = czero();
            for d in lo..=hi {
                s += self.a[(d + off) as usize] * self.a[(e - d + off) as usize];
            }
            self.b[(e + off) as usize] = s;
        }
        for m in -j..=j {
            let lo = (-2 * j).max(m - j);
            let hi = (2 * j).min(m + j);
            let mut s = czero();
            for e in lo..=hi {
                s += self.b[(e + off) as usize] * u[(m - e + j) as usize];
            }
            out[(m + j) as usize] = s;
        }
    }
}

/// One-shot version of [`QuinticWorkspace::apply`].
pub fn quintic_window<R: Real>(u: &[Complex<R>], half: i32) -> Vec<Complex<R>> {
    let mut ws = QuinticWorkspace::new(half);
    let mut out = vec![czero(); u.len()];
    ws.apply(u, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_five_fold_sum() {
        let j = 2i32;
        let u: Vec<Complex<f64>> = (0..5).map(|i| Complex::new(0.3 + 0.1 * i as f64, -0.2 * i as f64 + 0.05)).collect();
        let got = quintic_window(&u, j);
        let at = |m: i32| u[(m + j) as usize];
        for m in -j..=j {
            let mut s = Complex::new(0.0, 0.0);
            for a in -j..=j {
                for b in -j..=j {
                    for c in -j..=j {
                        for d in -j..=j {
                            let e = m - a + b - c + d;
                            if e.abs() <= j {
                                s += at(a) * at(b).conj() * at(c) * at(d).conj() * at(e);
                            }
                        }
                    }
                }
            }
            assert!((got[(m + j) as usize] - s).norm() < 1e-13 * (1.0 + s.norm()), "{m}: {} vs {}", got[(m + j) as usize], s);
        }
    }

    #[test]
    fn single_mode() {
        let u = vec![Complex::new(0.0, 0.0), Complex::new(0.6, 0.8), Complex::new(0.0, 0.0)];
        let got = quintic_window(&u, 1);
        assert!((got[1] - u[1]).norm() < 1e-15); // |u|^4 = 1
        assert_eq!(got[0], Complex::new(0.0, 0.0));
    }
}
