//! Dense two-mode ladder-operator brute force shared by unit tests.
//!
//! Amplitude arrays live on the full occupation square (n_a, n_b) with
//! n_a, n_b ≤ cap, and operators are applied entry by entry; none of the
//! production contraction formulas are involved. Keep `cap` at least two
//! above the highest occupied level so raising never truncates.

use num_complex::Complex64 as C64;

use crate::focksector::FockStateN;
use crate::fullspace::{tri_index, TwoModeState};

pub struct DenseTwoMode {
    pub cap: usize,
}

impl DenseTwoMode {
    pub fn idx(&self, na: usize, nb: usize) -> usize {
        na * (self.cap + 1) + nb
    }

    pub fn zero(&self) -> Vec<C64> {
        vec![C64::new(0.0, 0.0); (self.cap + 1) * (self.cap + 1)]
    }

    pub fn embed_fock(&self, s: &FockStateN) -> Vec<C64> {
        assert!(s.n_total + 2 <= self.cap, "cap leaves no raising headroom");
        let mut v = self.zero();
        for (j, cj) in s.c.iter().enumerate() {
            v[self.idx(j, s.n_total - j)] = *cj;
        }
        v
    }

    pub fn embed_two_mode(&self, s: &TwoModeState) -> Vec<C64> {
        assert!(s.n_trunc + 2 <= self.cap, "cap leaves no raising headroom");
        let mut v = self.zero();
        for k in 0..=s.n_trunc {
            for l in 0..=(s.n_trunc - k) {
                v[self.idx(k, l)] = s.c[tri_index(k, l)];
            }
        }
        v
    }

    pub fn lower_a(&self, v: &[C64]) -> Vec<C64> {
        let mut out = self.zero();
        for na in 1..=self.cap {
            for nb in 0..=self.cap {
                out[self.idx(na - 1, nb)] += (na as f64).sqrt() * v[self.idx(na, nb)];
            }
        }
        out
    }

    pub fn raise_a(&self, v: &[C64]) -> Vec<C64> {
        let mut out = self.zero();
        for na in 0..self.cap {
            for nb in 0..=self.cap {
                out[self.idx(na + 1, nb)] += ((na + 1) as f64).sqrt() * v[self.idx(na, nb)];
            }
        }
        out
    }

    pub fn lower_b(&self, v: &[C64]) -> Vec<C64> {
        let mut out = self.zero();
        for na in 0..=self.cap {
            for nb in 1..=self.cap {
                out[self.idx(na, nb - 1)] += (nb as f64).sqrt() * v[self.idx(na, nb)];
            }
        }
        out
    }

    pub fn raise_b(&self, v: &[C64]) -> Vec<C64> {
        let mut out = self.zero();
        for na in 0..=self.cap {
            for nb in 0..self.cap {
                out[self.idx(na, nb + 1)] += ((nb + 1) as f64).sqrt() * v[self.idx(na, nb)];
            }
        }
        out
    }
}

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
