//! Vectors over a prime field, stored as base-q digit codes.

/// Coordinates of a code, least significant first.
pub fn digits(q: u64, dim: u32, mut e: u64) -> Vec<u64> {
    let mut v = Vec::with_capacity(dim as usize);
    for _ in 0..dim {
        v.push(e % q);
        e /= q;
    }
    v
}

pub fn code(q: u64, v: &[u64]) -> u64 {
    v.iter().rev().fold(0, |acc, &d| acc * q + d)
}

pub fn inv(q: u64, a: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(q));
    // Fermat: a^(q-2)
    let (mut base, mut exp, mut acc) = (a % q, q - 2, 1);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % q;
        }
        base = base * base % q;
        exp >>= 1;
    }
    acc
}

pub fn is_prime(q: u64) -> bool {
    q >= 2 && (2..).take_while(|d| d * d <= q).all(|d| !q.is_multiple_of(d))
}

/// `a + f·b`, coordinatewise.
pub fn axpy(q: u64, a: &mut [u64], f: u64, b: &[u64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x = (*x + f * y) % q;
    }
}

pub fn add_codes(q: u64, dim: u32, a: u64, b: u64) -> u64 {
    let mut x = digits(q, dim, a);
    axpy(q, &mut x, 1, &digits(q, dim, b));
    code(q, &x)
}

pub fn sub_codes(q: u64, dim: u32, a: u64, b: u64) -> u64 {
    let mut x = digits(q, dim, a);
    axpy(q, &mut x, q - 1, &digits(q, dim, b));
    code(q, &x)
}

pub fn scale_code(q: u64, dim: u32, f: u64, a: u64) -> u64 {
    code(q, &digits(q, dim, a).iter().map(|d| d * f % q).collect::<Vec<_>>())
}

/// Row echelon form that remembers how each row is built from the
/// independent vectors inserted so far.
#[derive(Debug, Clone)]
pub struct Echelon {
    q: u64,
    dim: usize,
    rows: Vec<Row>,
}

#[derive(Debug, Clone)]
struct Row {
    v: Vec<u64>,
    pivot: usize,
    combo: Vec<u64>,
}

impl Echelon {
    pub fn new(q: u64, dim: u32) -> Echelon {
        Echelon { q, dim: dim as usize, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// `(residual, c)` with `v = residual + Σ c_k·orig_k`.
    pub fn reduce(&self, v: &[u64]) -> (Vec<u64>, Vec<u64>) {
        let q = self.q;
        let mut res = v.to_vec();
        let mut combo = vec![0; self.rows.len()];
        for r in &self.rows {
            let x = res[r.pivot];
            if x != 0 {
                let f = x * inv(q, r.v[r.pivot]) % q;
                axpy(q, &mut res, q - f, &r.v);
                axpy(q, &mut combo, f, &r.combo);
            }
        }
        (res, combo)
    }

    /// `None` if `v` was independent (and is now the next original),
    /// otherwise its coefficients over the originals.
    pub fn insert(&mut self, v: &[u64]) -> Option<Vec<u64>> {
        let (res, mut combo) = self.reduce(v);
        match res.iter().position(|&x| x != 0) {
            None => Some(combo),
            Some(pivot) => {
                let q = self.q;
                for c in combo.iter_mut() {
                    *c = (q - *c) % q;
                }
                combo.push(1);
                for r in self.rows.iter_mut() {
                    r.combo.push(0);
                }
                self.rows.push(Row { v: res, pivot, combo });
                None
            }
        }
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).0.iter().all(|&x| x == 0)
    }

    /// Every vector of the span, as codes, sorted.
    pub fn span_codes(&self) -> Vec<u64> {
        let q = self.q;
        let mut out = vec![vec![0u64; self.dim]];
        for r in &self.rows {
            let mut next = Vec::with_capacity(out.len() * q as usize);
            for v in &out {
                for f in 0..q {
                    let mut w = v.clone();
                    axpy(q, &mut w, f, &r.v);
                    next.push(w);
                }
            }
            out = next;
        }
        let mut codes: Vec<u64> = out.iter().map(|v| code(q, v)).collect();
        codes.sort_unstable();
        codes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_round_trip() {
        for e in 0..81 {
            assert_eq!(code(3, &digits(3, 4, e)), e);
        }
        assert_eq!(add_codes(2, 3, 0b011, 0b110), 0b101);
        assert_eq!(sub_codes(3, 2, 1, 2), code(3, &[2, 0]));
    }

    #[test]
    fn echelon_coefficients() {
        let mut ech = Echelon::new(3, 3);
        assert!(ech.insert(&[1, 0, 0]).is_none());
        assert!(ech.insert(&[1, 1, 0]).is_none());
        let c = ech.insert(&[0, 2, 0]).expect("dependent");
        let mut back = vec![0; 3];
        axpy(3, &mut back, c[0], &[1, 0, 0]);
        axpy(3, &mut back, c[1], &[1, 1, 0]);
        assert_eq!(back, vec![0, 2, 0]);
        assert_eq!(ech.span_codes().len(), 9);
        assert!(!ech.contains(&[0, 0, 1]));
    }

    #[test]
    fn inverses() {
        for q in [2, 3, 5, 7] {
            for a in 1..q {
                assert_eq!(a * inv(q, a) % q, 1);
            }
        }
        assert!(is_prime(7) && !is_prime(9) && !is_prime(1));
    }
}
