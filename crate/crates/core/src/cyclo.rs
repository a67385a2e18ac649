//! Exact arithmetic in `Q(ζ_M)` and bivariate polynomials over it, enough to
//! compare compositions of polynomial maps of `C^2` coefficient by coefficient.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::exact::GaussRat;

/// Integer polynomial, lowest degree first.
fn poly_sub_div(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    // exact division by a monic polynomial
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    if rem.len() <= dn {
        return vec![BigInt::zero()];
    }
    let mut q = vec![BigInt::zero(); rem.len() - dn];
    for i in (0..q.len()).rev() {
        let c = rem[i + dn].clone();
        if !c.is_zero() {
            for (j, dj) in den.iter().enumerate() {
                rem[i + j] -= &c * dj;
            }
        }
        q[i] = c;
    }
    q
}

/// The `M`-th cyclotomic polynomial.
pub fn cyclotomic_poly(m: u64) -> Vec<BigInt> {
    let mut p = vec![BigInt::zero(); m as usize + 1];
    p[0] = -BigInt::one();
    p[m as usize] = BigInt::one();
    for k in 1..m {
        if m % k == 0 {
            p = poly_sub_div(&p, &cyclotomic_poly(k));
        }
    }
    p
}

/// The field `Q(ζ_M)`, `ζ_M = e^{2πi/M}`, with `M` divisible by 4 so that
/// Gaussian rationals embed via `i = ζ^{M/4}`.
#[derive(Debug)]
pub struct CycloField {
    m: u64,
    phi: Vec<BigInt>,
}

impl CycloField {
    pub fn new(m: u64) -> Arc<Self> {
        assert!(m % 4 == 0 && m > 0, "modulus must be a positive multiple of 4");
        Arc::new(CycloField { m, phi: cyclotomic_poly(m) })
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    fn dim(&self) -> usize {
        self.phi.len() - 1
    }

    fn reduce(&self, mut c: Vec<BigRational>) -> Vec<BigRational> {
        let n = self.dim();
        for i in (n..c.len()).rev() {
            let lead = std::mem::take(&mut c[i]);
            if lead.is_zero() {
                continue;
            }
            for (j, pj) in self.phi.iter().enumerate().take(n) {
                c[i - n + j] -= &lead * BigRational::from_integer(pj.clone());
            }
        }
        c.truncate(n);
        c.resize(n, BigRational::zero());
        c
    }
}

/// An element of `Q(ζ_M)`.
#[derive(Clone)]
pub struct Cyc {
    field: Arc<CycloField>,
    c: Vec<BigRational>,
}

impl PartialEq for Cyc {
    fn eq(&self, o: &Self) -> bool {
        self.field.m == o.field.m && self.c == o.c
    }
}

impl fmt::Debug for Cyc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Cyc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .c
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| if i == 0 { format!("{c}") } else { format!("({c})z^{i}") })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl Cyc {
    pub fn zero(field: &Arc<CycloField>) -> Self {
        Cyc {
            field: field.clone(),
            c: vec![BigRational::zero(); field.dim()],
        }
    }

    pub fn from_rational(field: &Arc<CycloField>, r: BigRational) -> Self {
        let mut out = Self::zero(field);
        out.c[0] = r;
        out
    }

    pub fn one(field: &Arc<CycloField>) -> Self {
        Self::from_rational(field, BigRational::one())
    }

    /// `ζ_M^k`.
    pub fn root(field: &Arc<CycloField>, k: i64) -> Self {
        let k = k.rem_euclid(field.m as i64) as usize;
        let mut c = vec![BigRational::zero(); k + 1];
        c[k] = BigRational::one();
        Cyc {
            field: field.clone(),
            c: field.reduce(c),
        }
    }

    pub fn from_gauss(field: &Arc<CycloField>, g: &GaussRat) -> Self {
        let i = Self::root(field, (field.m / 4) as i64);
        Self::from_rational(field, g.re.clone()).add(&i.mul(&Self::from_rational(field, g.im.clone())))
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, o: &Cyc) -> Cyc {
        Cyc {
            field: self.field.clone(),
            c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn neg(&self) -> Cyc {
        Cyc {
            field: self.field.clone(),
            c: self.c.iter().map(|a| -a).collect(),
        }
    }

    pub fn sub(&self, o: &Cyc) -> Cyc {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Cyc) -> Cyc {
        let n = self.c.len();
        let mut out = vec![BigRational::zero(); 2 * n];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Cyc {
            field: self.field.clone(),
            c: self.field.reduce(out),
        }
    }

    /// Size of the largest rational coefficient, for reports.
    pub fn height(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.c.iter().map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
    }
}

/// `Σ c_{ij} x^i y^j` over `Q(ζ_M)`.
#[derive(Clone, Debug)]
pub struct Poly2 {
    field: Arc<CycloField>,
    terms: BTreeMap<(u32, u32), Cyc>,
}

impl PartialEq for Poly2 {
    fn eq(&self, o: &Self) -> bool {
        self.terms == o.terms
    }
}

impl Poly2 {
    pub fn zero(field: &Arc<CycloField>) -> Self {
        Poly2 {
            field: field.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Cyc) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: Cyc, i: u32, j: u32) -> Self {
        let mut p = Self::zero(&c.field);
        if !c.is_zero() {
            p.terms.insert((i, j), c);
        }
        p
    }

    pub fn x(field: &Arc<CycloField>) -> Self {
        Self::monomial(Cyc::one(field), 1, 0)
    }

    pub fn y(field: &Arc<CycloField>) -> Self {
        Self::monomial(Cyc::one(field), 0, 1)
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), Cyc> {
        &self.terms
    }

    pub fn add(&self, o: &Poly2) -> Poly2 {
        let mut terms = self.terms.clone();
        for (k, v) in &o.terms {
            let s = match terms.get(k) {
                Some(a) => a.add(v),
                None => v.clone(),
            };
            if s.is_zero() {
                terms.remove(k);
            } else {
                terms.insert(*k, s);
            }
        }
        Poly2 {
            field: self.field.clone(),
            terms,
        }
    }

    pub fn scale(&self, c: &Cyc) -> Poly2 {
        let mut out = Self::zero(&self.field);
        for (k, v) in &self.terms {
            let s = v.mul(c);
            if !s.is_zero() {
                out.terms.insert(*k, s);
            }
        }
        out
    }

    pub fn mul(&self, o: &Poly2) -> Poly2 {
        let mut out = Self::zero(&self.field);
        for ((i1, j1), a) in &self.terms {
            for ((i2, j2), b) in &o.terms {
                out = out.add(&Self::monomial(a.mul(b), i1 + i2, j1 + j2));
            }
        }
        out
    }

    /// `self(X, Y)`.
    pub fn compose(&self, xs: &Poly2, ys: &Poly2) -> Poly2 {
        let max_i = self.terms.keys().map(|k| k.0).max().unwrap_or(0);
        let max_j = self.terms.keys().map(|k| k.1).max().unwrap_or(0);
        let one = Self::constant(Cyc::one(&self.field));
        let mut px = vec![one.clone()];
        for i in 0..max_i as usize {
            px.push(px[i].mul(xs));
        }
        let mut py = vec![one];
        for j in 0..max_j as usize {
            py.push(py[j].mul(ys));
        }
        let mut out = Self::zero(&self.field);
        for ((i, j), c) in &self.terms {
            out = out.add(&px[*i as usize].mul(&py[*j as usize]).scale(c));
        }
        out
    }

    /// First monomial where `self` and `o` differ.
    pub fn first_difference(&self, o: &Poly2) -> Option<((u32, u32), Cyc, Cyc)> {
        let diff = self.add(&o.scale(&Cyc::one(&self.field).neg()));
        diff.terms.keys().next().map(|k| {
            let z = Cyc::zero(&self.field);
            (
                *k,
                self.terms.get(k).cloned().unwrap_or_else(|| z.clone()),
                o.terms.get(k).cloned().unwrap_or(z),
            )
        })
    }
}

/// A polynomial self-map `(P, R)` of `C^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMap2 {
    pub x: Poly2,
    pub y: Poly2,
}

impl PolyMap2 {
    /// `self ∘ inner`.
    pub fn after(&self, inner: &PolyMap2) -> PolyMap2 {
        PolyMap2 {
            x: self.x.compose(&inner.x, &inner.y),
            y: self.y.compose(&inner.x, &inner.y),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(cyclotomic_poly(1), ints(&[-1, 1]));
        assert_eq!(cyclotomic_poly(4), ints(&[1, 0, 1]));
        assert_eq!(cyclotomic_poly(12), ints(&[1, 0, -1, 0, 1]));
        assert_eq!(cyclotomic_poly(8).len(), 5);
        assert_eq!(cyclotomic_poly(60).len(), 17);
    }

    #[test]
    fn roots_multiply() {
        let f = CycloField::new(12);
        let z = Cyc::root(&f, 1);
        let mut p = Cyc::one(&f);
        for _ in 0..12 {
            p = p.mul(&z);
        }
        assert_eq!(p, Cyc::one(&f));
        assert_eq!(Cyc::root(&f, 5).mul(&Cyc::root(&f, 9)), Cyc::root(&f, 2));
        // 1 + ζ^4 + ζ^8 = 0 for a primitive cube root ζ^4
        let s = Cyc::one(&f).add(&Cyc::root(&f, 4)).add(&Cyc::root(&f, 8));
        assert!(s.is_zero());
    }

    #[test]
    fn compose_polys() {
        let f = CycloField::new(4);
        let (x, y) = (Poly2::x(&f), Poly2::y(&f));
        let p = x.mul(&y).add(&y.mul(&y));
        // p(y, x) = xy + x^2
        let q = p.compose(&y, &x);
        assert_eq!(q, x.mul(&y).add(&x.mul(&x)));
        assert!(q.first_difference(&p).is_some());
        assert!(p.first_difference(&p).is_none());
    }
}
