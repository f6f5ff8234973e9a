//! Arbitrary-precision re-implementation of the closed-form bounds, used as
//! an independent reference for the `f64` code.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

const PREC: usize = 320;
const RM: RoundingMode = RoundingMode::ToEven;

fn num(v: f64) -> BigFloat {
    BigFloat::from_f64(v, PREC)
}

fn int(v: i64) -> BigFloat {
    BigFloat::from_i64(v, PREC)
}

fn add(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.add(b, PREC, RM)
}

fn sub(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.sub(b, PREC, RM)
}

fn mul(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.mul(b, PREC, RM)
}

fn div(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.div(b, PREC, RM)
}

fn sqrt(a: &BigFloat) -> BigFloat {
    a.sqrt(PREC, RM)
}

pub struct Hp {
    cc: Consts,
}

impl Default for Hp {
    fn default() -> Self {
        Self::new()
    }
}

impl Hp {
    pub fn new() -> Self {
        Self { cc: Consts::new().expect("constants cache") }
    }







    pub fn pow(&mut self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.pow(b, PREC, RM, &mut self.cc)
    }

    pub fn exp(&mut self, a: &BigFloat) -> BigFloat {
        a.exp(PREC, RM, &mut self.cc)
    }


    pub fn e(&mut self) -> BigFloat {
        let one = int(1);
        self.exp(&one)
    }

    pub fn to_f64(&mut self, a: &BigFloat) -> f64 {
        let s = a.format(Radix::Dec, RM, &mut self.cc).expect("format");
        s.parse().unwrap_or_else(|_| panic!("cannot parse '{s}'"))
    }

    /// `(3(1−α)/(2α))^{(1−α)/(2α)}`.
    pub fn beta(&mut self, alpha: f64) -> f64 {
        let b = self.beta_big(alpha, 2);
        self.to_f64(&b)
    }

    // (3(1−α)/(2α))^{(1−α)/(k·α)}
    fn beta_big(&mut self, alpha: f64, k: i64) -> BigFloat {
        let a = num(alpha);
        let one_minus = sub(&int(1), &a);
        let base = div(&mul(&int(3), &one_minus), &mul(&int(2), &a));
        let ex = div(&one_minus, &mul(&int(k), &a));
        self.pow(&base, &ex)
    }

    /// `2 + K·C1·(x^{−2α}16^{α−1}D^{2(α−1)} + β²/x²)` times `e²D²` when
    /// `with_e2d2`, for the two constants `K ∈ {1007156, 35}`.
    fn stretched_constant(&mut self, k: i64, alpha: f64, x: f64, d: f64, c1: f64, with_e2d2: bool) -> BigFloat {
        let (a, xb, db) = (num(alpha), num(x), num(d));
        let am1 = sub(&a, &int(1));
        let two_a = mul(&int(2), &a);
        let neg_two_a = sub(&int(0), &two_a);
        let t1 = self.pow(&xb, &neg_two_a);
        let t2 = self.pow(&int(16), &am1);
        let t3 = self.pow(&db, &mul(&int(2), &am1));
        let first = mul(&mul(&t1, &t2), &t3);
        let beta_sq = self.beta_big(alpha, 1);
        let second = div(&beta_sq, &mul(&xb, &xb));
        let mut pre = mul(&int(k), &num(c1));
        if with_e2d2 {
            let e = self.e();
            pre = mul(&pre, &mul(&mul(&e, &e), &mul(&db, &db)));
        }
        add(&int(2), &mul(&pre, &add(&first, &second)))
    }

    pub fn theorem1_constant(&mut self, alpha: f64, x: f64, d: f64, c1: f64) -> f64 {
        let c = self.stretched_constant(1_007_156, alpha, x, d, c1, true);
        self.to_f64(&c)
    }

    /// `C(α,x)·exp(−(x/(4D))^{2α} n^α)`.
    pub fn theorem1_bound(&mut self, n: u64, x: f64, d: f64, alpha: f64, c1: f64) -> f64 {
        let c = self.stretched_constant(1_007_156, alpha, x, d, c1, true);
        let ratio = div(&num(x), &mul(&int(4), &num(d)));
        let v = self.stretched_tail(&c, &ratio, n, alpha);
        self.to_f64(&v)
    }

    fn stretched_tail(&mut self, c: &BigFloat, ratio: &BigFloat, n: u64, alpha: f64) -> BigFloat {
        let a = num(alpha);
        let p1 = self.pow(ratio, &mul(&int(2), &a));
        let p2 = self.pow(&int(n as i64), &a);
        let ex = self.exp(&sub(&int(0), &mul(&p1, &p2)));
        mul(c, &ex)
    }

    pub fn fan_bound(&mut self, n: u64, x: f64, alpha: f64, c1: f64) -> f64 {
        let c = self.stretched_constant(35, alpha, x, 1.0, c1, false);
        let ratio = div(&num(x), &int(4));
        let v = self.stretched_tail(&c, &ratio, n, alpha);
        self.to_f64(&v)
    }

    /// `(K1, K2)`.
    pub fn theorem2_constants(&mut self, p1: f64, p2: f64, r: f64, d: f64) -> (f64, f64) {
        let (p1b, p2b, rb, db) = (num(p1), num(p2), num(r), num(d));
        let two = int(2);
        let g = self.pow(&two, &mul(&two, &p2b));
        let pre = div(&g, &sub(&g, &int(1)));
        let pre = mul(&pre, &self.pow(&two, &sub(&int(1), &rb)));
        // 2^{p+2p·p2/r}·D^{p/r}
        let part = |hp: &mut Hp, p: &BigFloat| {
            let ex = add(p, &div(&mul(&mul(&two, p), &p2b), &rb));
            let a = hp.pow(&two, &ex);
            let b = hp.pow(&db, &div(p, &rb));
            mul(&a, &b)
        };
        let k1 = mul(&pre, &part(self, &p1b));
        let k2 = mul(&pre, &part(self, &p2b));
        let chain = self.pow(&div(&p2b, &sub(&p2b, &rb)), &div(&p2b, &rb));
        let k2 = mul(&k2, &chain);
        (self.to_f64(&k1), self.to_f64(&k2))
    }

    pub fn pinelis(&mut self, n: u64, x_abs: f64, b: f64, d: f64) -> f64 {
        let (xb, bb, db) = (num(x_abs), num(b), num(d));
        let den = mul(&mul(&int(2), &mul(&db, &db)), &mul(&int(n as i64), &mul(&bb, &bb)));
        let v = self.exp(&sub(&int(0), &div(&mul(&xb, &xb), &den)));
        self.to_f64(&v)
    }

    pub fn lesigne_volny(&mut self, n: u64, x: f64, p: f64, m: f64) -> f64 {
        let pb = num(p);
        let root = sqrt(&div(&pb, &sub(&pb, &int(1))));
        let pre = self.pow(&mul(&mul(&int(18), &pb), &root), &pb);
        let mx = self.pow(&div(&num(m), &num(x)), &pb);
        let half = div(&pb, &int(2));
        let nn = self.pow(&int(n as i64), &sub(&int(0), &half));
        let v = mul(&mul(&pre, &mx), &nn);
        self.to_f64(&v)
    }
}
