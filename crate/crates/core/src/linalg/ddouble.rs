//! Minimal double-double arithmetic for the Sturm recurrence.
//!
//! The recurrence subtracts a small shift from diagonal entries of size
//! `2β(n+1)²`; in plain `f64` the count becomes a step function of the
//! shift with steps of `ulp(2β(n+1)²)`, which is about 1.5e-8 at n = 4095.

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct DD {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DD {
    #[inline]
    pub fn new(hi: f64) -> Self {
        DD { hi, lo: 0.0 }
    }

    /// `a − b` exactly.
    #[inline]
    pub fn diff(a: f64, b: f64) -> Self {
        let (hi, lo) = two_sum(a, -b);
        DD { hi, lo }
    }

    /// `a²` exactly.
    #[inline]
    pub fn square(a: f64) -> Self {
        let (hi, lo) = two_prod(a, a);
        DD { hi, lo }
    }

    #[inline]
    pub fn sub(self, o: DD) -> DD {
        let (s, e) = two_sum(self.hi, -o.hi);
        let e = e + (self.lo - o.lo);
        let (hi, lo) = quick_two_sum(s, e);
        DD { hi, lo }
    }

    #[inline]
    fn mul_f64(self, b: f64) -> DD {
        let (p, e) = two_prod(self.hi, b);
        let e = self.lo.mul_add(b, e);
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }

    #[inline]
    pub fn div(self, o: DD) -> DD {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul_f64(q1));
        let q2 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DD { hi, lo }
    }
}
