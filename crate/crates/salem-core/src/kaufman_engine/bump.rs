//! The bump `φ(x) = c·exp(−1/(x(1−x)))` on `(0,1)`.
//!
//! With `u = x(1−x)` and `q = 1−2x`, `ψ = exp(−1/u)` has derivatives
//! `ψ^(n) = P_n·u^(−2n)·ψ` where `P_0 = 1` and
//! `P_{n+1} = P_n'·u² − 2n·q·u·P_n + q·P_n`.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::enclosure::{exp_point, CIv, Iv};
use crate::rat::{q_from_f64, Q};

/// Highest derivative order for which norms are precomputed.
pub const MAX_ORDER: usize = 8;
const COARSE_BITS: u32 = 10;

type Poly = Vec<BigInt>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &Poly, b: &Poly) -> Poly {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).cloned().unwrap_or_default() + b.get(i).cloned().unwrap_or_default())
        .collect()
}

fn poly_scale(a: &Poly, k: i64) -> Poly {
    a.iter().map(|x| x * k).collect()
}

fn poly_deriv(a: &Poly) -> Poly {
    if a.len() <= 1 {
        return vec![BigInt::zero()];
    }
    a.iter().enumerate().skip(1).map(|(i, x)| x * i as i64).collect()
}

/// Numerators `P_0 ..= P_max` of the derivative recursion.
pub fn derivative_polys(max: usize) -> Vec<Poly> {
    let u: Poly = vec![0.into(), 1.into(), (-1).into()];
    let q: Poly = vec![1.into(), (-2).into()];
    let u2 = poly_mul(&u, &u);
    let qu = poly_mul(&q, &u);
    let mut out: Vec<Poly> = vec![vec![BigInt::from(1)]];
    for n in 0..max {
        let p = &out[n];
        let t1 = poly_mul(&poly_deriv(p), &u2);
        let t2 = poly_scale(&poly_mul(&qu, p), -2 * n as i64);
        let t3 = poly_mul(&q, p);
        out.push(poly_add(&poly_add(&t1, &t2), &t3));
    }
    out
}

struct IvPoly {
    c: Vec<Iv>,
    d: Vec<Iv>,
}

impl IvPoly {
    fn new(p: &Poly) -> IvPoly {
        let c: Vec<Iv> = p.iter().map(|x| Iv::from_q(&Q::from_integer(x.clone()))).collect();
        let d: Vec<Iv> = poly_deriv(p).iter().map(|x| Iv::from_q(&Q::from_integer(x.clone()))).collect();
        IvPoly { c, d }
    }

    fn horner(c: &[Iv], x: Iv) -> Iv {
        let mut acc = Iv::ZERO;
        for a in c.iter().rev() {
            acc = acc * x + *a;
        }
        acc
    }

    fn at(&self, x: Iv) -> Iv {
        IvPoly::horner(&self.c, x)
    }

    /// Range over `[a,b]`: natural and mean-value forms intersected.
    fn range(&self, a: f64, b: f64) -> Iv {
        let x = Iv::new(a, b);
        let natural = IvPoly::horner(&self.c, x);
        let m = 0.5 * (a + b);
        let dm = IvPoly::horner(&self.d, x);
        let mv = self.at(Iv::pt(m)) + dm * (x - Iv::pt(m));
        natural.intersect(mv)
    }
}

/// `t^(2n) e^(−t)` at a point; `t = ∞` gives 0.
fn h_point(n: usize, t: f64) -> Iv {
    if t == f64::INFINITY {
        return Iv::ZERO;
    }
    let ti = Iv::pt(t);
    if n == 0 {
        return exp_point(-t);
    }
    (Iv::pt(2.0 * n as f64) * ti.ln() - ti).exp()
}

/// Range of `t^(2n) e^(−t)` for `t ∈ [tl, th]`.
fn h_range(n: usize, tl: f64, th: f64) -> Iv {
    let a = h_point(n, tl);
    let b = h_point(n, th);
    let lo = a.lo.min(b.lo).max(0.0);
    let peak = 2.0 * n as f64;
    let hi = if tl <= peak && peak <= th { h_point(n, peak).hi } else { a.hi.max(b.hi) };
    Iv::new(lo, hi)
}

pub struct BumpData {
    polys: Vec<IvPoly>,
    /// Upper bounds on `‖ψ^(n)‖₁` for the unnormalized `ψ`, `n ≤ MAX_ORDER`.
    psi_norms: Vec<f64>,
    /// Enclosure of `c = 1/∫ψ`.
    pub c: Iv,
    samples: Mutex<HashMap<usize, Arc<Vec<Iv>>>>,
}

static BUMP: OnceLock<BumpData> = OnceLock::new();

pub fn bump() -> &'static BumpData {
    BUMP.get_or_init(BumpData::build)
}

fn u_of(x: f64) -> Iv {
    Iv::pt(x) * (Iv::ONE - Iv::pt(x))
}

#[derive(Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    up: f64,
    low: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        let g1 = self.up - self.low;
        let g2 = o.up - o.low;
        g1.total_cmp(&g2).then(o.a.total_cmp(&self.a))
    }
}

impl BumpData {
    fn build() -> BumpData {
        let raw = derivative_polys(MAX_ORDER + 2);
        let polys: Vec<IvPoly> = raw.iter().map(IvPoly::new).collect();
        let mut bd = BumpData {
            polys,
            psi_norms: vec![],
            c: Iv::ONE,
            samples: Mutex::new(HashMap::new()),
        };
        bd.psi_norms = (0..=MAX_ORDER).map(|n| bd.psi_l1_upper(n, COARSE_BITS)).collect();
        bd.c = bd.normalization();
        bd
    }

    /// Enclosure of `ψ^(n)` over `[a,b] ⊆ [0,1/2]`.
    fn psi_range(&self, n: usize, a: f64, b: f64) -> Iv {
        let p = self.polys[n].range(a, b);
        let tl = (Iv::ONE / u_of(b)).lo;
        let th = if a == 0.0 { f64::INFINITY } else { (Iv::ONE / u_of(a)).hi };
        p * h_range(n, tl, th)
    }

    /// Enclosure of `ψ^(n)(x)` at a point of `(0,1)`.
    pub fn psi_at(&self, n: usize, x: f64) -> Iv {
        if x <= 0.0 || x >= 1.0 {
            return Iv::ZERO;
        }
        let t = Iv::ONE / u_of(x);
        self.polys[n].at(Iv::pt(x)) * h_range(n, t.lo, t.hi)
    }

    fn piece(&self, n: usize, a: f64, b: f64) -> Piece {
        let h = Iv::pt(b) - Iv::pt(a);
        let rng = self.psi_range(n, a, b);
        let crude = (h * Iv::pt(rng.mag())).hi;
        let p = self.polys[n].range(a, b);
        if p.lo > 0.0 || p.hi < 0.0 {
            // constant sign: midpoint rule with second-derivative remainder
            let m = 0.5 * (a + b);
            let fm = self.psi_at(n, m).abs();
            let f2 = self.psi_range(n + 2, a, b).mag();
            let rem = (h.powi(3) * Iv::pt(f2) / Iv::pt(24.0)).hi;
            let mid = h * fm;
            let up = (Iv::pt(mid.hi) + Iv::pt(rem)).hi.min(crude);
            let low = (Iv::pt(mid.lo) - Iv::pt(rem)).lo.max(0.0);
            Piece { a, b, up, low }
        } else {
            Piece { a, b, up: crude, low: 0.0 }
        }
    }

    /// Upper bound on `∫₀¹ |ψ^(n)|` with relative gap `2^-bits`, monotone in `bits`.
    pub fn psi_l1_upper(&self, n: usize, bits: u32) -> f64 {
        assert!(n <= MAX_ORDER, "derivative order above {MAX_ORDER}");
        let tol = 2f64.powi(-(bits as i32));
        let budget = 1usize << (bits.min(20) + 3);
        let start = 64;
        let mut heap = BinaryHeap::new();
        for i in 0..start {
            let a = 0.5 * i as f64 / start as f64;
            let b = 0.5 * (i + 1) as f64 / start as f64;
            heap.push(self.piece(n, a, b));
        }
        let rigorous = |h: &BinaryHeap<Piece>| {
            let mut s = Iv::ZERO;
            for p in h.iter() {
                s = s + Iv::pt(p.up);
            }
            (s * Iv::pt(2.0)).hi
        };
        let mut best = rigorous(&heap);
        let mut checkpoint = 2 * start;
        // running totals only steer the refinement; bounds come from `rigorous`
        let (mut up, mut low) = heap.iter().fold((0.0, 0.0), |(u, l), p| (u + p.up, l + p.low));
        loop {
            if up - low <= tol * up.max(1e-300) || heap.len() >= budget {
                break;
            }
            let p = heap.pop().expect("nonempty");
            let m = 0.5 * (p.a + p.b);
            let l = self.piece(n, p.a, m);
            let r = self.piece(n, m, p.b);
            up += l.up + r.up - p.up;
            low += l.low + r.low - p.low;
            heap.push(l);
            heap.push(r);
            if heap.len() >= checkpoint {
                best = best.min(rigorous(&heap));
                checkpoint *= 2;
            }
        }
        best.min(rigorous(&heap))
    }

    fn normalization(&self) -> Iv {
        // trapezoid on N nodes, aliasing bounded by the derivative norms
        let n_nodes = 256usize;
        let samples = self.samples(n_nodes);
        let mut s = Iv::ZERO;
        for v in samples.iter() {
            s = s + *v;
        }
        let integral = s / Iv::pt(n_nodes as f64);
        let err = self.alias_bound_psi(n_nodes as f64, 0.0);
        let integral = integral.inflate(err);
        Iv::ONE / integral
    }

    /// `Σ_{l≠0} |ψ̂(ξ + lN)|` for `|ξ| ≤ N/4`, unnormalized `ψ`.
    fn alias_bound_psi(&self, nodes: f64, _xi: f64) -> f64 {
        let mut best = f64::INFINITY;
        for n in 2..=MAX_ORDER {
            let zeta = 1.0 + 1.0 / (n as f64 - 1.0);
            let denom = Iv::pt(1.5 * std::f64::consts::PI * 0.999_999) * Iv::pt(nodes);
            let b = Iv::pt(2.0 * zeta) * Iv::pt(self.psi_norms[n]) / denom.powi(n as u32);
            best = best.min(b.hi);
        }
        best
    }

    /// `ψ(j/N)` for `j = 0..N`.
    fn samples(&self, nodes: usize) -> Arc<Vec<Iv>> {
        let mut cache = self.samples.lock().expect("sample cache");
        cache
            .entry(nodes)
            .or_insert_with(|| Arc::new((0..nodes).map(|j| self.psi_at(0, j as f64 / nodes as f64)).collect()))
            .clone()
    }

    /// Upper bound on `‖φ^(n)‖₁` from the cached coarse norms.
    pub fn phi_norm(&self, n: usize) -> f64 {
        if n == 0 {
            return 1.0;
        }
        (self.c * Iv::pt(self.psi_norms[n])).hi
    }

    /// `sup_{|y| ≥ y0} |φ̂(y)|` via the Schwartz bound `‖φ^(n)‖₁/(2π|y|)^n`.
    pub fn phi_hat_tail(&self, y0: f64) -> f64 {
        let mut best = 1.0f64;
        if y0 <= 0.0 {
            return best;
        }
        let tp = Iv::pt(2.0 * std::f64::consts::PI * 0.999_999) * Iv::pt(y0);
        for n in 1..=MAX_ORDER {
            let b = Iv::pt(self.phi_norm(n)) / tp.powi(n as u32);
            best = best.min(b.hi);
        }
        best
    }

    /// Enclosure of `φ̂(ξ) = ∫ φ(x) e^(−2πiξx) dx`.
    pub fn phi_hat(&self, xi: Xi) -> CIv {
        if xi.is_zero() {
            return CIv::ONE;
        }
        let mag = xi.mag();
        let far = self.phi_hat_tail(xi.mig());
        if far < 1e-13 {
            let d = Iv::new(-far, far);
            return CIv::new(d, d);
        }
        let mut nodes = 64usize;
        while (nodes as f64) < 4.0 * mag {
            nodes *= 2;
        }
        let err = loop {
            let e = (self.c * Iv::pt(self.alias_bound_psi(nodes as f64, mag))).hi;
            if e < 1e-13 || nodes >= 1 << 16 {
                break e;
            }
            nodes *= 2;
        };
        let samples = self.samples(nodes);
        let mut acc = CIv::ZERO;
        for (j, v) in samples.iter().enumerate() {
            if v.hi == 0.0 {
                continue;
            }
            let (s, c) = xi.turns(j as u64, nodes as u64).sincos_turns();
            acc = acc + CIv::new(c * *v, -(s * *v));
        }
        let scale = self.c / Iv::pt(nodes as f64);
        acc.scale(scale).inflate(err)
    }
}

/// Frequency argument: exact rational or a floating enclosure.
#[derive(Clone, Debug)]
pub enum Xi {
    Exact(Q),
    Approx(Iv),
}

impl Xi {
    fn is_zero(&self) -> bool {
        match self {
            Xi::Exact(q) => q.is_zero(),
            Xi::Approx(iv) => iv.lo == 0.0 && iv.hi == 0.0,
        }
    }

    fn mig(&self) -> f64 {
        match self {
            Xi::Exact(q) => Iv::from_q(q).mig(),
            Xi::Approx(iv) => iv.mig(),
        }
    }

    fn mag(&self) -> f64 {
        match self {
            Xi::Exact(q) => Iv::from_q(q).mag(),
            Xi::Approx(iv) => iv.mag(),
        }
    }

    /// `ξ·j/N` reduced mod 1 (exactly when `ξ` is rational).
    fn turns(&self, j: u64, n: u64) -> Iv {
        match self {
            Xi::Exact(q) => {
                let den = q.denom() * BigInt::from(n);
                let num = (q.numer() * BigInt::from(j)).mod_floor(&den);
                match (num.to_i128(), den.to_i128()) {
                    (Some(a), Some(b)) if b < (1i128 << 100) => {
                        let f = a as f64 / b as f64;
                        Iv::pt(f).inflate(f.abs() * 6e-16 + 1e-300)
                    }
                    _ => Iv::from_q(&Q::new(num, den)),
                }
            }
            Xi::Approx(iv) => {
                let t = *iv * Iv::pt(j as f64) / Iv::pt(n as f64);
                let k = t.lo.floor();
                t - Iv::pt(k)
            }
        }
    }
}

impl From<Q> for Xi {
    fn from(q: Q) -> Self {
        Xi::Exact(q)
    }
}

pub fn phi_hat(xi: impl Into<Xi>) -> CIv {
    bump().phi_hat(xi.into())
}

/// Certified upper bound on `‖φ^(n)‖₁`, nonincreasing in `precision`.
pub fn bump_derivative_l1(n: usize, precision: u32) -> Q {
    if n == 0 {
        return Q::from_integer(1.into());
    }
    let b = bump();
    let psi = b.psi_l1_upper(n, precision);
    q_from_f64((b.c * Iv::pt(psi)).hi)
}

#[derive(Clone, Debug, Serialize)]
pub struct BumpSpec {
    /// Coefficients of `P_n`, lowest degree first.
    pub numerators: Vec<Vec<String>>,
    pub c_lo: f64,
    pub c_hi: f64,
}

pub fn bump_spec(max_order: usize) -> BumpSpec {
    let b = bump();
    BumpSpec {
        numerators: derivative_polys(max_order).iter().map(|p| p.iter().map(|c| c.to_string()).collect()).collect(),
        c_lo: b.c.lo,
        c_hi: b.c.hi,
    }
}
