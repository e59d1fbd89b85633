//! Rate regions for OT over the two-receiver erasure broadcast channel.
//!
//! A [`RateRegion`] is a list of half-planes `a1 R1 + a2 R2 <= b` on the
//! nonnegative quadrant. Closed-form regions are generic over the scalar, so
//! plugging exact rationals gives exact vertices. The general bounds take an
//! arbitrary binary-input channel and maximize each information term over
//! `P(X = 1)` numerically.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{abs_diff, Probability};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("region '{0}' is unbounded")]
    Unbounded(String),
    #[error("region '{label}' has a negative bound {b}")]
    NegativeBound { label: String, b: f64 },
    #[error("probability {0} outside [0,1]")]
    Probability(f64),
    #[error("channel matrix: {0}")]
    Channel(String),
    #[error("grid resolution must be at least 101, got {0}")]
    Resolution(usize),
    #[error("channel is not of erasure form")]
    NotErasureForm,
}

/// `a1 R1 + a2 R2 <= b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint<P> {
    pub a1: P,
    pub a2: P,
    pub b: P,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRegion<P> {
    pub label: String,
    pub constraints: Vec<Constraint<P>>,
}

fn min<P: Probability>(a: P, b: P) -> P {
    if a <= b {
        a
    } else {
        b
    }
}

fn max<P: Probability>(a: P, b: P) -> P {
    if a >= b {
        a
    } else {
        b
    }
}

fn check_p<P: Probability>(p: &P) -> Result<(), RateError> {
    if *p < P::zero() || *p > P::one() {
        Err(RateError::Probability(p.as_f64()))
    } else {
        Ok(())
    }
}

/// `min{p, 1-p}`.
pub fn mask_rate<P: Probability>(p: &P) -> P {
    min(p.clone(), P::one() - p.clone())
}

/// `(2p - 1)^+`.
fn leftover<P: Probability>(p: &P) -> P {
    max(p.clone() + p.clone() - P::one(), P::zero())
}

fn tolerance<P: Probability>() -> P {
    if P::EXACT {
        P::zero()
    } else {
        P::from_f64(1e-9).expect("representable")
    }
}

fn cross<P: Probability>(o: &[P; 2], a: &[P; 2], b: &[P; 2]) -> P {
    (a[0].clone() - o[0].clone()) * (b[1].clone() - o[1].clone())
        - (a[1].clone() - o[1].clone()) * (b[0].clone() - o[0].clone())
}

fn same_point<P: Probability>(a: &[P; 2], b: &[P; 2]) -> bool {
    let tol = if P::EXACT { P::zero() } else { P::from_f64(1e-12).expect("representable") };
    abs_diff(&a[0], &b[0]) <= tol && abs_diff(&a[1], &b[1]) <= tol
}

/// Counterclockwise convex hull starting from the lowest-left point;
/// collinear points are dropped.
pub fn convex_hull<P: Probability>(points: &[[P; 2]]) -> Vec<[P; 2]> {
    let mut pts: Vec<[P; 2]> = Vec::new();
    for p in points {
        if !pts.iter().any(|q| same_point(p, q)) {
            pts.push(p.clone());
        }
    }
    pts.sort_by(|a, b| {
        a[0].partial_cmp(&b[0]).expect("ordered").then(a[1].partial_cmp(&b[1]).expect("ordered"))
    });
    if pts.len() <= 2 {
        return pts;
    }
    let tol = tolerance::<P>();
    let mut lower: Vec<[P; 2]> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= tol {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<[P; 2]> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= tol {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

impl<P: Probability> RateRegion<P> {
    pub fn new(label: impl Into<String>, constraints: Vec<Constraint<P>>) -> Result<Self, RateError> {
        let label = label.into();
        if let Some(c) = constraints.iter().find(|c| c.b < P::zero()) {
            return Err(RateError::NegativeBound { label, b: c.b.as_f64() });
        }
        Ok(RateRegion { label, constraints })
    }

    fn boxed(label: &str, r1: P, r2: P, sum: Option<P>) -> Self {
        let mut constraints = vec![
            Constraint { a1: P::one(), a2: P::zero(), b: r1 },
            Constraint { a1: P::zero(), a2: P::one(), b: r2 },
        ];
        if let Some(s) = sum {
            constraints.push(Constraint { a1: P::one(), a2: P::one(), b: s });
        }
        RateRegion { label: label.into(), constraints }
    }

    /// True when `(r1, r2)` is in the region (with the float tolerance).
    pub fn contains_point(&self, r: &[P; 2]) -> bool {
        let tol = tolerance::<P>();
        r[0] >= P::zero() - tol.clone()
            && r[1] >= P::zero() - tol.clone()
            && self
                .constraints
                .iter()
                .all(|c| c.a1.clone() * r[0].clone() + c.a2.clone() * r[1].clone() <= c.b.clone() + tol.clone())
    }

    fn bounded(&self) -> bool {
        let z = P::zero();
        let caps_r1 = self.constraints.iter().any(|c| c.a1 > z && c.a2 >= z);
        let caps_r2 = self.constraints.iter().any(|c| c.a2 > z && c.a1 >= z);
        caps_r1 && caps_r2
    }

    /// Counterclockwise vertices of the feasible polygon, starting at the
    /// origin. Degenerate regions give a segment or a single point.
    pub fn vertices(&self) -> Result<Vec<[P; 2]>, RateError> {
        if !self.bounded() {
            return Err(RateError::Unbounded(self.label.clone()));
        }
        let mut lines = self.constraints.clone();
        lines.push(Constraint { a1: P::one(), a2: P::zero(), b: P::zero() });
        lines.push(Constraint { a1: P::zero(), a2: P::one(), b: P::zero() });
        let mut candidates = Vec::new();
        for (i, u) in lines.iter().enumerate() {
            for v in &lines[i + 1..] {
                let det = u.a1.clone() * v.a2.clone() - u.a2.clone() * v.a1.clone();
                if det.is_zero() {
                    continue;
                }
                let x = (u.b.clone() * v.a2.clone() - u.a2.clone() * v.b.clone()) / det.clone();
                let y = (u.a1.clone() * v.b.clone() - u.b.clone() * v.a1.clone()) / det;
                let point = [x, y];
                if self.contains_point(&point) {
                    candidates.push(point);
                }
            }
        }
        Ok(convex_hull(&candidates))
    }

    /// `max (w1 R1 + w2 R2)` over the region.
    pub fn support(&self, w1: P, w2: P) -> Result<P, RateError> {
        let v = self.vertices()?;
        Ok(v.into_iter()
            .map(|[a, b]| w1.clone() * a + w2.clone() * b)
            .fold(P::zero(), |acc, x| max(acc, x)))
    }

    /// Region bounded by the hull of `points` (which must include the origin
    /// side of the quadrant). Edges along the axes are implied.
    pub fn from_hull(label: &str, points: &[[P; 2]]) -> Self {
        let hull = convex_hull(points);
        let mut constraints = Vec::new();
        for k in 0..hull.len() {
            let u = &hull[k];
            let v = &hull[(k + 1) % hull.len()];
            let a1 = v[1].clone() - u[1].clone();
            let a2 = u[0].clone() - v[0].clone();
            let b = a1.clone() * u[0].clone() + a2.clone() * u[1].clone();
            // Skip the axis edges (-R1 <= 0, -R2 <= 0).
            if a1 <= P::zero() && a2 <= P::zero() {
                continue;
            }
            constraints.push(Constraint { a1, a2, b });
        }
        // Degenerate hulls (a point or segment on an axis) still need caps.
        if !constraints.iter().any(|c| c.a1 > P::zero() && c.a2 >= P::zero()) {
            let r1 = hull.iter().map(|p| p[0].clone()).fold(P::zero(), max);
            constraints.push(Constraint { a1: P::one(), a2: P::zero(), b: r1 });
        }
        if !constraints.iter().any(|c| c.a2 > P::zero() && c.a1 >= P::zero()) {
            let r2 = hull.iter().map(|p| p[1].clone()).fold(P::zero(), max);
            constraints.push(Constraint { a1: P::zero(), a2: P::one(), b: r2 });
        }
        RateRegion { label: label.into(), constraints }
    }

    pub fn to_f64(&self) -> RateRegion<f64> {
        RateRegion {
            label: self.label.clone(),
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint { a1: c.a1.as_f64(), a2: c.a2.as_f64(), b: c.b.as_f64() })
                .collect(),
        }
    }

    /// JSON projection `{label, constraints, vertices}`.
    pub fn to_json(&self) -> Result<RegionJson, RateError> {
        Ok(RegionJson {
            label: self.label.clone(),
            constraints: self.constraints.iter().map(|c| [c.a1.as_f64(), c.a2.as_f64(), c.b.as_f64()]).collect(),
            vertices: self.vertices()?.iter().map(point_f64).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionJson {
    pub label: String,
    pub constraints: Vec<[f64; 3]>,
    pub vertices: Vec<[f64; 2]>,
}

/// `+ 0.0` folds `-0.0` into `0.0`.
fn point_f64<P: Probability>(v: &[P; 2]) -> [f64; 2] {
    [v[0].as_f64() + 0.0, v[1].as_f64() + 0.0]
}

/// One CSV row per vertex: `region_label,R1,R2`.
pub fn regions_csv(regions: &[RegionJson]) -> String {
    let mut out = String::from("region_label,R1,R2\n");
    for r in regions {
        for v in &r.vertices {
            out.push_str(&format!("{},{},{}\n", r.label, v[0], v[1]));
        }
    }
    out
}

/// `(max I(X;Y), max H(X|Y))` for BEC(`p`): `(1 - p, p)`.
pub fn bec_information_terms<P: Probability>(p: P) -> Result<(P, P), RateError> {
    check_p(&p)?;
    Ok((P::one() - p.clone(), p))
}

/// Non-colluding outer region.
pub fn region_noncolluding_outer<P: Probability>(p1: P, p2: P) -> Result<RateRegion<P>, RateError> {
    check_p(&p1)?;
    check_p(&p2)?;
    let prod = p1.clone() * p2.clone();
    let sum = min(prod.clone(), P::one() - prod);
    Ok(RateRegion::boxed("noncolluding-outer", mask_rate(&p1), mask_rate(&p2), Some(sum)))
}

/// Non-colluding OT capacity region of the erasure broadcast channel.
pub fn region_noncolluding_capacity<P: Probability>(p1: P, p2: P) -> Result<RateRegion<P>, RateError> {
    check_p(&p1)?;
    check_p(&p2)?;
    let sum = P::one() - p1.clone() * p2.clone();
    Ok(RateRegion::boxed("noncolluding-capacity", P::one() - p1, P::one() - p2, Some(sum)))
}

/// Colluding outer region.
pub fn region_colluding_outer<P: Probability>(p1: P, p2: P) -> Result<RateRegion<P>, RateError> {
    check_p(&p1)?;
    check_p(&p2)?;
    let prod = p1.clone() * p2.clone();
    let sum = min(prod.clone(), P::one() - prod);
    let r1 = p2.clone() * mask_rate(&p1);
    let r2 = p1.clone() * mask_rate(&p2);
    Ok(RateRegion::boxed("colluding-outer", r1, r2, Some(sum)))
}

/// Colluding inner (achievable) region.
pub fn region_colluding_inner<P: Probability>(p1: P, p2: P) -> Result<RateRegion<P>, RateError> {
    check_p(&p1)?;
    check_p(&p2)?;
    let (m1, m2) = (mask_rate(&p1), mask_rate(&p2));
    let r1 = p2.clone() * m1.clone();
    let r2 = p1.clone() * m2.clone();
    let sum = r1.clone() + r2.clone() - m1 * m2;
    Ok(RateRegion::boxed("colluding-inner", r1, r2, Some(sum)))
}

#[derive(Debug, Clone)]
pub struct TimeSharing<P> {
    /// Bob-1 served first.
    pub first_one: RateRegion<P>,
    /// Bob-2 served first.
    pub first_two: RateRegion<P>,
    pub hull: RateRegion<P>,
    /// `max (R1 + R2)` over the hull.
    pub hull_sum: P,
}

/// The two ordered two-phase boxes and their convex hull. `(2p - 1)` is
/// clamped at zero.
pub fn region_timesharing<P: Probability>(p1: P, p2: P) -> Result<TimeSharing<P>, RateError> {
    check_p(&p1)?;
    check_p(&p2)?;
    let (m1, m2) = (mask_rate(&p1), mask_rate(&p2));
    let first_one =
        RateRegion::boxed("timesharing-1-then-2", p2.clone() * m1.clone(), leftover(&p1) * m2.clone(), None);
    let first_two = RateRegion::boxed("timesharing-2-then-1", leftover(&p2) * m1, p1 * m2, None);
    let mut points = first_one.vertices()?;
    points.extend(first_two.vertices()?);
    let hull = RateRegion::from_hull("timesharing-hull", &points);
    let hull_sum = hull.support(P::one(), P::one())?;
    Ok(TimeSharing { first_one, first_two, hull, hull_sum })
}

/// The five labeled regions at `(p1, p2)`.
pub fn all_regions<P: Probability>(p1: P, p2: P) -> Result<Vec<RateRegion<P>>, RateError> {
    Ok(vec![
        region_noncolluding_outer(p1.clone(), p2.clone())?,
        region_noncolluding_capacity(p1.clone(), p2.clone())?,
        region_colluding_outer(p1.clone(), p2.clone())?,
        region_colluding_inner(p1.clone(), p2.clone())?,
        region_timesharing(p1, p2)?.hull,
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Containment {
    pub inner: String,
    pub outer: String,
    pub contained: bool,
    /// Vertices of `inner` outside `outer`.
    pub violations: Vec<[f64; 2]>,
}

/// Vertex-wise test of `inner ⊆ outer` (both are convex).
pub fn check_containment<P: Probability>(inner: &RateRegion<P>, outer: &RateRegion<P>) -> Result<Containment, RateError> {
    let violations: Vec<[f64; 2]> = inner
        .vertices()?
        .into_iter()
        .filter(|v| !outer.contains_point(v))
        .map(|v| point_f64(&v))
        .collect();
    Ok(Containment {
        inner: inner.label.clone(),
        outer: outer.label.clone(),
        contained: violations.is_empty(),
        violations,
    })
}

/// The containment checks reported for `(p1, p2)`: capacity inside the
/// non-colluding outer region, and colluding inner inside colluding outer.
pub fn containment_report<P: Probability>(p1: P, p2: P) -> Result<Vec<Containment>, RateError> {
    Ok(vec![
        check_containment(
            &region_noncolluding_capacity(p1.clone(), p2.clone())?,
            &region_noncolluding_outer(p1.clone(), p2.clone())?,
        )?,
        check_containment(&region_colluding_inner(p1.clone(), p2.clone())?, &region_colluding_outer(p1, p2)?)?,
    ])
}

/// Binary-input broadcast channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelSpec {
    /// Two independent erasure channels.
    Bec { p1: f64, p2: f64 },
    /// `w[x][y1][y2] = W(y1, y2 | x)`.
    Pmf { w: [Vec<Vec<f64>>; 2] },
}

impl ChannelSpec {
    /// Explicit pmf; the erasure pair uses outputs `0, 1, e` in that order.
    pub fn pmf(&self) -> Result<[Vec<Vec<f64>>; 2], RateError> {
        match self {
            ChannelSpec::Bec { p1, p2 } => {
                for p in [p1, p2] {
                    check_p(p)?;
                }
                let row = |x: usize, p: f64| {
                    let mut r = vec![0.0; 3];
                    r[x] = 1.0 - p;
                    r[2] = p;
                    r
                };
                Ok([0, 1].map(|x| {
                    let (a, b) = (row(x, *p1), row(x, *p2));
                    a.iter().map(|u| b.iter().map(|v| u * v).collect()).collect()
                }))
            }
            ChannelSpec::Pmf { w } => {
                let shape = (w[0].len(), w[0].first().map_or(0, Vec::len));
                if shape.0 == 0 || shape.1 == 0 {
                    return Err(RateError::Channel("empty output alphabet".into()));
                }
                for row in w {
                    if row.len() != shape.0 || row.iter().any(|r| r.len() != shape.1) {
                        return Err(RateError::Channel("rows have different shapes".into()));
                    }
                    if row.iter().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
                        return Err(RateError::Channel("negative or non-finite entry".into()));
                    }
                    let mass: f64 = row.iter().flatten().sum();
                    if (mass - 1.0).abs() > 1e-9 {
                        return Err(RateError::Channel(format!("row sums to {mass}")));
                    }
                }
                Ok(w.clone())
            }
        }
    }
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Joint law `P(x, y1, y2)` for `P(X = 1) = q`.
struct JointLaw {
    p: Vec<[f64; 2]>,
    n1: usize,
    n2: usize,
}

impl JointLaw {
    fn new(w: &[Vec<Vec<f64>>; 2], q: f64) -> Self {
        let (n1, n2) = (w[0].len(), w[0][0].len());
        let mut p = vec![[0.0; 2]; n1 * n2];
        for (x, px) in [(0, 1.0 - q), (1, q)] {
            for y1 in 0..n1 {
                for y2 in 0..n2 {
                    p[y1 * n2 + y2][x] = px * w[x][y1][y2];
                }
            }
        }
        JointLaw { p, n1, n2 }
    }

    /// `H(X, Y')` where `Y'` is the output projection selected by `keep`.
    fn h_with(&self, keep: (bool, bool), include_x: bool) -> f64 {
        let mut cells: std::collections::HashMap<(usize, usize, usize), f64> = std::collections::HashMap::new();
        for y1 in 0..self.n1 {
            for y2 in 0..self.n2 {
                for x in 0..2 {
                    let key = (
                        if keep.0 { y1 } else { 0 },
                        if keep.1 { y2 } else { 0 },
                        if include_x { x } else { 0 },
                    );
                    *cells.entry(key).or_default() += self.p[y1 * self.n2 + y2][x];
                }
            }
        }
        cells.values().map(|&v| plogp(v)).sum()
    }

    fn h_x_given(&self, keep: (bool, bool)) -> f64 {
        self.h_with(keep, true) - self.h_with(keep, false)
    }

    fn h_x(&self) -> f64 {
        self.h_with((false, false), true)
    }

    fn i_x(&self, keep: (bool, bool)) -> f64 {
        self.h_x() - self.h_x_given(keep)
    }

    /// `I(X; Y_a | Y_b)` with `a = 1` when `first`.
    fn i_x_cond(&self, first: bool) -> f64 {
        let other = if first { (false, true) } else { (true, false) };
        self.h_x_given(other) - self.h_x_given((true, true))
    }
}

/// Which converse to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Converse {
    NonColluding,
    Colluding,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaximizedTerm {
    pub name: String,
    pub value: f64,
    /// Maximizing `P(X = 1)`.
    pub argmax: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralBounds {
    pub converse: Converse,
    pub resolution: usize,
    pub terms: Vec<MaximizedTerm>,
    pub r1: f64,
    pub r2: f64,
    pub sum: f64,
    #[serde(skip)]
    pub region: RateRegion<f64>,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Grid scan over `q ∈ [0, 1]` followed by golden-section refinement around
/// the best grid point.
pub fn maximize_scalar(f: impl Fn(f64) -> f64, resolution: usize) -> (f64, f64) {
    let step = 1.0 / (resolution - 1) as f64;
    let (mut best_q, mut best) = (0.0, f(0.0));
    for i in 1..resolution {
        let q = i as f64 * step;
        let v = f(q);
        if v > best {
            best = v;
            best_q = q;
        }
    }
    let (mut a, mut b) = ((best_q - step).max(0.0), (best_q + step).min(1.0));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let q = (a + b) / 2.0;
    let v = f(q);
    if v > best {
        (q, v)
    } else {
        (best_q, best)
    }
}

/// Converse bounds for a general binary-input channel: each information
/// term is maximized over `P_X` on its own.
pub fn general_upper_bounds(w: &ChannelSpec, resolution: usize, converse: Converse) -> Result<GeneralBounds, RateError> {
    if resolution < 101 {
        return Err(RateError::Resolution(resolution));
    }
    let pmf = w.pmf()?;
    let term = |name: &str, f: &dyn Fn(&JointLaw) -> f64| {
        let (argmax, value) = maximize_scalar(|q| f(&JointLaw::new(&pmf, q)), resolution);
        MaximizedTerm { name: name.into(), value, argmax }
    };
    let mut terms = vec![
        term("I(X;Y1)", &|j| j.i_x((true, false))),
        term("I(X;Y2)", &|j| j.i_x((false, true))),
        term("I(X;Y1,Y2)", &|j| j.i_x((true, true))),
        term("H(X|Y1,Y2)", &|j| j.h_x_given((true, true))),
    ];
    let value = |terms: &[MaximizedTerm], name: &str| terms.iter().find(|t| t.name == name).expect("computed").value;
    let sum = value(&terms, "I(X;Y1,Y2)").min(value(&terms, "H(X|Y1,Y2)"));
    let (r1, r2) = match converse {
        Converse::NonColluding => {
            terms.push(term("H(X|Y1)", &|j| j.h_x_given((true, false))));
            terms.push(term("H(X|Y2)", &|j| j.h_x_given((false, true))));
            (
                value(&terms, "I(X;Y1)").min(value(&terms, "H(X|Y1)")),
                value(&terms, "I(X;Y2)").min(value(&terms, "H(X|Y2)")),
            )
        }
        Converse::Colluding => {
            terms.push(term("I(X;Y1|Y2)", &|j| j.i_x_cond(true)));
            terms.push(term("I(X;Y2|Y1)", &|j| j.i_x_cond(false)));
            let h = value(&terms, "H(X|Y1,Y2)");
            (
                value(&terms, "I(X;Y1)").min(value(&terms, "I(X;Y1|Y2)")).min(h),
                value(&terms, "I(X;Y2)").min(value(&terms, "I(X;Y2|Y1)")).min(h),
            )
        }
    };
    let label = match converse {
        Converse::NonColluding => "general-noncolluding",
        Converse::Colluding => "general-colluding",
    };
    // Rounding can leave -1e-17 on a zero term.
    let (r1, r2, sum) = (r1.max(0.0), r2.max(0.0), sum.max(0.0));
    Ok(GeneralBounds { converse, resolution, terms, r1, r2, sum, region: RateRegion::boxed(label, r1, r2, Some(sum)) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointToPoint {
    /// `min{max I(X;Y), max H(X|Y)}`.
    pub upper: f64,
    /// Erasure-form lower bound with `U = X` uniform.
    pub lower: f64,
    pub erasure_probability: f64,
}

/// Single-receiver bounds for a channel `w[x][y]`. The lower bound needs
/// erasure form: every output either is produced by both inputs with the
/// same probability or by one input only.
pub fn pt2pt_bounds(w: &[Vec<f64>; 2], resolution: usize) -> Result<PointToPoint, RateError> {
    let spec = ChannelSpec::Pmf { w: [vec![w[0].clone()], vec![w[1].clone()]] };
    let pmf = spec.pmf()?;
    let i = maximize_scalar(|q| JointLaw::new(&pmf, q).i_x((false, true)), resolution.max(101)).1;
    let h = maximize_scalar(|q| JointLaw::new(&pmf, q).h_x_given((false, true)), resolution.max(101)).1;
    let mut erasure = 0.0;
    for (a, b) in w[0].iter().zip(&w[1]) {
        if *a > 0.0 && *b > 0.0 {
            if (a - b).abs() > 1e-12 {
                return Err(RateError::NotErasureForm);
            }
            erasure += a;
        }
    }
    Ok(PointToPoint { upper: i.min(h).max(0.0), lower: erasure.min(1.0 - erasure), erasure_probability: erasure })
}

/// Both bounds for BEC(`p`); they coincide at `min{p, 1-p}`.
pub fn pt2pt_bec(p: f64) -> Result<PointToPoint, RateError> {
    check_p(&p)?;
    pt2pt_bounds(&[vec![1.0 - p, 0.0, p], vec![0.0, 1.0 - p, p]], 1001)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn r(a: i64, b: i64) -> Rational {
        Rational::new(a.into(), b.into())
    }

    fn close(a: &[[f64; 2]], b: &[[f64; 2]]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(u, v)| (u[0] - v[0]).abs() < 1e-9 && (u[1] - v[1]).abs() < 1e-9)
    }

    #[test]
    fn box_vertices_are_counterclockwise() {
        let reg = RateRegion::boxed("box", 0.3, 0.2, None);
        assert!(close(&reg.vertices().unwrap(), &[[0.0, 0.0], [0.3, 0.0], [0.3, 0.2], [0.0, 0.2]]));
    }

    #[test]
    fn exact_vertices() {
        let reg = region_noncolluding_outer(r(1, 2), r(1, 2)).unwrap();
        assert_eq!(reg.vertices().unwrap(), vec![[r(0, 1), r(0, 1)], [r(1, 4), r(0, 1)], [r(0, 1), r(1, 4)]]);
    }

    #[test]
    fn degenerate_regions() {
        let reg = region_noncolluding_outer(0.0, 0.4).unwrap();
        // Sum bound min{0, 1} = 0 collapses the region to the origin.
        assert!(close(&reg.vertices().unwrap(), &[[0.0, 0.0]]));
        let seg = RateRegion::boxed("seg", 0.0, 0.5, None);
        assert!(close(&seg.vertices().unwrap(), &[[0.0, 0.0], [0.0, 0.5]]));
        let open = RateRegion::new("open", vec![Constraint { a1: 1.0, a2: 0.0, b: 1.0 }]).unwrap();
        assert!(matches!(open.vertices(), Err(RateError::Unbounded(_))));
    }

    #[test]
    fn pentagon_from_binding_sum() {
        let reg = RateRegion::boxed("p", 0.4, 0.3, Some(0.5));
        assert!(close(&reg.vertices().unwrap(), &[[0.0, 0.0], [0.4, 0.0], [0.4, 0.1], [0.2, 0.3], [0.0, 0.3]]));
    }

    #[test]
    fn vertices_satisfy_constraints_on_random_regions() {
        use rand::Rng;
        let mut rng = crate::randomness::trial_rng(4, 4);
        for _ in 0..500 {
            let reg = RateRegion::boxed("r", rng.gen::<f64>(), rng.gen::<f64>(), Some(rng.gen::<f64>()));
            for v in reg.vertices().unwrap() {
                assert!(reg.contains_point(&v));
            }
        }
    }

    #[test]
    fn inner_inside_outer_on_grid() {
        for i in 0..10 {
            for j in 0..10 {
                let (p1, p2) = (i as f64 / 9.0, j as f64 / 9.0);
                let c = check_containment(&region_colluding_inner(p1, p2).unwrap(), &region_colluding_outer(p1, p2).unwrap())
                    .unwrap();
                assert!(c.contained, "{p1} {p2} {:?}", c.violations);
            }
        }
    }

    #[test]
    fn capacity_conflict_is_flagged() {
        let report = containment_report(0.3, 0.3).unwrap();
        assert!(!report[0].contained);
        assert!(report[1].contained);
    }

    #[test]
    fn timesharing_boundary() {
        let ts = region_timesharing(0.5, 0.5).unwrap();
        assert!(close(&ts.first_one.vertices().unwrap(), &[[0.0, 0.0], [0.25, 0.0]]));
        let ts = region_timesharing(r(7, 10), r(7, 10)).unwrap();
        assert_eq!(ts.hull_sum, r(33, 100));
    }

    #[test]
    fn general_bounds_match_erasure_closed_forms() {
        let w = ChannelSpec::Bec { p1: 0.3, p2: 0.5 };
        let g = general_upper_bounds(&w, 101, Converse::NonColluding).unwrap();
        assert!((g.r1 - 0.3).abs() < 1e-6 && (g.r2 - 0.5).abs() < 1e-6 && (g.sum - 0.15).abs() < 1e-6);
        let g = general_upper_bounds(&w, 101, Converse::Colluding).unwrap();
        let term = |n: &str| g.terms.iter().find(|t| t.name == n).unwrap().value;
        assert!((term("I(X;Y1|Y2)") - 0.35).abs() < 1e-6);
        assert!((g.r1 - 0.15).abs() < 1e-6 && (g.r2 - 0.15).abs() < 1e-6);
        let clean = ChannelSpec::Bec { p1: 0.0, p2: 0.0 };
        assert!(general_upper_bounds(&clean, 101, Converse::NonColluding).unwrap().r1 < 1e-9);
        assert!(general_upper_bounds(&w, 50, Converse::Colluding).is_err());
    }

    #[test]
    fn conditional_term_against_direct_evaluation() {
        // I(X;Y1|Y2) at q = 1/2 from the explicit joint pmf.
        let pmf = ChannelSpec::Bec { p1: 0.3, p2: 0.5 }.pmf().unwrap();
        let j = JointLaw::new(&pmf, 0.5);
        let mut direct = 0.0;
        let p = |x: usize, y1: usize, y2: usize| 0.5 * pmf[x][y1][y2];
        for y2 in 0..3 {
            let py2: f64 = (0..2).flat_map(|x| (0..3).map(move |y1| (x, y1))).map(|(x, y1)| p(x, y1, y2)).sum();
            for x in 0..2 {
                for y1 in 0..3 {
                    let pxy = p(x, y1, y2);
                    if pxy == 0.0 {
                        continue;
                    }
                    let px2: f64 = (0..3).map(|u| p(x, u, y2)).sum();
                    let p12: f64 = (0..2).map(|u| p(u, y1, y2)).sum();
                    direct += pxy * (pxy * py2 / (px2 * p12)).log2();
                }
            }
        }
        assert!((j.i_x_cond(true) - direct).abs() < 1e-12);
    }

    #[test]
    fn grid_refinement_is_monotone() {
        let f = |q: f64| crate::entropy::binary_entropy(q) * 0.7;
        let a = maximize_scalar(f, 101).1;
        let b = maximize_scalar(f, 201).1;
        assert!(b >= a - 1e-12 && (b - 0.7).abs() < 1e-9);
    }

    #[test]
    fn point_to_point() {
        for (p, v) in [(0.5, 0.5), (0.0, 0.0), (0.25, 0.25)] {
            let b = pt2pt_bec(p).unwrap();
            assert!((b.upper - v).abs() < 1e-6 && (b.lower - v).abs() < 1e-12, "{p} {b:?}");
        }
        let bsc = [vec![0.9, 0.1], vec![0.1, 0.9]];
        assert_eq!(pt2pt_bounds(&bsc, 101), Err(RateError::NotErasureForm));
    }

    #[test]
    fn information_terms() {
        assert_eq!(bec_information_terms(0.0).unwrap(), (1.0, 0.0));
        assert_eq!(bec_information_terms(1.0).unwrap(), (0.0, 1.0));
        let (i, h) = bec_information_terms(r(3, 10)).unwrap();
        assert_eq!((i, h.clone()), (r(7, 10), r(3, 10)));
        assert_eq!(mask_rate(&r(3, 10)), h);
    }
}
