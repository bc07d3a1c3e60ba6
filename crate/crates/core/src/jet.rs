//! Jet spaces `E^k`, the Taylor curve through a jet, and functions on jets.
//!
//! A point of `E^k` holds `(x, y_1, ..., y_k)`. The curve through it is
//! `a(t) = Σ_j y_{j+1} t^j/j!` with `x(t)` solving `ẋ = ρ(x) a(t)`; every
//! jet function is evaluated as a Taylor series along that curve, so the
//! total derivative `d_T` is differentiation of the series.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::algebroid::{LieAlgebroid, XEnv};
use crate::error::{Error, Result};
use crate::expr::{Env, Expr, Var, VarKind};
use crate::num::{Perturbed, Scalar, Taylor};

/// A coordinate of `E^k`. `alpha` and `X(i)` are 0-based, `r >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coord {
    X(usize),
    Y { alpha: usize, r: usize },
}

impl Coord {
    pub fn order(self) -> usize {
        match self {
            Coord::X(_) => 0,
            Coord::Y { r, .. } => r,
        }
    }

    pub fn var(self) -> Var {
        match self {
            Coord::X(i) => Var::x(i),
            Coord::Y { alpha, r } => Var::y(alpha, r),
        }
    }

    pub fn from_var(v: &Var) -> Option<Coord> {
        match v.kind {
            VarKind::X(i) => Some(Coord::X(i)),
            VarKind::Y { alpha, r } => Some(Coord::Y { alpha, r }),
            _ => None,
        }
    }

    /// Every coordinate of `E^k`, base first then block by block.
    pub fn all(n: usize, m: usize, k: usize) -> Vec<Coord> {
        let mut v: Vec<Coord> = (0..n).map(Coord::X).collect();
        for r in 1..=k {
            v.extend((0..m).map(|alpha| Coord::Y { alpha, r }));
        }
        v
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.var().name)
    }
}

/// Point of `E^k`, stored as `x` followed by the blocks `y_1..y_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct JetPoint {
    n: usize,
    m: usize,
    k: usize,
    coords: Vec<f64>,
}

impl JetPoint {
    pub fn dim(n: usize, m: usize, k: usize) -> usize {
        n + k * m
    }

    pub fn new(n: usize, m: usize, k: usize, coords: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidOrder(0));
        }
        if coords.len() != Self::dim(n, m, k) {
            return Err(Error::Dimension(format!("a point of E^{k} with n={n}, m={m} has {} coordinates, got {}", Self::dim(n, m, k), coords.len())));
        }
        Ok(JetPoint { n, m, k, coords })
    }

    /// `y[r-1]` is the block `y_r`.
    pub fn from_blocks(x: &[f64], y: &[Vec<f64>]) -> Result<Self> {
        let m = y.first().map_or(0, Vec::len);
        if y.iter().any(|b| b.len() != m) {
            return Err(Error::Dimension("jet blocks differ in length".into()));
        }
        let mut coords = x.to_vec();
        y.iter().for_each(|b| coords.extend_from_slice(b));
        JetPoint::new(x.len(), m, y.len(), coords)
    }

    pub fn random(rng: &mut impl Rng, n: usize, m: usize, k: usize, lo: f64, hi: f64) -> Self {
        let coords = (0..Self::dim(n, m, k)).map(|_| rng.gen_range(lo..=hi)).collect();
        JetPoint { n, m, k: k.max(1), coords }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn x(&self) -> &[f64] {
        &self.coords[..self.n]
    }

    /// Block `y_r`, `1 <= r <= k`.
    pub fn y(&self, r: usize) -> &[f64] {
        assert!(r >= 1 && r <= self.k, "block {r} outside 1..={}", self.k);
        let s = self.n + (r - 1) * self.m;
        &self.coords[s..s + self.m]
    }

    pub fn y_mut(&mut self, r: usize) -> &mut [f64] {
        assert!(r >= 1 && r <= self.k);
        let s = self.n + (r - 1) * self.m;
        &mut self.coords[s..s + self.m]
    }

    pub fn index(&self, c: Coord) -> Option<usize> {
        match c {
            Coord::X(i) if i < self.n => Some(i),
            Coord::Y { alpha, r } if alpha < self.m && r >= 1 && r <= self.k => Some(self.n + (r - 1) * self.m + alpha),
            _ => None,
        }
    }

    pub fn get(&self, c: Coord) -> Option<f64> {
        self.index(c).map(|i| self.coords[i])
    }

    /// Projection `E^k → E^l`.
    pub fn truncate(&self, l: usize) -> Result<JetPoint> {
        if l == 0 || l > self.k {
            return Err(Error::InsufficientOrder { need: l, have: self.k });
        }
        JetPoint::new(self.n, self.m, l, self.coords[..Self::dim(self.n, self.m, l)].to_vec())
    }

    /// Appends one block.
    pub fn extend(&self, block: &[f64]) -> Result<JetPoint> {
        if block.len() != self.m {
            return Err(Error::Dimension(format!("block has {} entries, expected {}", block.len(), self.m)));
        }
        let mut coords = self.coords.clone();
        coords.extend_from_slice(block);
        JetPoint::new(self.n, self.m, self.k + 1, coords)
    }
}

/// `x(t)` of the curve through `p`, to degree `r <= k`.
pub fn prolong_x(alg: &LieAlgebroid, p: &JetPoint, r: usize) -> Result<Vec<Taylor>> {
    if r > p.order() {
        return Err(Error::InsufficientOrder { need: r, have: p.order() });
    }
    let curve = Curve::through(alg, p)?;
    Ok(curve.x.iter().map(|s| s.truncate(r)).collect())
}

/// Solves `ẋ = ρ(x) a(t)` for the Taylor coefficients of `x`, given `a` of
/// degree `d - 1`; the result has degree `d`.
pub(crate) fn integrate_base(alg: &LieAlgebroid, x0: &[f64], a: &[Taylor]) -> Result<Vec<Taylor>> {
    let n = alg.n();
    let d = a.first().map_or(0, |s| s.degree() + 1);
    let mut coeffs: Vec<Vec<f64>> = x0.iter().map(|&v| vec![v]).collect();
    for j in 0..d {
        let xs: Vec<Taylor> = coeffs.iter().map(|c| Taylor::new(c.clone())).collect();
        let rho = alg.rho_at(&xs, &(j, ()))?;
        for i in 0..n {
            let mut f = 0.0;
            for (alpha, aa) in a.iter().enumerate() {
                let prod = rho[i][alpha].try_mul(&aa.truncate(j))?;
                f += prod.coeff(j);
            }
            coeffs[i].push(f / (j + 1) as f64);
        }
    }
    Ok(coeffs.into_iter().map(Taylor::new).collect())
}

/// The jet curve through a point of order `N`: `x(t)` to degree `N`, block
/// `y_r(t)` to degree `N - r`.
#[derive(Debug, Clone)]
pub struct Curve {
    order: usize,
    x: Vec<Taylor>,
    y: Vec<Vec<Taylor>>,
}

impl Curve {
    pub fn through(alg: &LieAlgebroid, p: &JetPoint) -> Result<Curve> {
        if p.n() != alg.n() || p.m() != alg.m() {
            return Err(Error::Dimension(format!(
                "point of E^k over (n={}, m={}) used with algebroid {} (n={}, m={})",
                p.n(),
                p.m(),
                alg.name(),
                alg.n(),
                alg.m()
            )));
        }
        let big_n = p.order();
        let y: Vec<Vec<Taylor>> = (1..=big_n)
            .map(|r| {
                (0..p.m())
                    .map(|alpha| {
                        let c = (r..=big_n).map(|s| p.y(s)[alpha] / crate::num::factorial(s - r)).collect();
                        Taylor::new(c)
                    })
                    .collect()
            })
            .collect();
        let x = integrate_base(alg, p.x(), &y[0])?;
        Ok(Curve { order: big_n, x, y })
    }

    /// Assembles a curve from series; `y[r-1]` must have degree `order - r`
    /// and `x` degree `order`.
    pub fn from_parts(order: usize, x: Vec<Taylor>, y: Vec<Vec<Taylor>>) -> Result<Curve> {
        let ok = y.len() == order && x.iter().all(|s| s.degree() == order) && y.iter().enumerate().all(|(j, b)| b.iter().all(|s| s.degree() == order - j - 1));
        if !ok {
            return Err(Error::Dimension("curve series have inconsistent degrees".into()));
        }
        Ok(Curve { order, x, y })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn x(&self) -> &[Taylor] {
        &self.x
    }

    /// Block `y_r(t)`.
    pub fn y(&self, r: usize) -> &[Taylor] {
        &self.y[r - 1]
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn m(&self) -> usize {
        self.y.first().map_or(0, Vec::len)
    }

    fn coord(&self, c: Coord, degree: usize) -> Result<Taylor> {
        let s = match c {
            Coord::X(i) => self.x.get(i),
            Coord::Y { alpha, r } if r >= 1 && r <= self.order => self.y[r - 1].get(alpha),
            Coord::Y { r, .. } => return Err(Error::InsufficientOrder { need: r, have: self.order }),
        };
        let s = s.ok_or_else(|| Error::Dimension(format!("coordinate {c} is out of range")))?;
        Ok(s.truncate(degree))
    }
}

/// Where a jet function came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Provenance {
    UserExpression,
    TotalDerivative,
    Partial,
    Composite,
}

#[derive(Clone)]
pub struct JetFunction(Arc<Node>);

struct Node {
    order: usize,
    kind: Kind,
}

enum Kind {
    Const(f64),
    Coord(Coord),
    /// `∂^{wrt} expr` with the expression's variables bound to `args`.
    Compose {
        expr: Arc<Expr>,
        wrt: Vec<usize>,
        args: Arc<[(Var, JetFunction)]>,
    },
    Sum(Vec<JetFunction>),
    Product(JetFunction, JetFunction),
    Scale(f64, JetFunction),
    Dt(JetFunction),
}

impl fmt::Debug for JetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.kind {
            Kind::Const(v) => write!(f, "{v}"),
            Kind::Coord(c) => write!(f, "{c}"),
            Kind::Compose { expr, wrt, args } => {
                write!(f, "[{expr}]")?;
                for w in wrt {
                    write!(f, "_{}", args[*w].0.name)?;
                }
                Ok(())
            }
            Kind::Sum(v) => f.debug_tuple("Sum").field(v).finish(),
            Kind::Product(a, b) => write!(f, "({a:?})*({b:?})"),
            Kind::Scale(c, a) => write!(f, "{c}*({a:?})"),
            Kind::Dt(a) => write!(f, "dT({a:?})"),
        }
    }
}

/// Memo table for one curve; keyed by node identity. Entries keep their
/// node alive so an address is never reused while cached.
#[derive(Default)]
pub struct EvalCache {
    map: HashMap<usize, (JetFunction, Taylor)>,
}

impl EvalCache {
    pub fn new() -> Self {
        EvalCache::default()
    }
}

/// Bindings of a composed expression.
struct ArgEnv<'a, T: Scalar> {
    shape: T::Shape,
    names: &'a [(Var, JetFunction)],
    vals: Vec<T>,
}

impl<T: Scalar> Env<T> for ArgEnv<'_, T> {
    fn shape(&self) -> T::Shape {
        self.shape.clone()
    }

    fn lookup(&self, var: &Var) -> Option<T> {
        self.names.iter().position(|(v, _)| v.name == var.name).map(|i| self.vals[i].clone())
    }
}

fn seed<S: Scalar>(vals: Vec<S>, w: usize) -> Vec<Perturbed<S>> {
    vals.into_iter().enumerate().map(|(j, v)| if j == w { Perturbed::seed(v) } else { Perturbed::lift(v) }).collect()
}

impl JetFunction {
    fn node(order: usize, kind: Kind) -> JetFunction {
        JetFunction(Arc::new(Node { order, kind }))
    }

    pub fn constant(c: f64) -> JetFunction {
        JetFunction::node(0, Kind::Const(c))
    }

    pub fn zero() -> JetFunction {
        JetFunction::constant(0.0)
    }

    pub fn coord(c: Coord) -> JetFunction {
        JetFunction::node(c.order(), Kind::Coord(c))
    }

    /// Binds `x<i>` and `y<A>_<r>` to jet coordinates. Closed expressions
    /// fold to constants.
    pub fn from_expr(expr: &Expr) -> Result<JetFunction> {
        if let Some(v) = expr.constant_value() {
            return Ok(JetFunction::constant(v));
        }
        let mut args = Vec::new();
        for v in expr.vars() {
            let c = Coord::from_var(&v).ok_or_else(|| Error::Eval(crate::expr::EvalError::Unbound(v.name.clone())))?;
            args.push((v, JetFunction::coord(c)));
        }
        Ok(JetFunction::compose(Arc::new(expr.clone()), args))
    }

    pub fn parse(src: &str) -> Result<JetFunction> {
        JetFunction::from_expr(&src.parse()?)
    }

    /// `expr` with each named variable replaced by a jet function.
    pub fn compose(expr: Arc<Expr>, args: Vec<(Var, JetFunction)>) -> JetFunction {
        let order = args.iter().map(|(_, f)| f.order()).max().unwrap_or(0);
        JetFunction::node(order, Kind::Compose { expr, wrt: Vec::new(), args: args.into() })
    }

    /// Smallest `k` such that the function lives on `E^k`.
    pub fn order(&self) -> usize {
        self.0.order
    }

    pub fn provenance(&self) -> Provenance {
        match &self.0.kind {
            Kind::Compose { wrt, .. } if wrt.is_empty() => Provenance::UserExpression,
            Kind::Compose { .. } => Provenance::Partial,
            Kind::Dt(_) => Provenance::TotalDerivative,
            _ => Provenance::Composite,
        }
    }

    pub fn const_value(&self) -> Option<f64> {
        match self.0.kind {
            Kind::Const(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.const_value() == Some(0.0)
    }

    pub fn ptr_eq(&self, other: &JetFunction) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn add(&self, o: &JetFunction) -> JetFunction {
        JetFunction::sum([self.clone(), o.clone()])
    }

    pub fn sub(&self, o: &JetFunction) -> JetFunction {
        JetFunction::sum([self.clone(), o.neg()])
    }

    pub fn neg(&self) -> JetFunction {
        self.scale(-1.0)
    }

    pub fn scale(&self, c: f64) -> JetFunction {
        if c == 0.0 {
            return JetFunction::zero();
        }
        if c == 1.0 {
            return self.clone();
        }
        match &self.0.kind {
            Kind::Const(v) => JetFunction::constant(c * v),
            Kind::Scale(d, f) => f.scale(c * d),
            _ => JetFunction::node(self.order(), Kind::Scale(c, self.clone())),
        }
    }

    pub fn mul(&self, o: &JetFunction) -> JetFunction {
        match (self.const_value(), o.const_value()) {
            (Some(a), Some(b)) => JetFunction::constant(a * b),
            (Some(a), None) => o.scale(a),
            (None, Some(b)) => self.scale(b),
            (None, None) => JetFunction::node(self.order().max(o.order()), Kind::Product(self.clone(), o.clone())),
        }
    }

    pub fn sum(items: impl IntoIterator<Item = JetFunction>) -> JetFunction {
        let mut c = 0.0;
        let mut terms = Vec::new();
        for f in items {
            match &f.0.kind {
                Kind::Const(v) => c += v,
                Kind::Sum(inner) => terms.extend(inner.iter().cloned()),
                _ => terms.push(f),
            }
        }
        if c != 0.0 {
            terms.push(JetFunction::constant(c));
        }
        match terms.len() {
            0 => JetFunction::zero(),
            1 => terms.pop().unwrap(),
            _ => {
                let order = terms.iter().map(JetFunction::order).max().unwrap_or(0);
                JetFunction::node(order, Kind::Sum(terms))
            }
        }
    }

    /// Total time derivative `d_T`; the order rises by one.
    pub fn dt(&self) -> JetFunction {
        match &self.0.kind {
            Kind::Const(_) => JetFunction::zero(),
            Kind::Coord(Coord::Y { alpha, r }) => JetFunction::coord(Coord::Y { alpha: *alpha, r: r + 1 }),
            Kind::Scale(c, f) => f.dt().scale(*c),
            _ => JetFunction::node(self.order() + 1, Kind::Dt(self.clone())),
        }
    }

    pub fn dt_pow(&self, r: usize) -> JetFunction {
        (0..r).fold(self.clone(), |f, _| f.dt())
    }

    /// `∂/∂u`. Partials of expressions are evaluated by seeding; partials of
    /// total derivatives use
    /// `∂_{y^β_s} d_T F = d_T ∂_{y^β_s} F + ∂_{y^β_{s-1}} F` (with
    /// `ρ^i_β ∂_{x^i} F` in place of the last term when `s = 1`) and
    /// `∂_{x^l} d_T F = d_T ∂_{x^l} F + ∂_l ρ^i_α y^α_1 ∂_{x^i} F`.
    pub fn partial(&self, alg: &LieAlgebroid, u: Coord) -> JetFunction {
        match &self.0.kind {
            Kind::Const(_) => JetFunction::zero(),
            Kind::Coord(c) => JetFunction::constant(if *c == u { 1.0 } else { 0.0 }),
            Kind::Compose { expr, wrt, args } => JetFunction::sum(args.iter().enumerate().filter_map(|(j, (_, a))| {
                let da = a.partial(alg, u);
                if da.is_zero() {
                    return None;
                }
                let mut w = wrt.clone();
                w.push(j);
                let order = args.iter().map(|(_, f)| f.order()).max().unwrap_or(0);
                let d = JetFunction::node(order, Kind::Compose { expr: expr.clone(), wrt: w, args: args.clone() });
                Some(d.mul(&da))
            })),
            Kind::Sum(v) => JetFunction::sum(v.iter().map(|f| f.partial(alg, u))),
            Kind::Product(a, b) => a.partial(alg, u).mul(b).add(&a.mul(&b.partial(alg, u))),
            Kind::Scale(c, f) => f.partial(alg, u).scale(*c),
            Kind::Dt(f) => {
                if u.order() > f.order() + 1 {
                    return JetFunction::zero();
                }
                let main = f.partial(alg, u).dt();
                let extra = match u {
                    Coord::Y { alpha, r: 1 } => JetFunction::sum((0..alg.n()).map(|i| alg.rho_fn(i, alpha).mul(&f.partial(alg, Coord::X(i))))),
                    Coord::Y { alpha, r } => f.partial(alg, Coord::Y { alpha, r: r - 1 }),
                    Coord::X(l) => JetFunction::sum((0..alg.n()).flat_map(|i| {
                        let dfi = f.partial(alg, Coord::X(i));
                        (0..alg.m())
                            .map(|a| alg.rho_fn(i, a).partial(alg, Coord::X(l)).mul(&JetFunction::coord(Coord::Y { alpha: a, r: 1 })).mul(&dfi))
                            .collect::<Vec<_>>()
                    })),
                };
                main.add(&extra)
            }
        }
    }

    /// `F ∘ Ψ` where `Ψ` replaces each coordinate leaf. `d_T` nodes are kept,
    /// which is valid when `Ψ` is the prolongation of an admissible map.
    pub fn pullback(&self, map: &impl Fn(Coord) -> JetFunction) -> JetFunction {
        self.pullback_memo(map, &mut HashMap::new())
    }

    fn pullback_memo(&self, map: &impl Fn(Coord) -> JetFunction, memo: &mut HashMap<usize, JetFunction>) -> JetFunction {
        let key = Arc::as_ptr(&self.0) as usize;
        if let Some(f) = memo.get(&key) {
            return f.clone();
        }
        let out = match &self.0.kind {
            Kind::Const(_) => self.clone(),
            Kind::Coord(c) => map(*c),
            Kind::Compose { expr, wrt, args } => {
                let args: Vec<(Var, JetFunction)> = args.iter().map(|(v, f)| (v.clone(), f.pullback_memo(map, memo))).collect();
                let order = args.iter().map(|(_, f)| f.order()).max().unwrap_or(0);
                JetFunction::node(order, Kind::Compose { expr: expr.clone(), wrt: wrt.clone(), args: args.into() })
            }
            Kind::Sum(v) => JetFunction::sum(v.iter().map(|f| f.pullback_memo(map, memo)).collect::<Vec<_>>()),
            Kind::Product(a, b) => a.pullback_memo(map, memo).mul(&b.pullback_memo(map, memo)),
            Kind::Scale(c, f) => f.pullback_memo(map, memo).scale(*c),
            Kind::Dt(f) => f.pullback_memo(map, memo).dt(),
        };
        memo.insert(key, out.clone());
        out
    }

    /// Series of the function along `curve`, of degree `curve.order() - self.order()`.
    pub fn series(&self, curve: &Curve, cache: &mut EvalCache) -> Result<Taylor> {
        let big_n = curve.order();
        if self.order() > big_n {
            return Err(Error::InsufficientOrder { need: self.order(), have: big_n });
        }
        let key = Arc::as_ptr(&self.0) as usize;
        if let Some((_, s)) = cache.map.get(&key) {
            return Ok(s.clone());
        }
        let d = big_n - self.order();
        let s = match &self.0.kind {
            Kind::Const(v) => Taylor::constant(&(d, ()), *v),
            Kind::Coord(c) => curve.coord(*c, d)?,
            Kind::Compose { expr, wrt, args } => {
                let vals = args.iter().map(|(_, f)| Ok(f.series(curve, cache)?.truncate(d))).collect::<Result<Vec<_>>>()?;
                eval_compose(expr, wrt, args, vals, d)?
            }
            Kind::Sum(v) => {
                let mut acc = Taylor::constant(&(d, ()), 0.0);
                for f in v {
                    acc = acc.try_add(&f.series(curve, cache)?.truncate(d))?;
                }
                acc
            }
            Kind::Product(a, b) => a.series(curve, cache)?.truncate(d).try_mul(&b.series(curve, cache)?.truncate(d))?,
            Kind::Scale(c, f) => f.series(curve, cache)?.truncate(d).scale(*c),
            Kind::Dt(f) => f.series(curve, cache)?.derivative(),
        };
        cache.map.insert(key, (self.clone(), s.clone()));
        Ok(s)
    }

    /// Value at a point of order at least `self.order()`.
    pub fn eval(&self, alg: &LieAlgebroid, p: &JetPoint) -> Result<f64> {
        let curve = Curve::through(alg, p)?;
        Ok(*self.series(&curve, &mut EvalCache::new())?.value())
    }
}

fn eval_compose(expr: &Expr, wrt: &[usize], names: &[(Var, JetFunction)], vals: Vec<Taylor>, d: usize) -> Result<Taylor> {
    let shape = (d, ());
    Ok(match wrt {
        [] => expr.eval(&ArgEnv { shape, names, vals })?,
        [a] => expr.eval(&ArgEnv { shape, names, vals: seed(vals, *a) })?.delta,
        [a, b] => expr.eval(&ArgEnv { shape, names, vals: seed(seed(vals, *b), *a) })?.delta.delta,
        [a, b, c] => expr.eval(&ArgEnv { shape, names, vals: seed(seed(seed(vals, *c), *b), *a) })?.delta.delta.delta,
        _ => return Err(Error::Unsupported("partial derivatives of order above 3".into())),
    })
}

/// Evaluates several functions at one point, sharing the curve and memo.
pub struct PointEvaluator<'a> {
    curve: Curve,
    cache: EvalCache,
    _alg: &'a LieAlgebroid,
}

impl<'a> PointEvaluator<'a> {
    pub fn new(alg: &'a LieAlgebroid, p: &JetPoint) -> Result<Self> {
        Ok(PointEvaluator { curve: Curve::through(alg, p)?, cache: EvalCache::new(), _alg: alg })
    }

    pub fn from_curve(alg: &'a LieAlgebroid, curve: Curve) -> Self {
        PointEvaluator { curve, cache: EvalCache::new(), _alg: alg }
    }

    pub fn eval(&mut self, f: &JetFunction) -> Result<f64> {
        Ok(*f.series(&self.curve, &mut self.cache)?.value())
    }

    pub fn series(&mut self, f: &JetFunction) -> Result<Taylor> {
        f.series(&self.curve, &mut self.cache)
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }
}

/// `d_T^r F`.
pub fn total_derivative(f: &JetFunction, r: usize) -> JetFunction {
    f.dt_pow(r)
}

/// Evaluates an expression on `x` only, over any scalar kind.
pub fn eval_on_base<S: Scalar>(expr: &Expr, x: &[S], shape: &S::Shape) -> Result<S> {
    Ok(expr.eval(&XEnv { shape: shape.clone(), x })?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebroid::{heisenberg_group, so3, tangent};
    use approx::assert_relative_eq;

    #[test]
    fn prolongation_on_the_line() {
        let alg = tangent(1).unwrap();
        let p = JetPoint::from_blocks(&[0.0], &[vec![1.0], vec![2.0]]).unwrap();
        let x = prolong_x(&alg, &p, 2).unwrap();
        assert_eq!(x[0].coeffs(), &[0.0, 1.0, 1.0]);
    }

    #[test]
    fn total_derivative_of_kinetic_energy() {
        let alg = tangent(1).unwrap();
        let l = JetFunction::parse("y1_1^2/2").unwrap();
        let p = JetPoint::from_blocks(&[0.0], &[vec![3.0], vec![5.0]]).unwrap();
        assert_eq!(l.dt().eval(&alg, &p).unwrap(), 15.0);
    }

    #[test]
    fn total_derivative_on_heisenberg_uses_the_anchor() {
        // d_T x3 = x1 y2_1 + y3_1
        let alg = heisenberg_group().unwrap();
        let f = JetFunction::parse("x3").unwrap();
        let p = JetPoint::from_blocks(&[2.0, 0.0, 0.0], &[vec![0.0, 1.0, 0.5]]).unwrap();
        assert_relative_eq!(f.dt().eval(&alg, &p).unwrap(), 2.5);
    }

    #[test]
    fn insufficient_order_is_reported() {
        let alg = tangent(1).unwrap();
        let l = JetFunction::parse("y1_1^2/2").unwrap();
        let p = JetPoint::from_blocks(&[0.0], &[vec![3.0]]).unwrap();
        assert!(matches!(l.dt().eval(&alg, &p), Err(Error::InsufficientOrder { need: 2, have: 1 })));
    }

    #[test]
    fn order_zero_is_rejected() {
        assert!(matches!(JetPoint::new(1, 1, 0, vec![0.0]), Err(Error::InvalidOrder(0))));
    }

    #[test]
    fn dt_of_fiber_coordinate_is_the_next_coordinate() {
        let f = JetFunction::coord(Coord::Y { alpha: 1, r: 2 }).dt();
        assert_eq!(f.order(), 3);
        assert!(matches!(f.0.kind, Kind::Coord(Coord::Y { alpha: 1, r: 3 })));
    }

    #[test]
    fn partial_of_a_total_derivative_matches_seeding_the_point() {
        let alg = heisenberg_group().unwrap();
        let f = JetFunction::parse("sin(x1) * y2_1 + x3 * y1_2^2").unwrap().dt();
        let p = JetPoint::from_blocks(&[0.3, -0.2, 0.7], &[vec![0.1, 0.4, -0.5], vec![0.2, -0.3, 0.6], vec![0.9, 0.1, -0.4]]).unwrap();
        for u in Coord::all(3, 3, 3) {
            let sym = f.partial(&alg, u).eval(&alg, &p).unwrap();
            let h = 1e-6;
            let mut pp = p.clone();
            let i = p.index(u).unwrap();
            pp.coords[i] += h;
            let mut pm = p.clone();
            pm.coords[i] -= h;
            let fd = (f.eval(&alg, &pp).unwrap() - f.eval(&alg, &pm).unwrap()) / (2.0 * h);
            assert_relative_eq!(sym, fd, epsilon = 1e-8);
        }
    }

    #[test]
    fn zero_folding() {
        let z = JetFunction::zero();
        let x = JetFunction::parse("x1").unwrap();
        assert!(z.mul(&x).is_zero());
        assert!(x.scale(0.0).is_zero());
        assert!(JetFunction::sum([z.clone(), z]).is_zero());
        assert!(JetFunction::constant(2.0).dt().is_zero());
    }

    #[test]
    fn lie_algebra_curve_has_no_base() {
        let alg = so3().unwrap();
        let p = JetPoint::from_blocks(&[], &[vec![1.0, 2.0, 3.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let f = JetFunction::parse("y1_1 * y2_1").unwrap();
        assert_relative_eq!(f.dt().eval(&alg, &p).unwrap(), 1.0);
    }
}
