//! Linear-Gaussian systems: every transmission is an affine map of the
//! message and node noise, so the joint law is a mean plus a covariance.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{InfoMeasure, VarId};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::graph::{EdgeRef, NodeRef};
use crate::system::{Law, Regime, SystemSpec};
use crate::value::Value;

/// Relative eigenvalue cutoff for the pseudo-inverse.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct GaussianJoint {
    vars: Vec<VarId>,
    index: HashMap<VarId, usize>,
    base: Vec<String>,
    base_variance: Vec<f64>,
    coef: DMatrix<f64>,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

#[derive(Clone, Debug)]
struct Affine {
    coef: Vec<f64>,
    offset: f64,
}

impl Affine {
    fn constant(n: usize, k: f64) -> Self {
        Affine { coef: vec![0.0; n], offset: k }
    }

    fn unit(n: usize, i: usize) -> Self {
        let mut a = Affine::constant(n, 0.0);
        a.coef[i] = 1.0;
        a
    }

    fn is_constant(&self) -> bool {
        self.coef.iter().all(|c| *c == 0.0)
    }

    fn scale(mut self, k: f64) -> Self {
        self.coef.iter_mut().for_each(|c| *c *= k);
        self.offset *= k;
        self
    }

    fn plus(mut self, o: &Affine, sign: f64) -> Self {
        self.coef.iter_mut().zip(&o.coef).for_each(|(a, b)| *a += sign * b);
        self.offset += sign * o.offset;
        self
    }
}

fn real_constant(v: &Value) -> Result<f64> {
    let g = v.num()?;
    if !g.is_real() {
        return Err(Error::invalid("complex constants are not supported in Gaussian systems"));
    }
    Ok(*g.re.numer() as f64 / *g.re.denom() as f64)
}

struct Propagator<'a> {
    n: usize,
    edges: &'a HashMap<EdgeRef, Affine>,
    noise: Option<usize>,
}

impl Propagator<'_> {
    fn eval(&self, e: &Expr) -> Result<Affine> {
        let n = self.n;
        let non_affine = |op: &str| Error::invalid(format!("{op} is not affine; Gaussian systems need affine functions"));
        Ok(match e {
            Expr::Edge(r) => self.edges.get(r).cloned().unwrap_or_else(|| Affine::constant(n, 0.0)),
            Expr::Noise => self.noise.map_or_else(|| Affine::constant(n, 0.0), |i| Affine::unit(n, i)),
            Expr::Message => Affine::unit(n, 0),
            Expr::Const(v) => Affine::constant(n, real_constant(v)?),
            Expr::Add(items) => {
                let mut acc = Affine::constant(n, 0.0);
                for x in items {
                    acc = acc.plus(&self.eval(x)?, 1.0);
                }
                acc
            }
            Expr::Sub(a, b) => self.eval(a)?.plus(&self.eval(b)?, -1.0),
            Expr::Neg(a) => self.eval(a)?.scale(-1.0),
            Expr::Mul(items) => {
                let mut acc = Affine::constant(n, 1.0);
                for x in items {
                    let f = self.eval(x)?;
                    acc = match (acc.is_constant(), f.is_constant()) {
                        (true, _) => f.scale(acc.offset),
                        (false, true) => acc.scale(f.offset),
                        (false, false) => return Err(non_affine("product of two random terms")),
                    };
                }
                acc
            }
            Expr::Xor(_) => return Err(non_affine("xor")),
            Expr::And(_) => return Err(non_affine("and")),
            Expr::Or(_) => return Err(non_affine("or")),
            Expr::Not(_) => return Err(non_affine("not")),
            Expr::Select(..) => return Err(non_affine("select")),
            Expr::Concat(_) => return Err(non_affine("concat")),
            Expr::Mod(..) => return Err(non_affine("mod")),
        })
    }
}

fn variance(l: &Law) -> f64 {
    match l {
        Law::Gaussian { variance } => *variance,
        Law::Pmf(_) => unreachable!("regime checked"),
    }
}

/// Coefficients of every transmission over (M, node noise), and the
/// resulting covariance `L Σ Lᵀ`.
pub fn linear_propagate(spec: &SystemSpec) -> Result<GaussianJoint> {
    spec.validate()?;
    if spec.regime()? != Regime::Gaussian {
        return Err(Error::invalid("linear propagation needs a Gaussian message and Gaussian noise"));
    }
    let noise_nodes: Vec<&NodeRef> = spec.noise.keys().collect();
    let mut base = vec!["M".to_string()];
    base.extend(noise_nodes.iter().map(|v| format!("W({v})")));
    let mut base_variance = vec![variance(&spec.message)];
    base_variance.extend(spec.noise.values().map(variance));
    let n = base.len();

    let mut edges_in_time = spec.graph.edges();
    edges_in_time.sort_by_key(|e| e.time());
    let mut forms: HashMap<EdgeRef, Affine> = HashMap::new();
    for e in &edges_in_time {
        let form = match spec.function(e) {
            None => Affine::constant(n, 0.0),
            Some(expr) => {
                let noise = noise_nodes.binary_search(&&e.src).ok().map(|i| i + 1);
                Propagator { n, edges: &forms, noise }
                    .eval(expr)
                    .map_err(|err| Error::invalid(format!("on {e}: {err}")))?
            }
        };
        forms.insert(e.clone(), form);
    }

    let mut vars = Vec::new();
    let mut rows = Vec::new();
    for (name, expr) in spec.message_views() {
        let form = Propagator { n, edges: &forms, noise: None }.eval(&expr)?;
        vars.push(VarId::Message(name));
        rows.push(form);
    }
    for e in spec.graph.edges() {
        rows.push(forms.remove(&e).expect("every edge propagated"));
        vars.push(VarId::Edge(e));
    }
    let coef = DMatrix::from_fn(rows.len(), n, |i, j| rows[i].coef[j]);
    let mean = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.offset));
    Ok(GaussianJoint::from_parts(vars, base, base_variance, coef, mean))
}

impl GaussianJoint {
    fn from_parts(
        vars: Vec<VarId>,
        base: Vec<String>,
        base_variance: Vec<f64>,
        coef: DMatrix<f64>,
        mean: DVector<f64>,
    ) -> Self {
        let k = vars.len();
        let mut cov = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let c: f64 = (0..base.len()).map(|b| coef[(i, b)] * base_variance[b] * coef[(j, b)]).sum();
                cov[(i, j)] = c;
                cov[(j, i)] = c;
            }
        }
        let index = vars.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        GaussianJoint { vars, index, base, base_variance, coef, mean, cov }
    }

    pub fn variables(&self) -> &[VarId] {
        &self.vars
    }

    /// Names of the independent base variables (message first).
    pub fn base_names(&self) -> &[String] {
        &self.base
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Coefficient row of one variable over the base variables.
    pub fn coefficients(&self, v: &VarId) -> Result<Vec<f64>> {
        let i = self.var(v)?;
        Ok(self.coef.row(i).iter().copied().collect())
    }

    /// Covariance of two arbitrary linear combinations of the base variables.
    pub fn base_covariance(&self, a: &[f64], b: &[f64]) -> f64 {
        (0..self.base.len()).map(|k| a[k] * self.base_variance[k] * b[k]).sum()
    }

    pub fn cov(&self, a: &VarId, b: &VarId) -> Result<f64> {
        Ok(self.cov[(self.var(a)?, self.var(b)?)])
    }

    /// `Var(m | S)` via the Schur complement with a rank-aware pseudo-inverse.
    pub fn conditional_variance(&self, m: usize, given: &[usize]) -> f64 {
        let vm = self.cov[(m, m)];
        if given.is_empty() {
            return vm;
        }
        let k = given.len();
        let s = DMatrix::from_fn(k, k, |i, j| self.cov[(given[i], given[j])]);
        let c = DVector::from_fn(k, |i, _| self.cov[(given[i], m)]);
        let eig = SymmetricEigen::new(s);
        let top = eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l.abs()));
        if top == 0.0 {
            return vm;
        }
        let mut explained = 0.0;
        for (i, &l) in eig.eigenvalues.iter().enumerate() {
            if l > RANK_TOL * top {
                let proj = eig.eigenvectors.column(i).dot(&c);
                explained += proj * proj / l;
            }
        }
        (vm - explained).max(0.0)
    }

    /// `I(m; X | Y)` in bits for a scalar `m`; `+∞` on deterministic recovery.
    pub fn gaussian_cmi(&self, m: &VarId, x: &[VarId], y: &[VarId]) -> Result<f64> {
        let (a, b, c) = self.resolve_disjoint(std::slice::from_ref(m), x, y)?;
        self.cmi_bits(&a, &b, &c)
    }

    fn cmi_index(&self, m: usize, x: &[usize], y: &[usize]) -> f64 {
        let scale = self.cov[(m, m)];
        if scale <= 0.0 {
            return 0.0;
        }
        let tol = RANK_TOL * scale;
        let v_y = self.conditional_variance(m, y);
        if v_y <= tol {
            return 0.0;
        }
        let xy: Vec<usize> = y.iter().chain(x).copied().collect();
        let v_xy = self.conditional_variance(m, &xy);
        if v_xy <= tol {
            f64::INFINITY
        } else if v_y - v_xy <= tol {
            0.0
        } else {
            0.5 * (v_y / v_xy).log2()
        }
    }

    /// Draw `n` i.i.d. realizations of every variable (rows in variable order).
    pub fn sample(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sd: Vec<f64> = self.base_variance.iter().map(|v| v.sqrt()).collect();
        (0..n)
            .map(|_| {
                let z: Vec<f64> = sd
                    .iter()
                    .map(|s| s * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                    .collect();
                (0..self.vars.len())
                    .map(|i| self.mean[i] + (0..z.len()).map(|b| self.coef[(i, b)] * z[b]).sum::<f64>())
                    .collect()
            })
            .collect()
    }
}

impl InfoMeasure for GaussianJoint {
    fn variables(&self) -> &[VarId] {
        &self.vars
    }

    fn index_of(&self, v: &VarId) -> Option<usize> {
        self.index.get(v).copied()
    }

    fn independent(&self, a: &[usize], b: &[usize], c: &[usize]) -> Result<bool> {
        Ok(self.cmi_bits(a, b, c)? == 0.0)
    }

    fn cmi_bits(&self, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
        match a {
            [m] => Ok(self.cmi_index(*m, b, c)),
            _ => Err(Error::query("Gaussian information needs a single scalar first argument")),
        }
    }

    fn is_constant(&self, v: usize) -> bool {
        self.cov[(v, v)] <= 0.0
    }

    fn engine_name(&self) -> &'static str {
        "gaussian"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::UnrolledGraph;

    fn relay() -> SystemSpec {
        let g = UnrolledGraph::complete(&["A", "B"], 2).unwrap();
        let mut s = SystemSpec::new(g, Law::gaussian(1.0));
        s.add_input("A")
            .set_noise("B", 1, Law::gaussian(0.5))
            .send("A", "B", 0, Expr::Message)
            .send("B", "B", 1, Expr::add(vec![Expr::edge("A", "B", 0), Expr::Noise]));
        s
    }

    fn v(s: &str) -> VarId {
        s.parse().unwrap()
    }

    #[test]
    fn identity_relay_covariance() {
        let g = linear_propagate(&relay()).unwrap();
        assert_eq!(g.cov(&v("M"), &v("A0->B1")).unwrap(), 1.0);
        assert_eq!(g.cov(&v("B1->B2"), &v("B1->B2")).unwrap(), 1.5);
        assert_eq!(g.covariance(), &g.covariance().transpose());
    }

    #[test]
    fn gaussian_channel_information() {
        let g = linear_propagate(&relay()).unwrap();
        let m = v("M");
        // snr 1/0.5 = 2
        let i = g.gaussian_cmi(&m, &[v("B1->B2")], &[]).unwrap();
        assert!((i - 0.5 * 3f64.log2()).abs() < 1e-12);
        assert_eq!(g.gaussian_cmi(&m, &[v("A0->B1")], &[]).unwrap(), f64::INFINITY);
        assert_eq!(g.gaussian_cmi(&m, &[v("B1->B2")], &[v("A0->B1")]).unwrap(), 0.0);
        assert_eq!(g.gaussian_cmi(&m, &[], &[]).unwrap(), 0.0);
        assert!(g.cmi_bits(&[0, 1], &[2], &[]).is_err());
    }

    #[test]
    fn non_affine_is_rejected() {
        let mut s = relay();
        s.send("B", "A", 1, Expr::mul(vec![Expr::edge("A", "B", 0), Expr::Noise]));
        assert!(linear_propagate(&s).is_err());
        s.send("B", "A", 1, Expr::xor(vec![Expr::Noise]));
        assert!(linear_propagate(&s).is_err());
    }
}
