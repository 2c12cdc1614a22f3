//! Plate elements for the bending form
//! `a(u,v) = ∫ α [σ Δu Δv + (1-σ)(u_xx v_xx + u_yy v_yy + 2 u_xy v_xy)]`.
//!
//! Two discretizations are provided: the C¹ Hsieh–Clough–Tocher macro
//! element (12 local DOF) and the nonconforming Morley element (6 local
//! DOF). Local DOF are ordered vertex-major (value, then for HCT the x- and
//! y-derivative) followed by one normal derivative per edge, where local
//! edge `k` is opposite local vertex `k`.

mod hct;
mod layout;
mod morley;
pub mod quadrature;

use nalgebra::DMatrix;

pub use hct::HctBasis;
pub use layout::{dof_layout, DofDescriptor, DofLayout};
pub use morley::MorleyBasis;

use crate::error::{Error, Result};
use crate::mesh::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    Hct,
    Morley,
}

impl ElementKind {
    pub fn local_dofs(self) -> usize {
        match self {
            ElementKind::Hct => 12,
            ElementKind::Morley => 6,
        }
    }

    pub fn dofs_per_vertex(self) -> usize {
        match self {
            ElementKind::Hct => 3,
            ElementKind::Morley => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ElementKind::Hct => "hct",
            ElementKind::Morley => "morley",
        }
    }

    /// Local DOF functionals in storage order.
    pub fn local_functionals(self) -> Vec<LocalDof> {
        let mut out = Vec::with_capacity(self.local_dofs());
        for k in 0..3 {
            out.push(LocalDof::Value(k));
            if self == ElementKind::Hct {
                out.push(LocalDof::DerivX(k));
                out.push(LocalDof::DerivY(k));
            }
        }
        out.extend((0..3).map(LocalDof::Normal));
        out
    }
}

impl std::str::FromStr for ElementKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hct" => Ok(ElementKind::Hct),
            "morley" => Ok(ElementKind::Morley),
            other => Err(format!("unknown discretization '{other}' (expected hct or morley)")),
        }
    }
}

/// A local degree of freedom: point value or derivative at a vertex, or
/// normal derivative at an edge midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalDof {
    Value(usize),
    DerivX(usize),
    DerivY(usize),
    Normal(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Contrast `m ≥ 1`.
    pub m: f64,
    /// Poisson ratio, `0 < σ < 1/2`.
    pub sigma: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self { m: 1.0, sigma: 0.3 }
    }
}

impl MaterialParams {
    pub fn new(m: f64, sigma: f64) -> Self {
        assert!(m >= 1.0, "contrast must be >= 1");
        assert!(sigma > 0.0 && sigma < 0.5, "Poisson ratio must lie in (0, 1/2)");
        Self { m, sigma }
    }

    pub fn with_contrast(self, m: f64) -> Self {
        Self::new(m, self.sigma)
    }
}

/// Triangle vertices together with the (globally oriented) unit normals
/// used by the edge DOF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub vertices: [Point; 3],
    pub normals: [Point; 3],
}

impl ElementGeometry {
    /// Geometry with outward normals; handy for standalone elements.
    pub fn outward(vertices: [Point; 3]) -> Self {
        let normals = std::array::from_fn(|k| {
            let (a, b) = (vertices[(k + 1) % 3], vertices[(k + 2) % 3]);
            let d = [b[0] - a[0], b[1] - a[1]];
            let len = d[0].hypot(d[1]);
            [d[1] / len, -d[0] / len]
        });
        Self { vertices, normals }
    }

    pub fn edge_midpoint(&self, k: usize) -> Point {
        let (a, b) = (self.vertices[(k + 1) % 3], self.vertices[(k + 2) % 3]);
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    fn check(&self) -> Result<()> {
        let area = quadrature::signed_area(&self.vertices);
        let scale = self.vertices.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
        if area <= 1e-14 * scale * scale {
            return Err(Error::Geometry(area));
        }
        Ok(())
    }
}

/// Value, gradient and Hessian `(xx, xy, yy)` of a function at a point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [f64; 3],
}

impl Jet {
    pub fn laplacian(&self) -> f64 {
        self.hess[0] + self.hess[2]
    }

    pub fn apply(&self, dof: LocalDof, geom: &ElementGeometry) -> f64 {
        match dof {
            LocalDof::Value(_) => self.value,
            LocalDof::DerivX(_) => self.grad[0],
            LocalDof::DerivY(_) => self.grad[1],
            LocalDof::Normal(k) => self.grad[0] * geom.normals[k][0] + self.grad[1] * geom.normals[k][1],
        }
    }
}

/// Polynomials in the scaled local coordinates `s = (x - x0)/h`, `t = (y - y0)/h`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LocalFrame {
    pub origin: Point,
    pub h: f64,
}

pub(crate) const MONOMIALS: [(i32, i32); 10] =
    [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)];

fn pw(x: f64, n: i32) -> f64 {
    if n <= 0 {
        1.0
    } else {
        x.powi(n)
    }
}

impl LocalFrame {
    pub fn new(vertices: &[Point; 3]) -> Self {
        let origin = [
            (vertices[0][0] + vertices[1][0] + vertices[2][0]) / 3.0,
            (vertices[0][1] + vertices[1][1] + vertices[2][1]) / 3.0,
        ];
        let h = (0..3)
            .map(|k| {
                let (a, b) = (vertices[k], vertices[(k + 1) % 3]);
                (b[0] - a[0]).hypot(b[1] - a[1])
            })
            .fold(0.0, f64::max);
        Self { origin, h }
    }

    /// Jet of the monomial `s^a t^b` at physical point `p`, in physical derivatives.
    pub fn monomial(&self, (a, b): (i32, i32), p: Point) -> Jet {
        let s = (p[0] - self.origin[0]) / self.h;
        let t = (p[1] - self.origin[1]) / self.h;
        let (af, bf) = (a as f64, b as f64);
        let ih = 1.0 / self.h;
        Jet {
            value: pw(s, a) * pw(t, b),
            grad: [af * pw(s, a - 1) * pw(t, b) * ih, bf * pw(s, a) * pw(t, b - 1) * ih],
            hess: [
                af * (af - 1.0) * pw(s, a - 2) * pw(t, b) * ih * ih,
                af * bf * pw(s, a - 1) * pw(t, b - 1) * ih * ih,
                bf * (bf - 1.0) * pw(s, a) * pw(t, b - 2) * ih * ih,
            ],
        }
    }

    /// Jet of `Σ c_j m_j` over the first `c.len()` monomials.
    pub fn poly(&self, coeffs: impl Iterator<Item = f64>, p: Point) -> Jet {
        let mut out = Jet::default();
        for (c, &mono) in coeffs.zip(MONOMIALS.iter()) {
            if c == 0.0 {
                continue;
            }
            let j = self.monomial(mono, p);
            out.value += c * j.value;
            out.grad[0] += c * j.grad[0];
            out.grad[1] += c * j.grad[1];
            out.hess.iter_mut().zip(j.hess).for_each(|(o, v)| *o += c * v);
        }
        out
    }
}

/// Nodal basis of one element.
#[derive(Debug, Clone)]
pub enum ElementBasis {
    Hct(HctBasis),
    Morley(MorleyBasis),
}

impl ElementBasis {
    pub fn new(kind: ElementKind, geom: &ElementGeometry) -> Result<Self> {
        geom.check()?;
        Ok(match kind {
            ElementKind::Hct => ElementBasis::Hct(HctBasis::new(geom)?),
            ElementKind::Morley => ElementBasis::Morley(MorleyBasis::new(geom)?),
        })
    }

    pub fn geometry(&self) -> &ElementGeometry {
        match self {
            ElementBasis::Hct(b) => &b.geom,
            ElementBasis::Morley(b) => &b.geom,
        }
    }

    /// Jets of all basis functions at a point of the (closed) element.
    pub fn eval(&self, p: Point) -> Vec<Jet> {
        match self {
            ElementBasis::Hct(b) => b.eval(p),
            ElementBasis::Morley(b) => b.eval(p),
        }
    }

    /// Quadrature exact for products of basis Hessians (`hessian = true`)
    /// or for a basis function against a constant load.
    fn quadrature(&self, hessian: bool) -> Vec<(Vec<Jet>, f64)> {
        let rule = if hessian { &quadrature::DEGREE_2 } else { &quadrature::DEGREE_4 };
        match self {
            ElementBasis::Hct(b) => (0..3)
                .flat_map(|k| {
                    let sub = b.sub_triangle(k);
                    rule.on(&sub).into_iter().map(move |(p, w)| (b.eval_sub(k, p), w))
                })
                .collect(),
            ElementBasis::Morley(b) => {
                rule.on(&b.geom.vertices).into_iter().map(|(p, w)| (b.eval(p), w)).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalMatrix {
    pub kind: ElementKind,
    pub values: DMatrix<f64>,
}

impl LocalMatrix {
    pub fn dofs(&self) -> Vec<LocalDof> {
        self.kind.local_functionals()
    }
}

/// Element Gram matrices `(∫ Δφ_i Δφ_j, ∫ D²φ_i : D²φ_j)`.
pub fn local_grams(basis: &ElementBasis) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = basis.eval(basis.geometry().vertices[0]).len();
    let mut lap = DMatrix::zeros(n, n);
    let mut hess = DMatrix::zeros(n, n);
    for (jets, w) in basis.quadrature(true) {
        for i in 0..n {
            let (li, hi) = (jets[i].laplacian(), jets[i].hess);
            for j in 0..n {
                let hj = jets[j].hess;
                lap[(i, j)] += w * li * jets[j].laplacian();
                hess[(i, j)] += w * (hi[0] * hj[0] + hi[2] * hj[2] + 2.0 * hi[1] * hj[1]);
            }
        }
    }
    (lap, hess)
}

pub(crate) fn stiffness_from_basis(basis: &ElementBasis, alpha: f64, sigma: f64) -> DMatrix<f64> {
    let (lap, hess) = local_grams(basis);
    let mut k = lap * sigma + hess * (1.0 - sigma);
    // the two products above are symmetric up to summation order only
    let kt = k.transpose();
    k = (k + kt) * 0.5;
    k * alpha
}

/// Local stiffness matrix of `a(·,·)` with coefficient `alpha`.
pub fn local_stiffness(
    kind: ElementKind,
    geom: &ElementGeometry,
    alpha: f64,
    params: &MaterialParams,
) -> Result<LocalMatrix> {
    let basis = ElementBasis::new(kind, geom)?;
    Ok(LocalMatrix { kind, values: stiffness_from_basis(&basis, alpha, params.sigma) })
}

/// `∫ f φ_i` for a constant load `f`.
pub fn local_load(basis: &ElementBasis, f: f64) -> Vec<f64> {
    let n = basis.eval(basis.geometry().vertices[0]).len();
    let mut out = vec![0.0; n];
    for (jets, w) in basis.quadrature(false) {
        for (o, j) in out.iter_mut().zip(&jets) {
            *o += w * f * j.value;
        }
    }
    out
}

/// Local DOF values of a function given by its jet at each DOF location.
pub fn interpolate_local(kind: ElementKind, geom: &ElementGeometry, f: impl Fn(Point) -> Jet) -> Vec<f64> {
    kind.local_functionals()
        .into_iter()
        .map(|dof| {
            let p = match dof {
                LocalDof::Value(k) | LocalDof::DerivX(k) | LocalDof::DerivY(k) => geom.vertices[k],
                LocalDof::Normal(k) => geom.edge_midpoint(k),
            };
            f(p).apply(dof, geom)
        })
        .collect()
}

/// Jet of a polynomial of degree ≤ 2 given by `(c0, cx, cy, cxx, cxy, cyy)`.
pub fn quadratic_jet(c: [f64; 6], p: Point) -> Jet {
    let [x, y] = p;
    Jet {
        value: c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y,
        grad: [c[1] + 2.0 * c[3] * x + c[4] * y, c[2] + c[4] * x + 2.0 * c[5] * y],
        hess: [2.0 * c[3], c[4], 2.0 * c[5]],
    }
}
