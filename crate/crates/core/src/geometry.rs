//! Points of `R^{2d+1}`, the Galilean group law, anisotropic dilations and
//! the Kolmogorov boundary of box domains.

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// A point `(v, x, t)` with velocity `v`, position `x` and time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub v: Vec<f64>,
    pub x: Vec<f64>,
    pub t: f64,
}

impl Point {
    pub fn new(v: Vec<f64>, x: Vec<f64>, t: f64) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if v.len() != x.len() {
            return Err(Error::DimensionMismatch { expected: v.len(), found: x.len() });
        }
        Ok(Point { v, x, t })
    }

    /// The identity element `e = (0, 0, 0)` of the group in dimension `d`.
    pub fn identity(d: usize) -> Self {
        Point { v: alloc::vec![0.0; d], x: alloc::vec![0.0; d], t: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.v.iter().chain(&self.x).all(|c| c.is_finite())
    }
}

/// Left translation `z0 ∘ z = (v0 + v, x0 + x + t v0, t0 + t)`.
pub fn group_compose(z0: &Point, z: &Point) -> Result<Point> {
    if z0.dim() != z.dim() {
        return Err(Error::DimensionMismatch { expected: z0.dim(), found: z.dim() });
    }
    let v = z0.v.iter().zip(&z.v).map(|(a, b)| a + b).collect();
    let x = z0
        .x
        .iter()
        .zip(&z.x)
        .zip(&z0.v)
        .map(|((x0, x), v0)| x0 + x + z.t * v0)
        .collect();
    Ok(Point { v, x, t: z0.t + z.t })
}

/// Galilean change of variables that leaves `𝓛` (drift `v·∇_x - ∂_t`)
/// invariant: `(v0 + v, x0 + x - t v0, t0 + t)`. This is [`group_compose`]
/// conjugated by the time reflection `t ↦ -t`; the law of `group_compose`
/// is the invariance group of the time-reversed operator.
pub fn galilean_shift(z0: &Point, z: &Point) -> Result<Point> {
    let flip = |p: &Point| Point { v: p.v.clone(), x: p.x.clone(), t: -p.t };
    Ok(flip(&group_compose(&flip(z0), &flip(z))?))
}

/// Group inverse `z^{-1} = (-v, -x + t v, -t)`.
pub fn group_inverse(z: &Point) -> Point {
    Point {
        v: z.v.iter().map(|v| -v).collect(),
        x: z.x.iter().zip(&z.v).map(|(x, v)| -x + z.t * v).collect(),
        t: -z.t,
    }
}

/// Dilation `δ_r(v, x, t) = (r v, r^3 x, r^2 t)`.
pub fn dilate(r: f64, z: &Point) -> Result<Point> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::NonPositiveDilation(r));
    }
    let r3 = r * r * r;
    Ok(Point {
        v: z.v.iter().map(|v| r * v).collect(),
        x: z.x.iter().map(|x| r3 * x).collect(),
        t: r * r * z.t,
    })
}

/// Axis-aligned box `Ω_v × Ω_x × (t_lo, t_hi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    pub v_lo: Vec<f64>,
    pub v_hi: Vec<f64>,
    pub x_lo: Vec<f64>,
    pub x_hi: Vec<f64>,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl BoxDomain {
    pub fn new(
        v_lo: Vec<f64>,
        v_hi: Vec<f64>,
        x_lo: Vec<f64>,
        x_hi: Vec<f64>,
        t_lo: f64,
        t_hi: f64,
    ) -> Result<Self> {
        let d = v_lo.len();
        if d == 0 {
            return Err(Error::InvalidDomain("dimension must be at least 1".into()));
        }
        for (name, len) in [("v_hi", v_hi.len()), ("x_lo", x_lo.len()), ("x_hi", x_hi.len())] {
            if len != d {
                return Err(Error::InvalidDomain(format!("{name} has length {len}, expected {d}")));
            }
        }
        let ordered = |lo: &[f64], hi: &[f64]| {
            lo.iter().zip(hi).all(|(a, b)| a.is_finite() && b.is_finite() && a < b)
        };
        if !ordered(&v_lo, &v_hi) || !ordered(&x_lo, &x_hi) || !ordered(&[t_lo], &[t_hi]) {
            return Err(Error::InvalidDomain("every lower bound must be finite and below its upper bound".into()));
        }
        Ok(BoxDomain { v_lo, v_hi, x_lo, x_hi, t_lo, t_hi })
    }

    /// The unit cube `[0,1]^{2d+1}`.
    pub fn unit(d: usize) -> Self {
        BoxDomain {
            v_lo: alloc::vec![0.0; d],
            v_hi: alloc::vec![1.0; d],
            x_lo: alloc::vec![0.0; d],
            x_hi: alloc::vec![1.0; d],
            t_lo: 0.0,
            t_hi: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.v_lo.len()
    }

    /// Image of the box under `δ_r`.
    pub fn dilate(&self, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::NonPositiveDilation(r));
        }
        let r3 = r * r * r;
        Ok(BoxDomain {
            v_lo: self.v_lo.iter().map(|a| r * a).collect(),
            v_hi: self.v_hi.iter().map(|a| r * a).collect(),
            x_lo: self.x_lo.iter().map(|a| r3 * a).collect(),
            x_hi: self.x_hi.iter().map(|a| r3 * a).collect(),
            t_lo: r * r * self.t_lo,
            t_hi: r * r * self.t_hi,
        })
    }

    /// Lebesgue measure of the box.
    pub fn measure(&self) -> f64 {
        let side = |lo: &[f64], hi: &[f64]| lo.iter().zip(hi).map(|(a, b)| b - a).product::<f64>();
        side(&self.v_lo, &self.v_hi) * side(&self.x_lo, &self.x_hi) * (self.t_hi - self.t_lo)
    }

    fn scale(&self) -> f64 {
        let mut s: f64 = self.t_lo.abs().max(self.t_hi.abs());
        for c in self.v_lo.iter().chain(&self.v_hi).chain(&self.x_lo).chain(&self.x_hi) {
            s = s.max(c.abs());
        }
        s.max(1.0)
    }

    /// Which faces `p` lies on, or an error when `p` is outside the closed box.
    fn faces(&self, p: &Point) -> Result<Faces> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: p.dim() });
        }
        let eps = 1e-12 * self.scale();
        let side = |c: f64, lo: f64, hi: f64| -> Result<Side> {
            if c < lo - eps || c > hi + eps || !c.is_finite() {
                Err(Error::OutsideDomain)
            } else if c <= lo + eps {
                Ok(Side::Lo)
            } else if c >= hi - eps {
                Ok(Side::Hi)
            } else {
                Ok(Side::Inside)
            }
        };
        let mut faces = Faces { on_v_face: false, x: Vec::with_capacity(p.dim()), t: Side::Inside };
        for k in 0..p.dim() {
            if side(p.v[k], self.v_lo[k], self.v_hi[k])? != Side::Inside {
                faces.on_v_face = true;
            }
            faces.x.push(side(p.x[k], self.x_lo[k], self.x_hi[k])?);
        }
        faces.t = side(p.t, self.t_lo, self.t_hi)?;
        Ok(faces)
    }

    /// Classifies a point of the closed box using the outer normals of every
    /// face it lies on. A point on several faces (an edge or corner) belongs
    /// to the Kolmogorov boundary as soon as one adjacent face does.
    pub fn classify(&self, p: &Point) -> Result<BoundaryClass> {
        let faces = self.faces(p)?;
        if faces.on_v_face {
            return Ok(BoundaryClass::KolmogorovBoundary);
        }
        let mut on_boundary = false;
        for (k, side) in faces.x.iter().enumerate() {
            let outward = match side {
                Side::Inside => continue,
                Side::Lo => -p.v[k],
                Side::Hi => p.v[k],
            };
            on_boundary = true;
            if outward > 0.0 {
                return Ok(BoundaryClass::KolmogorovBoundary);
            }
        }
        match faces.t {
            // (v, -1) . (0, -1) = 1
            Side::Lo => return Ok(BoundaryClass::KolmogorovBoundary),
            Side::Hi => on_boundary = true,
            Side::Inside => {}
        }
        Ok(if on_boundary { BoundaryClass::NonKolmogorovBoundary } else { BoundaryClass::Interior })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Lo,
    Inside,
    Hi,
}

struct Faces {
    on_v_face: bool,
    x: Vec<Side>,
    t: Side,
}

/// Position of a point relative to the Kolmogorov boundary `∂_K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryClass {
    KolmogorovBoundary,
    NonKolmogorovBoundary,
    Interior,
}

/// Classifies `p` given the outer normal `n_xt` of the `(x,t)`-face it lies
/// on (length `d + 1`). On pure velocity faces the normal is ignored. The
/// tie `(v, -1) · N = 0` is not part of `∂_K`.
pub fn classify_boundary_point(dom: &BoxDomain, p: &Point, n_xt: &[f64]) -> Result<BoundaryClass> {
    let faces = dom.faces(p)?;
    if n_xt.len() != dom.dim() + 1 {
        return Err(Error::DimensionMismatch { expected: dom.dim() + 1, found: n_xt.len() });
    }
    if faces.on_v_face {
        return Ok(BoundaryClass::KolmogorovBoundary);
    }
    let on_xt_face = faces.t != Side::Inside || faces.x.iter().any(|s| *s != Side::Inside);
    if !on_xt_face {
        return Ok(BoundaryClass::Interior);
    }
    let d = dom.dim();
    let flux: f64 = p.v.iter().zip(&n_xt[..d]).map(|(v, n)| v * n).sum::<f64>() - n_xt[d];
    Ok(if flux > 0.0 { BoundaryClass::KolmogorovBoundary } else { BoundaryClass::NonKolmogorovBoundary })
}
