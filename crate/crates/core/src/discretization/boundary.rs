use std::fmt;
use std::sync::Arc;

use super::{Axes, Direction};
use crate::error::{Error, Result};

/// Prescribed boundary value `g(t, r, v, y)` at calendar time `t`.
pub type BoundaryFn = Arc<dyn Fn(f64, f64, f64, f64) -> f64 + Send + Sync>;

/// One-sided difference order used for the first derivative on a degenerate face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OneSided {
    /// `(u1 - u0) / Δ`
    First,
    /// `(-u2 + 4 u1 - 3 u0) / (2Δ)`
    #[default]
    Second,
}

impl OneSided {
    pub fn from_order(order: u8) -> Result<Self> {
        match order {
            1 => Ok(OneSided::First),
            2 => Ok(OneSided::Second),
            other => Err(Error::param(
                "y_boundary_order",
                format!("must be 1 or 2, got {other}"),
            )),
        }
    }
}

#[derive(Clone)]
pub enum FaceRule {
    /// Value prescribed on the face.
    Dirichlet(BoundaryFn),
    /// The PDE itself holds on the face: the second derivative normal to the
    /// face is dropped and the first derivative uses a forward difference.
    Degenerate(OneSided),
}

impl FaceRule {
    pub fn dirichlet(f: impl Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        FaceRule::Dirichlet(Arc::new(f))
    }

    pub fn constant(value: f64) -> Self {
        Self::dirichlet(move |_, _, _, _| value)
    }
}

impl fmt::Debug for FaceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaceRule::Dirichlet(_) => write!(f, "Dirichlet(..)"),
            FaceRule::Degenerate(o) => write!(f, "Degenerate({o:?})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    RLower,
    RUpper,
    VLower,
    VUpper,
    YLower,
    YUpper,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face::RLower,
        Face::RUpper,
        Face::VLower,
        Face::VUpper,
        Face::YLower,
        Face::YUpper,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Face::RLower => "r0",
            Face::RUpper => "r_inf",
            Face::VLower => "v0",
            Face::VUpper => "v_inf",
            Face::YLower => "y0",
            Face::YUpper => "y_inf",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Face::RLower | Face::RUpper => Direction::R,
            Face::VLower | Face::VUpper => Direction::V,
            Face::YLower | Face::YUpper => Direction::Y,
        }
    }

    pub fn is_lower(self) -> bool {
        matches!(self, Face::RLower | Face::VLower | Face::YLower)
    }

    pub fn lower(dir: Direction) -> Face {
        match dir {
            Direction::R => Face::RLower,
            Direction::V => Face::VLower,
            Direction::Y => Face::YLower,
        }
    }

    pub fn upper(dir: Direction) -> Face {
        match dir {
            Direction::R => Face::RUpper,
            Direction::V => Face::VUpper,
            Direction::Y => Face::YUpper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstrumentKind {
    Zcb,
    Caplet,
    Custom,
}

/// One rule per face of the 3D box.
#[derive(Debug, Clone)]
pub struct BoundarySpec {
    pub instrument: InstrumentKind,
    pub r_lower: FaceRule,
    pub r_upper: FaceRule,
    pub v_lower: FaceRule,
    pub v_upper: FaceRule,
    pub y_lower: FaceRule,
    pub y_upper: FaceRule,
}

/// Dirichlet precedence where faces meet.
const PRECEDENCE: [Face; 6] = [
    Face::RUpper,
    Face::YUpper,
    Face::VUpper,
    Face::RLower,
    Face::YLower,
    Face::VLower,
];

/// Row contributed by a face rule at one boundary node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryRow {
    Dirichlet { value: f64 },
    /// Coefficients of the first-derivative approximation on
    /// `(u0, u1, u2)` (lower face) per unit of the convective coefficient,
    /// already divided by the computational spacing.
    OneSided { weights: [f64; 3] },
}

impl BoundarySpec {
    pub fn rule(&self, face: Face) -> &FaceRule {
        match face {
            Face::RLower => &self.r_lower,
            Face::RUpper => &self.r_upper,
            Face::VLower => &self.v_lower,
            Face::VUpper => &self.v_upper,
            Face::YLower => &self.y_lower,
            Face::YUpper => &self.y_upper,
        }
    }

    /// Only lower faces may carry a degenerate PDE row.
    pub fn validate(&self) -> Result<()> {
        for face in Face::ALL {
            if !face.is_lower() && matches!(self.rule(face), FaceRule::Degenerate(_)) {
                return Err(Error::UnsupportedFace(face.name()));
            }
        }
        Ok(())
    }

    /// Degenerate rule of the lower face of `dir`, if any.
    pub fn lower_one_sided(&self, dir: Direction) -> Option<OneSided> {
        match self.rule(Face::lower(dir)) {
            FaceRule::Degenerate(o) => Some(*o),
            FaceRule::Dirichlet(_) => None,
        }
    }

    /// The Dirichlet rule governing node `(i, j, k)`, if it lies on a
    /// Dirichlet face of a non-collapsed axis.
    pub fn dirichlet_at(&self, axes: &Axes, i: usize, j: usize, k: usize) -> Option<&BoundaryFn> {
        for face in PRECEDENCE {
            let dir = face.direction();
            let n = axes.axis(dir).len();
            if n < 2 {
                continue;
            }
            let idx = match dir {
                Direction::R => i,
                Direction::V => j,
                Direction::Y => k,
            };
            let on_face = if face.is_lower() { idx == 0 } else { idx == n - 1 };
            if on_face {
                if let FaceRule::Dirichlet(f) = self.rule(face) {
                    return Some(f);
                }
            }
        }
        None
    }

    pub fn is_dirichlet(&self, axes: &Axes, i: usize, j: usize, k: usize) -> bool {
        self.dirichlet_at(axes, i, j, k).is_some()
    }
}

/// Row that `face` contributes at node `(i, j, k)` at calendar time `t`.
pub fn boundary_row(
    spec: &BoundarySpec,
    face: Face,
    t: f64,
    axes: &Axes,
    i: usize,
    j: usize,
    k: usize,
) -> Result<BoundaryRow> {
    let dir = face.direction();
    let dx = axes.axis(dir).dx();
    match spec.rule(face) {
        FaceRule::Dirichlet(f) => {
            let (r, v, y) = axes.coords(i, j, k);
            Ok(BoundaryRow::Dirichlet {
                value: f(t, r, v, y),
            })
        }
        FaceRule::Degenerate(_) if !face.is_lower() => Err(Error::UnsupportedFace(face.name())),
        FaceRule::Degenerate(OneSided::First) => Ok(BoundaryRow::OneSided {
            weights: [-1.0 / dx, 1.0 / dx, 0.0],
        }),
        FaceRule::Degenerate(OneSided::Second) => Ok(BoundaryRow::OneSided {
            weights: [-1.5 / dx, 2.0 / dx, -0.5 / dx],
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Axis;

    fn spec() -> BoundarySpec {
        BoundarySpec {
            instrument: InstrumentKind::Custom,
            r_lower: FaceRule::Degenerate(OneSided::Second),
            r_upper: FaceRule::constant(0.0),
            v_lower: FaceRule::Degenerate(OneSided::First),
            v_upper: FaceRule::constant(2.0),
            y_lower: FaceRule::Degenerate(OneSided::Second),
            y_upper: FaceRule::constant(3.0),
        }
    }

    fn axes() -> Axes {
        Axes::new(
            Axis::uniform(0.0, 1.0, 4).unwrap(),
            Axis::uniform(0.0, 1.0, 5).unwrap(),
            Axis::uniform(0.0, 1.0, 6).unwrap(),
        )
    }

    #[test]
    fn precedence_at_corners() {
        let s = spec();
        let a = axes();
        let val = |i, j, k| s.dirichlet_at(&a, i, j, k).map(|f| f(0.0, 0.0, 0.0, 0.0));
        assert_eq!(val(3, 4, 5), Some(0.0));
        assert_eq!(val(1, 4, 5), Some(3.0));
        assert_eq!(val(1, 4, 2), Some(2.0));
        assert_eq!(val(0, 0, 0), None);
        assert_eq!(val(1, 2, 3), None);
    }

    #[test]
    fn collapsed_axis_has_no_faces() {
        let s = spec();
        let a = Axes::new(
            Axis::uniform(0.0, 1.0, 4).unwrap(),
            Axis::point(1.0),
            Axis::uniform(0.0, 1.0, 6).unwrap(),
        );
        assert!(!s.is_dirichlet(&a, 1, 0, 2));
    }

    #[test]
    fn one_sided_weights_are_exact_on_quadratics() {
        let a = axes();
        let s = spec();
        let h = a.y.dx();
        let row = boundary_row(&s, Face::YLower, 0.0, &a, 1, 1, 0).unwrap();
        let BoundaryRow::OneSided { weights } = row else { panic!() };
        // u = 1 + 2x + 3x² has u'(0) = 2
        let u = |x: f64| 1.0 + 2.0 * x + 3.0 * x * x;
        let d = weights[0] * u(0.0) + weights[1] * u(h) + weights[2] * u(2.0 * h);
        assert!((d - 2.0).abs() < 1e-12);
        let row = boundary_row(&s, Face::VUpper, 0.5, &a, 1, 4, 1).unwrap();
        assert_eq!(row, BoundaryRow::Dirichlet { value: 2.0 });
    }

    #[test]
    fn upper_degenerate_rejected() {
        let mut s = spec();
        s.v_upper = FaceRule::Degenerate(OneSided::First);
        assert!(matches!(s.validate(), Err(Error::UnsupportedFace("v_inf"))));
        assert!(boundary_row(&s, Face::VUpper, 0.0, &axes(), 0, 4, 0).is_err());
        assert!(spec().validate().is_ok());
    }
}
