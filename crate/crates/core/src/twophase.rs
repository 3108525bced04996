//! Drift-flux variant: two mass fields `v`, `w` sharing one velocity. The
//! front dynamics run on the aggregate `v + w`; component masses follow
//! from their own jump relations along the shared center curve.

use std::sync::Arc;

use crate::model::{CharacteristicPath, CoefficientSpec, FluxSpec, VelocityOrbit};
use crate::numerics::ToleranceProfile;
use crate::riemann::{ContactLine, DeltaFront, RiemannError, Side, WaveFan};

/// Gas mass `v`, liquid mass `w` and common velocity `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State3 {
    pub v: f64,
    pub w: f64,
    pub u: f64,
}

impl State3 {
    pub fn new(v: f64, w: f64, u: f64) -> Self {
        Self { v, w, u }
    }

    fn validate(&self) -> Result<(), RiemannError> {
        if self.v >= 0.0 && self.w >= 0.0 && self.u.is_finite() && self.v.is_finite() && self.w.is_finite() {
            Ok(())
        } else {
            Err(RiemannError::InvalidInput(format!("state {self:?} is not admissible")))
        }
    }
}

/// Aggregate front plus the per-component densities needed to split its
/// mass.
#[derive(Debug, Clone)]
pub struct DeltaFront3 {
    front: DeltaFront,
    left: [f64; 2],
    right: [f64; 2],
    birth: [f64; 2],
}

impl DeltaFront3 {
    /// Wraps an aggregate front. `left`, `right` and `birth` hold the
    /// `(v, w)` densities of the sides and the component masses at birth;
    /// their sums must match the aggregate.
    pub fn from_aggregate(front: DeltaFront, left: [f64; 2], right: [f64; 2], birth: [f64; 2]) -> Self {
        Self { front, left, right, birth }
    }

    pub fn aggregate(&self) -> &DeltaFront {
        &self.front
    }

    pub fn position(&self, t: f64) -> f64 {
        self.front.position(t)
    }

    pub fn weight(&self, t: f64) -> f64 {
        self.front.weight(t)
    }

    /// Mass of component `k` (0 for `v`, 1 for `w`).
    pub fn component_mass(&self, k: usize, t: f64) -> f64 {
        let off = self.front.displacement(t);
        let (pl, pr) = self.front.travel(t);
        let (l, r) = (self.left[k], self.right[k]);
        off * (r - l) + l * pl - r * pr + self.birth[k]
    }

    pub fn xi_v(&self, t: f64) -> f64 {
        self.component_mass(0, t)
    }

    pub fn xi_w(&self, t: f64) -> f64 {
        self.component_mass(1, t)
    }

    pub fn left_densities(&self) -> [f64; 2] {
        self.left
    }

    pub fn right_densities(&self) -> [f64; 2] {
        self.right
    }
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Riemann3Solution {
    Delta(DeltaFront3),
    Fan(WaveFan),
    Contact(ContactLine),
}

impl Riemann3Solution {
    pub fn delta(&self) -> Option<&DeltaFront3> {
        match self {
            Riemann3Solution::Delta(d) => Some(d),
            _ => None,
        }
    }
}

fn side(s: State3, coeff: &Arc<CoefficientSpec>, flux: &FluxSpec) -> Side {
    Side::new(
        s.v + s.w,
        CharacteristicPath::new(VelocityOrbit::new(s.u, coeff.clone()), flux.clone()),
    )
}

/// Riemann problem posed at `(0, 0)` for the drift-flux system.
pub fn solve_riemann3(
    left: State3,
    right: State3,
    coeff: Arc<CoefficientSpec>,
    flux: FluxSpec,
    horizon: f64,
    tol: &ToleranceProfile,
) -> Result<Riemann3Solution, RiemannError> {
    left.validate()?;
    right.validate()?;
    let (l, r) = (side(left, &coeff, &flux), side(right, &coeff, &flux));
    Ok(if left.u > right.u {
        let front = DeltaFront::riemann(l, r, 0.0, 0.0, horizon, tol)?;
        Riemann3Solution::Delta(DeltaFront3::from_aggregate(front, [left.v, left.w], [right.v, right.w], [0.0, 0.0]))
    } else if left.u < right.u {
        Riemann3Solution::Fan(WaveFan {
            left: l,
            right: r,
            birth_position: 0.0,
            birth_time: 0.0,
        })
    } else {
        Riemann3Solution::Contact(ContactLine {
            left: l,
            right: r,
            birth_position: 0.0,
            birth_time: 0.0,
        })
    })
}

/// Point masses `m`, `n` of the two components at the origin, moving with
/// velocity `u` strictly between the side velocities.
#[allow(clippy::too_many_arguments)]
pub fn solve_delta_riemann3(
    left: State3,
    right: State3,
    m: f64,
    n: f64,
    u: f64,
    coeff: Arc<CoefficientSpec>,
    flux: FluxSpec,
    horizon: f64,
    tol: &ToleranceProfile,
) -> Result<DeltaFront3, RiemannError> {
    left.validate()?;
    right.validate()?;
    if !(m > 0.0 && n > 0.0) {
        return Err(RiemannError::InvalidInput(format!("point masses must be positive, got ({m}, {n})")));
    }
    if !(left.u > u && u > right.u) {
        return Err(RiemannError::InvalidInput(format!(
            "point-mass velocity {u} must lie strictly between {} and {}",
            right.u, left.u
        )));
    }
    let (l, r) = (side(left, &coeff, &flux), side(right, &coeff, &flux));
    let front = DeltaFront::delta_data(l, r, m + n, u, 0.0, 0.0, horizon, tol)?;
    Ok(DeltaFront3::from_aggregate(front, [left.v, left.w], [right.v, right.w], [m, n]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero() -> Arc<CoefficientSpec> {
        Arc::new(CoefficientSpec::zero())
    }

    #[test]
    fn symmetric_components_grow_equally() {
        let tol = ToleranceProfile::default();
        let sol = solve_riemann3(State3::new(1.0, 1.0, 1.0), State3::new(1.0, 1.0, -1.0), zero(), FluxSpec::identity(), 1.0, &tol)
            .unwrap();
        let d = sol.delta().unwrap();
        for &t in &[0.25, 0.5, 1.0] {
            assert!(d.weight(t).abs() < 1e-12);
            assert!((d.xi_v(t) - 2.0 * t).abs() < 1e-12);
            assert!((d.xi_w(t) - 2.0 * t).abs() < 1e-12);
        }
    }

    #[test]
    fn component_masses_scale_with_field() {
        let tol = ToleranceProfile::default();
        let sol = solve_riemann3(State3::new(1.0, 2.0, 1.0), State3::new(1.0, 2.0, -1.0), zero(), FluxSpec::identity(), 1.0, &tol)
            .unwrap();
        let d = sol.delta().unwrap();
        assert!(d.weight(0.6).abs() < 1e-12);
        assert!((d.xi_w(0.6) - 2.0 * d.xi_v(0.6)).abs() < 1e-12);
    }

    #[test]
    fn vacuum_fan_for_increasing_velocity() {
        let tol = ToleranceProfile::default();
        let sol = solve_riemann3(State3::new(1.0, 1.0, 0.0), State3::new(1.0, 1.0, 1.0), zero(), FluxSpec::identity(), 1.0, &tol)
            .unwrap();
        assert!(matches!(sol, Riemann3Solution::Fan(_)));
    }

    #[test]
    fn symmetric_point_masses() {
        let tol = ToleranceProfile::default();
        let d = solve_delta_riemann3(
            State3::new(1.0, 1.0, 1.0),
            State3::new(1.0, 1.0, -1.0),
            1.0,
            1.0,
            0.0,
            zero(),
            FluxSpec::identity(),
            2.0,
            &tol,
        )
        .unwrap();
        for &t in &[0.0, 0.5, 2.0] {
            assert!(d.position(t).abs() < 1e-12);
            assert!(d.weight(t).abs() < 1e-12);
            assert!((d.xi_v(t) - (2.0 * t + 1.0)).abs() < 1e-12);
            assert!((d.xi_w(t) - (2.0 * t + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn birth_values_are_the_data() {
        let tol = ToleranceProfile::default();
        let c = Arc::new(CoefficientSpec::constant(0.4, 1.0).unwrap());
        let d = solve_delta_riemann3(
            State3::new(1.0, 0.5, 2.0),
            State3::new(0.3, 2.0, -1.0),
            0.2,
            0.9,
            0.4,
            c,
            FluxSpec::geometric_optics(),
            1.0,
            &tol,
        )
        .unwrap();
        assert!((d.xi_v(0.0) - 0.2).abs() < 1e-15);
        assert!((d.xi_w(0.0) - 0.9).abs() < 1e-15);
        assert_eq!(d.weight(0.0), 0.4);
    }
}
