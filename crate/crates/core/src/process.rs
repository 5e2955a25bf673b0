//! A triplet bundled with the direction grid, scale solver and boundary
//! policy that every downstream computation shares.

use crate::error::Result;
use crate::exponent::ScaleSolver;
use crate::levy_model::{BoundaryPolicy, LevyMeasureSpec, LevyTriplet};
use crate::sphere::SphereGrid;

#[derive(Debug, Clone)]
pub struct Process {
    pub triplet: LevyTriplet,
    pub sphere: SphereGrid,
    pub policy: BoundaryPolicy,
    solver: ScaleSolver,
}

impl Process {
    pub fn new(triplet: LevyTriplet) -> Self {
        let sphere = SphereGrid::new(triplet.dim());
        Self::with_sphere(triplet, sphere)
    }

    pub fn with_sphere(triplet: LevyTriplet, sphere: SphereGrid) -> Self {
        let solver = ScaleSolver::new(triplet.measure.clone(), sphere.clone());
        Process {
            triplet,
            sphere,
            policy: BoundaryPolicy::default(),
            solver,
        }
    }

    pub fn with_policy(mut self, policy: BoundaryPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_rho_tolerance(mut self, tol: f64) -> Self {
        self.solver = self.solver.with_tolerance(tol);
        self
    }

    pub fn dim(&self) -> usize {
        self.triplet.dim()
    }

    pub fn measure(&self) -> &LevyMeasureSpec {
        &self.triplet.measure
    }

    pub fn rho(&self, t: f64) -> Result<f64> {
        self.solver.rho(t)
    }

    pub fn psi_star(&self, r: f64) -> Result<f64> {
        self.solver.psi_star(r)
    }

    /// Isotropic measure and no drift: the law of `Z_t` is radial.
    pub fn is_radial(&self) -> bool {
        self.measure().is_isotropic() && self.triplet.drift.iter().all(|&a| a == 0.0)
    }
}
