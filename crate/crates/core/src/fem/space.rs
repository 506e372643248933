use crate::error::Result;
use crate::fem::dofmap::{Constraint, DofMap};
use crate::geometry::basis::{BasisEval, LagrangeBasis};
use crate::geometry::chart::MacroSurface;
use crate::geometry::interpolant::{interpolate_chart, GeometricSampler, SurfaceInterpolant};
use crate::geometry::quadrature::{quadrature_rule, Domain, QuadratureRule};
use crate::mesh::ConformingMesh;

/// Quadrature exactness degrees; `None` selects the default for the polynomial degree.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QuadratureDegrees {
    pub element: Option<usize>,
    pub edge: Option<usize>,
    pub energy: Option<usize>,
}

impl QuadratureDegrees {
    /// Every degree multiplied by `factor`, starting from the resolved defaults.
    pub fn scaled(self, n: usize, factor: usize) -> Self {
        let (e, s, g) = self.resolve(n);
        QuadratureDegrees {
            element: Some(e * factor),
            edge: Some(s * factor),
            energy: Some(g * factor),
        }
    }

    /// `(element, edge, energy)`.
    pub fn resolve(self, n: usize) -> (usize, usize, usize) {
        (
            self.element.unwrap_or(2 * n + 4),
            self.edge.unwrap_or(2 * n + 3),
            self.energy.unwrap_or(2 * n + 6),
        )
    }
}

/// A rule together with the shape functions tabulated at its points.
#[derive(Debug, Clone)]
pub struct TabulatedRule {
    pub rule: QuadratureRule,
    pub evals: Vec<BasisEval>,
}

impl TabulatedRule {
    fn new(rule: QuadratureRule, basis: &LagrangeBasis) -> Self {
        let evals = rule.points.iter().map(|&p| basis.eval(p)).collect();
        TabulatedRule { rule, evals }
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 2], f64, &BasisEval)> {
        self.rule
            .points
            .iter()
            .zip(&self.rule.weights)
            .zip(&self.evals)
            .map(|((&p, &w), e)| (p, w, e))
    }
}

/// Mesh-independent ingredients of the discretization.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub basis: LagrangeBasis,
    pub element: TabulatedRule,
    pub energy: TabulatedRule,
    /// Edge rule on `[0, 1]`, also exact to the oscillation projection degree.
    pub edge: QuadratureRule,
    pub sampler: GeometricSampler,
}

impl Discretization {
    pub fn new(n: usize, degrees: QuadratureDegrees) -> Result<Self> {
        let basis = LagrangeBasis::new(n)?;
        let (e, s, g) = degrees.resolve(n);
        let element = TabulatedRule::new(quadrature_rule(Domain::Triangle, e)?, &basis);
        let energy = TabulatedRule::new(quadrature_rule(Domain::Triangle, g)?, &basis);
        let edge = quadrature_rule(Domain::Edge, s.max(2 * (2 * n - 1)))?;
        let sampler = GeometricSampler::new(&basis, &element.rule);
        Ok(Discretization {
            basis,
            element,
            energy,
            edge,
            sampler,
        })
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }
}

/// `V(T)` on one mesh: the dof numbering and the surface interpolant.
#[derive(Debug, Clone)]
pub struct FeSpace {
    pub dofmap: DofMap,
    pub interpolant: SurfaceInterpolant,
}

impl FeSpace {
    pub fn new(
        mesh: &ConformingMesh,
        surface: &MacroSurface,
        disc: &Discretization,
    ) -> Result<Self> {
        let dofmap = DofMap::new(mesh, &disc.basis, Constraint::for_mesh(mesh));
        let interpolant =
            interpolate_chart(mesh, surface, &dofmap, &disc.basis, &disc.element.rule)?;
        Ok(FeSpace {
            dofmap,
            interpolant,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.dofmap.n_dofs()
    }
}
