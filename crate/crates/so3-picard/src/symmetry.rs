//! Finite rotation groups used to build symmetric pose distributions.
//!
//! The proper symmetry groups of the platonic solids have 12 (tetrahedron),
//! 24 (cube/octahedron), and 60 (icosahedron/dodecahedron) rotations; the
//! cyclic groups C_n cover axially symmetric objects. Elements are generated
//! by closing a small generator set under composition, which avoids
//! hand-typing 60 matrices and is verified by the expected group orders.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::so3::{compose, exp_map, geodesic_distance, Rotation, Tangent};
use crate::{Error, Result};

/// A finite subgroup of SO(3).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryGroup {
    /// n-fold rotation about the z-axis; `Cyclic(1)` is the trivial group.
    Cyclic(u32),
    /// Rotational symmetries of the tetrahedron (order 12).
    Tetrahedral,
    /// Rotational symmetries of the cube/octahedron (order 24).
    Octahedral,
    /// Rotational symmetries of the icosahedron/dodecahedron (order 60).
    Icosahedral,
}

impl SymmetryGroup {
    pub fn order(&self) -> usize {
        match self {
            SymmetryGroup::Cyclic(n) => *n as usize,
            SymmetryGroup::Tetrahedral => 12,
            SymmetryGroup::Octahedral => 24,
            SymmetryGroup::Icosahedral => 60,
        }
    }

    /// Enumerates the group elements. Cyclic groups are listed directly; the
    /// polyhedral groups are closed from two generators.
    pub fn elements(&self) -> Result<Vec<Rotation>> {
        match self {
            SymmetryGroup::Cyclic(n) => {
                if *n < 1 {
                    return Err(Error::InvalidArgument(
                        "cyclic group order must be at least 1".into(),
                    ));
                }
                Ok((0..*n)
                    .map(|k| {
                        let angle = 2.0 * PI * k as f64 / *n as f64;
                        exp_map(&Tangent::wrap(Vector3::new(0.0, 0.0, angle)))
                    })
                    .collect())
            }
            SymmetryGroup::Tetrahedral => {
                let half_turn = axis_angle(Vector3::new(0.0, 0.0, 1.0), PI);
                let three_fold = axis_angle(Vector3::new(1.0, 1.0, 1.0), 2.0 * PI / 3.0);
                close_group(&[half_turn, three_fold], 12)
            }
            SymmetryGroup::Octahedral => {
                let quarter_turn = axis_angle(Vector3::new(0.0, 0.0, 1.0), PI / 2.0);
                let three_fold = axis_angle(Vector3::new(1.0, 1.0, 1.0), 2.0 * PI / 3.0);
                close_group(&[quarter_turn, three_fold], 24)
            }
            SymmetryGroup::Icosahedral => {
                // Icosahedron with vertices at cyclic permutations of
                // (0, ±1, ±φ): a five-fold axis through a vertex and a
                // three-fold axis through an adjacent face center.
                let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
                let five_fold = axis_angle(Vector3::new(0.0, 1.0, phi), 2.0 * PI / 5.0);
                let three_fold = axis_angle(Vector3::new(1.0, 0.0, phi * phi), 2.0 * PI / 3.0);
                close_group(&[five_fold, three_fold], 60)
            }
        }
    }
}

impl std::fmt::Display for SymmetryGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SymmetryGroup::Cyclic(n) => write!(f, "cyclic:{n}"),
            SymmetryGroup::Tetrahedral => write!(f, "tet"),
            SymmetryGroup::Octahedral => write!(f, "oct"),
            SymmetryGroup::Icosahedral => write!(f, "ico"),
        }
    }
}

fn axis_angle(axis: Vector3<f64>, angle: f64) -> Rotation {
    exp_map(&Tangent::wrap(axis.normalize() * angle))
}

/// Closes the generator set under composition. `expected` bounds the loop;
/// producing more elements indicates generators outside a common finite
/// group.
fn close_group(generators: &[Rotation], expected: usize) -> Result<Vec<Rotation>> {
    let mut elements = vec![Rotation::identity()];
    let mut frontier: Vec<Rotation> = elements.clone();
    while !frontier.is_empty() {
        let mut fresh = Vec::new();
        for e in &frontier {
            for g in generators {
                let candidate = compose(e, g);
                let known = elements
                    .iter()
                    .chain(fresh.iter())
                    .any(|k| geodesic_distance(k, &candidate) < 1e-6);
                if !known {
                    fresh.push(candidate);
                }
            }
        }
        if elements.len() + fresh.len() > expected {
            return Err(Error::Internal(format!(
                "group closure exceeded the expected order {expected}"
            )));
        }
        elements.extend(fresh.iter().cloned());
        frontier = fresh;
    }
    if elements.len() != expected {
        return Err(Error::Internal(format!(
            "group closure produced {} elements, expected {expected}",
            elements.len()
        )));
    }
    Ok(elements)
}
