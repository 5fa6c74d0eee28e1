use crate::trace::Branch;
use crate::Vector;

/// A search direction and the branch of the classification rule that made it.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    pub s: Vector,
    pub branch: Branch,
}

/// `u / v` when `|v| >= omega`, otherwise `sgn(-g^T u) u` with `sgn(0) = 1`.
pub fn classify_direction(u: &Vector, v: f64, g: &Vector, omega: f64) -> Direction {
    if v.abs() >= omega {
        Direction {
            s: u / v,
            branch: Branch::Ratio,
        }
    } else {
        let sign = if -g.dot(u) >= 0.0 { 1.0 } else { -1.0 };
        Direction {
            s: u * sign,
            branch: Branch::Curvature,
        }
    }
}
