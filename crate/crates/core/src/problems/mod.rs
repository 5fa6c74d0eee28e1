//! Test problems.

pub mod quadratic;
pub mod robust;
pub mod wtoy;

pub use quadratic::{make_quadratic, QuadraticMinimax, QuadraticMinimaxParams};
pub use robust::{make_robust_regression, RobustRegression, RobustRegressionParams};
pub use wtoy::{make_wtoy, w_eval, WToy, WToyParams};
