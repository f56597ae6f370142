//! Sigma-, theta- and Kleinian wp-functions of hyperelliptic curves of
//! genus 1..3: period matrices by contour quadrature, Riemann theta with
//! half-integer characteristics, the fundamental sigma-function with its
//! exact series recursions, the Jacobi inversion problem, and numeric
//! certification of the classical identity tables and addition theorems.

pub mod curve;
pub mod error;
pub mod groupoid;
pub mod identities;
pub mod inversion;
pub mod kleinian;
pub mod periods;
pub mod quad;
pub mod report;
pub mod roots;
pub mod schurw;
pub mod series;
pub mod theta;

pub use curve::{CoordinateMap, CurvePoint, CurveSpec, HyperellipticCurve, Normalization};
pub use error::{Error, Result};
