//! Angle wrapping helpers shared across the crate.

use std::f64::consts::PI;

/// Wrap an angle into the principal interval (−π, π].
pub fn wrap_principal(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let r = x.rem_euclid(two_pi);
    if r > PI {
        r - two_pi
    } else {
        r
    }
}

/// Reduce a solid angle modulo 4π into (−2π, 2π].
pub fn reduce_solid_angle(x: f64) -> f64 {
    let four_pi = 4.0 * PI;
    let r = x.rem_euclid(four_pi);
    if r > 2.0 * PI {
        r - four_pi
    } else {
        r
    }
}

/// Principal argument of a complex number in (−π, π].
///
/// `atan2` returns values in [−π, π]; the single point −π is mapped to +π so
/// that phases live on a half-open interval.
pub fn principal_arg(z: num_complex::Complex64) -> f64 {
    let a = z.arg();
    if a == -PI {
        PI
    } else {
        a
    }
}
