//! Bloch-sphere geometry: the evolution path of the second-loop state and
//! the signed solid angle it encloses.
//!
//! The path basis maps to the sphere with `|p_perp><p_perp|` at the north
//! pole and `|p><p|` at the south pole; the split state `|q><q|` sits on the
//! equator at azimuth zero. The second loop traces a geodesic from `q`
//! toward the pole (absorber), a circle of latitude (phase shifter), and a
//! geodesic closure back to `q` (projective recombination). The geometric
//! phase is `-Omega/2` for the enclosed signed solid angle `Omega`.
//!
//! Solid angles are accumulated by a triangle fan anchored at the first path
//! point, using the signed spherical excess
//! `2 atan2(v0 . (vi x vj), 1 + v0.vi + vi.vj + vj.v0)` per chord pair, so
//! self-intersecting paths pick up signed lobe areas and windings
//! automatically.

use crate::angle::reduce_solid_angle;
use crate::error::{Error, Result};
use crate::state::PathState;

/// Tolerance for antipodal / connectivity checks on unit vectors.
pub const GEOMETRY_TOL: f64 = 1e-9;

/// Default number of chords per arc when discretizing.
pub const DEFAULT_SEGMENTS: usize = 1024;

/// A point on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    /// Build from components, renormalizing to unit length.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if !n.is_finite() || n < 1e-12 {
            return Err(Error::ZeroState);
        }
        Ok(Self { x: x / n, y: y / n, z: z / n })
    }

    /// Point at polar angle `theta` (from the north pole) and azimuth `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = (theta.sin(), theta.cos());
        Self { x: st * phi.cos(), y: st * phi.sin(), z: ct }
    }

    /// Bloch image of a (possibly subnormalized) path state:
    /// `(2 Re(a* b), 2 Im(a* b), |a|^2 - |b|^2) / (|a|^2 + |b|^2)`
    /// with `a` the `|p_perp>` and `b` the `|p>` amplitude.
    pub fn from_state(s: &PathState) -> Result<Self> {
        let n = s.norm_sqr();
        if !n.is_finite() || n < 1e-12 {
            return Err(Error::ZeroState);
        }
        let cross = s.a_perp.conj() * s.a_p;
        Self::new(
            2.0 * cross.re / n,
            2.0 * cross.im / n,
            (s.a_perp.norm_sqr() - s.a_p.norm_sqr()) / n,
        )
    }

    pub fn dot(&self, o: &BlochVector) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &BlochVector) -> (f64, f64, f64) {
        (
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    /// Azimuth `atan2(y, x)`.
    pub fn azimuth(&self) -> f64 {
        self.y.atan2(self.x)
    }

    fn dist(&self, o: &BlochVector) -> f64 {
        let (dx, dy, dz) = (self.x - o.x, self.y - o.y, self.z - o.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    fn antipodal_gap(&self, o: &BlochVector) -> f64 {
        let (sx, sy, sz) = (self.x + o.x, self.y + o.y, self.z + o.z);
        (sx * sx + sy * sy + sz * sz).sqrt()
    }
}

/// Polar angle of the absorber latitude, from `T = tan^2(theta/2)`,
/// equivalently `cos(theta) = (1 - T)/(1 + T)`. Maps `[0, 1]` to `[0, pi/2]`.
pub fn absorber_polar_angle(transmissivity: f64) -> f64 {
    2.0 * transmissivity.sqrt().atan()
}

/// Arc-type annotation for sphere-path segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcKind {
    Geodesic,
    Latitude,
}

/// One arc of a path on the sphere.
#[derive(Debug, Clone)]
pub enum ArcSegment {
    /// Shortest great-circle arc between two non-antipodal points.
    Geodesic { start: BlochVector, end: BlochVector },
    /// Circle-of-latitude arc at polar angle `theta`, running from azimuth
    /// `phi_start` over the signed span `dphi` (|dphi| > 2 pi winds).
    Latitude { theta: f64, phi_start: f64, dphi: f64 },
}

impl ArcSegment {
    /// Geodesic arc; errors if the endpoints are antipodal within tolerance.
    pub fn geodesic(start: BlochVector, end: BlochVector) -> Result<Self> {
        if start.antipodal_gap(&end) < GEOMETRY_TOL {
            return Err(Error::GeodesicUndefined);
        }
        Ok(ArcSegment::Geodesic { start, end })
    }

    pub fn latitude(theta: f64, phi_start: f64, dphi: f64) -> Self {
        ArcSegment::Latitude { theta, phi_start, dphi }
    }

    pub fn kind(&self) -> ArcKind {
        match self {
            ArcSegment::Geodesic { .. } => ArcKind::Geodesic,
            ArcSegment::Latitude { .. } => ArcKind::Latitude,
        }
    }

    pub fn start(&self) -> BlochVector {
        self.point_at(0.0)
    }

    pub fn end(&self) -> BlochVector {
        self.point_at(1.0)
    }

    /// Point at parameter `t` in `[0, 1]` (uniform in angle along the arc).
    pub fn point_at(&self, t: f64) -> BlochVector {
        match *self {
            ArcSegment::Geodesic { start, end } => slerp(&start, &end, t),
            ArcSegment::Latitude { theta, phi_start, dphi } => {
                BlochVector::from_angles(theta, phi_start + t * dphi)
            }
        }
    }
}

/// Spherical linear interpolation between non-antipodal unit vectors.
fn slerp(a: &BlochVector, b: &BlochVector, t: f64) -> BlochVector {
    let cos_ang = a.dot(b).clamp(-1.0, 1.0);
    let ang = cos_ang.acos();
    if ang < 1e-12 {
        return *a;
    }
    let (wa, wb) = ((1.0 - t) * ang, t * ang);
    let s = ang.sin();
    let (ca, cb) = (wa.sin() / s, wb.sin() / s);
    BlochVector::new(
        ca * a.x + cb * b.x,
        ca * a.y + cb * b.y,
        ca * a.z + cb * b.z,
    )
    .expect("slerp of unit vectors is nonzero")
}

/// Ordered list of connected arcs with a fixed chord count per arc.
#[derive(Debug, Clone)]
pub struct SpherePath {
    arcs: Vec<ArcSegment>,
    segments_per_arc: usize,
    closed: bool,
}

impl SpherePath {
    /// Assemble a path, checking connectivity (and closure when flagged).
    pub fn new(arcs: Vec<ArcSegment>, segments_per_arc: usize, closed: bool) -> Result<Self> {
        if arcs.is_empty() || segments_per_arc < 2 {
            return Err(Error::InvalidGrid(
                "path needs at least one arc and two segments per arc".into(),
            ));
        }
        for i in 0..arcs.len() - 1 {
            if arcs[i].end().dist(&arcs[i + 1].start()) > GEOMETRY_TOL {
                return Err(Error::DisconnectedPath { index: i });
            }
        }
        if closed {
            let first = arcs[0].start();
            let last = arcs[arcs.len() - 1].end();
            if first.dist(&last) > GEOMETRY_TOL {
                return Err(Error::DisconnectedPath { index: arcs.len() - 1 });
            }
        }
        Ok(Self { arcs, segments_per_arc, closed })
    }

    pub fn arcs(&self) -> &[ArcSegment] {
        &self.arcs
    }

    pub fn segments_per_arc(&self) -> usize {
        self.segments_per_arc
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Discretized points, `segments_per_arc` chords per arc, endpoint included.
    pub fn polyline(&self) -> Vec<BlochVector> {
        let n = self.segments_per_arc;
        let mut pts = Vec::with_capacity(self.arcs.len() * n + 1);
        for arc in &self.arcs {
            for i in 0..n {
                pts.push(arc.point_at(i as f64 / n as f64));
            }
        }
        pts.push(self.arcs[self.arcs.len() - 1].end());
        pts
    }

    /// CSV dump of the discretized path: `segment_index,kind,x,y,z`.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write;
        let n = self.segments_per_arc;
        let mut out = String::from("segment_index,kind,x,y,z\n");
        let kind_name = |k: ArcKind| match k {
            ArcKind::Geodesic => "geodesic",
            ArcKind::Latitude => "latitude",
        };
        for (idx, arc) in self.arcs.iter().enumerate() {
            let last_arc = idx == self.arcs.len() - 1;
            let top = if last_arc { n } else { n - 1 };
            for i in 0..=top {
                let p = arc.point_at(i as f64 / n as f64);
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    idx,
                    kind_name(arc.kind()),
                    crate::io::sig9(p.x),
                    crate::io::sig9(p.y),
                    crate::io::sig9(p.z)
                )
                .unwrap();
            }
        }
        out
    }
}

/// Closed evolution path for transmissivity `T` and phase difference `dchi`,
/// anchored at `q = (1, 0, 0)`: geodesic along the zero meridian from `q` to
/// the absorber latitude, latitude arc sweeping azimuth `0 -> dchi`, geodesic
/// closure back to `q`.
///
/// `T = 0` degenerates to the zero-area meridian-up/meridian-down path.
/// Errors with [`Error::GeodesicUndefined`] when the closure endpoints are
/// antipodal (`T = 1` with `dchi` an odd multiple of pi).
pub fn build_evolution_path(
    transmissivity: f64,
    dchi: f64,
    segments_per_arc: usize,
) -> Result<SpherePath> {
    if !(0.0..=1.0).contains(&transmissivity) || !transmissivity.is_finite() {
        return Err(Error::TransmissivityOutOfRange(transmissivity));
    }
    if !dchi.is_finite() {
        return Err(Error::InvalidGrid("dchi must be finite".into()));
    }
    let theta = absorber_polar_angle(transmissivity);
    let q = BlochVector { x: 1.0, y: 0.0, z: 0.0 };
    let start = BlochVector::from_angles(theta, 0.0);
    let end = BlochVector::from_angles(theta, dchi);
    let arcs = vec![
        ArcSegment::geodesic(q, start)?,
        ArcSegment::latitude(theta, 0.0, dchi),
        ArcSegment::geodesic(end, q)?,
    ];
    SpherePath::new(arcs, segments_per_arc, true)
}

/// Signed excess of the spherical triangle `(a, b, c)`, positive for
/// counter-clockwise orientation seen from outside the sphere.
fn triangle_excess(a: &BlochVector, b: &BlochVector, c: &BlochVector) -> f64 {
    let (cx, cy, cz) = b.cross(c);
    let num = a.x * cx + a.y * cy + a.z * cz;
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den)
}

/// Unreduced fan sum of signed triangle excesses over a closed polyline,
/// anchored at the first point. Windings accumulate their full area.
///
/// A chord between antipodal consecutive points is undefined and errors.
/// A sample antipodal to the anchor would make the fan triangles on either
/// side ill-conditioned; the quad there is re-fanned through its other
/// diagonal instead, which covers the same surface.
pub fn raw_solid_angle(points: &[BlochVector]) -> Result<f64> {
    if points.len() < 4 {
        return Err(Error::OpenPath);
    }
    let v0 = points[0];
    if points[0].dist(&points[points.len() - 1]) > GEOMETRY_TOL {
        return Err(Error::OpenPath);
    }
    if points.len() > 1 && v0.antipodal_gap(&points[1]) < GEOMETRY_TOL {
        return Err(Error::AntipodalPoints { index: 1 });
    }
    let mut omega = 0.0;
    let mut i = 1;
    while i + 1 < points.len() {
        let vi = &points[i];
        let vj = &points[i + 1];
        if vi.antipodal_gap(vj) < GEOMETRY_TOL {
            return Err(Error::AntipodalPoints { index: i });
        }
        if v0.antipodal_gap(vj) < GEOMETRY_TOL {
            // v_{i+1} sits at the anchor's antipode: split the quad
            // (v0, v_i, v_{i+1}, v_{i+2}) along the (v_i, v_{i+2}) diagonal.
            if i + 2 >= points.len() {
                return Err(Error::AntipodalPoints { index: i + 1 });
            }
            let vk = &points[i + 2];
            if vj.antipodal_gap(vk) < GEOMETRY_TOL
                || v0.antipodal_gap(vk) < GEOMETRY_TOL
                || vi.antipodal_gap(vk) < GEOMETRY_TOL
            {
                return Err(Error::AntipodalPoints { index: i + 1 });
            }
            omega += triangle_excess(&v0, vi, vk) + triangle_excess(vi, vj, vk);
            i += 2;
            continue;
        }
        omega += triangle_excess(&v0, vi, vj);
        i += 1;
    }
    Ok(omega)
}

/// Signed solid angle enclosed by a closed path, reduced modulo 4π into
/// (−2π, 2π].
pub fn signed_solid_angle(path: &SpherePath) -> Result<f64> {
    if !path.is_closed() {
        return Err(Error::OpenPath);
    }
    Ok(reduce_solid_angle(raw_solid_angle(&path.polyline())?))
}

/// Geometric phase of a closed path: `-Omega/2`.
pub fn geometric_phase_from_area(path: &SpherePath) -> Result<f64> {
    Ok(-0.5 * signed_solid_angle(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{evolve_second_loop, PathState};
    use std::f64::consts::PI;

    #[test]
    fn bloch_images_of_basis_states() {
        let v = BlochVector::from_state(&PathState::q()).unwrap();
        assert!((v.x - 1.0).abs() < 1e-12 && v.y.abs() < 1e-12 && v.z.abs() < 1e-12);
        let v = BlochVector::from_state(&PathState::p_perp()).unwrap();
        assert!((v.z - 1.0).abs() < 1e-12);
        let v = BlochVector::from_state(&PathState::p()).unwrap();
        assert!((v.z + 1.0).abs() < 1e-12);
    }

    #[test]
    fn bloch_image_of_evolved_state() {
        let s = evolve_second_loop(0.122, 0.0, PI / 2.0).unwrap();
        let v = BlochVector::from_state(&s).unwrap();
        assert!((v.z - 0.782_531_194_295_900_1).abs() < 1e-12);
        assert!((v.azimuth() - PI / 2.0).abs() < 1e-10);
        // z = (1-T)/(1+T), azimuth = chi2 - chi1 (mod 2 pi), any gauge.
        for &(t, c1, c2) in &[(0.3, 0.7, 2.0), (0.75, -2.0, 1.5), (0.122, 5.0, 3.0)] {
            let v = BlochVector::from_state(&evolve_second_loop(t, c1, c2).unwrap()).unwrap();
            assert!((v.z - (1.0 - t) / (1.0 + t)).abs() < 1e-12);
            assert!(
                crate::angle::wrap_principal(v.azimuth() - (c2 - c1)).abs() < 1e-10,
                "t={t} c1={c1} c2={c2}"
            );
        }
    }

    #[test]
    fn zero_state_has_no_bloch_vector() {
        let s = PathState::new(
            num_complex::Complex64::new(0.0, 0.0),
            num_complex::Complex64::new(0.0, 0.0),
        );
        assert!(matches!(
            BlochVector::from_state(&s),
            Err(Error::ZeroState)
        ));
    }

    #[test]
    fn absorber_angle_endpoints_and_inverse() {
        assert_eq!(absorber_polar_angle(0.0), 0.0);
        assert!((absorber_polar_angle(1.0) - PI / 2.0).abs() < 1e-15);
        // Oracle: theta must invert through tan^2(theta/2) = T.
        let theta = absorber_polar_angle(0.122);
        assert!((theta - 0.672_075_384_133_835_3).abs() < 1e-12);
        assert!(((theta / 2.0).tan().powi(2) - 0.122).abs() < 1e-12);
        // cos(theta) = (1 - T)/(1 + T).
        assert!((theta.cos() - 0.878 / 1.122).abs() < 1e-12);
    }

    #[test]
    fn geodesic_rejects_antipodal_endpoints() {
        let a = BlochVector { x: 1.0, y: 0.0, z: 0.0 };
        let b = BlochVector { x: -1.0, y: 0.0, z: 0.0 };
        assert!(matches!(
            ArcSegment::geodesic(a, b),
            Err(Error::GeodesicUndefined)
        ));
    }

    #[test]
    fn disconnected_arcs_rejected() {
        let a = BlochVector { x: 1.0, y: 0.0, z: 0.0 };
        let b = BlochVector { x: 0.0, y: 1.0, z: 0.0 };
        let c = BlochVector { x: 0.0, y: 0.0, z: 1.0 };
        let arcs = vec![
            ArcSegment::geodesic(a, b).unwrap(),
            ArcSegment::geodesic(c, a).unwrap(),
        ];
        assert!(matches!(
            SpherePath::new(arcs, 16, false),
            Err(Error::DisconnectedPath { index: 0 })
        ));
    }

    #[test]
    fn antipodal_consecutive_points_report_their_index() {
        let pts = vec![
            BlochVector { x: 1.0, y: 0.0, z: 0.0 },
            BlochVector { x: 0.0, y: 1.0, z: 0.0 },
            BlochVector { x: 0.0, y: -1.0, z: 0.0 },
            BlochVector { x: 1.0, y: 0.0, z: 0.0 },
        ];
        assert!(matches!(
            raw_solid_angle(&pts),
            Err(Error::AntipodalPoints { index: 1 })
        ));
    }

    #[test]
    fn open_path_has_no_solid_angle() {
        let a = BlochVector { x: 1.0, y: 0.0, z: 0.0 };
        let b = BlochVector { x: 0.0, y: 1.0, z: 0.0 };
        let path = SpherePath::new(vec![ArcSegment::geodesic(a, b).unwrap()], 16, false).unwrap();
        assert!(matches!(signed_solid_angle(&path), Err(Error::OpenPath)));
    }

    #[test]
    fn octant_solid_angle() {
        // Equator quarter from q, geodesic to the pole, geodesic back to q:
        // one octant, traversed counter-clockwise, area +pi/2. Geodesic edges
        // make the fan exact at any chord count.
        let q = BlochVector { x: 1.0, y: 0.0, z: 0.0 };
        let yhat = BlochVector { x: 0.0, y: 1.0, z: 0.0 };
        let zhat = BlochVector { x: 0.0, y: 0.0, z: 1.0 };
        let arcs = vec![
            ArcSegment::latitude(PI / 2.0, 0.0, PI / 2.0),
            ArcSegment::geodesic(yhat, zhat).unwrap(),
            ArcSegment::geodesic(zhat, q).unwrap(),
        ];
        let path = SpherePath::new(arcs, 64, true).unwrap();
        let omega = signed_solid_angle(&path).unwrap();
        assert!((omega - PI / 2.0).abs() < 1e-12, "omega = {omega}");
    }

    #[test]
    fn degenerate_paths_enclose_nothing() {
        // Out and back along the same meridian (T = 0).
        let path = build_evolution_path(0.0, 2.0 * PI, 64).unwrap();
        assert!(signed_solid_angle(&path).unwrap().abs() < 1e-12);
        // dchi = 0: closure retraces the meridian.
        let path = build_evolution_path(0.5, 0.0, 64).unwrap();
        assert!(signed_solid_angle(&path).unwrap().abs() < 1e-12);
        // T = 1, dchi = pi/2: closure retraces the equator.
        let path = build_evolution_path(1.0, PI / 2.0, 64).unwrap();
        assert!(signed_solid_angle(&path).unwrap().abs() < 1e-9);
    }

    #[test]
    fn antipodal_closure_is_an_error() {
        assert!(matches!(
            build_evolution_path(1.0, PI, 64),
            Err(Error::GeodesicUndefined)
        ));
        assert!(matches!(
            build_evolution_path(1.0, 3.0 * PI, 64),
            Err(Error::GeodesicUndefined)
        ));
    }

    #[test]
    fn cyclic_cap_area_and_phase() {
        // Spherical cap: Omega = 2 pi (1 - cos theta) = 4 pi T / (1 + T).
        let path = build_evolution_path(0.122, 2.0 * PI, 1024).unwrap();
        let omega = signed_solid_angle(&path).unwrap();
        assert!((omega - 1.366_396_804_769_892).abs() < 1e-4, "omega = {omega}");
        let phase = geometric_phase_from_area(&path).unwrap();
        assert!((phase - (-0.683)).abs() < 1e-3, "phase = {phase}");
    }

    #[test]
    fn noncyclic_area_matches_state_engine() {
        // T = 0.5, dchi = pi/2: the algebraic route gives +0.0918809...
        let path = build_evolution_path(0.5, PI / 2.0, 2048).unwrap();
        let phase = geometric_phase_from_area(&path).unwrap();
        assert!((phase - 0.091_880_933_072_088_56).abs() < 1e-5, "phase = {phase}");
        // Counter-rotating lobe regime at dchi = 3 pi / 2, checked against
        // the compensated decomposition.
        let (c1, c2) = crate::state::compensated_shifts(0.5, 1.5 * PI).unwrap();
        let algebraic = crate::state::phase_decomposition(0.5, c1, c2)
            .unwrap()
            .geometric;
        let path = build_evolution_path(0.5, 1.5 * PI, 2048).unwrap();
        let phase = geometric_phase_from_area(&path).unwrap();
        assert!(
            crate::angle::wrap_principal(phase - algebraic).abs() < 1e-5,
            "{phase} vs {algebraic}"
        );
    }

    #[test]
    fn anchor_independence_of_fan() {
        let path = build_evolution_path(0.5, 1.5 * PI, 256).unwrap();
        let pts = path.polyline();
        let base = raw_solid_angle(&pts).unwrap();
        // Rotate the closed polyline to move the anchor to other vertices.
        let m = pts.len() - 1; // last point duplicates the first
        for &k in &[1usize, 57, 200, 400, m - 3] {
            let mut rotated: Vec<BlochVector> = Vec::with_capacity(pts.len());
            rotated.extend_from_slice(&pts[k..m]);
            rotated.extend_from_slice(&pts[..=k]);
            let got = raw_solid_angle(&rotated).unwrap();
            assert!((got - base).abs() < 1e-9, "anchor {k}: {got} vs {base}");
        }
    }

    #[test]
    fn winding_accumulates_cap_area_before_reduction() {
        // dchi = 3 pi winds the latitude once past 2 pi: the raw fan carries
        // one extra cap area 2 pi (1 - cos theta) relative to dchi = pi.
        let t = 0.122;
        let cap = 4.0 * PI * t / (1.0 + t);
        let raw3 = raw_solid_angle(&build_evolution_path(t, 3.0 * PI, 4096).unwrap().polyline())
            .unwrap();
        let raw1 = raw_solid_angle(&build_evolution_path(t, PI, 4096).unwrap().polyline())
            .unwrap();
        assert!((raw3 - raw1 - cap).abs() < 1e-5, "{raw3} - {raw1} vs {cap}");
    }

    #[test]
    fn equator_loop_with_exact_antipodal_sample() {
        // T = 1, dchi = 2 pi: the full equator passes exactly through the
        // anchor's antipode at even chord counts. The loop bounds a
        // hemisphere; the phase is pi mod 2 pi either way the sign falls.
        let path = build_evolution_path(1.0, 2.0 * PI, 4096).unwrap();
        let omega = signed_solid_angle(&path).unwrap();
        assert!((omega.abs() - 2.0 * PI).abs() < 1e-6, "omega = {omega}");
    }

    #[test]
    fn lobe_areas_add_up() {
        // Where cos(dchi) < 0 the closure geodesic re-crosses the latitude
        // circle at azimuth pi - dchi (mod 2 pi), on the arc for
        // dchi in (pi/2, pi) mod winding. Splitting the path there yields two
        // counter-rotating lobes whose signed areas sum to the total.
        for &(t, dchi) in &[(0.5, 0.8 * PI), (0.3, 0.7 * PI), (0.5, 2.7 * PI)] {
            let n = 4096;
            let theta = absorber_polar_angle(t);
            let q = BlochVector { x: 1.0, y: 0.0, z: 0.0 };
            let s = BlochVector::from_angles(theta, 0.0);
            let e = BlochVector::from_angles(theta, dchi);
            let phi_c = (PI - dchi).rem_euclid(2.0 * PI);
            assert!(phi_c < dchi, "crossing must lie on the latitude arc");
            let p_cross = BlochVector::from_angles(theta, phi_c);
            // Closure parameter of the re-crossing: sin((1-t) alpha) = sin(alpha).
            let alpha = e.dot(&q).clamp(-1.0, 1.0).acos();
            assert!(alpha > PI / 2.0);
            let t_cross = (2.0 * alpha - PI) / alpha;
            let on_closure = slerp(&e, &q, t_cross);
            assert!(on_closure.dist(&p_cross) < 1e-9);

            let lat = |a: f64, b: f64| {
                (0..=n)
                    .map(|i| BlochVector::from_angles(theta, a + (b - a) * i as f64 / n as f64))
                    .collect::<Vec<_>>()
            };
            let geo = |a: &BlochVector, b: &BlochVector| {
                (0..=n).map(|i| slerp(a, b, i as f64 / n as f64)).collect::<Vec<_>>()
            };

            // Whole path.
            let mut whole = geo(&q, &s);
            whole.extend(lat(0.0, dchi).into_iter().skip(1));
            whole.extend(geo(&e, &q).into_iter().skip(1));
            let total = raw_solid_angle(&whole).unwrap();

            // Far lobe: latitude phi_c -> dchi, closure e -> crossing.
            let mut lobe1 = lat(phi_c, dchi);
            lobe1.extend(
                (1..=n).map(|i| slerp(&e, &q, t_cross * i as f64 / n as f64)),
            );
            let a1 = raw_solid_angle(&lobe1).unwrap();

            // Near lobe: meridian up, latitude 0 -> phi_c, closure crossing -> q.
            let mut lobe2 = geo(&q, &s);
            lobe2.extend(lat(0.0, phi_c).into_iter().skip(1));
            lobe2.extend(
                (1..=n).map(|i| slerp(&e, &q, t_cross + (1.0 - t_cross) * i as f64 / n as f64)),
            );
            let a2 = raw_solid_angle(&lobe2).unwrap();

            assert!(a1 * a2 < 0.0, "lobes must be counter-rotating: {a1}, {a2}");
            assert!(
                (a1 + a2 - total).abs() < 1e-6,
                "t={t} dchi={dchi}: {a1} + {a2} != {total}"
            );
        }
    }

    #[test]
    fn path_csv_dump() {
        let path = build_evolution_path(0.5, PI, 8).unwrap();
        let csv = path.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "segment_index,kind,x,y,z");
        let first = lines.next().unwrap();
        assert!(first.starts_with("0,geodesic,1,0,"), "{first}");
        assert_eq!(csv.lines().count(), 1 + 3 * 8 + 1);
        assert!(csv.contains(",latitude,"));
    }
}
