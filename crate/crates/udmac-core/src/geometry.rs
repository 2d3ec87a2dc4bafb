//! Closed-form probability that a hovering UAV meets a returning UAV.
//!
//! A ground unit (GU) sits at the origin and charges UAVs. UAVs that fly home
//! to recharge can store-carry-and-forward (SCF) packets for the UAVs that are
//! still on task. For a non-returning UAV at distance `d` from the GU, the
//! probability of finding such a courier within a waiting time `t` equals the
//! measure of the courier positions that can reach its communication ball in
//! time, divided by the measure of the whole activity space.
//!
//! The activity space is a segment pair (1-D), an annulus at height `H` (2-D)
//! or a hemispherical shell (3-D). In every dimension the reachable region
//! first grows with `t` (the `Interior` case) and then saturates against the
//! scene boundary (the `Clipped` case).

use crate::error::{Result, UdmacError};
use std::f64::consts::PI;

/// Dimensionality of the UAV activity space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    One,
    Two,
    Three,
}

impl Dimension {
    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Dimension::One),
            2 => Ok(Dimension::Two),
            3 => Ok(Dimension::Three),
            other => Err(UdmacError::Config(format!(
                "dimension must be 1, 2 or 3 (got {other})"
            ))),
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Dimension::One => 1,
            Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }
}

/// Scene shared by all probability evaluations.
///
/// Distances are kilometres; the speed is stored in km/s (configuration
/// accepts km/h and converts here, since waiting times are in seconds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneGeometry {
    radius_km: f64,
    comm_range_km: f64,
    height_km: f64,
    speed_kms: f64,
    dim: Dimension,
}

impl SceneGeometry {
    /// Build a scene, taking the UAV speed in km/h.
    pub fn new(
        dim: Dimension,
        radius_km: f64,
        comm_range_km: f64,
        height_km: f64,
        speed_kmh: f64,
    ) -> Result<Self> {
        if !(radius_km.is_finite() && comm_range_km.is_finite() && height_km.is_finite()) {
            return Err(UdmacError::Scene("parameters must be finite".into()));
        }
        if !(comm_range_km > 0.0 && comm_range_km < radius_km) {
            return Err(UdmacError::Scene(format!(
                "need 0 < r < R (r = {comm_range_km}, R = {radius_km})"
            )));
        }
        if speed_kmh <= 0.0 || !speed_kmh.is_finite() {
            return Err(UdmacError::Scene(format!("speed must be positive (got {speed_kmh} km/h)")));
        }
        match dim {
            Dimension::One | Dimension::Two => {
                // The GU communication ball must intersect the activity plane.
                if !(0.0..comm_range_km).contains(&height_km) {
                    return Err(UdmacError::Scene(format!(
                        "need 0 <= H < r in 1-D/2-D (H = {height_km}, r = {comm_range_km})"
                    )));
                }
            }
            Dimension::Three => {}
        }
        Ok(SceneGeometry {
            radius_km,
            comm_range_km,
            height_km,
            speed_kms: speed_kmh / 3600.0,
            dim,
        })
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }
    pub fn radius_km(&self) -> f64 {
        self.radius_km
    }
    pub fn comm_range_km(&self) -> f64 {
        self.comm_range_km
    }
    pub fn height_km(&self) -> f64 {
        self.height_km
    }
    pub fn speed_kms(&self) -> f64 {
        self.speed_kms
    }

    /// In-plane radius of the scene boundary (1-D/2-D) or the shell radius (3-D).
    pub fn outer_extent_km(&self) -> f64 {
        match self.dim {
            Dimension::One | Dimension::Two => {
                (self.radius_km * self.radius_km - self.height_km * self.height_km).sqrt()
            }
            Dimension::Three => self.radius_km,
        }
    }

    /// In-plane radius of the GU exclusion (1-D/2-D) or the ball radius (3-D).
    pub fn inner_extent_km(&self) -> f64 {
        match self.dim {
            Dimension::One | Dimension::Two => {
                (self.comm_range_km * self.comm_range_km - self.height_km * self.height_km).sqrt()
            }
            Dimension::Three => self.comm_range_km,
        }
    }

    /// Distance from the UAV position to the scene boundary along the growth
    /// direction of the reachable region.
    fn boundary_reach_km(&self, d: f64) -> f64 {
        match self.dim {
            Dimension::One | Dimension::Two => {
                self.outer_extent_km() - (d * d - self.height_km * self.height_km).sqrt()
            }
            Dimension::Three => self.radius_km - d,
        }
    }

    fn check_distance(&self, d: f64) -> Result<()> {
        if !d.is_finite() || d <= self.comm_range_km || d > self.radius_km {
            return Err(UdmacError::Query(format!(
                "need r < d <= R (d = {d}, r = {}, R = {})",
                self.comm_range_km, self.radius_km
            )));
        }
        if matches!(self.dim, Dimension::One | Dimension::Two) {
            let in_plane = (d * d - self.height_km * self.height_km).sqrt();
            if in_plane < self.comm_range_km {
                return Err(UdmacError::Query(format!(
                    "in-plane distance sqrt(d^2-H^2) = {in_plane} is below r = {}; \
                     the tangent half-angle does not exist",
                    self.comm_range_km
                )));
            }
        }
        Ok(())
    }

    /// Waiting time at which the reachable region first touches the scene
    /// boundary. For `t` up to this value the `Interior` branch applies,
    /// beyond it the `Clipped` branch.
    pub fn case_boundary_time(&self, d: f64) -> Result<f64> {
        self.check_distance(d)?;
        Ok(((self.boundary_reach_km(d) - self.comm_range_km) / self.speed_kms).max(0.0))
    }
}

/// One probability query: UAV-to-GU distance and waiting time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScfQuery {
    pub distance_km: f64,
    pub wait_s: f64,
}

impl ScfQuery {
    pub fn new(distance_km: f64, wait_s: f64) -> Self {
        ScfQuery { distance_km, wait_s }
    }

    fn validate(&self, scene: &SceneGeometry) -> Result<()> {
        if self.wait_s < 0.0 || !self.wait_s.is_finite() {
            return Err(UdmacError::Query(format!(
                "waiting time must be >= 0 (got {})",
                self.wait_s
            )));
        }
        scene.check_distance(self.distance_km)
    }
}

/// Which side of the scene boundary the reachable region is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseBranch {
    /// The region has not reached the boundary; it still grows with `t`.
    Interior,
    /// The region is clipped by the boundary; it no longer depends on `t`.
    Clipped,
}

/// One named area (km^2) or volume (km^3) component of the reachable region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionPart {
    pub name: &'static str,
    pub measure: f64,
}

/// Full breakdown of one probability evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EncounterRegion {
    /// Tangent half-angle of the GU line of sight, sin(theta) = r / dist.
    pub theta: f64,
    /// Reach half-angle, cos(alpha) = r / (r + v*t).
    pub alpha: f64,
    /// Named components of the region (lengths, areas or volumes).
    pub parts: Vec<RegionPart>,
    /// Total measure of the reachable region.
    pub region_measure: f64,
    /// Measure of the whole activity space (minus the GU exclusion).
    pub space_measure: f64,
    pub case_branch: CaseBranch,
    /// region_measure / space_measure.
    pub probability: f64,
}

fn branch_for(scene: &SceneGeometry, q: &ScfQuery) -> CaseBranch {
    let reach = scene.comm_range_km + scene.speed_kms * q.wait_s;
    if reach <= scene.boundary_reach_km(q.distance_km) {
        CaseBranch::Interior
    } else {
        CaseBranch::Clipped
    }
}

/// Probability of meeting a courier on a segment-pair activity space.
pub fn scf_probability_1d(scene: &SceneGeometry, q: &ScfQuery) -> Result<EncounterRegion> {
    if scene.dim != Dimension::One {
        return Err(UdmacError::Query("scene is not 1-D".into()));
    }
    q.validate(scene)?;
    let r = scene.comm_range_km;
    let vt = scene.speed_kms * q.wait_s;
    let space = 2.0 * (scene.outer_extent_km() - scene.inner_extent_km());
    let case_branch = branch_for(scene, q);
    let length = match case_branch {
        CaseBranch::Interior => 2.0 * r + vt,
        CaseBranch::Clipped => r + scene.boundary_reach_km(q.distance_km),
    };
    let theta = (r / in_plane_dist(scene, q.distance_km)).min(1.0).asin();
    let alpha = (r / (r + vt)).acos();
    Ok(EncounterRegion {
        theta,
        alpha,
        parts: vec![RegionPart { name: "S1", measure: length }],
        region_measure: length,
        space_measure: space,
        case_branch,
        probability: length / space,
    })
}

fn in_plane_dist(scene: &SceneGeometry, d: f64) -> f64 {
    (d * d - scene.height_km * scene.height_km).sqrt()
}

/// Probability of meeting a courier on an annulus at height `H`.
pub fn scf_probability_2d(scene: &SceneGeometry, q: &ScfQuery) -> Result<EncounterRegion> {
    if scene.dim != Dimension::Two {
        return Err(UdmacError::Query("scene is not 2-D".into()));
    }
    q.validate(scene)?;
    let (big_r, r, h) = (scene.radius_km, scene.comm_range_km, scene.height_km);
    let vt = scene.speed_kms * q.wait_s;
    let rho = in_plane_dist(scene, q.distance_km);
    let theta = (r / rho).min(1.0).asin();
    let alpha = (r / (r + vt)).acos();
    // Note the H-independence: pi*((R^2-H^2) - (r^2-H^2)) = pi*(R^2 - r^2).
    let space = PI * (big_r * big_r - r * r);
    let case_branch = branch_for(scene, q);
    let (parts, region) = match case_branch {
        CaseBranch::Interior => {
            let reach = r + vt;
            let s1 = (0.25 - theta / (2.0 * PI)) * PI * r * r;
            let s2 = 0.5 * r * reach * alpha.sin();
            let s3 = (PI / 2.0 + theta - alpha) / (2.0 * PI) * PI * reach * reach;
            (
                vec![
                    RegionPart { name: "S1", measure: s1 },
                    RegionPart { name: "S2", measure: s2 },
                    RegionPart { name: "S3", measure: s3 },
                ],
                2.0 * (s1 + s2 + s3),
            )
        }
        CaseBranch::Clipped => {
            let s1 = (0.25 - theta / (2.0 * PI)) * PI * r * r;
            let s2 = theta / (2.0 * PI) * PI * (big_r * big_r - h * h);
            let s3 = 0.5 * r * rho * theta.cos();
            (
                vec![
                    RegionPart { name: "S1", measure: s1 },
                    RegionPart { name: "S2", measure: s2 },
                    RegionPart { name: "S3", measure: s3 },
                ],
                2.0 * (s1 + s2 - s3),
            )
        }
    };
    Ok(EncounterRegion {
        theta,
        alpha,
        parts,
        region_measure: region,
        space_measure: space,
        case_branch,
        probability: region / space,
    })
}

/// Probability of meeting a courier in a hemispherical shell.
pub fn scf_probability_3d(scene: &SceneGeometry, q: &ScfQuery) -> Result<EncounterRegion> {
    if scene.dim != Dimension::Three {
        return Err(UdmacError::Query("scene is not 3-D".into()));
    }
    q.validate(scene)?;
    let (big_r, r) = (scene.radius_km, scene.comm_range_km);
    let d = q.distance_km;
    let vt = scene.speed_kms * q.wait_s;
    let theta = (r / d).min(1.0).asin();
    let alpha = (r / (r + vt)).acos();
    let space = 2.0 / 3.0 * PI * (big_r.powi(3) - r.powi(3));
    // Spherical cap of the communication ball beyond the tangent plane.
    let v1 = PI / 3.0 * r.powi(3) * (1.0 - r / d).powi(2) * (2.0 + r / d);
    let case_branch = branch_for(scene, q);
    let (parts, region) = match case_branch {
        CaseBranch::Interior => {
            let reach = r + vt;
            let beta = alpha - theta;
            // Conical frustum between the two cap base circles.
            let height = r * theta.sin() + reach * beta.sin();
            let (r1, r2) = (r * theta.cos(), reach * beta.cos());
            let v2 = PI / 3.0 * height * (r1 * r1 + r2 * r2 + r1 * r2);
            let v3 = PI / 3.0 * reach.powi(3) * (1.0 - beta.sin()).powi(2) * (2.0 + beta.sin());
            (
                vec![
                    RegionPart { name: "V1", measure: v1 },
                    RegionPart { name: "V2", measure: v2 },
                    RegionPart { name: "V3", measure: v3 },
                ],
                v1 + v2 + v3,
            )
        }
        CaseBranch::Clipped => {
            let v2 = PI / 3.0
                * (2.0 * big_r.powi(3) * d * d * (d - (d * d - r * r).sqrt())
                    - r * r * (d * d - r * r).powi(2))
                / d.powi(3);
            (
                vec![
                    RegionPart { name: "V1", measure: v1 },
                    RegionPart { name: "V2", measure: v2 },
                ],
                v1 + v2,
            )
        }
    };
    Ok(EncounterRegion {
        theta,
        alpha,
        parts,
        region_measure: region,
        space_measure: space,
        case_branch,
        probability: region / space,
    })
}

/// Probability as a function of waiting time for one fixed UAV position.
///
/// This is the per-UAV term summed by the throughput model when it counts the
/// couriersable population within two hops.
#[derive(Debug, Clone, Copy)]
pub struct PositionProbability {
    scene: SceneGeometry,
    distance_km: f64,
}

impl PositionProbability {
    pub fn distance_km(&self) -> f64 {
        self.distance_km
    }

    /// Full breakdown at waiting time `t`.
    pub fn region_at(&self, wait_s: f64) -> Result<EncounterRegion> {
        let q = ScfQuery::new(self.distance_km, wait_s);
        match self.scene.dim {
            Dimension::One => scf_probability_1d(&self.scene, &q),
            Dimension::Two => scf_probability_2d(&self.scene, &q),
            Dimension::Three => scf_probability_3d(&self.scene, &q),
        }
    }

    /// Probability value at waiting time `t`.
    pub fn at(&self, wait_s: f64) -> Result<f64> {
        Ok(self.region_at(wait_s)?.probability)
    }
}

/// Dimension dispatch from a Cartesian position.
///
/// The position must lie in the activity region: on the axis at height `H`
/// for 1-D, in the plane at height `H` for 2-D, in the upper half-space for
/// 3-D. The GU sits at the origin, so `d = |position|`.
pub fn scf_probability(scene: &SceneGeometry, position: [f64; 3]) -> Result<PositionProbability> {
    let [x, y, z] = position;
    match scene.dim {
        Dimension::One => {
            if y != 0.0 || z != scene.height_km {
                return Err(UdmacError::Query(format!(
                    "1-D positions lie on the axis at height H (got y = {y}, z = {z})"
                )));
            }
        }
        Dimension::Two => {
            if z != scene.height_km {
                return Err(UdmacError::Query(format!(
                    "2-D positions lie in the plane at height H (got z = {z})"
                )));
            }
        }
        Dimension::Three => {
            if z < 0.0 {
                return Err(UdmacError::Query(format!(
                    "3-D positions lie in the upper half-space (got z = {z})"
                )));
            }
        }
    }
    let d = (x * x + y * y + z * z).sqrt();
    scene.check_distance(d)?;
    Ok(PositionProbability { scene: *scene, distance_km: d })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene(dim: Dimension, h: f64) -> SceneGeometry {
        SceneGeometry::new(dim, 5.0, 0.1, h, 18.0).unwrap()
    }

    #[test]
    fn speed_is_converted_to_km_per_s() {
        let s = scene(Dimension::One, 0.0);
        assert!((s.speed_kms() - 0.005).abs() < 1e-15);
    }

    #[test]
    fn scene_validation() {
        assert!(SceneGeometry::new(Dimension::One, 5.0, 0.0, 0.0, 18.0).is_err());
        assert!(SceneGeometry::new(Dimension::One, 5.0, 5.0, 0.0, 18.0).is_err());
        assert!(SceneGeometry::new(Dimension::One, 5.0, 0.1, 0.1, 18.0).is_err()); // H = r
        assert!(SceneGeometry::new(Dimension::Three, 5.0, 0.1, 0.3, 18.0).is_ok()); // H unused
        assert!(SceneGeometry::new(Dimension::Two, 5.0, 0.1, 0.05, -1.0).is_err());
    }

    #[test]
    fn query_domain() {
        let s = scene(Dimension::One, 0.0);
        assert!(s.case_boundary_time(0.05).is_err()); // d <= r
        assert!(s.case_boundary_time(0.1).is_err()); // d = r rejected, not clamped
        assert!(s.case_boundary_time(5.1).is_err()); // d > R
        assert!(s.case_boundary_time(5.0).is_ok());
        let s2 = scene(Dimension::Two, 0.05);
        // sqrt(d^2 - H^2) < r: d just above r but below sqrt(r^2 + H^2)
        assert!(s2.case_boundary_time(0.105).is_err());
        assert!(s2.case_boundary_time(0.12).is_ok());
        let q = ScfQuery::new(2.5, -1.0);
        assert!(scf_probability_1d(&scene(Dimension::One, 0.0), &q).is_err());
    }

    #[test]
    fn case_boundary_time_direct_evaluation() {
        let s = scene(Dimension::One, 0.0);
        // (2.5 - 0.1) / 0.005
        assert!((s.case_boundary_time(2.5).unwrap() - 480.0).abs() < 1e-9);
        // boundary reach below r clamps to zero
        assert_eq!(s.case_boundary_time(4.95).unwrap(), 0.0);
        let s3 = scene(Dimension::Three, 0.0);
        assert!((s3.case_boundary_time(2.5).unwrap() - 480.0).abs() < 1e-9);
    }

    #[test]
    fn one_dimensional_pins() {
        let s = scene(Dimension::One, 0.0);
        let p0 = scf_probability_1d(&s, &ScfQuery::new(2.5, 0.0)).unwrap();
        assert!((p0.probability - 0.2 / 9.8).abs() < 1e-15);
        assert_eq!(p0.case_branch, CaseBranch::Interior);

        // both branches meet at t* = 480 s
        let pi = scf_probability_1d(&s, &ScfQuery::new(2.5, 480.0)).unwrap();
        assert_eq!(pi.case_branch, CaseBranch::Interior);
        let pc = scf_probability_1d(&s, &ScfQuery::new(2.5, 480.0 + 1e-9)).unwrap();
        assert_eq!(pc.case_branch, CaseBranch::Clipped);
        assert!((pi.probability - pc.probability).abs() <= 1e-9 * pi.probability);
        assert!((pi.probability - 2.6 / 9.8).abs() < 1e-15);

        // saturated: identical to the boundary value
        let ps = scf_probability_1d(&s, &ScfQuery::new(2.5, 600.0)).unwrap();
        assert_eq!(ps.probability, pc.probability);

        // independent transcription pin at H = 0.05
        let sh = scene(Dimension::One, 0.05);
        let ph = scf_probability_1d(&sh, &ScfQuery::new(2.5, 300.0)).unwrap();
        assert!((ph.probability - 0.17300518823565073).abs() < 1e-15);
    }

    #[test]
    fn two_dimensional_pins() {
        let s = scene(Dimension::Two, 0.05);
        // t = 0 collapses to the communication disk
        let p0 = scf_probability_2d(&s, &ScfQuery::new(2.5, 0.0)).unwrap();
        let expect = 0.01 / (25.0 - 0.01);
        assert!((p0.probability - expect).abs() <= 1e-12 * expect);

        // interior-case pin (independent transcription)
        let p = scf_probability_2d(&s, &ScfQuery::new(2.5, 300.0)).unwrap();
        assert_eq!(p.case_branch, CaseBranch::Interior);
        assert!((p.probability - 0.005573252638740088).abs() < 1e-15);

        // clipped case is t-independent
        let pa = scf_probability_2d(&s, &ScfQuery::new(4.9, 600.0)).unwrap();
        let pb = scf_probability_2d(&s, &ScfQuery::new(4.9, 6000.0)).unwrap();
        assert_eq!(pa.case_branch, CaseBranch::Clipped);
        assert_eq!(pa.probability, pb.probability);
        assert!((pa.probability - 4.5659409302376854e-4).abs() < 1e-15);
    }

    #[test]
    fn three_dimensional_pins() {
        let s = scene(Dimension::Three, 0.0);
        let p0 = scf_probability_3d(&s, &ScfQuery::new(2.5, 0.0)).unwrap();
        let expect = 2.0 * 0.1f64.powi(3) / (125.0 - 0.001);
        assert!((p0.probability - expect).abs() <= 1e-12 * expect);
        // at t = 0 the frustum vanishes and the caps close up to the full ball
        assert!(p0.parts[1].measure.abs() < 1e-18);

        let pi = scf_probability_3d(&s, &ScfQuery::new(2.5, 300.0)).unwrap();
        assert_eq!(pi.case_branch, CaseBranch::Interior);
        assert!((pi.probability - 3.4828654686859e-4).abs() < 1e-15);

        let pc = scf_probability_3d(&s, &ScfQuery::new(2.5, 600.0)).unwrap();
        assert_eq!(pc.case_branch, CaseBranch::Clipped);
        assert!((pc.probability - 7.081659215836431e-4).abs() < 1e-15);
        assert_eq!(
            pc.probability,
            scf_probability_3d(&s, &ScfQuery::new(2.5, 1e6)).unwrap().probability
        );
    }

    #[test]
    fn parts_are_nonnegative_and_bounded() {
        for (dim, h) in [(Dimension::One, 0.05), (Dimension::Two, 0.05), (Dimension::Three, 0.0)] {
            let s = scene(dim, h);
            for d in [0.12, 0.5, 1.0, 2.5, 4.0, 4.99] {
                for t in [0.0, 1.0, 60.0, 300.0, 900.0, 1e4] {
                    let q = ScfQuery::new(d, t);
                    let reg = match dim {
                        Dimension::One => scf_probability_1d(&s, &q),
                        Dimension::Two => scf_probability_2d(&s, &q),
                        Dimension::Three => scf_probability_3d(&s, &q),
                    }
                    .unwrap();
                    for part in &reg.parts {
                        assert!(part.measure >= -1e-18, "{:?} d={d} t={t} {:?}", dim, part);
                    }
                    assert!(reg.region_measure <= reg.space_measure * (1.0 + 1e-12));
                    assert!((0.0..=1.0).contains(&reg.probability), "p = {}", reg.probability);
                    assert!(reg.theta >= 0.0 && reg.theta <= PI / 2.0);
                    assert!(reg.alpha >= 0.0 && reg.alpha < PI / 2.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn monotone_in_wait_time_then_saturated() {
        for (dim, h) in [(Dimension::One, 0.05), (Dimension::Two, 0.05), (Dimension::Three, 0.0)] {
            let s = scene(dim, h);
            for d in [0.5, 2.5, 4.5] {
                let pp = |t: f64| {
                    let q = ScfQuery::new(d, t);
                    match dim {
                        Dimension::One => scf_probability_1d(&s, &q),
                        Dimension::Two => scf_probability_2d(&s, &q),
                        Dimension::Three => scf_probability_3d(&s, &q),
                    }
                    .unwrap()
                    .probability
                };
                let mut last = 0.0;
                for t in (0..=40).map(|k| k as f64 * 30.0) {
                    let p = pp(t);
                    assert!(p >= last - 1e-15, "{dim:?} d={d} t={t}: {p} < {last}");
                    last = p;
                }
                let tstar = s.case_boundary_time(d).unwrap();
                assert_eq!(pp(tstar + 1.0), pp(tstar + 1e4));
            }
        }
    }

    #[test]
    fn cross_dimension_ordering() {
        // at matched parameters and interior d the probability drops with the
        // dimension of the activity space
        for d in [1.0, 2.5, 4.0] {
            for t in [0.0, 120.0, 300.0] {
                let p1 = scf_probability_1d(&scene(Dimension::One, 0.05), &ScfQuery::new(d, t))
                    .unwrap()
                    .probability;
                let p2 = scf_probability_2d(&scene(Dimension::Two, 0.05), &ScfQuery::new(d, t))
                    .unwrap()
                    .probability;
                let p3 = scf_probability_3d(&scene(Dimension::Three, 0.05), &ScfQuery::new(d, t))
                    .unwrap()
                    .probability;
                assert!(p1 > p2 && p2 > p3, "d={d} t={t}: {p1} {p2} {p3}");
            }
        }
    }

    #[test]
    fn dispatch_matches_direct_evaluation() {
        let s1 = scene(Dimension::One, 0.05);
        let f = scf_probability(&s1, [2.5, 0.0, 0.05]).unwrap();
        let d = (2.5f64 * 2.5 + 0.05 * 0.05).sqrt();
        let direct = scf_probability_1d(&s1, &ScfQuery::new(d, 120.0)).unwrap();
        assert_eq!(f.at(120.0).unwrap(), direct.probability);

        let s3 = scene(Dimension::Three, 0.0);
        let f3 = scf_probability(&s3, [0.0, 0.0, 2.5]).unwrap();
        let direct3 = scf_probability_3d(&s3, &ScfQuery::new(2.5, 300.0)).unwrap();
        assert_eq!(f3.at(300.0).unwrap(), direct3.probability);

        let s2 = scene(Dimension::Two, 0.05);
        let f2 = scf_probability(&s2, [1.5, 2.0, 0.05]).unwrap();
        let d2 = (1.5f64 * 1.5 + 4.0 + 0.0025).sqrt();
        assert_eq!(
            f2.at(60.0).unwrap(),
            scf_probability_2d(&s2, &ScfQuery::new(d2, 60.0)).unwrap().probability
        );

        // positions outside the activity region are rejected
        assert!(scf_probability(&s1, [2.5, 0.1, 0.05]).is_err());
        assert!(scf_probability(&s2, [1.5, 2.0, 0.0]).is_err());
        assert!(scf_probability(&s3, [0.0, 0.0, -2.5]).is_err());
    }
}
