use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

/// Which angles count as being in front of an array.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hemisphere {
    /// `|theta| < pi/2`.
    #[default]
    Open,
    /// `|theta| <= pi/2`; admits endfire links such as a collinear Tx-RIS-Rx.
    Closed,
}

/// Node positions and array orientations in the plane.
#[derive(Clone, Debug, PartialEq)]
pub struct Placement<T: Real> {
    pub rx_position: Point2<T>,
    pub ris_position: Point2<T>,
    /// Index 0 is the Tx of interest, the rest are interferers.
    pub tx_positions: Vec<Point2<T>>,
    /// Direction of the Rx array normal, radians from +x.
    pub rx_array_normal: T,
    /// Direction of the RIS array normal, radians from +x.
    pub ris_array_normal: T,
    pub n_rx_antennas: usize,
    pub n_ris_elements: usize,
    pub hemisphere: Hemisphere,
}

/// Distances and angles of the two links leaving one transmitter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TxLinks<T: Real> {
    /// Tx to Rx distance `d_i`.
    pub rx_distance: T,
    /// Tx to RIS distance `d_gamma_i`.
    pub ris_distance: T,
    /// Arrival angle at the Rx array.
    pub rx_arrival: T,
    /// Arrival angle at the RIS.
    pub ris_arrival: T,
}

/// Everything channel synthesis needs to know about the layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Geometry<T: Real> {
    pub tx: Vec<TxLinks<T>>,
    /// RIS to Rx distance `d_alpha`.
    pub ris_rx_distance: T,
    /// Arrival angle at the Rx from the RIS (`theta_alpha`).
    pub rx_arrival_from_ris: T,
    /// Departure angle at the RIS toward the Rx (`theta_beta`).
    pub ris_departure: T,
    pub n_rx_antennas: usize,
    pub n_ris_elements: usize,
}

impl<T: Real> Geometry<T> {
    pub fn n_transmitters(&self) -> usize {
        self.tx.len()
    }
}

fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::two_pi();
    let mut w = a % two_pi;
    if w > T::pi() {
        w -= two_pi;
    } else if w <= -T::pi() {
        w += two_pi;
    }
    w
}

fn bearing<T: Real>(from: &Point2<T>, to: &Point2<T>) -> T {
    let d = to - from;
    d.y.atan2(d.x)
}

fn distance<T: Real>(a: &Point2<T>, b: &Point2<T>, what: &str) -> Result<T> {
    let d = (b - a).norm();
    if d > T::zero() && d.is_finite() {
        Ok(d)
    } else {
        Err(Error::Geometry(format!("{what}: coincident or invalid positions")))
    }
}

fn check_front<T: Real>(angle: T, hemisphere: Hemisphere, link: &str) -> Result<T> {
    let limit = T::frac_pi_2();
    let ok = match hemisphere {
        Hemisphere::Open => angle.abs() < limit,
        Hemisphere::Closed => angle.abs() <= limit + T::lit(1e-9),
    };
    if ok {
        Ok(angle)
    } else {
        Err(Error::FrontHemisphere {
            link: link.to_string(),
            angle_deg: angle.as_f64().to_degrees(),
        })
    }
}

/// Euclidean distances plus signed angles of each link against the normal of
/// the array that receives (or, for the RIS toward the Rx, launches) it.
pub fn resolve_geometry<T: Real>(p: &Placement<T>) -> Result<Geometry<T>> {
    if p.n_rx_antennas == 0 || p.n_ris_elements == 0 {
        return Err(Error::InvalidParameter(
            "array sizes must be at least one element".into(),
        ));
    }
    if p.tx_positions.is_empty() {
        return Err(Error::InvalidParameter("no transmitters placed".into()));
    }
    let angle_at = |origin: &Point2<T>, normal: T, target: &Point2<T>, link: &str| {
        check_front(wrap_angle(bearing(origin, target) - normal), p.hemisphere, link)
    };

    let ris_rx_distance = distance(&p.ris_position, &p.rx_position, "RIS-Rx")?;
    let rx_arrival_from_ris = angle_at(&p.rx_position, p.rx_array_normal, &p.ris_position, "Rx<-RIS")?;
    let ris_departure = angle_at(&p.ris_position, p.ris_array_normal, &p.rx_position, "RIS->Rx")?;

    let mut tx = Vec::with_capacity(p.tx_positions.len());
    for (i, pos) in p.tx_positions.iter().enumerate() {
        let rx_distance = distance(pos, &p.rx_position, &format!("Tx{i}-Rx"))?;
        let ris_distance = distance(pos, &p.ris_position, &format!("Tx{i}-RIS"))?;
        for (j, other) in p.tx_positions.iter().enumerate().skip(i + 1) {
            distance(pos, other, &format!("Tx{i}-Tx{j}"))?;
        }
        tx.push(TxLinks {
            rx_distance,
            ris_distance,
            rx_arrival: angle_at(&p.rx_position, p.rx_array_normal, pos, &format!("Rx<-Tx{i}"))?,
            ris_arrival: angle_at(&p.ris_position, p.ris_array_normal, pos, &format!("RIS<-Tx{i}"))?,
        });
    }

    Ok(Geometry {
        tx,
        ris_rx_distance,
        rx_arrival_from_ris,
        ris_departure,
        n_rx_antennas: p.n_rx_antennas,
        n_ris_elements: p.n_ris_elements,
    })
}

/// Normal direction that centres the smallest arc containing every bearing
/// from `origin` to `targets`. Returns `None` when the arc exceeds a half
/// turn, i.e. no orientation keeps all targets in the closed front hemisphere.
pub fn centered_normal<T: Real>(origin: &Point2<T>, targets: &[Point2<T>]) -> Option<T> {
    let mut bearings: Vec<T> = targets.iter().map(|t| bearing(origin, t)).collect();
    if bearings.is_empty() {
        return None;
    }
    bearings.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    // The complement of the widest gap between consecutive bearings is the
    // smallest covering arc.
    let n = bearings.len();
    let mut widest = T::zero();
    let mut start = 0;
    for i in 0..n {
        let next = if i + 1 < n { bearings[i + 1] } else { bearings[0] + T::two_pi() };
        let gap = next - bearings[i];
        if gap > widest {
            widest = gap;
            start = (i + 1) % n;
        }
    }
    let span = T::two_pi() - widest;
    if n == 1 {
        return Some(bearings[0]);
    }
    if span > T::pi() + T::lit(1e-12) {
        return None;
    }
    Some(wrap_angle(bearings[start] + span / T::lit(2.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn polar(r: f64, deg: f64) -> Point2<f64> {
        Point2::new(r * deg.to_radians().cos(), r * deg.to_radians().sin())
    }

    fn simple(tx: Vec<Point2<f64>>) -> Placement<f64> {
        Placement {
            rx_position: Point2::origin(),
            ris_position: Point2::new(1.0, 0.0),
            tx_positions: tx,
            rx_array_normal: 0.0,
            ris_array_normal: PI,
            n_rx_antennas: 4,
            n_ris_elements: 8,
            hemisphere: Hemisphere::Open,
        }
    }

    #[test]
    fn unit_distance_at_sixty_degrees() {
        let g = resolve_geometry(&simple(vec![polar(1.0, 60.0)])).unwrap();
        assert!((g.tx[0].rx_distance - 1.0).abs() < 1e-12);
        assert!((g.tx[0].rx_arrival - 60f64.to_radians()).abs() < 1e-12);
        // RIS faces -x; Tx0 sits 60 degrees off that normal on the other side.
        assert!((g.tx[0].ris_arrival + 60f64.to_radians()).abs() < 1e-12);
        assert!((g.tx[0].ris_distance - 1.0).abs() < 1e-12);
    }

    #[test]
    fn broadside_ris_link() {
        let g = resolve_geometry(&simple(vec![polar(1.0, 60.0)])).unwrap();
        assert_eq!(g.rx_arrival_from_ris, 0.0);
        assert!(g.ris_departure.abs() < 1e-15);
        assert_eq!(g.ris_rx_distance, 1.0);
    }

    #[test]
    fn ring_interferer_distance() {
        let mut p = simple(vec![polar(6.0, 75.0)]);
        p.rx_array_normal = 60f64.to_radians();
        p.ris_array_normal = 120f64.to_radians();
        let g = resolve_geometry(&p).unwrap();
        assert!((g.tx[0].rx_distance - 6.0).abs() < 1e-12);
    }

    #[test]
    fn coincident_positions_fail() {
        let err = resolve_geometry(&simple(vec![Point2::new(1.0, 0.0)])).unwrap_err();
        assert!(matches!(err, Error::Geometry(_)));
        let err = resolve_geometry(&simple(vec![polar(1.0, 60.0), polar(1.0, 60.0)])).unwrap_err();
        assert!(matches!(err, Error::Geometry(_)));
    }

    #[test]
    fn back_hemisphere_fails() {
        let err = resolve_geometry(&simple(vec![polar(6.0, 135.0)])).unwrap_err();
        assert!(matches!(err, Error::FrontHemisphere { .. }));
    }

    #[test]
    fn endfire_needs_closed_hemisphere() {
        let mut p = simple(vec![Point2::new(2.0, 0.0)]);
        p.ris_position = Point2::new(0.5, 0.0);
        p.ris_array_normal = FRAC_PI_2;
        assert!(matches!(resolve_geometry(&p), Err(Error::FrontHemisphere { .. })));
        p.hemisphere = Hemisphere::Closed;
        let g = resolve_geometry(&p).unwrap();
        assert!((g.ris_departure.abs() - FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn reflection_negates_angles_and_keeps_distances() {
        let mut p = simple(vec![polar(1.0, 60.0), polar(6.0, 75.0)]);
        p.rx_array_normal = 60f64.to_radians();
        p.ris_array_normal = 120f64.to_radians();
        let mut q = p.clone();
        let flip = |v: &Point2<f64>| Point2::new(v.x, -v.y);
        q.rx_position = flip(&p.rx_position);
        q.ris_position = flip(&p.ris_position);
        q.tx_positions = p.tx_positions.iter().map(flip).collect();
        q.rx_array_normal = -p.rx_array_normal;
        q.ris_array_normal = -p.ris_array_normal;
        let (a, b) = (resolve_geometry(&p).unwrap(), resolve_geometry(&q).unwrap());
        for (x, y) in a.tx.iter().zip(&b.tx) {
            assert_eq!(x.rx_distance, y.rx_distance);
            assert_eq!(x.ris_distance, y.ris_distance);
            assert!((x.rx_arrival + y.rx_arrival).abs() < 1e-12);
            assert!((x.ris_arrival + y.ris_arrival).abs() < 1e-12);
        }
    }

    #[test]
    fn centered_normal_spans_default_layout() {
        let targets = [
            Point2::new(1.0, 0.0),
            polar(1.0, 60.0),
            polar(6.0, 5.0),
            polar(6.0, 75.0),
            polar(6.0, 135.0),
        ];
        let n = centered_normal(&Point2::origin(), &targets).unwrap();
        assert!((n - 67.5f64.to_radians()).abs() < 1e-12);
        let all_around = [Point2::new(1.0, 0.0), Point2::new(-1.0, 0.1), Point2::new(0.0, -1.0)];
        assert!(centered_normal(&Point2::origin(), &all_around).is_none());
    }
}
