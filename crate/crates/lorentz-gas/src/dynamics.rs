//! Exact event-driven billiard flow: a unit-speed point particle in the
//! cubic unit cell [-1/2, 1/2]^d with a spherical scatterer of radius r
//! centered at the origin, periodic wrapping, and integer bookkeeping of
//! the accumulated lattice displacement.
//!
//! The march advances cell by cell: in each cell the flight time to the
//! candidate sphere(s) is the root of a quadratic, compared against the
//! next cube-face crossing. For r <= 1/2 a sphere never protrudes into a
//! neighboring cell's interior, so only the local sphere is tested; for
//! 1/2 < r < 1 the 3^d spheres at offsets {-1,0,1}^d are candidates.

use crate::error::{Error, Result};
use crate::theory::{GasConfig, MAX_DIM};
use serde::Serialize;
use std::io::Write;

/// Minimum accepted root of the flight quadratic; smaller roots are
/// re-hits of the surface just left.
const EPS_T: f64 = 1e-12;
/// |v·n| below this is treated as a tangency and passed through.
const EPS_GRAZE: f64 = 1e-12;
/// Allowed penetration slack in the non-penetration invariant.
pub const EPS_PENETRATION: f64 = 1e-9;
/// |v|² drift beyond this triggers renormalization after a reflection.
const EPS_SPEED: f64 = 1e-13;
/// More collisions than this within one time unit abort the flow.
const MAX_COLLISION_RATE: u64 = 1_000_000;

/// Instantaneous state of one particle.
///
/// `position` lives in the closed cell [-1/2, 1/2]^d relative to the cell
/// center (faces are identified by wrapping); `cell` accumulates lattice
/// translations so `cell + position` is the unwrapped position.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParticleState {
    pub position: Vec<f64>,
    pub cell: Vec<i64>,
    pub velocity: Vec<f64>,
    pub time: f64,
}

impl ParticleState {
    /// A state at time 0 in cell 0. The velocity is renormalized to unit
    /// speed; the position must lie inside the cell.
    pub fn new(position: Vec<f64>, velocity: Vec<f64>) -> Result<Self> {
        if position.is_empty() || position.len() != velocity.len() {
            return Err(Error::EmptyVector);
        }
        if position.iter().any(|&x| !(-0.5..=0.5).contains(&x)) {
            return Err(Error::OutOfDomain {
                name: "position",
                value: f64::NAN,
                domain: "each component in [-1/2, 1/2]",
            });
        }
        let speed = norm(&velocity);
        if !(speed > 0.0) {
            return Err(Error::OutOfDomain {
                name: "velocity",
                value: speed,
                domain: "nonzero vector",
            });
        }
        let velocity = velocity.iter().map(|&v| v / speed).collect();
        let cell = vec![0; position.len()];
        Ok(ParticleState {
            position,
            cell,
            velocity,
            time: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }

    /// Unwrapped position cell + position.
    pub fn unwrapped_position(&self) -> Vec<f64> {
        self.cell
            .iter()
            .zip(&self.position)
            .map(|(&c, &x)| c as f64 + x)
            .collect()
    }

    /// Total displacement Δ = (cell + position) - (cell₀ + position₀).
    pub fn displacement_since(&self, start: &ParticleState) -> Vec<f64> {
        self.unwrapped_position()
            .iter()
            .zip(start.unwrapped_position())
            .map(|(a, b)| a - b)
            .collect()
    }
}

/// A resolved collision: flight time, the struck sphere's lattice center,
/// and the outward surface normal at impact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollisionEvent {
    pub time_to_hit: f64,
    pub center: Vec<i64>,
    pub normal: Vec<f64>,
}

/// Earliest positive time at which the ray `rel_pos + t·velocity` meets
/// the sphere |x| = radius, or None. `rel_pos` is relative to the sphere
/// center. The smaller quadratic root is evaluated in the
/// cancellation-free form c / (-b + sqrt(b² - c)); roots below 1e-12 are
/// rejected so a surface just left is not re-hit.
pub fn sphere_hit_time(rel_pos: &[f64], velocity: &[f64], radius: f64) -> Option<f64> {
    let b = dot(rel_pos, velocity);
    if b >= 0.0 {
        return None; // receding or tangent-from-outside
    }
    let c = dot(rel_pos, rel_pos) - radius * radius;
    let disc = b * b - c;
    if disc <= 0.0 {
        return None;
    }
    let t = c / (-b + disc.sqrt());
    (t > EPS_T).then_some(t)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// What happened at one flight event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    /// Specular reflection off a scatterer (or a tangency pass-through).
    Collision,
    /// Periodic wrap through one or more cube faces.
    CellCross,
    /// The requested flow time was exhausted.
    End,
}

impl EventKind {
    fn code(self) -> u8 {
        match self {
            EventKind::Collision => 0,
            EventKind::CellCross => 1,
            EventKind::End => 2,
        }
    }

    fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(EventKind::Collision),
            1 => Some(EventKind::CellCross),
            2 => Some(EventKind::End),
            _ => None,
        }
    }
}

/// Post-event snapshot streamed to an [`EventSink`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlightEvent {
    pub kind: EventKind,
    pub time: f64,
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub cell: Vec<i64>,
}

/// Receiver for the optional event stream of [`advance_with`].
pub trait EventSink {
    /// When false the flow skips event construction entirely, so a
    /// disabled sink costs nothing in the hot loop.
    const ENABLED: bool = true;
    fn record(&mut self, event: &FlightEvent);
}

/// Discards all events.
pub struct NullSink;

impl EventSink for NullSink {
    const ENABLED: bool = false;
    fn record(&mut self, _event: &FlightEvent) {}
}

impl EventSink for Vec<FlightEvent> {
    fn record(&mut self, event: &FlightEvent) {
        self.push(event.clone());
    }
}

/// Binary event log, fixed-width little-endian.
///
/// Layout: header `b"LGEV"`, version u16, dim u16, radius f64; then per
/// event: kind u8, time f64, position dim×f64, velocity dim×f64, cell
/// dim×i64 (all little-endian, densely packed).
pub struct EventLogWriter<W: Write> {
    writer: W,
}

impl<W: Write> EventLogWriter<W> {
    pub fn new(mut writer: W, cfg: &GasConfig) -> std::io::Result<Self> {
        writer.write_all(b"LGEV")?;
        writer.write_all(&1u16.to_le_bytes())?;
        writer.write_all(&(cfg.dim() as u16).to_le_bytes())?;
        writer.write_all(&cfg.radius().to_le_bytes())?;
        Ok(EventLogWriter { writer })
    }

    pub fn into_inner(self) -> W {
        self.writer
    }
}

impl<W: Write> EventSink for EventLogWriter<W> {
    fn record(&mut self, event: &FlightEvent) {
        // an in-memory/file sink failing mid-simulation is unrecoverable
        // for the log but must not corrupt the flow itself
        let w = &mut self.writer;
        let _ = w.write_all(&[event.kind.code()]);
        let _ = w.write_all(&event.time.to_le_bytes());
        for &x in &event.position {
            let _ = w.write_all(&x.to_le_bytes());
        }
        for &v in &event.velocity {
            let _ = w.write_all(&v.to_le_bytes());
        }
        for &c in &event.cell {
            let _ = w.write_all(&c.to_le_bytes());
        }
    }
}

/// Decode a binary event log produced by [`EventLogWriter`].
/// Returns (dim, radius, events).
pub fn decode_event_log(bytes: &[u8]) -> Option<(usize, f64, Vec<FlightEvent>)> {
    if bytes.len() < 16 || &bytes[0..4] != b"LGEV" {
        return None;
    }
    let version = u16::from_le_bytes(bytes[4..6].try_into().ok()?);
    if version != 1 {
        return None;
    }
    let dim = u16::from_le_bytes(bytes[6..8].try_into().ok()?) as usize;
    let radius = f64::from_le_bytes(bytes[8..16].try_into().ok()?);
    let record = 1 + 8 + 16 * dim + 8 * dim;
    let mut events = Vec::new();
    let mut at = 16;
    while at + record <= bytes.len() {
        let kind = EventKind::from_code(bytes[at])?;
        let mut off = at + 1;
        let f64_at = |off: &mut usize| {
            let v = f64::from_le_bytes(bytes[*off..*off + 8].try_into().unwrap());
            *off += 8;
            v
        };
        let time = f64_at(&mut off);
        let position: Vec<f64> = (0..dim).map(|_| f64_at(&mut off)).collect();
        let velocity: Vec<f64> = (0..dim).map(|_| f64_at(&mut off)).collect();
        let cell: Vec<i64> = (0..dim)
            .map(|_| {
                let v = i64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
                off += 8;
                v
            })
            .collect();
        events.push(FlightEvent {
            kind,
            time,
            position,
            velocity,
            cell,
        });
        at += record;
    }
    Some((dim, radius, events))
}

/// Candidate sphere centers (as cell offsets) that can intersect the
/// current cell. A sphere of radius r <= 1/2 is contained in its own
/// cell (touching faces only at isolated points, handled by the grazing
/// guard), so only the local sphere is tested; for 1/2 < r < 1 the 3^d
/// immediate neighbors can reach in.
enum Candidates {
    Local,
    Neighbors(Vec<Vec<i64>>),
}

impl Candidates {
    fn for_gas(dim: usize, radius: f64) -> Candidates {
        if radius <= 0.5 {
            return Candidates::Local;
        }
        let mut offsets = Vec::with_capacity(3usize.pow(dim as u32));
        let mut cur = vec![-1i64; dim];
        loop {
            offsets.push(cur.clone());
            let mut i = 0;
            loop {
                if i == dim {
                    return Candidates::Neighbors(offsets);
                }
                cur[i] += 1;
                if cur[i] <= 1 {
                    break;
                }
                cur[i] = -1;
                i += 1;
            }
        }
    }

    /// Index of the local (zero-offset) candidate.
    const LOCAL: usize = usize::MAX;

    fn offset_coord(&self, index: usize, axis: usize) -> i64 {
        match self {
            Candidates::Local => 0,
            Candidates::Neighbors(offsets) => {
                if index == Self::LOCAL {
                    0
                } else {
                    offsets[index][axis]
                }
            }
        }
    }
}

struct Hit {
    time: f64,
    offset_index: usize,
}

fn earliest_sphere_hit(
    position: &[f64],
    velocity: &[f64],
    radius: f64,
    candidates: &Candidates,
    rel: &mut [f64],
) -> Option<Hit> {
    match candidates {
        Candidates::Local => sphere_hit_time(position, velocity, radius).map(|t| Hit {
            time: t,
            offset_index: Candidates::LOCAL,
        }),
        Candidates::Neighbors(offsets) => {
            let mut best: Option<Hit> = None;
            for (idx, off) in offsets.iter().enumerate() {
                for (r, (&x, &o)) in rel.iter_mut().zip(position.iter().zip(off)) {
                    *r = x - o as f64;
                }
                if let Some(t) = sphere_hit_time(rel, velocity, radius) {
                    if best.as_ref().is_none_or(|b| t < b.time) {
                        best = Some(Hit {
                            time: t,
                            offset_index: idx,
                        });
                    }
                }
            }
            best
        }
    }
}

/// Time to the next cube-face crossing, min over axes of
/// (±1/2 - x_i)/v_i.
fn face_crossing_time(position: &[f64], velocity: &[f64]) -> f64 {
    let mut dt = f64::INFINITY;
    for (&x, &v) in position.iter().zip(velocity) {
        if v > 0.0 {
            dt = dt.min((0.5 - x) / v);
        } else if v < 0.0 {
            dt = dt.min((-0.5 - x) / v);
        }
    }
    dt
}

fn drift(position: &mut [f64], velocity: &[f64], dt: f64) {
    for (x, &v) in position.iter_mut().zip(velocity) {
        *x += v * dt;
    }
}

/// Drift by exactly the face-crossing time `dt_face` and wrap every axis
/// whose own crossing time saturates it (corner crossings wrap all
/// saturated axes simultaneously). Wrapped coordinates are snapped
/// exactly onto the opposite face.
fn drift_and_wrap(position: &mut [f64], cell: &mut [i64], velocity: &[f64], dt_face: f64) {
    for ((x, c), &v) in position.iter_mut().zip(cell.iter_mut()).zip(velocity) {
        if v > 0.0 && (0.5 - *x) / v <= dt_face {
            *x = -0.5;
            *c += 1;
            continue;
        }
        if v < 0.0 && (-0.5 - *x) / v <= dt_face {
            *x = 0.5;
            *c -= 1;
            continue;
        }
        *x += v * dt_face;
    }
}

/// Earliest collision along the straight-line continuation of `state`, or
/// None if no sphere is struck before `t_cap`. The state itself is not
/// modified; `center` is the struck sphere's absolute lattice point.
pub fn next_collision(state: &ParticleState, cfg: &GasConfig, t_cap: f64) -> Option<CollisionEvent> {
    debug_assert_eq!(state.dim(), cfg.dim());
    let dim = state.dim();
    let candidates = Candidates::for_gas(dim, cfg.radius());
    let mut pos = state.position.clone();
    let mut cell = state.cell.clone();
    let mut rel_buf = [0.0; MAX_DIM];
    let rel = &mut rel_buf[..dim];
    let mut elapsed = 0.0;
    loop {
        let dt_face = face_crossing_time(&pos, &state.velocity);
        let hit = earliest_sphere_hit(&pos, &state.velocity, cfg.radius(), &candidates, rel);
        if let Some(h) = hit {
            if h.time <= dt_face && elapsed + h.time <= t_cap {
                let center: Vec<i64> = (0..dim)
                    .map(|i| cell[i] + candidates.offset_coord(h.offset_index, i))
                    .collect();
                let normal: Vec<f64> = (0..dim)
                    .map(|i| {
                        let o = candidates.offset_coord(h.offset_index, i) as f64;
                        (pos[i] + state.velocity[i] * h.time - o) / cfg.radius()
                    })
                    .collect();
                return Some(CollisionEvent {
                    time_to_hit: elapsed + h.time,
                    center,
                    normal,
                });
            }
        }
        if elapsed + dt_face >= t_cap {
            return None;
        }
        drift_and_wrap(&mut pos, &mut cell, &state.velocity, dt_face);
        elapsed += dt_face;
    }
}

/// Outcome of [`reflect`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReflectOutcome {
    Reflected,
    /// |v·n| below the tangency threshold: the event is treated as a
    /// pass-through and the velocity is left unchanged.
    PassThrough,
}

/// Advance the state to the impact point of `event` and apply the mirror
/// law v' = v - 2(v·n)n. Grazing events (|v·n| < 1e-12) pass through with
/// the velocity unchanged. Unit speed is restored by renormalization when
/// rounding drift exceeds 1e-13.
pub fn reflect(state: &mut ParticleState, event: &CollisionEvent) -> ReflectOutcome {
    let dim = state.dim();
    // advance along the unwrapped line, then re-wrap into the local cell
    let unwrapped: Vec<f64> = state
        .unwrapped_position()
        .iter()
        .zip(&state.velocity)
        .map(|(&x, &v)| x + v * event.time_to_hit)
        .collect();
    for i in 0..dim {
        state.cell[i] = (unwrapped[i] + 0.5).floor() as i64;
        state.position[i] = unwrapped[i] - state.cell[i] as f64;
    }
    state.time += event.time_to_hit;
    let vn = dot(&state.velocity, &event.normal);
    if vn.abs() < EPS_GRAZE {
        return ReflectOutcome::PassThrough;
    }
    for (v, &n) in state.velocity.iter_mut().zip(&event.normal) {
        *v -= 2.0 * vn * n;
    }
    renormalize_speed(&mut state.velocity);
    ReflectOutcome::Reflected
}

fn renormalize_speed(velocity: &mut [f64]) {
    let s2 = dot(velocity, velocity);
    if (s2 - 1.0).abs() > EPS_SPEED {
        let s = s2.sqrt();
        for v in velocity.iter_mut() {
            *v /= s;
        }
    }
}

/// Flow the state through collisions and cell wraps for exactly `t_total`
/// continuous time units.
pub fn advance(state: &mut ParticleState, cfg: &GasConfig, t_total: f64) -> Result<()> {
    advance_with(state, cfg, t_total, &mut NullSink)
}

/// [`advance`] with an event stream. Events carry the post-event state.
/// Aborts with [`Error::DegenerateGeometry`] if more than 10^6 collisions
/// occur within one time unit.
pub fn advance_with<S: EventSink>(
    state: &mut ParticleState,
    cfg: &GasConfig,
    t_total: f64,
    sink: &mut S,
) -> Result<()> {
    if !(t_total > 0.0) {
        return Err(Error::OutOfDomain {
            name: "t_total",
            value: t_total,
            domain: "t_total > 0",
        });
    }
    debug_assert_eq!(state.dim(), cfg.dim());
    let dim = state.dim();
    let radius = cfg.radius();
    let candidates = Candidates::for_gas(dim, radius);
    let mut rel_buf = [0.0; MAX_DIM];
    let rel = &mut rel_buf[..dim];
    let t_start = state.time;
    let mut remaining = t_total;
    let mut window_start = state.time;
    let mut window_collisions: u64 = 0;

    loop {
        let dt_face = face_crossing_time(&state.position, &state.velocity);
        let hit = earliest_sphere_hit(&state.position, &state.velocity, radius, &candidates, rel);

        if let Some(h) = hit {
            if h.time <= dt_face && h.time <= remaining {
                drift(&mut state.position, &state.velocity, h.time);
                state.time += h.time;
                remaining -= h.time;
                // snap the impact point onto the sphere surface and
                // reflect off the radial normal
                let mut dist2 = 0.0;
                for i in 0..dim {
                    let r = state.position[i] - candidates.offset_coord(h.offset_index, i) as f64;
                    rel[i] = r;
                    dist2 += r * r;
                }
                let scale = radius / dist2.sqrt();
                let mut vn = 0.0;
                for i in 0..dim {
                    rel[i] *= scale;
                    state.position[i] =
                        candidates.offset_coord(h.offset_index, i) as f64 + rel[i];
                    vn += state.velocity[i] * rel[i];
                }
                vn /= radius;
                if vn.abs() >= EPS_GRAZE {
                    for (v, &r) in state.velocity.iter_mut().zip(rel.iter()) {
                        *v -= 2.0 * vn * r / radius;
                    }
                    renormalize_speed(&mut state.velocity);
                }
                window_collisions += 1;
                if window_collisions > MAX_COLLISION_RATE {
                    if state.time - window_start < 1.0 {
                        return Err(Error::DegenerateGeometry(window_collisions));
                    }
                    window_start = state.time;
                    window_collisions = 0;
                }
                if S::ENABLED {
                    sink.record(&FlightEvent {
                        kind: EventKind::Collision,
                        time: state.time,
                        position: state.position.clone(),
                        velocity: state.velocity.clone(),
                        cell: state.cell.clone(),
                    });
                }
                continue;
            }
        }

        if remaining <= dt_face {
            drift(&mut state.position, &state.velocity, remaining);
            state.time = t_start + t_total; // exact, not accumulated
            if S::ENABLED {
                sink.record(&FlightEvent {
                    kind: EventKind::End,
                    time: state.time,
                    position: state.position.clone(),
                    velocity: state.velocity.clone(),
                    cell: state.cell.clone(),
                });
            }
            return Ok(());
        }

        drift_and_wrap(&mut state.position, &mut state.cell, &state.velocity, dt_face);
        state.time += dt_face;
        remaining -= dt_face;
        if S::ENABLED {
            sink.record(&FlightEvent {
                kind: EventKind::CellCross,
                time: state.time,
                position: state.position.clone(),
                velocity: state.velocity.clone(),
                cell: state.cell.clone(),
            });
        }
    }
}
