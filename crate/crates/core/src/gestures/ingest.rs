use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    classify_pair, orientation_stable, select, GestureConfig, GestureFrame, Hand, Manipulation, ManipulationKind,
    Status,
};
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::scene::{BuildingRole, Scene};

/// Something a pointing hand can highlight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: String,
    pub position: Point3,
}

impl SceneObject {
    /// Centroids of the candidate and site buildings, sorted by id.
    pub fn from_scene(scene: &Scene) -> Vec<SceneObject> {
        let mut out: Vec<SceneObject> = scene
            .buildings
            .iter()
            .filter(|b| matches!(b.role, BuildingRole::Candidate | BuildingRole::Site))
            .map(|b| SceneObject {
                id: b.id.clone(),
                position: b.centroid(),
            })
            .collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    InitialBar,
    MovedBar,
    Released,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarStyle {
    Initial,
    Moved,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HandleBarEvent {
    pub t: f64,
    pub phase: Phase,
    /// Left and right hand positions.
    pub endpoints: [Point3; 2],
    pub style: BarStyle,
    /// Midpoints of the initial and moved bars, for translations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connector: Option<[Point3; 2]>,
}

/// Camera motion from two open hands. The scene is never scaled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Navigation {
    Pan { vector: Point3 },
    Rotate { angle: f64 },
}

/// Manipulation and navigation payloads are cumulative since the bar was
/// raised: the last one before `Released` is the whole operation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum GestureEvent {
    Highlight {
        t: f64,
        hand: Hand,
        id: String,
    },
    Select {
        t: f64,
        hand: Hand,
        id: String,
    },
    HandleBar(HandleBarEvent),
    Manipulation {
        t: f64,
        target: Option<String>,
        operation: usize,
        manipulation: Manipulation,
    },
    Navigation {
        t: f64,
        operation: usize,
        navigation: Navigation,
        theta1: f64,
        theta2: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestReport {
    pub events: Vec<GestureEvent>,
    pub frames: usize,
    pub skipped: usize,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
struct Tick {
    t: f64,
    left: Option<GestureFrame>,
    right: Option<GestureFrame>,
}

impl Tick {
    /// The shared two-hand status when both hands are Open or both Close.
    fn two_hand(&self) -> Option<(Status, GestureFrame, GestureFrame)> {
        let (l, r) = (self.left?, self.right?);
        (l.status == r.status && matches!(l.status, Status::Open | Status::Close)).then_some((l.status, l, r))
    }
}

struct Highlighted {
    id: String,
    hand: Hand,
    last_t: f64,
}

struct Bar {
    status: Status,
    reference: (GestureFrame, GestureFrame),
    operation: usize,
    last_emitted: Option<(Point3, Point3)>,
    pending: Option<(f64, GestureFrame, GestureFrame)>,
    last: (GestureFrame, GestureFrame),
}

// one live state per trace, so the size gap is not worth a box
#[allow(clippy::large_enum_variant)]
enum State {
    Idle { status: Status, count: usize },
    Active(Bar),
}

struct Machine<'a> {
    objects: &'a [SceneObject],
    config: &'a GestureConfig,
    events: Vec<GestureEvent>,
    highlighted: Option<Highlighted>,
    selected: Option<String>,
    operations: usize,
    state: State,
}

fn midpoint(a: Point3, b: Point3) -> Point3 {
    (a + b) * 0.5
}

impl Machine<'_> {
    fn selection(&mut self, f: &GestureFrame) {
        match f.status {
            Status::Point => {
                let Some(id) = select(f, self.objects, self.config.selection_threshold) else {
                    return;
                };
                match &mut self.highlighted {
                    Some(h) if h.id == id && h.hand == f.hand => h.last_t = f.time,
                    _ => {
                        self.events.push(GestureEvent::Highlight {
                            t: f.time,
                            hand: f.hand,
                            id: id.to_string(),
                        });
                        self.highlighted = Some(Highlighted {
                            id: id.to_string(),
                            hand: f.hand,
                            last_t: f.time,
                        });
                    }
                }
            }
            Status::Open => {
                if let Some(h) = self.highlighted.take() {
                    if h.hand == f.hand && f.time - h.last_t <= self.config.confirm_window {
                        self.events.push(GestureEvent::Select {
                            t: f.time,
                            hand: f.hand,
                            id: h.id.clone(),
                        });
                        self.selected = Some(h.id);
                    } else if h.hand != f.hand {
                        self.highlighted = Some(h);
                    }
                }
            }
            Status::Close | Status::None => {}
        }
    }

    fn raise(&mut self, t: f64, status: Status, l: GestureFrame, r: GestureFrame) {
        self.events.push(GestureEvent::HandleBar(HandleBarEvent {
            t,
            phase: Phase::InitialBar,
            endpoints: [l.position, r.position],
            style: BarStyle::Initial,
            connector: None,
        }));
        let operation = self.operations;
        self.operations += 1;
        self.state = State::Active(Bar {
            status,
            reference: (l, r),
            operation,
            last_emitted: None,
            pending: None,
            last: (l, r),
        });
    }

    /// Emits the moved bar and payload for `(l, r)`; false if the motion
    /// does not classify (no motion, or a scale while navigating).
    fn emit_moved(&mut self, bar: &Bar, t: f64, l: GestureFrame, r: GestureFrame) -> bool {
        let (l0, r0) = bar.reference;
        let Ok(Some(m)) = classify_pair(&l0, &r0, &l, &r) else {
            return false;
        };
        let payload = match (bar.status, m.kind) {
            (Status::Close, _) => GestureEvent::Manipulation {
                t,
                target: self.selected.clone(),
                operation: bar.operation,
                manipulation: m,
            },
            (_, ManipulationKind::Translate { vector }) => GestureEvent::Navigation {
                t,
                operation: bar.operation,
                navigation: Navigation::Pan { vector },
                theta1: m.theta1,
                theta2: m.theta2,
            },
            (_, ManipulationKind::Rotate { angle }) => GestureEvent::Navigation {
                t,
                operation: bar.operation,
                navigation: Navigation::Rotate { angle },
                theta1: m.theta1,
                theta2: m.theta2,
            },
            (_, ManipulationKind::Scale { .. }) => return false,
        };
        let connector = matches!(m.kind, ManipulationKind::Translate { .. })
            .then(|| [midpoint(l0.position, r0.position), midpoint(l.position, r.position)]);
        self.events.push(GestureEvent::HandleBar(HandleBarEvent {
            t,
            phase: Phase::MovedBar,
            endpoints: [l.position, r.position],
            style: BarStyle::Moved,
            connector,
        }));
        self.events.push(payload);
        true
    }

    fn release(&mut self, mut bar: Bar, t: f64) {
        if let Some((pt, l, r)) = bar.pending.take() {
            self.emit_moved(&bar, pt, l, r);
        }
        let (l, r) = bar.last;
        self.events.push(GestureEvent::HandleBar(HandleBarEvent {
            t,
            phase: Phase::Released,
            endpoints: [l.position, r.position],
            style: BarStyle::Moved,
            connector: None,
        }));
    }

    fn step(&mut self, tick: &Tick) {
        for f in [tick.left, tick.right].into_iter().flatten() {
            self.selection(&f);
        }
        let two = tick.two_hand();
        let state = std::mem::replace(
            &mut self.state,
            State::Idle {
                status: Status::None,
                count: 0,
            },
        );
        match state {
            State::Idle { status, count } => {
                let Some((s, l, r)) = two else {
                    return;
                };
                let count = if s == status { count + 1 } else { 1 };
                if count >= self.config.trigger_frames {
                    self.raise(tick.t, s, l, r);
                } else {
                    self.state = State::Idle { status: s, count };
                }
            }
            State::Active(mut bar) => match two {
                Some((s, l, r)) if s == bar.status => {
                    let threshold = self.config.stability_threshold.to_radians();
                    let (l0, r0) = bar.reference;
                    if !orientation_stable(&[l0, l], threshold) || !orientation_stable(&[r0, r], threshold) {
                        // a new operation starts where the hands are now
                        self.release(bar, tick.t);
                        self.raise(tick.t, s, l, r);
                        return;
                    }
                    bar.last = (l, r);
                    let since = |p: (Point3, Point3)| l.position.distance(p.0).max(r.position.distance(p.1));
                    let moved = since(bar.last_emitted.unwrap_or((l0.position, r0.position)));
                    if moved >= self.config.min_motion.max(f64::MIN_POSITIVE) {
                        if self.emit_moved(&bar, tick.t, l, r) {
                            bar.last_emitted = Some((l.position, r.position));
                            bar.pending = None;
                        }
                    } else if moved > 0.0 {
                        bar.pending = Some((tick.t, l, r));
                    }
                    self.state = State::Active(bar);
                }
                _ => {
                    self.release(bar, tick.t);
                    if let Some((s, ..)) = two {
                        self.state = State::Idle { status: s, count: 1 };
                        if self.config.trigger_frames <= 1 {
                            let (_, l, r) = two.expect("checked");
                            self.raise(tick.t, s, l, r);
                        }
                    }
                }
            },
        }
    }
}

/// Replays a frame stream through the selection and handle-bar state
/// machine. Frames sharing a timestamp form one tick; a hand absent from a
/// tick counts as untracked. Malformed or out-of-order frames are skipped.
pub fn ingest(frames: &[GestureFrame], objects: &[SceneObject], config: &GestureConfig) -> IngestReport {
    let mut diagnostics = Vec::new();
    let mut ticks: Vec<Tick> = Vec::new();
    let mut last_time = [f64::NEG_INFINITY; 2];
    for (i, f) in frames.iter().enumerate() {
        if let Err(e) = f.validate() {
            diagnostics.push(format!("frame {i}: {e}"));
            continue;
        }
        let slot = f.hand as usize;
        if f.time <= last_time[slot] {
            diagnostics.push(format!(
                "frame {i}: time {} does not advance for the {:?} hand",
                f.time, f.hand
            ));
            continue;
        }
        if let Some(prev) = ticks.last() {
            if f.time < prev.t {
                diagnostics.push(format!("frame {i}: time {} goes backwards", f.time));
                continue;
            }
        }
        last_time[slot] = f.time;
        let tick = match ticks.last_mut() {
            Some(t) if t.t == f.time => t,
            _ => {
                ticks.push(Tick {
                    t: f.time,
                    left: None,
                    right: None,
                });
                ticks.last_mut().expect("just pushed")
            }
        };
        match f.hand {
            Hand::Left => tick.left = Some(*f),
            Hand::Right => tick.right = Some(*f),
        }
    }

    let mut m = Machine {
        objects,
        config,
        events: Vec::new(),
        highlighted: None,
        selected: None,
        operations: 0,
        state: State::Idle {
            status: Status::None,
            count: 0,
        },
    };
    for tick in &ticks {
        m.step(tick);
    }
    let end = std::mem::replace(
        &mut m.state,
        State::Idle {
            status: Status::None,
            count: 0,
        },
    );
    if let State::Active(bar) = end {
        let t = ticks.last().map_or(0.0, |t| t.t);
        m.release(bar, t);
    }
    IngestReport {
        events: m.events,
        frames: frames.len(),
        skipped: diagnostics.len(),
        diagnostics,
    }
}

/// Reads a newline-delimited JSON trace. Lines that do not parse are
/// returned as diagnostics instead of failing the read.
pub fn read_trace(path: &Path) -> Result<(Vec<GestureFrame>, Vec<String>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut frames = Vec::new();
    let mut diagnostics = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<GestureFrame>(line) {
            Ok(f) => frames.push(f),
            Err(e) => diagnostics.push(format!("line {}: {e}", n + 1)),
        }
    }
    Ok((frames, diagnostics))
}

/// Writes one JSON event per line.
pub fn write_events(events: &[GestureEvent], mut out: impl Write) -> Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n").map_err(|e| Error::io(Path::new("<events>"), e))?;
    }
    Ok(())
}
