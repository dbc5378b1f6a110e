use super::{clamp_distance, AcousticModel, SPEED_OF_SOUND};
use crate::gridworld::Point;
use crate::scalar::Real;
use crate::{Error, Result};

/// Empty rectangular room spanning `[0, width] x [0, height]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoomSpec<T> {
    pub width: T,
    pub height: T,
    /// Wall reflection coefficient per band, each in `[0, 1)`.
    pub reflection: Vec<T>,
    pub speed_of_sound: T,
}

impl<T: Real> RoomSpec<T> {
    pub fn new(width: T, height: T, reflection: Vec<T>) -> Result<Self> {
        if !(width > T::zero() && height > T::zero()) {
            return Err(Error::InvalidArgument("room dimensions must be positive".into()));
        }
        if reflection.is_empty() {
            return Err(Error::InvalidArgument("room needs at least one band".into()));
        }
        if let Some(r) = reflection.iter().find(|r| !(**r >= T::zero() && **r < T::one())) {
            return Err(Error::InvalidArgument(format!("reflection coefficient {r} outside [0, 1)")));
        }
        Ok(Self {
            width,
            height,
            reflection,
            speed_of_sound: T::lit(SPEED_OF_SOUND),
        })
    }

    pub fn strictly_inside(&self, p: Point<T>) -> bool {
        p.x > T::zero() && p.x < self.width && p.y > T::zero() && p.y < self.height
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap<T> {
    /// Seconds.
    pub delay: T,
    pub amplitude: T,
}

/// Taps sorted by strictly increasing delay.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse<T> {
    taps: Vec<Tap<T>>,
}

impl<T: Real> ImpulseResponse<T> {
    /// Sorts taps by delay and merges taps that arrive at the same instant by
    /// summing their amplitudes.
    pub fn new(mut taps: Vec<Tap<T>>) -> Self {
        taps.sort_by(|a, b| {
            a.delay
                .partial_cmp(&b.delay)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.amplitude.partial_cmp(&b.amplitude).unwrap_or(std::cmp::Ordering::Equal))
        });
        let mut merged: Vec<Tap<T>> = Vec::with_capacity(taps.len());
        for tap in taps {
            match merged.last_mut() {
                Some(last) if last.delay == tap.delay => last.amplitude = last.amplitude + tap.amplitude,
                _ => merged.push(tap),
            }
        }
        Self { taps: merged }
    }

    pub fn taps(&self) -> &[Tap<T>] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }
}

/// Maximum absolute tap amplitude.
pub fn pressure_from_rir<T: Real>(ir: &ImpulseResponse<T>) -> Result<T> {
    ir.taps
        .iter()
        .map(|t| t.amplitude.abs())
        .reduce(T::max)
        .ok_or(Error::EmptyImpulseResponse)
}

/// Signed offset from the receiver to image `i` along one axis, with the
/// number of wall reflections. Written so that swapping source and receiver
/// maps image `i` onto image `-i` (even) or `i` (odd) with bit-identical
/// magnitude.
fn image_offset<T: Real>(i: i64, extent: T, src: T, rcv: T) -> T {
    let k = T::from_i64(i).expect("small integer");
    if i.rem_euclid(2) == 0 {
        k * extent + (src - rcv)
    } else {
        (k + T::one()) * extent - (src + rcv)
    }
}

/// Image-source impulse response of an empty rectangle, one tap per image of
/// reflection order `<= max_order`. Tap amplitude is
/// `reflection[band]^order / max(d, 0.1)` and delay `d / c`.
pub fn image_source_rir<T: Real>(
    room: &RoomSpec<T>,
    src: Point<T>,
    rcv: Point<T>,
    max_order: u32,
    band: usize,
) -> Result<ImpulseResponse<T>> {
    if !room.strictly_inside(src) || !room.strictly_inside(rcv) {
        return Err(Error::InvalidArgument("source and receiver must lie strictly inside the room".into()));
    }
    if src == rcv {
        return Err(Error::CoincidentSourceReceiver);
    }
    let rho = *room
        .reflection
        .get(band)
        .ok_or_else(|| Error::InvalidArgument(format!("band {band} out of range")))?;
    let k = max_order as i64;
    let mut taps = Vec::with_capacity((2 * k * k + 2 * k + 1) as usize);
    for i in -k..=k {
        let dx = image_offset(i, room.width, src.x, rcv.x);
        let rest = k - i.abs();
        for j in -rest..=rest {
            let dy = image_offset(j, room.height, src.y, rcv.y);
            let d = (dx * dx + dy * dy).sqrt();
            let order = (i.abs() + j.abs()) as i32;
            taps.push(Tap {
                delay: d / room.speed_of_sound,
                amplitude: rho.powi(order) / clamp_distance(d),
            });
        }
    }
    Ok(ImpulseResponse::new(taps))
}

/// Image-source model with a fixed source.
#[derive(Debug, Clone)]
pub struct ImageSourceScene<T> {
    pub room: RoomSpec<T>,
    pub source: Point<T>,
    pub max_order: u32,
}

impl<T: Real> ImageSourceScene<T> {
    pub fn new(room: RoomSpec<T>, source: Point<T>, max_order: u32) -> Result<Self> {
        if !room.strictly_inside(source) {
            return Err(Error::InvalidArgument("source must lie strictly inside the room".into()));
        }
        Ok(Self { room, source, max_order })
    }
}

impl<T: Real> AcousticModel<T> for ImageSourceScene<T> {
    fn bands(&self) -> usize {
        self.room.reflection.len()
    }

    fn is_open(&self, point: Point<T>) -> bool {
        self.room.strictly_inside(point)
    }

    fn pressure_at(&self, point: Point<T>, band: usize) -> Result<T> {
        pressure_from_rir(&image_source_rir(&self.room, self.source, point, self.max_order, band)?)
    }
}
