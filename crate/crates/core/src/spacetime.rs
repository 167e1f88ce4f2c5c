//! 1+1 dimensional spacetime annotations for ports (units with c = 1).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Q;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    pub t: Q,
    pub x: Q,
}

impl Event {
    pub fn new(t: Q, x: Q) -> Self {
        Self { t, x }
    }

    pub fn origin() -> Self {
        Self::new(Q::zero(), Q::zero())
    }

    /// `t² - x²` relative to `other`.
    pub fn interval_squared(&self, other: &Event) -> Q {
        let dt = &other.t - &self.t;
        let dx = &other.x - &self.x;
        &dt * &dt - &dx * &dx
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(t={}, x={})", self.t, self.x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntervalClass {
    TimelikeForward,
    TimelikeBackward,
    Spacelike,
    /// On the light cone (or coincident). Not needed by the arguments, so
    /// reported rather than rejected.
    Null,
}

impl IntervalClass {
    pub fn is_flagged(self) -> bool {
        self == IntervalClass::Null
    }

    /// Forward and backward exchange; the rest are symmetric.
    pub fn reversed(self) -> Self {
        match self {
            IntervalClass::TimelikeForward => IntervalClass::TimelikeBackward,
            IntervalClass::TimelikeBackward => IntervalClass::TimelikeForward,
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            IntervalClass::TimelikeForward => "timelike-forward",
            IntervalClass::TimelikeBackward => "timelike-backward",
            IntervalClass::Spacelike => "spacelike",
            IntervalClass::Null => "null",
        }
    }
}

impl fmt::Display for IntervalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Separation of `e2` as seen from `e1`, by exact comparison of `Δt²`
/// and `Δx²`.
pub fn classify_interval(e1: &Event, e2: &Event) -> IntervalClass {
    let s = e1.interval_squared(e2);
    if s.is_positive() {
        if e2.t > e1.t {
            IntervalClass::TimelikeForward
        } else {
            IntervalClass::TimelikeBackward
        }
    } else if s.is_negative() {
        IntervalClass::Spacelike
    } else {
        IntervalClass::Null
    }
}

/// A boost velocity with rational Lorentz factor, so boosted coordinates
/// stay exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Velocity {
    v: Q,
    gamma: Q,
}

impl Velocity {
    /// Accepts `|v| < 1` with `1 - v²` a rational square (3/5, 4/5, 5/13,
    /// 0, ...).
    pub fn new(v: Q) -> Result<Self> {
        if v.abs() >= Q::one() {
            return Err(Error::InvalidVelocity(format!("|{v}| must be below 1")));
        }
        let inv_gamma_sq = Q::one() - &v * &v;
        let root = rational_sqrt(&inv_gamma_sq).ok_or_else(|| {
            Error::InvalidVelocity(format!(
                "the Lorentz factor for v = {v} is irrational; use a value like 3/5 or 4/5"
            ))
        })?;
        Ok(Self {
            v,
            gamma: root.recip(),
        })
    }

    pub fn value(&self) -> &Q {
        &self.v
    }

    pub fn gamma(&self) -> &Q {
        &self.gamma
    }

    pub fn reversed(&self) -> Self {
        Self {
            v: -self.v.clone(),
            gamma: self.gamma.clone(),
        }
    }
}

fn rational_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let exact = |n: &BigInt| -> Option<BigInt> {
        let r = n.sqrt();
        (&r * &r == *n).then_some(r)
    };
    Some(Q::new(exact(x.numer())?, exact(x.denom())?))
}

/// `t' = γ(t - v x)`, `x' = γ(x - v t)`: coordinates in a frame moving at
/// `v` relative to the original one.
pub fn boost(e: &Event, velocity: &Velocity) -> Event {
    let (v, g) = (&velocity.v, &velocity.gamma);
    Event::new(g * (&e.t - v * &e.x), g * (&e.x - v * &e.t))
}

/// Reflection `x -> 2c - x` about `center.x`; time is unchanged.
pub fn pi_rotation(e: &Event, center: &Event) -> Event {
    Event::new(e.t.clone(), Q::from_integer(2.into()) * &center.x - &e.x)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortPlacement {
    pub port: String,
    pub event: Event,
}

impl PortPlacement {
    pub fn new(port: impl Into<String>, event: Event) -> Self {
        Self {
            port: port.into(),
            event,
        }
    }
}

pub fn boost_placements(placements: &[PortPlacement], velocity: &Velocity) -> Vec<PortPlacement> {
    placements
        .iter()
        .map(|p| PortPlacement::new(p.port.clone(), boost(&p.event, velocity)))
        .collect()
}

pub fn rotate_placements(placements: &[PortPlacement], center: &Event) -> Vec<PortPlacement> {
    placements
        .iter()
        .map(|p| PortPlacement::new(p.port.clone(), pi_rotation(&p.event, center)))
        .collect()
}

/// Classical connection from an output port to an input port.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Link {
    pub from: String,
    pub to: String,
}

impl Link {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.from, self.to)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkStatus {
    Admissible,
    /// Along the forward light cone: admissible, but flagged.
    NullFlagged,
    Violation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkCheck {
    pub link: Link,
    pub class: IntervalClass,
    pub status: LinkStatus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WiringReport {
    pub checks: Vec<LinkCheck>,
}

impl WiringReport {
    pub fn is_admissible(&self) -> bool {
        self.checks
            .iter()
            .all(|c| c.status != LinkStatus::Violation)
    }

    pub fn violations(&self) -> impl Iterator<Item = &LinkCheck> {
        self.checks
            .iter()
            .filter(|c| c.status == LinkStatus::Violation)
    }

    pub fn flagged(&self) -> impl Iterator<Item = &LinkCheck> {
        self.checks
            .iter()
            .filter(|c| c.status == LinkStatus::NullFlagged)
    }
}

/// Every classical link must run into the future light cone of its source.
pub fn validate_classical_wiring(
    placements: &[PortPlacement],
    links: &[Link],
) -> Result<WiringReport> {
    let mut at: BTreeMap<&str, &Event> = BTreeMap::new();
    for p in placements {
        if at.insert(p.port.as_str(), &p.event).is_some() {
            return Err(Error::InvalidScenario(format!(
                "port `{}` is placed twice",
                p.port
            )));
        }
    }
    let locate = |name: &str| {
        at.get(name)
            .copied()
            .ok_or_else(|| Error::UnplacedPort(name.into()))
    };
    let mut checks = Vec::with_capacity(links.len());
    for link in links {
        let (src, dst) = (locate(&link.from)?, locate(&link.to)?);
        let class = classify_interval(src, dst);
        let status = match class {
            IntervalClass::TimelikeForward => LinkStatus::Admissible,
            IntervalClass::Null if dst.t > src.t => LinkStatus::NullFlagged,
            _ => LinkStatus::Violation,
        };
        checks.push(LinkCheck {
            link: link.clone(),
            class,
            status,
        });
    }
    Ok(WiringReport { checks })
}
