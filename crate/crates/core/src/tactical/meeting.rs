//! Two people arranging to meet under the station clock before noon.

use std::fmt;
use std::str::FromStr;

use super::{GoalOperator, Procedure, Tactic, TacticalInstance};

/// Minutes after midnight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Time(pub u16);

impl Time {
    pub const fn hm(hours: u16, minutes: u16) -> Time {
        Time(hours * 60 + minutes)
    }

    pub const NOON: Time = Time::hm(12, 0);
    pub const EVENING: Time = Time::hm(20, 0);
    /// The event universe runs from `FIRST` to `LAST` inclusive.
    pub const FIRST: Time = Time::hm(8, 0);
    pub const LAST: Time = Time::hm(21, 59);
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}", self.0 / 60, self.0 % 60)
    }
}

impl FromStr for Time {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("expected HH:MM, found `{s}`");
        let (h, m) = s.split_once(':').ok_or_else(bad)?;
        let (h, m): (u16, u16) = (h.parse().map_err(|_| bad())?, m.parse().map_err(|_| bad())?);
        if h >= 24 || m >= 60 {
            return Err(bad());
        }
        Ok(Time::hm(h, m))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Person {
    Alice,
    Bob,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Waterloo,
    Paddington,
}

impl fmt::Display for Person {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Every goal is about the clock at Waterloo; deadlines are strict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeetingGoal {
    Meet { deadline: Time },
    Arrive { person: Person, deadline: Time },
}

impl fmt::Display for MeetingGoal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeetingGoal::Meet { deadline } => {
                write!(f, "Alice and Bob meet under the clock at Waterloo before {deadline}")
            }
            MeetingGoal::Arrive { person, deadline } => {
                write!(f, "{person} is under the clock at Waterloo before {deadline}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeetingEvent {
    Arrival { person: Person, place: Place, time: Time },
    Meeting { place: Place, time: Time },
}

impl fmt::Display for MeetingEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeetingEvent::Arrival { person, place, time } => write!(f, "{person} arrives at {place} at {time}"),
            MeetingEvent::Meeting { place, time } => write!(f, "meeting at {place} at {time}"),
        }
    }
}

pub struct MeetingInstance;

pub fn meeting_instance() -> MeetingInstance {
    MeetingInstance
}

impl MeetingInstance {
    pub const G: MeetingGoal = MeetingGoal::Meet { deadline: Time::NOON };
    pub const G1: MeetingGoal = MeetingGoal::Arrive {
        person: Person::Alice,
        deadline: Time::NOON,
    };
    pub const G2: MeetingGoal = MeetingGoal::Arrive {
        person: Person::Bob,
        deadline: Time::NOON,
    };

    fn times() -> impl Iterator<Item = Time> {
        (Time::FIRST.0..=Time::LAST.0).map(Time)
    }

    pub fn events() -> Vec<MeetingEvent> {
        let mut out = Vec::new();
        for place in [Place::Waterloo, Place::Paddington] {
            for time in Self::times() {
                for person in [Person::Alice, Person::Bob] {
                    out.push(MeetingEvent::Arrival { person, place, time });
                }
                out.push(MeetingEvent::Meeting { place, time });
            }
        }
        out
    }

    /// Both arrive at Waterloo before noon; they meet when the later one arrives.
    pub fn wait() -> Procedure<MeetingEvent> {
        Procedure::new("wait", |events: &[MeetingEvent]| match events {
            [MeetingEvent::Arrival {
                person: Person::Alice,
                place: Place::Waterloo,
                time: a,
            }, MeetingEvent::Arrival {
                person: Person::Bob,
                place: Place::Waterloo,
                time: b,
            }] if *a < Time::NOON && *b < Time::NOON => Some(MeetingEvent::Meeting {
                place: Place::Waterloo,
                time: (*a).max(*b),
            }),
            _ => None,
        })
    }
}

impl TacticalInstance for MeetingInstance {
    type Goal = MeetingGoal;
    type Event = MeetingEvent;

    fn goals(&self) -> Vec<MeetingGoal> {
        vec![Self::G, Self::G1, Self::G2]
    }

    fn is_event(&self, e: &MeetingEvent) -> bool {
        let time = match e {
            MeetingEvent::Arrival { time, .. } | MeetingEvent::Meeting { time, .. } => *time,
        };
        (Time::FIRST..=Time::LAST).contains(&time)
    }

    fn achieves(&self, goal: &MeetingGoal, e: &MeetingEvent) -> bool {
        match (goal, e) {
            (MeetingGoal::Meet { deadline }, MeetingEvent::Meeting { place, time }) => {
                *place == Place::Waterloo && time < deadline
            }
            (MeetingGoal::Arrive { person, deadline }, MeetingEvent::Arrival { person: who, place, time }) => {
                who == person && *place == Place::Waterloo && time < deadline
            }
            _ => false,
        }
    }

    fn achieving_events(&self, goal: &MeetingGoal) -> Vec<MeetingEvent> {
        Self::events().into_iter().filter(|e| self.achieves(goal, e)).collect()
    }

    fn procedures(&self) -> Vec<Procedure<MeetingEvent>> {
        vec![Self::wait()]
    }
}

fn split_with(arrival_deadline: Time) -> impl Fn(&MeetingGoal) -> Option<Vec<MeetingGoal>> + Send + Sync {
    move |g| {
        (*g == MeetingInstance::G).then(|| {
            vec![
                MeetingGoal::Arrive {
                    person: Person::Alice,
                    deadline: arrival_deadline,
                },
                MeetingGoal::Arrive {
                    person: Person::Bob,
                    deadline: arrival_deadline,
                },
            ]
        })
    }
}

/// Meeting before noon reduces to each arriving before noon, justified by `wait`.
pub fn meeting_tactic() -> Tactic<MeetingGoal, MeetingEvent> {
    let split = split_with(Time::NOON);
    Tactic::new("meet", move |g| split(g).map(|subs| (subs, MeetingInstance::wait())))
}

/// The same reduction with the arrivals relaxed to the evening.
pub fn evening_tactic() -> Tactic<MeetingGoal, MeetingEvent> {
    let split = split_with(Time::EVENING);
    Tactic::new("meet-evening", move |g| split(g).map(|subs| (subs, MeetingInstance::wait())))
}

pub fn meeting_operator() -> GoalOperator<MeetingGoal> {
    GoalOperator::new("meet", split_with(Time::NOON))
}
