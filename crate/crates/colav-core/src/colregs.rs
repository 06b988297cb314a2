//! COLREGs situation classification.
//!
//! A per-obstacle state machine decides which rule currently applies. All
//! transitions pass through the safe state: a non-safe state is entered
//! from SF when its geometric situation and entry criterion hold, and is
//! left for SF when its exit criterion holds. Entry and exit thresholds
//! differ to give hysteresis. The emergency state is gated on the
//! time-to-critical-point measure and is only entered from geometrical
//! give-way or head-on situations.

use crate::angles::{angle_diff, deg_to_rad, wrap_pi};
use crate::geometry::CpaMetrics;
use crate::vessel::Vec2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Per-obstacle COLREGs state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColregsState {
    /// Safe: no rule enforced.
    SF,
    /// Overtaking (Rule 13), either direction.
    OT,
    /// Head-on (Rule 14).
    HO,
    /// Crossing, ownship gives way (Rule 15/16).
    GW,
    /// Crossing, ownship stands on (Rule 15/17).
    SO,
    /// Emergency: too close for the mid-level layer.
    EM,
}

impl ColregsState {
    pub fn abbrev(&self) -> &'static str {
        match self {
            ColregsState::SF => "SF",
            ColregsState::OT => "OT",
            ColregsState::HO => "HO",
            ColregsState::GW => "GW",
            ColregsState::SO => "SO",
            ColregsState::EM => "EM",
        }
    }
}

/// Geometrical situation, decided independently of the entry criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeoSituation {
    Safe,
    Overtaking,
    HeadOn,
    GiveWay,
    StandOn,
}

impl GeoSituation {
    pub fn abbrev(&self) -> &'static str {
        match self {
            GeoSituation::Safe => "G_SF",
            GeoSituation::Overtaking => "G_OT",
            GeoSituation::HeadOn => "G_HO",
            GeoSituation::GiveWay => "G_GW",
            GeoSituation::StandOn => "G_SO",
        }
    }

    fn matching_state(&self) -> Option<ColregsState> {
        match self {
            GeoSituation::Safe => None,
            GeoSituation::Overtaking => Some(ColregsState::OT),
            GeoSituation::HeadOn => Some(ColregsState::HO),
            GeoSituation::GiveWay => Some(ColregsState::GW),
            GeoSituation::StandOn => Some(ColregsState::SO),
        }
    }
}

#[derive(Debug, Error)]
pub enum FsmConfigError {
    #[error("exit threshold must exceed entry threshold: {0}")]
    Hysteresis(String),
}

/// State machine thresholds (shared across the SO/OT/GW/HO states).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FsmConfig {
    /// d_CPA entry threshold (m).
    pub d_cpa_enter: f64,
    /// d_CPA exit threshold (m).
    pub d_cpa_exit: f64,
    /// t_CPA entry interval (s).
    pub t_cpa_enter: (f64, f64),
    /// t_CPA exit interval (s); strictly contains the entry interval.
    pub t_cpa_exit: (f64, f64),
    /// Emergency entry threshold on t_crit (s).
    pub t_crit_em_enter: f64,
    /// Emergency exit threshold on t_crit (s).
    pub t_crit_em_exit: f64,
    /// Critical distance defining the critical point (m).
    pub d_crit: f64,
    /// Head-on cone half angle (rad).
    pub head_on_half_angle: f64,
    /// Overtaking aft-sector boundary from the approached vessel (rad).
    pub overtake_aft_boundary: f64,
}

impl Default for FsmConfig {
    fn default() -> Self {
        Self {
            d_cpa_enter: 900.0,
            d_cpa_exit: 2000.0,
            t_cpa_enter: (0.0, 270.0),
            t_cpa_exit: (-20.0, 290.0),
            t_crit_em_enter: 20.0,
            t_crit_em_exit: 25.0,
            d_crit: 300.0,
            head_on_half_angle: deg_to_rad(22.5),
            overtake_aft_boundary: deg_to_rad(112.5),
        }
    }
}

impl FsmConfig {
    pub fn validate(&self) -> Result<(), FsmConfigError> {
        if self.d_cpa_exit <= self.d_cpa_enter {
            return Err(FsmConfigError::Hysteresis(format!(
                "d_cpa exit {} <= enter {}",
                self.d_cpa_exit, self.d_cpa_enter
            )));
        }
        if self.t_cpa_exit.0 >= self.t_cpa_enter.0 || self.t_cpa_exit.1 <= self.t_cpa_enter.1 {
            return Err(FsmConfigError::Hysteresis(format!(
                "t_cpa exit interval {:?} must strictly contain enter {:?}",
                self.t_cpa_exit, self.t_cpa_enter
            )));
        }
        if self.t_crit_em_exit <= self.t_crit_em_enter {
            return Err(FsmConfigError::Hysteresis(format!(
                "t_crit exit {} <= enter {}",
                self.t_crit_em_exit, self.t_crit_em_enter
            )));
        }
        Ok(())
    }
}

/// Geometrical interpretation of an encounter, from relative position,
/// bearing and course plus the sign of t_CPA.
#[allow(clippy::too_many_arguments)]
pub fn geometric_situation(
    own_pos: Vec2,
    own_course: f64,
    own_speed: f64,
    obs_pos: Vec2,
    obs_course: f64,
    obs_speed: f64,
    t_cpa: f64,
    cfg: &FsmConfig,
) -> GeoSituation {
    debug_assert!(own_speed >= 0.0 && obs_speed >= 0.0);
    if t_cpa <= 0.0 {
        return GeoSituation::Safe;
    }
    let rel = obs_pos - own_pos;
    if rel.norm() < 1e-9 {
        return GeoSituation::Safe;
    }
    // Bearing of the obstacle relative to own course, and of the ownship
    // relative to the obstacle's course.
    let bearing = wrap_pi(rel.y.atan2(rel.x) - own_course);
    let bearing_from_obs = wrap_pi((-rel.y).atan2(-rel.x) - obs_course);

    // Rule 13: the faster vessel approaches from more than 22.5 degrees
    // abaft the other's beam. Strict comparison leaves exact boundary
    // geometries to the more cautious states below.
    let aft = cfg.overtake_aft_boundary;
    let overtaking = own_speed > obs_speed && bearing_from_obs.abs() > aft;
    let overtaken = obs_speed > own_speed && bearing.abs() > aft;
    if overtaking || overtaken {
        return GeoSituation::Overtaking;
    }

    let reciprocal = angle_diff(obs_course, own_course + std::f64::consts::PI).abs();
    if reciprocal <= cfg.head_on_half_angle && bearing.abs() <= deg_to_rad(45.0) {
        return GeoSituation::HeadOn;
    }

    if bearing > 0.0 && bearing <= aft {
        return GeoSituation::GiveWay;
    }
    if bearing < 0.0 && bearing >= -aft {
        return GeoSituation::StandOn;
    }
    GeoSituation::Safe
}

/// Entry criterion for a non-safe target state.
pub fn entry_predicate(target: ColregsState, metrics: &CpaMetrics, cfg: &FsmConfig) -> bool {
    match target {
        ColregsState::SF => {
            debug_assert!(false, "entry predicate is undefined for SF");
            false
        }
        ColregsState::EM => match metrics.t_crit {
            Some(t_crit) => t_crit < cfg.t_crit_em_enter && metrics.t_cpa > 0.0,
            None => false,
        },
        _ => {
            metrics.d_cpa < cfg.d_cpa_enter
                && metrics.t_cpa >= cfg.t_cpa_enter.0
                && metrics.t_cpa <= cfg.t_cpa_enter.1
        }
    }
}

/// Exit criterion for the current non-safe state.
pub fn exit_predicate(current: ColregsState, metrics: &CpaMetrics, cfg: &FsmConfig) -> bool {
    match current {
        ColregsState::SF => {
            debug_assert!(false, "exit predicate is undefined for SF");
            false
        }
        ColregsState::EM => match metrics.t_crit {
            Some(t_crit) => t_crit >= cfg.t_crit_em_exit || metrics.t_cpa <= 0.0,
            None => true,
        },
        _ => {
            metrics.d_cpa >= cfg.d_cpa_exit
                || metrics.t_cpa < cfg.t_cpa_exit.0
                || metrics.t_cpa > cfg.t_cpa_exit.1
        }
    }
}

/// One transition of the per-obstacle state machine. Every edge goes from
/// or to SF; the emergency entry is checked before the ordinary states.
pub fn step_state_machine(
    current: ColregsState,
    geo: GeoSituation,
    metrics: &CpaMetrics,
    cfg: &FsmConfig,
) -> ColregsState {
    match current {
        ColregsState::SF => {
            let em_geometry = matches!(geo, GeoSituation::GiveWay | GeoSituation::HeadOn);
            if em_geometry && entry_predicate(ColregsState::EM, metrics, cfg) {
                return ColregsState::EM;
            }
            match geo.matching_state() {
                Some(state) if entry_predicate(state, metrics, cfg) => state,
                _ => ColregsState::SF,
            }
        }
        state => {
            if exit_predicate(state, metrics, cfg) {
                ColregsState::SF
            } else {
                state
            }
        }
    }
}

/// Per-obstacle state machine instance.
#[derive(Debug, Clone)]
pub struct ObstacleFsm {
    state: ColregsState,
}

impl Default for ObstacleFsm {
    fn default() -> Self {
        Self { state: ColregsState::SF }
    }
}

impl ObstacleFsm {
    pub fn state(&self) -> ColregsState {
        self.state
    }

    pub fn step(&mut self, geo: GeoSituation, metrics: &CpaMetrics, cfg: &FsmConfig) -> ColregsState {
        self.state = step_state_machine(self.state, geo, metrics, cfg);
        self.state
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn metrics(t_cpa: f64, d_cpa: f64, t_crit: Option<f64>) -> CpaMetrics {
        CpaMetrics { t_cpa, d_cpa, t_crit }
    }

    #[test]
    fn config_defaults_satisfy_hysteresis() {
        FsmConfig::default().validate().unwrap();
    }

    #[test]
    fn config_rejects_inverted_thresholds() {
        let mut cfg = FsmConfig::default();
        cfg.d_cpa_exit = 500.0;
        assert!(cfg.validate().is_err());
        let mut cfg = FsmConfig::default();
        cfg.t_cpa_exit = (0.0, 260.0);
        assert!(cfg.validate().is_err());
        let mut cfg = FsmConfig::default();
        cfg.t_crit_em_exit = 10.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn head_on_geometry() {
        let cfg = FsmConfig::default();
        let geo = geometric_situation(
            Vec2::new(0.0, 0.0),
            0.0,
            5.0,
            Vec2::new(1000.0, 0.0),
            PI,
            5.0,
            100.0,
            &cfg,
        );
        assert_eq!(geo, GeoSituation::HeadOn);
    }

    #[test]
    fn starboard_crossing_is_give_way() {
        let cfg = FsmConfig::default();
        // Obstacle abeam to starboard, heading across our bow.
        let geo = geometric_situation(
            Vec2::new(0.0, 0.0),
            0.0,
            5.0,
            Vec2::new(0.0, 1000.0),
            -PI / 2.0,
            5.0,
            100.0,
            &cfg,
        );
        assert_eq!(geo, GeoSituation::GiveWay);
    }

    #[test]
    fn port_crossing_is_stand_on() {
        let cfg = FsmConfig::default();
        let geo = geometric_situation(
            Vec2::new(0.0, 0.0),
            0.0,
            5.0,
            Vec2::new(0.0, -1000.0),
            PI / 2.0,
            5.0,
            100.0,
            &cfg,
        );
        assert_eq!(geo, GeoSituation::StandOn);
    }

    #[test]
    fn overtaking_ahead_same_course() {
        let cfg = FsmConfig::default();
        // Slow vessel dead ahead on our course; we are faster.
        let geo = geometric_situation(
            Vec2::new(0.0, 0.0),
            0.0,
            8.0,
            Vec2::new(1000.0, 0.0),
            0.0,
            3.0,
            200.0,
            &cfg,
        );
        assert_eq!(geo, GeoSituation::Overtaking);
        // Mirror: the faster vessel astern of us overtakes us.
        let geo = geometric_situation(
            Vec2::new(0.0, 0.0),
            0.0,
            3.0,
            Vec2::new(-1000.0, 0.0),
            0.0,
            8.0,
            200.0,
            &cfg,
        );
        assert_eq!(geo, GeoSituation::Overtaking);
    }

    #[test]
    fn negative_t_cpa_is_safe() {
        let cfg = FsmConfig::default();
        let geo = geometric_situation(
            Vec2::new(0.0, 0.0),
            0.0,
            5.0,
            Vec2::new(1000.0, 0.0),
            PI,
            5.0,
            -1.0,
            &cfg,
        );
        assert_eq!(geo, GeoSituation::Safe);
    }

    #[test]
    fn entry_examples_from_thresholds() {
        let cfg = FsmConfig::default();
        assert!(entry_predicate(ColregsState::HO, &metrics(100.0, 500.0, None), &cfg));
        assert!(!entry_predicate(ColregsState::HO, &metrics(100.0, 1500.0, None), &cfg));
        assert!(entry_predicate(ColregsState::EM, &metrics(10.0, 100.0, Some(15.0)), &cfg));
        assert!(!entry_predicate(ColregsState::EM, &metrics(-5.0, 100.0, Some(15.0)), &cfg));
        assert!(!entry_predicate(ColregsState::EM, &metrics(10.0, 100.0, None), &cfg));
    }

    #[test]
    fn exit_examples_from_thresholds() {
        let cfg = FsmConfig::default();
        assert!(exit_predicate(ColregsState::GW, &metrics(100.0, 2500.0, None), &cfg));
        // Hysteresis holds the state between the enter and exit thresholds.
        assert!(!exit_predicate(ColregsState::GW, &metrics(100.0, 500.0, None), &cfg));
        assert!(exit_predicate(ColregsState::EM, &metrics(-1.0, 100.0, Some(5.0)), &cfg));
        assert!(exit_predicate(ColregsState::EM, &metrics(10.0, 100.0, Some(30.0)), &cfg));
        assert!(!exit_predicate(ColregsState::EM, &metrics(10.0, 100.0, Some(5.0)), &cfg));
    }

    #[test]
    fn transitions_follow_the_state_machine_edges() {
        let cfg = FsmConfig::default();
        let m = metrics(100.0, 500.0, None);
        assert_eq!(
            step_state_machine(ColregsState::SF, GeoSituation::HeadOn, &m, &cfg),
            ColregsState::HO
        );
        // No lateral transition: HO holds even when the geometry changes.
        assert_eq!(
            step_state_machine(ColregsState::HO, GeoSituation::GiveWay, &m, &cfg),
            ColregsState::HO
        );
        let m_exit = metrics(100.0, 2500.0, None);
        assert_eq!(
            step_state_machine(ColregsState::GW, GeoSituation::GiveWay, &m_exit, &cfg),
            ColregsState::SF
        );
    }

    #[test]
    fn em_entry_requires_give_way_or_head_on_geometry() {
        let cfg = FsmConfig::default();
        let m = metrics(10.0, 100.0, Some(5.0));
        assert_eq!(
            step_state_machine(ColregsState::SF, GeoSituation::Overtaking, &m, &cfg),
            ColregsState::OT
        );
        assert_eq!(
            step_state_machine(ColregsState::SF, GeoSituation::GiveWay, &m, &cfg),
            ColregsState::EM
        );
        assert_eq!(
            step_state_machine(ColregsState::SF, GeoSituation::HeadOn, &m, &cfg),
            ColregsState::EM
        );
    }

    #[test]
    fn random_streams_never_skip_the_safe_state() {
        let cfg = FsmConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let geos = [
            GeoSituation::Safe,
            GeoSituation::Overtaking,
            GeoSituation::HeadOn,
            GeoSituation::GiveWay,
            GeoSituation::StandOn,
        ];
        let mut fsm = ObstacleFsm::default();
        let mut prev = fsm.state();
        for _ in 0..20_000 {
            let m = metrics(
                rng.gen_range(-100.0..400.0),
                rng.gen_range(0.0..3000.0),
                if rng.gen_bool(0.3) { Some(rng.gen_range(0.0..60.0)) } else { None },
            );
            let geo = geos[rng.gen_range(0..geos.len())];
            let next = fsm.step(geo, &m, &cfg);
            if prev != next {
                assert!(
                    prev == ColregsState::SF || next == ColregsState::SF,
                    "illegal transition {prev:?} -> {next:?}"
                );
            }
            prev = next;
        }
    }

    #[test]
    fn monotone_encounter_has_single_episode() {
        let cfg = FsmConfig::default();
        // Closing head-on pass: t_cpa counts down, then goes negative;
        // d_cpa constant and small.
        let mut fsm = ObstacleFsm::default();
        let mut episodes = 0;
        let mut prev = ColregsState::SF;
        for k in 0..600 {
            let t_cpa = 300.0 - k as f64;
            let m = metrics(t_cpa, 400.0, None);
            let geo = if t_cpa > 0.0 { GeoSituation::HeadOn } else { GeoSituation::Safe };
            let next = fsm.step(geo, &m, &cfg);
            if prev == ColregsState::SF && next != ColregsState::SF {
                episodes += 1;
            }
            prev = next;
        }
        assert_eq!(episodes, 1);
        assert_eq!(prev, ColregsState::SF);
    }

    #[test]
    fn classification_invariant_under_rigid_motion() {
        let cfg = FsmConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let own = Vec2::new(rng.gen_range(-500.0..500.0), rng.gen_range(-500.0..500.0));
            let obs = Vec2::new(rng.gen_range(-500.0..500.0), rng.gen_range(-500.0..500.0));
            let own_course = rng.gen_range(-PI..PI);
            let obs_course = rng.gen_range(-PI..PI);
            let own_speed = rng.gen_range(0.0..10.0);
            let obs_speed = rng.gen_range(0.0..10.0);
            let t_cpa = rng.gen_range(-50.0..300.0);

            let base = geometric_situation(own, own_course, own_speed, obs, obs_course, obs_speed, t_cpa, &cfg);

            let shift = Vec2::new(rng.gen_range(-1e4..1e4), rng.gen_range(-1e4..1e4));
            let rot = rng.gen_range(-PI..PI);
            let rotate = |p: Vec2| {
                Vec2::new(p.x * rot.cos() - p.y * rot.sin(), p.x * rot.sin() + p.y * rot.cos())
            };
            let moved = geometric_situation(
                rotate(own) + shift,
                wrap_pi(own_course + rot),
                own_speed,
                rotate(obs) + shift,
                wrap_pi(obs_course + rot),
                obs_speed,
                t_cpa,
                &cfg,
            );
            assert_eq!(base, moved);
        }
    }
}
