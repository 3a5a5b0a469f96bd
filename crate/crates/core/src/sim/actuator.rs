//! Actuator model: first-order lag followed by rate limits.

use super::config::ActuatorParams;
use crate::plant::Control;

/// Advance the applied control by `dt` toward the command.
pub fn actuator_delay(cmd: &Control, applied: &Control, dt: f64, p: &ActuatorParams) -> Control {
    let gain = if p.tau > 0.0 { 1.0 - (-dt / p.tau).exp() } else { 1.0 };
    let step = |c: f64, a: f64, rate: f64| {
        let d = gain * (c - a);
        let lim = rate * dt;
        a + if rate > 0.0 { d.clamp(-lim, lim) } else { d }
    };
    Control {
        alpha: step(cmd.alpha, applied.alpha, p.alpha_rate),
        mu: step(cmd.mu, applied.mu, p.mu_rate),
    }
}
