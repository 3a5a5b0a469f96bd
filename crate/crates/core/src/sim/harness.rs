//! Closed-loop simulation: aircraft, lumped-mass tether, winch, wind,
//! actuator and the NDI or hybrid controller.

use super::actuator::actuator_delay;
use super::config::RunConfig;
use super::power::{
    efficiency_factor, harvesting_factor, power_bound, power_mech, tether_drag_coefficient, PowerError, PowerReport,
};
use crate::environment::{wind_shear, wind_shear_w, DrydenState};
use crate::frames::{cart_from_spherical, spherical_from_cart, tau_angles_to_o, wrap_pi, Rotation3, Vec3};
use crate::hjsolver::{ControlTable, GriddedValueFunction};
use crate::hybrid_control::{ndi_command, ndi_estimated_rates, safety_command, HybridMode, Mode, NdiCommand};
use crate::path_guidance::{commanded_angles, GammaFrame, GammaGeometry};
use crate::plant::{
    aircraft_rates, airspeed_o, m_tau_o, winch_pi, winch_rates, AircraftState, Control, PiState, SafetyState,
    WinchState,
};
use crate::tether::{tether_derivatives, TetherParams, TetherState};
use std::f64::consts::PI;
use std::io::Write;
use thiserror::Error;

/// Look-ahead used to differentiate the course command (s).
const COMMAND_LOOKAHEAD: f64 = 0.1;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("hybrid mode needs safety tables")]
    MissingTables,
    #[error("numerical divergence at t = {t:.4} s: {message}")]
    Divergence { t: f64, message: String, last_row: Option<Box<TraceRow>> },
    #[error(transparent)]
    Power(#[from] PowerError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Value function and control table produced by the synthesis.
#[derive(Debug, Clone)]
pub struct SafetyTables {
    pub value: GriddedValueFunction,
    pub controls: ControlTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Completed,
    Ruptured,
    OutOfEnvelope,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Completed => "completed",
            Outcome::Ruptured => "ruptured",
            Outcome::OutOfEnvelope => "out-of-envelope",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Traction,
    Retraction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub state: SafetyState,
    pub cmd: Control,
    pub applied: Control,
    pub mode: Mode,
    pub phase: Phase,
    /// Tether force at the aircraft (N).
    pub f_t: f64,
    /// Tether force at the winch (N).
    pub f_w: f64,
    pub reel_speed: f64,
    pub p_mech: f64,
    /// Wind at the aircraft, NED (m/s).
    pub wind: Vec3,
    pub s1: bool,
    pub s2: bool,
}

pub const TRACE_HEADER: &str = "t,s,sigma,h_tau,v_a,chi_a,gamma_a,delta_t,alpha_cmd,mu_cmd,alpha,mu,mode,phase,\
f_t,f_w,reel_speed,p_mech,wind_n,wind_e,wind_d,s1,s2";

impl TraceRow {
    pub fn csv(&self) -> String {
        let x = self.state.to_array();
        let nums = [
            self.t,
            x[0],
            x[1],
            x[2],
            x[3],
            x[4],
            x[5],
            x[6],
            self.cmd.alpha,
            self.cmd.mu,
            self.applied.alpha,
            self.applied.mu,
        ];
        let mut out: Vec<String> = nums.iter().map(|v| format!("{v:.16e}")).collect();
        out.push(self.mode.as_str().to_string());
        out.push(match self.phase {
            Phase::Traction => "traction".into(),
            Phase::Retraction => "retraction".into(),
        });
        for v in [self.f_t, self.f_w, self.reel_speed, self.p_mech, self.wind.x, self.wind.y, self.wind.z] {
            out.push(format!("{v:.16e}"));
        }
        out.push((self.s1 as u8).to_string());
        out.push((self.s2 as u8).to_string());
        out.join(",")
    }
}

pub fn write_trace<W: Write>(mut w: W, rows: &[TraceRow]) -> std::io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv())?;
    }
    Ok(())
}

/// Parse a trace written by [`write_trace`].
pub fn read_trace(text: &str) -> Result<Vec<TraceRow>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == TRACE_HEADER => {}
        _ => return Err("missing or unexpected trace header".into()),
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let bad = |what: &str| format!("line {}: {what}", k + 2);
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 23 {
            return Err(bad("expected 23 fields"));
        }
        let num = |i: usize| f[i].trim().parse::<f64>().map_err(|_| bad(&format!("bad number in column {}", i + 1)));
        let flag = |i: usize| match f[i].trim() {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(bad(&format!("bad flag in column {}", i + 1))),
        };
        let mut x = [0.0; 7];
        for (d, v) in x.iter_mut().enumerate() {
            *v = num(1 + d)?;
        }
        rows.push(TraceRow {
            t: num(0)?,
            state: SafetyState::from_array(x),
            cmd: Control { alpha: num(8)?, mu: num(9)? },
            applied: Control { alpha: num(10)?, mu: num(11)? },
            mode: match f[12].trim() {
                "NDI" => Mode::Ndi,
                "SAFETY" => Mode::Safety,
                _ => return Err(bad("bad mode")),
            },
            phase: match f[13].trim() {
                "traction" => Phase::Traction,
                "retraction" => Phase::Retraction,
                _ => return Err(bad("bad phase")),
            },
            f_t: num(14)?,
            f_w: num(15)?,
            reel_speed: num(16)?,
            p_mech: num(17)?,
            wind: Vec3::new(num(18)?, num(19)?, num(20)?),
            s1: flag(21)?,
            s2: flag(22)?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub trace: Vec<TraceRow>,
    pub outcome: Outcome,
    /// Why the run ended early, if it did.
    pub reason: Option<String>,
    pub duration: f64,
    pub max_force: f64,
    /// Share of the run spent in SAFETY mode.
    pub safety_fraction: f64,
    /// Figure-eights flown.
    pub cycles: f64,
    pub report: PowerReport,
}

/// Inputs held over one controller step.
#[derive(Debug, Clone, Copy)]
struct Inputs {
    u: Control,
    /// Turbulence at the start and end of the step, interpolated linearly.
    turb_from: Vec3,
    turb_to: Vec3,
    /// Turbulence rate over the step, W frame; zero when gusts act
    /// kinematically only.
    turb_rate: Vec3,
    m_c: f64,
}

/// Loads and kinematics at one plant state.
#[derive(Debug, Clone, Copy)]
struct Loads {
    f_t: f64,
    f_w: f64,
    wind_o: Vec3,
    v_k_o: Vec3,
    delta_t: f64,
}

/// State layout: aircraft (6), particle positions (3n), particle
/// velocities (3n), drum angle and rate.
struct Plant<'a> {
    cfg: &'a RunConfig,
    n: usize,
    /// Reeled-out length at θ_w = 0 (m).
    l0: f64,
    m_ow: Rotation3,
}

impl<'a> Plant<'a> {
    fn dim(&self) -> usize {
        8 + 6 * self.n
    }

    fn tether_params(&self, theta: f64) -> TetherParams {
        let l = self.l0 + self.cfg.winch.r_w * theta;
        self.cfg.tether_params(l / (self.n + 1) as f64)
    }

    fn tether_state(&self, y: &[f64]) -> TetherState {
        let n = self.n;
        let v3 = |k: usize| Vec3::new(y[k], y[k + 1], y[k + 2]);
        TetherState {
            pos: (0..n).map(|i| v3(6 + 3 * i)).collect(),
            vel: (0..n).map(|i| v3(6 + 3 * n + 3 * i)).collect(),
        }
    }

    fn eval(&self, y: &[f64], inp: &Inputs, frac: f64) -> Result<(Vec<f64>, Loads), String> {
        let cfg = self.cfg;
        let n = self.n;
        let ac = AircraftState::from_slice(&y[0..6]);
        let pos = ac.pos();
        let p_w = cart_from_spherical(&pos);
        if p_w.z <= 0.0 {
            return Err(format!("aircraft at altitude {:.2} m", p_w.z));
        }
        let shear_o = wind_shear(p_w.z, &cfg.wind).map_err(|e| e.to_string())?;
        let wind_o = shear_o + self.m_ow * inp.turb_from.lerp(&inp.turb_to, frac);
        let v_k_o = airspeed_o(ac.v_a, ac.chi_a, ac.gamma_a) + wind_o;
        let v_k_w = self.m_ow * v_k_o;
        let (theta, omega) = (y[6 + 6 * n], y[7 + 6 * n]);
        let tp = self.tether_params(theta);
        let st = self.tether_state(y);
        let td = tether_derivatives(&st, &p_w, &v_k_w, |z| wind_shear_w(z, &cfg.wind), &tp)
            .map_err(|e| e.to_string())?;
        let f_t_o = -(self.m_ow * td.f_top);
        let mut r = aircraft_rates(&ac, &inp.u, &f_t_o, &wind_o, cfg.wind.xi, &cfg.aircraft, &cfg.atmosphere)
            .map_err(|e| e.to_string())?;
        if inp.turb_rate != Vec3::zeros() {
            // A gust changes the airspeed and leaves the inertial velocity.
            let a = Rotation3::abar_o(ac.chi_a, ac.gamma_a) * (self.m_ow * -inp.turb_rate);
            let (v, cg) = (ac.v_a, ac.gamma_a.cos());
            r.rates[3] += a.x;
            r.rates[4] += a.y / (v * cg);
            r.rates[5] -= a.z / v;
        }
        let f_w = td.f_ground.norm();
        let (th_dot, om_dot) = winch_rates(&WinchState { theta, omega }, f_w, inp.m_c, &cfg.winch);
        let mut dy = Vec::with_capacity(self.dim());
        dy.extend_from_slice(&r.rates);
        for v in td.dpos.iter().chain(&td.dvel) {
            dy.extend_from_slice(v.as_slice());
        }
        dy.push(th_dot);
        dy.push(om_dot);
        let delta_t = (p_w - st.pos[n - 1]).norm() - tp.l_s;
        Ok((dy, Loads { f_t: td.f_top.norm(), f_w, wind_o, v_k_o, delta_t }))
    }

    /// One RK4 step from step fraction `f0` to `f1`.
    fn rk4(&self, y: &[f64], h: f64, inp: &Inputs, f0: f64, f1: f64) -> Result<Vec<f64>, String> {
        let add = |a: &[f64], k: &[f64], s: f64| -> Vec<f64> { a.iter().zip(k).map(|(x, d)| x + s * d).collect() };
        let fm = 0.5 * (f0 + f1);
        let (k1, _) = self.eval(y, inp, f0)?;
        let (k2, _) = self.eval(&add(y, &k1, 0.5 * h), inp, fm)?;
        let (k3, _) = self.eval(&add(y, &k2, 0.5 * h), inp, fm)?;
        let (k4, _) = self.eval(&add(y, &k3, h), inp, f1)?;
        Ok((0..y.len()).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
    }
}

/// Navigator output: curve coordinates and the NDI command.
struct Navigation {
    geo: GammaGeometry,
    cmd: NdiCommand,
}

fn command_o(frame: &GammaFrame, cfg: &RunConfig, geo: &GammaGeometry) -> (f64, f64) {
    let (c, g) = commanded_angles(geo, cfg.guidance.delta0);
    let _ = frame;
    tau_angles_to_o(&geo.pos, cfg.wind.xi, c, g)
}

fn navigate(frame: &GammaFrame, cfg: &RunConfig, ac: &AircraftState, v_k_o: &Vec3, s_hint: Option<f64>) -> Result<Navigation, String> {
    let locate = |pos: &crate::frames::SphericalPos, hint: Option<f64>| {
        let v_tau = m_tau_o(pos, cfg.wind.xi) * *v_k_o;
        match hint {
            Some(s) => frame.to_gamma_near(pos, &v_tau, s, cfg.guidance.window),
            None => frame.locate_geometry(pos, &v_tau),
        }
    };
    let pos = ac.pos();
    let geo = locate(&pos, s_hint).map_err(|e| e.to_string())?;
    let (chi, gamma) = command_o(frame, cfg, &geo);
    let m_ow = Rotation3::o_w(cfg.wind.xi);
    let ahead = cart_from_spherical(&pos) + (m_ow * *v_k_o) * COMMAND_LOOKAHEAD;
    let (chi_dot, gamma_dot) = match spherical_from_cart(&ahead)
        .map_err(|e| e.to_string())
        .and_then(|p| locate(&p, Some(geo.coord.s)).map_err(|e| e.to_string()))
    {
        Ok(g2) => {
            let (c2, g2) = command_o(frame, cfg, &g2);
            (wrap_pi(c2 - chi) / COMMAND_LOOKAHEAD, (g2 - gamma) / COMMAND_LOOKAHEAD)
        }
        Err(_) => (0.0, 0.0),
    };
    Ok(Navigation { geo, cmd: NdiCommand { chi, gamma, chi_dot, gamma_dot } })
}

/// Initial plant vector: on the curve, heading along the command, tether
/// straight and pre-tensioned, drum turning at the radial speed.
fn initial_state(cfg: &RunConfig, frame: &GammaFrame, plant: &mut Plant) -> Result<(Vec<f64>, f64), String> {
    let ic = &cfg.initial;
    let n = plant.n;
    let geo = frame
        .geometry(crate::path_guidance::GammaCoord { s: ic.s, sigma: 0.0 }, ic.h_tau)
        .map_err(|e| e.to_string())?;
    let (chi, gamma) = command_o(frame, cfg, &geo);
    let pos = geo.pos;
    let p_w = cart_from_spherical(&pos);
    let shear_o = wind_shear(p_w.z, &cfg.wind).map_err(|e| e.to_string())?;
    let v_k_w = plant.m_ow * (airspeed_o(ic.v_a, chi, gamma) + shear_o);
    let radial_speed = v_k_w.dot(&pos.radial());
    // Each segment of the straight chain opens at radial_speed/(n+1).
    let stretch = (ic.tension - cfg.tether.c * radial_speed / (n + 1) as f64) / cfg.tether.k;
    plant.l0 = (n + 1) as f64 * (ic.h_tau / (n + 1) as f64 - stretch);
    let st = TetherState::straight(n, &p_w, &v_k_w);
    let reel = radial_speed.max(0.0);
    let mut y = vec![pos.lambda, pos.phi, pos.h_tau, ic.v_a, chi, gamma];
    for v in st.pos.iter().chain(&st.vel) {
        y.extend_from_slice(v.as_slice());
    }
    y.push(0.0);
    y.push(reel / cfg.winch.r_w);
    Ok((y, reel / cfg.winch.r_w))
}

/// Run one episode.
pub fn simulate(cfg: &RunConfig, tables: Option<&SafetyTables>) -> Result<SimResult, SimError> {
    if cfg.sim.hybrid && tables.is_none() {
        return Err(SimError::MissingTables);
    }
    let frame = cfg.guidance_frame();
    let mut plant = Plant { cfg, n: cfg.tether.n, l0: 0.0, m_ow: Rotation3::o_w(cfg.wind.xi) };
    let diverge = |t: f64, m: String, last: Option<&TraceRow>| SimError::Divergence {
        t,
        message: m,
        last_row: last.map(|r| Box::new(r.clone())),
    };
    let (mut y, omega0) = initial_state(cfg, &frame, &mut plant).map_err(|m| diverge(0.0, m, None))?;
    let wp = &cfg.winch;
    let mut pi = PiState::default();
    // Start the integrator at the moment that holds the initial drum speed.
    let m_c0 = wp.nu_w * omega0 - wp.r_w * cfg.initial.tension;
    pi.integral = if wp.ki != 0.0 { m_c0 / wp.ki } else { 0.0 };
    let mut dryden = DrydenState::new(cfg.turbulence, cfg.sim.seed);
    let mut hybrid = HybridMode::new(cfg.switch.window);
    let mut inputs = Inputs { u: Control::default(), turb_from: Vec3::zeros(), turb_to: Vec3::zeros(), turb_rate: Vec3::zeros(), m_c: m_c0 };
    let mut applied: Option<Control> = None;
    let mut phase = Phase::Traction;

    let dt = cfg.sim.dt;
    let n_sub = (dt / plant.tether_params(0.0).stable_dt()).ceil().max(1.0) as usize;
    let h_sub = dt / n_sub as f64;
    let steps = (cfg.sim.duration / dt).round() as usize;

    let mut trace: Vec<TraceRow> = Vec::new();
    let mut s_prev: Option<f64> = None;
    let mut s_travel = 0.0;
    let mut max_force: f64 = 0.0;
    let mut safety_time = 0.0;
    let mut outcome = Outcome::Completed;
    let mut reason = None;
    let mut t = 0.0;

    for step in 0..=steps {
        t = step as f64 * dt;
        let (_, loads) = plant.eval(&y, &inputs, 1.0).map_err(|m| diverge(t, m, trace.last()))?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(diverge(t, "non-finite state".into(), trace.last()));
        }
        let ac = AircraftState::from_slice(&y[0..6]);
        let nav = match navigate(&frame, cfg, &ac, &loads.v_k_o, s_prev) {
            Ok(n) => n,
            Err(m) => {
                outcome = Outcome::OutOfEnvelope;
                reason = Some(m);
                break;
            }
        };
        let s = nav.geo.coord.s;
        if let Some(sp) = s_prev {
            s_travel += wrap_pi(s - sp);
        }
        s_prev = Some(s);
        let x7 = SafetyState {
            s,
            sigma: nav.geo.coord.sigma,
            h_tau: ac.h_tau,
            v_a: ac.v_a,
            chi_a: ac.chi_a,
            gamma_a: ac.gamma_a,
            delta_t: loads.delta_t,
        };
        let omega = y[7 + 6 * plant.n];
        let theta = y[6 + 6 * plant.n];
        let length = plant.l0 + wp.r_w * theta;
        if cfg.retraction.enabled {
            phase = match phase {
                Phase::Traction if length > cfg.retraction.l_max => Phase::Retraction,
                Phase::Retraction if length < cfg.retraction.l_min => Phase::Traction,
                p => p,
            };
        }

        let (s1, s2) = if cfg.sim.hybrid && phase == Phase::Traction {
            hybrid.update(&cfg.switch, t, loads.f_t)
        } else {
            hybrid.mode = Mode::Ndi;
            (false, false)
        };
        let est = ndi_estimated_rates(&ac, loads.f_t, cfg.wind.xi, &cfg.aircraft, &cfg.atmosphere);
        let ndi = ndi_command(&ac, &nav.cmd, est, &cfg.ndi, &cfg.bounds, &cfg.aircraft, &cfg.atmosphere);
        let cmd = match (hybrid.mode, tables) {
            (Mode::Safety, Some(tb)) => match safety_command(&tb.controls, &x7.to_array()) {
                Ok(u) => u,
                Err(e) => {
                    outcome = Outcome::OutOfEnvelope;
                    reason = Some(e.to_string());
                    break;
                }
            },
            _ => ndi.control,
        };
        let prev = applied.unwrap_or(cmd);
        let u = actuator_delay(&cmd, &prev, dt, &cfg.actuator);
        applied = Some(u);

        let row = TraceRow {
            t,
            state: x7,
            cmd,
            applied: u,
            mode: hybrid.mode,
            phase,
            f_t: loads.f_t,
            f_w: loads.f_w,
            reel_speed: wp.r_w * omega,
            p_mech: power_mech(omega, wp.r_w, loads.f_w),
            wind: loads.wind_o,
            s1,
            s2,
        };
        max_force = max_force.max(loads.f_t);
        if loads.f_t > cfg.switch.f_rupture {
            trace.push(row);
            outcome = Outcome::Ruptured;
            reason = Some(format!("tether force {:.1} N at t = {t:.3} s", loads.f_t));
            break;
        }
        let done_cycles = cfg.sim.cycles.is_some_and(|c| s_travel.abs() / (2.0 * PI) >= c);
        if step % cfg.sim.trace_every == 0 || step == steps || done_cycles {
            trace.push(row.clone());
        }
        if step == steps || done_cycles {
            break;
        }
        if hybrid.mode == Mode::Safety {
            safety_time += dt;
        }

        let alt = ac.h_tau * ac.phi.sin();
        inputs.turb_from = inputs.turb_to;
        inputs.turb_to = dryden.step(alt.max(0.1), ac.v_a, dt);
        if cfg.sim.gust_inertia {
            inputs.turb_rate = (inputs.turb_to - inputs.turb_from) / dt;
        }
        inputs.u = u;
        inputs.m_c = match phase {
            Phase::Traction => winch_pi(loads.f_w, wp.f_ref, &mut pi, dt, wp),
            Phase::Retraction => {
                let omega_ref = -cfg.retraction.reel_in_speed / wp.r_w;
                let m = wp.nu_w * omega - wp.r_w * loads.f_w + cfg.retraction.speed_gain * wp.r_w * (omega_ref - omega);
                m.clamp(wp.mc_min, wp.mc_max)
            }
        };

        let mut ruptured = None;
        for sub in 1..=n_sub {
            let span = ((sub - 1) as f64 / n_sub as f64, sub as f64 / n_sub as f64);
            y = plant.rk4(&y, h_sub, &inputs, span.0, span.1).map_err(|m| diverge(t, m, trace.last()))?;
            if sub < n_sub {
                let (_, l) = plant.eval(&y, &inputs, span.1).map_err(|m| diverge(t, m, trace.last()))?;
                if l.f_t > cfg.switch.f_rupture {
                    ruptured = Some((t + sub as f64 * h_sub, l));
                    break;
                }
            }
        }
        if let Some((tr, l)) = ruptured {
            let mut r = row;
            r.t = tr;
            r.f_t = l.f_t;
            r.f_w = l.f_w;
            r.state.delta_t = l.delta_t;
            trace.push(r);
            max_force = max_force.max(l.f_t);
            outcome = Outcome::Ruptured;
            reason = Some(format!("tether force {:.1} N at t = {tr:.3} s", l.f_t));
            t = tr;
            break;
        }
    }
    let duration = t;
    let report = power_report(&trace, cfg)?;
    Ok(SimResult {
        safety_fraction: if duration > 0.0 { safety_time / duration } else { 0.0 },
        trace,
        outcome,
        reason,
        duration,
        max_force,
        cycles: s_travel.abs() / (2.0 * PI),
        report,
    })
}

/// Power figures from a trace.
pub fn power_report(trace: &[TraceRow], cfg: &RunConfig) -> Result<PowerReport, PowerError> {
    let ac = &cfg.aircraft;
    let rho = cfg.atmosphere.rho;
    let mut energy = 0.0;
    for w in trace.windows(2) {
        energy += 0.5 * (w[0].p_mech + w[1].p_mech) * (w[1].t - w[0].t);
    }
    let duration = match (trace.first(), trace.last()) {
        (Some(a), Some(b)) => b.t - a.t,
        _ => 0.0,
    };
    let n = trace.len().max(1) as f64;
    let mean = |f: &dyn Fn(&TraceRow) -> f64| trace.iter().map(f).sum::<f64>() / n;
    let cl = |r: &TraceRow| -ac.aero.coeffs_a(r.applied.alpha).z;
    let cd = |r: &TraceRow| -ac.aero.coeffs_a(r.applied.alpha).x;
    let c_l = mean(&cl);
    let c_d = mean(&cd);
    let c_d_tether = tether_drag_coefficient(cfg.tether.cd_t, cfg.tether.d_t, mean(&|r| r.state.h_tau), ac.s_ref);
    let qs = |r: &TraceRow| 0.5 * rho * ac.s_ref * r.state.v_a * r.state.v_a;
    let f_a = mean(&|r| qs(r) * cl(r).hypot(cd(r)));
    let f_drag = mean(&|r| qs(r) * (cd(r) + c_d_tether));
    let f_g = ac.mass * cfg.atmosphere.g;
    let zeta = harvesting_factor(c_l, c_d, c_d_tether)?;
    let e = efficiency_factor(f_drag, f_a, f_g, cfg.curve.psi0).ok();
    let wind_speed = mean(&|r| r.wind.norm());
    let p = trace.iter().map(|r| r.p_mech);
    Ok(PowerReport {
        p_mech_mean: if duration > 0.0 { energy / duration } else { 0.0 },
        p_mech_min: p.clone().fold(f64::INFINITY, f64::min),
        p_mech_max: p.fold(f64::NEG_INFINITY, f64::max),
        energy,
        duration,
        c_l,
        c_d,
        c_d_tether,
        zeta,
        e,
        wind_speed,
        p_bound: e.map(|e| power_bound(e, ac.s_ref, zeta, rho, wind_speed)),
    })
}
