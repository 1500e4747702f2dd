use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::ThermalError;

/// Lumped first-order mirror-holder plant. The temperature relaxes towards
/// `ambient + heater_gain * power` with `tau_heat` while it is below that
/// target and with `tau_cool` while above it.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalPlant {
    pub tau_heat: f64,
    pub tau_cool: f64,
    pub ambient: f64,
    /// Steady-state temperature rise per watt (K/W).
    pub heater_gain: f64,
    pub max_power: f64,
}

impl Default for ThermalPlant {
    fn default() -> Self {
        Self {
            tau_heat: 5.39 * 3600.0,
            tau_cool: 3.89 * 3600.0,
            ambient: 293.15,
            heater_gain: 4.0,
            max_power: 5.0,
        }
    }
}

impl ThermalPlant {
    fn derivative(&self, temperature: f64, power: f64) -> f64 {
        let target = self.ambient + self.heater_gain * power;
        let tau = if target >= temperature { self.tau_heat } else { self.tau_cool };
        (target - temperature) / tau
    }
}

/// Discrete PID acting on the sensed temperature. The output is clamped to
/// [0, `max_output`]; `output_bias` is a constant feed-forward power.
#[derive(Debug, Clone, PartialEq)]
pub struct PidParams {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub max_output: f64,
    pub sample_interval: f64,
    /// Bound on the magnitude of the integral term (W).
    pub integral_limit: f64,
    pub output_bias: f64,
}

impl Default for PidParams {
    fn default() -> Self {
        Self {
            kp: 20.0,
            ki: 0.02,
            kd: 0.0,
            max_output: 5.0,
            sample_interval: 1.0,
            integral_limit: 5.0,
            output_bias: 0.0,
        }
    }
}

impl PidParams {
    pub fn off() -> Self {
        Self { kp: 0.0, ki: 0.0, kd: 0.0, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalRun {
    pub setpoint: f64,
    pub duration: f64,
    pub dt: f64,
    pub noise_rms: f64,
    pub seed: u64,
    /// Defaults to the plant's ambient temperature.
    pub initial_temperature: Option<f64>,
    /// Spacing of recorded trace samples; zero records every step.
    pub record_interval: f64,
    /// Band used for the settling time.
    pub settle_band: f64,
}

impl ThermalRun {
    pub fn new(setpoint: f64, duration: f64) -> Self {
        Self {
            setpoint,
            duration,
            dt: 1.0,
            noise_rms: 0.0,
            seed: 0,
            initial_temperature: None,
            record_interval: 10.0,
            settle_band: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub time: f64,
    pub temperature: f64,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureTrace {
    pub samples: Vec<TraceSample>,
    /// RMS of the true temperature about the setpoint over the last half.
    pub ripple_rms: f64,
    /// Time after which the temperature stays inside the settle band.
    pub settling_time: Option<f64>,
}

pub fn simulate_temperature_control(
    plant: &ThermalPlant,
    pid: &PidParams,
    run: &ThermalRun,
) -> Result<TemperatureTrace, ThermalError> {
    if !(plant.tau_heat > 0.0 && plant.tau_cool > 0.0) {
        return Err(ThermalError::Invalid("time constants must be positive".into()));
    }
    if !(run.dt > 0.0) || !(pid.sample_interval > 0.0) {
        return Err(ThermalError::Invalid("time step and sample interval must be positive".into()));
    }
    if !(run.duration >= 100.0 * run.dt) {
        return Err(ThermalError::Invalid(format!(
            "duration {} s is shorter than 100 steps of {} s",
            run.duration, run.dt
        )));
    }
    if !(run.noise_rms >= 0.0) {
        return Err(ThermalError::Invalid("noise rms must be non-negative".into()));
    }
    let noise = Normal::new(0.0, run.noise_rms).map_err(|e| ThermalError::Invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);

    let steps = (run.duration / run.dt).round() as usize;
    let sample_every = ((pid.sample_interval / run.dt).round() as usize).max(1);
    let record_every = ((run.record_interval / run.dt).round() as usize).max(1);
    let half = steps / 2;

    let mut temperature = run.initial_temperature.unwrap_or(plant.ambient);
    let mut power = 0.0;
    let mut integral = 0.0f64;
    let mut previous: Option<f64> = None;
    let mut samples = Vec::with_capacity(steps / record_every + 2);
    let mut ripple_sum = 0.0;
    let mut ripple_n = 0usize;
    let mut last_outside: Option<f64> = None;
    let ts = sample_every as f64 * run.dt;

    for step in 0..=steps {
        let time = step as f64 * run.dt;
        if step % sample_every == 0 {
            let measured = temperature + if run.noise_rms > 0.0 { noise.sample(&mut rng) } else { 0.0 };
            let error = run.setpoint - measured;
            let derivative = previous.map_or(0.0, |p| -(measured - p) / ts);
            previous = Some(measured);
            let candidate = (integral + pid.ki * error * ts).clamp(-pid.integral_limit, pid.integral_limit);
            let raw = pid.output_bias + pid.kp * error + candidate + pid.kd * derivative;
            let saturated_high = raw > pid.max_output && error > 0.0;
            let saturated_low = raw < 0.0 && error < 0.0;
            if !(saturated_high || saturated_low) {
                integral = candidate;
            }
            power = (pid.output_bias + pid.kp * error + integral + pid.kd * derivative).clamp(0.0, pid.max_output);
        }

        let deviation = temperature - run.setpoint;
        if deviation.abs() > 100.0 {
            return Err(ThermalError::Diverged { time, deviation: deviation.abs() });
        }
        if step >= half {
            ripple_sum += deviation * deviation;
            ripple_n += 1;
        }
        if deviation.abs() > run.settle_band {
            last_outside = Some(time);
        }
        if step % record_every == 0 || step == steps {
            samples.push(TraceSample { time, temperature, power });
        }
        temperature += run.dt * plant.derivative(temperature, power);
    }

    let end = steps as f64 * run.dt;
    let settling_time = match last_outside {
        None => Some(0.0),
        Some(t) if t < end => Some(t + run.dt),
        Some(_) => None,
    };
    Ok(TemperatureTrace {
        samples,
        ripple_rms: (ripple_sum / ripple_n.max(1) as f64).sqrt(),
        settling_time,
    })
}
