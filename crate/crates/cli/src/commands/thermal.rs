use panoptic::surface_thermal::{effective_radius, simulate_temperature_control, MirrorSpec, PidParams, ThermalPlant, ThermalRun};

use crate::config::Config;
use crate::error::{numerical, CliError};
use crate::output::{num, Output, Report, Table};

pub const SECTIONS: [&str; 2] = ["thermal", "pid"];

const DEFAULT_STEPS_K: [f64; 5] = [0.05, 0.1, 0.21, 0.42, 1.0];

pub fn run(cfg: &Config, out: &mut Output) -> Result<(), CliError> {
    let seed = cfg.seed()?;
    let base = ThermalPlant::default();
    let plant = ThermalPlant {
        tau_heat: cfg.f64_or("thermal.tau_heat_s", base.tau_heat)?,
        tau_cool: cfg.f64_or("thermal.tau_cool_s", base.tau_cool)?,
        ambient: cfg.f64_or("thermal.ambient_K", base.ambient)?,
        heater_gain: cfg.f64_or("thermal.heater_gain_K_per_W", base.heater_gain)?,
        max_power: cfg.f64_or("thermal.max_power_W", base.max_power)?,
    };
    let gains = PidParams::default();
    let pid = PidParams {
        kp: cfg.f64_or("pid.kp_W_per_K", gains.kp)?,
        ki: cfg.f64_or("pid.ki_W_per_K_s", gains.ki)?,
        kd: cfg.f64_or("pid.kd_W_s_per_K", gains.kd)?,
        max_output: cfg.f64_or("pid.max_output_W", gains.max_output)?,
        sample_interval: cfg.f64_or("pid.sample_interval_s", gains.sample_interval)?,
        integral_limit: cfg.f64_or("pid.integral_limit_W", gains.integral_limit)?,
        output_bias: cfg.f64_or("pid.output_bias_W", gains.output_bias)?,
    };
    let setpoint = cfg.f64_or("thermal.setpoint_K", plant.ambient + 5.0)?;
    let duration = cfg.f64_or("thermal.duration_s", 10.0 * 3600.0)?;
    if !(duration > 0.0) {
        return Err(CliError::Usage(format!("`thermal.duration_s` must be positive, got {duration}")));
    }
    let mut run = ThermalRun::new(setpoint, duration);
    run.dt = cfg.f64_or("thermal.dt_s", run.dt)?;
    run.noise_rms = cfg.f64_or("thermal.sensor_noise_K", 0.3e-3)?;
    run.record_interval = cfg.f64_or("thermal.record_interval_s", run.record_interval)?;
    run.settle_band = cfg.f64_or("thermal.settle_band_K", run.settle_band)?;
    run.initial_temperature = cfg.f64_opt("thermal.initial_temperature_K")?;
    run.seed = seed;

    let reference = MirrorSpec::fabricated();
    let mirror = MirrorSpec {
        radius: cfg.f64_or("thermal.mirror_radius_m", reference.radius)?,
        expansion_coefficient: cfg.f64_or("thermal.alpha_per_K", reference.expansion_coefficient)?,
        ..reference
    };
    let steps = cfg.f64_list_opt("thermal.delta_T_K")?.unwrap_or_else(|| DEFAULT_STEPS_K.to_vec());
    cfg.finish(&SECTIONS)?;

    let trace = simulate_temperature_control(&plant, &pid, &run).map_err(numerical)?;
    let mut table = Table::new(&["t_s", "temp_K", "power_W"]);
    for s in &trace.samples {
        table.row(&[num(s.time), num(s.temperature), num(s.power)]);
    }
    out.write("thermal_trace.csv", &table.finish())?;

    let mut conversion = Table::new(&["delta_T_K", "delta_R_nm"]);
    let t0 = mirror.reference_temperature;
    for &dt in &steps {
        let dr = effective_radius(&mirror, t0 + dt) - mirror.radius;
        conversion.row(&[num(dt), num(dr * 1e9)]);
    }
    out.write("thermal_tuning.csv", &conversion.finish())?;

    let mut report = Report::default();
    report.line("setpoint_K", setpoint);
    report.line("duration_s", duration);
    report.line("ripple_mK", format!("{:.6}", trace.ripple_rms * 1e3));
    match trace.settling_time {
        Some(t) => report.line("settling_time_s", format!("{t:.1}")),
        None => report.line("settling_time_s", "none"),
    }
    for &dt in &steps {
        let dr = effective_radius(&mirror, t0 + dt) - mirror.radius;
        report.line(&format!("delta_R_nm_at_{dt}K"), format!("{:.3}", dr * 1e9));
    }
    out.write("thermal_summary.txt", &report.finish())?;
    Ok(())
}
