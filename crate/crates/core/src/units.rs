//! Unit conversions. Every dB, dBm, minute and hour quantity enters the
//! crate through one of these functions.

pub const SECONDS_PER_MINUTE: f64 = 60.0;
pub const SECONDS_PER_HOUR: f64 = 3600.0;
pub const JOULES_PER_WATT_HOUR: f64 = 3600.0;

/// Power ratio in dB to a linear factor, e.g. `-93 dB -> 10^-9.3`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// dBm to watts, e.g. `-97.8 dBm -> 10^-12.78 W`.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

pub fn m2_per_minute_to_m2_per_s(d: f64) -> f64 {
    d / SECONDS_PER_MINUTE
}

pub fn hours_to_seconds(h: f64) -> f64 {
    h * SECONDS_PER_HOUR
}

pub fn joules_to_watt_hours(j: f64) -> f64 {
    j / JOULES_PER_WATT_HOUR
}

/// Target SINR for a rate in bit/s/Hz: `2^r - 1`.
pub fn rate_to_sinr(rate: f64) -> f64 {
    rate.exp2() - 1.0
}
