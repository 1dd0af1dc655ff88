use serde::{Deserialize, Serialize};

use super::{Polarity, StimError, StimParams};

/// Commanded instantaneous current at `t_us` after command start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveformSample {
    pub t_us: u64,
    pub drive_ma: f64,
}

/// Rectangular pulse train. The positive phase opens each period; for
/// alternating polarity the negative phase of equal width starts at half-period.
pub fn synth_sample(params: &StimParams, t_us: u64) -> Result<WaveformSample, StimError> {
    params.validate()?;
    if t_us >= params.duration_ms as u64 * 1000 {
        return Err(StimError::BeyondDuration {
            t_us,
            duration_ms: params.duration_ms,
        });
    }
    let period = params.period_us();
    let t = t_us as f64;
    let phase = t - (t / period).floor() * period;
    let width = params.pulse_width_us as f64;
    let amp = params.amplitude_ma;
    let drive_ma = match params.polarity {
        Polarity::Positive if phase < width => amp,
        Polarity::Negative if phase < width => -amp,
        Polarity::Alternating if phase < width => amp,
        Polarity::Alternating if phase >= period / 2.0 && phase < period / 2.0 + width => -amp,
        _ => 0.0,
    };
    Ok(WaveformSample { t_us, drive_ma })
}
