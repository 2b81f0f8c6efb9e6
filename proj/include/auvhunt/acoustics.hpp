#pragma once

namespace auvhunt::acoustics {

/// A level in decibels. The reference depends on the quantity: dB/km for
/// attenuation, dB for path loss, dB re uPa^2/Hz for noise.
struct Decibels {
  double value = 0.0;
};

struct ChannelParams {
  double frequency_khz = 25.0;
  double spreading = 1.5;   ///< m in [1, 2]
  double shipping = 0.5;    ///< s in [0, 1]
  double wind_mps = 0.0;
  double bandwidth_hz = 1000.0;

  void validate() const;
};

struct NoiseLevels {
  Decibels turbulence;
  Decibels shipping;
  Decibels wind;
  Decibels thermal;
  Decibels total;
};

/// Thorp absorption in dB/km for a frequency in kHz.
Decibels thorp_db_per_km(double frequency_khz);

/// Shallow-water path loss 10*m*lg(d) + d*a(f) for a distance in km.
Decibels path_loss_db(double distance_km, const ChannelParams& channel);

/// Linear path loss d^m * a(f)^d.
double path_loss_linear(double distance_km, const ChannelParams& channel);

/// Turbulence, shipping, wind and thermal noise PSD; the total is summed in
/// the linear power domain.
NoiseLevels ambient_noise_db(const ChannelParams& channel);

double db_to_linear(Decibels level);
Decibels linear_to_db(double ratio);

/// Ambient noise power in watts: 10^(N_u/10) * bandwidth * reference_scale.
/// `reference_scale` is the single calibration constant that bridges the
/// dB re uPa^2/Hz level into the watt scale used by transmit and jam powers.
double ambient_noise_watts(const ChannelParams& channel, double reference_scale);

}  // namespace auvhunt::acoustics
