#include "auvhunt/acoustics.hpp"

#include <cmath>
#include <string>

#include "auvhunt/errors.hpp"

namespace auvhunt::acoustics {

void ChannelParams::validate() const {
  if (!(frequency_khz > 0.0) || !std::isfinite(frequency_khz)) {
    throw ValidationError("channel.frequency_khz must be positive");
  }
  if (!(spreading >= 1.0 && spreading <= 2.0)) {
    throw ValidationError("channel.spreading must lie in [1, 2]");
  }
  if (!(shipping >= 0.0 && shipping <= 1.0)) {
    throw ValidationError("channel.shipping must lie in [0, 1]");
  }
  if (!(wind_mps >= 0.0) || !std::isfinite(wind_mps)) {
    throw ValidationError("channel.wind_mps must be non-negative");
  }
  if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz)) {
    throw ValidationError("channel.bandwidth_hz must be positive");
  }
}

Decibels thorp_db_per_km(double f) {
  if (!(f > 0.0) || !std::isfinite(f)) {
    throw ValidationError("thorp_db_per_km: frequency must be positive, got " +
                          std::to_string(f));
  }
  const double f2 = f * f;
  return {3.3e-3 + 0.11 * f2 / (1.0 + f2) + 44.0 * f2 / (4100.0 + f2) + 3.0e-4 * f2};
}

Decibels path_loss_db(double d, const ChannelParams& channel) {
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw ValidationError("path_loss_db: distance must be positive, got " +
                          std::to_string(d));
  }
  const double absorption = thorp_db_per_km(channel.frequency_khz).value;
  return {10.0 * channel.spreading * std::log10(d) + d * absorption};
}

double path_loss_linear(double d, const ChannelParams& channel) {
  return db_to_linear(path_loss_db(d, channel));
}

NoiseLevels ambient_noise_db(const ChannelParams& channel) {
  channel.validate();
  const double f = channel.frequency_khz;
  const double lf = std::log10(f);
  NoiseLevels n;
  n.turbulence = {17.0 - 30.0 * lf};
  n.shipping = {40.0 + 20.0 * (channel.shipping - 0.5) + 26.0 * lf -
                60.0 * std::log10(f + 0.03)};
  n.wind = {50.0 + 7.5 * std::sqrt(channel.wind_mps) + 20.0 * lf -
            40.0 * std::log10(f + 0.4)};
  n.thermal = {-15.0 + 20.0 * lf};
  const double sum = db_to_linear(n.turbulence) + db_to_linear(n.shipping) +
                     db_to_linear(n.wind) + db_to_linear(n.thermal);
  n.total = linear_to_db(sum);
  return n;
}

double db_to_linear(Decibels level) { return std::pow(10.0, level.value / 10.0); }

Decibels linear_to_db(double ratio) {
  if (!(ratio > 0.0)) {
    throw ValidationError("linear_to_db: ratio must be positive, got " +
                          std::to_string(ratio));
  }
  return {10.0 * std::log10(ratio)};
}

double ambient_noise_watts(const ChannelParams& channel, double reference_scale) {
  if (!(reference_scale >= 0.0)) {
    throw ValidationError("reference_scale must be non-negative");
  }
  return db_to_linear(ambient_noise_db(channel).total) * channel.bandwidth_hz *
         reference_scale;
}

}  // namespace auvhunt::acoustics
