#include "mirai/sustain.hpp"

#include <algorithm>
#include <cmath>

namespace mirai::sustain {

double carbon_estimate(const PowerProfile& profile, double runtime_hours,
                       const EmissionConstants& constants) {
  if (!(constants.grid_intensity > 0.0) || !(constants.daily_per_capita > 0.0)) {
    throw ConfigError("emission constants must be positive");
  }
  if (!(profile.cpu_watts >= 0.0) || !(profile.gpu_watts >= 0.0)) {
    throw ConfigError("power draw must be non-negative");
  }
  if (!(runtime_hours >= 0.0)) throw MetricError("runtime must be non-negative");
  const double kwh = profile.total_kilowatts() * runtime_hours;
  return kwh * constants.grid_intensity / constants.daily_per_capita;
}

CohortAlignment cohort_align(std::span<const double> raw) {
  if (raw.size() < 2) throw MetricError("cohort normalization needs at least two models");
  double top = 0.0;
  for (double v : raw) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw MetricError("cohort cost values must be finite and >= 0");
    top = std::max(top, v);
  }
  CohortAlignment out;
  out.aligned.resize(raw.size(), 1.0);
  out.all_zero = top == 0.0;
  if (!out.all_zero) {
    for (std::size_t i = 0; i < raw.size(); ++i) out.aligned[i] = clamp01(1.0 - raw[i] / top);
  }
  return out;
}

std::vector<SustainabilityRecord> align_cohort(std::span<const SustainabilityRaw> raw) {
  std::vector<SustainabilityRecord> out(raw.size());
  auto column = [&](double SustainabilityRaw::*field, double SustainabilityRecord::*target,
                    const char* name) {
    std::vector<double> values;
    for (const auto& r : raw) values.push_back(r.*field);
    const CohortAlignment a = cohort_align(values);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      out[i].*target = a.aligned[i];
      if (a.all_zero) out[i].flags.push_back(std::string("cohort_all_zero:") + name);
    }
  };
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out[i].raw = raw[i];
    if (raw[i].runtime_measured) out[i].flags.push_back("runtime_measured_wall_clock");
  }
  column(&SustainabilityRaw::parameter_count, &SustainabilityRecord::parameter_count, "parameter_count");
  column(&SustainabilityRaw::flops_per_sample, &SustainabilityRecord::flops_per_sample, "flops_per_sample");
  column(&SustainabilityRaw::macs_per_sample, &SustainabilityRecord::macs_per_sample, "macs_per_sample");
  column(&SustainabilityRaw::normalized_kgco2e, &SustainabilityRecord::normalized_kgco2e,
         "normalized_kgco2e");
  return out;
}

double sustainability_dimension(const SustainabilityRecord& r) {
  return (r.parameter_count + r.flops_per_sample + r.macs_per_sample + r.normalized_kgco2e) / 4.0;
}

}  // namespace mirai::sustain
