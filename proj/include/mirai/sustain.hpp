#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mirai/common.hpp"

namespace mirai::sustain {

/// Average power draw in watts.
struct PowerProfile {
  double cpu_watts = 65.0;
  double gpu_watts = 0.0;

  double total_kilowatts() const { return (cpu_watts + gpu_watts) / 1000.0; }
};

struct EmissionConstants {
  double grid_intensity = 0.11;     // kgCO2e per kWh
  double daily_per_capita = 49.0;   // kgCO2e per person-day
};

/// kgCO2e of running at `profile` for `runtime_hours`, divided by the daily
/// per-capita reference.
double carbon_estimate(const PowerProfile& profile, double runtime_hours,
                       const EmissionConstants& constants);

struct CohortAlignment {
  std::vector<double> aligned;
  bool all_zero = false;
};

/// 1 - raw / max over the cohort. An all-zero cohort aligns every model to 1.
CohortAlignment cohort_align(std::span<const double> raw);

/// Raw cost figures of one model.
struct SustainabilityRaw {
  double parameter_count = 0.0;
  double flops_per_sample = 0.0;
  double macs_per_sample = 0.0;
  double normalized_kgco2e = 0.0;
  double runtime_hours = 0.0;
  bool runtime_measured = false;
};

struct SustainabilityRecord {
  SustainabilityRaw raw;
  double parameter_count = 0.0;
  double flops_per_sample = 0.0;
  double macs_per_sample = 0.0;
  double normalized_kgco2e = 0.0;
  std::vector<std::string> flags;
};

/// Aligns every cost metric across the cohort (same order as `raw`).
std::vector<SustainabilityRecord> align_cohort(std::span<const SustainabilityRaw> raw);

/// Mean of the four aligned values.
double sustainability_dimension(const SustainabilityRecord& record);

}  // namespace mirai::sustain
