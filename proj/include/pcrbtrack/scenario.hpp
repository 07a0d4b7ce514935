#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pcrbtrack {

/// Raised for malformed or inconsistent configuration. The message names the
/// offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Physical constants of the platform, radio front end and noise model.
struct SystemParams {
  double P0 = 79.8563;    // blade profile power [W]
  double Pi = 88.6279;    // induced power in hover [W]
  double Utip = 120.0;    // rotor tip speed [m/s]
  double vh = 4.03;       // mean rotor induced velocity in hover [m/s]
  double chi = 0.0185;    // parasite drag lump [kg m^2]
  double Pa = 0.1;        // transmit power [W]
  double Nsym = 1e4;      // matched filtering gain
  double lambda = 0.01;   // carrier wavelength [m]
  double sigma2 = 1e-11;  // receiver noise power [W]
  int Nt = 16;
  int Nr = 16;
  double eps_rcs = 100.0;  // radar cross section [m^2]
  double a1 = 0.1;
  double a2 = 10.0;
  double a3 = 2000.0;
  double H = 50.0;        // flight altitude [m]
  double q_tilde = 1.0;   // process noise intensity

  bool operator==(const SystemParams&) const = default;
};

struct MissionSpec {
  double x_I = 0.0;
  double x_F = 60.0;
  int N = 50;
  double dT = 0.2;
  double E_tot = 1800.0;
  double v_max = 30.0;
  double alpha = 0.5;
  double v_T0 = 10.0;
  double target_x0 = 60.0;  // initial target position [m]

  bool operator==(const MissionSpec&) const = default;
};

struct EstimatorInit {
  double M0_x = 1.0;  // [m^2]
  double M0_v = 1.0;  // [(m/s)^2]
  double perturb_x = 1.0;
  double perturb_v = 1.0;
  std::uint64_t seed = 1;

  bool operator==(const EstimatorInit&) const = default;
};

/// Which diagonal entry of the inverse Fisher matrix is labelled "position".
/// kMatrixConsistent uses (J^-1)_11 = J22 / det J; kSwapped uses J11 / det J.
enum class PcrbConvention { kMatrixConsistent, kSwapped };

struct PlannerOptions {
  PcrbConvention convention = PcrbConvention::kMatrixConsistent;
  double dinkelbach_tol = 1e-9;
  int dinkelbach_max_iter = 50;

  bool operator==(const PlannerOptions&) const = default;
};

struct DerivedConstants {
  double beta_r = 0.0;   // lambda^2 eps / (64 pi^3) [m^4]
  double gamma_r = 0.0;  // Nt Nr Pa Nsym beta_r / sigma2 [m^4]

  bool operator==(const DerivedConstants&) const = default;
};

struct Scenario {
  SystemParams sys;
  MissionSpec mission;
  EstimatorInit init;
  PlannerOptions planner;
  DerivedConstants derived;

  bool operator==(const Scenario&) const = default;
};

double dbm_to_watts(double dbm);

DerivedConstants derive_constants(const SystemParams& sys);

/// Parses a flat JSON object of SI-unit parameters. Missing keys take their
/// defaults; an empty document yields the default scenario. Unknown keys,
/// type errors and invariant violations raise ConfigError.
Scenario load_scenario(std::string_view config_text);

Scenario load_scenario_file(const std::string& path);

/// Throws ConfigError naming the first violated invariant.
void validate(const Scenario& s);

/// Flat JSON with every field; load_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& s);

}  // namespace pcrbtrack
