#include "lambdamem/config.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <sstream>
#include <vector>

#include "lambdamem/units.hpp"

namespace lambdamem {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t end = 0;
    const double v = std::stod(value, &end);
    if (end == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("invalid numeric value for " + key + ": '" + value + "'");
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t end = 0;
    const int v = std::stoi(value, &end);
    if (end == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("invalid integer value for " + key + ": '" + value + "'");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct KeyDef {
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  // Null getter → set-only convenience key, omitted from canonical emission.
  std::function<std::string(const ExperimentConfig&)> get;
};

#define SCALAR_KEY(NAME, FIELD)                                            \
  KeyDef {                                                                 \
    NAME,                                                                  \
        [](ExperimentConfig& c, const std::string& v) {                    \
          c.FIELD = parse_double(NAME, v);                                 \
        },                                                                 \
        [](const ExperimentConfig& c) { return format_double(c.FIELD); }   \
  }
#define INT_KEY(NAME, FIELD)                                               \
  KeyDef {                                                                 \
    NAME,                                                                  \
        [](ExperimentConfig& c, const std::string& v) {                    \
          c.FIELD = parse_int(NAME, v);                                    \
        },                                                                 \
        [](const ExperimentConfig& c) { return std::to_string(c.FIELD); }  \
  }
#define SHAPE_KEY(NAME, FIELD)                                             \
  KeyDef {                                                                 \
    NAME,                                                                  \
        [](ExperimentConfig& c, const std::string& v) {                    \
          try {                                                            \
            c.FIELD = pulse_shape_from_string(v);                          \
          } catch (const std::invalid_argument& e) {                       \
            throw ConfigError(std::string(NAME) + ": " + e.what());        \
          }                                                                \
        },                                                                 \
        [](const ExperimentConfig& c) { return to_string(c.FIELD); }       \
  }

const std::vector<KeyDef>& key_table() {
  static const std::vector<KeyDef> table = {
      SCALAR_KEY("scheme.delta_signal_mhz", delta_signal_mhz),
      SCALAR_KEY("scheme.delta_twophoton_mhz", delta_twophoton_mhz),
      SCALAR_KEY("scheme.hyperfine_splitting_mhz", hyperfine_splitting_mhz),
      SCALAR_KEY("scheme.gamma_rad_mhz", gamma_rad_mhz),
      SCALAR_KEY("scheme.coll_broadening_mhz_per_torr", coll_broadening_mhz_per_torr),
      SCALAR_KEY("scheme.buffer_pressure_torr", buffer_pressure_torr),
      SCALAR_KEY("scheme.gamma_spin_mhz", gamma_spin_mhz),
      SCALAR_KEY("scheme.coupling_signal_1", coupling_signal_1),
      SCALAR_KEY("scheme.coupling_signal_2", coupling_signal_2),
      SCALAR_KEY("scheme.coupling_control_1", coupling_control_1),
      SCALAR_KEY("scheme.coupling_control_2", coupling_control_2),
      SCALAR_KEY("cell.optical_depth", optical_depth),
      SCALAR_KEY("cell.length_mm", cell_length_mm),
      SCALAR_KEY("cell.temperature_c", temperature_c),
      SCALAR_KEY("cell.atomic_mass_amu", atomic_mass_amu),
      SCALAR_KEY("cell.wavelength_nm", wavelength_nm),
      SCALAR_KEY("cell.twophoton_doppler_fraction", twophoton_doppler_fraction),
      INT_KEY("grid.n_velocity_classes", n_velocity_classes),
      INT_KEY("grid.n_rings", n_rings),
      INT_KEY("grid.n_z", n_z),
      SCALAR_KEY("grid.dt_ns", dt_ns),
      SCALAR_KEY("beam.signal_waist_um", signal_waist_um),
      SCALAR_KEY("beam.control_waist_um", control_waist_um),
      SHAPE_KEY("signal.shape", signal_shape),
      // Convenience: sets the signal duration from a Lorentzian linewidth.
      KeyDef{"signal.bandwidth_mhz",
             [](ExperimentConfig& c, const std::string& v) {
               const double mhz = parse_double("signal.bandwidth_mhz", v);
               if (mhz <= 0.0)
                 throw ConfigError("signal.bandwidth_mhz must be positive");
               c.signal_fwhm_ns = fwhm_from_lorentzian_bandwidth(mhz);
             },
             nullptr},
      SCALAR_KEY("signal.fwhm_ns", signal_fwhm_ns),
      SCALAR_KEY("signal.center_ns", signal_center_ns),
      SHAPE_KEY("control.shape", control_shape),
      SCALAR_KEY("control.peak_mhz", control_peak_mhz),
      SCALAR_KEY("control.fwhm_ns", control_fwhm_ns),
      SCALAR_KEY("control.read_peak_mhz", control_read_peak_mhz),
      SCALAR_KEY("control.read_fwhm_ns", control_read_fwhm_ns),
      SCALAR_KEY("protocol.storage_time_ns", storage_time_ns),
      SCALAR_KEY("protocol.memory_lifetime_ns", memory_lifetime_ns),
  };
  return table;
}

#undef SCALAR_KEY
#undef INT_KEY
#undef SHAPE_KEY

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

void apply_setting(ExperimentConfig& config, const std::string& key,
                   const std::string& value) {
  for (const auto& def : key_table()) {
    if (key == def.key) {
      def.set(config, value);
      return;
    }
  }
  throw ConfigError("unknown configuration key: " + key);
}

void apply_config_text(ExperimentConfig& config, std::istream& in) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'section.key = value'");
    try {
      apply_setting(config, trim(stripped.substr(0, eq)),
                    trim(stripped.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::string to_config_text(const ExperimentConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& def : key_table()) {
    if (!def.get) continue;
    const std::string key = def.key;
    const std::string this_section = key.substr(0, key.find('.'));
    if (this_section != section) {
      if (!section.empty()) out << '\n';
      section = this_section;
    }
    out << key << " = " << def.get(config) << '\n';
  }
  return out.str();
}

PhysicsPoint resolve(const ExperimentConfig& c) {
  require(c.hyperfine_splitting_mhz > 0.0, "scheme.hyperfine_splitting_mhz must be positive");
  require(c.gamma_rad_mhz > 0.0, "scheme.gamma_rad_mhz must be positive");
  require(c.coll_broadening_mhz_per_torr >= 0.0,
          "scheme.coll_broadening_mhz_per_torr must be non-negative");
  require(c.buffer_pressure_torr >= 0.0, "scheme.buffer_pressure_torr must be non-negative");
  require(c.gamma_spin_mhz >= 0.0, "scheme.gamma_spin_mhz must be non-negative");

  const double norm = c.coupling_signal_1 * c.coupling_signal_1 +
                      c.coupling_signal_2 * c.coupling_signal_2;
  require(std::abs(norm - 1.0) < 1e-9,
          "signal couplings must satisfy c1² + c2² = 1 (optical depth is "
          "defined against the total signal coupling)");
  const double prod1 = c.coupling_signal_1 * c.coupling_control_1;
  const double prod2 = c.coupling_signal_2 * c.coupling_control_2;
  require(prod1 * prod2 <= 0.0,
          "pathway coupling products c1·b1 and c2·b2 must have opposite signs");

  require(c.optical_depth >= 0.0, "cell.optical_depth must be non-negative");
  require(c.cell_length_mm > 0.0, "cell.length_mm must be positive");
  require(c.twophoton_doppler_fraction >= 0.0 && c.twophoton_doppler_fraction <= 1.0,
          "cell.twophoton_doppler_fraction must lie in [0, 1]");
  require(c.n_velocity_classes >= 1, "grid.n_velocity_classes must be at least 1");
  require(c.n_rings >= 1, "grid.n_rings must be at least 1");
  require(c.n_z >= 8, "grid.n_z must be at least 8");
  require(c.dt_ns > 0.0, "grid.dt_ns must be positive");
  require(c.signal_waist_um > 0.0 && c.control_waist_um > 0.0,
          "beam waists must be positive");
  require(c.signal_fwhm_ns > 0.0, "signal.fwhm_ns must be positive");
  require(c.control_fwhm_ns > 0.0 && c.control_read_fwhm_ns > 0.0,
          "control FWHM values must be positive");
  require(c.control_peak_mhz >= 0.0 && c.control_read_peak_mhz >= 0.0,
          "control peak Rabi frequencies must be non-negative");
  require(c.storage_time_ns >= 0.0, "protocol.storage_time_ns must be non-negative");
  require(c.memory_lifetime_ns >= 0.0, "protocol.memory_lifetime_ns must be non-negative");

  PhysicsPoint point;
  point.scheme.delta_signal = mhz_to_radns(c.delta_signal_mhz);
  point.scheme.delta_twophoton = mhz_to_radns(c.delta_twophoton_mhz);
  point.scheme.hyperfine_splitting = mhz_to_radns(c.hyperfine_splitting_mhz);
  point.scheme.gamma_rad = mhz_to_radns(c.gamma_rad_mhz);
  point.scheme.gamma_coll =
      mhz_to_radns(c.coll_broadening_mhz_per_torr * c.buffer_pressure_torr);
  point.scheme.gamma_spin = mhz_to_radns(c.gamma_spin_mhz);
  point.scheme.c1 = c.coupling_signal_1;
  point.scheme.c2 = c.coupling_signal_2;
  point.scheme.b1 = c.coupling_control_1;
  point.scheme.b2 = c.coupling_control_2;

  point.ensemble.optical_depth = c.optical_depth;
  point.ensemble.cell_length = c.cell_length_mm;
  try {
    point.ensemble.doppler_sigma = derive_doppler_sigma(
        c.temperature_c, c.atomic_mass_amu, c.wavelength_nm);
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("cell parameters: ") + e.what());
  }
  point.ensemble.twophoton_doppler_fraction = c.twophoton_doppler_fraction;
  point.ensemble.n_velocity_classes = c.n_velocity_classes;
  point.ensemble.n_rings = c.n_rings;
  point.ensemble.signal_waist = c.signal_waist_um;
  point.ensemble.control_waist = c.control_waist_um;
  point.ensemble.n_z = c.n_z;
  point.ensemble.dt = c.dt_ns;
  point.ensemble.memory_lifetime = c.memory_lifetime_ns;

  point.signal.shape = c.signal_shape;
  point.signal.fwhm = c.signal_fwhm_ns;
  point.signal.center = c.signal_center_ns;
  point.signal = photon_normalized(point.signal);

  point.control_in.shape = c.control_shape;
  point.control_in.peak_amplitude = mhz_to_radns(c.control_peak_mhz);
  point.control_in.fwhm = c.control_fwhm_ns;
  point.control_in.center = c.signal_center_ns; // nominal: aligned with signal

  point.control_out.shape = c.control_shape;
  point.control_out.peak_amplitude = mhz_to_radns(c.control_read_peak_mhz);
  point.control_out.fwhm = c.control_read_fwhm_ns;
  point.control_out.center = 0.0; // placed by the protocol driver

  point.storage_time = c.storage_time_ns;
  return point;
}

}  // namespace lambdamem
