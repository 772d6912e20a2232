#include "rydagg/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "rydagg/basis.hpp"
#include "rydagg/errors.hpp"
#include "rydagg/units.hpp"

namespace rydagg {

std::string to_string(Mode mode) { return mode == Mode::fssh ? "fssh" : "fixed-surface"; }

Mode parse_mode(const std::string& text) {
  if (text == "fssh") return Mode::fssh;
  if (text == "fixed-surface") return Mode::fixed_surface;
  throw ConfigError("unknown mode '" + text + "' (expected fssh or fixed-surface)", "mode");
}

std::vector<double> regular_chain(int n, double d) {
  std::vector<double> r(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) r[i] = i * d;
  return r;
}

std::vector<double> dislocated_end_chain(int n, double d, double a) {
  auto r = regular_chain(n, d);
  if (n >= 2) r[n - 1] = r[n - 2] + a;
  return r;
}

std::vector<double> dislocated_start_chain(int n, double d, double a) {
  std::vector<double> r(static_cast<std::size_t>(n));
  for (int i = 1; i < n; ++i) r[i] = r[i - 1] + (i == 1 ? a : d);
  return r;
}

std::vector<double> doubly_dislocated_chain(int n, double d, double a) {
  std::vector<double> r(static_cast<std::size_t>(n));
  for (int i = 1; i < n; ++i) r[i] = r[i - 1] + (i == 1 || i == n - 1 ? a : d);
  return r;
}

void AggregateConfig::validate() const {
  if (n_atoms < 2) throw ConfigError("need at least two atoms", "n_atoms");
  if (n_excitations < 1 || n_excitations > 2 || n_excitations >= n_atoms) {
    throw ConfigError("excitation count must be 1 or 2 and below n_atoms", "n_excitations");
  }
  if (static_cast<int>(positions_um.size()) != n_atoms) {
    throw ConfigError("expected " + std::to_string(n_atoms) + " positions, got " +
                          std::to_string(positions_um.size()),
                      "positions_um");
  }
  for (std::size_t i = 1; i < positions_um.size(); ++i) {
    if (!(positions_um[i] > positions_um[i - 1])) {
      throw ConfigError("positions must be strictly increasing", "positions_um");
    }
  }
  const auto n_states = static_cast<int>(binomial(n_atoms, n_excitations));
  if (initial_surface < 1 || initial_surface > n_states) {
    throw ConfigError("must lie in 1.." + std::to_string(n_states), "initial_surface");
  }
  if (!(mass_kg > 0.0)) throw ConfigError("must be positive", "mass_kg");
  if (!(sigma_um >= 0.0)) throw ConfigError("must be non-negative", "sigma_um");
  if (n_traj < 1) throw ConfigError("must be >= 1", "n_traj");
  if (!(dt_us > 0.0)) throw ConfigError("must be positive", "dt_us");
  if (n_sub_electronic < 1) throw ConfigError("must be >= 1", "n_sub_electronic");
  if (!(t_final_us > 0.0)) throw ConfigError("must be positive", "t_final_us");
  if (!(bin_width_um > 0.0)) throw ConfigError("must be positive", "bin_width_um");
  if (!(r_min_um >= 0.0)) throw ConfigError("must be non-negative", "r_min_um");
  try {
    output_frame_count(dynamics());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), "output_stride_us");
  }
  if (n_excitations == 2) {
    try {
      partition().validate(n_atoms);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), "partition_a");
    }
  }
}

Couplings AggregateConfig::couplings() const {
  return {units::frequency_coefficient(c3_mhz_um3), units::frequency_coefficient(c6_mhz_um6)};
}

double AggregateConfig::mass() const { return units::mass_from_kg(mass_kg); }

DynamicsOptions AggregateConfig::dynamics() const {
  DynamicsOptions o;
  o.mass = mass();
  o.dt = dt_us;
  o.n_sub_electronic = n_sub_electronic;
  o.t_final = t_final_us;
  o.output_stride = output_stride_us;
  o.mode = mode;
  o.freeze_coefficients = freeze_coefficients;
  o.reverse_on_frustrated = reverse_on_frustrated;
  o.eps_degenerate = eps_degenerate;
  o.d_max = d_max;
  o.r_min = r_min_um;
  return o;
}

Eigen::VectorXd AggregateConfig::positions() const {
  return Eigen::Map<const Eigen::VectorXd>(positions_um.data(),
                                           static_cast<Eigen::Index>(positions_um.size()));
}

Partition AggregateConfig::partition() const {
  Partition p;
  for (int atom : partition_a) p.a.push_back(atom - 1);
  std::sort(p.a.begin(), p.a.end());
  for (int atom = 0; atom < n_atoms; ++atom) {
    if (std::find(p.a.begin(), p.a.end(), atom) == p.a.end()) p.b.push_back(atom);
  }
  return p;
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(const std::string& text, const std::string& key, int line) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ConfigError("cannot parse '" + text + "' as a number", key, line);
  }
  return value;
}

bool parse_bool(const std::string& text, const std::string& key, int line) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("expected true or false, got '" + text + "'", key, line);
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const std::string& key, int line) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(trim(item), key, line));
  if (out.empty()) throw ConfigError("empty list", key, line);
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

struct GeometryKeys {
  std::optional<std::string> kind;
  std::optional<double> d;
  std::optional<double> a;
  int line = 0;
};

}  // namespace

std::string scenario_key(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line.substr(0, line.find('#')));
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    if (trim(line.substr(0, eq)) == "scenario") return trim(line.substr(eq + 1));
  }
  return {};
}

AggregateConfig parse_config(std::istream& in, AggregateConfig base) {
  AggregateConfig c = std::move(base);
  GeometryKeys geometry;
  bool explicit_positions = false;
  bool explicit_n_atoms = false;

  using Setter = std::function<void(const std::string&, const std::string&, int)>;
  const std::map<std::string, Setter> setters = {
      {"name", [&](auto& v, auto&, int) { c.name = v; }},
      {"scenario", [](auto&, auto&, int) {}},
      {"n_atoms", [&](auto& v, auto& k, int l) { c.n_atoms = parse_number<int>(v, k, l); explicit_n_atoms = true; }},
      {"n_excitations", [&](auto& v, auto& k, int l) { c.n_excitations = parse_number<int>(v, k, l); }},
      {"positions_um", [&](auto& v, auto& k, int l) { c.positions_um = parse_list<double>(v, k, l); explicit_positions = true; }},
      {"geometry", [&](auto& v, auto&, int l) { geometry.kind = v; geometry.line = l; }},
      {"d_um", [&](auto& v, auto& k, int l) { geometry.d = parse_number<double>(v, k, l); geometry.line = l; }},
      {"a_um", [&](auto& v, auto& k, int l) { geometry.a = parse_number<double>(v, k, l); geometry.line = l; }},
      {"c3_mhz_um3", [&](auto& v, auto& k, int l) { c.c3_mhz_um3 = parse_number<double>(v, k, l); }},
      {"c6_mhz_um6", [&](auto& v, auto& k, int l) { c.c6_mhz_um6 = parse_number<double>(v, k, l); }},
      {"mass_kg", [&](auto& v, auto& k, int l) { c.mass_kg = parse_number<double>(v, k, l); }},
      {"sigma_um", [&](auto& v, auto& k, int l) { c.sigma_um = parse_number<double>(v, k, l); }},
      {"n_traj", [&](auto& v, auto& k, int l) { c.n_traj = parse_number<int>(v, k, l); }},
      {"dt_us", [&](auto& v, auto& k, int l) { c.dt_us = parse_number<double>(v, k, l); }},
      {"n_sub_electronic", [&](auto& v, auto& k, int l) { c.n_sub_electronic = parse_number<int>(v, k, l); }},
      {"t_final_us", [&](auto& v, auto& k, int l) { c.t_final_us = parse_number<double>(v, k, l); }},
      {"output_stride_us", [&](auto& v, auto& k, int l) { c.output_stride_us = parse_number<double>(v, k, l); }},
      {"initial_surface", [&](auto& v, auto& k, int l) { c.initial_surface = parse_number<int>(v, k, l); }},
      {"mode", [&](auto& v, auto& k, int l) {
         try { c.mode = parse_mode(v); } catch (const ConfigError& e) { throw ConfigError(e.what(), k, l); }
       }},
      {"freeze_coefficients", [&](auto& v, auto& k, int l) { c.freeze_coefficients = parse_bool(v, k, l); }},
      {"reverse_on_frustrated", [&](auto& v, auto& k, int l) { c.reverse_on_frustrated = parse_bool(v, k, l); }},
      {"bin_width_um", [&](auto& v, auto& k, int l) { c.bin_width_um = parse_number<double>(v, k, l); }},
      {"rng_seed", [&](auto& v, auto& k, int l) { c.rng_seed = parse_number<std::uint64_t>(v, k, l); }},
      {"eps_degenerate_rad_per_us", [&](auto& v, auto& k, int l) { c.eps_degenerate = parse_number<double>(v, k, l); }},
      {"d_max_per_um", [&](auto& v, auto& k, int l) { c.d_max = parse_number<double>(v, k, l); }},
      {"r_min_um", [&](auto& v, auto& k, int l) { c.r_min_um = parse_number<double>(v, k, l); }},
      {"partition_a", [&](auto& v, auto& k, int l) { c.partition_a = parse_list<int>(v, k, l); }},
  };

  std::set<std::string> seen;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", {}, line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown key", key, line_no);
    if (!seen.insert(key).second) throw ConfigError("key given twice", key, line_no);
    if (value.empty()) throw ConfigError("missing value", key, line_no);
    it->second(value, key, line_no);
  }

  if (geometry.kind || geometry.d || geometry.a) {
    if (explicit_positions) {
      throw ConfigError("give either positions_um or geometry/d_um/a_um, not both", "positions_um",
                        geometry.line);
    }
    const std::string kind = geometry.kind.value_or("regular");
    const double d = geometry.d.value_or(5.0);
    const double a = geometry.a.value_or(d / 2.0);
    if (!(d > 0.0) || !(a > 0.0)) throw ConfigError("spacings must be positive", "d_um", geometry.line);
    if (kind == "regular") {
      c.positions_um = regular_chain(c.n_atoms, d);
    } else if (kind == "dislocated-end") {
      c.positions_um = dislocated_end_chain(c.n_atoms, d, a);
    } else if (kind == "dislocated-start") {
      c.positions_um = dislocated_start_chain(c.n_atoms, d, a);
    } else if (kind == "doubly-dislocated") {
      c.positions_um = doubly_dislocated_chain(c.n_atoms, d, a);
    } else {
      throw ConfigError("unknown geometry '" + kind + "'", "geometry", geometry.line);
    }
  } else if (explicit_positions && !explicit_n_atoms) {
    c.n_atoms = static_cast<int>(c.positions_um.size());
  }
  c.validate();
  return c;
}

std::string serialize_config(const AggregateConfig& c) {
  std::ostringstream out;
  out << "name = " << c.name << '\n'
      << "n_atoms = " << c.n_atoms << '\n'
      << "n_excitations = " << c.n_excitations << '\n'
      << "positions_um = " << join(c.positions_um) << '\n'
      << "c3_mhz_um3 = " << format_double(c.c3_mhz_um3) << '\n'
      << "c6_mhz_um6 = " << format_double(c.c6_mhz_um6) << '\n'
      << "mass_kg = " << format_double(c.mass_kg) << '\n'
      << "sigma_um = " << format_double(c.sigma_um) << '\n'
      << "n_traj = " << c.n_traj << '\n'
      << "dt_us = " << format_double(c.dt_us) << '\n'
      << "n_sub_electronic = " << c.n_sub_electronic << '\n'
      << "t_final_us = " << format_double(c.t_final_us) << '\n'
      << "output_stride_us = " << format_double(c.output_stride_us) << '\n'
      << "initial_surface = " << c.initial_surface << '\n'
      << "mode = " << to_string(c.mode) << '\n'
      << "freeze_coefficients = " << (c.freeze_coefficients ? "true" : "false") << '\n'
      << "reverse_on_frustrated = " << (c.reverse_on_frustrated ? "true" : "false") << '\n'
      << "bin_width_um = " << format_double(c.bin_width_um) << '\n'
      << "rng_seed = " << c.rng_seed << '\n'
      << "eps_degenerate_rad_per_us = " << format_double(c.eps_degenerate) << '\n'
      << "d_max_per_um = " << format_double(c.d_max) << '\n'
      << "r_min_um = " << format_double(c.r_min_um) << '\n'
      << "partition_a = " << join(c.partition_a) << '\n';
  return out.str();
}

}  // namespace rydagg
