#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <type_traits>
#include <variant>
#include <vector>

#include "curvtomo/core/errors.hpp"
#include "curvtomo/io/formats.hpp"

namespace curvtomo {

struct DiscSpec {
    double center_x = 0.0;
    double center_y = 0.0;
    double radius = 1.0;
    friend bool operator==(const DiscSpec&, const DiscSpec&) = default;
};

/// kappa(x, theta) = (a0 + ax x_0 + ay x_1) (b0 + bx theta_0 + by theta_1).
struct KappaSpec {
    double a0 = 1.0, ax = 0.0, ay = 0.0;
    double b0 = 1.0, bx = 0.0, by = 0.0;
    friend bool operator==(const KappaSpec&, const KappaSpec&) = default;
};

/// Flat key=value experiment description. Keys use dotted sections
/// (force.kind, grid.nx, ...); see config_keys() for the full list.
struct ExperimentConfig {
    DiscSpec domain{0.0, 0.0, 0.75};
    DiscSpec outer{0.0, 0.0, 1.0};

    /// zero | magnetic | radial-magnetic | gaussian-bump | harmonic |
    /// bump-magnetic | grid
    std::string force_kind = "zero";
    double force_b = 0.0;
    double force_amplitude = 0.0;
    double force_width = 1.0;
    double force_kappa = 0.0;
    double force_center_x = 0.0;
    double force_center_y = 0.0;
    std::string force_potential_file;
    std::string force_magnetic_file;

    double tau = 0.5;

    /// zero | constant | grid
    std::string sigma_kind = "zero";
    double sigma_mu = 0.0;
    std::string sigma_file;

    /// zero | separable
    std::string scatter_kind = "zero";
    double scatter_lambda = 1.0;
    KappaSpec kappa1;
    KappaSpec kappa2;

    std::size_t grid_nx = 64;
    std::size_t grid_ny = 64;
    std::size_t grid_ntheta = 16;

    std::size_t boundary_positions = 180;
    std::size_t boundary_directions = 90;
    /// midpoint | trapezoid | gauss
    std::string boundary_rule = "midpoint";

    /// Zero selects 1e-3 * diameter.
    double integrator_step = 0.0;

    double solver_tol = 1e-10;
    std::size_t solver_max_iter = 500;

    /// cgne | landweber
    std::string recon_method = "cgne";
    std::size_t recon_max_iter = 200;
    double recon_tol = 1e-8;
    double recon_epsilon = 0.0;
    /// Landweber step; zero selects 1 / ||A||^2.
    double recon_step = 0.0;

    std::string phantom_name = "gaussian-bump";
    double phantom_center_x = 0.15;
    double phantom_center_y = -0.1;
    double phantom_width = 0.25;
    std::size_t phantom_i = 0;
    std::size_t phantom_j = 0;

    std::size_t seed = 1;

    std::size_t probe_count = 20;
    std::size_t probe_frequency = 3;

    std::size_t verify_trajectories = 200;
    double verify_drift_tol = 1e-8;
    std::size_t verify_santalo_boundary = 100;
    std::size_t verify_santalo_angles = 64;
    std::size_t verify_santalo_ray = 128;
    double verify_santalo_tol = 1e-3;
    std::size_t verify_convexity_boundary = 128;
    std::size_t verify_nontrapping_samples = 200;
    std::size_t verify_adjoint_pairs = 5;
    double verify_adjoint_tol = 1e-12;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

namespace detail {

using ConfigField = std::variant<double ExperimentConfig::*, std::size_t ExperimentConfig::*,
                                 std::string ExperimentConfig::*, double DiscSpec::*, double KappaSpec::*>;

struct ConfigKey {
    std::string key;
    ConfigField field;
    DiscSpec ExperimentConfig::*disc = nullptr;
    KappaSpec ExperimentConfig::*kappa = nullptr;
};

inline std::vector<ConfigKey> make_config_keys() {
    using C = ExperimentConfig;
    std::vector<ConfigKey> k;
    for (auto [name, disc] : {std::pair{"domain", &C::domain}, std::pair{"outer", &C::outer}}) {
        k.push_back({std::string(name) + ".center_x", &DiscSpec::center_x, disc});
        k.push_back({std::string(name) + ".center_y", &DiscSpec::center_y, disc});
        k.push_back({std::string(name) + ".radius", &DiscSpec::radius, disc});
    }
    for (auto [name, kap] : {std::pair{"scatter.kappa1", &C::kappa1}, std::pair{"scatter.kappa2", &C::kappa2}}) {
        k.push_back({std::string(name) + ".a0", &KappaSpec::a0, nullptr, kap});
        k.push_back({std::string(name) + ".ax", &KappaSpec::ax, nullptr, kap});
        k.push_back({std::string(name) + ".ay", &KappaSpec::ay, nullptr, kap});
        k.push_back({std::string(name) + ".b0", &KappaSpec::b0, nullptr, kap});
        k.push_back({std::string(name) + ".bx", &KappaSpec::bx, nullptr, kap});
        k.push_back({std::string(name) + ".by", &KappaSpec::by, nullptr, kap});
    }
    const std::vector<std::pair<const char*, ConfigField>> plain = {
        {"force.kind", &C::force_kind},
        {"force.b", &C::force_b},
        {"force.amplitude", &C::force_amplitude},
        {"force.width", &C::force_width},
        {"force.kappa", &C::force_kappa},
        {"force.center_x", &C::force_center_x},
        {"force.center_y", &C::force_center_y},
        {"force.potential_file", &C::force_potential_file},
        {"force.magnetic_file", &C::force_magnetic_file},
        {"tau", &C::tau},
        {"sigma.kind", &C::sigma_kind},
        {"sigma.mu", &C::sigma_mu},
        {"sigma.file", &C::sigma_file},
        {"scatter.kind", &C::scatter_kind},
        {"scatter.lambda", &C::scatter_lambda},
        {"grid.nx", &C::grid_nx},
        {"grid.ny", &C::grid_ny},
        {"grid.ntheta", &C::grid_ntheta},
        {"boundary.positions", &C::boundary_positions},
        {"boundary.directions", &C::boundary_directions},
        {"boundary.rule", &C::boundary_rule},
        {"integrator.step", &C::integrator_step},
        {"solver.tol", &C::solver_tol},
        {"solver.max_iter", &C::solver_max_iter},
        {"recon.method", &C::recon_method},
        {"recon.max_iter", &C::recon_max_iter},
        {"recon.tol", &C::recon_tol},
        {"recon.epsilon", &C::recon_epsilon},
        {"recon.step", &C::recon_step},
        {"phantom.name", &C::phantom_name},
        {"phantom.center_x", &C::phantom_center_x},
        {"phantom.center_y", &C::phantom_center_y},
        {"phantom.width", &C::phantom_width},
        {"phantom.i", &C::phantom_i},
        {"phantom.j", &C::phantom_j},
        {"seed", &C::seed},
        {"probe.count", &C::probe_count},
        {"probe.frequency", &C::probe_frequency},
        {"verify.trajectories", &C::verify_trajectories},
        {"verify.drift_tol", &C::verify_drift_tol},
        {"verify.santalo_boundary", &C::verify_santalo_boundary},
        {"verify.santalo_angles", &C::verify_santalo_angles},
        {"verify.santalo_ray", &C::verify_santalo_ray},
        {"verify.santalo_tol", &C::verify_santalo_tol},
        {"verify.convexity_boundary", &C::verify_convexity_boundary},
        {"verify.nontrapping_samples", &C::verify_nontrapping_samples},
        {"verify.adjoint_pairs", &C::verify_adjoint_pairs},
        {"verify.adjoint_tol", &C::verify_adjoint_tol},
    };
    for (const auto& [name, f] : plain) k.push_back({name, f});
    std::sort(k.begin(), k.end(), [](const ConfigKey& a, const ConfigKey& b) { return a.key < b.key; });
    return k;
}

inline const std::vector<ConfigKey>& config_key_table() {
    static const std::vector<ConfigKey> table = make_config_keys();
    return table;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
bool parse_number(const std::string& v, T& out) {
    const char* first = v.data();
    const char* last = v.data() + v.size();
    if constexpr (std::is_unsigned_v<T>)
        if (!v.empty() && v[0] == '-') return false;
    const auto [p, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && p == last;
}

}  // namespace detail

/// All recognised keys in sorted order.
inline std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& k : detail::config_key_table()) out.push_back(k.key);
    return out;
}

/// Sets one key from its text value; the message names the problem.
inline void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
    const auto& table = detail::config_key_table();
    const auto it = std::find_if(table.begin(), table.end(), [&](const detail::ConfigKey& k) { return k.key == key; });
    if (it == table.end()) throw FormatError("unknown key '" + key + "'");
    const detail::ConfigKey& k = *it;
    auto bad = [&](const char* what) { return FormatError("key '" + key + "': '" + value + "' is not " + what); };
    std::visit(
        [&](auto member) {
            using M = decltype(member);
            if constexpr (std::is_same_v<M, double DiscSpec::*>) {
                if (!detail::parse_number(value, (c.*(k.disc)).*member)) throw bad("a number");
            } else if constexpr (std::is_same_v<M, double KappaSpec::*>) {
                if (!detail::parse_number(value, (c.*(k.kappa)).*member)) throw bad("a number");
            } else if constexpr (std::is_same_v<M, std::string ExperimentConfig::*>) {
                c.*member = value;
            } else if constexpr (std::is_same_v<M, double ExperimentConfig::*>) {
                if (!detail::parse_number(value, c.*member)) throw bad("a number");
            } else {
                if (!detail::parse_number(value, c.*member)) throw bad("a non-negative integer");
            }
        },
        k.field);
}

inline std::string get_config_value(const ExperimentConfig& c, const detail::ConfigKey& k) {
    return std::visit(
        [&](auto member) -> std::string {
            using M = decltype(member);
            if constexpr (std::is_same_v<M, double DiscSpec::*>)
                return format_double((c.*(k.disc)).*member);
            else if constexpr (std::is_same_v<M, double KappaSpec::*>)
                return format_double((c.*(k.kappa)).*member);
            else if constexpr (std::is_same_v<M, std::string ExperimentConfig::*>)
                return c.*member;
            else if constexpr (std::is_same_v<M, double ExperimentConfig::*>)
                return format_double(c.*member);
            else
                return std::to_string(c.*member);
        },
        k.field);
}

/// Parses key=value lines. '#' starts a comment; blank lines are ignored.
/// Keys not present keep their defaults. Errors carry the source name and
/// line number.
inline ExperimentConfig parse_config(const std::string& text, const std::string& source = "config") {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string line;
    std::set<std::string> seen;
    for (std::size_t ln = 1; std::getline(in, line); ++ln) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = source + ":" + std::to_string(ln) + ": ";
        if (eq == std::string::npos) throw FormatError(where + "expected key=value");
        const std::string key = detail::trim(line.substr(0, eq)), value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw FormatError(where + "empty key");
        if (!seen.insert(key).second) throw FormatError(where + "duplicate key '" + key + "'");
        try {
            set_config_value(c, key, value);
        } catch (const FormatError& e) {
            throw FormatError(where + e.what());
        }
    }
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path + ": cannot open config");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

/// Every key, sorted, one per line.
inline std::string serialize_config(const ExperimentConfig& c) {
    std::string out;
    for (const auto& k : detail::config_key_table()) out += k.key + "=" + get_config_value(c, k) + "\n";
    return out;
}

}  // namespace curvtomo
