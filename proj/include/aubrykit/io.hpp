#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "aubrykit/aubry_mather.hpp"
#include "aubrykit/critical_point.hpp"
#include "aubrykit/ghost_circle.hpp"
#include "aubrykit/lattice.hpp"

namespace aubrykit {

inline constexpr const char* kVersion = "0.1.0";

/// Serialize with every floating number printed at 17 significant digits,
/// independent of locale. Deterministic for identical inputs.
std::string dump_json(const nlohmann::json& j, int indent = 2);

/// FNV-1a 64-bit, hex string.
std::string fnv1a_hex(const std::string& text);

nlohmann::json config_to_json(const Configuration& c);
Configuration config_from_json(const nlohmann::json& j);

nlohmann::json critical_point_to_json(const CriticalPoint& cp);
nlohmann::json catalog_to_json(const std::vector<CriticalPoint>& cps);

/// Plain key = value scenario text ('#' comments). Unknown keys are
/// rejected by Scenario::parse.
class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Scenario {
    std::string command;
    std::string potential = "frenkel_kontorova";
    int d = 1;
    double k = 0.0;                  // standard-form onsite strength
    std::vector<TrigSeries::Term> v_terms;
    std::vector<long long> p;        // row-major, d*d entries (or 1 for d=1)
    std::vector<long long> q;
    std::string omega;               // ghost-limit target, informational
    std::vector<std::pair<long long, long long>> convergents;  // num/den, d = 1
    unsigned long long seed = 1;
    std::string out;
    double t = 1.0;
    double tol = 1e-9;
    bool quick = false;
    long long morse_n = 0;           // 0 = no Morse block
    double morse_epsilon = 1e-3;
    unsigned long long morse_seed = 1;
    int morse_degree = 3;
    int multistart = 8;
    int grid_per_dof = 6;

    std::string canonical_text;      // hashed into artifacts

    static Scenario parse(const std::string& text);
    static Scenario load(const std::string& path);

    TrigSeries onsite() const;
    LatticePtr lattice() const;
    std::string hash() const { return fnv1a_hex(canonical_text); }
};

void write_text_file(const std::string& path, const std::string& content);

std::string csv_row(const std::vector<double>& values);

}  // namespace aubrykit
