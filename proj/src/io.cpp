#include "aubrykit/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace aubrykit {

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void dump_rec(const nlohmann::json& j, std::string& out, int indent, int depth) {
    const std::string pad(static_cast<size_t>(indent) * depth, ' ');
    const std::string pad1(static_cast<size_t>(indent) * (depth + 1), ' ');
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            size_t i = 0;
            for (auto it = j.begin(); it != j.end(); ++it, ++i) {
                out += pad1;
                out += nlohmann::json(it.key()).dump();
                out += ": ";
                dump_rec(it.value(), out, indent, depth + 1);
                if (i + 1 < j.size()) out += ",";
                out += "\n";
            }
            out += pad + "}";
            return;
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (size_t i = 0; i < j.size(); ++i) {
                out += pad1;
                dump_rec(j[i], out, indent, depth + 1);
                if (i + 1 < j.size()) out += ",";
                out += "\n";
            }
            out += pad + "]";
            return;
        }
        case nlohmann::json::value_t::number_float:
            out += format_double(j.get<double>());
            return;
        default:
            out += j.dump();
            return;
    }
}

std::vector<long long> parse_int_list(const std::string& s) {
    std::vector<long long> out;
    std::string token;
    for (char c : s + ",") {
        if (c == ',' || c == ';') {
            if (!token.empty()) out.push_back(std::stoll(token));
            token.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            token += c;
        }
    }
    return out;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::string dump_json(const nlohmann::json& j, int indent) {
    std::string out;
    dump_rec(j, out, indent, 0);
    out += "\n";
    return out;
}

std::string fnv1a_hex(const std::string& text) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

nlohmann::json config_to_json(const Configuration& c) {
    const auto& lat = c.lattice();
    nlohmann::json j;
    j["d"] = lat.dim();
    std::vector<long long> p, q;
    for (int r = 0; r < lat.dim(); ++r)
        for (int col = 0; col < lat.dim(); ++col) p.push_back(lat.p(r, col));
    for (int r = 0; r < lat.dim(); ++r) q.push_back(lat.q(r));
    j["p"] = p;
    j["q"] = q;
    std::vector<double> vals(c.values().data(), c.values().data() + c.values().size());
    j["values"] = vals;
    return j;
}

Configuration config_from_json(const nlohmann::json& j) {
    const int d = j.at("d").get<int>();
    auto p = j.at("p").get<std::vector<long long>>();
    auto q = j.at("q").get<std::vector<long long>>();
    auto vals = j.at("values").get<std::vector<double>>();
    LatticePtr lat = PeriodLattice::make(d, std::move(p), std::move(q));
    Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
    for (size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
    return Configuration(std::move(lat), std::move(v));
}

nlohmann::json critical_point_to_json(const CriticalPoint& cp) {
    nlohmann::json j;
    j["config"] = config_to_json(cp.config);
    j["W"] = cp.action;
    j["grad_norm"] = cp.grad_norm;
    std::vector<double> eigs(cp.eigenvalues.data(), cp.eigenvalues.data() + cp.eigenvalues.size());
    j["eigenvalues"] = eigs;
    j["index"] = cp.index;
    j["degenerate"] = cp.degenerate;
    return j;
}

nlohmann::json catalog_to_json(const std::vector<CriticalPoint>& cps) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& cp : cps) arr.push_back(critical_point_to_json(cp));
    return arr;
}

Scenario Scenario::parse(const std::string& text) {
    Scenario sc;
    std::ostringstream canonical;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) throw ScenarioError("scenario: malformed line '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        canonical << key << "=" << val << "\n";
        try {
            if (key == "command") sc.command = val;
            else if (key == "potential") sc.potential = val;
            else if (key == "d") sc.d = std::stoi(val);
            else if (key == "k") sc.k = std::stod(val);
            else if (key == "v_terms") {
                // harmonic:cos:sin entries separated by ';'
                std::istringstream ts(val);
                std::string item;
                while (std::getline(ts, item, ';')) {
                    item = trim(item);
                    if (item.empty()) continue;
                    TrigSeries::Term term;
                    if (std::sscanf(item.c_str(), "%d:%lf:%lf", &term.harmonic, &term.cos_coeff,
                                    &term.sin_coeff) != 3)
                        throw ScenarioError("scenario: bad v_terms entry '" + item + "'");
                    sc.v_terms.push_back(term);
                }
            } else if (key == "p") sc.p = parse_int_list(val);
            else if (key == "q") sc.q = parse_int_list(val);
            else if (key == "omega") sc.omega = val;
            else if (key == "convergents") {
                std::istringstream ts(val);
                std::string item;
                while (std::getline(ts, item, ',')) {
                    item = trim(item);
                    if (item.empty()) continue;
                    long long num = 0, den = 1;
                    if (std::sscanf(item.c_str(), "%lld/%lld", &num, &den) != 2 || den == 0)
                        throw ScenarioError("scenario: bad convergent '" + item + "'");
                    sc.convergents.emplace_back(num, den);
                }
            } else if (key == "seed") sc.seed = std::stoull(val);
            else if (key == "out") sc.out = val;
            else if (key == "t") sc.t = std::stod(val);
            else if (key == "tol") sc.tol = std::stod(val);
            else if (key == "quick") sc.quick = (val == "true" || val == "1" || val == "yes");
            else if (key == "morse_n") sc.morse_n = std::stoll(val);
            else if (key == "morse_epsilon") sc.morse_epsilon = std::stod(val);
            else if (key == "morse_seed") sc.morse_seed = std::stoull(val);
            else if (key == "morse_degree") sc.morse_degree = std::stoi(val);
            else if (key == "multistart") sc.multistart = std::stoi(val);
            else if (key == "grid_per_dof") sc.grid_per_dof = std::stoi(val);
            else throw ScenarioError("scenario: unknown key '" + key + "'");
        } catch (const ScenarioError&) {
            throw;
        } catch (const std::exception& e) {
            throw ScenarioError("scenario: bad value for '" + key + "': " + e.what());
        }
    }
    sc.canonical_text = canonical.str();
    return sc;
}

Scenario Scenario::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("scenario: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

TrigSeries Scenario::onsite() const {
    if (!v_terms.empty()) {
        TrigSeries v;
        v.terms = v_terms;
        return v;
    }
    if (k != 0.0) return TrigSeries::standard(k);
    return TrigSeries::zero();
}

LatticePtr Scenario::lattice() const {
    if (p.empty()) throw ScenarioError("scenario: missing p");
    std::vector<long long> pm = p;
    if (static_cast<int>(pm.size()) == d && d > 1) {
        // diagonal shorthand
        std::vector<long long> full(static_cast<size_t>(d) * d, 0);
        for (int i = 0; i < d; ++i) full[static_cast<size_t>(i) * d + i] = pm[static_cast<size_t>(i)];
        pm = full;
    }
    if (static_cast<int>(pm.size()) != d * d)
        throw ScenarioError("scenario: p must have d*d entries (or d diagonal entries)");
    std::vector<long long> qq = q;
    if (qq.empty()) qq.assign(static_cast<size_t>(d), 0);
    if (static_cast<int>(qq.size()) != d) throw ScenarioError("scenario: q must have d entries");
    return PeriodLattice::make(d, std::move(pm), std::move(qq));
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

std::string csv_row(const std::vector<double>& values) {
    std::string row;
    for (size_t i = 0; i < values.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
        row += buf;
        if (i + 1 < values.size()) row += ",";
    }
    row += "\n";
    return row;
}

}  // namespace aubrykit
