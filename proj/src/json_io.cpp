#include "cbi/json_io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace cbi {

namespace {

Eigen::VectorXd vector_from_json(const Json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i];
    return v;
}

Json vector_to_json(const Eigen::VectorXd& v) {
    Json j = Json::array();
    for (int i = 0; i < v.size(); ++i) j.push_back(v(i));
    return j;
}

}  // namespace

Json measure_to_json(const DiscreteMeasure& m) {
    Json j = Json::array();
    for (const Atom& a : m.atoms())
        j.push_back({{"point", vector_to_json(a.point)}, {"mass", a.mass}});
    return j;
}

DiscreteMeasure measure_from_json(const Json& j, int dim) {
    DiscreteMeasure m(dim);
    for (const Json& a : j)
        m.add_atom(vector_from_json(a.at("point")), a.at("mass").get<double>());
    return m;
}

Json params_to_json(const CbiParams& p) {
    Json B = Json::array();
    for (int i = 0; i < p.d; ++i) {
        Json row = Json::array();
        for (int j = 0; j < p.d; ++j) row.push_back(p.B(i, j));
        B.push_back(row);
    }
    Json mu = Json::array();
    for (const auto& m : p.mu) mu.push_back(measure_to_json(m));
    return Json{{"d", p.d},
                {"c", vector_to_json(p.c)},
                {"beta", vector_to_json(p.beta)},
                {"B", B},
                {"nu", measure_to_json(p.nu)},
                {"mu", mu}};
}

CbiParams params_from_json(const Json& j) {
    CbiParams p;
    p.d = j.at("d").get<int>();
    p.c = vector_from_json(j.at("c"));
    p.beta = vector_from_json(j.at("beta"));
    p.B.resize(p.d, p.d);
    const Json& B = j.at("B");
    if (static_cast<int>(B.size()) != p.d)
        throw std::invalid_argument("config error at /B: wrong row count");
    for (int r = 0; r < p.d; ++r) {
        if (static_cast<int>(B[r].size()) != p.d)
            throw std::invalid_argument("config error at /B/" + std::to_string(r) +
                                        ": wrong column count");
        for (int c = 0; c < p.d; ++c) p.B(r, c) = B[r][c];
    }
    p.nu = measure_from_json(j.at("nu"), p.d);
    const Json& mu = j.at("mu");
    if (static_cast<int>(mu.size()) != p.d)
        throw std::invalid_argument("config error at /mu: expected d entries");
    for (const Json& m : mu) p.mu.push_back(measure_from_json(m, p.d));
    return p;
}

Json initial_law_to_json(const InitialLaw& law) {
    if (law.is_deterministic())
        return Json{{"deterministic", vector_to_json(law.support.front().first)}};
    Json sup = Json::array();
    for (const auto& [x, prob] : law.support)
        sup.push_back({{"point", vector_to_json(x)}, {"prob", prob}});
    return Json{{"support", sup}};
}

InitialLaw initial_law_from_json(const Json& j, int d) {
    InitialLaw law;
    if (j.contains("deterministic")) {
        Eigen::VectorXd x = vector_from_json(j.at("deterministic"));
        if (x.size() != d)
            throw std::invalid_argument("config error at /x0: wrong dimension");
        return InitialLaw::deterministic(x);
    }
    double total = 0.0;
    for (const Json& a : j.at("support")) {
        Eigen::VectorXd x = vector_from_json(a.at("point"));
        if (x.size() != d)
            throw std::invalid_argument("config error at /x0: wrong dimension");
        const double prob = a.at("prob").get<double>();
        total += prob;
        law.support.emplace_back(x, prob);
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("config error at /x0: probabilities must sum to 1");
    return law;
}

Json spectral_to_json(const SpectralSummary& s) {
    Json evs = Json::array();
    for (const auto& ev : s.eigenvalues)
        evs.push_back({{"re", ev.real()}, {"im", ev.imag()}});
    Json j{{"eigenvalues", evs},
           {"s", s.s},
           {"irreducible", s.irreducible},
           {"class", s.criticality == Criticality::Subcritical   ? "Subcritical"
                     : s.criticality == Criticality::Supercritical ? "Supercritical"
                                                                   : "Critical"}};
    if (s.u) j["u"] = vector_to_json(*s.u);
    if (s.utilde) j["utilde"] = vector_to_json(*s.utilde);
    return j;
}

Json sigma_report_to_json(const SigmaReport& r) {
    Json Ct = Json::array();
    for (int i = 0; i < r.Ctilde.size(); ++i)
        Ct.push_back({{"re", r.Ctilde(i).real()}, {"im", r.Ctilde(i).imag()}});
    return Json{
        {"regime", r.regime == Regime::II ? "II" : "III"},
        {"C", vector_to_json(r.C)},
        {"Ctilde", Ct},
        {"Sigma", {{r.Sigma(0, 0), r.Sigma(0, 1)}, {r.Sigma(1, 0), r.Sigma(1, 1)}}},
        {"classification", r.classification == SigmaClass::Zero ? "Zero"
                           : r.classification == SigmaClass::Invertible
                               ? "Invertible"
                               : "SingularNonzero"},
        {"reason", r.reason}};
}

Json test_report_to_json(const TestReport& r) {
    Json j{{"name", r.name},
           {"statistics", r.statistics},
           {"p_values", r.p_values},
           {"n", r.n},
           {"notes", r.notes}};
    if (r.passed)
        j["passed"] = *r.passed;
    else
        j["passed"] = nullptr;
    return j;
}

std::uint64_t params_hash(const CbiParams& p) {
    const std::string s = params_to_json(p).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

}  // namespace cbi
