#include "fowler_lab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace fowler_lab::io {

namespace {

std::ofstream open(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    return out;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

std::string number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json to_json(const FowlerParams& p) {
    json j;
    j["problem"] = p.problem == Problem::Conformal ? "conformal" : "ckn";
    j["n"] = p.n;
    if (p.problem == Problem::Conformal) {
        j["k0"] = p.k0;
    } else {
        j["a"] = p.a;
        j["b"] = p.b;
        j["p"] = p.p();
    }
    j["q"] = p.q;
    j["c"] = p.c;
    j["e"] = p.e;
    return j;
}

json to_json(const FowlerOrbit& orbit, bool samples) {
    json j;
    j["params"] = to_json(orbit.params());
    j["constant"] = orbit.is_constant();
    j["epsilon"] = orbit.epsilon();
    j["period"] = orbit.is_constant() ? json(nullptr) : json(orbit.period());
    j["energy"] = orbit.energy();
    j["max_value"] = orbit.max_value();
    j["max_energy_drift"] = orbit.max_energy_drift();
    if (orbit.is_constant()) {
        const auto& p = orbit.params();
        j["omega_mode0"] = std::sqrt(p.q * (p.e - 1.0));
    } else {
        j["closure_defect"] = orbit.closure_defect();
        j["symmetry_defect"] = orbit.symmetry_defect();
    }
    if (samples) {
        json t = json::array();
        for (int i = 0; i <= orbit.samples(); ++i) t.push_back(orbit.time(i));
        j["t"] = t;
        j["xi"] = orbit.xi_samples();
        j["xi_prime"] = orbit.xi_prime_samples();
    }
    return j;
}

json to_json(const ExponentEntry& e) {
    return {{"index", e.index}, {"degree", e.degree}, {"lambda", e.lambda}, {"sigma", e.sigma}, {"type", to_string(e.type)}};
}

json to_json(const BoundEntry& b) {
    return {{"index", b.index}, {"lambda", b.lambda}, {"rho_squared", b.rho_squared}, {"bound", b.bound}, {"margin", b.margin}};
}

json to_json(const IndexSet& set) {
    json j;
    j["cutoff"] = set.cutoff;
    j["tol"] = set.tol;
    j["distinct"] = set.distinct;
    j["degrees"] = set.degrees;
    json values = json::array();
    for (const auto& v : set.values) {
        json combos = json::array();
        for (const auto& c : v.provenance) combos.push_back({{"counts", c.counts}, {"total", c.total}, {"value", c.value}});
        values.push_back({{"value", v.value}, {"single", v.single}, {"multi", v.multi}, {"resonant", v.resonant()},
                          {"combinations", combos}});
    }
    j["values"] = values;
    const auto s = split(set);
    j["singles"] = s.singles;
    j["multiples"] = s.multiples;
    j["resonances"] = s.resonances;
    j["second_index"] = finite_or_null(second_index(set));
    j["warnings"] = set.warnings;
    return j;
}

json to_json(const ExpansionTerm& term, int samples) {
    json j;
    j["label"] = term.label;
    j["exponent"] = term.exponent;
    j["t_power"] = term.t_power;
    j["degree"] = term.mode.degree;
    j["axis"] = term.mode.axis;
    j["period"] = term.coeff.period();
    j["coeff_sup"] = term.coeff.sup_norm();
    if (samples > 0) {
        const auto c = term.coeff.resampled(samples);
        json t = json::array();
        for (int i = 0; i < c.size(); ++i) t.push_back(c.node(i));
        j["t"] = t;
        j["coeff"] = std::vector<double>(c.samples().data(), c.samples().data() + c.size());
    }
    return j;
}

json to_json(const DecayFit& f) {
    return {{"rate", f.rate},
            {"log_coefficient", f.log_coefficient},
            {"intercept", f.intercept},
            {"r_squared", f.r_squared},
            {"rms_residual", f.rms_residual},
            {"t_begin", f.t_begin},
            {"t_end", f.t_end},
            {"points", f.points},
            {"log_model", f.log_model},
            {"warnings", f.warnings}};
}

json to_json(const DecayModels& m) {
    return {{"plain", to_json(m.plain)}, {"with_log", to_json(m.with_log)}, {"prefers_log", m.prefers_log}};
}

json to_json(const IterationRecord& r) {
    return {{"iteration", r.iteration}, {"t0", r.t0}, {"norm", r.norm}, {"difference", r.difference}, {"factor", r.factor}};
}

json to_json(const ContractionResult& r) {
    json j;
    j["converged"] = r.converged;
    j["t0"] = r.t0;
    j["window_end"] = r.v.grid().end();
    j["h"] = r.v.grid().h;
    j["modes"] = r.v.modes();
    j["beta"] = r.beta;
    j["weight"] = r.weight;
    j["final_factor"] = r.final_factor;
    j["doublings"] = r.doublings;
    j["phi_weighted_norm"] = r.phi.weighted_norm(r.weight);
    j["min_value"] = r.v.min_value();
    json trace = json::array();
    for (const auto& t : r.trace) trace.push_back(to_json(t));
    j["trace"] = trace;
    j["warnings"] = r.warnings;
    return j;
}

json to_json(const CriterionReport& r) {
    json values = json::object();
    for (const auto& [k, v] : r.values) values[k] = finite_or_null(v);
    return {{"id", r.id},         {"suite", r.suite},       {"title", r.title}, {"passed", r.passed},
            {"values", values}, {"failures", r.failures}, {"notes", r.notes}};
}

void write_orbit_csv(const FowlerOrbit& orbit, const std::string& path) {
    auto out = open(path);
    out << "t,xi,xi_prime\n";
    for (int i = 0; i <= orbit.samples(); ++i)
        out << number(orbit.time(i)) << ',' << number(orbit.xi_samples()[i]) << ',' << number(orbit.xi_prime_samples()[i]) << '\n';
}

void write_field_csv(const CylinderField& field, const std::string& path) {
    auto out = open(path);
    out << 't';
    for (int k = 0; k < field.modes(); ++k) out << ",c_" << k;
    out << '\n';
    for (int j = 0; j < field.points(); ++j) {
        out << number(field.grid().t(j));
        for (int k = 0; k < field.modes(); ++k) out << ',' << number(field.coeff(k)(j));
        out << '\n';
    }
}

void write_json(const json& value, const std::string& path) {
    auto out = open(path);
    out << value.dump(2) << '\n';
}

}  // namespace fowler_lab::io
