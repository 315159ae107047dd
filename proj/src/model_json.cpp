#include <cmath>
#include <numbers>
#include <set>

#include "levy/errors.hpp"
#include "levy/models.hpp"

namespace levy {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::set<std::string>& allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) throw ParseError("unknown key '" + it.key() + "' for model kind '" + j.at("kind").get<std::string>() + "'");
    }
}

double num(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number()) throw ParseError(std::string("key '") + key + "' must be a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) throw ParseError(std::string("key '") + key + "' must be finite");
    return d;
}

double req(const json& j, const char* key) {
    if (!j.contains(key)) throw ParseError(std::string("missing key '") + key + "'");
    return num(j, key, 0.0);
}

}  // namespace

LevyModel model_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("model descriptor must be a JSON object");
    if (!j.contains("kind") || !j.at("kind").is_string()) throw ParseError("model descriptor needs a string 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    try {
        if (kind == "gaussian") {
            require_keys(j, {"kind", "A", "gamma"});
            return gaussian_model(num(j, "A", 1.0), num(j, "gamma", 0.0));
        }
        if (kind == "stable") {
            require_keys(j, {"kind", "alpha", "beta", "scale", "c1", "c2", "gamma"});
            double alpha = req(j, "alpha");
            double gamma = num(j, "gamma", 0.0);
            bool constants = j.contains("c1") || j.contains("c2");
            bool shape = j.contains("beta") || j.contains("scale");
            if (constants && shape) throw ParseError("stable descriptor takes either (beta, scale) or (c1, c2), not both");
            if (constants) return stable_model_from_constants(alpha, req(j, "c1"), req(j, "c2"), gamma);
            return stable_model(alpha, num(j, "beta", 0.0), num(j, "scale", 1.0), gamma);
        }
        if (kind == "cauchy_kac") {
            require_keys(j, {"kind"});
            return kac_cauchy_model();
        }
        if (kind == "damped_stable") {
            require_keys(j, {"kind", "c1", "c2", "lambda1", "lambda2", "alpha", "gamma", "A"});
            DampedStable d{req(j, "c1"), req(j, "c2"), req(j, "lambda1"), req(j, "lambda2"), req(j, "alpha")};
            LevyModel m = damped_stable_model(d, num(j, "gamma", 0.0));
            m.A = num(j, "A", 0.0);
            return m;
        }
        if (kind == "variance_gamma") {
            require_keys(j, {"kind", "c1", "c2", "G", "M", "gamma", "A"});
            VarianceGamma v{req(j, "c1"), req(j, "c2"), req(j, "G"), req(j, "M")};
            LevyModel m = variance_gamma_model(v, num(j, "gamma", 0.0));
            m.A = num(j, "A", 0.0);
            return m;
        }
        if (kind == "nig") {
            require_keys(j, {"kind", "C", "beta", "gamma", "A"});
            LevyModel m = nig_model(req(j, "C"), num(j, "beta", 0.0), num(j, "gamma", 0.0));
            m.A = num(j, "A", 0.0);
            return m;
        }
        if (kind == "meixner") {
            require_keys(j, {"kind", "C", "beta", "gamma", "A"});
            LevyModel m = meixner_model(req(j, "C"), num(j, "beta", 0.0), num(j, "gamma", 0.0));
            m.A = num(j, "A", 0.0);
            return m;
        }
        if (kind == "compound_poisson") {
            require_keys(j, {"kind", "shape", "weight", "rate", "gamma", "A"});
            std::string shape = j.value("shape", std::string("laplace"));
            LevyModel m;
            if (shape == "laplace") {
                m = laplace_compound_poisson_model(num(j, "weight", 1.0), num(j, "rate", 1.0), num(j, "gamma", 0.0));
            } else if (shape == "gaussian") {
                double w = num(j, "weight", 1.0), s = num(j, "rate", 1.0);
                if (!(w > 0 && s > 0)) throw ParseError("gaussian jump shape needs positive weight and rate (= sigma)");
                m = compound_poisson_model([w, s](double y) { return w * std::exp(-0.5 * y * y / (s * s)); },
                                           w * s * std::sqrt(2.0 * std::numbers::pi), num(j, "gamma", 0.0));
                auto& cp = std::get<CompoundPoisson>(m.spec);
                cp.shape = "gaussian";
                cp.weight = w;
                cp.rate = s;
            } else {
                throw ParseError("unknown compound_poisson shape '" + shape + "'");
            }
            m.A = num(j, "A", 0.0);
            return m;
        }
    } catch (const DomainError& e) {
        throw ValidationError(std::string("invalid model parameters: ") + e.what());
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed model descriptor: ") + e.what());
    }
    throw ParseError("unknown model kind '" + kind + "'");
}

json model_to_json(const LevyModel& m) {
    json j;
    if (const auto* s = std::get_if<Stable>(&m.spec)) {
        j = {{"kind", "stable"}, {"alpha", s->alpha}, {"beta", s->beta}, {"scale", s->scale}};
        if (m.gamma != 0.0) j["gamma"] = m.gamma;
        return j;
    }
    if (std::holds_alternative<Gaussian>(m.spec)) return {{"kind", "gaussian"}, {"A", m.A}, {"gamma", m.gamma}};
    if (const auto* d = std::get_if<DampedStable>(&m.spec)) {
        j = {{"kind", "damped_stable"}, {"c1", d->c1}, {"c2", d->c2}, {"lambda1", d->lambda1},
             {"lambda2", d->lambda2}, {"alpha", d->alpha}};
    } else if (const auto* v = std::get_if<VarianceGamma>(&m.spec)) {
        j = {{"kind", "variance_gamma"}, {"c1", v->c1}, {"c2", v->c2}, {"G", v->G}, {"M", v->M}};
    } else if (const auto* n = std::get_if<NormalInverseGaussian>(&m.spec)) {
        j = {{"kind", "nig"}, {"C", n->C}, {"beta", n->beta}};
    } else if (const auto* x = std::get_if<Meixner>(&m.spec)) {
        j = {{"kind", "meixner"}, {"C", x->C}, {"beta", x->beta}};
    } else if (const auto* c = std::get_if<CompoundPoisson>(&m.spec)) {
        j = {{"kind", "compound_poisson"}, {"shape", c->shape}, {"weight", c->weight}, {"rate", c->rate}};
    } else if (const auto* u = std::get_if<Custom>(&m.spec)) {
        j = {{"kind", "custom"}, {"name", u->name}, {"small_exponent", u->small_exponent},
             {"tail_exponent", u->tail_exponent}};
    }
    j["gamma"] = m.gamma;
    j["A"] = m.A;
    return j;
}

}  // namespace levy
