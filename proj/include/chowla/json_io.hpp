// json_io.hpp
// JSON expression trees for MultFuncSpec and CorrelationSpec.
//
//   {"node": "Liouville"} | {"node": "Mobius"} | {"node": "One"}
//   {"node": "ArchimedeanTwist", "t": 5.0}
//   {"node": "DirichletChar", "modulus": 5, "index": 2}
//   {"node": "AdditivePhase", "alpha": 0.5, "base": "BigOmega" | "SmallOmega"}
//   {"node": "Product", "factors": [ ... ]}
//   {"node": "ConjugatePower", "inner": { ... }, "c": -1}
//
// A correlation spec is {"factors": [{"g": <node>, "h": 0, "q": 1}, ...]}.
// A nil sequence is {"kind": "poly", "coeffs": [a0, ..., ad]} or
// {"kind": "bracket", "alpha": a, "beta": b, "center": 0.25, "width": 0.2}.
// See docs/multfunc_schema.md.

#pragma once

#include <string>

#include <json.hpp>

#include "chowla/log_correlator.hpp"
#include "chowla/mult_func.hpp"
#include "chowla/nilseq.hpp"

namespace chowla {

using json = nlohmann::json;

namespace detail {

inline const json& field(const json& j, const char* key, const std::string& where)
{
    if (!j.is_object() || !j.contains(key))
        throw ConfigError(where + ": missing field '" + key + "'");
    return j.at(key);
}

template <typename T>
T get_as(const json& j, const char* key, const std::string& where)
{
    const json& v = field(j, key, where);
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + ": field '" + key + "' has the wrong type");
    }
}

} // namespace detail

inline json to_json(const MultFuncSpec& g)
{
    return std::visit(overloaded{
                          [](const node::Liouville&) { return json{{"node", "Liouville"}}; },
                          [](const node::Mobius&) { return json{{"node", "Mobius"}}; },
                          [](const node::One&) { return json{{"node", "One"}}; },
                          [](const node::ArchimedeanTwist& t) {
                              return json{{"node", "ArchimedeanTwist"}, {"t", t.t}};
                          },
                          [](const node::DirichletChar& c) {
                              return json{{"node", "DirichletChar"},
                                          {"modulus", c.chi.modulus()},
                                          {"index", c.chi.index()}};
                          },
                          [](const node::AdditivePhase& a) {
                              return json{{"node", "AdditivePhase"},
                                          {"alpha", a.alpha},
                                          {"base", a.base == OmegaBase::BigOmega ? "BigOmega" : "SmallOmega"}};
                          },
                          [](const node::Product& p) {
                              json fs = json::array();
                              for (const auto& f : p.factors) fs.push_back(to_json(f));
                              return json{{"node", "Product"}, {"factors", fs}};
                          },
                          [](const node::ConjugatePower& c) {
                              return json{{"node", "ConjugatePower"}, {"inner", to_json(*c.inner)}, {"c", c.c}};
                          },
                      },
                      g.node);
}

inline MultFuncSpec mult_func_from_json(const json& j, const std::string& where = "spec")
{
    const auto tag = detail::get_as<std::string>(j, "node", where);
    if (tag == "Liouville") return liouville();
    if (tag == "Mobius") return mobius();
    if (tag == "One") return one();
    if (tag == "ArchimedeanTwist") return archimedean_twist(detail::get_as<double>(j, "t", where));
    if (tag == "DirichletChar") {
        const auto q = detail::get_as<std::uint64_t>(j, "modulus", where);
        const auto idx = detail::get_as<std::uint64_t>(j, "index", where);
        if (q < 1 || q > 1000000) throw ConfigError(where + ": modulus must be in [1, 10^6]");
        if (idx >= euler_phi(q)) throw ConfigError(where + ": index must be < phi(modulus)");
        return dirichlet(character_mod(q, idx));
    }
    if (tag == "AdditivePhase") {
        const auto base = j.contains("base") ? detail::get_as<std::string>(j, "base", where) : "BigOmega";
        if (base != "BigOmega" && base != "SmallOmega")
            throw ConfigError(where + ": base must be BigOmega or SmallOmega");
        return additive_phase(detail::get_as<double>(j, "alpha", where),
                              base == "BigOmega" ? OmegaBase::BigOmega : OmegaBase::SmallOmega);
    }
    if (tag == "Product") {
        const json& fs = detail::field(j, "factors", where);
        if (!fs.is_array()) throw ConfigError(where + ": 'factors' must be an array");
        std::vector<MultFuncSpec> out;
        for (std::size_t i = 0; i < fs.size(); ++i)
            out.push_back(mult_func_from_json(fs[i], where + ".factors[" + std::to_string(i) + "]"));
        return product(std::move(out));
    }
    if (tag == "ConjugatePower")
        return conjugate_power(mult_func_from_json(detail::field(j, "inner", where), where + ".inner"),
                               detail::get_as<int>(j, "c", where));
    throw ConfigError(where + ": unknown node '" + tag + "'");
}

inline json to_json(const CorrelationSpec& spec)
{
    json fs = json::array();
    for (const auto& f : spec.factors) fs.push_back({{"g", to_json(f.g)}, {"h", f.h}, {"q", f.q}});
    return json{{"factors", fs}};
}

inline CorrelationSpec correlation_from_json(const json& j, const std::string& where = "spec")
{
    const json& fs = detail::field(j, "factors", where);
    if (!fs.is_array() || fs.empty()) throw ConfigError(where + ": 'factors' must be a non-empty array");
    CorrelationSpec spec;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const std::string w = where + ".factors[" + std::to_string(i) + "]";
        CorrelationFactor f{mult_func_from_json(detail::field(fs[i], "g", w), w + ".g"),
                            fs[i].contains("h") ? detail::get_as<std::int64_t>(fs[i], "h", w) : 0,
                            fs[i].contains("q") ? detail::get_as<std::int64_t>(fs[i], "q", w) : 1};
        if (f.q < 1) throw ConfigError(w + ": q must be >= 1");
        spec.factors.push_back(std::move(f));
    }
    return spec;
}

inline json to_json(const NilSequence& seq)
{
    if (const auto* p = std::get_if<PolyPhase>(&seq)) return json{{"kind", "poly"}, {"coeffs", p->coeffs}};
    const auto& b = std::get<BracketNilchar>(seq);
    return json{{"kind", "bracket"}, {"alpha", b.alpha}, {"beta", b.beta}, {"center", b.center}, {"width", b.width}};
}

inline NilSequence nil_sequence_from_json(const json& j, const std::string& where = "sequence")
{
    const auto kind = detail::get_as<std::string>(j, "kind", where);
    if (kind == "poly") {
        PolyPhase p{detail::get_as<std::vector<double>>(j, "coeffs", where)};
        if (p.coeffs.size() < 2) throw ConfigError(where + ": 'coeffs' needs at least 2 entries");
        return p;
    }
    if (kind == "bracket") {
        BracketNilchar b;
        b.alpha = detail::get_as<double>(j, "alpha", where);
        b.beta = detail::get_as<double>(j, "beta", where);
        if (j.contains("center")) b.center = detail::get_as<double>(j, "center", where);
        if (j.contains("width")) b.width = detail::get_as<double>(j, "width", where);
        try {
            b.validate();
        } catch (const DomainError& e) {
            throw ConfigError(where + ": " + e.what());
        }
        return b;
    }
    throw ConfigError(where + ": unknown kind '" + kind + "'");
}

} // namespace chowla
