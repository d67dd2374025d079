#pragma once

#include "formal_characters.hpp"
#include "principal_series.hpp"
#include "pro_p_groups.hpp"

#include <json.hpp>

namespace nchar {

using json = nlohmann::json;

// ---- FormalFunction ---------------------------------------------------------------

inline json to_json(const GroupRingElement& g)
{
    json terms = json::array();
    for (const auto& [m, c] : g.terms()) terms.push_back({{"exponents", m}, {"coeff", c.get_str()}});
    return terms;
}

inline GroupRingElement group_ring_from_json(const json& j)
{
    GroupRingElement g;
    for (const auto& t : j) g.add(t.at("exponents").get<Monomial>(), Z(t.at("coeff").get<std::string>()));
    return g;
}

inline json to_json(const FormalFunction& f)
{
    return std::visit(Overloaded{[](const RingNode& n) { return json{{"kind", "ring"}, {"terms", to_json(n.value)}}; },
                                 [](const GeomNode& n) { return json{{"kind", "geom"}, {"lambda", n.lambda}}; },
                                 [](const PermNode& n) {
                                     return json{{"kind", "perm"},
                                                 {"p", n.p},
                                                 {"h", n.h},
                                                 {"multiplier", n.multiplier},
                                                 {"include_zero", n.include_zero}};
                                 },
                                 [](const SumNode& n) {
                                     json c = json::array();
                                     for (const auto& x : n.children) c.push_back(to_json(x));
                                     return json{{"kind", "sum"}, {"children", c}};
                                 },
                                 [](const ProductNode& n) {
                                     json c = json::array();
                                     for (const auto& x : n.children) c.push_back(to_json(x));
                                     return json{{"kind", "product"}, {"children", c}};
                                 }},
                      f->v);
}

inline FormalFunction formal_from_json(const json& j)
{
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "ring") return ring(group_ring_from_json(j.at("terms")));
    if (kind == "geom") return geom(j.at("lambda").get<Monomial>());
    if (kind == "perm")
        return perm(j.at("p").get<long>(), j.at("h").get<long>(), j.at("multiplier").get<Monomial>(),
                    j.at("include_zero").get<bool>());
    if (kind != "sum" && kind != "product") throw DomainError("unknown formal node kind '" + kind + "'");
    std::vector<FormalFunction> ch;
    for (const auto& c : j.at("children")) ch.push_back(formal_from_json(c));
    return kind == "sum" ? sum(std::move(ch)) : product(std::move(ch));
}

// ---- configs -----------------------------------------------------------------------

inline json to_json(const SL2Config& c)
{
    return {{"p", c.p}, {"c", c.c}, {"h_plus", c.h_plus}, {"h_minus", c.h_minus}, {"e", c.e}, {"k", c.k}};
}

inline SL2Config sl2_config_from_json(const json& j)
{
    SL2Config c;
    c.p = j.at("p").get<long>();
    c.c = j.value("c", 0L);
    c.h_plus = j.value("h_plus", 0L);
    c.h_minus = j.value("h_minus", 0L);
    c.e = j.value("e", 0L);
    c.k = j.value("k", 2L);
    c.validate();
    return c;
}

inline json to_json(const RootDatum& rd)
{
    return {{"p", rd.p}, {"t", rd.t}, {"roots", rd.roots}, {"chi_w", rd.chi_w}, {"levels", rd.levels}, {"k", rd.k}};
}

inline RootDatum root_datum_from_json(const json& j)
{
    RootDatum rd;
    rd.p = j.at("p").get<long>();
    rd.t = j.at("t").get<long>();
    rd.roots = j.at("roots").get<std::vector<std::vector<long>>>();
    rd.chi_w = j.value("chi_w", std::vector<long>(rd.t, 0));
    rd.levels = j.value("levels", std::vector<long>(rd.roots.size(), 1));
    rd.k = j.value("k", 2L);
    rd.validate();
    return rd;
}

// {"p": 5, "generators": [["1","0"],["0","5"]]} with generators as columns; entries are rationals.
inline PLattice lattice_from_json(const json& j)
{
    long p = j.at("p").get<long>();
    const auto& cols = j.at("generators");
    if (cols.empty()) throw DomainError("lattice without generators");
    std::size_t h = cols.front().size();
    QMatrix g(h, cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (cols[c].size() != h) throw DomainError("ragged lattice generators");
        for (std::size_t r = 0; r < h; ++r) {
            const auto& v = cols[c][r];
            g(r, c) = v.is_string() ? parse_rational(v.get<std::string>()) : Q(v.get<long>());
        }
    }
    return PLattice(p, g);
}

} // namespace nchar
