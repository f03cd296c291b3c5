#pragma once

#include <json.hpp>

#include "knapcount/robp.hpp"

namespace knapcount {

// Debugging dumps of programs and sources. Big integers travel as decimal
// strings, probabilities as {"num", "den"} pairs; not a stability contract.

inline nlohmann::json rational_to_json(const Rational& r) {
    return {{"num", numerator(r).str()}, {"den", denominator(r).str()}};
}

inline Rational rational_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("num") || !j.contains("den"))
        throw input_error("rational JSON must be {num, den}");
    const Int den = parse_int(j.at("den").get<std::string>());
    if (den == 0) throw input_error("rational JSON has a zero denominator");
    return Rational(parse_int(j.at("num").get<std::string>()), den);
}

inline nlohmann::json robp_to_json(const Robp& m) {
    nlohmann::json trans = nlohmann::json::array();
    for (int i = 0; i < m.length(); ++i) {
        nlohmann::json layer = nlohmann::json::array();
        for (const auto& t : m.transitions(i))
            layer.push_back(nlohmann::json::array({t.next[0], t.next[1]}));
        trans.push_back(std::move(layer));
    }
    nlohmann::json accept = nlohmann::json::array();
    for (std::uint8_t a : m.accept_labels()) accept.push_back(static_cast<int>(a));
    nlohmann::json layers = nlohmann::json::array();
    for (int i = 0; i <= m.length(); ++i) layers.push_back(m.width(i));
    return {{"n", m.length()}, {"layers", layers}, {"transitions", trans}, {"accept", accept}};
}

inline Robp robp_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("transitions") || !j.contains("accept"))
        throw input_error("ROBP JSON must carry n, transitions, accept");
    const int n = j.at("n").get<int>();
    std::vector<std::vector<Robp::Transition>> trans;
    for (const auto& layer : j.at("transitions")) {
        std::vector<Robp::Transition> row;
        for (const auto& pair : layer) {
            if (!pair.is_array() || pair.size() != 2)
                throw input_error("ROBP JSON transitions must be index pairs");
            row.push_back(Robp::Transition{
                {pair.at(0).get<std::uint32_t>(), pair.at(1).get<std::uint32_t>()}});
        }
        trans.push_back(std::move(row));
    }
    std::vector<std::uint8_t> accept;
    for (const auto& a : j.at("accept")) accept.push_back(a.get<int>() ? 1 : 0);
    return Robp(n, std::move(trans), std::move(accept));
}

inline nlohmann::json source_to_json(const SmallSpaceSource& d) {
    nlohmann::json layers = nlohmann::json::array();
    for (int i = 0; i < d.length(); ++i) {
        nlohmann::json layer = nlohmann::json::array();
        for (std::size_t s = 0; s < d.width(i); ++s) {
            nlohmann::json edges = nlohmann::json::array();
            for (int z = 0; z < 2; ++z) {
                const auto& e = d.edges(i, s)[z];
                edges.push_back({{"target", e.target}, {"prob", rational_to_json(e.prob)}});
            }
            layer.push_back(std::move(edges));
        }
        layers.push_back(std::move(layer));
    }
    return {{"n", d.length()}, {"final_width", d.width(d.length())}, {"edges", layers}};
}

inline SmallSpaceSource source_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("edges") || !j.contains("final_width"))
        throw input_error("source JSON must carry n, final_width, edges");
    const int n = j.at("n").get<int>();
    std::vector<std::vector<SmallSpaceSource::StateEdges>> edges;
    for (const auto& layer : j.at("edges")) {
        std::vector<SmallSpaceSource::StateEdges> row;
        for (const auto& state : layer) {
            SmallSpaceSource::StateEdges se;
            for (int z = 0; z < 2; ++z) {
                se[z].target = state.at(z).at("target").get<std::int32_t>();
                se[z].prob = rational_from_json(state.at(z).at("prob"));
            }
            row.push_back(std::move(se));
        }
        edges.push_back(std::move(row));
    }
    return SmallSpaceSource(n, std::move(edges), j.at("final_width").get<std::size_t>());
}

} // namespace knapcount
