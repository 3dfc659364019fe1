#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "spikecast/core/serialize.hpp"
#include "spikecast/core/text.hpp"
#include "spikecast/inference/fields.hpp"

namespace spikecast {

// Drops reasoning-model <think>...</think> sections.
inline std::string strip_reasoning(std::string_view text) {
    std::string out(text);
    for (;;) {
        auto open = out.find("<think>");
        if (open == std::string::npos) break;
        auto close = out.find("</think>", open);
        out.erase(open, close == std::string::npos ? std::string::npos : close + 8 - open);
    }
    // A lone closing tag means the opening one was swallowed by the server.
    if (auto close = out.find("</think>"); close != std::string::npos) out.erase(0, close + 8);
    return out;
}

// First JSON document in a completion: the whole text, a fenced block, or
// the outermost {...} / [...] span.
inline std::optional<Json> extract_json(std::string_view completion) {
    std::string text = strip_reasoning(completion);
    auto try_parse = [](std::string_view s) -> std::optional<Json> {
        auto j = Json::parse(s.begin(), s.end(), nullptr, false);
        if (j.is_discarded()) return std::nullopt;
        return j;
    };
    std::string_view trimmed = text;
    while (!trimmed.empty() && is_space(trimmed.front())) trimmed.remove_prefix(1);
    while (!trimmed.empty() && is_space(trimmed.back())) trimmed.remove_suffix(1);
    if (auto j = try_parse(trimmed)) return j;
    for (auto [open, close] : {std::pair{'{', '}'}, std::pair{'[', ']'}}) {
        auto a = text.find(open);
        auto b = text.rfind(close);
        if (a != std::string::npos && b != std::string::npos && b > a)
            if (auto j = try_parse(std::string_view(text).substr(a, b - a + 1))) return j;
    }
    return std::nullopt;
}

namespace detail {

inline std::optional<double> json_number(const Json& j) {
    if (j.is_number()) {
        double v = j.get<double>();
        return std::isfinite(v) ? std::optional<double>(v) : std::nullopt;
    }
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        s.erase(std::remove(s.begin(), s.end(), ','), s.end());
        char* end = nullptr;
        double v = std::strtod(s.c_str(), &end);
        if (end && *end == '\0' && !s.empty() && std::isfinite(v)) return v;
    }
    return std::nullopt;
}

}  // namespace detail

// Parses one completion into a field value; nullopt = the run abstains.
// Accepts either {"value": X} or a bare X.
inline std::optional<FieldValue> parse_field_value(DataType type, std::string_view completion) {
    auto doc = extract_json(completion);
    if (!doc) return std::nullopt;
    Json v = doc->is_object() && doc->contains("value") ? (*doc)["value"] : *doc;

    switch (type) {
        case DataType::string: {
            if (!v.is_string()) return std::nullopt;
            std::string s = collapse_whitespace(v.get<std::string>());
            if (s.empty()) return std::nullopt;
            return s;
        }
        case DataType::string_list: {
            StringList out;
            if (v.is_string()) v = Json::array({v});
            if (!v.is_array()) return std::nullopt;
            for (const auto& item : v) {
                if (!item.is_string()) return std::nullopt;
                std::string s = collapse_whitespace(item.get<std::string>());
                if (!s.empty()) out.push_back(std::move(s));
            }
            return out;
        }
        case DataType::integer: {
            auto x = detail::json_number(v);
            if (!x || *x < 0 || *x > 9.2e18) return std::nullopt;
            return static_cast<std::int64_t>(std::llround(*x));
        }
        case DataType::integer_0_10: {
            auto x = detail::json_number(v);
            if (!x || *x < 0 || *x > 10) return std::nullopt;
            return static_cast<std::int64_t>(std::llround(*x));
        }
        case DataType::real: {
            auto x = detail::json_number(v);
            if (!x || *x < 0) return std::nullopt;
            return *x;
        }
        case DataType::real_map: {
            if (!v.is_object()) return std::nullopt;
            RelevanceMap out;
            for (const auto& [k, x] : v.items()) {
                auto n = detail::json_number(x);
                if (!n || *n < 0 || *n > 1) return std::nullopt;
                std::string key = collapse_whitespace(k);
                if (!key.empty()) out[key] = *n;
            }
            return out;
        }
        case DataType::integer_list: return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace spikecast
