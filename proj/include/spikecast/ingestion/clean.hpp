#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "spikecast/core/text.hpp"

namespace spikecast {

enum class TextFormat { html, markdown, plain };

inline constexpr std::size_t kDefaultMaxChars = 60000;
// Blocks with at least this share of characters inside links are dropped.
inline constexpr double kMaxLinkDensity = 0.3;

namespace detail {

inline void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp <= 0x10FFFF) {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

}  // namespace detail

inline std::string decode_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out.push_back(s[i]);
            continue;
        }
        auto semi = s.find(';', i);
        if (semi == std::string_view::npos || semi - i > 10) {
            out.push_back('&');
            continue;
        }
        std::string_view name = s.substr(i + 1, semi - i - 1);
        std::string rep;
        if (name == "amp") rep = "&";
        else if (name == "lt") rep = "<";
        else if (name == "gt") rep = ">";
        else if (name == "quot") rep = "\"";
        else if (name == "apos" || name == "#39") rep = "'";
        else if (name == "nbsp") rep = " ";
        else if (name == "mdash") rep = "\xE2\x80\x94";
        else if (name == "ndash") rep = "\xE2\x80\x93";
        else if (name == "hellip") rep = "\xE2\x80\xA6";
        else if (name.size() > 1 && name[0] == '#') {
            std::uint32_t cp = 0;
            bool hex = name[1] == 'x' || name[1] == 'X';
            bool ok = name.size() > (hex ? 2u : 1u);
            for (std::size_t k = hex ? 2 : 1; ok && k < name.size(); ++k) {
                char c = name[k];
                int d = (c >= '0' && c <= '9') ? c - '0'
                        : hex && (c >= 'a' && c <= 'f') ? c - 'a' + 10
                        : hex && (c >= 'A' && c <= 'F') ? c - 'A' + 10
                                                        : -1;
                if (d < 0 || cp > 0x10FFFF) ok = false;
                else cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(d);
            }
            if (ok) detail::append_utf8(rep, cp);
        }
        if (rep.empty() && name != "") {
            out.push_back('&');
            continue;
        }
        out += rep;
        i = semi;
    }
    return out;
}

namespace detail {

inline const std::set<std::string, std::less<>>& skipped_elements() {
    static const std::set<std::string, std::less<>> s{"script", "style",  "noscript", "nav",    "footer",
                                                      "aside",  "form",   "template", "svg",    "iframe",
                                                      "head",   "button", "select",   "canvas", "menu"};
    return s;
}

inline const std::set<std::string, std::less<>>& block_elements() {
    static const std::set<std::string, std::less<>> s{
        "address", "article", "blockquote", "body",    "dd",     "div",     "dl",   "dt",    "figcaption",
        "figure",  "h1",      "h2",         "h3",      "h4",     "h5",      "h6",   "header", "hr",
        "html",    "li",      "main",       "ol",      "p",      "pre",     "section", "table", "tbody",
        "td",      "th",      "thead",      "tr",      "ul",     "br"};
    return s;
}

// Block kinds whose text is kept regardless of length.
inline bool is_prose_block(std::string_view kind) {
    static const std::set<std::string, std::less<>> s{"h1", "h2", "h3", "h4", "h5", "h6", "p", "blockquote",
                                                      "pre", "li", "td", "dd", "figcaption"};
    return s.count(kind) > 0;
}

// Loose text in layout containers survives only when it looks like prose.
inline constexpr std::size_t kMinLooseBlockChars = 80;

struct Block {
    std::string kind;
    std::string text;
    std::size_t link_chars = 0;
};

inline std::size_t visible_chars(std::string_view s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return !is_space(c); }));
}

struct Tag {
    std::string name;
    bool closing = false;
    bool self_closing = false;
    std::size_t end = 0;  // index one past '>'
};

inline std::optional<Tag> read_tag(std::string_view s, std::size_t lt) {
    std::size_t i = lt + 1;
    Tag t;
    if (i < s.size() && s[i] == '/') {
        t.closing = true;
        ++i;
    }
    std::size_t name_start = i;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '-')) ++i;
    if (i == name_start) return std::nullopt;
    t.name = to_lower(s.substr(name_start, i - name_start));
    // Find '>' outside quotes.
    char quote = 0;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (quote) {
            if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '>') {
            t.self_closing = i > 0 && s[i - 1] == '/';
            t.end = i + 1;
            return t;
        }
    }
    t.end = s.size();
    return t;
}

// Index just past the closing tag of `name`, honouring nesting.
inline std::size_t skip_element(std::string_view s, std::size_t from, const std::string& name) {
    int depth = 1;
    std::size_t i = from;
    const bool raw_text = name == "script" || name == "style";
    while (i < s.size()) {
        auto lt = s.find('<', i);
        if (lt == std::string_view::npos) return s.size();
        auto tag = read_tag(s, lt);
        if (!tag) {
            i = lt + 1;
            continue;
        }
        if (tag->name == name) {
            if (tag->closing) {
                if (--depth == 0) return tag->end;
            } else if (!tag->self_closing && !raw_text) {
                ++depth;
            }
        }
        i = tag->end;
    }
    return s.size();
}

inline std::string clean_html(std::string_view s) {
    std::vector<Block> blocks;
    std::vector<std::string> open_blocks;
    Block cur;
    int link_depth = 0;

    auto flush = [&] {
        if (visible_chars(cur.text) > 0) blocks.push_back(std::move(cur));
        cur = Block{};
        cur.kind = open_blocks.empty() ? "" : open_blocks.back();
    };

    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '<') {
            auto lt = s.find('<', i);
            if (lt == std::string_view::npos) lt = s.size();
            std::string text = decode_entities(s.substr(i, lt - i));
            if (link_depth > 0) cur.link_chars += visible_chars(text);
            cur.text += text;
            i = lt;
            continue;
        }
        if (s.substr(i, 4) == "<!--") {
            auto end = s.find("-->", i + 4);
            i = end == std::string_view::npos ? s.size() : end + 3;
            continue;
        }
        if (i + 1 < s.size() && (s[i + 1] == '!' || s[i + 1] == '?')) {
            auto end = s.find('>', i);
            i = end == std::string_view::npos ? s.size() : end + 1;
            continue;
        }
        auto tag = read_tag(s, i);
        if (!tag) {  // a bare '<' in text
            cur.text.push_back('<');
            ++i;
            continue;
        }
        i = tag->end;
        if (!tag->closing && skipped_elements().count(tag->name)) {
            if (!tag->self_closing) i = skip_element(s, i, tag->name);
            continue;
        }
        if (tag->name == "a") {
            if (tag->closing) link_depth = std::max(0, link_depth - 1);
            else if (!tag->self_closing) ++link_depth;
            continue;
        }
        if (!block_elements().count(tag->name)) {
            continue;  // inline element: text flows through
        }
        if (tag->name == "br" || tag->name == "hr") {
            cur.text.push_back(' ');
            continue;
        }
        flush();
        if (tag->closing) {
            auto it = std::find(open_blocks.rbegin(), open_blocks.rend(), tag->name);
            if (it != open_blocks.rend()) open_blocks.erase(std::next(it).base(), open_blocks.end());
        } else if (!tag->self_closing) {
            open_blocks.push_back(tag->name);
        }
        cur.kind = open_blocks.empty() ? "" : open_blocks.back();
    }
    flush();

    std::string out;
    for (const auto& b : blocks) {
        std::string text = collapse_whitespace(b.text);
        const std::size_t chars = visible_chars(text);
        if (chars == 0) continue;
        if (static_cast<double>(b.link_chars) >= kMaxLinkDensity * static_cast<double>(chars)) continue;
        if (!is_prose_block(b.kind) && text.size() < kMinLooseBlockChars) continue;
        if (!out.empty()) out.push_back(' ');
        out += text;
    }
    return out;
}

inline std::string strip_inline_tags(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '<') {
            auto tag = read_tag(s, i);
            if (tag) {
                i = tag->end - 1;
                out.push_back(' ');
                continue;
            }
        }
        out.push_back(s[i]);
    }
    return out;
}

inline std::string clean_markdown(std::string_view s) {
    std::string joined;
    bool first = true;
    for (const auto& raw_line : split(s, '\n')) {
        std::string_view line = raw_line;
        while (!line.empty() && is_space(line.front())) line.remove_prefix(1);
        if (line.substr(0, 3) == "```" || line.substr(0, 3) == "~~~") continue;
        while (!line.empty() && (line.front() == '#' || line.front() == '>')) {
            line.remove_prefix(1);
            while (!line.empty() && is_space(line.front())) line.remove_prefix(1);
        }
        if (line.size() >= 2 && (line[0] == '-' || line[0] == '*' || line[0] == '+') && line[1] == ' ')
            line.remove_prefix(2);
        else {
            std::size_t d = 0;
            while (d < line.size() && std::isdigit(static_cast<unsigned char>(line[d]))) ++d;
            if (d > 0 && d + 1 < line.size() && (line[d] == '.' || line[d] == ')') && line[d + 1] == ' ')
                line.remove_prefix(d + 2);
        }
        if (line == "---" || line == "***" || line == "___") continue;
        if (!first) joined.push_back(' ');
        joined += line;
        first = false;
    }

    // Links and images: keep the visible text.
    std::string out;
    for (std::size_t i = 0; i < joined.size(); ++i) {
        const bool image = joined[i] == '!' && i + 1 < joined.size() && joined[i + 1] == '[';
        if (joined[i] == '[' || image) {
            std::size_t open = image ? i + 1 : i;
            auto close = joined.find(']', open);
            if (close != std::string::npos && close + 1 < joined.size() && joined[close + 1] == '(') {
                auto paren = joined.find(')', close + 2);
                if (paren != std::string::npos) {
                    out += joined.substr(open + 1, close - open - 1);
                    i = paren;
                    continue;
                }
            }
        }
        out.push_back(joined[i]);
    }

    std::string plain;
    for (std::size_t i = 0; i < out.size(); ++i) {
        char c = out[i];
        if (c == '*' || c == '`' || c == '^') continue;
        if ((c == '~' || c == '_') && i + 1 < out.size() && out[i + 1] == c) {
            ++i;
            continue;
        }
        if (c == '\\' && i + 1 < out.size() && std::ispunct(static_cast<unsigned char>(out[i + 1]))) {
            plain.push_back(out[++i]);
            continue;
        }
        plain.push_back(c);
    }
    return decode_entities(strip_inline_tags(plain));
}

}  // namespace detail

// Markup-free, single-spaced text capped at max_chars (tail truncated).
// Never fails: malformed markup degrades to its text.
inline std::string clean_text(std::string_view raw, TextFormat format, std::size_t max_chars = kDefaultMaxChars) {
    std::string text;
    switch (format) {
        case TextFormat::html: text = detail::clean_html(raw); break;
        case TextFormat::markdown: text = detail::clean_markdown(raw); break;
        case TextFormat::plain: text = std::string(raw); break;
    }
    text = truncate_utf8(collapse_whitespace(text), max_chars);
    while (!text.empty() && is_space(text.back())) text.pop_back();
    return text;
}

}  // namespace spikecast
