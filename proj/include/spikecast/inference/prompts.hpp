#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>

#include "spikecast/error.hpp"

#ifndef SPIKECAST_PROMPT_DIR
#define SPIKECAST_PROMPT_DIR "prompts"
#endif

namespace spikecast {

inline std::filesystem::path default_prompt_dir() { return SPIKECAST_PROMPT_DIR; }

// Versioned prompt templates, one file per id: <dir>/<id>.txt.
// Placeholders are written {{name}}.
class PromptLibrary {
public:
    explicit PromptLibrary(std::filesystem::path dir = default_prompt_dir()) : dir_(std::move(dir)) {}

    const std::string& get(const std::string& id) const {
        std::lock_guard lock(mu_);
        auto it = cache_.find(id);
        if (it != cache_.end()) return it->second;
        std::ifstream in(dir_ / (id + ".txt"), std::ios::binary);
        if (!in) throw ConfigError("missing prompt template " + (dir_ / (id + ".txt")).string());
        std::ostringstream ss;
        ss << in.rdbuf();
        return cache_.emplace(id, ss.str()).first->second;
    }

    std::string render(const std::string& id, const std::map<std::string, std::string>& vars) const {
        return substitute(get(id), vars, id);
    }

    static std::string substitute(const std::string& tmpl, const std::map<std::string, std::string>& vars,
                                  const std::string& id = "template") {
        std::string out;
        std::size_t i = 0;
        while (i < tmpl.size()) {
            auto open = tmpl.find("{{", i);
            if (open == std::string::npos) {
                out.append(tmpl, i, std::string::npos);
                break;
            }
            auto close = tmpl.find("}}", open + 2);
            if (close == std::string::npos) throw ConfigError(id + ": unterminated placeholder");
            out.append(tmpl, i, open - i);
            std::string name = tmpl.substr(open + 2, close - open - 2);
            auto it = vars.find(name);
            if (it == vars.end()) throw ConfigError(id + ": no value for placeholder {{" + name + "}}");
            out += it->second;
            i = close + 2;
        }
        return out;
    }

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    mutable std::map<std::string, std::string> cache_;
    mutable std::mutex mu_;
};

}  // namespace spikecast
