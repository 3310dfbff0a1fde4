#include "askeval/templates.hpp"

#include "askeval/core.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace askeval {

// Generated at configure time from templates/*.txt.
const std::map<std::string, std::string>& builtin_template_texts();

namespace {

bool placeholder_char(char c) {
    return (c >= 'a' && c <= 'z') || c == '_' || (c >= '0' && c <= '9');
}

}  // namespace

std::string render_template(std::string_view text, const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '<') {
            std::size_t j = i + 1;
            while (j < text.size() && placeholder_char(text[j])) ++j;
            if (j < text.size() && text[j] == '>' && j > i + 1) {
                auto it = vars.find(std::string(text.substr(i + 1, j - i - 1)));
                if (it != vars.end()) {
                    out += it->second;
                    i = j + 1;
                    continue;
                }
            }
        }
        out.push_back(text[i]);
        ++i;
    }
    return out;
}

const TemplateSet& TemplateSet::builtin() {
    static const TemplateSet set = [] {
        TemplateSet s;
        for (const auto& [name, text] : builtin_template_texts()) s.texts_.emplace(name, text);
        return s;
    }();
    return set;
}

TemplateSet TemplateSet::with_overrides(const std::string& dir) {
    namespace fs = std::filesystem;
    TemplateSet s = builtin();
    if (!fs::is_directory(dir)) throw Error("template directory not found: " + dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        std::string text = buf.str();
        if (!text.empty() && text.back() == '\n') text.pop_back();
        s.set(entry.path().stem().string(), std::move(text));
    }
    return s;
}

const std::string& TemplateSet::get(std::string_view name) const {
    auto it = texts_.find(name);
    if (it == texts_.end()) throw Error("unknown template '" + std::string(name) + "'");
    return it->second;
}

bool TemplateSet::contains(std::string_view name) const {
    return texts_.find(name) != texts_.end();
}

void TemplateSet::set(std::string name, std::string text) {
    texts_.insert_or_assign(std::move(name), std::move(text));
}

std::string TemplateSet::render(std::string_view name, const std::map<std::string, std::string>& vars) const {
    return render_template(get(name), vars);
}

}  // namespace askeval
