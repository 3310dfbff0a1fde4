#include "askeval/structured.hpp"

#include "askeval/core.hpp"

namespace askeval {
namespace {

std::optional<json> parse_object(std::string_view text) {
    json j = json::parse(text.begin(), text.end(), nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    return j;
}

}  // namespace

std::optional<json> extract_json_object(std::string_view raw) {
    if (auto whole = parse_object(raw)) return whole;

    constexpr std::string_view fence = "```";
    std::size_t pos = 0;
    while (true) {
        const std::size_t open = raw.find(fence, pos);
        if (open == std::string_view::npos) return std::nullopt;
        // The info string (e.g. "json") runs to the end of the opening line.
        const std::size_t body_start = raw.find('\n', open + fence.size());
        if (body_start == std::string_view::npos) return std::nullopt;
        const std::string_view info = raw.substr(open + fence.size(), body_start - open - fence.size());
        const std::size_t close = raw.find(fence, body_start + 1);
        if (close == std::string_view::npos) return std::nullopt;
        const std::string lang = normalize_whitespace(info);
        if (lang.empty() || lang == "json" || lang == "JSON") {
            if (auto block = parse_object(raw.substr(body_start + 1, close - body_start - 1))) return block;
        }
        pos = close + fence.size();
    }
}

}  // namespace askeval
