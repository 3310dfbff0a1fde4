#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>

namespace askeval {

/// Named prompt templates with `<placeholder>` slots.
///
/// The built-in set is compiled from the files under templates/; a directory
/// of `<name>.txt` files can override any subset of them at run time.
class TemplateSet {
  public:
    static const TemplateSet& builtin();

    /// Built-ins overlaid with every `*.txt` file in `dir`.
    static TemplateSet with_overrides(const std::string& dir);

    [[nodiscard]] const std::string& get(std::string_view name) const;
    [[nodiscard]] bool contains(std::string_view name) const;
    void set(std::string name, std::string text);

    /// Single-pass substitution of `<name>` for every name in `vars`. Text
    /// inserted from `vars` is never rescanned; unknown `<...>` is kept verbatim.
    [[nodiscard]] std::string render(std::string_view name,
                                     const std::map<std::string, std::string>& vars) const;

  private:
    std::map<std::string, std::string, std::less<>> texts_;
};

std::string render_template(std::string_view text, const std::map<std::string, std::string>& vars);

}  // namespace askeval
