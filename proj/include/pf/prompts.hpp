#pragma once
// Prompt templates with {NAMED} placeholder substitution.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "pf/core.hpp"

namespace pf {

class MissingPlaceholderError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct PromptTemplate {
    std::string template_id;
    std::string body;  // text with {NAMED} placeholders
};

// Single-pass substitution: placeholders are {UPPER_SNAKE} tokens; every
// placeholder referenced by the body must exist in the binding map, and
// substituted values are never re-scanned.
std::string render_template(const PromptTemplate& tmpl,
                            const std::map<std::string, std::string>& bindings);

// Named templates, loadable from UTF-8 text files by template_id
// (file name = <template_id>.txt). builtin() ships the default set.
class PromptLibrary {
  public:
    static const PromptLibrary& builtin();

    void set(PromptTemplate tmpl);
    void load_file(const std::string& path);       // id from the file stem
    void load_directory(const std::string& path);  // every *.txt inside
    const PromptTemplate& get(const std::string& template_id) const;

  private:
    std::map<std::string, PromptTemplate> templates_;
};

// Clause added to the regulator prompt in multi-party mode.
extern const std::string kSameSideClause;

// Renders the system prompt for one pipeline role. For generator roles the
// speaker selects persuader/persuadee wording, goal, and any strategy
// directive from cfg; other roles ignore the speaker.
std::string render_system_prompt(const PromptLibrary& prompts, AgentRole role,
                                 const PersuasionTask& task, const RunConfig& cfg,
                                 std::optional<SpeakerId> speaker = std::nullopt);

}  // namespace pf
