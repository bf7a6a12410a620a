#pragma once
// Whole-dialogue smoothing pass with label merging when the agent changes
// the round count.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pf/core.hpp"
#include "pf/prompts.hpp"
#include "pf/provider.hpp"

namespace pf {

class MappingError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Order-preserving merge of old rounds into new ones. Old indices are
// 1-based, partition 1..old_count; new indices cover 1..new_count exactly
// once. Splits are not representable and are rejected.
struct RoundMapping {
    struct Entry {
        std::vector<std::size_t> old_rounds;  // non-empty, ascending
        std::size_t new_round = 0;
    };
    std::vector<Entry> entries;

    static RoundMapping identity(std::size_t round_count);
    std::size_t new_round_count() const { return entries.size(); }

    friend bool operator==(const RoundMapping&, const RoundMapping&) = default;
};

// Throws MappingError unless the mapping is a valid partition of
// 1..old_count with order preserved.
void validate_mapping(const RoundMapping& mapping, std::size_t old_count);

// Parses "1,2->1; 3->2" (the MAPPING header payload).
RoundMapping parse_round_mapping(const std::string& text);
std::string format_round_mapping(const RoundMapping& mapping);

// A merged round keeps each speaker's score from the LAST constituent old
// round; scores are cumulative, so the latest value is the merged state.
std::vector<std::map<SpeakerId, double>> remap_labels(
    const std::vector<std::map<SpeakerId, double>>& scores, const RoundMapping& mapping);

// The line-oriented reply the postprocessing agent must produce.
struct PostprocessEnvelope {
    RoundMapping mapping;
    // texts[new_round - 1][speaker] = rewritten utterance
    std::vector<std::map<SpeakerId, std::string>> texts;
};

PostprocessEnvelope parse_postprocess_envelope(const std::string& reply);

// Runs the postprocessing agent over a finished dialogue: rewrites
// final_text fields and remaps per-round labels when rounds merge.
// Termination and task metadata are unchanged.
Dialogue postprocess_dialogue(const Dialogue& d, const RunConfig& cfg, Provider& provider,
                              const PromptLibrary& prompts = PromptLibrary::builtin());

}  // namespace pf
