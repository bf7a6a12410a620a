#pragma once
// Control loop driving the agents through
// generate -> monitor/revise -> refine -> annotate -> regulate -> terminate.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pf/agents.hpp"
#include "pf/core.hpp"
#include "pf/prompts.hpp"
#include "pf/provider.hpp"

namespace pf {

// A dialogue that could not be completed; carries whatever rounds were
// accepted before the failure.
class GenerationError : public std::runtime_error {
  public:
    GenerationError(std::string task_id, std::string reason, std::vector<Round> partial = {})
        : std::runtime_error("task " + task_id + ": " + reason),
          task_id_(std::move(task_id)),
          reason_(std::move(reason)),
          partial_rounds_(std::move(partial)) {}

    const std::string& task_id() const { return task_id_; }
    const std::string& reason() const { return reason_; }
    const std::vector<Round>& partial_rounds() const { return partial_rounds_; }

  private:
    std::string task_id_;
    std::string reason_;
    std::vector<Round> partial_rounds_;
};

// Loop progress for one dialogue worker. All per-dialogue state lives here
// or in the agents; nothing is shared across dialogues.
struct GenerationState {
    std::size_t current_round = 1;
    std::vector<Round> rounds;          // accepted rounds
    std::vector<Utterance> pending;     // current round under construction
    std::size_t round_revisions = 0;    // regulator-driven revisions this round
    long long rng_seed = 0;
};

// Turn order: persuader_0, ..., persuader_{n-1}, persuadee.
std::vector<SpeakerId> speaker_order(const RunConfig& cfg);

Dialogue generate_dialogue(const PersuasionTask& task, const RunConfig& cfg,
                           Provider& provider,
                           const PromptLibrary& prompts = PromptLibrary::builtin());

// Returns a config in which only the designated speaker's system prompt
// gains the directive sentence. Throws std::invalid_argument for a speaker
// outside the configured roster.
RunConfig apply_strategy_control(const RunConfig& cfg, const SpeakerId& speaker,
                                 StrategyDirective directive);

// Extends the roster to n_persuaders >= 2; the regulator prompt gains the
// same-side no-repetition/no-conflict clause.
RunConfig configure_multi_party(const RunConfig& cfg, std::size_t n_persuaders);

struct BatchFailure {
    std::string task_id;
    std::string reason;
};

struct BatchResult {
    std::vector<Dialogue> dialogues;   // input task order, failures skipped
    std::vector<BatchFailure> failures;  // input task order
};

using ProviderFactory =
    std::function<std::shared_ptr<Provider>(const PersuasionTask&, std::size_t ordinal)>;
using BatchCallback = std::function<void(std::size_t ordinal, const Dialogue&)>;

// Runs tasks with up to `parallelism` dialogue workers. Each dialogue gets a
// derived seed cfg.seed + ordinal; output order matches input order
// regardless of completion order. Per-task failures are collected, not fatal.
BatchResult generate_batch(const std::vector<PersuasionTask>& tasks, const RunConfig& cfg,
                           const ProviderFactory& provider_factory, std::size_t parallelism,
                           const PromptLibrary& prompts = PromptLibrary::builtin(),
                           const BatchCallback& on_complete = {});

// Convenience for a single shared provider (it must support concurrent use).
BatchResult generate_batch(const std::vector<PersuasionTask>& tasks, const RunConfig& cfg,
                           Provider& provider, std::size_t parallelism,
                           const PromptLibrary& prompts = PromptLibrary::builtin(),
                           const BatchCallback& on_complete = {});

}  // namespace pf
